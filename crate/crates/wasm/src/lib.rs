//! Browser bindings for the demo page in `www/`.
//!
//! Each exported function is a thin wrapper over a plain Rust function so
//! the logic can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use slr_core::clustering::{dbscan, hdbscan};
use slr_core::refine::{harden_hdbscan, harden_max, refine_epoch};
use slr_core::sim::{generate_stream, run_simulation, Arm, M_ARI, M_CLUSTERS, M_CONSISTENCY};
use slr_core::{FeatureMatrix, HardLabeling, SimConfig, SlrConfig};

/// Labels for flat `[x0, y0, x1, y1, ...]` points; -1 marks noise.
pub fn cluster_xy(
    xy: &[f64],
    algo: &str,
    eps: f64,
    min_pts: usize,
    min_cluster_size: usize,
) -> Result<Vec<i32>, String> {
    if !xy.len().is_multiple_of(2) {
        return Err("coordinates must come in x, y pairs".into());
    }
    if xy.is_empty() {
        return Ok(Vec::new());
    }
    let features = FeatureMatrix::new(xy.len() / 2, 2, xy.to_vec()).map_err(|e| e.to_string())?;
    let labels = match algo {
        "dbscan" => dbscan(&features, eps, min_pts),
        "hdbscan" => hdbscan(&features, min_cluster_size),
        other => return Err(format!("unknown algorithm `{other}`")),
    }
    .map_err(|e| e.to_string())?;
    Ok(labels.to_raw().into_iter().map(|v| v as i32).collect())
}

/// A 2-D sample from the simulator: `k` identities of `per` points each at
/// noise level `sigma`, returned flat.
pub fn blobs_xy(k: usize, per: usize, sigma: f64, seed: u64) -> Result<Vec<f64>, String> {
    let cfg = SimConfig {
        n_identities: k,
        samples_per_identity: per,
        dim: 2,
        initial_noise_sigma: sigma,
        final_noise_sigma: sigma,
        n_epochs: 1,
        rng_seed: seed,
        ..SimConfig::default()
    };
    let stream = generate_stream(&cfg).map_err(|e| e.to_string())?;
    Ok(stream.features[0]
        .as_slice()
        .iter()
        .map(|v| v * 3.0)
        .collect())
}

#[derive(Serialize)]
struct Curves {
    eps: f64,
    ari: [Vec<f64>; 2],
    consistency: [Vec<f64>; 2],
    clusters: [Vec<f64>; 2],
}

/// Per-epoch curves for both arms (refined first, baseline second) as JSON.
pub fn simulate_json(
    seed: u64,
    alpha: f64,
    min_cluster_size: usize,
    final_sigma: f64,
) -> Result<String, String> {
    let sim = SimConfig {
        rng_seed: seed,
        final_noise_sigma: final_sigma,
        ..SimConfig::default()
    };
    let slr = SlrConfig {
        alpha,
        min_cluster_size,
        ..SlrConfig::default()
    };
    slr.validate().map_err(|e| e.to_string())?;
    let run = run_simulation(&sim, &slr).map_err(|e| e.to_string())?;
    let pair = |m: &str| [run.series(Arm::Slr, m), run.series(Arm::Baseline, m)];
    let curves = Curves {
        eps: run.eps,
        ari: pair(M_ARI),
        consistency: pair(M_CONSISTENCY),
        clusters: pair(M_CLUSTERS),
    };
    serde_json::to_string(&curves).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Refined {
    soft: Vec<Option<Vec<f64>>>,
    refined: Vec<i64>,
}

fn parse_labels(text: &str) -> Result<HardLabeling, String> {
    let raw = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| format!("`{t}` is not a label"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if raw.iter().any(|&v| v < -1) {
        return Err("labels must be >= -1".into());
    }
    Ok(HardLabeling::compacted(
        raw.into_iter().map(|v| usize::try_from(v).ok()).collect(),
    ))
}

/// Refines `curr` against `prev` (comma or space separated labels) and
/// returns the soft rows and hardened labels as JSON. Masked rows are null.
pub fn refine_json(
    prev: &str,
    curr: &str,
    alpha: f64,
    harden: &str,
    min_cluster_size: usize,
) -> Result<String, String> {
    let (prev, curr) = (parse_labels(prev)?, parse_labels(curr)?);
    if !(0.0..=1.0).contains(&alpha) {
        return Err("alpha must lie in [0, 1]".into());
    }
    let soft = refine_epoch(&prev, &curr, alpha).map_err(|e| e.to_string())?;
    let refined = match harden {
        "max" => harden_max(&soft),
        "hdbscan" => harden_hdbscan(&soft, min_cluster_size).map_err(|e| e.to_string())?,
        other => return Err(format!("unknown hardening `{other}`")),
    };
    let out = Refined {
        soft: (0..soft.n_samples())
            .map(|i| (!soft.is_masked(i)).then(|| soft.row(i).to_vec()))
            .collect(),
        refined: refined.to_raw(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn cluster(
    xy: &[f64],
    algo: &str,
    eps: f64,
    min_pts: usize,
    min_cluster_size: usize,
) -> Result<Vec<i32>, JsError> {
    cluster_xy(xy, algo, eps, min_pts, min_cluster_size).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn blobs(k: usize, per: usize, sigma: f64, seed: u32) -> Result<Vec<f64>, JsError> {
    blobs_xy(k, per, sigma, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate(
    seed: u32,
    alpha: f64,
    min_cluster_size: usize,
    final_sigma: f64,
) -> Result<String, JsError> {
    simulate_json(u64::from(seed), alpha, min_cluster_size, final_sigma)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn refine(
    prev: &str,
    curr: &str,
    alpha: f64,
    harden: &str,
    min_cluster_size: usize,
) -> Result<String, JsError> {
    refine_json(prev, curr, alpha, harden, min_cluster_size).map_err(|e| JsError::new(&e))
}
