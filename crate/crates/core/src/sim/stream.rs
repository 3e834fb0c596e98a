use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::SimConfig;
use crate::error::Result;
use crate::model::{FeatureMatrix, HardLabeling};

/// Ground-truth identities and one feature matrix per epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStream {
    pub ground_truth: HardLabeling,
    pub features: Vec<FeatureMatrix>,
}

/// Noise level of epoch `e`, linear from the initial to the final sigma.
pub fn noise_sigma(cfg: &SimConfig, epoch: usize) -> f64 {
    if cfg.n_epochs <= 1 {
        return cfg.initial_noise_sigma;
    }
    let t = epoch as f64 / (cfg.n_epochs - 1) as f64;
    cfg.initial_noise_sigma + (cfg.final_noise_sigma - cfg.initial_noise_sigma) * t
}

/// Synthetic embeddings of an encoder that improves over epochs.
///
/// Identity centroids are drawn once from a unit isotropic Gaussian. Every
/// epoch each centroid is jittered by `drift_sigma` and each sample is its
/// identity's jittered centroid plus isotropic noise at that epoch's sigma.
/// Samples are ordered identity by identity.
pub fn generate_stream(cfg: &SimConfig) -> Result<EpochStream> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };
    let (k, per, dim) = (cfg.n_identities, cfg.samples_per_identity, cfg.dim);

    let centroids: Vec<f64> = (0..k * dim).map(|_| normal()).collect();
    let truth = HardLabeling::new((0..k * per).map(|i| Some(i / per)).collect())?;

    let mut features = Vec::with_capacity(cfg.n_epochs);
    for epoch in 0..cfg.n_epochs {
        let sigma = noise_sigma(cfg, epoch);
        let drifted: Vec<f64> = centroids
            .iter()
            .map(|c| c + cfg.drift_sigma * normal())
            .collect();
        let mut data = Vec::with_capacity(k * per * dim);
        for id in 0..k {
            let center = &drifted[id * dim..(id + 1) * dim];
            for _ in 0..per {
                data.extend(center.iter().map(|c| c + sigma * normal()));
            }
        }
        features.push(FeatureMatrix::new(k * per, dim, data)?);
    }
    Ok(EpochStream {
        ground_truth: truth,
        features,
    })
}
