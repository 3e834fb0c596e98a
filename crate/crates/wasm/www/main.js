import init, { blobs, cluster, simulate, refine } from "./pkg/slr_wasm.js";

const PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function showError(el, e) {
  el.textContent = String(e.message ?? e);
  el.className = "err";
}

// points live in data coordinates; view is the visible data rectangle
let points = [];
let view = { x0: -6, x1: 6, y0: -4, y1: 4 };
const canvas = $("points");
const toPx = (x, y) => [
  (x - view.x0) / (view.x1 - view.x0) * canvas.width,
  (view.y1 - y) / (view.y1 - view.y0) * canvas.height,
];
const toData = (px, py) => [
  view.x0 + px / canvas.width * (view.x1 - view.x0),
  view.y1 - py / canvas.height * (view.y1 - view.y0),
];

function fitView() {
  const xs = points.filter((_, i) => i % 2 === 0);
  const ys = points.filter((_, i) => i % 2 === 1);
  const cx = (Math.min(...xs) + Math.max(...xs)) / 2;
  const cy = (Math.min(...ys) + Math.max(...ys)) / 2;
  const aspect = canvas.width / canvas.height;
  const half = 1.1 * Math.max((Math.max(...xs) - Math.min(...xs)) / 2, aspect * (Math.max(...ys) - Math.min(...ys)) / 2, 1);
  view = { x0: cx - half, x1: cx + half, y0: cy - half / aspect, y1: cy + half / aspect };
}

function drawPoints(labels) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (let i = 0; i < points.length / 2; i++) {
    const [px, py] = toPx(points[2 * i], points[2 * i + 1]);
    const l = labels ? labels[i] : -1;
    ctx.fillStyle = l < 0 ? "#bbb" : PALETTE[l % PALETTE.length];
    ctx.beginPath();
    ctx.arc(px, py, l < 0 ? 3 : 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function recluster() {
  const info = $("cluster-info");
  info.className = "";
  try {
    const labels = cluster(new Float64Array(points), $("algo").value, num("eps"), num("minpts"), num("mcs"));
    const k = labels.reduce((m, v) => Math.max(m, v + 1), 0);
    const noise = labels.filter((v) => v < 0).length;
    info.textContent = `${points.length / 2} points, ${k} clusters, ${noise} noise`;
    drawPoints(labels);
  } catch (e) {
    showError(info, e);
    drawPoints(null);
  }
}

function newBlobs() {
  const seed = Math.floor(Math.random() * 1e9);
  points = Array.from(blobs(4, 30, num("sigma"), seed));
  fitView();
  recluster();
}

canvas.addEventListener("click", (ev) => {
  const r = canvas.getBoundingClientRect();
  points.push(...toData(ev.clientX - r.left, ev.clientY - r.top));
  recluster();
});

let curves = null;

function drawCurves() {
  const c = $("curves");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  if (!curves) return;
  const key = $("metric").value;
  const [slr, base] = curves[key];
  const all = slr.concat(base).filter((v) => v !== null && Number.isFinite(v));
  const lo = key === "clusters" ? 0 : Math.min(0, ...all);
  const hi = Math.max(1, ...all);
  const pad = 40;
  const x = (t) => pad + t / Math.max(1, slr.length - 1) * (c.width - 2 * pad);
  const y = (v) => c.height - pad - (v - lo) / (hi - lo || 1) * (c.height - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, c.width - 2 * pad, c.height - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText(hi.toFixed(2), 4, pad + 4);
  ctx.fillText(lo.toFixed(2), 4, c.height - pad);
  ctx.fillText("epoch", c.width / 2 - 14, c.height - 10);
  [[slr, "#c0392b", "refined"], [base, "#2c3e50", "baseline"]].forEach(([s, color, name], k) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    let started = false;
    s.forEach((v, t) => {
      if (v === null || !Number.isFinite(v)) { started = false; return; }
      started ? ctx.lineTo(x(t), y(v)) : ctx.moveTo(x(t), y(v));
      started = true;
    });
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(name, c.width - pad - 70, pad + 14 + 14 * k);
  });
}

function runSim() {
  const info = $("sim-info");
  info.className = "";
  try {
    curves = JSON.parse(simulate(num("seed"), num("alpha"), num("sim-mcs"), num("final-sigma")));
    const last = (s) => s[s.length - 1];
    info.textContent = `eps ${curves.eps.toFixed(3)}; final ARI refined ${last(curves.ari[0]).toFixed(3)}, baseline ${last(curves.ari[1]).toFixed(3)}`;
  } catch (e) {
    curves = null;
    showError(info, e);
  }
  drawCurves();
}

function runRefine() {
  const out = $("ref-out");
  out.className = "";
  try {
    const r = JSON.parse(refine($("prev").value, $("curr").value, num("ref-alpha"), $("harden").value, num("ref-mcs")));
    const width = Math.max(0, ...r.soft.map((row) => (row ? row.length : 0)));
    let html = "<table><tr><th>sample</th>";
    for (let k = 0; k < width; k++) html += `<th>p${k}</th>`;
    html += "<th>refined</th></tr>";
    r.soft.forEach((row, i) => {
      html += `<tr><td>${i}</td>`;
      for (let k = 0; k < width; k++) html += `<td>${row ? row[k].toFixed(4) : "masked"}</td>`;
      html += `<td>${r.refined[i]}</td></tr>`;
    });
    out.innerHTML = html + "</table>";
  } catch (e) {
    showError(out, e);
  }
}

await init();
for (const id of ["algo", "eps", "minpts", "mcs"]) $(id).addEventListener("change", recluster);
$("newblobs").addEventListener("click", newBlobs);
$("clear").addEventListener("click", () => { points = []; recluster(); });
$("run").addEventListener("click", runSim);
$("metric").addEventListener("change", drawCurves);
$("go").addEventListener("click", runRefine);
newBlobs();
runSim();
runRefine();
