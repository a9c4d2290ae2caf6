import init, { reflectionCurve, permittivitySweep, interactionMap, basisSize } from "./pkg/layered_gsm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function status(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.classList.toggle("error", isError);
}

// Line plot of several series sharing an x axis. `series` is
// [{ y: Float64Array|number[], color, label }].
function linePlot(canvas, x, series, { xLabel, yLabel, yRange }) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = { l: 56, r: 16, t: 14, b: 36 };
  ctx.clearRect(0, 0, w, h);
  const xs = [Math.min(...x), Math.max(...x)];
  let ys = yRange;
  if (!ys) {
    const all = series.flatMap((s) => Array.from(s.y));
    ys = [Math.min(...all), Math.max(...all)];
    if (ys[0] === ys[1]) ys = [ys[0] - 1, ys[1] + 1];
  }
  const px = (v) => pad.l + ((v - xs[0]) / (xs[1] - xs[0] || 1)) * (w - pad.l - pad.r);
  const py = (v) => h - pad.b - ((v - ys[0]) / (ys[1] - ys[0])) * (h - pad.t - pad.b);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui";
  for (let i = 0; i <= 4; i++) {
    const yv = ys[0] + ((ys[1] - ys[0]) * i) / 4;
    const xv = xs[0] + ((xs[1] - xs[0]) * i) / 4;
    ctx.fillText(yv.toPrecision(3), 4, py(yv) + 4);
    ctx.fillText(xv.toPrecision(3), px(xv) - 12, h - pad.b + 16);
  }
  ctx.fillText(xLabel, w / 2 - 20, h - 4);
  ctx.save();
  ctx.translate(12, h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(yLabel, -30, 0);
  ctx.restore();

  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    s.y.forEach((v, i) => (i ? ctx.lineTo(px(x[i]), py(v)) : ctx.moveTo(px(x[i]), py(v))));
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, w - pad.r - 110, pad.t + 16 + 16 * k);
  });
}

// Splits a flat array of `stride`-tuples into columns.
function columns(flat, stride) {
  const cols = Array.from({ length: stride }, () => []);
  for (let i = 0; i < flat.length; i++) cols[i % stride].push(flat[i]);
  return cols;
}

function runFresnel() {
  try {
    const t0 = performance.now();
    const flat = reflectionCurve(num("f-eps"), num("f-sigma"), num("f-slab-eps"), num("f-slab-mm"), num("f-freq"), 180);
    const [theta, te, tm] = columns(flat, 3);
    linePlot($("f-plot"), theta, [
      { y: te, color: "#1f77b4", label: "|ρ| TE" },
      { y: tm, color: "#d62728", label: "|ρ| TM" },
    ], { xLabel: "incidence angle (deg)", yLabel: "|ρ|", yRange: [0, 1] });
    status("f-status", `${(performance.now() - t0).toFixed(1)} ms`);
  } catch (e) {
    status("f-status", String(e.message ?? e), true);
  }
}

function runSweep() {
  status("s-status", "running…");
  // Let the status paint before the (blocking) computation.
  setTimeout(() => {
    try {
      const count = num("s-count");
      const t0 = performance.now();
      const flat = permittivitySweep(num("s-l"), num("s-min"), num("s-max"), count, num("s-sigma"),
        -num("s-z"), num("s-freq"), num("s-seed"));
      const ms = performance.now() - t0;
      const [eps, db, phase] = columns(flat, 3);
      linePlot($("s-plot"), eps, [{ y: db, color: "#2ca02c", label: "|Γ| (dB)" }],
        { xLabel: "ground εr", yLabel: "dB" });
      status("s-status", `${count} points, ${(ms / count).toFixed(1)} ms per point, ` +
        `phase ${Math.min(...phase).toFixed(0)}° … ${Math.max(...phase).toFixed(0)}°`);
    } catch (e) {
      status("s-status", String(e.message ?? e), true);
    }
  }, 10);
}

// Perceptual-ish blue→yellow ramp for t ∈ [0, 1].
function ramp(t) {
  const r = Math.round(255 * Math.min(1, Math.max(0, 1.5 * t - 0.3)));
  const g = Math.round(255 * Math.min(1, Math.max(0, 1.2 * t)));
  const b = Math.round(255 * Math.max(0, 0.6 - 0.6 * t) + 80 * (1 - t));
  return [r, g, Math.min(255, b)];
}

function runMap() {
  try {
    const l = num("w-l");
    const t0 = performance.now();
    const grid = interactionMap(l, num("w-eps"), num("w-sigma"), -num("w-z"), num("w-freq"));
    const j = basisSize(l);
    const finite = Array.from(grid).filter(Number.isFinite);
    const hi = Math.max(...finite);
    const lo = Math.max(Math.min(...finite), hi - 12);
    const canvas = $("w-plot");
    const ctx = canvas.getContext("2d");
    const img = ctx.createImageData(j, j);
    for (let i = 0; i < j * j; i++) {
      const v = grid[i];
      const [r, g, b] = Number.isFinite(v) ? ramp((Math.max(v, lo) - lo) / (hi - lo || 1)) : [255, 255, 255];
      img.data.set([r, g, b, 255], 4 * i);
    }
    const off = new OffscreenCanvas(j, j);
    off.getContext("2d").putImageData(img, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
    status("w-status", `j = ${j}, ${finite.length} stored entries, ` +
      `log10|W| ∈ [${lo.toFixed(1)}, ${hi.toFixed(1)}], ${(performance.now() - t0).toFixed(1)} ms`);
  } catch (e) {
    status("w-status", String(e.message ?? e), true);
  }
}

await init();
$("f-run").addEventListener("click", runFresnel);
$("s-run").addEventListener("click", runSweep);
$("w-run").addEventListener("click", runMap);
runFresnel();
runMap();
