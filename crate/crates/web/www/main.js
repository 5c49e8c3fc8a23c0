import init, { report, surface, nu_profile } from "./pkg/cvtele_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function fmt(x) {
  return x === null || x === undefined ? "none" : Number(x).toPrecision(8);
}

function showReport() {
  $("error").textContent = "";
  try {
    const rep = JSON.parse(report(num("q"), num("eta"), num("r"), num("phi"), $("convention").value));
    const rows = rep.sigma_out.entries.map((row) => row.map(fmt).join("  ")).join("\n");
    $("report").textContent =
      `nu (pipeline)     ${fmt(rep.nu_pipeline)}\n` +
      `nu (closed form)  ${fmt(rep.nu_closed_form)}\n` +
      `E_N (bits)        ${fmt(rep.log_negativity)}\n` +
      `fidelity          ${fmt(rep.fidelity)}\n` +
      `output physical   ${rep.output_physical}\n\nsigma_out\n${rows}`;
  } catch (e) {
    $("error").textContent = String(e);
  }
}

// White to dark blue; NaN (undefined fidelity) in grey.
function colour(t) {
  if (Number.isNaN(t)) return "rgb(200,200,200)";
  const v = Math.round(255 * (1 - t));
  return `rgb(${v},${v},255)`;
}

function drawSurface() {
  $("error").textContent = "";
  const steps = Math.round(num("steps"));
  let values;
  try {
    values = surface($("metric").value, 2, 2, steps, num("phi"), $("convention").value);
  } catch (e) {
    $("error").textContent = String(e);
    return;
  }
  const finite = Array.from(values).filter((v) => Number.isFinite(v));
  const lo = Math.min(...finite), hi = Math.max(...finite);
  const span = hi > lo ? hi - lo : 1;
  const ctx = $("surface").getContext("2d");
  const w = ctx.canvas.width / steps, h = ctx.canvas.height / steps;
  for (let i = 0; i < steps; i++) {
    for (let j = 0; j < steps; j++) {
      ctx.fillStyle = colour((values[i * steps + j] - lo) / span);
      // q to the right, r upwards
      ctx.fillRect(i * w, ctx.canvas.height - (j + 1) * h, Math.ceil(w), Math.ceil(h));
    }
  }
  $("surface-range").textContent = `q → [0, 2], r ↑ [0, 2]; min ${fmt(lo)}, max ${fmt(hi)}`;
}

function drawProfile() {
  const data = nu_profile(num("q"), 2, 81);
  const ctx = $("profile").getContext("2d");
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  let top = 0;
  for (let k = 0; k < data.length; k += 3) top = Math.max(top, data[k + 1], data[k + 2]);
  top = Math.min(top, 10);
  const x = (r) => (r / 2) * (width - 20) + 10;
  const y = (v) => height - 10 - (Math.min(v, top) / top) * (height - 20);
  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(x(0), y(1));
  ctx.lineTo(x(2), y(1));
  ctx.stroke();
  ctx.setLineDash([]);
  for (const [offset, stroke] of [[1, "#000"], [2, "#c00"]]) {
    ctx.strokeStyle = stroke;
    ctx.beginPath();
    for (let k = 0; k < data.length; k += 3) {
      const px = x(data[k]), py = y(data[k + offset]);
      if (k === 0) ctx.moveTo(px, py); else ctx.lineTo(px, py);
    }
    ctx.stroke();
  }
}

function refresh() {
  showReport();
  try {
    drawProfile();
  } catch (e) {
    $("error").textContent = String(e);
  }
}

await init();
$("run").addEventListener("click", refresh);
$("draw").addEventListener("click", drawSurface);
refresh();
drawSurface();
