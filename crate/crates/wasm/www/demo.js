import init, { curve_fan, sweep_mesh, residual_slice } from "./pkg/sol_geo_wasm.js";

const $ = (id) => document.getElementById(id);

function values(form) {
  const v = {};
  for (const el of $(form).querySelectorAll("input")) {
    v[el.name] = el.type === "number" ? Number(el.value) : el.value;
  }
  return v;
}

// Orbit camera shared by the 3D canvases.
function makeView(canvas, draw) {
  const view = { yaw: 0.6, pitch: 0.35, scale: 1, draw };
  let drag = null;
  canvas.addEventListener("pointerdown", (e) => { drag = [e.clientX, e.clientY]; canvas.setPointerCapture(e.pointerId); });
  canvas.addEventListener("pointerup", () => { drag = null; });
  canvas.addEventListener("pointermove", (e) => {
    if (!drag) return;
    view.yaw += (e.clientX - drag[0]) * 0.01;
    view.pitch = Math.max(-1.5, Math.min(1.5, view.pitch + (e.clientY - drag[1]) * 0.01));
    drag = [e.clientX, e.clientY];
    view.draw();
  });
  return view;
}

function project(view, canvas, p, center, radius) {
  const [x, y, z] = [p[0] - center[0], p[1] - center[1], p[2] - center[2]];
  const cy = Math.cos(view.yaw), sy = Math.sin(view.yaw);
  const cp = Math.cos(view.pitch), sp = Math.sin(view.pitch);
  const x1 = cy * x - sy * y, y1 = sy * x + cy * y;
  const y2 = cp * y1 - sp * z, z2 = sp * y1 + cp * z;
  const s = (0.42 * Math.min(canvas.width, canvas.height)) / radius;
  return [canvas.width / 2 + s * x1, canvas.height / 2 - s * z2, y2];
}

function bounds(flat) {
  const lo = [Infinity, Infinity, Infinity], hi = [-Infinity, -Infinity, -Infinity];
  for (let i = 0; i < flat.length; i += 3) {
    for (let k = 0; k < 3; k++) {
      lo[k] = Math.min(lo[k], flat[i + k]);
      hi[k] = Math.max(hi[k], flat[i + k]);
    }
  }
  const center = lo.map((l, k) => (l + hi[k]) / 2);
  const radius = Math.max(1e-9, ...hi.map((h, k) => (h - lo[k]) / 2)) * Math.sqrt(3);
  return { center, radius };
}

function axes(ctx, view, canvas, b) {
  const names = ["x", "y", "z"];
  ctx.lineWidth = 1;
  for (let k = 0; k < 3; k++) {
    const e = [...b.center];
    e[k] += b.radius * 0.6;
    const o = project(view, canvas, b.center, b.center, b.radius);
    const t = project(view, canvas, e, b.center, b.radius);
    ctx.strokeStyle = "#999";
    ctx.beginPath(); ctx.moveTo(o[0], o[1]); ctx.lineTo(t[0], t[1]); ctx.stroke();
    ctx.fillStyle = "#666";
    ctx.fillText(names[k], t[0] + 3, t[1]);
  }
}

function report(id, text, error = false) {
  $(id).textContent = text;
  $(id).className = error ? "out err" : "out";
}

// ---- characteristic curves
const fanCanvas = $("fan");
let fanData = null;
const fanView = makeView(fanCanvas, drawFan);

function computeFan() {
  const v = values("fan-form");
  const samples = 80;
  try {
    const pts = curve_fan(v.x0, v.y0, v.z0, v.count, v.tmax, samples);
    fanData = { pts, count: v.count, per: samples + 1, b: bounds(pts) };
    report("fan-out", `${v.count} curves, ${pts.length / 3} points`);
  } catch (e) {
    fanData = null;
    report("fan-out", String(e.message ?? e), true);
  }
  drawFan();
}

function drawFan() {
  const ctx = fanCanvas.getContext("2d");
  ctx.clearRect(0, 0, fanCanvas.width, fanCanvas.height);
  if (!fanData) return;
  const { pts, count, per, b } = fanData;
  axes(ctx, fanView, fanCanvas, b);
  ctx.lineWidth = 1.2;
  for (let c = 0; c < count; c++) {
    ctx.strokeStyle = `hsl(${(360 * c) / count}, 65%, 45%)`;
    ctx.beginPath();
    for (let i = 0; i < per; i++) {
      const j = 3 * (c * per + i);
      const q = project(fanView, fanCanvas, [pts[j], pts[j + 1], pts[j + 2]], b.center, b.radius);
      if (i === 0) ctx.moveTo(q[0], q[1]); else ctx.lineTo(q[0], q[1]);
    }
    ctx.stroke();
  }
}

// ---- ruled surface
const sweepCanvas = $("sweep");
let sweepData = null;
const sweepView = makeView(sweepCanvas, drawSweep);

function computeSweep() {
  const v = values("sweep-form");
  try {
    const m = sweep_mesh(v.alpha, 0, 0, 0, v.eps, v.t, v.n, v.n, v.skew);
    const pos = m.positions, vt = m.vt;
    let vmax = 0;
    for (const x of vt) vmax = Math.max(vmax, Math.abs(x));
    sweepData = { pos, vt, rows: m.rows, cols: m.cols, vmax, b: bounds(pos) };
    report("sweep-out",
      `orthogonality defect ${m.orthogonality_defect.toExponential(2)}\n` +
      `singular loci found ${m.singular_loci}\ncolour: ⟨V,T⟩ (blue < 0 < red)`);
    m.free();
  } catch (e) {
    sweepData = null;
    report("sweep-out", String(e.message ?? e), true);
  }
  drawSweep();
}

function colour(v, vmax) {
  const s = vmax > 0 ? Math.max(-1, Math.min(1, v / vmax)) : 0;
  const a = Math.round(255 * (1 - Math.abs(s)));
  return s >= 0 ? `rgb(255,${a},${a})` : `rgb(${a},${a},255)`;
}

function drawSweep() {
  const ctx = sweepCanvas.getContext("2d");
  ctx.clearRect(0, 0, sweepCanvas.width, sweepCanvas.height);
  if (!sweepData) return;
  const { pos, vt, rows, cols, vmax, b } = sweepData;
  const P = [];
  for (let i = 0; i < pos.length; i += 3) P.push(project(sweepView, sweepCanvas, [pos[i], pos[i + 1], pos[i + 2]], b.center, b.radius));
  const quads = [];
  for (let i = 0; i + 1 < rows; i++) {
    for (let j = 0; j + 1 < cols; j++) {
      const ids = [i * cols + j, i * cols + j + 1, (i + 1) * cols + j + 1, (i + 1) * cols + j];
      const depth = ids.reduce((s, k) => s + P[k][2], 0) / 4;
      const val = ids.reduce((s, k) => s + vt[k], 0) / 4;
      quads.push({ ids, depth, val });
    }
  }
  quads.sort((a, b) => b.depth - a.depth);
  ctx.strokeStyle = "rgba(0,0,0,0.25)";
  ctx.lineWidth = 0.5;
  for (const q of quads) {
    ctx.fillStyle = colour(q.val, vmax);
    ctx.beginPath();
    q.ids.forEach((k, n) => (n === 0 ? ctx.moveTo(P[k][0], P[k][1]) : ctx.lineTo(P[k][0], P[k][1])));
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }
  // singular curve t = 0 (middle column when the grid is odd)
  if (cols % 2 === 1) {
    const j = (cols - 1) / 2;
    ctx.strokeStyle = "#000";
    ctx.lineWidth = 2;
    ctx.beginPath();
    for (let i = 0; i < rows; i++) {
      const p = P[i * cols + j];
      if (i === 0) ctx.moveTo(p[0], p[1]); else ctx.lineTo(p[0], p[1]);
    }
    ctx.stroke();
  }
  axes(ctx, sweepView, sweepCanvas, b);
}

// ---- residual slice
function computeSlice() {
  const v = values("slice-form");
  const canvas = $("slice");
  const ctx = canvas.getContext("2d");
  const n = 160;
  let data;
  try {
    data = residual_slice(v.u, v.z, -v.w, v.w, -v.w, v.w, n);
  } catch (e) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    report("slice-out", String(e.message ?? e), true);
    return;
  }
  const img = ctx.createImageData(n, n);
  let worst = 0;
  for (let k = 0; k < n * n; k++) {
    const [u, nh, r] = [data[3 * k], data[3 * k + 1], data[3 * k + 2]];
    // brightness: log10 |residual| from 1e-12 (white) to 1 (black); NaN grey
    let g = 160;
    if (Number.isFinite(r)) {
      worst = Math.max(worst, Math.abs(r));
      const l = Math.log10(Math.max(Math.abs(r), 1e-12));
      g = Math.round(255 * Math.min(1, Math.max(0, -l / 12)));
    }
    const sign = Number.isFinite(u) && u < 0;
    img.data.set([sign ? g * 0.85 : g, g, sign ? g : g * 0.85, 255], 4 * k);
    if (Number.isFinite(nh) && nh < 1e-3) img.data.set([220, 0, 0, 255], 4 * k);
  }
  const off = new OffscreenCanvas(n, n);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  report("slice-out",
    `max |normalized residual| ${worst.toExponential(2)}\n` +
    `${worst < 1e-9 ? "every level set in view is minimal" : "some level sets are not minimal"}\n` +
    "shade: u > 0 warm, u < 0 cool; red: |N_h| < 1e-3");
}

await init();
for (const [form, fn] of [["fan-form", computeFan], ["sweep-form", computeSweep], ["slice-form", computeSlice]]) {
  $(form).addEventListener("input", fn);
  fn();
}
