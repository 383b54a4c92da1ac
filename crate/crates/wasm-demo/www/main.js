import init, { twoByTwo, errorSweep, oversamplingCompare } from "./pkg/curkit_wasm_demo.js";

const COLORS = ["#d62728", "#ff7f0e", "#1f77b4", "#2ca02c", "#9467bd"];
const $ = (id) => document.getElementById(id);
const fmt = (x) => (Number.isNaN(x) ? "NaN" : x.toExponential(3));

function fail(el, e) {
  el.textContent = String(e);
  el.classList.add("err");
}

function ok(el, text) {
  el.textContent = text;
  el.classList.remove("err");
}

// 2x2 explorer

let pick = { row: 0, col: 0 };

function drawMatrix(ctx, x0, title, vals, hi) {
  const s = 80;
  ctx.fillStyle = "#222";
  ctx.fillText(title, x0, 20);
  for (let i = 0; i < 2; i++) {
    for (let j = 0; j < 2; j++) {
      const x = x0 + j * s, y = 30 + i * s;
      const v = vals[2 * i + j];
      const mag = Math.min(1, Math.abs(v) / 2);
      ctx.fillStyle = `rgba(31,119,180,${0.1 + 0.8 * mag})`;
      ctx.fillRect(x, y, s - 4, s - 4);
      if (hi && (i === hi.row || j === hi.col)) {
        ctx.strokeStyle = i === hi.row && j === hi.col ? "#d62728" : "#ff7f0e";
        ctx.lineWidth = 3;
        ctx.strokeRect(x + 1.5, y + 1.5, s - 7, s - 7);
      }
      ctx.fillStyle = "#000";
      ctx.fillText(Math.abs(v) >= 1e4 || (v !== 0 && Math.abs(v) < 1e-3) ? v.toExponential(2) : v.toFixed(3), x + 8, y + s / 2);
    }
  }
}

function explore() {
  const eps = 10 ** Number($("x-eps").value);
  $("x-eps-val").textContent = `ε = ${eps.toExponential(1)}`;
  const out = $("x-out");
  try {
    const r = twoByTwo(eps, pick.row, pick.col);
    const ctx = $("x-canvas").getContext("2d");
    ctx.clearRect(0, 0, 480, 220);
    ctx.font = "13px system-ui";
    drawMatrix(ctx, 10, "A", r.slice(0, 4), pick);
    drawMatrix(ctx, 260, "C U⁻¹ R", r.slice(4, 8), null);
    ok(out, [
      `core A(${pick.row},${pick.col}) = ${fmt(r[8])}`,
      `relative error ${fmt(r[9])}   best rank-1 ${fmt(r[10])}   ratio ${fmt(r[9] / r[10])}`,
      `independent selection picks (${r[11]},${r[12]}), dependent picks (${r[13]},${r[14]})`,
    ].join("\n"));
  } catch (e) {
    fail(out, e);
  }
}

$("x-canvas").addEventListener("click", (ev) => {
  const rect = ev.target.getBoundingClientRect();
  const x = ev.clientX - rect.left - 10, y = ev.clientY - rect.top - 30;
  if (x < 0 || y < 0 || x >= 160 || y >= 160) return;
  pick = { row: Math.floor(y / 80), col: Math.floor(x / 80) };
  explore();
});
$("x-eps").addEventListener("input", explore);

// log-scale line plot

function logPlot(canvas, xs, series) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 60, R = 170, T = 10, B = 30;
  ctx.clearRect(0, 0, W, H);
  ctx.font = "12px system-ui";
  const ys = series.flatMap((s) => s.ys).filter((y) => y > 0 && Number.isFinite(y));
  if (!ys.length) return;
  const lo = Math.floor(Math.log10(Math.min(...ys))), hi = Math.ceil(Math.log10(Math.max(...ys)));
  const span = Math.max(hi - lo, 1);
  const xMin = xs[0], xMax = xs[xs.length - 1];
  const px = (x) => L + ((x - xMin) / Math.max(xMax - xMin, 1)) * (W - L - R);
  const py = (y) => T + ((hi - Math.log10(y)) / span) * (H - T - B);
  ctx.strokeStyle = "#ccc";
  ctx.fillStyle = "#444";
  const step = Math.max(1, Math.ceil(span / 8));
  for (let e = lo; e <= hi; e += step) {
    const y = py(10 ** e);
    ctx.beginPath(); ctx.moveTo(L, y); ctx.lineTo(W - R, y); ctx.stroke();
    ctx.fillText(`1e${e}`, 8, y + 4);
  }
  ctx.fillText("k", (W - R + L) / 2, H - 8);
  ctx.fillText(String(xMin), L, H - 14);
  ctx.fillText(String(xMax), W - R - 12, H - 14);
  series.forEach((s, idx) => {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.dashed ? 1.5 : 2;
    ctx.setLineDash(s.dashed ? [5, 4] : []);
    ctx.beginPath();
    let pen = false;
    xs.forEach((x, i) => {
      const y = s.ys[i];
      if (!(y > 0) || !Number.isFinite(y)) { pen = false; return; }
      if (pen) ctx.lineTo(px(x), py(y)); else ctx.moveTo(px(x), py(y));
      pen = true;
    });
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = s.color;
    ctx.fillRect(W - R + 12, T + 8 + idx * 18, 14, 3);
    ctx.fillStyle = "#222";
    ctx.fillText(s.name, W - R + 32, T + 13 + idx * 18);
  });
}

// error against k

function sweep() {
  const out = $("s-out");
  const boxes = [...document.querySelectorAll("#sweep input[type=checkbox]")].filter((b) => b.checked);
  const modes = boxes.map((b) => b.value);
  try {
    const flat = errorSweep($("s-gen").value, Number($("s-kmax").value), modes.join(","), BigInt($("s-seed").value));
    const w = 2 + modes.length;
    const rows = [];
    for (let i = 0; i < flat.length; i += w) rows.push(flat.slice(i, i + w));
    const ks = rows.map((r) => r[0]);
    const series = [{ name: "best rank-k", color: "#555", dashed: true, ys: rows.map((r) => r[1]) }];
    boxes.forEach((b, m) => series.push({
      name: b.parentElement.textContent.trim(),
      color: COLORS[m % COLORS.length],
      ys: rows.map((r) => r[2 + m]),
    }));
    logPlot($("s-canvas"), ks, series);
    const failed = rows.flatMap((r) => modes.filter((_, m) => Number.isNaN(r[2 + m])).map((m) => `${m}@k=${r[0]}`));
    ok(out, failed.length ? `no result (singular core): ${failed.join(", ")}` : "");
  } catch (e) {
    fail(out, e);
  }
}
$("s-run").addEventListener("click", sweep);

// oversampling comparison

function compare() {
  const out = $("c-out");
  try {
    const r = oversamplingCompare($("c-gen").value, Number($("c-k").value), Number($("c-p").value), BigInt($("c-seed").value));
    const names = ["best rank-k", "p = 0", "projection", "leverage", "greedy"];
    const canvas = $("c-canvas"), ctx = canvas.getContext("2d");
    const W = canvas.width, H = canvas.height, L = 110, top = 10, bh = 34;
    ctx.clearRect(0, 0, W, H);
    ctx.font = "13px system-ui";
    const max = Math.max(...r);
    r.forEach((v, i) => {
      const y = top + i * (bh + 14);
      ctx.fillStyle = "#222";
      ctx.fillText(names[i], 8, y + bh / 2 + 4);
      ctx.fillStyle = i === 0 ? "#999" : COLORS[i - 1];
      const w = (v / max) * (W - L - 120);
      ctx.fillRect(L, y, w, bh);
      ctx.fillStyle = "#222";
      ctx.fillText(`${fmt(v)}  (${(v / r[0]).toFixed(3)}x)`, L + w + 8, y + bh / 2 + 4);
    });
    ok(out, "");
  } catch (e) {
    fail(out, e);
  }
}
$("c-run").addEventListener("click", compare);

await init();
explore();
sweep();
compare();
