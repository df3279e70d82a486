import init, { ratioCurves, runGram, verifyScheme, schemeText } from "./pkg/rxtx_web.js";

const $ = (id) => document.getElementById(id);

const SERIES = [
  ["r_over_s", "R / S", "#1f77b4"],
  ["r_over_naive", "R / naive", "#ff7f0e"],
  ["r_plus_over_s_plus", "R₊ / S₊", "#2ca02c"],
  ["r_plus_over_naive_ops", "R₊ / naive ops", "#d62728"],
  ["r_plus_opt_over_s_plus_opt", "R₊ᵒᵖᵗ / S₊ᵒᵖᵗ", "#9467bd"],
  ["r_plus_opt_over_naive_ops", "R₊ᵒᵖᵗ / naive ops", "#8c564b"],
];

function plot(data) {
  const cv = $("plot");
  const ctx = cv.getContext("2d");
  const W = cv.width, H = cv.height, L = 56, R = 12, T = 12, B = 40;
  ctx.clearRect(0, 0, W, H);
  const rows = data.rows;
  const xs = rows.map((r) => Math.log2(r.n));
  const lookup = (row, key) => {
    const hit = row.ratios.find(([k]) => k === key);
    return hit ? hit[1] : null;
  };
  let ymin = Infinity, ymax = -Infinity;
  for (const [key] of SERIES)
    for (const r of rows) {
      const v = lookup(r, key);
      if (v !== null) { ymin = Math.min(ymin, v); ymax = Math.max(ymax, v); }
    }
  ymin = Math.min(ymin, 1) - 0.05; ymax = Math.max(ymax, 1) + 0.05;
  const x0 = xs[0], x1 = xs[xs.length - 1] === x0 ? x0 + 1 : xs[xs.length - 1];
  const px = (x) => L + ((x - x0) / (x1 - x0)) * (W - L - R);
  const py = (y) => T + (1 - (y - ymin) / (ymax - ymin)) * (H - T - B);

  ctx.strokeStyle = "#999"; ctx.fillStyle = "#333"; ctx.font = "12px sans-serif";
  ctx.beginPath(); ctx.moveTo(L, T); ctx.lineTo(L, H - B); ctx.lineTo(W - R, H - B); ctx.stroke();
  for (const x of xs) ctx.fillText(`2^${x}`, px(x) - 10, H - B + 16);
  for (let i = 0; i <= 5; i++) {
    const y = ymin + (i / 5) * (ymax - ymin);
    ctx.fillText(y.toFixed(2), 8, py(y) + 4);
  }
  ctx.setLineDash([4, 4]);
  ctx.beginPath(); ctx.moveTo(L, py(1)); ctx.lineTo(W - R, py(1)); ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillText("n", W / 2, H - 6);

  for (const [key, , color] of SERIES) {
    ctx.strokeStyle = color; ctx.lineWidth = 2; ctx.beginPath();
    let pen = false;
    rows.forEach((r, i) => {
      const v = lookup(r, key);
      if (v === null) return;
      const [X, Y] = [px(xs[i]), py(v)];
      pen ? ctx.lineTo(X, Y) : ctx.moveTo(X, Y);
      pen = true;
    });
    ctx.stroke();
  }
  ctx.lineWidth = 1;
  $("legend").innerHTML = SERIES.map(([, label, c]) => `<span><i style="background:${c}"></i>${label}</span>`).join("");

  const head = ["n", ...SERIES.map(([, l]) => l)];
  const body = rows.map((r) => {
    const cells = SERIES.map(([key]) => {
      const i = r.ratios.findIndex(([k]) => k === key);
      return r.exact[i] ?? "";
    });
    return `<tr><td>${r.n}</td>${cells.map((c) => `<td>${c}</td>`).join("")}</tr>`;
  });
  $("curveTable").innerHTML =
    `<table><tr>${head.map((h) => `<th>${h}</th>`).join("")}</tr>${body.join("")}</table>`;
}

function guard(out, f) {
  try { f(); } catch (e) { out.textContent = `error: ${e.message ?? e}`; out.className = "bad"; }
}

function doPlot() {
  guard($("curveTable"), () => plot(JSON.parse(ratioCurves(+$("maxExp").value, $("pow2").checked))));
}

function doRun() {
  const out = $("gramOut");
  guard(out, () => {
    const r = JSON.parse(runGram($("algo").value, +$("gramN").value, +$("cutoff").value, +$("seed").value));
    const pred = r.predicted_mults ? `  (recurrence: ${r.predicted_mults} mults, ${r.predicted_total} ops)` : "";
    out.className = r.equals_naive ? "ok" : "bad";
    out.textContent =
      `multiplications ${r.mults}, additions ${r.adds}, total ${r.total}${pred}\n` +
      `equals naive X·Xᵗ: ${r.equals_naive}, symmetric: ${r.symmetric}\n` +
      `top-left corner:\n${r.corner.map((row) => row.map((v) => String(v).padStart(6)).join("")).join("\n")}`;
  });
}

function doVerify() {
  const out = $("verifyOut");
  guard(out, () => {
    const v = JSON.parse(verifyScheme($("schemeText").value));
    out.className = v.failures.length ? "bad" : "ok";
    out.textContent =
      `${v.grid}x${v.grid} ${v.algebra} scheme, ${v.products} products, ${v.calls} recursive calls\n` +
      `${v.passed}/${v.checked} output identities verified\n` + v.failures.join("\n");
  });
}

await init();
$("plotBtn").onclick = doPlot;
$("runBtn").onclick = doRun;
$("verifyBtn").onclick = doVerify;
for (const b of document.querySelectorAll("button[data-scheme]"))
  b.onclick = () => guard($("verifyOut"), () => { $("schemeText").value = schemeText(b.dataset.scheme); doVerify(); });
$("schemeText").value = schemeText("rxtx");
doPlot();
doRun();
doVerify();
