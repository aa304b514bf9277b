import init, { dispersionCurve, alphaScan, eigenProfile } from "./pkg/boussinesq_wasm.js";

const num = (id) => Number(document.getElementById(id).value);
const params = () => ({ nu: num("nu"), alpha: num("alpha"), L: num("L"), k: num("k") });

// series: [{ x, y, color }], marks: x positions drawn as dots on the axis
function plot(canvasId, series, marks = [], markColor = "#d33") {
  const cv = document.getElementById(canvasId);
  const g = cv.getContext("2d");
  const W = cv.width, H = cv.height, pad = 36;
  g.clearRect(0, 0, W, H);
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y).filter(Number.isFinite);
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  let y0 = Math.min(...ys, 0), y1 = Math.max(...ys, 0);
  if (y1 === y0) y1 = y0 + 1;
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (W - 2 * pad);
  const sy = (y) => H - pad - ((y - y0) / (y1 - y0)) * (H - 2 * pad);

  g.strokeStyle = "#999";
  g.beginPath();
  g.moveTo(pad, sy(0));
  g.lineTo(W - pad, sy(0));
  g.stroke();
  g.fillStyle = "#555";
  g.font = "11px sans-serif";
  g.fillText(x0.toPrecision(3), pad, H - 12);
  g.fillText(x1.toPrecision(3), W - pad - 30, H - 12);
  g.fillText(y1.toPrecision(3), 2, pad);
  g.fillText(y0.toPrecision(3), 2, H - pad);

  for (const s of series) {
    g.strokeStyle = s.color;
    g.beginPath();
    s.x.forEach((x, i) => (i ? g.lineTo(sx(x), sy(s.y[i])) : g.moveTo(sx(x), sy(s.y[i]))));
    g.stroke();
  }
  g.fillStyle = markColor;
  for (const m of marks) {
    g.beginPath();
    g.arc(sx(m), sy(0), 4, 0, 2 * Math.PI);
    g.fill();
  }
}

function guarded(outId, fn) {
  const out = document.getElementById(outId);
  try {
    out.className = "out";
    out.textContent = fn();
  } catch (e) {
    out.className = "out err";
    out.textContent = String(e.message ?? e);
  }
}

function runDispersion() {
  guarded("o-dispersion", () => {
    const p = params();
    const v = JSON.parse(dispersionCurve(p.k, p.nu, p.alpha, p.L, num("count"), 3000));
    plot("c-dispersion", [{ x: v.mu_tilde, y: v.value, color: "#1f5fa8" }], v.roots);
    const rows = v.roots.map((r, i) => `j=${i + 1}  mu=${r.toFixed(12)}  lambda=${v.lambdas[i].toFixed(10)}`);
    return rows.join("\n") + (v.diagnostics.length ? `\ndiagnostics: ${JSON.stringify(v.diagnostics)}` : "");
  });
}

function runScan() {
  guarded("o-scan", () => {
    const p = params();
    const v = JSON.parse(alphaScan(p.k, num("scan-j"), p.nu, p.L, num("scan-lo"), num("scan-hi"), num("scan-step"), 2000));
    // signed log keeps the zeros visible despite the range of F
    const y = v.f.map((f) => Math.sign(f) * Math.log10(1 + Math.abs(f)));
    const zs = v.zeros.map((z) => z.alpha);
    plot("c-scan", [{ x: v.alpha, y, color: "#2a7f3f" }], zs);
    const rows = v.zeros.map((z) => `alpha=${z.alpha.toFixed(14)}  |F|=${z.residual.toExponential(2)}`);
    return `lambda=${v.lambda.toFixed(10)}, ${v.zeros.length} zeros\n` + rows.join("\n");
  });
}

function runProfile() {
  guarded("o-profile", () => {
    const p = params();
    const branch = document.getElementById("prof-branch").value;
    const v = JSON.parse(eigenProfile(branch, p.k, num("prof-j"), p.nu, p.alpha, p.L, 801));
    plot("c-profile", [
      { x: v.x, y: v.xi_re, color: "#a8321f" },
      { x: v.x, y: v.xi_im, color: "#e0a070" },
      { x: v.x, y: v.psi2_re, color: "#1f5fa8" },
      { x: v.x, y: v.psi2_im, color: "#80a8e0" },
    ]);
    return `lambda=${v.lambda.toFixed(10)}  xi'(L)=${v.obs_re.toExponential(6)}${v.obs_im >= 0 ? "+" : ""}${v.obs_im.toExponential(2)}i  ` +
      `max residual ${v.max_residual.toExponential(2)}\nred: xi (re, im), blue: psi2 (re, im)`;
  });
}

await init();
document.getElementById("run-dispersion").onclick = runDispersion;
document.getElementById("run-scan").onclick = runScan;
document.getElementById("run-profile").onclick = runProfile;
runDispersion();
runScan();
runProfile();
