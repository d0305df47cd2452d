// Glue for the sinolab wasm demo. No framework: read controls, call into
// wasm, blit RGBA buffers onto canvases.
import init, { TomoDemo, CubicDemo } from "./pkg/sinolab_wasm.js";

const $ = (id) => document.getElementById(id);
const status = $("status");

function blit(canvasId, rgba, w, h) {
  const canvas = $(canvasId);
  const img = new ImageData(new Uint8ClampedArray(rgba), w, h);
  const off = document.createElement("canvas");
  off.width = w;
  off.height = h;
  off.getContext("2d").putImageData(img, 0, 0);
  const ctx = canvas.getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

let demo = null;

function rebuildDemo() {
  const size = +$("phsize").value;
  const i = +$("icount").value;
  const j = +$("jcount").value;
  status.textContent = `building ${size}² phantom and ${i}×${j} sinogram…`;
  // let the status paint before the synchronous wasm call
  setTimeout(() => {
    demo = new TomoDemo(size, i, j);
    blit("phantom", demo.phantom_rgba(), size, size);
    blit("sino", demo.sinogram_rgba(), i, j);
    refreshInversion();
    status.textContent = "ready";
  }, 20);
}

function refreshInversion() {
  if (!demo) return;
  const level = +$("level").value;
  const seed = +$("seed").value;
  const filter = $("filter").value;
  const thresh = +$("thresh").value;
  $("levelv").textContent = level.toFixed(2);
  $("threshv").textContent = thresh.toFixed(2);
  const i = demo.sino_width(), j = demo.sino_height();
  blit("noisy", demo.noisy_sinogram_rgba(level, seed), i, j);
  const out = 128;
  blit("fbp", demo.reconstruct_fbp(level, seed, filter, out), out, out);
  $("fbperr").textContent = demo.last_error().toFixed(2);
  blit("hough", demo.reconstruct_hough(level, seed, thresh, out), out, out);
  $("hougherr").textContent = demo.last_error().toFixed(2);
}

function refreshCubic() {
  const a = +$("ca").value, b = +$("cb").value;
  const n = +$("cn").value, noise = +$("cnoise").value, seed = +$("cseed").value;
  $("cav").textContent = a.toFixed(2);
  $("cbv").textContent = b.toFixed(2);
  $("cnoisev").textContent = noise.toFixed(3);
  let cubic;
  try {
    cubic = new CubicDemo(a, b, n, noise, seed);
  } catch (e) {
    $("cpeak").textContent = String(e);
    return;
  }
  const cells = cubic.acc_cells();
  blit("cacc", cubic.accumulator_rgba(), cells, cells);

  // scatter plot of the sampled points over [-2, 2]^2
  const cv = $("cpoints");
  const ctx = cv.getContext("2d");
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, cv.width, cv.height);
  const pts = cubic.points();
  ctx.fillStyle = "#6cf";
  for (let k = 0; k + 1 < pts.length; k += 2) {
    const px = ((pts[k] + 2) / 4) * cv.width;
    const py = (1 - (pts[k + 1] + 2) / 4) * cv.height;
    ctx.fillRect(px - 1.5, py - 1.5, 3, 3);
  }

  // mark the detected maximum on the accumulator
  const peak = cubic.peak();
  const ax = ((peak[0] + 2) / 4) * cv.width;
  const ay = (1 - (peak[1] + 2) / 4) * cv.height;
  const acc = $("cacc").getContext("2d");
  acc.strokeStyle = "#f55";
  acc.lineWidth = 1.5;
  acc.beginPath();
  acc.arc(ax, ay, 7, 0, 2 * Math.PI);
  acc.stroke();
  $("cpeak").textContent =
    `(a, b) = (${peak[0].toFixed(2)}, ${peak[1].toFixed(2)}), ${peak[2]} votes`;
}

await init();
status.textContent = "ready";
rebuildDemo();
refreshCubic();

$("rebuild").addEventListener("click", rebuildDemo);
for (const id of ["level", "seed", "filter", "thresh"]) {
  $(id).addEventListener("input", refreshInversion);
}
for (const id of ["ca", "cb", "cn", "cnoise", "cseed"]) {
  $(id).addEventListener("input", refreshCubic);
}
