import init, { degrade, sweep } from "./pkg/dctx_web.js";

const $ = (id) => document.getElementById(id);
let source = null;
let current = null;
let freq = 0;

function testPattern(w, h) {
  const c = document.createElement("canvas");
  c.width = w;
  c.height = h;
  const g = c.getContext("2d");
  const grad = g.createLinearGradient(0, 0, w, h);
  grad.addColorStop(0, "#2a5599");
  grad.addColorStop(0.5, "#e8d27a");
  grad.addColorStop(1, "#a1342f");
  g.fillStyle = grad;
  g.fillRect(0, 0, w, h);
  for (let i = 0; i < 12; i++) {
    g.strokeStyle = `hsl(${i * 30}, 70%, 40%)`;
    g.lineWidth = 1 + (i % 3);
    g.beginPath();
    g.arc(w * 0.7, h * 0.55, 10 + i * 9, 0, 2 * Math.PI);
    g.stroke();
  }
  g.fillStyle = "#111";
  g.font = "bold 44px serif";
  g.fillText("JPEG 8x8", 24, 70);
  for (let x = 0; x < 160; x += 4) {
    g.fillStyle = x % 8 ? "#fff" : "#000";
    g.fillRect(24 + x, h - 70, 4, 50);
  }
  return g.getImageData(0, 0, w, h);
}

function draw(canvas, rgba, w, h) {
  canvas.width = w;
  canvas.height = h;
  canvas.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), w, h), 0, 0);
}

function setSource(img) {
  source = img;
  $("dims").textContent = `${img.width} x ${img.height} pixels`;
  draw($("original"), img.data, img.width, img.height);
  $("sweep-table").innerHTML = "";
  update();
}

const fmt = (v, d) => (Number.isFinite(v) ? v.toFixed(d) : "inf");

function scoreRow(s) {
  return [s.qf, s.bytes, fmt(100 * s.sparsity, 1), fmt(s.psnr, 2), fmt(s.ssim, 4), fmt(s.psnr_b, 2), fmt(s.js, 4), fmt(s.bha, 4)];
}
const HEAD = ["QF", "bytes", "zeros %", "PSNR", "SSIM", "PSNR-B", "JS", "Bhattacharyya"];

function table(el, rows) {
  el.innerHTML = `<tr>${HEAD.map((h) => `<th>${h}</th>`).join("")}</tr>` +
    rows.map((r) => `<tr>${r.map((v) => `<td>${v}</td>`).join("")}</tr>`).join("");
}

function update() {
  if (!source) return;
  const qf = Number($("qf").value);
  $("qf-out").textContent = qf;
  if (current) current.free();
  try {
    current = degrade(new Uint8Array(source.data.buffer), source.width, source.height, qf, $("sub").value);
  } catch (e) {
    $("scores").textContent = String(e);
    return;
  }
  draw($("decoded"), current.rgba(), source.width, source.height);
  table($("scores"), [scoreRow(current.scores())]);
  const url = $("download").href;
  if (url.startsWith("blob:")) URL.revokeObjectURL(url);
  $("download").href = URL.createObjectURL(new Blob([current.jpeg()], { type: "image/jpeg" }));
  drawFrequencies();
}

function drawFrequencies() {
  const rates = current.zero_rates();
  const grid = $("freqs");
  grid.innerHTML = "";
  rates.forEach((r, k) => {
    const cell = document.createElement("div");
    const v = Math.round(255 * r);
    cell.style.background = `rgb(${v},${v},${v})`;
    cell.style.color = r > 0.5 ? "#000" : "#fff";
    cell.textContent = k;
    cell.title = `k=${k} (u=${k >> 3}, v=${k & 7}): ${(100 * r).toFixed(1)}% zeros`;
    if (k === freq) cell.className = "sel";
    cell.onclick = () => { freq = k; drawFrequencies(); };
    grid.appendChild(cell);
  });
  const [rows, cols] = current.grid();
  const c = $("channel");
  draw(c, current.channel(freq, $("embedded").checked), cols, rows);
  c.style.width = `${Math.min(520, cols * 8)}px`;
  $("channel-cap").textContent = `frequency k=${freq} over ${rows} x ${cols} blocks (${(100 * rates[freq]).toFixed(1)}% zeros)`;
}

function runSweep() {
  if (!source) return;
  const qfs = new Uint32Array([10, 20, 30, 40, 50, 60, 70, 80, 90, 100]);
  const rows = sweep(new Uint8Array(source.data.buffer), source.width, source.height, qfs, $("sub").value);
  table($("sweep-table"), rows.map((s) => { const r = scoreRow(s); s.free(); return r; }));
}

$("file").onchange = async () => {
  const f = $("file").files[0];
  if (!f) return;
  const bmp = await createImageBitmap(f);
  const scale = Math.min(1, 1024 / Math.max(bmp.width, bmp.height));
  const c = document.createElement("canvas");
  c.width = Math.round(bmp.width * scale);
  c.height = Math.round(bmp.height * scale);
  const g = c.getContext("2d");
  g.drawImage(bmp, 0, 0, c.width, c.height);
  setSource(g.getImageData(0, 0, c.width, c.height));
};
$("qf").oninput = update;
$("sub").onchange = update;
$("embedded").onchange = () => current && drawFrequencies();
$("run-sweep").onclick = runSweep;

await init();
setSource(testPattern(384, 256));
