import init, { eval_diagonal, monodromy_ratio, theta } from "./pkg/branchint_demo.js";

const num = (box, name) => Number(box.querySelector(`[name=${name}]`).value);

const fmt = (z) => `${z[0].toPrecision(12)} ${z[1] < 0 ? "-" : "+"} ${Math.abs(z[1]).toPrecision(12)}i`;

function show(box, json, lines) {
  const out = box.querySelector("pre");
  const v = JSON.parse(json);
  out.textContent = v.error ? `error: ${v.error}` : lines(v).join("\n");
}

function wire(id, run) {
  const box = document.getElementById(id);
  box.querySelector("button").addEventListener("click", () => {
    const t0 = performance.now();
    run(box);
    box.querySelector("pre").textContent += `\n(${(performance.now() - t0).toFixed(1)} ms)`;
  });
}

await init();

wire("eval", (box) =>
  show(box, eval_diagonal(num(box, "a"), num(box, "alpha_re"), num(box, "alpha_im"), num(box, "k"), num(box, "resolution")),
    (v) => [`value ${fmt(v.value)}`, `error estimate ${v.error.toExponential(2)}`]));

wire("monodromy", (box) =>
  show(box, monodromy_ratio(num(box, "r"), num(box, "alpha_re"), num(box, "alpha_im"), num(box, "k")),
    (v) => [`start ${fmt(v.initial)}`, `after the loop ${fmt(v.value)}`, `ratio ${v.ratio ? fmt(v.ratio) : "undefined"}`]));

wire("theta", (box) => {
  const names = ["a_re", "a_im", "b_re", "b_im", "c_re", "c_im", "d_re", "d_im"];
  show(box, theta(new Float64Array(names.map((n) => num(box, n)))),
    (v) => [`θ ${v.theta ? fmt(v.theta) : "∞ (bc = 0)"}`, `abcd ${fmt(v.abcd)}`, `on the divisor abcd = 0: ${v.on_divisor}`]);
});
