import init, { run_scenario, suppression_table, fourier_distribution } from "./pkg/singlet_web.js";

const $ = (id) => document.getElementById(id);

function fail(target, err) {
  target.innerHTML = "";
  const p = document.createElement("p");
  p.className = "error";
  p.textContent = String(err && err.message ? err.message : err);
  target.append(p);
}

function table(headers, rows) {
  const t = document.createElement("table");
  const head = t.createTHead().insertRow();
  for (const h of headers) {
    const th = document.createElement("th");
    th.textContent = h;
    head.append(th);
  }
  const body = t.createTBody();
  for (const r of rows) {
    const tr = body.insertRow();
    if (r.className) tr.className = r.className;
    for (const cell of r.cells) {
      const td = tr.insertCell();
      if (cell instanceof Node) td.append(cell);
      else td.textContent = cell;
    }
  }
  return t;
}

function fmt(x) {
  return x === null || x === undefined ? "–" : Number(x).toPrecision(6);
}

function showRun() {
  const out = $("run-out");
  try {
    const report = JSON.parse(run_scenario(
      $("scenario").value, Number($("run-n").value),
      $("noise").checked, $("phases").checked, Number($("seed").value)));
    out.innerHTML = "";
    const steps = report.steps.map((s) => ({ cells: [`j = ${s.j}`, fmt(s.p)] }));
    steps.push({ cells: ["success probability", fmt(report.p_success)] });
    steps.push({ cells: ["fidelity with the singlet", fmt(report.fidelity)] });
    out.append(table(["step", "probability"], steps));
    const pre = document.createElement("pre");
    pre.textContent = JSON.stringify(report, null, 1);
    out.append(pre);
  } catch (e) {
    fail(out, e);
  }
}

function showTable() {
  const out = $("sup-out");
  try {
    const t = JSON.parse(suppression_table(Number($("sup-n").value)));
    const rows = t.rows.map((r) => ({
      className: r.suppressed ? "suppressed" : "",
      cells: [`ω^${r.class}`, `(${r.output.join(",")})`, r.suppressed ? "suppressed" : "allowed",
              r.max_amplitude === null ? "not checked" : fmt(r.max_amplitude)],
    }));
    out.innerHTML = "";
    out.append(table(["input class", "output", "law", "largest |amplitude|"], rows));
  } catch (e) {
    fail(out, e);
  }
}

function showDistribution() {
  const out = $("dist-out");
  try {
    const dist = JSON.parse(fourier_distribution($("levels").value));
    const rows = dist.map((o) => {
      const bar = document.createElement("span");
      bar.className = "bar";
      bar.style.width = `${Math.round(o.probability * 300)}px`;
      return { cells: [`(${o.output.join(",")})`, fmt(o.probability), bar] };
    });
    out.innerHTML = "";
    out.append(table(["output occupations", "probability", ""], rows));
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("run").addEventListener("click", showRun);
$("sup").addEventListener("click", showTable);
$("dist").addEventListener("click", showDistribution);
showRun();
