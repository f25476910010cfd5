//! Generated matplotlib scripts. Each reads the CSV next to it and writes a
//! PNG with the same stem.

const READER: &str = r##"import csv
import os
import sys

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
PATH = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "{csv}")

with open(PATH, newline="") as f:
    ROWS = list(csv.DictReader(line for line in f if not line.startswith("#")))
"##;

fn header(name: &str) -> String {
    format!(
        "#!/usr/bin/env python3\n\"\"\"Plot for {name}.csv, generated by qce.\"\"\"\n{}",
        READER.replace("{csv}", &format!("{name}.csv"))
    )
}

const SAVE: &str = r##"plt.grid(True, which="both", alpha=0.3)
plt.legend()
plt.tight_layout()
out = os.path.splitext(PATH)[0] + ".png"
plt.savefig(out, dpi=150)
print("wrote", out)
"##;

/// BER curves keyed by precoder, modulation and Q; `x` is `ptx_db` or `nu`.
pub fn ber_script(name: &str, x: &str) -> String {
    let other = if x == "nu" { "ptx_db" } else { "nu" };
    let xlabel = if x == "nu" { "CSI error variance nu" } else { "P_tx [dB]" };
    format!(
        r##"{head}
curves = {{}}
for r in ROWS:
    key = r["precoder"] + " " + r["modulation"]
    if r["q"]:
        key += " Q=" + r["q"]
    if len({{row["{other}"] for row in ROWS}}) > 1:
        key += " {other}=" + r["{other}"]
    curves.setdefault(key, []).append((float(r["{x}"]), float(r["ber"])))

for key, pts in sorted(curves.items()):
    pts.sort()
    style = "--" if key.startswith("wf ") else "-"
    plt.semilogy([p[0] for p in pts], [max(p[1], 1e-6) for p in pts], style, marker="o", label=key)
plt.xlabel("{xlabel}")
plt.ylabel("uncoded BER")
{save}"##,
        head = header(name),
        save = SAVE
    )
}

pub fn table1_script(name: &str) -> String {
    format!(
        r##"{head}
blocks = [r["block"] for r in ROWS]
fig, (a, b) = plt.subplots(1, 2, figsize=(8, 3))
a.bar(blocks, [float(r["distorted_fraction"]) for r in ROWS])
a.set_xlabel("B")
a.set_ylabel("distorted fraction")
b.bar(blocks, [float(r["mse"]) for r in ROWS], label="||t - x||^2")
b.set_xlabel("B")
{save}"##,
        head = header(name),
        save = SAVE
    )
}

pub fn alpha_script(name: &str, per_user: bool) -> String {
    let column = if per_user { "per_user" } else { "joint" };
    format!(
        r##"{head}
for n in sorted({{int(r["n"]) for r in ROWS}}):
    pts = sorted((int(r["m"]), float(r["{column}"])) for r in ROWS if int(r["n"]) == n)
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label="N=%d" % n)
plt.xlabel("M")
plt.ylabel("relative range of alpha ({column})")
{save}"##,
        head = header(name),
        save = SAVE
    )
}

pub fn iterations_script(name: &str) -> String {
    format!(
        r##"{head}
mods = []
for r in ROWS:
    if r["modulation"] not in mods:
        mods.append(r["modulation"])
for m in mods:
    pts = sorted((int(r["q"]), float(r["mean_iterations"])) for r in ROWS if r["modulation"] == m)
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=m)
plt.xscale("log", base=2)
plt.xlabel("Q")
plt.ylabel("mean simplex iterations")
{save}"##,
        head = header(name),
        save = SAVE
    )
}
