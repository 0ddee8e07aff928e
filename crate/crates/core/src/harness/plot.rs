//! Matplotlib scripts written next to the CSV outputs. They are never run
//! here.

use std::path::Path;

fn csv_name(csv: &Path) -> String {
    csv.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// BER against noise sigma, one line per variant (seeds summed).
pub fn ber_plot_script(csv: &Path) -> String {
    format!(
        r#"import csv
from collections import defaultdict
import matplotlib.pyplot as plt

acc = defaultdict(lambda: [0, 0])
with open("{name}") as f:
    for row in csv.DictReader(f):
        key = (row["variant"] + ":" + row["num_states"], float(row["sigma"]))
        acc[key][0] += int(row["bit_errors"])
        acc[key][1] += int(row["bits"])

lines = defaultdict(list)
for (label, sigma), (errs, bits) in sorted(acc.items()):
    lines[label].append((sigma, max(errs, 0.5) / bits))
for label, pts in lines.items():
    plt.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
plt.xlabel("noise sigma")
plt.ylabel("BER")
plt.grid(True, which="both")
plt.legend()
plt.savefig("{name}.png", dpi=150)
"#,
        name = csv_name(csv)
    )
}

/// BER against the swept parameter, one line per noise sigma.
pub fn sweep_plot_script(csv: &Path, column: &str) -> String {
    format!(
        r#"import csv
from collections import defaultdict
import matplotlib.pyplot as plt

acc = defaultdict(lambda: [0, 0])
with open("{name}") as f:
    for row in csv.DictReader(f):
        key = (float(row["sigma"]), float(row["{column}"]))
        acc[key][0] += int(row["bit_errors"])
        acc[key][1] += int(row["bits"])

lines = defaultdict(list)
for (sigma, x), (errs, bits) in sorted(acc.items()):
    lines[sigma].append((x, max(errs, 0.5) / bits))
for sigma, pts in lines.items():
    plt.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"sigma={{sigma}}")
plt.xlabel("{column}")
plt.ylabel("BER")
plt.grid(True, which="both")
plt.legend()
plt.savefig("{name}.png", dpi=150)
"#,
        name = csv_name(csv),
        column = column
    )
}

/// Grouped bars of the four resource counts per variant at each N.
pub fn complexity_plot_script(csv: &Path) -> String {
    format!(
        r#"import csv
import matplotlib.pyplot as plt

rows = [r for r in csv.DictReader(open("{name}")) if "/" not in r["variant"]]
fields = ["var_mult", "const_mult", "adders", "comparators"]
fig, axes = plt.subplots(1, len(fields), figsize=(16, 4))
for ax, field in zip(axes, fields):
    for variant in sorted({{r["variant"] for r in rows}}):
        pts = [(int(r["N"]), int(r[field])) for r in rows if r["variant"] == variant]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=variant)
    ax.set_xscale("log", base=2)
    ax.set_title(field)
    ax.set_xlabel("N")
axes[0].legend()
fig.tight_layout()
fig.savefig("{name}.png", dpi=150)
"#,
        name = csv_name(csv)
    )
}

/// Path of the script that accompanies `csv`.
pub fn script_path(csv: &Path) -> std::path::PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".plot.py");
    s.into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripts_reference_the_csv() {
        let p = Path::new("/tmp/out/ber.csv");
        assert!(ber_plot_script(p).contains("open(\"ber.csv\")"));
        assert!(sweep_plot_script(p, "O").contains("row[\"O\"]"));
        assert!(complexity_plot_script(p).contains("{r[\"variant\"] for r in rows}"));
        assert_eq!(script_path(p), Path::new("/tmp/out/ber.csv.plot.py"));
    }
}
