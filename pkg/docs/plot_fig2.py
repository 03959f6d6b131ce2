"""Plot the CSV written by ``dynoracle fig2`` (needs matplotlib).

Usage: python docs/plot_fig2.py fig2.csv [out.png]
"""
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main(path, out="fig2.png"):
    series = defaultdict(list)
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            series[row["method"]].append((float(row["kappa"]), float(row["rho_best"])))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for method, pts in sorted(series.items()):
        pts.sort()
        ax.plot([k for k, _ in pts], [r for _, r in pts], marker="o", label=method)
    ax.set_xlabel(r"$\kappa = \beta_g / \mu_g$")
    ax.set_ylabel("best rate")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    main(*sys.argv[1:3])
