#!/usr/bin/env python3
"""Plot cumulative costs and position trajectories from a `regret_cli compare` output directory."""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

ORDER = ["h2", "hinf", "energy_regret", "pointwise_regret", "constrained_pointwise_regret", "adversarial_x0",
         "noncausal"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--png", type=Path, help="defaults to <outdir>/compare.png")
    ap.add_argument("--x-limit", type=float, help="draw a horizontal limit on the position panel")
    args = ap.parse_args()

    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4))
    for name in ORDER:
        cum = args.outdir / f"cumulative_{name}.csv"
        states = args.outdir / f"states_{name}.csv"
        if not cum.exists():
            continue
        c = pd.read_csv(cum)
        left.plot(c["step"], c["cum_cost"], label=name)
        if states.exists():
            s = pd.read_csv(states)
            right.plot(s["step"], s["x0"], label=name)
    if args.x_limit is not None:
        right.axhline(args.x_limit, color="k", linestyle="--", linewidth=0.8)
    left.set(xlabel="step", ylabel="cumulative cost")
    right.set(xlabel="step", ylabel="position")
    left.legend(fontsize=8)
    fig.tight_layout()
    png = args.png or args.outdir / "compare.png"
    fig.savefig(png, dpi=120)
    print(png)


if __name__ == "__main__":
    main()
