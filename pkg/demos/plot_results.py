# Reference plotting script for the CSV outputs of the other demos and of
# the command-line tools.  Plotting is deliberately kept out of the library
# core: everything it needs is in the CSVs.
#
#   python3 demos/plot_results.py          # plots whichever CSVs it finds

import csv
import os
import sys

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is not installed; the library itself does not need it")


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_ci(path="ci.csv"):
    rows = read_rows(path)
    periods = sorted({int(r["period"]) for r in rows})
    lows, highs = [], []
    for t in periods:
        accepted = [float(r["candidate"]) for r in rows
                    if int(r["period"]) == t and r["accepted"] == "1"]
        lows.append(min(accepted) if accepted else float("nan"))
        highs.append(max(accepted) if accepted else float("nan"))
    fig, ax = plt.subplots()
    ax.fill_between(periods, lows, highs, alpha=0.3, label="accepted effects")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("period")
    ax.set_ylabel("effect")
    ax.set_title("Pointwise confidence band")
    ax.legend()
    fig.savefig("ci.png", dpi=150)
    print("wrote ci.png")


def plot_power(path="power_curves.csv"):
    rows = read_rows(path)
    effects = [float(r["effect"]) for r in rows]
    fig, ax = plt.subplots()
    for name in rows[0]:
        if name == "effect":
            continue
        ax.plot(effects, [float(r[name]) for r in rows], marker="o", label=name)
    ax.set_xlabel("true effect")
    ax.set_ylabel("rejection rate")
    ax.set_title("Power at the 10% level")
    ax.legend()
    fig.savefig("power_curves.png", dpi=150)
    print("wrote power_curves.png")


def plot_null_vs_pre(path="null_vs_pre.csv"):
    rows = read_rows(path)
    fig, ax = plt.subplots()
    for mode in ("under_null", "pre_only"):
        pts = sorted(
            (float(r["rho_u"]), float(r["rejection_rate"]))
            for r in rows if r["mode"] == mode
        )
        ax.plot(*zip(*pts), marker="o", label=mode.replace("_", " "))
    ax.axhline(0.1, color="k", lw=0.8, ls="--", label="nominal level")
    ax.set_xlabel("shock autocorrelation")
    ax.set_ylabel("rejection rate of a true null")
    ax.set_title("Full-sample vs pre-only fitting")
    ax.legend()
    fig.savefig("null_vs_pre.png", dpi=150)
    print("wrote null_vs_pre.png")


def plot_residuals(path="residuals.csv"):
    rows = read_rows(path)
    periods = [int(r["period"]) for r in rows]
    values = [float(r["residual"]) for r in rows]
    fig, ax = plt.subplots()
    ax.plot(periods, values, marker=".")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("period")
    ax.set_ylabel("residual")
    ax.set_title("Fit residuals")
    fig.savefig("residuals.png", dpi=150)
    print("wrote residuals.png")


if __name__ == "__main__":
    found = False
    for path, plotter in [
        ("ci.csv", plot_ci),
        ("power_curves.csv", plot_power),
        ("null_vs_pre.csv", plot_null_vs_pre),
        ("residuals.csv", plot_residuals),
    ]:
        if os.path.exists(path):
            plotter(path)
            found = True
    if not found:
        print("no known CSVs found here; run the other demos or the CLI first")
