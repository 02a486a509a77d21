#!/usr/bin/env python3
"""Plot the per-horizon table written by `coase sweep --out`, or the
cumulative regrets of a trajectory CSV written by `coase simulate`."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_sweep(df, ax):
    ax.errorbar(df["horizon"], df["mean_r_sw_over_T"], yerr=df["se_r_sw_over_T"],
                marker="o", capsize=3, label="r_sw / T")
    for col in ("mean_r_down_p_over_T", "mean_r_up_n_over_T", "mean_r_down_n_over_T"):
        if col in df:
            se = col.replace("mean_", "se_")
            ax.errorbar(df["horizon"], df[col], yerr=df[se], marker="s", capsize=3,
                        label=col.removeprefix("mean_").replace("_over_T", " / T"))
    ax.set_xscale("log", base=2)
    ax.set_xlabel("horizon T")
    ax.set_ylabel("regret per round")


def plot_trajectory(df, ax):
    for col in ("gap_sw", "gap_up", "gap_down"):
        ax.plot(df["t"], df[col].cumsum(), label="cumulative " + col)
    if "phase" in df and (df["phase"] == "phase1").any():
        ax.axvline(df.loc[df["phase"] == "phase1", "t"].max(), color="grey", linestyle=":",
                   label="end of phase 1")
    ax.set_xlabel("round t")
    ax.set_ylabel("pseudo-regret")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv")
    parser.add_argument("-o", "--output", default="plot.png")
    args = parser.parse_args()

    df = pd.read_csv(args.csv)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if "horizon" in df.columns:
        plot_sweep(df, ax)
    else:
        plot_trajectory(df, ax)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
