#!/usr/bin/env python3
"""Log-log plot of mean cumulative regret against T, one line per policy."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", nargs="+", help="CSV files written by `mbol run`")
    ap.add_argument("--out", default="regret.png")
    args = ap.parse_args()

    df = pd.concat([pd.read_csv(p) for p in args.csv], ignore_index=True)
    df = df[df["errors"].isna() & df["cumulative_regret"].notna()]
    if "W" in df:
        df = df.drop_duplicates(subset=["policy", "n", "T", "seed"])

    fig, ax = plt.subplots(figsize=(6, 4))
    for policy, g in df.groupby("policy"):
        m = g.groupby("T")["cumulative_regret"].agg(["mean", "std"]).reset_index()
        ax.errorbar(m["T"], m["mean"], yerr=m["std"], marker="o", capsize=2, label=policy)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=2)
    ax.set_xlabel("T")
    ax.set_ylabel("mean cumulative regret")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
