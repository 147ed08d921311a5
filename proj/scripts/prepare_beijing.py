#!/usr/bin/env python3
"""Convert the raw Beijing multi-site air-quality CSVs into the functional
regression input format.

Each output row is one station-day: the response is the 24-hour PM2.5
trajectory (columns ``y@0`` .. ``y@23``; the loader rescales hour locations
onto [0, 1]), and the covariates are the daily averages of O3, SO2, NO2, CO,
TEMP, PRES, DEWP and WSPM over the same day.

Pipeline (one defensible reading of the usual preprocessing, documented here
because the source description leaves the order open):
  1. Drop every hour with a missing value in any selected variable, then keep
     only station-days with all 24 hours present.
  2. Center and standardize per station: each covariate by the mean/sd of its
     daily averages at that station, and PM2.5 by the mean/sd of all retained
     hourly readings at that station (one scale for the whole curve, so the
     within-day shape is preserved).
  3. Pool the 12 stations and shuffle the rows with a fixed seed, so a
     streaming pass does not see one station as a contiguous block.

Usage:
  python3 scripts/prepare_beijing.py --raw-dir data/beijing/raw \
      --out data/beijing/beijing_pm25.csv [--seed 1]
"""

import argparse
import glob
import os
import sys

import numpy as np
import pandas as pd

COVARIATES = ["O3", "SO2", "NO2", "CO", "TEMP", "PRES", "DEWP", "WSPM"]
RESPONSE = "PM2.5"
HOURS = 24


def load_station(path: str) -> pd.DataFrame:
    frame = pd.read_csv(path)
    needed = ["station", "year", "month", "day", "hour", RESPONSE] + COVARIATES
    missing = [c for c in needed if c not in frame.columns]
    if missing:
        raise SystemExit(f"{path}: missing expected columns {missing}")
    frame = frame[needed].dropna()

    # Keep only days with a complete 24-hour record.
    by_day = frame.groupby(["year", "month", "day"])
    complete = by_day.filter(lambda day: len(day) == HOURS and
                             set(day["hour"]) == set(range(HOURS)))
    return complete.sort_values(["year", "month", "day", "hour"])


def station_rows(frame: pd.DataFrame) -> pd.DataFrame:
    """One row per complete day: standardized covariate means + PM2.5 curve."""
    days = frame.groupby(["year", "month", "day"], sort=True)

    averages = days[COVARIATES].mean()
    curves = np.stack([day[RESPONSE].to_numpy() for _, day in days])

    # Per-station standardization (population sd, guarded against constants).
    cov_mean = averages.mean(axis=0)
    cov_sd = averages.std(axis=0, ddof=0).replace(0.0, 1.0)
    standardized = (averages - cov_mean) / cov_sd

    pm_mean = float(curves.mean())
    pm_sd = float(curves.std()) or 1.0
    curves = (curves - pm_mean) / pm_sd

    out = standardized.reset_index(drop=True)
    for hour in range(HOURS):
        out[f"y@{hour}"] = curves[:, hour]
    return out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--raw-dir", default="data/beijing/raw",
                        help="directory with the PRSA_Data_*.csv station files")
    parser.add_argument("--out", default="data/beijing/beijing_pm25.csv",
                        help="output CSV path")
    parser.add_argument("--seed", type=int, default=1,
                        help="seed for the pooled row shuffle")
    args = parser.parse_args()

    paths = sorted(glob.glob(os.path.join(args.raw_dir, "PRSA_Data_*.csv")))
    if len(paths) != 12:
        raise SystemExit(f"expected 12 station files in {args.raw_dir}, "
                         f"found {len(paths)}; run scripts/fetch_beijing.sh first")

    pieces = []
    for path in paths:
        frame = load_station(path)
        if frame.empty:
            print(f"warning: no complete days in {os.path.basename(path)}",
                  file=sys.stderr)
            continue
        rows = station_rows(frame)
        pieces.append(rows)
        print(f"{os.path.basename(path)}: {len(rows)} complete days")

    pooled = pd.concat(pieces, ignore_index=True)
    pooled = pooled.sample(frac=1.0, random_state=args.seed).reset_index(drop=True)

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    pooled.to_csv(args.out, index=False, float_format="%.10g")
    print(f"wrote {len(pooled)} rows x {len(pooled.columns)} columns to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
