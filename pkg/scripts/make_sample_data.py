#!/usr/bin/env python3
"""Regenerate the bundled 100-day Q/D/R sample series.

The series mimics a contained single-wave outbreak at province scale.
Underlying dynamics are autonomous in the three observed variables
(logistic-contact infection with constant recovery and fatality rates):

    dQ/dt = beta * Q * (1 - (Q + D + R) / K) - (gamma + delta) * Q
    dD/dt = delta * Q
    dR/dt = gamma * Q

integrated at a fine internal step and sampled daily, with mild
multiplicative noise on the daily increments. Counts are integers and the
file format matches the real-data ingestion contract (header
``date,Q,D,R``, ISO dates).
"""

import argparse
import csv
import datetime
from pathlib import Path

import numpy as np

START = datetime.date(2020, 1, 22)
DAYS = 100
K = 66000.0          # effective outbreak ceiling
BETA = 0.30          # daily contact-infection rate
GAMMA = 0.040        # daily recovery rate
DELTA = 0.0016       # daily fatality rate
SUBSTEPS = 20        # internal integration steps per day
NOISE = 0.02
SEED = 20200122


def day_increments(q, d, r):
    """Advance one day with sub-stepped Euler; returns the increments."""
    h = 1.0 / SUBSTEPS
    q1, d1, r1 = q, d, r
    for _ in range(SUBSTEPS):
        new_inf = BETA * q1 * (1.0 - (q1 + d1 + r1) / K)
        dq = new_inf - (GAMMA + DELTA) * q1
        q1 += h * dq
        d1 += h * DELTA * q1
        r1 += h * GAMMA * q1
    return q1 - q, d1 - d, r1 - r


def simulate():
    rng = np.random.default_rng(SEED)
    q, d, r = 420.0, 12.0, 24.0
    rows = [(q, d, r)]
    for _ in range(1, DAYS):
        dq, dd, dr = day_increments(q, d, r)
        dd_obs = max(dd * (1.0 + NOISE * rng.standard_normal()), 0.0)
        dr_obs = max(dr * (1.0 + NOISE * rng.standard_normal()), 0.0)
        dq_obs = dq * (1.0 + NOISE * rng.standard_normal())
        q = max(q + dq_obs, 0.0)
        d += dd_obs
        r += dr_obs
        rows.append((q, d, r))
    return [(round(q), round(d), round(r)) for q, d, r in rows]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent
                                             / "data" / "covid_qdr_sample.csv"))
    args = parser.parse_args()
    rows = simulate()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "Q", "D", "R"])
        for t, (q, d, r) in enumerate(rows):
            writer.writerow([(START + datetime.timedelta(days=t)).isoformat(),
                             q, d, r])
    print(f"wrote {len(rows)} days to {out}")


if __name__ == "__main__":
    main()
