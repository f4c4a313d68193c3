"""Write a seeded comparison report CSV for trying ``erpdeck stats``.

Ten pipelines, six subjects, thirty repeats.  Per-pipeline AUC centres are
fixed below; subjects add a shared offset and repeats add noise.  Detection
rates follow the AUC loosely and ITR is derived from them.

Usage::

    python demos/make_demo_csv.py [out.csv] [--seed N]
"""

import argparse
import os

import numpy as np

from erpdeck.metrics import itr
from erpdeck.onlinesim import PIPELINE_IDS, rows_to_csv

AUC_CENTRES = dict(zip(PIPELINE_IDS, (0.938, 0.933, 0.933, 0.925, 0.929, 0.918, 0.938, 0.941, 0.920, 0.920)))


def demo_rows(seed=0, n_subjects=6, n_repeats=30):
    rng = np.random.default_rng(seed)
    subject_offset = rng.normal(0.0, 0.04, n_subjects)
    rows = []
    for pid in PIPELINE_IDS:
        pipe_subject = rng.normal(0.0, 0.01, n_subjects)
        for s in range(n_subjects):
            for r in range(n_repeats):
                a = float(np.clip(AUC_CENTRES[pid] + subject_offset[s] + pipe_subject[s] + rng.normal(0, 0.015),
                                  0.5, 1.0))
                cdr = float(np.round(np.clip(1.0 - 4.0 * (1.0 - a) + rng.normal(0, 0.05), 0, 1) * 36) / 36)
                rows.append({"subject": s, "session": 0, "pipeline": pid, "repeat": r, "ba": a - 0.05, "auc": a,
                             "cdr": cdr, "itr": itr(9, cdr, 2.49), "train_time_s": None, "infer_ms": None,
                             "params": None, "macs": None, "status": "ok", "error": ""})
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", nargs="?", default=os.path.join(os.path.dirname(__file__), "demo_report.csv"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    with open(args.out, "w") as fh:
        fh.write(rows_to_csv(demo_rows(args.seed)))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
