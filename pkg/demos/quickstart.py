"""Calibrate a pipeline on a synthetic subject and decode one online session.

Usage::

    python demos/quickstart.py [pipeline] [snr]
"""

import sys

from erpdeck.onlinesim import SessionPlan, run_session, shift_sweep

pipeline = sys.argv[1] if len(sys.argv) > 1 else "sh-lda"
snr = sys.argv[2] if len(sys.argv) > 2 else "high"

plan = SessionPlan(pipeline=pipeline, snr=snr, seed=1)
res = run_session(plan)
m = res.report
print(f"{pipeline} at {snr} SNR: detection {m.command_detection_rate:.3f}, AUC {m.auc:.3f}, "
      f"ITR {m.itr_bits_per_min:.1f} bit/min over {res.n_blocks} selections ({res.duration_s:.2f} s)")
for t, d in zip(res.true_commands, res.decoded_commands):
    print(f"  target {t} -> decoded {d}{'' if t == d else '  (miss)'}")

if pipeline in ("sh-lda", "swlda", "blda"):
    sw = shift_sweep(plan, n_seeds=3)
    print("detection vs ERP amplitude scale:",
          ", ".join(f"{s:.2f}: {v:.2f}" for s, v in zip(sw.scales, sw.mean_detection)))
