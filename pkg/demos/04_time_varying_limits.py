"""
Time-varying magnitude and rate limits
======================================

Over 60 s the upper deflection limit follows 20*cos(Lambda(t)) while the rate
limits ramp from +-20 deg/s to +10/-30 deg/s. The demanded moments are
sinusoids whose amplitude exceeds the attainable set, so the run alternates
between reachable and unreachable demands. IDCA runs closed over its own
history: every step sees the two previous commands.
"""

import numpy as np

from ctrlalloc.config import load_config
from ctrlalloc.harness import audit_timesim, run_timesim

cfg = load_config("ghgv2_timesim")
log = run_timesim(cfg)["idca"]

##############################################################################
# A coarse look at the run, one line every 5 s.

for k in range(0, log.t.size, 500):
    print(f"t={log.t[k]:5.2f}  u_max={log.hi[k, 0]:6.2f}  rate=[{log.rlo[k, 0]:6.1f}, {log.rhi[k, 0]:5.1f}]"
          f"  |err|={np.linalg.norm(log.err[k]):9.2f}  u={np.round(log.u[k], 2)}")

##############################################################################
# The audit re-checks every step: bounds and rates respected, exact tracking
# whenever the rate-limited box could reach the demand, and no motion into a
# limit the effector is already sitting on.

print(audit_timesim(log, cfg).format())
