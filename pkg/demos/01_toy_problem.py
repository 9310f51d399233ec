"""
Two effectors, one axis, an asymmetric box
==========================================

The smallest problem where the minimum-norm answer goes wrong: two effectors
with opposite effectiveness must produce a demand of 0.5 while both stay in
[0, 1.5]. The pseudoinverse wants one of them negative.
"""

import numpy as np

from ctrlalloc import (ActuatorLimits, ActuatorState, WeightingMatrices, idca, pica, qpca, rpica,
                       saturated_pica)

B = np.array([[0.5, -0.5]])
nu = np.array([0.5])
limits = ActuatorLimits.magnitude_only([0.0, 0.0], [1.5, 1.5])
state = ActuatorState.at_rest([0.0, 0.0])

##############################################################################
# The minimum-norm answer splits the demand symmetrically and ignores the box.

print("PICA           ", pica(B, nu).u)

##############################################################################
# Clipping it is feasible but loses half the demand.

r = saturated_pica(B, nu, limits, state)
print("saturated PICA ", r.u, "error", r.error)

##############################################################################
# Redistribution, the box-constrained least-squares solver and the iterative
# dynamic allocator all find the admissible exact point [1, 0]. IDCA here runs
# with an epsilon-floored identity weighting and no steady-state preference.

print("RPICA          ", rpica(B, nu, limits, state).u)
print("QPCA           ", qpca(B, nu, limits, state).u)
print("IDCA           ", idca(B, nu, limits, state, np.zeros(2), WeightingMatrices.uniform(2)).u)
