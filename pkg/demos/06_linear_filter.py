"""
The linear-filter form of weighted allocation
=============================================

Minimising ||W_m (u - u_s)||^2 + ||W_r (u - u_prev)||^2 subject to B u = nu
has the closed form u = E u_s + F u_prev + G nu. The gains satisfy B G = I,
B E = B F = 0 and E + F = I - G B: any preference only moves u inside the
null space of B.
"""

import numpy as np

from ctrlalloc import filter_gains

rng = np.random.default_rng(0)
B = rng.normal(size=(3, 4))
W_m = np.diag([0.5, 1.0, 2.0, 1.0])
W_r = np.diag([0.1, 0.1, 1.0, 3.0])
E, F, G = filter_gains(B, W_m, W_r)

print("||BG - I|| =", np.linalg.norm(B @ G - np.eye(3)))
print("||BE||     =", np.linalg.norm(B @ E))
print("||BF||     =", np.linalg.norm(B @ F))

##############################################################################
# Heavier rate weight on an effector keeps it closer to where it was.

u_s = np.ones(4)
u_prev = np.zeros(4)
nu = B @ np.full(4, 0.5)
u = E @ u_s + F @ u_prev + G @ nu
print("u =", u.round(4), " B u - nu =", (B @ u - nu).round(12))
