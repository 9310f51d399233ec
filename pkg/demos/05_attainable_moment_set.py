"""
The attainable moment set
=========================

The moments a box of deflections can produce form a zonotope: the image of
the box under B. Its corners are among the images of the 2^m box corners.
"""

import numpy as np

from ctrlalloc import EffectiveBounds, contains, moment_set
from ctrlalloc.ams import write_csv

B = np.array([[-20.01, 20.01, 93.94, -93.94],
              [126.7, 126.7, -501.4, -501.4],
              [-127.5, 127.5, -45.72, 46.72]])
box = EffectiveBounds(np.zeros(4), np.full(4, 20.0))
ms = moment_set(B, box)
print(f"{len(ms.vertices)} vertex images, {len(ms.hull_facets)} hull triangles")
print("per-axis range:", [[lo, hi] for lo, hi in zip(ms.lower.round(1).tolist(), ms.upper.round(1).tolist())])

##############################################################################
# Nose-up pitch is limited by the two upper flaps: 2 * 126.7 * 20 = 5068 Nm.
# A demand just beyond it is rejected by the membership oracle.

top = B @ np.array([20.0, 20.0, 0.0, 0.0])
print("max pitch", top[1], "| inside:", contains(B, box, top), "| 1% beyond:", contains(B, box, 1.01 * top))

##############################################################################
# Vertices and facets go to CSV for external plotting.

print(write_csv(ms, "ams_out"))
