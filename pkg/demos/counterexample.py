"""A point outside the three-variable domain whose two-variable shadows all lie inside.

Run with ``python3 demos/counterexample.py``.
"""

import cmath

from gammalab.gamma_geom import GammaPoint, canonical_c, classify_point
from gammalab.interplay import COUNTEREXAMPLE_POINT, counterexample_demo, project32

x = GammaPoint.from_coords(COUNTEREXAMPLE_POINT)
c, _ = canonical_c(x)
print("source point       ", x.coords)
print("classification     ", classify_point(x).label.value)
print("witness c          ", tuple(round(v.real, 12) for v in c))
print("c in two variables ", classify_point(GammaPoint(2, (c[0],), c[1])).label.value)

# twisting by w and dividing by 3 never leaves the two-variable domain
for k in (0, 45, 90, 180):
    img = project32(x, cmath.exp(2j * cmath.pi * k / 360))
    coords = ", ".join(f"{v:.4f}" for v in img.coords)
    print(f"w = exp(2 pi i {k}/360): image ({coords}) -> {classify_point(img).label.value}")

rep = counterexample_demo()
print("images outside the closure:", rep["images_exterior"] or "none")
