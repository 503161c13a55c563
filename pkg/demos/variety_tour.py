"""Build, validate and sample a few distinguished varieties.

Run with ``python3 demos/variety_tour.py``.
"""

import numpy as np

from gammalab.corpus import NILPOTENT
from gammalab.variety import (GridSpec, PencilFamily, fiber, sample_variety, separating_poly,
                              validate_pencil)
from gammalab.gamma_geom import GammaPoint

grid = GridSpec(12, 32)

# s^2 = p: the nilpotent 2x2 block
curve = PencilFamily(2, [NILPOTENT])
print("fiber over p = 0.25:", np.round(fiber(curve, 0.25)[:, 0], 6))
rep = validate_pencil(curve, grid)
print("verdict:", rep.verdict.value, "| margin trend (radius, margin):")
for r, m in rep.margin_by_radius[::3]:
    print(f"   {r:.3f}  {m:.4f}")

# a scalar family that leaves the domain already at p = 0
bad = validate_pencil(PencilFamily(2, [[[1.5]]]), grid)
print("F = [1.5]:", bad.verdict.value, "witness", bad.witness["z"], bad.witness["point"])

# a commuting three-variable family and its exit behavior
pf = PencilFamily(3, [0.2 * np.eye(2) + 0.3 * NILPOTENT, 0.1j * np.eye(2) + 0.3 * NILPOTENT])
sample = sample_variety(pf, grid)
edge = [r for r in sample.records if r.on_boundary]
print("three-variable family:", sample.report.verdict.value,
      "| boundary classes:", sorted({c.label.value for r in edge for c in r.classes}),
      "| worst relation residual", f"{max(r.relation_residuals.max() for r in edge):.1e}")

sep = separating_poly(curve, GammaPoint(2, (0,), 0.5))
print("separating (0, 0.5) from s^2 = p: index", sep.index, "value", sep.value)
