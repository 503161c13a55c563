"""Random polynomial tests of the von Neumann inequality on a compressed model.

Run with ``python3 demos/von_neumann.py``.
"""

from gammalab.op_theory import build_model, compress_model, fo_tuple
from gammalab.variety import GridSpec, PencilFamily
from gammalab.vn_check import MPoly, vn_experiment

a = 0.3 + 0.4j
pf = PencilFamily(2, [[[a]]])
t = compress_model(build_model(pf, 8), 5)
print("fundamental operator of the compression:", fo_tuple(t).A[0][0, 0], "(= conj(a))")

grid = GridSpec(12, 64)
rep = vn_experiment(t, trials=50, max_degree=4, grid=grid)
print(f"50 random quartics against the variety of a: holds={rep.holds}, "
      f"min margin {rep.min_margin:.4f}")

# the variety of the fundamental operator itself is the wrong comparison set
f = MPoly(2, {(1, 0): 1.0, (0, 0): -a, (0, 1): -a.conjugate()})
wrong = vn_experiment(t, trials=0, polys=[f], grid=grid, pencil_from="fo")
right = vn_experiment(t, trials=0, polys=[f], grid=grid)
print(f"f = s - a - conj(a) p: ||f(t)|| = {wrong.records[0].lhs:.3f}, "
      f"sup on variety of conj(a) = {wrong.records[0].rhs:.1e}, "
      f"sup on variety of a = {right.records[0].rhs:.3f}")
