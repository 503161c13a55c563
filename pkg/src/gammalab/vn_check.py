"""Randomized von Neumann inequality experiments on distinguished varieties.

For a commuting tuple ``t = (S_1, ..., S_{n-1}, P)`` with a pure adjoint of
``P`` and a pencil family whose variety ``W`` is distinguished, the norm
``||f(t)||`` of any (matrix-valued) polynomial is bounded by the maximum of
``||f||`` over the closure of ``W``. The experiments draw random
polynomials, evaluate both sides and report the margin.

Which variety
-------------
If ``t`` is the compression of the Toeplitz model built from a family
``F``, the fundamental operator tuple of ``t`` is ``F^*``, not ``F``. The
dilation argument bounds ``||f(t)||`` by the supremum over the variety of
``F``, i.e. the adjoint of the fundamental operator tuple. That is what
``vn_experiment`` uses by default. Passing ``pencil_from="fo"`` uses the
fundamental operator tuple itself, which is not a valid bound in general:
for the scalar family ``F = [a]`` with ``a`` not real, ``f(s, p) = s - a -
conj(a) p`` vanishes on that variety but not at ``t``.
"""

from dataclasses import dataclass, field
import csv
import io
import itertools
import math

import numpy as np

from .errors import HypothesesNotMet
from .gamma_geom import DEFAULT_TOL
from .numerics import as_cmatrix, operator_norm, spectral_radius
from .op_theory import fo_tuple
from .variety import GridSpec, PencilFamily, Verdict, fiber, sample_variety


def multi_indices(n, max_degree):
    """All exponent tuples in ``n`` variables with total degree ``<= max_degree``.

    Sorted by total degree, then lexicographically.
    """
    out = [a for a in itertools.product(range(max_degree + 1), repeat=n)
           if sum(a) <= max_degree]
    return sorted(out, key=lambda a: (sum(a), a))


@dataclass
class MPoly:
    """Polynomial in ``n`` variables with ``r x r`` matrix coefficients.

    Variables are ordered ``(s_1, ..., s_{n-1}, p)``.
    """

    n: int
    coeffs: dict
    seed: int = None

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("polynomial needs at least one coefficient")
        blocks = {}
        order = None
        for alpha, c in self.coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n or min(alpha) < 0:
                raise ValueError(f"bad multi-index {alpha} for n={self.n}")
            c = as_cmatrix(np.atleast_2d(c), name=f"coefficient {alpha}")
            if order is None:
                order = c.shape[0]
            elif c.shape[0] != order:
                raise ValueError("all coefficient blocks must share one order")
            blocks[alpha] = c
        self.coeffs = blocks

    @property
    def block_order(self):
        return next(iter(self.coeffs.values())).shape[0]

    @property
    def degree(self):
        return max(sum(a) for a in self.coeffs)

    def scaled(self, lam):
        return MPoly(self.n, {a: lam * c for a, c in self.coeffs.items()}, self.seed)

    def star(self):
        """``f_*`` with ``f_*(X) = f(X^*)^*``: coefficients replaced by their adjoints."""
        return MPoly(self.n, {a: c.conj().T for a, c in self.coeffs.items()}, self.seed)

    def to_json(self):
        return {"n": self.n, "seed": self.seed,
                "terms": [{"alpha": list(a),
                           "coeff": [[[z.real, z.imag] for z in row] for row in c]}
                          for a, c in sorted(self.coeffs.items())]}


def random_poly(n, max_degree, block_order=1, seed=0):
    """Complex Gaussian coefficients on every monomial of degree ``<= max_degree``.

    Normalized so the largest coefficient has operator norm one.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    rng = np.random.default_rng(seed)
    idx = multi_indices(n, max_degree)
    r = block_order
    raw = rng.standard_normal((len(idx), r, r)) + 1j * rng.standard_normal((len(idx), r, r))
    top = max(operator_norm(c) for c in raw)
    return MPoly(n, {a: c / top for a, c in zip(idx, raw)}, seed)


def monomial(n, alpha, coeff=1.0):
    return MPoly(n, {tuple(alpha): np.atleast_2d(np.asarray(coeff, dtype=complex))})


def _tuple_mats(arg):
    if hasattr(arg, "S") and hasattr(arg, "P"):
        return list(arg.S) + [arg.P]
    return [as_cmatrix(m) for m in arg]


def operator_monomials(mats, alphas):
    """``X^alpha`` for each requested multi-index, built by reusing lower powers."""
    m = mats[0].shape[0]
    cache = {(0,) * len(mats): np.eye(m, dtype=complex)}

    def get(alpha):
        if alpha in cache:
            return cache[alpha]
        k = next(i for i, a in enumerate(alpha) if a > 0)
        lower = alpha[:k] + (alpha[k] - 1,) + alpha[k + 1:]
        cache[alpha] = mats[k] @ get(lower)
        return cache[alpha]

    return {a: get(a) for a in alphas}


def eval_poly(f, arg):
    """Evaluate at a scalar point (sequence of ``n`` numbers or ``GammaPoint``) or
    at a commuting tuple (``OperatorTuple`` or list of ``n`` matrices).

    Scalar points give an ``r x r`` matrix; a tuple of order ``m`` gives
    ``sum_alpha coeff_alpha (x) X^alpha`` of order ``r m``.
    """
    if hasattr(arg, "coords"):
        arg = arg.coords
    if hasattr(arg, "P") or (len(arg) and np.ndim(arg[0]) == 2):
        mats = _tuple_mats(arg)
        if len(mats) != f.n:
            raise ValueError(f"polynomial has {f.n} variables, tuple has {len(mats)}")
        mons = operator_monomials(mats, list(f.coeffs))
        return sum(np.kron(c, mons[a]) for a, c in f.coeffs.items())
    x = np.asarray(arg, dtype=complex)
    if x.shape != (f.n,):
        raise ValueError(f"point must have {f.n} coordinates")
    return eval_many(f, x[None, :])[0]


def _monomial_table(points, alphas):
    pts = np.asarray(points, dtype=complex)
    top = max(max(a) for a in alphas)
    powers = pts[:, :, None] ** np.arange(top + 1)[None, None, :]
    cols = [np.prod([powers[:, i, e] for i, e in enumerate(a)], axis=0) for a in alphas]
    return np.stack(cols, axis=1)


def eval_many(f, points):
    """Values at many scalar points; shape ``(N, r, r)``."""
    alphas = list(f.coeffs)
    table = _monomial_table(points, alphas)
    coeffs = np.stack([f.coeffs[a] for a in alphas])
    return np.einsum("nk,kij->nij", table, coeffs)


def block_norms(values):
    if values.shape[1] == 1:
        return np.abs(values[:, 0, 0])
    return np.linalg.norm(values, ord=2, axis=(1, 2))


def sup_on_points(f, points, conjugate=False):
    """Largest ``||f||`` over the rows of ``points`` (conjugated first if asked)."""
    pts = np.conj(points) if conjugate else points
    norms = block_norms(eval_many(f, pts))
    k = int(np.argmax(norms))
    return float(norms[k]), k


def refine_boundary_sup(f, pf, start_angles, width, seed=0):
    """Local maximization of ``max over fiber of ||f||`` along ``p = e^{i theta}``.

    Starts from each angle in ``start_angles`` and searches the bracket
    ``theta +- width``. Every evaluated value is attained on the variety, so
    the result never exceeds the true supremum.
    """
    from scipy.optimize import minimize_scalar

    def neg(theta):
        p = complex(math.cos(theta), math.sin(theta))
        pts = fiber(pf, p, seed)
        rows = np.concatenate([pts, np.full((len(pts), 1), p)], axis=1)
        return -sup_on_points(f, rows)[0]

    best = -math.inf
    for th in start_angles:
        res = minimize_scalar(neg, bounds=(th - width, th + width), method="bounded",
                              options={"xatol": 1e-10})
        best = max(best, -float(res.fun), -neg(th))
    return best


def purity_report(P):
    """Finite-dimensional surrogate for purity of ``P^*``: spectrum inside the disc."""
    P = as_cmatrix(P)
    m = P.shape[0]
    rho = spectral_radius(P)
    power = operator_norm(np.linalg.matrix_power(P.conj().T, m))
    return {"spectral_radius": rho, "adjoint_power_norm": power, "pure": bool(rho < 1.0)}


@dataclass
class TrialRecord:
    trial: int
    degree: int
    block_order: int
    lhs: float
    rhs: float
    margin: float
    verdict: str


@dataclass
class VNReport:
    records: list
    min_margin: float
    tol: float
    grid: GridSpec
    gate: dict
    exploratory: bool
    pencil_source: str
    pencil: PencilFamily = None
    violations: list = field(default_factory=list)

    @property
    def holds(self):
        return not self.violations

    def to_json(self):
        return {"min_margin": self.min_margin, "tol": self.tol,
                "grid": self.grid.to_json(), "gate": self.gate,
                "exploratory": self.exploratory, "pencil_source": self.pencil_source,
                "violations": self.violations,
                "trials": [r.__dict__ for r in self.records]}

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "degree", "lhs", "rhs", "margin", "verdict"])
        for r in self.records:
            w.writerow([r.trial, r.degree, repr(r.lhs), repr(r.rhs), repr(r.margin), r.verdict])
        return buf.getvalue()


def hypothesis_gate(t, pencil_from="adjoint", pf=None, grid=None, tol=DEFAULT_TOL):
    """Check what is checkable of the hypotheses; returns ``(gate dict, pencil)``."""
    gate = {"purity": purity_report(t.P)}
    if pf is None:
        fo = fo_tuple(t)
        gate["defect_rank"] = fo.rank
        if fo.rank == 0:
            gate["pencil"] = "defect space is trivial"
            return gate, None
        mats = [a.conj().T for a in fo.A] if pencil_from == "adjoint" else list(fo.A)
        pf = PencilFamily(t.n, mats)
        gate["fo_residual"] = max(fo.residuals)
    gate["pencil_source"] = pencil_from if "fo_residual" in gate else "supplied"
    return gate, pf


def vn_experiment(t, pf=None, trials=100, max_degree=4, block_order=1, grid=None,
                  tol=1e-6, seed=0, override=False, pencil_from="adjoint", refine=True,
                  polys=None):
    """Compare ``||f(t)||`` with the sampled maximum of ``||f||`` on the variety.

    Parameters
    ----------
    t : OperatorTuple
    pf : PencilFamily, optional
        Variety to test against. Built from the fundamental operator tuple of
        ``t`` when omitted, following ``pencil_from``.
    trials, max_degree, block_order : int
        Number and shape of random polynomials. Trial ``k`` uses seed
        ``seed + k``.
    grid : GridSpec
        Sampling grid; must include the boundary circle for a meaningful rhs.
    tol : float
        A trial is a VIOLATION when ``rhs - lhs < -tol``.
    override : bool
        Run even when the hypothesis gate fails; the report is then marked
        exploratory.
    pencil_from : {"adjoint", "fo"}
    refine : bool
        Locally maximize along the boundary circle starting from the best
        grid angles. This only raises rhs toward the true supremum.
    polys : list of MPoly, optional
        Use these instead of random polynomials.

    Raises
    ------
    HypothesesNotMet
        When purity fails, the variety is not certified VALID, and
        ``override`` is false.
    """
    if pencil_from not in ("adjoint", "fo"):
        raise ValueError(f"unknown pencil source {pencil_from!r}")
    grid = grid or GridSpec()
    gate, pf = hypothesis_gate(t, pencil_from, pf)
    problems = []
    if not gate["purity"]["pure"]:
        problems.append("P* is not pure")
    if pf is None:
        raise HypothesesNotMet("no pencil family: the defect space of P is trivial", gate)
    sample = sample_variety(pf, grid, seed, override=True)
    gate["variety_verdict"] = sample.report.verdict.value
    if sample.report.verdict != Verdict.VALID:
        problems.append(f"variety is {sample.report.verdict.value}")
    gate["passed"] = not problems
    if problems and not override:
        raise HypothesesNotMet("; ".join(problems), gate)

    points = sample.points()
    bd = [rec for rec in sample.records if rec.on_boundary and rec.fiber.size]
    width = 2.0 * math.pi / grid.angles
    mats = _tuple_mats(t)
    if polys is None:
        polys = [random_poly(t.n, max_degree, block_order, seed + k) for k in range(trials)]
    records, violations = [], []
    for k, f in enumerate(polys):
        lhs = operator_norm(eval_poly(f, mats))
        rhs, _ = sup_on_points(f, points)
        if refine and bd:
            vals = []
            for rec in bd:
                rows = np.concatenate([rec.fiber, np.full((len(rec.fiber), 1), rec.p)], axis=1)
                vals.append(sup_on_points(f, rows)[0])
            top = np.argsort(vals)[::-1][:2]
            starts = [math.atan2(bd[j].p.imag, bd[j].p.real) for j in top]
            rhs = max(rhs, refine_boundary_sup(f, pf, starts, width, seed))
        margin = rhs - lhs
        verdict = "VIOLATION" if margin < -tol else "HOLDS"
        if verdict == "VIOLATION":
            violations.append({"trial": k, "poly": f.to_json(), "lhs": lhs, "rhs": rhs})
        records.append(TrialRecord(k, f.degree, f.block_order, lhs, rhs, margin, verdict))
    min_margin = min((r.margin for r in records), default=math.inf)
    return VNReport(records, min_margin, tol, grid, gate, exploratory=bool(problems),
                    pencil_source=gate["pencil_source"], pencil=pf, violations=violations)
