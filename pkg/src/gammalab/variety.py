"""Distinguished varieties cut out by commuting matrix pencils.

A family ``F_1, ..., F_{n-1}`` of ``d x d`` matrices defines the pencils
``Phi_i(p) = F_i^* + p F_{n-i}`` and the algebraic set

    { (s, p) : det(Phi_i(p) - s_i I) = 0 for every i }.

When ``[F_i, F_j] = 0`` and ``[F_i^*, F_{n-j}] = [F_j^*, F_{n-i}]`` the
pencils commute for every ``p`` and the points over ``p`` are the joint
eigenvalues of ``(Phi_1(p), ..., Phi_{n-1}(p))``. The set is a
distinguished variety of the symmetrized polydisc when these points stay
inside the open domain for ``|p| < 1``.

The regular-sequence requirement is met by structure. Each
``f_i = det(Phi_i(p) - s_i I)`` is monic of degree ``d`` in its own
variable ``s_i`` (up to the sign ``(-1)^d``), and no two ``f_i`` share that
variable, so each ``f_i`` is a non-zero-divisor modulo the previous ones.
``validate_pencil`` records this and checks the leading coefficient
numerically by interpolation.
"""

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
from enum import Enum
import io
import json
import math
import os

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import GammaLabError, HypothesesNotMet
from .gamma_geom import (DEFAULT_TOL, GammaPoint, Label, classify_point, desymmetrize,
                         symmetrize)
from .joint_spectrum import (MatrixTuple, joint_eigs, matrix_from_json, matrix_to_json)
from .numerics import as_cmatrix, commutator, numerical_radius, operator_norm

BOUNDARY_TOL = 1e-6
COLLISION_RELAX = 1e2


class Verdict(str, Enum):
    VALID = "VALID"
    INVALID = "INVALID"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class PencilFamily:
    n: int
    F: list

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        F = [as_cmatrix(m, name=f"F{i + 1}") for i, m in enumerate(self.F)]
        if len(F) != self.n - 1:
            raise ValueError(f"expected {self.n - 1} pencil matrices, got {len(F)}")
        d = F[0].shape[0]
        if any(m.shape[0] != d for m in F):
            raise ValueError("pencil matrices must share one order")
        self.F = F

    @property
    def d(self):
        return self.F[0].shape[0]

    def pencils(self, p):
        """``[F_i^* + p F_{n-i}]`` for i = 1..n-1."""
        m = self.n - 1
        return [self.F[i].conj().T + p * self.F[m - 1 - i] for i in range(m)]

    def adjoint(self):
        return PencilFamily(self.n, [f.conj().T for f in self.F])

    def f_values(self, s, p):
        """``det(Phi_i(p) - s_i I)`` for each i."""
        eye = np.eye(self.d)
        return np.array([np.linalg.det(phi - si * eye)
                         for phi, si in zip(self.pencils(p), s)])

    def det_tolerance(self):
        """Strictest of the per-pencil bounds ``1e-6 (1 + ||F_i||)^d``."""
        return min(1e-6 * (1.0 + operator_norm(f)) ** self.d for f in self.F)

    def to_json(self):
        return {"n": self.n, "order": self.d, "matrices": [matrix_to_json(f) for f in self.F]}

    @classmethod
    def from_json(cls, obj):
        try:
            n = int(obj["n"])
            mats = [matrix_from_json(m) for m in obj["matrices"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed PencilFamily JSON: {exc}") from exc
        pf = cls(n, mats)
        if "order" in obj and int(obj["order"]) != pf.d:
            raise ValueError(f"declared order {obj['order']} does not match matrices ({pf.d})")
        return pf


@dataclass(frozen=True)
class GridSpec:
    """Polar grid over the closed disc.

    ``radii`` values run from 0 to ``1 - eps`` inclusive; each carries
    ``angles`` equally spaced points. The unit circle is appended as one
    more ring when ``include_boundary`` is set.
    """

    radii: int = 24
    angles: int = 64
    include_boundary: bool = True
    eps: float = 1e-3

    def __post_init__(self):
        if self.radii < 1 or self.angles < 1:
            raise ValueError("grid needs at least one radius and one angle")

    def rings(self):
        rs = list(np.linspace(0.0, 1.0 - self.eps, self.radii)) if self.radii > 1 else [0.0]
        out = [(float(r), False) for r in rs]
        if self.include_boundary:
            out.append((1.0, True))
        return out

    def points(self):
        """List of ``(ring index, angle index, p, on_boundary)`` in radius-major order."""
        th = 2.0 * np.pi * np.arange(self.angles) / self.angles
        unit = np.exp(1j * th)
        out = []
        for a, (r, bd) in enumerate(self.rings()):
            for b in range(self.angles):
                out.append((a, b, complex(r * unit[b]), bd))
        return out

    def to_json(self):
        return {"radii": self.radii, "angles": self.angles,
                "include_boundary": self.include_boundary, "eps": self.eps}


@dataclass
class FiberRecord:
    ring: int
    angle: int
    p: complex
    on_boundary: bool
    fiber: np.ndarray                # (branches, n-1)
    det_residuals: np.ndarray        # (branches,) max over i
    classes: list
    relation_residuals: np.ndarray   # (branches,) max_i |s_i - conj(s_{n-i}) p|
    collision: bool = False
    error: str = None


def fiber(pf, p, seed=0):
    """Joint eigenvalues of the pencils at ``p``; shape ``(d, n-1)`` with multiplicity."""
    js = joint_eigs(MatrixTuple(pf.pencils(complex(p))), seed=seed)
    return js.points


def relation_residual(s, p):
    m = len(s)
    return max(abs(s[i] - np.conj(s[m - 1 - i]) * p) for i in range(m))


def _has_collision(pts, scale):
    if len(pts) < 2:
        return False
    diff = np.max(np.abs(pts[:, None, :] - pts[None, :, :]), axis=2)
    np.fill_diagonal(diff, np.inf)
    return bool(diff.min() <= 1e-6 * scale)


def _fiber_record(pf, item, seed, tol):
    ring, angle, p, bd = item
    try:
        pts = fiber(pf, p, seed)
    except GammaLabError as exc:
        empty = np.zeros((0, pf.n - 1), dtype=complex)
        return FiberRecord(ring, angle, p, bd, empty, np.zeros(0), [], np.zeros(0),
                           error=f"{type(exc).__name__}: {exc}")
    ctol = BOUNDARY_TOL if bd else tol
    dets, classes, rel = [], [], []
    for s in pts:
        dets.append(float(np.max(np.abs(pf.f_values(s, p)))))
        classes.append(classify_point(GammaPoint(pf.n, tuple(s), p), ctol))
        rel.append(relation_residual(s, p))
    scale = 1.0 + float(np.max(np.abs(pts))) if pts.size else 1.0
    return FiberRecord(ring, angle, p, bd, pts, np.array(dets), classes, np.array(rel),
                       collision=_has_collision(pts, scale))


def _thread_count():
    try:
        return max(1, int(os.environ.get("GAMMALAB_THREADS", "1")))
    except ValueError:
        return 1


def _sample_records(pf, grid, seed, tol):
    items = grid.points()
    work = lambda it: _fiber_record(pf, it, seed, tol)
    threads = _thread_count()
    if threads == 1:
        return [work(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, items))


@dataclass
class CheckReport:
    verdict: Verdict
    reason: str
    commutation: dict
    containment: dict
    monicity: dict
    boundary: dict
    margin_by_radius: list
    components: int
    witness: dict = None
    grid: GridSpec = None

    def to_json(self):
        return {"verdict": self.verdict.value, "reason": self.reason,
                "commutation": self.commutation, "containment": self.containment,
                "monicity": self.monicity, "boundary": self.boundary,
                "margin_by_radius": self.margin_by_radius, "components": self.components,
                "witness": self.witness,
                "grid": self.grid.to_json() if self.grid else None}


def condition_one(pf):
    """Norms of ``[F_i, F_j]`` and ``[F_i^*, F_{n-j}] - [F_j^*, F_{n-i}]``."""
    m = pf.n - 1
    F = pf.F
    scale = max(max(operator_norm(f) for f in F), 1e-300)
    first, second = 0.0, 0.0
    for i in range(m):
        for j in range(m):
            if i < j:
                first = max(first, operator_norm(commutator(F[i], F[j])))
            a = commutator(F[i].conj().T, F[m - 1 - j])
            b = commutator(F[j].conj().T, F[m - 1 - i])
            second = max(second, operator_norm(a - b))
    thresh = 1e-10 * scale * scale
    return {"commuting": first, "starred": second, "threshold": thresh,
            "passed": bool(first <= thresh and second <= thresh)}


def monicity_check(pf, probes=(0.0, 0.5, 0.9j, -1.0)):
    """Leading coefficient of ``det(Phi_i(p) - s I)`` in ``s`` by interpolation.

    Evaluates the determinant at ``d + 1`` points of a circle and solves for
    the coefficients; the top one must equal ``(-1)^d``.
    """
    d = pf.d
    eye = np.eye(d)
    worst = 0.0
    for p in probes:
        for phi in pf.pencils(p):
            radius = 1.0 + operator_norm(phi)
            nodes = radius * np.exp(2j * np.pi * np.arange(d + 1) / (d + 1))
            vals = np.array([np.linalg.det(phi - z * eye) for z in nodes])
            coeffs = np.linalg.solve(np.vander(nodes, d + 1), vals)
            worst = max(worst, abs(coeffs[0] - (-1) ** d))
    return {"passed": bool(worst <= 1e-8), "max_deviation": float(worst),
            "justification": "each f_i is monic of degree d in its own variable s_i, "
                             "so f_1..f_{n-1} form a regular sequence"}


def _components(records, grid):
    pts = [np.concatenate([rec.fiber[b], [rec.p]])
           for rec in records if not rec.on_boundary for b in range(len(rec.fiber))]
    if not pts:
        return 0
    cloud = np.array(pts)
    real = np.concatenate([cloud.real, cloud.imag], axis=1)
    r_step = (1.0 - grid.eps) / max(grid.radii - 1, 1)
    a_step = 2.0 * np.pi / grid.angles
    spread = 1.0 + float(np.max(np.abs(cloud[:, :-1])))
    h = 4.0 * max(r_step, a_step) * spread
    pairs = cKDTree(real).query_pairs(h, output_type="ndarray")
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
                   shape=(len(real), len(real)))
    count, _ = connected_components(g, directed=False)
    return int(count)


def _judge(pf, records, grid, tol, comm):
    mono = monicity_check(pf)
    margins = {}
    witness = None
    inconclusive = None
    min_margin, min_loc = math.inf, None
    bd_worst, bd_count, bd_bad = 0.0, 0, None
    for rec in records:
        if rec.error:
            inconclusive = inconclusive or f"fiber failure at p={rec.p}: {rec.error}"
            continue
        for s, cls, rel in zip(rec.fiber, rec.classes, rec.relation_residuals):
            where = {"z": [float(rec.p.real), float(rec.p.imag)],
                     "point": [[float(v.real), float(v.imag)] for v in s],
                     "label": cls.label.value, "margin": cls.margin}
            if rec.on_boundary:
                bd_count += 1
                bd_worst = max(bd_worst, float(rel))
                if cls.label != Label.DISTINGUISHED and bd_bad is None:
                    bd_bad = where
                continue
            r = grid.rings()[rec.ring][0]
            margins[r] = min(margins.get(r, math.inf), cls.margin)
            if cls.margin < min_margin:
                min_margin, min_loc = cls.margin, where
            if cls.label == Label.EXTERIOR:
                witness = witness or where
            elif cls.label != Label.INTERIOR or cls.margin <= 10.0 * tol:
                inconclusive = inconclusive or (
                    f"fiber point at z={rec.p:.6g} is {cls.label.value} "
                    f"with margin {cls.margin:.3e}, below resolution")
    containment = {"min_margin": min_margin if min_loc else None, "location": min_loc}
    boundary = {"checked": bd_count, "max_relation_residual": bd_worst,
                "passed": bd_bad is None, "first_failure": bd_bad}
    trend = [[r, m] for r, m in sorted(margins.items())]
    comps = _components(records, grid)
    common = dict(commutation=comm, containment=containment, monicity=mono,
                  boundary=boundary, margin_by_radius=trend, components=comps, grid=grid)
    if not comm["passed"]:
        return CheckReport(Verdict.INVALID, "commutation conditions fail", **common)
    if witness is not None:
        return CheckReport(Verdict.INVALID, "fiber point outside the closed domain",
                           witness=witness, **common)
    if bd_bad is not None:
        return CheckReport(Verdict.INVALID, "boundary fiber point is not distinguished",
                           witness=bd_bad, **common)
    if inconclusive or not mono["passed"]:
        return CheckReport(Verdict.INCONCLUSIVE, inconclusive or "monicity check failed",
                           **common)
    return CheckReport(Verdict.VALID, "all sampled fibers interior, boundary fibers "
                       "distinguished", **common)


@dataclass
class VarietySample:
    pencil: PencilFamily
    grid: GridSpec
    records: list
    report: CheckReport = None
    exploratory: bool = False

    def det_failures(self):
        """Records whose determinant residual exceeds the tolerance.

        Fibers with coincident branches get the tolerance relaxed by
        ``COLLISION_RELAX``.
        """
        tol = self.pencil.det_tolerance()
        bad = []
        for rec in self.records:
            limit = tol * (COLLISION_RELAX if rec.collision else 1.0)
            if rec.det_residuals.size and rec.det_residuals.max() > limit:
                bad.append(rec)
        return bad

    def points(self, boundary=None):
        """All sampled ``(s_1, ..., s_{n-1}, p)`` rows, optionally filtered by ring type."""
        rows = [np.concatenate([s, [rec.p]]) for rec in self.records
                if boundary is None or rec.on_boundary == boundary for s in rec.fiber]
        return np.array(rows) if rows else np.zeros((0, self.pencil.n), dtype=complex)

    def to_rows(self):
        rows = []
        for rec in self.records:
            for b, (s, cls, det) in enumerate(zip(rec.fiber, rec.classes, rec.det_residuals)):
                for i, si in enumerate(s):
                    rows.append([repr(rec.p.real), repr(rec.p.imag), b, i + 1,
                                 repr(si.real), repr(si.imag), cls.label.value, repr(det)])
        return rows

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re_p", "im_p", "branch", "i", "re_s", "im_s", "class", "det_residual"])
        w.writerows(self.to_rows())
        return buf.getvalue()

    def to_json(self):
        recs = []
        for rec in self.records:
            recs.append({"p": [rec.p.real, rec.p.imag], "boundary": rec.on_boundary,
                         "fiber": [[[v.real, v.imag] for v in s] for s in rec.fiber],
                         "det_residuals": [float(x) for x in rec.det_residuals],
                         "classes": [c.label.value for c in rec.classes],
                         "error": rec.error})
        return {"pencil": self.pencil.to_json(), "grid": self.grid.to_json(),
                "exploratory": self.exploratory,
                "verdict": self.report.verdict.value if self.report else None,
                "records": recs}


def validate_pencil(pf, grid=None, tol=DEFAULT_TOL, seed=0):
    """Sampled check that the pencil family defines a distinguished variety.

    Returns
    -------
    CheckReport
        ``VALID`` when every sampled interior fiber is INTERIOR with margin
        above resolution and every boundary fiber is DISTINGUISHED;
        ``INVALID`` with a witness when a commutation condition fails or a
        fiber leaves the closed domain; ``INCONCLUSIVE`` otherwise.
    """
    return _run(pf, grid or GridSpec(), tol, seed)[1]


def _run(pf, grid, tol, seed):
    comm = condition_one(pf)
    if not comm["passed"]:
        grid0 = GridSpec(1, 1, include_boundary=False)
        return [], _judge(pf, [], grid0, tol, comm)
    records = _sample_records(pf, grid, seed, tol)
    return records, _judge(pf, records, grid, tol, comm)


def sample_variety(pf, grid=None, seed=0, tol=DEFAULT_TOL, override=False):
    """Fibers over a polar grid of ``p``.

    Raises
    ------
    HypothesesNotMet
        When the same pass does not certify the pencil as VALID and
        ``override`` is false. With ``override`` the sample is returned and
        flagged exploratory.
    """
    grid = grid or GridSpec()
    records, report = _run(pf, grid, tol, seed)
    if report.verdict != Verdict.VALID and not override:
        raise HypothesesNotMet(f"pencil is {report.verdict.value}: {report.reason}",
                               report.to_json())
    if not report.commutation["passed"]:
        raise HypothesesNotMet("commutation conditions fail; fibers are undefined",
                               report.to_json())
    return VarietySample(pf, grid, records, report,
                         exploratory=report.verdict != Verdict.VALID)


@dataclass
class G2Variety:
    pencil: PencilFamily
    omega: float
    omega_below_one: bool
    report: CheckReport


def g2_variety_from_matrix(A, convention="paper4.6", grid=None, tol=DEFAULT_TOL):
    """Curve in two variables from a single matrix.

    ``"paper4.6"`` reads ``det(A^* + pA - sI) = 0`` (pencil matrix ``A``);
    ``"paper4.7"`` reads ``det(A + pA^* - sI) = 0`` (pencil matrix ``A^*``).
    ``omega(A) < 1`` is sufficient for a distinguished variety; the sampled
    containment verdict is reported as well since it is the sharper test.
    """
    A = as_cmatrix(A, name="A")
    if convention == "paper4.6":
        F = A
    elif convention == "paper4.7":
        F = A.conj().T
    else:
        raise ValueError(f"unknown convention {convention!r}")
    pf = PencilFamily(2, [F])
    w = numerical_radius(A)
    return G2Variety(pf, w, bool(w < 1.0), validate_pencil(pf, grid, tol))


@dataclass
class PolydiscPoint:
    z: np.ndarray
    max_modulus: float
    label: Label
    residual: float


def polydisc_points(x, label=None):
    """Desymmetrize one point and report its max modulus and round-trip residual."""
    z = desymmetrize(x)
    back = symmetrize(z)
    res = max(abs(a - b) for a, b in zip(back.coords, x.coords))
    lab = label if label is not None else classify_point(x).label
    return PolydiscPoint(np.asarray(z), float(np.max(np.abs(z))), lab, float(res))


def polydisc_sample(pf, grid=None, seed=0, sample=None):
    """Pull every sampled variety point back to the polydisc."""
    sample = sample or sample_variety(pf, grid, seed)
    out = []
    for rec in sample.records:
        for s, cls in zip(rec.fiber, rec.classes):
            out.append(polydisc_points(GammaPoint(pf.n, tuple(s), rec.p), cls.label))
    return out


@dataclass
class Separation:
    on_variety: bool
    index: int = None     # 1-based
    value: complex = None
    values: list = field(default_factory=list)


def separating_poly(pf, x, tol=1e-8):
    """First defining polynomial that does not vanish at ``x``.

    Raises
    ------
    ValueError
        If ``x`` lies outside the closed domain.
    """
    if x.n != pf.n:
        raise ValueError(f"point has n={x.n}, pencil has n={pf.n}")
    if classify_point(x).label == Label.EXTERIOR:
        raise ValueError("point lies outside the closed domain")
    vals = pf.f_values(x.s, x.p)
    for i, v in enumerate(vals):
        if abs(v) > tol:
            return Separation(False, i + 1, complex(v), list(vals))
    return Separation(True, values=list(vals))


def export_json(obj, path=None):
    text = json.dumps(obj, sort_keys=True, indent=1)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text
