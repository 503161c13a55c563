"""Joint spectra of commuting matrix tuples.

For commuting matrices the Taylor joint spectrum is the set of joint
eigenvalues, and it can be read off the diagonals after a simultaneous
unitary triangularization. ``joint_eigs`` finds that triangularization with
the Schur form of a random linear combination, falling back to building the
invariant flag one joint eigenvector at a time. ``joint_eigs_oracle`` is an
independent brute-force check used in tests.
"""

from dataclasses import dataclass
import itertools
import numpy as np

from .errors import CommutationError, JointSpectrumError
from .numerics import (as_cmatrix, cluster_average, commutator, eigvals, null_space, operator_norm,
                       orth_complement, schur)

COMM_TOL = 1e-10
TRIANGULAR_TOL = 1e-8


@dataclass
class MatrixTuple:
    mats: list
    comm_tol: float = COMM_TOL

    def __post_init__(self):
        mats = [as_cmatrix(m, name=f"matrix {i}") for i, m in enumerate(self.mats)]
        if not mats:
            raise ValueError("tuple must contain at least one matrix")
        order = mats[0].shape[0]
        for i, m in enumerate(mats):
            if m.shape[0] != order:
                raise ValueError(f"matrix {i} has order {m.shape[0]}, expected {order}")
        self.mats = mats

    @property
    def k(self):
        return len(self.mats)

    @property
    def order(self):
        return self.mats[0].shape[0]

    def to_json(self):
        return {"order": self.order, "matrices": [matrix_to_json(m) for m in self.mats]}

    @classmethod
    def from_json(cls, obj):
        try:
            mats = [matrix_from_json(m) for m in obj["matrices"]]
            order = int(obj["order"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed MatrixTuple JSON: {exc}") from exc
        t = cls(mats)
        if t.order != order:
            raise ValueError(f"declared order {order} does not match matrices ({t.order})")
        return t


def matrix_to_json(m):
    return [[[z.real, z.imag] for z in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_json(obj):
    rows = [[complex(re, im) for re, im in row] for row in obj]
    return as_cmatrix(rows)


@dataclass
class CommutationReport:
    norms: np.ndarray
    thresholds: np.ndarray
    passed: bool

    @property
    def worst(self):
        return float(self.norms.max()) if self.norms.size else 0.0


def verify_commuting(t):
    """Pairwise commutator norms with the scale-aware pass threshold."""
    k = t.k
    norms = np.zeros((k, k))
    thresh = np.zeros((k, k))
    sizes = [operator_norm(m) for m in t.mats]
    for i in range(k):
        for j in range(i + 1, k):
            norms[i, j] = norms[j, i] = operator_norm(commutator(t.mats[i], t.mats[j]))
            thresh[i, j] = thresh[j, i] = t.comm_tol * max(sizes[i] * sizes[j], 1e-300)
    passed = bool(np.all(norms <= thresh + 1e-300))
    return CommutationReport(norms, thresh, passed)


@dataclass
class JointSpectrum:
    points: np.ndarray        # shape (N, k), one row per diagonal position
    residuals: np.ndarray     # shape (N,)
    triangularizer: np.ndarray
    method: str = "schur"

    def point_set(self, tol=1e-6):
        return dedupe_points(self.points, tol)


def dedupe_points(points, tol=1e-6):
    out = []
    for pt in np.atleast_2d(points):
        if not any(np.max(np.abs(pt - q)) <= tol for q in out):
            out.append(pt)
    return np.array(out) if out else np.zeros((0, np.shape(points)[-1]), dtype=complex)


def _flag_residuals(q, mats):
    """Per-diagonal-slot residual of the invariant flag defined by ``q``.

    Slot j gets ``max_i ||(T_i - lambda_ij) q_j||`` measured modulo the span
    of ``q_0..q_{j-1}``, i.e. the strictly-lower mass in column j of
    ``Q* T_i Q``. Also returns the triangular forms.
    """
    tris = [q.conj().T @ m @ q for m in mats]
    n = q.shape[0]
    res = np.zeros(n)
    for u in tris:
        low = np.tril(u, -1)
        res = np.maximum(res, np.linalg.norm(low, axis=0))
    return res, tris


def _diagonal_points(tris, mats):
    pts = np.column_stack([np.diag(u) for u in tris])
    scale = 1.0 + max(operator_norm(m) for m in mats)
    return cluster_average(pts, scale)


def _certified(res, mats):
    scale = max(max(operator_norm(m) for m in mats), 1e-300)
    return bool(np.all(res <= TRIANGULAR_TOL * scale)), float(res.max(initial=0.0))


def _staircase(mats):
    """Triangularize a commuting family by repeated joint-eigenvector deflation."""
    n = mats[0].shape[0]
    basis_cols = []
    current = [m.copy() for m in mats]
    frame = np.eye(n, dtype=complex)   # columns = current working basis in C^n
    for _ in range(n):
        dim = current[0].shape[0]
        w = np.eye(dim, dtype=complex)
        for m in current:
            b = w.conj().T @ m @ w
            lam = eigvals(b)
            # pick the eigenvalue whose kernel is best resolved
            best = None
            for mu in lam:
                sv = np.linalg.svd(b - mu * np.eye(b.shape[0]), compute_uv=False)
                if best is None or sv[-1] < best[0]:
                    best = (sv[-1], mu)
            mu = best[1]
            scale = max(1.0, np.linalg.norm(b))
            ker = null_space(b - mu * np.eye(b.shape[0]), rtol=1e-7 * scale, min_dim=1)
            w = w @ ker
        x = w[:, 0]
        x = x / np.linalg.norm(x)
        basis_cols.append(frame @ x)
        if dim == 1:
            break
        comp = orth_complement(x.reshape(-1, 1))
        current = [comp.conj().T @ m @ comp for m in current]
        frame = frame @ comp
    return np.column_stack(basis_cols)


def joint_eigs(t, seed=0, max_redraws=8, method="auto"):
    """Joint diagonal coefficients of a commuting tuple (with multiplicity).

    Parameters
    ----------
    t : MatrixTuple
    seed : int
        Seed for the random combination coefficients.
    max_redraws : int
        Extra combinations tried before falling back to the staircase.
    method : {"auto", "staircase"}
        ``"staircase"`` skips the combination step entirely.

    Raises
    ------
    CommutationError
        If the tuple does not commute within its tolerance.
    JointSpectrumError
        If neither the generic-combination Schur form nor the staircase
        construction produces a certified triangularization.
    """
    report = verify_commuting(t)
    if not report.passed:
        raise CommutationError(
            f"tuple does not commute (worst commutator {report.worst:.3e})", report.worst)
    mats = t.mats
    rng = np.random.default_rng(seed)
    worst = np.inf
    if method not in ("auto", "staircase"):
        raise ValueError(f"unknown method {method!r}")
    attempts = max_redraws + 1 if method == "auto" else 0
    for _ in range(attempts):
        gamma = rng.standard_normal(len(mats)) + 1j * rng.standard_normal(len(mats))
        g = sum(c * m for c, m in zip(gamma, mats))
        q = schur(g).unitary
        res, tris = _flag_residuals(q, mats)
        ok, w = _certified(res, mats)
        if ok:
            pts = _diagonal_points(tris, mats)
            return JointSpectrum(pts, res, q, "schur")
        worst = min(worst, w)
    q = _staircase(mats)
    res, tris = _flag_residuals(q, mats)
    ok, w = _certified(res, mats)
    if not ok:
        raise JointSpectrumError(
            f"joint triangularization failed (worst residual {min(w, worst):.3e})",
            min(w, worst))
    pts = _diagonal_points(tris, mats)
    return JointSpectrum(pts, res, q, "staircase")


def _distinct(values, tol):
    out = []
    for v in values:
        if not any(abs(v - u) <= tol for u in out):
            out.append(v)
    return out


def joint_eigs_oracle(t, tol=1e-6, max_order=8):
    """Joint eigenvalues by brute-force kernel intersection.

    Every combination of per-matrix eigenvalues is tested for a common
    kernel of the stacked matrix ``[T_1 - l_1 I; ...; T_k - l_k I]``.
    Uses LAPACK eigenvalues and SVD only, so it is independent of
    :func:`joint_eigs`.
    """
    n = t.order
    if n > max_order:
        raise ValueError(f"oracle limited to order <= {max_order}, got {n}")
    scale = max(1.0, max(np.linalg.norm(m, 2) for m in t.mats))
    per = [_distinct(np.linalg.eigvals(m), 1e-7 * scale) for m in t.mats]
    eye = np.eye(n)
    found = []
    for combo in itertools.product(*per):
        stacked = np.vstack([m - lam * eye for m, lam in zip(t.mats, combo)])
        smin = np.linalg.svd(stacked, compute_uv=False)[-1]
        if smin <= tol * scale:
            found.append(np.array(combo))
    return np.array(found) if found else np.zeros((0, t.k), dtype=complex)


def same_point_sets(a, b, tol=1e-6):
    """True when every point of ``a`` is within ``tol`` of some point of ``b`` and vice versa."""
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    if a.size == 0 or b.size == 0:
        return a.size == b.size

    def covered(x, y):
        return all(np.min(np.max(np.abs(y - pt), axis=1)) <= tol for pt in x)

    return covered(a, b) and covered(b, a)
