"""Contractions for the symmetrized polydisc at matrix scale.

Covers defect operators, fundamental operator tuples, the truncated block
Toeplitz model of a pencil family, its compressions, classification
evidence and dilation residuals.

Toeplitz model
--------------
For a family ``F_1..F_{n-1}`` of ``d x d`` matrices and truncation ``K``,

    T_i = I_K (x) F_i^* + S_K (x) F_{n-i},    V = S_K (x) I_d,

with ``S_K`` the ``K x K`` lower shift. These are finite sections of the
Toeplitz operators with symbols ``F_i^* + F_{n-i} z`` and ``z``. Because
all of them are block lower triangular, leading principal blocks multiply
exactly, so every compression to the first ``K'`` blocks commutes and
reproduces the monomials of the model exactly. The isometry relation
``T_i = T_{n-i}^* V`` fails only in the last block column, where the
defect is ``F_i^*``.
"""

from dataclasses import dataclass
from enum import Enum
import itertools
import math

import numpy as np

from .errors import CommutationError, IsometryDefectError
from .gamma_geom import Label, classify_point, GammaPoint, random_torus, symmetrize_many
from .joint_spectrum import MatrixTuple, joint_eigs, matrix_from_json, matrix_to_json
from .numerics import (as_cmatrix, commutator, hermitian_sqrt_and_pinv, numerical_radius,
                       operator_norm)
from .variety import BOUNDARY_TOL, PencilFamily

COMM_TOL = 1e-10


@dataclass
class OperatorTuple:
    """Commuting ``(S_1, ..., S_{n-1}, P)`` on ``C^m``.

    Commutation is checked on construction. ``||P|| <= 1`` is not enforced
    here; ``classify_tuple`` refutes tuples that violate it.
    """

    n: int
    S: list
    P: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        S = [as_cmatrix(s, name=f"S{i + 1}") for i, s in enumerate(self.S)]
        P = as_cmatrix(self.P, name="P")
        if len(S) != self.n - 1:
            raise ValueError(f"expected {self.n - 1} S-components, got {len(S)}")
        if any(s.shape != P.shape for s in S):
            raise ValueError("all components must have the order of P")
        self.S, self.P = S, P
        mats = S + [P]
        scale = max(max(operator_norm(x) for x in mats), 1.0)
        worst = 0.0
        for a, b in itertools.combinations(mats, 2):
            worst = max(worst, operator_norm(commutator(a, b)))
        if worst > COMM_TOL * scale * scale:
            raise CommutationError(f"components do not commute (worst {worst:.3e})", worst)

    @property
    def m(self):
        return self.P.shape[0]

    def components(self):
        return self.S + [self.P]

    def adjoint(self):
        return OperatorTuple(self.n, [s.conj().T for s in self.S], self.P.conj().T)

    def defect(self, rank_tol=None):
        """Square root data of ``I - P^* P``."""
        M = np.eye(self.m) - self.P.conj().T @ self.P
        M = 0.5 * (M + M.conj().T)
        if rank_tol is None:
            rank_tol = 1e-10 * max(operator_norm(M), 1e-300)
        return hermitian_sqrt_and_pinv(M, rank_tol)

    def to_json(self):
        return {"n": self.n, "order": self.m, "S": [matrix_to_json(s) for s in self.S],
                "P": matrix_to_json(self.P)}

    @classmethod
    def from_json(cls, obj):
        try:
            t = cls(int(obj["n"]), [matrix_from_json(s) for s in obj["S"]],
                    matrix_from_json(obj["P"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed OperatorTuple JSON: {exc}") from exc
        if "order" in obj and int(obj["order"]) != t.m:
            raise ValueError(f"declared order {obj['order']} does not match matrices ({t.m})")
        return t


def scalar_tuple(coords):
    """1x1 tuple from a point ``(s_1, ..., s_{n-1}, p)``."""
    coords = [complex(c) for c in coords]
    return OperatorTuple(len(coords), [[[c]] for c in coords[:-1]], [[coords[-1]]])


@dataclass
class FOTuple:
    A: list               # r x r matrices in the range basis of D_P
    lifted: list          # m x m matrices (zero off the range)
    residuals: list
    omega_report: list    # per i: {"max": .., "bound": ..}
    rank: int
    range_basis: np.ndarray


def omega_profile(A, n, points=256):
    """Grid maximum over the circle of ``omega(A_i + A_{n-i} z)`` with the bound C(n, i)."""
    m = len(A)
    z = np.exp(2j * np.pi * np.arange(points) / points)
    out = []
    for i in range(m):
        top = max(numerical_radius(A[i] + zk * A[m - 1 - i]) for zk in z) if A[i].size else 0.0
        out.append({"i": i + 1, "max": float(top), "bound": math.comb(n, i + 1)})
    return out


def fo_tuple(t, rank_tol=None, omega_points=256):
    """Solve ``S_i - S_{n-i}^* P = D_P A_i D_P`` on the range of ``D_P``.

    The component of ``A_i`` off the range is set to zero. Residuals measure
    how well the equation is met; a large one is evidence that ``t`` is not
    a contraction for the domain.

    Raises
    ------
    IsometryDefectError
        If ``D_P`` vanishes numerically while some ``S_i - S_{n-i}^* P`` does not.
    """
    hs = t.defect(rank_tol)
    m = t.n - 1
    rhs = [t.S[i] - t.S[m - 1 - i].conj().T @ t.P for i in range(m)]
    scale = max(1.0, max(operator_norm(x) for x in t.components()))
    if hs.rank == 0:
        worst = max(operator_norm(r) for r in rhs)
        if worst > 1e-10 * scale:
            raise IsometryDefectError(
                f"D_P is zero but S_i - S_(n-i)^* P has norm {worst:.3e}")
    lifted = [hs.pinv_of_sqrt @ r @ hs.pinv_of_sqrt for r in rhs]
    basis = hs.range_basis
    A = [basis.conj().T @ a @ basis for a in lifted]
    lifted = [basis @ a @ basis.conj().T for a in A]
    residuals = [operator_norm(r - hs.sqrt @ a @ hs.sqrt) for r, a in zip(rhs, lifted)]
    omega = omega_profile(A, t.n, omega_points) if omega_points else []
    return FOTuple(A, lifted, residuals, omega, hs.rank, basis)


@dataclass
class ToeplitzModel:
    n: int
    d: int
    K: int
    T: list
    V: np.ndarray
    pencil: PencilFamily = None


def lower_shift(k):
    return np.eye(k, k, -1, dtype=complex)


def build_model(pf, K):
    """Finite section of the Toeplitz model of ``pf`` with ``K`` blocks."""
    if K < 2:
        raise ValueError("K must be at least 2")
    shift = lower_shift(K)
    eye = np.eye(K)
    m = pf.n - 1
    T = [np.kron(eye, pf.F[i].conj().T) + np.kron(shift, pf.F[m - 1 - i]) for i in range(m)]
    V = np.kron(shift, np.eye(pf.d))
    return ToeplitzModel(pf.n, pf.d, K, T, V, pf)


def isometry_relations_check(model):
    """Defects ``T_i - T_{n-i}^* V`` on the first ``K-1`` blocks and on the whole space.

    The restricted value uses the columns of the first ``K - 1`` blocks,
    where the relations hold exactly; the full value shows the edge effect.
    """
    m = model.n - 1
    cut = (model.K - 1) * model.d
    restricted, full = [], []
    for i in range(m):
        D = model.T[i] - model.T[m - 1 - i].conj().T @ model.V
        restricted.append(operator_norm(D[:, :cut]))
        full.append(operator_norm(D))
    return {"restricted": restricted, "full": full,
            "max_restricted": max(restricted), "max_full": max(full)}


def compress_model(model, k):
    """Compression of the model to its first ``k`` blocks."""
    if not 2 <= k <= model.K - 1:
        raise ValueError(f"compression size must be in [2, {model.K - 1}], got {k}")
    cut = k * model.d
    return OperatorTuple(model.n, [x[:cut, :cut] for x in model.T], model.V[:cut, :cut])


def monomials_up_to(n, degree):
    return [a for a in itertools.product(range(degree + 1), repeat=n) if sum(a) <= degree]


def dilation_check(t, model, embed=None, max_degree=2):
    """Largest ``||E^* T^alpha E - S^alpha||`` over ``|alpha| <= max_degree``.

    ``embed`` defaults to the inclusion of the first ``t.m`` coordinates.
    """
    from .vn_check import operator_monomials

    big = model.T + [model.V]
    M = big[0].shape[0]
    if embed is None:
        embed = np.eye(M, t.m, dtype=complex)
    embed = np.asarray(embed, dtype=complex)
    if embed.shape != (M, t.m):
        raise ValueError(f"embedding must have shape {(M, t.m)}, got {embed.shape}")
    if operator_norm(embed.conj().T @ embed - np.eye(t.m)) > 1e-10:
        raise ValueError("embedding is not an isometry")
    alphas = monomials_up_to(t.n, max_degree)
    upper = operator_monomials(big, alphas)
    lower = operator_monomials(t.components(), alphas)
    worst = 0.0
    for a in alphas:
        worst = max(worst, operator_norm(embed.conj().T @ upper[a] @ embed - lower[a]))
    return worst


class TupleLabel(str, Enum):
    GAMMA_UNITARY = "GAMMA_UNITARY"
    GAMMA_ISOMETRY = "GAMMA_ISOMETRY"
    PURE_GAMMA_ISOMETRY = "PURE_GAMMA_ISOMETRY"
    CONTRACTION_EVIDENCE = "CONTRACTION_EVIDENCE"
    REFUTED = "REFUTED"


@dataclass
class TupleClass:
    label: TupleLabel
    witness: dict = None
    details: dict = None


def _is_normal(x, tol):
    return operator_norm(x @ x.conj().T - x.conj().T @ x) <= tol * max(1.0, operator_norm(x)) ** 2


def torus_sup(f, n, samples=2000, refine=3, seed=0):
    """Estimate ``max ||f||`` over the distinguished boundary.

    Random points of the torus are symmetrized and the best few are
    refined by Nelder-Mead over the angles.
    """
    from scipy.optimize import minimize
    from .vn_check import block_norms, eval_many

    rng = np.random.default_rng(seed)
    z = random_torus(rng, n, samples)
    vals = block_norms(eval_many(f, symmetrize_many(z)))
    order = np.argsort(vals)[::-1][:refine]
    best = float(vals[order[0]])

    def neg(theta):
        pt = symmetrize_many(np.exp(1j * theta)[None, :])
        return -float(block_norms(eval_many(f, pt))[0])

    for k in order:
        res = minimize(neg, np.angle(z[k]), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 2000})
        best = max(best, -float(res.fun))
    return best


def classify_tuple(t, trials=20, max_degree=3, tol=1e-6, seed=0):
    """Evidence-based classification of a commuting tuple.

    Decision order: refute when ``||P|| > 1`` or a joint eigenvalue lies
    outside the closed domain; GAMMA_UNITARY when all
    components are normal with joint spectrum in the distinguished boundary;
    GAMMA_ISOMETRY (PURE when the spectral radius of ``P`` is below one)
    when ``P`` is an isometry, ``S_i = S_{n-i}^* P`` and the scaled tuple is
    not refuted one dimension down; otherwise random polynomial tests
    against the distinguished boundary. A polynomial with ``||f(t)||``
    above its estimated boundary maximum by more than ``tol`` refutes.
    """
    from .vn_check import eval_poly, random_poly

    comps = t.components()
    scale = max(1.0, max(operator_norm(x) for x in comps))
    norm_p = operator_norm(t.P)
    if norm_p > 1.0 + tol:
        return TupleClass(TupleLabel.REFUTED,
                          {"reason": "P is not a contraction", "norm_P": norm_p,
                           "poly": "p"})

    js = joint_eigs(MatrixTuple(comps))
    labels = [classify_point(GammaPoint.from_coords(pt), BOUNDARY_TOL).label
              for pt in js.points]
    for pt, lab in zip(js.points, labels):
        if lab == Label.EXTERIOR:
            return TupleClass(TupleLabel.REFUTED,
                              {"reason": "joint eigenvalue outside the closed domain",
                               "point": [[float(v.real), float(v.imag)] for v in pt]})
    if (all(lab == Label.DISTINGUISHED for lab in labels)
            and all(_is_normal(x, 1e-10) for x in comps)):
        return TupleClass(TupleLabel.GAMMA_UNITARY, details={"joint_spectrum": js.points})

    m = t.n - 1
    iso = operator_norm(t.P.conj().T @ t.P - np.eye(t.m))
    rel = max(operator_norm(t.S[i] - t.S[m - 1 - i].conj().T @ t.P) for i in range(m))
    if iso <= 1e-10 and rel <= 1e-10 * scale:
        scaled = [(t.n - 1 - i) / t.n * t.S[i] for i in range(m)]
        if m == 1:
            ok = operator_norm(scaled[0]) <= 1.0 + tol
        else:
            sub = OperatorTuple(m, scaled[:-1], scaled[-1])
            ok = classify_tuple(sub, trials, max_degree, tol, seed).label != TupleLabel.REFUTED
        if ok:
            rho = max(abs(np.linalg.eigvals(t.P)))
            label = TupleLabel.PURE_GAMMA_ISOMETRY if rho < 1.0 else TupleLabel.GAMMA_ISOMETRY
            return TupleClass(label, details={"spectral_radius_P": float(rho)})

    worst = math.inf
    for k in range(trials):
        f = random_poly(t.n, max_degree, 1, seed + k)
        lhs = operator_norm(eval_poly(f, comps))
        rhs = torus_sup(f, t.n, seed=seed + k)
        worst = min(worst, rhs - lhs)
        if lhs > rhs + tol:
            return TupleClass(TupleLabel.REFUTED,
                              {"reason": "polynomial exceeds its boundary maximum",
                               "poly": f.to_json(), "lhs": lhs, "rhs": rhs})
    return TupleClass(TupleLabel.CONTRACTION_EVIDENCE,
                      details={"trials": trials, "min_margin": worst})
