"""Geometry of the symmetrized polydisc.

Points are written ``(s_1, ..., s_{n-1}, p)`` where ``s_i`` is the i-th
elementary symmetric polynomial of ``z in C^n`` and ``p`` the product.

Membership is decided recursively. For ``|p| < 1`` the representation
``s_i = c_i + conj(c_{n-i}) p`` has exactly one solution,

    c_i = (s_i - p conj(s_{n-i})) / (1 - |p|^2),

because pairing equation ``i`` with the conjugate of equation ``n-i`` gives a
2x2 system with determinant ``1 - |p|^2`` (for the middle index of even ``n``
the homogeneous equation ``t = -conj(t) p`` forces ``t = 0``). The existential
witness is therefore the canonical one, and ``x`` lies in the open (closed)
domain iff this ``c`` lies in the open (closed) domain one dimension down.
Points with ``|p|`` within ``tol`` of 1 take the distinguished-boundary test
instead, which never divides by ``1 - |p|^2``.
"""

from dataclasses import dataclass, field
from enum import Enum
import math
from typing import List, Sequence

import numpy as np

from .errors import BoundaryRegimeError
from .numerics import poly_roots

DEFAULT_TOL = 1e-9


class Label(str, Enum):
    INTERIOR = "INTERIOR"
    TOP_BOUNDARY = "TOP_BOUNDARY"
    DISTINGUISHED = "DISTINGUISHED"
    EXTERIOR = "EXTERIOR"


@dataclass(frozen=True)
class GammaPoint:
    """A point of C^n in symmetrized coordinates."""

    n: int
    s: tuple
    p: complex

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        s = tuple(complex(v) for v in self.s)
        if len(s) != self.n - 1:
            raise ValueError(f"expected {self.n - 1} s-coordinates, got {len(s)}")
        p = complex(self.p)
        if not all(math.isfinite(abs(v)) for v in s + (p,)):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_coords(cls, coords):
        coords = [complex(v) for v in coords]
        return cls(len(coords), tuple(coords[:-1]), coords[-1])

    @property
    def coords(self):
        return self.s + (self.p,)

    def to_json(self):
        return {"n": self.n,
                "s": [[v.real, v.imag] for v in self.s],
                "p": [self.p.real, self.p.imag]}

    @classmethod
    def from_json(cls, obj):
        try:
            n = int(obj["n"])
            s = tuple(complex(re, im) for re, im in obj["s"])
            p = complex(*obj["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed GammaPoint JSON: {exc}") from exc
        return cls(n, s, p)


@dataclass
class PointClass:
    label: Label
    margin: float
    conditioning: float = 1.0
    levels: list = field(default_factory=list)

    @property
    def in_closure(self):
        return self.label != Label.EXTERIOR


def elementary_symmetric(z):
    """All elementary symmetric polynomials e_1..e_n of ``z``."""
    e = [1.0 + 0j]
    for zk in z:
        e = [e[0]] + [a + zk * b for a, b in zip(e[1:] + [0j], e)]
    return e[1:]


def symmetrize(z):
    z = [complex(v) for v in z]
    if len(z) < 2:
        raise ValueError("need at least two coordinates")
    e = elementary_symmetric(z)
    return GammaPoint(len(z), tuple(e[:-1]), e[-1])


def desymmetrize(x):
    """Return the n roots of ``t^n - s_1 t^{n-1} + ... + (-1)^n p``."""
    coeffs = [1.0 + 0j]
    sign = -1.0
    for v in x.coords:
        coeffs.append(sign * v)
        sign = -sign
    return poly_roots(coeffs)


def _canonical(s, p):
    m = len(s)
    denom = 1.0 - abs(p) ** 2
    return [(s[i] - p * s[m - 1 - i].conjugate()) / denom for i in range(m)]


def canonical_c(x, tol=DEFAULT_TOL):
    """The unique ``c`` with ``s_i = c_i + conj(c_{n-i}) p`` (requires |p| < 1 - tol).

    Returns the list ``c`` and the max reconstruction residual.
    """
    if abs(x.p) >= 1.0 - tol:
        raise BoundaryRegimeError(
            f"|p| = {abs(x.p):.12g} is within tol of the unit circle; "
            "use the distinguished-boundary test")
    c = _canonical(x.s, x.p)
    m = len(c)
    resid = max((abs(x.s[i] - c[i] - c[m - 1 - i].conjugate() * x.p) for i in range(m)),
                default=0.0)
    return c, resid


def _classify(s, p, tol, levels):
    # s has n-1 entries for a point of C^n; n == 1 means the closed disc.
    a = abs(p)
    if not s:
        levels.append(("disc", a))
        if a > 1.0 + tol:
            return Label.EXTERIOR, 1.0 - a, 1.0
        if a >= 1.0 - tol:
            return Label.DISTINGUISHED, 0.0, math.inf
        return Label.INTERIOR, 1.0 - a, 1.0 / (1.0 - a * a)

    n = len(s) + 1
    scale = 1.0 + sum(abs(v) for v in s)
    if a > 1.0 + tol:
        levels.append(("exterior-p", a))
        return Label.EXTERIOR, 1.0 - a, 1.0 / abs(1.0 - a * a)
    if a >= 1.0 - tol:
        m = len(s)
        resid = max(abs(s[i] - s[m - 1 - i].conjugate() * p) for i in range(m))
        levels.append(("boundary", resid))
        if resid > tol * scale:
            return Label.EXTERIOR, -resid, math.inf
        scaled = [(n - 1 - i) / n * s[i] for i in range(m)]
        label, margin, _ = _classify(scaled[:-1], scaled[-1], tol, levels)
        if label == Label.EXTERIOR:
            return Label.EXTERIOR, margin, math.inf
        return Label.DISTINGUISHED, 0.0, math.inf

    c = _canonical(s, p)
    levels.append(("canonical", c))
    cond = 1.0 / (1.0 - a * a)
    label, margin, sub_cond = _classify(c[:-1], c[-1], tol, levels)
    margin = min(1.0 - a, margin)
    cond = max(cond, sub_cond)
    if label == Label.INTERIOR:
        return Label.INTERIOR, margin, cond
    if label == Label.EXTERIOR:
        return Label.EXTERIOR, margin, cond
    return Label.TOP_BOUNDARY, 0.0, cond


def classify_point(x, tol=DEFAULT_TOL):
    """Classify ``x`` as INTERIOR, TOP_BOUNDARY, DISTINGUISHED or EXTERIOR.

    ``margin`` is the smallest slack met along the recursion (non-negative
    exactly when the label is not EXTERIOR) and ``conditioning`` the largest
    ``1/(1-|p|^2)`` amplification, infinite once the boundary branch is used.
    """
    levels = []
    label, margin, cond = _classify(list(x.s), x.p, tol, levels)
    if label != Label.EXTERIOR:
        margin = max(margin, 0.0)
    return PointClass(label, float(margin), float(cond), levels)


def classify_coords(coords, tol=DEFAULT_TOL):
    """Shortcut for ``classify_point`` on a raw coordinate sequence."""
    return classify_point(GammaPoint.from_coords(coords), tol)


def ay_criterion(s, p):
    """Closed-membership test for the symmetrized bidisc.

    ``(s, p)`` lies in the closure iff ``|s| <= 2`` and
    ``|s - conj(s) p| <= 1 - |p|^2``. Returns ``(inside, slack)`` where slack
    is the smaller of the two inequality gaps.
    """
    s, p = complex(s), complex(p)
    g1 = 2.0 - abs(s)
    g2 = (1.0 - abs(p) ** 2) - abs(s - s.conjugate() * p)
    slack = min(g1, g2)
    return slack >= 0.0, slack


def boundary_reflection(x):
    """``(s, p) -> (conj(s_{n-1}) p, ..., conj(s_1) p, p)``."""
    s = x.s
    m = len(s)
    return GammaPoint(x.n, tuple(s[m - 1 - i].conjugate() * x.p for i in range(m)), x.p)


def random_polydisc(rng, n, size, radius=1.0):
    """Uniform samples from the polydisc of the given radius, shape (size, n)."""
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, (size, n)))
    th = rng.uniform(0.0, 2.0 * np.pi, (size, n))
    return r * np.exp(1j * th)


def random_torus(rng, n, size):
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, (size, n)))


def symmetrize_many(z):
    """Vectorised symmetrization of an array of shape (..., n) -> (..., n)."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    e = np.zeros(z.shape[:-1] + (n + 1,), dtype=complex)
    e[..., 0] = 1.0
    for k in range(n):
        zk = z[..., k:k + 1]
        e[..., 1:] = e[..., 1:] + zk * e[..., :-1]
    return e[..., 1:]
