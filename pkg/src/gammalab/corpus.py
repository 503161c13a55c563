"""A fixed set of pencil families that define distinguished varieties.

Every entry has ``n`` in {2, 3} and matrix order at most 3, and is built so
that validity follows from a short argument:

* ``n = 2`` with ``F = [alpha]``: the fiber over ``p`` is ``conj(alpha) + alpha p``
  whose canonical witness is the constant ``conj(alpha)``, so ``|alpha| < 1``
  suffices.
* ``n = 2`` with numerical radius below one (sufficient in two variables).
* ``n = 3`` with commuting normal ``F_1, F_2``: the family splits along the
  joint eigenvectors into scalar pencils ``(a, b)``, each valid when
  ``(a, b)`` lies in the open symmetrized bidisc.
* ``n = 3`` with ``F_1 = aI + tN``, ``F_2 = bI + uN`` for the 2x2 nilpotent
  ``N`` and ``|t| = |u|``, which makes the starred commutators agree.
"""

import numpy as np

from .gamma_geom import symmetrize
from .numerics import numerical_radius
from .variety import PencilFamily

NILPOTENT = np.array([[0, 1], [0, 0]], dtype=complex)


def _unitary(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _with_radius(rng, d, omega):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return a * (omega / numerical_radius(a))


def commuting_normal(zs, rng):
    """Normal pair with joint eigenvalues ``symmetrize(z)`` for each pair ``z``."""
    pts = [symmetrize(z) for z in zs]
    u = _unitary(rng, len(pts))
    d1 = np.diag([x.s[0] for x in pts])
    d2 = np.diag([x.p for x in pts])
    return PencilFamily(3, [u @ d1 @ u.conj().T, u @ d2 @ u.conj().T])


def valid_corpus(seed=7):
    """List of ``(name, PencilFamily)``; deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    n2 = [
        ("scalar-half", PencilFamily(2, [[[0.5]]])),
        ("scalar-complex", PencilFamily(2, [[[0.3 + 0.4j]]])),
        ("square-root-curve", PencilFamily(2, [NILPOTENT])),
        ("diagonal-pair", PencilFamily(2, [np.diag([0.5, -0.3j])])),
        ("radius-0.9-order-2", PencilFamily(2, [_with_radius(rng, 2, 0.9)])),
        ("radius-0.8-order-3", PencilFamily(2, [_with_radius(rng, 3, 0.8)])),
    ]
    n3 = [
        ("zero-3", PencilFamily(3, [[[0.0]], [[0.0]]])),
        ("normal-order-2", commuting_normal([(0.3, -0.5j), (0.6 + 0.2j, 0.1)], rng)),
        ("normal-order-3", commuting_normal([(0.3, -0.5j), (0.6 + 0.2j, 0.1),
                                             (-0.7, 0.7j)], rng)),
        ("nilpotent-pair", PencilFamily(3, [0.5 * NILPOTENT, 0.5 * NILPOTENT])),
        ("shifted-nilpotent", PencilFamily(3, [0.2 * np.eye(2) + 0.3 * NILPOTENT,
                                               0.1j * np.eye(2) + 0.3 * NILPOTENT])),
        ("rotated-nilpotent", PencilFamily(3, [0.4 * np.eye(2) + 0.3 * NILPOTENT,
                                               -0.2 * np.eye(2) + 0.3j * NILPOTENT])),
    ]
    return n2 + n3
