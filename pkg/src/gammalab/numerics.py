"""Dense complex linear algebra used by every other module.

The eigenvalue path (Schur form, companion roots) is implemented here with a
Householder Hessenberg reduction followed by Wilkinson-shifted QR sweeps.
Hermitian eigenproblems (norms, square roots of defect operators) go through
``numpy.linalg.eigh``.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .errors import ConvergenceError, NotPSDError

_EPS = np.finfo(float).eps
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def as_cmatrix(m, square=True, name="matrix"):
    """Coerce ``m`` to a finite complex128 2-D array.

    Raises ``ValueError`` for non-finite entries, wrong rank, or (when
    ``square``) mismatched dimensions.
    """
    a = np.array(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


@dataclass
class SchurResult:
    unitary: np.ndarray
    triangular: np.ndarray
    eigenvalues: np.ndarray
    residual: float


def hessenberg(a, calc_q=True):
    """Householder reduction to upper Hessenberg form, ``a = Q H Q*``."""
    h = np.array(a, dtype=complex)
    n = h.shape[0]
    q = np.eye(n, dtype=complex) if calc_q else None
    for k in range(n - 2):
        x = h[k + 1:, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0 or np.linalg.norm(x[1:]) == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * xnorm
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        if calc_q:
            q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h, q


def _givens(a, b):
    r = math.hypot(abs(a), abs(b))
    if r == 0.0:
        return 1.0 + 0j, 0j
    return a / r, b / r


def _wilkinson(a, b, c, d):
    # eigenvalue of [[a, b], [c, d]] closest to d
    tr = 0.5 * (a + d)
    disc = cmath.sqrt((0.5 * (a - d)) ** 2 + b * c)
    l1, l2 = tr + disc, tr - disc
    return l1 if abs(l1 - d) <= abs(l2 - d) else l2


_SMALL_ORDER = 12


def _shift(h_get, hi, since_deflation):
    if since_deflation % 11 == 10:
        # exceptional shift to break cycles
        return h_get(hi, hi) + 0.75 * abs(h_get(hi, hi - 1)) * complex(
            math.cos(0.3 * since_deflation), math.sin(0.3 * since_deflation))
    return _wilkinson(h_get(hi - 1, hi - 1), h_get(hi - 1, hi),
                      h_get(hi, hi - 1), h_get(hi, hi))


def _qr_sweeps_numpy(h, q, n, small, max_iter):
    hi = n - 1
    total = 0
    since_deflation = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            if sub <= small or sub <= _EPS * (abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            since_deflation = 0
            continue
        if total >= max_iter:
            raise ConvergenceError(
                f"QR iteration did not converge within {max_iter} sweeps",
                partial=h, unitary=q, iterations=total)
        total += 1
        since_deflation += 1
        mu = _shift(lambda i, j: h[i, j], hi, since_deflation)

        idx = np.arange(lo, hi + 1)
        h[idx, idx] -= mu
        rots = []
        for k in range(lo, hi):
            c, s = _givens(h[k, k], h[k + 1, k])
            g = np.array([[c.conjugate(), s.conjugate()], [-s, c]])
            h[k:k + 2, k:] = g @ h[k:k + 2, k:]
            h[k + 1, k] = 0.0
            rots.append(g)
        for k, g in zip(range(lo, hi), rots):
            gh = g.conj().T
            top = min(k + 2, hi) + 1
            h[:top, k:k + 2] = h[:top, k:k + 2] @ gh
            if q is not None:
                q[:, k:k + 2] = q[:, k:k + 2] @ gh
        h[idx, idx] += mu
    return total


def _qr_sweeps_lists(h, q, n, small, max_iter):
    # Same sweep as _qr_sweeps_numpy on nested lists; numpy call overhead
    # dominates below ~12x12.
    hi = n - 1
    total = 0
    since_deflation = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            sub = abs(h[lo][lo - 1])
            if sub <= small or sub <= _EPS * (abs(h[lo][lo]) + abs(h[lo - 1][lo - 1])):
                h[lo][lo - 1] = 0j
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            since_deflation = 0
            continue
        if total >= max_iter:
            raise ConvergenceError(
                f"QR iteration did not converge within {max_iter} sweeps",
                partial=np.array(h), unitary=None if q is None else np.array(q),
                iterations=total)
        total += 1
        since_deflation += 1
        mu = _shift(lambda i, j: h[i][j], hi, since_deflation)

        for k in range(lo, hi + 1):
            h[k][k] -= mu
        rots = []
        for k in range(lo, hi):
            c, s = _givens(h[k][k], h[k + 1][k])
            cc, sc = c.conjugate(), s.conjugate()
            rk, rk1 = h[k], h[k + 1]
            for j in range(k, n):
                x, y = rk[j], rk1[j]
                rk[j] = cc * x + sc * y
                rk1[j] = c * y - s * x
            rk1[k] = 0j
            rots.append((c, s, sc, cc))
        for k, (c, s, sc, cc) in zip(range(lo, hi), rots):
            top = min(k + 2, hi) + 1
            for i in range(top):
                row = h[i]
                x, y = row[k], row[k + 1]
                row[k] = x * c + y * s
                row[k + 1] = y * cc - x * sc
            if q is not None:
                for row in q:
                    x, y = row[k], row[k + 1]
                    row[k] = x * c + y * s
                    row[k + 1] = y * cc - x * sc
        for k in range(lo, hi + 1):
            h[k][k] += mu
    return total


def schur(m, tol=1e-12, calc_q=True, max_iter=None):
    """Complex Schur factorization ``m = Q U Q*``.

    Parameters
    ----------
    m : array_like, shape (N, N)
        Square matrix with finite entries.
    tol : float
        Unitarity tolerance used when certifying the result.
    calc_q : bool
        Accumulate the unitary factor. When False the ``unitary`` field is
        None and ``residual`` is not computed (set to nan).
    max_iter : int, optional
        Iteration budget; defaults to ``100 * N``.

    Returns
    -------
    SchurResult
        Eigenvalues are the diagonal of ``U`` in the order the QR sweeps
        deflate them into place.

    Raises
    ------
    ConvergenceError
        If the budget is exhausted. The exception carries the partial iterate.
    """
    a = as_cmatrix(m)
    n = a.shape[0]
    if n == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return SchurResult(empty, empty, np.zeros(0, dtype=complex), 0.0)
    anorm = np.linalg.norm(a)
    if n > 2 and np.any(np.tril(a, -2)):
        h, q = hessenberg(a, calc_q)
    else:
        h = a.copy()
        q = np.eye(n, dtype=complex) if calc_q else None
    if max_iter is None:
        max_iter = 100 * n
    small = 1e-13 * anorm
    if n <= _SMALL_ORDER:
        rows = h.tolist()
        qrows = q.tolist() if calc_q else None
        total = _qr_sweeps_lists(rows, qrows, n, small, max_iter)
        h = np.array(rows, dtype=complex)
        if calc_q:
            q = np.array(qrows, dtype=complex)
    else:
        total = _qr_sweeps_numpy(h, q, n, small, max_iter)

    u = np.triu(h)
    eig = np.diag(u).copy()
    if calc_q:
        residual = float(np.linalg.norm(q @ u @ q.conj().T - a))
        unit_err = float(np.linalg.norm(q @ q.conj().T - np.eye(n)))
        if unit_err > max(tol, 1e3 * _EPS * n):
            raise ConvergenceError(
                f"Schur factor lost unitarity ({unit_err:.2e})",
                partial=h, unitary=q, iterations=total)
    else:
        residual = float("nan")
    return SchurResult(q, u, eig, residual)


def eigvals(m):
    """Eigenvalues via :func:`schur` without accumulating the unitary."""
    return schur(m, calc_q=False).eigenvalues


def hermitian_part(m):
    return 0.5 * (m + m.conj().T)


def operator_norm(m):
    """Largest singular value, as sqrt of the top eigenvalue of ``m* m``."""
    a = as_cmatrix(m, square=False)
    if a.size == 0:
        return 0.0
    g = a.conj().T @ a if a.shape[0] >= a.shape[1] else a @ a.conj().T
    top = np.linalg.eigvalsh(hermitian_part(g))[-1]
    return float(math.sqrt(max(top, 0.0)))


def spectral_radius(m):
    a = as_cmatrix(m)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(eigvals(a))))


def _re_top(a, theta):
    h = hermitian_part(np.exp(1j * theta) * a)
    return float(np.linalg.eigvalsh(h)[-1])


def numerical_radius(m, grid_size=64):
    """Numerical radius ``max |<m v, v>|`` over unit vectors.

    Evaluates ``lambda_max(Re(e^{i theta} m))`` on a uniform theta grid and
    refines with three golden-section passes around the best grid point.
    """
    a = as_cmatrix(m)
    if grid_size < 8:
        raise ValueError("grid_size must be at least 8")
    if a.size == 0:
        return 0.0
    thetas = 2.0 * np.pi * np.arange(grid_size) / grid_size
    vals = np.array([_re_top(a, t) for t in thetas])
    k = int(np.argmax(vals))
    best = float(vals[k])
    step = 2.0 * np.pi / grid_size
    center = thetas[k]
    for _ in range(3):
        lo, hi = center - step, center + step
        x1 = hi - _GOLDEN * (hi - lo)
        x2 = lo + _GOLDEN * (hi - lo)
        f1, f2 = _re_top(a, x1), _re_top(a, x2)
        for _ in range(40):
            if f1 < f2:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + _GOLDEN * (hi - lo)
                f2 = _re_top(a, x2)
            else:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - _GOLDEN * (hi - lo)
                f1 = _re_top(a, x1)
        if max(f1, f2) > best:
            best = max(f1, f2)
            center = x1 if f1 >= f2 else x2
        step *= 0.25
    return max(best, 0.0)


@dataclass
class HermitianSqrt:
    sqrt: np.ndarray
    pinv_of_sqrt: np.ndarray
    rank: int
    range_basis: np.ndarray


def hermitian_sqrt_and_pinv(m, rank_tol=1e-10):
    """Square root of a PSD matrix, its pseudo-inverse and range basis.

    Eigenvalues in ``[-rank_tol, 0)`` are clipped to zero; anything more
    negative raises :class:`NotPSDError`. Eigenvalues above ``rank_tol``
    define the numerical range.
    """
    a = as_cmatrix(m)
    herm_err = np.linalg.norm(a - a.conj().T)
    if herm_err > max(rank_tol, 1e-10 * (1.0 + np.linalg.norm(a))):
        raise NotPSDError(f"matrix is not Hermitian (defect {herm_err:.2e})", eigenvalue=None)
    w, v = np.linalg.eigh(hermitian_part(a))
    if w.size and w[0] < -rank_tol:
        raise NotPSDError(f"matrix is not PSD: eigenvalue {w[0]:.3e}", eigenvalue=float(w[0]))
    w = np.clip(w, 0.0, None)
    root = np.sqrt(w)
    keep = w > rank_tol
    inv = np.zeros_like(root)
    inv[keep] = 1.0 / root[keep]
    sq = (v * root) @ v.conj().T
    pinv = (v * inv) @ v.conj().T
    return HermitianSqrt(sq, pinv, int(keep.sum()), v[:, keep])


def cluster_average(points, scale):
    """Snap near-coincident points to their cluster mean.

    ``points`` is an array of complex numbers, or of rows of them compared
    in the max norm. A cluster of k points is averaged only when its spread
    matches the ``eps**(1/k)`` splitting of a k-fold eigenvalue, so
    genuinely distinct close points are left alone. The mean of such a
    cluster is well conditioned even when the individual points are not.
    """
    pts = np.asarray(points)
    n = len(pts)
    if n < 2:
        return pts.copy()
    flat = pts.reshape(n, -1)
    dist = np.max(np.abs(flat[:, None, :] - flat[None, :, :]), axis=2)
    link = 10.0 * (_EPS ** (1.0 / n)) * scale
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= link:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = pts.copy()
    for members in groups.values():
        k = len(members)
        if k < 2:
            continue
        diam = dist[np.ix_(members, members)].max()
        if diam <= 20.0 * (_EPS ** (1.0 / k)) * scale:
            out[members] = pts[members].mean(axis=0)
    return out


def poly_roots(coeffs, monic=False):
    """Roots (with multiplicity) from the companion matrix eigenvalues.

    ``coeffs`` lists coefficients from the highest degree down. With
    ``monic=True`` the leading 1 is implicit and must be omitted.
    Near-multiple roots are snapped to their cluster mean when the spread is
    consistent with the usual ``eps**(1/k)`` perturbation of a k-fold root.
    """
    c = np.atleast_1d(np.array(coeffs, dtype=complex))
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    if monic:
        c = np.concatenate([[1.0 + 0j], c])
    if c.size == 0 or not np.any(c):
        raise ValueError("zero polynomial has no well-defined roots")
    if c[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    c = c / c[0]
    deg = c.size - 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    comp = np.zeros((deg, deg), dtype=complex)
    comp[0, :] = -c[1:]
    comp[np.arange(1, deg), np.arange(deg - 1)] = 1.0
    roots = eigvals(comp)
    scale = 1.0 + float(np.max(np.abs(roots)))
    return cluster_average(roots, scale)


def commutator(a, b):
    return a @ b - b @ a


def null_space(m, rtol=1e-8, min_dim=0):
    """Orthonormal basis of the numerical kernel (via SVD).

    Singular values ``<= rtol * max(1, sigma_max)`` count as zero; at least
    ``min_dim`` directions are returned.
    """
    a = np.asarray(m, dtype=complex)
    ncols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(ncols, dtype=complex)
    _, sv, vh = np.linalg.svd(a)
    full = np.zeros(ncols)
    full[:sv.size] = sv
    cut = rtol * max(1.0, float(sv[0]) if sv.size else 1.0)
    k = max(int(np.sum(full <= cut)), min_dim)
    return vh[ncols - k:, :].conj().T if k else np.zeros((ncols, 0), dtype=complex)


def orth_complement(basis):
    """Orthonormal basis for the complement of the column span of ``basis``."""
    n, k = basis.shape
    q, _ = np.linalg.qr(np.hstack([basis, np.eye(n, dtype=complex)]))
    return q[:, k:n]
