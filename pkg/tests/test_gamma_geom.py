import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gammalab.errors import BoundaryRegimeError
from gammalab.gamma_geom import (DEFAULT_TOL, GammaPoint, Label, ay_criterion,
                                 boundary_reflection, canonical_c, classify_coords,
                                 classify_point, desymmetrize, random_polydisc, random_torus,
                                 symmetrize, symmetrize_many)


def test_symmetrize_examples():
    assert symmetrize([0.5, 0.5]).coords == pytest.approx((1.0, 0.25))
    assert symmetrize([1, 1, 1]).coords == pytest.approx((3, 3, 1))
    assert symmetrize([0, 0, 0]).coords == (0, 0, 0)


def test_symmetrize_permutation_invariant():
    z = [0.3 + 0.1j, -0.5j, 0.7, 0.2 - 0.2j]
    a = symmetrize(z).coords
    b = symmetrize(z[::-1]).coords
    assert np.allclose(a, b, atol=1e-15)


def test_symmetrize_many_matches_scalar():
    rng = np.random.default_rng(0)
    z = random_polydisc(rng, 4, 20)
    batch = symmetrize_many(z)
    for row, zz in zip(batch, z):
        assert np.allclose(row, symmetrize(zz).coords, atol=1e-14)


def test_desymmetrize_examples():
    assert np.allclose(desymmetrize(GammaPoint(2, (1.0,), 0.25)), [0.5, 0.5], atol=1e-12)
    assert np.allclose(desymmetrize(GammaPoint(3, (3, 3), 1)), [1, 1, 1], atol=1e-12)
    assert sorted(desymmetrize(GammaPoint(2, (0,), -1)).real) == pytest.approx([-1, 1])


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_desymmetrize_inverts_symmetrize(n):
    rng = np.random.default_rng(n)
    for z in random_polydisc(rng, n, 200, radius=1.5):
        roots = desymmetrize(symmetrize(z))
        # match as multisets
        remaining = list(roots)
        for v in z:
            k = int(np.argmin([abs(v - r) for r in remaining]))
            assert abs(v - remaining.pop(k)) <= 1e-8


def test_canonical_c_examples():
    c, res = canonical_c(GammaPoint(3, (2, 2.5), 0.5))
    assert c == pytest.approx([1, 2], abs=1e-12)
    assert res <= 1e-14
    c, _ = canonical_c(GammaPoint(4, (0, 0, 0), 0))
    assert c == [0, 0, 0]
    c, _ = canonical_c(GammaPoint(2, (1.9,), 0.9))
    assert c[0] == pytest.approx((1.9 - 0.9 * 1.9) / (1 - 0.81), abs=1e-12)
    assert c[0] == pytest.approx(1.0, abs=1e-12)


def test_canonical_c_boundary_regime():
    with pytest.raises(BoundaryRegimeError):
        canonical_c(GammaPoint(2, (0,), 1.0))


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000))
def test_canonical_c_reconstructs(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x[-1] *= 0.9 / max(abs(x[-1]), 1.0)
    pt = GammaPoint.from_coords(x)
    c, res = canonical_c(pt)
    m = n - 1
    for i in range(m):
        assert abs(pt.s[i] - c[i] - np.conj(c[m - 1 - i]) * pt.p) <= 1e-12 * (1 + abs(pt.s[i])) * 100


def test_classify_examples():
    for n in (2, 3, 5):
        assert classify_coords([0] * n).label == Label.INTERIOR
    assert classify_coords([3, 3, 1]).label == Label.DISTINGUISHED
    assert classify_coords([2, 2.5, 0.5]).label == Label.EXTERIOR
    assert classify_coords([1.9, 0.9]).label == Label.TOP_BOUNDARY


def test_classify_margin_sign_matches_label():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        n = int(rng.integers(2, 5))
        x = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * rng.uniform(0, 2)
        pc = classify_coords(x)
        if pc.label == Label.EXTERIOR:
            assert pc.margin < 0 or pc.margin <= 10 * DEFAULT_TOL
        else:
            assert pc.margin >= 0


def test_classify_records_conditioning():
    pc = classify_coords([0, 0.99])
    assert pc.conditioning == pytest.approx(1 / (1 - 0.99 ** 2))
    assert classify_coords([2, 1]).conditioning == float("inf")


def test_ay_examples():
    assert ay_criterion(0, 0) == (True, 1.0)
    ok, slack = ay_criterion(2, 1)
    assert ok and slack == pytest.approx(0, abs=1e-15)
    ok, slack = ay_criterion(1.5, 0.5)
    assert ok and slack == pytest.approx(0, abs=1e-15)


def test_ay_equivalence_sample():
    rng = np.random.default_rng(2)
    r = 3 * np.sqrt(rng.uniform(0, 1, 20000))
    s = r * np.exp(2j * np.pi * rng.uniform(0, 1, 20000))
    p = 1.2 * np.sqrt(rng.uniform(0, 1, 20000)) * np.exp(2j * np.pi * rng.uniform(0, 1, 20000))
    for si, pi in zip(s, p):
        ok, slack = ay_criterion(si, pi)
        if abs(slack) < 10 * DEFAULT_TOL:
            continue
        assert classify_point(GammaPoint(2, (si,), pi)).in_closure == ok


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_polydisc_interior_and_torus_distinguished(n):
    rng = np.random.default_rng(10 + n)
    for x in symmetrize_many(random_polydisc(rng, n, 500)):
        assert classify_coords(x).label == Label.INTERIOR
    for x in symmetrize_many(random_torus(rng, n, 500)):
        assert classify_coords(x).label == Label.DISTINGUISHED


@pytest.mark.parametrize("n", [2, 3, 4])
def test_boundary_reflection_preserves_label(n):
    rng = np.random.default_rng(20 + n)
    pts = list(symmetrize_many(random_torus(rng, n, 100)))
    # unimodular p but generic s: mostly EXTERIOR, still must map consistently
    pts += [np.concatenate([rng.standard_normal(n - 1) * 2, [np.exp(1j * t)]])
            for t in rng.uniform(0, 6.3, 100)]
    for x in pts:
        g = GammaPoint.from_coords(x)
        assert classify_point(boundary_reflection(g)).label == classify_point(g).label


def test_point_json_round_trip():
    g = GammaPoint(3, (1 + 2j, -0.5), 0.25j)
    obj = json.loads(json.dumps(g.to_json()))
    assert obj == {"n": 3, "s": [[1.0, 2.0], [-0.5, 0.0]], "p": [0.0, 0.25]}
    assert GammaPoint.from_json(obj) == g


@pytest.mark.parametrize("bad", [{"n": 3, "s": [[1, 0]], "p": [0, 0]},
                                 {"n": 2, "s": [[1, 0]]},
                                 {"n": 2, "s": "x", "p": [0, 0]}])
def test_point_json_rejects_malformed(bad):
    with pytest.raises(ValueError):
        GammaPoint.from_json(bad)


def test_point_rejects_nonfinite():
    with pytest.raises(ValueError):
        GammaPoint(2, (float("nan"),), 0)
