import json
from pathlib import Path

import numpy as np
import pytest

from gammalab.corpus import NILPOTENT, valid_corpus
from gammalab.gamma_geom import (GammaPoint, Label, ay_criterion, classify_point,
                                 symmetrize_many)
from gammalab.interplay import (COUNTEREXAMPLE_POINT, counterexample_demo, project32,
                                project32_operator, pushforward_variety, write_report)
from gammalab.op_theory import (OperatorTuple, TupleLabel, build_model, classify_tuple,
                                compress_model, scalar_tuple)
from gammalab.variety import GridSpec, PencilFamily, Verdict, fiber
from gammalab.vn_check import vn_experiment

GOLDEN = Path(__file__).parent / "data" / "counterexample_golden.json"
N3 = [(n, pf) for n, pf in valid_corpus() if pf.n == 3]
GRID = GridSpec(8, 32)


def test_project_examples():
    img = project32(GammaPoint(3, (0, 0), 0))
    assert img.coords == (0, 0) and classify_point(img).label == Label.INTERIOR
    img = project32(GammaPoint(3, (3, 3), 1))
    assert img.coords == pytest.approx((2, 1))
    assert classify_point(img).label == Label.DISTINGUISHED
    img = project32(GammaPoint.from_coords(COUNTEREXAMPLE_POINT))
    assert img.coords == pytest.approx((1.5, 0.5))
    assert ay_criterion(*img.coords)[1] == pytest.approx(0.0, abs=1e-15)


def test_project_rejects_bad_input():
    with pytest.raises(ValueError):
        project32(GammaPoint(3, (0, 0), 0), 1.1)
    with pytest.raises(ValueError):
        project32(GammaPoint(2, (0,), 0))


def test_closed_domain_maps_into_closed_domain_at_scale():
    rng = np.random.default_rng(0)
    # closed-disc triples, with a share pushed onto the circle
    r = np.sqrt(rng.uniform(0, 1, (10_000, 3)))
    r[rng.uniform(size=r.shape) < 0.3] = 1.0
    z = r * np.exp(2j * np.pi * rng.uniform(0, 1, r.shape))
    pts = symmetrize_many(z)
    ws = np.exp(2j * np.pi * np.arange(32) / 32)
    # vectorized two-variable test: |s - conj(s) p| <= 1 - |p|^2 and |s| <= 2
    s = (pts[:, 0, None] + ws[None, :] * pts[:, 1, None]) / 3
    p = ws[None, :] * pts[:, 2, None]
    slack = np.minimum(1 - abs(p) ** 2 - abs(s - np.conj(s) * p), 2 - abs(s))
    assert slack.min() >= -1e-9
    # spot-check the vectorized test against the recursive classifier
    for i in range(0, 10_000, 97):
        for j in range(0, 32, 7):
            img = project32(GammaPoint.from_coords(pts[i]), ws[j])
            assert classify_point(img, 1e-9).label != Label.EXTERIOR


def test_counterexample_values():
    rep = counterexample_demo()
    assert rep["source_label"] == "EXTERIOR"
    assert rep["canonical_c"] == [[1.0, 0.0], [2.0, 0.0]]
    assert rep["canonical_c_error"] <= 1e-12
    assert rep["canonical_c_label"] == "EXTERIOR"
    assert len(rep["images"]) == 360 and rep["all_images_in_closure"]
    assert rep["images"][0]["s"] == [1.5, 0.0] and rep["images"][0]["ay_slack"] == 0.0
    half = rep["images"][180]
    assert half["s"][0] == pytest.approx(-1 / 6) and half["p"][0] == pytest.approx(-0.5)
    assert half["label"] == "INTERIOR"


def test_counterexample_matches_golden(tmp_path):
    out = tmp_path / "report.json"
    text = write_report(counterexample_demo(), out)
    golden = GOLDEN.read_text()
    assert text == golden
    assert json.loads(golden)["images_exterior"] == []


def test_operator_projection_examples():
    z = OperatorTuple(3, [np.zeros((2, 2))] * 2, np.zeros((2, 2)))
    img = project32_operator(z)
    assert all(np.all(c == 0) for c in img.components())
    assert classify_tuple(img, trials=3).label == TupleLabel.CONTRACTION_EVIDENCE
    img = project32_operator(scalar_tuple((3, 3, 1)))
    assert img.S[0][0, 0] == pytest.approx(2)
    assert classify_tuple(img).label == TupleLabel.GAMMA_UNITARY


@pytest.mark.parametrize("name,pf", N3, ids=[n for n, _ in N3])
def test_operator_projection_keeps_inequality(name, pf):
    t = compress_model(build_model(pf, 6), 4)
    img = project32_operator(t, 1j)
    rep = vn_experiment(img, trials=15, max_degree=3, grid=GRID)
    assert rep.holds, rep.violations


def test_pushforward_examples():
    res = pushforward_variety(PencilFamily(3, [[[0]], [[0]]]), GRID)
    assert res.omega == 0 and np.all(res.A == 0)
    np.testing.assert_array_equal(fiber(res.g2_pencil, 0.3), [[0]])
    res = pushforward_variety(PencilFamily(3, [NILPOTENT, NILPOTENT]), GRID)
    np.testing.assert_allclose(res.A, 2 / 3 * NILPOTENT)
    assert res.omega == pytest.approx(1 / 3, abs=1e-9)


@pytest.mark.parametrize("name,pf", N3, ids=[n for n, _ in N3])
def test_pushforward_on_corpus(name, pf):
    res = pushforward_variety(pf, GRID)
    assert res.omega < 1
    assert res.validity.verdict == Verdict.VALID
    assert res.max_image_mismatch <= 1e-6
    assert res.images_checked > 0


def test_pushforward_requires_three_variables():
    with pytest.raises(ValueError):
        pushforward_variety(PencilFamily(2, [[[0.5]]]))
