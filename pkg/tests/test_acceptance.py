"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every criterion prints one ``criterion N: PASS|FAIL`` line; the lines are
repeated in the terminal summary.
"""

import math

import numpy as np
import pytest

import acceptance_log
from builders import commuting_tuple
from gammalab.corpus import valid_corpus
from gammalab.gamma_geom import (DEFAULT_TOL, GammaPoint, Label, ay_criterion, classify_coords,
                                 classify_point, desymmetrize, random_polydisc, random_torus,
                                 symmetrize, symmetrize_many)
from gammalab.interplay import counterexample_demo, pushforward_variety
from gammalab.joint_spectrum import joint_eigs, joint_eigs_oracle, same_point_sets
from gammalab.op_theory import (build_model, compress_model, dilation_check, fo_tuple,
                                isometry_relations_check)
from gammalab.variety import GridSpec, Verdict, sample_variety, separating_poly
from gammalab.vn_check import vn_experiment

pytestmark = pytest.mark.slow

CORPUS = valid_corpus()
DEFAULT_GRID = GridSpec(24, 64, include_boundary=True)


def check(number, title, budget, fn):
    ok, line = acceptance_log.run(number, title, budget, fn)
    assert ok, line


def test_criterion_01_counterexample():
    def run():
        rep = counterexample_demo(samples=360)
        assert rep["canonical_c_error"] <= 1e-12, rep["canonical_c_error"]
        assert rep["source_label"] == Label.EXTERIOR.value
        labels = [row["label"] for row in rep["images"]]
        assert len(labels) == 360
        assert Label.EXTERIOR.value not in labels
        return f"c = (1, 2) error {rep['canonical_c_error']:.1e}, 360/360 images in closure"

    check(1, "counterexample reproduction", 1.0, run)


def test_criterion_02_two_variable_membership():
    def run():
        rng = np.random.default_rng(2)
        count = 100_000
        s = 3.0 * np.sqrt(rng.uniform(0, 1, count)) * np.exp(2j * np.pi * rng.uniform(0, 1, count))
        p = 1.2 * np.sqrt(rng.uniform(0, 1, count)) * np.exp(2j * np.pi * rng.uniform(0, 1, count))
        compared = disagreements = 0
        for si, pi in zip(s, p):
            inside, slack = ay_criterion(si, pi)
            if abs(slack) < 10 * DEFAULT_TOL:
                continue
            compared += 1
            disagreements += classify_point(GammaPoint(2, (si,), pi)).in_closure != inside
        assert disagreements == 0, f"{disagreements} disagreements"
        assert compared > 0.99 * count
        return f"{compared} points compared, 0 disagreements"

    check(2, "two-variable membership equivalence", 10.0, run)


def test_criterion_03_symmetrization():
    def run():
        rng = np.random.default_rng(3)
        worst = 0.0
        for n in range(2, 6):
            for x in symmetrize_many(random_polydisc(rng, n, 10_000)):
                assert classify_coords(x).label == Label.INTERIOR, (n, x)
            for x in symmetrize_many(random_torus(rng, n, 10_000)):
                assert classify_coords(x).label == Label.DISTINGUISHED, (n, x)
            for z in random_polydisc(rng, n, 2_500):
                roots = list(desymmetrize(symmetrize(z)))
                for v in z:
                    k = int(np.argmin([abs(v - r) for r in roots]))
                    worst = max(worst, abs(v - roots.pop(k)))
        assert worst <= 1e-8, worst
        return f"n = 2..5 x 10^4 interior and torus points; round-trip error {worst:.1e}"

    check(3, "symmetrization consistency", 30.0, run)


def test_criterion_04_joint_spectrum_oracle():
    def run():
        mismatched = []
        for seed in range(200):
            t, _ = commuting_tuple(seed)
            assert 2 <= t.order <= 6 and t.k <= 4
            js = joint_eigs(t, seed=seed)
            if not same_point_sets(js.point_set(), joint_eigs_oracle(t), 1e-6):
                mismatched.append(seed)
        assert not mismatched, f"mismatched seeds {mismatched}"
        return "200/200 tuples match the oracle within 1e-6"

    check(4, "joint spectrum oracle equivalence", 60.0, run)


def test_criterion_05_distinguished_exit():
    def run():
        worst_rel = 0.0
        for name, pf in CORPUS:
            assert pf.d <= 3 and pf.n in (2, 3)
            sample = sample_variety(pf, DEFAULT_GRID)
            assert sample.report.verdict == Verdict.VALID, name
            for rec in sample.records:
                assert rec.error is None, (name, rec.error)
                for cls, rel in zip(rec.classes, rec.relation_residuals):
                    if rec.on_boundary:
                        assert cls.label == Label.DISTINGUISHED, (name, rec.p)
                        assert rel <= 1e-6, (name, rec.p, rel)
                        worst_rel = max(worst_rel, rel)
                    else:
                        assert abs(rec.p) <= 0.999 + 1e-15
                        assert cls.label == Label.INTERIOR, (name, rec.p)
        return f"{len(CORPUS)} VALID pencils; worst boundary relation residual {worst_rel:.1e}"

    check(5, "distinguished exit property", 120.0, run)


def test_criterion_06_fundamental_operators():
    def run():
        worst_res, worst_gap = 0.0, -math.inf
        for name, pf in CORPUS:
            fo = fo_tuple(compress_model(build_model(pf, 10), 8), omega_points=256)
            worst_res = max(worst_res, max(fo.residuals))
            for row in fo.omega_report:
                worst_gap = max(worst_gap, row["max"] - row["bound"])
        assert worst_res <= 1e-8, worst_res
        assert worst_gap <= 1e-6, worst_gap
        return f"residual {worst_res:.1e}; max omega - bound {worst_gap:.3f}"

    check(6, "fundamental operator residual and omega bound", 60.0, run)


def test_criterion_07_model_identities():
    def run():
        K, k = 10, 6
        worst_def = worst_dil = 0.0
        for name, pf in CORPUS:
            m = build_model(pf, K)
            worst_def = max(worst_def, isometry_relations_check(m)["max_restricted"])
            worst_dil = max(worst_dil, dilation_check(compress_model(m, k), m,
                                                      max_degree=K - k))
        assert worst_def <= 1e-12, worst_def
        assert worst_dil <= 1e-10, worst_dil
        return f"restricted defect {worst_def:.1e}; dilation residual {worst_dil:.1e}"

    check(7, "model identities at truncation", 60.0, run)


def test_criterion_08_von_neumann():
    def run():
        violations, margins = [], []
        for idx, (name, pf) in enumerate(CORPUS):
            t = compress_model(build_model(pf, 8), 6)
            for block in (1, 2):
                rep = vn_experiment(t, trials=100, max_degree=4, block_order=block,
                                    grid=DEFAULT_GRID, tol=1e-6, seed=1000 * idx)
                assert not rep.exploratory, (name, rep.gate)
                margins.append(rep.min_margin)
                violations += [(name, block, v["trial"]) for v in rep.violations]
        assert not violations, violations
        return f"{len(CORPUS)} tuples x 200 polynomials; min margin {min(margins):.2e}"

    check(8, "von Neumann inequality", 600.0, run)


def test_criterion_09_pushforward():
    def run():
        omegas = []
        for name, pf in CORPUS:
            if pf.n != 3:
                continue
            res = pushforward_variety(pf, DEFAULT_GRID)
            assert res.omega < 1, (name, res.omega)
            assert res.validity.verdict == Verdict.VALID, (name, res.validity.reason)
            assert res.max_image_mismatch <= 1e-6, (name, res.max_image_mismatch)
            omegas.append(res.omega)
        return f"{len(omegas)} pencils; max omega {max(omegas):.3f}"

    check(9, "pushforward to two variables", 60.0, run)


def test_criterion_10_separation():
    def run():
        rng = np.random.default_rng(10)
        grid = GridSpec(6, 16)
        on_checked = 0
        for name, pf in CORPUS:
            z = rng.uniform(0, 1, (1000, pf.n)) ** 0.5 * np.exp(
                2j * np.pi * rng.uniform(0, 1, (1000, pf.n)))
            for x in symmetrize_many(z):
                pt = GammaPoint.from_coords(x)
                sep = separating_poly(pf, pt, 1e-8)
                assert not sep.on_variety, (name, x)
                # oracle: det(Phi - sI) as a product over LAPACK eigenvalues
                phi = pf.pencils(pt.p)[sep.index - 1]
                expect = np.prod(np.linalg.eigvals(phi) - pt.s[sep.index - 1])
                assert abs(sep.value) > 1e-8
                assert abs(sep.value - expect) <= 1e-9 * max(1.0, abs(expect))
            for row in sample_variety(pf, grid).points():
                pt = GammaPoint.from_coords(row)
                assert separating_poly(pf, pt, 1e-8).on_variety, (name, row)
                on_checked += 1
        return f"{1000 * len(CORPUS)} points separated; {on_checked} variety points on-variety"

    check(10, "polynomial-convexity separator", 30.0, run)
