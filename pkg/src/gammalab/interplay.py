"""From three variables to two.

For unimodular ``w`` the map ``(s_1, s_2, p) -> ((s_1 + w s_2) / 3, w p)``
sends the closed domain in three variables into the closed domain in two
(checked pointwise with ``project32``). It also sends contractions to
contractions and distinguished varieties to distinguished varieties. The
converse fails, and ``counterexample_demo`` reproduces the standard witness.
"""

from dataclasses import dataclass
import json

import numpy as np

from .gamma_geom import (GammaPoint, Label, ay_criterion, canonical_c, classify_point)
from .numerics import eigvals, numerical_radius
from .op_theory import OperatorTuple
from .variety import (CheckReport, GridSpec, PencilFamily, condition_one, sample_variety,
                      validate_pencil)
from .errors import HypothesesNotMet

COUNTEREXAMPLE_POINT = (2.0, 2.5, 0.5)
REPORT_NAME = "counterexample_report.json"


def _check_unimodular(w):
    w = complex(w)
    if abs(abs(w) - 1.0) > 1e-12:
        raise ValueError(f"|omega| must be 1, got {abs(w):.15g}")
    return w


def project32(x, omega=1.0):
    """``((s_1 + omega s_2) / 3, omega p)`` for a point with ``n = 3``."""
    if x.n != 3:
        raise ValueError("project32 needs a point with n = 3")
    w = _check_unimodular(omega)
    s1, s2 = x.s
    return GammaPoint(2, ((s1 + w * s2) / 3.0,), w * x.p)


def project32_operator(t, omega=1.0):
    """Operator version of ``project32``."""
    if t.n != 3:
        raise ValueError("project32_operator needs a tuple with n = 3")
    w = _check_unimodular(omega)
    return OperatorTuple(2, [(t.S[0] + w * t.S[1]) / 3.0], w * t.P)


@dataclass
class PushforwardResult:
    A: np.ndarray
    omega: float
    g2_pencil: PencilFamily
    validity: CheckReport
    max_image_mismatch: float
    images_checked: int


def pushforward_variety(pf, grid=None, seed=0, override=False):
    """Image of the variety of ``pf`` under ``(s_1, s_2, p) -> ((s_1 + s_2)/3, p)``.

    The image is cut out by ``det(A^* + pA - sI)`` with ``A = (F_1 + F_2)/3``.
    Each sampled source point is checked against the eigenvalues of
    ``A^* + pA``; the largest distance is reported as ``max_image_mismatch``.
    """
    if pf.n != 3:
        raise ValueError("pushforward_variety needs a family with n = 3")
    if not condition_one(pf)["passed"]:
        raise HypothesesNotMet("commutation conditions fail for the source family")
    grid = grid or GridSpec()
    A = (pf.F[0] + pf.F[1]) / 3.0
    g2 = PencilFamily(2, [A])
    sample = sample_variety(pf, grid, seed, override=override)
    worst, count = 0.0, 0
    for rec in sample.records:
        if not rec.fiber.size:
            continue
        ev = eigvals(A.conj().T + rec.p * A)
        for s in rec.fiber:
            img = (s[0] + s[1]) / 3.0
            worst = max(worst, float(np.min(np.abs(ev - img))))
            count += 1
    return PushforwardResult(A, numerical_radius(A), g2, validate_pencil(g2, grid),
                             worst, count)


def counterexample_demo(samples=360):
    """A point outside the closed three-variable domain whose images all lie inside.

    Returns a JSON-ready dict; ``json.dumps(..., sort_keys=True)`` of it is
    identical across runs.
    """
    x = GammaPoint.from_coords(COUNTEREXAMPLE_POINT)
    c, resid = canonical_c(x)
    expected = (1.0, 2.0)
    source = classify_point(x)
    c_class = classify_point(GammaPoint(2, (c[0],), c[1]))
    rows = []
    for k in range(samples):
        theta = 2.0 * np.pi * k / samples
        w = complex(np.cos(theta), np.sin(theta))
        img = project32(x, w)
        ok, slack = ay_criterion(img.s[0], img.p)
        rows.append({"k": k, "omega": [w.real, w.imag],
                     "s": [img.s[0].real, img.s[0].imag], "p": [img.p.real, img.p.imag],
                     "label": classify_point(img).label.value, "ay_slack": slack,
                     "ay_inside": ok})
    outside = [r["k"] for r in rows if r["label"] == Label.EXTERIOR.value]
    return {
        "source": x.to_json(),
        "source_label": source.label.value,
        "canonical_c": [[v.real, v.imag] for v in c],
        "canonical_c_error": max(abs(a - b) for a, b in zip(c, expected)),
        "canonical_c_residual": resid,
        "canonical_c_label": c_class.label.value,
        "images": rows,
        "images_exterior": outside,
        "all_images_in_closure": not outside,
    }


def write_report(report, path):
    text = json.dumps(report, sort_keys=True, indent=1) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return text
