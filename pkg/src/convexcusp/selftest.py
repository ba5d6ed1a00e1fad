"""Curated invariant suite behind the ``selftest`` command.

Each check returns (name, ok, detail); the suite is a compact version of
the full test suite, sized to run in well under a minute.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np

from . import cusplie, cuspvol, fig8, hilbert, projlin
from .cusplie import LieAlgElem
from .domains import BallDomain, DomainDPrime, DomainDt, vt_map


def _check(name, fn):
    try:
        detail = fn()
        return (name, True, detail or "")
    except Exception as err:  # noqa: BLE001 - the suite reports, not raises
        return (name, False, f"{type(err).__name__}: {err}")


def run_all():
    checks = [
        ("relation-exact", _relation_exact),
        ("unipotency-dichotomy", _unipotency),
        ("limit-cusp-shape", _limit_shape),
        ("ball-metric-oracle", _ball_oracle),
        ("closed-form-norms", _closed_norms),
        ("finsler-derivative", _finsler_derivative),
        ("normalization-roundtrip", _normalization_roundtrip),
        ("fig8-normalization", _fig8_normalization),
        ("lattice-convergence", _lattice_convergence),
        ("domain-convexity", _domain_facts),
        ("displacement-profile", _displacement),
        ("projective-invariance", _invariance),
    ]
    return [_check(name, fn) for name, fn in checks]


def _relation_exact():
    for t in (Fraction(1, 3), Fraction(7, 5), Fraction(2, 9)):
        resid = fig8.relation_residual(t)
        assert all(v == 0 for v in resid.flat), f"nonzero relation residual at t={t}"
    return "3 parameters"


def _unipotency():
    assert not fig8.obstruction_at_t(Fraction(1, 2))
    for t in (Fraction(1, 4), Fraction(2, 5), Fraction(3, 4)):
        spec = fig8.longitude_spectrum(t)
        assert dict((v, m) for v, m in spec) == {2 * t: 3, 1 / (8 * t ** 3): 1}
    return "spectrum {2t x3, 1/(8t^3)}"


def _limit_shape():
    m, l = fig8.limit_elements()
    shape = cusplie.cusp_shape(m, l)
    assert abs(shape.raw_omega - complex(0, -2 * math.sqrt(3))) < 1e-12
    assert shape.inverted_generator and shape.omega.imag > 0
    return f"raw {shape.raw_omega:.6f}"


def _ball_oracle():
    ball = BallDomain()
    for r in (0.25, 0.5, 0.75):
        d = hilbert.hilbert_distance(ball, [0, 0, 0], [r, 0, 0])
        assert abs(d - 2 * math.atanh(r)) <= 1e-9
    q = hilbert.QuadratureSpec()
    dens = hilbert.busemann_density(ball, [0, 0, 0], q)
    assert abs(dens - 1.0) <= 1e-3, f"density at the centre came out {dens}"
    return f"density {dens:.6f}"


def _closed_norms():
    dp = DomainDPrime()
    for pt in ((2.0, 1.0, 0.0), (3.5, 2.0, 0.5), (1.5, 0.5, -0.4)):
        n = cuspvol.direction_norms(pt)
        for v, ref in ((np.eye(3)[1], n.norm_e2), (np.eye(3)[0], n.norm_e1), (np.eye(3)[2], n.norm_e3)):
            eng = hilbert.finsler_norm(dp, pt, v)
            assert abs(eng - ref) <= 1e-9 * max(1.0, ref)
    return "3 points x 3 axes"


def _finsler_derivative():
    dp = DomainDPrime()
    rng = np.random.default_rng(5)
    h = 1e-5
    for _ in range(5):
        x = np.array([rng.uniform(1.5, 4.0), rng.uniform(0.5, 2.0), rng.uniform(-0.5, 0.5)])
        v = rng.normal(size=3)
        norm = hilbert.finsler_norm(dp, x, v)
        fd = (hilbert.hilbert_distance(dp, x, x + h * v) + hilbert.hilbert_distance(dp, x, x - h * v)) / (2 * h)
        assert abs(fd - norm) <= 1e-6 * max(1.0, norm)
    return "5 random (x, v)"


def _normalization_roundtrip():
    rng = random.Random(2)
    for fam, expect in (("LPrime", 1), ("LPrimeMinus", -1)):
        for _ in range(3):
            G = None
            while G is None:
                cand = projlin.exact_matrix(
                    [[Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(4)] for _ in range(4)]
                )
                if projlin.mat_det(cand) != 0:
                    G = cand
            Gi = projlin.mat_inv(G)
            x1 = cusplie.alg_matrix(LieAlgElem(fam, (Fraction(2, 3), Fraction(1, 2))))
            x2 = cusplie.alg_matrix(LieAlgElem(fam, (0, 1)))
            res = cusplie.normalize_algebra_pair(G @ x1 @ Gi, G @ x2 @ Gi)
            assert res.sign == expect and res.residual == 0.0
    return "2 families x 3 conjugates"


def _fig8_normalization():
    rep = fig8.normalization_consistency(Fraction(1, 4))
    assert rep.sign == 1 and rep.meridian_class == "PureTranslation"
    assert rep.longitude_class == "PureDilation"
    assert abs(rep.dilation_f - math.log(16)) <= 1e-10
    return f"f = {rep.dilation_f:.12f}"


def _lattice_convergence():
    res = cusplie.convergence_conjugate(lambda u: (u, 0 * u), lambda u: (0 * u, u), Fraction(1, 4))
    assert [e.params for e in res.limit_elements] == [(1, 0), (0, 1)]
    try:
        cusplie.convergence_conjugate(lambda u: (u, 0 * u), lambda u: (2 * u, 0 * u), Fraction(1, 4))
    except cusplie.HypothesesError:
        return "limit exact; dependent path rejected"
    raise AssertionError("dependent derivative path was accepted")


def _domain_facts():
    rng = np.random.default_rng(9)
    dp = DomainDPrime()
    u = rng.uniform([0.2, -2], [4, 2], size=(1000, 2))
    w = rng.uniform([0.2, -2], [4, 2], size=(1000, 2))
    lam = rng.uniform(size=1000)
    mid = lam[:, None] * u + (1 - lam[:, None]) * w
    F = lambda b: 0.5 * b[:, 1] ** 2 - np.log(b[:, 0])
    assert np.all(F(mid) <= lam * F(u) + (1 - lam) * F(w) + 1e-12)
    # no complete affine line: one finite end on sampled chords
    for _ in range(100):
        x = np.array([rng.uniform(1, 3), rng.uniform(0.5, 2), rng.uniform(-1, 1)])
        v = rng.normal(size=3)
        tm, tp = dp.chord_taus(x, v[None, :])
        assert np.isfinite(tm[0]) or np.isfinite(tp[0])
    # boundary segment witness: rays [c u : u : 0 : 1] stay inside for u >= 1
    for c in (0.5, 1.0, 2.0):
        for u in (1.0, 10.0, 1e4, 1e8):
            assert dp.contains([c * u, u, 0.0])
    return "convexity, chords, witness rays"


def _displacement():
    prof = cuspvol.displacement_profile(math.log(16), 0.8, [1.0, 2.0, 4.0], ambient_level=0.5)
    assert all(b < a for a, b in zip(prof.displacements, prof.displacements[1:]))
    assert prof.constancy_spread <= 1e-9
    return f"spread {prof.constancy_spread:.2e}"


def _invariance():
    dp = DomainDPrime()
    rng = np.random.default_rng(3)
    t = 0.5
    dt = DomainDt(t)
    V = projlin.to_float(vt_map(t))
    for _ in range(5):
        x = np.array([rng.uniform(1.5, 3), rng.uniform(0.5, 2), rng.uniform(-0.7, 0.7)])
        y = np.array([rng.uniform(1.5, 3), rng.uniform(0.5, 2), rng.uniform(-0.7, 0.7)])
        d1 = hilbert.hilbert_distance(dp, x, y)
        d2 = hilbert.hilbert_distance(dt, projlin.apply_affine_batch(V, x[None])[0], projlin.apply_affine_batch(V, y[None])[0])
        assert abs(d1 - d2) <= 1e-9 * max(1.0, d1)
    g = projlin.to_float(cusplie.group_exp(LieAlgElem("LPrime", (0.4, -0.3))))
    x = np.array([2.0, 1.0, 0.2])
    y = np.array([2.5, 1.3, -0.1])
    gx = projlin.apply_affine_batch(g, x[None])[0]
    gy = projlin.apply_affine_batch(g, y[None])[0]
    assert abs(hilbert.hilbert_distance(dp, x, y) - hilbert.hilbert_distance(dp, gx, gy)) <= 1e-9
    return "coordinate change and group action"
