import random
from fractions import Fraction

import numpy as np
import pytest

from convexcusp import fig8, projlin as pl
from convexcusp.cusplie import LieAlgElem, alg_matrix, group_exp


def lprime(a, b):
    return alg_matrix(LieAlgElem("LPrime", (a, b)))


def rand_rational_matrix(rng, invertible=True):
    while True:
        M = pl.exact_matrix(
            [[Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(4)] for _ in range(4)]
        )
        if not invertible or pl.mat_det(M) != 0:
            return M


# ---------------------------------------------------------------------------
# projective equality


def test_proj_equal_scalar_multiple():
    A = pl.float_matrix([[1, 2, 0, 0], [0, 1, 1, 0], [2, 0, 1, 0], [0, 0, 0, 3]])
    assert pl.proj_equal(A, 3 * A)


def test_proj_equal_identity():
    assert pl.proj_equal(pl.identity(4, exact=True), pl.identity(4, exact=True))


def test_proj_equal_distinct_generators():
    M, N = fig8.generators(Fraction(1, 2))
    assert not pl.proj_equal(M, N)


def test_proj_equal_rejects_singular():
    S = pl.float_matrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]])
    with pytest.raises(pl.SingularMatrixError):
        pl.proj_equal(S, np.eye(4))


def test_proj_equal_is_equivalence_relation():
    rng = random.Random(0)
    mats = [rand_rational_matrix(rng) for _ in range(6)]
    mats += [Fraction(3, 2) * mats[0], Fraction(-2) * mats[1]]
    for A in mats:
        assert pl.proj_equal(A, A)
        for B in mats:
            assert pl.proj_equal(A, B) == pl.proj_equal(B, A)
            for C in mats:
                if pl.proj_equal(A, B) and pl.proj_equal(B, C):
                    assert pl.proj_equal(A, C)


# ---------------------------------------------------------------------------
# minimal polynomials


def test_minpoly_generic_element():
    m = pl.minimal_polynomial(lprime(1, 1))
    # t^3 (t - 1)
    assert m.coeffs == (Fraction(0), Fraction(0), Fraction(0), Fraction(-1), Fraction(1))


def test_minpoly_identity():
    m = pl.minimal_polynomial(pl.identity(4, exact=True))
    assert m.coeffs == (Fraction(-1), Fraction(1))


def test_minpoly_kernel_element_nilpotency_oracle():
    x = lprime(0, 2)
    # direct nilpotency: x^2 != 0 while x^3 == 0
    x2 = x @ x
    x3 = x2 @ x
    assert any(v != 0 for v in x2.flat)
    assert all(v == 0 for v in x3.flat)
    assert pl.minimal_polynomial(x).coeffs == (Fraction(0), Fraction(0), Fraction(0), Fraction(1))


def test_minpoly_conjugation_invariance():
    rng = random.Random(1)
    base = lprime(Fraction(1, 2), Fraction(2, 3))
    m0 = pl.minimal_polynomial(base)
    for _ in range(50):
        C = rand_rational_matrix(rng)
        conj = C @ base @ pl.mat_inv(C)
        assert pl.minimal_polynomial(conj).coeffs == m0.coeffs


def test_minpoly_float_agrees_with_exact():
    x = lprime(Fraction(1, 2), Fraction(1, 3))
    m_exact = pl.minimal_polynomial(x)
    m_float = pl.minimal_polynomial(pl.to_float(x))
    assert m_float.approx_equal(
        pl.Polynomial(tuple(float(c) for c in m_exact.coeffs)), tol=1e-9
    )


def test_minpoly_float_ill_conditioned_refused():
    M = np.eye(4)
    M[0, 1] = 3e-8
    with pytest.raises(pl.IllConditionedError):
        pl.minimal_polynomial(M)


# ---------------------------------------------------------------------------
# matrix exponential


def test_exp_zero_matrix():
    E = pl.mat_exp(pl.zero_matrix(4, exact=True))
    assert all(E[i, j] == (1 if i == j else 0) for i in range(4) for j in range(4))


def test_exp_parabolic_element():
    x = alg_matrix(LieAlgElem("L0", (1, 0)))
    E = pl.mat_exp(x)
    assert E[0, 1] == 1 and E[0, 3] == Fraction(1, 2) and E[1, 3] == 1


def test_exp_translation_element():
    b = Fraction(3)
    E = pl.mat_exp(lprime(0, b))
    assert E[0, 2] == b and E[0, 3] == b * b / 2 and E[2, 3] == b


def test_exp_nilpotent_series_matches_scaling_squaring():
    rng = random.Random(2)
    for _ in range(10):
        r = Fraction(rng.randint(-3, 3), rng.randint(1, 4))
        s = Fraction(rng.randint(-3, 3), rng.randint(1, 4))
        x = alg_matrix(LieAlgElem("L0", (r, s)))
        exact = pl.to_float(pl.mat_exp(x))
        numeric = pl.mat_exp(pl.to_float(x))
        scale = max(1.0, np.max(np.abs(exact)))
        assert np.max(np.abs(exact - numeric)) <= 1e-13 * scale


# ---------------------------------------------------------------------------
# spectra


def test_spectrum_identity():
    assert pl.real_spectrum(pl.identity(4, exact=True)) == [(1, 4)]


def test_spectrum_longitude_quarter():
    L = fig8.longitude(Fraction(1, 4))
    # oracle: the exact characteristic polynomial factors as (t-1/2)^3 (t-8)
    expected = pl.poly_from_roots([Fraction(1, 2)] * 3 + [Fraction(8)])
    assert pl.char_poly(L).coeffs == expected.coeffs
    assert pl.real_spectrum(L) == [(Fraction(1, 2), 3), (Fraction(8), 1)]


def test_spectrum_longitude_half_unipotent():
    L = fig8.longitude(Fraction(1, 2))
    assert pl.real_spectrum(L) == [(1, 4)]


def test_spectrum_rejects_complex():
    R = pl.float_matrix([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 2]])
    with pytest.raises(pl.NonRealSpectrumError):
        pl.real_spectrum(R)
    Re = pl.exact_matrix([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 2]])
    with pytest.raises(pl.NonRealSpectrumError):
        pl.real_spectrum(Re)


def test_spectrum_of_exponential_matches_exp_of_spectrum():
    for fam, params, t in (
        ("LPrime", (Fraction(1, 2), Fraction(1, 3)), None),
        ("Lt", (Fraction(2, 3), Fraction(1, 5)), Fraction(1, 2)),
        ("L0", (Fraction(1, 4), Fraction(3, 5)), None),
    ):
        x = alg_matrix(LieAlgElem(fam, params, t=t))
        spec_x = pl.real_spectrum(x)
        spec_e = pl.real_spectrum(pl.mat_exp(pl.to_float(x)))
        assert len(spec_x) == len(spec_e)
        for (lx, mx), (le, me) in zip(spec_x, spec_e):
            assert mx == me
            assert abs(np.exp(float(lx)) - le) <= 1e-9 * max(1.0, abs(le))


# ---------------------------------------------------------------------------
# logs, points, wire format


def test_mat_log_round_trip():
    g = pl.to_float(group_exp(LieAlgElem("LPrime", (0.7, 0.4))))
    L = pl.mat_log(g)
    assert np.max(np.abs(pl.mat_exp(L) - g)) <= 1e-12


def test_unipotent_log_exact():
    g = group_exp(LieAlgElem("L0", (Fraction(1, 2), Fraction(1, 3))))
    x = pl.unipotent_log(g)
    assert all(v == w for v, w in zip(x.flat, alg_matrix(LieAlgElem("L0", (Fraction(1, 2), Fraction(1, 3)))).flat))


def test_canonical_point():
    p = pl.canonical_point(np.array([2.0, 4.0, 0.0, 0.0]))
    assert np.allclose(p, [0.5, 1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        pl.canonical_point(np.zeros(4))


def test_matrix_json_round_trip():
    M = pl.exact_matrix([[Fraction(1, 2), 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    obj = pl.matrix_to_json(M)
    assert obj["regime"] == "exact" and obj["rows"][0][0] == "1/2"
    back = pl.matrix_from_json(obj)
    assert all(v == w for v, w in zip(M.flat, back.flat))
    Mf = pl.to_float(M)
    objf = pl.matrix_to_json(Mf)
    assert objf["regime"] == "float"
    assert np.allclose(pl.matrix_from_json(objf), Mf)
