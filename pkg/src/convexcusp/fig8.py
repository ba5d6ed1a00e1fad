"""The explicit figure-eight knot holonomy family.

The two-generator presentation < m, n | m w = w n > with
w = n m^-1 n^-1 m is represented by an explicit one-parameter family of
unipotent matrix pairs; the longitude is the word w w_reversed.  All
word arithmetic is exact for rational parameters.  The coordinate
change s = log(1/(16 t^4)) places the hyperbolic point at s = 0, and
the peripheral pair admits closed normalized forms converging to an
explicit pair of parabolic translations.

A closed-form table for the longitude matrix circulates with one
ambiguous entry; the group word is authoritative here and
``longitude_display_report`` compares the two entrywise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import cusplie, projlin
from .cusplie import HypothesesError, LieAlgElem
from .projlin import is_exact, mat_inv, real_spectrum, to_float


def _coerce_t(t):
    if isinstance(t, (int, Fraction)):
        if t == 0:
            raise ValueError("family parameter t must be nonzero")
        return Fraction(t)
    t = float(t)
    if t == 0:
        raise ValueError("family parameter t must be nonzero")
    return t


@dataclass(frozen=True)
class HolonomyParams:
    """Family parameter t > 0 with its derived coordinate s.

    s(1/2) = 0 and t(s) = (1/2) exp(-s/4) inverts the map on t > 0.
    """

    t: object

    def __post_init__(self):
        if float(self.t) <= 0:
            raise ValueError("holonomy parameter must be positive")

    @property
    def s(self) -> float:
        return s_of_t(self.t)


@dataclass(frozen=True)
class PeripheralPair:
    """Commuting meridian and longitude matrices with their regime tag."""

    meridian: object
    longitude: object
    exact: bool

    def __post_init__(self):
        if not projlin.proj_equal(
            self.meridian @ self.longitude, self.longitude @ self.meridian, tol=1e-9
        ):
            raise ValueError("peripheral matrices do not commute projectively")


def generators(t):
    """The unipotent generator pair (meridian image, companion image).

    Exact rational matrices for rational t.
    """
    t = _coerce_t(t)
    if isinstance(t, Fraction):
        one, zero = Fraction(1), Fraction(0)
    else:
        one, zero = 1.0, 0.0
    M = [
        [one, zero, one, t - 1],
        [zero, one, one, t],
        [zero, zero, one, t + one / 2],
        [zero, zero, zero, one],
    ]
    N = [
        [one, zero, zero, zero],
        [2 + 1 / t, one, zero, zero],
        [2 * one, one, one, zero],
        [one, one, zero, one],
    ]
    if isinstance(t, Fraction):
        return projlin.exact_matrix(M), projlin.exact_matrix(N)
    return projlin.float_matrix(M), projlin.float_matrix(N)


def relation_residual(t):
    """Residual matrix of the group relation m w = w n, w = n m^-1 n^-1 m.

    The projective scale is fixed from the largest entries; with exact
    rational t the residual is exactly zero.
    """
    M, N = generators(t)
    Mi, Ni = mat_inv(M), mat_inv(N)
    W = N @ Mi @ Ni @ M
    lhs = M @ W
    rhs = W @ N
    pos = max(
        ((i, j) for i in range(4) for j in range(4)), key=lambda ij: abs(to_float(rhs)[ij])
    )
    lam = lhs[pos] / rhs[pos]
    return lhs - lam * rhs


def longitude(t):
    """The longitude word n m^-1 n^-1 m^2 n^-1 m^-1 n, evaluated exactly
    for rational t; commutes projectively with the meridian."""
    M, N = generators(t)
    Mi, Ni = mat_inv(M), mat_inv(N)
    return N @ Mi @ Ni @ M @ M @ Ni @ Mi @ N


def longitude_spectrum(t):
    """Eigenvalues with multiplicities of the longitude (exact for
    rational t); {2t x3, 1/(8 t^3)} away from the unipotent point."""
    return real_spectrum(longitude(t))


def peripheral_pair(t) -> PeripheralPair:
    """The commuting meridian/longitude pair at parameter t."""
    t = _coerce_t(t)
    M, _ = generators(t)
    return PeripheralPair(M, longitude(t), exact=isinstance(t, Fraction))


def displayed_longitude(t, stray_reading="t"):
    """The closed-form longitude table.

    One entry of the table contains a stray symbol; ``stray_reading``
    selects how to read it ("t" or "2t").  Evaluating the group word
    shows "t" is the reading that reproduces it.
    """
    t = _coerce_t(t)
    stray = {"t": t, "2t": 2 * t}[stray_reading]
    rows = [
        [
            (8 * t ** 3 - 4 * t ** 2 - 2 * t - 1) / (8 * t ** 2),
            (8 * t ** 3 + 4 * t ** 2 + 2 * stray + 1) / (8 * t ** 2),
            (-4 * t ** 2 - 1) / (4 * t ** 2),
            (40 * t ** 3 + 24 * t ** 2 + 4 * t + 3) / (8 * t ** 2),
        ],
        [
            (8 * t ** 4 - 4 * t ** 3 - 2 * t ** 2 - t - 1) / (8 * t ** 3),
            (8 * t ** 4 + 4 * t ** 3 + 2 * t ** 2 + t + 1) / (8 * t ** 3),
            (4 * t ** 3 - 4 * t ** 2 + t - 1) / (4 * t ** 3),
            (56 * t ** 4 + 16 * t ** 3 + 20 * t ** 2 + t + 3) / (8 * t ** 3),
        ],
        [0 * t, 0 * t, 2 * t, 0 * t],
        [0 * t, 0 * t, 0 * t, 2 * t],
    ]
    if isinstance(t, Fraction):
        return projlin.exact_matrix(rows)
    return projlin.float_matrix(rows)


def longitude_display_report(t, stray_reading="t") -> dict:
    """Entrywise comparison of the word longitude against the closed-form
    table under the chosen stray-symbol reading; {(i, j): bool}."""
    t = _coerce_t(t)
    word = longitude(t)
    disp = displayed_longitude(t, stray_reading=stray_reading)
    report = {}
    for i in range(4):
        for j in range(4):
            if isinstance(t, Fraction):
                report[(i, j)] = word[i, j] == disp[i, j]
            else:
                report[(i, j)] = abs(word[i, j] - disp[i, j]) <= 1e-12 * max(1.0, abs(disp[i, j]))
    return report


def s_of_t(t) -> float:
    """Coordinate change s = log(1 / (16 t^4)); s decreases in t."""
    t = _coerce_t(t)
    if float(t) <= 0:
        raise ValueError("s is defined for t > 0")
    return -math.log(16.0 * float(t) ** 4)


def t_of_s(s) -> float:
    """Inverse coordinate change t = (1/2) exp(-s/4)."""
    return 0.5 * math.exp(-float(s) / 4.0)


def _sinh_ratio(s: float) -> float:
    """sinh(s/4) / (3 s), continued through s = 0 by its even series."""
    if abs(s) < 1e-4:
        x = s / 4.0
        return (1.0 + x * x / 6.0 + x ** 4 / 120.0) / 12.0
    return math.sinh(s / 4.0) / (3.0 * s)


def meridian_translation(s) -> float:
    """Positive translation parameter sqrt(sinh(s/4) / (3 s)) of the
    normalized meridian; tends to 1/(2 sqrt(3)) at the hyperbolic point."""
    return math.sqrt(_sinh_ratio(float(s)))


def normalized_peripheral(s):
    """Closed normalized forms of the peripheral pair at parameter s != 0.

    Both matrices lie in the deformed cusp group with family parameter s
    (their logs have parameters (0, meridian_translation(s)) and (1, 0))
    and they commute.
    """
    s = float(s)
    if s == 0:
        raise ValueError("normalized pair is defined for s != 0; use limit_pair at 0")
    m = meridian_translation(s)
    M = projlin.float_matrix(
        [
            [1.0, 0.0, m, m * m / 2.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, m],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    es = math.exp(s)
    g1 = (es - 1.0) / s
    g2 = (es - s - 1.0) / (s * s)
    L = projlin.float_matrix(
        [
            [1.0, g1, 0.0, g2],
            [0.0, es, 0.0, g1],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return M, L


def limit_pair():
    """Limit of the normalized peripheral pair at the hyperbolic point:
    parabolic translations with parameters (0, 1/(2 sqrt 3)) and (1, 0)."""
    m = 1.0 / (2.0 * math.sqrt(3.0))
    M0 = cusplie.group_exp(LieAlgElem("L0", (0.0, m)))
    L0 = cusplie.group_exp(LieAlgElem("L0", (1.0, 0.0)))
    return to_float(M0), to_float(L0)


def limit_elements():
    m = 1.0 / (2.0 * math.sqrt(3.0))
    return LieAlgElem("L0", (0.0, m)), LieAlgElem("L0", (1.0, 0.0))


def strict_convexity_obstruction(s) -> bool:
    """True when the structure cannot be strictly convex: the longitude
    has two distinct positive eigenvalues after projective scaling.

    Decided exactly for the rational parameter t(s) (binary floats are
    rational), via the polynomial identity behind projective unipotency,
    so the answer flips exactly at s = 0.
    """
    t = Fraction(t_of_s(s))
    return not projlin.is_proj_unipotent(longitude(t))


def obstruction_at_t(t) -> bool:
    """Same test parameterized by rational t directly (exact)."""
    return not projlin.is_proj_unipotent(longitude(_coerce_t(t)))


@dataclass(frozen=True)
class NormalizationReport:
    t: object
    s: float
    sign: int
    degenerate: bool
    meridian_class: str | None
    longitude_class: str | None
    dilation_f: float | None
    meridian_b: float | None
    residual: float | None

    def to_json(self) -> dict:
        return {
            "t": str(self.t),
            "s": self.s,
            "sign": self.sign,
            "degenerate": self.degenerate,
            "meridian": {"class": self.meridian_class, "b": self.meridian_b},
            "longitude": {"class": self.longitude_class, "f_value": self.dilation_f},
            "residual": self.residual,
        }


def normalization_consistency(t) -> NormalizationReport:
    """Run the pair normalization on (meridian, longitude / (2t)).

    Away from the unipotent point the pair lands in the convex-orbit
    family (sign +1), the longitude image is a pure dilation whose
    eigenvalue functional equals s(t), and the meridian image is a pure
    translation.  At t = 1/2 the pair is entirely unipotent and the
    degenerate branch is reported instead of an error.
    """
    t = _coerce_t(t)
    s = s_of_t(t)
    M, _ = generators(t)
    L = longitude(t)
    L_scaled = L / (2 * t)
    try:
        res = cusplie.normalize_pair(to_float(M), to_float(L_scaled))
    except HypothesesError:
        if t == Fraction(1, 2):
            return NormalizationReport(t, s, 0, True, None, None, None, None, None)
        raise
    mer_img, lon_img = (np.asarray(img, dtype=float) for img in res.images)
    mer_prof = cusplie.minpoly_profile(mer_img, tol=1e-7)
    lon_prof = cusplie.minpoly_profile(lon_img, tol=1e-7)
    return NormalizationReport(
        t,
        s,
        res.sign,
        False,
        cusplie.classify_profile(mer_prof),
        cusplie.classify_profile(lon_prof),
        float(lon_img[1, 1]),
        float(mer_img[0, 2]),
        res.residual,
    )


def verify_report(t) -> dict:
    """The per-parameter verification record used by the command line."""
    t = _coerce_t(t)
    HolonomyParams(t)  # validates t > 0
    pair = peripheral_pair(t)
    resid = relation_residual(t)
    exact = is_exact(resid)
    resid_max = projlin.max_abs(to_float(resid))
    spec = real_spectrum(pair.longitude)
    report = normalization_consistency(t)
    return {
        "t": str(t) if exact else float(t),
        "s": s_of_t(t),
        "relation_exact": bool(exact and resid_max == 0.0),
        "relation_residual": float(resid_max),
        "longitude_spectrum": [[float(l), m] for l, m in spec],
        "obstruction": obstruction_at_t(t) if exact else strict_convexity_obstruction(s_of_t(t)),
        "normalized_params": report.to_json(),
    }


def sweep_rows(t_min: float, t_max: float, steps: int):
    """Spectra and cusp-shape convergence along a parameter sweep.

    shape_im is the imaginary part of the cusp modulus computed from the
    normalized translation parameters; it tends to -2 sqrt(3).
    """
    rows = []
    for t in np.linspace(t_min, t_max, steps):
        t = float(t)
        s = s_of_t(t)
        m = meridian_translation(s)
        M0, L0 = limit_pair()
        if s == 0:
            mdev, ldev = 0.0, 0.0
        else:
            Ms, Ls = normalized_peripheral(s)
            mdev = float(np.max(np.abs(Ms - M0)))
            ldev = float(np.max(np.abs(Ls - L0)))
        rows.append(
            {
                "t": t,
                "s": s,
                "eig_triple": 2 * t,
                "eig_single": 1.0 / (8 * t ** 3),
                "obstructed": t != 0.5,
                "meridian_dev": mdev,
                "longitude_dev": ldev,
                "shape_im": -1.0 / m,
            }
        )
    return rows
