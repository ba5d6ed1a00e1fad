"""Projective linear algebra on small dense matrices in two scalar regimes.

Exact matrices carry ``fractions.Fraction`` entries inside object-dtype
numpy arrays, so +, -, *, / never round.  Float matrices are plain IEEE
float64 arrays and every comparison on them takes an explicit tolerance.
All functions are pure; nothing here mutates its arguments, so concurrent
use is safe.

Matrices are interchanged with other tools as JSON objects
``{"regime": "exact"|"float", "rows": [[..4 entries..] x4]}`` where exact
entries are strings ``"p/q"`` and float entries are numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class SingularMatrixError(ValueError):
    """Raised when an operation requires an invertible matrix."""


class IllConditionedError(ArithmeticError):
    """Raised when a float-regime rank decision is too close to call."""


class NonRealSpectrumError(ValueError):
    """Raised when a real spectrum is requested but complex eigenvalues exist."""


# ---------------------------------------------------------------------------
# construction and regime handling


def exact_matrix(rows):
    """Build an exact matrix from ints, Fractions or "p/q" strings.

    Floats are rejected: silently promoting a rounded value to an exact
    one would defeat the point of the exact regime.
    """
    out = np.empty((len(rows), len(rows[0])), dtype=object)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if isinstance(v, float):
                raise TypeError("float entry in exact matrix; use float_matrix")
            out[i, j] = Fraction(v)
    return out


def float_matrix(rows):
    return np.asarray(rows, dtype=float)


def as_matrix(rows, exact):
    return exact_matrix(rows) if exact else float_matrix(rows)


def is_exact(M) -> bool:
    return getattr(M, "dtype", None) == object


def to_float(M):
    """Cast either regime to float64."""
    if is_exact(M):
        return np.array([[float(v) for v in row] for row in M], dtype=float)
    return np.asarray(M, dtype=float)


def identity(n=4, exact=False):
    if not exact:
        return np.eye(n)
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = Fraction(i == j)
    return out


def zero_matrix(n=4, exact=False):
    if not exact:
        return np.zeros((n, n))
    out = np.empty((n, n), dtype=object)
    out[:] = Fraction(0)
    return out


# ---------------------------------------------------------------------------
# elementary linear algebra, generic over both regimes


def mat_det(M):
    """Determinant by Gaussian elimination with partial pivoting.

    Supports both regimes (exact result in the exact regime).
    """
    A = np.array(M, copy=True)
    n = A.shape[0]
    det = Fraction(1) if is_exact(A) else 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r, col]))
        if A[piv, col] == 0:
            return det * 0
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            det = -det
        det = det * A[col, col]
        inv = A[col, col]
        for r in range(col + 1, n):
            if A[r, col] != 0:
                factor = A[r, col] / inv
                A[r, col:] = A[r, col:] - factor * A[col, col:]
    return det


def mat_inv(M):
    """Inverse by Gauss-Jordan elimination; exact in the exact regime."""
    A = np.array(M, copy=True)
    n = A.shape[0]
    B = identity(n, exact=is_exact(A))
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r, col]))
        if A[piv, col] == 0:
            raise SingularMatrixError("matrix is singular")
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            B[[col, piv]] = B[[piv, col]]
        inv = A[col, col]
        A[col] = A[col] / inv
        B[col] = B[col] / inv
        for r in range(n):
            if r != col and A[r, col] != 0:
                f = A[r, col]
                A[r] = A[r] - f * A[col]
                B[r] = B[r] - f * B[col]
    return B


def mat_pow(M, k: int):
    if k < 0:
        return mat_pow(mat_inv(M), -k)
    out = identity(M.shape[0], exact=is_exact(M))
    P = M
    while k:
        if k & 1:
            out = out @ P
        k >>= 1
        if k:
            P = P @ P
    return out


def max_abs(M) -> float:
    return max(abs(v) for v in np.asarray(M).flat)


# ---------------------------------------------------------------------------
# projective points and maps


def canonical_point(v):
    """Scale a homogeneous coordinate vector so its last nonzero entry is 1."""
    v = np.array(v, copy=True)
    nz = [i for i in range(len(v)) if v[i] != 0]
    if not nz:
        raise ValueError("zero vector does not define a projective point")
    return v / v[nz[-1]]


def proj_point_equal(p, q, tol=1e-12) -> bool:
    a, b = canonical_point(p), canonical_point(q)
    if is_exact(np.asarray(a)) and is_exact(np.asarray(b)):
        return bool(all(x == y for x, y in zip(a, b)))
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return bool(np.max(np.abs(a - b)) <= tol * max(1.0, np.max(np.abs(b))))


def from_affine(p):
    """Affine point (x1,x2,x3) -> homogeneous [x1:x2:x3:1]."""
    p = list(p)
    one = Fraction(1) if any(isinstance(v, Fraction) for v in p) else 1.0
    out = np.empty(4, dtype=object if one == Fraction(1) else float)
    out[:3] = p
    out[3] = one
    return out


def to_affine(v):
    """Homogeneous 4-vector -> affine point; error on points at infinity."""
    if v[3] == 0:
        raise ValueError("point at infinity has no affine representative")
    return np.array([v[0] / v[3], v[1] / v[3], v[2] / v[3]])


def apply_affine(M, p):
    """Apply a projective map to an affine point of the chart x4 = 1."""
    v = M @ np.append(np.asarray(p, dtype=float), 1.0) if not is_exact(M) else M @ from_affine(p)
    return to_affine(v)


def apply_affine_batch(M, pts):
    """Vectorised float chart action on an (n,3) array of affine points."""
    Mf = to_float(M)
    pts = np.asarray(pts, dtype=float)
    hom = pts @ Mf[:3, :3].T + Mf[:3, 3]
    w = pts @ Mf[3, :3] + Mf[3, 3]
    return hom / w[:, None]


def proj_equal(A, B, tol=1e-12) -> bool:
    """Whether B = lambda*A for a nonzero scalar (projective equality).

    Exact regime: decided exactly.  Float regime: the scalar is taken from
    the ratio at A's largest-magnitude entry and the comparison is
    entrywise with relative tolerance ``tol``.  Singular input rejected.
    """
    if mat_det(A) == 0 or mat_det(B) == 0:
        raise SingularMatrixError("projective equality needs invertible matrices")
    n = A.shape[0]
    pos = max(((i, j) for i in range(n) for j in range(n)), key=lambda ij: abs(A[ij]))
    if is_exact(A) and is_exact(B):
        lam = B[pos] / A[pos]
        if lam == 0:
            return False
        return bool(all(B[i, j] == lam * A[i, j] for i in range(n) for j in range(n)))
    Af, Bf = to_float(A), to_float(B)
    lam = Bf[pos] / Af[pos]
    resid = np.max(np.abs(Bf - lam * Af))
    return bool(resid <= tol * max(1.0, np.max(np.abs(Bf))))


# ---------------------------------------------------------------------------
# polynomials (degree <= 4 throughout)


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial with ascending coefficient tuple (index = power)."""

    coeffs: tuple

    @classmethod
    def from_coeffs(cls, coeffs):
        cs = list(coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        return cls(tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def monic(self):
        lead = self.coeffs[-1]
        return Polynomial(tuple(c / lead for c in self.coeffs))

    def mul(self, other):
        out = [0] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial.from_coeffs(out)

    def deflate(self, root):
        """Divide by (t - root); the caller asserts root is a root."""
        cs = list(reversed(self.coeffs))
        out = [cs[0]]
        for c in cs[1:-1]:
            out.append(c + root * out[-1])
        return Polynomial.from_coeffs(list(reversed(out)))

    def eval_matrix(self, M):
        acc = zero_matrix(M.shape[0], exact=is_exact(M))
        I = identity(M.shape[0], exact=is_exact(M))
        for c in reversed(self.coeffs):
            acc = acc @ M + c * I
        return acc

    def approx_equal(self, other, tol=1e-9) -> bool:
        if self.degree != other.degree:
            return False
        a = np.array([float(c) for c in self.coeffs])
        b = np.array([float(c) for c in other.coeffs])
        return bool(np.max(np.abs(a - b)) <= tol * max(1.0, np.max(np.abs(b))))

    def __str__(self):
        terms = []
        for p in range(self.degree, -1, -1):
            c = self.coeffs[p]
            if c == 0:
                continue
            base = "1" if p == 0 else ("t" if p == 1 else f"t^{p}")
            if c == 1 and p > 0:
                terms.append(base)
            elif c == -1 and p > 0:
                terms.append(f"-{base}")
            else:
                terms.append(f"{c}" if p == 0 else f"{c}*{base}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


def poly_from_roots(roots, exact=True):
    p = Polynomial((Fraction(1),) if exact else (1.0,))
    for r in roots:
        p = p.mul(Polynomial((-r, Fraction(1) if exact else 1.0)))
    return p


def char_poly(M) -> Polynomial:
    """Characteristic polynomial by the trace recursion (both regimes).

    Returns the monic polynomial det(tI - M) with exact coefficients in
    the exact regime.
    """
    n = M.shape[0]
    exact = is_exact(M)
    one = Fraction(1) if exact else 1.0
    cs = []
    Mk = np.array(M, copy=True)
    I = identity(n, exact=exact)
    for k in range(1, n + 1):
        ck = sum(Mk[i, i] for i in range(n)) / k
        cs.append(ck)
        if k < n:
            Mk = M @ (Mk - ck * I)
    # det(tI - M) = t^n - c1 t^(n-1) - c2 t^(n-2) - ... - cn
    coeffs = [-c for c in reversed(cs)] + [one]
    return Polynomial.from_coeffs(coeffs)


# ---------------------------------------------------------------------------
# minimal polynomial via Krylov dependencies


def _vec(M):
    return np.asarray(M).reshape(-1)


def _solve_exact_dependency(cols, target):
    """Solve sum_i c_i cols[i] = target exactly; None when inconsistent."""
    m = len(target)
    k = len(cols)
    aug = [[cols[j][i] for j in range(k)] + [target[i]] for i in range(m)]
    pivots = []
    row = 0
    for col in range(k):
        piv = next((r for r in range(row, m) if aug[r][col] != 0), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = aug[row][col]
        aug[row] = [v / inv for v in aug[row]]
        for r in range(m):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
    # inconsistent iff a zero row has nonzero last column
    for r in range(row, m):
        if not any(aug[r][c] != 0 for c in range(k)) and aug[r][k] != 0:
            return None
    sol = [Fraction(0)] * k
    for r, col in enumerate(pivots):
        sol[col] = aug[r][k]
    # verify (guards the free-variable case)
    for i in range(m):
        if sum(sol[j] * cols[j][i] for j in range(k)) != target[i]:
            return None
    return sol


def minimal_polynomial(M, tol=1e-9) -> Polynomial:
    """Monic generator of the annihilating ideal of a 4x4 matrix.

    Exact regime: successive Krylov dependencies decided by exact
    elimination.  Float regime: the dependency decision uses the smallest
    relative singular value of the stacked, column-normalised power
    vectors; a decision inside the band [tol, 1000*tol) raises
    IllConditionedError.
    """
    n = M.shape[0]
    exact = is_exact(M)
    powers = [identity(n, exact=exact)]
    for _ in range(n):
        powers.append(powers[-1] @ M)
    vecs = [_vec(P) for P in powers]
    if exact:
        for d in range(1, n + 1):
            sol = _solve_exact_dependency(vecs[:d], vecs[d])
            if sol is not None:
                coeffs = [-c for c in sol] + [Fraction(1)]
                return Polynomial.from_coeffs(coeffs)
        raise AssertionError("Cayley-Hamilton violated")
    scales = []
    fvecs = []
    mscale = max(1.0, float(np.max(np.abs(np.asarray(vecs[1], dtype=float)))))
    for v in vecs:
        v = np.asarray(v, dtype=float)
        s = np.linalg.norm(v)
        scales.append(s if s > 0 else 1.0)
        fvecs.append(v / (s if s > 0 else 1.0))
    for d in range(1, n + 1):
        # an (almost) exactly vanishing power means m(t) = t^d
        if np.linalg.norm(np.asarray(vecs[d], dtype=float)) <= 1e-12 * mscale ** d:
            return Polynomial.from_coeffs([0.0] * d + [1.0])
        stack = np.stack(fvecs[: d + 1], axis=1)
        sv = np.linalg.svd(stack, compute_uv=False)
        ratio = sv[-1] / sv[0]
        if ratio <= tol:
            A = np.stack(fvecs[:d], axis=1)
            b = fvecs[d]
            c, *_ = np.linalg.lstsq(A, b, rcond=None)
            coeffs = [-c[i] * scales[d] / scales[i] for i in range(d)] + [1.0]
            return Polynomial.from_coeffs(coeffs)
        if ratio < 1e3 * tol:
            raise IllConditionedError(
                f"Krylov rank decision ambiguous (relative gap {ratio:.3e})"
            )
    raise AssertionError("Cayley-Hamilton violated")


# ---------------------------------------------------------------------------
# matrix exponential and logarithm


def is_nilpotent(M) -> bool:
    """Exact nilpotency test (M^n == 0); supports both regimes."""
    P = mat_pow(M, M.shape[0])
    return all(v == 0 for v in P.flat)


def mat_exp(M):
    """Matrix exponential.

    Nilpotent exact input: finite Taylor series, exact result.  Anything
    else: scaling and squaring with a degree-20 Taylor core, which keeps
    the series remainder below 1e-14 relative; returns float64.
    """
    n = M.shape[0]
    if is_exact(M):
        if is_nilpotent(M):
            acc = identity(n, exact=True)
            term = identity(n, exact=True)
            for k in range(1, n):
                term = term @ M / k
                acc = acc + term
            return acc
        M = to_float(M)
    Mf = np.asarray(M, dtype=float)
    norm = np.max(np.sum(np.abs(Mf), axis=1))
    s = max(0, int(math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0)
    A = Mf / (2.0 ** s)
    acc = np.eye(n)
    for k in range(20, 0, -1):
        acc = A @ acc / k + np.eye(n)
    for _ in range(s):
        acc = acc @ acc
    return acc


def unipotent_log(M):
    """Exact logarithm of a unipotent matrix (finite series in M - I)."""
    n = M.shape[0]
    N = M - identity(n, exact=is_exact(M))
    if not is_nilpotent(N):
        raise ValueError("matrix is not unipotent")
    acc = zero_matrix(n, exact=is_exact(M))
    P = identity(n, exact=is_exact(M))
    for k in range(1, n):
        P = P @ N
        acc = acc + P * (Fraction((-1) ** (k + 1), k) if is_exact(M) else (-1.0) ** (k + 1) / k)
    return acc


def _shift_poly(coeffs, a):
    """Rewrite sum c_k t^k as a polynomial in z = t - a (Taylor shift)."""
    out = list(coeffs)
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] += a * out[j + 1]
    return out


def _series_inverse(coeffs, order):
    """Power-series inverse of sum c_k z^k (c_0 != 0) through z^(order-1)."""
    inv = [1.0 / coeffs[0]]
    for k in range(1, order):
        s = 0.0
        for j in range(1, k + 1):
            cj = coeffs[j] if j < len(coeffs) else 0.0
            s += cj * inv[k - j]
        inv.append(-s / coeffs[0])
    return inv


def spectral_projectors(M, spectrum=None, tol=1e-9):
    """Projectors onto generalized eigenspaces for a real-split matrix.

    Returns ``[(lam, mult, P)]``; works in float64.  Uses the polynomial
    interpolation that is congruent to 1 modulo (t-lam)^mult and to 0
    modulo the other factors.
    """
    Mf = to_float(M)
    if spectrum is None:
        spectrum = real_spectrum(M, tol=tol)
    spec = [(float(l), m) for l, m in spectrum]
    out = []
    for lam, mult in spec:
        rest = [1.0]
        for mu, mmu in spec:
            if mu == lam:
                continue
            f = Polynomial.from_coeffs(rest)
            for _ in range(mmu):
                f = f.mul(Polynomial((-mu, 1.0)))
            rest = list(f.coeffs)
        # invert the cofactor modulo (t - lam)^mult
        shifted = _shift_poly([float(c) for c in rest], lam)
        inv = _series_inverse(shifted, mult)
        u_poly = Polynomial.from_coeffs(_shift_back(inv, lam))
        g = Polynomial.from_coeffs(rest).mul(u_poly)
        P = g.eval_matrix(Mf)
        out.append((lam, mult, P))
    return out


def _shift_back(coeffs_in_z, a):
    """Polynomial in z = t - a -> coefficients in t."""
    out = list(coeffs_in_z)
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] += (-a) * out[j + 1]
    return out


def mat_log(M, tol=1e-9):
    """Principal logarithm of a matrix with positive real spectrum (float64).

    Splits along spectral projectors and takes the finite nilpotent
    series on each block; eigenvalue logs are the only transcendental
    ingredients.
    """
    Mf = to_float(M)
    spectrum = real_spectrum(M, tol=tol)
    if any(float(l) <= 0 for l, _ in spectrum):
        raise ValueError("matrix log requires positive real eigenvalues")
    n = Mf.shape[0]
    out = np.zeros((n, n))
    for lam, mult, P in spectral_projectors(Mf, spectrum=spectrum, tol=tol):
        N = (Mf - lam * np.eye(n)) @ P / lam
        out += math.log(lam) * P
        term = P.copy()
        for k in range(1, mult):
            term = term @ N
            out += ((-1.0) ** (k + 1) / k) * term
    return out


# ---------------------------------------------------------------------------
# real spectra


class _RootSearchOverflow(ArithmeticError):
    """Internal: rational root enumeration would be astronomically large."""


def _rational_roots(poly: Polynomial):
    """Rational roots (with multiplicity) of an exact polynomial."""
    p = poly
    roots = []
    # strip t^k
    while p.coeffs[0] == 0 and p.degree > 0:
        roots.append(Fraction(0))
        p = Polynomial.from_coeffs(p.coeffs[1:])
    if p.degree == 0:
        return roots, p
    denlcm = 1
    for c in p.coeffs:
        denlcm = denlcm * c.denominator // math.gcd(denlcm, c.denominator)
    ints = [int(c * denlcm) for c in p.coeffs]
    lead, trail = ints[-1], ints[0]

    def divisors(v):
        v = abs(v)
        if v > 10 ** 16:
            raise _RootSearchOverflow(f"coefficient {v} too large for divisor search")
        out = set()
        d = 1
        while d * d <= v:
            if v % d == 0:
                out.add(d)
                out.add(v // d)
            d += 1
        return sorted(out)

    cands = sorted(
        {Fraction(s * pnum, q) for pnum in divisors(trail) for q in divisors(lead) for s in (1, -1)},
        key=lambda f: (abs(f), f),
    )
    progress = True
    while progress and p.degree > 0:
        progress = False
        for r in cands:
            if p(r) == 0:
                roots.append(r)
                p = p.deflate(r)
                progress = True
                break
    return roots, p


def real_spectrum(M, tol=1e-9):
    """Eigenvalues with algebraic multiplicities, sorted ascending.

    Exact regime: the characteristic polynomial is factored over the
    rationals; an irreducible quadratic remainder is solved exactly when
    its discriminant is nonnegative (roots returned as floats).  Float
    regime: numpy eigenvalues, clustered at relative tolerance ``tol``.
    Complex eigenvalues raise NonRealSpectrumError.
    """
    n = M.shape[0]
    if is_exact(M):
        p = char_poly(M)
        try:
            roots, rem = _rational_roots(p)
        except _RootSearchOverflow:
            # coefficients too large to enumerate divisors; degrade to the
            # float eigenvalue path
            return real_spectrum(to_float(M), tol=tol)
        values = list(roots)
        if rem.degree == 2:
            c0, c1, c2 = rem.coeffs
            disc = c1 * c1 - 4 * c2 * c0
            if disc < 0:
                raise NonRealSpectrumError("characteristic polynomial has complex roots")
            sq = math.sqrt(float(disc))
            values += [(-float(c1) - sq) / (2 * float(c2)), (-float(c1) + sq) / (2 * float(c2))]
        elif rem.degree > 0:
            rr = np.roots([float(c) for c in reversed(rem.coeffs)])
            scale = max(1.0, np.max(np.abs(rr)))
            if np.max(np.abs(rr.imag)) > tol * scale:
                raise NonRealSpectrumError("characteristic polynomial has complex roots")
            values += sorted(rr.real.tolist())
        out = []
        for v in sorted(values, key=float):
            if out and v == out[-1][0]:
                out[-1][1] += 1
            else:
                out.append([v, 1])
        return [(v, m) for v, m in out]
    eig = np.linalg.eigvals(np.asarray(M, dtype=float))
    scale = max(1.0, float(np.max(np.abs(eig))))
    # defective eigenvalues split into complex clusters of radius about
    # eps^(1/k); cluster first, then require the cluster means to be real
    ctol = max(tol, 3e-4) * scale
    order = np.argsort(eig.real + 1e-12 * eig.imag)
    clusters = []
    for v in eig[order]:
        if clusters and abs(v - np.mean(clusters[-1])) <= ctol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    out = []
    for c in clusters:
        mean = complex(np.mean(c))
        if abs(mean.imag) > ctol:
            raise NonRealSpectrumError("matrix has complex eigenvalues")
        out.append((float(mean.real), len(c)))
    return out


def is_proj_unipotent(M, tol=1e-9) -> bool:
    """Whether all eigenvalues coincide after projective rescaling.

    Exact regime: tests char(t) == (t - tr/4)^4 exactly.
    """
    n = M.shape[0]
    if is_exact(M):
        lam = sum(M[i, i] for i in range(n)) / n
        return char_poly(M).coeffs == poly_from_roots([lam] * n).coeffs
    spec = real_spectrum(M, tol=tol)
    return len(spec) == 1


# ---------------------------------------------------------------------------
# JSON wire format


def matrix_to_json(M) -> dict:
    if is_exact(M):
        rows = [[f"{v.numerator}/{v.denominator}" for v in row] for row in M]
        return {"regime": "exact", "rows": rows}
    return {"regime": "float", "rows": [[float(v) for v in row] for row in np.asarray(M)]}


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    regime = obj["regime"]
    rows = obj["rows"]
    if regime == "exact":
        return exact_matrix([[Fraction(v) for v in row] for row in rows])
    if regime == "float":
        return float_matrix(rows)
    raise ValueError(f"unknown matrix regime {regime!r}")
