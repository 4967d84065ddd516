"""Small dense linear algebra over both numeric backends.

Float matrices are plain ``float64`` numpy arrays.  Exact matrices are
``object`` numpy arrays whose entries are :class:`~kusuoka.exactnum.Radical`;
the usual ``@``, ``+``, ``.T`` and ``np.trace`` then dispatch through the
scalar operators, so most callers never branch on the backend.

The exact eigen machinery works through characteristic polynomials:
Faddeev-LeVerrier for the coefficients, rational root reconstruction
(float approximation, continued-fraction rounding, exact verification,
exact deflation) for certified eigenvalues, and the quadratic formula
for what remains.  This is enough to certify spectral radii of the
small operator representations this package produces.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .exactnum import Radical

EXACT = "exact"
FLOAT = "float"

__all__ = [
    "EXACT",
    "FLOAT",
    "as_matrix",
    "identity",
    "zeros",
    "to_float_matrix",
    "frobenius_sq",
    "char_poly",
    "poly_eval",
    "rational_roots",
    "certified_spectral_radius",
    "exact_eigenvalues_symmetric",
    "nullspace_exact",
    "solve_exact",
    "det_exact",
    "leading_minors",
    "cholesky_exact",
]


def _lift_entry(x) -> Radical:
    if isinstance(x, Radical):
        return x
    return Radical(x)


def as_matrix(rows, backend: str) -> np.ndarray:
    """Build a matrix for the given backend, coercing entries."""
    if backend == FLOAT:
        return np.array(rows, dtype=float)
    arr = np.empty((len(rows), len(rows[0])), dtype=object)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            arr[i, j] = _lift_entry(x)
    return arr


def as_vector(entries, backend: str) -> np.ndarray:
    if backend == FLOAT:
        return np.array(entries, dtype=float)
    arr = np.empty(len(entries), dtype=object)
    for i, x in enumerate(entries):
        arr[i] = _lift_entry(x)
    return arr


def identity(d: int, backend: str) -> np.ndarray:
    if backend == FLOAT:
        return np.eye(d)
    arr = np.empty((d, d), dtype=object)
    one, zero = Radical(1), Radical(0)
    for i in range(d):
        for j in range(d):
            arr[i, j] = one if i == j else zero
    return arr


def zeros(shape, backend: str) -> np.ndarray:
    if backend == FLOAT:
        return np.zeros(shape)
    arr = np.empty(shape, dtype=object)
    arr[...] = Radical(0)
    return arr.copy()


def to_float_matrix(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return np.array([[float(x) for x in row] for row in a], dtype=float)
    return np.asarray(a, dtype=float)


def scalar_zero(backend: str):
    return Radical(0) if backend == EXACT else 0.0


def frobenius_sq(a: np.ndarray):
    """Sum of squared entries (exact scalar or float)."""
    if a.dtype == object:
        total = Radical(0)
        for x in a.flat:
            total = total + x * x
        return total
    return float(np.sum(np.asarray(a, dtype=float) ** 2))


def char_poly(m: np.ndarray) -> list[Radical]:
    """Monic characteristic polynomial of an exact square matrix.

    Returns coefficients [c_0, ..., c_{n-1}, 1] with
    p(t) = t^n + c_{n-1} t^{n-1} + ... + c_0, via Faddeev-LeVerrier
    (exact: the only divisions are by integers).
    """
    n = m.shape[0]
    assert m.shape == (n, n) and m.dtype == object
    coeffs = [Radical(0)] * (n + 1)
    coeffs[n] = Radical(1)
    a = m.copy()
    ident = identity(n, EXACT)
    for k in range(1, n + 1):
        c = -np.trace(a) / k
        coeffs[n - k] = c
        if k < n:
            a = m @ (a + c * ident)
    return coeffs


def poly_eval(coeffs, x: Radical) -> Radical:
    acc = Radical(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_deflate(coeffs: list[Fraction], root: Fraction) -> list[Fraction]:
    # synthetic division, exact; assumes coeffs[-1] == 1 after scaling
    n = len(coeffs) - 1
    out = [Fraction(0)] * n
    carry = coeffs[n]
    for k in range(n - 1, -1, -1):
        out[k] = carry
        carry = coeffs[k] + carry * root
    assert carry == 0
    return out


def rational_roots(coeffs: list[Fraction]):
    """All rational roots (with multiplicity) of a rational polynomial.

    Returns (roots, remainder) where remainder is the deflated
    coefficient list containing no rational roots.  Candidates come from
    float root finding plus continued-fraction reconstruction, and every
    accepted root is verified exactly, so the output is certified.
    """
    work = [Fraction(c) for c in coeffs]
    while len(work) > 1 and work[-1] == 0:
        work.pop()
    roots: list[Fraction] = []
    progress = True
    while progress and len(work) > 1:
        progress = False
        lead = work[-1]
        monic = [c / lead for c in work]
        approx = np.roots([float(c) for c in reversed(monic)])
        candidates: set[Fraction] = set()
        for z in approx:
            if abs(z.imag) > 1e-7:
                continue
            x = z.real
            for denom_cap in (10**6, 10**9, 10**12, 10**15):
                candidates.add(Fraction(x).limit_denominator(denom_cap))
        for cand in candidates:
            val = Fraction(0)
            for c in reversed(monic):
                val = val * cand + c
            if val == 0:
                roots.append(cand)
                work = [c * lead for c in _poly_deflate(monic, cand)]
                progress = True
                break
    return roots, work


def _cauchy_bound(coeffs: list[Fraction]) -> float:
    lead = coeffs[-1]
    if len(coeffs) == 1:
        return 0.0
    return 1.0 + max(abs(float(c / lead)) for c in coeffs[:-1])


def certified_spectral_radius(rep: np.ndarray):
    """Spectral radius of an exact matrix, certified when possible.

    Returns (value_float, exact_value_or_None).  ``exact_value`` is a
    Radical equal to the spectral radius whenever the characteristic
    polynomial resolves into rational roots plus at most a quadratic
    factor, or when the largest rational root provably dominates the
    rest (Cauchy bound).
    """
    n = rep.shape[0]
    if n == 0:
        return 0.0, Radical(0)
    coeffs = char_poly(rep)
    float_radius = float(max(abs(np.linalg.eigvals(to_float_matrix(rep))), default=0.0))
    if not all(c.is_rational() for c in coeffs):
        if n == 1:
            x = rep[0, 0]
            return abs(float(x)), abs(x)
        if n == 2:
            tr = rep[0, 0] + rep[1, 1]
            det = rep[0, 0] * rep[1, 1] - rep[0, 1] * rep[1, 0]
            disc = tr * tr - 4 * det
            try:
                sq = disc.sqrt()
            except ValueError:
                return float_radius, None
            cands = [abs((tr + sq) / 2), abs((tr - sq) / 2)]
            best = cands[0] if (cands[0] - cands[1]).sign() >= 0 else cands[1]
            return float(best), best
        return float_radius, None
    rat = [c.as_fraction() for c in coeffs]
    roots, rem = rational_roots(rat)
    best: Radical | None = None
    if roots:
        best = Radical(max((abs(r) for r in roots)))
    deg = len(rem) - 1
    if deg <= 0:
        return (float(best), best) if best is not None else (0.0, Radical(0))
    if deg == 1:
        r = Radical(-rem[0] / rem[1])
        cand = abs(r)
        best = cand if best is None or (cand - best).sign() > 0 else best
        return float(best), best
    if deg == 2:
        a, b, c = rem[2], rem[1], rem[0]
        disc = Fraction(b * b - 4 * a * c)
        if disc >= 0:
            sq = Radical.root(disc)
            for r in ((sq - b) / (2 * a), (-sq - b) / (2 * a)):
                cand = abs(r)
                if best is None or (cand - best).sign() > 0:
                    best = cand
        else:
            modulus_sq = Fraction(c, a)
            cand = Radical.root(modulus_sq)
            if best is None or (cand - best).sign() > 0:
                best = cand
        return float(best), best
    if best is not None and float(best) >= _cauchy_bound(rem) - 1e-12:
        # float guard only backs a rigorous-by-margin comparison; if the
        # margin is thin we decline to certify
        if float(best) > _cauchy_bound(rem) + 1e-9:
            return float(best), best
    return float_radius, None


def exact_eigenvalues_symmetric(m: np.ndarray) -> list[Radical] | None:
    """Eigenvalues of a small symmetric exact matrix, or None.

    Succeeds when the characteristic polynomial splits into rational
    roots and at most one quadratic factor with representable surd.
    """
    n = m.shape[0]
    if n == 0:
        return []
    coeffs = char_poly(m)
    if not all(c.is_rational() for c in coeffs):
        if n == 1:
            return [m[0, 0]]
        if n == 2:
            tr = m[0, 0] + m[1, 1]
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            disc = tr * tr - 4 * det
            try:
                sq = disc.sqrt()
            except ValueError:
                return None
            return [(tr + sq) / 2, (tr - sq) / 2]
        return None
    roots, rem = rational_roots([c.as_fraction() for c in coeffs])
    out = [Radical(r) for r in roots]
    deg = len(rem) - 1
    if deg == 0:
        return out
    if deg == 1:
        return out + [Radical(-rem[0] / rem[1])]
    if deg == 2:
        a, b, c = rem[2], rem[1], rem[0]
        disc = Fraction(b * b - 4 * a * c)
        if disc < 0:
            return None
        sq = Radical.root(disc)
        return out + [(sq - b) / (2 * a), (-sq - b) / (2 * a)]
    return None


def nullspace_exact(m: np.ndarray) -> list[np.ndarray]:
    """Basis of the kernel of an exact matrix (Gaussian elimination)."""
    rows, cols = m.shape
    a = [[Radical(m[i, j]) for j in range(cols)] for i in range(rows)]
    pivot_cols: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if not a[i][c].is_zero()), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = Radical(1) / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and not a[i][c].is_zero():
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivot_cols.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivot_cols]
    basis = []
    for fc in free:
        v = [Radical(0)] * cols
        v[fc] = Radical(1)
        for i, pc in enumerate(pivot_cols):
            v[pc] = -a[i][fc]
        vec = np.empty(cols, dtype=object)
        vec[:] = v
        basis.append(vec)
    return basis


def solve_exact(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve m x = b exactly; m square nonsingular, b a matrix or vector."""
    n = m.shape[0]
    bmat = b.reshape(n, -1)
    a = [[Radical(m[i, j]) for j in range(n)] + [Radical(bmat[i, k]) for k in range(bmat.shape[1])]
         for i in range(n)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if not a[i][col].is_zero()), None)
        if pivot is None:
            raise ValueError("singular system in exact solve")
        a[col], a[pivot] = a[pivot], a[col]
        inv = Radical(1) / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for i in range(n):
            if i != col and not a[i][col].is_zero():
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    out = np.empty((n, bmat.shape[1]), dtype=object)
    for i in range(n):
        for k in range(bmat.shape[1]):
            out[i, k] = a[i][n + k]
    return out.reshape(b.shape)


def det_exact(m: np.ndarray) -> Radical:
    n = m.shape[0]
    a = [[Radical(m[i, j]) for j in range(n)] for i in range(n)]
    det = Radical(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if not a[i][col].is_zero()), None)
        if pivot is None:
            return Radical(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det = det * a[col][col]
        inv = Radical(1) / a[col][col]
        for i in range(col + 1, n):
            if not a[i][col].is_zero():
                f = a[i][col] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return det


def leading_minors(m: np.ndarray) -> list[Radical]:
    return [det_exact(m[: k + 1, : k + 1]) for k in range(m.shape[0])]


def cholesky_exact(m: np.ndarray) -> np.ndarray:
    """Upper-triangular U with m = U^T U, for symmetric PD exact m.

    Raises ``ValueError`` when a pivot square root leaves the field.
    """
    n = m.shape[0]
    a = [[Radical(m[i, j]) for j in range(n)] for i in range(n)]
    u = [[Radical(0)] * n for _ in range(n)]
    for k in range(n):
        pivot = a[k][k] - sum((u[i][k] * u[i][k] for i in range(k)), Radical(0))
        if pivot.sign() <= 0:
            raise ValueError("matrix is not positive definite")
        u[k][k] = pivot.sqrt()
        inv = Radical(1) / u[k][k]
        for j in range(k + 1, n):
            s = a[k][j] - sum((u[i][k] * u[i][j] for i in range(k)), Radical(0))
            u[k][j] = s * inv
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = u[i][j]
    return out
