"""Matrix families defining self-similar product measures.

A system is a finite alphabet S, a dimension d, one injective d x d map
A_s per symbol, and a symmetric positive definite weight E with unit
trace, subject to the two fundamental identities

    sum_s A_s^T E A_s = E        (weight is invariant),
    sum_s A_s A_s^T   = I        (dual normalization).

The weighted inner product on d x d matrices is <A, B> = Tr(B^T E A).
Two completely positive operators act on matrix space:

    M(B)  = sum_s A_s B A_s^T,   M(I) = I,
    M*(B) = sum_s A_s^T B A_s,   M*(E) = E,

mutual adjoints under the Hilbert-Schmidt pairing.  Their spectra away
from the fixed points control every decay rate computed in
:mod:`kusuoka.spectral`.

Both numeric backends share this interface: "exact" stores
:class:`~kusuoka.exactnum.Radical` entries in object arrays, "float"
stores float64.  Backends never mix silently; converting is explicit
via :func:`to_float_system`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .exactnum import Radical, format_exact, parse_exact
from .linalg import EXACT, FLOAT

__all__ = [
    "MatrixSystem",
    "ValidationReport",
    "make_system",
    "validate",
    "inner_e",
    "apply_M",
    "apply_M_star",
    "matrix_rep_M",
    "schatten_norm",
    "sg_system",
    "bernoulli_system",
    "to_float_system",
    "system_to_json",
    "system_from_json",
]

REP_PARTS = ("full", "symmetric", "antisymmetric", "traceless-symmetric")


@dataclass(frozen=True, eq=False)
class MatrixSystem:
    alphabet: tuple[str, ...]
    dim: int
    maps: tuple[np.ndarray, ...]
    energy: np.ndarray
    backend: str
    symmetric: bool

    @property
    def n_symbols(self) -> int:
        return len(self.alphabet)

    def map_for(self, symbol: int) -> np.ndarray:
        return self.maps[symbol]


def _is_sym(a: np.ndarray) -> bool:
    if a.dtype == object:
        return all(
            (a[i, j] - a[j, i]).is_zero()
            for i in range(a.shape[0])
            for j in range(i + 1, a.shape[1])
        )
    return bool(np.array_equal(a, a.T))


def make_system(alphabet, maps, energy, backend: str) -> MatrixSystem:
    """Assemble and shape-check a system (no semantic validation here)."""
    if backend not in (EXACT, FLOAT):
        raise ValueError(f"unknown backend {backend!r}")
    alphabet = tuple(str(a) for a in alphabet)
    if len(set(alphabet)) != len(alphabet):
        raise ValueError("alphabet symbols must be distinct")
    if len(maps) != len(alphabet):
        raise ValueError("one map per symbol required")
    mats = tuple(linalg.as_matrix(m, backend) if not isinstance(m, np.ndarray) else m
                 for m in maps)
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise ValueError("all maps must be square with equal dimension")
    e = energy if isinstance(energy, np.ndarray) else linalg.as_matrix(energy, backend)
    if e.shape != (d, d):
        raise ValueError("weight matrix dimension mismatch")
    if backend == FLOAT:
        mats = tuple(np.asarray(m, dtype=float) for m in mats)
        e = np.asarray(e, dtype=float)
        for m in mats:
            m.setflags(write=False)
        e.setflags(write=False)
    sym = all(_is_sym(m) for m in mats)
    return MatrixSystem(alphabet, d, mats, e, backend, sym)


# -- fundamental operations ----------------------------------------------


def inner_e(system: MatrixSystem, a: np.ndarray, b: np.ndarray):
    """Weighted inner product <a, b> = Tr(b^T E a)."""
    return np.trace(b.T @ system.energy @ a)


def apply_M(system: MatrixSystem, b: np.ndarray) -> np.ndarray:
    out = system.maps[0] @ b @ system.maps[0].T
    for m in system.maps[1:]:
        out = out + m @ b @ m.T
    return out


def apply_M_star(system: MatrixSystem, b: np.ndarray) -> np.ndarray:
    out = system.maps[0].T @ b @ system.maps[0]
    for m in system.maps[1:]:
        out = out + m.T @ b @ m
    return out


@dataclass(frozen=True)
class ValidationReport:
    backend: str
    dim: int
    invariance_residual: float
    normalization_residual: float
    invariance_ok: bool
    normalization_ok: bool
    trace_ok: bool
    positive_definite: bool
    offending_eigenvalue: float | None
    injective: tuple[bool, ...]
    symmetric: bool
    tol: float

    @property
    def ok(self) -> bool:
        return (
            self.invariance_ok
            and self.normalization_ok
            and self.trace_ok
            and self.positive_definite
            and all(self.injective)
        )

    def lines(self) -> list[str]:
        mark = lambda b: "ok" if b else "FAIL"
        return [
            f"weight invariance residual {self.invariance_residual:.3e} [{mark(self.invariance_ok)}]",
            f"dual normalization residual {self.normalization_residual:.3e} [{mark(self.normalization_ok)}]",
            f"weight trace one [{mark(self.trace_ok)}]",
            f"weight positive definite [{mark(self.positive_definite)}]"
            + ("" if self.offending_eigenvalue is None
               else f" (offending eigenvalue {self.offending_eigenvalue:.3e})"),
            f"maps injective [{mark(all(self.injective))}]",
        ]


def validate(system: MatrixSystem, tol: float = 1e-12) -> ValidationReport:
    """Check both fundamental identities, weight properties, injectivity.

    Exact backend: residuals must vanish identically and positivity is
    decided by leading principal minors.  Float backend: residuals are
    compared in Frobenius norm against ``tol``.
    """
    d = system.dim
    ident = linalg.identity(d, system.backend)
    r1 = apply_M_star(system, system.energy) - system.energy
    r2 = apply_M(system, ident) - ident
    if system.backend == EXACT:
        sq1, sq2 = linalg.frobenius_sq(r1), linalg.frobenius_sq(r2)
        inv_ok, norm_ok = sq1.is_zero(), sq2.is_zero()
        res1, res2 = float(sq1) ** 0.5, float(sq2) ** 0.5
        trace_ok = (np.trace(system.energy) - 1) == Radical(0)
        minors = linalg.leading_minors(system.energy)
        pd = _is_sym(system.energy) and all(m.sign() > 0 for m in minors)
        offending = None if pd else min(float(m) for m in minors)
        inj = tuple(not linalg.det_exact(m).is_zero() for m in system.maps)
    else:
        res1 = float(np.sqrt(linalg.frobenius_sq(r1)))
        res2 = float(np.sqrt(linalg.frobenius_sq(r2)))
        inv_ok, norm_ok = res1 <= tol, res2 <= tol
        trace_ok = abs(np.trace(system.energy) - 1.0) <= tol
        eigs = np.linalg.eigvalsh(np.asarray(system.energy, dtype=float))
        pd = _is_sym(system.energy) and bool(eigs.min() > 0)
        offending = None if pd else float(eigs.min())
        inj = tuple(
            bool(np.linalg.svd(m, compute_uv=False).min() > tol * max(1.0, float(np.abs(m).max())))
            for m in system.maps
        )
    return ValidationReport(
        backend=system.backend,
        dim=d,
        invariance_residual=res1,
        normalization_residual=res2,
        invariance_ok=inv_ok,
        normalization_ok=norm_ok,
        trace_ok=trace_ok,
        positive_definite=pd,
        offending_eigenvalue=offending,
        injective=inj,
        symmetric=system.symmetric,
        tol=tol,
    )


# -- orthonormal bases of matrix subspaces --------------------------------


def _diag_weights(system: MatrixSystem):
    """Diagonal of E when E is diagonal, else None."""
    e = system.energy
    d = system.dim
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            x = e[i, j]
            if (isinstance(x, Radical) and not x.is_zero()) or (
                not isinstance(x, Radical) and x != 0
            ):
                return None
    return [e[i, i] for i in range(d)]


def _unit(system, mat, norm_sq):
    if system.backend == EXACT:
        return mat * (Radical(1) / norm_sq.sqrt())
    return mat / np.sqrt(norm_sq)


def orthonormal_basis(system: MatrixSystem, part: str) -> list[np.ndarray]:
    """Orthonormal basis of a distinguished subspace under <.,.>_E.

    Parts: 'full', 'symmetric', 'antisymmetric', 'traceless-symmetric'
    (symmetric matrices orthogonal to the identity).  With a diagonal
    weight the basis is written down in closed form on either backend;
    a non-diagonal weight is supported on the float backend only.
    """
    if part not in REP_PARTS:
        raise ValueError(f"unknown subspace {part!r}; expected one of {REP_PARTS}")
    d, bk = system.dim, system.backend
    w = _diag_weights(system)
    if w is None:
        if bk == EXACT:
            raise ValueError(
                "closed-form orthonormal bases need a diagonal weight on the "
                "exact backend; use the float backend for this system"
            )
        return _gram_basis_float(system, part)

    def e_mat(i, j):
        m = linalg.zeros((d, d), bk)
        m[i, j] = Radical(1) if bk == EXACT else 1.0
        return m

    basis: list[np.ndarray] = []
    if part == "full":
        for i in range(d):
            for j in range(d):
                basis.append(_unit(system, e_mat(i, j), w[i] if bk == EXACT else float(w[i])))
        return basis
    if part in ("symmetric", "antisymmetric"):
        if part == "symmetric":
            for i in range(d):
                basis.append(_unit(system, e_mat(i, i), w[i]))
        sign = 1 if part == "symmetric" else -1
        for i in range(d):
            for j in range(i + 1, d):
                m = e_mat(i, j) + sign * e_mat(j, i)
                basis.append(_unit(system, m, w[i] + w[j]))
        return basis
    # traceless-symmetric: diagonal part orthogonal to identity, plus
    # all symmetrized off-diagonal units
    partial = [w[0]]
    for k in range(1, d):
        partial.append(partial[-1] + w[k])
    for k in range(d - 1):
        m = linalg.zeros((d, d), bk)
        for i in range(k + 1):
            m[i, i] = Radical(1) if bk == EXACT else 1.0
        m[k + 1, k + 1] = -(partial[k] / w[k + 1])
        norm_sq = partial[k] + partial[k] * partial[k] / w[k + 1]
        basis.append(_unit(system, m, norm_sq))
    for i in range(d):
        for j in range(i + 1, d):
            m = e_mat(i, j) + e_mat(j, i)
            basis.append(_unit(system, m, w[i] + w[j]))
    return basis


def _gram_basis_float(system: MatrixSystem, part: str) -> list[np.ndarray]:
    d = system.dim
    span: list[np.ndarray] = []
    if part in ("full", "symmetric", "traceless-symmetric"):
        for i in range(d):
            span.append(np.eye(d)[:, [i]] @ np.eye(d)[[i], :])
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d))
            m[i, j] = 1.0
            if part == "antisymmetric":
                m[j, i] = -1.0
                span.append(m)
            else:
                m[j, i] = 1.0
                span.append(m)
            if part == "full":
                m2 = np.zeros((d, d))
                m2[i, j], m2[j, i] = 1.0, -1.0
                span.append(m2)
    gram = np.array([[float(inner_e(system, a, b)) for a in span] for b in span])
    vals, vecs = np.linalg.eigh(gram)
    basis = []
    for k in range(len(span)):
        if vals[k] <= 1e-12:
            continue
        m = sum(vecs[m_i, k] * span[m_i] for m_i in range(len(span))) / np.sqrt(vals[k])
        basis.append(m)
    if part != "traceless-symmetric":
        return basis
    ident = np.eye(d)
    iv = np.array([float(inner_e(system, b, ident)) for b in basis])
    nrm = np.linalg.norm(iv)
    if nrm < 1e-14:
        return basis
    iv = iv / nrm
    _, _, vt = np.linalg.svd(iv.reshape(1, -1))
    out = []
    for k in range(1, len(basis)):
        direction = vt[k]
        out.append(sum(direction[m_i] * basis[m_i] for m_i in range(len(basis))))
    return out


def matrix_rep_M(system: MatrixSystem, part: str = "full"):
    """Matrix of B -> sum_s A_s B A_s^T on a subspace, in an orthonormal basis.

    Returns (rep, basis).  Entry [i][j] is <M(b_j), b_i>_E; because the
    basis is orthonormal the representation is similar to the restricted
    operator and self-adjoint systems give symmetric reps.
    """
    basis = orthonormal_basis(system, part)
    n = len(basis)
    rep = linalg.zeros((n, n), system.backend)
    images = [apply_M(system, b) for b in basis]
    for j, img in enumerate(images):
        for i, b in enumerate(basis):
            rep[i, j] = inner_e(system, img, b)
    return rep, basis


# -- Schatten norms --------------------------------------------------------


def schatten_norm(b: np.ndarray, p):
    """Schatten p-norm: l^p norm of the singular value sequence.

    p may be a number >= 1 or ``float('inf')`` / ``'inf'``.  Exact
    matrices take the exact eigenvalue route when symmetric (p in
    {1, 2, inf}; p = 2 works for any exact matrix via the Frobenius
    identity); other exact cases fall back to float singular values.
    """
    if p == "inf":
        p = float("inf")
    if not (p == float("inf") or p >= 1):
        raise ValueError("Schatten norms need p >= 1")
    if b.dtype != object:
        sv = np.linalg.svd(np.asarray(b, dtype=float), compute_uv=False)
        if p == float("inf"):
            return float(sv.max(initial=0.0))
        return float((sv**p).sum() ** (1.0 / p))
    if p == 2:
        return linalg.frobenius_sq(b).sqrt()
    if _is_sym(b):
        eigs = linalg.exact_eigenvalues_symmetric(b)
        if eigs is not None:
            mags = [abs(x) for x in eigs]
            if p == float("inf"):
                top = mags[0]
                for m in mags[1:]:
                    if (m - top).sign() > 0:
                        top = m
                return top
            if isinstance(p, int) or (isinstance(p, Fraction) and p.denominator == 1):
                total = Radical(0)
                for m in mags:
                    total = total + m ** int(p)
                if p == 1:
                    return total
                return float(total) ** (1.0 / float(p))
            return float(sum(float(m) ** float(p) for m in mags)) ** (1.0 / float(p))
    fl = linalg.to_float_matrix(b)
    sv = np.linalg.svd(fl, compute_uv=False)
    if p == float("inf"):
        return float(sv.max(initial=0.0))
    return float((sv**p).sum() ** (1.0 / p))


# -- built-in systems ------------------------------------------------------


def sg_system(backend: str = EXACT) -> MatrixSystem:
    """The standard 3-map, 2-dimensional gasket system.

    A_0 is diagonal with entries 3/sqrt(15) and 1/sqrt(15); A_1 and A_2
    are its conjugates under rotation by 2*pi/3; the weight is I/2.
    """
    half = Fraction(1, 2)
    d0 = linalg.as_matrix(
        [[Radical.root(Fraction(3, 5)), 0], [0, Radical.root(Fraction(1, 15))]], EXACT
    )
    rot = linalg.as_matrix(
        [[Radical(-half), -Radical.root(Fraction(3, 4))],
         [Radical.root(Fraction(3, 4)), Radical(-half)]],
        EXACT,
    )
    maps = [d0, rot.T @ d0 @ rot, rot @ d0 @ rot.T]
    energy = linalg.as_matrix([[half, 0], [0, half]], EXACT)
    system = make_system(("0", "1", "2"), maps, energy, EXACT)
    return system if backend == EXACT else to_float_system(system)


def bernoulli_system(probs, backend: str = EXACT) -> MatrixSystem:
    """One-dimensional system with maps (sqrt(p_s)): the product measure.

    ``probs`` are the symbol probabilities; they should sum to one for
    the fundamental identities to hold (validation will report if not).
    """
    probs = [Fraction(p) if not isinstance(p, float) else Fraction(p).limit_denominator(10**9)
             for p in probs]
    if any(p < 0 for p in probs):
        raise ValueError("probabilities must be nonnegative")
    maps = [[[Radical.root(p)]] for p in probs]
    system = make_system(
        tuple(str(i) for i in range(len(probs))),
        [linalg.as_matrix(m, EXACT) for m in maps],
        linalg.as_matrix([[1]], EXACT),
        EXACT,
    )
    return system if backend == EXACT else to_float_system(system)


def to_float_system(system: MatrixSystem) -> MatrixSystem:
    if system.backend == FLOAT:
        return system
    return make_system(
        system.alphabet,
        [linalg.to_float_matrix(m) for m in system.maps],
        linalg.to_float_matrix(system.energy),
        FLOAT,
    )


# -- JSON interchange ------------------------------------------------------


def _entry_to_json(x, backend: str):
    if backend == EXACT:
        return format_exact(x)
    return float(x)


def _entry_from_json(x, backend: str):
    if backend == EXACT:
        if isinstance(x, str):
            return parse_exact(x)
        if isinstance(x, int):
            return Radical(x)
        raise ValueError(
            f"exact systems need string or integer entries, got {x!r}"
        )
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        return float(parse_exact(x))
    raise ValueError(f"cannot read float entry {x!r}")


def system_to_json(system: MatrixSystem) -> dict:
    bk = system.backend
    return {
        "alphabet": list(system.alphabet),
        "dim": system.dim,
        "maps": {
            sym: [[_entry_to_json(x, bk) for x in row] for row in map_]
            for sym, map_ in zip(system.alphabet, system.maps)
        },
        "energy": [[_entry_to_json(x, bk) for x in row] for row in system.energy],
        "backend": bk,
    }


def system_from_json(data: dict) -> MatrixSystem:
    try:
        backend = data.get("backend", FLOAT)
        alphabet = [str(a) for a in data["alphabet"]]
        dim = int(data["dim"])
        maps = []
        for sym in alphabet:
            rows = data["maps"][sym]
            maps.append(
                linalg.as_matrix(
                    [[_entry_from_json(x, backend) for x in row] for row in rows], backend
                )
            )
        energy = linalg.as_matrix(
            [[_entry_from_json(x, backend) for x in row] for row in data["energy"]], backend
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed system description: {exc}") from exc
    system = make_system(alphabet, maps, energy, backend)
    if system.dim != dim:
        raise ValueError("declared dim does not match map shapes")
    return system
