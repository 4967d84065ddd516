"""The cylinder measure of a matrix restriction system.

A validated system assigns mass nu(alpha) = Tr(A(alpha)* E A(alpha)) to the
cylinder named by a word alpha; the two fixed-point equations make this a
consistent shift-invariant probability measure.  This module evaluates nu and
its conditionals, the finite approximants of the backward transition density,
exact correlation gaps and their geometric bounds, the normalized prefix
states that drive the trace formula for iterated transfer operators, and a
reproducible sequential sampler.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from . import linalg, matsys, spectral, symbolic
from .exactnum import Radical
from .linalg import EXACT
from .matsys import MatrixSystem
from .symbolic import BudgetError, CylinderFunction, Word

__all__ = [
    "SystemInvalidError",
    "KusuokaMeasure",
    "HState",
    "MixingRow",
    "kusuoka_measure",
    "nu",
    "level_masses",
    "conditional",
    "g_approx",
    "correlation_gap",
    "correlation_gap_brute",
    "mixing_bound_check",
    "h_state",
    "transfer_apply",
    "sample",
    "sample_many",
]

_SAMPLER_CACHE_CAP = 200_000


class SystemInvalidError(ValueError):
    """A system failed validation; the report rides along."""

    def __init__(self, report: matsys.ValidationReport):
        super().__init__("system failed validation: " + "; ".join(report.lines()))
        self.report = report


@dataclass(frozen=True, eq=False)
class KusuokaMeasure:
    """Measure handle: a validated system plus evaluation caches.

    The caches are value-level memoization only; all public operations
    stay pure functions of (system, arguments).
    """

    system: MatrixSystem
    _level_mats: dict = field(default_factory=dict, repr=False, compare=False)
    _level_mass: dict = field(default_factory=dict, repr=False, compare=False)
    _sampler_nodes: dict = field(default_factory=dict, repr=False, compare=False)

    def level_matrices(self, k: int, budget: int = symbolic.DEFAULT_BUDGET) -> list:
        """Word matrices of every length-k word, cached per level."""
        symbolic.check_budget(self.system.n_symbols, k, budget)
        if k in self._level_mats:
            return self._level_mats[k]
        if k == 0:
            table = [linalg.identity(self.system.dim, self.system.backend)]
        else:
            prev = self.level_matrices(k - 1, budget)
            table = [a @ m for m in prev for a in self.system.maps]
        self._level_mats[k] = table
        return table

    def level_nu(self, k: int, budget: int = symbolic.DEFAULT_BUDGET) -> list:
        """nu over all length-k words in word-index order, cached."""
        if k not in self._level_mass:
            e = self.system.energy
            self._level_mass[k] = [
                np.trace(m.T @ e @ m) for m in self.level_matrices(k, budget)
            ]
        return self._level_mass[k]


def kusuoka_measure(system: MatrixSystem, check: bool = True, tol: float = 1e-12) -> KusuokaMeasure:
    if check:
        report = matsys.validate(system, tol)
        if not report.ok:
            raise SystemInvalidError(report)
    return KusuokaMeasure(system)


def nu(m: KusuokaMeasure, word: Word):
    """Mass of the cylinder named by ``word``."""
    a = symbolic.word_matrix(m.system, word)
    return np.trace(a.T @ m.system.energy @ a)


def level_masses(m: KusuokaMeasure, k: int, budget: int = symbolic.DEFAULT_BUDGET) -> list:
    return list(m.level_nu(k, budget))


def conditional(m: KusuokaMeasure, word: Word, s: int):
    """nu(word + s) / nu(word)."""
    base = nu(m, word)
    if (base.is_zero() if isinstance(base, Radical) else base == 0):
        raise ValueError("conditioning on a zero-mass cylinder")
    return nu(m, tuple(word) + (s,)) / base


def g_approx(m: KusuokaMeasure, prefix: Word):
    """Finite approximant of the backward transition density.

    For a length-n prefix this is nu(prefix) / nu(prefix without its first
    symbol): the n-th ratio whose almost-everywhere limit defines the
    one-step density.  No extrapolation is attempted; the limit function
    has a dense set of discontinuities, so callers get the raw ratio.
    """
    prefix = tuple(prefix)
    if len(prefix) < 1:
        raise ValueError("the density approximant needs a nonempty prefix")
    return nu(m, prefix) / nu(m, prefix[1:])


@dataclass(frozen=True)
class HState:
    """Normalized prefix state A(prefix)* E A(prefix) / nu(prefix).

    Positive semidefinite with unit trace; the value of the matrix
    martingale that conditions the measure on a deepening prefix.
    """

    prefix: Word
    h: np.ndarray


def h_state(m: KusuokaMeasure, prefix: Word) -> HState:
    prefix = tuple(prefix)
    a = symbolic.word_matrix(m.system, prefix)
    mass = np.trace(a.T @ m.system.energy @ a)
    if (mass.is_zero() if isinstance(mass, Radical) else mass == 0):
        raise ValueError("prefix has zero mass")
    h = a.T @ m.system.energy @ a
    if m.system.backend == EXACT:
        h = (Radical(1) / mass) * h
    else:
        h = h / mass
    return HState(prefix, h)


def correlation_gap(m: KusuokaMeasure, alpha: Word, beta: Word, n: int):
    """nu(alpha intersect shift^-(n+|alpha|) beta) - nu(alpha) nu(beta), exactly.

    Evaluated through the trace formula: the middle sum over n free symbols
    collapses to n applications of the adjoint averaging map to the
    beta-weight A(beta)* E A(beta).
    """
    if n < 0:
        raise ValueError("separation n must be >= 0")
    sys_ = m.system
    b = symbolic.word_matrix(sys_, beta)
    x = b.T @ sys_.energy @ b
    for _ in range(n):
        x = matsys.apply_M_star(sys_, x)
    a = symbolic.word_matrix(sys_, alpha)
    joint = np.trace(a.T @ x @ a)
    return joint - nu(m, alpha) * nu(m, beta)


def correlation_gap_brute(
    m: KusuokaMeasure, alpha: Word, beta: Word, n: int, budget: int = symbolic.DEFAULT_BUDGET
):
    """Oracle for ``correlation_gap``: literal sum over the n middle symbols."""
    if n < 0:
        raise ValueError("separation n must be >= 0")
    sys_ = m.system
    symbolic.check_budget(sys_.n_symbols, n, budget)
    a = symbolic.word_matrix(sys_, alpha)
    b = symbolic.word_matrix(sys_, beta)
    e = sys_.energy
    total = linalg.scalar_zero(sys_.backend)
    for g in m.level_matrices(n, budget):
        w = b @ g @ a
        total = total + np.trace(w.T @ e @ w)
    return total - nu(m, alpha) * nu(m, beta)


@dataclass(frozen=True)
class MixingRow:
    """One separation step of the mixing table.

    ``max_gap`` is the largest |correlation gap| over cylinder pairs
    (alpha of the given depth, beta of depth <= that) at separation n,
    against the geometric bound 2 * theta1^n.  The pointwise columns
    certify sup-norm decay of the conditioned masses: ``pointwise_max``
    is the largest operator norm of M^n applied to the centered cylinder
    weight, per-alpha compared against dim * theta1^n * nu(alpha).
    """

    n: int
    max_gap: object
    gap_bound: object
    gap_ok: bool
    pointwise_max: object
    pointwise_bound: object
    pointwise_ok: bool


def _le(lhs, rhs, slack: float = 0.0) -> bool:
    if isinstance(lhs, Radical) and isinstance(rhs, Radical):
        return (rhs - lhs).sign() >= 0
    return float(lhs) <= float(rhs) + slack


def _abs_scalar(x):
    return abs(x)


def mixing_bound_check(
    m: KusuokaMeasure, k: int, n_max: int, budget: int = symbolic.DEFAULT_BUDGET
) -> list[MixingRow]:
    """Tabulate worst-case correlation gaps against 2 * theta1^n.

    Exact on the exact backend: the gap maximum and the bound are compared
    by sign, so ``gap_ok`` is a certificate, not a float comparison.  The
    pointwise operator-norm column falls back to float eigenvalues when the
    norm leaves the scalar field (flagged by a 1e-12 slack in that case).
    """
    if k < 0 or n_max < 0:
        raise ValueError("depth and separation must be >= 0")
    sys_ = m.system
    backend = sys_.backend
    t1 = spectral.theta1(sys_)
    t1_scalar = t1.exact if (backend == EXACT and t1.exact is not None) else t1.value

    alphas = list(range(sys_.n_symbols ** k))
    a_mats = m.level_matrices(k, budget)
    a_mass = m.level_nu(k, budget)
    # beta weights at every depth j <= k, flattened
    weights = []
    b_mass = []
    for j in range(k + 1):
        for bm, bmass in zip(m.level_matrices(j, budget), m.level_nu(j, budget)):
            weights.append(bm.T @ sys_.energy @ bm)
            b_mass.append(bmass)

    ident = linalg.identity(sys_.dim, backend)
    centered = [a_mats[i] @ a_mats[i].T - a_mass[i] * ident for i in alphas]

    one = Radical(1) if backend == EXACT else 1.0
    two = Radical(2) if backend == EXACT else 2.0
    dim = Radical(sys_.dim) if backend == EXACT else float(sys_.dim)
    rows = []
    t1_pow = one
    for n in range(n_max + 1):
        max_gap = None
        for i in alphas:
            pa = a_mats[i] @ a_mats[i].T
            for w, bmass in zip(weights, b_mass):
                gap = np.trace(w @ pa) - a_mass[i] * bmass
                gap = _abs_scalar(gap)
                if max_gap is None or not _le(gap, max_gap):
                    max_gap = gap
        gap_bound = two * t1_pow
        gap_ok = _le(max_gap, gap_bound)

        pw_max = None
        pw_bound_max = None
        pw_ok = True
        for i in alphas:
            norm = matsys.schatten_norm(centered[i], "inf")
            bound = dim * t1_pow * a_mass[i]
            slack = 0.0 if (isinstance(norm, Radical) and isinstance(bound, Radical)) else 1e-12
            if not _le(norm, bound, slack):
                pw_ok = False
            if pw_max is None or not _le(norm, pw_max, 0.0):
                pw_max = norm
            if pw_bound_max is None or not _le(bound, pw_bound_max, 0.0):
                pw_bound_max = bound
        rows.append(MixingRow(n, max_gap, gap_bound, gap_ok, pw_max, pw_bound_max, pw_ok))

        if n < n_max:
            weights = [matsys.apply_M_star(sys_, w) for w in weights]
            centered = [matsys.apply_M(sys_, c) for c in centered]
            t1_pow = t1_pow * t1_scalar
    return rows


def transfer_apply(
    m: KusuokaMeasure,
    f: CylinderFunction,
    mshift: int,
    prefix: Word,
    budget: int = symbolic.DEFAULT_BUDGET,
):
    """Iterated-transfer value sum_alpha Tr(H(prefix) M^mshift(A(alpha)A(alpha)*)) f(alpha).

    This is the trace expansion of the (mshift + depth)-fold transfer
    operator applied to f, evaluated at any point extending ``prefix``
    (the prefix state stands in for the exact conditioning).  The adjoint
    identity moves M^mshift onto the prefix state, so the per-word work
    is one trace regardless of mshift.
    """
    if mshift < 0:
        raise ValueError("mshift must be >= 0")
    if f.n_symbols != m.system.n_symbols:
        raise ValueError("cylinder function and system disagree on the alphabet")
    h = h_state(m, prefix).h
    for _ in range(mshift):
        h = matsys.apply_M_star(m.system, h)
    total = linalg.scalar_zero(m.system.backend)
    for i, a in enumerate(m.level_matrices(f.depth, budget)):
        total = total + f.values[i] * np.trace(h @ (a @ a.T))
    return total


# -- sampling ----------------------------------------------------------------


def _sampler_node(m: KusuokaMeasure, word: Word, parent, s: int | None):
    """(cumulative floats, exact conditionals, normalized state) for a prefix."""
    cached = m._sampler_nodes.get(word)
    if cached is not None:
        return cached
    sys_ = m.system
    if parent is None:
        state = linalg.identity(sys_.dim, sys_.backend)
    else:
        _, conds, pstate = parent
        a = sys_.maps[s]
        state = a @ pstate @ a.T
        c = conds[s]
        state = (Radical(1) / c) * state if sys_.backend == EXACT else state / c
    conds = tuple(
        np.trace(a.T @ sys_.energy @ a @ state) for a in sys_.maps
    )
    acc = 0.0
    cum = []
    for c in conds:
        acc += float(c)
        cum.append(acc)
    cum[-1] = 1.0  # guard against float roundoff at the top
    node = (cum, conds, state)
    if len(m._sampler_nodes) < _SAMPLER_CACHE_CAP:
        m._sampler_nodes[word] = node
    return node


def sample_many(
    m: KusuokaMeasure, length: int, count: int, seed: int, budget: int = symbolic.DEFAULT_BUDGET
) -> list[Word]:
    """Draw ``count`` independent words of the given length.

    Counter-based generator keyed by the seed alone, inverse CDF over the
    alphabet in order; conditionals are computed on the evaluation backend
    and converted to float only for the comparison with the uniform draw,
    so a seed pins the output across platforms.
    """
    if length < 0 or count < 0:
        raise ValueError("length and count must be >= 0")
    if count * max(length, 1) > budget:
        raise BudgetError(f"sampling {count} x {length} symbols exceeds budget {budget}")
    rng = np.random.Generator(np.random.Philox(seed))
    uniforms = rng.random((count, length))
    out = []
    for c in range(count):
        word: Word = ()
        node = _sampler_node(m, word, None, None)
        for i in range(length):
            s = bisect.bisect_right(node[0], float(uniforms[c, i]))
            s = min(s, m.system.n_symbols - 1)
            new_word = word + (s,)
            node = _sampler_node(m, new_word, node, s)
            word = new_word
        out.append(word)
    return out


def sample(m: KusuokaMeasure, length: int, seed: int, budget: int = symbolic.DEFAULT_BUDGET) -> Word:
    """One word of the given length, deterministic in the seed."""
    return sample_many(m, length, 1, seed, budget)[0]
