"""The trace-defined cylinder measure: masses, conditionals, mixing, sampling."""

import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from kusuoka.exactnum import Radical
from kusuoka.matsys import bernoulli_system, make_system, sg_system
from kusuoka.measure import (
    SystemInvalidError,
    conditional,
    correlation_gap,
    correlation_gap_brute,
    g_approx,
    h_state,
    kusuoka_measure,
    level_masses,
    mixing_bound_check,
    nu,
    sample,
    sample_many,
    transfer_apply,
)
from kusuoka.symbolic import BudgetError, all_words, indicator


def test_invalid_system_rejected(sg):
    bad = make_system(sg.alphabet, sg.maps, sg.maps[0], sg.backend)
    with pytest.raises(SystemInvalidError) as exc:
        kusuoka_measure(bad)
    assert not exc.value.report.ok
    # opting out of the check still constructs
    kusuoka_measure(bad, check=False)


def test_frozen_cylinder_masses(sg_measure):
    assert nu(sg_measure, ()) == Radical(1)
    assert nu(sg_measure, (0,)) == Fraction(1, 3)
    assert nu(sg_measure, (0, 0)) == Fraction(41, 225)
    assert nu(sg_measure, (0, 1)) == Fraction(17, 225)
    assert nu(sg_measure, (0, 2)) == Fraction(17, 225)
    assert nu(sg_measure, (0, 0, 0)) == Fraction(73, 675)


def test_symmetry_across_symbols(sg_measure):
    for s in (0, 1, 2):
        assert nu(sg_measure, (s,)) == Fraction(1, 3)
        assert nu(sg_measure, (s, s)) == Fraction(41, 225)


def test_total_mass_and_additivity(sg_measure):
    for k in range(5):
        masses = level_masses(sg_measure, k)
        total = sum(masses[1:], masses[0])
        assert (total - Radical(1)).is_zero()
    # two-sided refinement: nu(w) = sum_s nu(ws) = sum_s nu(sw)
    for k in range(4):
        for w in all_words(3, k):
            mass = nu(sg_measure, w)
            right = sum(nu(sg_measure, w + (s,)) for s in range(3))
            left = sum(nu(sg_measure, (s,) + w) for s in range(3))
            assert (right - mass).is_zero()
            assert (left - mass).is_zero()


def test_conditional_values(sg_measure):
    assert conditional(sg_measure, (0,), 0) == Fraction(41, 75)
    assert conditional(sg_measure, (0,), 1) == Fraction(17, 75)
    total = sum(conditional(sg_measure, (0,), s) for s in range(3))
    assert (total - Radical(1)).is_zero()


def test_conditional_zero_mass_guard(bern_measure):
    degenerate = kusuoka_measure(
        bernoulli_system([Fraction(0), Fraction(1)]), check=False
    )
    with pytest.raises(ValueError):
        conditional(degenerate, (0,), 1)


def test_g_approx_values(sg_measure):
    assert g_approx(sg_measure, (0, 0)) == Fraction(41, 75)
    assert g_approx(sg_measure, (0, 0, 0)) == Fraction(73, 123)
    assert g_approx(sg_measure, (0,)) == Fraction(1, 3)
    with pytest.raises(ValueError):
        g_approx(sg_measure, ())


def test_h_state_values(sg_measure):
    h0 = h_state(sg_measure, (0,)).h
    assert h0[0, 0] == Fraction(9, 10)
    assert h0[1, 1] == Fraction(1, 10)
    assert h0[0, 1].is_zero()
    h00 = h_state(sg_measure, (0, 0)).h
    assert h00[0, 0] == Fraction(81, 82)
    assert h00[1, 1] == Fraction(1, 82)


def test_h_state_trace_one_and_psd(sg_measure):
    for w in [(1,), (2, 0), (1, 2, 0)]:
        h = h_state(sg_measure, w).h
        assert (np.trace(h) - Radical(1)).is_zero()
        eigs = np.linalg.eigvalsh(np.array([[float(x) for x in row] for row in h]))
        assert eigs.min() >= -1e-15


def test_correlation_gap_closed_form(sg_measure):
    for n in range(7):
        gap = correlation_gap(sg_measure, (0,), (0,), n)
        want = Radical(Fraction(16, 225)) * Radical(Fraction(4, 5)) ** n
        assert (gap - want).is_zero()


def test_correlation_gap_matches_brute(sg_measure):
    for alpha in [(0,), (1, 2)]:
        for beta in [(0,), (2,)]:
            for n in range(4):
                fast = correlation_gap(sg_measure, alpha, beta, n)
                slow = correlation_gap_brute(sg_measure, alpha, beta, n)
                assert (fast - slow).is_zero()


def test_correlation_gap_bernoulli_is_zero(bern_measure):
    for n in range(3):
        gap = correlation_gap(bern_measure, (0,), (1,), n)
        assert gap.is_zero()


def test_mixing_bound_rows(sg_measure):
    rows = mixing_bound_check(sg_measure, 2, 6)
    assert [r.n for r in rows] == list(range(7))
    for r in rows:
        assert r.gap_ok
        assert r.pointwise_ok
        assert (r.gap_bound - Radical(2) * Radical(Fraction(4, 5)) ** r.n).is_zero()
    # the worst depth-1 pair at separation 0 is the diagonal one
    rows1 = mixing_bound_check(sg_measure, 1, 0)
    assert (rows1[0].max_gap - Radical(Fraction(16, 225))).is_zero()


def test_transfer_apply_values(sg_measure):
    ind0 = indicator(sg_measure.system, (0,))
    assert transfer_apply(sg_measure, ind0, 0, (0,)) == Fraction(41, 75)
    assert transfer_apply(sg_measure, ind0, 2, (0,)) == Fraction(881, 1875)


def test_transfer_apply_brute(sg_measure):
    # literal (mshift + depth)-fold preimage sum, conditioned on the prefix state
    ind0 = indicator(sg_measure.system, (0,))
    h = h_state(sg_measure, (0,)).h
    total = Radical(0)
    for w in all_words(3, 3):  # mshift 2 + depth 1
        if w[0] != 0:
            continue
        a = sg_measure.system.maps[w[0]]
        for s in w[1:]:
            a = sg_measure.system.maps[s] @ a
        total = total + np.trace(h @ (a @ a.T))
    assert (transfer_apply(sg_measure, ind0, 2, (0,)) - total).is_zero()


def test_transfer_apply_converges_to_mean(sg_measure):
    # |T^n f (x) - mean| <= 2 theta1^n * spread for the depth-1 indicator
    ind0 = indicator(sg_measure.system, (0,))
    for n in (1, 4, 8):
        val = transfer_apply(sg_measure, ind0, n, (1,))
        assert abs(float(val) - 1 / 3) <= 2 * 0.8**n


def test_transfer_apply_guards(sg_measure, bern_measure):
    ind0 = indicator(sg_measure.system, (0,))
    with pytest.raises(ValueError):
        transfer_apply(sg_measure, ind0, -1, (0,))
    with pytest.raises(ValueError):
        transfer_apply(bern_measure, ind0, 0, (0,))


def test_bernoulli_product_masses(bern_measure):
    p = [Fraction(1, 4), Fraction(3, 4)]
    for w in all_words(2, 3):
        want = Fraction(1)
        for s in w:
            want *= p[s]
        assert nu(bern_measure, w) == want


def test_sampler_deterministic(sg_measure):
    a = sample_many(sg_measure, 6, 50, seed=123)
    b = sample_many(sg_measure, 6, 50, seed=123)
    assert a == b
    c = sample_many(sg_measure, 6, 50, seed=124)
    assert a != c
    assert sample(sg_measure, 6, seed=123) == a[0]


def test_sampler_frequencies(sg_measure):
    n = 20000
    draws = sample_many(sg_measure, 1, n, seed=7)
    counts = Counter(w[0] for w in draws)
    for s in range(3):
        p = 1 / 3
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(counts[s] / n - p) < 4 * sigma


def test_sampler_budget(sg_measure):
    with pytest.raises(BudgetError):
        sample_many(sg_measure, 10, 1000, seed=0, budget=100)


def test_float_backend_agrees(sg_float_measure):
    assert nu(sg_float_measure, (0, 0)) == pytest.approx(41 / 225, abs=1e-14)
    gap = correlation_gap(sg_float_measure, (0,), (0,), 3)
    assert gap == pytest.approx(16 / 225 * 0.8**3, abs=1e-14)


def test_mass_depends_only_on_word(sg_measure):
    # a cylinder pinned at positions [a, a+len) weighs the same as the
    # initial one: summing over all depth-a prefixes recovers nu(word)
    words = [w for k in range(1, 4) for w in all_words(3, k)]
    for a in (1, 2, 3):
        for word in words:
            shifted = sum(nu(sg_measure, g + word) for g in all_words(3, a))
            assert (shifted - nu(sg_measure, word)).is_zero()


def test_conditional_sums_to_one_on_random_prefixes(sg_measure):
    rng = np.random.default_rng(13)
    for _ in range(100):
        k = int(rng.integers(1, 7))
        prefix = tuple(int(s) for s in rng.integers(0, 3, size=k))
        total = sum(conditional(sg_measure, prefix, s) for s in range(3))
        assert (total - Radical(1)).is_zero()


def test_h_state_sweep_trace_one_and_psd(sg_measure):
    for k in range(1, 7):
        for w in all_words(3, k):
            h = h_state(sg_measure, w).h
            assert (np.trace(h) - Radical(1)).is_zero()
            det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
            assert h[0, 0].sign() >= 0
            assert det.sign() >= 0
