"""Contraction rates, irreducibility constants, and map renormalization."""

from fractions import Fraction

import numpy as np
import pytest

from kusuoka.exactnum import Radical
from kusuoka.gasket import generate_system
from kusuoka.linalg import EXACT, FLOAT, as_matrix, frobenius_sq, to_float_matrix
from kusuoka.matsys import apply_M, make_system, sg_system, to_float_system, validate
from kusuoka.measure import kusuoka_measure, nu
from kusuoka.spectral import (
    c_k,
    renormalize,
    spectral_report,
    theta1,
    theta1_schatten,
    theta2,
)


def test_theta1_sg_exact(sg):
    res = theta1(sg)
    assert res.exact == Fraction(4, 5)
    assert res.value == 0.8
    assert res.irreducible
    assert res.part_exact["traceless-symmetric"] == Fraction(4, 5)
    assert res.part_exact["antisymmetric"] == Fraction(3, 5)
    assert "4/5 (exact)" in res.describe()


def test_theta1_sg_float(sg_float):
    res = theta1(sg_float)
    assert res.exact is None
    assert res.value == pytest.approx(0.8, abs=1e-12)
    assert res.irreducible


def test_theta1_sg3(sg3):
    assert theta1(sg3).exact == Fraction(5, 7)


def test_theta1_bernoulli(bern):
    # dimension one: no trace-free directions at all
    res = theta1(bern)
    assert res.value == 0.0
    assert res.irreducible


def test_theta1_schatten_scalar_action(sg):
    for p in (1, 2, "inf"):
        assert theta1_schatten(sg, p) == Fraction(4, 5)


def test_theta1_schatten_rejects_bad_p(sg):
    with pytest.raises(ValueError):
        theta1_schatten(sg, 0.5)


def _gram_min_eig_2x2(a, b, c):
    # closed-form least eigenvalue of [[a, b], [b, c]]
    half_diff = (a - c) / 2
    disc = (half_diff * half_diff + b * b).sqrt()
    return (a + c) * Fraction(1, 2) - disc


def _gram_oracle(system, k):
    """Independent route to the level-k irreducibility constant for 2x2 systems.

    Uses the explicit trace-free symmetric basis {diag(1,-1), offdiag(1,1)}
    (orthonormal for the weight I/2) and the closed-form 2x2 eigenvalue,
    bypassing orthonormal_basis and the generic eigensolver.
    """
    sz = as_matrix([[Fraction(1), 0], [0, Fraction(-1)]], EXACT)
    sx = as_matrix([[0, Fraction(1)], [Fraction(1), 0]], EXACT)
    words = [()]
    for _ in range(k):
        words = [w + (s,) for w in words for s in range(system.n_symbols)]
    g = [[Radical(0)] * 2 for _ in range(2)]
    for w in words:
        m = as_matrix([[Fraction(1), 0], [0, Fraction(1)]], EXACT)
        for s in w:
            m = system.maps[s] @ m
        pw = m.T @ system.energy @ m
        t = [np.trace(pw @ b) for b in (sz, sx)]
        for i in range(2):
            for j in range(2):
                g[i][j] = g[i][j] + t[i] * t[j]
    return _gram_min_eig_2x2(g[0][0], g[0][1], g[1][1])


def test_c1_sg_exact(sg):
    res = c_k(sg, 1)
    assert res.applicable
    assert res.exact == Fraction(8, 75)
    assert res.value == pytest.approx(8 / 75, abs=1e-15)
    assert _gram_oracle(sg, 1) == Fraction(8, 75)


def test_c2_sg_exact(sg):
    res = c_k(sg, 2)
    assert res.exact == Fraction(112, 1875)
    assert _gram_oracle(sg, 2) == Fraction(112, 1875)


def test_c1_sg_float(sg_float):
    res = c_k(sg_float, 1)
    assert res.exact is None
    assert res.value == pytest.approx(8 / 75, abs=1e-12)


def test_c1_unit_probes_never_beat_minimum(sg_float):
    # c_k is a minimum over the unit sphere of a quadratic form
    rng = np.random.default_rng(0)
    c1 = c_k(sg_float, 1).value
    sz = np.array([[1.0, 0.0], [0.0, -1.0]])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    for _ in range(500):
        x = rng.standard_normal(2)
        x /= np.linalg.norm(x)
        f = x[0] * sz + x[1] * sx
        val = sum(
            np.trace(a.T @ sg_float.energy @ a @ f) ** 2 for a in sg_float.maps
        )
        assert val >= c1 - 1e-12


def test_ck_not_applicable_in_dim_one(bern):
    res = c_k(bern, 1)
    assert not res.applicable
    assert res.value is None


def test_ck_rejects_k_zero(sg):
    with pytest.raises(ValueError):
        c_k(sg, 0)


def test_theta2_sg(sg):
    res = theta2(sg, k_max=2)
    assert res.applicable
    assert res.irreducibility_ok
    assert (res.lemma_exact * res.lemma_exact - Radical(Fraction(67, 75))).is_zero()
    assert res.lemma_value == pytest.approx((67 / 75) ** 0.5, abs=1e-15)
    assert res.thm_exact == Fraction(67, 75)
    assert res.c_values[2].exact == Fraction(112, 1875)


def test_theta2_bernoulli(bern):
    res = theta2(bern, k_max=1)
    assert not res.applicable
    assert res.lemma_value is None


def test_spectral_report_sg(sg):
    rep = spectral_report(sg, k_max=2, gamma=0.9)
    assert rep.theta1.exact == Fraction(4, 5)
    assert all(rep.theta1_p[p] == Fraction(4, 5) for p in ("1", "2", "inf"))
    assert rep.rho == 0.9
    assert rep.theta2.thm_exact == Fraction(67, 75)


def _two_symbol_swap_system():
    # diag(sqrt(p), sqrt(q)) and its coordinate swap: valid, symmetric,
    # but the averaging map acts with distinct rates on the two trace-free
    # symmetric directions, so no scalar shortcut applies
    p, q = 0.25, 0.75
    a0 = np.diag([p**0.5, q**0.5])
    a1 = np.diag([q**0.5, p**0.5])
    return make_system(("0", "1"), [a0, a1], np.eye(2) / 2, FLOAT)


def test_theta1_schatten_probe_path():
    sys_ = _two_symbol_swap_system()
    assert validate(sys_).ok
    # rates on the two directions are 1 and 2 sqrt(pq) = sqrt(3)/2
    got = theta1_schatten(sys_, 2, trials=128, seed=4)
    assert 0.99 <= got <= 1.0 + 1e-9
    assert not theta1(sys_).irreducible


def test_renormalize_fixes_sg(sg):
    out = renormalize(sg.maps, EXACT, alphabet=sg.alphabet)
    assert out.alphabet == sg.alphabet
    for a, b in zip(out.maps, sg.maps):
        assert frobenius_sq(a - b).is_zero()
    assert frobenius_sq(out.energy - sg.energy).is_zero()


def _raw_gasket_maps():
    d0 = as_matrix([[Fraction(3, 5), 0], [0, Fraction(1, 5)]], EXACT)
    half = Radical(Fraction(-1, 2))
    s32 = Radical.root(Fraction(3, 4))
    rot = np.empty((2, 2), dtype=object)
    rot[0, 0], rot[0, 1] = half, -s32
    rot[1, 0], rot[1, 1] = s32, half
    d1 = rot @ d0 @ rot.T
    d2 = rot @ d1 @ rot.T
    return [d0, d1, d2]


def test_renormalize_raw_gasket_exact(sg):
    out = renormalize(_raw_gasket_maps(), EXACT)
    report = validate(out)
    assert report.ok
    assert report.invariance_residual == 0.0
    assert theta1(out).exact == Fraction(4, 5)
    m = kusuoka_measure(out)
    assert nu(m, (0,)) == Fraction(1, 3)


def test_renormalize_scale_invariant():
    raws = _raw_gasket_maps()
    base = renormalize(raws, EXACT)
    for t in (Fraction(1, 3), Fraction(2), Fraction(10)):
        scaled = renormalize([Radical(t) * a for a in raws], EXACT)
        for a, b in zip(scaled.maps, base.maps):
            assert frobenius_sq(a - b).is_zero()
        assert frobenius_sq(scaled.energy - base.energy).is_zero()


def test_renormalize_float_path():
    raws = [to_float_matrix(a) for a in _raw_gasket_maps()]
    out = renormalize(raws, FLOAT)
    assert validate(out).ok
    assert theta1(out).value == pytest.approx(0.8, abs=1e-9)


def test_renormalize_rejects_singular():
    bad = [as_matrix([[Fraction(1), 0], [0, Fraction(0)]], EXACT)]
    with pytest.raises(ValueError):
        renormalize(bad, EXACT)


def test_renormalize_rejects_degenerate_fixed_space():
    ident = as_matrix([[Fraction(1), 0], [0, Fraction(1)]], EXACT)
    with pytest.raises(ValueError):
        renormalize([ident], EXACT)


def test_theta1_below_one_whenever_c1_positive(sg, sg3):
    for system in (sg, sg3):
        c1 = c_k(system, 1)
        assert c1.applicable and float(c1.value) > 0
        assert float(theta1(system).value) < 1


def test_averaging_shrinks_top_eigenvalue(sg_float):
    # conjugation-average of a trace-free symmetric matrix never raises
    # the largest eigenvalue
    rng = np.random.default_rng(11)
    for system in (sg_float, generate_system(3, FLOAT)):
        for _ in range(100):
            x = rng.standard_normal(2)
            b = np.array([[x[0], x[1]], [x[1], -x[0]]])
            top_in = np.linalg.eigvalsh(b).max()
            top_out = np.linalg.eigvalsh(apply_M(system, b)).max()
            assert top_out <= top_in + 1e-12


def test_c2_unit_probes_never_beat_minimum(sg_float):
    rng = np.random.default_rng(5)
    c2 = c_k(sg_float, 2).value
    sz = np.array([[1.0, 0.0], [0.0, -1.0]])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    mats = [b @ a for a in sg_float.maps for b in sg_float.maps]
    for _ in range(1000):
        x = rng.standard_normal(2)
        x /= np.linalg.norm(x)
        f = x[0] * sz + x[1] * sx
        val = sum(np.trace(m.T @ sg_float.energy @ m @ f) ** 2 for m in mats)
        assert val >= c2 - 1e-12
