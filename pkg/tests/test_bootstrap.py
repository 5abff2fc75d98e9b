import numpy as np
import pytest

from horofill import bootstrap as bs


def test_brick_bound_validation():
    with pytest.raises(ValueError):
        bs.BrickBound(k1=0.0, k2=1.0, p=3.0)
    with pytest.raises(ValueError):
        bs.BrickBound(k1=1.0, k2=1.0, p=1.5)


def test_mixed_area_bound_values():
    b = bs.BrickBound(1.0, 1.0, 3.0)
    assert bs.mixed_area_bound(b, 1.0, 1.0) == 2.0
    assert abs(bs.mixed_area_bound(b, 2.0, 1.0) - (8 + 4)) < 1e-12
    with pytest.raises(ValueError):
        bs.mixed_area_bound(b, -1.0, 1.0)


def test_mixed_area_monotonicity():
    b = bs.BrickBound(1.3, 0.7, 2.5)
    rng = np.random.default_rng(0)
    for _ in range(100):
        l = rng.uniform(0.5, 50)
        lam = rng.uniform(0.1, 5)
        assert bs.mixed_area_bound(b, l * 1.1, lam) > bs.mixed_area_bound(b, l, lam)
        assert bs.mixed_area_bound(b, l, lam * 1.1) < bs.mixed_area_bound(b, l, lam)


def test_balanced_terms_cubic_gives_order_2_5():
    """At lam = l/M with l ~ sqrt(M), the bound is of order M^2.5."""
    b = bs.BrickBound(1.0, 1.0, 3.0)
    for M in (10.0, 100.0, 1e4, 1e6):
        t1, t2 = bs.balanced_terms(b, M)
        total = t1 + t2
        assert 0.1 <= total / M**2.5 <= 10.0
        assert 0.1 <= t1 / t2 <= 10.0


def test_mixed_bound_order_2_5_window():
    """Across the whole window sqrt(M) <= l <= 2 sqrt(M) at lam = l/M."""
    b = bs.BrickBound(1.0, 1.0, 3.0)
    C = 3.0  # 2*k1 + k2 for this window
    for M in (10.0, 1e3, 1e6):
        for c in (1.0, 1.5, 2.0):
            l = c * np.sqrt(M)
            assert bs.mixed_area_bound(b, l, l / M) <= C * M**2.5 + 1e-9


def test_balanced_terms_eps_gives_improved_order():
    b = bs.BrickBound(1.0, 1.0, 2.5)
    eps = 0.5
    for M in (10.0, 1e3, 1e6):
        t1, t2 = bs.balanced_terms(b, M, eps=eps)
        order = 2 + eps - eps**2 / 2
        assert (t1 + t2) / M**order <= 10.0


def test_exponent_step_values():
    assert bs.exponent_step(1.0) == 0.5
    assert bs.exponent_step(0.0) == 0.0
    assert bs.exponent_step(0.5) == 0.375
    with pytest.raises(ValueError):
        bs.exponent_step(1.5)


def test_exponent_step_strictly_improves():
    for x in np.linspace(1e-6, 1.0, 200):
        y = bs.exponent_step(x)
        assert y < x
        assert y >= x / 2


def test_bootstrap_sequences():
    seq, steps = bs.bootstrap(1.0, 0.5)
    assert steps == 1 and seq == [0.5]
    seq, steps = bs.bootstrap(0.0, 0.5)
    assert steps == 0 and seq == []
    seq, steps = bs.bootstrap(1.0, 0.01)
    assert all(a > b for a, b in zip(seq, seq[1:]))
    assert seq[-1] <= 0.01
    # asymptotically ~ 2/tol steps
    assert 100 < steps < 400


def test_bootstrap_validation():
    with pytest.raises(ValueError):
        bs.bootstrap(2.0, 0.1)
    with pytest.raises(ValueError):
        bs.bootstrap(0.5, 0.0)
