import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from csfsim.core import (
    DomainError,
    difference_win_pct,
    expected_wins,
    james_win_pct,
    logistic,
    luck,
    tullock_win_pct,
)

runs = st.floats(min_value=1.0, max_value=5000.0)
alphas = st.floats(min_value=0.05, max_value=20.0)
betas = st.floats(min_value=1e-5, max_value=0.05)


def test_tullock_examples():
    assert tullock_win_pct(650, 650, 2) == 0.5
    assert tullock_win_pct(800, 600, 2) == pytest.approx(0.64, abs=1e-15)
    # mpmath, 40 digits: (4/3)^1.72 / (1 + (4/3)^1.72)
    assert tullock_win_pct(800, 600, 1.72) == pytest.approx(0.6212396336436771, abs=1e-12)


def test_james_is_tullock_at_two():
    assert james_win_pct(650, 650) == 0.5
    assert james_win_pct(800, 600) == pytest.approx(0.64, abs=1e-15)
    rs = np.linspace(300, 1000, 50)
    assert np.array_equal(james_win_pct(rs, 700.0), tullock_win_pct(rs, 700.0, 2.0))


def test_difference_examples():
    assert difference_win_pct(700, 700, 0.01) == 0.5
    # mpmath: 1 / (1 + exp(-0.3))
    assert difference_win_pct(750, 650, 0.003) == pytest.approx(0.5744425168116590, abs=1e-12)
    assert difference_win_pct(700, 800, 0.003) == pytest.approx(1 - difference_win_pct(800, 700, 0.003), abs=1e-15)


@pytest.mark.parametrize(
    "call",
    [
        lambda: tullock_win_pct(0, 600, 2),
        lambda: tullock_win_pct(600, -1, 2),
        lambda: tullock_win_pct(600, 600, 0),
        lambda: difference_win_pct(600, 600, -0.003),
        lambda: difference_win_pct(600, 600, 0.0),
        lambda: expected_wins(1.0, 162),
        lambda: expected_wins(0.5, 0),
    ],
)
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_difference_saturates_without_hitting_bounds():
    hi = difference_win_pct(1.0 + 700 / 0.01, 1.0, 0.01)
    lo = difference_win_pct(1.0, 1.0 + 700 / 0.01, 0.01)
    assert 0 < lo < 1e-300
    assert 0.999 < hi < 1.0
    assert math.isfinite(math.log(hi / (1 - hi)))


def test_large_alpha_does_not_overflow():
    # 5000**400 overflows a double; the log-space form does not
    p = tullock_win_pct(5000, 4000, 400)
    assert 0.999 < p < 1.0


def test_expected_wins_and_luck():
    assert expected_wins(0.5, 162) == 81.0
    assert expected_wins(0.64, 100) == pytest.approx(64.0)
    assert expected_wins(0.621245, 162) == pytest.approx(100.6417, abs=1e-3)
    assert luck(90, 90) == 0
    assert luck(88, 85.5) == 2.5
    assert luck(70, 75.5) == -5.5


@given(runs, runs, alphas)
def test_tullock_complement(rs, ra, a):
    assert tullock_win_pct(rs, ra, a) + tullock_win_pct(ra, rs, a) == pytest.approx(1.0, abs=1e-12)


@given(runs, runs, betas)
def test_difference_complement(rs, ra, b):
    assert difference_win_pct(rs, ra, b) + difference_win_pct(ra, rs, b) == pytest.approx(1.0, abs=1e-12)


@given(runs, runs, alphas, st.floats(min_value=1e-3, max_value=1e3))
def test_tullock_scale_invariance(rs, ra, a, c):
    assert tullock_win_pct(c * rs, c * ra, a) == pytest.approx(tullock_win_pct(rs, ra, a), abs=1e-12)


@given(runs, runs, betas, st.floats(min_value=-0.99, max_value=1e4))
def test_difference_translation_invariance(rs, ra, b, frac):
    c = frac * min(rs, ra) if frac < 0 else frac
    assert difference_win_pct(rs + c, ra + c, b) == pytest.approx(difference_win_pct(rs, ra, b), abs=1e-12)


@given(runs, runs, alphas, betas)
def test_monotonicity(rs, ra, a, b):
    for f, p in ((tullock_win_pct, a), (difference_win_pct, b)):
        base = f(rs, ra, p)
        # strict increase is only visible in float64 away from saturation
        assume(1e-8 < base < 1 - 1e-8)
        assert f(rs + 1.0, ra, p) > base
        assert f(rs, ra + 1.0, p) < base


def test_monotone_strict_on_grid():
    rs = np.linspace(400, 1000, 601)
    for p in (tullock_win_pct(rs, 700, 1.8), difference_win_pct(rs, 700, 0.003)):
        assert np.all(np.diff(p) > 0)
    for p in (tullock_win_pct(700, rs, 1.8), difference_win_pct(700, rs, 0.003)):
        assert np.all(np.diff(p) < 0)


def test_noise_limit():
    ps = [tullock_win_pct(900, 500, a) for a in (1.0, 0.1, 1e-3, 1e-6, 1e-9)]
    assert all(abs(p - 0.5) > abs(q - 0.5) for p, q in zip(ps, ps[1:]))
    assert ps[-1] == pytest.approx(0.5, abs=1e-9)


def test_logistic_vectorized_matches_scalar():
    z = np.linspace(-50, 50, 101)
    assert np.allclose(logistic(z), [logistic(v) for v in z], rtol=0, atol=0)
