import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctaug.errors import ValidationError
from ctaug.stats import PairedScores, significance_table, wilcoxon_one_sided


def enumerate_p_at_most(diffs) -> float:
    """Brute-force oracle: all 2^n sign assignments of the observed |d| ranks."""
    n = len(diffs)
    abs_d = [abs(d) for d in diffs]
    order = sorted(range(n), key=lambda i: abs_d[i])
    ranks = [0.0] * n
    for pos, idx in enumerate(order):
        ranks[idx] = pos + 1.0
    w_obs = sum(r for r, d in zip(ranks, diffs) if d > 0)
    count = 0
    for signs in itertools.product((0, 1), repeat=n):
        w = sum(r for r, s in zip(ranks, signs) if s)
        if w <= w_obs + 1e-12:
            count += 1
    return count / 2**n


def pairs_from_diffs(diffs) -> PairedScores:
    return PairedScores(x=tuple(diffs), y=tuple(0.0 for _ in diffs))


def test_spec_examples():
    r = wilcoxon_one_sided(pairs_from_diffs([-1, -2, -3]), alpha=0.05)
    assert r.w_plus == 0 and r.method == "exact"
    assert r.p_value == 0.125
    assert not r.reject_null

    r = wilcoxon_one_sided(pairs_from_diffs([-1, -2, -3, -4, -5]), alpha=0.05)
    assert r.p_value == 0.03125
    assert r.reject_null

    with pytest.raises(ValidationError, match="degenerate"):
        wilcoxon_one_sided(PairedScores(x=(1.0, 2.0), y=(1.0, 2.0)))


def test_exact_matches_enumeration_oracle():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n = int(rng.integers(3, 13))
        # tie-free magnitudes
        mags = rng.permutation(np.arange(1, n + 1)).astype(float)
        signs = rng.choice([-1.0, 1.0], size=n)
        diffs = (mags * signs).tolist()
        expected = enumerate_p_at_most(diffs)
        got = wilcoxon_one_sided(pairs_from_diffs(diffs)).p_value
        assert got == expected, (diffs, got, expected)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(
        st.integers(min_value=1, max_value=1000), min_size=3, max_size=10, unique=True
    ),
    st.integers(min_value=0, max_value=1023),
)
def test_exact_oracle_property(mags, sign_bits):
    diffs = [m if (sign_bits >> i) & 1 else -m for i, m in enumerate(mags)]
    got = wilcoxon_one_sided(pairs_from_diffs(diffs)).p_value
    assert got == enumerate_p_at_most(diffs)


def test_zero_differences_dropped():
    r = wilcoxon_one_sided(pairs_from_diffs([0.0, -1.0, 0.0, -2.0, -3.0]))
    assert r.n_effective == 3
    assert r.p_value == 0.125


def test_swap_symmetry_by_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(20):
        mags = rng.permutation(np.arange(1, 5)).astype(float)
        signs = rng.choice([-1.0, 1.0], size=4)
        d = mags * signs
        x = tuple(d)
        y = tuple(0.0 for _ in d)
        p_xy = wilcoxon_one_sided(PairedScores(x=x, y=y)).p_value
        # Swapping roles flips the tested tail: W+ of (y,x) is W- of (x,y).
        p_yx = wilcoxon_one_sided(PairedScores(x=y, y=x)).p_value
        assert p_yx == enumerate_p_at_most([-v for v in d])
        assert p_xy == enumerate_p_at_most(list(d))


def test_monotonicity_more_negative_never_raises_p():
    base = [-1.0, -2.0, 3.0, -4.0]
    r0 = wilcoxon_one_sided(pairs_from_diffs(base)).p_value
    worse = [-10.0, -20.0, 3.0, -40.0]  # negatives more negative, ranks shift
    r1 = wilcoxon_one_sided(pairs_from_diffs(worse)).p_value
    assert r1 <= r0


def test_ties_use_normal_approximation():
    r = wilcoxon_one_sided(pairs_from_diffs([-1.0, -1.0, -2.0, -3.0, 4.0, -5.0]))
    assert r.method == "normal_approx"
    assert 0.0 < r.p_value <= 1.0


def test_large_n_uses_normal_and_tracks_exact():
    rng = np.random.default_rng(11)
    diffs = (rng.permutation(np.arange(1, 31)) * rng.choice([-1.0, 1.0], size=30)).tolist()
    r = wilcoxon_one_sided(pairs_from_diffs(diffs))
    assert r.method == "normal_approx"
    # scipy cross-check of the one-sided 'greater' tail on x-y ... our p is
    # P(W+ <= obs) which equals scipy's 'less' alternative on d.
    scipy_stats = pytest.importorskip("scipy.stats")
    ref = scipy_stats.wilcoxon(diffs, alternative="less", correction=True, method="approx")
    assert r.p_value == pytest.approx(ref.pvalue, rel=1e-6)


def test_significance_table_flags_and_warnings():
    table = significance_table(
        {
            ("ElasticTransform", "0.3", "zen"): pairs_from_diffs([-1, -2, -3, -4, -5]),
            ("Flip", "0.1", "zen"): PairedScores(x=(1.0,), y=(1.0,)),
        },
        alpha=0.05,
    )
    assert len(table) == 2
    flagged = {cell.key: cell for cell in table}
    good = flagged[("ElasticTransform", "0.3", "zen")]
    assert good.highlight and good.result.p_value == 0.03125
    bad = flagged[("Flip", "0.1", "zen")]
    assert not bad.highlight and bad.result is None and "degenerate" in bad.warning
    assert significance_table({}) == []


def test_alpha_validation():
    with pytest.raises(ValidationError):
        wilcoxon_one_sided(pairs_from_diffs([-1.0]), alpha=1.5)
