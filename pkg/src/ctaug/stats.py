"""One-sided Wilcoxon signed-rank test over paired fold scores.

Differences are d = x - y with x the baseline scores and y the augmented
scores. The alternative is "augmentation improves scores" (d stochastically
negative), so the test rejects for small W+ (the rank sum of positive
differences): p = P(W+ <= observed) under the symmetric null. Zero
differences are dropped; ties get mid-ranks. The distribution is exact (all
2^n sign assignments, via a rank-sum counting recurrence) for n <= 25 without
ties, otherwise a tie-corrected normal approximation with a 0.5 continuity
correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError

EXACT_LIMIT = 25
DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class PairedScores:
    x: tuple[float, ...]  # baseline (no augmentation)
    y: tuple[float, ...]  # with augmentation

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ValidationError(f"paired lengths differ: {len(self.x)} vs {len(self.y)}")
        if len(self.x) < 1:
            raise ValidationError("need at least one pair")

    def differences(self) -> list[float]:
        return [a - b for a, b in zip(self.x, self.y)]


@dataclass(frozen=True)
class TestResult:
    w_plus: float
    n_effective: int
    p_value: float
    reject_null: bool
    method: str  # "exact" | "normal_approx"


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def _exact_p_at_most(w_obs: int, n: int) -> float:
    """P(W+ <= w_obs) for untied ranks 1..n, by subset-sum counting."""
    max_sum = n * (n + 1) // 2
    counts = [0] * (max_sum + 1)
    counts[0] = 1
    for rank in range(1, n + 1):
        for s in range(max_sum, rank - 1, -1):
            counts[s] += counts[s - rank]
    favorable = sum(counts[: min(w_obs, max_sum) + 1])
    return favorable / (1 << n)


def _normal_p_at_most(w_obs: float, n: int, tie_sizes: Sequence[int]) -> float:
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    var -= sum(t**3 - t for t in tie_sizes) / 48.0
    if var <= 0:
        raise ValidationError("degenerate: zero variance (all differences tied)")
    z = (w_obs - mean + 0.5) / math.sqrt(var)
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def wilcoxon_one_sided(pairs: PairedScores, alpha: float = DEFAULT_ALPHA) -> TestResult:
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    diffs = [d for d in pairs.differences() if d != 0.0]
    n = len(diffs)
    if n == 0:
        raise ValidationError("degenerate: identical scores (all differences zero)")

    abs_diffs = [abs(d) for d in diffs]
    ranks = _midranks(abs_diffs)
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)

    has_ties = len(set(abs_diffs)) != n
    if n <= EXACT_LIMIT and not has_ties:
        p = _exact_p_at_most(int(round(w_plus)), n)
        method = "exact"
    else:
        tie_sizes = [abs_diffs.count(v) for v in set(abs_diffs)]
        p = _normal_p_at_most(w_plus, n, tie_sizes)
        method = "normal_approx"
    p = min(max(p, math.nextafter(0.0, 1.0)), 1.0)
    return TestResult(
        w_plus=w_plus, n_effective=n, p_value=p, reject_null=p < alpha, method=method
    )


@dataclass(frozen=True)
class TableCell:
    key: tuple
    result: TestResult | None
    highlight: bool
    warning: str = ""


def significance_table(
    scores_by_key: dict[tuple, PairedScores], alpha: float = DEFAULT_ALPHA
) -> list[TableCell]:
    """One test per key; degenerate cells become warnings, not failures."""
    cells = []
    for key in sorted(scores_by_key, key=lambda t: tuple(str(v) for v in t)):
        try:
            result = wilcoxon_one_sided(scores_by_key[key], alpha)
            cells.append(TableCell(key=key, result=result, highlight=result.reject_null))
        except ValidationError as exc:
            cells.append(TableCell(key=key, result=None, highlight=False, warning=str(exc)))
    return cells
