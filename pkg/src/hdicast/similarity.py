"""Predictor ranking by Edit Distance on Real sequence (EDR)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hdicast.data_model import AnnualSeries, Panel, zscore_normalize
from hdicast.errors import NegativeEpsilon, NoCandidates, TooShort

DEFAULT_EPSILON = 0.25
DEFAULT_K = 10
DEFAULT_MIN_OVERLAP = 10


def edr_distance(a: Sequence[float], b: Sequence[float], epsilon: float) -> int:
    """Number of edits turning ``a`` into ``b``.

    Two elements match (cost 0) when they differ by at most ``epsilon``;
    mismatches, insertions and deletions each cost 1.
    """
    if epsilon < 0:
        raise NegativeEpsilon(f"epsilon must be >= 0, got {epsilon}")
    a = np.asarray(a, dtype=float).tolist()
    b = np.asarray(b, dtype=float).tolist()
    n, m = len(a), len(b)
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        ai = a[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (1 if abs(ai - b[j - 1]) > epsilon else 0)
            cur[j] = min(sub, prev[j] + 1, cur[j - 1] + 1)
        prev = cur
    return prev[m]


@dataclass(frozen=True)
class FeatureRanking:
    entries: tuple[tuple[str, int], ...]
    selected: tuple[str, ...]
    epsilon: float
    k: int

    def __post_init__(self):
        keys = [(d, code) for code, d in self.entries]
        if keys != sorted(keys):
            raise ValueError("entries must be sorted by (distance, code)")
        if self.selected != tuple(code for code, _ in self.entries[: self.k]):
            raise ValueError("selected must be the first k entries")


def _aligned(target: AnnualSeries, other: AnnualSeries) -> tuple[list[float], list[float]]:
    t_obs, o_obs = target.observed(), other.observed()
    years = sorted(set(t_obs) & set(o_obs))
    return [t_obs[y] for y in years], [o_obs[y] for y in years]


def score_candidate(target: AnnualSeries, candidate: AnnualSeries, epsilon: float,
                    min_overlap: int = DEFAULT_MIN_OVERLAP):
    """EDR between z-normalised co-observed values, or ``None`` if the overlap is too short."""
    t, c = _aligned(target, candidate)
    if len(t) < max(min_overlap, 2):
        return None
    tz = zscore_normalize(AnnualSeries(0, tuple(t))).values
    cz = zscore_normalize(AnnualSeries(0, tuple(c))).values
    return edr_distance(tz, cz, epsilon)


def rank_features(panel: Panel, country: str, epsilon: float = DEFAULT_EPSILON,
                  k: int = DEFAULT_K, min_overlap: int = DEFAULT_MIN_OVERLAP) -> FeatureRanking:
    """Order every candidate indicator by EDR distance to the target (lower first)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    target = panel.target(country)
    if len(target.observed()) < 2:
        raise TooShort(f"target for {country} has fewer than 2 observations")
    scored = []
    for code in panel.indicators_for(country):
        if code == panel.target_code:
            continue
        d = score_candidate(target, panel.series(country, code), epsilon, min_overlap)
        if d is not None:
            scored.append((d, code))
    if not scored:
        raise NoCandidates(f"no indicator shares {min_overlap} observed years with the target for {country}")
    scored.sort()
    entries = tuple((code, d) for d, code in scored)
    return FeatureRanking(entries, tuple(code for code, _ in entries[:k]), epsilon, k)
