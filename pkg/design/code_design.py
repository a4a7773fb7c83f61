"""
code_design.py - Information sets and union-bound curves

WHAT THIS FILE DOES:
Given the exact DE profile of a layout, picks which synthesized channels
carry data (the information set) and bounds the block error probability by
the sum of their error probabilities. Sweeping the rate gives the
block-error-versus-rate curves that compare the three schemes.

LEARNING MOMENT: Glued Channels Are Atomic
A glued channel carries two bits decided as one quaternary symbol, so it
is either fully information or fully frozen. Reaching exactly K bits is
then a small knapsack problem with item sizes 1 and 2. Two strategies:

    greedy    walk channels by ascending P_e; if the last pick overshoots
              by one bit, swap it for the best unused single-bit channel
    balanced  for every count j of glued channels, take the j best glued
              channels and the K - 2j best single ones; keep the cheapest.
              This is exact for sizes {1, 2} (the default)
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from channels.erasure_de import ChannelProfile, DEResult, de_evolve
from coding.construction import Layout, build_layout

logger = logging.getLogger(__name__)

STRATEGIES = ('balanced', 'greedy')


@dataclass(frozen=True)
class InformationSet:
    """
    Selected channels by position in the layout's final level.

    K is the number of information bits actually selected; target_K is what
    was asked for. exact is False when K had to move to the nearest
    achievable value.
    """
    selected: Tuple[int, ...]
    frozen: Tuple[int, ...]
    K: int
    target_K: int
    exact: bool
    frozen_values: Tuple[int, ...] = field(default=())

    def info_mask(self, layout: Layout) -> np.ndarray:
        """Boolean mask over u marking information bits."""
        mask = np.zeros(layout.block_bits, dtype=bool)
        leaves = layout.channels
        for pos in self.selected:
            ch = leaves[pos]
            mask[ch.start:ch.start + ch.width] = True
        return mask


def _sort_key(prof: ChannelProfile, metric: str):
    return (prof.pe(metric), prof.position)


def _finish(profiles: Sequence[ChannelProfile], chosen: List[int], target_K: int) -> InformationSet:
    chosen_set = set(chosen)
    K = sum(profiles[p].width for p in chosen_set)
    frozen = tuple(p.position for p in profiles if p.position not in chosen_set)
    frozen_bits = sum(profiles[p].width for p in frozen)
    if K != target_K:
        logger.warning(f"K={target_K} is not reachable with atomic glued channels; using K={K}")
    return InformationSet(
        selected=tuple(sorted(chosen_set)),
        frozen=frozen,
        K=K,
        target_K=target_K,
        exact=K == target_K,
        frozen_values=(0,) * frozen_bits,
    )


def _balanced(profiles: Sequence[ChannelProfile], K: int, metric: str) -> Optional[List[int]]:
    singles = sorted((p for p in profiles if p.width == 1), key=lambda p: _sort_key(p, metric))
    pairs = sorted((p for p in profiles if p.width == 2), key=lambda p: _sort_key(p, metric))
    s1 = np.concatenate([[0.0], np.cumsum([p.pe(metric) for p in singles])])
    s2 = np.concatenate([[0.0], np.cumsum([p.pe(metric) for p in pairs])])
    best = None
    for j in range(min(len(pairs), K // 2) + 1):
        rest = K - 2 * j
        if rest > len(singles):
            continue
        cost = s2[j] + s1[rest]
        if best is None or cost < best[0]:
            best = (cost, j)
    if best is None:
        return None
    j = best[1]
    return [p.position for p in pairs[:j]] + [p.position for p in singles[:K - 2 * j]]


def _greedy(profiles: Sequence[ChannelProfile], K: int, metric: str) -> List[int]:
    ordered = sorted(profiles, key=lambda p: _sort_key(p, metric))
    chosen: List[ChannelProfile] = []
    total = 0
    for prof in ordered:
        if total >= K:
            break
        chosen.append(prof)
        total += prof.width
    if total == K + 1 and chosen[-1].width == 2:
        dropped = chosen.pop()
        picked = {p.position for p in chosen}
        spare = [p for p in ordered if p.width == 1 and p.position not in picked]
        if spare:
            chosen.append(spare[0])
        logger.debug(f"Greedy repair: dropped glued channel {dropped.position}")
    return [p.position for p in chosen]


def _achievable(profiles: Sequence[ChannelProfile], K: int) -> int:
    """Nearest K' = 2j + s with j glued and s single channels; ties go down."""
    singles = sum(1 for p in profiles if p.width == 1)
    pairs = sum(1 for p in profiles if p.width == 2)
    K = min(K, 2 * pairs + singles)
    if singles == 0 and K % 2:
        return K - 1
    return K


def select_information_set(de: DEResult, K: int, strategy: str = 'balanced',
                           metric: str = 'ambiguous') -> InformationSet:
    """
    Choose channels carrying K information bits.

    Args:
        de: DE profile of the layout
        K: Target number of information bits, 0 <= K <= N
        strategy: 'balanced' (exact, default) or 'greedy' (with one-bit repair)
        metric: Which P_e ranks channels: 'ambiguous' or 'guess'

    Returns:
        InformationSet; exact=False when K was moved to the nearest
        achievable value
    """
    N = de.layout.block_bits
    if not 0 <= K <= N:
        raise ValueError(f"K must be between 0 and N={N}, got {K}")
    if strategy not in STRATEGIES:
        raise ValueError(f"Unknown selection strategy '{strategy}' (use {' or '.join(STRATEGIES)})")
    profiles = de.channels

    reachable = _achievable(profiles, K)
    if strategy == 'greedy':
        return _finish(profiles, _greedy(profiles, reachable, metric), K)
    return _finish(profiles, _balanced(profiles, reachable, metric), K)


def block_error_bound(de: DEResult, s: InformationSet, metric: str = 'ambiguous') -> float:
    """Union bound: sum of P_e over selected channels, one term per channel."""
    profiles = de.channels
    return float(sum(profiles[p].pe(metric) for p in s.selected))


# =============================================================================
# CURVES
# =============================================================================

@dataclass(frozen=True)
class CurvePoint:
    scheme: str
    N: int
    epsilon: float
    rate: float
    K: int
    bound: float
    union_sum: float
    exact: bool


def rate_to_k(rate: float, N: int) -> int:
    """K = round(R N), halves rounded up."""
    return int(np.floor(rate * N + 0.5))


def curve_from_de(de: DEResult, rate_grid: Sequence[float], strategy: str = 'balanced',
                  metric: str = 'ambiguous') -> List[CurvePoint]:
    """
    Union bound at every rate of the grid for an existing DE profile.

    The reported bound is min(1, union sum); the raw sum is kept alongside.
    """
    points = []
    N = de.layout.block_bits
    for rate in rate_grid:
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"Rates must lie in [0, 1], got {rate}")
        info = select_information_set(de, rate_to_k(rate, N), strategy, metric)
        total = block_error_bound(de, info, metric)
        points.append(CurvePoint(
            scheme=de.layout.scheme,
            N=N,
            epsilon=de.epsilon,
            rate=float(rate),
            K=info.K,
            bound=min(1.0, total),
            union_sum=total,
            exact=info.exact,
        ))
        logger.debug(f"{de.layout.scheme} R={rate:.3f}: K={info.K}, bound={total:.3e}")
    logger.info(f"Curve for {de.layout.scheme} N={N}: {len(points)} points")
    return points


def rate_curve(scheme: str, n: int, epsilon: float, rate_grid: Sequence[float],
               strategy: str = 'balanced', metric: str = 'ambiguous') -> List[CurvePoint]:
    """Build the layout, run DE over BEC(epsilon) and evaluate the curve."""
    de = de_evolve(build_layout(scheme, n), epsilon)
    return curve_from_de(de, rate_grid, strategy, metric)


def rate_at_bound(de: DEResult, target: float, metric: str = 'ambiguous') -> float:
    """
    Largest rate K/N whose union bound stays at or below target.

    Uses binary search over K, relying on the bound growing with K.
    """
    N = de.layout.block_bits
    profiles = de.channels

    def bound_at(K: int) -> float:
        chosen = _balanced(profiles, _achievable(profiles, K), metric)
        return float(sum(profiles[p].pe(metric) for p in chosen))

    lo, hi = 0, N
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if bound_at(mid) <= target:
            lo = mid
        else:
            hi = mid - 1
    return lo / N
