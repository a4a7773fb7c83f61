"""
polar_process.py - The random channel tree process and its checks

WHAT THIS FILE DOES:
Picture walking down the construction tree from the physical channel W,
choosing a child at random at every level. Group i of a kernel is chosen
with probability m_i / L (its share of the kernel's input bits), which for
g1 is (1/4, 1/2, 1/4) and for g2 is uniform. After the first glued branch
(at step T) every later channel is quaternary.

This file:
1. Samples such paths, with exact channel states from erasure DE
2. Samples long branch sequences cheaply for the time-average check
3. Checks the properties the construction is known to have, exactly over
   the whole DE tree:
      - I_n = I(W_n) / N_n is a martingale
      - channels polarize (mass with I_n in (delta, 1 - delta) shrinks)
      - Z_n <= 2^(-4^(beta n)) with probability tending to I(W) for small beta
      - Z_max / Z_min of a child are bounded by powers of the parent's

LEARNING MOMENT: Weights of Tree Nodes
The probability that the walk ends in a given leaf is width / N, so every
"probability" below is a width-weighted count over synthesized channels.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from channels.erasure_de import (
    DEResult, SubgroupStateDist, bec_base_state, de_evolve, de_split, state_metrics,
)
from coding.construction import build_layout, get_scheme
from coding.kernels import (
    GROUP_BOUND_CONSTANTS, UNIFORM_BOUND_CONSTANTS, Kernel, exponent_bounds, partial_distances,
)
from rng import make_stream

logger = logging.getLogger(__name__)

# Below this many steps the time average is dominated by the pre-glue phase
SLLN_MIN_STEPS = 100

# Slack on log2 comparisons; DE values carry a few ulps of rounding
LOG_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BoundConstants:
    c1: float = UNIFORM_BOUND_CONSTANTS[0]
    c2: float = UNIFORM_BOUND_CONSTANTS[1]


# =============================================================================
# SAMPLED PATHS
# =============================================================================

@dataclass(frozen=True)
class ProcessStep:
    """
    W_n and the branch B_n taken from it (None at the last step).

    d_hat / d_check are the smallest / largest partial distance of the
    chosen branch.
    """
    n: int
    width: int
    state: SubgroupStateDist
    I: float
    Z: float
    branch: Optional[Tuple[int, ...]] = None
    d_hat: Optional[int] = None
    d_check: Optional[int] = None


@dataclass(frozen=True)
class ProcessPath:
    steps: Tuple[ProcessStep, ...]
    T: Optional[int]

    @property
    def widths(self) -> List[int]:
        return [s.width for s in self.steps]


def _branch_probabilities(k: Kernel) -> np.ndarray:
    return np.array(k.input_groups, dtype=np.float64) / k.total_bits


def sample_path(epsilon: float, n_max: int, seed: int, scheme: str = 'mixed',
                index: int = 0) -> ProcessPath:
    """
    One path W_0, W_1, ..., W_n_max of the tree process over BEC(epsilon).

    T is the first n whose branch B_n is glued (None if it never happens
    within n_max steps), so N_n = 1 for n <= T and 2 after.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    plan = get_scheme(scheme)
    rng = make_stream(seed, 'process', index)
    state = bec_base_state(epsilon, plan.base_width)
    steps: List[ProcessStep] = []
    T = None
    for n in range(n_max + 1):
        metrics = state_metrics(state)
        step = dict(n=n, width=state.width, state=state, I=metrics.I / state.width, Z=metrics.Z)
        if n == n_max:
            steps.append(ProcessStep(**step))
            break
        k = plan.pick(n + 1, state.width)
        group = int(rng.choice(len(k.input_groups), p=_branch_probabilities(k)))
        dist = partial_distances(k)
        if T is None and k.input_groups[group] > state.width:
            T = n
        steps.append(ProcessStep(
            **step,
            branch=k.group_label(group),
            d_hat=dist.d_min[group],
            d_check=dist.d_max[group],
        ))
        state = de_split(k, state, group)
    return ProcessPath(steps=tuple(steps), T=T)


@dataclass(frozen=True, eq=False)
class BranchSequences:
    """
    groups[p, n]: branch index of path p at step n
    widths[p, n]: symbol width of W_n on path p
    log_d_hat[p, n]: log_ell of the chosen branch's smallest partial distance
    T[p]: first glued step, -1 if none
    """
    groups: np.ndarray
    widths: np.ndarray
    log_d_hat: np.ndarray
    T: np.ndarray


def sample_branch_sequences(n_steps: int, paths: int, seed: int, scheme: str = 'mixed',
                            force_pre_tail: bool = False) -> BranchSequences:
    """
    Many branch sequences at once, without channel states.

    force_pre_tail keeps every path on the base-width law: branches are
    drawn as before but the walk never moves to glued channels (T = infinity).
    """
    plan = get_scheme(scheme)
    rng = make_stream(seed, 'slln', 0)
    width = np.full(paths, plan.base_width, dtype=np.int64)
    groups = np.zeros((paths, n_steps), dtype=np.int64)
    widths = np.zeros((paths, n_steps), dtype=np.int64)
    log_d = np.zeros((paths, n_steps))
    T = np.full(paths, -1, dtype=np.int64)

    for n in range(n_steps):
        draws = rng.random(paths)
        widths[:, n] = width
        next_width = width.copy()
        for w in np.unique(width):
            rows = width == w
            k = plan.pick(n + 1, int(w))
            dist = partial_distances(k)
            group_widths = np.array(k.input_groups)
            probs = _branch_probabilities(k)
            chosen = np.searchsorted(np.cumsum(probs), draws[rows], side='right')
            chosen = np.minimum(chosen, len(probs) - 1)
            groups[rows, n] = chosen
            log_d[rows, n] = np.log(np.array(dist.d_min, dtype=np.float64))[chosen] / np.log(k.ell)
            if not force_pre_tail:
                next_width[rows] = group_widths[chosen]
        glued = (next_width > width) & (T < 0)
        T[glued] = n
        width = next_width
    return BranchSequences(groups=groups, widths=widths, log_d_hat=log_d, T=T)


# =============================================================================
# EXACT CHECKS OVER THE DE TREE
# =============================================================================

def _mixed_de(epsilon: float, n: int) -> DEResult:
    return de_evolve(build_layout('mixed', n), epsilon)


def information_means(de: DEResult) -> List[float]:
    """Width-weighted E[I_n] at every level; each equals 1 - epsilon."""
    return [de.mean_information(level) for level in range(de.layout.depth + 1)]


def martingale_check(epsilon: float, n: int, scheme: str = 'mixed') -> float:
    """
    Largest |E[I_child / width | parent] - I_parent / width| over the tree.
    """
    de = de_evolve(build_layout(scheme, n), epsilon)
    layout = de.layout
    worst = 0.0
    for level in range(layout.depth):
        for ch in layout.levels[level]:
            k = layout.kernel_for(ch)
            parent_i = state_metrics(de.state_of(ch)).I / ch.width
            probs = _branch_probabilities(k)
            mean = sum(
                p * state_metrics(de.state_of(child)).I / child.width
                for p, child in zip(probs, layout.children(ch))
            )
            worst = max(worst, abs(mean - parent_i))
    logger.info(f"Martingale check n={n}, epsilon={epsilon}: max deviation {worst:.3e}")
    return worst


def polarization_fraction(epsilon: float, n: int, delta: float, scheme: str = 'mixed') -> float:
    """Weighted mass of synthesized channels with delta < I_n < 1 - delta."""
    de = de_evolve(build_layout(scheme, n), epsilon)
    N = de.layout.block_bits
    mass = 0.0
    for prof in de.channels:
        i_norm = prof.metrics.I / prof.width
        if delta < i_norm < 1.0 - delta:
            mass += prof.width / N
    return mass


@dataclass(frozen=True)
class RateReport:
    """
    mass_below: weighted mass with Z_n <= 2^(-4^(beta n))
    mass_above: weighted mass with Z_n >= the same threshold
    """
    beta: float
    n: int
    epsilon: float
    mass_below: float
    mass_above: float
    capacity: float
    e1: float
    e2: float


def rate_of_polarization_check(epsilon: float, n: int, beta: float) -> RateReport:
    """
    Mass of mixed-scheme channels whose Z is below 2^(-4^(beta n)).

    For beta below E1(g2) this tends to I(W) = 1 - epsilon; above E2(g2) it
    tends to 0. The comparison is made on log2 Z, so channels far below
    float64's range still count.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    de = _mixed_de(epsilon, n)
    N = de.layout.block_bits
    threshold = -(4.0 ** (beta * n))
    below = above = 0.0
    for prof in de.channels:
        log2_z = prof.metrics.log2_z
        if log2_z <= threshold:
            below += prof.width / N
        if log2_z >= threshold:
            above += prof.width / N
    aux = exponent_bounds(get_scheme('mixed').pick(2, 2))
    return RateReport(
        beta=beta, n=n, epsilon=epsilon,
        mass_below=below, mass_above=above,
        capacity=1.0 - epsilon, e1=aux.e1, e2=aux.e2,
    )


@dataclass(frozen=True)
class SLLNReport:
    n_steps: int
    paths: int
    mean: float
    dispersion: float
    limit: float
    histogram: Tuple[int, ...] = field(default=())
    bin_edges: Tuple[float, ...] = field(default=())


def slln_tail_check(n_steps: int, paths: int, seed: int, scheme: str = 'mixed',
                    force_pre_tail: bool = False, bins: int = 20) -> SLLNReport:
    """
    Time average (1/n) sum log_ell D_hat_i over many sampled paths.

    After the glued transition the average converges to E1 of the auxiliary
    kernel; with force_pre_tail the walk never glues and it converges to the
    width-1 kernel's exponent instead.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be at least 1, got {n_steps}")
    if n_steps < SLLN_MIN_STEPS:
        logger.warning(f"n_steps={n_steps} is short; time averages are still far from their limit")
    seqs = sample_branch_sequences(n_steps, paths, seed, scheme, force_pre_tail)
    averages = seqs.log_d_hat.mean(axis=1)
    counts, edges = np.histogram(averages, bins=bins, range=(0.0, 1.0))

    plan = get_scheme(scheme)
    tail_width = plan.base_width if force_pre_tail else 2
    tail_kernel = plan.pick(2, tail_width) or plan.pick(2, plan.base_width)
    limit = exponent_bounds(tail_kernel).e1
    return SLLNReport(
        n_steps=n_steps,
        paths=paths,
        mean=float(averages.mean()),
        dispersion=float(averages.std()),
        limit=limit,
        histogram=tuple(int(c) for c in counts),
        bin_edges=tuple(float(e) for e in edges),
    )


@dataclass(frozen=True)
class ZBoundReport:
    edges: int
    violations: int
    worst_upper_gap: float
    worst_lower_gap: float


def z_bound_check(epsilon: float, n: int, per_group: bool = False,
                  constants: BoundConstants = BoundConstants()) -> ZBoundReport:
    """
    Check Z_max(child) <= c1 Z_max(parent)^D_min and
    Z_min(child) >= c2 Z_min(parent)^D_max on every edge of the mixed tree.

    per_group uses the finer constants of each kernel's input group instead
    of the uniform (4^3, 4^-6). Gaps are log2(rhs) - log2(lhs) for the upper
    bound and the reverse for the lower; negative means violated.
    """
    de = _mixed_de(epsilon, n)
    layout = de.layout
    edges = violations = 0
    worst_upper = worst_lower = math.inf
    for level in range(layout.depth):
        for ch in layout.levels[level]:
            k = layout.kernel_for(ch)
            dist = partial_distances(k)
            parent = state_metrics(de.state_of(ch))
            for group, child in enumerate(layout.children(ch)):
                c1, c2 = (GROUP_BOUND_CONSTANTS[k.name][group] if per_group
                          else (constants.c1, constants.c2))
                metrics = state_metrics(de.state_of(child))
                edges += 1

                upper_rhs = math.log2(c1) + dist.d_min[group] * parent.log2_z_max
                upper_gap = _gap(upper_rhs, metrics.log2_z_max)
                lower_rhs = math.log2(c2) + dist.d_max[group] * parent.log2_z_min
                lower_gap = _gap(metrics.log2_z_min, lower_rhs)

                worst_upper = min(worst_upper, upper_gap)
                worst_lower = min(worst_lower, lower_gap)
                if upper_gap < -LOG_TOLERANCE or lower_gap < -LOG_TOLERANCE:
                    violations += 1
                    logger.debug(f"Z bound violated at level {level + 1}, position {child.position}")
    logger.info(f"Z-bound check n={n}, epsilon={epsilon}: {violations} violations over {edges} edges")
    return ZBoundReport(edges=edges, violations=violations,
                        worst_upper_gap=worst_upper, worst_lower_gap=worst_lower)


def _gap(larger: float, smaller: float) -> float:
    """larger - smaller on log2 values, with -inf on both sides counting as equal."""
    if smaller == -math.inf:
        return math.inf
    if larger == -math.inf:
        return -math.inf
    return larger - smaller
