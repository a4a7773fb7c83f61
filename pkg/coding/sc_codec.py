"""
sc_codec.py - Successive-cancellation decoding and Monte-Carlo block error rate

WHAT THIS FILE DOES:
1. Turns channel outputs into likelihood vectors (one per channel use)
2. Decodes recursively over the layout tree: at every node the kernel is
   "undone" one input group at a time, deciding each synthesized channel in
   the order its inputs appear in u
3. Runs many random blocks over a BEC to estimate the block error rate

HOW ONE KERNEL STEP WORKS:
For input group i, with groups 1..i-1 already decided, the likelihood of
symbol s is

    sum over later groups w of prod_t lv_t[x_t],   x = (decided, s, w) G

Glued groups are decided as one quaternary symbol, never bit by bit.

LEARNING MOMENT: Batching
Every array carries leading batch dimensions, so a whole chunk of
Monte-Carlo blocks walks through the tree together. Decisions never mix
between blocks; batching only saves Python overhead.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from algebra.gf2 import project_solution_subgroup, solve_affine
from channels.dmc import DMC
from coding.construction import Channel, Layout, encode, equivalent_generator_matrix
from coding.kernels import Kernel
from config import DEFAULT_THREADS, SIMULATION_CHUNK
from design.code_design import InformationSet
from errors import ChannelError, LayoutError
from rng import make_stream

logger = logging.getLogger(__name__)

# Entries within this relative distance of the maximum count as tied
TIE_TOLERANCE = 1e-9


def symbol_likelihoods(W: DMC, outputs) -> np.ndarray:
    """
    Likelihood vector of one symbol sent over len(outputs) uses of W.
    A single letter (label or index) stands for one use.

    Bit j of the symbol (least significant first) went through use j, so a
    width-2 symbol observed as ('0', '?') gives (1-e, 0, 1-e, 0) times e.
    """
    if not isinstance(outputs, (list, tuple)):
        outputs = [outputs]
    lv = np.ones(1)
    for j, y in enumerate(outputs):
        column = W.probs[:, W.letter(y)]
        lv = (lv[None, :] * column[:, None]).ravel() if j else column.copy()
    return lv


def erasure_likelihoods(received: np.ndarray, width: int) -> np.ndarray:
    """
    Likelihood vectors from BEC observations.

    Args:
        received: (..., N) array of 0, 1, or -1 for an erasure
        width: Symbol width of the physical channel

    Returns:
        (..., N / width, 2^width) array with entries 0 or 1
    """
    received = np.asarray(received)
    per_bit = np.stack([(received != 1), (received != 0)], axis=-1).astype(np.float64)
    per_bit = per_bit.reshape(received.shape[:-1] + (-1, width, 2))
    lv = per_bit[..., 0, :]
    for j in range(1, width):
        # Earlier bits are less significant: new bit becomes the outer axis
        lv = (per_bit[..., j, :, None] * lv[..., None, :]).reshape(lv.shape[:-1] + (-1,))
    return lv


# =============================================================================
# KERNEL STEP
# =============================================================================

@lru_cache(maxsize=None)
def _combo_outputs(k: Kernel, group: int) -> np.ndarray:
    """Kernel outputs of every (group i, later groups) assignment with a zero prefix."""
    start, m = k.group_range(group)
    suffix = k.total_bits - start - m
    # Rows run over (symbol value, later bits); the symbol reads its first bit as least significant
    sym_bits = (np.arange(2 ** m)[:, None] >> np.arange(m)) & 1
    tail_bits = (np.arange(2 ** suffix)[:, None] >> np.arange(suffix - 1, -1, -1)) & 1
    rows = np.concatenate([
        np.repeat(sym_bits, 2 ** suffix, axis=0),
        np.tile(tail_bits, (2 ** m, 1)),
    ], axis=1)
    return rows.astype(np.int64) @ k.matrix[start:].astype(np.int64) % 2


def kernel_step_likelihood(k: Kernel, child_lvs: np.ndarray, prefix: np.ndarray, group: int) -> np.ndarray:
    """
    Likelihood vector of input group `group` given decided earlier groups.

    Args:
        k: The kernel
        child_lvs: (..., ell, 2^w) likelihoods of the kernel's output symbols
        prefix: (..., start) decided bits of groups before `group`
        group: Input group index

    Returns:
        (..., 2^m) likelihoods, renormalized to a maximum of 1
    """
    start, m = k.group_range(group)
    prefix = np.asarray(prefix)
    if prefix.shape[-1] != start:
        raise LayoutError(f"Group {group} of {k.name} needs {start} decided bits, got {prefix.shape[-1]}")
    w = k.symbol_width
    combos = _combo_outputs(k, group)
    lead = child_lvs.shape[:-2]

    base = prefix.astype(np.int64) @ k.matrix[:start].astype(np.int64) % 2
    x = base[..., None, :] ^ combos
    symbols = x.reshape(x.shape[:-1] + (k.ell, w)) @ (1 << np.arange(w))
    gathered = np.take_along_axis(
        np.broadcast_to(child_lvs[..., None, :, :], lead + (combos.shape[0],) + child_lvs.shape[-2:]),
        symbols[..., None],
        axis=-1,
    )[..., 0]
    per_combo = gathered.prod(axis=-1)
    lv = per_combo.reshape(lead + (2 ** m, -1)).sum(axis=-1)
    return _renormalize(lv)


def _renormalize(lv: np.ndarray) -> np.ndarray:
    peak = lv.max(axis=-1, keepdims=True)
    return np.divide(lv, peak, out=lv.copy(), where=peak > 0)


# =============================================================================
# DECODER
# =============================================================================

@dataclass(frozen=True, eq=False)
class DecodeResult:
    """
    u: decided message bits, shape (batch, N)
    ambiguous: per synthesized channel, whether the decision was a tie
    failed: an information channel was ambiguous
    """
    u: np.ndarray
    ambiguous: np.ndarray
    failed: np.ndarray


class _Decoder:
    def __init__(self, layout: Layout, info_mask: np.ndarray, frozen_u: np.ndarray):
        self.layout = layout
        self.info_mask = info_mask
        self.frozen_u = frozen_u
        self.u = np.zeros_like(frozen_u)
        self.ambiguous = np.zeros((frozen_u.shape[0], layout.nu), dtype=bool)

    def decide_leaf(self, ch: Channel, lv: np.ndarray) -> np.ndarray:
        lv = lv[:, 0, :]
        peak = lv.max(axis=-1, keepdims=True)
        ties = (lv >= peak * (1.0 - TIE_TOLERANCE)).sum(axis=-1) > 1
        self.ambiguous[:, ch.position] = ties
        symbol = np.argmax(lv, axis=-1)
        bits = ((symbol[:, None] >> np.arange(ch.width)) & 1).astype(np.uint8)
        span = slice(ch.start, ch.start + ch.width)
        if not self.info_mask[span].all():
            bits = self.frozen_u[:, span]
        self.u[:, span] = bits
        return bits[:, None, :]

    def decode_node(self, ch: Channel, lv: np.ndarray) -> np.ndarray:
        """Decisions for every instance of ch, shape (batch, instances, width)."""
        if ch.level == self.layout.depth:
            return self.decide_leaf(ch, lv)
        k = self.layout.kernel_for(ch)
        batch = lv.shape[0]
        per_kernel = lv.reshape(batch, ch.instances // k.ell, k.ell, lv.shape[-1])
        decided = np.zeros((batch, ch.instances // k.ell, 0), dtype=np.uint8)
        for group, child in enumerate(self.layout.children(ch)):
            child_lv = kernel_step_likelihood(k, per_kernel, decided, group)
            values = self.decode_node(child, child_lv)
            decided = np.concatenate([decided, values], axis=-1)
        x = decided.astype(np.int64) @ k.matrix.astype(np.int64) % 2
        return x.reshape(batch, ch.instances, ch.width).astype(np.uint8)


def sc_decode(layout: Layout, lvs: np.ndarray, info_mask: np.ndarray,
              frozen_u: Optional[np.ndarray] = None) -> DecodeResult:
    """
    Successive-cancellation decoding of one block or a batch.

    Args:
        layout: The code's layout
        lvs: (N / w, 2^w) or (batch, N / w, 2^w) likelihood vectors per channel use
        info_mask: Boolean mask over u of information bits
        frozen_u: Values of frozen bits (same shape as u); zeros by default

    Returns:
        DecodeResult, with a batch axis only if lvs had one
    """
    lvs = np.asarray(lvs, dtype=np.float64)
    single = lvs.ndim == 2
    if single:
        lvs = lvs[None]
    uses = layout.root.instances
    if lvs.shape[1:] != (uses, 2 ** layout.base_width):
        raise ChannelError(
            f"Expected {uses} likelihood vectors of length {2 ** layout.base_width}, got {lvs.shape[1:]}"
        )
    batch = lvs.shape[0]
    if frozen_u is None:
        frozen_u = np.zeros((batch, layout.block_bits), dtype=np.uint8)
    frozen_u = np.broadcast_to(np.asarray(frozen_u, dtype=np.uint8), (batch, layout.block_bits))

    decoder = _Decoder(layout, np.asarray(info_mask, dtype=bool), frozen_u)
    decoder.decode_node(layout.root, _renormalize(lvs))

    info_channels = np.array([decoder.info_mask[c.start] for c in layout.channels])
    failed = (decoder.ambiguous & info_channels).any(axis=-1)
    if single:
        return DecodeResult(decoder.u[0], decoder.ambiguous[0], failed[0])
    return DecodeResult(decoder.u, decoder.ambiguous, failed)


def genie_ambiguity(layout: Layout, erased: np.ndarray) -> np.ndarray:
    """
    Ground-truth ambiguity of every synthesized channel for one erasure pattern.

    Channel c is ambiguous when, with every earlier input known, two messages
    that agree on all unerased outputs still differ on c's symbol.
    """
    M = equivalent_generator_matrix(layout)
    seen = M[:, ~np.asarray(erased, dtype=bool)]
    flags = np.zeros(layout.nu, dtype=bool)
    for ch in layout.channels:
        known = np.eye(layout.block_bits, dtype=np.uint8)[:, :ch.start]
        sol = solve_affine(np.hstack([seen, known]), np.zeros(seen.shape[1] + ch.start, dtype=np.uint8))
        flags[ch.position] = not project_solution_subgroup(sol, (ch.start, ch.width)).is_trivial
    return flags


# =============================================================================
# MONTE-CARLO
# =============================================================================

@dataclass(frozen=True)
class BLERResult:
    estimate: float
    stderr: float
    errors: int
    trials: int
    elapsed_seconds: float


def _simulate_chunk(layout: Layout, info_mask: np.ndarray, epsilon: float,
                    trials: int, seed: int, index: int) -> int:
    rng = make_stream(seed, 'simulate', index)
    N = layout.block_bits
    u = np.zeros((trials, N), dtype=np.uint8)
    u[:, info_mask] = rng.integers(0, 2, size=(trials, int(info_mask.sum())), dtype=np.uint8)
    erased = rng.random((trials, N)) < epsilon
    received = np.where(erased, -1, encode(layout, u).astype(np.int64))
    result = sc_decode(layout, erasure_likelihoods(received, layout.base_width), info_mask)
    return int((result.u[:, info_mask] != u[:, info_mask]).any(axis=-1).sum())


def simulate_bler(layout: Layout, info_set: InformationSet, epsilon: float, trials: int,
                  seed: int, threads: int = DEFAULT_THREADS) -> BLERResult:
    """
    Estimate the block error rate over BEC(epsilon).

    Trials run in chunks of POLAR_SIM_CHUNK; chunk b always draws from
    random stream b, so the estimate does not depend on `threads`.
    A block is in error when any information bit is decoded wrongly.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    info_mask = info_set.info_mask(layout)
    sizes = [min(SIMULATION_CHUNK, trials - first) for first in range(0, trials, SIMULATION_CHUNK)]

    started = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        counts = list(pool.map(
            lambda job: _simulate_chunk(layout, info_mask, epsilon, job[1], seed, job[0]),
            enumerate(sizes),
        ))
    elapsed = time.perf_counter() - started

    errors = sum(counts)
    p = errors / trials
    logger.info(f"Simulated {trials} blocks of {layout.scheme} N={layout.block_bits}: {errors} errors")
    return BLERResult(
        estimate=p,
        stderr=float(np.sqrt(p * (1.0 - p) / trials)),
        errors=errors,
        trials=trials,
        elapsed_seconds=elapsed,
    )


# =============================================================================
# COMPLEXITY
# =============================================================================

@dataclass(frozen=True)
class ComplexityReport:
    multiplications: int
    additions: int

    @property
    def total(self) -> int:
        return self.multiplications + self.additions


def marginalization_cost(layout: Layout) -> ComplexityReport:
    """
    Arithmetic spent by brute-force kernel marginalization in one SC pass.

    Group i of a kernel costs 2^(m_i + suffix bits) products of ell factors
    and the sums over the suffix, once per kernel copy.
    """
    mults = adds = 0
    for level in layout.levels[:-1]:
        for ch in level:
            k = layout.kernel_for(ch)
            copies = ch.instances // k.ell
            for group, m in enumerate(k.input_groups):
                start, _ = k.group_range(group)
                suffix = k.total_bits - start - m
                mults += copies * 2 ** (m + suffix) * (k.ell - 1)
                adds += copies * 2 ** m * (2 ** suffix - 1)
    return ComplexityReport(multiplications=mults, additions=adds)
