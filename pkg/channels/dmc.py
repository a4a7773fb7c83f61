"""
dmc.py - Explicit discrete memoryless channels (the brute-force oracle)

WHAT THIS FILE DOES:
A DMC is just a table P(y|x). With the full table we can compute anything
exactly (capacity, Bhattacharyya parameters, and the synthesized channels
a kernel produces) by enumerating every input and output. That is far too
slow for real block lengths, but it is the ground truth the fast erasure
density evolution in erasure_de.py is tested against.

LEARNING MOMENT: Channel Splitting
Put ell independent copies of W behind a kernel g. The decoder of input
group i sees the outputs y_1..y_ell AND the earlier groups (a genie hands
it the true values). Later groups are unknown and uniformly random, so
they are summed out:

    W_i(y, u_<i | u_i) = 2^-(L - m_i) * sum over u_>i of prod_t W(y_t | x_t)

where x = uG. That is a new DMC whose input is group i.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import xlogy

from algebra.gf2 import matmul
from coding.kernels import Kernel
from config import PROBABILITY_TOLERANCE, SPLIT_ENUMERATION_CAP
from errors import CapacityError, ChannelError

logger = logging.getLogger(__name__)

ERASURE = "?"


@dataclass(frozen=True, eq=False)
class DMC:
    """
    A channel with 2^width inputs.

    probs[x, y] = P(y | x); row x sums to 1. Input symbol x reads the bits
    of a width-2 symbol with the first bit least significant.
    """
    width: int
    probs: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        P = np.asarray(self.probs, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != 2 ** self.width:
            raise ChannelError(f"Channel table must have 2^{self.width} rows, got shape {P.shape}")
        if np.any(P < 0):
            raise ChannelError("Channel probabilities must be non-negative")
        if np.any(np.abs(P.sum(axis=1) - 1.0) > PROBABILITY_TOLERANCE):
            raise ChannelError(f"Channel rows must sum to 1, got {P.sum(axis=1)}")
        if self.labels is not None and len(self.labels) != P.shape[1]:
            raise ChannelError("One label per output letter is required")
        P.setflags(write=False)
        object.__setattr__(self, 'probs', P)

    @property
    def q(self) -> int:
        return 2 ** self.width

    @property
    def outputs(self) -> int:
        return self.probs.shape[1]

    def letter(self, y) -> int:
        """Output index of a letter given by label or by index."""
        if isinstance(y, str):
            if self.labels is None or y not in self.labels:
                raise ChannelError(f"Unknown output letter {y!r}")
            return self.labels.index(y)
        if not 0 <= int(y) < self.outputs:
            raise ChannelError(f"Output index {y} outside 0..{self.outputs - 1}")
        return int(y)


def make_bec(epsilon: float) -> DMC:
    """Binary erasure channel with outputs ('0', '1', '?')."""
    if not 0.0 <= epsilon <= 1.0:
        raise ChannelError(f"Erasure probability must be in [0, 1], got {epsilon}")
    P = np.array([
        [1.0 - epsilon, 0.0, epsilon],
        [0.0, 1.0 - epsilon, epsilon],
    ])
    return DMC(width=1, probs=P, labels=("0", "1", ERASURE))


def make_noiseless(width: int = 1) -> DMC:
    q = 2 ** width
    return DMC(width=width, probs=np.eye(q), labels=tuple(str(i) for i in range(q)))


def make_useless(width: int = 1) -> DMC:
    return DMC(width=width, probs=np.ones((2 ** width, 1)), labels=(ERASURE,))


def product_channel(W: DMC) -> DMC:
    """
    Two independent uses of a binary DMC seen as one width-2 channel.

    Symbol s carries bit s & 1 on the first use and s >> 1 on the second;
    output letter a * |Y| + b means (a on the first use, b on the second).
    """
    if W.width != 1:
        raise ChannelError("product_channel expects a binary-input channel")
    rows = []
    for s in range(4):
        first, second = s & 1, s >> 1
        rows.append(np.outer(W.probs[first], W.probs[second]).ravel())
    labels = None
    if W.labels is not None:
        labels = tuple(a + b for a in W.labels for b in W.labels)
    return DMC(width=2, probs=np.array(rows), labels=labels)


# =============================================================================
# CAPACITY AND BHATTACHARYYA PARAMETERS
# =============================================================================

def capacity(W: DMC) -> float:
    """Symmetric capacity in bits: mutual information under uniform inputs."""
    P = W.probs
    mean = P.mean(axis=0, keepdims=True)
    ratio = np.divide(P, mean, out=np.ones_like(P), where=mean > 0)
    return float(xlogy(P, ratio).sum() / W.q / np.log(2))


def pairwise_bhattacharyya(W: DMC) -> np.ndarray:
    """Z_{x,x'} = sum_y sqrt(P(y|x) P(y|x')) for every input pair."""
    S = np.sqrt(W.probs)
    return S @ S.T


def bhattacharyya(W: DMC) -> Tuple[float, float, float]:
    """
    (Z, Z_max, Z_min) over ordered pairs of distinct inputs.

    Z is the average; for binary inputs all three coincide.
    """
    pairs = pairwise_bhattacharyya(W)
    off = pairs[~np.eye(W.q, dtype=bool)]
    return float(off.mean()), float(off.max()), float(off.min())


# =============================================================================
# SPLITTING AND MERGING
# =============================================================================

def _symbol_values(k: Kernel) -> np.ndarray:
    """Output symbol values of every kernel input, shape (2^L, ell)."""
    L = k.total_bits
    inputs = ((np.arange(2 ** L)[:, None] >> np.arange(L - 1, -1, -1)) & 1).astype(np.uint8)
    x = matmul(inputs, k.matrix).reshape(2 ** L, k.ell, k.symbol_width).astype(np.int64)
    return x @ (1 << np.arange(k.symbol_width))


def split_channel(k: Kernel, W: DMC, group: int) -> DMC:
    """
    The synthesized channel of input group `group` of kernel k over W.

    The output letter encodes (earlier groups, y_1..y_ell) as
    prefix * |Y|^ell + y-tuple, y_1 most significant. The result is not
    merged; pass it through merge_equivalent_outputs for a compact table.

    Raises:
        ChannelError: If W's width is not the kernel's output symbol width
        CapacityError: If |Y|^ell * 2^L exceeds POLAR_SPLIT_ENUMERATION_CAP
    """
    if W.width != k.symbol_width:
        raise ChannelError(
            f"Kernel {k.name} feeds width-{k.symbol_width} channels, got width {W.width}"
        )
    if not 0 <= group < len(k.input_groups):
        raise ChannelError(f"Kernel {k.name} has no input group {group}")
    L = k.total_bits
    work = W.outputs ** k.ell * 2 ** L
    if work > SPLIT_ENUMERATION_CAP:
        raise CapacityError(
            f"Splitting {k.name} over a {W.outputs}-letter channel needs {work} table entries; "
            f"cap is {SPLIT_ENUMERATION_CAP} (POLAR_SPLIT_ENUMERATION_CAP)"
        )

    symbols = _symbol_values(k)
    joint = W.probs[symbols[:, 0]]
    for t in range(1, k.ell):
        joint = (joint[:, :, None] * W.probs[symbols[:, t]][:, None, :]).reshape(2 ** L, -1)

    start, m = k.group_range(group)
    suffix = L - start - m
    table = joint.reshape(2 ** start, 2 ** m, 2 ** suffix, -1).sum(axis=2)
    table = table * 2.0 ** -(L - m)
    table = table.transpose(1, 0, 2).reshape(2 ** m, -1)

    # Kernel inputs are read MSB first; reorder rows to LSB-first symbol values
    order = [int(format(s, f'0{m}b')[::-1], 2) if m else 0 for s in range(2 ** m)]
    table = table[order]
    logger.debug(f"Split {k.name} group {group}: {table.shape[1]} raw output letters")
    return DMC(width=m, probs=table)


def merge_equivalent_outputs(W: DMC, digits: int = 12) -> DMC:
    """
    Merge output letters whose likelihood vectors are proportional.

    Letters with zero probability under every input are dropped. Merged
    letters keep the order of their first occurrence, so merging twice
    changes nothing.
    """
    P = W.probs
    totals = P.sum(axis=0)
    keep = totals > 0
    P = P[:, keep]
    labels = None if W.labels is None else tuple(l for l, k in zip(W.labels, keep) if k)
    shape = np.round(P / P.sum(axis=0, keepdims=True), digits)
    _, first, inverse = np.unique(shape.T, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    rank_of = np.argsort(np.argsort(first))
    groups = rank_of[inverse]
    merged = np.zeros((W.q, len(first)))
    np.add.at(merged.T, groups, P.T)
    if labels is not None:
        order = np.sort(first)
        labels = tuple(labels[i] for i in order)
    return DMC(width=W.width, probs=merged, labels=labels)
