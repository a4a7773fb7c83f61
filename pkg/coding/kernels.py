"""
kernels.py - Polarization kernels, code decompositions and partial distances

WHAT THIS FILE DOES:
A kernel is an invertible GF(2)-linear map x = uG whose input bits are
split into groups. A group of width 1 is an ordinary bit; a group of
width 2 is a "glued" pair that the decoder treats as one quaternary symbol.

This file:
1. Builds kernels from a chain of nested binary codes (a code decomposition)
2. Ships the kernels the toolkit uses: g1, g2 (RS(4)) and two (u+v,v) kernels
3. Computes partial distances by exhaustive search
4. Turns partial distances into exponent bounds E1 <= E2

LEARNING MOMENT: Code Decomposition
Take the chain (4,4,1) ⊃ (4,3,2) ⊃ (4,1,4). The first input bit picks one
of the two cosets of the even-weight code, the glued pair picks one of four
cosets of the repetition code inside it, and the last bit picks the word.
Choosing one coset representative per step and stacking them as rows gives
the generator matrix of the kernel.

LEARNING MOMENT: Partial Distances
The i-th partial distance is the smallest Hamming distance between two
kernel outputs that agree on groups 1..i-1 and differ in group i. Large
partial distances on later groups are what make a kernel polarize fast.
"""

import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from algebra.gf2 import bitmatrix, bits_to_int, is_invertible, matmul, rank
from config import PARTIAL_DISTANCE_MAX_BITS, PARTIAL_DISTANCE_WORK_CAP
from errors import CapacityError, KernelError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Kernel:
    """
    An invertible GF(2)-linear kernel with grouped input and output symbols.

    matrix_rows holds the L x L generator matrix; input group i occupies a
    contiguous block of rows and output symbol t a contiguous block of
    columns, both in declaration order.
    """
    name: str
    matrix_rows: Tuple[Tuple[int, ...], ...]
    input_groups: Tuple[int, ...]
    output_groups: Tuple[int, ...]

    def __post_init__(self):
        L = len(self.matrix_rows)
        if any(len(row) != L for row in self.matrix_rows):
            raise KernelError(f"Kernel {self.name}: matrix must be square")
        if sum(self.input_groups) != L or sum(self.output_groups) != L:
            raise KernelError(
                f"Kernel {self.name}: group widths {self.input_groups} / "
                f"{self.output_groups} do not partition {L} bits"
            )
        if any(w < 1 for w in self.input_groups + self.output_groups):
            raise KernelError(f"Kernel {self.name}: group widths must be positive")
        if len(set(self.output_groups)) != 1:
            raise KernelError(f"Kernel {self.name}: output symbols must share one width")
        if not is_invertible(np.asarray(self.matrix_rows, dtype=np.uint8)):
            raise KernelError(f"Kernel {self.name}: generator matrix is not invertible")

    @classmethod
    def from_matrix(cls, name: str, matrix, input_groups: Sequence[int],
                    output_groups: Sequence[int]) -> "Kernel":
        M = bitmatrix(matrix)
        return cls(
            name=name,
            matrix_rows=tuple(tuple(int(v) for v in row) for row in M),
            input_groups=tuple(int(w) for w in input_groups),
            output_groups=tuple(int(w) for w in output_groups),
        )

    @cached_property
    def matrix(self) -> np.ndarray:
        M = np.asarray(self.matrix_rows, dtype=np.uint8)
        M.setflags(write=False)
        return M

    @property
    def total_bits(self) -> int:
        return len(self.matrix_rows)

    @property
    def ell(self) -> int:
        """Number of output symbols (the kernel's arity)."""
        return len(self.output_groups)

    @property
    def symbol_width(self) -> int:
        """Width of each output symbol, i.e. of the channel the kernel feeds."""
        return self.output_groups[0]

    @property
    def group_offsets(self) -> Tuple[int, ...]:
        offsets = [0]
        for w in self.input_groups[:-1]:
            offsets.append(offsets[-1] + w)
        return tuple(offsets)

    @property
    def glued_groups(self) -> Tuple[int, ...]:
        """Indices of input groups wider than the output symbols."""
        return tuple(i for i, w in enumerate(self.input_groups) if w > self.symbol_width)

    def group_range(self, group: int) -> Tuple[int, int]:
        return self.group_offsets[group], self.input_groups[group]

    def group_label(self, group: int) -> Tuple[int, ...]:
        """1-based input bit indices of a group, e.g. (2, 3) for g1's glued pair."""
        start, width = self.group_range(group)
        return tuple(range(start + 1, start + width + 1))


def apply_kernel(k: Kernel, v) -> np.ndarray:
    """
    Evaluate x = vG for one input vector or a batch of them.

    Raises:
        KernelError: If the input length does not match the kernel size
    """
    v = np.asarray(v, dtype=np.uint8)
    if v.shape[-1] != k.total_bits:
        raise KernelError(f"Kernel {k.name} expects {k.total_bits} input bits, got {v.shape[-1]}")
    return matmul(v, k.matrix)


# =============================================================================
# CODE DECOMPOSITIONS
# =============================================================================

@dataclass(frozen=True, eq=False)
class CodeLevel:
    """One code in a decomposition chain with its declared (n, k, d)."""
    generator: np.ndarray
    n: int
    k: int
    d: int


@dataclass(frozen=True, eq=False)
class CodeChain:
    """Nested codes C_1 ⊃ C_2 ⊃ ... listed from the largest code down."""
    levels: Tuple[CodeLevel, ...]

    @classmethod
    def from_generators(cls, specs: Iterable[Tuple[Sequence[Sequence[int]], Tuple[int, int, int]]]) -> "CodeChain":
        levels = []
        for gen, (n, k, d) in specs:
            levels.append(CodeLevel(generator=bitmatrix(gen), n=n, k=k, d=d))
        return cls(levels=tuple(levels))


def _in_span(basis: List[np.ndarray], vec: np.ndarray) -> bool:
    if not basis:
        return not vec.any()
    return rank(np.vstack(basis + [vec])) == rank(np.vstack(basis))


def _min_distance(generator: np.ndarray) -> int:
    k = generator.shape[0]
    if k == 0:
        return 0
    msgs = ((np.arange(1, 2 ** k)[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
    return int(matmul(msgs, generator).sum(axis=1).min())


def kernel_from_decomposition(chain: CodeChain, name: str = "g") -> Kernel:
    """
    Build the kernel induced by a binary code decomposition.

    Coset representatives for level i are the rows of C_i's generator that
    extend a basis of C_{i+1}, taken in order; the last level is split down
    to single words by its own basis. Input group i has width k_i - k_{i+1}.

    Args:
        chain: The nested codes, largest first
        name: Name given to the resulting kernel

    Raises:
        KernelError: Non-nested chain, declared parameters that do not match,
            or an assembled matrix that is not invertible (naming the level)
    """
    levels = list(chain.levels)
    if not levels:
        raise KernelError("Code chain is empty")
    n = levels[0].n

    for idx, level in enumerate(levels, start=1):
        G = level.generator
        if G.shape[1] != n or level.n != n:
            raise KernelError(f"Level {idx}: code length {G.shape[1]} differs from {n}")
        if rank(G) != level.k or G.shape[0] != level.k:
            raise KernelError(f"Level {idx}: generator does not have declared dimension {level.k}")
        if _min_distance(G) != level.d and not (level.k == n and level.d == 1):
            raise KernelError(f"Level {idx}: minimum distance is not the declared {level.d}")
        if idx > 1:
            outer = levels[idx - 2]
            if level.k >= outer.k:
                raise KernelError(f"Level {idx}: dimension {level.k} does not strictly shrink")
            if rank(np.vstack([outer.generator, G])) != outer.k:
                raise KernelError(f"Level {idx}: code is not contained in level {idx - 1}")

    rows: List[np.ndarray] = []
    widths: List[int] = []
    for idx, level in enumerate(levels):
        inner = [r for r in levels[idx + 1].generator] if idx + 1 < len(levels) else []
        basis = list(inner)
        reps = []
        for row in level.generator:
            if not _in_span(basis, row):
                basis.append(row)
                reps.append(row)
        expected = level.k - (levels[idx + 1].k if idx + 1 < len(levels) else 0)
        if len(reps) != expected:
            raise KernelError(f"Level {idx + 1}: cosets are not equally sized")
        rows.extend(reps)
        widths.append(len(reps))

    M = np.vstack(rows)
    if not is_invertible(M):
        raise KernelError(
            f"Level 1: assembled {M.shape[0]}x{M.shape[1]} matrix is not invertible "
            f"(the largest code must be the whole space)"
        )
    logger.debug(f"Kernel {name} built from chain with input widths {widths}")
    return Kernel.from_matrix(name, M, widths, [1] * n)


def verify_decomposition(k: Kernel, chain: CodeChain) -> bool:
    """
    Check g(v) ∈ T_m^(v) for every input v.

    For each level i, x minus the representatives chosen by groups 1..i must
    be a codeword of C_{i+1} (the zero code after the last level).
    """
    levels = list(chain.levels)
    offsets = k.group_offsets
    L = k.total_bits
    for value in range(2 ** L):
        v = np.array([(value >> (L - 1 - b)) & 1 for b in range(L)], dtype=np.uint8)
        x = apply_kernel(k, v)
        for i in range(len(k.input_groups)):
            prefix = np.zeros(L, dtype=np.uint8)
            end = offsets[i] + k.input_groups[i]
            prefix[:end] = v[:end]
            residual = x ^ apply_kernel(k, prefix)
            if i + 1 < len(levels):
                if not _in_span(list(levels[i + 1].generator), residual):
                    return False
            elif residual.any():
                return False
    return True


# =============================================================================
# SHIPPED KERNELS
# =============================================================================

# (4,4,1) ⊃ (4,3,2) ⊃ (4,1,4); rows chosen so g1 = [1000; 0101; 0011; 1111]
G1_CHAIN = CodeChain.from_generators([
    ([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], (4, 4, 1)),
    ([[0, 1, 0, 1], [0, 0, 1, 1], [1, 1, 1, 1]], (4, 3, 2)),
    ([[1, 1, 1, 1]], (4, 1, 4)),
])

# (2,2,1) ⊃ (2,1,2): Arikan's (u+v, v)
UV2_CHAIN = CodeChain.from_generators([
    ([[1, 0], [0, 1]], (2, 2, 1)),
    ([[1, 1]], (2, 1, 2)),
])

# GF(4) = {0, 1, a, a^2} with a^2 = a + 1, element c0 + c1*a stored as bits (c0, c1).
# Multiplication by a constant is a 2x2 GF(2) block acting on the row vector (c0, c1).
GF4_BLOCKS = {
    0: ((0, 0), (0, 0)),
    1: ((1, 0), (0, 1)),
    2: ((0, 1), (1, 1)),   # times a
    3: ((1, 1), (1, 0)),   # times a^2
}

# Extended RS(4) kernel: rows 2..4 evaluate x^2, x, 1 at (0, 1, a, a^2),
# row 1 completes the basis. Partial distances (1, 2, 3, 4).
RS4_GF4_ROWS = (
    (1, 0, 0, 0),
    (0, 1, 3, 2),
    (0, 1, 2, 3),
    (1, 1, 1, 1),
)

# Quaternary (u+v, v)
UV4_GF4_ROWS = (
    (1, 0),
    (1, 1),
)


def gf4_kernel(name: str, gf4_rows: Sequence[Sequence[int]]) -> Kernel:
    """Expand a matrix of GF(4) constants into its binary 2x2-block form."""
    m = len(gf4_rows)
    M = np.zeros((2 * m, 2 * len(gf4_rows[0])), dtype=np.uint8)
    for i, row in enumerate(gf4_rows):
        for t, element in enumerate(row):
            M[2 * i:2 * i + 2, 2 * t:2 * t + 2] = GF4_BLOCKS[element]
    return Kernel.from_matrix(name, M, [2] * m, [2] * len(gf4_rows[0]))


G1 = kernel_from_decomposition(G1_CHAIN, name="g1")
UV2 = kernel_from_decomposition(UV2_CHAIN, name="uv2")
G2 = gf4_kernel("g2", RS4_GF4_ROWS)
UV4 = gf4_kernel("uv4", UV4_GF4_ROWS)

KERNELS: Dict[str, Kernel] = {k.name: k for k in (G1, G2, UV2, UV4)}


# =============================================================================
# PARTIAL DISTANCES AND EXPONENTS
# =============================================================================

@dataclass(frozen=True)
class PartialDistances:
    """Per input group: smallest and largest pairwise partial distance."""
    d_min: Tuple[int, ...]
    d_max: Tuple[int, ...]


@dataclass(frozen=True)
class ExponentBounds:
    """Lower (E1) and upper (E2) bounds on the exponent, base-ell logarithms."""
    e1: float
    e2: float


def _codeword_table(k: Kernel) -> np.ndarray:
    """Output of every input (indexed by its integer value) packed into an int."""
    L = k.total_bits
    inputs = ((np.arange(2 ** L)[:, None] >> np.arange(L - 1, -1, -1)) & 1).astype(np.uint8)
    outputs = matmul(inputs, k.matrix).astype(np.int64)
    return outputs @ (1 << np.arange(L - 1, -1, -1, dtype=np.int64))


def _popcount(values: np.ndarray) -> np.ndarray:
    as_bytes = values.astype('>u4').view(np.uint8).reshape(values.shape + (4,))
    return np.unpackbits(as_bytes, axis=-1).sum(axis=-1)


def _symbol_weight(values: np.ndarray, k: Kernel) -> np.ndarray:
    """Number of nonzero output symbols in packed codeword differences."""
    s = k.symbol_width
    folded = values.copy()
    for b in range(1, s):
        folded |= values >> b
    mask = sum(1 << (s * j) for j in range(k.ell))
    return _popcount(folded & mask)


@lru_cache(maxsize=None)
def partial_distances(k: Kernel) -> PartialDistances:
    """
    Exact partial distances by exhaustive search.

    For group i and symbols x != x', D_{x,x'} is the smallest distance between
    g(p, x, w) and g(p, x', w') over every prefix p and every pair of
    suffixes (w, w'). D_min / D_max are taken over the symbol pairs.
    Distance counts differing output symbols, so g2 is measured over GF(4).

    Raises:
        CapacityError: If the kernel is too large for exhaustive search
    """
    L = k.total_bits
    if L > PARTIAL_DISTANCE_MAX_BITS:
        raise CapacityError(
            f"Kernel {k.name} has {L} bits; exhaustive partial distances are capped at "
            f"{PARTIAL_DISTANCE_MAX_BITS} (POLAR_PARTIAL_DISTANCE_MAX_BITS)"
        )
    work = 0
    for i, g in enumerate(k.input_groups):
        start, _ = k.group_range(i)
        suffix = L - start - g
        work += 2 ** start * 2 ** g * (2 ** g - 1) * 4 ** suffix
    if work > PARTIAL_DISTANCE_WORK_CAP:
        raise CapacityError(
            f"Kernel {k.name} needs {work} codeword comparisons; cap is {PARTIAL_DISTANCE_WORK_CAP}"
        )

    table = _codeword_table(k)
    d_min, d_max = [], []
    for i, g in enumerate(k.input_groups):
        start, _ = k.group_range(i)
        suffix = L - start - g
        tails = np.arange(2 ** suffix)
        pair_distance: Dict[Tuple[int, int], int] = {}
        for p in range(2 ** start):
            for x in range(2 ** g):
                A = table[(p << (g + suffix)) | (x << suffix) | tails]
                for x2 in range(2 ** g):
                    if x2 == x:
                        continue
                    B = table[(p << (g + suffix)) | (x2 << suffix) | tails]
                    d = int(_symbol_weight(A[:, None] ^ B[None, :], k).min())
                    key = (x, x2)
                    pair_distance[key] = min(pair_distance.get(key, k.ell), d)
        values = list(pair_distance.values())
        d_min.append(min(values))
        d_max.append(max(values))
    return PartialDistances(d_min=tuple(d_min), d_max=tuple(d_max))


def exponent_bounds(k: Kernel, distances: Optional[PartialDistances] = None,
                    weighting: str = 'bit-share') -> ExponentBounds:
    """
    E1 / E2 as a weighted average of log_ell D_min / D_max over input groups.

    weighting='bit-share' (default) weights group i by m_i / L, the
    probability that the tree process follows that group: 1/ell for every
    group of g2 and the (u+v,v) kernels, (1/4, 1/2, 1/4) for g1.
    weighting='uniform' is the plain (1/ell) sum over groups, which gives
    0.375 for g1 and agrees with bit-share wherever every group is one symbol.
    """
    distances = distances or partial_distances(k)
    ell = k.ell
    L = k.total_bits
    if weighting == 'bit-share':
        weights = [m / L for m in k.input_groups]
    elif weighting == 'uniform':
        weights = [1.0 / ell] * len(k.input_groups)
    else:
        raise ValueError(f"Unknown exponent weighting '{weighting}'; use bit-share or uniform")
    e1 = sum(w * math.log(d, ell) for w, d in zip(weights, distances.d_min))
    e2 = sum(w * math.log(d, ell) for w, d in zip(weights, distances.d_max))
    return ExponentBounds(e1=e1, e2=e2)


def mixed_exponent_bounds(auxiliary: Iterable[Kernel]) -> ExponentBounds:
    """
    Exponent bounds of a mixed construction from its auxiliary kernels.

    E1 is the smallest auxiliary E1 and E2 the largest auxiliary E2: the
    glued channels take over asymptotically, so the weakest auxiliary
    kernel sets the rate of polarization.
    """
    bounds = [exponent_bounds(k) for k in auxiliary]
    if not bounds:
        raise KernelError("A mixed construction needs at least one auxiliary kernel")
    return ExponentBounds(e1=min(b.e1 for b in bounds), e2=max(b.e2 for b in bounds))


# Per-group (c1, c2) pairs for Z_max(child) <= c1 Z_max^D_min and
# Z_min(child) >= c2 Z_min^D_max; the uniform pair (4^3, 4^-6) covers them all.
UNIFORM_BOUND_CONSTANTS = (4.0 ** 3, 4.0 ** -6)
GROUP_BOUND_CONSTANTS: Dict[str, Tuple[Tuple[float, float], ...]] = {
    'g1': ((2.0 ** 3, 2.0 ** -6), (2.0, 0.5), (1.0, 2.0 ** -3)),
    'g2': tuple((4.0 ** (4 - i), 4.0 ** -(7 - i)) for i in range(1, 5)),
}


# =============================================================================
# SERIALIZATION
# =============================================================================

def kernel_to_json(k: Kernel) -> str:
    """
    Kernel as JSON. Row-vector convention; the leftmost matrix column is the
    most significant bit of each hex row.
    """
    return json.dumps({
        'name': k.name,
        'L': k.total_bits,
        'input_widths': list(k.input_groups),
        'output_widths': list(k.output_groups),
        'matrix_rows': [format(bits_to_int(row), 'x') for row in k.matrix_rows],
    }, sort_keys=True)


def kernel_from_json(text: str) -> Kernel:
    data = json.loads(text)
    L = int(data['L'])
    rows = [[(int(h, 16) >> (L - 1 - b)) & 1 for b in range(L)] for h in data['matrix_rows']]
    return Kernel.from_matrix(data['name'], rows, data['input_widths'], data['output_widths'])
