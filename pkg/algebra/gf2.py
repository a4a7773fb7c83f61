"""
gf2.py - Binary-field linear algebra for kernels and density evolution

WHAT THIS FILE DOES:
Vectors and matrices over GF(2) are plain numpy uint8 arrays holding 0/1.
On top of that this file provides:
1. Row reduction, rank and invertibility
2. Affine solution sets {x : xA = b}
3. The subgroup lattice of (Z/2)^w, which erasure density evolution uses
   as its channel state space

LEARNING MOMENT: Row-Vector Convention
Coding theory writes codewords as x = uG: the message is a ROW vector
multiplied on the left of the generator matrix. Every function here follows
that convention, so solve_affine() solves xA = b, not Ax = b.

LEARNING MOMENT: Subgroups as Ambiguity
After a binary erasure channel, the set of inputs consistent with what was
received is a coset of a subgroup. For one bit that is {0} (received) or
{0,1} (erased); for a glued pair it can also be a 2-element subgroup like
{00, 11}. Tracking the subgroup is enough to know everything about the
decoder's uncertainty.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from errors import GF2Error, UnsupportedWidthError

# Type aliases: GF(2) data lives in uint8 numpy arrays
BitVec = np.ndarray
BitMatrix = np.ndarray

MAX_SUBGROUP_WIDTH = 2


def bitvec(bits: Sequence[int]) -> BitVec:
    """Build a BitVec, rejecting anything that is not 0 or 1."""
    arr = np.asarray(bits, dtype=np.int64).ravel()
    if np.any((arr != 0) & (arr != 1)):
        raise GF2Error(f"Bit vector entries must be 0 or 1, got {list(arr)}")
    return arr.astype(np.uint8)


def bitmatrix(rows: Sequence[Sequence[int]]) -> BitMatrix:
    """Build a BitMatrix from nested rows, rejecting non-binary entries."""
    arr = np.asarray(rows, dtype=np.int64)
    if arr.ndim != 2:
        raise GF2Error(f"Bit matrix must be 2-dimensional, got shape {arr.shape}")
    if np.any((arr != 0) & (arr != 1)):
        raise GF2Error("Bit matrix entries must be 0 or 1")
    return arr.astype(np.uint8)


def bits_to_int(bits: Sequence[int]) -> int:
    """Leftmost bit is the most significant one."""
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> Tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def symbol_to_bits(symbol: int, width: int) -> Tuple[int, ...]:
    """
    Bits of a symbol value. The first bit of a group is the least
    significant, so the GF(4) element c0 + c1*a has value c0 + 2*c1.
    """
    return tuple((symbol >> j) & 1 for j in range(width))


def bits_to_symbol(bits: Sequence[int]) -> int:
    return sum(int(b) << j for j, b in enumerate(bits))


def row_reduce(M: BitMatrix, n_pivot_cols: Optional[int] = None) -> Tuple[BitMatrix, List[int]]:
    """
    Reduced row-echelon form over GF(2).

    Args:
        M: Binary matrix (m x n)
        n_pivot_cols: Only search for pivots in the first n_pivot_cols columns;
            row operations still apply to the full row width (augmented columns).

    Returns:
        (R, pivot_cols) with R fully reduced (zeros above and below each pivot)
    """
    R = (np.asarray(M, dtype=np.uint8) % 2).copy()
    if R.ndim != 2:
        raise GF2Error(f"Expected a 2-dimensional matrix, got shape {R.shape}")
    m, n = R.shape
    if n_pivot_cols is None:
        n_pivot_cols = n

    pivot_cols: List[int] = []
    pivot_row = 0
    for col in range(n_pivot_cols):
        if pivot_row >= m:
            break
        candidates = np.nonzero(R[pivot_row:, col])[0]
        if candidates.size == 0:
            continue
        found = pivot_row + int(candidates[0])
        if found != pivot_row:
            R[[pivot_row, found]] = R[[found, pivot_row]]
        # Eliminate everywhere else in this column
        others = np.nonzero(R[:, col])[0]
        others = others[others != pivot_row]
        if others.size:
            R[others] ^= R[pivot_row]
        pivot_cols.append(col)
        pivot_row += 1

    return R, pivot_cols


def rank(M: BitMatrix) -> int:
    """GF(2) rank of a binary matrix."""
    if np.asarray(M).size == 0:
        return 0
    _, pivots = row_reduce(M)
    return len(pivots)


def is_invertible(M: BitMatrix) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and rank(M) == M.shape[0]


def matmul(x: np.ndarray, G: BitMatrix) -> np.ndarray:
    """x G over GF(2); x may be a single row or a batch of rows."""
    return (np.asarray(x, dtype=np.int64) @ np.asarray(G, dtype=np.int64) % 2).astype(np.uint8)


def hamming_distance(x: BitVec, y: BitVec) -> int:
    """Number of coordinates where x and y differ."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise GF2Error(f"Length mismatch: {x.shape} vs {y.shape}")
    return int(np.count_nonzero(x != y))


# =============================================================================
# AFFINE SOLUTION SETS
# =============================================================================

@dataclass(frozen=True, eq=False)
class AffineSolution:
    """
    The set {particular + span(kernel)}: every x with xA = b.

    kernel rows are linearly independent; an empty kernel means the
    solution is unique.
    """
    particular: BitVec
    kernel: BitMatrix

    @property
    def dimension(self) -> int:
        return int(self.kernel.shape[0])

    @property
    def size(self) -> int:
        return 2 ** self.dimension

    def contains(self, x: BitVec) -> bool:
        diff = np.asarray(x, dtype=np.uint8) ^ self.particular
        if not diff.any():
            return True
        if self.dimension == 0:
            return False
        return rank(np.vstack([self.kernel, diff])) == self.dimension


def solve_affine(A: BitMatrix, b: BitVec) -> Optional[AffineSolution]:
    """
    Solve xA = b over GF(2).

    Args:
        A: r x c matrix
        b: length-c vector (one entry per column of A)

    Returns:
        AffineSolution, or None when the system is inconsistent

    Raises:
        GF2Error: If b's length does not match A's column count
    """
    A = np.asarray(A, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8).ravel()
    if A.ndim != 2:
        raise GF2Error(f"Expected a 2-dimensional matrix, got shape {A.shape}")
    r, c = A.shape
    if b.size != c:
        raise GF2Error(f"Dimension mismatch: A has {c} columns but b has {b.size} entries")

    if c == 0:
        return AffineSolution(
            particular=np.zeros(r, dtype=np.uint8),
            kernel=np.eye(r, dtype=np.uint8),
        )

    # xA = b  <=>  A^T x^T = b^T ; reduce the augmented system [A^T | b]
    augmented = np.hstack([A.T, b.reshape(-1, 1)])
    R, pivots = row_reduce(augmented, n_pivot_cols=r)
    n_piv = len(pivots)
    if np.any(R[n_piv:, -1]):
        return None

    particular = np.zeros(r, dtype=np.uint8)
    for row, col in enumerate(pivots):
        particular[col] = R[row, -1]

    free_cols = [j for j in range(r) if j not in set(pivots)]
    kernel = np.zeros((len(free_cols), r), dtype=np.uint8)
    for k, f in enumerate(free_cols):
        kernel[k, f] = 1
        for row, col in enumerate(pivots):
            kernel[k, col] = R[row, f]

    return AffineSolution(particular=particular, kernel=kernel)


def project_solution_subgroup(sol: Optional[AffineSolution], coord_range: Tuple[int, int]) -> "Subgroup":
    """
    The set of differences {x_range - x'_range : x, x' in sol} as a Subgroup.

    Args:
        sol: A nonempty affine solution set
        coord_range: (start, width), start is a 0-based coordinate

    Raises:
        GF2Error: If sol is empty (inconsistent) or the range is out of bounds
    """
    if sol is None:
        raise GF2Error("Cannot project an empty solution set")
    start, width = coord_range
    ambient = sol.particular.size
    if start < 0 or width < 0 or start + width > ambient:
        raise GF2Error(f"Coordinate range {coord_range} outside ambient dimension {ambient}")
    if sol.dimension == 0:
        return Subgroup.from_generators(width, [])
    return Subgroup.from_generators(width, sol.kernel[:, start:start + width])


# =============================================================================
# SUBGROUPS OF (Z/2)^w
# =============================================================================

@dataclass(frozen=True)
class Subgroup:
    """
    A subgroup of (Z/2)^width, stored by its reduced row-echelon basis.

    Two Subgroup objects are equal exactly when they contain the same
    elements, so they can be used as dictionary keys.
    """
    width: int
    basis: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_generators(cls, width: int, generators) -> "Subgroup":
        gens = np.asarray(generators, dtype=np.uint8).reshape(-1, width) if width else np.zeros((0, 0), dtype=np.uint8)
        if gens.shape[0] == 0 or width == 0:
            return cls(width=width, basis=())
        R, pivots = row_reduce(gens)
        basis = tuple(tuple(int(v) for v in R[i]) for i in range(len(pivots)))
        return cls(width=width, basis=basis)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def order(self) -> int:
        return 2 ** self.dimension

    @property
    def is_trivial(self) -> bool:
        return self.dimension == 0

    def elements(self) -> List[Tuple[int, ...]]:
        out = []
        for coeffs in product((0, 1), repeat=self.dimension):
            v = np.zeros(self.width, dtype=np.uint8)
            for c, row in zip(coeffs, self.basis):
                if c:
                    v ^= np.asarray(row, dtype=np.uint8)
            out.append(tuple(int(x) for x in v))
        return sorted(out)

    def contains(self, vec: Sequence[int]) -> bool:
        return tuple(int(x) for x in vec) in set(self.elements())

    def contains_symbol(self, symbol: int) -> bool:
        return self.contains(symbol_to_bits(symbol, self.width))

    def annihilator(self) -> BitMatrix:
        """
        Columns a with h . a = 0 for every h in the subgroup.

        y is in the subgroup exactly when y @ annihilator() == 0.
        """
        if self.width == 0:
            return np.zeros((0, 0), dtype=np.uint8)
        if self.is_trivial:
            return np.eye(self.width, dtype=np.uint8)
        B = np.asarray(self.basis, dtype=np.uint8)
        sol = solve_affine(B.T, np.zeros(B.shape[0], dtype=np.uint8))
        return sol.kernel.T.copy()

    def label(self) -> str:
        if self.is_trivial:
            return "{0}"
        return "<" + ",".join("".join(str(b) for b in row) for row in self.basis) + ">"


def _check_width(w: int) -> None:
    if w < 0 or w > MAX_SUBGROUP_WIDTH:
        raise UnsupportedWidthError(
            f"Subgroup lattice supports widths 0..{MAX_SUBGROUP_WIDTH}, got {w}"
        )


@lru_cache(maxsize=None)
def _subgroups_cached(w: int) -> Tuple[Subgroup, ...]:
    found = {Subgroup(width=w, basis=())}
    nonzero = [v for v in product((0, 1), repeat=w) if any(v)]
    for size in range(1, w + 1):
        for gens in combinations(nonzero, size):
            found.add(Subgroup.from_generators(w, gens))
    return tuple(sorted(found, key=lambda h: (h.order, h.basis)))


def subgroups(w: int) -> List[Subgroup]:
    """
    All subgroups of (Z/2)^w in canonical form.

    Ordered by group order, then lexicographically by basis, so index 0 is
    always the trivial group and the last entry is the full group.

    Raises:
        UnsupportedWidthError: If w is not in {0, 1, 2}
    """
    _check_width(w)
    return list(_subgroups_cached(w))


def subgroup_index(h: Subgroup) -> int:
    """Position of h in subgroups(h.width)."""
    return _subgroups_cached(h.width).index(h)
