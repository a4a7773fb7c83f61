"""
construction.py - The recursive mixed-kernel construction

WHAT THIS FILE DOES:
Builds a Layout: the explicit tree of synthesized channels for one of the
three schemes, and encodes messages through it.

    mixed    g1 on single bits, g2 (RS(4)) on glued pairs, depth n
    arikan   the 2x2 (u+v, v) kernel, depth 2n (same block length 4^n)
    rs4_top  bit pairs sent as quaternary symbols; a quaternary (u+v, v)
             stage next to the channel, then n-1 levels of g2

HOW THE TREE IS LAID OUT:
Level 0 holds the physical channel W. Every channel at level d is split by
the kernel of level d+1 into one child per input group, so a glued group
of width 2 yields a width-2 child. Level n holds the synthesized channels
seen by the decoder, in the order their inputs appear in u.

LEARNING MOMENT: Instances
A level-d channel is used M_d times in parallel (M_0 = number of physical
channel uses, M_n = 1). Instance s*ell + t of a parent feeds kernel copy s
at output position t, which is exactly how g^(k)(u) = [g^(k-1)(v_1), ...,
g^(k-1)(v_ell)] interleaves its sub-blocks.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from coding.kernels import G1, G2, UV2, UV4, Kernel
from config import MAX_BLOCK_BITS, MAX_GENERATOR_BITS
from errors import CapacityError, LayoutError

logger = logging.getLogger(__name__)


# =============================================================================
# SCHEMES
# =============================================================================

@dataclass(frozen=True)
class Scheme:
    """
    How a scheme picks kernels.

    pick(level, width) returns the kernel that splits a channel of the given
    symbol width into the channels of `level` (1-based).
    """
    name: str
    base_width: int
    depth_factor: int
    pick: Callable[[int, int], Optional[Kernel]]
    description: str

    def tree_depth(self, n: int) -> int:
        return self.depth_factor * n


def _mixed_pick(level: int, width: int) -> Optional[Kernel]:
    return {1: G1, 2: G2}.get(width)


def _arikan_pick(level: int, width: int) -> Optional[Kernel]:
    return UV2 if width == 1 else None


def _rs4_top_pick(level: int, width: int) -> Optional[Kernel]:
    if width != 2:
        return None
    return UV4 if level == 1 else G2


SCHEMES: Dict[str, Scheme] = {
    'mixed': Scheme('mixed', 1, 1, _mixed_pick, "g1 with g2 on glued pairs"),
    'arikan': Scheme('arikan', 1, 2, _arikan_pick, "2x2 (u+v,v) kernel, 2n levels"),
    'rs4_top': Scheme('rs4_top', 2, 1, _rs4_top_pick, "two RS(4) towers joined by quaternary (u+v,v)"),
}


def scheme_names() -> List[str]:
    return list(SCHEMES)


def get_scheme(name: str) -> Scheme:
    if name not in SCHEMES:
        raise LayoutError(f"Unknown scheme '{name}'. Choose from: {', '.join(SCHEMES)}")
    return SCHEMES[name]


# =============================================================================
# LAYOUT
# =============================================================================

@dataclass(frozen=True)
class Channel:
    """
    One synthesized channel (a node of the construction tree).

    start is the 0-based position in u of the first bit below this node;
    the subtree covers width * instances consecutive bits.
    """
    level: int
    position: int
    width: int
    start: int
    instances: int
    parent: Optional[int] = None
    group: Optional[int] = None
    kernel_path: Tuple[str, ...] = ()

    @property
    def indices(self) -> Tuple[int, ...]:
        """1-based input indices, meaningful for leaves: (1,) or (2, 3)."""
        return tuple(range(self.start + 1, self.start + self.width + 1))

    @property
    def is_glued(self) -> bool:
        return self.width > 1


@dataclass(frozen=True, eq=False)
class Layout:
    scheme: str
    n: int
    levels: Tuple[Tuple[Channel, ...], ...]
    level_kernels: Tuple[Dict[int, Kernel], ...]
    children_index: Tuple[Tuple[Tuple[int, ...], ...], ...]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def root(self) -> Channel:
        return self.levels[0][0]

    @property
    def channels(self) -> Tuple[Channel, ...]:
        return self.levels[-1]

    @property
    def block_bits(self) -> int:
        return self.root.width * self.root.instances

    @property
    def nu(self) -> int:
        return len(self.channels)

    @property
    def base_width(self) -> int:
        return self.root.width

    def kernel_for(self, ch: Channel) -> Kernel:
        """Kernel that splits ch into its children."""
        if ch.level >= self.depth:
            raise LayoutError(f"Channel at level {ch.level} is a leaf")
        return self.level_kernels[ch.level + 1][ch.width]

    def children(self, ch: Channel) -> Tuple[Channel, ...]:
        nxt = self.levels[ch.level + 1]
        return tuple(nxt[i] for i in self.children_index[ch.level][ch.position])

    def multiplicity(self, level: int) -> int:
        """Parallel uses of every channel at a level."""
        return self.levels[level][0].instances

    def to_json(self) -> dict:
        return {
            'scheme': self.scheme,
            'n': self.n,
            'N': self.block_bits,
            'nu': self.nu,
            'glued': sum(1 for c in self.channels if c.is_glued),
            'channels': [
                {'indices': list(c.indices), 'width': c.width}
                for c in self.channels
            ],
        }


def build_layout(scheme: str, n: int) -> Layout:
    """
    Materialize the channel tree of a scheme at recursion depth n.

    Args:
        scheme: 'mixed', 'arikan' or 'rs4_top'
        n: Recursion depth; the block length is 4^n bits for every scheme

    Raises:
        LayoutError: Unknown scheme, n < 1, or a symbol width no kernel handles
        CapacityError: If 4^n exceeds POLAR_MAX_BLOCK_BITS
    """
    return _build_layout_cached(scheme, int(n))


@lru_cache(maxsize=32)
def _build_layout_cached(scheme: str, n: int) -> Layout:
    plan = get_scheme(scheme)
    if n < 1:
        raise LayoutError(f"Recursion depth must be at least 1, got {n}")
    if 4 ** n > MAX_BLOCK_BITS:
        raise CapacityError(
            f"Block length 4^{n} = {4 ** n} exceeds POLAR_MAX_BLOCK_BITS={MAX_BLOCK_BITS}"
        )
    depth = plan.tree_depth(n)

    # Every kernel at one level must share its arity; resolve them first
    level_kernels: List[Dict[int, Kernel]] = [{}]
    arities = []
    for level in range(1, depth + 1):
        kernels = {}
        for width in (1, 2):
            k = plan.pick(level, width)
            if k is not None:
                kernels[width] = k
        if len({k.ell for k in kernels.values()}) != 1:
            raise LayoutError(f"Scheme {scheme}: kernels at level {level} differ in arity")
        level_kernels.append(kernels)
        arities.append(next(iter(kernels.values())).ell)

    instances = [1] * (depth + 1)
    for level in range(depth - 1, -1, -1):
        instances[level] = instances[level + 1] * arities[level]

    root = Channel(level=0, position=0, width=plan.base_width, start=0, instances=instances[0])
    levels: List[Tuple[Channel, ...]] = [(root,)]
    children_index: List[Tuple[Tuple[int, ...], ...]] = []

    for level in range(1, depth + 1):
        produced: List[Channel] = []
        links = []
        for parent in levels[-1]:
            k = level_kernels[level].get(parent.width)
            if k is None or k.symbol_width != parent.width:
                raise LayoutError(
                    f"Scheme {scheme}: no kernel for width-{parent.width} channels at level {level}"
                )
            ids = []
            for group, (offset, width) in enumerate(zip(k.group_offsets, k.input_groups)):
                ids.append(len(produced))
                produced.append(Channel(
                    level=level,
                    position=len(produced),
                    width=width,
                    start=parent.start + offset * instances[level],
                    instances=instances[level],
                    parent=parent.position,
                    group=group,
                    kernel_path=parent.kernel_path + (k.name,),
                ))
            links.append(tuple(ids))
        levels.append(tuple(produced))
        children_index.append(tuple(links))

    layout = Layout(
        scheme=scheme,
        n=n,
        levels=tuple(levels),
        level_kernels=tuple(level_kernels),
        children_index=tuple(children_index),
    )
    if sum(c.width for c in layout.channels) != layout.block_bits:
        raise LayoutError(f"Scheme {scheme}: channel widths do not cover the block")
    logger.info(f"Built {scheme} layout: n={n}, N={layout.block_bits}, nu={layout.nu}")
    return layout


def glued_channel_count(layout: Layout) -> int:
    """Number of width-2 synthesized channels (gamma_n for the mixed scheme)."""
    if layout.scheme != 'mixed':
        raise LayoutError("The glued-channel count is defined for the mixed scheme")
    return sum(1 for c in layout.channels if c.is_glued)


def glued_count_formula(n: int) -> int:
    """Closed form (4^n / 2)(1 - 2^-n), kept in integers."""
    return (4 ** n - 2 ** n) // 2


# =============================================================================
# ENCODING
# =============================================================================

def _encode_node(layout: Layout, ch: Channel, u: np.ndarray) -> np.ndarray:
    """Values of ch across its instances: shape (batch, instances, width)."""
    batch = u.shape[0]
    if ch.level == layout.depth:
        return u[:, ch.start:ch.start + ch.width].reshape(batch, 1, ch.width)
    k = layout.kernel_for(ch)
    parts = [_encode_node(layout, child, u) for child in layout.children(ch)]
    v = np.concatenate(parts, axis=2).astype(np.int64)
    x = (v @ k.matrix.astype(np.int64)) % 2
    return x.reshape(batch, ch.instances, ch.width).astype(np.uint8)


def encode(layout: Layout, u) -> np.ndarray:
    """
    Apply the recursive construction to one message or a batch of them.

    Args:
        layout: The layout to encode through
        u: Array of shape (N,) or (batch, N)

    Returns:
        x with the same shape as u; x[j] is the j-th transmitted bit

    Raises:
        LayoutError: If the message length is not N
    """
    u = np.asarray(u, dtype=np.uint8)
    single = u.ndim == 1
    batch = u.reshape(1, -1) if single else u
    if batch.shape[-1] != layout.block_bits:
        raise LayoutError(f"Message has {batch.shape[-1]} bits, layout expects {layout.block_bits}")
    x = _encode_node(layout, layout.root, batch).reshape(batch.shape[0], layout.block_bits)
    return x[0] if single else x


def equivalent_generator_matrix(layout: Layout, chunk: int = 512) -> np.ndarray:
    """
    N x N matrix M with encode(u) = uM.

    Raises:
        CapacityError: If N exceeds POLAR_MAX_GENERATOR_BITS
    """
    N = layout.block_bits
    if N > MAX_GENERATOR_BITS:
        raise CapacityError(
            f"Generator matrix for N={N} exceeds POLAR_MAX_GENERATOR_BITS={MAX_GENERATOR_BITS}"
        )
    rows = []
    for first in range(0, N, chunk):
        unit = np.zeros((min(chunk, N - first), N), dtype=np.uint8)
        unit[np.arange(unit.shape[0]), first + np.arange(unit.shape[0])] = 1
        rows.append(encode(layout, unit))
    return np.vstack(rows)
