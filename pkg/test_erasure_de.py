#!/usr/bin/env python3
"""Erasure density evolution, checked against exact channel splitting."""

import numpy as np

from algebra.gf2 import Subgroup, subgroups
from channels.dmc import (
    bhattacharyya,
    capacity,
    make_bec,
    merge_equivalent_outputs,
    product_channel,
    split_channel,
)
from channels.erasure_de import (
    SubgroupStateDist,
    bec_base_state,
    de_evolve,
    de_split,
    state_metrics,
    transition_table,
)
from coding.construction import build_layout, scheme_names
from coding.kernels import G1, G2, UV2
from errors import ChannelError, UnsupportedWidthError


def raises(exc_type, fn, *args):
    try:
        fn(*args)
    except exc_type:
        return True
    return False


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def assert_matches_dmc(state, W, tol=1e-10):
    """DE metrics of a state agree with the brute-force channel."""
    m = state_metrics(state)
    z, z_max, z_min = bhattacharyya(W)
    assert close(m.I, capacity(W), tol)
    assert close(m.Z, z, tol)
    assert close(m.z_max, z_max, tol)
    assert close(m.z_min, z_min, tol)


def test_base_state_width_two():
    s = bec_base_state(0.3, 2)
    probs = s.as_dict()
    assert close(probs[Subgroup.from_generators(2, [])], 0.49)
    assert close(probs[Subgroup.from_generators(2, [[1, 0]])], 0.21)
    assert close(probs[Subgroup.from_generators(2, [[0, 1]])], 0.21)
    assert close(probs[Subgroup.from_generators(2, [[1, 1]])], 0.0)
    assert close(probs[Subgroup.from_generators(2, [[1, 0], [0, 1]])], 0.09)


def test_base_state_errors():
    assert raises(ChannelError, bec_base_state, -0.1, 1)
    assert raises(UnsupportedWidthError, bec_base_state, 0.5, 3)
    assert raises(ChannelError, SubgroupStateDist.from_probs, 1, [0.5, 0.6])
    assert raises(ChannelError, SubgroupStateDist.from_probs, 1, [1.0])


def test_uv2_split():
    base = bec_base_state(0.5, 1)
    assert np.allclose(de_split(UV2, base, 0).probs, [0.25, 0.75])
    assert np.allclose(de_split(UV2, base, 1).probs, [0.75, 0.25])


def test_transition_table_size():
    assert transition_table(G1, 1).size == 2 ** 4
    assert transition_table(G2, 0).size == 5 ** 4
    # Every realization lands on a valid child subgroup
    assert transition_table(G1, 1).max() < len(subgroups(2))


def test_split_width_mismatch():
    assert raises(ChannelError, de_split, G2, bec_base_state(0.5, 1), 0)


def test_g1_level_matches_exact_split():
    for eps in (0.2, 0.5, 0.8):
        W = make_bec(eps)
        base = bec_base_state(eps, 1)
        for group in range(3):
            exact = merge_equivalent_outputs(split_channel(G1, W, group))
            assert_matches_dmc(de_split(G1, base, group), exact)


def test_g2_on_product_bec_matches_exact_split():
    eps = 0.4
    W2 = product_channel(make_bec(eps))
    base = bec_base_state(eps, 2)
    for group in range(4):
        exact = merge_equivalent_outputs(split_channel(G2, W2, group))
        assert_matches_dmc(de_split(G2, base, group), exact)


def test_mixed_n2_matches_two_level_split():
    # Level 1 with g1, then level 2 with g1 or g2 depending on the width
    eps = 0.5
    W = make_bec(eps)
    de = de_evolve(build_layout("mixed", 2), eps)
    leaves = iter(de.channels)
    for group in range(3):
        mid = merge_equivalent_outputs(split_channel(G1, W, group))
        kernel = G1 if mid.width == 1 else G2
        for child in range(len(kernel.input_groups)):
            exact = merge_equivalent_outputs(split_channel(kernel, mid, child))
            prof = next(leaves)
            assert prof.width == exact.width
            assert_matches_dmc(prof.state, exact, 1e-9)


def test_information_is_conserved():
    for scheme in scheme_names():
        de = de_evolve(build_layout(scheme, 3), 0.37)
        for level in range(de.layout.depth + 1):
            assert close(de.mean_information(level), 0.63, 1e-9)


def test_extreme_epsilons():
    de0 = de_evolve(build_layout("mixed", 2), 0.0)
    assert all(close(p.metrics.I, p.width) for p in de0.channels)
    assert all(p.pe() == 0.0 for p in de0.channels)
    de1 = de_evolve(build_layout("mixed", 2), 1.0)
    assert all(close(p.metrics.I, 0.0) for p in de1.channels)


def test_metrics_ordering():
    de = de_evolve(build_layout("mixed", 3), 0.5)
    for p in de.channels:
        m = p.metrics
        assert m.log2_z_min <= m.log2_z + 1e-12 <= m.log2_z_max + 2e-12
        assert m.pe_guess <= m.pe_ambiguous + 1e-15
        assert 0.0 <= m.I <= p.width + 1e-12


def test_log_domain_keeps_tiny_channels_ordered():
    de = de_evolve(build_layout("mixed", 7), 0.5)
    log_z = [p.metrics.log2_z for p in de.channels]
    assert min(log_z) < -1100
    assert np.isfinite(min(log_z))


def test_to_rows():
    de = de_evolve(build_layout("mixed", 2), 0.5)
    header, rows = de.to_rows()
    assert header[:7] == ['channel_start_index', 'width', 'I', 'Z', 'P_e_ambiguous', 'P_e_guess', 'log2_Z']
    assert len(header) == 7 + 2 + 5
    assert len(rows) == 10
    assert [r[0] for r in rows] == [1, 2, 4, 5, 7, 9, 11, 13, 14, 16]
    assert rows[0][9] == ''


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in list(globals().items()) if name.startswith("test_")]
    print("=" * 60)
    print(f"Running {len(tests)} density evolution tests")
    print("=" * 60)
    for name, fn in tests:
        fn()
        print(f"  ok  {name}")
    print("All passed.")
