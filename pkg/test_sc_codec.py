#!/usr/bin/env python3
"""Successive-cancellation decoding, the genie oracle and Monte-Carlo BLER."""

from itertools import product

import numpy as np

from channels.dmc import DMC, ERASURE, make_bec, product_channel, split_channel
from channels.erasure_de import de_evolve
from coding.construction import build_layout, encode
from coding.kernels import G1, G2, UV2, UV4
from coding.sc_codec import (
    erasure_likelihoods,
    genie_ambiguity,
    kernel_step_likelihood,
    marginalization_cost,
    sc_decode,
    simulate_bler,
    symbol_likelihoods,
)
from design.code_design import block_error_bound, select_information_set
from errors import ChannelError, LayoutError


def raises(exc_type, fn, *args):
    try:
        fn(*args)
    except exc_type:
        return True
    return False


def transmit(layout, u, erased):
    received = np.where(erased, -1, encode(layout, u).astype(np.int64))
    return erasure_likelihoods(received, layout.base_width)


def assert_steps_match_split(kernel, W, tol=1e-10):
    """kernel_step_likelihood equals the split channel's posterior for every prefix and output tuple."""
    Y = W.outputs
    tuples = np.array(list(product(range(Y), repeat=kernel.ell)))
    child = W.probs.T[tuples]
    for group in range(len(kernel.input_groups)):
        start, _ = kernel.group_range(group)
        split = split_channel(kernel, W, group).probs
        for p in range(2 ** start):
            prefix = ((p >> np.arange(start - 1, -1, -1)) & 1).astype(np.uint8)
            lv = kernel_step_likelihood(kernel, child, np.broadcast_to(prefix, (len(tuples), start)), group)
            column = split[:, p * len(tuples):(p + 1) * len(tuples)].T
            seen = column.sum(axis=1) > 0
            expected = column[seen] / column[seen].sum(axis=1, keepdims=True)
            got = lv[seen] / lv[seen].sum(axis=1, keepdims=True)
            assert np.abs(got - expected).max() <= tol


def test_symbol_likelihood_of_mixed_output():
    e = 0.3
    lv = symbol_likelihoods(make_bec(e), ("0", "?"))
    assert np.allclose(lv, [(1 - e) * e, 0.0, (1 - e) * e, 0.0])
    assert np.allclose(symbol_likelihoods(product_channel(make_bec(e)), "0?"), lv)


def test_single_letter_likelihoods():
    W = make_bec(0.2)
    assert np.allclose(symbol_likelihoods(W, "1"), [0.0, 0.8])
    assert np.allclose(symbol_likelihoods(W, ERASURE), [0.2, 0.2])


def test_steps_match_split_channels():
    skewed = DMC(width=1, probs=np.array([[0.6, 0.3, 0.1], [0.2, 0.3, 0.5]]))
    assert_steps_match_split(UV2, skewed)
    assert_steps_match_split(G1, skewed)
    assert_steps_match_split(G1, make_bec(0.5))
    crossover = product_channel(DMC(width=1, probs=np.array([[0.85, 0.15], [0.3, 0.7]])))
    assert_steps_match_split(UV4, crossover)
    assert_steps_match_split(G2, crossover)


def test_glued_step_with_one_erasure():
    # u = (0, 1, 1, 0) gives x = 0110; the second position is erased
    u = np.array([0, 1, 1, 0], dtype=np.uint8)
    received = (u @ G1.matrix % 2).astype(np.int64)
    received[1] = -1
    lv = kernel_step_likelihood(G1, erasure_likelihoods(received[None], 1)[0], u[:1], 1)
    letters = ["?" if r < 0 else str(r) for r in received]
    W = make_bec(0.5)
    # Prefix u1 = 0 selects the first block of 3^4 output letters
    column = split_channel(G1, W, 1).probs[:, sum(W.letter(y) * 3 ** (3 - t) for t, y in enumerate(letters))]
    assert np.allclose(lv / lv.sum(), column / column.sum(), atol=1e-10)
    assert lv.tolist() == [0.0, 0.0, 0.0, 1.0]


def test_erasure_likelihoods_shapes():
    received = np.array([[0, -1, 1, 1]])
    assert erasure_likelihoods(received, 1).shape == (1, 4, 2)
    lv2 = erasure_likelihoods(received, 2)
    assert lv2.shape == (1, 2, 4)
    assert lv2[0, 0].tolist() == [1.0, 0.0, 1.0, 0.0]
    assert lv2[0, 1].tolist() == [0.0, 0.0, 0.0, 1.0]


def test_uv2_step():
    # x = (u1 + u2, u2) received as (0, 1): u1 must be 1
    child = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert kernel_step_likelihood(UV2, child, np.zeros(0, dtype=np.uint8), 0).tolist() == [0.0, 1.0]
    assert kernel_step_likelihood(UV2, child, np.array([1]), 1).tolist() == [0.0, 1.0]


def test_g1_step_glued_group():
    u = np.array([0, 1, 1, 0], dtype=np.uint8)
    x = u @ G1.matrix % 2
    child = np.eye(2)[x]
    lv = kernel_step_likelihood(G1, child, u[:1], 1)
    # Symbol value reads (u2, u3) with u2 least significant
    assert lv.tolist() == [0.0, 0.0, 0.0, 1.0]


def test_step_prefix_check():
    assert raises(LayoutError, kernel_step_likelihood, G1, np.ones((4, 2)), np.zeros(2), 1)


def test_noiseless_decoding_recovers_message():
    rng = np.random.default_rng(3)
    for scheme in ("mixed", "arikan", "rs4_top"):
        layout = build_layout(scheme, 2)
        u = rng.integers(0, 2, size=(5, 16), dtype=np.uint8)
        lvs = transmit(layout, u, np.zeros_like(u, dtype=bool))
        result = sc_decode(layout, lvs, np.ones(16, dtype=bool))
        assert np.array_equal(result.u, u)
        assert not result.failed.any()


def test_single_block_decoding():
    layout = build_layout("mixed", 1)
    u = np.array([1, 0, 1, 1], dtype=np.uint8)
    lvs = transmit(layout, u[None], np.zeros((1, 4), dtype=bool))[0]
    result = sc_decode(layout, lvs, np.ones(4, dtype=bool))
    assert result.u.tolist() == [1, 0, 1, 1]
    assert result.ambiguous.shape == (3,)


def test_decoder_shape_check():
    layout = build_layout("mixed", 1)
    assert raises(ChannelError, sc_decode, layout, np.ones((3, 2)), np.ones(4, dtype=bool))


def test_failure_matches_genie():
    rng = np.random.default_rng(11)
    layout = build_layout("mixed", 2)
    de = de_evolve(layout, 0.4)
    info = select_information_set(de, 8)
    mask = info.info_mask(layout)
    info_channels = np.array([mask[c.start] for c in layout.channels])
    for _ in range(60):
        u = np.zeros(16, dtype=np.uint8)
        u[mask] = rng.integers(0, 2, size=int(mask.sum()))
        erased = rng.random(16) < 0.4
        result = sc_decode(layout, transmit(layout, u[None], erased[None])[0], mask)
        genie = genie_ambiguity(layout, erased)
        assert bool(result.failed) == bool((genie & info_channels).any())
        if not result.failed:
            assert np.array_equal(result.u, u)


def test_frozen_channels_follow_genie():
    # With every channel frozen to the true values, flags equal the oracle's
    rng = np.random.default_rng(5)
    layout = build_layout("rs4_top", 2)
    for _ in range(30):
        u = rng.integers(0, 2, size=16, dtype=np.uint8)
        erased = rng.random(16) < 0.5
        result = sc_decode(layout, transmit(layout, u[None], erased[None])[0],
                           np.zeros(16, dtype=bool), frozen_u=u)
        assert np.array_equal(result.ambiguous, genie_ambiguity(layout, erased))
        assert np.array_equal(result.u, u)


def test_genie_extremes():
    layout = build_layout("mixed", 2)
    assert not genie_ambiguity(layout, np.zeros(16, dtype=bool)).any()
    assert genie_ambiguity(layout, np.ones(16, dtype=bool)).all()


def test_simulation_is_reproducible_across_threads():
    layout = build_layout("mixed", 2)
    info = select_information_set(de_evolve(layout, 0.4), 6)
    a = simulate_bler(layout, info, 0.4, 700, seed=9, threads=1)
    b = simulate_bler(layout, info, 0.4, 700, seed=9, threads=3)
    c = simulate_bler(layout, info, 0.4, 700, seed=10, threads=1)
    assert a.errors == b.errors
    assert a.estimate == b.estimate
    assert a.trials == 700
    assert c.trials == 700


def test_simulation_respects_union_bound():
    layout = build_layout("mixed", 2)
    de = de_evolve(layout, 0.3)
    info = select_information_set(de, 4)
    result = simulate_bler(layout, info, 0.3, 3000, seed=1)
    bound = block_error_bound(de, info)
    assert result.estimate <= bound + 4 * result.stderr + 0.01


def test_simulation_without_erasures():
    layout = build_layout("arikan", 2)
    info = select_information_set(de_evolve(layout, 0.0), 10)
    result = simulate_bler(layout, info, 0.0, 300, seed=2)
    assert result.errors == 0
    assert result.stderr == 0.0


def test_simulation_rejects_zero_trials():
    layout = build_layout("mixed", 1)
    info = select_information_set(de_evolve(layout, 0.5), 2)
    assert raises(ValueError, simulate_bler, layout, info, 0.5, 0, 1)


def test_mixed_is_cheaper_than_rs4_top():
    for n in range(2, 8):
        mixed = marginalization_cost(build_layout("mixed", n))
        rs = marginalization_cost(build_layout("rs4_top", n))
        assert mixed.total < rs.total
        assert mixed.multiplications > 0


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in list(globals().items()) if name.startswith("test_")]
    print("=" * 60)
    print(f"Running {len(tests)} decoder tests")
    print("=" * 60)
    for name, fn in tests:
        fn()
        print(f"  ok  {name}")
    print("All passed.")
