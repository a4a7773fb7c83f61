#!/usr/bin/env python3
"""The random tree process: martingale, polarization, rate and Z bounds."""

import numpy as np

from analysis.polar_process import (
    BoundConstants,
    information_means,
    martingale_check,
    polarization_fraction,
    rate_of_polarization_check,
    sample_branch_sequences,
    sample_path,
    slln_tail_check,
    z_bound_check,
)
from channels.erasure_de import de_evolve
from coding.construction import build_layout, scheme_names
from coding.kernels import G1, G2, exponent_bounds


def test_sample_path_widths_follow_t():
    for index in range(20):
        path = sample_path(0.5, 6, seed=4, index=index)
        assert len(path.steps) == 7
        for step in path.steps:
            assert 0.0 <= step.I <= 1.0 + 1e-12
            if path.T is None or step.n <= path.T:
                assert step.width == 1
            else:
                assert step.width == 2
        assert path.steps[-1].branch is None


def test_sample_path_is_reproducible():
    a = sample_path(0.3, 5, seed=8, index=2)
    b = sample_path(0.3, 5, seed=8, index=2)
    assert [s.branch for s in a.steps] == [s.branch for s in b.steps]
    assert a.T == b.T


def test_sample_path_other_schemes():
    path = sample_path(0.5, 4, seed=1, scheme="rs4_top")
    assert path.widths == [2] * 5
    assert path.T is None


def test_glue_time_is_geometric():
    seqs = sample_branch_sequences(12, 20000, seed=3)
    for k in range(3):
        frac = float(np.mean(seqs.T == k))
        assert abs(frac - 2.0 ** -(k + 1)) < 0.02
    assert (seqs.widths[:, 0] == 1).all()


def test_force_pre_tail_never_glues():
    seqs = sample_branch_sequences(30, 500, seed=3, force_pre_tail=True)
    assert (seqs.T == -1).all()
    assert (seqs.widths == 1).all()


def test_martingale_holds_exactly():
    for scheme in scheme_names():
        assert martingale_check(0.4, 3, scheme) < 1e-9


def test_information_means_are_flat():
    de = de_evolve(build_layout("mixed", 4), 0.25)
    assert np.allclose(information_means(de), 0.75, atol=1e-9)


def test_polarization_mass_shrinks():
    early = polarization_fraction(0.5, 2, 0.1)
    late = polarization_fraction(0.5, 6, 0.1)
    assert late < early
    assert polarization_fraction(0.0, 3, 0.1) == 0.0


def test_rate_of_polarization():
    low = rate_of_polarization_check(0.5, 7, 0.4)
    high = rate_of_polarization_check(0.5, 7, 0.8)
    assert low.capacity == 0.5
    assert 0.25 <= low.mass_below <= 0.5 + 1e-6
    assert high.mass_below < low.mass_below
    assert high.mass_below <= 0.05
    assert high.mass_below < rate_of_polarization_check(0.5, 5, 0.8).mass_below
    assert abs(low.e1 - exponent_bounds(G2).e1) < 1e-12


def test_rate_of_polarization_rejects_bad_beta():
    try:
        rate_of_polarization_check(0.5, 3, 1.5)
    except ValueError:
        return
    assert False, "beta outside (0, 1) must be rejected"


def test_slln_converges_to_auxiliary_exponent():
    report = slln_tail_check(200, 2000, seed=6)
    assert abs(report.limit - exponent_bounds(G2).e1) < 1e-12
    assert abs(report.mean - report.limit) < 0.01
    assert report.dispersion < 0.05
    assert slln_tail_check(5, 2000, seed=6).dispersion > report.dispersion
    assert sum(report.histogram) == 2000
    assert len(report.bin_edges) == len(report.histogram) + 1


def test_slln_control_run_stays_on_base_kernel():
    report = slln_tail_check(200, 2000, seed=6, force_pre_tail=True)
    assert abs(report.limit - exponent_bounds(G1).e1) < 1e-12
    assert abs(report.mean - 0.5) < 0.01


def test_z_bounds_hold():
    uniform = z_bound_check(0.5, 5)
    assert uniform.violations == 0
    assert uniform.worst_upper_gap >= -1e-9
    assert uniform.edges == sum(len(level) for level in build_layout("mixed", 5).levels[1:])
    per_group = z_bound_check(0.5, 5, per_group=True)
    assert per_group.violations == 0


def test_z_bounds_catch_bad_constants():
    tight = z_bound_check(0.5, 3, constants=BoundConstants(c1=1e-6, c2=1e6))
    assert tight.violations > 0


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in list(globals().items()) if name.startswith("test_")]
    print("=" * 60)
    print(f"Running {len(tests)} tree process tests")
    print("=" * 60)
    for name, fn in tests:
        fn()
        print(f"  ok  {name}")
    print("All passed.")
