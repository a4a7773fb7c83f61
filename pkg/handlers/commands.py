"""
commands.py - One handler per command-line subcommand

WHAT THIS FILE DOES:
Each handle_*_command function takes a validated RunConfig, calls the
library modules, and returns the text to write (CSV or JSON).

LEARNING MOMENT: Separation of Concerns
This file doesn't compute density evolution (channels/ does that).
This file doesn't pick information sets (design/ does that).
This file doesn't format numbers (reports/ does that).

It just coordinates between them, so every piece can be tested without
going through the command line.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from analysis.polar_process import (
    information_means,
    martingale_check,
    polarization_fraction,
    rate_of_polarization_check,
    slln_tail_check,
    z_bound_check,
)
from channels.erasure_de import de_evolve
from coding.construction import build_layout, glued_channel_count, glued_count_formula, scheme_names
from coding.kernels import G2, KERNELS, exponent_bounds, kernel_to_json, mixed_exponent_bounds, partial_distances
from coding.sc_codec import marginalization_cost, simulate_bler
from config import DEFAULT_SEED, DEFAULT_THREADS
from design.code_design import block_error_bound, curve_from_de, rate_to_k, select_information_set
from reports.writer import FORMATS, Table, render, render_document

logger = logging.getLogger(__name__)

DEFAULT_RATES = tuple(round(0.05 * i, 2) for i in range(1, 15))
REPORTS = ('martingale', 'polarization', 'rate', 'slln', 'zbound')
# Subcommands that accept --scheme all; kernels ignores --scheme
ALL_SCHEME_COMMANDS = ('kernels', 'curve', 'complexity')

CONVENTIONS = "row-vector x=uG, I in bits, Z averaged over symbol pairs, log2_Z base 2"


@dataclass
class RunConfig:
    """
    Everything one invocation needs. Defaults match the command-line flags.
    """
    command: str
    scheme: str = 'mixed'
    n: int = 2
    epsilon: float = 0.5
    rates: List[float] = field(default_factory=list)
    K: Optional[int] = None
    delta: float = 0.1
    beta: float = 0.4
    trials: int = 1000
    seed: int = DEFAULT_SEED
    threads: int = DEFAULT_THREADS
    out: Optional[str] = None
    format: Optional[str] = None
    report: str = 'all'
    strategy: str = 'balanced'
    metric: str = 'ambiguous'
    steps: int = 200
    paths: int = 10000
    per_group: bool = False
    force_pre_tail: bool = False
    timing: bool = False

    def validate(self) -> None:
        """Raise ValueError describing the first invalid setting."""
        if self.command not in HANDLERS:
            raise ValueError(f"Unknown command '{self.command}'")
        allowed = scheme_names() + ['all']
        if self.scheme not in allowed:
            raise ValueError(f"--scheme must be one of {', '.join(allowed)}")
        if self.scheme == 'all' and self.command not in ALL_SCHEME_COMMANDS:
            raise ValueError(
                f"--scheme all is only valid for {', '.join(ALL_SCHEME_COMMANDS)}, not {self.command}"
            )
        if self.n < 1:
            raise ValueError(f"--n must be at least 1, got {self.n}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"--epsilon must be in [0, 1], got {self.epsilon}")
        if any(not 0.0 <= r <= 1.0 for r in self.rates):
            raise ValueError("--rate values must be in [0, 1]")
        if self.K is not None and self.K < 0:
            raise ValueError(f"--K must be non-negative, got {self.K}")
        if not 0.0 <= self.delta <= 0.5:
            raise ValueError(f"--delta must be in [0, 0.5], got {self.delta}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"--beta must be in (0, 1), got {self.beta}")
        if self.trials < 1:
            raise ValueError(f"--trials must be at least 1, got {self.trials}")
        if self.threads < 1:
            raise ValueError(f"--threads must be at least 1, got {self.threads}")
        if self.format is not None and self.format not in FORMATS:
            raise ValueError(f"--format must be csv or json, got {self.format}")
        if self.report not in REPORTS + ('all',):
            raise ValueError(f"--report must be one of {', '.join(REPORTS)} or all")
        if self.steps < 1 or self.paths < 1:
            raise ValueError("--steps and --paths must be at least 1")
        if self.command in ('select', 'simulate') and self.K is None and len(self.rates) != 1:
            raise ValueError(f"{self.command} needs --K or a single --rate")

    @property
    def fmt(self) -> str:
        return self.format or 'csv'

    def schemes(self) -> List[str]:
        return scheme_names() if self.scheme == 'all' else [self.scheme]


def _target_k(config: RunConfig, N: int) -> int:
    if config.K is not None:
        if config.K > N:
            raise ValueError(f"--K must be at most N={N}, got {config.K}")
        return config.K
    return rate_to_k(config.rates[0], N)


# =============================================================================
# SUBCOMMANDS
# =============================================================================

def handle_kernels_command(config: RunConfig) -> str:
    """Partial distances and exponents of every shipped kernel."""
    rows = []
    documents = []
    for name, k in KERNELS.items():
        dist = partial_distances(k)
        bounds = exponent_bounds(k, dist)
        uniform = exponent_bounds(k, dist, weighting='uniform')
        rows.append([name, k.total_bits, k.ell, list(k.input_groups),
                     list(dist.d_min), list(dist.d_max), bounds.e1, bounds.e2, uniform.e1, uniform.e2])
        document = {'kernel': json.loads(kernel_to_json(k))}
        document.update({'d_min': list(dist.d_min), 'd_max': list(dist.d_max),
                         'E1': bounds.e1, 'E2': bounds.e2,
                         'E1_uniform': uniform.e1, 'E2_uniform': uniform.e2})
        documents.append(document)
    mixed = mixed_exponent_bounds([G2])
    rows.append(['mixed(g1,g2)', '', '', '', '', '', mixed.e1, mixed.e2, '', ''])

    if config.fmt == 'json':
        return render_document({'kernels': documents, 'mixed': {'E1': mixed.e1, 'E2': mixed.e2}})
    table = Table(
        name='kernels',
        columns=['kernel', 'L', 'ell', 'input_widths', 'D_min', 'D_max', 'E1', 'E2',
                 'E1_uniform', 'E2_uniform'],
        rows=rows,
        meta={'exponent': 'bit-share weighted (m_i/L) log_ell of partial distances',
              'exponent_uniform': '(1/ell) sum over groups'},
    )
    return render([table], 'csv')


def handle_layout_command(config: RunConfig) -> str:
    """Layout JSON (default) or one CSV row per synthesized channel."""
    layout = build_layout(config.scheme, config.n)
    if config.format in (None, 'json'):
        document = layout.to_json()
        if layout.scheme == 'mixed':
            document['gamma'] = glued_channel_count(layout)
            document['gamma_formula'] = glued_count_formula(config.n)
        return render_document(document)
    table = Table(
        name='layout',
        columns=['position', 'indices', 'width', 'kernel_path'],
        rows=[[c.position, list(c.indices), c.width, '/'.join(c.kernel_path)] for c in layout.channels],
        meta={'scheme': layout.scheme, 'n': layout.n, 'N': layout.block_bits, 'nu': layout.nu},
    )
    return render([table], 'csv')


def handle_de_command(config: RunConfig) -> str:
    de = de_evolve(build_layout(config.scheme, config.n), config.epsilon)
    columns, rows = de.to_rows()
    table = Table(
        name='de',
        columns=columns,
        rows=rows,
        meta={'scheme': config.scheme, 'n': config.n, 'N': de.layout.block_bits,
              'epsilon': config.epsilon, 'conventions': CONVENTIONS},
    )
    return render([table], config.fmt)


def handle_curve_command(config: RunConfig) -> str:
    """Union-bound curves, one block of rows per scheme."""
    rates = config.rates or list(DEFAULT_RATES)
    rows = []
    for scheme in config.schemes():
        de = de_evolve(build_layout(scheme, config.n), config.epsilon)
        for p in curve_from_de(de, rates, config.strategy, config.metric):
            rows.append([p.scheme, p.N, p.epsilon, p.rate, p.K, p.bound, p.union_sum, p.exact])
    table = Table(
        name='curve',
        columns=['scheme', 'N', 'epsilon', 'rate', 'K', 'bound', 'union_sum', 'exact'],
        rows=rows,
        meta={'n': config.n, 'metric': f'P_e_{config.metric}', 'strategy': config.strategy,
              'bound': 'min(1, sum of P_e over information channels)'},
    )
    return render([table], config.fmt)


def handle_select_command(config: RunConfig) -> str:
    de = de_evolve(build_layout(config.scheme, config.n), config.epsilon)
    target = _target_k(config, de.layout.block_bits)
    info = select_information_set(de, target, config.strategy, config.metric)
    profiles = de.channels
    rows = [[p, list(profiles[p].indices), profiles[p].width, profiles[p].pe(config.metric)]
            for p in info.selected]
    table = Table(
        name='select',
        columns=['position', 'indices', 'width', f'P_e_{config.metric}'],
        rows=rows,
        meta={'scheme': config.scheme, 'n': config.n, 'epsilon': config.epsilon,
              'target_K': info.target_K, 'K': info.K, 'exact': info.exact,
              'bound': block_error_bound(de, info, config.metric), 'frozen_values': 'zero'},
    )
    return render([table], config.fmt)


def handle_simulate_command(config: RunConfig) -> str:
    layout = build_layout(config.scheme, config.n)
    de = de_evolve(layout, config.epsilon)
    info = select_information_set(de, _target_k(config, layout.block_bits), config.strategy, config.metric)
    result = simulate_bler(layout, info, config.epsilon, config.trials, config.seed, config.threads)
    elapsed = result.elapsed_seconds if config.timing else ''
    table = Table(
        name='simulate',
        columns=['scheme', 'N', 'K', 'epsilon', 'trials', 'seed', 'bler', 'stderr', 'elapsed_seconds'],
        rows=[[config.scheme, layout.block_bits, info.K, config.epsilon, config.trials, config.seed,
               result.estimate, result.stderr, elapsed]],
        meta={'union_bound': block_error_bound(de, info, config.metric), 'decoder': 'SC, ties to lowest symbol'},
    )
    return render([table], config.fmt)


def _martingale_table(config: RunConfig) -> Table:
    rows = []
    for n in range(1, config.n + 1):
        de = de_evolve(build_layout('mixed', n), config.epsilon)
        deviation = martingale_check(config.epsilon, n)
        rows.append([n, config.epsilon, deviation, information_means(de)[-1]])
    return Table('martingale', ['n', 'epsilon', 'max_deviation', 'mean_I'], rows,
                 {'expected_mean_I': 1.0 - config.epsilon})


def _polarization_table(config: RunConfig) -> Table:
    rows = [[n, config.epsilon, config.delta, polarization_fraction(config.epsilon, n, config.delta)]
            for n in range(1, config.n + 1)]
    return Table('polarization', ['n', 'epsilon', 'delta', 'mass_unpolarized'], rows)


def _rate_table(config: RunConfig) -> Table:
    rows = []
    for n in range(1, config.n + 1):
        r = rate_of_polarization_check(config.epsilon, n, config.beta)
        rows.append([r.beta, r.n, r.mass_below, r.mass_above, r.capacity])
    bounds = exponent_bounds(G2)
    return Table('rate', ['beta', 'n', 'mass_below_threshold', 'mass_above_threshold', 'capacity'], rows,
                 {'threshold': '2^-(4^(beta n))', 'E1': bounds.e1, 'E2': bounds.e2})


def _slln_tables(config: RunConfig) -> List[Table]:
    r = slln_tail_check(config.steps, config.paths, config.seed, force_pre_tail=config.force_pre_tail)
    summary = Table('slln', ['n_steps', 'paths', 'mean', 'dispersion', 'limit'],
                    [[r.n_steps, r.paths, r.mean, r.dispersion, r.limit]],
                    {'seed': config.seed, 'force_pre_tail': config.force_pre_tail})
    edges = r.bin_edges
    histogram = Table('slln_histogram', ['bin_low', 'bin_high', 'count'],
                      [[edges[i], edges[i + 1], c] for i, c in enumerate(r.histogram)])
    return [summary, histogram]


def _zbound_table(config: RunConfig) -> Table:
    rows = []
    for n in range(1, config.n + 1):
        r = z_bound_check(config.epsilon, n, per_group=config.per_group)
        rows.append([n, config.epsilon, r.edges, r.violations, r.worst_upper_gap, r.worst_lower_gap])
    return Table('zbound', ['n', 'epsilon', 'edges', 'violations', 'worst_upper_gap_log2', 'worst_lower_gap_log2'],
                 rows, {'constants': 'per-group' if config.per_group else 'c1=4^3 c2=4^-6'})


def handle_process_command(config: RunConfig) -> str:
    """Tree-process reports; --report all writes every table in turn."""
    wanted = REPORTS if config.report == 'all' else (config.report,)
    tables: List[Table] = []
    for report in wanted:
        if report == 'martingale':
            tables.append(_martingale_table(config))
        elif report == 'polarization':
            tables.append(_polarization_table(config))
        elif report == 'rate':
            tables.append(_rate_table(config))
        elif report == 'slln':
            tables.extend(_slln_tables(config))
        elif report == 'zbound':
            tables.append(_zbound_table(config))
    return render(tables, config.fmt)


def handle_complexity_command(config: RunConfig) -> str:
    rows = []
    for scheme in config.schemes():
        layout = build_layout(scheme, config.n)
        cost = marginalization_cost(layout)
        rows.append([scheme, config.n, layout.block_bits, cost.multiplications, cost.additions, cost.total])
    table = Table('complexity', ['scheme', 'n', 'N', 'multiplications', 'additions', 'total'], rows,
                  {'counted': 'brute-force kernel marginalization in one SC pass'})
    return render([table], config.fmt)


HANDLERS: Dict[str, Callable[[RunConfig], str]] = {
    'kernels': handle_kernels_command,
    'layout': handle_layout_command,
    'de': handle_de_command,
    'curve': handle_curve_command,
    'select': handle_select_command,
    'simulate': handle_simulate_command,
    'process': handle_process_command,
    'complexity': handle_complexity_command,
}


def run(config: RunConfig) -> str:
    """Validate a config and produce the subcommand's output text."""
    config.validate()
    logger.info(f"Running {config.command} (scheme={config.scheme}, n={config.n}, epsilon={config.epsilon})")
    return HANDLERS[config.command](config)
