#!/usr/bin/env python3
"""
plot_curve.py - Plot the union-bound curves written by `polar.py curve`

Usage: python3 docs/plot_curve.py results/curve_n7.csv [output.png]

The CSV starts with a '#' comment line; csv.DictReader reads the rest.
One line per scheme, block error bound on a log axis.
"""

import csv
import sys
from collections import defaultdict

from matplotlib import pyplot as plt


def read_curves(path):
    curves = defaultdict(lambda: ([], []))
    with open(path, newline='', encoding='utf-8') as handle:
        rows = csv.DictReader(line for line in handle if not line.startswith('#'))
        for row in rows:
            rates, bounds = curves[row['scheme']]
            rates.append(float(row['rate']))
            bounds.append(max(float(row['bound']), 1e-300))
    return curves


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        sys.exit(2)
    curves = read_curves(sys.argv[1])
    for scheme, (rates, bounds) in sorted(curves.items()):
        plt.semilogy(rates, bounds, marker='o', label=scheme)
    plt.xlabel("rate K/N")
    plt.ylabel("union bound on block error")
    plt.grid(True, which='both', alpha=0.3)
    plt.legend()
    if len(sys.argv) > 2:
        plt.savefig(sys.argv[2], dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
