#!/usr/bin/env python3
"""
Compare orbit_member with the brute-force oracle on every pair of series.

The instance set is every nonconstant series over F_p with exponents in
[0, P) and precision P (62 series for the default p = 2, P = 6). A
disagreement is a Witness on one side against NotInOrbit on the other;
Unknown answers from orbit_member are counted, not compared.

Usage:
  python scripts/run_oracle_check.py
  python scripts/run_oracle_check.py --p 3 --prec 4 --n 2
"""

import argparse
import itertools
import logging
import sys
from collections import Counter
from pathlib import Path

# Ensure project root is on path when running script directly
_project_root = Path(__file__).resolve().parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

from rich.console import Console
from rich.table import Table

from src.algebra.series import Series
from src.config import SEARCH_DEPTH
from src.orbits.orbit import brute_force_witness, orbit_member

console = Console()
logger = logging.getLogger("oracle")


def instance_set(p: int, prec: int):
    for coefficients in itertools.product(range(p), repeat=prec):
        x = Series.from_dict(p, dict(enumerate(coefficients)), prec)
        if any(e != 0 for e, _ in x.terms):
            yield x


def main() -> int:
    parser = argparse.ArgumentParser(description="orbit_member against exhaustive enumeration")
    parser.add_argument("--p", type=int, default=2, help="Characteristic (small prime)")
    parser.add_argument("--prec", type=int, default=6, help="Precision P of every instance")
    parser.add_argument("--n", type=int, default=1, help="Congruence level")
    parser.add_argument("--depth", type=int, default=SEARCH_DEPTH, help="orbit_member search depth")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    args = parser.parse_args()

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s | %(name)s | %(levelname)s | %(message)s",
        datefmt="%H:%M:%S",
    )

    series = list(instance_set(args.p, args.prec))
    counts: Counter = Counter()
    disagreements = []
    with console.status(f"Checking {len(series) ** 2} pairs...", spinner="dots"):
        for a, b in itertools.product(series, repeat=2):
            fast = orbit_member(a, b, args.n, args.depth)
            oracle = brute_force_witness(a, b, args.prec, args.n)
            counts[(fast.kind, oracle.kind)] += 1
            if fast.kind != "unknown" and fast.kind != oracle.kind:
                disagreements.append((a, b, fast, oracle))

    table = Table(title=f"orbit_member vs brute force (p={args.p}, P={args.prec}, n={args.n})")
    table.add_column("orbit_member", style="bold")
    table.add_column("oracle", style="cyan")
    table.add_column("pairs", justify="right")
    for (fast_kind, oracle_kind), count in sorted(counts.items()):
        table.add_row(fast_kind, oracle_kind, str(count))
    console.print(table)

    unknown = sum(c for (fast_kind, _), c in counts.items() if fast_kind == "unknown")
    console.print(f"Unknown (excluded): {unknown}")
    if disagreements:
        for a, b, fast, oracle in disagreements[:10]:
            console.print(f"[red]DISAGREE[/red] a={a}  b={b}  member={fast.kind}  oracle={oracle.kind}")
        console.print(f"[bold red]{len(disagreements)} disagreements[/bold red]")
        return 1
    console.print("[bold green]No disagreements[/bold green]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
