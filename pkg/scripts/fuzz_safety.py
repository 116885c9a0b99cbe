#!/usr/bin/env python3
"""Fuzz type safety: trace-check generated intermediate-language terms.

Generates closed well-typed terms over a corpus program's method
environment and walks each evaluation trace, re-typechecking after every
step.

Usage: python3 scripts/fuzz_safety.py [--count N] [--seed N] [--size N]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dictelab.harness import check_metatheory, generate_fd_term
from dictelab.parser import parse_program
from dictelab.source_typer import typecheck_program

DEFAULT_PROGRAM = (Path(__file__).resolve().parent.parent
                   / "tests" / "corpus" / "P2.src")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--program", type=Path, default=DEFAULT_PROGRAM,
                    help="source program supplying classes and instances")
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--size", type=int, default=6)
    ap.add_argument("--fuel", type=int, default=100_000)
    args = ap.parse_args()

    r = typecheck_program(parse_program(args.program.read_text()))
    sigma, _ = r.fd_elabs[0]
    steps = 0
    failures = []
    for i in range(args.count):
        e = generate_fd_term(args.seed + i, args.size, sigma, r.fd_class_env)
        rep = check_metatheory(sigma, r.fd_class_env, e, args.fuel)
        steps += rep.steps_checked
        if not (rep.preservation_ok and rep.progress_ok and rep.fuel_ok):
            failures.append((args.seed + i, rep))
    print(f"{args.count} terms, {steps} trace steps checked")
    if failures:
        for seed, rep in failures:
            print(f"seed {seed}: {rep}")
        return 1
    print("no preservation, progress or fuel violations")
    return 0


if __name__ == "__main__":
    sys.exit(main())
