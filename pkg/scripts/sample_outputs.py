#!/usr/bin/env python3
"""Print a sample of generated skeletal inequalities with their order types,
pure correspondents, and translations.  Handy for eyeballing the engine.

Usage: python scripts/sample_outputs.py [--count N] [--seed S] [--depth D]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hybridcorr.alba import run
from hybridcorr.generate import GeneratorConfig, SkeletalGenerator
from hybridcorr.translate import tr_quasiset


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--depth", type=int, default=4)
    args = ap.parse_args()

    gen = SkeletalGenerator(
        seed=args.seed, config=GeneratorConfig(max_depth=args.depth)
    )
    for k in range(args.count):
        ineq, eps = gen.inequality()
        result = run(ineq, eps_hint=eps)
        print(f"[{k}] input:      {ineq}")
        print(f"    order type: {eps}")
        for q in result.quasis:
            print(f"    pure:       {q}")
        print(f"    translated: {tr_quasiset(list(result.quasis))}")
        print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
