"""Print direct vs model parameter counts as the number of parents grows."""

from __future__ import annotations

import argparse

from sici.analysis import Shape, format_growth, growth_table
from sici.model import VARIANTS


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--variant", choices=VARIANTS + ("all",), default="all")
    parser.add_argument("--max-n", type=int, default=8)
    parser.add_argument("--parent-card", type=int, default=2)
    parser.add_argument("--child-card", type=int, default=2)
    parser.add_argument("--block-size", type=int, default=2, help="parents per mechanism for surjective variants")
    args = parser.parse_args()
    shape = Shape(args.parent_card, args.child_card, block_size=args.block_size)
    variants = VARIANTS if args.variant == "all" else (args.variant,)
    for v in variants:
        print(f"# {v}")
        print(format_growth(growth_table(v, range(1, args.max_n + 1), shape)))
        print()


if __name__ == "__main__":
    main()
