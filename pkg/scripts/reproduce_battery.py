"""Run the pinned battery and print one line per item.

    python3 scripts/reproduce_battery.py [--skip-slow] [--seed 0]
"""

import argparse
import sys

from seqnonlocal.reproduce import run_battery


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--skip-slow", action="store_true")
    args = ap.parse_args()

    items = run_battery(seed=args.seed, skip_slow=args.skip_slow)
    for it in items:
        flag = "ok  " if it.passed else "MISS"
        print(f"{flag} {it.name:<40} expected={it.expected!s:<14} computed={it.computed!s:<24} {it.seconds:6.1f}s {it.note}")
    return 0 if all(i.passed for i in items) else 1


if __name__ == "__main__":
    sys.exit(main())
