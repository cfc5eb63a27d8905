"""Maximum number of violating Charlies per state and inequality.

Also prints the 12-Charlie chain of an explicit W-state construction: both
of Charlie's settings along z, which earlier unsharp z measurements leave
untouched, so every Charlie sees the same CHSH-type value on Alice and Bob.
"""

import argparse
import math
import time

from seqnonlocal.measure import BlochDirection, Sharpness
from seqnonlocal.protocol import MAX_CHARLIES, Charlie, InitialState, PartySettings, ScenarioConfig, evaluate
from seqnonlocal.search import max_observers


def z_aligned_chain(n):
    alpha = math.atan2(2, 3)
    alice = PartySettings(BlochDirection(math.pi, 0.0), BlochDirection(math.pi / 2, 0.0))
    bob = PartySettings(BlochDirection(alpha, 0.0), BlochDirection(alpha, math.pi))
    charlie = PartySettings(BlochDirection(0.0, 0.0), BlochDirection(0.0, 0.0))
    lam = 2.01 / (2 * math.sqrt(13 / 9))
    lams = [lam] * (n - 1) + [1.0]
    charlies = tuple(Charlie(charlie, Sharpness(l)) for l in lams)
    return ScenarioConfig(InitialState.w(), alice, bob, charlies)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--budget", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for kind, state in (("mermin", "GHZ"), ("svetlichny", "GHZ"), ("mermin", "W"), ("svetlichny", "W")):
        t = time.perf_counter()
        k = max_observers(kind, state, budget=args.budget, seed=args.seed)
        print(f"max_observers({kind}, {state}) = {k}  ({time.perf_counter() - t:.0f}s)")

    report = evaluate(z_aligned_chain(MAX_CHARLIES))
    vals = report.values("mermin")
    print(f"z-aligned W construction, {MAX_CHARLIES} Charlies, Mermin values:")
    print("  " + ", ".join(f"{v:.4f}" for v in vals))
    print(f"  sharp value 2*sqrt(13/9) = {2 * math.sqrt(13 / 9):.4f}")


if __name__ == "__main__":
    main()
