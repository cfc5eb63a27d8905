"""M1 and M2 along a grid of lambda_1 at the GHZ-optimal settings (CSV to stdout)."""

import csv
import sys

import numpy as np

from seqnonlocal.protocol import chain_values, paper_scenario
from seqnonlocal.search import sweep


def main():
    template = paper_scenario("mermin", [0.5, 1.0])
    grid = [float(x) for x in np.linspace(0.05, 1.0, 20)]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["lambda_1", "M_1", "M_2", "M_2_closed_form"])
    for row in sweep(template, [grid, [1.0]]):
        closed = chain_values("mermin", list(row.lambdas))
        w.writerow([f"{row.lambdas[0]:.4f}", f"{row.mermin[0]:.6f}", f"{row.mermin[1]:.6f}", f"{closed[1]:.6f}"])


if __name__ == "__main__":
    main()
