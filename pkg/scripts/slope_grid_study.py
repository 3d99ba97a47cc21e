#!/usr/bin/env python3
"""How the finite-difference slope error depends on the t spacing.

For each spacing h the grid is {k h : k = -10..10}. The table lists the largest
deviation of the one-sided slopes from the EMP eigenvalues, for an even field
(linear splitting) and an odd field (no first-order splitting, so every
deviation is curvature bias).
"""
import math
import warnings

import numpy as np

from steklov import mps
from steklov.cli import match_residual
from steklov.perturbation import emp_matrix, field_from_terms
from steklov.spectra import DomainSpec, steklov_eigen

ANN = DomainSpec.annulus(2, 0.4)
C = 2 * math.sqrt(math.pi)
CASES = {
    "2cos6 both": field_from_terms(2, {(6, 1): C}, {(6, 1): C}),
    "2cos5 both": field_from_terms(2, {(5, 1): C}, {(5, 1): C}),
}
TARGETS = [(2, 2), (3, 1), (3, 2)]


def main():
    warnings.simplefilter("ignore", UserWarning)
    print(f"{'field':12s} {'h':>8s} " + " ".join(f"{'mu_%d%d' % t:>10s}" for t in TARGETS))
    for label, field in CASES.items():
        for h in (4e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4):
            grid = tuple(h * k for k in range(-10, 11))
            br = mps.branch_sweep(ANN, field, mps.MpsConfig(L=14, count=30, t_grid=grid))
            cells = []
            for n, k in TARGETS:
                e = steklov_eigen(ANN, n, k)
                try:
                    sl = mps.slopes_at_zero(br, e)
                except mps.WindowConflict:
                    cells.append(f"{'conflict':>10s}")
                    continue
                emp = emp_matrix(ANN, field, e).eigenvalues
                cells.append(f"{match_residual(np.concatenate([sl.right, sl.left]), np.concatenate([emp, -emp])):10.2e}")
            print(f"{label:12s} {h:8.0e} " + " ".join(cells))


if __name__ == "__main__":
    main()
