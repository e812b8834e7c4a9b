"""Annulus exhaustion: solutions on {1/R < r < R} for a fixed source as R grows.

The change between consecutive R is printed on the common shell 1/2 <= r <= 2;
it is reported descriptively, no rate is asserted.

Run: python3 demos/poisson_exhaustion.py
"""
import numpy as np

from rellich import AnnulusProblem, solve_radial_annulus


def source(r):
    return np.exp(-4 * np.log(r) ** 2)


def main(n: int = 5):
    probe = np.exp(np.linspace(np.log(0.5), np.log(2.0), 201))
    prev = None
    for R in (2.0, 4.0, 8.0, 16.0, 32.0, 64.0):
        sol = solve_radial_annulus(AnnulusProblem.build(n, R, source, N=4097))
        v = np.interp(np.log(probe), np.log(sol.r), sol.v)
        line = f"R={R:5.0f}: max v on shell {v.max():.8f}, residual {sol.residual:.1e}"
        if prev is not None:
            line += f", change {np.max(np.abs(v - prev)):.3e}"
        print(line)
        prev = v


if __name__ == "__main__":
    main()
