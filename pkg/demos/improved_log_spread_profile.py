"""Spread profiles against the improved Rellich inequality with a log remainder.

Profiles w(s) = sqrt(s) psi(log s) spread over log s in [1, x1]; the excess
of the Rellich energy per unit of log remainder drops below gamma_bar / 2.

Run: python3 demos/improved_log_spread_profile.py
"""
import numpy as np

from rellich import Params, mu22_closed_form
from rellich.cylinder import gauss_legendre_panels
from rellich.params import derive_params


def log_bump(s, x0, x1):
    c, W = (x0 + x1) / 2, (x1 - x0) / 2
    x = np.log(s)
    y = (x - c) / W
    psi = (1 - y * y) ** 4
    p1 = -8 * y * (1 - y * y) ** 3 / W
    p2 = (-8 * (1 - y * y) ** 3 + 48 * y * y * (1 - y * y) ** 2) / W ** 2
    wx = np.exp(x / 2) * (psi / 2 + p1)
    wxx = np.exp(x / 2) * (psi / 4 + p1 + p2)
    return np.exp(x / 2) * psi, wx / s, (wxx - wx) / s ** 2


def main(n: int = 5, alpha: float = 4.0):
    d = derive_params(Params(n, 2, 2, alpha))
    mu = mu22_closed_form(n, alpha)[0]
    print(f"n={n} alpha={alpha}: gamma_bar/2 = {d.gamma_bar / 2:.4f}")
    for x1 in (4.0, 6.0, 8.0, 12.0, 20.0):
        G = gauss_legendre_panels(np.linspace(1.0, x1, 400), order=16)
        s = np.exp(G.nodes)
        w, w1, w2 = log_bump(s, 1.0, x1)
        E = G.integrate((w2 - 2 * d.A * w1 - d.gamma * w) ** 2 * s)
        N2 = G.integrate(w ** 2 * s)
        R = G.integrate(w ** 2 / s)
        print(f"x1={x1:5.1f}: excess / remainder = {(E - mu * N2) / R:.4f}")


if __name__ == "__main__":
    main()
