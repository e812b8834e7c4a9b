"""Closed form, symbol minimum and discrete eigen-solve of the p = 2 Rellich constant.

Run: python3 demos/rellich_constant_sweep.py
"""
from rellich import Params, mu22_closed_form, mu2_symbol_oracle, uniform_grid
from rellich.harness import alpha_grid
from rellich.rayleigh import estimate_constant


def main(n: int = 5):
    grid = uniform_grid(20, 2048)
    print(f"{'alpha':>7} {'closed':>12} {'symbol':>12} {'discrete':>12}")
    for alpha in alpha_grid(-2.0, 10.0, 1.0):
        closed, _ = mu22_closed_form(n, alpha)
        sym = mu2_symbol_oracle(n, alpha).value
        est = estimate_constant(Params(n, 2, 2, alpha), grid=grid)
        print(f"{alpha:7.2f} {closed:12.6f} {sym:12.6f} {est.line_limit:12.6f}")


if __name__ == "__main__":
    main()
