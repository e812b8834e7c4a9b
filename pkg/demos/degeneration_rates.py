"""Quotients of the explicit families shrinking like eps^slope.

Run: python3 demos/degeneration_rates.py
"""
from rellich import Params, ProfileOmega, cap_for_eigenvalue, navier_degeneration_quotient
from rellich import resonance_family_bound
from rellich.degeneration import DEFAULT_EPS_LADDER, rate_over_ladder
from rellich.params import gamma_of


def main():
    omega = ProfileOmega.bump()
    P = Params(5, 2, 2, 7.0)
    fit = rate_over_ladder(lambda e: resonance_family_bound(omega, e, P, 1))
    print(f"resonant weight n=5 alpha=7, mode k=1: slope {fit.slope:.4f} (expected 2)")

    cap = cap_for_eigenvalue(3, -gamma_of(3, 2, 6.0))
    print(f"cap for n=3 alpha=6: nu={cap.nu:.4f}, theta0={cap.theta0:.6f}")
    for q in (2.0, 4.0):
        Pq = Params(3, 2, q, 6.0)
        vals = [navier_degeneration_quotient(omega, e, Pq, cap) for e in DEFAULT_EPS_LADDER]
        fit = rate_over_ladder(lambda e: navier_degeneration_quotient(omega, e, Pq, cap))
        print(f"q={q:g}: quotient at eps={DEFAULT_EPS_LADDER[-1]:.1e} is {vals[-1]:.3e}, "
              f"slope {fit.slope:.4f} (expected {1 + 2 / q:g})")


if __name__ == "__main__":
    main()
