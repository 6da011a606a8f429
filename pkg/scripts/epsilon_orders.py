"""eps_k(tau0) for k = 1..3 and the residual ladder of the truncated series.

Shows which orders are flat in tau0 for a given p:q and how the driven-equation
residual drops with mu for each truncation order.
"""
import argparse
import math
from pathlib import Path

import numpy as np

from locktongue.compatibility import resonance_frame
from locktongue.perturbation import run_recursion, solve_tau_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=5.0)
    ap.add_argument("--beta", type=float, default=4.0)
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--q", type=int, default=1)
    ap.add_argument("--order", type=int, default=3)
    ap.add_argument("--out", default="out/epsilon_orders")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    fr = resonance_frame(args.alpha, args.beta, args.p, args.q)
    tg = solve_tau_grid(fr, args.order, 64)
    eps = tg.eps
    np.savetxt(out / "eps.csv", np.column_stack([tg.tau0, eps]), delimiter=",",
               header="tau0," + ",".join(f"eps{k + 1}" for k in range(args.order)), comments="")
    for k in range(args.order):
        print(f"eps{k + 1}: mean {eps[:, k].mean(): .6e}  variation {np.ptp(eps[:, k]):.3e}")

    st = run_recursion(fr, 0.7, args.order)
    mus = (1e-2, 5e-3, 2.5e-3)
    for order in range(1, args.order + 1):
        r = [st.residual(mu, order) for mu in mus]
        ex = [math.log(r[i] / r[i + 1]) / math.log(2) for i in range(2)]
        print(f"order {order}: residuals {', '.join(f'{x:.2e}' for x in r)}  "
              f"exponents {ex[0]:.3f} {ex[1]:.3f}")


if __name__ == "__main__":
    main()
