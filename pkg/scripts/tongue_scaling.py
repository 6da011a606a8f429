"""Measured tongue width against mu for 2:1 (expected slope 1) and 1:1 (slope 2).

alpha=5, beta=4. The first-order and third-order predictions are listed next
to each measurement; results go to --out/widths.csv.
"""
import argparse
import math
from pathlib import Path

import numpy as np

from locktongue import ResonanceRatio, measure_tongue, predict_tongue


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/tongue_scaling")
    ap.add_argument("--tol-omega", type=float, default=1e-7)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    runs = {(2, 1): (0.02, 0.04, 0.08), (1, 1): (0.05, 0.1)}
    rows = ["p,q,mu,measured,predicted_k1,predicted_k3"]
    for (p, q), mus in runs.items():
        widths = []
        for mu in mus:
            meas = measure_tongue(p, q, mu, 5.0, 4.0, tol_omega=args.tol_omega).width
            k1 = predict_tongue(5.0, 4.0, ResonanceRatio(p, q), mu, k_max=1).width
            k3 = predict_tongue(5.0, 4.0, ResonanceRatio(p, q), mu, k_max=3).width
            widths.append(meas)
            rows.append(f"{p},{q},{mu!r},{meas!r},{k1!r},{k3!r}")
            print(f"{p}:{q} mu={mu:<5} measured {meas:.6e}  k=1 {k1:.6e}  k=3 {k3:.6e}")
        slope = np.polyfit(np.log(mus), np.log(widths), 1)[0]
        print(f"{p}:{q} log-log slope {slope:.3f}")
    (out / "widths.csv").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
