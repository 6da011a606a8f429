"""Rotation ratio omega/Omega over a frequency window, with a gnuplot script.

Default window covers ratios 2 to 5 at alpha=2.5, beta=2, mu=0.1; the locked
plateau widths are printed for the integer ratios.
"""
import argparse
from pathlib import Path

from locktongue.compatibility import cached_limit_cycle
from locktongue.cli import write_gnuplot
from locktongue.locking import plateau_width, staircase_csv, staircase_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/staircase")
    ap.add_argument("--alpha", type=float, default=2.5)
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--mu", type=float, default=0.1)
    ap.add_argument("--steps", type=int, default=400)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    W = cached_limit_cycle(args.alpha, args.beta).Omega0
    pts = staircase_scan(1.9 * W, 5.1 * W, args.steps, args.mu, args.alpha, args.beta,
                         threads=args.threads)
    csv = out / "staircase.csv"
    staircase_csv(pts, csv)
    write_gnuplot(out / "staircase.gp", str(csv))
    for n in (2, 3, 4, 5):
        print(f"plateau {n}:1 width >= {plateau_width(pts, n, 1):.4f}")


if __name__ == "__main__":
    main()
