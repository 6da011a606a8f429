"""4:1 locking at alpha=2.5, beta=2, mu=0.1: a locked and an unlocked section orbit.

Writes the two Poincare sections and the measured tongue to --out.
"""
import argparse
import json
from pathlib import Path

from locktongue import DimensionlessParams, is_locked, measure_tongue
from locktongue.compatibility import cached_limit_cycle
from locktongue.locking import rotation_ratio, simulate_attractor


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/lock_4to1")
    ap.add_argument("--mu", type=float, default=0.1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    W = cached_limit_cycle(2.5, 2.0).Omega0
    summary = {"Omega0": W}
    for label, dw in (("near", 0.02), ("far", 0.2)):
        p = DimensionlessParams(2.5, 2.0, args.mu, 4 * W + dw)
        orbit = simulate_attractor(p)
        orbit.to_csv(out / f"section_{label}.csv")
        rot = rotation_ratio(orbit)
        res = is_locked(p, 4, 1)
        summary[label] = {"omega": p.omega, "locked": res.locked, "ratio": float(rot),
                          "drift": rot.drift}
        print(f"omega = 4 Omega0 + {dw}: locked={res.locked} ratio={float(rot):.9f} "
              f"(drift {rot.drift:.1e})")
    m = measure_tongue(4, 1, args.mu, 2.5, 2.0)
    summary["tongue"] = {"omega_lo": m.omega_lo, "omega_hi": m.omega_hi, "half_width": m.half_width}
    print(f"4:1 tongue [{m.omega_lo:.6f}, {m.omega_hi:.6f}], half-width {m.half_width:.5f}")
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
