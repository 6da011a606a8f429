"""Command-line entry point.

Every command prints a JSON envelope {command, config_hash, data, warnings};
tabular side outputs go to CSV files named by flags. Settings resolve as
flag > config file > default, the config file being INI-style.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .core import DEFAULT_HARMONICS, LockTongueError, NumericalError, ParameterError, ResonanceRatio
from .ode import DEFAULT_TOL

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


@dataclass
class ParamBlock:
    alpha: float = 2.5
    beta: float = 2.0
    mu: float = 0.1


@dataclass
class TaskBlock:
    p: int = 2
    q: int = 1
    omega: float | None = None
    omega_lo: float | None = None
    omega_hi: float | None = None
    steps: int = 400
    transient: int = 500
    periods: int = 2000


@dataclass
class NumericsBlock:
    tol: float = DEFAULT_TOL
    harmonics: int = DEFAULT_HARMONICS
    grid: int = 64
    order: int = 3
    tol_omega: float = 1e-5
    lock_tol: float = 1e-7
    threads: int | None = None


@dataclass
class OutputBlock:
    output: str | None = None
    csv: str | None = None
    emit_plot: str | None = None


@dataclass
class RunConfig:
    params: ParamBlock = field(default_factory=ParamBlock)
    task: TaskBlock = field(default_factory=TaskBlock)
    numerics: NumericsBlock = field(default_factory=NumericsBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    SECTIONS = ("params", "task", "numerics", "output")

    def blocks(self):
        return [(name, getattr(self, name)) for name in self.SECTIONS]

    def validate(self) -> "RunConfig":
        n = self.numerics
        for key in ("tol", "tol_omega", "lock_tol"):
            if not getattr(n, key) > 0:
                raise ParameterError(f"numerics.{key} must be positive")
        if n.harmonics < 8 or n.grid < 32 or n.order < 1:
            raise ParameterError("need harmonics >= 8, grid >= 32 and order >= 1")
        if n.threads is not None and n.threads < 1:
            raise ParameterError("threads must be >= 1")
        if self.params.mu < 0:
            raise ParameterError("mu must be non-negative")
        if self.task.transient < 0 or self.task.periods < 32 or self.task.steps < 2:
            raise ParameterError("need transient >= 0, periods >= 32 and steps >= 2")
        ResonanceRatio(self.task.p, self.task.q)
        return self

    def canonical(self) -> str:
        """Settings that determine the numbers; output paths and threads do not."""
        body = {name: asdict(block) for name, block in self.blocks() if name != "output"}
        body["numerics"].pop("threads")
        return json.dumps(body, sort_keys=True)

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def _coerce(block, key: str, raw):
    for f in fields(block):
        if f.name == key:
            kind = f.type if isinstance(f.type, str) else f.type.__name__
            if raw is None or (isinstance(raw, str) and raw.lower() in ("", "none")):
                return None
            if kind.startswith("int"):
                return int(raw)
            if kind.startswith("float"):
                return float(raw)
            return str(raw)
    raise ParameterError(f"unknown config key '{key}' in [{type(block).__name__}]")


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Defaults, then the INI file, then explicit flag values (non-None)."""
    cfg = RunConfig()
    if path:
        parser = configparser.ConfigParser()
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ParameterError(f"cannot read config: {exc}") from exc
        for section in parser.sections():
            if section not in RunConfig.SECTIONS:
                raise ParameterError(f"unknown config section [{section}]")
            block = getattr(cfg, section)
            for key, raw in parser.items(section):
                key = key.replace("-", "_")
                setattr(block, key, _coerce(block, key, raw))
    for key, value in overrides.items():
        if value is None:
            continue
        for _, block in cfg.blocks():
            if key in {f.name for f in fields(block)}:
                setattr(block, key, value)
                break
    return cfg.validate()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def envelope(command: str, cfg: RunConfig, data: dict, notes: list[str]) -> str:
    body = {"command": command, "config_hash": cfg.hash(), "data": _jsonable(data),
            "warnings": list(notes)}
    return json.dumps(body, indent=2) + "\n"


# commands ----------------------------------------------------------------
def cmd_limit_cycle(cfg: RunConfig, notes: list[str]) -> dict:
    from .limit_cycle import find_limit_cycle

    lc = find_limit_cycle(cfg.params.alpha, cfg.params.beta, tol=cfg.numerics.tol,
                          n_harmonics=cfg.numerics.harmonics)
    if cfg.output.csv:
        with open(cfg.output.csv, "w") as fh:
            fh.write(lc.u0.to_csv())
    return {"alpha": lc.alpha, "beta": lc.beta, "Omega0": lc.Omega0, "T0": lc.T0, "r0": lc.r0,
            "r1": lc.r1, "r2": lc.r2, "amplitude": lc.amplitude(), "harmonics": lc.u0.N,
            "shooting_residual": lc.shooting_residual}


def _frame(cfg: RunConfig):
    from .compatibility import resonance_frame

    return resonance_frame(cfg.params.alpha, cfg.params.beta, cfg.task.p, cfg.task.q,
                           cfg.numerics.tol, cfg.numerics.harmonics)


def cmd_wronskian(cfg: RunConfig, notes: list[str]) -> dict:
    wd = _frame(cfg).wd
    if cfg.output.csv:
        with open(cfg.output.csv, "w") as fh:
            fh.write("series,nu,re,im\n")
            for name, s in (("a", wd.a), ("b", wd.b)):
                for n, c in zip(s.nu, s.coeffs):
                    fh.write(f"{name},{n},{float(c.real)!r},{float(c.imag)!r}\n")
    return {"f0": wd.f0, "c": wd.c, "c1": wd.c1, "c2": wd.c2, "bar_tau": wd.bar_tau,
            "lambda": wd.floquet_multiplier, "monodromy_multipliers": wd.multipliers().tolist(),
            "fit_residual": wd.fit_residual, "floquet_discrepancy": wd.floquet_discrepancy}


def cmd_constants(cfg: RunConfig, notes: list[str]) -> dict:
    from .compatibility import compute_A_closed, compute_B_constants

    fr = _frame(cfg)
    fc = compute_B_constants(fr)
    return {"p": cfg.task.p, "q": cfg.task.q, "A": fc.A, "A_closed": compute_A_closed(fr.lc),
            "Abar": fc.Abar, "B": list(fc.B), "D1": fc.D1, "D2": fc.D2,
            "first_order_width": 2 * math.hypot(fc.D1, fc.D2) / abs(fc.A)}


def cmd_predict_tongue(cfg: RunConfig, notes: list[str]) -> dict:
    from .perturbation import solve_tau_grid, tongue_from_grid

    fr = _frame(cfg)
    tg = solve_tau_grid(fr, cfg.numerics.order, cfg.numerics.grid, _threads(cfg))
    pred = tongue_from_grid(tg, cfg.params.mu)
    if cfg.output.csv:
        with open(cfg.output.csv, "w") as fh:
            fh.write("tau0," + ",".join(f"eps{k + 1}" for k in range(tg.k_max)) + ",eps\n")
            powers = cfg.params.mu ** np.arange(1, tg.k_max + 1)
            for t0, row in zip(tg.tau0, tg.eps):
                fh.write(f"{float(t0)!r}," + ",".join(repr(float(e)) for e in row)
                         + f",{float(row @ powers)!r}\n")
    data = asdict(pred)
    data.update(width=pred.width, rho=pred.rho, max_solvability_mean=tg.max_Q0())
    return data


def cmd_measure_tongue(cfg: RunConfig, notes: list[str]) -> dict:
    from .locking import measure_tongue

    t = cfg.task
    bracket = None
    if t.omega_lo is not None and t.omega_hi is not None:
        bracket = (t.omega_lo, t.omega_hi)
    m = measure_tongue(t.p, t.q, cfg.params.mu, cfg.params.alpha, cfg.params.beta, bracket=bracket,
                       seed_omega=0.5 * (bracket[0] + bracket[1]) if bracket else None,
                       tol_omega=cfg.numerics.tol_omega, threads=_threads(cfg),
                       tol=cfg.numerics.lock_tol)
    if m.flagged:
        notes.append(f"{len(m.flagged)} probes stayed indeterminate and were counted as unlocked")
    data = asdict(m)
    data.update(width=m.width, half_width=m.half_width, center=m.center)
    return data


def cmd_staircase(cfg: RunConfig, notes: list[str]) -> dict:
    from .compatibility import cached_limit_cycle
    from .locking import staircase_csv, staircase_scan

    t = cfg.task
    if t.omega_lo is None or t.omega_hi is None:
        raise ParameterError("staircase needs --omega-lo and --omega-hi")
    pts = staircase_scan(t.omega_lo, t.omega_hi, t.steps, cfg.params.mu, cfg.params.alpha,
                         cfg.params.beta, threads=_threads(cfg), transient_periods=t.transient,
                         horizon_periods=t.periods)
    csv_path = cfg.output.csv or "staircase.csv"
    staircase_csv(pts, csv_path)
    if cfg.output.emit_plot:
        write_gnuplot(cfg.output.emit_plot, csv_path)
    failures = [s for s in pts if s.error]
    if failures:
        notes.append(f"{len(failures)} scan points failed; see the error column")
    Omega0 = cached_limit_cycle(cfg.params.alpha, cfg.params.beta, cfg.numerics.tol).Omega0
    return {"csv": csv_path, "points": len(pts), "locked_points": sum(s.locked for s in pts),
            "Omega0": Omega0}


def write_gnuplot(path: str, csv_path: str) -> None:
    with open(path, "w") as fh:
        fh.write("set datafile separator ','\n"
                 "set xlabel 'omega'\nset ylabel 'omega / Omega'\n"
                 "set key off\n"
                 f"plot '{csv_path}' using 1:2 every ::1 with points pt 7 ps 0.4\n")


def cmd_simulate(cfg: RunConfig, notes: list[str]) -> dict:
    from .core import DimensionlessParams
    from .locking import rotation_ratio, simulate_attractor

    t = cfg.task
    if t.omega is None:
        raise ParameterError("simulate needs --omega")
    orbit = simulate_attractor(DimensionlessParams(cfg.params.alpha, cfg.params.beta,
                                                   cfg.params.mu, t.omega), t.transient, t.periods)
    if cfg.output.csv:
        orbit.to_csv(cfg.output.csv)
    notes.extend(orbit.warnings)
    rot = rotation_ratio(orbit)
    return {"omega": t.omega, "ratio": float(rot), "drift": rot.drift, "samples": orbit.count,
            "final_point": orbit.final_state.tolist()}


def cmd_selftest(cfg: RunConfig, notes: list[str], quick: bool = False):
    from .acceptance import run_all

    results = run_all(tol=cfg.numerics.tol, quick=quick, echo=lambda s: print(s, file=sys.stderr))
    data = {"quick": quick, "passed": all(r.passed for r in results),
            "criteria": [{"number": r.number, "name": r.name, "passed": r.passed} for r in results]}
    return data


COMMANDS = {
    "limit-cycle": cmd_limit_cycle,
    "wronskian": cmd_wronskian,
    "constants": cmd_constants,
    "predict-tongue": cmd_predict_tongue,
    "measure-tongue": cmd_measure_tongue,
    "staircase": cmd_staircase,
    "simulate": cmd_simulate,
    "selftest": cmd_selftest,
}


def _threads(cfg: RunConfig) -> int:
    from .locking import default_threads

    return cfg.numerics.threads or default_threads()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("shared")
    g.add_argument("--config", help="INI file with [params] [task] [numerics] [output] sections")
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--mu", type=float)
    g.add_argument("--p", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--tol", type=float, help="integration / shooting tolerance")
    g.add_argument("--harmonics", type=int, help="initial Fourier truncation N")
    g.add_argument("--threads", type=int, help="worker cap (fallback: LOCKTONGUE_THREADS)")
    g.add_argument("--output", help="write the JSON envelope here instead of stdout")
    g.add_argument("--csv", help="CSV side output path")

    parser = _Parser(prog="locktongue", description="Arnold tongues of an injection-locked divider.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "predict-tongue":
            sp.add_argument("--order", type=int)
            sp.add_argument("--grid", type=int)
        if name in ("measure-tongue", "staircase"):
            sp.add_argument("--omega-lo", dest="omega_lo", type=float)
            sp.add_argument("--omega-hi", dest="omega_hi", type=float)
        if name == "measure-tongue":
            sp.add_argument("--tol-omega", dest="tol_omega", type=float)
            sp.add_argument("--lock-tol", dest="lock_tol", type=float)
        if name == "staircase":
            sp.add_argument("--steps", type=int)
            sp.add_argument("--emit-plot", dest="emit_plot", help="write a gnuplot script here")
        if name in ("staircase", "simulate"):
            sp.add_argument("--transient", type=int, help="discarded drive periods")
            sp.add_argument("--periods", type=int, help="sampled drive periods")
        if name == "simulate":
            sp.add_argument("--omega", type=float)
        if name == "selftest":
            sp.add_argument("--quick", action="store_true", help="skip tongue-scaling measurements")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    if not argv:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "quick")}
    notes: list[str] = []
    try:
        cfg = load_config(args.config, overrides)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if args.command == "selftest":
                data = cmd_selftest(cfg, notes, quick=args.quick)
            else:
                data = COMMANDS[args.command](cfg, notes)
        notes.extend(str(w.message) for w in caught)
    except ParameterError as exc:
        print(f"locktongue: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"locktongue: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (LockTongueError, ValueError) as exc:
        print(f"locktongue: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = envelope(args.command, cfg, data, notes)
    if cfg.output.output:
        with open(cfg.output.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "selftest" and not data["passed"]:
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
