"""Command-line sweeps that write CSV tables.

    dpsqkd omega --n 9 --nu 2 --lambda 0:12:2401
    dpsqkd region --n 9 --nu 1,2,3
    dpsqkd keyrate --n 9 --e 0.03 --nubar 1,2 --eta log:1e-3:1e-1:9 --mean optimize
    dpsqkd asymptotic --n 9 --e 0:0.04:41
    dpsqkd verify --n 5

Exit codes: 0 success, 1 failed verification, 2 invalid configuration,
3 numerical failure.  Output goes to ``--output`` (``-`` for stdout) or to
``<command>.csv`` in ``$DPSQKD_OUTPUT_DIR`` (default: the working directory).
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    e_max_single,
    solve_d2_single,
    solve_d2_two,
    solve_d32_two,
    solve_e_max_two,
    solve_e_min_two,
)
from .keyrate import key_rate, optimize_mean_photon
from .omega import (
    VALIDATED_MAX_NU,
    ConvexityError,
    default_lambda_grid,
    omega_curve,
    omega_eigenpair,
    verify_chain,
)

OUTPUT_DIR_ENV = "DPSQKD_OUTPUT_DIR"
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def parse_grid(spec: str) -> np.ndarray:
    """``start:stop:points`` (linear, inclusive), ``log:start:stop:points``, or one number."""
    parts = spec.split(":")
    try:
        if parts[0] == "log":
            if len(parts) != 4:
                raise ValueError
            start, stop, points = float(parts[1]), float(parts[2]), int(parts[3])
            if start <= 0 or stop <= 0:
                raise ConfigError(f"log grid needs positive endpoints: {spec!r}")
            grid = np.geomspace(start, stop, points)
        elif len(parts) == 3:
            start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
            grid = np.linspace(start, stop, points)
        elif len(parts) == 1:
            grid = np.array([float(parts[0])])
        else:
            raise ValueError
    except ValueError:
        raise ConfigError(f"bad grid spec {spec!r}") from None
    if grid.size == 0:
        raise ConfigError(f"empty grid {spec!r}")
    return grid


def parse_int_list(spec: str) -> list[int]:
    try:
        return [int(x) for x in str(spec).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad integer list {spec!r}") from None


def parse_mean_policy(spec: str) -> tuple[str, float]:
    """``fixed:<n alpha^2>``, ``linear:<c>`` (alpha^2 = c eta), ``sqrt:<c>`` (alpha^2 = c sqrt(eta)), ``optimize``."""
    if spec == "optimize":
        return "optimize", 0.0
    kind, _, value = spec.partition(":")
    if kind not in ("fixed", "linear", "sqrt") or not value:
        raise ConfigError(f"bad mean-photon policy {spec!r}")
    try:
        c = float(value)
    except ValueError:
        raise ConfigError(f"bad mean-photon coefficient {spec!r}") from None
    if c < 0:
        raise ConfigError("mean-photon coefficient must be non-negative")
    return kind, c


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment, keys use flag names without dashes."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) or isinstance(x, str):
        return str(x)
    return format(float(x), ".17g")


class Table:
    def __init__(self, config: dict, columns: list[str]):
        # worker count is left out so output does not depend on it
        self.header = [f"# dpsqkd {__version__}"] + [
            f"# {k} = {v}" for k, v in config.items() if k != "workers"
        ]
        self.columns = columns
        self.rows: list[list] = []
        self.notes: list[str] = []

    def add(self, *row):
        self.rows.append(list(row))

    def note(self, text: str):
        self.notes.append(f"# {text}")

    def render(self) -> str:
        buf = io.StringIO()
        for line in self.header + self.notes:
            buf.write(line + "\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(x) for x in row) + "\n")
        return buf.getvalue()


def write_output(text: str, output: str | None, command: str) -> None:
    if output == "-":
        sys.stdout.write(text)
        return
    if output is None:
        directory = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
        directory.mkdir(parents=True, exist_ok=True)
        target = directory / f"{command}.csv"
    else:
        target = Path(output)
        target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)


def parallel_map(fn, items, workers: int):
    """Order-preserving map; identical results for any worker count."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _curves(n: int, nus, lam_grid=None):
    return {nu: omega_curve(n, nu, lam_grid) for nu in nus}


def cmd_omega(cfg: dict) -> Table:
    n, nu = int(cfg["n"]), int(cfg["nu"])
    grid = parse_grid(cfg["lambda"]) if cfg.get("lambda") else default_lambda_grid()
    if np.any(np.diff(grid) < 0) or grid[0] < 0:
        raise ConfigError("lambda grid must be sorted and non-negative")
    curve = omega_curve(n, nu, grid, refine=False)
    table = Table(cfg, ["lambda", "omega", "argmax_pattern", "branch"])
    table.note("convexity: ok")
    for lam, val, pat, br in zip(curve.lam, curve.value, curve.patterns, curve.branches):
        table.add(lam, val, str(pat), "minus" if br == "-" else "plus")
    return table


def cmd_region(cfg: dict) -> Table:
    n = int(cfg["n"])
    grid = parse_grid(cfg["lambda"]) if cfg.get("lambda") else None
    table = Table(cfg, ["nu", "e", "e_ph", "status"])
    for nu in parse_int_list(cfg.get("nu", "1,2,3")):
        curve = omega_curve(n, nu, grid)
        if curve.all_achievable:
            table.add(nu, "nan", "nan", "all_achievable")
            continue
        b = curve.boundary
        for e, eph in zip(b.e, b.e_ph):
            table.add(nu, e, eph, "boundary")
    return table


def _keyrate_point(eta, *, n, e, nubar, kind, coef, curves):
    if kind == "optimize":
        opt = optimize_mean_photon(n, e, eta, nubar, curves)
        return opt.point
    if kind == "fixed":
        alpha2 = coef / n
    elif kind == "linear":
        alpha2 = coef * eta
    else:
        alpha2 = coef * math.sqrt(eta)
    return key_rate(n, e, eta, alpha2, nubar, curves)


def cmd_keyrate(cfg: dict) -> Table:
    n, e = int(cfg["n"]), float(cfg["e"])
    if not 0 <= e <= 0.5:
        raise ConfigError("e must lie in [0, 1/2]")
    etas = parse_grid(cfg.get("eta", "log:1e-4:1e-1:13"))
    if np.any(etas <= 0) or np.any(etas > 1):
        raise ConfigError("eta must lie in (0, 1]")
    kind, coef = parse_mean_policy(cfg.get("mean", "optimize"))
    nubars = parse_int_list(cfg.get("nubar", "1,2"))
    if any(not 1 <= k <= VALIDATED_MAX_NU for k in nubars):
        raise ConfigError("nubar must be 1, 2 or 3")
    curves = _curves(n, [nu for nu in (2, 3) if nu <= max(nubars)])
    table = Table(cfg, ["nubar", "eta", "alpha2", "mean_photon", "Q", "h_ph", "G"])
    for nubar in nubars:
        fn = partial(_keyrate_point, n=n, e=e, nubar=nubar, kind=kind, coef=coef, curves=curves)
        for p in parallel_map(fn, etas.tolist(), int(cfg.get("workers", 1))):
            table.add(nubar, p.eta, p.alpha2, n * p.alpha2, p.Q, p.h_ph, p.G)
    return table


def _asymptotic_row(e, *, n, curve2):
    a = solve_d2_single(n, e)
    b = solve_d2_two(n, e, curve2)
    c = solve_d32_two(n, e, curve2)
    ratio = b.value / a.value if a.value > 0 else float("nan")
    return e, a.value, b.value, c.value, ratio


def cmd_asymptotic(cfg: dict) -> Table:
    n = int(cfg["n"])
    es = parse_grid(cfg.get("e", "0:0.04:41"))
    if np.any(es < 0) or np.any(es >= 0.5):
        raise ConfigError("e must lie in [0, 1/2)")
    curve2 = omega_curve(n, 2)
    e1 = e_max_single()
    e2 = solve_e_max_two(n, curve2)
    emin = solve_e_min_two(n, curve2)
    cols = ["e", "D2_single", "D2_two", "D32_two", "D2_ratio", "e_max_single", "e_max_two", "e_min_two"]
    table = Table(cfg, cols)
    table.note(f"thresholds: e_max_single = {fmt(e1)}, e_max_two = {fmt(e2.value)}, e_min_two = {fmt(emin.value)}")
    fn = partial(_asymptotic_row, n=n, curve2=curve2)
    for row in parallel_map(fn, es.tolist(), int(cfg.get("workers", 1))):
        table.add(*row, e1, e2.value, emin.value)
    return table


def cmd_verify(cfg: dict) -> tuple[Table, bool]:
    from .oracle import (
        AttackState,
        attack_state_errors,
        brute_force_omega,
        build_error_operators,
        conjugation_residuals,
    )
    from .operators import build_pi
    from .omega import omega

    n = int(cfg.get("n", 5))
    if not 3 <= n <= 8:
        raise ConfigError("verify supports 3 <= n <= 8")
    mutate = str(cfg.get("mutate", "false")).lower() in ("1", "true", "yes")
    lams = [0.0, 0.5, 1.0, 2.0, 6.0, 12.0]
    table = Table(cfg, ["check", "detail", "value", "tolerance", "status"])
    ok = True

    def record(check, detail, value, tol):
        nonlocal ok
        passed = value <= tol
        ok &= passed
        table.add(check, detail, value, tol, "pass" if passed else "FAIL")

    pi = build_pi(n).to_dense()
    if mutate:
        pi[0, 1] = pi[1, 0] = pi[0, 1] + 1e-3
    for name, res in conjugation_residuals(n, pi).items():
        record("conjugation", name, res, 1e-12)
    worst = 0.0
    for nu in range(VALIDATED_MAX_NU + 1):
        for lam in lams:
            fast = omega(n, nu, lam)[0]
            if mutate:
                fast += 1e-6
            worst = max(worst, abs(brute_force_omega(n, nu, lam) - fast))
    record("oracle_equivalence", f"nu<=3 lambda={lams}", worst, 1e-9)
    chain = verify_chain(n, VALIDATED_MAX_NU, np.linspace(0, 12, 1201))
    record("chain", "min margin", max(0.0, -chain.min_margin), 1e-10)
    sat = 0.0
    for nu in range(VALIDATED_MAX_NU + 1):
        e_op, eph_op = build_error_operators(n, nu)
        for lam in lams:
            ep = omega_eigenpair(n, nu, lam)
            e, eph = attack_state_errors(AttackState(ep.pattern, ep.amplitudes), e_op, eph_op)
            sat = max(sat, abs(eph - lam * e - ep.value))
    record("saturation", "attack states on supporting lines", sat, 1e-9)
    return table, ok


COMMANDS = {
    "omega": cmd_omega,
    "region": cmd_region,
    "keyrate": cmd_keyrate,
    "asymptotic": cmd_asymptotic,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpsqkd", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--output", help="output path, '-' for stdout")
        p.add_argument("--workers", type=int, default=None, help="worker processes (default: available CPUs)")
        p.add_argument("--n", type=int, default=None, help="block length")

    p = sub.add_parser("omega", help="Omega^(nu)(lambda) with argmax patterns")
    common(p)
    p.add_argument("--nu", type=int, default=None)
    p.add_argument("--lambda", dest="lambda_", default=None, help="grid spec")

    p = sub.add_parser("region", help="(e, e_ph) boundary per photon number")
    common(p)
    p.add_argument("--nu", default=None, help="comma list, default 1,2,3")
    p.add_argument("--lambda", dest="lambda_", default=None, help="grid spec")

    p = sub.add_parser("keyrate", help="key rate G versus eta")
    common(p)
    p.add_argument("--e", default=None, help="bit error rate")
    p.add_argument("--eta", default=None, help="grid spec, e.g. log:1e-4:1e-1:13")
    p.add_argument("--nubar", default=None, help="comma list of truncations")
    p.add_argument("--mean", default=None, help="fixed:<n a^2> | linear:<c> | sqrt:<c> | optimize")

    p = sub.add_parser("asymptotic", help="low-transmission coefficients and thresholds")
    common(p)
    p.add_argument("--e", default=None, help="grid spec of error rates")

    p = sub.add_parser("verify", help="oracle, chain and saturation checks")
    common(p)
    p.add_argument("--mutate", action="store_true", default=None, help="perturb the bit-error operator")
    return parser


_REQUIRED = {"omega": ("n", "nu"), "region": ("n",), "keyrate": ("n", "e"), "asymptotic": ("n",), "verify": ()}


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = read_config(args.config) if args.config else {}
    for key, value in vars(args).items():
        if key in ("command", "config", "output") or value is None:
            continue
        cfg[key.rstrip("_")] = value
    cfg.setdefault("workers", len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)
    missing = [k for k in _REQUIRED[args.command] if k not in cfg]
    if missing:
        raise ConfigError(f"missing required setting(s): {', '.join(missing)}")
    if "n" in cfg and int(cfg["n"]) < 3:
        raise ConfigError("block too short: n must be at least 3")
    return {"command": args.command, **dict(sorted(cfg.items()))}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        started = time.perf_counter()
        result = COMMANDS[args.command](cfg)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"dpsqkd: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvexityError, ArithmeticError, FloatingPointError) as exc:
        print(f"dpsqkd: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    ok = True
    if isinstance(result, tuple):
        result, ok = result
    write_output(result.render(), args.output, args.command)
    elapsed = time.perf_counter() - started
    print(f"dpsqkd {args.command}: {len(result.rows)} rows in {elapsed:.1f}s", file=sys.stderr)
    if not ok:
        for row in result.rows:
            if row[-1] == "FAIL":
                print(f"  FAIL {row[0]} ({row[1]}): {fmt(row[2])} > {fmt(row[3])}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
