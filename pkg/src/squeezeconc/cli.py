"""
Command-line front end.

    squeezeconc prepare      write a state JSON file
    squeezeconc concentrate  run a protocol and write its report
    squeezeconc sweep        tabulate diagnostics over a squeezing grid (CSV)
    squeezeconc montecarlo   sampled-outcome statistics
    squeezeconc oracle-check grid oracle vs covariance engine

Settings come from, in increasing precedence: built-in defaults, a JSON file
given with ``--config``, command-line flags. ``SQUEEZECONC_SEED`` sets the
default seed. Exit codes: 0 success, 1 invalid configuration, 2 a numerical
check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .crosscheck import OracleConfig, oracle_check
from .gauss_core import EprParams, GaussianState, SingleModeParams, prepare_epr, prepare_single
from .protocols import (
    SCHEMA_VERSION,
    SWEEP_COLUMNS_EPR,
    SWEEP_COLUMNS_SINGLE,
    ConcentrateConfig,
    ProtocolSpec,
    concentrate_n,
    concentrate_single,
    concentrate_two_mode,
    monte_carlo_run,
    sweep_single,
    sweep_two_mode,
)
from .wigner_oracle import MIN_N_SIGMA

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 1, 2
SEED_ENV = "SQUEEZECONC_SEED"
COMMANDS = ("prepare", "concentrate", "sweep", "montecarlo", "oracle-check")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str = "concentrate"
    kind: str = "single"
    r: float = 0.0
    r1: float = 0.0
    r2: float = 0.0
    x0: str = "0"
    copies: int = 2
    pairing: str | None = None
    quadrature: str = "X"
    gain: float = 0.5
    forced: list | None = None
    seed: int = 0
    out: str | None = None
    format: str = "json"
    param: str = "r"
    start: float = 0.0
    stop: float = 1.0
    step: float = 0.1
    trials: int = 10000
    workers: int = 1
    points_1d: int = 1024
    points_2d: int = 256
    wigner_points: int = 128
    n_sigma: float = 8.0
    tol: float = 1e-3

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, **asdict(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known - {"schema_version"}
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**{k: v for k, v in data.items() if k in known})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def validate(self) -> "RunConfig":
        if self.subcommand not in COMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.kind not in ("single", "epr"):
            raise ConfigError(f"kind must be 'single' or 'epr', got {self.kind!r}")
        if self.quadrature.upper() not in ("X", "P"):
            raise ConfigError(f"quadrature must be X or P, got {self.quadrature!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        for name in ("r", "r1", "r2", "gain", "n_sigma", "tol"):
            if not math.isfinite(float(getattr(self, name))):
                raise ConfigError(f"{name} must be finite")
        if self.copies < 2:
            raise ConfigError("copies must be >= 2")
        if self.n_sigma < MIN_N_SIGMA:
            raise ConfigError(f"n_sigma must be >= {MIN_N_SIGMA}")
        if min(self.points_1d, self.points_2d, self.wigner_points) < 2:
            raise ConfigError("grids need at least two points per axis")
        if self.format == "csv" and self.subcommand != "sweep":
            raise ConfigError("csv output is only available for sweep")
        parse_x0(self.x0)
        return self


def parse_x0(text) -> float | tuple[float, float]:
    """``"1.7"`` -> 1.7; ``"random:lo,hi"`` -> ``(lo, hi)``."""
    text = str(text).strip()
    if text.startswith("random:"):
        try:
            lo, hi = (float(v) for v in text[len("random:"):].split(","))
        except ValueError:
            raise ConfigError(f"bad x0 range {text!r}, expected random:lo,hi") from None
        if not lo < hi:
            raise ConfigError(f"empty x0 range {text!r}")
        return lo, hi
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"bad x0 {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError("x0 must be finite")
    return value


def resolve_x0(cfg: RunConfig) -> float:
    x0 = parse_x0(cfg.x0)
    if isinstance(x0, tuple):
        return float(np.random.default_rng(cfg.seed).uniform(*x0))
    return x0


def _make_copy(cfg: RunConfig, x0: float) -> GaussianState:
    if cfg.kind == "single":
        return prepare_single(SingleModeParams(cfg.r, x0))
    return prepare_epr(EprParams(cfg.r1, cfg.r2, x0))


# -- subcommands ---------------------------------------------------------------

def _with_metadata(payload: dict) -> dict:
    # kept in its own field so reruns compare equal once it is dropped
    payload["metadata"] = {"created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()), "version": __version__}
    return payload


def cmd_prepare(cfg: RunConfig):
    state = _make_copy(cfg, resolve_x0(cfg)).validate()
    return state.to_dict(), EXIT_OK


def cmd_concentrate(cfg: RunConfig):
    x0 = resolve_x0(cfg)
    q = cfg.quadrature.upper()
    rng = np.random.default_rng(cfg.seed)
    forced = cfg.forced
    if cfg.kind == "epr":
        if cfg.copies != 2:
            raise ConfigError("the two-mode protocol uses exactly two copies")
        pair = None if forced is None else tuple(forced)
        if pair is not None and len(pair) != 2:
            raise ConfigError("two-mode forced outcomes must be a pair")
        out, rep = concentrate_two_mode(_make_copy(cfg, x0), _make_copy(cfg, x0), pair, rng, cfg.gain, q)
    elif cfg.copies == 2 and cfg.pairing is None:
        f = None if forced is None else forced[0]
        out, rep = concentrate_single(_make_copy(cfg, x0), _make_copy(cfg, x0), cfg.gain, f, rng, q)
    else:
        try:
            ccfg = ConcentrateConfig(cfg.copies, cfg.pairing, q, forced, cfg.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        out, rep = concentrate_n(lambda: _make_copy(cfg, x0), ccfg, rng)
    ratios = [o / i for o, i in zip(*(getattr(s, "var_" + q.lower()) for s in (rep.output, rep.input)))]
    checks = dict(rep.checks())
    if cfg.gain == 0.5:
        scale = max(1.0, abs(x0))
        checks["variance_rule"] = all(abs(v - 1 / rep.copies_used) < 1e-12 for v in ratios)
        checks["mean_preserved"] = rep.mean_preservation_error < 1e-12 * scale
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "x0": x0,
        "var_ratio": ratios if len(ratios) > 1 else ratios[0],
        "state": out.to_dict(),
        "report": rep.to_dict(),
        "checks": checks,
        "passed": all(checks.values()),
    }
    return _with_metadata(payload), EXIT_OK if payload["passed"] else EXIT_CHECK


def _grid(cfg: RunConfig) -> list[float]:
    if cfg.step <= 0 or cfg.stop < cfg.start:
        raise ConfigError(f"empty sweep grid [{cfg.start}, {cfg.stop}] step {cfg.step}")
    n = int(round((cfg.stop - cfg.start) / cfg.step)) + 1
    return [round(v, 12) for v in np.linspace(cfg.start, cfg.start + (n - 1) * cfg.step, n)]


def cmd_sweep(cfg: RunConfig):
    values = _grid(cfg)
    x0 = resolve_x0(cfg)
    if cfg.kind == "single":
        if cfg.param != "r":
            raise ConfigError("single-mode sweeps vary r only")
        rows, cols = sweep_single(values, x0), SWEEP_COLUMNS_SINGLE
    else:
        if cfg.param == "r":
            pts = [(v, v) for v in values]
        elif cfg.param == "r1":
            pts = [(v, cfg.r2) for v in values]
        elif cfg.param == "r2":
            pts = [(cfg.r1, v) for v in values]
        else:
            raise ConfigError(f"unknown sweep parameter {cfg.param!r}")
        rows, cols = sweep_two_mode(pts, x0), SWEEP_COLUMNS_EPR
    if cfg.format == "json":
        return {"schema_version": SCHEMA_VERSION, "columns": list(cols), "rows": rows}, EXIT_OK
    buf = io.StringIO()
    buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(float(row[k])) for k in cols})
    return buf.getvalue(), EXIT_OK


def cmd_montecarlo(cfg: RunConfig):
    spec = ProtocolSpec(
        "single" if cfg.kind == "single" else "two_mode", cfg.r, cfg.r1, cfg.r2, cfg.gain, cfg.quadrature
    )
    if cfg.trials < 2:
        raise ConfigError("trials must be >= 2")
    st = monte_carlo_run(spec, cfg.trials, parse_x0(cfg.x0), seed=cfg.seed, workers=cfg.workers)
    checks = {
        "deterministic_output_cov": st.analytic_var_spread == 0.0,
        "analytic_mean_preserved": st.analytic_mean_error_max < 1e-9,
        "mean_error_within_3se": abs(st.mean_error) <= 3 * st.mean_error_se,
        "variance_within_5se": abs(st.empirical_var - st.analytic_var) <= 5 * st.empirical_var_se,
    }
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "stats": st.to_dict(),
        "checks": checks,
        "passed": all(checks.values()),
    }
    return _with_metadata(payload), EXIT_OK if payload["passed"] else EXIT_CHECK


def cmd_oracle_check(cfg: RunConfig):
    x0 = parse_x0(cfg.x0)
    if isinstance(x0, tuple):
        raise ConfigError("oracle-check needs a fixed x0")
    ocfg = OracleConfig(
        r=cfg.r, x0=x0, r1=cfg.r1, r2=cfg.r2, x0_two_mode=x0,
        points_1d=cfg.points_1d, points_2d=cfg.points_2d, wigner_points=cfg.wigner_points,
        n_sigma=cfg.n_sigma, tol=cfg.tol,
    )
    report = oracle_check(ocfg)
    return _with_metadata(report), EXIT_OK if report["passed"] else EXIT_CHECK


HANDLERS = {
    "prepare": cmd_prepare,
    "concentrate": cmd_concentrate,
    "sweep": cmd_sweep,
    "montecarlo": cmd_montecarlo,
    "oracle-check": cmd_oracle_check,
}

ORACLE_DEFAULTS = {"r": 0.5, "r1": 0.5, "r2": 0.5, "x0": "1.0"}


# -- argument handling ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override it)")
    common.add_argument("--out", "-o", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--format", choices=["json", "csv"])
    kind = common.add_mutually_exclusive_group()
    kind.add_argument("--single", dest="kind", action="store_const", const="single", help="single-mode squeezed state")
    kind.add_argument("--epr", dest="kind", action="store_const", const="epr", help="displaced two-mode squeezed vacuum")
    common.add_argument("--r", type=float, help="single-mode squeezing")
    common.add_argument("--r1", type=float, help="two-mode sum squeezing (sigma_plus = e^{2 r1})")
    common.add_argument("--r2", type=float, help="two-mode difference squeezing (sigma_minus = e^{-2 r2})")
    common.add_argument("--x0", help="displacement, or random:lo,hi")

    parser = argparse.ArgumentParser(prog="squeezeconc", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("prepare", parents=[common], help="write a Gaussian state JSON file")

    p = sub.add_parser("concentrate", parents=[common], help="run a concentration protocol")
    p.add_argument("--copies", type=int)
    p.add_argument("--pairing", choices=["binary_tree", "sequential_optimal_gain"])
    p.add_argument("--quadrature", choices=["X", "P", "x", "p"])
    p.add_argument("--gain", type=float)
    p.add_argument("--forced", type=float, nargs="+", help="forced homodyne outcomes")

    p = sub.add_parser("sweep", parents=[common], help="CSV of diagnostics over a squeezing grid")
    p.add_argument("--param", choices=["r", "r1", "r2"])
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)

    p = sub.add_parser("montecarlo", parents=[common], help="sampled-outcome statistics")
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--gain", type=float)
    p.add_argument("--quadrature", choices=["X", "P", "x", "p"])

    p = sub.add_parser("oracle-check", parents=[common], help="grid oracle vs covariance engine")
    p.add_argument("--points-1d", dest="points_1d", type=int)
    p.add_argument("--points-2d", dest="points_2d", type=int)
    p.add_argument("--wigner-points", dest="wigner_points", type=int)
    p.add_argument("--points", type=int, help="set all grid sizes at once")
    p.add_argument("--n-sigma", dest="n_sigma", type=float)
    p.add_argument("--tol", type=float)
    return parser


def config_from_args(args: argparse.Namespace, env=os.environ) -> RunConfig:
    base = asdict(RunConfig(subcommand=args.subcommand))
    if args.subcommand == "oracle-check":
        base.update(ORACLE_DEFAULTS)
    if args.subcommand == "sweep":
        base["kind"] = "epr"
        base["format"] = "csv"
    if env.get(SEED_ENV):
        try:
            base["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        data.pop("schema_version", None)
        data.pop("subcommand", None)
        RunConfig.from_dict(data)  # rejects unknown keys
        base.update(data)
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "points")}
    if getattr(args, "points", None) is not None:
        for k in ("points_1d", "points_2d", "wigner_points"):
            flags.setdefault(k, args.points)
    if "quadrature" in flags:
        flags["quadrature"] = flags["quadrature"].upper()
    if "x0" in flags:
        flags["x0"] = str(flags["x0"])
    base.update(flags)
    base["x0"] = str(base["x0"])
    return RunConfig.from_dict(base).validate()


def _emit(payload, path):
    if isinstance(payload, str):
        text = payload
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 2 is reserved for failed checks here
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        payload, code = HANDLERS[cfg.subcommand](cfg)
        _emit(payload, cfg.out)
    except (ConfigError, ValueError) as exc:
        print(f"squeezeconc {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"squeezeconc {args.subcommand}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if code == EXIT_CHECK:
        for line in payload.get("diagnostics", []) if isinstance(payload, dict) else []:
            print(f"squeezeconc {args.subcommand}: {line}", file=sys.stderr)
        print(f"squeezeconc {args.subcommand}: numerical check failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
