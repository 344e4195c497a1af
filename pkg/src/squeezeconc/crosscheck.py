"""Agreement report between the covariance engine and the grid oracle."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import wigner_oracle as wo
from .gauss_core import EprParams, SingleModeParams, prepare_epr, prepare_single
from .protocols import SCHEMA_VERSION, concentrate_single, concentrate_two_mode


@dataclass(frozen=True)
class OracleConfig:
    r: float = 0.5
    x0: float = 1.7
    r1: float = 0.5
    r2: float = 0.5
    x0_two_mode: float = 1.0
    points_1d: int = wo.DEFAULT_POINTS_1D
    points_2d: int = wo.DEFAULT_POINTS_2D
    wigner_points: int = 128
    n_sigma: float = wo.DEFAULT_N_SIGMA
    tol: float = 1e-3
    method: str = "direct"


def _entry(engine, oracle) -> dict:
    return {"engine": float(engine), "oracle": float(oracle), "abs_diff": abs(float(engine) - float(oracle))}


def _single(cfg: OracleConfig) -> dict:
    state = prepare_single(SingleModeParams(cfg.r, cfg.x0))
    out, _ = concentrate_single(state, state, forced=0.0)
    px = wo.gaussian_to_grid(state, [0], cfg.points_1d, cfg.n_sigma)
    pp = wo.gaussian_to_grid(state, [1], cfg.points_1d, cfg.n_sigma)
    ox, op = wo.protocol_marginals_single((px, pp), (px, pp), cfg.method)
    for g in (ox, op):
        wo.check_resolution(g)
    mx, vx = wo.grid_moments(ox)
    mp, vp = wo.grid_moments(op)
    return {
        "mean_x": _entry(out.mean[0], mx[0]),
        "mean_p": _entry(out.mean[1], mp[0]),
        "var_x": _entry(out.cov[0, 0], vx[0, 0]),
        "var_p": _entry(out.cov[1, 1], vp[0, 0]),
    }


def _two_mode(cfg: OracleConfig) -> dict:
    state = prepare_epr(EprParams(cfg.r1, cfg.r2, cfg.x0_two_mode))
    out, _ = concentrate_two_mode(state, state, forced=(0.0, 0.0))
    jx = wo.gaussian_to_grid(state, [0, 2], cfg.points_2d, cfg.n_sigma)
    jp = wo.gaussian_to_grid(state, [1, 3], cfg.points_2d, cfg.n_sigma)
    ox, op = wo.protocol_marginals_two_mode((jx, jp), (jx, jp), cfg.method)
    for g in (ox, op):
        wo.check_resolution(g)
    mx, vx = wo.grid_moments(ox)
    mp, vp = wo.grid_moments(op)
    res = {}
    for name, m_eng, m_or in (("mean_x", out.mean[0::2], mx), ("mean_p", out.mean[1::2], mp)):
        for k, party in enumerate("AB"):
            res[f"{name}_{party}"] = _entry(m_eng[k], m_or[k])
    for name, v_eng, v_or in (("V_X", out.cov[0::2, 0::2], vx), ("V_P", out.cov[1::2, 1::2], vp)):
        for i, j in ((0, 0), (0, 1), (1, 1)):
            res[f"{name}_{'AB'[i]}{'AB'[j]}"] = _entry(v_eng[i, j], v_or[i, j])
    return res


def _wigner(cfg: OracleConfig) -> dict:
    state = prepare_single(SingleModeParams(cfg.r, cfg.x0))
    out, _ = concentrate_single(state, state, forced=0.0)
    W = wo.wigner_grid(state, 0, cfg.wigner_points, cfg.n_sigma)
    Wt = wo.full_wigner_transform_single(W, W)
    wo.check_resolution(Wt)
    m, v = wo.grid_moments(Wt)
    px = wo.gaussian_to_grid(state, [0], cfg.wigner_points, cfg.n_sigma)
    pp = wo.gaussian_to_grid(state, [1], cfg.wigner_points, cfg.n_sigma)
    ox, _ = wo.protocol_marginals_single((px, pp), (px, pp), cfg.method)
    return {
        "mean_x": _entry(out.mean[0], m[0]),
        "var_x": _entry(out.cov[0, 0], v[0, 0]),
        "var_p": _entry(out.cov[1, 1], v[1, 1]),
        "norm": _entry(1.0, Wt.norm()),
        "marginal_l1": _entry(0.0, wo.l1_distance(Wt.marginal(0), ox)),
    }


def oracle_check(cfg: OracleConfig = OracleConfig()) -> dict:
    """Run both engines on the configured states and report the largest moment discrepancy.

    A grid that is too coarse or too narrow is reported as a failed check with
    its diagnostic rather than raised.
    """
    report = {"schema_version": SCHEMA_VERSION, "config": asdict(cfg), "diagnostics": []}
    worst = 0.0
    for name, fn in (("single_mode", _single), ("two_mode", _two_mode), ("wigner", _wigner)):
        try:
            section = fn(cfg)
        except wo.GridError as exc:
            report[name] = None
            report["diagnostics"].append(f"{name}: {exc}")
            worst = np.inf
            continue
        report[name] = section
        worst = max(worst, max(e["abs_diff"] for e in section.values()))
    report["max_discrepancy"] = None if not np.isfinite(worst) else worst
    report["tolerance"] = cfg.tol
    report["passed"] = bool(np.isfinite(worst) and worst < cfg.tol)
    return report
