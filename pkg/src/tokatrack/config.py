"""Scenario configuration: flat key = value files, strict validation.

The format is deliberately primitive so configs stay diffable and the
parser stays dependency-free: one ``section.key = value`` per line, ``#``
comments, no nesting. Unknown and duplicate keys are rejected; every
value is bounds-checked on load; two defaults are derived when left
unset (``time.dt`` from ``time.tf`` and ``controller.adapt_gain`` from
``controller.alpha0``).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .control import ControllerConfig, FbsConfig
from .grid import make_grid
from .reference import make_reference, parabolic_pedestal_profiles, profile_from_csv
from .solvers import TimeStepConfig
from .transport import derive_coefficients, tore_supra_like

__all__ = ["ScenarioConfig", "load_config", "write_effective_config"]

_PRESET = tore_supra_like(make_grid(3))


@dataclass
class ScenarioConfig:
    grid_n: int = 101
    tf: float = 1.0
    dt: float = 0.005  # rederived as tf / 200 when tf is set without dt
    theta: float = 1.0
    mu: float = 5.85
    profile: str = "parabolic-pedestal"
    t_core0: float = 10.0
    t_coref: float = 30.0
    shape_gamma: float = 1.5
    pedestal_amp: float = 0.12
    pedestal_center: float = 0.9
    pedestal_width: float = 0.06
    t0_csv: str = ""
    tbar_csv: str = ""
    a: float = _PRESET.a
    r_major: float = _PRESET.R
    b_phi0: float = _PRESET.B_phi0
    k: float = _PRESET.k
    omega_exb: float = _PRESET.omega_ExB
    gamma_itg: float = _PRESET.gamma_ITG
    s_thres: float = _PRESET.s_thres
    l_te: float = _PRESET.L_Te
    chi_floor: float = _PRESET.chi_floor
    q_core: float = 1.0
    q_edge: float = 3.2
    alpha0: float = 10.0
    adapt_gain: float = 1.0  # rederived as 0.1 * alpha0 when alpha0 is set without it
    alpha_min: float = 1e-2
    alpha_max: float = 1e4
    fbs_alpha: float = 10.0
    fbs_eps: float = 1e-6
    fbs_n_max: int = 1000
    fbs_relaxation: float = 0.5
    output_dir: str = "out"
    seed: int = 0


def _positive(v):
    return v > 0


def _nonnegative(v):
    return v >= 0


# key -> (attribute, caster, predicate, requirement text)
_SCHEMA = {
    "grid.n": ("grid_n", int, lambda v: v >= 3, ">= 3"),
    "time.tf": ("tf", float, _positive, "> 0"),
    "time.dt": ("dt", float, _positive, "> 0"),
    "time.theta": ("theta", float, lambda v: 0.5 <= v <= 1.0, "in [0.5, 1]"),
    "reference.mu": ("mu", float, _positive, "> 0"),
    "reference.profile": (
        "profile",
        str,
        lambda v: v in ("parabolic-pedestal", "csv"),
        "one of parabolic-pedestal, csv",
    ),
    "reference.t_core0": ("t_core0", float, _positive, "> 0"),
    "reference.t_coref": ("t_coref", float, _positive, "> 0"),
    "reference.shape_gamma": ("shape_gamma", float, _positive, "> 0"),
    "reference.pedestal_amp": ("pedestal_amp", float, _nonnegative, ">= 0"),
    "reference.pedestal_center": ("pedestal_center", float, lambda v: 0.0 < v < 1.0, "in (0, 1)"),
    "reference.pedestal_width": ("pedestal_width", float, _positive, "> 0"),
    "reference.t0_csv": ("t0_csv", str, lambda v: True, ""),
    "reference.tbar_csv": ("tbar_csv", str, lambda v: True, ""),
    "transport.a": ("a", float, _positive, "> 0"),
    "transport.r_major": ("r_major", float, _positive, "> 0"),
    "transport.b_phi0": ("b_phi0", float, _positive, "> 0"),
    "transport.k": ("k", float, _nonnegative, ">= 0"),
    "transport.omega_exb": ("omega_exb", float, _nonnegative, ">= 0"),
    "transport.gamma_itg": ("gamma_itg", float, _positive, "> 0"),
    "transport.s_thres": ("s_thres", float, lambda v: True, ""),
    "transport.l_te": ("l_te", float, _nonnegative, ">= 0"),
    "transport.chi_floor": ("chi_floor", float, _positive, "> 0"),
    "transport.q_core": ("q_core", float, _positive, "> 0"),
    "transport.q_edge": ("q_edge", float, _positive, "> 0"),
    "controller.alpha0": ("alpha0", float, _positive, "> 0"),
    "controller.adapt_gain": ("adapt_gain", float, _nonnegative, ">= 0"),
    "controller.alpha_min": ("alpha_min", float, _positive, "> 0"),
    "controller.alpha_max": ("alpha_max", float, _positive, "> 0"),
    "fbs.alpha": ("fbs_alpha", float, _positive, "> 0"),
    "fbs.eps": ("fbs_eps", float, _positive, "> 0"),
    "fbs.n_max": ("fbs_n_max", int, lambda v: v >= 1, ">= 1"),
    "fbs.relaxation": ("fbs_relaxation", float, lambda v: 0.0 < v <= 1.0, "in (0, 1]"),
    "output.dir": ("output_dir", str, lambda v: len(v) > 0, "non-empty"),
    "seed": ("seed", int, lambda v: v >= 0, ">= 0"),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _, _, _) in _SCHEMA.items()}


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario file; missing keys take defaults.

    Raises ValueError with the offending line number for parse errors and
    with the offending key for validation errors.
    """
    cfg = ScenarioConfig()
    seen = set()
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            raise ValueError(f"{path}:{lineno}: unknown key '{key}'")
        if key in seen:
            raise ValueError(f"{path}:{lineno}: duplicate key '{key}'")
        seen.add(key)
        attr, caster, predicate, requirement = _SCHEMA[key]
        try:
            parsed = caster(value)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: key '{key}': cannot parse {value!r} as {caster.__name__}") from exc
        if not predicate(parsed):
            raise ValueError(f"{path}:{lineno}: key '{key}' must be {requirement}, got {parsed!r}")
        setattr(cfg, attr, parsed)

    if "time.dt" not in seen:
        cfg.dt = cfg.tf / 200.0
    if "controller.adapt_gain" not in seen:
        cfg.adapt_gain = 0.1 * cfg.alpha0

    if not cfg.alpha_min <= cfg.alpha0 <= cfg.alpha_max:
        raise ValueError("key 'controller.alpha0' must lie within [alpha_min, alpha_max]")
    if cfg.dt > cfg.tf:
        raise ValueError("key 'time.dt' must not exceed time.tf")
    if cfg.profile == "csv" and (not cfg.t0_csv or not cfg.tbar_csv):
        raise ValueError("keys 'reference.t0_csv' and 'reference.tbar_csv' are required for csv profiles")
    return cfg


def write_effective_config(cfg: ScenarioConfig, path):
    """Echo the fully resolved configuration in schema order."""
    lines = []
    for f in fields(ScenarioConfig):
        value = getattr(cfg, f.name)
        lines.append(f"{_ATTR_TO_KEY[f.name]} = {value!r}" if isinstance(value, str) else f"{_ATTR_TO_KEY[f.name]} = {value}")
    Path(path).write_text("\n".join(lines) + "\n")


def build_grid(cfg: ScenarioConfig):
    return make_grid(cfg.grid_n)


def build_transport(cfg: ScenarioConfig, g):
    params = tore_supra_like(
        g,
        q_core=cfg.q_core,
        q_edge=cfg.q_edge,
        a=cfg.a,
        R=cfg.r_major,
        B_phi0=cfg.b_phi0,
        k=cfg.k,
        omega_ExB=cfg.omega_exb,
        gamma_ITG=cfg.gamma_itg,
        s_thres=cfg.s_thres,
        L_Te=cfg.l_te,
        chi_floor=cfg.chi_floor,
    )
    return params, derive_coefficients(params, g)


def build_reference(cfg: ScenarioConfig, g):
    if cfg.profile == "csv":
        T0 = profile_from_csv(cfg.t0_csv, g)
        Tbar = profile_from_csv(cfg.tbar_csv, g)
    else:
        T0, Tbar = parabolic_pedestal_profiles(
            g,
            t_core0=cfg.t_core0,
            t_coref=cfg.t_coref,
            shape_gamma=cfg.shape_gamma,
            pedestal_amp=cfg.pedestal_amp,
            pedestal_center=cfg.pedestal_center,
            pedestal_width=cfg.pedestal_width,
        )
    return make_reference(g, T0, Tbar, cfg.mu, cfg.tf)


def build_controller(cfg: ScenarioConfig) -> ControllerConfig:
    return ControllerConfig(
        alpha0=cfg.alpha0,
        adapt_gain=cfg.adapt_gain,
        alpha_min=cfg.alpha_min,
        alpha_max=cfg.alpha_max,
        dt=cfg.dt,
        tf=cfg.tf,
    )


def build_timestep(cfg: ScenarioConfig) -> TimeStepConfig:
    return TimeStepConfig(dt=cfg.dt, theta=cfg.theta)


def build_fbs(cfg: ScenarioConfig, alpha=None) -> FbsConfig:
    return FbsConfig(
        alpha=cfg.fbs_alpha if alpha is None else float(alpha),
        eps=cfg.fbs_eps,
        n_max=cfg.fbs_n_max,
        relaxation=cfg.fbs_relaxation,
    )
