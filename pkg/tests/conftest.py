"""Shared fixtures: the default tracking scenario and its closed-loop run.

The default run is session-scoped because several acceptance criteria
grade the same trajectory; its wall time is captured for the runtime
gate.
"""

import time
from types import SimpleNamespace

import pytest

from tokatrack import run_rhc
from tokatrack.config import (
    ScenarioConfig,
    build_controller,
    build_grid,
    build_reference,
    build_timestep,
    build_transport,
)


def make_scenario(**overrides):
    cfg = ScenarioConfig()
    for key, value in overrides.items():
        if not hasattr(cfg, key):
            raise AttributeError(key)
        setattr(cfg, key, value)
    g = build_grid(cfg)
    params, coeffs = build_transport(cfg, g)
    ref = build_reference(cfg, g)
    return SimpleNamespace(
        cfg=cfg,
        g=g,
        params=params,
        coeffs=coeffs,
        ref=ref,
        ctrl=build_controller(cfg),
        ts=build_timestep(cfg),
    )


@pytest.fixture(scope="session")
def default_scenario():
    return make_scenario()


@pytest.fixture(scope="session")
def default_run(default_scenario):
    s = default_scenario
    start = time.perf_counter()
    res = run_rhc(s.g, s.coeffs, s.ref, s.ctrl, s.cfg.chi_floor, theta=s.cfg.theta)
    elapsed = time.perf_counter() - start
    return res, elapsed
