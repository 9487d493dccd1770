"""Seeded instance generation and suite execution.

A single 64-bit seed drives everything: the RNG stream for a trial is derived
from (seed, identity name, g, trial index), so cells are independent,
reorderable, and replayable bit-for-bit from the digest recorded in every
report.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .identities import (
    DEFAULT_TARGET,
    IDENTITY_NAMES,
    IdentityInstance,
    REGISTRY,
    ResidualReport,
    budget_epsilon,
    evaluate,
)
from .theta import Characteristic, EvalSettings, RiemannMatrix, ThetaPoint, enumerate_half_periods

__all__ = [
    "CellResult",
    "SuiteConfig",
    "SuiteReport",
    "generate_instance",
    "replay",
    "run_suite",
]

_MASK64 = (1 << 64) - 1


def _name_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "big")


def _stream(seed: int, identity: str, g: int, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & _MASK64, _name_key(identity), int(g), int(trial)])
    return np.random.Generator(np.random.PCG64(ss))


def _draw_riemann(rng: np.random.Generator, g: int) -> RiemannMatrix:
    """tau = X + i(B B^T + 0.3 I): X symmetric uniform in [-1/2, 1/2],
    B entries 0.5 * standard normal, so lambda_min(Im tau) >= 0.3."""
    X = rng.uniform(-0.5, 0.5, size=(g, g))
    X = np.triu(X) + np.triu(X, 1).T
    B = 0.5 * rng.normal(size=(g, g))
    Y = (B[:, None, :] * B[None, :, :]).sum(axis=2) + 0.3 * np.eye(g)
    return RiemannMatrix(X + 1j * Y)


def _draw_point(rng: np.random.Generator, g: int) -> ThetaPoint:
    re = rng.uniform(-1.0, 1.0, size=g)
    im = rng.uniform(-1.0, 1.0, size=g)
    return ThetaPoint(re + 1j * im)


def _draw_characteristic(rng: np.random.Generator, g: int) -> Characteristic:
    """Half-periods and rationals with denominator <= 8, in equal proportion."""
    if int(rng.integers(2)) == 0:
        bits = rng.integers(0, 2, size=2 * g)
        return Characteristic(bits[:g] / 2.0, bits[g:] / 2.0)
    dens = rng.integers(1, 9, size=2 * g)
    nums = np.array([int(rng.integers(0, d)) for d in dens])
    vals = nums / dens
    return Characteristic(vals[:g], vals[g:])


def _draw_odd_half_period(rng: np.random.Generator, g: int) -> Characteristic:
    odds = enumerate_half_periods(g)[1]
    return odds[int(rng.integers(len(odds)))]


def generate_instance(
    identity: str,
    g: int,
    seed: int,
    trial: int,
    *,
    target_residual: float = DEFAULT_TARGET,
    eval_overrides: EvalSettings | None = None,
    extra: dict | None = None,
) -> IdentityInstance:
    """Deterministic instance for (seed, identity, g, trial).

    The stream always advances in the same order (extras, tau, points,
    characteristics), so supplying explicit extras replays the same tau and
    points that the free draw would have produced.
    """
    if identity not in REGISTRY:
        raise ValueError(f"unknown identity {identity!r}; valid names: {', '.join(IDENTITY_NAMES)}")
    d = REGISTRY[identity]
    if not d.supports_g(g):
        raise ValueError(f"identity {identity!r} does not support g={g}")
    rng = _stream(seed, identity, g, trial)
    drawn = d.draw_extra(rng) if d.draw_extra is not None else {}
    ex = dict(extra) if extra is not None else drawn
    tau = _draw_riemann(rng, g)
    points = tuple(_draw_point(rng, g) for _ in range(d.n_points(g)))
    if d.char_mode == "odd_half_period":
        chars = tuple(_draw_odd_half_period(rng, g) for _ in range(d.n_chars))
    else:
        chars = tuple(_draw_characteristic(rng, g) for _ in range(d.n_chars))
    if eval_overrides is not None:
        settings = eval_overrides
    else:
        settings = EvalSettings(epsilon=budget_epsilon(identity, g, ex, target_residual))
    digest = f"identity={identity};g={g};seed={seed};trial={trial}"
    for key in sorted(ex):
        digest += f";{key}={int(ex[key])}"
    digest += f";eps={settings.epsilon!r}"
    if settings.radius_margin:
        digest += f";margin={settings.radius_margin!r}"
    return IdentityInstance(g, tau, points, chars, ex, settings, digest)


def replay(digest: str) -> list[ResidualReport]:
    """Re-run the instance a digest describes; residuals match the original
    run to the last bit."""
    parts: dict[str, str] = {}
    for chunk in digest.split(";"):
        key, _, value = chunk.partition("=")
        if key and value:
            parts[key] = value
    identity = parts["identity"]
    g = int(parts["g"])
    seed = int(parts["seed"])
    trial = int(parts["trial"])
    eps = float(parts.get("eps", repr(DEFAULT_SETTINGS_EPS)))
    margin = float(parts.get("margin", "0.0"))
    extra = {
        k: int(v)
        for k, v in parts.items()
        if k not in ("identity", "g", "seed", "trial", "eps", "margin", "q")
    }
    inst = generate_instance(
        identity,
        g,
        seed,
        trial,
        eval_overrides=EvalSettings(epsilon=eps, radius_margin=margin),
        extra=extra or None,
    )
    return evaluate(identity, inst)


DEFAULT_SETTINGS_EPS = 1e-12


@dataclass(frozen=True)
class SuiteConfig:
    """What to run: seed, dimensions, trial grid, identity subset, target."""

    seed: int = 0
    dims: tuple[int, ...] = (1, 2)
    trials_per_cell: int = 25
    identities: tuple[str, ...] = IDENTITY_NAMES
    target_residual: float = DEFAULT_TARGET
    eval_overrides: EvalSettings | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(g) for g in self.dims))
        object.__setattr__(self, "identities", tuple(self.identities))
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be >= 1")
        if not (0.0 < self.target_residual <= 1e-3):
            raise ValueError("target_residual must lie in (0, 1e-3]")
        unknown = [n for n in self.identities if n not in REGISTRY]
        if unknown:
            raise ValueError(
                f"unknown identities {unknown}; valid names: {', '.join(IDENTITY_NAMES)}"
            )
        for g in self.dims:
            if g < 1:
                raise ValueError("dimensions must be >= 1")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "dims": list(self.dims),
            "trials_per_cell": self.trials_per_cell,
            "identities": list(self.identities),
            "target_residual": self.target_residual,
            "eval_overrides": None
            if self.eval_overrides is None
            else {
                "epsilon": self.eval_overrides.epsilon,
                "radius_margin": self.eval_overrides.radius_margin,
            },
        }


@dataclass
class CellResult:
    """Aggregate over the trials of one (identity, g) cell."""

    identity: str
    g: int
    max_residual: float
    mean_residual: float
    failures: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "g": self.g,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "failures": list(self.failures),
        }


@dataclass
class SuiteReport:
    """Per-cell aggregates plus the configuration echo."""

    config: SuiteConfig
    cells: list[CellResult]
    wall_time_s: float

    @property
    def total_failures(self) -> int:
        return sum(len(c.failures) for c in self.cells)

    def to_dict(self, include_wall_time: bool = False) -> dict:
        # wall_time_s is pinned to 0.0 by default so the emitted document is
        # byte-identical across reruns; measured time goes to the console.
        return {
            "config": self.config.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
            "wall_time_s": self.wall_time_s if include_wall_time else 0.0,
        }


def _thread_cap() -> int:
    raw = os.environ.get("THETA_LAB_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"THETA_LAB_THREADS must be a positive integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError(f"THETA_LAB_THREADS must be a positive integer, got {raw!r}")
    return cap


def run_suite(cfg: SuiteConfig) -> SuiteReport:
    """Run every (identity, g, trial) cell, collect failures, aggregate.

    Failures are data, not errors: the suite never aborts on a residual above
    target.  Per-trial arithmetic is sequential, so thread scheduling cannot
    change any number in the report.
    """
    start = time.perf_counter()
    cells = [
        (name, g)
        for name in cfg.identities
        for g in cfg.dims
        if REGISTRY[name].supports_g(g)
    ]
    tasks = [(name, g, t) for (name, g) in cells for t in range(cfg.trials_per_cell)]

    def run_one(task: tuple[str, int, int]) -> tuple[tuple[str, int, int], list[ResidualReport]]:
        name, g, t = task
        inst = generate_instance(
            name,
            g,
            cfg.seed,
            t,
            target_residual=cfg.target_residual,
            eval_overrides=cfg.eval_overrides,
        )
        return task, evaluate(name, inst)

    results: dict[tuple[str, int, int], list[ResidualReport]] = {}
    cap = _thread_cap()
    if cap == 1 or len(tasks) <= 1:
        for task in tasks:
            key, reports = run_one(task)
            results[key] = reports
    else:
        with ThreadPoolExecutor(max_workers=cap) as pool:
            for key, reports in pool.map(run_one, tasks):
                results[key] = reports

    out: list[CellResult] = []
    for name, g in cells:
        residuals: list[float] = []
        failures: list[str] = []
        for t in range(cfg.trials_per_cell):
            reports = results[(name, g, t)]
            residuals.append(max(r.residual for r in reports))
            failures.extend(
                r.instance_digest for r in reports if r.residual > cfg.target_residual
            )
        out.append(
            CellResult(
                identity=name,
                g=g,
                max_residual=max(residuals),
                mean_residual=math.fsum(residuals) / len(residuals),
                failures=failures,
            )
        )
    return SuiteReport(cfg, out, time.perf_counter() - start)
