"""Seeded random elements and the randomized inclusion harness.

Sample i of a run with master seed s draws from ``default_rng([s, i])``, so
reports are reproducible bit for bit and samples could be generated in any
order (or in parallel) without changing the outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .construction import INCLUSION_TOLERANCE, DeltaSystem, verify_inclusion
from .germspace import LOG_ZERO, CompactGrid, TruncatedElement, index_table, scale
from .norms import WeightSequence, weighted_seminorm


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def random_grid(rng: np.random.Generator, dim: int, count: int) -> CompactGrid:
    pts = rng.uniform(0.0, 1.0, (count, dim))
    return CompactGrid(dim, tuple(tuple(p) for p in pts), label="random")


def random_element(
    rng: np.random.Generator,
    dim: int,
    order_cap: int,
    grid: CompactGrid | None = None,
    zero_fraction: float = 0.1,
) -> TruncatedElement:
    """Random payloads with a random geometric growth trend across shells.

    A fraction of rows is zeroed to exercise the exact-zero magnitude paths.
    """
    table = index_table(dim, order_cap)
    width = len(grid) if grid is not None else 1
    coeffs = rng.uniform(-1.0, 1.0, (len(table), width))
    rate = rng.uniform(-0.5, 1.2)
    coeffs *= np.exp(table.orders * rate)[:, None]
    if zero_fraction > 0.0:
        coeffs[rng.uniform(size=len(table)) < zero_fraction] = 0.0
    return TruncatedElement(dim, order_cap, coeffs, grid)


def normalized_to_unit(e: TruncatedElement, ws: WeightSequence) -> TruncatedElement:
    """Rescale onto the seminorm unit sphere (zero elements pass through)."""
    s = weighted_seminorm(e, ws).log_value
    if s == LOG_ZERO:
        return e
    return scale(e, math.exp(-s))


@dataclass(frozen=True)
class SuiteResult:
    """Aggregate of one randomized inclusion run."""

    config: dict[str, Any]
    samples: int
    passes: int
    worst_margin: float
    shell0_separate_count: int
    failures: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.passes == self.samples

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "samples": self.samples,
            "passes": self.passes,
            "passed": self.passed,
            "worst_margin": self.worst_margin if math.isfinite(self.worst_margin) else None,
            "shell0_separate_count": self.shell0_separate_count,
            "failures": self.failures,
        }


def run_inclusion_suite(
    ds: DeltaSystem,
    dim: int,
    samples: int,
    seed: int,
    mode: str = "scalar",
    grid_count: int = 3,
    tolerance: float = INCLUSION_TOLERANCE,
) -> SuiteResult:
    """Check ``samples`` random unit-seminorm elements against the budgets.

    Every sample must pass: a failure would falsify the truncated block
    bound, which the construction guarantees, so it indicates a bug.
    """
    if samples < 1:
        raise ValueError(f"need at least one sample, got {samples}")
    if mode not in ("scalar", "germ"):
        raise ValueError(f"mode must be 'scalar' or 'germ', got {mode!r}")
    ws = ds.weights()
    passes = 0
    worst = math.inf
    separate = 0
    failures: list[dict[str, Any]] = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        grid = random_grid(rng, dim, grid_count) if mode == "germ" else None
        e = normalized_to_unit(random_element(rng, dim, ds.order_cap, grid), ws)
        cert = verify_inclusion(e, ds, tolerance)
        worst = min(worst, cert.worst_margin)
        separate += cert.shell0_separate
        if cert.passed:
            passes += 1
        else:
            failures.append(
                {"sample": i, "seed": [seed, i], "worst_margin": cert.worst_margin}
            )
    config = {
        "eps": [float(v) for v in ds.eps.values],
        "order_cap": ds.order_cap,
        "dim": dim,
        "mode": mode,
        "grid_count": grid_count if mode == "germ" else None,
        "seed": seed,
        "tolerance": tolerance,
    }
    return SuiteResult(config, samples, passes, float(worst), separate, failures)
