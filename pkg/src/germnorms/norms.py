"""Step norms, weighted seminorms, continuity constants, growth diagnostics.

The step norm of growth rate k is sup over alpha of the payload magnitude
times k**(-|alpha|); larger k admits faster coefficient growth.  The weighted
seminorm replaces k**(-|alpha|) by weights delta_n**n built from a positive
sequence (delta_n).  When delta is a null sequence these seminorms dominate
the whole scale of step norms, which is what the construction module
certifies block by block.

Everything is evaluated in the log domain.  The order-0 weight is fixed to 1
(the 0**0 = 1 convention), so the entry ``values[0]`` of a WeightSequence is
a placeholder that never enters any evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .errors import ShapeError
from .germspace import LOG_ZERO, TruncatedElement, row_log_sups, shell_log_sups


@dataclass(frozen=True)
class WeightSequence:
    """Positive weights delta_0 ... delta_N with their exact logs.

    ``log_values`` is the authoritative representation; ``values`` mirrors it
    in plain magnitude for reporting.  Constructed weight systems pass their
    exactly-known logs through so that cancellation identities hold to
    machine precision.
    """

    values: np.ndarray
    log_values: np.ndarray
    meta: Any = None

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64)
        logs = np.array(self.log_values, dtype=np.float64)
        if vals.ndim != 1 or vals.shape != logs.shape:
            raise ShapeError("weight values and log values must be 1-d arrays of equal length")
        if not (vals > 0.0).all() or not np.isfinite(vals).all():
            raise ValueError("weights must be strictly positive and finite")
        vals.flags.writeable = False
        logs.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "log_values", logs)

    @classmethod
    def from_values(cls, values: Iterable[float], meta: Any = None) -> "WeightSequence":
        vals = np.array(list(values), dtype=np.float64)
        return cls(vals, np.log(vals), meta)

    def __len__(self) -> int:
        return len(self.values)


def seminorm_exponents(ws: WeightSequence, order_cap: int) -> np.ndarray:
    """Log-domain weight exponents w[n] = n*log(delta_n), with w[0] = 0.

    The n = 0 entry is pinned to 0 regardless of delta_0, which keeps the
    seminorm dominating the order-0 coefficient.
    """
    if len(ws) < order_cap + 1:
        raise ShapeError(
            f"weight sequence of length {len(ws)} is too short for order cap {order_cap}"
        )
    n = np.arange(order_cap + 1)
    w = n * ws.log_values[: order_cap + 1]
    w[0] = 0.0
    return w


@dataclass(frozen=True)
class NormReport:
    """A norm value with the multi-index and grid point attaining it.

    ``log_value`` is LOG_ZERO exactly when the element is zero.  Ties are
    broken by the lexicographically smallest multi-index, then the lowest
    grid point index; ``argmax_point`` is None in scalar mode.
    ``heuristic_finite`` optionally carries the growth-diagnostic flags of
    :func:`classify_growth` (a guess, never a certificate).
    """

    log_value: float
    argmax_alpha: tuple[int, ...]
    argmax_point: int | None
    heuristic_finite: dict[int, bool] | None = None

    @property
    def magnitude(self) -> float:
        if self.log_value == LOG_ZERO:
            return 0.0
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf

    def to_dict(self) -> dict[str, Any]:
        mag = self.magnitude
        return {
            "log_value": self.log_value if math.isfinite(self.log_value) else None,
            "magnitude": mag if mag > 0.0 and math.isfinite(mag) else None,
            "argmax_alpha": list(self.argmax_alpha),
            "argmax_point": self.argmax_point,
            "heuristic_finite": (
                None
                if self.heuristic_finite is None
                else {str(k): bool(v) for k, v in sorted(self.heuristic_finite.items())}
            ),
        }


def _report_from_contributions(
    e: TruncatedElement, contributions: np.ndarray, heuristic: dict[int, bool] | None = None
) -> NormReport:
    table = e.table()
    top = float(np.max(contributions))
    candidates = np.flatnonzero(contributions == top)
    alpha = min(table.alphas[i] for i in candidates)
    row = table.rows[alpha]
    point = int(np.argmax(np.abs(e.coeffs[row]))) if e.grid is not None else None
    return NormReport(top, alpha, point, heuristic)


def step_norm(e: TruncatedElement, k: int) -> NormReport:
    """Sup over alpha of the payload magnitude times k**(-|alpha|), log domain."""
    if k < 1:
        raise ValueError(f"step index must be >= 1, got {k}")
    contributions = row_log_sups(e) - e.table().orders * math.log(k)
    return _report_from_contributions(e, contributions)


def weighted_seminorm(e: TruncatedElement, ws: WeightSequence) -> NormReport:
    """Sup over alpha of the payload magnitude times delta_{|alpha|}**|alpha|."""
    w = seminorm_exponents(ws, e.order_cap)
    contributions = row_log_sups(e) + w[e.table().orders]
    return _report_from_contributions(e, contributions)


def continuity_constant(ws: WeightSequence, k: int, order_cap: int) -> float:
    """Log of the constant bounding the seminorm by the step-k norm at truncation.

    Returns max over 0 <= n <= order_cap of n*(log k + log delta_n); for every
    element, weighted_seminorm <= continuity_constant + step_norm in the log
    domain.  The untruncated sup over all n is finite only because delta
    tends to zero, which a finite table cannot witness.
    """
    if k < 1:
        raise ValueError(f"step index must be >= 1, got {k}")
    w = seminorm_exponents(ws, order_cap)
    n = np.arange(order_cap + 1)
    return float(np.max(w + n * math.log(k)))


def growth_rates(e: TruncatedElement) -> np.ndarray:
    """Per-order growth rates s_n = (max over |alpha| = n payload log) / n.

    Entry i corresponds to order n = i + 1; LOG_ZERO marks all-zero shells.
    A flat geometric payload r**n has s_n = log r for every n.
    """
    sups = shell_log_sups(e)
    n = np.arange(1, e.order_cap + 1)
    return sups[1:] / n


def classify_growth(
    e: TruncatedElement, window: int, ks: Iterable[int] | None = None
) -> tuple[float, dict[int, bool]]:
    """Heuristic growth classification from the top ``window`` shells.

    Returns (estimate, flags) where estimate is the max of s_n over the last
    ``window`` orders and flags[k] guesses whether the element's growth fits
    step k (exp(estimate) <= k).  This is a guess: no finite truncation can
    decide membership in any step, and the flags say nothing about orders
    beyond the cap.
    """
    if window < 1 or window > e.order_cap:
        raise ValueError(
            f"window must satisfy 1 <= window <= order cap, got {window} with cap {e.order_cap}"
        )
    rates = growth_rates(e)
    estimate = float(np.max(rates[-window:]))
    try:
        grown = math.exp(estimate)
    except OverflowError:
        grown = math.inf
    if ks is None:
        ks = range(1, 9)
    flags = {int(k): bool(grown <= k) for k in ks}
    return estimate, flags
