"""Budget-driven weight systems and certified block decompositions.

Given per-step budgets eps_1, eps_2, ... in (0, 1], this module picks a
strictly increasing jump sequence n_1 < n_2 < ... (each n_k minimal with
k - 1 < eps_k**(1/n_k) * k) and defines segment-wise weights

    delta_n = 1 / (eps_k**(1/n_k) * k)   for n_k <= n < n_{k+1},

which makes delta a decreasing null sequence whose weight bound
delta_n**(-n) <= eps_k * k**n holds on every segment, with equality at each
jump.  Splitting an element by shell ranges [n_k, n_{k+1}) then yields blocks
whose step-k norms are certified against the budgets whenever the element
lies in the unit ball of the delta-weighted seminorm.  All comparisons run
in the log domain, so budgets as small as 1e-300 are unproblematic.

Shell 0 is not covered by any segment.  It is absorbed into block 1 when its
magnitude already fits the first budget; otherwise it is emitted as a
separate leading block with bound 1 (the seminorm's order-0 weight), and the
certificate flags which convention fired.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .errors import FormatError, ShapeError
from .germspace import (
    LOG_ZERO,
    TruncatedElement,
    add,
    restrict_shells,
    shell_log_sups,
)
from .norms import WeightSequence, seminorm_exponents, step_norm

INCLUSION_TOLERANCE = 1e-9
WEIGHT_BOUND_TOLERANCE = 1e-9


def _finite_or_none(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


@dataclass(frozen=True)
class EpsSequence:
    """Per-step budgets eps_1 ... eps_K, each in (0, 1]."""

    values: np.ndarray
    clamped: int = 0

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 1 or len(vals) == 0:
            raise FormatError("budget sequence must be a nonempty 1-d array")
        if not np.isfinite(vals).all() or not (vals > 0.0).all():
            raise FormatError("budget entries must be positive finite numbers")
        if (vals > 1.0).any():
            raise FormatError("budget entries above 1 must be clamped via from_values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "EpsSequence":
        vals = np.array(list(values), dtype=np.float64)
        if vals.ndim != 1 or len(vals) == 0:
            raise FormatError("budget sequence must be nonempty")
        if not np.isfinite(vals).all() or not (vals > 0.0).all():
            raise FormatError("budget entries must be positive finite numbers")
        over = int((vals > 1.0).sum())
        if over:
            warnings.warn(f"clamped {over} budget entries above 1 down to 1", stacklevel=2)
            vals = np.minimum(vals, 1.0)
        return cls(vals, clamped=over)

    @property
    def log_values(self) -> np.ndarray:
        return np.log(self.values)

    def __len__(self) -> int:
        return len(self.values)


def eps_from_expression(expr: str, count: int) -> EpsSequence:
    """Parse a budget expression: a comma list or one of the closed forms
    1, 1/k, 1/k^2, 2^-k, 10^-k (k running from 1 to ``count``)."""
    if count < 1:
        raise ValueError(f"budget count must be >= 1, got {count}")
    s = expr.strip()
    if "," in s:
        try:
            vals = [float(tok) for tok in s.split(",")]
        except ValueError:
            raise FormatError(f"bad budget list: {expr!r}") from None
        return EpsSequence.from_values(vals)
    k = np.arange(1, count + 1, dtype=np.float64)
    named = {
        "1": np.ones(count),
        "1/k": 1.0 / k,
        "1/k^2": 1.0 / k**2,
        "2^-k": 2.0**-k,
        "10^-k": 10.0**-k,
    }
    if s in named:
        return EpsSequence.from_values(named[s])
    try:
        return EpsSequence.from_values([float(s)])
    except ValueError:
        raise FormatError(
            f"budget expression {expr!r} is not a comma list or one of "
            f"1, 1/k, 1/k^2, 2^-k, 10^-k"
        ) from None


@dataclass(frozen=True)
class DeltaSystem:
    """Segment-wise weight sequence with its jump structure and budgets.

    ``log_deltas[n]`` is the authoritative log weight for order n (index 0
    is a placeholder of log 1); ``governing[n]`` is the step index whose
    budget rules order n (0 at n = 0).  Orders below the first jump (present
    only when a jump margin was requested) use the per-order rule
    delta_n = eps_1**(-1/n), which pins their weight bound to exactly eps_1.
    """

    order_cap: int
    jumps: tuple[int, ...]
    governing: np.ndarray
    log_deltas: np.ndarray
    eps: EpsSequence
    jump_margin: int = 0

    def __post_init__(self) -> None:
        gov = np.array(self.governing, dtype=np.int64)
        logs = np.array(self.log_deltas, dtype=np.float64)
        if gov.shape != (self.order_cap + 1,) or logs.shape != (self.order_cap + 1,):
            raise ShapeError("governing and log_deltas must have length order_cap + 1")
        gov.flags.writeable = False
        logs.flags.writeable = False
        object.__setattr__(self, "governing", gov)
        object.__setattr__(self, "log_deltas", logs)

    @property
    def deltas(self) -> np.ndarray:
        return np.exp(self.log_deltas)

    def weights(self) -> WeightSequence:
        return WeightSequence(self.deltas, self.log_deltas, meta=self)

    def segments(self) -> list[tuple[int, int, int]]:
        """(k, lo, hi) per jump, hi exclusive; the last segment ends at cap + 1."""
        out = []
        for i, nk in enumerate(self.jumps):
            hi = self.jumps[i + 1] if i + 1 < len(self.jumps) else self.order_cap + 1
            out.append((i + 1, nk, hi))
        return out

    def rows(self) -> list[tuple[int, int, float, float]]:
        """Per-order table rows (n, k, delta_n, log_delta_n) for n = 1..cap."""
        d = self.deltas
        return [
            (n, int(self.governing[n]), float(d[n]), float(self.log_deltas[n]))
            for n in range(1, self.order_cap + 1)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "order_cap": self.order_cap,
            "jump_margin": self.jump_margin,
            "eps": [float(v) for v in self.eps.values],
            "eps_clamped": self.eps.clamped,
            "jumps": list(self.jumps),
            "rows": [
                {"n": n, "k": k, "delta": d, "log_delta": ld}
                for n, k, d, ld in self.rows()
            ],
        }


def build_delta(
    eps: EpsSequence | Iterable[float], order_cap: int, jump_margin: int = 0
) -> DeltaSystem:
    """Construct the jump sequence and weight system for the given budgets.

    Each jump n_k is the minimal integer above n_{k-1} with
    log(k - 1) < log(eps_k)/n_k + log(k) (vacuous at k = 1, so n_1 = 1),
    plus the optional ``jump_margin`` slack.  Jumps are generated while they
    stay within ``order_cap``; the last segment extends to the cap.
    """
    if not isinstance(eps, EpsSequence):
        eps = EpsSequence.from_values(eps)
    if order_cap < 1:
        raise ValueError(f"order cap must be >= 1, got {order_cap}")
    if jump_margin < 0:
        raise ValueError(f"jump margin must be >= 0, got {jump_margin}")

    log_eps = eps.log_values
    jumps: list[int] = []
    n_prev = 0
    for k in range(1, len(eps) + 1):
        n = n_prev + 1
        if k > 1:
            lkm1, lk, lek = math.log(k - 1), math.log(k), log_eps[k - 1]
            while n <= order_cap and not lkm1 < lek / n + lk:
                n += 1
            if not lkm1 < lek / n + lk:
                break
        n += jump_margin
        if n > order_cap:
            break
        jumps.append(n)
        n_prev = n
    if not jumps:
        raise ValueError(
            f"no admissible jump fits below order cap {order_cap} "
            f"(jump margin {jump_margin} too large?)"
        )

    governing = np.zeros(order_cap + 1, dtype=np.int64)
    log_deltas = np.zeros(order_cap + 1)
    for n in range(1, jumps[0]):
        governing[n] = 1
        log_deltas[n] = -(log_eps[0] / n)
    for i, nk in enumerate(jumps):
        k = i + 1
        hi = jumps[i + 1] if i + 1 < len(jumps) else order_cap + 1
        governing[nk:hi] = k
        log_deltas[nk:hi] = -(log_eps[i] / nk + math.log(k))
    return DeltaSystem(order_cap, tuple(jumps), governing, log_deltas, eps, jump_margin)


@dataclass(frozen=True)
class WeightBoundReport:
    """Per-order margins of the segment weight bound -n*log(delta_n) <= log(eps_k) + n*log(k)."""

    order_cap: int
    tolerance: float
    orders: np.ndarray
    governing: np.ndarray
    margins: np.ndarray

    @property
    def passed(self) -> bool:
        return bool((self.margins >= -self.tolerance).all())

    @property
    def worst_margin(self) -> float:
        return float(self.margins.min())

    def to_dict(self) -> dict[str, Any]:
        return {
            "order_cap": self.order_cap,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "margins": [
                {"n": int(n), "k": int(k), "margin": float(m)}
                for n, k, m in zip(self.orders, self.governing, self.margins)
            ],
        }


def verify_weight_bound(
    ds: DeltaSystem,
    order_cap: int | None = None,
    tolerance: float = WEIGHT_BOUND_TOLERANCE,
) -> WeightBoundReport:
    """Check the segment weight bound for every order up to the cap.

    The margin at order n (governed by step k) is
    log(eps_k) + n*log(k) + n*log(delta_n); negative beyond the tolerance
    means the bound failed.  Failures are reported as data, not raised.
    """
    cap = ds.order_cap if order_cap is None else order_cap
    if cap > ds.order_cap:
        raise ShapeError(f"weight system covers orders up to {ds.order_cap}, asked for {cap}")
    orders = np.arange(1, cap + 1)
    gov = ds.governing[1 : cap + 1]
    log_eps = ds.eps.log_values
    log_k = np.array([math.log(k) for k in gov])
    margins = log_eps[gov - 1] + orders * log_k + orders * ds.log_deltas[1 : cap + 1]
    return WeightBoundReport(cap, tolerance, orders, gov.copy(), margins)


def _block_ranges(ds: DeltaSystem, order_cap: int) -> list[tuple[int, int, int]]:
    """Jump segments trimmed to an element's order cap."""
    return [
        (k, lo, min(hi, order_cap + 1))
        for k, lo, hi in ds.segments()
        if lo <= order_cap
    ]


@dataclass(frozen=True)
class Block:
    """One decomposition block with its certified step norm and budget.

    k = 0 labels the separate low-order block (bound 1); every other block
    is certified in the step norm of its own index.
    """

    k: int
    lo: int
    hi: int
    element: TruncatedElement
    log_norm: float
    log_bound: float

    @property
    def margin(self) -> float:
        return self.log_bound - self.log_norm

    def summary(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "orders": [self.lo, self.hi],
            "log_norm": _finite_or_none(self.log_norm),
            "log_bound": float(self.log_bound),
            "margin": _finite_or_none(self.margin),
        }


@dataclass(frozen=True)
class BlockDecomposition:
    """Shell-range split of an element with per-block certified norms.

    The blocks partition the coefficient rows, so folding them back with
    ``add`` reproduces the source exactly (coefficients are copied, never
    recomputed).
    """

    source: TruncatedElement
    system: DeltaSystem
    shell0_separate: bool
    blocks: tuple[Block, ...]

    def reconstruct(self) -> TruncatedElement:
        acc = self.blocks[0].element
        for b in self.blocks[1:]:
            acc = add(acc, b.element)
        return acc

    def to_dict(self) -> dict[str, Any]:
        return {
            "order_cap": self.source.order_cap,
            "shell0_separate": self.shell0_separate,
            "blocks": [b.summary() for b in self.blocks],
        }


def decompose(x: TruncatedElement, ds: DeltaSystem) -> BlockDecomposition:
    """Split ``x`` into jump-range blocks, each with its certified step norm.

    Block k copies the shells [n_k, n_{k+1}) (the last block runs to the
    cap).  Orders below the first jump ride with block 1 when their step-1
    norm fits the first budget and otherwise form a separate k = 0 block
    with bound 1.
    """
    if ds.order_cap < x.order_cap:
        raise ShapeError(
            f"weight system covers orders up to {ds.order_cap}, "
            f"element needs {x.order_cap}"
        )
    ranges = _block_ranges(ds, x.order_cap)
    log_eps = ds.eps.log_values
    n1 = ranges[0][1] if ranges else x.order_cap + 1
    low = restrict_shells(x, 0, n1)
    low_norm = step_norm(low, 1).log_value
    merged = low_norm <= log_eps[0]

    blocks: list[Block] = []
    if not merged:
        blocks.append(Block(0, 0, n1, low, low_norm, 0.0))
    if ranges:
        for k, lo, hi in ranges:
            if k == 1 and merged:
                lo = 0
            elem = restrict_shells(x, lo, hi)
            blocks.append(
                Block(k, lo, hi, elem, step_norm(elem, k).log_value, float(log_eps[k - 1]))
            )
    elif merged:
        blocks.append(Block(1, 0, n1, low, low_norm, float(log_eps[0])))
    return BlockDecomposition(x, ds, not merged, tuple(blocks))


@dataclass(frozen=True)
class BlockCheck:
    """Certified norm of one block against its budget (no materialized element)."""

    k: int
    lo: int
    hi: int
    log_norm: float
    log_bound: float

    @property
    def margin(self) -> float:
        return self.log_bound - self.log_norm

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "orders": [self.lo, self.hi],
            "log_norm": _finite_or_none(self.log_norm),
            "log_bound": float(self.log_bound),
            "margin": _finite_or_none(self.margin),
        }


@dataclass(frozen=True)
class InclusionCertificate:
    """Outcome of checking one element against the block budgets.

    ``seminorm_log`` is the element's weighted seminorm before any rescale;
    if it exceeded 0 (magnitude above 1) the element was first pulled back
    to the seminorm unit sphere.  ``passed`` means every block's certified
    norm stayed within its budget up to the tolerance.
    """

    seminorm_log: float
    rescaled: bool
    shell0_separate: bool
    tolerance: float
    blocks: tuple[BlockCheck, ...]

    @property
    def worst_margin(self) -> float:
        return min(b.margin for b in self.blocks)

    @property
    def passed(self) -> bool:
        return all(b.margin >= -self.tolerance for b in self.blocks)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seminorm_log": _finite_or_none(self.seminorm_log),
            "rescaled": self.rescaled,
            "shell0_separate": self.shell0_separate,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst_margin": _finite_or_none(self.worst_margin),
            "blocks": [b.to_dict() for b in self.blocks],
        }


def verify_inclusion(
    x: TruncatedElement, ds: DeltaSystem, tolerance: float = INCLUSION_TOLERANCE
) -> InclusionCertificate:
    """Certify that ``x`` (rescaled into the seminorm unit ball if needed)
    decomposes into blocks within their budgets.

    Works on per-shell log magnitudes only, so no block elements are
    materialized; the certified values agree exactly with those of
    :func:`decompose` because the weight of a contribution depends only on
    the shell order.
    """
    if ds.order_cap < x.order_cap:
        raise ShapeError(
            f"weight system covers orders up to {ds.order_cap}, "
            f"element needs {x.order_cap}"
        )
    cap = x.order_cap
    sups = shell_log_sups(x)
    w = seminorm_exponents(ds.weights(), cap)
    s = float(np.max(sups + w))
    rescaled = s > 0.0
    if rescaled:
        sups = sups - s

    ranges = _block_ranges(ds, cap)
    log_eps = ds.eps.log_values
    log_k = np.zeros(cap + 1)
    for k, lo, hi in ranges:
        log_k[lo:hi] = math.log(k)
    contrib = sups - np.arange(cap + 1) * log_k

    n1 = ranges[0][1] if ranges else cap + 1
    low_norm = float(np.max(contrib[:n1]))
    merged = low_norm <= log_eps[0]

    checks: list[BlockCheck] = []
    if not merged:
        checks.append(BlockCheck(0, 0, n1, low_norm, 0.0))
    if ranges:
        seg_starts = [lo for _, lo, _ in ranges]
        if merged:
            seg_starts[0] = 0
        norms = np.maximum.reduceat(contrib, np.array(seg_starts))
        for (k, lo, hi), nm in zip(ranges, norms):
            if k == 1 and merged:
                lo = 0
            checks.append(BlockCheck(k, lo, hi, float(nm), float(log_eps[k - 1])))
    elif merged:
        checks.append(BlockCheck(1, 0, n1, low_norm, float(log_eps[0])))
    return InclusionCertificate(s, rescaled, not merged, tolerance, tuple(checks))
