"""Truncated coefficient families and their linear operations.

An element stores one real payload vector per multi-index of order <= N.
In germ mode the payload holds the values of the order-normalized derivative
f^(alpha)/alpha! on a finite grid of the compact domain, so the sup over the
domain is approximated by a max over grid points (no discretization error
bound is attempted; the closed-form test families place their maxima on grid
points on purpose).  In scalar mode the payload is a single number standing
for the magnitude of an abstract Banach-space coefficient.

All magnitudes are reported in the log domain: a value of ``LOG_ZERO``
(negative infinity) encodes an exact zero magnitude, and quantities such as
k**40 never materialize as plain floats.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any

import numpy as np

from .errors import FormatError, ShapeError
from .multiindex import shell, shell_count

LOG_ZERO = float("-inf")


@dataclass(frozen=True)
class IndexTable:
    """Fixed row layout shared by every element of a given (dim, order_cap).

    Rows are grouped by shell, lexicographic within each shell; shell n
    occupies rows [shell_starts[n], shell_starts[n + 1]).
    """

    dim: int
    order_cap: int
    alphas: tuple[tuple[int, ...], ...]
    rows: dict[tuple[int, ...], int]
    alpha_matrix: np.ndarray  # (R, dim) int64
    orders: np.ndarray  # (R,) int64
    shell_starts: np.ndarray  # (order_cap + 2,) int64

    def __len__(self) -> int:
        return len(self.alphas)


@lru_cache(maxsize=None)
def index_table(dim: int, order_cap: int) -> IndexTable:
    """Build (and cache) the row layout for all multi-indices of order <= cap."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    if order_cap < 0:
        raise ValueError(f"order cap must be >= 0, got {order_cap}")
    alphas: list[tuple[int, ...]] = []
    starts = [0]
    for n in range(order_cap + 1):
        alphas.extend(shell(dim, n))
        starts.append(len(alphas))
    matrix = np.array(alphas, dtype=np.int64).reshape(len(alphas), dim)
    table = IndexTable(
        dim=dim,
        order_cap=order_cap,
        alphas=tuple(alphas),
        rows={a: i for i, a in enumerate(alphas)},
        alpha_matrix=matrix,
        orders=matrix.sum(axis=1),
        shell_starts=np.array(starts, dtype=np.int64),
    )
    table.alpha_matrix.flags.writeable = False
    table.orders.flags.writeable = False
    table.shell_starts.flags.writeable = False
    return table


@dataclass(frozen=True)
class CompactGrid:
    """Finite sample of a compact subset of R^d used as the payload domain."""

    dim: int
    points: tuple[tuple[float, ...], ...]
    label: str = ""

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"grid dimension must be >= 1, got {self.dim}")
        if not self.points:
            raise ValueError("grid needs at least one point")
        for p in self.points:
            if len(p) != self.dim:
                raise ValueError(f"grid point {p} does not have {self.dim} coordinates")
        if len(set(self.points)) != len(self.points):
            raise ValueError("grid points must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.points)

    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class TruncatedElement:
    """Immutable array of payload vectors, one row per multi-index.

    ``coeffs`` has shape (R, p) where R is the number of multi-indices of
    order <= order_cap and p is the payload length (the grid size in germ
    mode, 1 in scalar mode).  Row i corresponds to
    ``index_table(dim, order_cap).alphas[i]``.
    """

    dim: int
    order_cap: int
    coeffs: np.ndarray
    grid: CompactGrid | None = None

    def __post_init__(self) -> None:
        table = index_table(self.dim, self.order_cap)
        arr = np.array(self.coeffs, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != len(table):
            raise ShapeError(
                f"coefficient array must have shape ({len(table)}, p), got {arr.shape}"
            )
        if self.grid is not None:
            if self.grid.dim != self.dim:
                raise ShapeError(
                    f"grid dimension {self.grid.dim} does not match element dimension {self.dim}"
                )
            if arr.shape[1] != len(self.grid):
                raise ShapeError(
                    f"payload length {arr.shape[1]} does not match grid size {len(self.grid)}"
                )
        elif arr.shape[1] != 1:
            raise ShapeError(
                f"scalar-mode elements carry one payload entry per index, got {arr.shape[1]}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @property
    def payload_len(self) -> int:
        return self.coeffs.shape[1]

    @property
    def mode(self) -> str:
        return "germ" if self.grid is not None else "scalar"

    def table(self) -> IndexTable:
        return index_table(self.dim, self.order_cap)

    @classmethod
    def zeros(
        cls, dim: int, order_cap: int, grid: CompactGrid | None = None
    ) -> "TruncatedElement":
        rows = sum(shell_count(dim, n) for n in range(order_cap + 1))
        width = len(grid) if grid is not None else 1
        return cls(dim, order_cap, np.zeros((rows, width)), grid)

    def equals(self, other: "TruncatedElement") -> bool:
        """Exact value equality, including shape and grid."""
        return (
            self.dim == other.dim
            and self.order_cap == other.order_cap
            and self.grid == other.grid
            and np.array_equal(self.coeffs, other.coeffs)
        )


def _check_compatible(a: TruncatedElement, b: TruncatedElement) -> None:
    if (
        a.dim != b.dim
        or a.order_cap != b.order_cap
        or a.payload_len != b.payload_len
        or a.grid != b.grid
    ):
        raise ShapeError("elements do not share dimension, order cap, payload shape, and grid")


def payload_sup(e: TruncatedElement, alpha: Any) -> float:
    """Log of the payload magnitude max_j |coeffs(alpha)_j|; LOG_ZERO when all zero."""
    key = tuple(int(a) for a in alpha)
    row = e.table().rows.get(key)
    if row is None:
        raise ShapeError(
            f"multi-index {key} is outside the truncation range of the element"
        )
    m = float(np.max(np.abs(e.coeffs[row])))
    return math.log(m) if m > 0.0 else LOG_ZERO


def row_log_sups(e: TruncatedElement) -> np.ndarray:
    """Per-row payload magnitudes in the log domain, shape (R,)."""
    mags = np.max(np.abs(e.coeffs), axis=1)
    with np.errstate(divide="ignore"):
        return np.log(mags)


def shell_log_sups(e: TruncatedElement) -> np.ndarray:
    """Per-shell log magnitudes: entry n is max over all |alpha| = n, shape (N+1,)."""
    starts = e.table().shell_starts
    return np.maximum.reduceat(row_log_sups(e), starts[:-1])


def scale(e: TruncatedElement, lam: float) -> TruncatedElement:
    """Multiply every payload entry by ``lam``."""
    return TruncatedElement(e.dim, e.order_cap, e.coeffs * lam, e.grid)


def add(a: TruncatedElement, b: TruncatedElement) -> TruncatedElement:
    """Coefficient-wise sum of two compatible elements."""
    _check_compatible(a, b)
    return TruncatedElement(a.dim, a.order_cap, a.coeffs + b.coeffs, a.grid)


def restrict_shells(e: TruncatedElement, lo: int, hi: int) -> TruncatedElement:
    """Copy of ``e`` keeping shells lo <= |alpha| < hi, exact zeros elsewhere."""
    if not 0 <= lo <= hi <= e.order_cap + 1:
        raise ShapeError(
            f"invalid shell range [{lo}, {hi}) for order cap {e.order_cap}"
        )
    starts = e.table().shell_starts
    out = np.zeros_like(e.coeffs)
    out[starts[lo] : starts[hi]] = e.coeffs[starts[lo] : starts[hi]]
    return TruncatedElement(e.dim, e.order_cap, out, e.grid)


# ---------------------------------------------------------------------------
# JSON element files
#
# { "dim": d, "order_cap": N, "mode": "germ"|"scalar",
#   "grid": [[x...], ...]            (germ mode only)
#   "coeffs": [ {"alpha": [...], "values": [...]}, ... ] }
#
# Coefficient entries may appear in any order but must cover every
# multi-index of order <= N exactly once.  Unknown top-level keys (e.g. a
# "family" provenance header) are preserved on write and ignored on read.
# ---------------------------------------------------------------------------


def element_to_dict(
    e: TruncatedElement, provenance: dict[str, Any] | None = None
) -> dict[str, Any]:
    table = e.table()
    doc: dict[str, Any] = {"dim": e.dim, "order_cap": e.order_cap, "mode": e.mode}
    if e.grid is not None:
        doc["grid"] = [list(p) for p in e.grid.points]
        if e.grid.label:
            doc["grid_label"] = e.grid.label
    if provenance is not None:
        doc["family"] = provenance
    doc["coeffs"] = [
        {"alpha": list(a), "values": [float(v) for v in e.coeffs[i]]}
        for i, a in enumerate(table.alphas)
    ]
    return doc


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise FormatError(message)


def element_from_dict(doc: dict[str, Any]) -> TruncatedElement:
    _require(isinstance(doc, dict), "element document must be a JSON object")
    dim = doc.get("dim")
    cap = doc.get("order_cap")
    mode = doc.get("mode")
    _require(isinstance(dim, int) and not isinstance(dim, bool) and dim >= 1,
             "'dim' must be an integer >= 1")
    _require(isinstance(cap, int) and not isinstance(cap, bool) and cap >= 0,
             "'order_cap' must be an integer >= 0")
    _require(mode in ("germ", "scalar"), "'mode' must be 'germ' or 'scalar'")
    grid = None
    if mode == "germ":
        raw = doc.get("grid")
        _require(isinstance(raw, list) and raw, "germ mode requires a nonempty 'grid'")
        try:
            pts = tuple(tuple(float(x) for x in p) for p in raw)
            grid = CompactGrid(dim, pts, str(doc.get("grid_label", "")))
        except (TypeError, ValueError) as exc:
            raise FormatError(f"bad grid: {exc}") from None
    else:
        _require("grid" not in doc, "scalar mode must not carry a grid")

    table = index_table(dim, cap)
    width = len(grid) if grid is not None else 1
    entries = doc.get("coeffs")
    _require(isinstance(entries, list), "'coeffs' must be a list")
    _require(len(entries) == len(table),
             f"expected {len(table)} coefficient entries, got {len(entries)}")
    coeffs = np.empty((len(table), width))
    seen = np.zeros(len(table), dtype=bool)
    for entry in entries:
        _require(isinstance(entry, dict) and "alpha" in entry and "values" in entry,
                 "each coefficient entry needs 'alpha' and 'values'")
        raw_alpha = entry["alpha"]
        _require(
            isinstance(raw_alpha, list)
            and len(raw_alpha) == dim
            and all(isinstance(a, int) and not isinstance(a, bool) and a >= 0
                    for a in raw_alpha),
            f"'alpha' must be a list of {dim} nonnegative integers, got {raw_alpha!r}",
        )
        alpha = tuple(raw_alpha)
        row = table.rows.get(alpha)
        _require(row is not None, f"multi-index {alpha} exceeds order cap {cap}")
        _require(not seen[row], f"duplicate coefficient entry for {alpha}")
        seen[row] = True
        values = entry["values"]
        _require(
            isinstance(values, list) and len(values) == width
            and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in values),
            f"'values' for {alpha} must be a list of {width} numbers",
        )
        coeffs[row] = values
    _require(bool(seen.all()), "coefficient entries are incomplete")
    _require(bool(np.isfinite(coeffs).all()), "coefficient values must be finite")
    return TruncatedElement(dim, cap, coeffs, grid)


def save_element(
    e: TruncatedElement, path: str, provenance: dict[str, Any] | None = None
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(element_to_dict(e, provenance), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_element(path: str) -> TruncatedElement:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    return element_from_dict(doc)
