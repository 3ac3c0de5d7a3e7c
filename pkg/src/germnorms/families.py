"""Closed-form element generators with known norm behavior.

These families serve as ground truth: their payload maxima sit on grid
points by construction, so grid sups equal the true sups exactly and the
norm values admit hand-computable closed forms.  ``factorial_scalar`` grows
faster than any geometric rate on purpose; it is the negative test the
growth diagnostic must flag.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import FormatError
from .germspace import CompactGrid, TruncatedElement, index_table
from .multiindex import shell

GERM_KINDS = ("cauchy", "exponential", "polynomial")
SCALAR_KINDS = ("geometric_scalar", "factorial_scalar")


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    dim: int
    order_cap: int
    params: dict[str, Any] = field(default_factory=dict)
    grid: CompactGrid | None = None

    def __post_init__(self) -> None:
        if self.kind not in GERM_KINDS + SCALAR_KINDS:
            raise FormatError(f"unknown family kind {self.kind!r}")
        if self.kind in GERM_KINDS and self.grid is None:
            raise FormatError(f"family {self.kind!r} needs a grid")
        if self.kind in SCALAR_KINDS and self.grid is not None:
            raise FormatError(f"family {self.kind!r} is scalar and takes no grid")

    def provenance(self) -> dict[str, Any]:
        def clean(v: Any) -> Any:
            if isinstance(v, (tuple, list, np.ndarray)):
                return [clean(x) for x in v]
            if isinstance(v, dict):
                return {str(k): clean(x) for k, x in v.items()}
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return {
            "kind": self.kind,
            "dim": self.dim,
            "order_cap": self.order_cap,
            "params": clean(self.params),
        }


def default_grid(dim: int, per_axis: int = 3) -> CompactGrid:
    """Tensor grid of [0, 1]^d including all corners (so closed-form maxima land on it)."""
    axis = np.linspace(0.0, 1.0, per_axis)
    pts = tuple(itertools.product(*([tuple(axis)] * dim)))
    return CompactGrid(dim, pts, label=f"unit-cube-{per_axis}")


def polynomial_monomials_1d(coeffs: list[float]) -> dict[tuple[int, ...], float]:
    """Monomial map for a univariate polynomial given as [c_0, c_1, ...]."""
    return {(i,): float(c) for i, c in enumerate(coeffs)}


def binomial_power_monomials(dim: int, degree: int) -> dict[tuple[int, ...], float]:
    """Monomials of (1 + x_1 + ... + x_d)**degree, exact multinomial coefficients."""
    if degree < 0:
        raise FormatError(f"degree must be >= 0, got {degree}")
    out: dict[tuple[int, ...], float] = {}
    for n in range(degree + 1):
        for beta in shell(dim, n):
            c = math.factorial(degree) // (
                math.prod(math.factorial(b) for b in beta) * math.factorial(degree - n)
            )
            out[beta] = float(c)
    return out


def _pole_vector(spec: FamilySpec) -> np.ndarray:
    a = spec.params.get("a")
    if a is None:
        raise FormatError("cauchy family needs parameter 'a' (pole location)")
    vec = np.atleast_1d(np.array(a, dtype=np.float64))
    if vec.shape == (1,) and spec.dim > 1:
        vec = np.full(spec.dim, vec[0])
    if vec.shape != (spec.dim,):
        raise FormatError(f"pole 'a' must have {spec.dim} coordinates, got {a!r}")
    top = spec.grid.array().max(axis=0)
    if not (vec > top).all():
        raise FormatError(
            f"pole {vec.tolist()} must lie strictly outside the grid "
            f"(coordinate maxima {top.tolist()})"
        )
    return vec


def _cauchy(spec: FamilySpec) -> np.ndarray:
    a = _pole_vector(spec)
    table = index_table(spec.dim, spec.order_cap)
    logs = np.log(a[None, :] - spec.grid.array())  # (p, dim)
    exponents = table.alpha_matrix + 1  # (R, dim)
    return np.exp(-(exponents @ logs.T))


def _exponential(spec: FamilySpec) -> np.ndarray:
    table = index_table(spec.dim, spec.order_cap)
    lf = np.array([math.lgamma(m + 1) for m in range(spec.order_cap + 1)])
    log_fact = lf[table.alpha_matrix].sum(axis=1)
    coord_sum = spec.grid.array().sum(axis=1)
    return np.exp(coord_sum[None, :] - log_fact[:, None])


def _polynomial(spec: FamilySpec) -> np.ndarray:
    monomials = spec.params.get("monomials")
    if monomials is None:
        raise FormatError("polynomial family needs parameter 'monomials'")
    table = index_table(spec.dim, spec.order_cap)
    pts = spec.grid.array()
    coeffs = np.zeros((len(table), len(spec.grid)))
    for row, alpha in enumerate(table.alphas):
        acc = np.zeros(len(spec.grid))
        for beta, c in monomials.items():
            beta = tuple(int(b) for b in beta)
            if len(beta) != spec.dim or any(b < a for b, a in zip(beta, alpha)):
                continue
            binom = math.prod(math.comb(b, a) for b, a in zip(beta, alpha))
            powers = np.prod(
                pts ** np.array([b - a for b, a in zip(beta, alpha)])[None, :], axis=1
            )
            acc += float(c) * binom * powers
        coeffs[row] = acc
    return coeffs


def _geometric(spec: FamilySpec) -> np.ndarray:
    r = spec.params.get("r")
    if r is None or not float(r) > 0.0:
        raise FormatError("geometric_scalar family needs parameter 'r' > 0")
    table = index_table(spec.dim, spec.order_cap)
    return (float(r) ** table.orders.astype(np.float64))[:, None]


def _factorial(spec: FamilySpec) -> np.ndarray:
    table = index_table(spec.dim, spec.order_cap)
    facts = np.array([float(math.factorial(n)) for n in range(spec.order_cap + 1)])
    return facts[table.orders][:, None]


_GENERATORS = {
    "cauchy": _cauchy,
    "exponential": _exponential,
    "polynomial": _polynomial,
    "geometric_scalar": _geometric,
    "factorial_scalar": _factorial,
}


def generate(spec: FamilySpec) -> TruncatedElement:
    """Fill an element with the family's closed-form coefficients."""
    coeffs = _GENERATORS[spec.kind](spec)
    return TruncatedElement(spec.dim, spec.order_cap, coeffs, spec.grid)
