"""Derivative-free grid search over polarizer-axis configurations.

Global rotations never change a symmetric source, so the first axis is pinned
to 0 and the search runs over the remaining free axes on the [0, 180) torus:

- ``ardehali29`` / ``rt32``: both primed settings tied to the reference axis,
  free axes (b, r). The quantum optimum is the three-axes configuration at
  LHS = -1.5.
- ``strong23``: all four remaining axes free. For the quantum source the
  unconstrained ratio admits CHSH-like configurations below -1.5, with the
  global optimum at 1 - 2 sqrt(2).
- ``chsh``: free axes (b, a2, b2); maximizes S, quantum optimum 2 sqrt(2).

A coarse grid pass is followed by rounds of local refinement: the step halves
each round and a 5-wide window per dimension is evaluated around the
incumbent, so every value representable as (coarse step) / 2^k stays exactly
reachable. Ties break to the lexicographically smallest configuration; the
whole search is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import AngleConfig, InequalityReport
from .errors import InvalidInputError, SymmetryError, UnsupportedMethodError
from .inequalities import (
    check_symmetry,
    eval_chsh,
    eval_strong_23,
    eval_three_axes_family,
)

__all__ = ["OBJECTIVES", "OptimizeResult", "SearchSpec", "optimize"]

OBJECTIVES = ("strong23", "ardehali29", "rt32", "chsh")


@dataclass(frozen=True)
class SearchSpec:
    """Search request: objective name, source, grid step (degrees), refinements."""

    objective: str
    source: object
    grid_step: float = 5.0
    refine_iterations: int = 6

    def __post_init__(self) -> None:
        if self.objective not in OBJECTIVES:
            raise InvalidInputError(
                f"unknown objective {self.objective!r}; available: {list(OBJECTIVES)}"
            )
        if not (self.grid_step > 0.0):
            raise InvalidInputError("grid_step must be > 0")
        n = 180.0 / self.grid_step
        if abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise InvalidInputError("grid_step must divide 180 evenly")
        if self.refine_iterations < 0:
            raise InvalidInputError("refine_iterations must be >= 0")


@dataclass
class OptimizeResult:
    config: AngleConfig
    report: InequalityReport
    objective_value: float
    trace: list[dict] = field(default_factory=list)


def _fold_np(d: np.ndarray) -> np.ndarray:
    d = np.abs(d) % 360.0
    d = np.minimum(d, 360.0 - d)
    return d % 180.0


class _DiffTable:
    """Joint components by folded axis difference, cached per source."""

    def __init__(self, source):
        self.source = source
        self._cache: dict[float, np.ndarray] = {}

    def _fetch(self, diff: float) -> np.ndarray:
        key = round(diff, 9)
        if key not in self._cache:
            self._cache[key] = self.source.pair(0.0, key).values[:4]
        return self._cache[key]

    def components(self, diffs: np.ndarray) -> np.ndarray:
        """(4, n) array of pp, pm, mp, mm for each folded difference."""
        flat = np.round(diffs.ravel(), 9)
        uniq, inverse = np.unique(flat, return_inverse=True)
        table = np.stack([self._fetch(float(d)) for d in uniq], axis=1)
        return table[:, inverse].reshape((4,) + diffs.shape)


def _objective_dims(objective: str) -> tuple[str, ...]:
    if objective in ("ardehali29", "rt32"):
        return ("b", "r")
    if objective == "chsh":
        return ("b", "a2", "b2")
    return ("b", "a_prime", "b_prime", "r")


def _config_from_point(objective: str, point: tuple[float, ...]) -> AngleConfig:
    if objective in ("ardehali29", "rt32"):
        b, r = point
        return AngleConfig(a=0.0, b=b, a_prime=r, b_prime=r, r=r)
    if objective == "chsh":
        b, a2, b2 = point
        return AngleConfig(a=0.0, b=b, a_prime=a2, b_prime=b2, r=0.0)
    b, a2, b2, r = point
    return AngleConfig(a=0.0, b=b, a_prime=a2, b_prime=b2, r=r)


def _objective_values(objective: str, table: _DiffTable,
                      axes: list[np.ndarray]) -> np.ndarray:
    """Vectorized minimization objective over the cartesian grid of axes."""
    grids = np.meshgrid(*axes, indexing="ij")

    def E(diff):
        c = table.components(diff)
        return c[0] - c[1] - c[2] + c[3]

    def four(diff):
        c = table.components(diff)
        return c[0] + c[1] + c[2] + c[3]

    zero = np.zeros(())
    k0 = float(four(zero))
    if not k0 > 0.0:
        raise UnsupportedMethodError("source has no coincidences at 0 deg")

    if objective in ("ardehali29", "rt32"):
        b, r = grids
        c0 = table.components(zero)
        discord = 2.0 * float(c0[1] + c0[2])
        num = E(_fold_np(b)) + E(_fold_np(r)) + E(_fold_np(r - b)) + discord
        return num / k0

    if objective == "chsh":
        b, a2, b2 = grids
        es = []
        for diff in (_fold_np(b), _fold_np(b2), _fold_np(a2 - b), _fold_np(a2 - b2)):
            c = table.components(diff)
            f = c[0] + c[1] + c[2] + c[3]
            if np.any(f <= 0.0):
                raise UnsupportedMethodError("source has a setting with no coincidences")
            es.append((c[0] - c[1] - c[2] + c[3]) / f)
        total = es[0] + es[1] + es[2] + es[3]
        s = np.max([np.abs(total - 2.0 * e) for e in es], axis=0)
        return -s   # maximize S

    b, a2, b2, r = grids
    c4 = table.components(_fold_np(a2 - b2))
    num = (E(_fold_np(b)) + E(_fold_np(b2)) + E(_fold_np(a2 - b))
           - 2.0 * c4[0] - 2.0 * c4[3]
           + four(_fold_np(a2 - r)) + four(_fold_np(r - b2)))
    return num / k0


def _best_point(axes: list[np.ndarray], values: np.ndarray) -> tuple[tuple[float, ...], float]:
    """Minimum with exact ties broken toward the lexicographically smallest point."""
    vmin = float(values.min())
    mask = values == vmin
    idx = np.argwhere(mask)
    coords = np.array([[axes[d][i] for d, i in enumerate(row)] for row in idx])
    order = np.lexsort(coords.T[::-1])
    best = coords[order[0]]
    return tuple(float(x) for x in best), vmin


def optimize(spec: SearchSpec) -> OptimizeResult:
    """Run the search and return the best configuration with its report."""
    source = spec.source
    if not getattr(source, "analytic", False):
        raise UnsupportedMethodError(
            "optimization needs an analytic source (closed form, quadrature or "
            "table); Monte Carlo objectives are too noisy for a grid search"
        )
    sym = check_symmetry(source, n_pairs=4)
    if not sym.symmetric:
        raise SymmetryError(
            f"optimization assumes a rotation-invariant source; max deviation "
            f"{sym.max_deviation:.3e} exceeds {sym.tolerance:.3e}"
        )

    table = _DiffTable(source)
    dims = _objective_dims(spec.objective)
    step = spec.grid_step
    axes = [np.arange(0.0, 180.0, step) for _ in dims]
    values = _objective_values(spec.objective, table, axes)
    point, value = _best_point(axes, values)
    trace = [{"stage": "coarse", "step": step,
              "config": _config_from_point(spec.objective, point).as_tuple(),
              "value": _signed(spec.objective, value)}]

    for round_i in range(spec.refine_iterations):
        step *= 0.5
        offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * step
        local_axes = [np.unique((p + offsets) % 180.0) for p in point]
        local_vals = _objective_values(spec.objective, table, local_axes)
        cand_point, cand_value = _best_point(local_axes, local_vals)
        if cand_value < value or (cand_value == value and cand_point < point):
            point, value = cand_point, cand_value
        trace.append({"stage": f"refine-{round_i + 1}", "step": step,
                      "config": _config_from_point(spec.objective, point).as_tuple(),
                      "value": _signed(spec.objective, value)})

    config = _config_from_point(spec.objective, point)
    report = _final_report(spec.objective, source, config, point)
    return OptimizeResult(config=config, report=report,
                          objective_value=_signed(spec.objective, value),
                          trace=trace)


def _signed(objective: str, value: float) -> float:
    return -value if objective == "chsh" else value


def _final_report(objective: str, source, config: AngleConfig,
                  point: tuple[float, ...]) -> InequalityReport:
    if objective in ("ardehali29", "rt32"):
        b, r = point
        return eval_three_axes_family(source, b, r, name=objective, check_sym=False)
    if objective == "chsh":
        b, a2, b2 = point
        return eval_chsh(source, 0.0, b, a2, b2)
    return eval_strong_23(source, config)


def grid_points(objective: str, grid_step: float) -> int:
    """Size of the coarse grid, mostly for reporting."""
    n = int(round(180.0 / grid_step))
    return n ** len(_objective_dims(objective))
