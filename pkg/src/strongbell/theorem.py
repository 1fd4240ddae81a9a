"""Machine verification of the multilinear box inequality.

The inequality underlying the strong ratio bounds: for ten nonnegative reals
with x1p, x1m, x2p, x2m <= U and y1p, y1m, y2p, y2m <= V,

    Z =   x1p y1p + x1m y1m - x1p y1m - x1m y1p
        + y2p x1p + y2m x1m - y2p x1m - y2m x1p
        + y1p x2p + y1m x2m - y1p x2m - y1m x2p
        - 2 x2p y2p - 2 x2m y2m
        + V x2p + V x2m + U y2p + U y2m + U V   >= 0.

Z is affine in each variable separately, so its minimum over the box is
attained at a vertex; enumerating the 2^8 vertex assignments is therefore a
complete minimization oracle. The eight closed-form case bounds arise from
fixing the x-coordinates at the minimizing corner for each sign pattern of

    s1 = -2 y2p + A + V,   s2 = -2 y2m - A + V,   s3 = A + y2p - y2m,

with A = y1p - y1m; ties (an expression exactly 0) are assigned to the ">= 0"
branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "BoxPoint",
    "TheoremReport",
    "case_lower_bound",
    "verify_theorem",
    "x_vertex_min",
    "z_grouped",
    "z_value",
]

_TOL = 1e-12


@dataclass(frozen=True)
class BoxPoint:
    """A point of the constraint box, with box half-widths U and V."""

    x1p: float
    x1m: float
    x2p: float
    x2m: float
    y1p: float
    y1m: float
    y2p: float
    y2m: float
    U: float
    V: float

    def __post_init__(self) -> None:
        if self.U < 0 or self.V < 0:
            raise InvalidInputError(f"U, V must be >= 0, got U={self.U}, V={self.V}")
        for name in ("x1p", "x1m", "x2p", "x2m"):
            v = getattr(self, name)
            if not (-_TOL <= v <= self.U + _TOL):
                raise InvalidInputError(f"{name}={v} outside [0, U={self.U}]")
        for name in ("y1p", "y1m", "y2p", "y2m"):
            v = getattr(self, name)
            if not (-_TOL <= v <= self.V + _TOL):
                raise InvalidInputError(f"{name}={v} outside [0, V={self.V}]")


def _z_raw(x1p, x1m, x2p, x2m, y1p, y1m, y2p, y2m, U, V):
    """The 19-term form. Works on scalars and numpy arrays alike."""
    return (
        x1p * y1p + x1m * y1m - x1p * y1m - x1m * y1p
        + y2p * x1p + y2m * x1m - y2p * x1m - y2m * x1p
        + y1p * x2p + y1m * x2m - y1p * x2m - y1m * x2p
        - 2.0 * x2p * y2p - 2.0 * x2m * y2m
        + V * x2p + V * x2m + U * y2p + U * y2m + U * V
    )


def _z_grouped_raw(x1p, x1m, x2p, x2m, y1p, y1m, y2p, y2m, U, V):
    """Regrouped form used by the case analysis; algebraically identical to _z_raw."""
    A = y1p - y1m
    return (
        x2p * (-2.0 * y2p + A + V)
        + x2m * (-2.0 * y2m - A + V)
        + (x1p - x1m) * (A + y2p - y2m)
        + U * y2p + U * y2m + U * V
    )


def z_value(p: BoxPoint) -> float:
    """Evaluate Z at a validated box point, 19-term form."""
    return float(_z_raw(p.x1p, p.x1m, p.x2p, p.x2m, p.y1p, p.y1m, p.y2p, p.y2m, p.U, p.V))


def z_grouped(p: BoxPoint) -> float:
    """Evaluate Z via the regrouped form; equals :func:`z_value` to ~1e-12."""
    return float(_z_grouped_raw(p.x1p, p.x1m, p.x2p, p.x2m, p.y1p, p.y1m, p.y2p, p.y2m, p.U, p.V))


# Sign pattern (s1 >= 0, s2 >= 0, s3 >= 0) -> case index 1..8.
_CASE_INDEX = {
    (True, True, True): 1,
    (False, True, True): 2,
    (True, False, True): 3,
    (True, True, False): 4,
    (False, False, True): 5,
    (False, True, False): 6,
    (True, False, False): 7,
    (False, False, False): 8,
}


def case_lower_bound(y1p: float, y1m: float, y2p: float, y2m: float,
                     U: float, V: float) -> tuple[int, float]:
    """Classify the sign case for a y-tuple and return its closed-form bound.

    The bound is the value of Z at the x-corner that minimizes it for that
    case, hence it equals the exact minimum of Z over the x-box and is
    nonnegative whenever the y-tuple is inside its box.
    """
    if U < 0 or V < 0:
        raise InvalidInputError("U, V must be >= 0")
    for name, v in (("y1p", y1p), ("y1m", y1m), ("y2p", y2p), ("y2m", y2m)):
        if not (-_TOL <= v <= V + _TOL):
            raise InvalidInputError(f"{name}={v} outside [0, V={V}]")
    A = y1p - y1m
    s1 = -2.0 * y2p + A + V
    s2 = -2.0 * y2m - A + V
    s3 = A + y2p - y2m
    case = _CASE_INDEX[(s1 >= 0.0, s2 >= 0.0, s3 >= 0.0)]
    bounds = {
        1: U * (-A + 2.0 * y2m + V),
        2: 2.0 * U * (V + y2m - y2p),
        3: 2.0 * U * (V - A),
        4: U * (A + 2.0 * y2p + V),
        5: U * (-2.0 * y2p - A + 3.0 * V),
        6: 2.0 * U * (A + V),
        7: 2.0 * U * (y2p - y2m + V),
        8: U * (-2.0 * y2m + A + 3.0 * V),
    }
    return case, float(bounds[case])


def x_vertex_min(y1p, y1m, y2p, y2m, U, V):
    """Exact minimum of Z over the x-box for fixed y, via per-coefficient corners.

    Z is linear in x2p, x2m and in the difference x1p - x1m, so the minimum is
    min(0, U s1) + min(0, U s2) - U |s3| + U (y2p + y2m) + U V. Vectorized.
    """
    A = y1p - y1m
    s1 = -2.0 * y2p + A + V
    s2 = -2.0 * y2m - A + V
    s3 = A + y2p - y2m
    return (
        np.minimum(0.0, U * s1)
        + np.minimum(0.0, U * s2)
        - U * np.abs(s3)
        + U * (y2p + y2m)
        + U * V
    )


@dataclass
class TheoremReport:
    """Outcome of one verification run."""

    passed: bool
    n_vertex_checks: int
    n_random_checks: int
    n_case_checks: int
    min_vertex_z: float
    min_random_z: float
    max_multilinearity_defect: float
    max_case_excess: float
    cases_seen: tuple[int, ...]
    counterexamples: list[dict] = field(default_factory=list)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}: {self.n_vertex_checks} vertex checks (min Z = {self.min_vertex_z:.3e}), "
            f"{self.n_random_checks} interior checks (min Z = {self.min_random_z:.3e}), "
            f"{self.n_case_checks} case-bound checks (max excess = {self.max_case_excess:.3e}), "
            f"multilinearity defect {self.max_multilinearity_defect:.3e}, "
            f"cases seen {sorted(self.cases_seen)}"
        )


_VAR_NAMES = ("x1p", "x1m", "x2p", "x2m", "y1p", "y1m", "y2p", "y2m")


def verify_theorem(
    grid: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0),
    n_random: int = 100_000,
    n_case_samples: int = 10_000,
    seed: int = 0,
    z_fn=None,
) -> TheoremReport:
    """Brute-force verification of the box inequality.

    Checks, for every (U, V) in ``grid x grid``:
      1. Z >= -1e-12 on all 256 box vertices.
      2. Z restricted to any single variable is affine (midpoint test on
         random points), which makes the vertex enumeration a complete
         minimization oracle.
      3. Z >= -1e-12 on ``n_random`` seeded interior points.
      4. Each closed-form case bound is <= the exact x-vertex minimum for
         ``n_case_samples`` random y-tuples (all eight cases exercised).

    ``z_fn`` substitutes a different implementation of Z; used to confirm the
    harness actually fails on a corrupted formula.
    """
    if n_random < 0 or n_case_samples < 0:
        raise InvalidInputError("sample counts must be >= 0")
    if any(u < 0 for u in grid):
        raise InvalidInputError("grid values must be >= 0")
    z = z_fn if z_fn is not None else _z_raw
    rng = np.random.default_rng(seed)
    counterexamples: list[dict] = []

    def record(kind: str, point: dict, value: float) -> None:
        if len(counterexamples) < 10:
            counterexamples.append({"kind": kind, "value": float(value), **point})

    # 1: vertex enumeration, vectorized over all 256 corners at once.
    corners = np.array(
        [[(j >> k) & 1 for k in range(8)] for j in range(256)], dtype=float
    )
    min_vertex = np.inf
    n_vertex = 0
    for U in grid:
        for V in grid:
            pts = corners * np.array([U] * 4 + [V] * 4)
            vals = z(*(pts[:, i] for i in range(8)), U, V)
            n_vertex += vals.size
            worst = float(np.min(vals))
            min_vertex = min(min_vertex, worst)
            if worst < -_TOL:
                i = int(np.argmin(vals))
                record("vertex", {"U": U, "V": V,
                                  **{n: pts[i, k] for k, n in enumerate(_VAR_NAMES)}}, vals[i])

    # 2: multilinearity via midpoint linearity in each coordinate.
    max_defect = 0.0
    m = 2_000
    for U in grid:
        for V in grid:
            box = np.array([U] * 4 + [V] * 4)
            base = rng.random((m, 8)) * box
            for k in range(8):
                lo = base.copy()
                hi = base.copy()
                mid = base.copy()
                lo[:, k] = 0.0
                hi[:, k] = box[k]
                mid[:, k] = 0.5 * box[k]
                zl = z(*(lo[:, i] for i in range(8)), U, V)
                zh = z(*(hi[:, i] for i in range(8)), U, V)
                zm = z(*(mid[:, i] for i in range(8)), U, V)
                defect = float(np.max(np.abs(zm - 0.5 * (zl + zh)))) if m else 0.0
                max_defect = max(max_defect, defect)
                if defect > 1e-9 * max(1.0, U * V, U, V):
                    record("multilinearity", {"U": U, "V": V, "variable": _VAR_NAMES[k]}, defect)

    # 3: random interior points, split across the grid to keep every scale covered.
    min_random = np.inf
    pairs = [(U, V) for U in grid for V in grid]
    per = max(1, n_random // max(1, len(pairs)))
    n_rand_total = 0
    for U, V in pairs:
        if n_rand_total >= n_random:
            break
        k = min(per, n_random - n_rand_total)
        pts = rng.random((k, 8)) * np.array([U] * 4 + [V] * 4)
        vals = z(*(pts[:, i] for i in range(8)), U, V)
        n_rand_total += k
        worst = float(np.min(vals)) if k else np.inf
        min_random = min(min_random, worst)
        if worst < -_TOL:
            i = int(np.argmin(vals))
            record("interior", {"U": U, "V": V,
                                **{n: pts[i, j] for j, n in enumerate(_VAR_NAMES)}}, vals[i])
    if not np.isfinite(min_random):
        min_random = 0.0

    # 4: case bounds against the exact x-vertex minimum.
    max_excess = -np.inf
    cases_seen: set[int] = set()
    n_cases = 0
    if n_case_samples > 0:
        U, V = 1.0, 1.0
        ys = rng.random((n_case_samples, 4)) * V
        for row in ys:
            y1p, y1m, y2p, y2m = (float(v) for v in row)
            case, bound = case_lower_bound(y1p, y1m, y2p, y2m, U, V)
            cases_seen.add(case)
            vmin = float(x_vertex_min(y1p, y1m, y2p, y2m, U, V))
            excess = bound - vmin
            max_excess = max(max_excess, excess)
            n_cases += 1
            if excess > _TOL or bound < -_TOL:
                record("case_bound", {"case": case, "y1p": y1p, "y1m": y1m,
                                      "y2p": y2p, "y2m": y2m, "U": U, "V": V,
                                      "bound": bound, "vertex_min": vmin}, excess)
    if not np.isfinite(max_excess):
        max_excess = 0.0

    return TheoremReport(
        passed=not counterexamples,
        n_vertex_checks=n_vertex,
        n_random_checks=n_rand_total,
        n_case_checks=n_cases,
        min_vertex_z=float(min_vertex) if np.isfinite(min_vertex) else 0.0,
        min_random_z=float(min_random),
        max_multilinearity_defect=max_defect,
        max_case_excess=float(max_excess),
        cases_seen=tuple(sorted(cases_seen)),
        counterexamples=counterexamples,
    )


def corrupted_z(*args):
    """Z with the sign of the U*V term flipped. Fails at the all-zero vertex."""
    *vars8, U, V = args
    return _z_raw(*vars8, U, V) - 2.0 * U * V
