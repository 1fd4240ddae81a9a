"""Evaluation of the classical-bound inequalities against probability sources.

A probability source supplies, for an ordered orientation pair, the eight
ensemble components (four joints then four singles, see
:data:`strongbell.lhv.COMPONENTS`). Three kinds exist: the closed-form quantum
predictor, a hidden-variable model paired with an estimation method, and a
literal table keyed by folded angle difference.

The inequalities:

- ``weak17``     per-emission bound over absolute probabilities, LHS >= -1.
- ``strong23``   the ratio form; coincidences at the reference axis replace the
                 unknown emission count, LHS >= -1.
- ``ardehali29`` strong ratio at the three-axes configuration; needs only the
                 0 and 120 degree settings, LHS >= -1. Quantum value -1.5.
- ``ch30``       one-channel CH comparator, LHS <= 0.
- ``fc31``       one-channel FC comparator, LHS <= 0.25.
- ``chsh``       correlation CHSH, |S| <= 2 for every sign placement; the
                 reported S is the largest of the four placements.
- ``rt32``       same arithmetic as ``ardehali29`` with settings read as
                 interferometer phase angles.

Every ratio-form evaluator is exactly invariant when all source probabilities
are scaled by a positive constant. Monte Carlo sources propagate uncertainty
by recomputing the statistic on per-batch means and taking the spread; the
same machinery turns simulated count tallies into finite-N estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    CHSH_DEFAULT_ANGLES,
    AngleConfig,
    InequalityReport,
    OutcomePdf,
    fold_angle_diff,
    three_axes_config,
)
from .errors import (
    ComparisonUndefinedError,
    DegenerateSourceError,
    InvalidInputError,
    MissingTableEntryError,
    StrongbellError,
    SymmetryError,
)
from .lhv import (
    DEFAULT_NODES,
    HiddenVariableModel,
    PairEstimate,
    monte_carlo_pair,
    quadrature_pair,
)
from .quantum import QuantumModel

__all__ = [
    "INEQUALITY_NAMES",
    "InequalityStatistic",
    "LhvSource",
    "QuantumSource",
    "SymmetryCheckReport",
    "TableSource",
    "check_symmetry",
    "estimate_from_batches",
    "eval_ch_30",
    "eval_chsh",
    "eval_fc_31",
    "eval_rt_32",
    "eval_simplified_29",
    "eval_strong_23",
    "eval_three_axes_family",
    "eval_weak_17",
    "evaluate_by_name",
    "statistic_for",
    "violation_improvement",
]

INEQUALITY_NAMES = ("weak17", "strong23", "ardehali29", "ch30", "fc31", "chsh", "rt32")

_ABS_TOL = 1e-9


# ---------------------------------------------------------------------------
# Sources
# ---------------------------------------------------------------------------

class QuantumSource:
    """Closed-form cascade-photon source."""

    kind = "quantum"
    analytic = True

    def __init__(self, model: QuantumModel):
        self.model = model

    def pair(self, a: float, b: float, index: int = 0) -> PairEstimate:
        p = self.model.joint_pdf(a, b)
        values = np.array([p.pp, p.pm, p.mp, p.mm,
                           p.s1_plus, p.s1_minus, p.s2_plus, p.s2_minus])
        return PairEstimate(a=a, b=b, values=values)

    def describe(self) -> dict:
        pr = self.model.params
        return {"source": "quantum", "eta": pr.eta, "omega": self.model.omega,
                "theta": pr.theta}


class LhvSource:
    """Hidden-variable model plus an estimation method."""

    kind = "lhv"

    def __init__(self, model: HiddenVariableModel, method: str = "quadrature",
                 n_nodes: int = DEFAULT_NODES, n_samples: int = 100_000,
                 seed: int = 0, n_workers: int = 1):
        if method not in ("quadrature", "monte_carlo", "mc"):
            raise InvalidInputError(f"unknown method {method!r}")
        self.model = model
        self.method = "monte_carlo" if method == "mc" else method
        self.n_nodes = n_nodes
        self.n_samples = n_samples
        self.seed = seed
        self.n_workers = n_workers

    @property
    def analytic(self) -> bool:
        return self.method == "quadrature"

    def pair(self, a: float, b: float, index: int = 0) -> PairEstimate:
        if self.method == "quadrature":
            return quadrature_pair(self.model, a, b, n_nodes=self.n_nodes)
        return monte_carlo_pair(self.model, a, b, n_samples=self.n_samples,
                                seed=self.seed, pair_index=index,
                                n_workers=self.n_workers)

    def describe(self) -> dict:
        d = {"source": "lhv", "method": self.method, **self.model.describe()}
        if self.method == "quadrature":
            d["n_nodes"] = self.n_nodes
        else:
            d.update(n_samples=self.n_samples, seed=self.seed)
        return d


class TableSource:
    """Literal table of outcome probabilities keyed by folded angle difference.

    Keys are folded to [0, 180); a lookup falls back to the mirrored key
    180 - d, since the two folds describe the same axis geometry.
    """

    kind = "table"
    analytic = True

    def __init__(self, entries: dict[float, OutcomePdf]):
        self._entries: dict[float, OutcomePdf] = {}
        for key, pdf in entries.items():
            self._entries[round(fold_angle_diff(float(key), 0.0), 9)] = pdf

    def lookup(self, diff: float) -> OutcomePdf:
        for key in (round(diff, 9), round((180.0 - diff) % 180.0, 9)):
            if key in self._entries:
                return self._entries[key]
        raise MissingTableEntryError(
            f"table has no entry for angle difference {diff} "
            f"(available: {sorted(self._entries)})"
        )

    def pair(self, a: float, b: float, index: int = 0) -> PairEstimate:
        p = self.lookup(fold_angle_diff(a, b))
        values = np.array([p.pp, p.pm, p.mp, p.mm,
                           p.s1_plus, p.s1_minus, p.s2_plus, p.s2_minus])
        return PairEstimate(a=a, b=b, values=values)

    def describe(self) -> dict:
        return {"source": "table", "angles": sorted(self._entries)}


# ---------------------------------------------------------------------------
# Statistics: pair lists plus a scalar function of their component vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InequalityStatistic:
    """Everything needed to evaluate one inequality from pair statistics.

    ``stat`` maps a list of component vectors (one per entry of ``pairs``, in
    :data:`strongbell.lhv.COMPONENTS` order) to the LHS. Works equally on
    ensemble probabilities and on count ratios.
    """

    name: str
    pairs: tuple[tuple[float, float], ...]
    stat: Callable[[list[np.ndarray]], float]
    bound: float
    direction: str
    factor: Callable[[float], float]
    details: dict = field(default_factory=dict)


def _E(v: np.ndarray) -> float:
    return float(v[0] - v[1] - v[2] + v[3])


def _four(v: np.ndarray) -> float:
    return float(v[0] + v[1] + v[2] + v[3])


def _require_positive(value: float, what: str) -> float:
    if not (value > 0.0):
        raise DegenerateSourceError(f"{what} is {value}; ratio undefined")
    return value


def _weak_17_statistic(config: AngleConfig) -> InequalityStatistic:
    pairs = ((config.a, config.b), (config.a, config.b_prime),
             (config.a_prime, config.b), (config.a_prime, config.b_prime))

    def stat(v):
        return (_E(v[0]) + _E(v[1]) + _E(v[2])
                - 2.0 * v[3][0] - 2.0 * v[3][3]
                + v[3][4] + v[3][5] + v[3][6] + v[3][7])

    return InequalityStatistic("weak17", pairs, stat, -1.0, "ge", abs,
                               {"config": config.as_tuple()})


def _strong_23_statistic(config: AngleConfig) -> InequalityStatistic:
    c = config
    pairs = ((c.a, c.b), (c.a, c.b_prime), (c.a_prime, c.b),
             (c.a_prime, c.b_prime), (c.a_prime, c.r), (c.r, c.b_prime),
             (c.r, c.r))

    def stat(v):
        denom = _require_positive(_four(v[6]), "reference coincidence sum")
        num = (_E(v[0]) + _E(v[1]) + _E(v[2])
               - 2.0 * v[3][0] - 2.0 * v[3][3]
               + _four(v[4]) + _four(v[5]))
        return num / denom

    return InequalityStatistic("strong23", pairs, stat, -1.0, "ge", abs,
                               {"config": config.as_tuple()})


def _simplified_29_statistic(name: str = "ardehali29") -> InequalityStatistic:
    pairs = ((0.0, 120.0), (0.0, 0.0))

    def stat(v):
        denom = _require_positive(_four(v[1]), "coincidence sum at 0 deg")
        return (3.0 * _E(v[0]) + 2.0 * v[1][1] + 2.0 * v[1][2]) / denom

    return InequalityStatistic(name, pairs, stat, -1.0, "ge", abs,
                               {"settings": (0.0, 120.0)})


def _three_axes_statistic(b: float, r: float,
                          name: str = "ardehali29") -> InequalityStatistic:
    pairs = ((0.0, b), (0.0, r), (b, r), (0.0, 0.0))

    def stat(v):
        denom = _require_positive(_four(v[3]), "coincidence sum at 0 deg")
        return (_E(v[0]) + _E(v[1]) + _E(v[2])
                + 2.0 * v[3][1] + 2.0 * v[3][2]) / denom

    return InequalityStatistic(name, pairs, stat, -1.0, "ge", abs,
                               {"b": b, "r": r, "family": "three_axes"})


def _ch_30_statistic(phi_deg: float) -> InequalityStatistic:
    pairs = ((0.0, phi_deg), (0.0, 3.0 * phi_deg), (0.0, 0.0))

    def stat(v):
        denom = _require_positive(_four(v[2]), "fully open coincidence rate")
        removed_2 = v[2][0] + v[2][1]   # side 2 open: sum over its channels
        removed_1 = v[2][0] + v[2][2]
        return (3.0 * v[0][0] - v[1][0] - removed_2 - removed_1) / denom

    # No dimensionless factor convention exists for a 0 bound; report raw LHS.
    return InequalityStatistic("ch30", pairs, stat, 0.0, "le", lambda lhs: lhs,
                               {"phi": phi_deg})


def _fc_31_statistic() -> InequalityStatistic:
    pairs = ((0.0, 22.5), (0.0, 67.5), (0.0, 0.0))

    def stat(v):
        denom = _require_positive(_four(v[2]), "fully open coincidence rate")
        return (v[0][0] - v[1][0]) / denom

    return InequalityStatistic("fc31", pairs, stat, 0.25, "le",
                               lambda lhs: lhs / 0.25, {})


def _chsh_statistic(a: float, b: float, a2: float, b2: float) -> InequalityStatistic:
    pairs = ((a, b), (a, b2), (a2, b), (a2, b2))

    def stat(v):
        es = []
        for vec in v:
            denom = _require_positive(_four(vec), "coincidence sum")
            es.append(_E(vec) / denom)
        return max(abs(sum(es) - 2.0 * es[k]) for k in range(4))

    return InequalityStatistic("chsh", pairs, stat, 2.0, "le",
                               lambda lhs: lhs / 2.0,
                               {"angles": (a, b, a2, b2)})


def statistic_for(name: str, config: AngleConfig | None = None,
                  phi_deg: float = 22.5,
                  chsh_angles: tuple[float, float, float, float] | None = None,
                  ) -> InequalityStatistic:
    """Pair list and LHS function for a named inequality."""
    if name == "weak17":
        return _weak_17_statistic(config or three_axes_config())
    if name == "strong23":
        return _strong_23_statistic(config or three_axes_config())
    if name in ("ardehali29", "rt32"):
        return _simplified_29_statistic(name)
    if name == "ch30":
        return _ch_30_statistic(phi_deg)
    if name == "fc31":
        return _fc_31_statistic()
    if name == "chsh":
        return _chsh_statistic(*(chsh_angles or CHSH_DEFAULT_ANGLES))
    raise InvalidInputError(
        f"unknown inequality {name!r}; available: {list(INEQUALITY_NAMES)}"
    )


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------

def _finalize(spec: InequalityStatistic, lhs: float, stderr: float,
              n_samples: int, sigma: float,
              extra: dict | None = None) -> InequalityReport:
    tol = _ABS_TOL + (sigma * stderr if math.isfinite(stderr) else 0.0)
    if spec.direction == "ge":
        violated = lhs < spec.bound - tol
    else:
        violated = lhs > spec.bound + tol
    details = dict(spec.details)
    if extra:
        details.update(extra)
    return InequalityReport(
        name=spec.name, lhs=lhs, bound=spec.bound, direction=spec.direction,
        violated=violated, violation_factor=float(spec.factor(lhs)),
        stderr=stderr, n_samples=n_samples, details=details,
    )


def _batch_spread(spec: InequalityStatistic, rows_per_pair: list[np.ndarray | None],
                  values_per_pair: list[np.ndarray]) -> float:
    """Standard error of the statistic from aligned per-batch means."""
    n_rows = min(r.shape[0] for r in rows_per_pair if r is not None)
    vals = []
    for i in range(n_rows):
        rows = [r[i] if r is not None else v
                for r, v in zip(rows_per_pair, values_per_pair)]
        try:
            vals.append(float(spec.stat(rows)))
        except StrongbellError:
            continue
    if len(vals) < 2:
        return float("nan")
    arr = np.asarray(vals)
    return float(arr.std(ddof=1) / math.sqrt(len(arr)))


def _evaluate(spec: InequalityStatistic, source, sigma: float,
              extra: dict | None = None) -> InequalityReport:
    ests = [source.pair(a, b, index=i) for i, (a, b) in enumerate(spec.pairs)]
    lhs = float(spec.stat([e.values for e in ests]))
    stderr = 0.0
    n_samples = 0
    if any(e.batch_values is not None for e in ests):
        n_samples = max(e.n_samples for e in ests)
        stderr = _batch_spread(spec, [e.batch_values for e in ests],
                               [e.values for e in ests])
    return _finalize(spec, lhs, stderr, n_samples, sigma, extra)


def estimate_from_batches(spec: InequalityStatistic,
                          batches_per_pair: list[list[np.ndarray]],
                          n_emissions: int, sigma: float = 3.0) -> InequalityReport:
    """Finite-N estimate of an inequality from per-batch count vectors.

    ``batches_per_pair[k][i]`` is the count vector of batch ``i`` for pair
    ``k`` of ``spec.pairs`` (aligned batch sizes across pairs). Count ratios
    replace ensemble probabilities; the standard error is the spread of the
    statistic across batches.
    """
    from .lhv import _batch_sizes

    totals = [np.sum(batches, axis=0) / float(n_emissions)
              for batches in batches_per_pair]
    lhs = float(spec.stat(totals))
    n_batches = len(batches_per_pair[0])
    batch_n = np.asarray(_batch_sizes(n_emissions, n_batches), dtype=float)
    rows_per_pair = [np.asarray(batches, dtype=float) / batch_n[:, None]
                     for batches in batches_per_pair]
    stderr = _batch_spread(spec, rows_per_pair, totals)
    return _finalize(spec, lhs, stderr, n_emissions, sigma)


# ---------------------------------------------------------------------------
# Public evaluators
# ---------------------------------------------------------------------------

def eval_weak_17(source, config: AngleConfig, sigma: float = 3.0) -> InequalityReport:
    """Per-emission inequality over absolute probabilities, LHS >= -1.

    Three correlation blocks, a doubled concordance penalty at the primed
    pair, and the four primed singles. Requires knowledge of the emission
    count, so it is only experimentally decisive when most pairs are detected.
    """
    return _evaluate(_weak_17_statistic(config), source, sigma)


def eval_strong_23(source, config: AngleConfig, sigma: float = 3.0) -> InequalityReport:
    """Strong ratio inequality, LHS >= -1.

    Pure coincidence ratios: the unmeasurable emission count cancels between
    numerator and denominator, as does any overall detection scale.
    """
    return _evaluate(_strong_23_statistic(config), source, sigma)


def eval_simplified_29(source, sigma: float = 3.0,
                       check_sym: bool = True) -> InequalityReport:
    """Strong ratio inequality at the three-axes configuration, LHS >= -1.

    Requires only two settings: the 120 degree pair for the correlation and
    the 0 degree pair for the discordance and the normalization,

        LHS = (3 E(120) + 2 p+-(0) + 2 p-+(0)) / K,   K = sum of joints at 0.

    The discordance terms enter with positive sign: they are what remains of
    the concordance penalty and the two reference coincidence sums once the
    primed axes sit on the reference axis (-2 p++ - 2 p-- + 2 K folds to
    +2 p+- + 2 p-+). A perfectly concordant source, such as the quantum state
    at equal settings, has zero discordance and reaches -1.5. Rotational
    symmetry of the source is a precondition and is checked first.
    """
    _require_symmetry(source, check_sym)
    return _evaluate(_simplified_29_statistic(), source, sigma)


def eval_three_axes_family(source, b: float, r: float, sigma: float = 3.0,
                           name: str = "ardehali29",
                           check_sym: bool = True) -> InequalityReport:
    """Generalization of :func:`eval_simplified_29` to free axes ``b`` and ``r``.

    Both primed settings stay on the reference axis; the first side measures
    at 0 and ``b`` degrees. The three correlation terms then sit at the folded
    differences of (0, b), (0, r) and (b, r). Used by the optimizer; at
    b = 120, r = 240 it matches the two-setting evaluator.
    """
    _require_symmetry(source, check_sym)
    return _evaluate(_three_axes_statistic(b, r, name), source, sigma)


def eval_ch_30(source, phi_deg: float = 22.5, sigma: float = 3.0) -> InequalityReport:
    """One-channel CH comparator, LHS <= 0.

    Uses ordinary-channel coincidences at phi and 3 phi plus the removed-
    polarizer rates, all normalized by the fully open rate. Removed rates come
    from channel sums of the equal-setting pair, which is exact for sources
    whose per-side channel sums do not depend on the setting.
    """
    return _evaluate(_ch_30_statistic(phi_deg), source, sigma)


def eval_fc_31(source, sigma: float = 3.0) -> InequalityReport:
    """One-channel FC comparator at 22.5/67.5 degrees, LHS <= 0.25.

    The FC derivation additionally assumes the removed-polarizer rate does not
    depend on the remaining setting; that is verified against the source and
    the observed dependence is attached to the report.
    """
    aux = _removed_rate_dependence(source)
    return _evaluate(_fc_31_statistic(), source, sigma,
                     extra={"removed_rate_dependence": aux})


def eval_chsh(source, a: float = 0.0, b: float = 22.5, a2: float = 45.0,
              b2: float = 67.5, sigma: float = 3.0) -> InequalityReport:
    """CHSH statistic over four settings, |S| <= 2.

    Correlations are normalized per pair by that pair's coincidence sum. All
    four placements of the single minus sign are classical bounds; the
    reported S is the largest magnitude among them, which is the standard
    violation measure for an arbitrary setting set.
    """
    return _evaluate(_chsh_statistic(a, b, a2, b2), source, sigma)


def eval_rt_32(source, sigma: float = 3.0, check_sym: bool = True) -> InequalityReport:
    """Phase-momentum reading of the three-axes ratio inequality.

    Identical arithmetic to :func:`eval_simplified_29`; the two settings are
    interpreted as interferometer phase differences and the coincidence
    entries as counting rates between the paired detector sets.
    """
    _require_symmetry(source, check_sym)
    report = _evaluate(_simplified_29_statistic("rt32"), source, sigma,
                       extra={"settings_are_phase_angles": True})
    return report


def violation_improvement(r_new: InequalityReport, r_old: InequalityReport) -> float:
    """Percent increase of one violation factor over another."""
    if not (r_new.violated and r_old.violated):
        raise ComparisonUndefinedError(
            "violation improvement requires both reports to be violated "
            f"(got {r_new.name}: {r_new.violated}, {r_old.name}: {r_old.violated})"
        )
    return (r_new.violation_factor / r_old.violation_factor - 1.0) * 100.0


# ---------------------------------------------------------------------------
# Symmetry and auxiliary checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryCheckReport:
    max_deviation: float
    tolerance: float
    symmetric: bool
    n_pairs: int
    seed: int


def _symmetry_tolerance(source, stderr_scale: float) -> float:
    if not source.analytic:
        return max(4.0 * stderr_scale, 1e-12)
    if source.kind == "lhv":
        return 1e-6   # midpoint discretization of non-smooth responses
    return 1e-9


def check_symmetry(source, n_pairs: int = 12, seed: int = 0) -> SymmetryCheckReport:
    """Compare joint probabilities of co-rotated orientation pairs.

    Samples pairs with equal folded difference and reports the worst
    per-component deviation. A symmetric source depends on its settings only
    through that difference, so the deviation should vanish within the
    tolerance appropriate to the estimation method.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(13,)))
    worst = 0.0
    err_scale = 0.0
    for i in range(n_pairs):
        a = float(rng.uniform(0.0, 360.0))
        d = float(rng.uniform(0.0, 180.0))
        t = float(rng.uniform(0.0, 360.0))
        e1 = source.pair(a, a + d, index=1000 + 2 * i)
        e2 = source.pair(a + t, a + d + t, index=1001 + 2 * i)
        worst = max(worst, float(np.max(np.abs(e1.values[:4] - e2.values[:4]))))
        for e in (e1, e2):
            if e.stderr is not None:
                err_scale = max(err_scale, float(np.max(e.stderr[:4])))
    tol = _symmetry_tolerance(source, err_scale)
    return SymmetryCheckReport(max_deviation=worst, tolerance=tol,
                               symmetric=worst <= tol, n_pairs=n_pairs, seed=seed)


def _require_symmetry(source, enabled: bool) -> None:
    if not enabled:
        return
    rep = check_symmetry(source, n_pairs=6)
    if not rep.symmetric:
        raise SymmetryError(
            f"source is not rotation invariant: max joint deviation "
            f"{rep.max_deviation:.3e} exceeds tolerance {rep.tolerance:.3e}"
        )


def _removed_rate_dependence(source) -> float:
    """Max observed variation of the removed-polarizer rates across settings."""
    rates_1 = []
    rates_2 = []
    for i, x in enumerate((0.0, 37.0, 101.0)):
        v = source.pair(x, x, index=2000 + i).values
        rates_1.append(v[0] + v[1])
        rates_2.append(v[0] + v[2])
    dev = max(max(rates_1) - min(rates_1), max(rates_2) - min(rates_2))
    if source.analytic and dev > _symmetry_tolerance(source, 0.0):
        raise InvalidInputError(
            f"removed-polarizer rate depends on the remaining setting "
            f"(variation {dev:.3e}); the FC comparator does not apply"
        )
    return float(dev)


# ---------------------------------------------------------------------------
# Name-based dispatch for the command-line layer
# ---------------------------------------------------------------------------

def evaluate_by_name(name: str, source, config: AngleConfig | None = None,
                     phi_deg: float = 22.5,
                     chsh_angles: tuple[float, float, float, float] | None = None,
                     sigma: float = 3.0) -> InequalityReport:
    if name not in INEQUALITY_NAMES:
        raise InvalidInputError(
            f"unknown inequality {name!r}; available: {list(INEQUALITY_NAMES)}"
        )
    cfg = config or three_axes_config()
    if name == "weak17":
        return eval_weak_17(source, cfg, sigma=sigma)
    if name == "strong23":
        return eval_strong_23(source, cfg, sigma=sigma)
    if name == "ardehali29":
        return eval_simplified_29(source, sigma=sigma)
    if name == "ch30":
        return eval_ch_30(source, phi_deg=phi_deg, sigma=sigma)
    if name == "fc31":
        return eval_fc_31(source, sigma=sigma)
    if name == "rt32":
        return eval_rt_32(source, sigma=sigma)
    angles = chsh_angles or CHSH_DEFAULT_ANGLES
    return eval_chsh(source, *angles, sigma=sigma)
