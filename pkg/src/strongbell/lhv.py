"""Local hidden-variable models and their ensemble statistics.

A model owns a hidden-state distribution ``p(lambda)`` and two local response
maps: ``response1(orientation, lambda)`` and ``response2(orientation, lambda)``
each return the pair of probabilities that the corresponding detector fires in
the + or - channel. Locality is structural: neither response ever sees the
other side's orientation. Given lambda the two sides fire independently, so a
joint probability is the ensemble average of the product of responses:

    p_xy(a, b) = integral p(lambda) r1_x(a | lambda) r2_y(b | lambda) dlambda.

Two estimators are provided. Quadrature applies a composite midpoint rule on
the model's declared 1-D support, subdividing first at any response
discontinuities the model declares (exact for piecewise-constant responses);
the node weights are normalized, so the estimate is itself the ensemble of a
discrete hidden-variable model and inherits every classical bound exactly.
Monte Carlo draws lambda in fixed-size batches whose seed streams derive
deterministically from (master seed, pair index, batch index), making results
bit-identical across runs and worker counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import AngleConfig, OutcomePdf
from .errors import InvalidInputError, ModelContractError, UnsupportedMethodError
from .theorem import _z_raw

__all__ = [
    "COMPONENTS",
    "CountTally",
    "HiddenVariableModel",
    "MalusModel",
    "NoDetectionModel",
    "PairEstimate",
    "PdfEstimate",
    "PointwiseResult",
    "RandomFourierModel",
    "SignModel",
    "SupplementaryResult",
    "check_pointwise_inequality",
    "check_supplementary",
    "ensemble_pdf",
    "simulate_counts",
    "simulate_tallies",
]

# Component order used by every (8,)-vector of pair statistics.
COMPONENTS = ("pp", "pm", "mp", "mm", "s1p", "s1m", "s2p", "s2m")

DEFAULT_NODES = 4096
DEFAULT_BATCHES = 64


class HiddenVariableModel:
    """Base class for local hidden-variable models.

    Subclasses must implement :meth:`response1`; :meth:`response2` defaults to
    the same map. Responses take an orientation in degrees and an ndarray of
    lambda values and return ``(p_plus, p_minus)`` arrays, each in [0, 1] with
    ``p_plus + p_minus <= 1`` (the remainder is a no-count).

    Models with a one-dimensional lambda declare ``lambda_support`` (degrees)
    and a ``lambda_density``; sampling-only models return ``None`` from
    ``lambda_support`` and support only Monte Carlo estimation.
    """

    name = "model"

    def lambda_support(self) -> tuple[float, float] | None:
        return (0.0, 180.0)

    def lambda_density(self, lam: np.ndarray) -> np.ndarray:
        """Probability density per degree on the declared support."""
        return np.full_like(lam, 1.0 / 180.0)

    def sample_lambda(self, rng: np.random.Generator, size: int) -> np.ndarray:
        support = self.lambda_support()
        if support is None:
            raise NotImplementedError("sampling-only models must override sample_lambda")
        lo, hi = support
        return rng.uniform(lo, hi, size)

    def response1(self, orientation_deg: float, lam: np.ndarray):
        raise NotImplementedError

    def response2(self, orientation_deg: float, lam: np.ndarray):
        return self.response1(orientation_deg, lam)

    def response_breakpoints(self, orientation_deg: float) -> tuple[float, ...]:
        """Lambda values (degrees) where the responses jump, if any."""
        return ()

    def describe(self) -> dict:
        return {"model": self.name}


class SignModel(HiddenVariableModel):
    """Deterministic reference model: outcome follows the sign of cos 2(o - lambda).

    lambda is uniform on [0, 180). Produces the triangular correlation
    E(d) = 1 - d/45 for d in [0, 90] degrees (mirrored beyond) and saturates
    the classical bounds of every inequality here.
    """

    name = "sign"

    def response1(self, orientation_deg: float, lam: np.ndarray):
        plus = (np.cos(2.0 * np.radians(orientation_deg - lam)) >= 0.0).astype(float)
        return plus, 1.0 - plus

    def response_breakpoints(self, orientation_deg: float) -> tuple[float, ...]:
        return ((orientation_deg - 45.0) % 180.0, (orientation_deg + 45.0) % 180.0)


class MalusModel(HiddenVariableModel):
    """Stochastic reference model with Malus-law responses cos^2 / sin^2.

    Smooth trigonometric responses, so the midpoint rule on the full period is
    exact to rounding. E(d) = cos(2d)/2.
    """

    name = "malus"

    def response1(self, orientation_deg: float, lam: np.ndarray):
        plus = np.cos(np.radians(orientation_deg - lam)) ** 2
        return plus, 1.0 - plus


class NoDetectionModel(HiddenVariableModel):
    """Degenerate model: nothing is ever detected."""

    name = "no_detection"

    def response1(self, orientation_deg: float, lam: np.ndarray):
        z = np.zeros_like(lam)
        return z, z.copy()


class RandomFourierModel(HiddenVariableModel):
    """Random rotation-invariant response model for fuzzing the classical bounds.

    Each side's + response is a clamped low-order Fourier series in
    (orientation - lambda); the - response is ``channel_sum - plus`` with a
    per-side constant channel sum in (0, 1]. Constant channel sums make the
    no-enhancement condition hold by construction: any single response is
    bounded by the summed response at every reference axis.
    """

    name = "random_fourier"

    def __init__(self, seed: int, n_terms: int = 3):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(7,)))
        self.seed = int(seed)
        self.n_terms = int(n_terms)
        self._sums = rng.uniform(0.3, 1.0, 2)
        self._offsets = rng.uniform(0.2, 0.8, 2)
        # Decaying harmonic amplitudes keep the pre-clip series mostly in range.
        ks = np.arange(1, n_terms + 1)
        self._cos = rng.normal(0.0, 0.5, (2, n_terms)) / ks
        self._sin = rng.normal(0.0, 0.5, (2, n_terms)) / ks

    def _plus(self, side: int, orientation_deg: float, lam: np.ndarray) -> np.ndarray:
        theta = np.radians(orientation_deg - lam)
        series = np.full_like(lam, self._offsets[side])
        for k in range(1, self.n_terms + 1):
            series = series + self._cos[side, k - 1] * np.cos(2.0 * k * theta)
            series = series + self._sin[side, k - 1] * np.sin(2.0 * k * theta)
        return self._sums[side] * np.clip(series, 0.0, 1.0)

    def response1(self, orientation_deg: float, lam: np.ndarray):
        plus = self._plus(0, orientation_deg, lam)
        return plus, self._sums[0] - plus

    def response2(self, orientation_deg: float, lam: np.ndarray):
        plus = self._plus(1, orientation_deg, lam)
        return plus, self._sums[1] - plus

    def describe(self) -> dict:
        return {"model": self.name, "seed": self.seed, "n_terms": self.n_terms}


BUILTIN_MODELS = {
    "sign": SignModel,
    "malus": MalusModel,
    "no_detection": NoDetectionModel,
    "random_fourier": RandomFourierModel,
}


def make_model(name: str, **params) -> HiddenVariableModel:
    """Instantiate a built-in model by name."""
    try:
        cls = BUILTIN_MODELS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown model {name!r}; available: {sorted(BUILTIN_MODELS)}"
        ) from None
    return cls(**params)


def _checked_responses(model: HiddenVariableModel, side: int, orientation: float,
                       lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    fn = model.response1 if side == 1 else model.response2
    plus, minus = fn(orientation, lam)
    plus = np.asarray(plus, dtype=float)
    minus = np.asarray(minus, dtype=float)
    tol = 1e-12
    if (plus.min(initial=0.0) < -tol or minus.min(initial=0.0) < -tol
            or (plus + minus).max(initial=0.0) > 1.0 + tol):
        raise ModelContractError(
            f"model {model.name!r} side {side} returned responses outside the "
            f"probability simplex at orientation {orientation}"
        )
    return np.clip(plus, 0.0, 1.0), np.clip(minus, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Ensemble estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairEstimate:
    """Ensemble statistics for one orientation pair.

    ``values`` holds the eight components in :data:`COMPONENTS` order.
    ``stderr`` and per-batch ``batch_values`` are present for Monte Carlo
    estimates only; batches all have equal weight except possibly the last.
    """

    a: float
    b: float
    values: np.ndarray
    stderr: np.ndarray | None = None
    batch_values: np.ndarray | None = None
    n_samples: int = 0

    def pdf(self) -> OutcomePdf:
        v = [float(x) for x in self.values]
        return OutcomePdf(*v)


@dataclass(frozen=True)
class PdfEstimate:
    """Public result of :func:`ensemble_pdf`."""

    pdf: OutcomePdf
    stderr: OutcomePdf | None
    n_samples: int


def _component_products(r1p, r1m, r2p, r2m) -> list[np.ndarray]:
    return [r1p * r2p, r1p * r2m, r1m * r2p, r1m * r2m, r1p, r1m, r2p, r2m]


def quadrature_pair(model: HiddenVariableModel, a: float, b: float,
                    n_nodes: int = DEFAULT_NODES) -> PairEstimate:
    """Midpoint-rule ensemble average over the model's declared lambda density.

    The support is split at any declared response discontinuities of the two
    orientations involved, nodes are allocated to the pieces proportionally,
    and the resulting weights are normalized to sum to one. The estimate is
    therefore the exact ensemble of a discrete model with those weights.
    """
    support = model.lambda_support()
    if support is None:
        raise UnsupportedMethodError(
            f"model {model.name!r} is sampling-only; quadrature is unavailable"
        )
    if n_nodes < 64:
        raise InvalidInputError(f"n_nodes must be >= 64, got {n_nodes}")
    lo, hi = support
    cuts = {lo, hi}
    for o in (a, b):
        for bp in model.response_breakpoints(o):
            if lo < bp < hi:
                cuts.add(float(bp))
    edges = sorted(cuts)
    total = hi - lo
    nodes_list = []
    weights_list = []
    for u, v in zip(edges[:-1], edges[1:]):
        k = max(1, round(n_nodes * (v - u) / total))
        h = (v - u) / k
        pts = u + h * (np.arange(k) + 0.5)
        nodes_list.append(pts)
        weights_list.append(np.full(k, h))
    nodes = np.concatenate(nodes_list)
    weights = np.concatenate(weights_list) * model.lambda_density(nodes)
    weights /= weights.sum()

    r1p, r1m = _checked_responses(model, 1, a, nodes)
    r2p, r2m = _checked_responses(model, 2, b, nodes)
    values = np.array([float(weights @ c) for c in _component_products(r1p, r1m, r2p, r2m)])
    return PairEstimate(a=a, b=b, values=values)


def _batch_sizes(n: int, n_batches: int) -> list[int]:
    n_batches = min(n_batches, n)
    base, extra = divmod(n, n_batches)
    return [base + (1 if i < extra else 0) for i in range(n_batches)]


def _pair_rng(seed: int, pair_index: int, batch_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(pair_index, batch_index))
    )


def _run_batches(batch_fn, n_batches: int, n_workers: int) -> list:
    """Run batch_fn(i) for i in range(n_batches), results ordered by index."""
    if n_workers <= 1:
        return [batch_fn(i) for i in range(n_batches)]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(batch_fn, range(n_batches)))


def monte_carlo_pair(model: HiddenVariableModel, a: float, b: float,
                     n_samples: int, seed: int, pair_index: int = 0,
                     n_batches: int = DEFAULT_BATCHES,
                     n_workers: int = 1) -> PairEstimate:
    """Monte Carlo ensemble average with deterministic batch seed streams."""
    if n_samples < 1:
        raise InvalidInputError(f"n_samples must be >= 1, got {n_samples}")
    sizes = _batch_sizes(n_samples, n_batches)

    def one_batch(i: int) -> np.ndarray:
        rng = _pair_rng(seed, pair_index, i)
        lam = model.sample_lambda(rng, sizes[i])
        r1p, r1m = _checked_responses(model, 1, a, lam)
        r2p, r2m = _checked_responses(model, 2, b, lam)
        comps = _component_products(r1p, r1m, r2p, r2m)
        return np.array([[c.sum() for c in comps],
                         [(c * c).sum() for c in comps]])

    partials = _run_batches(one_batch, len(sizes), n_workers)
    sums = np.zeros(8)
    sumsq = np.zeros(8)
    batch_means = np.empty((len(sizes), 8))
    for i, part in enumerate(partials):
        sums += part[0]
        sumsq += part[1]
        batch_means[i] = part[0] / sizes[i]
    n = float(n_samples)
    values = sums / n
    var = np.maximum(sumsq / n - values**2, 0.0)
    stderr = np.sqrt(var / n)
    return PairEstimate(a=a, b=b, values=values, stderr=stderr,
                        batch_values=batch_means, n_samples=n_samples)


def ensemble_pdf(model: HiddenVariableModel, a: float, b: float,
                 method: str = "quadrature", n_nodes: int = DEFAULT_NODES,
                 n_samples: int = 100_000, seed: int = 0,
                 n_workers: int = 1) -> PdfEstimate:
    """Ensemble outcome probabilities for one orientation pair.

    ``method`` is ``"quadrature"`` (needs a declared 1-D density) or
    ``"monte_carlo"``. Monte Carlo also reports a per-entry standard error.
    """
    if method == "quadrature":
        est = quadrature_pair(model, a, b, n_nodes=n_nodes)
        return PdfEstimate(pdf=est.pdf(), stderr=None, n_samples=0)
    if method in ("monte_carlo", "mc"):
        est = monte_carlo_pair(model, a, b, n_samples=n_samples, seed=seed,
                               n_workers=n_workers)
        err = OutcomePdf(*[float(x) for x in est.stderr])
        return PdfEstimate(pdf=est.pdf(), stderr=err, n_samples=n_samples)
    raise InvalidInputError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Finite-N simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountTally:
    """Raw coincidence and singles counts for one orientation pair."""

    a: float
    b: float
    n_emitted: int
    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int
    n1_plus: int
    n1_minus: int
    n2_plus: int
    n2_minus: int

    def __post_init__(self) -> None:
        counts = (self.n_pp, self.n_pm, self.n_mp, self.n_mm,
                  self.n1_plus, self.n1_minus, self.n2_plus, self.n2_minus)
        if any(c < 0 or c > self.n_emitted for c in counts):
            raise InvalidInputError("counts must lie in [0, n_emitted]")
        if self.n_pp + self.n_pm + self.n_mp + self.n_mm > self.n_emitted:
            raise InvalidInputError("joint counts exceed the number of emissions")

    def values(self) -> np.ndarray:
        """Count vector in :data:`COMPONENTS` order."""
        return np.array([self.n_pp, self.n_pm, self.n_mp, self.n_mm,
                         self.n1_plus, self.n1_minus, self.n2_plus, self.n2_minus],
                        dtype=float)

    @staticmethod
    def merge(a_deg: float, b_deg: float, parts: list[np.ndarray], n: int) -> "CountTally":
        total = np.sum(parts, axis=0).astype(int)
        return CountTally(a_deg, b_deg, n, *[int(c) for c in total])


def simulate_tallies(model: HiddenVariableModel,
                     pairs: list[tuple[float, float]],
                     n_emissions: int, seed: int,
                     n_batches: int = DEFAULT_BATCHES,
                     n_workers: int = 1) -> list[list[np.ndarray]]:
    """Per-batch count vectors for each orientation pair.

    Each emission draws one lambda, then each detector independently fires +
    with its p_plus, - with its p_minus, or not at all. Batch b of pair k uses
    the seed stream (seed, k, b), so the counts are reproducible bit for bit
    regardless of worker count.
    """
    if n_emissions < 1:
        raise InvalidInputError(f"n_emissions must be >= 1, got {n_emissions}")
    sizes = _batch_sizes(n_emissions, n_batches)
    out: list[list[np.ndarray]] = []
    for k, (a, b) in enumerate(pairs):

        def one_batch(i: int, a=a, b=b, k=k) -> np.ndarray:
            rng = _pair_rng(seed, k, i)
            lam = model.sample_lambda(rng, sizes[i])
            r1p, r1m = _checked_responses(model, 1, a, lam)
            r2p, r2m = _checked_responses(model, 2, b, lam)
            u1 = rng.random(sizes[i])
            u2 = rng.random(sizes[i])
            o1 = np.where(u1 < r1p, 1, np.where(u1 < r1p + r1m, -1, 0))
            o2 = np.where(u2 < r2p, 1, np.where(u2 < r2p + r2m, -1, 0))
            return np.array([
                int(np.count_nonzero((o1 == 1) & (o2 == 1))),
                int(np.count_nonzero((o1 == 1) & (o2 == -1))),
                int(np.count_nonzero((o1 == -1) & (o2 == 1))),
                int(np.count_nonzero((o1 == -1) & (o2 == -1))),
                int(np.count_nonzero(o1 == 1)),
                int(np.count_nonzero(o1 == -1)),
                int(np.count_nonzero(o2 == 1)),
                int(np.count_nonzero(o2 == -1)),
            ], dtype=np.int64)

        out.append(_run_batches(one_batch, len(sizes), n_workers))
    return out


def simulate_counts(model: HiddenVariableModel,
                    pairs: list[tuple[float, float]],
                    n_emissions: int, seed: int,
                    n_batches: int = DEFAULT_BATCHES,
                    n_workers: int = 1) -> list[CountTally]:
    """Total counts per orientation pair; see :func:`simulate_tallies`."""
    per_pair = simulate_tallies(model, pairs, n_emissions, seed,
                                n_batches=n_batches, n_workers=n_workers)
    return [CountTally.merge(a, b, parts, n_emissions)
            for (a, b), parts in zip(pairs, per_pair)]


# ---------------------------------------------------------------------------
# Pointwise checkers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupplementaryResult:
    ok: bool
    counterexample: dict | None = None


def check_supplementary(model: HiddenVariableModel,
                        orientations: list[float], r: float,
                        lambdas: np.ndarray) -> SupplementaryResult:
    """No-enhancement check at the given hidden states.

    For every lambda and orientation, each side's single-channel response must
    not exceed that side's summed response at the reference axis ``r``.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0 or not orientations:
        raise InvalidInputError("orientations and lambdas must be non-empty")
    tol = 1e-12
    for side in (1, 2):
        rp, rm = _checked_responses(model, side, r, lambdas)
        ceiling = rp + rm
        for o in orientations:
            op, om = _checked_responses(model, side, o, lambdas)
            for channel, resp in (("+", op), ("-", om)):
                bad = resp > ceiling + tol
                if np.any(bad):
                    i = int(np.argmax(bad))
                    return SupplementaryResult(ok=False, counterexample={
                        "lambda": float(lambdas[i]), "orientation": float(o),
                        "side": side, "channel": channel,
                        "response": float(resp[i]), "reference_sum": float(ceiling[i]),
                    })
    return SupplementaryResult(ok=True)


@dataclass(frozen=True)
class PointwiseResult:
    ok: bool
    min_lhs: float
    argmin_lambda: float


def check_pointwise_inequality(model: HiddenVariableModel, config: AngleConfig,
                               lambdas: np.ndarray) -> PointwiseResult:
    """Hidden-state-level inequality behind the per-emission bound.

    At each lambda the 18-term combination of response products must be
    >= -1. With unit box bounds it equals Z(responses; U=V=1) - 1, so the box
    theorem guarantees it for any responses in [0, 1]; this check confirms it
    numerically for the supplied states.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0:
        raise InvalidInputError("lambdas must be non-empty")
    x1p, x1m = _checked_responses(model, 1, config.a, lambdas)
    x2p, x2m = _checked_responses(model, 1, config.a_prime, lambdas)
    y1p, y1m = _checked_responses(model, 2, config.b, lambdas)
    y2p, y2m = _checked_responses(model, 2, config.b_prime, lambdas)
    lhs = _z_raw(x1p, x1m, x2p, x2m, y1p, y1m, y2p, y2m, 1.0, 1.0) - 1.0
    i = int(np.argmin(lhs))
    return PointwiseResult(ok=bool(lhs[i] >= -1.0 - 1e-12),
                           min_lhs=float(lhs[i]),
                           argmin_lambda=float(lambdas[i]))
