"""Shared domain types and angle arithmetic.

Conventions used throughout the package:

- All public angle arguments are in degrees. Polarizer settings are axes, so
  physically meaningful differences live on a 180 degree period; detector
  geometry (apertures) is still specified in radians because it enters the
  solid-angle formula directly.
- Outcome probabilities are absolute, i.e. per emitted pair, not conditioned
  on detection. The four joint entries of :class:`OutcomePdf` therefore sum to
  at most 1, with the deficit being undetected or single-sided events.
- ``E = p++ - p+- - p-+ + p--`` is the (unnormalized) correlation functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

__all__ = [
    "AngleConfig",
    "ApparatusParams",
    "InequalityReport",
    "OutcomePdf",
    "correlation_E",
    "fold_angle_diff",
    "normalize_angle",
    "three_axes_config",
    "CHSH_DEFAULT_ANGLES",
]

_PROB_EPS = 1e-9

# Standard CHSH setting set: three pairs of axes separated by 22.5 deg and one
# by 67.5 deg, giving the 2*sqrt(2) quantum optimum.
CHSH_DEFAULT_ANGLES = (0.0, 22.5, 45.0, 67.5)


def normalize_angle(value: float) -> float:
    """Normalize an angle in degrees into [0, 360)."""
    if not math.isfinite(value):
        raise ValueError(f"angle must be finite, got {value!r}")
    return float(value) % 360.0


def fold_angle_diff(x: float, y: float) -> float:
    """Separation of two polarizer axes, folded into [0, 180) degrees.

    The circular distance of the two directions (mod 360) is taken first, so
    ``fold_angle_diff(350, 10) == 20``; a residual 180 is identified with 0
    because a polarizer axis has period 180, so ``fold_angle_diff(200, 20) == 0``.
    Symmetric in its arguments and idempotent: ``fold_angle_diff(d, 0) == d``
    for any value it returns.
    """
    d = abs(normalize_angle(x) - normalize_angle(y)) % 360.0
    d = min(d, 360.0 - d)
    return d % 180.0


@dataclass(frozen=True)
class AngleConfig:
    """The five polarizer orientations of a two-channel run, in degrees.

    ``a``/``a_prime`` are first-side settings, ``b``/``b_prime`` second-side
    settings and ``r`` is the reference axis used by the ratio inequalities.
    Stored normalized to [0, 360).
    """

    a: float
    b: float
    a_prime: float
    b_prime: float
    r: float

    def __post_init__(self) -> None:
        for f in fields(self):
            object.__setattr__(self, f.name, normalize_angle(getattr(self, f.name)))

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.a, self.b, self.a_prime, self.b_prime, self.r)


def three_axes_config() -> AngleConfig:
    """Canonical maximal-violation configuration.

    Both primed settings sit on the reference axis and the three unprimed axes
    are mutually separated by 120 degrees (as directions; folded axis
    separations are 120/120/60, all with cos 2d = -1/2).
    """
    return AngleConfig(a=0.0, b=120.0, a_prime=240.0, b_prime=240.0, r=240.0)


@dataclass(frozen=True)
class ApparatusParams:
    """Detector geometry and efficiency for the cascade-photon model.

    eta:     detector quantum efficiency, in (0, 1].
    phi_ap:  aperture half-angle in radians, in (0, pi]. The subtended solid
             angle is 2*pi*(1 - cos(phi_ap)).
    theta:   angle between the two detector directions in radians. Only the
             back-to-back case theta = pi is supported by the closed-form
             angular correlation function.
    """

    eta: float
    phi_ap: float
    theta: float = math.pi

    def __post_init__(self) -> None:
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")
        if not (0.0 < self.phi_ap <= math.pi):
            raise ValueError(f"phi_ap must be in (0, pi], got {self.phi_ap}")
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta must be in [0, pi], got {self.theta}")


def _check_prob(name: str, p: float) -> float:
    if not math.isfinite(p):
        raise ValueError(f"{name} must be finite, got {p!r}")
    if p < -_PROB_EPS or p > 1.0 + _PROB_EPS:
        raise ValueError(f"{name} must be in [0, 1], got {p}")
    return min(max(float(p), 0.0), 1.0)


@dataclass(frozen=True)
class OutcomePdf:
    """Joint and single detection probabilities for one orientation pair.

    ``pp``/``pm``/``mp``/``mm`` are the four coincidence probabilities
    (first-side channel then second-side channel), ``s1_plus`` etc. the four
    single-detector probabilities. All are per emitted pair, so the joint
    entries sum to at most 1.
    """

    pp: float
    pm: float
    mp: float
    mm: float
    s1_plus: float = 0.0
    s1_minus: float = 0.0
    s2_plus: float = 0.0
    s2_minus: float = 0.0

    def __post_init__(self) -> None:
        for f in fields(self):
            object.__setattr__(self, f.name, _check_prob(f.name, getattr(self, f.name)))
        total = self.pp + self.pm + self.mp + self.mm
        if total > 1.0 + 4 * _PROB_EPS:
            raise ValueError(f"joint probabilities sum to {total} > 1")

    @property
    def joint_sum(self) -> float:
        return self.pp + self.pm + self.mp + self.mm


def correlation_E(pdf: OutcomePdf) -> float:
    """Correlation functional ``p++ - p+- - p-+ + p--``.

    Linear in the pdf and bounded by the joint sum in magnitude.
    """
    return pdf.pp - pdf.pm - pdf.mp + pdf.mm


@dataclass(frozen=True)
class InequalityReport:
    """Result of evaluating one inequality against one probability source.

    ``direction`` is "ge" when the classical constraint reads LHS >= bound and
    "le" for LHS <= bound. ``violated`` means the LHS lies strictly outside the
    bound beyond ``sigma`` standard errors plus a small absolute tolerance.
    ``violation_factor`` follows the usual magnitude conventions: |LHS| for
    bounds of -1, LHS/bound for positive bounds, raw LHS when the bound is 0.
    ``stderr`` and ``n_samples`` are 0 for analytic (closed-form or quadrature)
    evaluations.
    """

    name: str
    lhs: float
    bound: float
    direction: str
    violated: bool
    violation_factor: float
    stderr: float = 0.0
    n_samples: int = 0
    details: dict | None = None

    def __post_init__(self) -> None:
        if self.direction not in ("ge", "le"):
            raise ValueError(f"direction must be 'ge' or 'le', got {self.direction!r}")
        if not (self.stderr >= 0.0 or math.isnan(self.stderr)):
            raise ValueError(f"stderr must be >= 0, got {self.stderr}")
        if self.n_samples < 0:
            raise ValueError(f"n_samples must be >= 0, got {self.n_samples}")
