"""Closed-form quantum predictions for the cascade-photon two-channel experiment.

An atomic cascade emits photon pairs with zero total angular momentum. With
detectors of quantum efficiency ``eta`` behind apertures of solid angle
``Omega`` and two-channel polarizers at axes ``a`` and ``b``, the joint
detection probabilities per emitted pair are

    p++ = p-- = C * (1 + cos 2(a - b))
    p+- = p-+ = C * (1 - cos 2(a - b)),     C = eta^2 (Omega / 8 pi)^2 g,

where ``g`` is the angular correlation factor of the finite apertures, and
every single-detector probability equals ``eta * Omega / (8 pi)``. The sum of
the four joint entries is ``4 C`` independent of the axes, which is what makes
the ratio-form inequalities insensitive to ``eta`` and ``Omega``.

Note the singles and the joints are quoted on the scales conventionally used
for this experiment; they are not mutually normalized into a single
probability space (the joints carry the ``g`` factor, the singles do not).
Both are reported exactly as modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ApparatusParams, OutcomePdf, fold_angle_diff
from .errors import InvalidInputError

__all__ = [
    "QuantumModel",
    "angular_correlation_g",
    "solid_angle",
]

_THETA_TOL = 1e-12


def solid_angle(phi_ap: float) -> float:
    """Solid angle in steradians subtended by an aperture of half-angle ``phi_ap``.

    ``Omega = 2 pi (1 - cos phi_ap)`` with ``phi_ap`` in (0, pi] radians.
    """
    if not math.isfinite(phi_ap) or not (0.0 < phi_ap <= math.pi):
        raise InvalidInputError(f"phi_ap must be in (0, pi], got {phi_ap!r}")
    return 2.0 * math.pi * (1.0 - math.cos(phi_ap))


def phi_from_solid_angle(omega: float) -> float:
    """Inverse of :func:`solid_angle`: aperture half-angle for a given Omega."""
    if not math.isfinite(omega) or not (0.0 < omega <= 4.0 * math.pi):
        raise InvalidInputError(f"omega must be in (0, 4 pi], got {omega!r}")
    return math.acos(1.0 - omega / (2.0 * math.pi))


def angular_correlation_g(phi_ap: float, theta: float = math.pi) -> float:
    """Angular correlation factor for back-to-back detectors.

    Only ``theta = pi`` (detectors on opposite sides of the source) has a
    closed form here:

        g(pi, phi) = 1 + (1/8) cos^2(phi) (1 + cos(phi))^2

    Other detector geometries are rejected rather than approximated.
    """
    if not math.isfinite(phi_ap) or not (0.0 < phi_ap <= math.pi):
        raise InvalidInputError(f"phi_ap must be in (0, pi], got {phi_ap!r}")
    if abs(theta - math.pi) > _THETA_TOL:
        raise InvalidInputError(
            f"angular correlation is only modeled for theta = pi, got theta = {theta}"
        )
    c = math.cos(phi_ap)
    return 1.0 + 0.125 * c * c * (1.0 + c) ** 2


@dataclass(frozen=True)
class QuantumModel:
    """Quantum predictor for a fixed apparatus.

    The derived constant ``C = eta^2 (Omega/8pi)^2 g`` scales every joint
    probability; it is strictly positive for valid parameters.
    """

    params: ApparatusParams

    @classmethod
    def from_omega(cls, eta: float = 1.0, omega: float = math.pi,
                   theta: float = math.pi) -> "QuantumModel":
        """Build a model from the solid angle instead of the aperture half-angle."""
        return cls(ApparatusParams(eta=eta, phi_ap=phi_from_solid_angle(omega), theta=theta))

    @property
    def omega(self) -> float:
        return solid_angle(self.params.phi_ap)

    @property
    def g(self) -> float:
        return angular_correlation_g(self.params.phi_ap, self.params.theta)

    @property
    def scale(self) -> float:
        """The joint-probability scale C."""
        s = self.params.eta * self.omega / (8.0 * math.pi)
        return s * s * self.g

    @property
    def single(self) -> float:
        """Single-detector probability ``eta * Omega / (8 pi)``, any channel."""
        return self.params.eta * self.omega / (8.0 * math.pi)

    def joint_pdf(self, a: float, b: float) -> OutcomePdf:
        """Joint and single detection probabilities for axes ``a``, ``b`` (degrees)."""
        c2 = math.cos(2.0 * math.radians(fold_angle_diff(a, b)))
        C = self.scale
        s = self.single
        return OutcomePdf(
            pp=C * (1.0 + c2), pm=C * (1.0 - c2), mp=C * (1.0 - c2), mm=C * (1.0 + c2),
            s1_plus=s, s1_minus=s, s2_plus=s, s2_minus=s,
        )

    # One-channel quantities used by the CH and FC comparators. The removed-
    # polarizer rates follow from summing that side's channels.
    def coincidence(self, delta_deg: float) -> float:
        """p(delta): both ordinary channels fire, axes separated by ``delta_deg``."""
        return self.joint_pdf(0.0, delta_deg).pp

    def coincidence_one_removed(self) -> float:
        """p(x, inf): one polarizer removed; half of all pairs reach that side."""
        return 2.0 * self.scale

    def coincidence_both_removed(self) -> float:
        """p(inf, inf): no polarizers; equals the angle-independent joint sum 4C."""
        return 4.0 * self.scale
