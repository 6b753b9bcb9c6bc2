"""System parameters shared by the analytic and simulation code.

All values are stored in linear units. Conversion from dB happens once, at the
configuration boundary (see :func:`db_to_linear`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .errors import ParameterError

ACCESS_MODES = ("co-channel", "orthogonal")

# Below this device-to-BS density ratio the "many devices per cell" picture
# behind the analysis degrades; we warn but do not refuse.
DENSITY_RATIO_WARN = 5.0


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_mw(x_dbm: float) -> float:
    return db_to_linear(x_dbm)


def jm_radius_from_power(p_max: float, p_b: float, alpha: float, epsilon: float) -> float:
    """Largest serving distance at which ``p_b * d**(alpha*epsilon) <= p_max``.

    For ``epsilon == 0`` the transmit power does not depend on distance, so the
    budget is met everywhere (``inf``) or nowhere (``0``).
    """
    if p_max <= 0 or p_b <= 0:
        raise ValueError("powers must be positive")
    if alpha <= 2:
        raise ValueError("alpha must exceed 2")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if epsilon == 0.0:
        return math.inf if p_max >= p_b else 0.0
    return (p_max / p_b) ** (1.0 / (alpha * epsilon))


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    severity: str = "error"  # or "warning"


@dataclass(frozen=True)
class NetworkParams:
    """Homogeneous network parameters.

    Defaults are the reference configuration: one BS per 10^4 m^2, twenty
    devices per BS, a 40 m coverage radius, 3 dB update threshold and 0 dB
    D2D threshold. ``p_b`` and ``p_d`` default to 100 dBm each; only their
    ratio enters any result.
    """

    lambda_b: float = 1e-4
    lambda_d: float = 20e-4
    q_d: float = 0.3
    r_d: float = 2.0
    alpha: float = 4.0
    epsilon: float = 0.0
    p_b: float = 1e10
    p_d: float = 1e10
    p_max: Optional[float] = None
    jm_radius: Optional[float] = 40.0
    beta_b: float = field(default_factory=lambda: db_to_linear(3.0))
    beta_d: float = 1.0
    bandwidth: float = 200e3
    access_mode: str = "co-channel"

    def __post_init__(self):
        if self.jm_radius is None:
            if self.p_max is None:
                raise ValueError("either jm_radius or p_max must be given")
            object.__setattr__(
                self,
                "jm_radius",
                jm_radius_from_power(self.p_max, self.p_b, self.alpha, self.epsilon),
            )

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def power_ratio(self) -> float:
        """p_b / p_d."""
        return self.p_b / self.p_d

    @property
    def lambda_d_prime(self) -> float:
        """Density of devices left after removing one scheduled device per BS."""
        return self.lambda_d - self.lambda_b

    @property
    def orthogonal(self) -> bool:
        return self.access_mode == "orthogonal"

    @property
    def density_ratio(self) -> float:
        return self.lambda_d / self.lambda_b

    @property
    def coverage(self) -> float:
        """Fraction of devices within ``jm_radius`` of their nearest BS."""
        return -math.expm1(-math.pi * self.lambda_b * self.jm_radius**2)

    def with_(self, **changes) -> "NetworkParams":
        return replace(self, **changes)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


def validate(params: NetworkParams) -> list[Issue]:
    """Return every violated invariant (errors and warnings)."""
    issues = []

    def err(code, msg):
        issues.append(Issue(code, msg, "error"))

    if not params.alpha > 2:
        err("ALPHA_TOO_SMALL", f"alpha={params.alpha} must exceed 2")
    if not params.lambda_b > 0:
        err("DENSITY_NONPOSITIVE", f"lambda_b={params.lambda_b} must be positive")
    if not params.lambda_d > 0:
        err("DENSITY_NONPOSITIVE", f"lambda_d={params.lambda_d} must be positive")
    if params.lambda_b > 0 and params.lambda_d > 0:
        if params.lambda_d < params.lambda_b:
            err("DENSITY_ORDER", "lambda_d must not be smaller than lambda_b")
        elif params.lambda_d / params.lambda_b < DENSITY_RATIO_WARN:
            issues.append(
                Issue(
                    "DENSITY_RATIO_LOW",
                    f"lambda_d/lambda_b={params.lambda_d / params.lambda_b:g} "
                    f"is below {DENSITY_RATIO_WARN:g}; empty cells become likely",
                    "warning",
                )
            )
    for name in ("q_d", "epsilon"):
        v = getattr(params, name)
        if not 0.0 <= v <= 1.0:
            err("PROBABILITY_OUT_OF_RANGE", f"{name}={v} must lie in [0, 1]")
    for name in ("r_d", "p_b", "p_d", "beta_b", "beta_d", "bandwidth"):
        v = getattr(params, name)
        if not (v > 0 and math.isfinite(v)):
            err("NONPOSITIVE_VALUE", f"{name}={v} must be positive and finite")
    if params.p_max is not None and not params.p_max > 0:
        err("NONPOSITIVE_VALUE", f"p_max={params.p_max} must be positive")
    J = params.jm_radius
    if J is None or not J > 0:
        err("JM_RADIUS_INVALID", f"jm_radius={J} must be positive")
    elif not math.isfinite(J):
        err(
            "JM_RADIUS_INVALID",
            "jm_radius is infinite; negative moments of the update success "
            "probability (and hence the AoI moments) are unbounded in that "
            "limit, so a finite radius must be supplied",
        )
    if params.access_mode not in ACCESS_MODES:
        err("ACCESS_MODE_UNKNOWN", f"access_mode={params.access_mode!r} not in {ACCESS_MODES}")
    return issues


def check(params: NetworkParams) -> NetworkParams:
    """Raise :class:`ParameterError` on any error; emit warnings for the rest."""
    issues = validate(params)
    errors = [i for i in issues if i.severity == "error"]
    if errors:
        raise ParameterError(errors)
    for i in issues:
        warnings.warn(f"{i.code}: {i.message}", stacklevel=2)
    return params
