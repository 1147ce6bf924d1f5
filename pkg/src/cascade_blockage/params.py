"""Model parameters and the error types shared by every solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .geometry import CascadeGeometry

VARIANTS = ("basic", "less_correlated", "periodic", "independent")
RADIUS_MODES = ("geometric", "paper_floor")


class CascadeError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameters(CascadeError, ValueError):
    """A parameter set violates a model invariant."""


class DivergentRegimeError(CascadeError):
    """The infinite cascade has unbounded mean interference for these parameters."""


class IterationBudgetExhausted(CascadeError):
    """A fixed-point iteration did not meet its tolerance in time."""


class NegligibleConditioningEvent(CascadeError, ZeroDivisionError):
    """A conditional probability was requested on an event of ~zero probability."""


@dataclass(frozen=True)
class ModelParams:
    """Blockage environment seen by the typical user at the origin.

    Parameters
    ----------
    lam : float
        Base-station density per unit area.
    base_radius : float
        Radius ``R`` of the first blockage circle.
    p : float
        Probability that a potential blockage arc is blocked. Ignored by the
        periodic variant, where it is 1/2 by construction.
    K : float
        Power penetration factor applied per blocked arc crossed.
    stages : int or None
        Number of cascade stages ``N``; ``None`` is the infinite cascade.
    variant : str
        One of ``basic``, ``less_correlated``, ``periodic``, ``independent``.
    radius_mode : str
        How the independent variant counts obstacles at distance ``r``.
    """

    lam: float
    base_radius: float = 1.0
    p: float = 0.5
    K: float = 0.1
    stages: int | None = 5
    variant: str = "basic"
    radius_mode: str = "geometric"
    geometry: CascadeGeometry = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidParameters(
                f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.radius_mode not in RADIUS_MODES:
            raise InvalidParameters(
                f"radius_mode must be one of {RADIUS_MODES}, got {self.radius_mode!r}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise InvalidParameters(f"lambda must be >= 0, got {self.lam}")
        if not (math.isfinite(self.base_radius) and self.base_radius > 0):
            raise InvalidParameters(f"R must be > 0, got {self.base_radius}")
        # p = 0 is admitted as a degenerate no-blockage environment.
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParameters(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 <= self.K <= 1.0:
            raise InvalidParameters(f"K must lie in [0, 1], got {self.K}")
        if self.stages is not None:
            if isinstance(self.stages, bool) or int(self.stages) != self.stages or self.stages < 1:
                raise InvalidParameters(
                    f"stages must be a positive integer or None, got {self.stages!r}")
            object.__setattr__(self, "stages", int(self.stages))
        else:
            if self.variant == "periodic":
                raise InvalidParameters(
                    "the periodic variant is only defined for a finite number of stages")
            if self.p <= 0.5:
                raise InvalidParameters(
                    f"an infinite cascade requires p > 1/2, got p={self.p}")
        object.__setattr__(
            self, "geometry", CascadeGeometry(self.base_radius, self.stages))

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def blocking_probability(self) -> float:
        """Marginal probability that one arc is blocked."""
        return 0.5 if self.variant == "periodic" else self.p

    @property
    def is_infinite(self) -> bool:
        return self.stages is None

    @property
    def growth_factor(self) -> float:
        """``2 (q + pK)``: ratio of mean interference between consecutive stages."""
        p = self.blocking_probability
        return 2.0 * ((1.0 - p) + p * self.K)

    def check_convergent(self):
        """Raise :class:`DivergentRegimeError` if the infinite cascade diverges."""
        if self.is_infinite and not self.growth_factor < 1.0:
            raise DivergentRegimeError(
                f"divergent regime: infinite cascade needs 2(q + pK) < 1, "
                f"got {self.growth_factor:.6g} (p={self.p}, K={self.K})")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)
