"""Radial cascade geometry: circle radii, equal-volume boxes and arc indexing.

Stage ``n`` is the circle of radius ``R * sqrt(2**n - 1)``. The annulus
between circles ``n - 1`` and ``n`` is split into ``2**n`` boxes of equal
area ``pi R**2 / 2``, and the circle itself carries ``2**n`` potential
blockage arcs (``2**(n + 1)`` half-width arcs for the finer variants).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# variants whose stage-n circle is cut into 2**(n+1) arcs instead of 2**n
HALF_ARC_VARIANTS = ("less_correlated", "periodic")


def normalize_angle(phi):
    """Map an angle (or array of angles) into ``[0, 2 pi)``."""
    out = np.mod(phi, TWO_PI)
    # np.mod can return exactly 2 pi for tiny negative inputs
    out = np.where(out >= TWO_PI, 0.0, out)
    return float(out) if np.ndim(out) == 0 else out


def arcs_per_stage(n: int, variant: str = "basic") -> int:
    """Number of potential blockage arcs on circle ``n``."""
    return 2 ** (n + 1) if variant in HALF_ARC_VARIANTS else 2 ** n


@dataclass(frozen=True)
class CascadeGeometry:
    """Circle radii and box volumes of a binary equal-volume cascade.

    ``max_stage=None`` describes the unbounded cascade.
    """

    base_radius: float = 1.0
    max_stage: int | None = None

    def __post_init__(self):
        if not self.base_radius > 0:
            raise ValueError(f"base_radius must be positive, got {self.base_radius}")
        if self.max_stage is not None and self.max_stage < 1:
            raise ValueError(f"max_stage must be >= 1, got {self.max_stage}")

    def radius(self, n):
        """Radius of circle ``n``; ``radius(0) == 0``."""
        n_arr = np.asarray(n)
        if np.any(n_arr < 0):
            raise ValueError("stage index must be non-negative")
        r = self.base_radius * np.sqrt(np.exp2(n_arr) - 1.0)
        return float(r) if r.ndim == 0 else r

    def radii(self, upto: int | None = None) -> np.ndarray:
        """Radii of circles ``0..upto`` (default: ``0..max_stage``)."""
        if upto is None:
            if self.max_stage is None:
                raise ValueError("an unbounded cascade needs an explicit stage count")
            upto = self.max_stage
        return self.radius(np.arange(upto + 1))

    @property
    def outer_radius(self) -> float:
        if self.max_stage is None:
            return math.inf
        return self.radius(self.max_stage)

    def box_volume(self, variant: str = "basic", beam_split: int = 0) -> float:
        """Area of one box.

        ``beam_split`` is the number of binary angular subdivisions of a basic
        box, used when beams cut boxes into sectors.
        """
        if beam_split < 0:
            raise ValueError("beam_split must be non-negative")
        volume = math.pi * self.base_radius ** 2 / 2.0
        if variant == "less_correlated":
            return volume / 2.0
        return volume / 2 ** beam_split

    def annulus_area(self, n: int) -> float:
        """Area between circles ``n - 1`` and ``n``."""
        if n < 1:
            raise ValueError("annulus index starts at 1")
        return math.pi * 2 ** (n - 1) * self.base_radius ** 2

    def arc_index(self, n: int, phi, variant: str = "basic"):
        """Index of the stage-``n`` arc containing angle ``phi``.

        Arcs are half-open ``[lo, hi)`` and numbered counter-clockwise from 0.
        """
        if n < 1:
            raise ValueError("arc stages start at 1")
        phi_arr = np.asarray(phi, dtype=float)
        if np.any((phi_arr < 0) | (phi_arr >= TWO_PI)) or np.any(np.isnan(phi_arr)):
            raise ValueError("angle must lie in [0, 2*pi)")
        count = arcs_per_stage(n, variant)
        idx = np.minimum(np.floor(phi_arr * (count / TWO_PI)).astype(np.int64), count - 1)
        return int(idx) if idx.ndim == 0 else idx

    def stage_of_radius(self, r, mode: str = "geometric"):
        """Number of blockage circles strictly inside distance ``r``.

        ``geometric`` counts circles with ``radius(n) < r`` (clamped to the
        stage budget); ``paper_floor`` returns ``floor(r)``.
        """
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr <= 0):
            raise ValueError("radius must be positive")
        if mode == "paper_floor":
            out = np.floor(r_arr).astype(np.int64)
        elif mode == "geometric":
            # estimate via the closed form, then fix rounding against the radii
            est = np.ceil(np.log2(1.0 + (r_arr / self.base_radius) ** 2)).astype(np.int64) - 1
            est = np.maximum(est, 0)
            est = est + (self.radius(est + 1) < r_arr)
            est = est - ((est > 0) & (self.radius(np.maximum(est, 1)) >= r_arr))
            out = est
            if self.max_stage is not None:
                out = np.minimum(out, self.max_stage)
        else:
            raise ValueError(f"unknown radius mode {mode!r}")
        return int(out) if out.ndim == 0 else out
