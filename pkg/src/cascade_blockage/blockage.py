"""Sampled blockage environments and per-link blockage counts.

A :class:`BlockageTree` stores one bit per potential blockage arc, stage by
stage. The basic variant has ``2**n`` arcs on circle ``n``, each blocked
independently with probability ``p``. The less-correlated variant has
``2**(n+1)`` independent half-width arcs. The periodic variant also uses
half-width arcs but blocks exactly one arc of every sibling pair, which is
the arrangement whose transform factorizes as ``L(Ks) L(s) A(s, V)``. The
independent variant has no tree; every link draws its own obstacle count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CascadeGeometry, arcs_per_stage, normalize_angle
from .params import InvalidParameters, ModelParams

TREE_VARIANTS = ("basic", "less_correlated", "periodic")


def _stage_bits(variant: str, n: int, p: float, rng: np.random.Generator, size=()):
    """Draw the stage-``n`` bits of ``size`` independent trees."""
    width = arcs_per_stage(n, variant)
    if variant == "periodic":
        pairs = width // 2
        choice = rng.integers(0, 2, size=(*size, pairs))
        bits = np.zeros((*size, width), dtype=np.uint8)
        idx = 2 * np.arange(pairs) + choice
        np.put_along_axis(bits, idx, 1, axis=-1)
        return bits
    return (rng.random((*size, width)) < p).astype(np.uint8)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BlockageTree:
    """One realization of the blocked/clear state of every arc.

    ``stage_bits[n - 1]`` holds the bits of circle ``n``; a 1 means blocked.
    """

    variant: str
    geometry: CascadeGeometry
    stage_bits: tuple

    def __post_init__(self):
        if self.variant not in TREE_VARIANTS:
            raise InvalidParameters(f"no blockage tree for variant {self.variant!r}")
        for n, bits in enumerate(self.stage_bits, start=1):
            if bits.shape != (arcs_per_stage(n, self.variant),):
                raise ValueError(f"stage {n} has {bits.shape} bits")
        if self.variant == "periodic":
            for n, bits in enumerate(self.stage_bits, start=1):
                if np.any(bits.reshape(-1, 2).sum(axis=1) != 1):
                    raise ValueError(f"stage {n} violates the one-blocked-per-pair rule")

    @property
    def n_stages(self) -> int:
        return len(self.stage_bits)

    def is_blocked(self, n: int, arc: int) -> bool:
        return bool(self.stage_bits[n - 1][arc])

    def dump(self) -> str:
        """Text dump: one line per stage, bits as 0/1 characters."""
        return "\n".join("".join("1" if b else "0" for b in bits)
                         for bits in self.stage_bits) + "\n"

    @classmethod
    def from_text(cls, text: str, variant: str = "basic",
                  geometry: CascadeGeometry | None = None) -> "BlockageTree":
        rows = [line.strip() for line in text.splitlines() if line.strip()]
        bits = tuple(_frozen(np.array([c == "1" for c in row], dtype=np.uint8))
                     for row in rows)
        if geometry is None:
            geometry = CascadeGeometry(1.0, len(rows))
        return cls(variant, geometry, bits)


def sample_tree(params: ModelParams, rng: np.random.Generator) -> BlockageTree:
    """Sample one blockage tree for a finite cascade."""
    if params.is_infinite:
        raise InvalidParameters(
            "cannot sample an infinite tree; choose a truncation stage first")
    if params.variant not in TREE_VARIANTS:
        raise InvalidParameters(
            "the independent variant draws blockage per link, not as a tree")
    bits = tuple(_frozen(_stage_bits(params.variant, n, params.p, rng))
                 for n in range(1, params.stages + 1))
    return BlockageTree(params.variant, params.geometry, bits)


def blockage_count(tree: BlockageTree, point) -> int:
    """Number of blocked arcs crossed by the segment from the origin to ``point``.

    ``point`` is ``(r, phi)`` in polar coordinates. The segment is radial,
    so it meets exactly one arc per circle with radius below ``r``.
    """
    r, phi = point
    if r <= 0:
        raise ValueError("point must lie away from the origin")
    phi = normalize_angle(phi)
    geo = tree.geometry
    count = 0
    for n in range(1, tree.n_stages + 1):
        if geo.radius(n) >= r:
            break
        count += tree.is_blocked(n, geo.arc_index(n, phi, tree.variant))
    return count


def attenuation(tree: BlockageTree, point, K: float) -> float:
    """Penetration factor ``K ** N_x`` of the link to ``point`` (``0**0 == 1``)."""
    return float(K) ** blockage_count(tree, point)


def independent_penetration(params: ModelParams, r: float,
                            rng: np.random.Generator) -> float:
    """Draw ``K ** L`` with ``L ~ Binomial(n(r), p)`` for one link."""
    n = params.geometry.stage_of_radius(r, params.radius_mode)
    return float(params.K) ** int(rng.binomial(n, params.p))


class TreeBatch:
    """Dense bits of many independent trees, used by the simulator.

    ``stage_bits[n - 1]`` has shape ``(n_trees, arcs_per_stage(n))``.
    """

    def __init__(self, variant: str, geometry: CascadeGeometry, stage_bits):
        self.variant = variant
        self.geometry = geometry
        self.stage_bits = tuple(stage_bits)

    @classmethod
    def sample(cls, params: ModelParams, rng: np.random.Generator, n_trees: int,
               stages: int | None = None) -> "TreeBatch":
        stages = params.stages if stages is None else stages
        if stages is None:
            raise InvalidParameters("a truncation stage is required")
        bits = [_stage_bits(params.variant, n, params.p, rng, size=(n_trees,))
                for n in range(1, stages + 1)]
        return cls(params.variant, CascadeGeometry(params.base_radius, stages), bits)

    def __len__(self) -> int:
        return self.stage_bits[0].shape[0] if self.stage_bits else 0

    def tree(self, i: int) -> BlockageTree:
        return BlockageTree(self.variant, self.geometry,
                            tuple(_frozen(b[i].copy()) for b in self.stage_bits))

    def counts(self, owner: np.ndarray, r: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """Blockage counts of points ``(r, phi)`` seen through tree ``owner``."""
        count = np.zeros(r.shape, dtype=np.int64)
        for n, bits in enumerate(self.stage_bits, start=1):
            inside = r > self.geometry.radius(n)
            if not inside.any():
                break
            width = bits.shape[1]
            arc = np.minimum((phi[inside] * (width / (2 * np.pi))).astype(np.int64),
                             width - 1)
            count[inside] += bits[owner[inside], arc]
        return count
