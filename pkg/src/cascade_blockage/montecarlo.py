"""Monte Carlo simulator used as an independent check of the analytic results.

Each realization places a Poisson number of base stations uniformly in the
disk of radius ``radius(N)``, gives each link an Exp(1) fade, samples a
blockage tree, and adds a virtual line-of-sight serving station with its
own Exp(1) fade (one per beam for the beamforming user).

Realizations are simulated in fixed-size blocks. Block ``b`` draws from the
stream ``SeedSequence(seed, spawn_key=(b,))``, so the output depends only
on ``(seed, n_samples, params)`` and never on how many workers ran the
blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import CoverageCurve, db_to_linear
from .beams import BeamConfig
from .blockage import BlockageTree, TreeBatch, blockage_count
from .geometry import CascadeGeometry
from .params import InvalidParameters, ModelParams

BLOCK_SIZE = 4096
MIN_SAMPLES = 100
STRATEGIES = ("omni", "best_beam", "random_beam")


@dataclass(frozen=True)
class Estimate:
    """Sample mean of an estimator with its standard error."""

    mean: float
    std_error: float
    sample_count: int
    seed: int

    @classmethod
    def from_count(cls, count: int, n: int, seed: int) -> "Estimate":
        mean = count / n
        var = mean * (1.0 - mean) * n / (n - 1)
        return cls(mean, math.sqrt(max(var, 0.0) / n), n, seed)


@dataclass(frozen=True)
class Realization:
    """One snapshot of the network seen from the origin.

    ``penetration`` is set instead of ``tree`` for the independent variant;
    it holds each link's ``K ** L`` draw.
    """

    r: np.ndarray
    phi: np.ndarray
    fades: np.ndarray
    serving_fades: np.ndarray
    tree: BlockageTree | None
    penetration: np.ndarray | None = None

    @property
    def n_bs(self) -> int:
        return len(self.r)


def _service_stages(params: ModelParams, truncate_stages: int | None) -> int:
    if params.is_infinite:
        if truncate_stages is None:
            raise InvalidParameters(
                "simulating an infinite cascade needs a truncation stage")
        return truncate_stages
    return params.stages if truncate_stages is None else min(truncate_stages, params.stages)


def tail_mean_bound(params: ModelParams, truncate_stages: int) -> float:
    """Mean interference from stages beyond ``truncate_stages`` (infinite model)."""
    volume = params.geometry.box_volume(params.variant)
    rho = params.growth_factor / 2.0
    if not 2.0 * rho < 1.0:
        return math.inf
    n0 = truncate_stages + 1
    # sum_{n >= n0} lam 2**n V rho**(n-1)
    return params.lam * volume * 2.0 ** n0 * rho ** (n0 - 1) / (1.0 - 2.0 * rho)


class RealizationBatch:
    """Many realizations stored as flat per-station arrays tagged by owner."""

    def __init__(self, params, geometry, n, owner, r, phi, fades, serving,
                 trees=None, penetration=None):
        self.params = params
        self.geometry = geometry
        self.n = n
        self.owner = owner
        self.r = r
        self.phi = phi
        self.fades = fades
        self.serving = serving
        self.trees = trees
        self.penetration = penetration
        self._attenuation = None

    @classmethod
    def sample(cls, params: ModelParams, rng: np.random.Generator, n: int,
               n_beams: int = 1, stages: int | None = None) -> "RealizationBatch":
        stages = _service_stages(params, stages)
        geometry = CascadeGeometry(params.base_radius, stages)
        outer = geometry.outer_radius
        counts = rng.poisson(params.lam * math.pi * outer ** 2, size=n)
        total = int(counts.sum())
        owner = np.repeat(np.arange(n), counts)
        r = outer * np.sqrt(rng.random(total))
        phi = 2.0 * math.pi * rng.random(total)
        fades = rng.exponential(size=total)
        serving = rng.exponential(size=(n, n_beams))
        trees = penetration = None
        if params.variant == "independent":
            # r == 0 has probability zero; guard the count anyway
            n_r = geometry.stage_of_radius(np.maximum(r, 1e-300), params.radius_mode)
            penetration = np.power(float(params.K), rng.binomial(n_r, params.p).astype(float))
        else:
            trees = TreeBatch.sample(params, rng, n, stages)
        return cls(params, geometry, n, owner, r, phi, fades, serving, trees, penetration)

    def attenuation(self) -> np.ndarray:
        if self._attenuation is None:
            if self.penetration is not None:
                self._attenuation = self.penetration
            else:
                counts = self.trees.counts(self.owner, self.r, self.phi)
                self._attenuation = np.power(float(self.params.K), counts.astype(float))
        return self._attenuation

    def beam_interference(self, beams: BeamConfig) -> np.ndarray:
        """Interference per realization and beam, shape ``(n, 2**k)``."""
        power = self.fades * self.attenuation()
        nb = beams.n_beams
        idx = self.owner * nb + beams.beam_of(self.phi)
        return np.bincount(idx, weights=power, minlength=self.n * nb).reshape(self.n, nb)

    def stage_interference(self) -> np.ndarray:
        """Interference per realization and annulus, shape ``(n, N)``."""
        stages = self.geometry.max_stage
        power = self.fades * self.attenuation()
        annulus = np.searchsorted(self.geometry.radii(), self.r, side="left") - 1
        annulus = np.clip(annulus, 0, stages - 1)
        idx = self.owner * stages + annulus
        return np.bincount(idx, weights=power, minlength=self.n * stages).reshape(self.n, stages)

    def realization(self, i: int) -> Realization:
        sel = self.owner == i
        return Realization(
            self.r[sel].copy(), self.phi[sel].copy(), self.fades[sel].copy(),
            self.serving[i].copy(),
            None if self.trees is None else self.trees.tree(i),
            None if self.penetration is None else self.penetration[sel].copy())


def sample_realization(params: ModelParams, rng: np.random.Generator,
                       beams: BeamConfig | None = None,
                       truncate_stages: int | None = None) -> Realization:
    n_beams = 1 if beams is None else beams.n_beams
    return RealizationBatch.sample(params, rng, 1, n_beams, truncate_stages).realization(0)


def interference(realization: Realization, params: ModelParams,
                 beam: int | None = None, beams: BeamConfig | None = None) -> float:
    """Total interference ``sum h_x K**N_x``, optionally inside one beam (0-based).

    Evaluated link by link through :func:`blockage_count`; the batch engine
    is vectorized separately, so the two cross-check each other.
    """
    if beam is not None and beams is None:
        raise ValueError("a beam index needs a beam configuration")
    total = 0.0
    for i in range(realization.n_bs):
        r, phi = float(realization.r[i]), float(realization.phi[i])
        if beam is not None and beams.beam_of(phi) != beam:
            continue
        if realization.penetration is not None:
            att = float(realization.penetration[i])
        else:
            att = float(params.K) ** blockage_count(realization.tree, (r, phi))
        total += float(realization.fades[i]) * att
    return total


# -- block engine -----------------------------------------------------------

def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _blocks(n_samples: int):
    for b, start in enumerate(range(0, n_samples, BLOCK_SIZE)):
        yield b, min(BLOCK_SIZE, n_samples - start)


def _coverage_block(task):
    params, beams, theta, stages, seed, block, n = task
    batch = RealizationBatch.sample(params, _block_rng(seed, block), n, beams.n_beams, stages)
    interf = batch.beam_interference(beams)
    signal = beams.gain * batch.serving
    best = np.empty(len(theta), dtype=np.int64)
    first = np.empty(len(theta), dtype=np.int64)
    for j, t in enumerate(theta):
        covered = signal >= t * interf
        best[j] = np.count_nonzero(covered.any(axis=1))
        first[j] = np.count_nonzero(covered[:, 0])
    return best, first


def _conditional_block(task):
    params, beams, theta, stages, seed, block, n, source, target = task
    batch = RealizationBatch.sample(params, _block_rng(seed, block), n, beams.n_beams, stages)
    covered = beams.gain * batch.serving >= theta * batch.beam_interference(beams)
    src = covered[:, source - 1]
    tgt = covered[:, target - 1]
    return np.array([np.count_nonzero(src & tgt), np.count_nonzero(src),
                     np.count_nonzero(tgt & ~src), np.count_nonzero(~src)])


def _interference_block(task):
    params, beams, stages, seed, block, n = task
    batch = RealizationBatch.sample(params, _block_rng(seed, block), n, beams.n_beams, stages)
    return batch.beam_interference(beams)


def _run(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _check_run(n_samples: int, seed: int):
    if n_samples < MIN_SAMPLES:
        raise InvalidParameters(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    if int(seed) != seed or seed < 0:
        raise InvalidParameters(f"seed must be a non-negative integer, got {seed}")


def simulate_beam_coverage(params: ModelParams, beams: BeamConfig, theta_db,
                           n_samples: int, seed: int, workers: int = 1,
                           truncate_stages: int | None = None) -> dict:
    """Best-beam and first-beam coverage curves from one set of realizations."""
    _check_run(n_samples, seed)
    stages = _service_stages(params, truncate_stages)
    theta_db = np.atleast_1d(np.asarray(theta_db, dtype=float))
    theta = db_to_linear(theta_db)
    tasks = [(params, beams, theta, stages, seed, b, n) for b, n in _blocks(n_samples)]
    results = _run(_coverage_block, tasks, workers)
    best = sum(r[0] for r in results)
    first = sum(r[1] for r in results)
    meta = {"params": params, "k": beams.k, "gain": beams.gain,
            "n_samples": n_samples, "seed": seed, "stages_simulated": stages}
    if params.is_infinite:
        meta["tail_mean_bound"] = tail_mean_bound(params, stages)
    curves = {}
    for name, counts in (("best_beam", best), ("random_beam", first)):
        est = [Estimate.from_count(int(c), n_samples, seed) for c in counts]
        curves[name] = CoverageCurve(
            theta_db, [e.mean for e in est], dict(meta, strategy=name, estimates=est),
            np.array([e.std_error for e in est]))
    return curves


def estimate_coverage(params: ModelParams, beams: BeamConfig | None, theta_db,
                      strategy: str, n_samples: int, seed: int, workers: int = 1,
                      truncate_stages: int | None = None) -> CoverageCurve:
    """Empirical coverage with one :class:`Estimate` per threshold.

    ``omni`` ignores ``beams`` and uses one unit-gain beam covering the plane.
    """
    if strategy not in STRATEGIES:
        raise InvalidParameters(f"strategy must be one of {STRATEGIES}")
    if strategy == "omni":
        curves = simulate_beam_coverage(params, BeamConfig(0), theta_db, n_samples,
                                        seed, workers, truncate_stages)
        curve = curves["random_beam"]
        curve.metadata["strategy"] = "omni"
        return curve
    if beams is None:
        raise InvalidParameters("beam strategies need a beam configuration")
    return simulate_beam_coverage(params, beams, theta_db, n_samples, seed,
                                  workers, truncate_stages)[strategy]


def _ratio_estimate(joint: int, marginal: int, n: int, seed: int) -> Estimate:
    # delta method for mean(a)/mean(b) with indicators a <= b
    if marginal == 0:
        return Estimate(math.nan, math.nan, n, seed)
    a, b = joint / n, marginal / n
    ratio = a / b
    c = n / (n - 1)
    var_a = a * (1 - a) * c
    var_b = b * (1 - b) * c
    cov = a * (1 - b) * c
    var = (var_a - 2 * ratio * cov + ratio ** 2 * var_b) / (n * b * b)
    return Estimate(ratio, math.sqrt(max(var, 0.0)), n, seed)


def estimate_conditional(params: ModelParams, beams: BeamConfig, theta: float,
                         target: int, n_samples: int, seed: int, source: int = 1,
                         given: str = "coverage", workers: int = 1,
                         truncate_stages: int | None = None) -> Estimate:
    """Ratio estimate of ``P(SIR_target > theta | source covered / in outage)``."""
    _check_run(n_samples, seed)
    for l in (source, target):
        if not 1 <= l <= beams.n_beams:
            raise InvalidParameters(f"beam index must lie in 1..{beams.n_beams}")
    if given not in ("coverage", "outage"):
        raise InvalidParameters("given must be 'coverage' or 'outage'")
    stages = _service_stages(params, truncate_stages)
    tasks = [(params, beams, float(theta), stages, seed, b, n, source, target)
             for b, n in _blocks(n_samples)]
    counts = sum(_run(_conditional_block, tasks, workers))
    if given == "coverage":
        return _ratio_estimate(int(counts[0]), int(counts[1]), n_samples, seed)
    return _ratio_estimate(int(counts[2]), int(counts[3]), n_samples, seed)


def sample_interference(params: ModelParams, n_samples: int, seed: int,
                        beams: BeamConfig | None = None, workers: int = 1,
                        truncate_stages: int | None = None) -> np.ndarray:
    """Per-realization beam interference, shape ``(n_samples, 2**k)``."""
    _check_run(n_samples, seed)
    beams = BeamConfig(0) if beams is None else beams
    stages = _service_stages(params, truncate_stages)
    tasks = [(params, beams, stages, seed, b, n) for b, n in _blocks(n_samples)]
    return np.concatenate(_run(_interference_block, tasks, workers))
