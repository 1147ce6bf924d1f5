"""Laplace transforms of the total interference and the resulting coverage.

Every cascade variant obeys a backward recursion over stages,

    M_n(s) = combine(M_{n+1}(K s), M_{n+1}(s)) * A(s, V),

where ``A(s, V) = exp(-lam V s / (1 + s))`` is the transform of one box of
Rayleigh-faded interferers and ``combine`` is ``p b**2 + q c**2`` for the
random cascades and ``b * c`` for the periodic one. A stage-n value is only
ever needed at ``s * K**m``, so the memo is keyed on ``(stage, m, s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .params import (DivergentRegimeError, InvalidParameters,
                     IterationBudgetExhausted, ModelParams)

INDEPENDENT_TAIL_RTOL = 1e-12


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def _shot_fraction(s):
    """``s / (1 + s)``, extended by continuity to ``s = inf``."""
    if isinstance(s, (float, int)):
        return 1.0 if math.isinf(s) else s / (1.0 + s)
    s = np.asarray(s, dtype=float)
    with np.errstate(invalid="ignore"):
        return np.where(np.isinf(s), 1.0, s / (1.0 + s))


def box_lt(s, volume, lam):
    """Transform ``E exp(-s A(V))`` of the interference of one box.

    The box holds a Poisson(``lam * volume``) number of unit-power
    interferers with Exp(1) fades.
    """
    if isinstance(s, (float, int)):
        return math.exp(-lam * volume * _shot_fraction(float(s)))
    return np.exp(-lam * volume * _shot_fraction(s))


def _map_scalar(f: Callable[[float], float], s):
    if np.ndim(s) == 0:
        return f(float(s))
    s = np.asarray(s, dtype=float)
    return np.array([f(float(x)) for x in s.ravel()]).reshape(s.shape)


def _scaled(s: float, K: float, m: int) -> float:
    # s * K**m without inf * 0 for K = 0
    if m == 0:
        return s
    if K == 0.0:
        return 0.0
    return s * K ** m


class FixedPoint(NamedTuple):
    value: float
    iterations: int


class AnalyticSolver:
    """Memoized evaluator of the per-stage transforms of one model.

    Parameters
    ----------
    params : ModelParams
    tolerance : float
        Sup-norm stopping threshold for the infinite-cascade iteration.
    max_iterations : int
        Iteration ceiling for the infinite cascade.
    memoize : bool
        Keep intermediate values between calls. Results are identical
        either way.
    """

    def __init__(self, params: ModelParams, tolerance: float = 1e-9,
                 max_iterations: int = 200, memoize: bool = True):
        if tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        self.params = params
        self.geometry = params.geometry
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.memoize = memoize
        self.volume = self.geometry.box_volume(params.variant)
        self._memo: dict = {}
        self._fixed: dict = {}

    def clear_cache(self):
        self._memo.clear()
        self._fixed.clear()

    @property
    def cache_size(self) -> int:
        return len(self._memo) + len(self._fixed)

    def _combine(self, blocked: float, clear: float) -> float:
        if self.params.variant == "periodic":
            return blocked * clear
        p = self.params.p
        return p * blocked * blocked + (1.0 - p) * clear * clear

    def _box(self, x: float, volume: float | None = None) -> float:
        return box_lt(x, self.volume if volume is None else volume, self.params.lam)

    def stage_lt(self, n: int, s: float, m: int = 0) -> float:
        """Transform of the stage-``n`` cone interference at ``s * K**m``.

        For the infinite cascade every stage has the same law, so ``n`` only
        selects the evaluation point.
        """
        if self.params.variant == "independent":
            raise InvalidParameters("the independent variant has no stage recursion")
        s = float(s)
        if s < 0:
            raise ValueError("transform argument must be non-negative")
        if self.params.is_infinite:
            return self._fixed_point_values(s, m)[m]
        N = self.params.stages
        if not 1 <= n <= N:
            raise ValueError(f"stage must lie in 1..{N}, got {n}")
        memo = self._memo if self.memoize else {}
        key = (n, m, s)
        if key in memo:
            return memo[key]
        K = self.params.K
        # bottom-up over the triangle of (stage j, exponent i) values needed
        for j in range(N, n - 1, -1):
            for i in range(m, m + (j - n) + 1):
                if (j, i, s) in memo:
                    continue
                a = self._box(_scaled(s, K, i))
                if j == N:
                    val = a
                else:
                    val = self._combine(memo[(j + 1, i + 1, s)], memo[(j + 1, i, s)]) * a
                memo[(j, i, s)] = val
        return memo[key]

    # -- infinite cascade -------------------------------------------------

    def solve_infinite(self, s: float) -> FixedPoint:
        """Iterate ``Q <- combine(Q(Ks), Q(s)) * A(s, V)`` from ``Q = A``."""
        values, iterations = self._iterate(float(s), depth=0)
        return FixedPoint(float(values[0]), iterations)

    def _fixed_point_values(self, s: float, m: int) -> np.ndarray:
        values = self._fixed.get(s) if self.memoize else None
        if values is None or len(values[0]) <= m:
            values = self._iterate(s, depth=max(m, 8))
            if self.memoize:
                self._fixed[s] = values
        return values[0]

    def _iterate(self, s: float, depth: int):
        params = self.params
        if not params.is_infinite:
            raise InvalidParameters("fixed-point iteration is for the infinite cascade")
        if params.variant == "periodic":
            raise InvalidParameters("the periodic variant is finite only")
        params.check_convergent()
        K = params.K
        # grid s K**i; the boundary error creeps in by one index per sweep
        size = self.max_iterations + depth + 2
        x = np.array([_scaled(s, K, i) for i in range(size)])
        a = box_lt(x, self.volume, params.lam)
        p, q = params.p, params.q
        current = a.copy()
        for it in range(1, self.max_iterations + 1):
            valid = size - it
            new = (p * current[1:valid + 1] ** 2 + q * current[:valid] ** 2) * a[:valid]
            diff = float(np.max(np.abs(new - current[:valid])))
            current = new
            if diff < self.tolerance:
                return current[:depth + 1].copy(), it
        raise IterationBudgetExhausted(
            f"iteration budget exhausted: no convergence to {self.tolerance:g} "
            f"within {self.max_iterations} iterations at s={s:g}")

    # -- whole-plane transforms ------------------------------------------

    def first_stage_lt(self, s):
        """Transform of the interference in one first-level cone.

        A half-plane for the basic and periodic cascades, a quarter-plane for
        the less-correlated one.
        """
        return _map_scalar(lambda x: self.stage_lt(1, x), s)

    def total_lt(self, s):
        """Transform of the total interference at the origin."""
        variant = self.params.variant
        if variant == "independent":
            return independent_lt(s, self.params)
        power = 4 if variant == "less_correlated" else 2
        return _map_scalar(lambda x: self.stage_lt(1, x) ** power, s)

    def coverage(self, theta, gain: float = 1.0):
        """SIR coverage of the omnidirectional user at threshold ``theta``."""
        return coverage(theta, gain, self.total_lt)


# -- public operations ------------------------------------------------------

def half_plane_lt_finite(s, params: ModelParams):
    if params.variant != "basic" or params.is_infinite:
        raise InvalidParameters("needs the basic variant with finite stages")
    return AnalyticSolver(params).first_stage_lt(s)


def half_plane_lt_infinite(s, params: ModelParams, tolerance: float = 1e-9,
                           max_iterations: int = 200) -> FixedPoint:
    if params.variant != "basic" or not params.is_infinite:
        raise InvalidParameters("needs the basic variant with infinite stages")
    return AnalyticSolver(params, tolerance, max_iterations).solve_infinite(s)


def lc_lt(s, params: ModelParams):
    """Quarter-plane transform of the less-correlated cascade."""
    if params.variant != "less_correlated":
        params = params.with_(variant="less_correlated")
    return AnalyticSolver(params).first_stage_lt(s)


def periodic_lt(s, params: ModelParams):
    """Half-plane transform of the periodic cascade."""
    if params.variant != "periodic":
        params = params.with_(variant="periodic")
    return AnalyticSolver(params).first_stage_lt(s)


def total_lt(s, params: ModelParams, **solver_options):
    return AnalyticSolver(params, **solver_options).total_lt(s)


def _binomial_step(pmf: np.ndarray, p: float) -> np.ndarray:
    out = np.zeros(len(pmf) + 1)
    out[:-1] += (1.0 - p) * pmf
    out[1:] += p * pmf
    return out


def independent_lt(s, params: ModelParams, mode: str | None = None):
    """Transform of the shot noise with independent per-link blockage.

    A link of length ``r`` crosses ``n(r)`` potential obstacles, each closed
    with probability ``p``. With geometric ``n(r)`` it is constant on each
    cascade annulus, so the radial integral is an exact finite sum; in
    ``paper_floor`` mode the sum runs over unit-width annuli.
    """
    mode = params.radius_mode if mode is None else mode
    geo = params.geometry
    lam, p, K = params.lam, params.p, params.K
    if params.is_infinite:
        if mode == "geometric":
            params.check_convergent()
        elif not (1.0 - p) + p * K < 1.0:
            raise DivergentRegimeError(
                "divergent regime: independent model needs q + pK < 1")
    outer = geo.outer_radius

    def annuli():
        # (area, obstacle count) pairs, innermost first
        if mode == "geometric":
            n = 1
            while params.is_infinite or n <= params.stages:
                yield geo.annulus_area(n), n - 1
                n += 1
        elif mode == "paper_floor":
            j = 0
            while j < outer:
                yield math.pi * (min(j + 1.0, outer) ** 2 - j ** 2), j
                j += 1
        else:
            raise ValueError(f"unknown radius mode {mode!r}")

    def one(x: float) -> float:
        if x < 0:
            raise ValueError("transform argument must be non-negative")
        pmf = np.ones(1)
        total = 0.0
        prev = -1.0
        for area, count in annuli():
            while len(pmf) < count + 1:
                pmf = _binomial_step(pmf, p)
            kl = np.power(K, np.arange(count + 1, dtype=float))
            # E[sK^L / (1 + sK^L)] directly; 1 - E[1/(1 + sK^L)] cancels badly
            if math.isinf(x):
                shot = float(pmf @ (kl > 0))
            else:
                shot = float(pmf @ (x * kl / (1.0 + x * kl)))
            term = lam * area * shot
            total += term
            if params.is_infinite and term <= prev and term <= INDEPENDENT_TAIL_RTOL * total:
                break
            prev = term
        return math.exp(-total)

    return _map_scalar(one, s)


def coverage(theta, gain: float, transform: Callable):
    """``P(G h / I >= theta) = L_I(theta / G)`` under Rayleigh fading."""
    if gain <= 0:
        raise ValueError("gain must be positive")
    theta = np.asarray(theta, dtype=float) if np.ndim(theta) else float(theta)
    return transform(theta / gain)


@dataclass
class CoverageCurve:
    """Coverage probability sampled on a grid of SIR thresholds."""

    theta_db: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)
    std_error: np.ndarray | None = None

    def __post_init__(self):
        self.theta_db = np.asarray(self.theta_db, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.theta_db.shape != self.values.shape:
            raise ValueError("theta grid and values differ in length")

    @property
    def theta(self) -> np.ndarray:
        return db_to_linear(self.theta_db)


def coverage_curve(params: ModelParams, theta_db, gain: float = 1.0,
                   solver: AnalyticSolver | None = None) -> CoverageCurve:
    solver = AnalyticSolver(params) if solver is None else solver
    theta_db = np.atleast_1d(np.asarray(theta_db, dtype=float))
    values = solver.coverage(db_to_linear(theta_db), gain)
    meta = {"params": params, "variant": params.variant, "gain": gain}
    if params.variant == "independent":
        meta["radius_mode"] = params.radius_mode
        if params.is_infinite:
            meta["tail_truncation"] = f"relative increment < {INDEPENDENT_TAIL_RTOL:g}"
    return CoverageCurve(theta_db, values, meta)
