"""Joint interference transform across ``2**k`` sector beams.

Beams are ideal sectors of width ``2 pi / 2**k`` aligned with the stage-k
arcs. A stage-``level`` cone (``level < k``) holds ``2**(k - level)`` beams
and its box is split evenly among them, so the joint transform of the beams
in one cone obeys

    H_level(t) = [p H_{level+1}(K t_lo) H_{level+1}(K t_hi)
                  + q H_{level+1}(t_lo) H_{level+1}(t_hi)]
                 * prod_i A(t_i, V / 2**(k - level)),

bottoming out at ``H_k = M_k``, the stage-k transform of the omnidirectional
recursion. The two half-planes are independent, so the joint transform of
all beams is ``H_1(north) * H_1(south)``.

Beam indices are 0-based here and 1-based in the public coverage helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import AnalyticSolver, box_lt
from .params import InvalidParameters, ModelParams, NegligibleConditioningEvent

DEFAULT_MAX_K = 4


@dataclass(frozen=True)
class BeamConfig:
    """``2**k`` in-phase sector beams with main-lobe gain ``gain``."""

    k: int
    gain: float | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise InvalidParameters(f"k must be a non-negative integer, got {self.k}")
        if self.gain is None:
            object.__setattr__(self, "gain", float(2 ** self.k))
        elif not self.gain > 0:
            raise InvalidParameters(f"beam gain must be positive, got {self.gain}")

    @property
    def n_beams(self) -> int:
        return 2 ** self.k

    @property
    def beam_width(self) -> float:
        return 2.0 * math.pi / self.n_beams

    def beam_of(self, phi):
        """0-based index of the beam containing angle ``phi`` in ``[0, 2 pi)``."""
        idx = np.minimum(np.floor(np.asarray(phi) / self.beam_width).astype(np.int64),
                         self.n_beams - 1)
        return int(idx) if idx.ndim == 0 else idx


def shared_depth(l1: int, l2: int, k: int) -> int:
    """Number of stages ``1..k`` whose arc covers both beams (1-based indices)."""
    n_beams = 2 ** k
    if not (1 <= l1 <= n_beams and 1 <= l2 <= n_beams):
        raise ValueError(f"beam indices must lie in 1..{n_beams}")
    a, b = l1 - 1, l2 - 1
    return sum(1 for n in range(1, k + 1) if a >> (k - n) == b >> (k - n))


class JointLTEvaluator:
    """Memoized joint transform ``L_1(s_1, ..., s_{2**k})`` of beam interference.

    Argument vectors produced by the coverage formulas put one constant ``c``
    on a subset of beams and zero elsewhere. Along the recursion they only
    ever become ``c K**m`` on a sub-mask, so the memo is keyed on
    ``(c, level, mask, m)``.
    """

    def __init__(self, params: ModelParams, beams: BeamConfig,
                 solver: AnalyticSolver | None = None, memoize: bool = True):
        if params.variant != "basic":
            raise InvalidParameters("beam analysis is defined for the basic cascade only")
        if not params.is_infinite and beams.k > params.stages:
            raise InvalidParameters(
                f"k={beams.k} exceeds the number of stages N={params.stages}")
        self.params = params
        self.beams = beams
        self.solver = AnalyticSolver(params, memoize=memoize) if solver is None else solver
        self.memoize = memoize
        self.volume = params.geometry.box_volume("basic")
        self._memo: dict = {}

    def clear_cache(self):
        self._memo.clear()
        self.solver.clear_cache()

    # -- recursion pieces ------------------------------------------------

    def h_base(self, s: float, m: int = 0) -> float:
        """``H_k``: transform of the interference in one beam beyond circle k-1."""
        k = max(self.beams.k, 1)
        return self.solver.stage_lt(k, s, m)

    def h_level(self, level: int, args) -> float:
        """``H_level`` at an arbitrary argument vector of length ``2**(k - level)``."""
        k = self.beams.k
        if not 1 <= level <= k:
            raise ValueError(f"level must lie in 1..{k}")
        args = tuple(float(a) for a in args)
        if len(args) != 2 ** (k - level):
            raise ValueError(
                f"level {level} takes {2 ** (k - level)} arguments, got {len(args)}")
        if any(a < 0 for a in args):
            raise ValueError("transform arguments must be non-negative")
        structured = self._as_masked(args)
        if structured is not None:
            c, mask = structured
            return self._h_masked(c, level, mask, 0)
        return self._h_general(level, args)

    def joint_lt(self, s_vector) -> float:
        """Joint transform of all beams' interference at ``s_vector``."""
        s_vector = tuple(float(a) for a in s_vector)
        n_beams = self.beams.n_beams
        if len(s_vector) != n_beams:
            raise ValueError(f"expected {n_beams} arguments, got {len(s_vector)}")
        if any(a < 0 for a in s_vector):
            raise ValueError("transform arguments must be non-negative")
        if self.beams.k == 0:
            return float(self.solver.total_lt(s_vector[0]))
        half = n_beams // 2
        structured = self._as_masked(s_vector)
        if structured is not None:
            c, mask = structured
            return self.masked_joint_lt(c, mask)
        return (self._h_general(1, s_vector[:half])
                * self._h_general(1, s_vector[half:]))

    def masked_joint_lt(self, c: float, mask: int) -> float:
        """Joint transform with ``c`` on the beams in bitmask ``mask``, 0 elsewhere."""
        if mask == 0 or c == 0.0:
            return 1.0
        if self.beams.k == 0:
            return float(self.solver.total_lt(c))
        half = self.beams.n_beams // 2
        lo = mask & ((1 << half) - 1)
        hi = mask >> half
        return self._h_masked(c, 1, lo, 0) * self._h_masked(c, 1, hi, 0)

    # -- recursions ------------------------------------------------------

    @staticmethod
    def _as_masked(args):
        nonzero = {a for a in args if a != 0.0}
        if len(nonzero) > 1:
            return None
        c = nonzero.pop() if nonzero else 0.0
        mask = sum(1 << i for i, a in enumerate(args) if a != 0.0)
        return c, mask

    def _h_masked(self, c: float, level: int, mask: int, m: int) -> float:
        if mask == 0:
            return 1.0
        K = self.params.K
        if m > 0 and K == 0.0:
            return 1.0
        key = (c, level, mask, m)
        if self.memoize and key in self._memo:
            return self._memo[key]
        k = self.beams.k
        if level == k:
            val = self.solver.stage_lt(k, c, m)
        else:
            n_args = 2 ** (k - level)
            half = n_args // 2
            lo = mask & ((1 << half) - 1)
            hi = mask >> half
            x = c if m == 0 else c * K ** m
            boxes = box_lt(x, self.volume / n_args, self.params.lam) ** bin(mask).count("1")
            p = self.params.p
            blocked = self._h_masked(c, level + 1, lo, m + 1) * self._h_masked(c, level + 1, hi, m + 1)
            clear = self._h_masked(c, level + 1, lo, m) * self._h_masked(c, level + 1, hi, m)
            val = (p * blocked + (1.0 - p) * clear) * boxes
        if self.memoize:
            self._memo[key] = val
        return val

    def _h_general(self, level: int, args: tuple) -> float:
        if not any(args):
            return 1.0
        k = self.beams.k
        if level == k:
            return self.solver.stage_lt(k, args[0])
        K = self.params.K
        n_args = len(args)
        half = n_args // 2
        boxes = 1.0
        for t in args:
            boxes *= box_lt(t, self.volume / n_args, self.params.lam)
        scaled = tuple(K * t for t in args)
        p = self.params.p
        blocked = self._h_general(level + 1, scaled[:half]) * self._h_general(level + 1, scaled[half:])
        clear = self._h_general(level + 1, args[:half]) * self._h_general(level + 1, args[half:])
        return (p * blocked + (1.0 - p) * clear) * boxes

    # -- coverage --------------------------------------------------------

    def best_beam_coverage(self, theta: float, max_k: int = DEFAULT_MAX_K) -> float:
        """Coverage of the max-SIR beam, by inclusion-exclusion over beam subsets.

        ``P = sum_{S != {}} (-1)**(|S|+1) L_1(theta/G on S)``. The two
        half-planes are independent, so every subset term is the product of
        a north and a south factor; all ``2**(2**k)`` terms are formed as an
        outer product and summed exactly with ``math.fsum``.
        """
        k = self.beams.k
        if k > max_k:
            raise InvalidParameters(
                f"k={k} needs 2**{2 ** k} subset terms; raise max_k to allow it")
        c = float(theta) / self.beams.gain
        if k == 0:
            return float(self.solver.total_lt(c))
        half = self.beams.n_beams // 2
        masks = np.arange(2 ** half)
        factors = np.array([self._h_masked(c, 1, int(mask), 0) for mask in masks])
        sizes = np.array([bin(int(mask)).count("1") for mask in masks])
        signed = np.where(sizes % 2, -1.0, 1.0) * factors
        terms = -np.outer(signed, signed).ravel()
        # drop the empty subset, whose term is -1
        return math.fsum(terms[1:].tolist())

    def random_beam_coverage(self, theta: float) -> float:
        """Coverage of a fixed (equivalently, uniformly random) beam."""
        return self.masked_joint_lt(float(theta) / self.beams.gain, 1)

    def _pair(self, theta: float, target: int, source: int):
        n_beams = self.beams.n_beams
        for l in (source, target):
            if not 1 <= l <= n_beams:
                raise ValueError(f"beam index must lie in 1..{n_beams}, got {l}")
        c = float(theta) / self.beams.gain
        src = 1 << (source - 1)
        tgt = 1 << (target - 1)
        return (self.masked_joint_lt(c, src), self.masked_joint_lt(c, tgt),
                self.masked_joint_lt(c, src | tgt))

    def conditional_switch_coverage(self, theta: float, target: int,
                                    source: int = 1) -> float:
        """``P(SIR_target > theta | SIR_source > theta)`` (1-based beams)."""
        marginal, _, joint = self._pair(theta, target, source)
        if marginal < 1e-300:
            raise NegligibleConditioningEvent(
                "conditioning event has negligible probability")
        return joint / marginal

    def conditional_given_outage(self, theta: float, target: int,
                                 source: int = 1) -> float:
        """``P(SIR_target > theta | SIR_source <= theta)`` (1-based beams)."""
        marginal, target_marginal, joint = self._pair(theta, target, source)
        outage = 1.0 - marginal
        if outage < 1e-300:
            raise NegligibleConditioningEvent(
                "conditioning event has negligible probability")
        return (target_marginal - joint) / outage


def best_beam_coverage(theta, params: ModelParams, beams: BeamConfig,
                       max_k: int = DEFAULT_MAX_K):
    ev = JointLTEvaluator(params, beams)
    if np.ndim(theta):
        return np.array([ev.best_beam_coverage(t, max_k) for t in np.ravel(theta)])
    return ev.best_beam_coverage(theta, max_k)


def random_beam_coverage(theta, params: ModelParams, beams: BeamConfig):
    ev = JointLTEvaluator(params, beams)
    if np.ndim(theta):
        return np.array([ev.random_beam_coverage(t) for t in np.ravel(theta)])
    return ev.random_beam_coverage(theta)


def conditional_switch_coverage(theta: float, params: ModelParams, beams: BeamConfig,
                                target: int, source: int = 1) -> float:
    return JointLTEvaluator(params, beams).conditional_switch_coverage(theta, target, source)
