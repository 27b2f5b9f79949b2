"""
Weighted-rate maximization over policy space and exact sum-rate water-filling.

A bound is scalarized along a weight direction w: the optimizer maximizes,
over feasible policies, the support value of the policy's own rate region
at w. The search is grid seeding plus random restarts followed by projected
coordinate ascent driven by central finite differences.
"""

import logging
import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Type

import numpy as np
from scipy.optimize import bisect, isotonic_regression

from .errors import (
    BadWeight,
    CsitDoesNotDetermineOrder,
    NoConvergence,
    PolicyInfeasible,
    RequiresPerfectCsit,
    RestrictionUnavailable,
)
from .fading_model import CsitPartition, csit_refines_order
from .rate_functionals import (
    InnerPolicy,
    OuterPolicy,
    Policy,
    RatePolytope,
    Restriction,
    SecrecyBox,
    full_split_policy,
    inner_polytope,
    lift_inner_to_outer,
    lift_secrecy_inner_to_outer,
    outer_polytope,
    perfect_nocommon_rectangle,
    restriction_keys,
    secrecy_inner_box,
    secrecy_outer_box,
    secrecy_outer_nocommon,
    sumrate_value,
    theorem2_policy_map,
)
from .region_geometry import (
    RatePoint,
    RateRegion,
    hull,
    octant_directions,
    polytope_support,
    polytope_vertex_array,
    transfer_closure,
)

logger = logging.getLogger(__name__)

_FD_STEP = 1e-7
_INITIAL_STEP = 0.25


@dataclass(frozen=True)
class OptimizerOptions:
    directions: int = 64
    restarts: int = 16
    grid_seed_levels: int = 5
    step_tol: float = 1e-6
    max_iters: int = 2000
    rng_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        for name in ("directions", "restarts", "grid_seed_levels", "max_iters", "workers"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"optimizer option {name} must be a positive int")
        if not self.step_tol > 0:
            raise ValueError("optimizer option step_tol must be > 0")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ValueError("optimizer option rng_seed must be a 64-bit unsigned int")

    def to_dict(self) -> Dict[str, object]:
        return {
            "directions": self.directions,
            "restarts": self.restarts,
            "grid_seed_levels": self.grid_seed_levels,
            "step_tol": self.step_tol,
            "max_iters": self.max_iters,
            "rng_seed": self.rng_seed,
            "workers": self.workers,
        }


@dataclass(frozen=True, eq=False)
class SupportResult:
    weight: Tuple[float, float, float]
    value: float
    policy: Policy
    vertex: RatePoint
    converged: bool
    iterations: int
    bound: str = "inner"

    def to_dict(self) -> Dict[str, object]:
        return {
            "bound": self.bound,
            "weight": list(self.weight),
            "value": self.value,
            "vertex": [self.vertex.r0, self.vertex.r1, self.vertex.r2],
            "converged": self.converged,
            "iterations": self.iterations,
            "policy": self.policy.to_dict(),
        }


def project_budget(
    phi_raw: Sequence[float], partition: CsitPartition, power: float
) -> np.ndarray:
    """Scale phi down onto the budget E[phi(E)] <= power when it is exceeded."""
    phi = np.asarray(phi_raw, dtype=float)
    spent = math.fsum(partition.group_mass * phi)
    if spent <= power:
        return phi.copy()
    return phi * (power / spent)


# ---------------------------------------------------------------------------
# policy spaces
# ---------------------------------------------------------------------------


class PolicySpace(ABC):
    """
    Box-bounded parameterization of the feasible policies of one bound.

    The parameter vector starts with one power level per CSIT group and is
    followed by the bound's split parameters.
    """

    name = ""
    transferable = False

    def __init__(
        self,
        partition: CsitPartition,
        power: float,
        restriction: Restriction = Restriction.FREE,
    ):
        self.partition = partition
        self.power = float(power)
        self.restriction = restriction
        self.n_phi = partition.n_groups
        phi_cap = self.power / partition.group_mass
        self.lower = np.zeros(self.n_phi + self.n_split)
        self.upper = np.concatenate([phi_cap, np.ones(self.n_split)])

    @property
    @abstractmethod
    def n_split(self) -> int:
        pass

    @abstractmethod
    def policy(self, theta: np.ndarray) -> Policy:
        pass

    @abstractmethod
    def region(self, policy: Policy) -> RatePolytope:
        pass

    @abstractmethod
    def theta_of(self, policy: Policy) -> np.ndarray:
        pass

    @abstractmethod
    def grid_seeds(self, levels: int) -> List[np.ndarray]:
        pass

    def project_splits(self, splits: np.ndarray) -> np.ndarray:
        return splits

    def project(self, theta: np.ndarray) -> np.ndarray:
        theta = np.clip(np.asarray(theta, dtype=float), self.lower, self.upper)
        phi = project_budget(theta[: self.n_phi], self.partition, self.power)
        return np.concatenate([phi, self.project_splits(theta[self.n_phi :])])

    def random_theta(self, rng: np.random.Generator) -> np.ndarray:
        return self.project(rng.uniform(self.lower, self.upper))

    def uniform_phi(self) -> np.ndarray:
        return np.full(self.n_phi, self.power)

    def value(self, theta: np.ndarray, w: np.ndarray) -> float:
        return polytope_support(self.region(self.policy(theta)), w)[0]

    def feasible_seed(self, seed: Policy) -> Policy:
        return self.policy(self.project(self.theta_of(seed)))


def _split_grid(levels: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, levels) if levels > 1 else np.zeros(1)


class InnerSpace(PolicySpace):
    """phi, alpha, beta per CSIT group with alpha + beta <= 1."""

    name = "inner"
    transferable = True

    @property
    def n_split(self) -> int:
        return 2 * self.partition.n_groups

    def project_splits(self, splits):
        k = self.partition.n_groups
        alpha, beta = splits[:k], splits[k:]
        excess = np.maximum(alpha + beta - 1.0, 0.0)
        alpha = np.clip(alpha - excess / 2, 0.0, 1.0)
        beta = np.clip(beta - excess / 2, 0.0, 1.0)
        beta = np.minimum(beta, 1.0 - alpha)
        return np.concatenate([alpha, beta])

    def policy(self, theta):
        k = self.n_phi
        return InnerPolicy(phi=theta[:k], alpha=theta[k : 2 * k], beta=theta[2 * k :])

    def region(self, policy):
        return inner_polytope(self.partition, policy)

    def theta_of(self, policy):
        if not isinstance(policy, InnerPolicy):
            raise PolicyInfeasible(f"{self.name} bound needs an inner policy seed")
        return np.concatenate([policy.phi, policy.alpha, policy.beta])

    def grid_seeds(self, levels):
        k = self.n_phi
        seeds = []
        for a in _split_grid(levels):
            for b in _split_grid(levels):
                if a + b <= 1.0 + 1e-12:
                    seeds.append(
                        np.concatenate([self.uniform_phi(), np.full(k, a), np.full(k, b)])
                    )
        if self.partition.is_perfect:
            # one active split per state: alpha on {g1 < g2}, beta on {g1 >= g2}
            reversed_group = np.zeros(k, dtype=bool)
            reversed_group[self.partition.atom_group[self.partition.dist.d2]] = True
            for a in _split_grid(levels):
                for b in _split_grid(levels):
                    seeds.append(
                        np.concatenate(
                            [
                                self.uniform_phi(),
                                np.where(reversed_group, a, 0.0),
                                np.where(reversed_group, 0.0, b),
                            ]
                        )
                    )
        return seeds


class SecrecyInnerSpace(InnerSpace):
    name = "secrecy_inner"
    transferable = False

    def region(self, policy):
        return secrecy_inner_box(self.partition, policy).as_polytope()


class OuterSpace(PolicySpace):
    """
    phi per group with alpha and beta per restriction key.

    Unrestricted, every atom is its own key. Under the i.i.d. restrictions
    alpha is shared by atoms with equal (g2, symbol) and beta by atoms with
    equal (g1, symbol).
    """

    name = "outer"
    transferable = True

    def __init__(self, partition, power, restriction=Restriction.FREE):
        if restriction == Restriction.FREE:
            n = partition.dist.n_atoms
            self.alpha_index = np.arange(n)
            self.beta_index = np.arange(n)
        else:
            self.alpha_index, self.beta_index = restriction_keys(partition)
        self.n_alpha = int(self.alpha_index.max()) + 1
        self.n_beta = int(self.beta_index.max()) + 1
        super().__init__(partition, power, restriction)

    @property
    def n_split(self) -> int:
        return self.n_alpha + self.n_beta

    def project_splits(self, splits):
        splits = np.clip(splits, 0.0, 1.0)
        if self.restriction != Restriction.THM4_MONOTONE:
            return splits
        # keys come sorted by increasing gain; the splits must not increase
        alpha = isotonic_regression(splits[: self.n_alpha], increasing=False).x
        beta = isotonic_regression(splits[self.n_alpha :], increasing=False).x
        return np.clip(np.concatenate([alpha, beta]), 0.0, 1.0)

    def policy(self, theta):
        k = self.n_phi
        alpha = theta[k : k + self.n_alpha]
        beta = theta[k + self.n_alpha :]
        return OuterPolicy(
            phi=theta[:k],
            alpha=alpha[self.alpha_index],
            beta=beta[self.beta_index],
            restriction=self.restriction,
        )

    def region(self, policy):
        return outer_polytope(self.partition, policy)

    def lift(self, policy: InnerPolicy) -> OuterPolicy:
        return lift_inner_to_outer(self.partition, policy)

    def theta_of(self, policy):
        if isinstance(policy, InnerPolicy):
            policy = self.lift(policy)
        first_alpha = _first_of_each(self.alpha_index, self.n_alpha)
        first_beta = _first_of_each(self.beta_index, self.n_beta)
        return np.concatenate(
            [policy.phi, policy.alpha[first_alpha], policy.beta[first_beta]]
        )

    def grid_seeds(self, levels):
        seeds = []
        for a in _split_grid(levels):
            for b in _split_grid(levels):
                seeds.append(
                    np.concatenate(
                        [self.uniform_phi(), np.full(self.n_alpha, a), np.full(self.n_beta, b)]
                    )
                )
        return seeds


def _first_of_each(index: np.ndarray, n_keys: int) -> np.ndarray:
    return np.array([np.flatnonzero(index == key)[0] for key in range(n_keys)])


class SecrecyOuterSpace(OuterSpace):
    name = "secrecy_outer"
    transferable = False

    def region(self, policy):
        return secrecy_outer_box(self.partition, policy).as_polytope()

    def lift(self, policy):
        return lift_secrecy_inner_to_outer(self.partition, policy)


class PerfectNoCommonSpace(OuterSpace):
    """Private-message rectangles of the perfect-CSIT capacity region."""

    name = "perfect_nocommon"
    transferable = False

    def __init__(self, partition, power, restriction=Restriction.FREE):
        if not partition.is_perfect:
            raise RequiresPerfectCsit("perfect_nocommon needs one CSIT symbol per atom")
        super().__init__(partition, power, restriction)

    def region(self, policy):
        return perfect_nocommon_rectangle(self.partition, policy).as_polytope()


class SecrecyNoCommonSpace(PolicySpace):
    """Only phi is free; alpha = beta = 1 on every atom."""

    name = "secrecy_nocommon"

    @property
    def n_split(self) -> int:
        return 0

    def policy(self, theta):
        return full_split_policy(self.partition, theta[: self.n_phi])

    def region(self, policy):
        r1_cap, r2_cap = secrecy_outer_nocommon(self.partition, policy.phi)
        return SecrecyBox(0.0, r1_cap, r2_cap).as_polytope()

    def theta_of(self, policy):
        return np.asarray(policy.phi, dtype=float)

    def grid_seeds(self, levels):
        return [self.uniform_phi()]


POLICY_SPACES: Dict[str, Type[PolicySpace]] = {
    "inner": InnerSpace,
    "outer": OuterSpace,
    "secrecy_inner": SecrecyInnerSpace,
    "secrecy_outer": SecrecyOuterSpace,
    "secrecy_nocommon": SecrecyNoCommonSpace,
    "perfect_nocommon": PerfectNoCommonSpace,
}

RESTRICTABLE_BOUNDS = ("outer", "secrecy_outer")


def make_space(
    partition: CsitPartition,
    bound: str,
    restriction: Restriction = Restriction.FREE,
    power: float = 1.0,
) -> PolicySpace:
    if bound not in POLICY_SPACES:
        raise ValueError(f"unknown bound {bound!r}; choose from {sorted(POLICY_SPACES)}")
    if power < 0 or not math.isfinite(power):
        raise PolicyInfeasible(f"power budget must be finite and >= 0, got {power}")
    restriction = Restriction(restriction)
    if restriction != Restriction.FREE:
        if bound not in RESTRICTABLE_BOUNDS:
            raise RestrictionUnavailable(
                f"restriction {restriction.value} applies to outer bounds only"
            )
        if not partition.dist.iid_flag:
            raise RestrictionUnavailable(
                f"restriction {restriction.value} needs an i.i.d. state process"
            )
        if restriction == Restriction.THM4_MONOTONE and partition.n_groups != 1:
            raise RestrictionUnavailable(
                "monotone restriction needs a single CSIT symbol (no CSIT)"
            )
    return POLICY_SPACES[bound](partition, power, restriction)


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


def _check_weight(weight: Sequence[float]) -> np.ndarray:
    w = np.asarray(weight, dtype=float)
    if w.shape != (3,) or not np.all(np.isfinite(w)):
        raise BadWeight(f"weight must be a finite 3-vector, got {weight!r}")
    if np.any(w < 0) or not np.any(w > 0):
        raise BadWeight(f"weight must be nonnegative and not all zero, got {weight!r}")
    return w


def _ascend(
    space: PolicySpace, theta: np.ndarray, w: np.ndarray, opts: OptimizerOptions
) -> Tuple[np.ndarray, float, bool, int]:
    """Projected coordinate ascent; returns (theta, value, converged, sweeps)."""
    # projections often land back on visited points (box faces, budget)
    seen: Dict[bytes, float] = {}

    def evaluate(point: np.ndarray) -> float:
        key = point.tobytes()
        if key not in seen:
            seen[key] = space.value(point, w)
        return seen[key]

    theta = space.project(theta)
    value = evaluate(theta)
    width = space.upper - space.lower
    free = np.flatnonzero(width > 0)
    steps = _INITIAL_STEP * width

    for sweep in range(opts.max_iters):
        if np.all(steps[free] < opts.step_tol):
            return theta, value, True, sweep
        for i in free:
            h = _FD_STEP * width[i]
            up, down = theta.copy(), theta.copy()
            up[i] += h
            down[i] -= h
            slope = evaluate(space.project(up)) - evaluate(space.project(down))
            direction = 1.0 if slope >= 0 else -1.0

            improved = False
            for sign in (direction, -direction):
                trial = theta.copy()
                trial[i] += sign * steps[i]
                trial = space.project(trial)
                trial_value = evaluate(trial)
                if trial_value > value:
                    theta, value, improved = trial, trial_value, True
                    break
            steps[i] = min(1.5 * steps[i], width[i]) if improved else 0.5 * steps[i]

    return theta, value, bool(np.all(steps[free] < opts.step_tol)), opts.max_iters


def _search(
    space: PolicySpace,
    w: np.ndarray,
    opts: OptimizerOptions,
    seeds: Sequence[Policy],
    stream: int,
) -> SupportResult:
    rng = np.random.default_rng([int(opts.rng_seed), stream])
    candidates = [space.project(space.theta_of(seed)) for seed in seeds]
    candidates += [space.project(t) for t in space.grid_seeds(opts.grid_seed_levels)]
    candidates += [space.random_theta(rng) for _ in range(opts.restarts)]
    values = [space.value(t, w) for t in candidates]
    ranked = sorted(range(len(candidates)), key=lambda i: -values[i])

    best: Optional[Tuple[np.ndarray, float, bool, int]] = None
    for i in ranked[: opts.restarts]:
        outcome = _ascend(space, candidates[i], w, opts)
        if best is None or outcome[1] > best[1]:
            best = outcome

    theta, _, converged, iterations = best
    policy = space.policy(theta)
    value, vertex = polytope_support(space.region(policy), w)
    if not converged:
        logger.debug(
            "%s search at w=%s hit the iteration cap (%d)", space.name, w, opts.max_iters
        )
    return SupportResult(
        weight=tuple(float(x) for x in w),
        value=value,
        policy=policy,
        vertex=RatePoint(*(float(x) for x in vertex)),
        converged=converged,
        iterations=iterations,
        bound=space.name,
    )


def max_weighted(
    partition: CsitPartition,
    bound: str,
    weight: Sequence[float],
    restriction: Restriction = Restriction.FREE,
    opts: Optional[OptimizerOptions] = None,
    power: float = 1.0,
    seeds: Sequence[Policy] = (),
    stream: int = 0,
) -> SupportResult:
    """
    Best found value of max over policies of max over the policy's region of w.R.

    `seeds` are extra starting policies; the best starting point is always
    ascended, so the result is never worse than any seed. `stream` selects
    the random stream used for restarts.
    """
    w = _check_weight(weight)
    space = make_space(partition, bound, restriction, power)
    opts = opts or OptimizerOptions()
    result = _search(space, w, opts, seeds, stream)
    if not result.converged:
        logger.warning("%s search hit the iteration cap (%d)", bound, opts.max_iters)
    return result


def _trace(
    space: PolicySpace,
    opts: OptimizerOptions,
    seeds: Sequence[Policy],
    seeds_per_direction: Optional[Sequence[Sequence[Policy]]],
) -> List[SupportResult]:
    directions = octant_directions(opts.directions)
    if seeds_per_direction is None:
        seeds_per_direction = [()] * len(directions)
    if len(seeds_per_direction) != len(directions):
        raise ValueError(
            f"got {len(seeds_per_direction)} seed lists for {len(directions)} directions"
        )

    def work(index: int) -> SupportResult:
        own = tuple(seeds) + tuple(seeds_per_direction[index])
        return _search(space, directions[index], opts, own, index)

    if opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            results = list(pool.map(work, range(len(directions))))
    else:
        results = [work(i) for i in range(len(directions))]

    stalled = sum(not r.converged for r in results)
    logger.info(
        "traced %s bound over %d directions (%d hit the iteration cap)",
        space.name,
        len(results),
        stalled,
    )
    return results


def trace_supports(
    partition: CsitPartition,
    bound: str,
    restriction: Restriction = Restriction.FREE,
    opts: Optional[OptimizerOptions] = None,
    power: float = 1.0,
    seeds: Sequence[Policy] = (),
    seeds_per_direction: Optional[Sequence[Sequence[Policy]]] = None,
) -> List[SupportResult]:
    """One SupportResult per octant direction, in direction order."""
    space = make_space(partition, bound, restriction, power)
    return _trace(space, opts or OptimizerOptions(), seeds, seeds_per_direction)


def region_from_policies(
    space: PolicySpace,
    policies: Sequence[Policy],
    meta: Sequence[Dict[str, object]] = (),
) -> RateRegion:
    """Hull of the union of the given policies' rate regions."""
    points = [polytope_vertex_array(space.region(p)) for p in policies]
    points = np.vstack(points) if points else np.zeros((1, 3))
    if space.transferable:
        points = transfer_closure(points)
    return hull(points, meta)


def trace(
    partition: CsitPartition,
    bound: str,
    restriction: Restriction = Restriction.FREE,
    opts: Optional[OptimizerOptions] = None,
    power: float = 1.0,
    seeds: Sequence[Policy] = (),
    seeds_per_direction: Optional[Sequence[Sequence[Policy]]] = None,
) -> Tuple[List[SupportResult], RateRegion]:
    """
    Trace a bound's region by scalarization over the octant directions.

    The regions of all optimum policies and of all seed policies enter the
    hull; for bounds with a common message the rate-transfer closure is
    applied first. Returns the per-direction results with the region.
    """
    opts = opts or OptimizerOptions()
    space = make_space(partition, bound, restriction, power)
    results = _trace(space, opts, seeds, seeds_per_direction)
    extra = list(seeds)
    for own in seeds_per_direction or ():
        extra.extend(own)
    policies = [r.policy for r in results] + [space.feasible_seed(s) for s in extra]
    return results, region_from_policies(space, policies, direction_meta(results))


def direction_meta(results: Sequence[SupportResult]) -> List[Dict[str, object]]:
    return [
        {"direction": i, "weight": list(r.weight), "value": r.value, "policy": r.policy.to_dict()}
        for i, r in enumerate(results)
    ]


def trace_region(
    partition: CsitPartition,
    bound: str,
    restriction: Restriction = Restriction.FREE,
    opts: Optional[OptimizerOptions] = None,
    power: float = 1.0,
    seeds: Sequence[Policy] = (),
    seeds_per_direction: Optional[Sequence[Sequence[Policy]]] = None,
) -> RateRegion:
    return trace(
        partition, bound, restriction, opts, power, seeds, seeds_per_direction
    )[1]


def _map_to_inner(partition: CsitPartition, pol: OuterPolicy) -> InnerPolicy:
    return theorem2_policy_map(partition, pol.alpha, pol.beta, pol.phi)


def trace_bounds(
    partition: CsitPartition,
    inner_bound: str = "inner",
    outer_bound: str = "outer",
    restriction: Restriction = Restriction.FREE,
    opts: Optional[OptimizerOptions] = None,
    power: float = 1.0,
) -> Tuple[List[SupportResult], RateRegion, List[SupportResult], RateRegion]:
    """
    Trace an inner bound and its outer bound so the outer hull contains the inner one.

    In general the inner trace runs first and seeds the outer trace, per
    direction, with its optimum. Under perfect CSIT with free policies the
    outer trace runs first: every outer optimum is mapped onto an inner
    policy with the same constraint values and seeds the inner search. The
    lifted inner optima join the outer hull and their mapped images join
    the inner hull, so both hulls are generated by the same polytopes.

    Returns (inner results, inner region, outer results, outer region).
    """
    opts = opts or OptimizerOptions()
    if not (partition.is_perfect and Restriction(restriction) == Restriction.FREE):
        inner_results, inner_region = trace(partition, inner_bound, opts=opts, power=power)
        outer_results, outer_region = trace(
            partition,
            outer_bound,
            restriction,
            opts=opts,
            power=power,
            seeds_per_direction=[[r.policy] for r in inner_results],
        )
        return inner_results, inner_region, outer_results, outer_region

    inner_space = make_space(partition, inner_bound, power=power)
    outer_space = make_space(partition, outer_bound, power=power)
    outer_results = _trace(outer_space, opts, (), None)
    inner_results = _trace(
        inner_space, opts, [_map_to_inner(partition, r.policy) for r in outer_results], None
    )
    outer_policies = [r.policy for r in outer_results]
    outer_policies += [outer_space.feasible_seed(r.policy) for r in inner_results]
    inner_policies = [r.policy for r in inner_results]
    inner_policies += [_map_to_inner(partition, p) for p in outer_policies]
    logger.info(
        "perfect CSIT: %s hull from %d policies, %s hull from %d policies",
        inner_bound,
        len(inner_policies),
        outer_bound,
        len(outer_policies),
    )
    return (
        inner_results,
        region_from_policies(inner_space, inner_policies, direction_meta(inner_results)),
        outer_results,
        region_from_policies(outer_space, outer_policies, direction_meta(outer_results)),
    )


# ---------------------------------------------------------------------------
# water-filling
# ---------------------------------------------------------------------------


def _group_level(
    gains: np.ndarray, cond: np.ndarray, level: float, tol: float
) -> float:
    """phi >= 0 solving sum p(s|e) g / (1 + g phi) = level, or 0 if none."""
    if math.fsum(cond * gains) <= level:
        return 0.0

    def marginal(phi):
        return math.fsum(cond * gains / (1.0 + gains * phi)) - level

    try:
        return bisect(marginal, 0.0, 1.0 / level, xtol=tol, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise NoConvergence(f"power bisection failed at level {level}: {exc}") from exc


def waterfill_sumrate(
    partition: CsitPartition, power: float, tol: float = 1e-10
) -> Tuple[np.ndarray, float]:
    """
    Maximize E[psi(max(g1, g2) phi(E))] subject to E[phi(E)] <= power.

    Outer bisection on the water level, inner bisection on each symbol's
    power; the result spends the whole budget whenever any gain is positive.
    """
    if not csit_refines_order(partition):
        raise CsitDoesNotDetermineOrder(
            "sum-rate water-filling needs CSIT that reveals the stronger receiver"
        )
    if power < 0 or not math.isfinite(power):
        raise PolicyInfeasible(f"power budget must be finite and >= 0, got {power}")

    dist = partition.dist
    strongest = np.maximum(dist.g1, dist.g2)
    groups = [partition.members(k) for k in range(partition.n_groups)]
    if power == 0:
        phi = np.zeros(partition.n_groups)
        return phi, sumrate_value(partition, phi)
    if not np.any(strongest > 0):
        phi = np.full(partition.n_groups, float(power))
        return phi, 0.0

    def levels(nu: float) -> np.ndarray:
        return np.array(
            [
                _group_level(strongest[idx], partition.conditional_mass[idx], nu, tol)
                for idx in groups
            ]
        )

    def overspend(nu: float) -> float:
        return math.fsum(partition.group_mass * levels(nu)) - power

    nu_high = max(math.fsum(partition.conditional_mass[idx] * strongest[idx]) for idx in groups)
    nu_low = nu_high / 2
    for _ in range(200):
        if overspend(nu_low) > 0:
            break
        nu_low /= 2
    else:
        raise NoConvergence("could not bracket the water level")
    logger.debug("water level bracket [%g, %g]", nu_low, nu_high)

    try:
        nu = bisect(overspend, nu_low, nu_high, xtol=tol * nu_low, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise NoConvergence(f"water level bisection failed: {exc}") from exc

    phi = levels(nu)
    spent = math.fsum(partition.group_mass * phi)
    phi = phi * (power / spent)
    value = sumrate_value(partition, phi)
    logger.info("water-filling: level %.6g, sum rate %.9f bits", nu, value)
    return phi, value
