"""
Bundled verification suites run by `fading-bc verify`.

Each suite draws seeded random instances and checks one family of exact
identities or inequalities. Suites are registered by name in VERIFY_SUITES.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .fading_model import (
    CsitMap,
    CsitPartition,
    FadingDistribution,
    build_discrete,
    partition_by_csit,
)
from .gaussian_oracle import (
    U,
    V,
    W,
    Y1,
    Y2,
    SignalingSpec,
    closed_forms,
    gaussian_mi,
    joint_covariance,
    marton_functionals,
    verify_closed_forms,
)
from .policy_optimizer import (
    OptimizerOptions,
    make_space,
    max_weighted,
    region_from_policies,
    trace_bounds,
    trace_region,
    trace_supports,
    waterfill_sumrate,
)
from .rate_functionals import (
    InnerPolicy,
    OuterPolicy,
    Restriction,
    degradedness_split_policy,
    inner_contributions,
    inner_polytope,
    outer_contributions,
    psi,
    secrecy_inner_box,
    secrecy_inner_contributions,
    secrecy_outer_box,
    secrecy_outer_contributions,
    secrecy_outer_nocommon,
    sumrate_value,
    theorem2_policy_map,
)
from .region_geometry import contains, hull, octant_directions, support

logger = logging.getLogger(__name__)

CHECK_DIRECTIONS = 64


@dataclass(frozen=True)
class SuiteResult:
    name: str
    ok: bool
    checks: int
    worst: float
    detail: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "ok": self.ok,
            "checks": self.checks,
            "worst": self.worst,
            "detail": self.detail,
        }


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------


def random_distribution(
    rng: np.random.Generator,
    n_atoms: int,
    iid: bool = False,
    scale: float = 2.0,
    concentration: float = 1.0,
) -> FadingDistribution:
    gains = rng.exponential(scale, size=(n_atoms, 2))
    masses = rng.dirichlet(np.full(n_atoms, concentration))
    return build_discrete(np.column_stack([gains, masses]), iid=iid)


def random_table(rng: np.random.Generator, n_atoms: int, n_symbols: int) -> CsitMap:
    raw = rng.integers(0, n_symbols, size=n_atoms)
    _, table = np.unique(raw, return_inverse=True)
    return CsitMap.from_table(table.ravel().tolist())


def random_csit(rng: np.random.Generator, kind: str, n_atoms: int) -> CsitMap:
    if kind == "perfect":
        return CsitMap.perfect()
    if kind == "none":
        return CsitMap.none()
    if kind == "degradedness_bit":
        return CsitMap.degradedness_bit()
    return random_table(rng, n_atoms, max(1, n_atoms // 2))


def random_splits(rng: np.random.Generator, size) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform (alpha, beta) on the triangle alpha + beta <= 1."""
    a, b = rng.uniform(size=size), rng.uniform(size=size)
    flip = a + b > 1
    a[flip], b[flip] = 1 - a[flip], 1 - b[flip]
    return a, b


def random_inner_policy(
    rng: np.random.Generator, partition: CsitPartition, power: float
) -> InnerPolicy:
    phi = rng.uniform(0, 1, partition.n_groups)
    phi *= power / math.fsum(partition.group_mass * phi)
    alpha, beta = random_splits(rng, partition.n_groups)
    return InnerPolicy(phi=phi, alpha=alpha, beta=beta)


def _stronger_weak_pair(rng: np.random.Generator) -> Tuple[float, float]:
    g = np.sort(rng.exponential(2.0, size=2))
    return float(g[1]) + 1e-3, float(g[0])


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


class VerifySuite(ABC):
    """Abstract base class for verification suites."""

    name = ""
    description = ""

    @abstractmethod
    def run(self, rng: np.random.Generator, quick: bool = False) -> SuiteResult:
        """
        Run the suite on instances drawn from `rng`.

        Args:
            rng: Random generator owned by this suite run
            quick: Use reduced draw counts

        Returns:
            SuiteResult with the worst observed deviation
        """
        pass

    def result(self, ok: bool, checks: int, worst: float, detail: str = "") -> SuiteResult:
        return SuiteResult(self.name, bool(ok), int(checks), float(worst), detail)


class OracleEquivalenceSuite(VerifySuite):
    name = "oracle_equivalence"
    description = "closed-form inner-bound terms vs Gaussian log-det oracle"

    def run(self, rng, quick=False):
        draws = 100 if quick else 1000
        worst = 0.0
        sanity_ok = True
        alpha, beta = random_splits(rng, draws)
        for i in range(draws):
            g1, g2 = rng.exponential(2.0, size=2)
            spec = SignalingSpec(
                phi=float(rng.uniform(0, 5)),
                alpha=float(alpha[i]),
                beta=float(min(beta[i], 1 - alpha[i])),
                g1=float(g1),
                g2=float(g2),
            )
            funcs = marton_functionals(spec)
            worst = max(
                worst,
                max(abs(x - y) for x, y in zip(funcs.as_tuple()[:4], closed_forms(spec))),
            )
            sanity_ok &= funcs.f5 <= 1e-9
            sanity_ok &= funcs.f3 <= funcs.f1 + 1e-9 and funcs.f4 <= funcs.f2 + 1e-9
            if spec.g2 <= spec.g1:
                cov = joint_covariance(spec)
                leak2 = gaussian_mi(cov, (V,), (Y2,), (W, U), complex_valued=True)
                leak1 = gaussian_mi(cov, (V,), (Y1,), (W, U), complex_valued=True)
                sanity_ok &= leak2 <= leak1 + 1e-9

        for _ in range(5 if quick else 20):
            dist = random_distribution(rng, int(rng.integers(1, 9)))
            partition = partition_by_csit(dist, CsitMap.perfect())
            report = verify_closed_forms(partition, random_inner_policy(rng, partition, 1.0))
            worst = max(worst, report.max_abs_err)

        ok = worst <= 1e-9 and sanity_ok
        return self.result(ok, draws, worst, "" if sanity_ok else "sanity inequality violated")


class Theorem2IdentitySuite(VerifySuite):
    name = "theorem2_identity"
    description = "perfect-CSIT policy map reproduces the outer constraints atom by atom"

    region_opts = OptimizerOptions(
        directions=CHECK_DIRECTIONS, restarts=1, grid_seed_levels=3, step_tol=1e-3, max_iters=15
    )

    def run(self, rng, quick=False):
        draws = 100 if quick else 1000
        worst = 0.0
        for _ in range(draws):
            dist = random_distribution(rng, int(rng.integers(1, 17)))
            partition = partition_by_csit(dist, CsitMap.perfect())
            alpha_star = rng.uniform(size=dist.n_atoms)
            beta_star = rng.uniform(size=dist.n_atoms)
            phi = rng.uniform(0, 4, size=dist.n_atoms)
            outer = outer_contributions(
                partition, OuterPolicy(phi=phi, alpha=alpha_star, beta=beta_star)
            )
            inner = inner_contributions(
                partition, theorem2_policy_map(partition, alpha_star, beta_star, phi)
            )
            worst = max(worst, float(np.max(np.abs(outer - inner))))

        region_gap = 0.0
        opts = self.region_opts
        if quick:
            opts = OptimizerOptions(
                directions=8, restarts=1, grid_seed_levels=3, step_tol=1e-3, max_iters=10
            )
        directions = octant_directions(CHECK_DIRECTIONS)
        for _ in range(2 if quick else 10):
            dist = random_distribution(rng, int(rng.integers(1, 5)))
            partition = partition_by_csit(dist, CsitMap.perfect())
            _, inner_region, _, outer_region = trace_bounds(
                partition, "inner", "outer", opts=opts, power=1.0
            )
            gap = max(
                abs(support(inner_region, w) - support(outer_region, w)) for w in directions
            )
            region_gap = max(region_gap, gap)

        ok = worst <= 1e-12 and region_gap <= 1e-6
        return self.result(ok, draws, max(worst, region_gap), f"region gap {region_gap:.3g}")


class Theorem7IdentitySuite(VerifySuite):
    name = "theorem7_identity"
    description = "perfect-CSIT policy map reproduces the secrecy outer box atom by atom"

    def run(self, rng, quick=False):
        draws = 100 if quick else 1000
        worst = 0.0
        for _ in range(draws):
            dist = random_distribution(rng, int(rng.integers(1, 17)))
            partition = partition_by_csit(dist, CsitMap.perfect())
            alpha_star = rng.uniform(size=dist.n_atoms)
            beta_star = rng.uniform(size=dist.n_atoms)
            phi = rng.uniform(0, 4, size=dist.n_atoms)
            outer_pol = OuterPolicy(phi=phi, alpha=alpha_star, beta=beta_star)
            inner_pol = theorem2_policy_map(partition, alpha_star, beta_star, phi)
            atom_gap = np.max(
                np.abs(
                    secrecy_outer_contributions(partition, outer_pol)
                    - secrecy_inner_contributions(partition, inner_pol)
                )
            )
            box_gap = max(
                abs(x - y)
                for x, y in zip(
                    secrecy_outer_box(partition, outer_pol).as_tuple(),
                    secrecy_inner_box(partition, inner_pol).as_tuple(),
                )
            )
            worst = max(worst, float(atom_gap), box_gap)
        return self.result(worst <= 1e-12, draws, worst)


class BetaMonotonicitySuite(VerifySuite):
    name = "beta_monotonicity"
    description = "superposition sum rate is non-decreasing in beta when g1 > g2"

    def run(self, rng, quick=False):
        draws = 100 if quick else 1000
        grid = np.linspace(0.0, 1.0, 1000)
        worst_drop = 0.0
        for _ in range(draws):
            g1, g2 = _stronger_weak_pair(rng)
            phi = float(rng.uniform(0, 10))
            values = psi(g1 * grid * phi) + psi(g2 * (1 - grid) * phi / (g2 * grid * phi + 1))
            worst_drop = max(worst_drop, float(-np.min(np.diff(values))))
        return self.result(worst_drop <= 1e-12, draws, worst_drop)


class ContainmentSuite(VerifySuite):
    name = "containment"
    description = "inner regions inside outer regions; restricted outer inside unrestricted"

    opts = OptimizerOptions(
        directions=4, restarts=1, grid_seed_levels=3, step_tol=1e-4, max_iters=12
    )
    kinds = ("perfect", "none", "degradedness_bit", "table")

    def _pair(self, partition, inner_bound, outer_bound, restriction, power):
        inner_results = trace_supports(partition, inner_bound, opts=self.opts, power=power)
        inner = region_from_policies(
            make_space(partition, inner_bound, power=power), [r.policy for r in inner_results]
        )
        outer = trace_region(
            partition,
            outer_bound,
            restriction,
            opts=self.opts,
            power=power,
            seeds_per_direction=[[r.policy] for r in inner_results],
        )
        return inner, outer

    def run(self, rng, quick=False):
        instances = 8 if quick else 50
        directions = octant_directions(CHECK_DIRECTIONS)
        worst = -math.inf
        failures: List[str] = []
        for i in range(instances):
            kind = self.kinds[i % len(self.kinds)]
            iid = bool(i % 2)
            dist = random_distribution(rng, int(rng.integers(1, 5)), iid=iid)
            partition = partition_by_csit(dist, random_csit(rng, kind, dist.n_atoms))
            power = float(rng.uniform(0.2, 5))

            for inner_bound, outer_bound in (("inner", "outer"), ("secrecy_inner", "secrecy_outer")):
                inner, outer = self._pair(partition, inner_bound, outer_bound, Restriction.FREE, power)
                report = contains(outer, inner, directions, tol=1e-9)
                worst = max(worst, report.worst_gap)
                if not report.ok:
                    failures.append(f"{inner_bound}/{kind}#{i}")

            if iid:
                mode = Restriction.THM4_MONOTONE if partition.n_groups == 1 else Restriction.THM4
                restricted_results = trace_supports(
                    partition, "outer", mode, opts=self.opts, power=power
                )
                restricted = region_from_policies(
                    make_space(partition, "outer", mode, power),
                    [r.policy for r in restricted_results],
                )
                free = trace_region(
                    partition,
                    "outer",
                    opts=self.opts,
                    power=power,
                    seeds_per_direction=[[r.policy] for r in restricted_results],
                )
                report = contains(free, restricted, directions, tol=1e-9)
                worst = max(worst, report.worst_gap)
                if not report.ok:
                    failures.append(f"restricted/{kind}#{i}")

        return self.result(not failures, instances, worst, ", ".join(failures))


class WaterfillingVsGridSuite(VerifySuite):
    name = "waterfilling_vs_grid"
    description = "sum-rate water-filling vs exhaustive power grids"

    grid_step = 1e-3

    @staticmethod
    def _shares(k: int, step: float, center=None, radius: float = 1.0) -> np.ndarray:
        """Budget shares on a lattice over the first k-1 symbols; the last takes the rest."""
        if center is None:
            axes = [np.arange(int(round(1.0 / step)) + 1) * step] * (k - 1)
        else:
            offsets = np.arange(-int(round(radius / step)), int(round(radius / step)) + 1) * step
            axes = [c + offsets for c in center[: k - 1]]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k - 1)
        mesh = mesh[np.all(mesh >= -1e-12, axis=1) & (mesh.sum(axis=1) <= 1.0 + 1e-12)]
        mesh = np.maximum(mesh, 0.0)
        return np.column_stack([mesh, np.maximum(1.0 - mesh.sum(axis=1), 0.0)])

    def _grid_best(self, partition: CsitPartition, power: float) -> float:
        k = partition.n_groups
        mass = partition.group_mass
        if k == 1:
            return self._best_of(partition, np.full((1, 1), power / mass[0]))[0]
        if k == 2:
            phi1 = np.arange(0.0, power / mass[0], self.grid_step * power)
            phi1 = np.append(phi1, power / mass[0])
            phi = np.column_stack([phi1, np.maximum(power - mass[0] * phi1, 0.0) / mass[1]])
            return self._best_of(partition, phi)[0]
        if k == 3:
            shares = self._shares(k, self.grid_step)
            return self._best_of(partition, shares * power / mass)[0]

        # coarse lattice, then finer lattices around the best cell; the
        # objective is concave in the shares
        shares = self._shares(k, 0.05)
        value, best = self._best_of(partition, shares * power / mass)
        for step, radius in ((5e-3, 0.05), (self.grid_step, 5e-3)):
            shares = self._shares(k, step, center=shares[best], radius=radius)
            value, best = self._best_of(partition, shares * power / mass)
        return value

    @staticmethod
    def _best_of(partition: CsitPartition, phi: np.ndarray) -> Tuple[float, int]:
        dist = partition.dist
        strongest = np.maximum(dist.g1, dist.g2)
        per_atom = phi[:, partition.atom_group]
        values = (np.log2(1.0 + strongest * per_atom) * dist.p).sum(axis=1)
        best = int(np.argmax(values))
        return float(values[best]), best

    def run(self, rng, quick=False):
        instances = 5 if quick else 20
        worst = 0.0
        ok = True
        for i in range(instances):
            # no near-empty symbols: the grid step is in absolute power
            dist = random_distribution(
                rng, int(rng.integers(1, 5)), scale=1.0, concentration=5.0
            )
            csit = CsitMap.degradedness_bit() if i % 2 else CsitMap.perfect()
            partition = partition_by_csit(dist, csit)
            power = float(rng.uniform(0.2, 2))
            phi_star, value = waterfill_sumrate(partition, power)
            grid = self._grid_best(partition, power)
            ok &= value >= grid - 1e-9
            ok &= abs(value - grid) <= 1e-3
            worst = max(worst, abs(value - grid))

            split = inner_polytope(partition, degradedness_split_policy(partition, phi_star))
            gap = max(abs(split.rhs[2] - value), abs(split.rhs[3] - value))
            ok &= gap <= 1e-12
            worst = max(worst, gap)

        example = partition_by_csit(
            build_discrete([(3.0, 0.0, 0.5), (1.0, 0.0, 0.5)]), CsitMap.perfect()
        )
        phi_star, value = waterfill_sumrate(example, 1.0)
        # atoms sort as (1, 0) then (3, 0)
        example_err = max(
            abs(phi_star[0] - 2 / 3),
            abs(phi_star[1] - 4 / 3),
            abs(value - 0.5 * math.log2(25 / 3)),
        )
        ok &= example_err <= 1e-6
        return self.result(ok, instances + 1, max(worst, example_err))


class Theorem8RectangleSuite(VerifySuite):
    name = "theorem8_rectangle"
    description = "degradedness-bit secrecy inner assignment meets the no-common outer rectangle"

    def run(self, rng, quick=False):
        draws = 20 if quick else 200
        worst = 0.0
        for _ in range(draws):
            dist = random_distribution(rng, int(rng.integers(1, 9)))
            partition = partition_by_csit(dist, CsitMap.degradedness_bit())
            phi = rng.uniform(0, 4, size=partition.n_groups)
            box = secrecy_inner_box(partition, degradedness_split_policy(partition, phi))
            r1_cap, r2_cap = secrecy_outer_nocommon(partition, phi)
            worst = max(worst, abs(box.r1_cap - r1_cap), abs(box.r2_cap - r2_cap))

        symmetric = partition_by_csit(
            build_discrete([(3.0, 1.0, 0.5), (1.0, 3.0, 0.5)]), CsitMap.degradedness_bit()
        )
        r1_cap, r2_cap = secrecy_outer_nocommon(symmetric, [1.0, 1.0])
        rectangle = hull([(0.0, r1_cap, r2_cap)])
        example_err = max(
            abs(r1_cap - 0.5), abs(r2_cap - 0.5), abs(support(rectangle, (0, 1, 1)) - 1.0)
        )
        ok = worst <= 1e-12 and example_err <= 1e-9
        return self.result(ok, draws + 1, max(worst, example_err))


class DegenerateCasesSuite(VerifySuite):
    name = "degenerate_cases"
    description = "zero power, single-state superposition curve, uniformly degraded secrecy"

    opts = OptimizerOptions(
        directions=4, restarts=2, grid_seed_levels=5, step_tol=1e-7, max_iters=500
    )

    def run(self, rng, quick=False):
        failures: List[str] = []
        worst = 0.0

        dist = random_distribution(rng, 3)
        partition = partition_by_csit(dist, CsitMap.none())
        for bound in ("inner", "outer", "secrecy_inner", "secrecy_outer"):
            region = trace_region(partition, bound, opts=self.opts, power=0.0)
            if np.any(region.vertices != 0):
                failures.append(f"zero power {bound}")

        for _ in range(2 if quick else 5):
            g1, g2 = _stronger_weak_pair(rng)
            single = partition_by_csit(build_discrete([(g1, g2, 1.0)]), CsitMap.none())
            power = float(rng.uniform(0.5, 5))
            beta = float(rng.uniform(0.1, 0.9))
            curve = np.array(
                [
                    0.0,
                    psi(g1 * beta * power),
                    psi(g2 * (1 - beta) * power / (g2 * beta * power + 1)),
                ]
            )
            normal = np.array(
                [0.0, g2 / (1 + g2 * beta * power), g1 / (1 + g1 * beta * power)]
            )
            normal /= np.linalg.norm(normal)
            found = max_weighted(single, "inner", normal, opts=self.opts, power=power)
            gap = abs(found.value - float(normal @ curve))
            worst = max(worst, gap)
            if gap > 1e-6:
                failures.append(f"superposition curve gap {gap:.3g}")

        gains = np.sort(rng.exponential(2.0, size=(4, 2)), axis=1)
        # g1 >= g2 on every atom
        degraded = build_discrete([(hi, lo, 0.25) for lo, hi in gains])
        partition = partition_by_csit(degraded, CsitMap.none())
        if secrecy_outer_nocommon(partition, [1.0])[1] != 0.0:
            failures.append("degraded secrecy r2 cap")
        if sumrate_value(partition_by_csit(degraded, CsitMap.perfect()), np.zeros(4)) != 0.0:
            failures.append("zero power sum rate")

        return self.result(not failures, 1, worst, ", ".join(failures))


VERIFY_SUITES: Dict[str, VerifySuite] = {
    "oracle_equivalence": OracleEquivalenceSuite(),
    "theorem2_identity": Theorem2IdentitySuite(),
    "theorem7_identity": Theorem7IdentitySuite(),
    "beta_monotonicity": BetaMonotonicitySuite(),
    "containment": ContainmentSuite(),
    "waterfilling_vs_grid": WaterfillingVsGridSuite(),
    "theorem8_rectangle": Theorem8RectangleSuite(),
    "degenerate_cases": DegenerateCasesSuite(),
}


def run_suites(names=None, seed: int = 0, quick: bool = False) -> List[SuiteResult]:
    """Run the named suites (all by default) in registry order."""
    selected = list(VERIFY_SUITES) if not names else list(names)
    unknown = [n for n in selected if n not in VERIFY_SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {unknown}")
    results = []
    for index, name in enumerate(VERIFY_SUITES):
        if name not in selected:
            continue
        rng = np.random.default_rng([seed, index])
        result = VERIFY_SUITES[name].run(rng, quick=quick)
        logger.info("suite %s: ok=%s worst=%.3g", name, result.ok, result.worst)
        results.append(result)
    return results
