"""
Closed-form rate expressions for the two-user fading Gaussian broadcast channel.

Inner-bound policies are indexed by CSIT group (see CsitPartition); outer
bound splits alpha/beta are indexed by atom, power phi always by group.
Every expectation is an exact sum over atoms. The event partition used
throughout is D1 = {g1 >= g2} (ties included) and D2 = {g1 < g2}.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    CsitDoesNotDetermineOrder,
    NegativeArgument,
    PolicyInfeasible,
    RequiresPerfectCsit,
)
from .fading_model import CsitPartition, csit_refines_order, expect

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
FRACTION_TOL = 1e-12
BUDGET_TOL = 1e-9

INNER_PATTERNS = ((1, 1, 0), (1, 0, 1), (1, 1, 1), (1, 1, 1))
BOX_PATTERNS = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def psi(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """psi(x) = log2(1 + x), in bits."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise NegativeArgument(f"psi is defined for x >= 0, got {x!r}")
    result = np.log1p(arr) / LN2
    if result.ndim == 0:
        return float(result)
    return result


def _layer(g, signal, interference, phi):
    """psi(g*signal*phi / (g*interference*phi + 1)) elementwise."""
    return np.log1p(g * signal * phi / (g * interference * phi + 1.0)) / LN2


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, ndmin=1)
    if not np.all(np.isfinite(arr)):
        raise PolicyInfeasible(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


def _check_unit_interval(arr: np.ndarray, name: str):
    if np.any(arr < -FRACTION_TOL) or np.any(arr > 1 + FRACTION_TOL):
        raise PolicyInfeasible(f"{name} must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class InnerPolicy:
    """Per-symbol power phi(e) and layer splits alpha(e), beta(e)."""

    phi: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        phi = _frozen(self.phi, "phi")
        alpha = _frozen(self.alpha, "alpha")
        beta = _frozen(self.beta, "beta")
        if not phi.shape == alpha.shape == beta.shape:
            raise PolicyInfeasible("phi, alpha and beta must have one entry per symbol")
        if np.any(phi < 0):
            raise PolicyInfeasible("phi must be >= 0")
        _check_unit_interval(alpha, "alpha")
        _check_unit_interval(beta, "beta")
        if np.any(alpha + beta > 1 + FRACTION_TOL):
            raise PolicyInfeasible("alpha(e) + beta(e) must not exceed 1")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def constant(cls, n_groups: int, phi: float, alpha: float, beta: float):
        return cls(
            phi=np.full(n_groups, phi),
            alpha=np.full(n_groups, alpha),
            beta=np.full(n_groups, beta),
        )

    def to_dict(self) -> Dict[str, List[float]]:
        return {
            "phi": self.phi.tolist(),
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
        }


class Restriction(str, Enum):
    FREE = "free"
    THM4 = "alpha_of_g2_e__beta_of_g1_e"
    THM4_MONOTONE = "monotone_no_csit"


@dataclass(frozen=True, eq=False)
class OuterPolicy:
    """Per-symbol power phi(e) with per-atom splits alpha(s), beta(s)."""

    phi: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    restriction: Restriction = Restriction.FREE

    def __post_init__(self):
        phi = _frozen(self.phi, "phi")
        alpha = _frozen(self.alpha, "alpha")
        beta = _frozen(self.beta, "beta")
        if alpha.shape != beta.shape:
            raise PolicyInfeasible("alpha and beta must have one entry per atom")
        if np.any(phi < 0):
            raise PolicyInfeasible("phi must be >= 0")
        _check_unit_interval(alpha, "alpha")
        _check_unit_interval(beta, "beta")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "restriction", Restriction(self.restriction))

    def to_dict(self) -> Dict[str, object]:
        return {
            "phi": self.phi.tolist(),
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "restriction": self.restriction.value,
        }


Policy = Union[InnerPolicy, OuterPolicy]


@dataclass(frozen=True, eq=False)
class RatePolytope:
    """{R >= 0 : coefficients @ R <= rhs} over (R0, R1, R2)."""

    coefficients: np.ndarray
    rhs: np.ndarray
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float, ndmin=2)
        rhs = np.array(self.rhs, dtype=float, ndmin=1)
        if coefficients.shape != (rhs.size, 3):
            raise ValueError("coefficients must be an (m, 3) array matching rhs")
        if not np.all(np.isin(coefficients, (0.0, 1.0))):
            raise ValueError("constraint coefficients must be 0 or 1")
        if not np.all(np.isfinite(rhs)) or np.any(rhs < 0):
            raise ValueError(f"rhs values must be finite and >= 0, got {rhs}")
        coefficients.setflags(write=False)
        rhs.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "rhs", rhs)

    def contains(self, point: Sequence[float], tol: float = 1e-9) -> bool:
        point = np.asarray(point, dtype=float)
        return bool(
            np.all(point >= -tol) and np.all(self.coefficients @ point <= self.rhs + tol)
        )


@dataclass(frozen=True)
class SecrecyBox:
    r0_cap: float
    r1_cap: float
    r2_cap: float

    def __post_init__(self):
        for name in ("r0_cap", "r1_cap", "r2_cap"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.r0_cap, self.r1_cap, self.r2_cap)

    def as_polytope(self) -> RatePolytope:
        return RatePolytope(BOX_PATTERNS, self.as_tuple(), ("R0", "R1", "R2"))


# ---------------------------------------------------------------------------
# feasibility
# ---------------------------------------------------------------------------


def check_budget(partition: CsitPartition, phi: np.ndarray, power: float):
    if len(phi) != partition.n_groups:
        raise PolicyInfeasible(
            f"phi has {len(phi)} entries for {partition.n_groups} CSIT symbols"
        )
    spent = math.fsum(partition.group_mass * phi)
    if spent > power + BUDGET_TOL:
        raise PolicyInfeasible(f"power budget violated: E[phi] = {spent} > {power}")


def check_inner_policy(
    partition: CsitPartition, pol: InnerPolicy, power: Optional[float] = None
):
    if len(pol.phi) != partition.n_groups:
        raise PolicyInfeasible(
            f"policy has {len(pol.phi)} entries for {partition.n_groups} CSIT symbols"
        )
    if power is not None:
        check_budget(partition, pol.phi, power)


def restriction_keys(partition: CsitPartition) -> Tuple[np.ndarray, np.ndarray]:
    """Per-atom keys that alpha (g2, e) and beta (g1, e) may depend on."""
    dist = partition.dist
    alpha_keys = np.unique(
        np.stack([dist.g2, partition.atom_group.astype(float)], axis=1),
        axis=0,
        return_inverse=True,
    )[1].ravel()
    beta_keys = np.unique(
        np.stack([dist.g1, partition.atom_group.astype(float)], axis=1),
        axis=0,
        return_inverse=True,
    )[1].ravel()
    return alpha_keys, beta_keys


def _constant_on_keys(values: np.ndarray, keys: np.ndarray) -> bool:
    for key in np.unique(keys):
        chunk = values[keys == key]
        if chunk.max() - chunk.min() > FRACTION_TOL:
            return False
    return True


def _non_increasing_in(values: np.ndarray, gains: np.ndarray) -> bool:
    order = np.lexsort((values, gains))
    g, v = gains[order], values[order]
    for i in range(1, len(g)):
        if g[i] == g[i - 1]:
            if abs(v[i] - v[i - 1]) > FRACTION_TOL:
                return False
        elif v[i] > v[i - 1] + FRACTION_TOL:
            return False
    return True


def check_outer_policy(
    partition: CsitPartition, pol: OuterPolicy, power: Optional[float] = None
):
    dist = partition.dist
    if len(pol.phi) != partition.n_groups:
        raise PolicyInfeasible(
            f"policy has {len(pol.phi)} power entries for {partition.n_groups} symbols"
        )
    if len(pol.alpha) != dist.n_atoms:
        raise PolicyInfeasible(
            f"policy has {len(pol.alpha)} split entries for {dist.n_atoms} atoms"
        )
    if power is not None:
        check_budget(partition, pol.phi, power)

    if pol.restriction == Restriction.FREE:
        return
    alpha_keys, beta_keys = restriction_keys(partition)
    if not (
        _constant_on_keys(pol.alpha, alpha_keys)
        and _constant_on_keys(pol.beta, beta_keys)
    ):
        raise PolicyInfeasible(
            "restricted outer policy: alpha must depend on (g2, e) only and "
            "beta on (g1, e) only"
        )
    if pol.restriction == Restriction.THM4_MONOTONE:
        if partition.n_groups != 1:
            raise PolicyInfeasible("monotone restriction requires a single CSIT symbol")
        if not (
            _non_increasing_in(pol.alpha, dist.g2)
            and _non_increasing_in(pol.beta, dist.g1)
        ):
            raise PolicyInfeasible(
                "monotone restriction: alpha must be non-increasing in g2 and "
                "beta non-increasing in g1"
            )


# ---------------------------------------------------------------------------
# inner bound (superposition / Marton with independent Gaussian layers)
# ---------------------------------------------------------------------------


def _per_atom(partition: CsitPartition, values: np.ndarray) -> np.ndarray:
    return np.asarray(values)[partition.atom_group]


def inner_contributions(partition: CsitPartition, pol: InnerPolicy) -> np.ndarray:
    """Per-atom integrands of the four inner constraints, shape (n_atoms, 4)."""
    check_inner_policy(partition, pol)
    dist = partition.dist
    g1, g2 = dist.g1, dist.g2
    phi = _per_atom(partition, pol.phi)
    a = _per_atom(partition, pol.alpha)
    b = _per_atom(partition, pol.beta)

    cloud1 = _layer(g1, 1.0 - a, a, phi)
    cloud2 = _layer(g2, 1.0 - b, b, phi)
    satellite1 = _layer(g1, b, a, phi)
    satellite2 = _layer(g2, a, b, phi)
    return np.stack(
        [cloud1, cloud2, satellite1 + cloud2, cloud1 + satellite2], axis=1
    )


def _polytope_from(
    partition: CsitPartition, contributions: np.ndarray, labels: Tuple[str, ...]
) -> RatePolytope:
    rhs = [expect(partition.dist, contributions[:, j]) for j in range(4)]
    return RatePolytope(INNER_PATTERNS, rhs, labels)


def inner_polytope(
    partition: CsitPartition, pol: InnerPolicy, power: Optional[float] = None
) -> RatePolytope:
    """Constraint set of one inner-bound policy."""
    check_inner_policy(partition, pol, power)
    return _polytope_from(
        partition,
        inner_contributions(partition, pol),
        ("R0+R1", "R0+R2", "R0+R1+R2 (via user 2 cloud)", "R0+R1+R2 (via user 1 cloud)"),
    )


# ---------------------------------------------------------------------------
# outer bound
# ---------------------------------------------------------------------------


def outer_contributions(partition: CsitPartition, pol: OuterPolicy) -> np.ndarray:
    """Per-atom integrands of the four outer constraints, shape (n_atoms, 4)."""
    check_outer_policy(partition, pol)
    dist = partition.dist
    g1, g2, d1, d2 = dist.g1, dist.g2, dist.d1, dist.d2
    phi = _per_atom(partition, pol.phi)
    a, b = pol.alpha, pol.beta

    full1 = _layer(g1, 1.0, 0.0, phi)
    full2 = _layer(g2, 1.0, 0.0, phi)
    cloud1 = _layer(g1, 1.0 - a, a, phi)
    cloud2 = _layer(g2, 1.0 - b, b, phi)

    c1 = np.where(d2, cloud1, full1)
    c2 = np.where(d1, cloud2, full2)
    c3 = np.where(d1, _layer(g1, b, 0.0, phi) + cloud2, full2)
    c4 = np.where(d2, cloud1 + _layer(g2, a, 0.0, phi), full1)
    return np.stack([c1, c2, c3, c4], axis=1)


def outer_polytope(
    partition: CsitPartition, pol: OuterPolicy, power: Optional[float] = None
) -> RatePolytope:
    """Constraint set of one outer-bound policy."""
    check_outer_policy(partition, pol, power)
    return _polytope_from(
        partition,
        outer_contributions(partition, pol),
        ("R0+R1", "R0+R2", "R0+R1+R2 (D1 superposition)", "R0+R1+R2 (D2 superposition)"),
    )


# ---------------------------------------------------------------------------
# secrecy bounds
# ---------------------------------------------------------------------------


def secrecy_inner_contributions(
    partition: CsitPartition, pol: InnerPolicy
) -> np.ndarray:
    """Per-atom integrands (R0 via user 1, R0 via user 2, R1, R2) of the inner box."""
    check_inner_policy(partition, pol)
    dist = partition.dist
    g1, g2 = dist.g1, dist.g2
    phi = _per_atom(partition, pol.phi)
    a = _per_atom(partition, pol.alpha)
    b = _per_atom(partition, pol.beta)

    common = np.clip(1.0 - a - b, 0.0, None)
    private = a + b
    r0_user1 = _layer(g1, common, private, phi)
    r0_user2 = _layer(g2, common, private, phi)
    r1 = _layer(g1, b, a, phi) - _layer(g2, b, 0.0, phi)
    r2 = _layer(g2, a, b, phi) - _layer(g1, a, 0.0, phi)
    return np.stack([r0_user1, r0_user2, r1, r2], axis=1)


def secrecy_inner_box(
    partition: CsitPartition, pol: InnerPolicy, power: Optional[float] = None
) -> SecrecyBox:
    """Achievable secrecy box; positive parts wrap the expectation differences."""
    check_inner_policy(partition, pol, power)
    terms = secrecy_inner_contributions(partition, pol)
    dist = partition.dist
    return SecrecyBox(
        r0_cap=min(expect(dist, terms[:, 0]), expect(dist, terms[:, 1])),
        r1_cap=max(expect(dist, terms[:, 2]), 0.0),
        r2_cap=max(expect(dist, terms[:, 3]), 0.0),
    )


def secrecy_outer_contributions(
    partition: CsitPartition, pol: OuterPolicy
) -> np.ndarray:
    """Per-atom integrands (R0 via user 1, R0 via user 2, R1, R2) of the outer box."""
    check_outer_policy(partition, pol)
    dist = partition.dist
    g1, g2, d1, d2 = dist.g1, dist.g2, dist.d1, dist.d2
    phi = _per_atom(partition, pol.phi)
    a, b = pol.alpha, pol.beta

    r0_user1 = np.where(d2, _layer(g1, 1.0 - a, a, phi), _layer(g1, 1.0 - b, b, phi))
    r0_user2 = np.where(d2, _layer(g2, 1.0 - a, a, phi), _layer(g2, 1.0 - b, b, phi))
    r1 = np.where(d1, _layer(g1, b, 0.0, phi) - _layer(g2, b, 0.0, phi), 0.0)
    r2 = np.where(d2, _layer(g2, a, 0.0, phi) - _layer(g1, a, 0.0, phi), 0.0)
    return np.stack([r0_user1, r0_user2, r1, r2], axis=1)


def secrecy_outer_box(
    partition: CsitPartition, pol: OuterPolicy, power: Optional[float] = None
) -> SecrecyBox:
    check_outer_policy(partition, pol, power)
    terms = secrecy_outer_contributions(partition, pol)
    dist = partition.dist
    return SecrecyBox(
        r0_cap=min(expect(dist, terms[:, 0]), expect(dist, terms[:, 1])),
        r1_cap=expect(dist, terms[:, 2]),
        r2_cap=expect(dist, terms[:, 3]),
    )


def full_split_policy(partition: CsitPartition, phi: Sequence[float]) -> OuterPolicy:
    """Outer policy with alpha = beta = 1 on every atom."""
    n = partition.dist.n_atoms
    return OuterPolicy(phi=phi, alpha=np.ones(n), beta=np.ones(n))


def secrecy_outer_nocommon(
    partition: CsitPartition, phi: Sequence[float], power: Optional[float] = None
) -> Tuple[float, float]:
    """(R1, R2) caps of the secrecy outer bound without a common message."""
    box = secrecy_outer_box(partition, full_split_policy(partition, phi), power)
    return box.r1_cap, box.r2_cap


def perfect_nocommon_rectangle(
    partition: CsitPartition, pol: OuterPolicy, power: Optional[float] = None
) -> SecrecyBox:
    """Private-message rectangle of the perfect-CSIT capacity region (R0 = 0)."""
    check_outer_policy(partition, pol, power)
    dist = partition.dist
    g1, g2, d1, d2 = dist.g1, dist.g2, dist.d1, dist.d2
    phi = _per_atom(partition, pol.phi)
    a, b = pol.alpha, pol.beta

    r1 = np.where(d2, _layer(g1, 1.0 - a, a, phi), _layer(g1, b, 0.0, phi))
    r2 = np.where(d1, _layer(g2, 1.0 - b, b, phi), _layer(g2, a, 0.0, phi))
    return SecrecyBox(0.0, expect(dist, r1), expect(dist, r2))


# ---------------------------------------------------------------------------
# sum-rate and policy maps
# ---------------------------------------------------------------------------


def _require_order(partition: CsitPartition):
    if not csit_refines_order(partition):
        raise CsitDoesNotDetermineOrder(
            "the CSIT map does not reveal which receiver is stronger on every symbol"
        )


def sumrate_value(partition: CsitPartition, phi: Sequence[float]) -> float:
    """E[psi(max(g1, g2) * phi(E))]."""
    _require_order(partition)
    dist = partition.dist
    phi_atom = _per_atom(partition, phi)
    strongest = np.maximum(dist.g1, dist.g2)
    return expect(dist, _layer(strongest, 1.0, 0.0, phi_atom))


def degradedness_split_policy(
    partition: CsitPartition, phi: Sequence[float]
) -> InnerPolicy:
    """
    Satellite layer to the stronger receiver on every symbol.

    alpha = 1 on symbols inside {g1 < g2}, beta = 1 on symbols inside
    {g1 >= g2}.
    """
    _require_order(partition)
    reversed_group = np.zeros(partition.n_groups, dtype=bool)
    reversed_group[partition.atom_group[partition.dist.d2]] = True
    return InnerPolicy(
        phi=np.asarray(phi, dtype=float),
        alpha=reversed_group.astype(float),
        beta=(~reversed_group).astype(float),
    )


def theorem2_policy_map(
    partition: CsitPartition,
    alpha_star: Sequence[float],
    beta_star: Sequence[float],
    phi: Sequence[float],
) -> InnerPolicy:
    """
    Map per-atom outer splits onto an inner policy under perfect CSIT.

    alpha keeps alpha* on {g1 < g2} and is 0 elsewhere; beta keeps beta*
    on {g1 >= g2} and is 0 elsewhere, so alpha + beta <= 1 holds.
    """
    if not partition.is_perfect:
        raise RequiresPerfectCsit("the policy map needs one CSIT symbol per atom")
    dist = partition.dist
    alpha_star = np.asarray(alpha_star, dtype=float)
    beta_star = np.asarray(beta_star, dtype=float)
    alpha = np.zeros(partition.n_groups)
    beta = np.zeros(partition.n_groups)
    alpha[partition.atom_group] = np.where(dist.d2, alpha_star, 0.0)
    beta[partition.atom_group] = np.where(dist.d1, beta_star, 0.0)
    return InnerPolicy(phi=np.asarray(phi, dtype=float), alpha=alpha, beta=beta)


def lift_inner_to_outer(
    partition: CsitPartition,
    pol: InnerPolicy,
    restriction: Restriction = Restriction.FREE,
) -> OuterPolicy:
    """Outer policy whose polytope contains the inner polytope of `pol`."""
    return OuterPolicy(
        phi=pol.phi,
        alpha=_per_atom(partition, pol.alpha),
        beta=_per_atom(partition, pol.beta),
        restriction=restriction,
    )


def lift_secrecy_inner_to_outer(
    partition: CsitPartition,
    pol: InnerPolicy,
    restriction: Restriction = Restriction.FREE,
) -> OuterPolicy:
    """Outer policy whose secrecy box contains the inner secrecy box of `pol`."""
    private = np.clip(_per_atom(partition, pol.alpha + pol.beta), 0.0, 1.0)
    return OuterPolicy(
        phi=pol.phi, alpha=private, beta=private, restriction=restriction
    )


def pullback_inner_policy(
    fine: CsitPartition, coarse: CsitPartition, pol: InnerPolicy
) -> InnerPolicy:
    """Express a policy on the coarse CSIT map as one on a refining map."""
    coarse_of_fine = np.empty(fine.n_groups, dtype=int)
    for k in range(fine.n_groups):
        parents = np.unique(coarse.atom_group[fine.members(k)])
        if parents.size != 1:
            raise PolicyInfeasible("the fine CSIT map does not refine the coarse one")
        coarse_of_fine[k] = parents[0]
    return InnerPolicy(
        phi=pol.phi[coarse_of_fine],
        alpha=pol.alpha[coarse_of_fine],
        beta=pol.beta[coarse_of_fine],
    )
