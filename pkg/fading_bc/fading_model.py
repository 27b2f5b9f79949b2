"""
Fading state law, CSIT quantizers and exact expectations over finite supports.

States are stored as linear power gain pairs (g1, g2) = (|S1|^2, |S2|^2);
phases never enter any of the rate functionals.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from scipy.stats import expon

from .errors import (
    BadGridSpec,
    IncompleteTable,
    InvalidCsitMap,
    MassSumOutOfTolerance,
    NegativeGain,
    NonFiniteFunctional,
    NonPositiveMass,
)

logger = logging.getLogger(__name__)

MASS_TOL = 1e-12
INPUT_MASS_TOL = 1e-9


@dataclass(frozen=True, order=True)
class GainAtom:
    g1: float
    g2: float
    p: float


@dataclass(frozen=True)
class FadingDistribution:
    """Finite joint PMF over gain pairs, atoms sorted by (g1, g2)."""

    atoms: Tuple[GainAtom, ...]
    iid_flag: bool = False

    def __post_init__(self):
        if not self.atoms:
            raise NonPositiveMass("a fading distribution needs at least one atom")
        keys = [(a.g1, a.g2) for a in self.atoms]
        if keys != sorted(keys) or len(set(keys)) != len(keys):
            raise ValueError("atoms must be unique and sorted by (g1, g2)")
        for atom in self.atoms:
            if atom.g1 < 0 or atom.g2 < 0:
                raise NegativeGain(f"negative gain in atom {atom}")
            if not 0 < atom.p <= 1:
                raise NonPositiveMass(f"atom mass outside (0, 1]: {atom}")
        total = math.fsum(a.p for a in self.atoms)
        if abs(total - 1.0) > MASS_TOL:
            raise MassSumOutOfTolerance(f"atom masses sum to {total!r}")

    @cached_property
    def g1(self) -> np.ndarray:
        return _frozen_array([a.g1 for a in self.atoms])

    @cached_property
    def g2(self) -> np.ndarray:
        return _frozen_array([a.g2 for a in self.atoms])

    @cached_property
    def p(self) -> np.ndarray:
        return _frozen_array([a.p for a in self.atoms])

    @cached_property
    def d1(self) -> np.ndarray:
        """Mask of the event {g1 >= g2}; ties belong here."""
        mask = self.g1 >= self.g2
        mask.setflags(write=False)
        return mask

    @cached_property
    def d2(self) -> np.ndarray:
        """Mask of the event {g1 < g2}."""
        mask = ~self.d1
        mask.setflags(write=False)
        return mask

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def to_rows(self) -> List[Tuple[float, float, float]]:
        """Canonical (g1, g2, p) rows, the serialized form of the law."""
        return [(a.g1, a.g2, a.p) for a in self.atoms]


def _frozen_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr.setflags(write=False)
    return arr


def build_discrete(
    atoms: Iterable[Sequence[float]], iid: bool = False
) -> FadingDistribution:
    """
    Build a canonical distribution from (g1, g2, p) triples.

    Duplicate gain pairs are merged by summing their mass. An input whose
    masses sum to within 1e-9 of one is rescaled to sum to one.
    """
    merged: Dict[Tuple[float, float], List[float]] = {}
    for row in atoms:
        g1, g2, p = (float(v) for v in row)
        if not (math.isfinite(g1) and math.isfinite(g2)) or g1 < 0 or g2 < 0:
            raise NegativeGain(f"gains must be finite and >= 0, got ({g1}, {g2})")
        if not p > 0:
            raise NonPositiveMass(f"atom mass must be > 0, got {p}")
        merged.setdefault((g1, g2), []).append(p)

    if not merged:
        raise NonPositiveMass("no atoms given")

    total = math.fsum(p for masses in merged.values() for p in masses)
    if abs(total - 1.0) > INPUT_MASS_TOL:
        raise MassSumOutOfTolerance(
            f"atom masses sum to {total!r}, outside [1-1e-9, 1+1e-9]"
        )

    result = [
        GainAtom(g1, g2, math.fsum(masses) / total)
        for (g1, g2), masses in sorted(merged.items())
    ]
    return FadingDistribution(atoms=tuple(result), iid_flag=iid)


@dataclass(frozen=True)
class RayleighIndependent:
    """Independent Rayleigh fading; the power gains are exponential."""

    mean_gain1: float
    mean_gain2: float


def _exponential_cells(
    mean: float, levels: int, tail_mass: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Equiprobable cells of the upper-truncated exponential law."""
    law = expon(scale=mean)
    edges = law.ppf(np.linspace(0.0, 1.0 - tail_mass, levels + 1))
    lower, upper = edges[:-1], edges[1:]
    e_lower, e_upper = np.exp(-lower / mean), np.exp(-upper / mean)
    # conditional mean of the exponential restricted to [lower, upper]
    reps = mean + (lower * e_lower - upper * e_upper) / (e_lower - e_upper)
    masses = np.full(levels, 1.0 / levels)
    return reps, masses


def quantize_continuous(
    family: RayleighIndependent,
    levels_per_axis: int,
    tail_mass: float,
    iid: bool = True,
) -> FadingDistribution:
    """
    Discretize a continuous fading law into the canonical finite form.

    Each axis is cut into `levels_per_axis` equiprobable cells of the law
    truncated at its upper `tail_mass` quantile (then renormalized), each
    cell represented by its conditional mean. Joint atoms are the products
    of the marginal cells.
    """
    if not isinstance(family, RayleighIndependent):
        raise BadGridSpec(f"unsupported fading family: {family!r}")
    if family.mean_gain1 <= 0 or family.mean_gain2 <= 0:
        raise BadGridSpec("mean gains must be > 0")
    if int(levels_per_axis) != levels_per_axis or levels_per_axis < 2:
        raise BadGridSpec(f"levels_per_axis must be an integer >= 2, got {levels_per_axis}")
    if not 0 < tail_mass < 0.1:
        raise BadGridSpec(f"tail_mass must lie in (0, 0.1), got {tail_mass}")

    levels = int(levels_per_axis)
    reps1, masses1 = _exponential_cells(family.mean_gain1, levels, tail_mass)
    reps2, masses2 = _exponential_cells(family.mean_gain2, levels, tail_mass)
    atoms = [
        (g1, g2, p1 * p2)
        for g1, p1 in zip(reps1, masses1)
        for g2, p2 in zip(reps2, masses2)
    ]
    logger.debug(
        "quantized %r into %d atoms (tail_mass=%g)", family, len(atoms), tail_mass
    )
    return build_discrete(atoms, iid=iid)


class CsitKind(str, Enum):
    PERFECT = "perfect"
    NONE = "none"
    DEGRADEDNESS_BIT = "degradedness_bit"
    TABLE = "table"


@dataclass(frozen=True)
class CsitMap:
    """Deterministic map from state atoms to transmitter-side symbols."""

    kind: CsitKind
    table: Tuple[int, ...] = ()
    symbol_count: int = 0

    @classmethod
    def perfect(cls) -> "CsitMap":
        return cls(CsitKind.PERFECT)

    @classmethod
    def none(cls) -> "CsitMap":
        return cls(CsitKind.NONE, symbol_count=1)

    @classmethod
    def degradedness_bit(cls) -> "CsitMap":
        return cls(CsitKind.DEGRADEDNESS_BIT, symbol_count=2)

    @classmethod
    def from_table(cls, table: Sequence[int], symbol_count: int = 0) -> "CsitMap":
        table = tuple(int(s) for s in table)
        if not symbol_count:
            symbol_count = max(table) + 1 if table else 0
        return cls(CsitKind.TABLE, table=table, symbol_count=symbol_count)

    def symbols_for(self, dist: FadingDistribution) -> np.ndarray:
        """Symbol id of every atom of `dist`."""
        n = dist.n_atoms
        if self.kind == CsitKind.PERFECT:
            return np.arange(n)
        if self.kind == CsitKind.NONE:
            return np.zeros(n, dtype=int)
        if self.kind == CsitKind.DEGRADEDNESS_BIT:
            return dist.d2.astype(int)

        if len(self.table) != n:
            raise IncompleteTable(
                f"CSIT table has {len(self.table)} entries for {n} atoms"
            )
        symbols = np.asarray(self.table, dtype=int)
        if symbols.min() < 0 or symbols.max() >= self.symbol_count:
            raise InvalidCsitMap(f"symbol ids must lie in [0, {self.symbol_count})")
        unused = set(range(self.symbol_count)) - set(symbols.tolist())
        if unused:
            raise InvalidCsitMap(f"symbols never hit by any atom: {sorted(unused)}")
        return symbols


@dataclass(frozen=True, eq=False)
class CsitPartition:
    """
    Factorization of the state law through the CSIT map.

    Groups are the non-empty preimages of the symbols, indexed 0..K-1 in
    increasing symbol order; every policy array indexed "per symbol" uses
    this group index.
    """

    dist: FadingDistribution
    csit: CsitMap
    labels: Tuple[int, ...]
    atom_group: np.ndarray
    group_mass: np.ndarray
    conditional_mass: np.ndarray = field(repr=False)

    @property
    def n_groups(self) -> int:
        return len(self.labels)

    def members(self, group: int) -> np.ndarray:
        return np.flatnonzero(self.atom_group == group)

    @property
    def groups(self) -> Dict[int, Tuple[List[int], List[float], float]]:
        """symbol id -> (atom indices, p(s|e), p(e))"""
        result = {}
        for k, label in enumerate(self.labels):
            idx = self.members(k)
            result[label] = (
                idx.tolist(),
                self.conditional_mass[idx].tolist(),
                float(self.group_mass[k]),
            )
        return result

    @property
    def is_perfect(self) -> bool:
        return self.n_groups == self.dist.n_atoms


def partition_by_csit(dist: FadingDistribution, csit: CsitMap) -> CsitPartition:
    symbols = csit.symbols_for(dist)
    labels = tuple(sorted(set(symbols.tolist())))
    index = {label: k for k, label in enumerate(labels)}
    atom_group = np.array([index[s] for s in symbols.tolist()], dtype=int)

    group_mass = np.array(
        [math.fsum(dist.p[atom_group == k]) for k in range(len(labels))]
    )
    conditional = dist.p / group_mass[atom_group]
    for arr in (atom_group, group_mass, conditional):
        arr.setflags(write=False)
    return CsitPartition(
        dist=dist,
        csit=csit,
        labels=labels,
        atom_group=atom_group,
        group_mass=group_mass,
        conditional_mass=conditional,
    )


Functional = Union[Callable[[np.ndarray, np.ndarray], np.ndarray], Sequence[float]]


def expect(dist: FadingDistribution, f: Functional) -> float:
    """
    Exact expectation sum_atoms p * f(g1, g2).

    `f` is either a vectorized callable on the gain arrays or a per-atom
    array of values.
    """
    if callable(f):
        values = f(dist.g1, dist.g2)
    else:
        values = f
    values = np.broadcast_to(np.asarray(values, dtype=float), (dist.n_atoms,))
    if not np.all(np.isfinite(values)):
        raise NonFiniteFunctional("functional is not finite on every atom")
    return math.fsum(dist.p * values)


def csit_refines_order(partition: CsitPartition) -> bool:
    """True iff every CSIT group lies entirely inside D1 or inside D2."""
    order_bit = partition.dist.d2
    for k in range(partition.n_groups):
        bits = order_bit[partition.atom_group == k]
        if bits.any() and not bits.all():
            return False
    return True


def csit_refines(dist: FadingDistribution, fine: CsitMap, coarse: CsitMap) -> bool:
    """True iff every group of `fine` is contained in one group of `coarse`."""
    fine_groups = partition_by_csit(dist, fine).atom_group
    coarse_groups = partition_by_csit(dist, coarse).atom_group
    for k in np.unique(fine_groups):
        if np.unique(coarse_groups[fine_groups == k]).size > 1:
            return False
    return True
