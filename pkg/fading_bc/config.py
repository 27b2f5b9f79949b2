"""
Run configuration: parsing, validation and serialization.

A config is a YAML mapping with `schema_version: 1`. Numbers may be plain
YAML numbers or quoted decimal strings; both go through Decimal.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

import yaml

from .errors import ConfigError
from .fading_model import (
    CsitKind,
    CsitMap,
    CsitPartition,
    FadingDistribution,
    RayleighIndependent,
    build_discrete,
    partition_by_csit,
    quantize_continuous,
)
from .policy_optimizer import OptimizerOptions
from .rate_functionals import Restriction
from .yaml_utils import dump_yaml, load_yaml, to_decimal

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

FAMILIES = ("rayleigh_independent",)
BOUND_CHOICES = ("inner", "outer", "both")
FORMAT_CHOICES = ("csv", "json", "svg")

# CLI/config spelling -> optimizer restriction
RESTRICTIONS = {
    "free": Restriction.FREE,
    "thm4": Restriction.THM4,
    "thm4-monotone": Restriction.THM4_MONOTONE,
}


@dataclass(frozen=True)
class DistributionSpec:
    atoms: Tuple[Tuple[float, float, float], ...] = ()
    family: Optional[str] = None
    mean_gains: Tuple[float, float] = (1.0, 1.0)
    levels_per_axis: int = 8
    tail_mass: float = 1e-3
    iid: bool = False

    def build(self) -> FadingDistribution:
        if self.family is None:
            return build_discrete(self.atoms, iid=self.iid)
        return quantize_continuous(
            RayleighIndependent(*self.mean_gains),
            self.levels_per_axis,
            self.tail_mass,
            iid=self.iid,
        )


@dataclass(frozen=True)
class CsitSpec:
    kind: str = "perfect"
    table: Tuple[int, ...] = ()

    def build(self) -> CsitMap:
        kind = CsitKind(self.kind)
        if kind == CsitKind.TABLE:
            return CsitMap.from_table(self.table)
        return {
            CsitKind.PERFECT: CsitMap.perfect,
            CsitKind.NONE: CsitMap.none,
            CsitKind.DEGRADEDNESS_BIT: CsitMap.degradedness_bit,
        }[kind]()


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "out"
    formats: Tuple[str, ...] = ("csv", "json")
    svg_r0: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    distribution: DistributionSpec
    csit: CsitSpec = field(default_factory=CsitSpec)
    power: float = 1.0
    bound: str = "both"
    restriction: str = "free"
    optimizer: OptimizerOptions = field(default_factory=OptimizerOptions)
    output: OutputSpec = field(default_factory=OutputSpec)
    schema_version: int = SCHEMA_VERSION

    def partition(self) -> CsitPartition:
        return partition_by_csit(self.distribution.build(), self.csit.build())

    @property
    def restriction_mode(self) -> Restriction:
        return RESTRICTIONS[self.restriction]

    def with_overrides(
        self,
        bound: Optional[str] = None,
        restriction: Optional[str] = None,
        directions: Optional[int] = None,
        seed: Optional[int] = None,
        out: Optional[str] = None,
        formats: Optional[Tuple[str, ...]] = None,
    ) -> "RunConfig":
        """Copy with command-line overrides applied (None keeps the config value)."""
        optimizer = self.optimizer
        if directions is not None:
            optimizer = dataclasses.replace(optimizer, directions=directions)
        if seed is not None:
            optimizer = dataclasses.replace(optimizer, rng_seed=seed)
        output = self.output
        if out is not None:
            output = dataclasses.replace(output, dir=out)
        if formats:
            output = dataclasses.replace(output, formats=tuple(formats))
        return dataclasses.replace(
            self,
            bound=bound or self.bound,
            restriction=restriction or self.restriction,
            optimizer=optimizer,
            output=output,
        )


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _mapping(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(data: dict, allowed, where: str):
    unknown = sorted(set(data) - set(allowed), key=str)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; allowed: {sorted(allowed)}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    try:
        number = float(to_decimal(repr(value) if isinstance(value, float) else value))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    if not math.isfinite(number):
        raise ConfigError(f"{where}: must be finite, got {value!r}")
    return number


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    try:
        number = to_decimal(repr(value) if isinstance(value, float) else value)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    if not number.is_finite() or number != number.to_integral_value():
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return int(number)


def _choice(value, choices, where: str) -> str:
    if value not in choices:
        raise ConfigError(f"{where}: {value!r} is not one of {list(choices)}")
    return value


def _parse_distribution(data) -> DistributionSpec:
    data = _mapping(data, "distribution")
    _reject_unknown(
        data,
        ("atoms", "family", "mean_gains", "levels_per_axis", "tail_mass", "iid"),
        "distribution",
    )
    iid = data.get("iid", False)
    if not isinstance(iid, bool):
        raise ConfigError(f"distribution.iid: expected true/false, got {iid!r}")

    if "atoms" in data and "family" in data:
        raise ConfigError("distribution: give either atoms or family, not both")
    if "atoms" in data:
        extra = {"mean_gains", "levels_per_axis", "tail_mass"} & set(data)
        if extra:
            raise ConfigError(f"distribution: {sorted(extra)} only apply to a family")
        rows = data["atoms"]
        if not isinstance(rows, list) or not rows:
            raise ConfigError("distribution.atoms: expected a non-empty list")
        atoms = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != 3:
                raise ConfigError(f"distribution.atoms[{i}]: expected [g1, g2, p]")
            atoms.append(
                tuple(_number(v, f"distribution.atoms[{i}]") for v in row)
            )
        return DistributionSpec(atoms=tuple(atoms), iid=iid)

    if "family" not in data:
        raise ConfigError("distribution: needs atoms or family")
    family = _choice(data["family"], FAMILIES, "distribution.family")
    gains = data.get("mean_gains", [1.0, 1.0])
    if not isinstance(gains, list) or len(gains) != 2:
        raise ConfigError("distribution.mean_gains: expected [mean_gain1, mean_gain2]")
    return DistributionSpec(
        family=family,
        mean_gains=tuple(_number(g, "distribution.mean_gains") for g in gains),
        levels_per_axis=_integer(data.get("levels_per_axis", 8), "distribution.levels_per_axis"),
        tail_mass=_number(data.get("tail_mass", 1e-3), "distribution.tail_mass"),
        iid=iid,
    )


def _parse_csit(data) -> CsitSpec:
    data = _mapping(data, "csit")
    _reject_unknown(data, ("kind", "table"), "csit")
    kind = _choice(data.get("kind", "perfect"), [k.value for k in CsitKind], "csit.kind")
    table = data.get("table")
    if kind == CsitKind.TABLE.value:
        if not isinstance(table, list) or not table:
            raise ConfigError("csit.table: kind 'table' needs a non-empty list")
        return CsitSpec(kind=kind, table=tuple(_integer(s, "csit.table") for s in table))
    if table is not None:
        raise ConfigError(f"csit.table: only allowed with kind 'table', not {kind!r}")
    return CsitSpec(kind=kind)


def _parse_optimizer(data) -> OptimizerOptions:
    data = _mapping(data, "optimizer")
    names = [f.name for f in dataclasses.fields(OptimizerOptions)]
    _reject_unknown(data, names, "optimizer")
    values = {}
    for name in names:
        if name not in data:
            continue
        if name == "step_tol":
            values[name] = _number(data[name], f"optimizer.{name}")
        else:
            values[name] = _integer(data[name], f"optimizer.{name}")
    try:
        return OptimizerOptions(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_output(data) -> OutputSpec:
    data = _mapping(data, "output")
    _reject_unknown(data, ("dir", "formats", "svg_r0"), "output")
    formats = data.get("formats", ["csv", "json"])
    if isinstance(formats, str):
        formats = [formats]
    if not isinstance(formats, list):
        raise ConfigError("output.formats: expected a list")
    return OutputSpec(
        dir=str(data.get("dir", "out")),
        formats=tuple(_choice(f, FORMAT_CHOICES, "output.formats") for f in formats),
        svg_r0=_number(data.get("svg_r0", 0.0), "output.svg_r0"),
    )


def parse_config(data) -> RunConfig:
    """Validate a loaded YAML mapping and build a RunConfig."""
    data = _mapping(data, "config")
    _reject_unknown(
        data,
        (
            "schema_version",
            "distribution",
            "csit",
            "power",
            "bound",
            "restriction",
            "optimizer",
            "output",
        ),
        "config",
    )
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    if "distribution" not in data:
        raise ConfigError("config: missing distribution")

    power = _number(data.get("power", 1.0), "power")
    if power < 0:
        raise ConfigError(f"power: must be >= 0, got {power}")

    return RunConfig(
        distribution=_parse_distribution(data["distribution"]),
        csit=_parse_csit(data.get("csit")),
        power=power,
        bound=_choice(data.get("bound", "both"), BOUND_CHOICES, "bound"),
        restriction=_choice(data.get("restriction", "free"), RESTRICTIONS, "restriction"),
        optimizer=_parse_optimizer(data.get("optimizer")),
        output=_parse_output(data.get("output")),
    )


def serialize_config(config: RunConfig) -> Dict[str, object]:
    """Plain-data form of a config; parse_config inverts it exactly."""
    dist = config.distribution
    if dist.family is None:
        distribution = {"atoms": [list(row) for row in dist.atoms], "iid": dist.iid}
    else:
        distribution = {
            "family": dist.family,
            "mean_gains": list(dist.mean_gains),
            "levels_per_axis": dist.levels_per_axis,
            "tail_mass": dist.tail_mass,
            "iid": dist.iid,
        }
    csit = {"kind": config.csit.kind}
    if config.csit.table:
        csit["table"] = list(config.csit.table)
    return {
        "schema_version": config.schema_version,
        "distribution": distribution,
        "csit": csit,
        "power": config.power,
        "bound": config.bound,
        "restriction": config.restriction,
        "optimizer": config.optimizer.to_dict(),
        "output": {
            "dir": config.output.dir,
            "formats": list(config.output.formats),
            "svg_r0": config.output.svg_r0,
        },
    }


def dump_config(config: RunConfig) -> str:
    return dump_yaml(serialize_config(config))


def parse_config_text(text: str) -> RunConfig:
    try:
        data = load_yaml(text)
    except (yaml.YAMLError, ValueError) as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return parse_config(data)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    logger.info("loaded config %s", path)
    return parse_config_text(text)
