"""
Run reports and their file renderings (CSV, JSON, SVG).

Everything written here is a pure function of the report, so emitting the
same report twice gives byte-identical files.
"""

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import __version__  # noqa: E402
from .errors import EmitError  # noqa: E402
from .region_geometry import RateRegion, region_slice  # noqa: E402

logger = logging.getLogger(__name__)

SVG_HASH_SALT = "fading-bc"


@dataclass
class RunReport:
    command: str
    config: Dict[str, object]
    regions: Dict[str, RateRegion] = field(default_factory=dict)
    supports: List[Dict[str, object]] = field(default_factory=list)
    summary: Dict[str, object] = field(default_factory=dict)
    tool_version: str = __version__
    wall_clock: Optional[float] = None

    def to_dict(self, include_timing: bool = False) -> Dict[str, object]:
        data = {
            "tool_version": self.tool_version,
            "command": self.command,
            "config": self.config,
            "summary": self.summary,
            "regions": {
                name: {
                    "vertices": region.vertices.tolist(),
                    "provenance": list(region.generator_meta),
                }
                for name, region in self.regions.items()
            },
            "supports": self.supports,
        }
        if include_timing and self.wall_clock is not None:
            data["wall_clock_seconds"] = self.wall_clock
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "RunReport":
        try:
            regions = {
                name: RateRegion(
                    vertices=np.asarray(entry["vertices"], dtype=float).reshape(-1, 3),
                    generator_meta=tuple(entry.get("provenance", ())),
                )
                for name, entry in data["regions"].items()
            }
            return cls(
                command=data["command"],
                config=data["config"],
                regions=regions,
                supports=list(data.get("supports", [])),
                summary=dict(data.get("summary", {})),
                tool_version=data.get("tool_version", __version__),
                wall_clock=data.get("wall_clock_seconds"),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise EmitError(f"malformed run report: {exc}") from exc


def report_json(report: RunReport, include_timing: bool = False) -> str:
    return json.dumps(report.to_dict(include_timing), indent=2, sort_keys=True) + "\n"


def load_report(path) -> RunReport:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise EmitError(f"cannot read run report {path}: {exc}") from exc
    return RunReport.from_dict(data)


def _write_text(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc}") from exc


def emit_region_csv(region: RateRegion, path) -> Path:
    """One `r0,r1,r2` row per vertex, 9 decimals, canonical order."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            for vertex in region.vertices:
                # + 0.0 turns -0.0 into 0.0
                writer.writerow([f"{v + 0.0:.9f}" for v in vertex])
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc}") from exc
    return path


def emit_region_svg(
    region: RateRegion, fixed_r0: float, path, title: Optional[str] = None
) -> Path:
    """(R1, R2) slice of the region at R0 = fixed_r0 as a closed polyline."""
    path = Path(path)
    polygon = region_slice(region, fixed_r0)
    closed = np.vstack([polygon, polygon[:1]])

    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.plot(closed[:, 0], closed[:, 1], color="black", linewidth=1.2, marker="o", markersize=3)
        ax.set_xlabel("R1 [bits/channel use]")
        ax.set_ylabel("R2 [bits/channel use]")
        ax.set_title(title or f"R0 = {fixed_r0:g} bits")
        ax.set_xlim(left=0)
        ax.set_ylim(bottom=0)
        ax.grid(True, linewidth=0.3)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise EmitError(f"cannot write {path}: {exc}") from exc
        finally:
            plt.close(fig)
    return path


def emit_report(
    report: RunReport,
    out_dir,
    formats: Sequence[str],
    svg_r0: float = 0.0,
    include_timing: bool = False,
) -> List[Path]:
    """Write the report's regions and JSON payload; returns the written paths."""
    out_dir = Path(out_dir)
    written = []
    if "json" in formats:
        path = out_dir / "report.json"
        _write_text(path, report_json(report, include_timing))
        written.append(path)
    for name, region in report.regions.items():
        if "csv" in formats:
            written.append(emit_region_csv(region, out_dir / f"{name}.csv"))
        if "svg" in formats:
            written.append(
                emit_region_svg(region, svg_r0, out_dir / f"{name}.svg", title=f"{name}, R0 = {svg_r0:g}")
            )
    for path in written:
        logger.info("wrote %s", path)
    return written
