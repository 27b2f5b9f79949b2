"""Test utilities for fading-bc tests."""

from pathlib import Path
from typing import List, Sequence, Tuple
from unittest.mock import patch

import numpy as np

from fading_bc.__main__ import main
from fading_bc.region_geometry import RateRegion, hull, octant_directions, support


def discover_test_configs(configs_dir: Path) -> List[Tuple[str, Path]]:
    """
    Discover all sample run configs in the configs directory.

    Returns a list of (config_name, config_path) tuples.
    """
    return [(path.stem, path) for path in sorted(configs_dir.glob("*.yaml"))]


def run_main(args: Sequence[str]) -> int:
    """Run the CLI entry point with `args`; returns the exit code."""
    test_args = ["fading-bc", *args]
    with patch("sys.argv", test_args):
        with patch("pyperclip.copy"):  # Disable clipboard
            try:
                main()
            except SystemExit as exc:
                return int(exc.code or 0)
    return 0


def region_contains_point(region: RateRegion, point, tol: float = 1e-9) -> bool:
    """Support-function test of a single point against a region."""
    directions = np.vstack([np.eye(3), octant_directions(256)])
    target = hull([point])
    return all(support(target, w) <= support(region, w) + tol for w in directions)
