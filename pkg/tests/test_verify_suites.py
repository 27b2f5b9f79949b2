"""Test the built-in verification suites."""

import numpy as np
import pytest

from fading_bc.fading_model import csit_refines_order, partition_by_csit
from fading_bc.verify_suites import (
    VERIFY_SUITES,
    random_csit,
    random_distribution,
    random_inner_policy,
    random_splits,
    run_suites,
)


class TestSuites:
    """Run every suite on its quick setting."""

    @pytest.mark.parametrize("suite_name", list(VERIFY_SUITES))
    def test_quick_suite_passes(self, suite_name):
        """Test that each suite passes on its quick setting."""
        (result,) = run_suites([suite_name], seed=0, quick=True)
        assert result.name == suite_name
        assert result.ok, result.detail
        assert result.checks > 0

    def test_registry_order_is_kept(self):
        """Test that suites run in registry order whatever the request order."""
        names = ["beta_monotonicity", "oracle_equivalence"]
        results = run_suites(names, quick=True)
        assert [r.name for r in results] == ["oracle_equivalence", "beta_monotonicity"]

    def test_same_seed_same_result(self):
        """Test that a fixed seed reproduces the suite result."""
        first = run_suites(["theorem7_identity"], seed=5, quick=True)
        second = run_suites(["theorem7_identity"], seed=5, quick=True)
        assert first == second

    def test_unknown_suite(self):
        """Test that an unknown suite name is rejected."""
        with pytest.raises(KeyError):
            run_suites(["no_such_suite"])


class TestRandomInstances:
    """Test the random instance generators used by the suites."""

    def test_distribution_masses(self):
        """Test that random distributions carry unit mass."""
        dist = random_distribution(np.random.default_rng(1), 6)
        assert dist.n_atoms == 6
        assert abs(dist.p.sum() - 1.0) <= 1e-12

    @pytest.mark.parametrize("kind", ["perfect", "none", "degradedness_bit", "table"])
    def test_csit_maps_partition(self, kind):
        """Test that random CSIT maps partition the atoms."""
        rng = np.random.default_rng(2)
        dist = random_distribution(rng, 6)
        partition = partition_by_csit(dist, random_csit(rng, kind, dist.n_atoms))
        assert partition.group_mass.sum() == pytest.approx(1.0)
        if kind in ("perfect", "degradedness_bit"):
            assert csit_refines_order(partition)

    def test_splits_stay_in_triangle(self):
        """Test that random splits satisfy alpha + beta <= 1."""
        alpha, beta = random_splits(np.random.default_rng(3), 500)
        assert np.all(alpha + beta <= 1.0)
        assert np.all(alpha >= 0) and np.all(beta >= 0)

    def test_inner_policy_spends_budget(self):
        """Test that random inner policies spend the whole budget."""
        rng = np.random.default_rng(4)
        partition = partition_by_csit(
            random_distribution(rng, 5), random_csit(rng, "perfect", 5)
        )
        pol = random_inner_policy(rng, partition, 2.0)
        assert float(partition.group_mass @ pol.phi) == pytest.approx(2.0)
