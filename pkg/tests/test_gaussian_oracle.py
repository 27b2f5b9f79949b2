"""Tests for the covariance-based mutual-information oracle."""

import math

import numpy as np
import pytest

from fading_bc.errors import InvalidSpec, SingularConditioning
from fading_bc.gaussian_oracle import (
    SignalingSpec,
    closed_forms,
    gaussian_mi,
    joint_covariance,
    marton_functionals,
    verify_closed_forms,
)
from fading_bc.rate_functionals import InnerPolicy


class TestGaussianMI:
    """Test I(A;B|C) on hand-built covariances."""

    def test_real_scalar_channel(self):
        """Test the mutual information of a real scalar Gaussian channel."""
        cov = np.array([[1.0, 1.0], [1.0, 2.0]])
        assert gaussian_mi(cov, (0,), (1,)) == pytest.approx(0.5, abs=1e-9)

    def test_complex_scalar_channel(self):
        """Test that complex signaling doubles the real mutual information."""
        cov = np.array([[1.0, 1.0], [1.0, 2.0]])
        assert gaussian_mi(cov, (0,), (1,), complex_valued=True) == pytest.approx(
            1.0, abs=1e-9
        )

    def test_independent_variables(self):
        """Test that independent variables share no information."""
        assert gaussian_mi(np.eye(3), (0,), (1,), (2,)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize(
        "a,b,c", [((), (1,), ()), ((0,), (0,), ()), ((0,), (1,), (1,))]
    )
    def test_invalid_index_groups(self, a, b, c):
        """Test that empty or overlapping index groups are rejected."""
        with pytest.raises(InvalidSpec):
            gaussian_mi(np.eye(3), a, b, c)

    def test_singular_conditioning(self):
        """Test that a singular conditioning block is rejected."""
        with pytest.raises(SingularConditioning):
            gaussian_mi(np.zeros((3, 3)), (0,), (1,), (2,))


class TestSignalingSpec:
    """Test signaling parameter validation and the joint covariance."""

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"phi": -1.0},
            {"alpha": 0.7, "beta": 0.6},
            {"alpha": 1.5, "beta": 0.0},
            {"g1": math.nan},
        ],
    )
    def test_invalid(self, kwargs):
        """Test that invalid signaling parameters are rejected."""
        values = {"phi": 1.0, "alpha": 0.2, "beta": 0.3, "g1": 3.0, "g2": 1.0, **kwargs}
        with pytest.raises(InvalidSpec):
            SignalingSpec(**values)

    def test_output_variance(self):
        """Test the receiver output variances and symmetry of the covariance."""
        cov = joint_covariance(SignalingSpec(2.0, 0.2, 0.3, 3.0, 1.0))
        assert cov[3, 3] == pytest.approx(1.0 + 3.0 * 2.0)
        assert cov[4, 4] == pytest.approx(1.0 + 1.0 * 2.0)
        assert np.allclose(cov, cov.T)


class TestClosedForms:
    """Test the oracle against the closed-form layer rates."""

    def test_first_functional(self):
        """Test the first closed-form layer rate."""
        spec = SignalingSpec(phi=1.0, alpha=0.25, beta=0.5, g1=3.0, g2=1.0)
        assert closed_forms(spec)[0] == pytest.approx(math.log2(16 / 7), abs=1e-12)

    @pytest.mark.parametrize(
        "spec",
        [
            SignalingSpec(1.0, 0.25, 0.5, 3.0, 1.0),
            SignalingSpec(2.5, 0.0, 1.0, 0.4, 2.0),
            SignalingSpec(0.7, 0.6, 0.0, 1.3, 1.3),
            SignalingSpec(4.0, 0.1, 0.1, 0.0, 5.0),
        ],
    )
    def test_oracle_matches_closed_forms(self, spec):
        """Test that the covariance oracle reproduces the closed forms."""
        oracle = marton_functionals(spec)
        assert oracle.as_tuple()[:4] == pytest.approx(closed_forms(spec), abs=1e-9)
        assert oracle.f5 == pytest.approx(0.0, abs=1e-9)
        assert oracle.fifth_bound == pytest.approx(oracle.f1 + oracle.f2, abs=1e-9)

    def test_verify_closed_forms(self, symmetric_degradedness):
        """Test the per-atom comparison report for a policy."""
        pol = InnerPolicy(phi=[0.5, 1.5], alpha=[0.3, 0.6], beta=[0.4, 0.2])
        report = verify_closed_forms(symmetric_degradedness, pol)
        assert report.ok
        assert report.worst_atom in (0, 1)
        assert report.to_dict()["max_abs_err"] <= 1e-9
