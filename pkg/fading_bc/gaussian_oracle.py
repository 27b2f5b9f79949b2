"""
Independent check of the closed-form rate expressions.

Builds the joint covariance of the layered Gaussian input and both channel
outputs for one state atom, and evaluates mutual informations from
log-determinants of Schur complements.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidSpec, NegativeInformation, SingularConditioning
from .fading_model import CsitPartition
from .rate_functionals import InnerPolicy, check_inner_policy, psi

logger = logging.getLogger(__name__)

# variable order of the joint covariance
W, U, V, Y1, Y2 = range(5)

RIDGE = 1e-12
NEGATIVE_TOL = 1e-9


@dataclass(frozen=True)
class SignalingSpec:
    """One CSIT symbol's power and splits, applied on one state atom."""

    phi: float
    alpha: float
    beta: float
    g1: float
    g2: float

    def __post_init__(self):
        values = (self.phi, self.alpha, self.beta, self.g1, self.g2)
        if not all(math.isfinite(v) for v in values):
            raise InvalidSpec(f"non-finite signaling parameter in {self}")
        if self.phi < 0 or self.g1 < 0 or self.g2 < 0:
            raise InvalidSpec(f"power and gains must be >= 0 in {self}")
        if not (0 <= self.alpha <= 1 and 0 <= self.beta <= 1):
            raise InvalidSpec(f"alpha and beta must lie in [0, 1] in {self}")
        if self.alpha + self.beta > 1 + 1e-12:
            raise InvalidSpec(f"alpha + beta must not exceed 1 in {self}")


@dataclass(frozen=True)
class MartonFunctionals:
    f1: float  # I(W,U;Y1)
    f2: float  # I(W,V;Y2)
    f3: float  # I(U;Y1|W)
    f4: float  # I(V;Y2|W)
    f5: float  # I(U;V|W)

    @property
    def fifth_bound(self) -> float:
        """rhs of the 2R0 + R1 + R2 constraint."""
        return self.f1 + self.f2 - self.f5

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (self.f1, self.f2, self.f3, self.f4, self.f5)


def joint_covariance(spec: SignalingSpec) -> np.ndarray:
    """
    Covariance of (W, U, V, Y1, Y2) for
    X = sqrt(phi) (sqrt(beta) U + sqrt(1 - alpha - beta) W + sqrt(alpha) V)
    and Yi = sqrt(gi) X + Zi with unit-variance independent W, U, V, Z1, Z2.
    """
    common = max(1.0 - spec.alpha - spec.beta, 0.0)
    loads = math.sqrt(spec.phi) * np.sqrt([common, spec.beta, spec.alpha])
    amplitudes = np.sqrt([spec.g1, spec.g2])

    cov = np.eye(5)
    cross = np.outer(amplitudes, loads)
    cov[3:, :3] = cross
    cov[:3, 3:] = cross.T
    cov[3:, 3:] = np.outer(amplitudes, amplitudes) * float(loads @ loads) + np.eye(2)
    return cov


def _conditional(cov: np.ndarray, block: Sequence[int], given: Sequence[int]) -> np.ndarray:
    block_cov = cov[np.ix_(block, block)]
    if not given:
        return block_cov
    given_cov = cov[np.ix_(given, given)] + RIDGE * np.eye(len(given))
    if np.linalg.eigvalsh(given_cov).min() <= RIDGE:
        raise SingularConditioning(f"conditioning block {tuple(given)} is singular")
    coupling = cov[np.ix_(block, given)]
    return block_cov - coupling @ np.linalg.solve(given_cov, coupling.T)


def _logdet(matrix: np.ndarray) -> float:
    sign, value = np.linalg.slogdet(matrix + RIDGE * np.eye(len(matrix)))
    if sign <= 0:
        raise SingularConditioning("conditional covariance is not positive definite")
    return float(value)


def gaussian_mi(
    cov: np.ndarray,
    a: Sequence[int],
    b: Sequence[int],
    c: Sequence[int] = (),
    complex_valued: bool = False,
) -> float:
    """
    I(A;B|C) in bits for jointly Gaussian variables.

    Real-valued variables get the 1/2 log2 det-ratio; `complex_valued`
    treats each entry as a circularly-symmetric complex dimension, which
    drops the 1/2 so that a scalar AWGN link gives exactly psi(snr).
    """
    a, b, c = tuple(a), tuple(b), tuple(c)
    if not a or not b:
        raise InvalidSpec("both information groups must be non-empty")
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise InvalidSpec(f"index groups must be disjoint: {a}, {b}, {c}")

    nats = (
        _logdet(_conditional(cov, a, c))
        + _logdet(_conditional(cov, b, c))
        - _logdet(_conditional(cov, a + b, c))
    )
    bits = nats / math.log(2.0)
    if not complex_valued:
        bits /= 2
    if bits < -NEGATIVE_TOL:
        raise NegativeInformation(f"I(A;B|C) evaluated to {bits} bits")
    return max(bits, 0.0)


def marton_functionals(spec: SignalingSpec) -> MartonFunctionals:
    cov = joint_covariance(spec)
    return MartonFunctionals(
        f1=gaussian_mi(cov, (W, U), (Y1,), complex_valued=True),
        f2=gaussian_mi(cov, (W, V), (Y2,), complex_valued=True),
        f3=gaussian_mi(cov, (U,), (Y1,), (W,), complex_valued=True),
        f4=gaussian_mi(cov, (V,), (Y2,), (W,), complex_valued=True),
        f5=gaussian_mi(cov, (U,), (V,), (W,), complex_valued=True),
    )


def closed_forms(spec: SignalingSpec) -> Tuple[float, float, float, float]:
    """The four per-atom inner-bound integrands, in f1..f4 order."""
    phi, a, b, g1, g2 = spec.phi, spec.alpha, spec.beta, spec.g1, spec.g2
    return (
        psi(g1 * (1 - a) * phi / (g1 * a * phi + 1)),
        psi(g2 * (1 - b) * phi / (g2 * b * phi + 1)),
        psi(g1 * b * phi / (g1 * a * phi + 1)),
        psi(g2 * a * phi / (g2 * b * phi + 1)),
    )


@dataclass(frozen=True)
class ClosedFormReport:
    max_abs_err: float
    worst_atom: Optional[int]
    ok: bool

    def to_dict(self):
        return {
            "max_abs_err": self.max_abs_err,
            "worst_atom": self.worst_atom,
            "ok": self.ok,
        }


def verify_closed_forms(
    partition: CsitPartition, pol: InnerPolicy, tol: float = 1e-9
) -> ClosedFormReport:
    """Compare oracle functionals with the closed forms on every atom."""
    check_inner_policy(partition, pol)
    dist = partition.dist
    worst_err, worst_atom = 0.0, None
    for i in range(dist.n_atoms):
        k = partition.atom_group[i]
        spec = SignalingSpec(
            phi=float(pol.phi[k]),
            alpha=float(pol.alpha[k]),
            beta=min(float(pol.beta[k]), 1.0 - float(pol.alpha[k])),
            g1=float(dist.g1[i]),
            g2=float(dist.g2[i]),
        )
        oracle = marton_functionals(spec).as_tuple()[:4]
        err = max(abs(x - y) for x, y in zip(oracle, closed_forms(spec)))
        if worst_atom is None or err > worst_err:
            worst_err, worst_atom = err, i
    logger.debug("closed forms vs oracle: max error %.3g at atom %s", worst_err, worst_atom)
    return ClosedFormReport(max_abs_err=worst_err, worst_atom=worst_atom, ok=worst_err <= tol)
