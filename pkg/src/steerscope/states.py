"""Named state families and seeded random-state generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .linalg import DensityMatrix, PureState, ValidationError, TOL_NORM


def _check_dim(d: int) -> int:
    if int(d) != d or d < 2:
        raise ValidationError("dimension >= 2", float(d), f"local dimension must be an integer >= 2, got {d}")
    return int(d)


def _check_fraction(F: float) -> float:
    F = float(F)
    if not 0.0 <= F <= 1.0:
        raise ValidationError("fraction in [0, 1]", max(-F, F - 1.0), f"entanglement fraction {F} outside [0, 1]")
    return F


def phi_plus(d: int) -> PureState:
    """Maximally entangled vector (1/sqrt d) sum_i |ii>."""
    d = _check_dim(d)
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    return PureState(d, d, v)


def isotropic_matrix(d: int, F: float) -> np.ndarray:
    P = phi_plus(d).projector()
    return F * P + (1 - F) * (np.eye(d * d) - P) / (d * d - 1)


def isotropic(d: int, F: float) -> DensityMatrix:
    """ISO_d(F): weight F on phi+ and the rest spread uniformly on its complement."""
    d = _check_dim(d)
    F = _check_fraction(F)
    return DensityMatrix(d, d, isotropic_matrix(d, F))


@dataclass(frozen=True)
class IsotropicClass:
    """Symbolic representative (d, F) of an isotropic-twirl class."""

    d: int
    F: float

    def __post_init__(self):
        _check_dim(self.d)
        object.__setattr__(self, "F", _check_fraction(self.F))

    def materialize(self) -> DensityMatrix:
        return isotropic(self.d, self.F)


def pure_schmidt(coeffs) -> DensityMatrix:
    """Projector onto sum_i c_i |ii> for nonnegative Schmidt coefficients c_i."""
    c = np.asarray(coeffs, dtype=float).reshape(-1)
    if c.size < 1 or np.any(c < 0):
        raise ValidationError("nonnegative coefficients", float(-min(c.min(initial=0.0), 0.0)))
    norm = float(np.sum(c**2))
    if abs(norm - 1.0) > TOL_NORM * 10:
        raise ValidationError("unit norm", abs(norm - 1.0), f"squared coefficients sum to {norm!r}, expected 1")
    d = c.size
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = c / np.sqrt(norm)
    return PureState(d, d, v).density()


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary drawn from ``rng``."""
    if d == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(d, random_state=rng)


def random_density(dim_a: int, dim_b: int, rank: int | None = None, seed: int = 0) -> DensityMatrix:
    """Ginibre-induced random state G G^dag / tr(G G^dag), G of shape (n, rank).

    Deterministic for a given seed.
    """
    n = dim_a * dim_b
    rank = n if rank is None else int(rank)
    if not 1 <= rank <= n:
        raise ValidationError("1 <= rank <= dimA*dimB", float(rank))
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityMatrix(dim_a, dim_b, (m + m.conj().T) / 2)


def product_state(sigma_a, sigma_b) -> DensityMatrix:
    a = np.asarray(sigma_a, dtype=complex)
    b = np.asarray(sigma_b, dtype=complex)
    return DensityMatrix(a.shape[0], b.shape[0], np.kron(a, b))


def maximally_mixed(dim_a: int, dim_b: int) -> DensityMatrix:
    n = dim_a * dim_b
    return DensityMatrix(dim_a, dim_b, np.eye(n) / n)
