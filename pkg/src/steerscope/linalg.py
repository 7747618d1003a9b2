"""Dense Hermitian-matrix kernel for bipartite states.

Basis convention used everywhere in the package: the product vector
``|i>_A |j>_B`` sits at flat index ``i * dim_b + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-9
TOL_NORM = 1e-12


class ValidationError(ValueError):
    """An input violated a named invariant.

    ``invariant`` names the rule that failed and ``magnitude`` is the size of
    the violation, so callers (the CLI in particular) can report both.
    """

    def __init__(self, invariant: str, magnitude: float, message: str | None = None):
        self.invariant = invariant
        self.magnitude = float(magnitude)
        text = message or f"{invariant} violated (magnitude {self.magnitude:.3e})"
        super().__init__(text)


class DimensionError(ValidationError):
    def __init__(self, message: str):
        super().__init__("dimension", float("nan"), message)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("finite entries", float("inf"), "matrix contains NaN or Inf")
    return m


def hermiticity_error(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def check_hermitian(h, tol: float = TOL_HERM) -> np.ndarray:
    m = as_matrix(h)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"Hermitian operator must be square, got shape {m.shape}")
    err = hermiticity_error(m)
    if err > tol:
        raise ValidationError("hermiticity", err)
    return m


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A bipartite mixed state on C^dim_a (x) C^dim_b.

    Construction validates hermiticity, unit trace and positivity using the
    module tolerances; pass ``validate=False`` only for matrices already
    known to be states (e.g. produced by this package).
    """

    dim_a: int
    dim_b: int
    matrix: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        n = self.dim_a * self.dim_b
        if self.dim_a < 1 or self.dim_b < 1:
            raise DimensionError(f"dimensions must be positive, got {self.dim_a}x{self.dim_b}")
        if m.shape != (n, n):
            raise DimensionError(
                f"matrix shape {m.shape} does not match dims {self.dim_a}x{self.dim_b} (need {n}x{n})"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.validate:
            validate_state(m)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    @property
    def size(self) -> int:
        return self.dim_a * self.dim_b

    def reduced_b(self) -> np.ndarray:
        return partial_trace_a(self)

    def reduced_a(self) -> np.ndarray:
        return partial_trace_b(self)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


def validate_state(m: np.ndarray) -> None:
    err = hermiticity_error(m)
    if err > TOL_HERM:
        raise ValidationError("hermiticity", err)
    tr = np.trace(m)
    if abs(tr - 1.0) > TOL_TRACE:
        raise ValidationError("unit trace", abs(tr - 1.0), f"trace is {tr.real:.12g}, expected 1")
    lam = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
    if lam < -TOL_PSD:
        raise ValidationError("positive semidefinite", -lam, f"minimal eigenvalue {lam:.3e} < -{TOL_PSD}")


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized bipartite vector; amplitude of |ij> at index i*dim_b + j."""

    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1).copy()
        if v.size != self.dim_a * self.dim_b:
            raise DimensionError(f"{v.size} amplitudes do not match dims {self.dim_a}x{self.dim_b}")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > TOL_NORM:
            raise ValidationError("unit norm", abs(norm - 1.0))
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def coefficients(self) -> np.ndarray:
        """Amplitudes as the dim_a x dim_b matrix alpha_ij."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.dim_a, self.dim_b, self.projector(), validate=False)

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return (self.dim_a, self.dim_b) == (other.dim_a, other.dim_b) and np.array_equal(
            self.amplitudes, other.amplitudes
        )

    __hash__ = None


def tensor(a, b) -> np.ndarray:
    """Kronecker product, row index of ``a`` major."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _bipartite(rho) -> tuple[np.ndarray, int, int]:
    if isinstance(rho, DensityMatrix):
        return rho.matrix, rho.dim_a, rho.dim_b
    raise TypeError("expected a DensityMatrix; use partial_trace() for raw arrays")


def partial_trace(m, dim_a: int, dim_b: int, keep: str = "B") -> np.ndarray:
    """Partial trace of a (dim_a*dim_b)-square matrix, keeping subsystem ``keep``."""
    m = as_matrix(m)
    n = dim_a * dim_b
    if m.shape != (n, n):
        raise DimensionError(f"matrix shape {m.shape} does not match dims {dim_a}x{dim_b}")
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "B":
        return np.einsum("ijik->jk", t)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    raise ValueError("keep must be 'A' or 'B'")


def partial_trace_a(rho: DensityMatrix) -> np.ndarray:
    """Trace out Alice; returns rho_B."""
    m, da, db = _bipartite(rho)
    return partial_trace(m, da, db, keep="B")


def partial_trace_b(rho: DensityMatrix) -> np.ndarray:
    m, da, db = _bipartite(rho)
    return partial_trace(m, da, db, keep="A")


def eig_hermitian(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns).

    Raises ValidationError if ``h`` is not Hermitian within TOL_HERM. The
    input is symmetrized before the LAPACK call so the tiny allowed
    asymmetry cannot leak into the spectrum.
    """
    m = check_hermitian(h)
    return np.linalg.eigh((m + m.conj().T) / 2)


def von_neumann_entropy(rho) -> float:
    """Entropy in bits; eigenvalues below TOL_PSD are treated as zero."""
    if isinstance(rho, DensityMatrix):
        rho = rho.matrix
    lam = eig_hermitian(rho)[0]
    if lam[0] < -TOL_PSD:
        raise ValidationError("positive semidefinite", -lam[0],
                              f"negative eigenvalue {lam[0]:.3e} in entropy argument")
    lam = lam[lam > TOL_PSD]
    return float(-np.sum(lam * np.log2(lam)))


def expectation(psi, m) -> float:
    """Real part of <psi|M|psi> for a vector or PureState ``psi``."""
    v = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    if isinstance(m, DensityMatrix):
        m = m.matrix
    return float(np.real(np.vdot(v, m @ v)))


def partial_transpose(m, dim_a: int, dim_b: int) -> np.ndarray:
    """Transpose on subsystem B."""
    t = as_matrix(m).reshape(dim_a, dim_b, dim_a, dim_b)
    return t.transpose(0, 3, 2, 1).reshape(dim_a * dim_b, dim_a * dim_b)
