"""State-level machinery: reduction criterion, entanglement fraction,
isotropic twirl and the one-sided local filter built from a reduction witness.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    TOL_PSD,
    TOL_TRACE,
    DensityMatrix,
    DimensionError,
    PureState,
    ValidationError,
    eig_hermitian,
    expectation,
    partial_trace,
    partial_trace_a,
)
from .states import IsotropicClass, phi_plus, random_unitary


class OptimizerWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class OptimizerOptions:
    restarts: int = 32
    tol: float = 1e-10
    max_iter: int = 5000
    seed: int = 0


@dataclass(frozen=True, eq=False)
class FractionResult:
    """Best local-unitary overlap with phi+ found by the optimizer."""

    value: float
    u_a: np.ndarray
    u_b: np.ndarray
    converged: bool
    restarts: int
    iterations: int

    @property
    def warning(self) -> str | None:
        if self.converged:
            return None
        return "entanglement-fraction optimizer hit the iteration cap on at least one restart"


@dataclass(frozen=True)
class ReductionVerdict:
    min_eigenvalue: float
    witness: PureState = field(compare=False)
    violated: bool
    state: DensityMatrix = field(compare=False, repr=False)
    embedded: bool = False


@dataclass(frozen=True, eq=False)
class FilterOperator:
    """Bob-side filter F_B with (F_B)_ij = sqrt(d) * conj(alpha_ij)."""

    d: int
    matrix: np.ndarray
    witness: PureState

    def reconstruct_witness(self) -> np.ndarray:
        """(I (x) F_B^dag)|phi+_d>; equals the witness amplitudes."""
        return np.kron(np.eye(self.d), self.matrix.conj().T) @ phi_plus(self.d).amplitudes

    def gram(self) -> np.ndarray:
        return self.matrix.conj().T @ self.matrix


def _square_dim(rho: DensityMatrix) -> int:
    if rho.dim_a != rho.dim_b:
        raise DimensionError(f"operation needs a d x d bipartition, got {rho.dim_a}x{rho.dim_b}")
    return rho.dim_a


def embed_square(rho: DensityMatrix) -> DensityMatrix:
    """Zero-pad the smaller subsystem so both sides have dimension max(dA, dB)."""
    da, db = rho.dims
    d = max(da, db)
    if da == db:
        return rho
    t = np.zeros((d, d, d, d), dtype=complex)
    t[:da, :db, :da, :db] = rho.matrix.reshape(da, db, da, db)
    return DensityMatrix(d, d, t.reshape(d * d, d * d), validate=False)


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude entry is real positive."""
    v = np.asarray(v, dtype=complex)
    idx = int(np.argmax(np.abs(v)))
    a = v[idx]
    return v * (abs(a) / a) if a != 0 else v


def reduction_operator(rho: DensityMatrix) -> np.ndarray:
    d = _square_dim(rho)
    return np.kron(np.eye(d), partial_trace_a(rho)) - rho.matrix


def reduction_check(rho: DensityMatrix, embed: bool = True) -> ReductionVerdict:
    """Minimal eigenpair of I (x) rho_B - rho.

    Non-square states are zero-padded to max(dA, dB) first when ``embed`` is
    set; the padded block contributes only a PSD summand, so the sign of the
    minimal eigenvalue is unaffected. ``violated`` means the minimal
    eigenvalue is below -TOL_PSD.
    """
    embedded = rho.dim_a != rho.dim_b
    if embedded and not embed:
        raise DimensionError(f"reduction check needs a d x d state, got {rho.dim_a}x{rho.dim_b}")
    sq = embed_square(rho)
    lam, vecs = eig_hermitian(reduction_operator(sq))
    # eigh sorts ascending; column 0 is the first eigenvector of a degenerate minimum
    witness = PureState(sq.dim_a, sq.dim_b, fix_phase(vecs[:, 0]))
    return ReductionVerdict(float(lam[0]), witness, bool(lam[0] < -TOL_PSD), sq, embedded)


def fidelity_phi_plus(rho: DensityMatrix) -> float:
    """<phi+_d| rho |phi+_d>."""
    d = _square_dim(rho)
    return float(np.clip(expectation(phi_plus(d), rho.matrix), 0.0, 1.0))


def _overlap(m: np.ndarray, alpha: np.ndarray) -> float:
    v = alpha.reshape(-1)
    return float(np.real(np.vdot(v, m @ v)))


def max_entanglement_fraction(rho: DensityMatrix, opts: OptimizerOptions | None = None) -> FractionResult:
    """Maximize tr(rho (U_A (x) U_B)|phi+><phi+|(U_A (x) U_B)^dag) over local unitaries.

    Because (U_A (x) U_B)|phi+> = (I (x) U_B U_A^T)|phi+>, the search runs over
    a single unitary W with coefficient matrix alpha = W^T/sqrt(d). The
    objective is a convex quadratic in alpha, so replacing W by the polar
    factor of the gradient never decreases it. Each restart iterates that
    step from a seeded Haar-random start (restart 0 starts at the identity)
    until the gain drops below ``opts.tol``. Returns U_A = I and U_B = W.
    """
    opts = opts or OptimizerOptions()
    d = _square_dim(rho)
    m = rho.matrix
    best_val, best_w = -np.inf, None
    converged_all = True
    total_iter = 0
    for r in range(max(1, opts.restarts)):
        if r == 0:
            w = np.eye(d, dtype=complex)
        else:
            w = random_unitary(d, np.random.default_rng([opts.seed, r]))
        alpha = w.T / np.sqrt(d)
        val = _overlap(m, alpha)
        converged = False
        for _ in range(opts.max_iter):
            total_iter += 1
            grad = (m @ alpha.reshape(-1)).reshape(d, d)
            u, _, vh = np.linalg.svd(grad)
            new_alpha = (u @ vh) / np.sqrt(d)
            new_val = _overlap(m, new_alpha)
            gain = new_val - val
            if gain >= 0:
                alpha, val = new_alpha, new_val
            if gain < opts.tol:
                converged = True
                break
        converged_all &= converged
        if val > best_val:
            best_val, best_w = val, (alpha * np.sqrt(d)).T
    result = FractionResult(
        value=float(np.clip(best_val, 0.0, 1.0)),
        u_a=np.eye(d, dtype=complex),
        u_b=best_w,
        converged=converged_all,
        restarts=max(1, opts.restarts),
        iterations=total_iter,
    )
    if not converged_all:
        warnings.warn(result.warning, OptimizerWarning, stacklevel=2)
    return result


def isotropic_twirl(
    rho: DensityMatrix, canonical_only: bool = False, opts: OptimizerOptions | None = None
) -> IsotropicClass:
    """Isotropic class reached by local-unitary alignment followed by U (x) U* twirling.

    With ``canonical_only`` no alignment is attempted and F is the plain
    overlap with phi+.
    """
    d = _square_dim(rho)
    if canonical_only:
        return IsotropicClass(d, fidelity_phi_plus(rho))
    return IsotropicClass(d, max_entanglement_fraction(rho, opts).value)


def build_filter(psi: PureState, rho: DensityMatrix | None = None) -> FilterOperator:
    """Local filter on Bob's side from a reduction witness ``psi``.

    If ``rho`` is given, ``psi`` must satisfy <psi|I (x) rho_B - rho|psi> < 0.
    The witness phase is normalized first so the filter is deterministic.
    """
    if psi.dim_a != psi.dim_b:
        raise DimensionError(f"witness must live on C^d (x) C^d, got {psi.dim_a}x{psi.dim_b}")
    d = psi.dim_a
    if rho is not None:
        if rho.dims != (d, d):
            raise DimensionError(f"state dims {rho.dims} do not match witness dims {(d, d)}")
        val = expectation(psi, reduction_operator(rho))
        if val >= 0:
            raise ValidationError("reduction witness", val,
                                  f"<psi|I(x)rho_B - rho|psi> = {val:.3e} is not negative")
    psi = PureState(d, d, fix_phase(psi.amplitudes))
    return FilterOperator(d, np.sqrt(d) * psi.coefficients.conj(), psi)


def filter_norm(rho: DensityMatrix, f: FilterOperator) -> float:
    """tr((I (x) F_B) rho (I (x) F_B)^dag)."""
    return float(np.real(np.trace(rho.reduced_b() @ f.gram())))


def apply_filter(rho: DensityMatrix, f: FilterOperator) -> DensityMatrix:
    if rho.dims != (f.d, f.d):
        raise DimensionError(f"state dims {rho.dims} do not match filter dimension {f.d}")
    k = np.kron(np.eye(f.d), f.matrix)
    out = k @ rho.matrix @ k.conj().T
    tr = float(np.real(np.trace(out)))
    if tr <= TOL_TRACE:
        raise ValidationError("nonvanishing filter norm", tr, f"filter annihilates the state (trace {tr:.3e})")
    out = out / tr
    return DensityMatrix(f.d, f.d, (out + out.conj().T) / 2)


def reduced_witness(psi: PureState) -> np.ndarray:
    """psi_B = tr_A |psi><psi|."""
    return partial_trace(psi.projector(), psi.dim_a, psi.dim_b, keep="B")
