import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from steerscope.criteria import (
    OptimizerOptions,
    OptimizerWarning,
    apply_filter,
    build_filter,
    embed_square,
    fidelity_phi_plus,
    filter_norm,
    isotropic_twirl,
    max_entanglement_fraction,
    reduced_witness,
    reduction_check,
    reduction_operator,
)
from steerscope.linalg import (
    DensityMatrix,
    DimensionError,
    PureState,
    TOL_PSD,
    ValidationError,
    expectation,
    partial_trace_a,
    partial_transpose,
)
from steerscope.states import (
    IsotropicClass,
    isotropic,
    maximally_mixed,
    phi_plus,
    pure_schmidt,
    random_density,
    random_unitary,
)

from oracles import dense_fraction_oracle


def local_conjugate(rho, rng):
    d = rho.dim_a
    u = np.kron(random_unitary(d, rng), random_unitary(d, rng))
    return DensityMatrix(d, d, u @ rho.matrix @ u.conj().T)


# -- reduction check -------------------------------------------------------


def test_reduction_bell_state():
    v = reduction_check(phi_plus(2).density())
    assert v.min_eigenvalue == pytest.approx(-0.5, abs=1e-14)
    assert v.violated
    assert abs(abs(np.vdot(v.witness.amplitudes, phi_plus(2).amplitudes)) - 1) < 1e-12


def test_reduction_product_state():
    v = reduction_check(pure_schmidt([1, 0]))
    assert v.min_eigenvalue == pytest.approx(0, abs=1e-14)
    assert not v.violated


@pytest.mark.parametrize("d", [2, 3])
def test_reduction_isotropic_threshold(d):
    # eigenvalues of I/d - ISO_d(F): 1/d - F on phi+, 1/d - (1-F)/(d^2-1) elsewhere
    for F in np.linspace(0, 1, 21):
        v = reduction_check(isotropic(d, F))
        expected = min(1 / d - F, 1 / d - (1 - F) / (d * d - 1))
        assert v.min_eigenvalue == pytest.approx(expected, abs=1e-12)
        if abs(F - 1 / d) > 1e-9:
            assert v.violated == (F > 1 / d)


def test_reduction_witness_phase_fixed():
    v = reduction_check(random_density(2, 2, rank=1, seed=3))
    a = v.witness.amplitudes
    i = np.argmax(np.abs(a))
    assert abs(a[i].imag) < 1e-15 and a[i].real > 0


def test_reduction_qubit_qutrit_embedding():
    rho = DensityMatrix(2, 3, np.outer(*(2 * [np.array([1, 0, 0, 0, 1, 0]) / np.sqrt(2)])))
    v = reduction_check(rho)
    assert v.embedded and v.state.dims == (3, 3)
    assert v.violated
    with pytest.raises(DimensionError):
        reduction_check(rho, embed=False)


def test_embedding_keeps_reduction_spectrum_sign():
    # for dA < dB the padded block adds only the PSD summand |2><2| (x) rho_B
    for seed in range(20):
        rho = random_density(2, 3, rank=2, seed=seed)
        sq = embed_square(rho)
        op_small = np.kron(np.eye(2), partial_trace_a(rho)) - rho.matrix
        small_min = np.linalg.eigvalsh(op_small)[0]
        assert reduction_check(rho).min_eigenvalue == pytest.approx(min(small_min, np.linalg.eigvalsh(partial_trace_a(rho))[0]), abs=1e-12)
        assert np.trace(sq.matrix).real == pytest.approx(1)


# -- fidelity and entanglement fraction --------------------------------------


def test_fidelity_phi_plus_examples():
    assert fidelity_phi_plus(isotropic(2, 0.7)) == pytest.approx(0.7, abs=1e-12)
    assert fidelity_phi_plus(maximally_mixed(2, 2)) == pytest.approx(0.25, abs=1e-12)
    assert fidelity_phi_plus(pure_schmidt([1, 0])) == pytest.approx(0.5, abs=1e-12)


def test_fidelity_requires_square():
    with pytest.raises(DimensionError):
        fidelity_phi_plus(random_density(2, 3, seed=0))


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("F", [0.25, 0.4, 0.9])
def test_max_fraction_isotropic(d, F):
    res = max_entanglement_fraction(isotropic(d, F))
    assert res.value == pytest.approx(F, abs=1e-6)
    assert res.converged


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("F", [0.0, 0.05])
def test_max_fraction_isotropic_below_uniform(d, F):
    # for F < 1/d^2 a maximally entangled state orthogonal to phi+ overlaps more
    res = max_entanglement_fraction(isotropic(d, F))
    assert res.value == pytest.approx(max(F, (1 - F) / (d * d - 1)), abs=1e-6)


@pytest.mark.parametrize("coeffs", [[0.9, 0.1], [0.6, 0.4], [0.5, 0.3, 0.2], [0.7, 0.2, 0.1]])
def test_max_fraction_schmidt_closed_form(coeffs, rng):
    c = np.sqrt(coeffs)
    rho = local_conjugate(pure_schmidt(c), rng)
    res = max_entanglement_fraction(rho)
    assert res.value == pytest.approx(c.sum() ** 2 / len(c), abs=1e-6)
    # returned unitaries achieve the value
    v = np.kron(res.u_a, res.u_b) @ phi_plus(len(c)).amplitudes
    assert expectation(v, rho.matrix) == pytest.approx(res.value, abs=1e-12)


@pytest.mark.parametrize("d, seed", [(2, 0), (2, 1), (3, 2)])
def test_max_fraction_matches_dense_oracle(d, seed):
    rho = random_density(d, d, rank=2, seed=seed)
    oracle = dense_fraction_oracle(rho.matrix, d, starts=6 if d == 3 else 10, seed=seed)
    assert max_entanglement_fraction(rho).value == pytest.approx(oracle, abs=1e-6)


def test_max_fraction_local_unitary_bell(rng):
    rho = local_conjugate(phi_plus(2).density(), rng)
    assert max_entanglement_fraction(rho).value == pytest.approx(1, abs=1e-6)


@given(st.integers(0, 5000), st.sampled_from([2, 3]))
@settings(max_examples=20, deadline=None)
def test_max_fraction_invariances(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(d, d, rank=int(rng.integers(1, d * d + 1)), seed=seed)
    F = max_entanglement_fraction(rho).value
    F2 = max_entanglement_fraction(local_conjugate(rho, rng)).value
    assert abs(F - F2) < 2e-6
    assert F >= fidelity_phi_plus(rho) - 1e-12
    assert F >= 1 / d**2 - 1e-12


def test_optimizer_warns_at_iteration_cap():
    rho = random_density(3, 3, rank=2, seed=5)
    with pytest.warns(OptimizerWarning):
        res = max_entanglement_fraction(rho, OptimizerOptions(restarts=2, max_iter=1, tol=0))
    assert not res.converged
    assert res.warning


# -- twirl -------------------------------------------------------------------


def test_twirl_fixed_points():
    c = isotropic_twirl(isotropic(2, 0.6))
    assert isinstance(c, IsotropicClass)
    assert c.d == 2 and c.F == pytest.approx(0.6, abs=1e-9)
    c = isotropic_twirl(phi_plus(3).density())
    assert c.d == 3 and c.F == pytest.approx(1, abs=1e-9)


def test_twirl_canonical_only(rng):
    rho = local_conjugate(phi_plus(2).density(), rng)
    assert isotropic_twirl(rho, canonical_only=True).F == pytest.approx(fidelity_phi_plus(rho))
    assert isotropic_twirl(rho).F == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_twirl_idempotent(seed):
    first = isotropic_twirl(random_density(2, 2, rank=2, seed=seed))
    second = isotropic_twirl(first.materialize())
    assert second.d == first.d
    assert abs(second.F - first.F) < 1e-9


# -- filter --------------------------------------------------------------------


def test_filter_from_phi_plus_is_identity():
    f = build_filter(phi_plus(2), phi_plus(2).density())
    assert np.allclose(f.matrix, np.eye(2), atol=1e-15)


def test_filter_from_product_vector():
    f = build_filter(PureState(2, 2, [1, 0, 0, 0]))
    assert np.allclose(f.matrix, np.sqrt(2) * np.diag([1, 0]))


def test_filter_rejects_non_witness():
    rho = isotropic(2, 0.2)
    with pytest.raises(ValidationError) as exc:
        build_filter(phi_plus(2), rho)
    assert exc.value.invariant == "reduction witness"


def test_filter_reconstructs_witness_random(rng):
    for _ in range(100):
        v = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        psi = PureState(3, 3, v / np.linalg.norm(v))
        f = build_filter(psi)
        assert np.linalg.norm(f.witness.amplitudes - f.reconstruct_witness()) <= 1e-10
        # witness differs from psi only by a global phase
        assert abs(abs(np.vdot(psi.amplitudes, f.witness.amplitudes)) - 1) < 1e-12
        assert np.max(np.abs(f.gram() - 3 * reduced_witness(f.witness))) < 1e-9


def test_apply_identity_filter_leaves_state():
    rho = random_density(2, 2, seed=4)
    f = build_filter(phi_plus(2))
    assert np.allclose(apply_filter(rho, f).matrix, rho.matrix, atol=1e-14)


def test_apply_filter_vanishing_norm():
    rho = pure_schmidt([0, 1])  # |11>
    f = build_filter(PureState(2, 2, [1, 0, 0, 0]))  # projects Bob onto |0>
    with pytest.raises(ValidationError) as exc:
        apply_filter(rho, f)
    assert exc.value.invariant == "nonvanishing filter norm"


def test_filter_pipeline_schmidt():
    rho = pure_schmidt(np.sqrt([0.9, 0.1]))
    v = reduction_check(rho)
    assert v.violated
    filtered = apply_filter(rho, build_filter(v.witness, rho))
    assert fidelity_phi_plus(filtered) > 0.5
    assert isotropic_twirl(filtered).F > 0.5


def _entangled_two_qubit(seed):
    rho = random_density(2, 2, rank=1 + seed % 4, seed=seed)
    if np.linalg.eigvalsh(partial_transpose(rho.matrix, 2, 2))[0] < -TOL_PSD:
        return rho
    return None


def test_filter_soundness_random_two_qubit():
    count = 0
    for seed in range(400):
        rho = _entangled_two_qubit(seed)
        if rho is None:
            continue
        count += 1
        v = reduction_check(rho)
        assert v.violated
        f = build_filter(v.witness, rho)
        assert filter_norm(rho, f) == pytest.approx(
            2 * np.trace(partial_trace_a(rho) @ reduced_witness(f.witness)).real, abs=1e-9)
        out = apply_filter(rho, f)
        assert fidelity_phi_plus(out) - 0.5 > 1e-9
        assert isotropic_twirl(out, canonical_only=True).F > 0.5
    assert count > 300


@pytest.mark.parametrize("seed", range(6))
def test_filter_soundness_qutrits(seed):
    rho = random_density(3, 3, rank=1, seed=seed)
    v = reduction_check(rho)
    assert v.violated
    out = apply_filter(rho, build_filter(v.witness, rho))
    assert fidelity_phi_plus(out) - 1 / 3 > 1e-9
    assert isotropic_twirl(out).F > 1 / 3


def test_filter_on_embedded_qubit_qutrit():
    rho = random_density(2, 3, rank=1, seed=9)
    v = reduction_check(rho)
    assert v.violated and v.embedded
    out = apply_filter(v.state, build_filter(v.witness, v.state))
    assert fidelity_phi_plus(out) > 1 / 3


def test_reduction_operator_expectation_matches_witness_form():
    rho = random_density(2, 2, rank=2, seed=1)
    v = reduction_check(rho)
    lhs = expectation(v.witness, reduction_operator(rho))
    rhs = np.trace(partial_trace_a(rho) @ reduced_witness(v.witness)).real - expectation(v.witness, rho.matrix)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert lhs == pytest.approx(v.min_eigenvalue, abs=1e-12)
