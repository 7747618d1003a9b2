"""Independent reference computations used only by the tests."""

from fractions import Fraction

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from steerscope.states import phi_plus


def gell_mann(d):
    """Generalized Gell-Mann basis of su(d) (d^2 - 1 Hermitian traceless matrices)."""
    out = []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), complex)
            s[j, k] = s[k, j] = 1
            out.append(s)
            a = np.zeros((d, d), complex)
            a[j, k], a[k, j] = -1j, 1j
            out.append(a)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        out.append(np.diag(diag * np.sqrt(2 / (l * (l + 1)))).astype(complex))
    return out


def dense_fraction_oracle(rho_matrix, d, starts=12, seed=0):
    """max over U_A, U_B of <phi+|(U_A x U_B)^dag rho (U_A x U_B)|phi+>, by multi-start
    Nelder-Mead followed by BFGS polishing over both sets of generator coefficients."""
    gens = gell_mann(d)
    m = len(gens)
    phi = phi_plus(d).amplitudes

    def unitary(theta):
        return expm(1j * sum(t * g for t, g in zip(theta, gens)))

    def neg(x):
        v = np.kron(unitary(x[:m]), unitary(x[m:])) @ phi
        return -np.real(np.vdot(v, rho_matrix @ v))

    rng = np.random.default_rng(seed)
    best = np.inf
    for s in range(starts):
        x0 = np.zeros(2 * m) if s == 0 else rng.uniform(-np.pi, np.pi, 2 * m)
        r = minimize(neg, x0, method="Nelder-Mead", options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 20000})
        r = minimize(neg, r.x, method="BFGS", options={"gtol": 1e-10})
        best = min(best, r.fun)
    return -best


def harmonic_bruteforce(n):
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def proj_bound_bruteforce(D, shift=0):
    H = harmonic_bruteforce(D)
    return ((1 + D) * (H - shift) - D) / Fraction(D * D)


def kcopy_isotropic_fidelity(d, F):
    """Fidelity of ISO_d(F) (x) ISO_d(F), regrouped as (A1 A2 | B1 B2), with phi+_{d^2}."""
    from steerscope.states import isotropic_matrix

    rho = np.kron(isotropic_matrix(d, F), isotropic_matrix(d, F))
    # ordering A1 B1 A2 B2 -> A1 A2 B1 B2
    t = rho.reshape([d] * 8).transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(d**4, d**4)
    phi = phi_plus(d * d).amplitudes
    return float(np.real(np.vdot(phi, t @ phi)))
