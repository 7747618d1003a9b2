"""k-copy steerability searches and the full per-state analysis pipeline."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .criteria import (
    OptimizerOptions,
    OptimizerWarning,
    apply_filter,
    build_filter,
    fidelity_phi_plus,
    max_entanglement_fraction,
    reduction_check,
)
from .linalg import DensityMatrix, ValidationError, partial_trace_a, von_neumann_entropy
from .thresholds import (
    MeasurementClass,
    Precision,
    PrecisionError,
    ThresholdValue,
    Variant,
    certify_greater,
    f_proj,
    kcopy_threshold,
    kth_root,
    margin,
    power,
    single_copy_bound,
    compare,
    to_fraction,
)

DEFAULT_K_MAX = 64
HASHING_TOL = 1e-9
PAPER_MIN_DIM_TWO_COPIES = 6

NOTE_PROOF_FORM = (
    "k-copy criterion uses the proof form F^k > f_proj(d^k); this form reproduces "
    "the published copy counts (k=7 projective, k=24 POVM for d=2)"
)
NOTE_PRINTED_EQ10 = (
    "k-copy criterion uses the printed theorem form [(1+D)(H_D-1)-D]/D^2, which is "
    "weaker than the proof form and does NOT reproduce the published k=7; "
    "the proof form is the one that does"
)
NOTE_POVM_DEFAULT = (
    "POVM single-copy bound uses 1/d^2 + eta(1-1/d^2), "
    "eta=(3d-1)(d-1)^(d-1)/((d+1)d^d) (reconstructed; reproduces k=24 at d=2)"
)
NOTE_POVM_PRINTED = (
    "WARNING: POVM bound uses the printed closed form [1+((d+1)/d)^d(3d-1)]/d^2, "
    "which exceeds 1 for d=2 and is not a valid fraction bound"
)
NOTE_EMBEDDED = (
    "non-square state zero-padded to max(dA,dB) before the reduction check; this "
    "extends the d x d statement of the criterion"
)
NOTE_BOUNDARY = "copy counts are quoted at the single-copy LHS boundary F = bound"


def variant_note(variant: Variant) -> str:
    return NOTE_PROOF_FORM if Variant(variant) is Variant.PROOF else NOTE_PRINTED_EQ10


def povm_note(printed_eq16: bool) -> str:
    return NOTE_POVM_PRINTED if printed_eq16 else NOTE_POVM_DEFAULT


def kcopy_holds(d: int, F, k: int, variant: Variant = Variant.PROOF) -> bool:
    """Certified decision of F^k > kcopy_threshold(d, k, variant)."""
    Fq = to_fraction(F)
    return certify_greater(lambda p: power(Fq, k, p), lambda p: kcopy_threshold(d, k, variant, p))


def kcopy_margin(d: int, F, k: int, variant: Variant = Variant.PROOF) -> ThresholdValue:
    """F^k - threshold, exact or with a certified error bound."""
    p = Precision()
    return margin(power(to_fraction(F), k, p), kcopy_threshold(d, k, variant, p), p)


def minimal_k(d: int, F, variant: Variant = Variant.PROOF, k_max: int = DEFAULT_K_MAX) -> int | None:
    """Smallest k <= k_max with F^k > kcopy_threshold(d, k, variant).

    Returns None if no such k exists up to the cap, and immediately when
    F <= 1/d (the twirl route cannot succeed there). k <= 64 is scanned
    linearly. Beyond that the search gallops and then bisects: with
    r = dF > 1 the gap k log r - log(d^k f(d^k)) is convex in k, so past the
    first success the criterion keeps holding.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")
    Fq = to_fraction(F)
    if not 0 <= Fq <= 1:
        raise ValueError(f"fraction must lie in [0, 1], got {F}")
    if Fq <= Fraction(1, d):
        return None
    linear_cap = min(k_max, DEFAULT_K_MAX)
    for k in range(1, linear_cap + 1):
        if kcopy_holds(d, Fq, k, variant):
            return k
    if k_max <= linear_cap:
        return None
    lo, hi = linear_cap, 2 * linear_cap
    while not kcopy_holds(d, Fq, min(hi, k_max), variant):
        if hi >= k_max:
            return None
        lo, hi = hi, 2 * hi
    hi = min(hi, k_max)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if kcopy_holds(d, Fq, mid, variant):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class Window:
    """Fractions F in (f_low, f_high]: single-copy LHS, yet k copies steerable."""

    d: int
    k: int
    mclass: MeasurementClass
    f_low: ThresholdValue
    f_high: ThresholdValue
    nonempty: bool

    def contains(self, F) -> bool:
        Fq = to_fraction(F)
        return (
            self.nonempty
            and compare(Fq, self.f_high) in (-1, 0)
            and certify_greater(lambda p: power(Fq, self.k, p), lambda p: kcopy_threshold(self.d, self.k, Variant.PROOF, p))
        )


def window_bounds(d: int, k: int, mclass: MeasurementClass, printed_eq16: bool = False) -> Window:
    """Window endpoints for any k >= 1 (k = 1 is always empty)."""
    mclass = MeasurementClass(mclass)
    high = single_copy_bound(d, mclass, printed_eq16)
    # nonempty iff f_low < f_high, decided as threshold(d^k) < f_high^k
    nonempty = certify_greater(lambda p: power(high, k, p), lambda p: kcopy_threshold(d, k, Variant.PROOF, p))
    low = kth_root(kcopy_threshold(d, k, Variant.PROOF), k)
    return Window(d, k, mclass, low, high, nonempty)


def superactivation_window(
    d: int, k: int, mclass: MeasurementClass, printed_eq16: bool = False
) -> Window | None:
    if k < 2:
        raise ValueError(f"super-activation needs k >= 2 copies, got {k}")
    w = window_bounds(d, k, mclass, printed_eq16)
    return w if w.nonempty else None


def minimal_d_two_copies(mclass: MeasurementClass, d_max: int = 64, printed_eq16: bool = False) -> int | None:
    """Smallest d in 2..d_max with a nonempty two-copy window, or None."""
    for d in range(2, d_max + 1):
        if window_bounds(d, 2, mclass, printed_eq16).nonempty:
            return d
    return None


def dimension_note(mclass: MeasurementClass, found: int | None, d_max: int = 64) -> str:
    mclass = MeasurementClass(mclass)
    if mclass is MeasurementClass.PROJECTIVE:
        if found == PAPER_MIN_DIM_TWO_COPIES:
            return f"minimal dimension for k=2 (projective) is {found}, matching the published d >= 6"
        return (
            f"DISCREPANCY: exact arithmetic gives minimal dimension {found} for k=2 projective "
            f"super-activation (f_proj(5)^2 > f_proj(25)), whereas the published claim is d >= 6"
        )
    if found is None:
        return (
            f"no two-copy POVM window for d = 2..{d_max}; consistent with the published remark "
            "that two copies do not suffice directly for POVMs"
        )
    return f"minimal dimension for k=2 (POVM) is {found}"


@dataclass(frozen=True)
class Bootstrap:
    k_c: int
    new_dim: int
    notes: tuple[str, ...]


def bootstrap_two_copy(d: int, F, variant: Variant = Variant.PROOF, k_max: int = DEFAULT_K_MAX) -> Bootstrap | None:
    """Reblock rho^{(x) k_c} with k_c = minimal_k - 1 as a two-copy candidate.

    Only steerability of two blocks is established; unsteerability of a
    single block is not certified here.
    """
    k = minimal_k(d, F, variant, k_max)
    if k is None or k <= 1:
        return None
    k_c = k - 1
    notes = (
        f"rho' = rho^(x){k_c} acts on C^{d ** k_c} (x) C^{d ** k_c}; "
        f"two copies of rho' contain rho^(x){2 * k_c}, which is steerable since {2 * k_c} >= {k}",
        "unsteerability of rho' itself is not certified by this tool",
    )
    return Bootstrap(k_c, d**k_c, notes)


def hashing_margin(rho: DensityMatrix) -> float:
    """S(rho_B) - S(rho) in bits."""
    return von_neumann_entropy(partial_trace_a(rho)) - von_neumann_entropy(rho.matrix)


def hashing_check(rho: DensityMatrix) -> bool:
    """One-way hashing test S(rho_B) > S(rho), with a 1e-9 bit margin."""
    return hashing_margin(rho) > HASHING_TOL


@dataclass(frozen=True)
class AnalysisOptions:
    variant: Variant = Variant.PROOF
    printed_eq16: bool = False
    k_max: int = DEFAULT_K_MAX
    optimizer: OptimizerOptions = field(default_factory=OptimizerOptions)


@dataclass
class ActivationReport:
    dim_a: int
    dim_b: int
    d: int
    F: float | None
    reduction_min_eig: float
    reduction_violated: bool
    filtered_fidelity: float | None
    k_min_proj: int | None
    k_min_eq10: int | None
    window: tuple[float, float] | None
    hashing_distillable: bool
    hashing_margin: float
    fraction_unfiltered: float | None = None
    single_copy_projective_lhs: bool | None = None
    single_copy_povm_lhs: bool | None = None
    bootstrap: tuple[int, int] | None = None
    optimizer_converged: bool = True
    embedded: bool = False
    errors: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def analyze(rho: DensityMatrix, opts: AnalysisOptions | None = None) -> ActivationReport:
    """Reduction check, filter, twirl and copy-count search for one state.

    Sub-step failures are recorded in ``report.errors`` rather than raised.
    """
    opts = opts or AnalysisOptions()
    notes: list[str] = []
    errors: list[str] = []
    verdict = reduction_check(rho)
    if verdict.embedded:
        notes.append(NOTE_EMBEDDED)
    d = verdict.state.dim_a

    try:
        margin_bits = hashing_margin(rho)
    except ValidationError as exc:
        errors.append(f"hashing check: {exc}")
        margin_bits = float("nan")
    hashing = bool(margin_bits > HASHING_TOL)
    if hashing:
        notes.append("S(rho_B) > S(rho): one-way hashing applies, so rho is k-copy steerable from Alice to Bob")

    converged = True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OptimizerWarning)
        raw = max_entanglement_fraction(verdict.state, opts.optimizer)
    converged &= raw.converged

    F = raw.value
    filtered = None
    k_proj = k_eq10 = None
    window = None
    boot = None
    if verdict.violated:
        try:
            filt = build_filter(verdict.witness, verdict.state)
            rho_f = apply_filter(verdict.state, filt)
            filtered = fidelity_phi_plus(rho_f)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", OptimizerWarning)
                res = max_entanglement_fraction(rho_f, opts.optimizer)
            converged &= res.converged
            F = res.value
        except ValidationError as exc:
            errors.append(f"filter step: {exc}")
        if raw.value > F:
            notes.append("unfiltered state has a larger entanglement fraction than the filtered one")
    if not converged:
        notes.append("WARNING: entanglement-fraction optimizer did not converge on every restart")

    notes.append(variant_note(opts.variant))
    if verdict.violated and F is not None:
        try:
            k_proj = minimal_k(d, F, Variant.PROOF, opts.k_max)
            k_eq10 = minimal_k(d, F, Variant.PRINTED_EQ10, opts.k_max)
        except PrecisionError as exc:
            errors.append(f"copy-count search: {exc}")
        if k_proj is None and not errors:
            if to_fraction(F) <= Fraction(1, d):
                notes.append("F <= 1/d: the isotropic twirl route cannot establish k-copy steering")
            else:
                notes.append(f"no k <= {opts.k_max} satisfies the k-copy criterion (search cap)")
        if k_proj is not None and k_proj >= 2:
            w = superactivation_window(d, k_proj, MeasurementClass.PROJECTIVE)
            if w is not None:
                window = (float(w.f_low), float(w.f_high))
        chosen = k_proj if opts.variant is Variant.PROOF else k_eq10
        b = bootstrap_two_copy(d, F, opts.variant, opts.k_max) if chosen and chosen > 1 else None
        if b is not None:
            boot = (b.k_c, b.new_dim)
            notes.extend(b.notes)
    if k_proj != k_eq10:
        notes.append(f"variants disagree on the minimal copy number: proof form {k_proj}, printed form {k_eq10}")

    proj_lhs = povm_lhs = None
    if F is not None:
        proj_lhs = compare(to_fraction(F), f_proj(d)) in (-1, 0)
        povm_lhs = compare(to_fraction(F), single_copy_bound(d, MeasurementClass.POVM, opts.printed_eq16)) in (-1, 0)
        notes.append(povm_note(opts.printed_eq16))

    return ActivationReport(
        dim_a=rho.dim_a,
        dim_b=rho.dim_b,
        d=d,
        F=F,
        reduction_min_eig=verdict.min_eigenvalue,
        reduction_violated=verdict.violated,
        filtered_fidelity=filtered,
        k_min_proj=k_proj,
        k_min_eq10=k_eq10,
        window=window,
        hashing_distillable=hashing,
        hashing_margin=margin_bits,
        fraction_unfiltered=raw.value,
        single_copy_projective_lhs=proj_lhs,
        single_copy_povm_lhs=povm_lhs,
        bootstrap=boot,
        optimizer_converged=converged,
        embedded=verdict.embedded,
        errors=errors,
        notes=notes,
    )


def verify_report(report: ActivationReport) -> bool:
    """Recheck that reported k_min values hold at k and fail at k - 1."""
    for k, variant in ((report.k_min_proj, Variant.PROOF), (report.k_min_eq10, Variant.PRINTED_EQ10)):
        if k is None:
            continue
        if not kcopy_holds(report.d, report.F, k, variant):
            return False
        if k > 1 and kcopy_holds(report.d, report.F, k - 1, variant):
            return False
    return True

