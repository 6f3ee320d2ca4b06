"""Parameterized-family sweeps: continuity of the measure, persistence of
instability under perturbation, limit-family counterexamples, and the
closed-loop peak demo.

Sweeps rebuild the family at each parameter value with shared search seeds
so that differences across rows reflect the parameter, not the search.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    MatrixFamily,
    NormTag,
    induced_norm,
    spectral_radius,
    vector_norm,
    word_matrix,
)
from .dynamics import (
    WitnessPreconditionError,
    instability_witness,
    jsr_bounds,
    overshoot_bruteforce,
)
from .invariance import QCStatus, QCVerdict, is_quasi_controllable
from .measure import MeasureReport, SearchConfig, quasi_controllability_measure

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SweepRow:
    """One parameter value of a sweep. Optional columns stay None when the
    sweep kind does not produce them."""

    tau: float
    sigma_upper: float
    sigma_lower: float
    gap: float
    qc_status: str
    jsr_verdict: str
    chi_T: float | None = None
    bound: float | None = None
    persists: bool | None = None
    witness_ok: bool | None = None


@dataclass(frozen=True, eq=False)
class SweepTable:
    """Rows ordered by tau, reproducible from (generator, tau, seeds)."""

    kind: str
    description: str
    p: int
    T: int | None
    seed: int
    rows: tuple

    def columns(self) -> list:
        cols = ["tau", "sigma_upper", "sigma_lower", "gap", "qc_status", "jsr_verdict"]
        if any(r.chi_T is not None for r in self.rows):
            cols.append("chi_T")
        if any(r.bound is not None for r in self.rows):
            cols.append("bound")
        if any(r.persists is not None for r in self.rows):
            cols.append("persists")
        if any(r.witness_ok is not None for r in self.rows):
            cols.append("witness_ok")
        return cols

    def as_rows(self) -> list:
        cols = self.columns()
        out = []
        for r in self.rows:
            out.append([getattr(r, c) for c in cols])
        return out


def measure_sweep(
    generator: Callable[[float], MatrixFamily],
    p: int,
    taus,
    config: SearchConfig | None = None,
    T: int | None = None,
    jsr_depth: int = 4,
    criterion: Callable[[float], QCVerdict] | None = None,
    description: str = "",
) -> SweepTable:
    """Evaluate the measure across parameter values with shared seeds.

    gap is |sigma_upper(tau) - sigma_upper(0)| against the base family at
    tau = 0, which is evaluated regardless of whether 0 is in taus. The
    quasi-controllability column uses `criterion` when given (for families
    with a closed-form test) and the general eigen-seed test otherwise.
    """
    cfg = config or SearchConfig()
    taus = [float(t) for t in taus]
    base = quasi_controllability_measure(generator(0.0), p=p, config=cfg)
    rows = []
    for tau in sorted(taus):
        family = generator(tau)
        rep = quasi_controllability_measure(family, p=p, config=cfg)
        verdict = criterion(tau) if criterion else is_quasi_controllable(family)
        jsr = jsr_bounds(family, depth=jsr_depth)
        chi = None
        if T is not None:
            chi = overshoot_bruteforce(family, T).chi_T
        bound = 1.0 / rep.sigma_lower if rep.sigma_lower > 0.0 else None
        rows.append(
            SweepRow(
                tau=tau,
                sigma_upper=rep.sigma_upper,
                sigma_lower=rep.sigma_lower,
                gap=abs(rep.sigma_upper - base.sigma_upper),
                qc_status=verdict.status.value,
                jsr_verdict=jsr.verdict,
                chi_T=chi,
                bound=bound,
            )
        )
    return SweepTable(
        kind="measure",
        description=description or "measure continuity sweep",
        p=p,
        T=T,
        seed=cfg.seed,
        rows=tuple(rows),
    )


class ProbeInapplicableError(RuntimeError):
    """No product at the base parameter certifies the overshoot violation
    that the persistence probe re-evaluates."""


def instability_robustness_probe(
    generator: Callable[[float], MatrixFamily],
    p: int,
    taus,
    T: int,
    config: SearchConfig | None = None,
    blocks: int = 6,
    description: str = "",
) -> SweepTable:
    """Persistence of an instability certificate across parameter values.

    At tau = 0 a violating word with ||P x0|| > (1 / sigma_lower) ||x0||
    is found by brute force; each row then re-evaluates that same word and
    x0 and reports whether the strict inequality (against the base
    sigma_lower) persists and whether the block witness still succeeds
    with the row's own certified measure.
    """
    cfg = config or SearchConfig()
    base_family = generator(0.0)
    base = quasi_controllability_measure(base_family, p=p, config=cfg)
    if base.sigma_lower <= 0.0:
        raise ProbeInapplicableError(
            "base family has no certified positive measure"
        )
    brute = overshoot_bruteforce(base_family, T)
    threshold = 1.0 / base.sigma_lower
    if brute.chi_T <= threshold:
        raise ProbeInapplicableError(
            f"chi_T = {brute.chi_T:.6g} at T = {T} does not exceed "
            f"1/sigma_lower = {threshold:.6g}; no violating word exists"
        )
    word = brute.witness_word
    norm = base_family.norm
    # The violating initial vector: for induced norms the argmax column
    # direction of the product realizes the operator norm for L1; for
    # other norms fall back to a unit-norm maximizer over basis vectors.
    P0 = word_matrix(base_family, word)
    x0 = _operator_norm_maximizer(P0, norm)
    rows = []
    for tau in sorted(float(t) for t in taus):
        family = generator(tau)
        P = word_matrix(family, word)
        gain = _vector_gain(P, x0, norm)
        persists = gain > threshold
        rep = quasi_controllability_measure(family, p=p, config=cfg)
        witness_ok: bool | None = None
        if rep.sigma_lower > 0.0:
            ratio = gain * rep.sigma_lower
            if ratio > 1.0:
                mu = float(np.sqrt(ratio))
                try:
                    instability_witness(
                        family,
                        p,
                        seed_x=x0,
                        seed_R_word=word,
                        mu=mu,
                        x0=x0,
                        blocks=blocks,
                        sigma_lower=rep.sigma_lower,
                    )
                    witness_ok = True
                except (WitnessPreconditionError, RuntimeError):
                    witness_ok = False
            else:
                witness_ok = False
        jsr = jsr_bounds(family, depth=4)
        verdict = is_quasi_controllable(family)
        rows.append(
            SweepRow(
                tau=tau,
                sigma_upper=rep.sigma_upper,
                sigma_lower=rep.sigma_lower,
                gap=abs(rep.sigma_upper - base.sigma_upper),
                qc_status=verdict.status.value,
                jsr_verdict=jsr.verdict,
                chi_T=gain,
                bound=threshold,
                persists=persists,
                witness_ok=witness_ok,
            )
        )
    return SweepTable(
        kind="instability_probe",
        description=description or "instability persistence probe",
        p=p,
        T=T,
        seed=cfg.seed,
        rows=tuple(rows),
    )


def _operator_norm_maximizer(P: np.ndarray, norm: NormTag) -> np.ndarray:
    n = P.shape[0]
    if norm is NormTag.L1:
        j = int(np.argmax(np.abs(P).sum(axis=0)))
        return np.eye(n)[j]
    if norm is NormTag.L2:
        _, _, Vt = np.linalg.svd(P)
        return Vt[0]
    # Linf: the maximizing sign vector of the largest row, normalized.
    i = int(np.argmax(np.abs(P).sum(axis=1)))
    return np.sign(P[i]) + (P[i] == 0.0)


def _vector_gain(P: np.ndarray, x: np.ndarray, norm: NormTag) -> float:
    return vector_norm(P @ x, norm) / vector_norm(x, norm)


@dataclass(frozen=True, eq=False)
class LimitRow:
    m: int
    rho_shear: float
    chi_T_shear: float
    stable_shear: bool
    rho_drift: float
    chi_inf_drift: float
    argmax_drift: int
    stable_drift: bool
    qc_status: str


@dataclass(frozen=True, eq=False)
class LimitSuiteReport:
    """Counterexample suite around two single-matrix families.

    The shear family [[1 - 1/m, 1], [0, 1 - 1/m]] tends to the unipotent
    shear whose depth-T overshoot is exactly 1 + T; the drift family
    [[1 - 1/m^2, 1/m], [0, 1 - 1/m^2]] is stable for each m yet its
    all-depth overshoot grows without bound in m. Both are reducible, as
    are the limits (the shear and the identity)."""

    T: int
    rows: tuple
    limit_shear_chi_T: float
    limit_shear_qc: str
    limit_identity_chi: float
    limit_identity_qc: str


def shear_limit_member(m: int) -> np.ndarray:
    return np.array([[1.0 - 1.0 / m, 1.0], [0.0, 1.0 - 1.0 / m]])


def drift_limit_member(m: int) -> np.ndarray:
    return np.array([[1.0 - 1.0 / m**2, 1.0 / m], [0.0, 1.0 - 1.0 / m**2]])


def single_matrix_chi(F: np.ndarray, norm: NormTag = NormTag.L1, max_steps: int = 2_000_000) -> tuple:
    """Exact sup_n ||F^n|| for a stable single matrix, with its argmax.

    Stopping rule: once ||F^n|| < 1 every later power factors through it,
    so no new maximum can appear; we additionally run to twice the argmax
    seen, following the cautious variant. Requires spectral radius < 1.
    """
    if spectral_radius(F) >= 1.0:
        raise ValueError("single-matrix chi requires spectral radius < 1")
    best = 1.0
    argmax = 0
    power = np.eye(F.shape[0])
    n = 0
    while n < max_steps:
        n += 1
        power = power @ F
        nrm = induced_norm(power, norm)
        if nrm > best:
            best = nrm
            argmax = n
        if nrm < 1.0 and n > 2 * argmax:
            break
    return float(best), argmax


def limit_family_suite(ms, T: int) -> LimitSuiteReport:
    """Per-m overshoot data for the two counterexample families."""
    rows = []
    for m in ms:
        m = int(m)
        if m <= 0:
            raise ValueError("ms must be positive")
        E = shear_limit_member(m)
        F = drift_limit_member(m)
        fam_E = MatrixFamily(members=(E,), norm=NormTag.L1)
        chi_T_E = overshoot_bruteforce(fam_E, T).chi_T
        chi_F, argmax_F = single_matrix_chi(F)
        verdict = is_quasi_controllable(fam_E)
        rows.append(
            LimitRow(
                m=m,
                rho_shear=float(spectral_radius(E)),
                chi_T_shear=float(chi_T_E),
                stable_shear=spectral_radius(E) < 1.0,
                rho_drift=float(spectral_radius(F)),
                chi_inf_drift=chi_F,
                argmax_drift=argmax_F,
                stable_drift=spectral_radius(F) < 1.0,
                qc_status=verdict.status.value,
            )
        )
    shear = np.array([[1.0, 1.0], [0.0, 1.0]])
    fam_shear = MatrixFamily(members=(shear,), norm=NormTag.L1)
    chi_shear = overshoot_bruteforce(fam_shear, T).chi_T
    qc_shear = is_quasi_controllable(fam_shear).status.value
    fam_eye = MatrixFamily(members=(np.eye(2),), norm=NormTag.L1)
    qc_eye = is_quasi_controllable(fam_eye).status.value
    return LimitSuiteReport(
        T=T,
        rows=tuple(rows),
        limit_shear_chi_T=float(chi_shear),
        limit_shear_qc=qc_shear,
        limit_identity_chi=1.0,
        limit_identity_qc=qc_eye,
    )


@dataclass(frozen=True, eq=False)
class PeakDemoReport:
    """Deadbeat feedback peak demo.

    For A = [[a, eps], [eps, a]] the feedback b = (-2a, -(a^2 + eps^2)/eps)
    placed on the first coordinate zeroes both closed-loop eigenvalues, yet
    the closed-loop norm grows like a^2/|eps|: short-horizon amplification
    survives eigenvalue placement. printed_variant records the sign variant
    with +a^2/eps in the corner, which is not nilpotent; eigenvalue claims
    use the computed matrix.
    """

    a: float
    eps: float
    feedback: np.ndarray
    closed_loop: np.ndarray
    printed_variant: np.ndarray
    eigenvalue_moduli: tuple
    printed_variant_moduli: tuple
    norm_l1: float
    first_step_amplification: float


def intro_peak_demo(a: float, eps: float) -> PeakDemoReport:
    if eps == 0.0:
        raise ValueError("eps must be nonzero")
    A = np.array([[a, eps], [eps, a]])
    b = np.array([-2.0 * a, -(a**2 + eps**2) / eps])
    closed = A + np.outer(b, np.eye(2)[0])
    printed = closed.copy()
    printed[1, 0] = -printed[1, 0]
    eig = np.abs(np.linalg.eigvals(closed))
    eig_printed = np.abs(np.linalg.eigvals(printed))
    norm_l1 = induced_norm(closed, NormTag.L1)
    amp = max(
        float(np.abs(closed[:, 0]).sum()), float(np.abs(closed[:, 1]).sum())
    )
    return PeakDemoReport(
        a=a,
        eps=eps,
        feedback=b,
        closed_loop=closed,
        printed_variant=printed,
        eigenvalue_moduli=tuple(float(v) for v in sorted(eig)),
        printed_variant_moduli=tuple(float(v) for v in sorted(eig_printed)),
        norm_l1=float(norm_l1),
        first_step_amplification=amp,
    )
