"""Switched trajectories, transient overshoot, and instability witnesses.

The transient overshoot chi_T is the largest induced norm over products of
at most T factors; for stable quasi-controllable families it is bounded a
priori by 1/sigma, which this module wires to the certified measure. A
joint-spectral-radius bracket classifies stability, and for unstable
families a witness trajectory with certified exponential growth is built
block by block.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import (
    ENUMERATION_CAP,
    EnumerationCapError,
    MatrixFamily,
    NormTag,
    enumerate_products,
    induced_norm,
    product_levels,
    spectral_radius,
    vector_norm,
    word_matrix,
)
from .measure import MeasureReport, SearchConfig, quasi_controllability_measure

logger = logging.getLogger(__name__)

WITNESS_GROWTH_SLACK = 1e-9


class PoleOnCircleError(ValueError):
    """An eigenvalue sits on the unit circle within tolerance, so the
    frequency response is unbounded there."""


class WitnessPreconditionError(RuntimeError):
    """The seed pair does not deliver the required expansion, so the block
    construction cannot start."""


class CertificateInconsistencyError(RuntimeError):
    """A block failed to reach the promised growth factor, contradicting
    the expansion certificate."""


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States of x(k+1) = A_{w_k} x(k), including the initial state."""

    states: np.ndarray
    word: tuple
    norm: NormTag

    def norms(self) -> np.ndarray:
        return np.array([vector_norm(s, self.norm) for s in self.states])

    @property
    def peak(self) -> float:
        return float(np.max(self.norms()))

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.norms()))


def simulate(family: MatrixFamily, word, x0: np.ndarray) -> Trajectory:
    """Run the switched recursion for the given index word."""
    word = tuple(int(i) for i in word)
    for i in word:
        if not 0 <= i < family.size:
            raise ValueError(f"word index {i} out of range for {family.size} members")
    x = np.asarray(x0, dtype=float).ravel()
    if x.size != family.dim:
        raise ValueError("x0 has the wrong dimension")
    states = np.empty((len(word) + 1, family.dim))
    states[0] = x
    for k, i in enumerate(word):
        states[k + 1] = family.members[i] @ states[k]
    return Trajectory(states=states, word=word, norm=family.norm)


@dataclass(frozen=True, eq=False)
class JsrReport:
    """Bracket for the joint spectral radius from products up to a depth.

    lower is the best averaged spectral radius, upper the best averaged
    norm over full levels. verdict: "stable" (upper < 1), "unstable"
    (lower > 1), else "inconclusive". stable_chi_bound is a bound on
    sup_T chi_T valid whenever verdict is "stable": the largest level
    maximum below the certifying depth.
    """

    depth: int
    lower: float
    upper: float
    verdict: str
    stable_chi_bound: float | None = None
    lower_word: tuple = ()
    upper_level: int = 0


def jsr_bounds(
    family: MatrixFamily, depth: int = 4, cap: int = ENUMERATION_CAP
) -> JsrReport:
    """Standard bracket: max_l max_{|P|=l} rho(P)^{1/l} from below and
    min_l (max_{|P|=l} ||P||)^{1/l} from above."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    levels = product_levels(family, depth, cap=cap)
    lower = 0.0
    lower_word: tuple = ()
    upper = np.inf
    upper_level = 0
    level_maxima = [1.0]
    for ell, level in enumerate(levels, start=1):
        level_norm = 0.0
        for matrix, nrm, word in level:
            r = spectral_radius(matrix) ** (1.0 / ell)
            if r > lower:
                lower = r
                lower_word = word
            level_norm = max(level_norm, nrm)
        level_maxima.append(level_norm)
        avg = level_norm ** (1.0 / ell)
        if avg < upper:
            upper = avg
            upper_level = ell
    if upper < 1.0:
        verdict = "stable"
        chi_bound = max(level_maxima[:upper_level] or [1.0])
        chi_bound = max(chi_bound, 1.0)
    elif lower > 1.0:
        verdict = "unstable"
        chi_bound = None
    else:
        verdict = "inconclusive"
        chi_bound = None
    return JsrReport(
        depth=depth,
        lower=lower,
        upper=float(upper),
        verdict=verdict,
        stable_chi_bound=chi_bound,
        lower_word=lower_word,
        upper_level=upper_level,
    )


@dataclass(frozen=True, eq=False)
class OvershootReport:
    """Transient overshoot at depth T, with optional a priori bound.

    chi_T and witness_word come from brute force; apriori_bound = 1/sigma
    with the attached measure and jsr reports when produced by
    overshoot_bound. conditional is True when the jsr bracket failed to
    certify stability, in which case the a priori bound only applies if
    the family is in fact stable.
    """

    T: int
    chi_T: float | None = None
    witness_word: tuple = ()
    apriori_bound: float | None = None
    sigma: MeasureReport | None = None
    jsr: JsrReport | None = None
    conditional: bool | None = None


def overshoot_bruteforce(
    family: MatrixFamily, T: int, cap: int = ENUMERATION_CAP
) -> OvershootReport:
    """Exact chi_T by enumerating all products of at most T factors.

    Ties within 1e-12 relative resolve to the lexicographically smallest
    word, so the witness is deterministic.
    """
    products = enumerate_products(family, T, cap=cap)
    best = -np.inf
    best_word: tuple = ()
    for item in products.items:
        nrm = induced_norm(item.matrix, family.norm)
        word = item.word
        if nrm > best * (1.0 + 1e-12):
            best = nrm
            best_word = word
        elif nrm >= best * (1.0 - 1e-12) and word < best_word:
            best = max(best, nrm)
            best_word = word
    return OvershootReport(T=T, chi_T=float(best), witness_word=best_word)


def _extreme_indices(vecs: np.ndarray) -> list:
    """Indices of rows that are extreme points of absco(rows).

    Falls back to keeping everything when the rows do not span the space
    (qhull needs full dimension) or the set is too small to prune.
    """
    from scipy.spatial import ConvexHull, QhullError

    count, n = vecs.shape
    if n == 1:
        return [int(np.argmax(np.abs(vecs[:, 0])))]
    if count <= n:
        return list(range(count))
    S = np.vstack([vecs, -vecs])
    try:
        hull = ConvexHull(S)
    except QhullError:
        return list(range(count))
    return sorted({int(i) % count for i in hull.vertices})


def chi_exact(family: MatrixFamily, T: int, cap: int = ENUMERATION_CAP) -> OvershootReport:
    """Exact chi_T via column orbits pruned to hull extreme points.

    In the L1 norm ||P||_1 = max_j ||P e_j||_1 and column orbits evolve
    independently under P -> A_i P, so chi_T is a max over per-column
    vector orbits. A vector lying in the absolutely convex hull of its
    level set can never beat the hull's extreme points at this or any
    later level (norms are convex and the hull relation is preserved by
    multiplication), so each level is pruned to extreme points. This keeps
    the work polynomial in practice where full word enumeration is
    exponential. Linf reduces to L1 on the transposed family with reversed
    words; L2 falls back to full enumeration.

    The reported witness word attains chi_T but may differ from the
    overshoot_bruteforce tie-break when several words do.
    """
    if T < 0:
        raise ValueError("depth T must be nonnegative")
    norm = family.norm
    if norm is NormTag.L2:
        return overshoot_bruteforce(family, T, cap=cap)
    transposed = norm is NormTag.LINF
    members = tuple(M.T for M in family.members) if transposed else family.members
    n = family.dim
    best = 1.0
    best_word: tuple = ()
    processed = 0
    for j in range(n):
        frontier = [(np.eye(n)[j], ())]
        for _ in range(T):
            seen: dict = {}
            for vec, word in frontier:
                for i, A in enumerate(members):
                    img = A @ vec
                    processed += 1
                    if processed > cap:
                        raise EnumerationCapError(
                            f"column-orbit enumeration exceeded cap {cap}"
                        )
                    key = tuple(np.round(img / 1e-10).astype(np.int64).tolist())
                    kept = seen.get(key)
                    if kept is None or word + (i,) < kept[1]:
                        seen[key] = (img, word + (i,))
            if not seen:
                break
            cand = list(seen.values())
            vecs = np.stack([v for v, _ in cand])
            keep = _extreme_indices(vecs)
            frontier = [cand[i] for i in keep]
            for vec, word in frontier:
                nrm = float(np.sum(np.abs(vec)))
                word_out = tuple(reversed(word)) if transposed else word
                if nrm > best * (1.0 + 1e-12):
                    best = nrm
                    best_word = word_out
                elif nrm >= best * (1.0 - 1e-12) and word_out < best_word:
                    best = max(best, nrm)
                    best_word = word_out
    return OvershootReport(T=T, chi_T=float(best), witness_word=best_word)


def overshoot_bound(
    family: MatrixFamily,
    p: int | None = None,
    config: SearchConfig | None = None,
    jsr_depth: int = 4,
) -> OvershootReport:
    """A priori overshoot bound 1/sigma_p from the certified measure.

    Valid for every T at once when the family is stable; the attached jsr
    report says whether stability was certified, and `conditional` is set
    when it was not. A zero certified sigma gives an infinite bound.
    """
    if p is None:
        p = max(family.dim - 1, 0)
    sigma = quasi_controllability_measure(family, p=p, config=config)
    jsr = jsr_bounds(family, depth=jsr_depth)
    if sigma.sigma_lower > 0.0:
        bound = 1.0 / sigma.sigma_lower
    else:
        bound = np.inf
    return OvershootReport(
        T=0,
        apriori_bound=float(bound),
        sigma=sigma,
        jsr=jsr,
        conditional=(jsr.verdict != "stable"),
    )


def circle_criterion_margin(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    gamma: float,
    grid: int = 512,
    refinements: int = 3,
) -> float:
    """Margin 1 - max_omega gamma |c^T (omega I - A)^{-1} b| on the unit
    circle, sampled on a uniform grid and refined three times tenfold
    around the running maximizer. Positive margin certifies the absolute
    stability test for the feedback gain range."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    eigs = np.linalg.eigvals(A)
    closest = float(np.min(np.abs(np.abs(eigs) - 1.0)))
    if closest <= 1e-9:
        raise PoleOnCircleError(
            f"eigenvalue modulus within {closest:.2e} of the unit circle"
        )
    n = A.shape[0]
    eye = np.eye(n)

    def response(theta: float) -> float:
        omega = complex(np.cos(theta), np.sin(theta))
        y = np.linalg.solve(omega * eye - A, b.astype(complex))
        return gamma * abs(np.dot(c, y))

    thetas = np.arange(grid) * (2.0 * np.pi / grid)
    vals = np.array([response(t) for t in thetas])
    k = int(np.argmax(vals))
    best_theta = thetas[k]
    best = float(vals[k])
    spacing = 2.0 * np.pi / grid
    for _ in range(refinements):
        spacing /= 10.0
        local = best_theta + spacing * np.arange(-10, 11)
        for t in local:
            v = response(float(t))
            if v > best:
                best = v
                best_theta = float(t)
    return 1.0 - best


@dataclass(frozen=True, eq=False)
class InstabilityWitness:
    """A concrete trajectory with certified exponential lower envelope.

    Block m applies a norm-maximizing product of at most p factors and
    then the fixed expander word; block boundaries q_0 < q_1 < ... satisfy
    ||x(q_m)|| >= mu^m ||x(q_0)||, and between boundaries the norm obeys
    ||x(k)|| >= kappa * growth_rate**k * ||x(0)||."""

    mu: float
    expander_word: tuple
    trajectory: Trajectory
    kappa: float
    growth_rate: float
    boundaries: tuple
    block_words: tuple
    sigma_lower: float


def instability_witness(
    family: MatrixFamily,
    p: int,
    seed_x: np.ndarray,
    seed_R_word,
    mu: float,
    x0: np.ndarray,
    blocks: int,
    sigma_lower: float,
    cap: int = ENUMERATION_CAP,
) -> InstabilityWitness:
    """Build a growing trajectory from an expansion certificate.

    Precondition: the expander R = product(seed_R_word) satisfies
    ||R seed_x|| > mu * (1 / sigma_lower) * ||seed_x|| with mu > 1 and a
    certified positive sigma_lower. Then from any state z some product L
    of at most p factors aligns z well enough with seed_x that R L z grows
    by at least mu, which the construction checks block by block.
    """
    if mu <= 1.0:
        raise ValueError("mu must exceed 1")
    if sigma_lower <= 0.0:
        raise ValueError("sigma_lower must be positive")
    if blocks < 1:
        raise ValueError("blocks must be at least 1")
    seed_x = np.asarray(seed_x, dtype=float).ravel()
    x0 = np.asarray(x0, dtype=float).ravel()
    if not np.any(seed_x) or not np.any(x0):
        raise ValueError("seed_x and x0 must be nonzero")
    seed_R_word = tuple(int(i) for i in seed_R_word)
    norm = family.norm
    R = word_matrix(family, seed_R_word)
    gain = vector_norm(R @ seed_x, norm) / vector_norm(seed_x, norm)
    required = mu / sigma_lower
    if gain <= required:
        raise WitnessPreconditionError(
            f"expander gain {gain:.6g} along seed_x does not exceed "
            f"mu / sigma_lower = {required:.6g}"
        )
    products = enumerate_products(family, p, cap=cap)
    stacked = products.stacked()
    words = [item.word for item in products.items]
    z = x0.copy()
    full_word: list = []
    boundaries = [0]
    block_words = []
    block_norms = [vector_norm(z, norm)]
    for _ in range(blocks):
        images = np.einsum("qij,j->qi", stacked, z)
        after = images @ R.T
        if norm is NormTag.L1:
            gains = np.abs(after).sum(axis=1)
        elif norm is NormTag.LINF:
            gains = np.abs(after).max(axis=1)
        else:
            gains = np.linalg.norm(after, axis=1)
        best = int(np.argmax(gains))
        # Deterministic tie-break: lexicographically smallest word.
        top = np.flatnonzero(gains >= gains[best] * (1.0 - 1e-12))
        best = min(top, key=lambda i: words[i])
        zn = vector_norm(z, norm)
        if gains[best] < mu * zn * (1.0 - WITNESS_GROWTH_SLACK):
            raise CertificateInconsistencyError(
                f"best block gain {gains[best] / zn:.6g} fell below mu = {mu}"
            )
        block = words[best] + seed_R_word
        full_word.extend(block)
        block_words.append(block)
        z = after[best]
        boundaries.append(len(full_word))
        block_norms.append(vector_norm(z, norm))
    trajectory = simulate(family, full_word, x0)
    traj_norms = trajectory.norms()
    base = traj_norms[0]
    for m, q in enumerate(boundaries):
        # Per-block slack compounds, plus one factor for the recomputation.
        slack = (1.0 - WITNESS_GROWTH_SLACK) ** (m + 1)
        need = (mu**m) * base * slack
        if traj_norms[q] < need:
            raise CertificateInconsistencyError(
                f"boundary {m} at step {q} reached {traj_norms[q]:.6g} "
                f"instead of {need:.6g}"
            )
    K = max(len(w) for w in block_words)
    B = max(1.0, max(induced_norm(Ai, norm) for Ai in family.members))
    growth_rate = mu ** (1.0 / K)
    kappa = B ** (-(K - 1)) if K > 1 else 1.0
    return InstabilityWitness(
        mu=mu,
        expander_word=seed_R_word,
        trajectory=trajectory,
        kappa=kappa,
        growth_rate=growth_rate,
        boundaries=tuple(boundaries),
        block_words=tuple(block_words),
        sigma_lower=sigma_lower,
    )
