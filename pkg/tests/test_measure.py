"""Quasi-controllability measure: search, certification, structured bounds.

Frozen oracle values. sigma_1 of the one-row-update family of
A = [[0, 1/2], [1/2, 0]] in L1 was evaluated independently by a dense scan
of the L1 unit circle (20001 points per sign pattern, t_max via facet
enumeration): minimum 0.1311834 at x ~ (0.1584, 0.8416). The descent
estimate must land at or slightly below that grid value (the scan is an
upper bound on the true infimum) and never more than one Lipschitz grid
step under it. t_max hand value at x = (1/2, -1/2): the orbit points are
(0.5, -0.5), (-0.25, -0.5), (0.5, 0.25), and the largest inscribed L1
ball has radius 1/2.
"""
import numpy as np
import pytest

from corpus import random_reducible_family, random_stable_mixture
from switchbound import (
    MatrixFamily,
    NormTag,
    SearchConfig,
    mixture_family,
    mixture_lower_bound,
    quasi_controllability_measure,
    t_max,
    t_max_lipschitz,
    vertex_family,
    vertex_lower_bound,
)
from switchbound.core import enumerate_products

SWAP_HALF = np.array([[0.0, 0.5], [0.5, 0.0]])
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])

SCAN_SIGMA1 = 0.1311834
SCAN_STEP = 1e-4


def test_t_max_hand_value():
    fam = mixture_family(SWAP_HALF)
    assert t_max(fam, 1, np.array([0.5, -0.5])) == pytest.approx(0.5, abs=1e-9)


def test_t_max_zero_on_invariant_subspace():
    rng = np.random.default_rng(20)
    fam, v = random_reducible_family(rng, 3, k=1)
    assert t_max(fam, 2, v) == 0.0


def test_t_max_scale_invariance():
    fam = mixture_family(SWAP_HALF)
    x = np.array([0.3, 0.7])
    a = t_max(fam, 1, x)
    b = t_max(fam, 1, 5.0 * x)
    assert b == pytest.approx(5.0 * a, rel=1e-9)


def test_t_max_lipschitz_property():
    fam = mixture_family(SWAP_HALF)
    products = enumerate_products(fam, 1)
    L = t_max_lipschitz(products)
    rng = np.random.default_rng(21)
    for _ in range(40):
        x = rng.standard_normal(2)
        y = x + rng.standard_normal(2) * 0.05
        fx = t_max(fam, 1, x, products=products)
        fy = t_max(fam, 1, y, products=products)
        assert abs(fx - fy) <= L * np.sum(np.abs(x - y)) + 1e-10


def test_measure_matches_dense_scan():
    rep = quasi_controllability_measure(mixture_family(SWAP_HALF), p=1)
    assert rep.sigma_upper <= SCAN_SIGMA1 + 1e-9
    assert rep.sigma_upper >= SCAN_SIGMA1 - t_max_lipschitz(
        enumerate_products(mixture_family(SWAP_HALF), 1)
    ) * SCAN_STEP
    assert 0.0 < rep.sigma_lower <= rep.sigma_upper
    assert not rep.warnings


def test_measure_is_deterministic():
    fam = mixture_family(SWAP_HALF)
    a = quasi_controllability_measure(fam, p=1)
    b = quasi_controllability_measure(fam, p=1)
    assert a.sigma_upper == b.sigma_upper
    assert a.sigma_lower == b.sigma_lower
    assert np.array_equal(a.argmin, b.argmin)


def test_measure_monotone_in_p():
    fam = mixture_family(SWAP_HALF)
    cfg = SearchConfig(certify=False)
    s1 = quasi_controllability_measure(fam, p=1, config=cfg).sigma_upper
    s2 = quasi_controllability_measure(fam, p=2, config=cfg).sigma_upper
    s3 = quasi_controllability_measure(fam, p=3, config=cfg).sigma_upper
    # Larger p means more products, a bigger hull, and a larger measure.
    assert s2 >= s1 - 1e-9
    assert s3 >= s2 - 1e-9


def test_measure_zero_for_reducible_family():
    rng = np.random.default_rng(22)
    fam, v = random_reducible_family(rng, 3, k=1)
    cfg = SearchConfig(extra_starts=(v,))
    rep = quasi_controllability_measure(fam, p=2, config=cfg)
    assert rep.sigma_upper == 0.0
    assert rep.sigma_lower == 0.0
    assert any("not certified" in w for w in rep.warnings)


def test_measure_warns_below_critical_depth():
    fam = random_stable_mixture(np.random.default_rng(23), 3)
    rep = quasi_controllability_measure(fam, p=1, config=SearchConfig(certify=False))
    assert any("below n-1" in w for w in rep.warnings)


def test_measure_certified_lower_bound_is_sound():
    # The certified floor must stay below every sampled value of t_max.
    fam = mixture_family(SWAP_HALF)
    rep = quasi_controllability_measure(fam, p=1)
    products = enumerate_products(fam, 1)
    rng = np.random.default_rng(24)
    for _ in range(100):
        x = rng.standard_normal(2)
        x /= np.sum(np.abs(x))
        assert t_max(fam, 1, x, products=products) >= rep.sigma_lower - 1e-9


@pytest.mark.parametrize("norm", [NormTag.L2, NormTag.LINF])
def test_measure_other_norms_certify(norm):
    fam = mixture_family(SWAP_HALF, norm=norm)
    rep = quasi_controllability_measure(fam, p=1)
    assert rep.sigma_lower > 0.0
    assert rep.sigma_lower <= rep.sigma_upper + 1e-12
    products = enumerate_products(fam, 1)
    rng = np.random.default_rng(25)
    ord_ = 2 if norm is NormTag.L2 else np.inf
    for _ in range(50):
        x = rng.standard_normal(2)
        x /= np.linalg.norm(x, ord_)
        assert t_max(fam, 1, x, products=products) >= rep.sigma_lower - 1e-9


def test_measure_vertex_swap_exact_half():
    # Hand value: at x = (1/2, 1/2) the depth-2 orbit of the sign-flip
    # family of the swap matrix is the square with corners (+-1/2, +-1/2),
    # whose largest inscribed L1 ball has radius exactly 1/2, and no unit
    # vector does better. The corner is the global minimizer, so every
    # sampled start bounds it from above; pinning the corner itself makes
    # the upper estimate exact.
    fam = vertex_family(SWAP)
    cfg = SearchConfig(extra_starts=(np.array([0.5, 0.5]),))
    rep = quasi_controllability_measure(fam, p=2, config=cfg)
    assert rep.sigma_upper == pytest.approx(0.5, abs=1e-9)
    assert rep.sigma_upper >= 0.5 - 1e-9
    assert rep.sigma_lower == pytest.approx(0.5, rel=0.35)
    assert rep.sigma_lower <= 0.5 + 1e-12
    # Unpinned, the two-stage descent still lands within coarse tolerance.
    free = quasi_controllability_measure(fam, p=2)
    assert 0.5 - 1e-9 <= free.sigma_upper <= 0.5 + 1e-4


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(starts=0)
    with pytest.raises(ValueError):
        SearchConfig(mesh=-1.0)
    with pytest.raises(ValueError):
        SearchConfig(goal_fraction=1.5)


def test_mixture_lower_bound_closed_form():
    rep = mixture_lower_bound(SWAP_HALF)
    assert rep.alpha == pytest.approx(1.0 / 8.0, abs=1e-12)
    assert rep.beta == pytest.approx(1.0 / 4.0, abs=1e-12)
    assert rep.bound == pytest.approx(1.0 / 32.0, abs=1e-12)
    assert rep.status.value == "quasi_controllable"


def test_mixture_lower_bound_is_below_measure():
    rep = mixture_lower_bound(SWAP_HALF)
    measured = quasi_controllability_measure(mixture_family(SWAP_HALF), p=2)
    # The closed form bounds the true sigma_N from below, and the descent
    # estimate bounds it from above.
    assert measured.sigma_upper >= rep.bound - 1e-9


def test_mixture_lower_bound_degrades_gracefully():
    A = np.array([[0.25, 0.75], [0.75, 0.25]])
    rep = mixture_lower_bound(A)
    assert rep.bound == 0.0
    assert rep.status.value == "reducible"
    assert rep.reason


def test_vertex_lower_bound_closed_form():
    rep = vertex_lower_bound(SWAP)
    assert rep.alpha == pytest.approx(0.5, abs=1e-12)
    assert rep.beta == pytest.approx(1.0, abs=1e-12)
    assert rep.bound == pytest.approx(0.5, abs=1e-12)


def test_vertex_lower_bound_singular():
    rep = vertex_lower_bound(np.array([[1.0, 1.0], [1.0, 1.0]]))
    assert rep.bound == 0.0
    assert rep.status.value == "reducible"


def test_structured_bounds_respect_random_measures():
    rng = np.random.default_rng(26)
    for _ in range(5):
        A = rng.uniform(0.05, 0.3, (2, 2)) * np.where(
            rng.random((2, 2)) < 0.5, -1.0, 1.0
        )
        rep = mixture_lower_bound(A)
        if rep.bound == 0.0:
            continue
        measured = quasi_controllability_measure(
            mixture_family(A), p=2, config=SearchConfig(certify=False)
        )
        assert measured.sigma_upper >= rep.bound - 1e-9
