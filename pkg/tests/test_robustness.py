"""Parameter sweeps, persistence probes, limit families, peak demo.

Hand oracles. Adding tau = 1/4 to every entry of [[0, 1/2], [1/2, 0]]
produces unit row sums, so ones spans an invariant line of every
one-row-update member and quasi-controllability is lost. The unipotent
shear [[1, 1], [0, 1]] has ||S^k||_1 = 1 + k, so its depth-T overshoot
is exactly 1 + T. The deadbeat demo at a = 1, eps = 0.1 yields the
closed loop [[-1, 0.1], [-10, 1]] with zero trace and determinant
(nilpotent) and L1 norm 11; flipping the lower-left sign gives
determinant -2, hence eigenvalue moduli sqrt(2).
"""
import numpy as np
import pytest

from switchbound import (
    MatrixFamily,
    NormTag,
    ProbeInapplicableError,
    SearchConfig,
    drift_limit_member,
    instability_robustness_probe,
    intro_peak_demo,
    limit_family_suite,
    measure_sweep,
    mixture_family,
    mixture_qc_criterion,
    shear_limit_member,
    single_matrix_chi,
)
from switchbound.core import induced_norm

SWAP_HALF = np.array([[0.0, 0.5], [0.5, 0.0]])


def _mixture_generator(tau):
    return mixture_family(SWAP_HALF + tau * np.ones((2, 2)))


def _unstable_generator(tau):
    theta = 0.9
    R = 1.2 * np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    D = np.diag([1.4, 0.5])
    return MatrixFamily(((1 - tau) * R, (1 - tau) * D), norm=NormTag.L1)


def test_measure_sweep_rows_and_gap():
    taus = [0.25, 0.0, 0.0625]
    table = measure_sweep(
        _mixture_generator,
        p=1,
        taus=taus,
        T=4,
        criterion=lambda tau: mixture_qc_criterion(SWAP_HALF + tau * np.ones((2, 2))),
    )
    assert table.kind == "measure"
    assert [r.tau for r in table.rows] == sorted(taus)
    base_row = table.rows[0]
    assert base_row.tau == 0.0
    assert base_row.gap == 0.0
    assert base_row.qc_status == "quasi_controllable"
    for row in table.rows:
        assert row.gap == pytest.approx(
            abs(row.sigma_upper - base_row.sigma_upper), abs=1e-15
        )
        assert row.chi_T is not None and row.chi_T >= 1.0
        assert row.jsr_verdict == "inconclusive"


def test_measure_sweep_detects_criterion_flip():
    table = measure_sweep(
        _mixture_generator,
        p=1,
        taus=[0.0, 0.25],
        criterion=lambda tau: mixture_qc_criterion(SWAP_HALF + tau * np.ones((2, 2))),
    )
    flipped = table.rows[-1]
    assert flipped.tau == 0.25
    assert flipped.qc_status == "reducible"
    # Row sums one means ones is invariant: the measure collapses with the
    # criterion, and no positive lower bound can be certified.
    assert flipped.sigma_upper < 1e-6
    assert flipped.sigma_lower == 0.0
    assert flipped.bound is None


def test_measure_sweep_columns_track_contents():
    with_chi = measure_sweep(_mixture_generator, p=1, taus=[0.0], T=3)
    assert "chi_T" in with_chi.columns()
    without_chi = measure_sweep(_mixture_generator, p=1, taus=[0.0])
    assert "chi_T" not in without_chi.columns()
    rows = with_chi.as_rows()
    assert len(rows) == 1
    assert len(rows[0]) == len(with_chi.columns())


def test_probe_persistence_transitions():
    table = instability_robustness_probe(
        _unstable_generator, p=1, taus=[0.0, 0.02, 0.5], T=8, blocks=4
    )
    assert table.kind == "instability_probe"
    by_tau = {r.tau: r for r in table.rows}
    assert by_tau[0.0].persists is True
    assert by_tau[0.0].witness_ok is True
    assert by_tau[0.02].persists is True
    assert by_tau[0.02].witness_ok is True
    assert by_tau[0.5].persists is False
    assert by_tau[0.5].witness_ok is False
    # The threshold column is the base bound 1/sigma_lower(0), shared by
    # every row; the gain column decays as the members shrink.
    bounds = {r.bound for r in table.rows}
    assert len(bounds) == 1
    assert by_tau[0.5].chi_T < by_tau[0.0].chi_T
    cols = table.columns()
    assert "persists" in cols and "witness_ok" in cols


def test_probe_rejects_family_without_violation():
    with pytest.raises(ProbeInapplicableError):
        instability_robustness_probe(
            lambda tau: mixture_family(SWAP_HALF), p=1, taus=[0.0], T=4
        )


def test_probe_rejects_uncertified_base():
    def reducible_gen(tau):
        return mixture_family(np.array([[0.5, 0.25], [0.25, 0.5]]) + tau)

    with pytest.raises(ProbeInapplicableError):
        instability_robustness_probe(reducible_gen, p=1, taus=[0.0], T=4)


def test_limit_suite_shear_overshoot_is_linear_in_depth():
    for T in (1, 5, 17, 50):
        rep = limit_family_suite([2], T)
        assert rep.limit_shear_chi_T == 1.0 + T
    assert rep.limit_shear_qc == "reducible"
    assert rep.limit_identity_chi == 1.0
    assert rep.limit_identity_qc == "reducible"


def test_limit_suite_drift_overshoot_grows_without_bound():
    ms = [2, 4, 8, 16]
    rep = limit_family_suite(ms, T=10)
    chis = [row.chi_inf_drift for row in rep.rows]
    assert all(b > a for a, b in zip(chis, chis[1:]))
    for row in rep.rows:
        assert row.stable_drift
        assert row.rho_drift == pytest.approx(1.0 - 1.0 / row.m**2, abs=1e-12)
        assert row.qc_status == "reducible"
        assert row.stable_shear
        assert row.rho_shear == pytest.approx(1.0 - 1.0 / row.m, abs=1e-12)


def test_limit_suite_rejects_nonpositive_m():
    with pytest.raises(ValueError):
        limit_family_suite([2, 0], T=3)


def test_single_matrix_chi_matches_power_scan():
    rng = np.random.default_rng(40)
    M = rng.uniform(-1.0, 1.0, size=(3, 3))
    M *= 0.9 / np.max(np.abs(np.linalg.eigvals(M)))
    best, argmax = single_matrix_chi(M)
    powers = [np.linalg.matrix_power(M, k) for k in range(201)]
    scan = max(induced_norm(P, NormTag.L1) for P in powers)
    assert best == pytest.approx(scan, rel=1e-12)
    assert induced_norm(powers[argmax], NormTag.L1) == pytest.approx(best, rel=1e-12)


def test_single_matrix_chi_requires_stability():
    with pytest.raises(ValueError):
        single_matrix_chi(np.diag([1.0, 0.5]))


def test_limit_members_match_formulas():
    np.testing.assert_allclose(shear_limit_member(4), [[0.75, 1.0], [0.0, 0.75]])
    np.testing.assert_allclose(
        drift_limit_member(4), [[1.0 - 1.0 / 16.0, 0.25], [0.0, 1.0 - 1.0 / 16.0]]
    )


def test_intro_peak_demo_frozen_values():
    rep = intro_peak_demo(1.0, 0.1)
    np.testing.assert_allclose(rep.closed_loop, [[-1.0, 0.1], [-10.0, 1.0]], atol=1e-12)
    assert rep.eigenvalue_moduli == pytest.approx((0.0, 0.0), abs=1e-7)
    assert rep.norm_l1 == pytest.approx(11.0, abs=1e-12)
    assert rep.first_step_amplification == pytest.approx(11.0, abs=1e-12)
    assert rep.printed_variant_moduli == pytest.approx(
        (np.sqrt(2.0), np.sqrt(2.0)), abs=1e-9
    )
    # The nilpotent closed loop dies in two steps yet amplifies elevenfold
    # in one; that gap is the point of the demo.
    np.testing.assert_allclose(
        rep.closed_loop @ rep.closed_loop, np.zeros((2, 2)), atol=1e-12
    )


def test_intro_peak_demo_rejects_zero_eps():
    with pytest.raises(ValueError):
        intro_peak_demo(1.0, 0.0)
