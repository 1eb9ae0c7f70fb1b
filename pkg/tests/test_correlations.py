import math

import numpy as np
import pytest

from conftest import charpoly_eigenvalues, qubit_angle_grid_bell, random_state

from vacuumcorr.correlations import (
    SQRT2,
    BellSettings,
    bell_correlation,
    bell_operator,
    canonical_max_violation,
    conditional_bell_correlation,
    contraction_from_projector,
    epr_projector_pair,
    general_contraction_extension,
    seesaw_maximize,
    tsirelson_certificate,
    violate_conditional_bell,
)
from vacuumcorr.linalg import expectation, operator_norm
from vacuumcorr.local_algebra import (
    LocalOperator,
    RegionLayout,
    make_vacuum,
    random_projector,
)

L22 = RegionLayout((2, 2))
L224 = RegionLayout((2, 2, 4))

Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def random_settings(layout, seed):
    rng = np.random.default_rng(seed)
    d1, d2 = layout.dims[0], layout.dims[1]
    ops = []
    for slot, d in ((0, d1), (0, d1), (1, d2), (1, d2)):
        rank = int(rng.integers(1, d))
        p = random_projector(layout, slot, rank, int(rng.integers(0, 10**6)))
        ops.append(contraction_from_projector(p))
    return BellSettings(a1=ops[0], a2=ops[1], b1=ops[2], b2=ops[3])


class TestContractionFromProjector:
    def test_rank_one_qubit(self):
        p = LocalOperator(0, np.diag([1.0, 0.0]))
        c = contraction_from_projector(p)
        np.testing.assert_allclose(c.matrix, Z, atol=1e-12)

    def test_spectrum_is_plus_minus_one(self):
        p = random_projector(L22, 1, 1, seed=3)
        c = contraction_from_projector(p)
        vals = np.linalg.eigvalsh(c.matrix)
        np.testing.assert_allclose(np.sort(vals), [-1.0, 1.0], atol=1e-10)

    def test_rejects_non_projector(self):
        with pytest.raises(ValueError, match="not a projector"):
            contraction_from_projector(LocalOperator(0, 0.5 * np.eye(2)))


class TestBellSettings:
    def test_wrong_slot_rejected(self):
        good = LocalOperator(1, Z)
        with pytest.raises(ValueError, match="slot 0"):
            BellSettings(a1=good, a2=good, b1=good, b2=good)

    def test_non_contraction_rejected(self):
        with pytest.raises(ValueError, match="not a contraction"):
            BellSettings(
                a1=LocalOperator(0, 2.0 * Z),
                a2=LocalOperator(0, X),
                b1=LocalOperator(1, Z),
                b2=LocalOperator(1, X),
            )

    def test_non_self_adjoint_rejected(self):
        with pytest.raises(ValueError, match="not self-adjoint"):
            BellSettings(
                a1=LocalOperator(0, np.array([[0.0, 1.0], [0.0, 0.0]])),
                a2=LocalOperator(0, X),
                b1=LocalOperator(1, Z),
                b2=LocalOperator(1, X),
            )


class TestBellOperator:
    def test_canonical_norm(self):
        # The canonical settings give ||R|| = 2 sqrt(2) exactly.
        _, s = canonical_max_violation(L22)
        r = bell_operator(s, L22)
        assert abs(operator_norm(r) - 2.0 * SQRT2) <= 1e-12

    def test_equal_b_settings_collapse(self):
        # B1 = B2 removes the A2 term: R = 2 A1 B1, so ||R|| <= 2.
        s = BellSettings(
            a1=LocalOperator(0, Z), a2=LocalOperator(0, X),
            b1=LocalOperator(1, Z), b2=LocalOperator(1, Z),
        )
        assert operator_norm(bell_operator(s, L22)) <= 2.0 + 1e-12

    def test_correlation_at_canonical_state(self):
        state, s = canonical_max_violation(L22)
        assert abs(bell_correlation(s, state, L22) - SQRT2) <= 1e-12

    def test_canonical_on_padded_dims(self):
        layout = RegionLayout((3, 3))
        state, s = canonical_max_violation(layout)
        assert abs(bell_correlation(s, state, layout) - SQRT2) <= 1e-12

    def test_classical_settings_respect_two(self):
        # Commuting (diagonal) settings: |<R>| <= 2, i.e. correlation <= 1.
        s = BellSettings(
            a1=LocalOperator(0, Z), a2=LocalOperator(0, -Z),
            b1=LocalOperator(1, Z), b2=LocalOperator(1, -Z),
        )
        for seed in range(20):
            psi = random_state(4, np.random.default_rng(seed))
            assert abs(bell_correlation(s, psi, L22)) <= 1.0 + 1e-10


class TestTsirelson:
    def test_canonical_margin_zero(self):
        _, s = canonical_max_violation(L22)
        assert abs(tsirelson_certificate(s, L22)) <= 1e-12

    def test_random_settings_nonnegative(self):
        for seed in range(50):
            s = random_settings(L22, seed)
            assert tsirelson_certificate(s, L22) >= -1e-9

    def test_correlation_never_beats_half_norm(self):
        rng = np.random.default_rng(77)
        for seed in range(20):
            s = random_settings(L22, 1000 + seed)
            psi = random_state(4, rng)
            corr = abs(bell_correlation(s, psi, L22))
            assert corr <= 0.5 * operator_norm(bell_operator(s, L22)) + 1e-10


class TestSeesaw:
    def test_bell_state_reaches_tsirelson(self):
        state, _ = canonical_max_violation(L22)
        best = max(
            seesaw_maximize(state, L22, seed=seed)[1] for seed in range(10)
        )
        assert best >= SQRT2 - 1e-6
        assert best <= SQRT2 + 1e-9

    def test_product_state_classical_ceiling(self):
        state = np.zeros(4, dtype=complex)
        state[0] = 1.0
        best = max(
            seesaw_maximize(state, L22, seed=seed)[1] for seed in range(5)
        )
        oracle = qubit_angle_grid_bell(state)
        assert best <= 1.0 + 1e-9
        assert best >= oracle - 1e-6

    def test_returned_settings_reproduce_value(self):
        state = random_state(4, np.random.default_rng(5))
        s, val = seesaw_maximize(state, L22, seed=1)
        assert abs(bell_correlation(s, state, L22) - val) <= 1e-10

    def test_matches_angle_grid_on_random_states(self):
        for seed in range(5):
            state = random_state(4, np.random.default_rng(seed))
            best = max(
                seesaw_maximize(state, L22, seed=s)[1] for s in range(8)
            )
            oracle = qubit_angle_grid_bell(state)
            # The grid restricts settings to a real plane, so it can only
            # lose to the see-saw; both stay under the spectral ceiling.
            assert best >= oracle - 1e-3
            assert best <= SQRT2 + 1e-9

    def test_rejects_bad_arguments(self):
        state, _ = canonical_max_violation(L22)
        with pytest.raises(ValueError, match="max_iters"):
            seesaw_maximize(state, L22, seed=0, max_iters=0)
        with pytest.raises(ValueError, match="2-slot"):
            seesaw_maximize(np.ones(16) / 4.0, L224, seed=0)


class TestEPRProjectorPair:
    def test_chain_on_maximally_entangled(self):
        v = make_vacuum(L22, seed=0)
        p2 = random_projector(L22, 1, 1, seed=4)
        p1, report = epr_projector_pair(p2, v.omega, v, eps=1e-3)
        assert p1.slots == (0,)
        assert p1.is_projector()
        assert report.joint_expect <= report.p1_expect + 1e-12
        assert report.joint_expect > report.lower_bound
        assert report.p1_expect > 0.0

    def test_perfect_correlation_strictness(self):
        # The joint expectation sits within eps of <P1>_omega.
        v = make_vacuum(L22, seed=0)
        eps = 1e-3
        for seed in range(10):
            p2 = random_projector(L22, 1, 1, seed=seed)
            _, report = epr_projector_pair(p2, v.omega, v, eps)
            assert report.joint_expect <= report.p1_expect + 1e-12
            assert report.joint_expect > (1.0 - eps) * report.p1_expect

    def test_annihilated_phi_rejected(self):
        v = make_vacuum(L22, seed=0)
        p2 = LocalOperator(1, np.diag([0.0, 1.0]))
        phi = np.zeros(4, dtype=complex)
        phi[0] = 1.0  # e0 (x) e0, killed by |e1><e1| on slot 1
        with pytest.raises(ValueError, match="pass phi = omega"):
            epr_projector_pair(p2, phi, v, eps=1e-3)

    def test_non_projector_rejected(self):
        v = make_vacuum(L22, seed=0)
        with pytest.raises(ValueError, match="not a projector"):
            epr_projector_pair(LocalOperator(1, 0.3 * np.eye(2)), v.omega, v, 1e-3)


class TestConditionalCorrelation:
    def test_identity_projector_reduces_to_vacuum(self):
        v = make_vacuum(L224, seed=0)
        _, s = canonical_max_violation(L224)
        p3 = LocalOperator(2, np.eye(4))
        cond = conditional_bell_correlation(s, p3, v)
        r = bell_operator(s, L224)
        direct = 0.5 * float(expectation(r, v.omega).real)
        assert abs(cond - direct) <= 1e-12

    def test_bounded_by_half_norm(self):
        v = make_vacuum(L224, seed=1)
        _, s = canonical_max_violation(L224)
        for seed in range(10):
            p3 = random_projector(L224, 2, 1 + seed % 4, seed=seed)
            cond = conditional_bell_correlation(s, p3, v)
            assert abs(cond) <= SQRT2 + 1e-10

    def test_wrong_slot_rejected(self):
        v = make_vacuum(L224, seed=0)
        _, s = canonical_max_violation(L224)
        with pytest.raises(ValueError, match="slot 2"):
            conditional_bell_correlation(s, LocalOperator(0, np.eye(2)), v)

    def test_two_slot_layout_rejected(self):
        v = make_vacuum(L22, seed=0)
        _, s = canonical_max_violation(L22)
        with pytest.raises(ValueError, match="3-slot"):
            conditional_bell_correlation(s, LocalOperator(1, np.eye(2)), v)


class TestViolateConditionalBell:
    def test_near_maximal_violation(self):
        v = make_vacuum(L224, seed=0)
        report = violate_conditional_bell(L224, v, eps=0.05)
        cond = report.conditional
        assert cond.conditional_correlation > SQRT2 - 0.05
        assert cond.p3_expect > 0.0
        assert cond.p3.is_projector()

    def test_recompute_from_report(self):
        v = make_vacuum(L224, seed=0)
        report = violate_conditional_bell(L224, v, eps=0.05)
        cond = report.conditional
        recomputed = conditional_bell_correlation(report.settings, cond.p3, v)
        assert abs(recomputed - cond.conditional_correlation) <= 1e-9

    def test_loose_budget_also_passes(self):
        v = make_vacuum(L224, seed=3)
        report = violate_conditional_bell(L224, v, eps=0.5)
        assert report.conditional.conditional_correlation > SQRT2 - 0.5

    def test_rejects_bad_layout(self):
        layout = RegionLayout((2, 2, 6))
        omega = random_state(24, np.random.default_rng(0))
        from vacuumcorr.local_algebra import VacuumModel

        v = VacuumModel.from_vector(layout, omega)
        with pytest.raises(ValueError, match="d3 = d1\\*d2"):
            violate_conditional_bell(layout, v, eps=0.05)


class TestGeneralContractionExtension:
    def test_canonical_settings(self):
        v = make_vacuum(L224, seed=0)
        _, s = canonical_max_violation(L224)
        report = general_contraction_extension(s.a1, s.a2, s.b1, s.b2, v, eps=0.05)
        assert report.conditional.conditional_correlation > SQRT2 - 0.05
        # The optimal state hits (1/2) lambda_max(R), the charpoly root.
        r = bell_operator(s, RegionLayout(L224.dims[:2]))
        top = max(charpoly_eigenvalues(r).real)
        assert abs(report.correlation - 0.5 * top) <= 1e-9

    def test_random_non_commuting_pairs(self):
        v = make_vacuum(L224, seed=7)
        rng = np.random.default_rng(7)
        found = 0
        seed = 0
        while found < 3:
            s = random_settings(L224, 5000 + seed)
            seed += 1
            if operator_norm(
                s.a1.matrix @ s.a2.matrix - s.a2.matrix @ s.a1.matrix
            ) <= 1e-6:
                continue
            if operator_norm(
                s.b1.matrix @ s.b2.matrix - s.b2.matrix @ s.b1.matrix
            ) <= 1e-6:
                continue
            found += 1
            report = general_contraction_extension(
                s.a1, s.a2, s.b1, s.b2, v, eps=0.05
            )
            r = bell_operator(s, RegionLayout(L224.dims[:2]))
            top = max(charpoly_eigenvalues(r).real)
            assert abs(report.correlation - 0.5 * top) <= 1e-8
            assert report.conditional.conditional_correlation > (
                report.correlation - 0.05
            )

    def test_commuting_pair_rejected(self):
        v = make_vacuum(L224, seed=0)
        _, s = canonical_max_violation(L224)
        with pytest.raises(ValueError, match="commute"):
            general_contraction_extension(s.a1, s.a1, s.b1, s.b2, v, eps=0.05)
