import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import covertdht.exponents as expo
from covertdht import Dmc
from covertdht.errors import (
    ConditionalUndefined,
    EmptyFeasibleSet,
    Infeasible,
    InvalidChannel,
    SupportViolation,
)
from covertdht.probability import (
    LN2,
    Alphabet,
    JointPmf,
    Pmf,
    kl_divergence,
    kl_divergence_vec,
)

AB = Alphabet(("a", "b"))
Z3 = Alphabet(("z0", "z1", "z2"))


def positive_pmf(alphabet):
    return (
        st.lists(
            st.floats(min_value=1e-3, max_value=1.0),
            min_size=alphabet.size,
            max_size=alphabet.size,
        )
        .map(lambda w: Pmf(alphabet, np.array(w) / sum(w)))
    )


class TestThreshold:
    def test_closed_form_matches_grid_maximum(self, example_dmc):
        pbar = expo.pbar_threshold(example_dmc, "1")
        g0 = example_dmc.z_row("0").probs
        g1 = example_dmc.z_row("1").probs
        ms = np.linspace(1e-9, 1 - 1e-9, 200_001)
        vals = [
            expo.pbar_objective(np.array([1 - m, m]), g0, g1) for m in ms
        ]
        assert pbar.tau_nats == pytest.approx(max(vals), abs=1e-8)
        assert pbar.maximizer["1"] == pytest.approx(ms[int(np.argmax(vals))], abs=1e-4)

    def test_ternary_grid_maximum(self):
        dmc = Dmc(
            AB,
            AB,
            Z3,
            [[0.5, 0.5], [0.3, 0.7]],
            [[0.5, 0.3, 0.2], [0.2, 0.4, 0.4]],
            "a",
        )
        pbar = expo.pbar_threshold(dmc, "b")
        g0 = dmc.z_row("a").probs
        g1 = dmc.z_row("b").probs
        grid = expo._simplex_grid(3, 1e-3)
        best = max(expo.pbar_objective(pi, g0, g1) for pi in grid)
        assert best <= pbar.tau_nats + 1e-12
        assert pbar.tau_nats - best <= 1e-4
        # stationarity: the closed-form maximizer attains the value exactly
        attained = expo.pbar_objective(pbar.maximizer.probs, g0, g1)
        assert attained == pytest.approx(pbar.tau_nats, abs=1e-12)

    @given(positive_pmf(Z3), positive_pmf(Z3), positive_pmf(Z3))
    @settings(max_examples=100, deadline=None)
    def test_tau_is_an_upper_bound(self, g0, g1, pi):
        dmc = Dmc(AB, AB, Z3, [[0.5, 0.5]] * 2, [g0.probs, g1.probs], "a")
        pbar = expo.pbar_threshold(dmc, "b")
        assert expo.pbar_objective(pi.probs, g0.probs, g1.probs) <= pbar.tau_nats + 1e-9

    def test_identical_rows_give_zero_tau(self):
        dmc = Dmc(AB, AB, AB, [[0.5, 0.5]] * 2, [[0.4, 0.6], [0.4, 0.6]], "a")
        assert expo.pbar_threshold(dmc, "b").tau_nats == pytest.approx(0.0, abs=1e-15)

    def test_support_violation(self):
        dmc = Dmc(AB, AB, AB, [[0.5, 0.5]] * 2, [[1.0, 0.0], [0.5, 0.5]], "a")
        with pytest.raises(SupportViolation):
            expo.pbar_threshold(dmc, "b")

    def test_zero_symbol_rejected(self, example_dmc):
        with pytest.raises(ValueError):
            expo.pbar_threshold(example_dmc, "0")

    def test_membership(self, example_dmc, example_p_u):
        pbar = expo.pbar_threshold(example_dmc, "1")
        inside = Pmf(example_p_u.alphabet, np.array([0.2, 0.8]))
        near = Pmf(example_p_u.alphabet, np.array([0.79, 0.21]))
        assert expo.pbar_contains(inside, example_p_u, pbar)
        assert not expo.pbar_contains(near, example_p_u, pbar)
        # infinite divergence counts as membership
        degenerate_ref = Pmf(example_p_u.alphabet, np.array([1.0, 0.0]))
        assert expo.pbar_contains(inside, degenerate_ref, pbar)


class TestIProjection:
    def test_marginals_and_product_form(self):
        rng = np.random.default_rng(0)
        rows = Alphabet((0, 1, 2))
        cols = Alphabet(("x", "y", "z"))
        for _ in range(20):
            q = JointPmf(rows, cols, rng.dirichlet(np.ones(9)).reshape(3, 3))
            r = Pmf(rows, rng.dirichlet(np.ones(3)))
            c = Pmf(cols, rng.dirichlet(np.ones(3)))
            k = expo.i_projection_coupling(q, r, c)
            assert np.allclose(k.probs.sum(axis=1), r.probs, atol=1e-9)
            assert np.allclose(k.probs.sum(axis=0), c.probs, atol=1e-9)
            # the projection is q rescaled by a rank-one positive factor
            ratio = k.probs / q.probs
            assert np.linalg.matrix_rank(ratio, tol=1e-6) == 1

    def test_projection_beats_random_couplings(self):
        rng = np.random.default_rng(1)
        rows = Alphabet((0, 1))
        cols = Alphabet(("x", "y"))
        q = JointPmf(rows, cols, np.array([[0.4, 0.1], [0.2, 0.3]]))
        r = Pmf(rows, np.array([0.35, 0.65]))
        c = Pmf(cols, np.array([0.55, 0.45]))
        k = expo.i_projection_coupling(q, r, c)
        best = kl_divergence_vec(k.probs.ravel(), q.probs.ravel())
        lo = max(0.0, r.probs[0] + c.probs[0] - 1.0)
        hi = min(r.probs[0], c.probs[0])
        for t in rng.uniform(lo, hi, size=500):
            other = np.array([
                [t, r.probs[0] - t],
                [c.probs[0] - t, 1 - r.probs[0] - c.probs[0] + t],
            ])
            assert best <= kl_divergence_vec(other.ravel(), q.probs.ravel()) + 1e-10

    def test_infeasible_support(self):
        rows = Alphabet((0, 1))
        cols = Alphabet(("x", "y"))
        q = JointPmf(rows, cols, np.array([[0.5, 0.0], [0.0, 0.5]]))
        with pytest.raises(Infeasible):
            expo.i_projection_coupling(
                q, Pmf(rows, np.array([0.3, 0.7])), Pmf(cols, np.array([0.7, 0.3]))
            )

    def test_alphabet_mismatch(self):
        rows = Alphabet((0, 1))
        cols = Alphabet(("x", "y"))
        q = JointPmf(rows, cols, np.full((2, 2), 0.25))
        with pytest.raises(Infeasible):
            expo.i_projection_coupling(
                q, Pmf(cols, np.array([0.5, 0.5])), Pmf(cols, np.array([0.5, 0.5]))
            )


class TestE1:
    def test_product_reference_splits(self):
        u = Alphabet((0, 1))
        v = Alphabet(("x", "y", "z"))
        p_uv = JointPmf(u, v, np.array([[0.1, 0.2, 0.15], [0.25, 0.1, 0.2]]))
        q_u = Pmf(u, np.array([0.6, 0.4]))
        q_v = Pmf(v, np.array([0.2, 0.5, 0.3]))
        q_uv = JointPmf.product(q_u, q_v)
        e1 = expo.compute_E1(p_uv, q_uv)
        want = kl_divergence(p_uv.row_marginal(), q_u) + kl_divergence(
            p_uv.col_marginal(), q_v
        )
        assert e1.value_nats == pytest.approx(want, abs=1e-8)

    def test_degenerate_v_reduces_to_marginal_divergence(self, example_sources):
        p_uv, q_uv = example_sources
        e1 = expo.compute_E1(p_uv, q_uv)
        want = kl_divergence(p_uv.row_marginal(), q_uv.row_marginal())
        assert e1.value_nats == pytest.approx(want, rel=1e-10)

    def test_support_violation(self):
        u = Alphabet((0, 1))
        v = Alphabet(("x",))
        p_uv = JointPmf(u, v, np.array([[0.5], [0.5]]))
        q_uv = JointPmf(u, v, np.array([[1.0], [0.0]]))
        with pytest.raises(SupportViolation):
            expo.compute_E1(p_uv, q_uv)


class TestTU:
    def test_degenerate_v_gives_alternative_marginal(self, example_sources):
        _, q_uv = example_sources
        p_v = Pmf(Alphabet(("c",)), np.array([1.0]))
        t_u = expo.compute_T_U(p_v, q_uv)
        assert np.allclose(t_u.probs, q_uv.row_marginal().probs)

    def test_direct_formula(self):
        u = Alphabet((0, 1))
        v = Alphabet(("x", "y"))
        q_uv = JointPmf(u, v, np.array([[0.1, 0.3], [0.4, 0.2]]))
        p_v = Pmf(v, np.array([0.6, 0.4]))
        t_u = expo.compute_T_U(p_v, q_uv)
        want = 0.6 * q_uv.probs[:, 0] / 0.5 + 0.4 * q_uv.probs[:, 1] / 0.5
        assert np.allclose(t_u.probs, want)

    def test_undefined_conditional(self):
        u = Alphabet((0, 1))
        v = Alphabet(("x", "y"))
        q_uv = JointPmf(u, v, np.array([[0.5, 0.0], [0.5, 0.0]]))
        p_v = Pmf(v, np.array([0.5, 0.5]))
        with pytest.raises(ConditionalUndefined):
            expo.compute_T_U(p_v, q_uv)


class TestE2E3:
    def test_e2_empty_feasible_set(self, example_sources, example_p_u):
        p_uv, q_uv = example_sources
        dmc = Dmc(AB, AB, AB, [[0.5, 0.5]] * 2, [[0.4, 0.6], [0.4, 0.6]], "a")
        pbar = expo.pbar_threshold(dmc, "b")
        with pytest.raises(EmptyFeasibleSet):
            expo.compute_E2(p_uv, q_uv, example_p_u, pbar)

    def test_e2_minimizer_on_constraint_boundary(
        self, example_sources, example_dmc, example_p_u
    ):
        p_uv, q_uv = example_sources
        pbar = expo.pbar_threshold(example_dmc, "1")
        e2 = expo.compute_E2(p_uv, q_uv, example_p_u, pbar)
        min_u = e2.minimizer.row_marginal()
        # the unconstrained minimizer (the alternative marginal) lies inside
        # the transmission set, so the constrained optimum sits on tau
        assert kl_divergence(min_u, example_p_u) == pytest.approx(pbar.tau_nats, abs=1e-6)
        assert e2.value_nats == pytest.approx(
            kl_divergence(min_u, q_uv.row_marginal()), abs=1e-8
        )

    def test_e3_example_decomposition(self, example_sources, example_dmc, example_p_u):
        p_uv, q_uv = example_sources
        e3 = expo.compute_E3(p_uv, q_uv, example_p_u, example_dmc)
        assert e3.best_x1 == "1"
        inner, channel, total = e3.per_x1["1"]
        # the alternative's U-marginal already triggers transmission, so the
        # source part vanishes and only the channel divergence remains
        assert inner == pytest.approx(0.0, abs=1e-12)
        want = kl_divergence(example_dmc.y_row("0"), example_dmc.y_row("1"))
        assert channel == pytest.approx(want, rel=1e-12)
        assert total == pytest.approx(e3.value_nats)

    def test_e2_ternary_upper_bound_property(self):
        # larger source alphabet exercises the grid-plus-polish path; the
        # returned value must not exceed the objective at any feasible point
        u = Alphabet((0, 1, 2))
        v = Alphabet(("x", "y"))
        p_uv = JointPmf(u, v, np.array([[0.3, 0.1], [0.2, 0.1], [0.1, 0.2]]))
        q_uv = JointPmf(u, v, np.array([[0.1, 0.1], [0.1, 0.3], [0.25, 0.15]]))
        p_u = p_uv.row_marginal()
        dmc = Dmc(
            AB, AB, AB, [[0.6, 0.4], [0.4, 0.6]], [[0.6, 0.4], [0.4, 0.6]], "a"
        )
        pbar = expo.pbar_threshold(dmc, "b")
        e2 = expo.compute_E2(p_uv, q_uv, p_u, pbar)
        g = expo._coupling_objective(q_uv, p_uv.col_marginal())
        rng = np.random.default_rng(4)
        for _ in range(2000):
            pt = rng.dirichlet(np.ones(3))
            if expo._safe_kl(pt, p_u.probs) <= pbar.tau_nats:
                assert e2.value_nats <= g(pt) + 1e-7


class TestImprovement:
    def test_full_improvement_on_example(self, example_sources, example_dmc):
        p_uv, q_uv = example_sources
        verdict = expo.improvement_check(p_uv, q_uv, example_dmc)
        assert verdict is expo.Improvement.STRICT_IMPROVEMENT_FULL

    def test_partial_improvement(self, example_sources, partial_dmc):
        p_uv, q_uv = example_sources
        verdict = expo.improvement_check(p_uv, q_uv, partial_dmc)
        assert verdict is expo.Improvement.STRICT_IMPROVEMENT_PARTIAL

    def test_no_improvement_when_mixture_matches(self, example_dmc):
        u = Alphabet((0, 1))
        v = Alphabet(("x", "y"))
        p_uv = JointPmf.product(Pmf(u, np.array([0.8, 0.2])), Pmf(v, np.array([0.5, 0.5])))
        q_uv = JointPmf.product(Pmf(u, np.array([0.8, 0.2])), Pmf(v, np.array([0.9, 0.1])))
        verdict = expo.improvement_check(p_uv, q_uv, example_dmc)
        assert verdict is expo.Improvement.NO_IMPROVEMENT


class TestAchievableExponent:
    def test_invalid_channel_rejected(self, example_sources):
        p_uv, q_uv = example_sources
        dmc = Dmc(AB, AB, AB, [[0.5, 0.5]] * 2, [[0.4, 0.6], [0.4, 0.6]], "a")
        with pytest.raises(InvalidChannel):
            expo.achievable_exponent(p_uv, q_uv, dmc)

    def test_eps_validation(self, example_sources, example_dmc):
        p_uv, q_uv = example_sources
        with pytest.raises(ValueError):
            expo.achievable_exponent(p_uv, q_uv, example_dmc, eps=1.0)

    def test_partially_connected_theta_is_e1(self, example_sources, partial_dmc):
        p_uv, q_uv = example_sources
        rep = expo.achievable_exponent(p_uv, q_uv, partial_dmc)
        assert rep.connectivity is expo.ConnectivityCase.PARTIALLY_CONNECTED
        assert rep.theta_nats == rep.e1_nats == rep.theta_literal_nats

    def test_fully_connected_theta(self, example_sources, example_dmc):
        p_uv, q_uv = example_sources
        rep = expo.achievable_exponent(p_uv, q_uv, example_dmc)
        assert rep.connectivity is expo.ConnectivityCase.FULLY_CONNECTED
        want = min(rep.e2_by_x1["1"], rep.e3_by_x1["1"][2])
        assert rep.theta_nats == pytest.approx(want)
        assert rep.theta_literal_nats == pytest.approx(want)  # single non-zero input

    def test_report_base_conversion(self, example_sources, example_dmc):
        p_uv, q_uv = example_sources
        rep = expo.achievable_exponent(p_uv, q_uv, example_dmc)
        d = rep.as_dict()
        assert d["base"] == "bits"
        assert d["e1"] == pytest.approx(rep.e1_nats / LN2)
        assert d["improvement"] == "strict_improvement_full"

    def test_source_relabelling_invariance(self, example_sources, example_dmc):
        """Swapping the order of the U symbols changes nothing numerical."""
        p_uv, q_uv = example_sources
        u_swapped = Alphabet((1, 0))
        v = p_uv.col_alphabet
        p_sw = JointPmf(u_swapped, v, p_uv.probs[::-1])
        q_sw = JointPmf(u_swapped, v, q_uv.probs[::-1])
        a = expo.achievable_exponent(p_uv, q_uv, example_dmc)
        b = expo.achievable_exponent(p_sw, q_sw, example_dmc)
        assert b.e1_nats == pytest.approx(a.e1_nats, abs=1e-9)
        assert b.e2_by_x1["1"] == pytest.approx(a.e2_by_x1["1"], abs=1e-9)
        assert b.e3_by_x1["1"][2] == pytest.approx(a.e3_by_x1["1"][2], abs=1e-9)
        assert b.theta_nats == pytest.approx(a.theta_nats, abs=1e-9)


def test_local_exponent(example_sources):
    p_uv, q_uv = example_sources
    assert expo.local_exponent(p_uv.col_marginal(), q_uv.col_marginal()) == 0.0
