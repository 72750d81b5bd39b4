import itertools
import math

import numpy as np
import pytest

import secure_dfilter as sd
from secure_dfilter import analysis
from secure_dfilter.analysis import (BoundParams, beta_grid_search, bound_limsup,
                                     bound_params_for, bound_realtime,
                                     bound_uniform, bound_unsaturated,
                                     check_parameter_inequality, lambda0, iterate_monotone_recursion,
                                     one_step_sparse_observable, p_of_t,
                                     check_observability_implication, rho_sequence,
                                     search_feasible_params, sparse_observable,
                                     varpi)
from secure_dfilter.errors import (CombinatorialBlowup, DivergentGeometry,
                                   NonMonotone, NotInGamma)

BENCH = dict(norm_A=1.02, b_w=0.01, b_v=0.01, eta0=50.0, s=6, n_sensors=30)


def params(beta, L, gamma, lambda0_val=24.0, **overrides):
    base = dict(BENCH, lambda0=lambda0_val, beta=beta, L=L, gamma=gamma)
    base.update(overrides)
    return BoundParams(**base)


# ---------------------------------------------------------------------------
# lambda0 / varpi with brute-force subset oracles
# ---------------------------------------------------------------------------

def brute_lambda0(C, s):
    C = np.atleast_2d(np.asarray(C, float))
    N, n = C.shape
    best = np.inf
    for kept in itertools.combinations(range(N), N - s):
        total = sum(np.outer(C[i], C[i]) for i in kept)
        best = min(best, float(np.linalg.eigvalsh(np.atleast_2d(total))[0]))
    return best


def brute_varpi(A, C, s):
    A = np.atleast_2d(np.asarray(A, float))
    C = np.atleast_2d(np.asarray(C, float))
    N, n = C.shape
    worst = 0.0
    for kept in itertools.combinations(range(N), N - s):
        total = sum(np.outer(C[i], C[i]) for i in kept)
        worst = max(worst, float(np.linalg.norm((np.eye(n) - total / N) @ A, 2)))
    return worst


class TestLambda0:
    def test_scalar_unit_rows_closed_form(self):
        assert lambda0(np.ones((30, 1)), 6) == pytest.approx(24.0, abs=0)

    def test_two_dimensional_collapse(self):
        C = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        # removing the lone row covering the second axis leaves a singular sum
        assert lambda0(C, 1) == pytest.approx(0.0, abs=1e-12)

    def test_repeated_orthonormal_cover(self):
        C = np.array([[1.0, 0.0], [0.0, 1.0]] * 3)  # each direction covered 3 times
        assert lambda0(C, 0) == pytest.approx(3.0, abs=1e-9)

    def test_range_and_oracle_agreement(self):
        rng = np.random.default_rng(10)
        for _ in range(40):
            N = int(rng.integers(3, 9))
            n = int(rng.integers(1, 3))
            C, _ = sd.normalize(rng.normal(size=(N, n)))
            s = int(rng.integers(0, N))
            value = lambda0(C, s)
            assert -1e-9 <= value <= N - s + 1e-9
            assert value == pytest.approx(brute_lambda0(C, s), abs=1e-9)

    def test_scalar_closed_form_vs_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            N = int(rng.integers(3, 10))
            signs = rng.choice([-1.0, 1.0], size=(N, 1))
            s = int(rng.integers(0, N))
            assert lambda0(signs, s) == pytest.approx(brute_lambda0(signs, s), abs=1e-9)

    def test_cap(self):
        with pytest.raises(CombinatorialBlowup) as err:
            lambda0(np.tile(np.eye(2), (20, 1)), 20, cap=1000)
        assert err.value.count == math.comb(40, 20)


class TestVarpi:
    def test_scalar_closed_form(self):
        # unit scalar rows: worst kept sum is N - s, so varpi = |A| s / N
        assert varpi(1.02, np.ones((30, 1)), 6) == pytest.approx(1.02 * 6 / 30, rel=1e-12)

    def test_oracle_agreement(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            N = int(rng.integers(3, 8))
            n = int(rng.integers(1, 3))
            C, _ = sd.normalize(rng.normal(size=(N, n)))
            s = int(rng.integers(0, N))
            A = rng.normal(scale=0.8, size=(n, n))
            assert varpi(A, C, s) == pytest.approx(brute_varpi(A, C, s), abs=1e-9)

    def test_orthonormal_repeated_rows_single_subset(self):
        C = np.array([[1.0, 0.0], [0.0, 1.0]] * 2)
        A = np.diag([1.5, 0.5])
        assert varpi(A, C, 0) == pytest.approx(brute_varpi(A, C, 0), abs=1e-12)


# ---------------------------------------------------------------------------
# disagreement bound p(t)
# ---------------------------------------------------------------------------

class TestPofT:
    def test_zero_at_origin(self):
        assert p_of_t(params(5.0, 4, 0.9497529954327409), 0) == 0.0

    def test_limit_is_p0(self):
        p = params(5.0, 4, 0.9497529954327409)
        assert p_of_t(p, 10_000) == pytest.approx(p.p0, rel=1e-12)

    def test_hand_value(self):
        # gamma^L = 0.2 exactly with L = 1: p(1) collapses to sqrt(N) * beta * 0.2
        p = params(5.0, 1, 0.2)
        assert p_of_t(p, 1) == pytest.approx(math.sqrt(30), rel=1e-12)

    def test_monotone(self):
        p = params(5.0, 4, 0.9497529954327409)
        values = [p_of_t(p, t) for t in range(0, 300)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_divergent_geometry(self):
        with pytest.raises(DivergentGeometry):
            p_of_t(params(5.0, 0, 0.5), 3)   # L = 0 leaves ||A|| * gamma^0 >= 1


# ---------------------------------------------------------------------------
# bound recursion and its evaluators
# ---------------------------------------------------------------------------

class TestRhoSequence:
    def test_benchmark_golden_values(self):
        """First values of the recursion at the benchmark parameters, frozen after
        verifying them against the generic-iterator oracle and hand-evaluated
        q0/p0; the sequence diverges (the parameter inequality fails here)."""
        p = params(5.0, 4, sd.spectral_params(sd.named_topology("fig1")).gamma)
        assert p.p0 == pytest.approx(131.02447258229046, rel=1e-12)
        assert p.q0 == pytest.approx(107.94196962714905, rel=1e-12)
        seq = rho_sequence(p, 200)
        assert seq.rho[1] == pytest.approx(157.83726628898947, rel=1e-12)
        assert seq.rho[2] == pytest.approx(266.75048511232535, rel=1e-12)
        assert seq.rho[5] == pytest.approx(604.4485759689657, rel=1e-12)
        assert not seq.gamma_set
        assert not seq.settled

    def test_oracle_equivalence_bit_for_bit(self):
        p = params(5.0, 4, sd.spectral_params(sd.named_topology("fig1")).gamma)
        seq = rho_sequence(p, 150)
        oracle = iterate_monotone_recursion(p.F, p.q0, p.eta0, 150, f_upper=p.norm_A)
        assert np.array_equal(oracle.x, seq.rho)

    def test_degenerate_limit_pure_product(self):
        # no noise, beta = 0, s = 0: q0 = 0 and the recursion is rho * F(rho)
        p = params(0.0, 2, 0.5, b_w=0.0, b_v=0.0, s=0, norm_A=0.9, eta0=2.0)
        assert p.q0 == 0.0
        seq = rho_sequence(p, 10)
        manual = 2.0
        for _ in range(10):
            manual = p.F(manual) * manual
        assert seq.rho[10] == pytest.approx(manual, rel=1e-12)

    def test_inequality_implies_membership(self, fig1, benchmark_system, feasible_ones):
        beta, eta0, L = feasible_ones
        p = bound_params_for(benchmark_system, fig1, beta, L, 6)
        assert check_parameter_inequality(p).holds
        seq = rho_sequence(p, 100)
        assert 1 in seq.gamma_set

    def test_divergent_geometry(self):
        with pytest.raises(DivergentGeometry):
            rho_sequence(params(5.0, 1, 0.999), 10)


class TestParameterInequality:
    def test_stable_noise_free_positive_slack(self):
        p = params(0.0, 1, 0.5, b_w=0.0, b_v=0.0, s=0, norm_A=0.9, eta0=1.0)
        out = check_parameter_inequality(p)
        assert out.holds and out.slack > 0

    def test_offset_larger_than_eta0_fails(self):
        # q0 > eta0 makes the left side eta0 (1 - F) <= eta0 < q0
        p = params(5.0, 4, sd.spectral_params(sd.named_topology("fig1")).gamma, eta0=50.0)
        assert p.q0 > 50.0
        assert not check_parameter_inequality(p).holds

    def test_search_witness_revalidates(self, fig1, benchmark_system):
        report = search_feasible_params(benchmark_system, fig1, 6)
        beta, eta0, L = report.found_params
        p = bound_params_for(benchmark_system, fig1, beta, L, 6)
        assert check_parameter_inequality(BoundParams(**{**p.__dict__, "eta0": eta0})).holds


class TestBoundEvaluators:
    def _settled_seq(self, fig1, benchmark_system, feasible_ones, T=200):
        beta, eta0, L = feasible_ones
        p = bound_params_for(benchmark_system, fig1, beta, L, 6)
        return rho_sequence(p, T)

    def test_anchor_value(self, fig1, benchmark_system, feasible_ones):
        seq = self._settled_seq(fig1, benchmark_system, feasible_ones)
        t0 = min(seq.gamma_set)
        assert bound_realtime(seq, t0, t0) == pytest.approx(
            float(seq.rho[t0]) + seq.params.p_of_t(t0), rel=1e-12)

    def test_memoryless_when_contraction_zero(self):
        p = params(5.0, 2, 0.0, norm_A=0.0, eta0=10.0, b_w=0.0, b_v=0.0)
        seq = rho_sequence(p, 5)
        # F = 0: the envelope collapses to q0 for every t past the anchor
        assert 1 in seq.gamma_set
        assert bound_realtime(seq, 1, 4) == pytest.approx(p.q0, rel=1e-12)

    def test_limsup_below_uniform(self, fig1, benchmark_system, feasible_ones):
        seq = self._settled_seq(fig1, benchmark_system, feasible_ones)
        limsup = bound_limsup(seq)
        for t0 in sorted(seq.gamma_set):
            assert limsup <= bound_uniform(seq, t0) + 1e-12

    def test_not_in_gamma(self, fig1, benchmark_system, feasible_ones):
        seq = self._settled_seq(fig1, benchmark_system, feasible_ones)
        bad = max(seq.gamma_set) + 10_000
        with pytest.raises(NotInGamma):
            bound_realtime(seq, bad, bad + 1)

    def test_unsaturated_bounds(self, fig1, benchmark_system, feasible_ones):
        beta, eta0, L = feasible_ones
        p = bound_params_for(benchmark_system, fig1, beta, L, 6)
        seq = rho_sequence(p, 200)
        vp = varpi(benchmark_system.A, benchmark_system.C, 6)
        out = bound_unsaturated(seq, 1, vp)
        assert out.condition_holds
        assert out.limsup <= bound_limsup(seq) + 1e-9
        assert out.realtime(seq, 1, 50) <= bound_realtime(seq, 1, 50) + 1e-9

    def test_unsaturated_condition_fails_for_small_beta(self):
        gamma = sd.spectral_params(sd.named_topology("fig1")).gamma
        p = params(5.0, 4, gamma)
        seq = rho_sequence(p, 50)
        # rho diverges here, so Gamma is empty and the anchor is rejected
        with pytest.raises(NotInGamma):
            bound_unsaturated(seq, 1, 0.2)

    def test_unsaturated_condition_false_with_valid_anchor(self):
        # stable plant, small beta: the recursion settles (1 in Gamma) but the
        # saturation cap stays active, so the tighter bounds are absent
        p = params(1.0, 1, 0.2, norm_A=0.9, lambda0=2.5, s=0, n_sensors=5,
                   b_w=0.0, b_v=0.0, eta0=10.0)
        seq = rho_sequence(p, 30)
        assert 1 in seq.gamma_set
        out = bound_unsaturated(seq, 1, varpi_value=0.5)
        assert not out.condition_holds
        assert out.limsup is None
        with pytest.raises(ValueError):
            out.realtime(seq, 1, 5)


# ---------------------------------------------------------------------------
# generic recursion oracle
# ---------------------------------------------------------------------------

class TestMonotoneRecursionOracle:
    def test_constant_half_map(self):
        out = iterate_monotone_recursion(lambda x: 0.5, 1.0, 4.0, 40)
        assert np.allclose(out.x[:4], [4.0, 3.0, 2.5, 2.25])
        assert out.x[-1] == pytest.approx(2.0, abs=1e-9)
        assert out.gamma_set == frozenset(range(1, 41))
        assert out.limsup_bound == pytest.approx(2.0, abs=1e-9)  # inf over the tail
        assert out.uniform_bounds[1] == pytest.approx(3.0)

    def test_identity_map_no_offset(self):
        out = iterate_monotone_recursion(lambda x: 1.0, 0.0, 2.5, 10)
        assert np.array_equal(out.x, np.full(11, 2.5))
        assert out.gamma_set == frozenset(range(1, 11))
        assert out.limsup_bound == pytest.approx(2.5)

    def test_growing_sequence_emits_no_bounds(self):
        out = iterate_monotone_recursion(lambda x: 0.9, 5.0, 0.0, 10)
        assert out.gamma_set == frozenset()
        assert out.uniform_bounds is None and out.limsup_bound is None

    def test_non_monotone_rejected(self):
        with pytest.raises(NonMonotone):
            iterate_monotone_recursion(lambda x: 0.5 if x < 1 else 0.2, 0.1, 2.0, 5)

    def test_out_of_range_rejected(self):
        with pytest.raises(NonMonotone):
            iterate_monotone_recursion(lambda x: 1.5, 0.0, 1.0, 5)

    def test_claims_on_random_monotone_instances(self):
        """500 random monotone maps; the three bound claims are asserted inside
        the iterator against the directly computed sequence (exact arithmetic)."""
        rng = np.random.default_rng(99)
        checked = 0
        for _ in range(500):
            hi = float(rng.uniform(0.2, 1.0))
            lo = float(rng.uniform(0.0, hi))
            scale = float(rng.uniform(0.1, 5.0))
            f = lambda x, lo=lo, hi=hi, scale=scale: lo + (hi - lo) * (1 - math.exp(-x / scale))
            q0 = float(rng.uniform(0.0, 2.0))
            x0 = float(rng.uniform(0.0, 20.0))
            out = iterate_monotone_recursion(f, q0, x0, 60)
            if out.gamma_set:
                checked += 1
                assert out.limsup_bound == min(out.x[t] for t in out.gamma_set)
        assert checked >= 400  # most contractive instances decrease somewhere


# ---------------------------------------------------------------------------
# feasibility
# ---------------------------------------------------------------------------

class TestFeasibilitySearch:
    def test_benchmark_witness(self, fig1, benchmark_system):
        report = search_feasible_params(benchmark_system, fig1, 6)
        assert report.epsilon == pytest.approx(0.75)
        assert report.condition_lambda0_gt_s
        assert report.found_params is not None and report.inequality_holds

    def test_lambda0_at_budget_infeasible(self):
        g = sd.named_topology("ring", 8)
        sys = sd.LtiSystem.create(1.0, np.ones((8, 1)), 0.01, 0.01, 1.0)
        report = search_feasible_params(sys, g, 4)   # lambda0 = 4 = s
        assert report.found_params is None
        assert "lambda0" in report.reason

    def test_attack_free_complete_observability(self):
        g = sd.named_topology("complete", 6)
        sys = sd.LtiSystem.create(1.0, np.ones((6, 1)), 0.01, 0.01, 1.0)
        report = search_feasible_params(sys, g, 0)
        assert report.found_params is not None
        beta, eta0, L = report.found_params
        p = bound_params_for(sys, g, beta, L, 0)
        assert check_parameter_inequality(BoundParams(**{**p.__dict__, "eta0": eta0})).holds

    def test_norm_outside_bracket_reported(self):
        g = sd.named_topology("complete", 6)
        sys = sd.LtiSystem.create(3.0, np.ones((6, 1)), 0.01, 0.01, 1.0)
        report = search_feasible_params(sys, g, 1)
        assert report.found_params is None
        assert "bracket" in report.reason

    def test_iff_sampling(self):
        """Random scalar and orthogonal-row instances: a witness exists exactly
        when the residual observability exceeds the budget (zero counterexamples
        over >= 100 instances)."""
        rng = np.random.default_rng(2024)
        instances = 0
        while instances < 110:
            orthogonal = bool(rng.integers(0, 2))
            if orthogonal:
                n = int(rng.integers(2, 4))
                counts = rng.integers(1, 6, size=n)
                N = int(counts.sum())
                if N < 2:
                    continue
                C = np.concatenate([np.tile(np.eye(n)[d], (counts[d], 1)) for d in range(n)])
                s = int(rng.integers(0, min(N, int(counts.min()) + 2)))
            else:
                N = int(rng.integers(4, 20))
                C = rng.choice([-1.0, 1.0], size=(N, 1))
                s = int(rng.integers(0, N))
            lam0 = lambda0(C, s)
            feasible_expected = lam0 > s
            g = sd.named_topology("complete", N)
            if feasible_expected:
                eps = analysis.feasibility_epsilon(lam0, s, N)
                norm_A = 1.0 + float(rng.uniform(0.0, 1.0)) * eps * 0.999
            else:
                norm_A = 1.0
            sys = sd.LtiSystem.create(norm_A * np.eye(C.shape[1]), C, 0.01, 0.01, 1.0)
            report = search_feasible_params(sys, g, s)
            assert (report.found_params is not None) == feasible_expected, \
                f"N={N} s={s} lam0={lam0} orthogonal={orthogonal}"
            instances += 1


# ---------------------------------------------------------------------------
# sparse observability
# ---------------------------------------------------------------------------

class TestSparseObservability:
    def test_scalar_network_one_step(self):
        C = np.ones((30, 1))
        for s in (0, 5, 15, 29):
            assert one_step_sparse_observable(C, s)

    def test_single_cover_not_robust(self):
        C = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert not one_step_sparse_observable(C, 1)

    def test_rank_based_variant(self):
        A = np.array([[1.0, 1.0], [0.0, 1.0]])
        # one sensor observing the first coordinate of an observable pair
        C = np.array([[1.0, 0.0]] * 3)
        assert sparse_observable(A, C, 1)        # (A, [1 0]) is observable
        assert not one_step_sparse_observable(C, 1)  # but the one-step sum is singular

    def test_scalar_rank_fast_path(self):
        C = np.array([[1.0], [1.0], [0.0]])
        assert sparse_observable(np.array([[1.0]]), C, 1)
        assert not sparse_observable(np.array([[1.0]]), C, 2)

    def test_implication_sampled(self):
        """lambda0 > s implies one-step 2s-sparse observability, and for
        orthogonal rows the two are equivalent (joint brute force, >= 100
        instances, zero counterexamples)."""
        rng = np.random.default_rng(7)
        for _ in range(120):
            n = int(rng.integers(1, 4))
            counts = rng.integers(1, 5, size=n)
            N = int(counts.sum())
            C = np.concatenate([np.tile(np.eye(n)[d], (counts[d], 1)) for d in range(n)])
            s = int(rng.integers(0, N))
            assert check_observability_implication(C, s)
            if 2 * s < N:
                lam0 = lambda0(C, s)
                one_step_2s = brute_lambda0(C, 2 * s) > 1e-10
                assert one_step_sparse_observable(C, 2 * s) == one_step_2s
                assert (lam0 > s) == one_step_2s  # orthogonal rows: equivalence


# ---------------------------------------------------------------------------
# resilience curve and grid search
# ---------------------------------------------------------------------------

class TestResilienceCurve:
    def test_monotone_and_first_step(self, fig1, benchmark_system, feasible_ones):
        beta, _, L = feasible_ones
        curve = analysis.resilience_curve(benchmark_system, fig1, beta, L, range(0, 7))
        values = [curve[s] for s in range(0, 7)]
        assert values[0] <= values[1]
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))

    def test_stable_plant_uses_max_based_offset(self):
        g = sd.named_topology("complete", 6)
        sys = sd.LtiSystem.create(0.8, np.ones((6, 1)), 0.01, 0.01, 1.0)
        curve = analysis.resilience_curve(sys, g, 5.0, 1, [0])
        p = bound_params_for(sys, g, 5.0, 1, 0)
        qbar = 0.01 + max(5.0, 0.01 + 0.01 + 0.8 * p.p0)
        assert curve[0] == pytest.approx(qbar / (1 - p.F(1.0)) + p.p0, rel=1e-12)

    def test_benchmark_sweep_emits_nondecreasing(self, fig1, benchmark_system,
                                                 feasible_ones):
        beta, _, L = feasible_ones
        curve = analysis.resilience_curve(benchmark_system, fig1, beta, L, range(0, 15))
        assert len(curve) == 15


class TestBetaGridSearch:
    def test_singleton_feasible_grid(self, fig1, benchmark_system, feasible_ones):
        beta, eta0, L = feasible_ones
        p = bound_params_for(benchmark_system, fig1, beta, L, 6)
        out = beta_grid_search(benchmark_system, p, "thm1", [beta])
        assert out.best_beta == beta
        assert out.objective_value is not None

    def test_all_infeasible_grid_returns_reasons(self, fig1, benchmark_system):
        p = bound_params_for(benchmark_system, fig1, 5.0, 4, 6)
        out = beta_grid_search(benchmark_system, p, "thm1", [0.1, 5.0, 2000.0])
        assert out.best_beta is None
        assert all(not ok and reason for _, ok, reason, _ in out.per_candidate)

    def test_thm3_objective_prefers_smaller_bound(self, fig1, benchmark_system,
                                                  feasible_ones):
        beta, eta0, L = feasible_ones
        p = bound_params_for(benchmark_system, fig1, beta, L, 6)
        out = beta_grid_search(benchmark_system, p, "thm3", [beta, 1.30 * beta])
        assert out.best_beta is not None
        values = {b: v for b, ok, _, v in out.per_candidate if ok}
        assert out.objective_value == min(values.values())
