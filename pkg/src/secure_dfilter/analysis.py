"""Offline analysis: residual observability, the scalar bound recursion, feasibility
search, error-bound evaluators, and sparse-observability checks.

Central quantities, for A with spectral norm ||A||, unit observation rows C_i,
attack budget s, noise bounds (b_w, b_v), initial-error bound eta0, consensus
contraction gamma with L rounds:

    lambda0  = min over kept sets J, |J| = N - s, of lambda_min(sum_{i in J} C_i^T C_i)
    p(t)     = sqrt(N) beta gamma^L (1 - (||A|| gamma^L)^t) / (1 - ||A|| gamma^L)
    p0       = lim_t p(t)
    k*(rho)  = min{1, beta / (||A||(p0 + rho) + b_w + b_v)}
    F(rho)   = ||A|| (1 - k*(rho) lambda0 / N)
    q0       = (N-s)/N (b_w + b_v + ||A|| p0) + b_w + s beta / N
    rho_{t+1} = F(rho_t) rho_t + q0,  rho_0 = eta0

The non-increase set Gamma = {t >= 1 : rho_t <= rho_{t-1}} anchors every error
bound; the parameter inequality eta0 (1 - F(eta0)) >= q0 guarantees 1 in Gamma.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (CombinatorialBlowup, DivergentGeometry, InvariantViolation,
                     NonMonotone, NotInGamma, SearchExhausted)
from .graph import TOL_EIG, SensorGraph, min_consensus_steps, spectral_params
from .system import LtiSystem

ENUM_CAP = 2_000_000
RHO_SETTLE_TOL = 1e-12


# ---------------------------------------------------------------------------
# residual observability lambda0 and the unsaturated-regime contraction varpi
# ---------------------------------------------------------------------------

def _outer_products(C: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ik->ijk", C, C)


def _check_cap(N: int, s: int, cap: int) -> None:
    count = math.comb(N, s)
    if count > cap:
        raise CombinatorialBlowup(count, cap)


def lambda0(C, s: int, cap: int = ENUM_CAP) -> float:
    """Worst-case residual observability after removing any s sensors.

    min over kept subsets of size N - s of lambda_min(sum C_i^T C_i); lies in
    [0, N - s] for unit rows. Scalar systems (n = 1) use the closed form: the
    worst kept subset collects the N - s smallest c_i^2.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    N, n = C.shape
    if not 0 <= s < N:
        raise ValueError(f"need 0 <= s < N, got s={s}, N={N}")
    if n == 1:
        squares = np.sort(C[:, 0] ** 2)
        return float(squares[: N - s].sum())
    _check_cap(N, s, cap)
    outers = _outer_products(C)
    total = outers.sum(axis=0)
    best = np.inf
    for removed in itertools.combinations(range(N), s):
        kept_sum = total - outers[list(removed)].sum(axis=0) if s else total
        best = min(best, float(np.linalg.eigvalsh(kept_sum)[0]))
    return best


def varpi(A, C, s: int, cap: int = ENUM_CAP) -> float:
    """Largest spectral norm of (I - (1/N) sum_{i in M} C_i^T C_i) A over kept sets M."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    N, n = C.shape
    if not 0 <= s < N:
        raise ValueError(f"need 0 <= s < N, got s={s}, N={N}")
    if n == 1:
        # |1 - z/N| * |A| is maximized at the smallest kept sum z = lambda0
        return abs(float(A[0, 0])) * (1.0 - lambda0(C, s) / N)
    _check_cap(N, s, cap)
    outers = _outer_products(C)
    total = outers.sum(axis=0)
    eye = np.eye(n)
    worst = 0.0
    for removed in itertools.combinations(range(N), s):
        kept_sum = total - outers[list(removed)].sum(axis=0) if s else total
        worst = max(worst, float(np.linalg.norm((eye - kept_sum / N) @ A, 2)))
    return worst


# ---------------------------------------------------------------------------
# bound recursion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundParams:
    """Scalar inputs of the bound recursion."""

    norm_A: float
    lambda0: float
    beta: float
    L: int
    eta0: float
    b_w: float
    b_v: float
    s: int
    n_sensors: int
    gamma: float

    @property
    def contraction(self) -> float:
        """||A|| gamma^L; must be < 1 for the disagreement bound to settle."""
        return self.norm_A * self.gamma**self.L

    @property
    def p0(self) -> float:
        if self.contraction >= 1.0:
            raise DivergentGeometry(
                f"||A|| gamma^L = {self.contraction:.6g} >= 1 (L = {self.L})")
        return math.sqrt(self.n_sensors) * self.beta * self.gamma**self.L / (1.0 - self.contraction)

    @property
    def q0(self) -> float:
        N, s = self.n_sensors, self.s
        return (N - s) / N * (self.b_w + self.b_v + self.norm_A * self.p0) \
            + self.b_w + s * self.beta / N

    def p_of_t(self, t: int) -> float:
        """Disagreement bound p(t): 0 at t = 0, nondecreasing, limit p0."""
        if t < 0:
            raise ValueError("t must be nonnegative")
        c = self.contraction
        if c >= 1.0:
            raise DivergentGeometry(f"||A|| gamma^L = {c:.6g} >= 1 (L = {self.L})")
        return math.sqrt(self.n_sensors) * self.beta * self.gamma**self.L \
            * (1.0 - c**t) / (1.0 - c)

    def k_star(self, rho: float) -> float:
        denom = self.norm_A * (self.p0 + rho) + self.b_w + self.b_v
        if denom <= 0.0:
            return 1.0
        return min(1.0, self.beta / denom)

    def F(self, rho: float) -> float:
        return self.norm_A * (1.0 - self.k_star(rho) * self.lambda0 / self.n_sensors)

    def k_star_at(self, rho: float, t: int) -> float:
        """Variant of k* with the time-dependent p(t) in place of p0."""
        denom = self.norm_A * (self.p_of_t(t) + rho) + self.b_w + self.b_v
        if denom <= 0.0:
            return 1.0
        return min(1.0, self.beta / denom)

    def F_at(self, rho: float, t: int) -> float:
        return self.norm_A * (1.0 - self.k_star_at(rho, t) * self.lambda0 / self.n_sensors)


def bound_params_for(sys: LtiSystem, g: SensorGraph, beta: float, L: int, s: int,
                     cap: int = ENUM_CAP) -> BoundParams:
    """Assemble BoundParams from a system, a graph, and filter parameters."""
    sp = spectral_params(g)
    return BoundParams(
        norm_A=sys.norm_A, lambda0=lambda0(sys.C, s, cap), beta=float(beta),
        L=int(L), eta0=sys.eta0, b_w=sys.b_w, b_v=sys.b_v, s=int(s),
        n_sensors=sys.n_sensors, gamma=sp.gamma,
    )


def p_of_t(params: BoundParams, t: int) -> float:
    return params.p_of_t(t)


@dataclass(frozen=True)
class BoundSequence:
    """The realized recursion rho_0..rho_T with its non-increase set Gamma."""

    params: BoundParams
    rho: np.ndarray
    gamma_set: frozenset[int]
    settled: bool  # |rho_T - rho_{T-1}| <= RHO_SETTLE_TOL

    @property
    def horizon(self) -> int:
        return len(self.rho) - 1

    @property
    def q0(self) -> float:
        return self.params.q0

    @property
    def p0(self) -> float:
        return self.params.p0

    def R(self, x: float, t: int, t0: int) -> float:
        """Geometric envelope R(x, t) = x^(t-t0) rho_{t0} + q0 (1 - x^(t-t0)) / (1 - x)."""
        steps = t - t0
        if steps < 0:
            raise ValueError("t must be >= t0")
        rho_t0 = float(self.rho[t0])
        if abs(1.0 - x) < 1e-15:
            return rho_t0 + self.q0 * steps
        power = x**steps
        return power * rho_t0 + self.q0 * (1.0 - power) / (1.0 - x)


def rho_sequence(params: BoundParams, T: int) -> BoundSequence:
    """Iterate rho_{t+1} = F(rho_t) rho_t + q0 from rho_0 = eta0 up to horizon T."""
    if T < 1:
        raise ValueError("horizon must be >= 1")
    if params.contraction >= 1.0:
        raise DivergentGeometry(
            f"||A|| gamma^L = {params.contraction:.6g} >= 1 (L = {params.L})")
    q0 = params.q0
    rho = np.empty(T + 1)
    rho[0] = params.eta0
    for t in range(T):
        rho[t + 1] = params.F(rho[t]) * rho[t] + q0
    gamma_set = frozenset(t for t in range(1, T + 1) if rho[t] <= rho[t - 1])
    settled = bool(abs(rho[T] - rho[T - 1]) <= RHO_SETTLE_TOL)
    return BoundSequence(params=params, rho=rho, gamma_set=gamma_set, settled=settled)


@dataclass(frozen=True)
class ParameterInequality:
    slack: float   # eta0 (1 - F(eta0)) - q0
    holds: bool


def check_parameter_inequality(params: BoundParams) -> ParameterInequality:
    """Parameter inequality eta0 (1 - F(eta0)) >= q0; its slack and sign."""
    slack = params.eta0 * (1.0 - params.F(params.eta0)) - params.q0
    return ParameterInequality(slack=slack, holds=bool(slack >= 0.0))


# ---------------------------------------------------------------------------
# error-bound evaluators
# ---------------------------------------------------------------------------

def bound_realtime(seq: BoundSequence, t0: int, t: int) -> float:
    """Per-step bound R(F(rho_{t0}), t) + p(t) for t >= t0, t0 in Gamma."""
    if t0 not in seq.gamma_set:
        raise NotInGamma(f"t0 = {t0} is not in Gamma")
    return seq.R(seq.params.F(float(seq.rho[t0])), t, t0) + seq.params.p_of_t(t)


def bound_uniform(seq: BoundSequence, t0: int) -> float:
    """Uniform bound rho_{t0} + p0 over t >= t0 (p(t) is nondecreasing with limit p0)."""
    if t0 not in seq.gamma_set:
        raise NotInGamma(f"t0 = {t0} is not in Gamma")
    return float(seq.rho[t0]) + seq.p0


def bound_limsup(seq: BoundSequence) -> float:
    """Asymptotic bound inf over Gamma of rho_{t0}, plus p0, over the computed horizon."""
    if not seq.gamma_set:
        raise NotInGamma("Gamma is empty over the computed horizon")
    return min(float(seq.rho[t]) for t in seq.gamma_set) + seq.p0


@dataclass(frozen=True)
class UnsaturatedBounds:
    condition_holds: bool
    varpi: float
    limsup: float | None   # q0 / (1 - varpi) + p0 when the condition holds

    def realtime(self, seq: BoundSequence, t0: int, t: int) -> float:
        if not self.condition_holds:
            raise ValueError("tighter bounds are only defined when the condition holds")
        return seq.R(self.varpi, t, t0) + seq.params.p_of_t(t)


def bound_unsaturated(seq: BoundSequence, t0: int, varpi_value: float) -> UnsaturatedBounds:
    """Tighter bounds valid once attack-free sensors stop saturating.

    Requires rho_{t0} + p0 < (beta - b_w - b_v) / ||A||. When that holds the
    contraction varpi replaces F(rho_{t0}) in the envelope, and the asymptotic
    bound q0 / (1 - varpi) + p0 must not exceed the baseline asymptotic bound.
    """
    if t0 not in seq.gamma_set:
        raise NotInGamma(f"t0 = {t0} is not in Gamma")
    p = seq.params
    holds = float(seq.rho[t0]) + p.p0 < (p.beta - p.b_w - p.b_v) / p.norm_A
    if not holds:
        return UnsaturatedBounds(condition_holds=False, varpi=varpi_value, limsup=None)
    if not varpi_value < 1.0:
        raise InvariantViolation(f"varpi = {varpi_value} >= 1 under the unsaturated condition")
    if varpi_value > p.F(float(seq.rho[t0])) + 1e-12:
        raise InvariantViolation(
            f"varpi = {varpi_value} exceeds F(rho_t0) = {p.F(float(seq.rho[t0]))}")
    limsup = p.q0 / (1.0 - varpi_value) + p.p0
    baseline = bound_limsup(seq)
    if limsup > baseline + 1e-9 * max(1.0, baseline):
        raise InvariantViolation(
            f"unsaturated-regime bound {limsup} exceeds baseline {baseline}")
    return UnsaturatedBounds(condition_holds=True, varpi=varpi_value, limsup=limsup)


# ---------------------------------------------------------------------------
# generic scalar recursion oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonotoneRecursionResult:
    x: np.ndarray
    gamma_set: frozenset[int]
    uniform_bounds: dict | None   # t0 -> x_{t0}
    limsup_bound: float | None    # inf over Gamma


def iterate_monotone_recursion(F, q0: float, x0: float, T: int,
                               f_upper: float = 1.0,
                               mono_samples: int = 256) -> MonotoneRecursionResult:
    """Iterate x_{t+1} = F(x_t) x_t + q0 for a monotone map F with range [0, f_upper].

    Monotonicity and range are verified by sampling (NonMonotone on violation).
    When the non-increase set Gamma is non-empty, the three standard claims are
    asserted against the computed sequence:

      1. x_t <= F(x_{t0})^(t-t0) x_{t0} + q0 (1 - F(x_{t0})^(t-t0)) / (1 - F(x_{t0}))
      2. sup_{t >= t0} x_t <= x_{t0}
      3. limsup x_t <= inf over Gamma of x_{t0}

    This is the independent oracle for the ||A||-scaled recursion (set f_upper
    to ||A||); with an empty Gamma no bounds are emitted.
    """
    if x0 < 0 or q0 < 0:
        raise ValueError("x0 and q0 must be nonnegative")
    x = np.empty(T + 1)
    x[0] = x0
    for t in range(T):
        x[t + 1] = F(x[t]) * x[t] + q0

    grid = np.linspace(0.0, max(float(x.max()), x0, 1.0), mono_samples)
    values = np.array([F(v) for v in grid])
    if values.min() < -1e-12 or values.max() > f_upper + 1e-12:
        raise NonMonotone(
            f"sampled F range [{values.min():.6g}, {values.max():.6g}] "
            f"outside [0, {f_upper}]")
    if np.any(np.diff(values) < -1e-12):
        raise NonMonotone("sampled F is not monotonically non-decreasing")

    gamma_set = frozenset(t for t in range(1, T + 1) if x[t] <= x[t - 1])
    if not gamma_set:
        return MonotoneRecursionResult(x=x, gamma_set=gamma_set, uniform_bounds=None, limsup_bound=None)

    tol = 1e-9 * max(1.0, float(x.max()))
    for t0 in gamma_set:
        if x[t0:].max() > x[t0] + tol:
            raise InvariantViolation(
                f"sup_(t>={t0}) x_t = {x[t0:].max()} exceeds x_{t0} = {x[t0]}")
        f_t0 = F(float(x[t0]))
        for t in range(t0, T + 1):
            if abs(1.0 - f_t0) < 1e-15:
                envelope = float(x[t0]) + q0 * (t - t0)
            else:
                power = f_t0 ** (t - t0)
                envelope = power * float(x[t0]) + q0 * (1.0 - power) / (1.0 - f_t0)
            if x[t] > envelope + tol:
                raise InvariantViolation(
                    f"x_{t} = {x[t]} exceeds the geometric envelope {envelope}", t=t)
    uniform = {t0: float(x[t0]) for t0 in sorted(gamma_set)}
    return MonotoneRecursionResult(
        x=x, gamma_set=gamma_set, uniform_bounds=uniform,
        limsup_bound=min(uniform.values()),
    )


# ---------------------------------------------------------------------------
# feasibility: necessary and sufficient condition lambda0 > s, constructive search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeasibilityReport:
    lambda0: float
    condition_lambda0_gt_s: bool
    epsilon: float | None
    found_params: tuple[float, float, int] | None   # (beta, eta0, L)
    inequality_holds: bool
    reason: str | None = None
    doublings_used: int | None = None


def feasibility_epsilon(lam0: float, s: int, N: int) -> float:
    """Width of the transition-norm bracket [1, 1 + epsilon) for the construction."""
    if s > 0:
        return (lam0 - s) / (4.0 * (N - lam0))
    return lam0 / (2.0 * (2.0 * N - lam0))


def search_feasible_params(sys: LtiSystem, g: SensorGraph, s: int,
                           cap: int = ENUM_CAP, max_doublings: int = 60,
                           l_max: int = 400) -> FeasibilityReport:
    """Constructive search for (beta, eta0, L) satisfying the parameter inequality.

    Feasible within ||A|| in [1, 1 + epsilon) if and only if lambda0 > s. The
    search doubles eta0 from max(sys.eta0, 1); for each eta0 it raises L until
    the admissible beta window

        (1 + eps)(p0 + eta0) + b_w + b_v  <=  beta  <=  (1 + eps + (lambda0 - s)/(4s)) eta0

    (s > 0 case; for s = 0 only the lower edge, halved, applies) is non-empty,
    then re-validates candidate betas with the exact parameter inequality.
    """
    N = sys.n_sensors
    lam0 = lambda0(sys.C, s, cap)
    if not lam0 > s:
        return FeasibilityReport(
            lambda0=lam0, condition_lambda0_gt_s=False, epsilon=None,
            found_params=None, inequality_holds=False,
            reason=f"lambda0 = {lam0:.6g} <= s = {s}: no parameters can satisfy "
                   "the inequality for any ||A|| >= 1",
        )
    eps = feasibility_epsilon(lam0, s, N)
    norm_A = sys.norm_A
    if not (1.0 <= norm_A < 1.0 + eps):
        return FeasibilityReport(
            lambda0=lam0, condition_lambda0_gt_s=True, epsilon=eps,
            found_params=None, inequality_holds=False,
            reason=f"||A|| = {norm_A:.6g} outside the feasibility bracket "
                   f"[1, {1.0 + eps:.6g})",
        )
    sp = spectral_params(g)
    gamma = sp.gamma
    noise = sys.b_w + sys.b_v
    l_min = min_consensus_steps(g, norm_A)
    base_eta = max(sys.eta0, 1.0)

    def params_for(beta: float, eta0: float, L: int) -> BoundParams:
        return BoundParams(norm_A=norm_A, lambda0=lam0, beta=beta, L=L, eta0=eta0,
                           b_w=sys.b_w, b_v=sys.b_v, s=s, n_sensors=N, gamma=gamma)

    for doubling in range(max_doublings + 1):
        eta0 = base_eta * 2.0**doubling
        for L in range(l_min, l_max + 1):
            contraction = norm_A * gamma**L
            if contraction >= 1.0:
                continue
            # p0 = c * beta with c depending only on L
            c = math.sqrt(N) * gamma**L / (1.0 - contraction)
            if s > 0:
                denom = 1.0 - (1.0 + eps) * c
                if denom <= 0.0:
                    continue
                beta_lo = ((1.0 + eps) * eta0 + noise) / denom
                beta_hi = (1.0 + eps + (lam0 - s) / (4.0 * s)) * eta0
                if beta_lo > beta_hi:
                    continue
                candidates = (beta_lo, 0.5 * (beta_lo + beta_hi))
            else:
                denom = 2.0 - (1.0 + eps) * c
                if denom <= 0.0:
                    continue
                beta_lo = ((1.0 + eps) * eta0 + noise) / denom
                candidates = (beta_lo, 1.5 * beta_lo)
            for beta in candidates:
                if check_parameter_inequality(params_for(beta, eta0, L)).holds:
                    return FeasibilityReport(
                        lambda0=lam0, condition_lambda0_gt_s=True, epsilon=eps,
                        found_params=(beta, eta0, L), inequality_holds=True,
                        doublings_used=doubling,
                    )
    raise SearchExhausted(
        f"no witness found after {max_doublings} doublings of eta0 "
        f"(lambda0 = {lam0:.6g} > s = {s}, so one exists; raise l_max or the budget)")


# ---------------------------------------------------------------------------
# resilience curve and confidence-parameter grid search
# ---------------------------------------------------------------------------

def resilience_curve(sys: LtiSystem, g: SensorGraph, beta: float, L: int,
                     s_range, cap: int = ENUM_CAP) -> dict[int, float]:
    """Asymptotic bound f(s) = qbar0 / (1 - F(eta0)) + p0 as the budget s grows.

    qbar0 = b_w + max{beta, b_w + b_v + ||A|| p0} for a stable plant (||A|| < 1),
    otherwise q0. lambda0 is recomputed per s; the output is verified to be
    monotonically non-decreasing (infinite once F(eta0) >= 1).
    """
    out: dict[int, float] = {}
    for s in sorted(int(v) for v in s_range):
        params = bound_params_for(sys, g, beta, L, s, cap)
        if sys.norm_A < 1.0:
            qbar0 = sys.b_w + max(beta, sys.b_w + sys.b_v + sys.norm_A * params.p0)
        else:
            qbar0 = params.q0
        f_eta0 = params.F(params.eta0)
        out[s] = qbar0 / (1.0 - f_eta0) + params.p0 if f_eta0 < 1.0 else math.inf
    values = list(out.values())
    for lo, hi in zip(values, values[1:]):
        if hi < lo - 1e-9 * max(1.0, abs(lo)):
            raise InvariantViolation(f"resilience curve decreased: {lo} -> {hi}")
    return out


@dataclass(frozen=True)
class GridSearchResult:
    best_beta: float | None
    objective_value: float | None
    per_candidate: tuple[tuple[float, bool, str | None, float | None], ...]


def beta_grid_search(sys: LtiSystem, params: BoundParams, objective: str,
                     grid, cap: int = ENUM_CAP) -> GridSearchResult:
    """Pick the grid beta minimizing an asymptotic bound, subject to feasibility.

    objective "thm1": q0 / (1 - F(eta0)) + p0, requiring the parameter inequality;
    objective "thm3": q0 / (1 - varpi) + p0, additionally requiring the
    unsaturated-regime condition at t0 = 1. An all-infeasible grid yields an
    empty result with per-candidate reasons.
    """
    if objective not in ("thm1", "thm3"):
        raise ValueError(f"unknown objective {objective!r}")
    vp = varpi(sys.A, sys.C, params.s, cap) if objective == "thm3" else None
    rows = []
    best = (None, None)
    for beta in grid:
        beta = float(beta)
        if beta <= 0:
            rows.append((beta, False, "beta must be positive", None))
            continue
        candidate = replace(params, beta=beta)
        if candidate.contraction >= 1.0:
            rows.append((beta, False, "||A|| gamma^L >= 1", None))
            continue
        inequality = check_parameter_inequality(candidate)
        if not inequality.holds:
            rows.append((beta, False, f"parameter inequality fails (slack {inequality.slack:.4g})", None))
            continue
        if objective == "thm1":
            f_eta0 = candidate.F(candidate.eta0)
            value = candidate.q0 / (1.0 - f_eta0) + candidate.p0
        else:
            seq = rho_sequence(candidate, 2)
            if 1 not in seq.gamma_set:
                rows.append((beta, False, "t0 = 1 not in Gamma", None))
                continue
            unsat = bound_unsaturated(seq, 1, vp)
            if not unsat.condition_holds:
                rows.append((beta, False, "unsaturated-regime condition fails", None))
                continue
            value = unsat.limsup
        rows.append((beta, True, None, value))
        if best[1] is None or value < best[1]:
            best = (beta, value)
    return GridSearchResult(best_beta=best[0], objective_value=best[1],
                            per_candidate=tuple(rows))


# ---------------------------------------------------------------------------
# sparse observability
# ---------------------------------------------------------------------------

def one_step_sparse_observable(C, s: int, cap: int = ENUM_CAP) -> bool:
    """Every removal of s sensors leaves sum_{kept} C_i^T C_i positive definite."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if s >= C.shape[0]:
        return False  # removing everything leaves nothing positive definite
    return lambda0(C, s, cap) > TOL_EIG


def sparse_observable(A, C, s: int, cap: int = ENUM_CAP) -> bool:
    """Every removal of s sensors leaves the remaining observability matrix full rank."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    N, n = C.shape
    if s >= N:
        return False
    if n == 1:
        nonzero = int(np.sum(np.abs(C[:, 0]) > TOL_EIG))
        return nonzero > s
    _check_cap(N, s, cap)
    # rows of the observability matrix grouped per sensor: C_i A^k, k = 0..n-1
    blocks = np.stack([C @ np.linalg.matrix_power(A, k) for k in range(n)], axis=1)
    for removed in itertools.combinations(range(N), s):
        kept = np.delete(blocks, removed, axis=0).reshape(-1, n)
        if np.linalg.matrix_rank(kept) < n:
            return False
    return True


def check_observability_implication(C, s: int, cap: int = ENUM_CAP) -> bool:
    """lambda0 > s implies one-step 2s-sparse observability; vacuous when lambda0 <= s."""
    if lambda0(C, s, cap) > s:
        return one_step_sparse_observable(C, 2 * s, cap)
    return True
