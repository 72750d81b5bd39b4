"""Online attack detection, isolation, and the post-detection analysis machinery.

Requires a time-invariant attacked set. Two detectors:

  Detector 1 flags sensor i at time t when |y_i(t) - C_i A xhat_i(t-1)| exceeds

      phi(t) = ||A|| [ R(F(rho_t0), t) + p(t) ] + b_w + b_v,

  a bound on every attack-free innovation anchored at some t0 in Gamma.

  Detector 2 sharpens the threshold with the per-sensor recursion

      rhobar_{t+1,i} = Fbar(rhobar_{t,i}, t) rhobar_{t,i} + q0 - d_i(t) beta / N,
      rhobar_{0,i} = eta0,

  where Fbar uses the time-dependent p(t) and d_i(t) counts the attackers
  sensor i knows about; the threshold is
  phibar_i(t) = ||A|| [ rhobar_{t,i} + p(t) ] + b_w + b_v, strictly decreasing
  in d_i.

The filter-with-detection step isolates self-detected sensors (pure
prediction), fully trusts observations once all s attackers are known, and
gossips detected sets through the same consensus rounds as the estimates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import BoundParams, BoundSequence, bound_limsup
from .errors import (BudgetExceeded, CertificateFalse, GammaBarEmpty,
                     NotInGamma)
from .filter import FilterBank, FilterParams, consensus_operator, saturation_gains
from .graph import SensorGraph, adjacency
from .system import LtiSystem

TOL_SCHUR = 1e-9


class DetectorBank:
    """Per-sensor detected sets, their counts, and the threshold recursion state."""

    def __init__(self, n_sensors: int, params: BoundParams, t0_anchor: int = 1):
        self.n_sensors = n_sensors
        # known[i, j] means sensor i+1 knows sensor j+1 is attacked
        self.known = np.zeros((n_sensors, n_sensors), dtype=bool)
        self.bar_rho = np.full(n_sensors, params.eta0)
        self.time = 0
        self.t0_anchor = t0_anchor
        self.last_thresholds = np.full(n_sensors, np.inf)

    def detected_set(self, i: int) -> frozenset[int]:
        """1-based detected set known to sensor i (1-based)."""
        return frozenset(int(j) + 1 for j in np.flatnonzero(self.known[i - 1]))

    def counts(self) -> np.ndarray:
        return self.known.sum(axis=1)

    def union(self) -> frozenset[int]:
        return frozenset(int(j) + 1 for j in np.flatnonzero(self.known.any(axis=0)))

    def advance_bar_rho(self, params: BoundParams) -> None:
        """Advance rhobar to time + 1 using the current counts d_i(time)."""
        t = self.time
        k = np.minimum(
            1.0,
            params.beta / (params.norm_A * (params.p_of_t(t) + self.bar_rho)
                           + params.b_w + params.b_v),
        )
        fbar = params.norm_A * (1.0 - k * params.lambda0 / params.n_sensors)
        q_bar = params.q0 - self.counts() * params.beta / params.n_sensors
        self.bar_rho = fbar * self.bar_rho + q_bar
        self.time = t + 1


def detector1_threshold(seq: BoundSequence, t0: int, t: int) -> float:
    """phi(t) = ||A|| [R(F(rho_t0), t) + p(t)] + b_w + b_v for t > t0, t0 in Gamma."""
    if t0 not in seq.gamma_set:
        raise NotInGamma(f"t0 = {t0} is not in Gamma")
    if t <= t0:
        raise ValueError(f"the innovation bound needs t > t0, got t = {t}, t0 = {t0}")
    p = seq.params
    envelope = seq.R(p.F(float(seq.rho[t0])), t, t0) + p.p_of_t(t)
    return p.norm_A * envelope + p.b_w + p.b_v


def detector2_thresholds(bank: DetectorBank, params: BoundParams) -> np.ndarray:
    """Vector of phibar_i(t) at the bank's current time."""
    t = bank.time
    return params.norm_A * (bank.bar_rho + params.p_of_t(t)) + params.b_w + params.b_v


def detector2_threshold(bank: DetectorBank, i: int, t: int, params: BoundParams) -> float:
    """phibar_i(t) for sensor i (1-based); the bank must be advanced to time t."""
    if bank.time != t:
        raise ValueError(f"bank is at time {bank.time}, asked for t = {t}")
    return float(detector2_thresholds(bank, params)[i - 1])


def _reach_within(g: SensorGraph, rounds: int) -> np.ndarray:
    """Boolean reachability within `rounds` hops, including self."""
    n = g.n_sensors
    step = adjacency(g).astype(np.uint8) | np.eye(n, dtype=np.uint8)
    reach = np.eye(n, dtype=np.uint8)
    for _ in range(rounds):
        reach = np.minimum(reach @ step, 1)
    return reach.astype(bool)


def detection_filter_step(fbank: FilterBank, dbank: DetectorBank, sys: LtiSystem,
                          g: SensorGraph, fparams: FilterParams,
                          bparams: BoundParams,
                          y: np.ndarray) -> tuple[FilterBank, DetectorBank]:
    """One step of the filter with detection; the branch order matters.

    Per sensor: (i) self-detected -> pure prediction (isolation); (ii) all s
    attackers known -> full-trust gain k = 1; (iii) innovation above
    phibar_i(t) -> pure prediction and self-flag; (iv) otherwise the
    saturation-gain update. Then L consensus rounds update estimates and
    detected sets (neighborhood union) together.
    """
    y = np.asarray(y, dtype=float)
    n_sensors = sys.n_sensors
    dbank.advance_bar_rho(bparams)
    thresholds = detector2_thresholds(dbank, bparams)
    dbank.last_thresholds = thresholds

    predictions = fbank.estimates @ sys.A.T
    innovations = y - np.einsum("ij,ij->i", sys.C, predictions)

    self_detected = dbank.known[np.arange(n_sensors), np.arange(n_sensors)]
    full_trust = (~self_detected) & (dbank.counts() == bparams.s)
    flagged = (~self_detected) & (~full_trust) & (np.abs(innovations) > thresholds)

    gains = saturation_gains(innovations, fparams.beta)
    gains = np.where(full_trust, 1.0, gains)
    gains = np.where(self_detected | flagged, 0.0, gains)

    if flagged.any():
        idx = np.flatnonzero(flagged)
        dbank.known[idx, idx] = True

    estimates = predictions + (gains * innovations)[:, None] * sys.C
    known = dbank.known
    if fparams.L > 0:
        estimates = consensus_operator(g, fparams.alpha, fparams.L) @ estimates
        # L rounds of neighborhood union collapse to one hop-limited reachability pass
        reach = _reach_cached(g, fparams.L)
        known = (reach.astype(np.uint8) @ known.astype(np.uint8)) > 0

    union_size = int(known.any(axis=0).sum())
    if union_size > bparams.s:
        raise BudgetExceeded(
            f"{union_size} sensors flagged, budget s = {bparams.s}; the scenario "
            "violates the fixed-attacked-set assumption")

    fbank.estimates = estimates
    fbank.gains = gains
    fbank.innovations = innovations
    fbank.time += 1
    dbank.known = known
    return fbank, dbank


_reach_memo: dict[tuple[SensorGraph, int], np.ndarray] = {}


def _reach_cached(g: SensorGraph, rounds: int) -> np.ndarray:
    key = (g, rounds)
    if key not in _reach_memo:
        _reach_memo[key] = _reach_within(g, rounds)
    return _reach_memo[key]


# ---------------------------------------------------------------------------
# post-detection asymptotic bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WBound:
    value: float
    f_star: float | None
    gamma_bar: frozenset[int]


def w_bound(seq: BoundSequence, d_at_T: int, T: int) -> WBound:
    """Asymptotic bound improved by d detected attackers at time T.

    Continue the recursion from rhobar_T = rho_T with the reduced offset
    qbar0 = q0 - d beta / N; with Gammabar the non-increase set of that tail
    and F* = inf over Gammabar of F(rhobar), the bound is

        W(T) = inf over Gamma of rho_{t0} + p0 - d beta / (N (1 - F*)).

    With d = 0 this is exactly the baseline asymptotic bound.
    """
    params = seq.params
    if not 0 <= d_at_T <= params.s:
        raise ValueError(f"need 0 <= d <= s, got d = {d_at_T}, s = {params.s}")
    if not 0 <= T < seq.horizon:
        raise ValueError(f"T = {T} outside the computed horizon {seq.horizon}")
    base = bound_limsup(seq)
    if d_at_T == 0:
        return WBound(value=base, f_star=None, gamma_bar=frozenset())
    q_bar = params.q0 - d_at_T * params.beta / params.n_sensors
    horizon = seq.horizon
    bar = np.empty(horizon - T + 1)
    bar[0] = seq.rho[T]
    for k in range(horizon - T):
        bar[k + 1] = params.F(bar[k]) * bar[k] + q_bar
    gamma_bar = frozenset(T + k for k in range(1, horizon - T + 1) if bar[k] <= bar[k - 1])
    if not gamma_bar:
        raise GammaBarEmpty(
            f"the post-detection recursion never decreased over t in ({T}, {horizon}]")
    f_star = min(params.F(float(bar[t - T])) for t in gamma_bar)
    value = base - d_at_T * params.beta / (params.n_sensors * (1.0 - f_star))
    return WBound(value=value, f_star=f_star, gamma_bar=gamma_bar)


# ---------------------------------------------------------------------------
# noise-free convergence certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    G: np.ndarray
    schur_stable: bool
    spectral_radius: float


def convergence_certificate(sys: LtiSystem, g: SensorGraph, fparams: FilterParams,
                            attacked_set, gains_for_Ac=None) -> Certificate:
    """Schur certificate for noise-free convergence once all attackers are isolated.

    The disagreement/mean-error coupling is governed by

        G = [[2 ||A|| gamma^L,  ||A|| gamma^L sqrt(N - s)],
             [     ||mrow||  ,        ||Mtilde||         ]]

    with Mtilde = (I - (1/N) sum_{i attack-free} C_i^T C_i) A and mrow the
    n x (N n) block row (1/N) [k_i C_i^T C_i A]_i over attack-free sensors
    (k_i = 1 in the post-detection regime unless overridden).
    """
    from .graph import spectral_params  # local to avoid cycles at import time

    N, n = sys.n_sensors, sys.n
    attacked = frozenset(int(i) for i in attacked_set)
    s = len(attacked)
    gamma = spectral_params(g).gamma
    gains = np.ones(N) if gains_for_Ac is None else np.asarray(gains_for_Ac, dtype=float)

    free_mask = np.array([i + 1 not in attacked for i in range(N)])
    outer = np.einsum("ij,ik->ijk", sys.C, sys.C)
    m_tilde = (np.eye(n) - outer[free_mask].sum(axis=0) / N) @ sys.A
    blocks = [
        (gains[i] / N) * outer[i] @ sys.A if free_mask[i] else np.zeros((n, n))
        for i in range(N)
    ]
    m_row = np.hstack(blocks)

    contraction = sys.norm_A * gamma**fparams.L
    G = np.array([
        [2.0 * contraction, contraction * np.sqrt(N - s)],
        [np.linalg.norm(m_row, 2), np.linalg.norm(m_tilde, 2)],
    ])
    radius = float(np.max(np.abs(np.linalg.eigvals(G))))
    return Certificate(G=G, schur_stable=bool(radius < 1.0 - TOL_SCHUR),
                       spectral_radius=radius)


def noise_free_convergence_test(cfg, conv_tol: float = 1e-6) -> dict:
    """Run the filter-with-detection on a noise-free config and certify convergence.

    Raises CertificateFalse (test skipped) when the Schur certificate fails.
    Returns final errors, the fitted geometric decay rate, and detection times.
    """
    from .harness import run_experiment  # runtime import; harness depends on this module

    sys = cfg.system
    if sys.b_w != 0.0 or sys.b_v != 0.0:
        raise ValueError("the convergence test requires a noise-free system")
    cert = convergence_certificate(sys, cfg.graph, cfg.filter_params,
                                   cfg.scenario.attacked_set(1))
    if not cert.schur_stable:
        raise CertificateFalse(
            f"spectral radius {cert.spectral_radius:.6g} >= 1; convergence not certified")

    table = run_experiment(cfg)
    T = cfg.horizon
    final_error = float(np.max(table.eta_i[T]))
    eta = table.eta
    # geometric rate fitted on the decaying stretch after the error peak, while
    # the values are still comfortably representable
    peak = int(np.argmax(eta))
    window = [t for t in range(peak + 1, T + 1) if eta[t] > 1e-200][:80]
    rate = None
    if len(window) >= 5:
        ts = np.array(window, dtype=float)
        slope = np.polyfit(ts, np.log(eta[window]), 1)[0]
        rate = float(np.exp(slope))
    if final_error >= conv_tol:
        raise AssertionError(
            f"max_i ||e_i(T)|| = {final_error:.3e} >= {conv_tol} at T = {T}")
    return {
        "certificate": cert,
        "final_error": final_error,
        "fitted_rate": rate,
        "detection": table.detection,
    }
