"""Saturation-gain observation update followed by L rounds of estimate consensus.

Per sensor i at time t, with innovation z_i = y_i(t) - C_i A xhat_i(t-1):

    k_i(t)      = min{1, beta / |z_i|}          (1 when z_i = 0)
    xtilde_i(t) = A xhat_i(t-1) + k_i(t) C_i^T z_i

so the applied correction never exceeds beta in norm. The consensus stage then
runs L synchronous rounds of

    xhat_{i,l} = xhat_{i,l-1} - alpha * sum_{j in N_i} (xhat_{i,l-1} - xhat_{j,l-1})

with a frozen snapshot per round, and outputs xhat_i(t) = xhat_{i,L}(t).
"""
from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .graph import SensorGraph, laplacian, spectral_params
from .system import LtiSystem


@dataclass(frozen=True)
class FilterParams:
    """Confidence cap beta, consensus rounds L, and consensus step size alpha."""

    beta: float
    L: int
    alpha: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.L < 0:
            raise ValueError("L must be nonnegative (0 only for ablation runs)")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @classmethod
    def from_graph(cls, g: SensorGraph, beta: float, L: int) -> "FilterParams":
        return cls(beta=float(beta), L=int(L), alpha=spectral_params(g).alpha)


class FilterBank:
    """Per-sensor estimates plus the gains and innovations of the last step."""

    def __init__(self, xhat0, n_sensors: int):
        xhat0 = np.atleast_1d(np.asarray(xhat0, dtype=float))
        self.estimates = np.tile(xhat0, (n_sensors, 1))  # shared initial estimate
        self.gains = np.ones(n_sensors)
        self.innovations = np.zeros(n_sensors)
        self.time = 0

    @property
    def n_sensors(self) -> int:
        return self.estimates.shape[0]

    def copy(self) -> "FilterBank":
        dup = FilterBank(self.estimates[0], self.n_sensors)
        dup.estimates = self.estimates.copy()
        dup.gains = self.gains.copy()
        dup.innovations = self.innovations.copy()
        dup.time = self.time
        return dup


def saturation_gain(innovation: float, beta: float) -> float:
    """min{1, beta/|innovation|}; equals 1 at zero innovation."""
    magnitude = abs(innovation)
    if magnitude <= beta:
        return 1.0
    return beta / magnitude


def saturation_gains(innovations: np.ndarray, beta: float) -> np.ndarray:
    """Vectorized saturation gains; the correction k*z is clipped at magnitude beta."""
    magnitude = np.abs(innovations)
    return np.where(magnitude <= beta, 1.0, beta / np.maximum(magnitude, beta))


def observation_update(bank: FilterBank, sys: LtiSystem, y: np.ndarray,
                       beta: float) -> np.ndarray:
    """Intermediate estimates xtilde_i(t); records gains and innovations on the bank.

    Observation-free sensors (zero C row) reduce to pure prediction because the
    C_i^T factor vanishes.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (sys.n_sensors,):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({sys.n_sensors},)")
    if bank.estimates.shape != (sys.n_sensors, sys.n):
        raise DimensionMismatch(
            f"bank holds {bank.estimates.shape}, system needs ({sys.n_sensors}, {sys.n})")
    predictions = bank.estimates @ sys.A.T
    innovations = y - np.einsum("ij,ij->i", sys.C, predictions)
    gains = saturation_gains(innovations, beta)
    bank.innovations = innovations
    bank.gains = gains
    return predictions + (gains * innovations)[:, None] * sys.C


@functools.lru_cache(maxsize=256)
def _laplacian_cached(g: SensorGraph) -> np.ndarray:
    mat = laplacian(g)
    mat.setflags(write=False)
    return mat


def consensus_round(estimates: np.ndarray, g: SensorGraph, alpha: float) -> np.ndarray:
    """One synchronous round x <- x - alpha * L x; preserves the estimate average."""
    return estimates - alpha * (_laplacian_cached(g) @ estimates)


@functools.lru_cache(maxsize=256)
def consensus_operator(g: SensorGraph, alpha: float, rounds: int) -> np.ndarray:
    """(I - alpha L)^rounds: the composition of `rounds` synchronous consensus rounds."""
    mixing = np.eye(g.n_sensors) - alpha * _laplacian_cached(g)
    operator = np.linalg.matrix_power(mixing, rounds)
    operator.setflags(write=False)
    return operator


def filter_step(bank: FilterBank, sys: LtiSystem, g: SensorGraph,
                params: FilterParams, y: np.ndarray) -> FilterBank:
    """One full update: observation step, then params.L consensus rounds."""
    reference_alpha = spectral_params(g).alpha
    if abs(params.alpha - reference_alpha) > 1e-12:
        warnings.warn(
            f"alpha = {params.alpha} overrides the spectral value {reference_alpha}; "
            "the contraction guarantees assume the spectral step size",
            stacklevel=2,
        )
    estimates = observation_update(bank, sys, y, params.beta)
    for _ in range(params.L):
        estimates = consensus_round(estimates, g, params.alpha)
    bank.estimates = estimates
    bank.time += 1
    return bank
