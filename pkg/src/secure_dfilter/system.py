"""Ground-truth LTI plant, bounded-noise generation, and attack injection.

Plant model with scalar-output sensors:

    x(t+1) = A x(t) + w(t)
    y_i(t) = C_i x(t) + v_i(t) + a_i(t),   i = 1..N

with ||w(t)|| <= b_w, |v_i(t)| <= b_v, and a_i(t) nonzero only on the attacked
set, which holds at most s sensors at any time.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import MissingFeedback, UnknownScenario, ZeroRow

TOL_NORM = 1e-12


def as_rng(seed_or_rng) -> np.random.Generator:
    """PCG64 generator from an integer seed, or an existing Generator passed through."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.Generator(np.random.PCG64(seed_or_rng))


def substream_seed(seed: int, run_index: int) -> int:
    """Per-run substream: seed XOR run index, so runs are order-insensitive."""
    return int(seed) ^ int(run_index)


def normalize(C_raw, observation_free=()) -> tuple[np.ndarray, np.ndarray]:
    """Scale each observation row to unit norm; return (rows, original norms).

    Rows of declared observation-free sensors must be zero and are kept zero
    (their norm is reported as 1 so noise bounds pass through unchanged).
    Any other zero row raises ZeroRow.
    """
    C = np.atleast_2d(np.asarray(C_raw, dtype=float)).copy()
    obs_free = frozenset(int(i) for i in observation_free)
    norms = np.ones(C.shape[0])
    for idx in range(C.shape[0]):
        sensor = idx + 1
        norm = float(np.linalg.norm(C[idx]))
        if sensor in obs_free:
            if norm > TOL_NORM:
                raise ValueError(f"sensor {sensor} declared observation-free but C_{sensor} != 0")
            C[idx] = 0.0
            continue
        if norm <= TOL_NORM:
            raise ZeroRow(f"||C_{sensor}|| = 0 and sensor {sensor} is not observation-free")
        C[idx] = C[idx] / norm
        norms[idx] = norm
    return C, norms


@dataclass
class LtiSystem:
    """Plant matrices and the noise/initial-error bounds used by the offline analysis."""

    A: np.ndarray                    # (n, n)
    C: np.ndarray                    # (N, n), unit rows except observation-free zeros
    b_w: float
    b_v: float                       # max over sensors of the effective per-sensor bound
    eta0: float
    b_v_sensor: np.ndarray           # (N,) effective per-sensor observation-noise bounds
    observation_free: frozenset[int] = field(default_factory=frozenset)

    @classmethod
    def create(cls, A, C_raw, b_w: float, b_v: float, eta0: float,
               observation_free=()) -> "LtiSystem":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got {A.shape}")
        if not (b_w >= 0 and b_v >= 0 and np.isfinite(b_w) and np.isfinite(b_v)):
            raise ValueError("noise bounds must be finite and nonnegative")
        if not (eta0 > 0 and np.isfinite(eta0)):
            raise ValueError("eta0 must be finite and positive")
        C, norms = normalize(C_raw, observation_free)
        if C.shape[1] != A.shape[0]:
            raise ValueError(f"C rows have length {C.shape[1]}, state dimension is {A.shape[0]}")
        # the observation equation is divided through by ||C_i||, so the noise
        # bound scales the same way; the stored b_v is the per-sensor maximum
        b_v_sensor = b_v / norms
        return cls(A=A, C=C, b_w=float(b_w), b_v=float(b_v_sensor.max()) if len(b_v_sensor) else 0.0,
                   eta0=float(eta0), b_v_sensor=b_v_sensor,
                   observation_free=frozenset(int(i) for i in observation_free))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def n_sensors(self) -> int:
        return self.C.shape[0]

    @cached_property
    def norm_A(self) -> float:
        return float(np.linalg.norm(self.A, 2))


@dataclass(frozen=True)
class AttackStrategy:
    """Attack-signal rule applied on the scheduled sensor set.

    kinds:
      replay-scale : a_i(t) = kappa * (C_i x(t) + v_i(t))
      stealth      : a_i(t) = -xi_i(t), cancelling the attack-free innovation
                     xi_i(t) = C_i A (x(t-1) - xhat_i(t-1)) + v_i(t) + C_i w(t-1)
      bias         : a_i(t) = c
      uniform-random : a_i(t) ~ U[-r, r]
    """

    kind: str
    kappa: float = 2.0
    c: float = 0.0
    r: float = 0.0

    KINDS = ("replay-scale", "stealth", "bias", "uniform-random")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown attack strategy {self.kind!r}")


@dataclass(frozen=True)
class AttackScenario:
    """Time-indexed attacked sets plus the signal rule, under budget s.

    intervals: ((t_lo, t_hi_or_None, attacked_frozenset), ...); first match wins.
    random_size: if set, a fixed subset of that size is drawn per run and the
    scenario is materialized before simulation.
    """

    s: int
    intervals: tuple[tuple[int, int | None, frozenset[int]], ...]
    strategy: AttackStrategy
    random_size: int | None = None

    def __post_init__(self):
        for t_lo, t_hi, attacked in self.intervals:
            if len(attacked) > self.s:
                raise ValueError(f"|attacked set| = {len(attacked)} exceeds budget s = {self.s}")
            if t_hi is not None and t_hi < t_lo:
                raise ValueError(f"empty interval [{t_lo}, {t_hi}]")

    def attacked_set(self, t: int) -> frozenset[int]:
        for t_lo, t_hi, attacked in self.intervals:
            if t >= t_lo and (t_hi is None or t <= t_hi):
                return attacked
        return frozenset()

    @property
    def is_static(self) -> bool:
        if self.random_size is not None:
            return True  # materialized as one fixed subset per run
        sets = {attacked for _, _, attacked in self.intervals}
        if not self.intervals:
            return True
        # static means one interval covering all t >= 1 (or no attacks at all)
        return len(self.intervals) == 1 and self.intervals[0][0] <= 1 \
            and self.intervals[0][1] is None and len(sets) == 1

    def validate_indices(self, n_sensors: int) -> None:
        for _, _, attacked in self.intervals:
            bad = [i for i in attacked if not (1 <= i <= n_sensors)]
            if bad:
                raise ValueError(f"attacked sensors {bad} outside 1..{n_sensors}")

    def materialize(self, rng: np.random.Generator, n_sensors: int) -> "AttackScenario":
        """Draw the random fixed subset for this run, if the scenario asks for one."""
        if self.random_size is None:
            return self
        chosen = rng.choice(n_sensors, size=self.random_size, replace=False)
        attacked = frozenset(int(i) + 1 for i in chosen)
        return replace(self, intervals=((1, None, attacked),), random_size=None)


FIG1_ATTACKED = frozenset({3, 12, 13, 15, 23, 28})

_SWITCHING_SCHEDULE = (
    (1, 50, FIG1_ATTACKED),
    (51, 100, frozenset({1, 3, 10, 15, 19, 29})),
    (101, 150, frozenset({3, 6, 15, 21, 25, 26})),
    (151, 200, frozenset({3, 5, 9, 15, 20, 25})),
)


def named_scenario(name: str, strategy: AttackStrategy | None = None,
                   k: int | None = None, s: int | None = None) -> AttackScenario:
    """Scenario library: fig1-static, fig4-switching, random-k, none."""
    strategy = strategy or AttackStrategy("replay-scale", kappa=2.0)
    if name == "fig1-static":
        return AttackScenario(s=6, intervals=((1, None, FIG1_ATTACKED),), strategy=strategy)
    if name == "fig4-switching":
        return AttackScenario(s=6, intervals=_SWITCHING_SCHEDULE, strategy=strategy)
    if name == "random-k":
        if k is None:
            raise UnknownScenario("random-k needs the subset size k")
        return AttackScenario(s=k, intervals=(), strategy=strategy, random_size=k)
    if name == "none":
        return AttackScenario(s=0 if s is None else s, intervals=(), strategy=strategy)
    raise UnknownScenario(f"unknown scenario {name!r}")


@dataclass
class PlantTrace:
    """One realized trajectory; noises are retained for oracle checks.

    states[t] is x(t) for t = 0..T. observations[t] and v[t] hold y_i(t) / v_i(t)
    for t = 1..T (row 0 is unused padding). w[t] drives x(t+1) for t = 0..T-1.
    """

    states: np.ndarray        # (T+1, n)
    observations: np.ndarray  # (T+1, N), attack-free
    w: np.ndarray             # (T, n)
    v: np.ndarray             # (T+1, N)

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1


def simulate_plant(sys: LtiSystem, T: int, seed_or_rng, x0) -> PlantTrace:
    """Generate a trajectory with componentwise-uniform bounded noise.

    w components are uniform on [-b_w/sqrt(n), b_w/sqrt(n)], guaranteeing
    ||w(t)|| <= b_w; v_i is uniform on the per-sensor bound. Fully determined
    by the seed (draw order: all w, then all v).
    """
    if T < 1:
        raise ValueError("horizon must be >= 1")
    rng = as_rng(seed_or_rng)
    n, N = sys.n, sys.n_sensors
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (n,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({n},)")

    w = rng.uniform(-sys.b_w / np.sqrt(n), sys.b_w / np.sqrt(n), size=(T, n)) \
        if sys.b_w > 0 else np.zeros((T, n))
    v_draw = rng.uniform(-1.0, 1.0, size=(T, N)) * sys.b_v_sensor[None, :] \
        if sys.b_v > 0 else np.zeros((T, N))

    states = np.empty((T + 1, n))
    states[0] = x0
    for t in range(T):
        states[t + 1] = sys.A @ states[t] + w[t]

    v = np.zeros((T + 1, N))
    v[1:] = v_draw
    observations = np.zeros((T + 1, N))
    observations[1:] = states[1:] @ sys.C.T + v[1:]
    return PlantTrace(states=states, observations=observations, w=w, v=v)


def _signals_for_step(trace: PlantTrace, sys: LtiSystem, strategy: AttackStrategy,
                      t: int, attacked: np.ndarray,
                      xhat_prev: np.ndarray | None,
                      rng: np.random.Generator | None) -> np.ndarray:
    """Attack signals for the sensors in `attacked` (0-based indices) at time t."""
    if strategy.kind == "bias":
        return np.full(attacked.shape, strategy.c)
    if strategy.kind == "uniform-random":
        if rng is None:
            raise ValueError("uniform-random attacks need an rng")
        return rng.uniform(-strategy.r, strategy.r, size=attacked.shape)
    if strategy.kind == "replay-scale":
        clean = trace.states[t] @ sys.C[attacked].T + trace.v[t, attacked]
        return strategy.kappa * clean
    if strategy.kind == "stealth":
        if xhat_prev is None:
            raise MissingFeedback("stealth attacks need the sensors' prior estimates")
        pred_err = trace.states[t - 1][None, :] - xhat_prev[attacked]
        xi = np.einsum("ij,ij->i", sys.C[attacked], pred_err @ sys.A.T) \
            + trace.v[t, attacked] + sys.C[attacked] @ trace.w[t - 1]
        return -xi
    raise ValueError(f"unknown attack strategy {strategy.kind!r}")


def attack_signals_at(trace: PlantTrace, sys: LtiSystem, scenario: AttackScenario,
                      t: int, xhat_prev: np.ndarray | None = None,
                      rng: np.random.Generator | None = None) -> np.ndarray:
    """Length-N vector of attack signals at time t (zero off the attacked set)."""
    out = np.zeros(sys.n_sensors)
    attacked = scenario.attacked_set(t)
    if attacked:
        idx = np.array(sorted(i - 1 for i in attacked))
        out[idx] = _signals_for_step(trace, sys, scenario.strategy, t, idx, xhat_prev, rng)
    return out


def apply_attack(trace: PlantTrace, sys: LtiSystem, scenario: AttackScenario,
                 filter_feedback: np.ndarray | None = None,
                 rng: np.random.Generator | None = None) -> np.ndarray:
    """Attacked observation stream y_i(t) = clean_i(t) + a_i(t).

    Observations outside the attacked set are returned bit-identical to the
    clean stream. For the stealth strategy, filter_feedback[t] must hold the
    per-sensor estimates xhat_i(t) for t = 0..T-1 (shape (T, N, n)).
    """
    scenario.validate_indices(sys.n_sensors)
    out = trace.observations.copy()
    if scenario.strategy.kind == "stealth" and filter_feedback is None:
        raise MissingFeedback("stealth attacks need per-sensor prior estimates")
    for t in range(1, trace.horizon + 1):
        attacked = scenario.attacked_set(t)
        if not attacked:
            continue
        xhat_prev = filter_feedback[t - 1] if filter_feedback is not None else None
        out[t] += attack_signals_at(trace, sys, scenario, t, xhat_prev=xhat_prev, rng=rng)
    return out
