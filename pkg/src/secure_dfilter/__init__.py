"""Secured distributed filtering for LTI systems under sparse sensor-observation
attacks: simulator, saturation-gain filter, online attack detector, and the
offline bound / feasibility analysis toolkit."""

from .analysis import (BoundParams, BoundSequence, FeasibilityReport,
                       bound_limsup, bound_params_for, bound_realtime,
                       bound_uniform, bound_unsaturated, beta_grid_search,
                       check_parameter_inequality, lambda0, iterate_monotone_recursion,
                       one_step_sparse_observable, p_of_t, resilience_curve,
                       rho_sequence, search_feasible_params, sparse_observable,
                       varpi)
from .detector import (Certificate, DetectorBank, WBound, detection_filter_step,
                       convergence_certificate, detector1_threshold,
                       detector2_threshold, detector2_thresholds,
                       noise_free_convergence_test, w_bound)
from .filter import (FilterBank, FilterParams, consensus_operator,
                     consensus_round, filter_step, observation_update,
                     saturation_gain, saturation_gains)
from .graph import (SensorGraph, SpectralParams, graph_diameter, is_connected,
                    laplacian, min_consensus_steps, named_topology,
                    spectral_params)
from .harness import (ExperimentConfig, MetricsTable, baseline_sgcf,
                      baseline_trimmed, config_from_dict, config_from_file,
                      reproduce, run_experiment)
from .system import (AttackScenario, AttackStrategy, LtiSystem, PlantTrace,
                     apply_attack, attack_signals_at, named_scenario, normalize,
                     simulate_plant, substream_seed)

__version__ = "0.1.0"
