"""Shared fixtures: the 30-sensor benchmark setup and searched filter parameters."""
import numpy as np
import pytest

import secure_dfilter as sd
from secure_dfilter import analysis
from secure_dfilter.harness import ExperimentConfig


@pytest.fixture(scope="session")
def fig1():
    return sd.named_topology("fig1")


@pytest.fixture(scope="session")
def benchmark_system():
    """Scalar plant A = 1.02, 30 unit observation rows, noise bounds 0.01, eta0 = 50."""
    return sd.LtiSystem.create(1.02, np.ones((30, 1)), 0.01, 0.01, 50.0)


@pytest.fixture(scope="session")
def benchmark_system_zeros():
    """Same plant with sensors 1 and 25 observation-free."""
    rows = np.ones((30, 1))
    rows[0, 0] = 0.0
    rows[24, 0] = 0.0
    return sd.LtiSystem.create(1.02, rows, 0.01, 0.01, 50.0, observation_free=(1, 25))


@pytest.fixture(scope="session")
def benchmark_system_noise_free():
    return sd.LtiSystem.create(1.02, np.ones((30, 1)), 0.0, 0.0, 50.0)


@pytest.fixture(scope="session")
def feasible_ones(fig1, benchmark_system):
    """(beta, eta0, L) witness satisfying the parameter inequality, all-ones rows."""
    report = analysis.search_feasible_params(benchmark_system, fig1, 6)
    assert report.found_params is not None
    return report.found_params


@pytest.fixture(scope="session")
def feasible_zeros(fig1, benchmark_system_zeros):
    report = analysis.search_feasible_params(benchmark_system_zeros, fig1, 6)
    assert report.found_params is not None
    return report.found_params


@pytest.fixture(scope="session")
def feasible_noise_free(fig1, benchmark_system_noise_free):
    report = analysis.search_feasible_params(benchmark_system_noise_free, fig1, 6)
    assert report.found_params is not None
    return report.found_params


def make_config(system, graph, scenario, beta, L, *, algorithm="alg1", runs=10,
                horizon=200, seed=2024, x0=25.0, **kw) -> ExperimentConfig:
    return ExperimentConfig(
        system=system, graph=graph, scenario=scenario,
        filter_params=sd.FilterParams.from_graph(graph, beta, L),
        algorithm=algorithm, runs=runs, horizon=horizon, seed=seed,
        x0=[x0] if np.isscalar(x0) else x0, init="uniform", **kw)
