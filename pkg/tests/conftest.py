import json
import pathlib

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

DATA = pathlib.Path(__file__).parent / "data"

# the first call of a numba kernel compiles it, which would trip deadlines
settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PAULI = (np.array([[0, 1], [1, 0]], dtype=complex),
         np.array([[0, -1j], [1j, 0]]),
         np.array([[1, 0], [0, -1]], dtype=complex))

# lines written by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES = []


def correlation_singular_values(rho):
    """Singular values of T_ij = Tr(rho sigma_i (x) sigma_j), descending.

    Independent oracle for Gamma_sup: local unitaries act on T as
    T -> O_A T O_B^T with rotations O_A, O_B, and 2 ||rho_14| - |rho_23||
    in any local frame is at most the middle singular value (attained).
    """
    m = np.asarray(rho.matrix if hasattr(rho, "matrix") else rho)
    T = np.array([[np.trace(m @ np.kron(a, b)).real for b in PAULI] for a in PAULI])
    return np.linalg.svd(T, compute_uv=False)


def sigma2(rho):
    return float(correlation_singular_values(rho)[1])


@pytest.fixture(scope="session")
def golden():
    return json.loads((DATA / "random_states_golden.json").read_text())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
