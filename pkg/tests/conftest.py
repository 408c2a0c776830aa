import numpy as np
import pytest
from scipy.stats import unitary_group

from bellvar.qstate import Decomposition, PureState

ACCEPTANCE_LINES = []


def random_qubit(rng):
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


def random_pure(rng):
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return PureState(v / np.linalg.norm(v))


def random_weights(rng, k):
    return rng.dirichlet(np.ones(k))


def random_mixture(rng, k=None):
    k = k or int(rng.integers(1, 6))
    return Decomposition(list(zip(random_weights(rng, k), [random_pure(rng) for _ in range(k)])))


def random_product_decomposition(rng, k=None):
    k = k or int(rng.integers(1, 6))
    states = [PureState.product(random_qubit(rng), random_qubit(rng)) for _ in range(k)]
    return Decomposition(list(zip(random_weights(rng, k), states)))


def remix(decomp, rng, extra=2):
    """Another decomposition of the same state via a random unitary remixing.

    Unnormalized vectors sqrt(p_i)|phi_i> mixed by the columns of a unitary
    realize the same density matrix.
    """
    k = len(decomp)
    m = k + extra
    vecs = np.zeros((m, 4), dtype=complex)
    vecs[:k] = [np.sqrt(p) * s.amplitudes for p, s in decomp.terms]
    u = unitary_group.rvs(m, random_state=rng)
    mixed = u @ vecs
    weights = np.sum(np.abs(mixed) ** 2, axis=1)
    keep = weights > 1e-14
    terms = [(w, v / np.sqrt(w)) for w, v, ok in zip(weights, mixed, keep) if ok]
    return Decomposition(terms, decomp.source)


def random_local_unitary(rng):
    return np.kron(unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
