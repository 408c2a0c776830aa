"""Monte Carlo estimate of correlations from simulated +/-1 measurement records.

Each trial draws one of the four joint outcomes (+1/-1 on each qubit)
with its Born probability tr[rho (P_s (x) Q_t)], where P and Q are the
eigenprojectors of the two observables. This path never touches the
closed-form correlation and serves as an independent check on it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bell import Observable
from .qstate import DomainError, QubitPairState

CHUNK_TRIALS = 1 << 18
OUTCOME_PRODUCTS = np.array([1.0, -1.0, -1.0, 1.0])  # (+,+), (+,-), (-,+), (-,-)


@dataclass(frozen=True)
class SampleEstimate:
    mean: float
    std_error: float
    n_trials: int
    rng_seed: int = 0

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "n_trials": self.n_trials, "rng_seed": self.rng_seed}


def _projectors(obs: Observable) -> tuple[np.ndarray, np.ndarray]:
    ident = np.eye(2)
    return (ident + obs.matrix) / 2, (ident - obs.matrix) / 2


def outcome_probabilities(state: QubitPairState, first: Observable, second: Observable) -> np.ndarray:
    """Born probabilities of (+,+), (+,-), (-,+), (-,-)."""
    rho = state.matrix
    probs = np.array(
        [np.trace(rho @ np.kron(p, q)).real for p in _projectors(first) for q in _projectors(second)]
    )
    if probs.min() < -1e-10:
        raise DomainError("negative outcome probability; state is not positive semidefinite")
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def _chunk_counts(probs: np.ndarray, size: int, seed: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed)
    draws = rng.choice(4, size=size, p=probs)
    return np.bincount(draws, minlength=4)


def sample_correlation(
    state: QubitPairState,
    first: Observable,
    second: Observable,
    n_trials: int,
    rng_seed: int = 0,
    jobs: int = 1,
) -> SampleEstimate:
    """Estimate <A (x) B> from ``n_trials`` simulated joint measurements.

    Trials are split into fixed-size chunks with seeds spawned from
    ``rng_seed``, so the estimate does not depend on ``jobs``.
    """
    if n_trials < 1:
        raise DomainError("n_trials must be at least 1")
    state.check()
    probs = outcome_probabilities(state, first, second)

    sizes = [CHUNK_TRIALS] * (n_trials // CHUNK_TRIALS)
    if n_trials % CHUNK_TRIALS:
        sizes.append(n_trials % CHUNK_TRIALS)
    seeds = np.random.SeedSequence(rng_seed).spawn(len(sizes))

    if jobs > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            counts = list(pool.map(_chunk_counts, [probs] * len(sizes), sizes, seeds))
    else:
        counts = [_chunk_counts(probs, n, s) for n, s in zip(sizes, seeds)]
    counts = np.sum(counts, axis=0)

    agree = int(counts[0] + counts[3])
    mean = float(OUTCOME_PRODUCTS @ counts) / n_trials
    if n_trials > 1:
        # products are +/-1, so the sample variance follows from the counts
        var = (n_trials - agree) * agree * 4.0 / (n_trials * (n_trials - 1))
        std_error = float(np.sqrt(var / n_trials))
    else:
        std_error = 0.0
    return SampleEstimate(mean=mean, std_error=std_error, n_trials=n_trials, rng_seed=rng_seed)
