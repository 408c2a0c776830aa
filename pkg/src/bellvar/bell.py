"""Dichotomic observables, correlation functions and inequality evaluators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qstate import PAULIS, Decomposition, DomainError, PureState, QubitPairState

VIOLATION_SLACK = 1e-12
LOCAL_BOUND = 2.0
IMAG_TOL = 1e-12
CONSISTENCY_TOL = 1e-10
TWO_PI = 2 * np.pi


@dataclass(frozen=True, eq=False)
class Observable:
    """Spin observable n . sigma with eigenvalues +1 and -1.

    ``plane`` observables are cos(t) sigma_z + sin(t) sigma_x; ``bloch``
    observables carry an arbitrary unit vector, optionally built from a
    polar/azimuth angle pair.
    """

    mode: str
    direction: np.ndarray
    angles: tuple[float, ...]

    @classmethod
    def plane(cls, theta: float) -> "Observable":
        theta = float(theta)
        return cls("plane", np.array([np.sin(theta), 0.0, np.cos(theta)]), (theta,))

    @classmethod
    def from_angles(cls, polar: float, azimuth: float) -> "Observable":
        polar, azimuth = float(polar), float(azimuth)
        n = np.array([np.sin(polar) * np.cos(azimuth), np.sin(polar) * np.sin(azimuth), np.cos(polar)])
        return cls("bloch", n, (polar, azimuth))

    @classmethod
    def bloch(cls, n: Sequence[float]) -> "Observable":
        n = np.asarray(n, dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-12:
            raise DomainError(f"bloch observable needs a unit 3-vector, got {n}")
        polar = float(np.arccos(np.clip(n[2], -1, 1)))
        azimuth = float(np.arctan2(n[1], n[0]) % TWO_PI)
        return cls("bloch", n, (polar, azimuth))

    @property
    def matrix(self) -> np.ndarray:
        return sum(c * p for c, p in zip(self.direction, PAULIS))

    def same_as(self, other: "Observable", tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.direction - other.direction)) <= tol)

    def to_dict(self) -> dict:
        if self.mode == "plane":
            return {"mode": "plane", "theta": self.angles[0]}
        out = {"mode": "bloch", "direction": self.direction.tolist()}
        out["polar"], out["azimuth"] = self.angles
        return out


@dataclass(frozen=True)
class MeasurementSettings:
    """Settings a, d on the first qubit and b, c on the second."""

    a: Observable
    b: Observable
    c: Observable
    d: Observable

    @classmethod
    def from_angles(cls, angles: Sequence[float], mode: str = "plane") -> "MeasurementSettings":
        """Build from (t_a, t_b, t_c, t_d) or, in bloch mode, four (polar, azimuth) pairs."""
        angles = [float(v) for v in angles]
        if mode == "plane":
            if len(angles) != 4:
                raise DomainError(f"plane settings need 4 angles, got {len(angles)}")
            return cls(*(Observable.plane(t) for t in angles))
        if mode == "bloch":
            if len(angles) != 8:
                raise DomainError(f"bloch settings need 8 angles, got {len(angles)}")
            return cls(*(Observable.from_angles(angles[2 * k], angles[2 * k + 1]) for k in range(4)))
        raise DomainError(f"unknown observable mode {mode!r}")

    def __iter__(self):
        return iter((self.a, self.b, self.c, self.d))

    @property
    def angles(self) -> tuple[float, ...]:
        return tuple(v for obs in self for v in obs.angles)

    def to_dict(self) -> dict:
        return {name: obs.to_dict() for name, obs in zip("abcd", self)}


def correlation(state: QubitPairState, first: Observable, second: Observable) -> float:
    """Joint expectation tr[rho (A (x) B)]."""
    value = complex(np.trace(state.matrix @ np.kron(first.matrix, second.matrix)))
    if abs(value.imag) > IMAG_TOL:
        raise DomainError(f"correlation has imaginary part {value.imag:.3g}; state is not Hermitian")
    return value.real


def correlation_pure(state: PureState, first: Observable, second: Observable) -> float:
    """<Phi| A (x) B |Phi> for a single decomposition term."""
    v = state.amplitudes
    value = complex(np.vdot(v, np.kron(first.matrix, second.matrix) @ v))
    if abs(value.imag) > IMAG_TOL:
        raise DomainError(f"correlation has imaginary part {value.imag:.3g}")
    return value.real


@dataclass(frozen=True)
class InequalityReport:
    """Evaluation of the variable-bound inequality at one setting.

    ``lhs`` is |<ab> - <ac>| on the full state; the right-hand side is
    ``bound - sum_i p_i |<db>_i + <dc>_i|``, equivalently ``b_value`` is
    compared with ``bound``.
    """

    lhs: float
    bound: float
    b_value: float
    violated: bool
    per_term: tuple[tuple[float, float], ...]
    settings: MeasurementSettings
    provenance: str = ""

    @property
    def variable_bound(self) -> float:
        return self.bound - sum(p * t for p, t in self.per_term)

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "bound": self.bound,
            "b_value": self.b_value,
            "violated": self.violated,
            "per_term": [list(t) for t in self.per_term],
            "settings": self.settings.to_dict(),
            "angles": list(self.settings.angles),
            **({"provenance": self.provenance} if self.provenance else {}),
        }


def evaluate_eq6(decomp: Decomposition, settings: MeasurementSettings) -> InequalityReport:
    """Evaluate <B> = |<ab> - <ac>| + sum_i p_i |<db>_i + <dc>_i| for one decomposition."""
    decomp.check()
    a, b, c, d = settings
    rho = decomp.source

    full_ab = correlation(rho, a, b)
    full_ac = correlation(rho, a, c)
    summed_ab = summed_ac = 0.0
    per_term = []
    for p, phi in decomp.terms:
        summed_ab += p * correlation_pure(phi, a, b)
        summed_ac += p * correlation_pure(phi, a, c)
        per_term.append((p, abs(correlation_pure(phi, d, b) + correlation_pure(phi, d, c))))
    mismatch = max(abs(full_ab - summed_ab), abs(full_ac - summed_ac))
    if mismatch > CONSISTENCY_TOL:
        raise DomainError(f"decomposition terms disagree with the state correlations by {mismatch:.3g}")

    lhs = abs(full_ab - full_ac)
    b_value = lhs + sum(p * t for p, t in per_term)
    return InequalityReport(
        lhs=lhs,
        bound=LOCAL_BOUND,
        b_value=b_value,
        violated=b_value > LOCAL_BOUND + VIOLATION_SLACK,
        per_term=tuple(per_term),
        settings=settings,
    )


@dataclass(frozen=True)
class Eq7Report:
    """Special case d = c with a split of the terms into a correlated group.

    ``terms`` holds one dict per decomposition term with its group
    ("j" for the first ``n`` terms in ``ordering``, "i" otherwise); j-group
    entries carry <bb>_j, <bc>_j, the difference <<bc>>_j and the sign
    applied to it. <bb>_j is reported so callers can judge whether the
    group is perfectly correlated; it is not enforced.
    """

    lhs: float
    rhs: float
    violated: bool
    n: int
    ordering: tuple[int, ...]
    terms: tuple[dict, ...]
    experimental: bool = True

    def recompute_rhs(self) -> float:
        rest = sum(t["weight"] * (t["ab"] - t["ac"]) for t in self.terms if t["group"] == "i")
        corr = sum(t["sign"] * t["weight"] * t["bc_difference"] for t in self.terms if t["group"] == "j")
        return abs(rest) + corr

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "violated": self.violated,
            "n": self.n,
            "ordering": list(self.ordering),
            "terms": [dict(t) for t in self.terms],
            "experimental": self.experimental,
        }


def evaluate_eq7(
    decomp: Decomposition,
    settings: MeasurementSettings,
    n: int | None = None,
    ordering: Sequence[int] | None = None,
) -> Eq7Report:
    """Evaluate |<ab> - <ac>| against the d = c bound.

    The first ``n`` indices of ``ordering`` form the correlated group; the
    rest enter through |sum_i p_i (<ab>_i - <ac>_i)|. ``n`` defaults to the
    number of terms.
    """
    decomp.check()
    a, b, c, d = settings
    if not d.same_as(c):
        raise DomainError("this evaluator requires settings with d == c")
    size = len(decomp)
    n = size if n is None else int(n)
    if not 1 <= n <= size:
        raise DomainError(f"split index must lie in [1, {size}], got {n}")
    ordering = tuple(range(size)) if ordering is None else tuple(int(k) for k in ordering)
    if sorted(ordering) != list(range(size)):
        raise DomainError(f"ordering must be a permutation of 0..{size - 1}")

    # b acts on the first qubit in <bb> and <bc>
    terms = []
    for rank, idx in enumerate(ordering):
        p, phi = decomp.terms[idx]
        entry = {
            "index": idx,
            "group": "j" if rank < n else "i",
            "weight": p,
            "ab": correlation_pure(phi, a, b),
            "ac": correlation_pure(phi, a, c),
        }
        if rank < n:
            bb = correlation_pure(phi, b, b)
            bc = correlation_pure(phi, b, c)
            diff = bb - bc
            entry.update(bb=bb, bc=bc, bc_difference=diff, sign=1 if diff > 0 else -1)
        terms.append(entry)

    lhs = abs(correlation(decomp.source, a, b) - correlation(decomp.source, a, c))
    report = Eq7Report(lhs=lhs, rhs=0.0, violated=False, n=n, ordering=ordering, terms=tuple(terms))
    rhs = report.recompute_rhs()
    return Eq7Report(
        lhs=lhs, rhs=rhs, violated=lhs > rhs + VIOLATION_SLACK, n=n, ordering=ordering, terms=tuple(terms)
    )


def chsh_value(state: QubitPairState, settings: MeasurementSettings) -> float:
    """<ab> + <ac> + <db> - <dc> on the full state."""
    a, b, c, d = settings
    return (
        correlation(state, a, b)
        + correlation(state, a, c)
        + correlation(state, d, b)
        - correlation(state, d, c)
    )


def chsh_max(state: QubitPairState) -> float:
    """Largest CHSH value over all spin observables, 2 sqrt(m1 + m2).

    m1, m2 are the two largest eigenvalues of T^T T, with T the Pauli
    correlation matrix of the state.
    """
    t = state.pauli_correlations()
    eig = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return float(2 * np.sqrt(max(eig[0] + eig[1], 0.0)))
