"""Two-qubit states, pure-state decompositions and concurrence.

Everything lives in the computational basis |00>, |01>, |10>, |11>.
Constructors are deliberately permissive: a ``QubitPairState`` or
``PureState`` may hold an unphysical array, and operations that need a
physical input call :meth:`QubitPairState.check` themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PureState:
    """Length-4 state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape != (4,):
            raise DomainError(f"two-qubit pure state needs 4 amplitudes, got {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def product(cls, first, second) -> "PureState":
        return cls(np.kron(np.asarray(first, dtype=complex), np.asarray(second, dtype=complex)))

    @property
    def norm_error(self) -> float:
        return abs(float(np.vdot(self.amplitudes, self.amplitudes).real) - 1.0)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def is_product(self, tol: float = 1e-10) -> bool:
        # a 2x2 reshaped amplitude matrix has rank one iff the state factorizes
        return abs(np.linalg.det(self.amplitudes.reshape(2, 2))) <= tol


@dataclass(frozen=True, eq=False)
class QubitPairState:
    """4x4 density matrix of two qubits."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.matrix)
        if mat.shape != (4, 4):
            raise DomainError(f"two-qubit density matrix must be 4x4, got {mat.shape}")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_pure(cls, state: PureState) -> "QubitPairState":
        return cls(state.projector())

    def violations(self) -> list[str]:
        """Human-readable list of broken density-matrix invariants."""
        mat = self.matrix
        problems = []
        herm = float(np.max(np.abs(mat - mat.conj().T)))
        if herm > HERMITIAN_TOL:
            problems.append(f"not Hermitian (max |M - M^dag| = {herm:.3g})")
        tr = abs(complex(np.trace(mat)) - 1.0)
        if tr > TRACE_TOL:
            problems.append(f"trace differs from 1 by {tr:.3g}")
        if herm <= 1e-8:
            lowest = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2)[0])
            if lowest < -PSD_TOL:
                problems.append(f"not positive semidefinite (min eigenvalue {lowest:.3g})")
        return problems

    def check(self) -> "QubitPairState":
        problems = self.violations()
        if problems:
            raise DomainError("invalid density matrix: " + "; ".join(problems))
        return self

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)

    def pauli_correlations(self) -> np.ndarray:
        """3x3 matrix T[u, v] = tr[rho sigma_u (x) sigma_v] over (x, y, z)."""
        return np.array(
            [[np.trace(self.matrix @ np.kron(su, sv)).real for sv in PAULIS] for su in PAULIS]
        )


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Ordered convex realization rho = sum_i p_i |Phi_i><Phi_i|.

    Terms with zero weight are dropped. When ``source`` is omitted the
    decomposition is taken to realize its own reconstruction.
    """

    terms: tuple[tuple[float, PureState], ...]
    source: QubitPairState = None
    label: str = ""

    def __post_init__(self):
        terms = tuple((float(w), s if isinstance(s, PureState) else PureState(s)) for w, s in self.terms)
        terms = tuple((w, s) for w, s in terms if w != 0.0)
        if not terms:
            raise DomainError("decomposition has no terms with nonzero weight")
        object.__setattr__(self, "terms", terms)
        if self.source is None:
            object.__setattr__(self, "source", QubitPairState(self.reconstruct()))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.terms])

    @property
    def states(self) -> list[PureState]:
        return [s for _, s in self.terms]

    def reconstruct(self) -> np.ndarray:
        return sum(w * s.projector() for w, s in self.terms)

    def check(self) -> "Decomposition":
        report = validate_decomposition(self)
        if not report.ok:
            raise DomainError("invalid decomposition: " + "; ".join(report.problems))
        return self


@dataclass(frozen=True)
class DecompositionReport:
    weight_sum_error: float
    min_weight: float
    reconstruction_error: float
    norm_errors: tuple[float, ...]
    problems: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.problems

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "weight_sum_error": self.weight_sum_error,
            "min_weight": self.min_weight,
            "reconstruction_error": self.reconstruction_error,
            "norm_errors": list(self.norm_errors),
            "problems": list(self.problems),
        }


def validate_decomposition(decomp: Decomposition) -> DecompositionReport:
    """Check weights, term norms and reconstruction of ``decomp.source``."""
    weights = decomp.weights
    weight_sum_error = abs(float(weights.sum()) - 1.0)
    min_weight = float(weights.min())
    norm_errors = tuple(s.norm_error for s in decomp.states)
    recon = float(np.linalg.norm(decomp.reconstruct() - decomp.source.matrix))

    problems = []
    if min_weight < 0:
        problems.append(f"negative weight {min_weight:.3g}")
    if weight_sum_error > WEIGHT_SUM_TOL:
        problems.append(f"weights sum to {weights.sum():.15g}")
    bad = [i for i, e in enumerate(norm_errors) if e > NORM_TOL]
    if bad:
        problems.append(f"terms {bad} are not unit vectors")
    if recon > RECONSTRUCTION_TOL:
        problems.append(f"reconstruction error {recon:.3g}")
    problems.extend(decomp.source.violations())
    return DecompositionReport(weight_sum_error, min_weight, recon, norm_errors, tuple(problems))


# -- named vectors ---------------------------------------------------------

_S = 1 / np.sqrt(2)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([_S, _S], dtype=complex)    # |phi> = (|0> + |1>)/sqrt2
MINUS = np.array([_S, -_S], dtype=complex)  # |psi> = (|0> - |1>)/sqrt2

PHI_PLUS = PureState([_S, 0, 0, _S])
PHI_MINUS = PureState([_S, 0, 0, -_S])
PSI_PLUS = PureState([0, _S, _S, 0])
PSI_MINUS = PureState([0, _S, -_S, 0])
KET01 = PureState([0, 1, 0, 0])

BELL_STATES = {"phi+": PHI_PLUS, "phi-": PHI_MINUS, "psi+": PSI_PLUS, "psi-": PSI_MINUS}


def nonmaximal_state(xi: float) -> PureState:
    """cos(xi)|00> + sin(xi)|11>."""
    return PureState([np.cos(xi), 0, 0, np.sin(xi)])


# -- state families --------------------------------------------------------

def _require_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    return gamma


def _require_x(x: float) -> float:
    x = float(x)
    if abs(x) > 0.25:
        raise DomainError(f"|x| must not exceed 1/4, got {x}")
    return x


def mems_g(gamma: float) -> float:
    return gamma / 2 if gamma >= 2 / 3 else 1 / 3


def mems_state(gamma: float) -> QubitPairState:
    """Maximally entangled mixed state with concurrence ``gamma``."""
    gamma = _require_gamma(gamma)
    g = mems_g(gamma)
    mat = np.zeros((4, 4))
    mat[0, 0] = mat[3, 3] = g
    mat[1, 1] = 1 - 2 * g
    mat[0, 3] = mat[3, 0] = gamma / 2
    return QubitPairState(mat)


def mems_decomposition(gamma: float) -> Decomposition:
    gamma = _require_gamma(gamma)
    g = mems_g(gamma)
    terms = [(g + gamma / 2, PHI_PLUS), (g - gamma / 2, PHI_MINUS), (1 - 2 * g, KET01)]
    return Decomposition(terms, mems_state(gamma), label=f"mems(gamma={gamma:g})")


def werner_state(gamma: float, xi: float = np.pi / 4) -> QubitPairState:
    gamma = _require_gamma(gamma)
    mat = (1 - gamma) / 4 * np.eye(4) + gamma * nonmaximal_state(xi).projector()
    return QubitPairState(mat)


def werner_decomposition(gamma: float, xi: float = np.pi / 4) -> Decomposition:
    gamma = _require_gamma(gamma)
    noise = (1 - gamma) / 4
    terms = [(noise, PHI_PLUS), (noise, PSI_PLUS), (noise, PHI_MINUS), (noise, PSI_MINUS)]
    terms.append((gamma, nonmaximal_state(xi)))
    return Decomposition(terms, werner_state(gamma, xi), label=f"werner(gamma={gamma:g}, xi={xi:g})")


def separable_state(x: float) -> QubitPairState:
    x = _require_x(x)
    mat = np.eye(4) / 4
    mat[0, 3] = mat[3, 0] = mat[1, 2] = mat[2, 1] = x
    return QubitPairState(mat)


def product_decomposition(x: float) -> Decomposition:
    x = _require_x(x)
    terms = [
        (0.25 + x, PureState.product(PLUS, PLUS)),
        (0.25 - x, PureState.product(PLUS, MINUS)),
        (0.25 - x, PureState.product(MINUS, PLUS)),
        (0.25 + x, PureState.product(MINUS, MINUS)),
    ]
    return Decomposition(terms, separable_state(x), label=f"product(x={x:g})")


def bell_decomposition(x: float) -> Decomposition:
    x = _require_x(x)
    terms = [(0.25 + x, PHI_PLUS), (0.25 + x, PSI_PLUS), (0.25 - x, PHI_MINUS), (0.25 - x, PSI_MINUS)]
    return Decomposition(terms, separable_state(x), label=f"bell(x={x:g})")


# -- entanglement ----------------------------------------------------------

_YY = np.kron(SIGMA_Y, SIGMA_Y)
# eigenvalues below this are roundoff around an exact zero
_NULL_EIGENVALUE = 1e-14


def concurrence(state) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    Accepts a :class:`QubitPairState`, a :class:`PureState` or a raw 4x4
    array. Raises :class:`DomainError` for unphysical matrices.

    The square roots of the eigenvalues of rho (Y rho* Y) equal the singular
    values of F^T Y F for any factor rho = F F^dag; the SVD route avoids
    square roots of roundoff-sized eigenvalues for rank-deficient states.
    """
    if isinstance(state, PureState):
        state = QubitPairState.from_pure(state)
    elif not isinstance(state, QubitPairState):
        state = QubitPairState(state)
    state.check()
    w, v = np.linalg.eigh((state.matrix + state.matrix.conj().T) / 2)
    w = np.where(w < _NULL_EIGENVALUE, 0.0, w)
    factor = v * np.sqrt(w)
    roots = np.linalg.svd(factor.T @ _YY @ factor, compute_uv=False)
    return float(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]))


# -- JSON ------------------------------------------------------------------

def _pairs(values: np.ndarray) -> list:
    if values.ndim == 1:
        return [[float(v.real), float(v.imag)] for v in values]
    return [_pairs(row) for row in values]


def _complex(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.shape[-1] != 2:
        raise DomainError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_dict(state: QubitPairState) -> dict:
    return {"matrix": _pairs(state.matrix)}


def state_from_dict(data: dict) -> QubitPairState:
    return QubitPairState(_complex(data["matrix"]))


def decomposition_to_dict(decomp: Decomposition) -> dict:
    out = {
        "terms": [{"weight": w, "amplitudes": _pairs(s.amplitudes)} for w, s in decomp.terms],
        "matrix": _pairs(decomp.source.matrix),
    }
    if decomp.label:
        out["label"] = decomp.label
    return out


def decomposition_from_dict(data: dict) -> Decomposition:
    terms = [(t["weight"], PureState(_complex(t["amplitudes"]))) for t in data["terms"]]
    source = state_from_dict(data) if "matrix" in data else None
    return Decomposition(terms, source, label=data.get("label", ""))


def eigen_decomposition(state: QubitPairState, label: str = "") -> Decomposition:
    """Spectral decomposition of ``state`` (eigenvectors weighted by eigenvalues)."""
    vals, vecs = np.linalg.eigh((state.matrix + state.matrix.conj().T) / 2)
    # roundoff can push zero eigenvalues slightly negative
    vals = np.where(np.abs(vals) <= PSD_TOL, 0.0, vals)
    terms = [(v, vecs[:, k]) for k, v in enumerate(vals)]
    return Decomposition(terms, state, label=label or "spectral")


def mixture(weights: Sequence[float], states: Iterable) -> Decomposition:
    return Decomposition(list(zip(weights, states)))
