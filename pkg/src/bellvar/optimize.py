"""Maximize the violation functional <B> over the four measurement settings.

The search is an exhaustive coarse grid over the periodic angle box
followed by restarted Nelder-Mead refinement from the best grid points.
<B> contains absolute values, so it is only piecewise smooth and
gradient-based refinement is avoided.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .bell import TWO_PI, InequalityReport, MeasurementSettings, evaluate_eq6
from .qstate import Decomposition, DomainError, QubitPairState

MODES = ("plane", "bloch")
TIE_TOL = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    coarse_grid_points_per_axis: int | None = None  # 9 in plane mode, 7 in bloch mode
    refine_seeds: int = 16
    max_refine_iterations: int = 400
    convergence_tolerance: float = 1e-9
    observable_mode: str = "plane"
    rng_seed: int = 0
    max_restarts: int = 8

    def __post_init__(self):
        if self.observable_mode not in MODES:
            raise DomainError(f"observable_mode must be one of {MODES}")
        if self.grid_points < 3:
            raise DomainError("coarse grid needs at least 3 points per axis")
        if self.refine_seeds < 1:
            raise DomainError("refine_seeds must be at least 1")
        if not self.convergence_tolerance > 0:
            raise DomainError("convergence_tolerance must be positive")

    @property
    def grid_points(self) -> int:
        if self.coarse_grid_points_per_axis is not None:
            return int(self.coarse_grid_points_per_axis)
        return 9 if self.observable_mode == "plane" else 7

    @property
    def dimension(self) -> int:
        return 4 if self.observable_mode == "plane" else 8

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown optimizer config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "OptimizerConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


class ViolationFunctional:
    """Fast evaluation of <B> through Pauli correlation matrices.

    For n . sigma on one qubit and m . sigma on the other, the expectation
    in any state is n^T T m, so each term reduces to a 3x3 matrix.
    """

    def __init__(self, decomp: Decomposition, mode: str = "plane"):
        self.mode = mode
        self.weights = decomp.weights
        self.term_tensors = np.array([QubitPairState.from_pure(s).pauli_correlations() for s in decomp.states])
        self.full_tensor = decomp.source.pauli_correlations()
        self.calls = 0

    def directions(self, angles: np.ndarray) -> np.ndarray:
        """(..., 4, 3) unit vectors for settings a, b, c, d."""
        angles = np.asarray(angles, dtype=float)
        if self.mode == "plane":
            return np.stack([np.sin(angles), np.zeros_like(angles), np.cos(angles)], axis=-1)
        pol, az = angles[..., 0::2], angles[..., 1::2]
        return np.stack([np.sin(pol) * np.cos(az), np.sin(pol) * np.sin(az), np.cos(pol)], axis=-1)

    def __call__(self, angles) -> float:
        self.calls += 1
        a, b, c, d = self.directions(angles)
        bc = np.stack([b, c], axis=1)
        ab, ac = a @ self.full_tensor @ bc
        db_dc = d @ self.term_tensors @ bc
        return float(abs(ab - ac) + self.weights @ np.abs(db_dc.sum(axis=1)))

    def grid_values(self, points: int) -> tuple[np.ndarray, np.ndarray]:
        """<B> on the full product grid.

        Returns (axis_angles, values) where ``values`` has one axis per
        setting in a, b, c, d order; in bloch mode each setting axis
        enumerates (polar, azimuth) pairs lexicographically.
        """
        axis = TWO_PI * np.arange(points) / points
        if self.mode == "plane":
            settings = axis[:, None]
        else:
            settings = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
        dirs = self.directions(settings.ravel()).reshape(-1, 3)

        full = dirs @ self.full_tensor @ dirs.T                        # [a, b]
        lhs = np.abs(full[:, :, None] - full[:, None, :])              # [a, b, c]
        terms = np.einsum("xu,iuv,yv->ixy", dirs, self.term_tensors, dirs)  # [i, d, b]
        rhs = np.einsum("i,idbc->dbc", self.weights, np.abs(terms[:, :, :, None] + terms[:, :, None, :]))
        values = lhs[:, :, :, None] + np.transpose(rhs, (1, 2, 0))[None, :, :, :]
        self.calls += values.size
        return settings, values


@dataclass(frozen=True)
class ViolationResult:
    b_max: float
    optimal_settings: MeasurementSettings
    report: InequalityReport
    evaluations: int
    converged: bool
    grid_max: float
    config: OptimizerConfig = field(default_factory=OptimizerConfig)
    label: str = ""

    @property
    def violated(self) -> bool:
        return self.report.violated

    @property
    def angles(self) -> tuple[float, ...]:
        return self.optimal_settings.angles

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "b_max": self.b_max,
            "bound": self.report.bound,
            "violated": self.violated,
            "angles": list(self.angles),
            "report": self.report.to_dict(),
            "evaluations": self.evaluations,
            "converged": self.converged,
            "grid_max": self.grid_max,
            "config": self.config.to_dict(),
        }


def canonical_angles(angles) -> np.ndarray:
    out = np.mod(np.asarray(angles, dtype=float), TWO_PI)
    # mod can return exactly 2*pi for tiny negative inputs
    out[out >= TWO_PI] = 0.0
    return out


def _top_indices(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries; ties go to the smallest flat index."""
    flat = values.ravel()
    k = min(k, flat.size)
    kth = np.partition(flat, flat.size - k)[flat.size - k]
    cand = np.flatnonzero(flat >= kth)
    order = np.lexsort((cand, -flat[cand]))
    return cand[order[:k]]


def _random_simplex(x0: np.ndarray, step: float, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((x0.size, x0.size)))
    return np.vstack([x0, x0 + step * q.T])


def _refine(func: ViolationFunctional, x0: np.ndarray, step: float, config: OptimizerConfig, rng):
    """Restarted Nelder-Mead; only accepts improvements so the seed value is a floor."""
    best_x, best_val = x0, func(x0)
    converged = False
    for restart in range(config.max_restarts):
        simplex = _random_simplex(best_x, step / (1 + restart), rng)
        res = minimize(
            lambda x: -func(x),
            best_x,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "maxiter": config.max_refine_iterations,
                "xatol": 1e-10,
                "fatol": config.convergence_tolerance * 1e-3,
            },
        )
        gain = -res.fun - best_val
        if gain > 0:
            best_x, best_val = np.asarray(res.x), -res.fun
        if gain <= config.convergence_tolerance:
            converged = True
            break
    return best_x, best_val, converged


def maximize_violation(decomp: Decomposition, config: OptimizerConfig | None = None) -> ViolationResult:
    """Maximize <B> over settings: coarse grid, then local refinement of the best seeds.

    The result is at least as good as every coarse-grid point; it is not
    certified to be the global maximum.
    """
    config = config or OptimizerConfig()
    decomp.check()
    func = ViolationFunctional(decomp, config.observable_mode)
    rng = np.random.default_rng(config.rng_seed)

    points = config.grid_points
    axis_settings, values = func.grid_values(points)
    grid_max = float(values.max())

    seeds = []
    for flat_idx in _top_indices(values, config.refine_seeds):
        idx = np.unravel_index(flat_idx, values.shape)
        seeds.append(np.concatenate([axis_settings[k] for k in idx]))

    step = np.pi / points
    candidates = []
    for x0 in seeds:
        x, val, ok = _refine(func, x0, step, config, rng)
        candidates.append((val, canonical_angles(x), ok))

    top = max(val for val, _, _ in candidates)
    tied = [c for c in candidates if c[0] >= top - TIE_TOL]
    val, angles, converged = min(tied, key=lambda c: tuple(c[1]))

    settings = MeasurementSettings.from_angles(angles, config.observable_mode)
    report = evaluate_eq6(decomp, settings)
    if report.b_value < grid_max - 1e-9:
        raise RuntimeError("refinement fell below the coarse grid; fast and exact evaluators disagree")
    return ViolationResult(
        b_max=report.b_value,
        optimal_settings=settings,
        report=report,
        evaluations=func.calls,
        converged=converged,
        grid_max=grid_max,
        config=config,
        label=decomp.label,
    )


def evaluate_witness(decomp: Decomposition, settings: MeasurementSettings, provenance: str = "") -> InequalityReport:
    """Evaluate <B> at hand-picked settings, tagging where they came from."""
    return replace(evaluate_eq6(decomp, settings), provenance=provenance or "user")
