import json

import numpy as np
import pytest

from bellvar.bell import MeasurementSettings, evaluate_eq6
from bellvar.optimize import (
    OptimizerConfig,
    ViolationFunctional,
    canonical_angles,
    evaluate_witness,
    maximize_violation,
)
from bellvar.qstate import (
    PHI_PLUS,
    Decomposition,
    DomainError,
    bell_decomposition,
    mems_decomposition,
    product_decomposition,
    werner_decomposition,
)

from conftest import random_mixture
from oracles import brute_force_max, mixed_table, plane_operators, pure_table

SQRT2 = np.sqrt(2)


def test_config_validation(tmp_path):
    with pytest.raises(DomainError):
        OptimizerConfig(coarse_grid_points_per_axis=2)
    with pytest.raises(DomainError):
        OptimizerConfig(refine_seeds=0)
    with pytest.raises(DomainError):
        OptimizerConfig(convergence_tolerance=0)
    with pytest.raises(DomainError):
        OptimizerConfig(observable_mode="sphere")
    assert OptimizerConfig().grid_points == 9
    assert OptimizerConfig(observable_mode="bloch").grid_points == 7

    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"refine_seeds": 4, "rng_seed": 7}))
    cfg = OptimizerConfig.from_json(path)
    assert cfg.refine_seeds == 4 and cfg.rng_seed == 7
    with pytest.raises(DomainError):
        OptimizerConfig.from_dict({"bogus": 1})


def test_fast_functional_matches_exact_evaluator(rng):
    for mode, n in (("plane", 4), ("bloch", 8)):
        for _ in range(50):
            d = random_mixture(rng)
            x = rng.uniform(0, 2 * np.pi, n)
            fast = ViolationFunctional(d, mode)(x)
            exact = evaluate_eq6(d, MeasurementSettings.from_angles(x, mode)).b_value
            assert abs(fast - exact) <= 1e-12


def test_grid_values_match_operator_tables():
    d = werner_decomposition(0.4, 0.3)
    points = 5
    _, values = ViolationFunctional(d).grid_values(points)
    ops = plane_operators(2 * np.pi * np.arange(points) / points)
    full = mixed_table(d.source.matrix, ops)
    tables = [(p, pure_table(s.amplitudes, ops)) for p, s in d.terms]
    for a, b, c, dd in np.ndindex(values.shape):
        expected = abs(full[a, b] - full[a, c]) + sum(p * abs(t[dd, b] + t[dd, c]) for p, t in tables)
        assert abs(values[a, b, c, dd] - expected) <= 1e-12


def test_tsirelson_single_term():
    res = maximize_violation(Decomposition([(1.0, PHI_PLUS)]))
    assert abs(res.b_max - 2 * SQRT2) <= 1e-6
    assert res.violated


@pytest.mark.parametrize("gamma", [0.1, 0.45, 0.8])
def test_mems_above_witness(gamma):
    res = maximize_violation(mems_decomposition(gamma))
    assert res.b_max >= 2 * np.sqrt(1 + gamma**2) - 1e-6


@pytest.mark.parametrize("x", [-0.25, -0.05, 0.0, 0.2])
def test_product_decomposition_bounded(x):
    assert maximize_violation(product_decomposition(x)).b_max <= 2 + 1e-9


def test_result_invariants():
    res = maximize_violation(werner_decomposition(0.3, 1.0))
    assert abs(res.report.b_value - res.b_max) <= 1e-12
    assert res.b_max >= res.grid_max - 1e-12
    assert res.evaluations >= 9**4
    assert all(0 <= t < 2 * np.pi for t in res.angles)
    # the stored settings reproduce the value through the exact evaluator
    again = evaluate_eq6(werner_decomposition(0.3, 1.0), MeasurementSettings.from_angles(res.angles))
    assert abs(again.b_value - res.b_max) <= 1e-12


def test_refinement_never_below_seed():
    for d in (mems_decomposition(0.3), bell_decomposition(0.1), product_decomposition(0.1)):
        for seeds in (1, 4):
            res = maximize_violation(d, OptimizerConfig(refine_seeds=seeds, max_refine_iterations=5, max_restarts=1))
            assert res.b_max >= res.grid_max - 1e-12


def test_deterministic():
    d = mems_decomposition(0.37)
    cfg = OptimizerConfig(rng_seed=3)
    first, second = maximize_violation(d, cfg), maximize_violation(d, cfg)
    assert first.b_max == second.b_max
    assert first.angles == second.angles
    assert first.evaluations == second.evaluations


def test_bloch_mode():
    res = maximize_violation(Decomposition([(1.0, PHI_PLUS)]), OptimizerConfig(observable_mode="bloch"))
    assert abs(res.b_max - 2 * SQRT2) <= 1e-6
    assert len(res.angles) == 8
    gamma = 0.3
    res = maximize_violation(mems_decomposition(gamma), OptimizerConfig(observable_mode="bloch"))
    assert res.b_max >= 2 * np.sqrt(1 + gamma**2) - 1e-6


def test_invalid_decomposition_rejected():
    with pytest.raises(DomainError):
        maximize_violation(Decomposition([(0.7, PHI_PLUS), (0.7, PHI_PLUS)]))


def test_beats_small_brute_force_grid():
    d = mems_decomposition(0.25)
    assert maximize_violation(d).b_max >= brute_force_max(d, points=17) - 1e-6


def test_canonical_angles():
    out = canonical_angles([-1e-18, 2 * np.pi, -np.pi, 7.0])
    assert np.all((out >= 0) & (out < 2 * np.pi))
    np.testing.assert_allclose(out[2:], [np.pi, 7.0 - 2 * np.pi])


def test_witness_examples():
    for x in (-0.2, 0.1, 0.25):
        for eps in (0.2, np.pi / 4, 1.2):
            s = MeasurementSettings.from_angles([np.pi / 2, np.pi / 2 - eps, -np.pi / 2 + eps, 0])
            rep = evaluate_witness(bell_decomposition(x), s, provenance="closed form")
            assert abs(rep.b_value - (8 * abs(x) * np.cos(eps) + 2 * np.sin(eps))) <= 1e-12
            assert rep.to_dict()["provenance"] == "closed form"
    for g in (0.1, 0.3, 0.9):
        eps = np.arctan(g)
        s = MeasurementSettings.from_angles([np.pi / 2, eps, -eps, 0])
        rep = evaluate_witness(werner_decomposition(g, np.pi / 4), s)
        assert abs(rep.b_value - (2 * g * np.sin(eps) + 2 * np.cos(eps))) <= 1e-12
        assert abs(rep.b_value - 2 * np.sqrt(1 + g * g)) <= 1e-12
        assert rep.violated


def test_witness_identical_b_c(rng):
    for _ in range(10):
        t = rng.uniform(0, 2 * np.pi, 3)
        rep = evaluate_witness(random_mixture(rng), MeasurementSettings.from_angles([t[0], t[1], t[1], t[2]]))
        assert rep.lhs <= 1e-15


def test_result_json():
    data = json.loads(json.dumps(maximize_violation(mems_decomposition(0.5)).to_dict()))
    assert {"b_max", "violated", "angles", "report", "evaluations", "converged", "config"} <= set(data)
    assert data["config"]["rng_seed"] == 0
