import itertools

import numpy as np
import pytest

from conftest import mild_spec, simplex_grid
from twostage.baselines import (
    SaaConfig,
    dense_lp_solve,
    lshaped_solve,
    saa_solve,
)
from twostage.instances import generate_instance


class TestDenseLp:
    def test_bounded_interval(self):
        res = dense_lp_solve([1.0], bounds=[(1.0, 2.0)])
        assert res.status == "optimal"
        assert res.x == pytest.approx([1.0])
        assert res.value == pytest.approx(1.0)

    def test_two_var_vertex(self):
        res = dense_lp_solve(
            [-1.0, -1.0], a_ub=[[1.0, 1.0]], b_ub=[1.0], bounds=[(0, None)] * 2
        )
        assert res.status == "optimal"
        assert res.value == pytest.approx(-1.0)

    def test_equality_and_free_variable(self):
        # min x + theta st x in simplex, theta >= -x[0] (epigraph-style row)
        res = dense_lp_solve(
            [0.0, 0.0, 1.0],
            a_ub=[[-1.0, 0.0, -1.0]],
            b_ub=[0.0],
            a_eq=[[1.0, 1.0, 0.0]],
            b_eq=[1.0],
            bounds=[(0, None), (0, None), (None, None)],
        )
        assert res.status == "optimal"
        assert res.value == pytest.approx(-1.0)
        assert res.x[0] == pytest.approx(1.0)

    def test_infeasible(self):
        res = dense_lp_solve(
            [1.0], a_ub=[[1.0]], b_ub=[-1.0], bounds=[(0.0, None)]
        )
        assert res.status == "infeasible"

    def test_unbounded(self):
        res = dense_lp_solve([-1.0], bounds=[(0.0, None)])
        assert res.status == "unbounded"

    def test_negative_rhs_row(self):
        # -x <= -2 means x >= 2
        res = dense_lp_solve([1.0], a_ub=[[-1.0]], b_ub=[-2.0], bounds=[(0, None)])
        assert res.status == "optimal"
        assert res.x == pytest.approx([2.0])

    def test_random_lps_match_vertex_enumeration(self):
        rng = np.random.default_rng(0)
        solved = 0
        while solved < 100:
            n = int(rng.integers(2, 7))
            m = int(rng.integers(1, 6))
            a = rng.normal(size=(m, n))
            x0 = rng.uniform(0.2, 0.8, size=n)
            b = a @ x0 + rng.uniform(0.1, 1.0, size=m)
            c = rng.normal(size=n)
            ub = rng.uniform(1.0, 3.0)
            res = dense_lp_solve(c, a_ub=a, b_ub=b, bounds=[(0.0, ub)] * n)
            assert res.status == "optimal"
            brute = _enumerate_vertices(c, a, b, ub, n)
            assert res.value == pytest.approx(brute, abs=1e-8)
            # returned point is feasible
            assert np.all(res.x >= -1e-9) and np.all(res.x <= ub + 1e-9)
            assert np.all(a @ res.x <= b + 1e-8)
            solved += 1


def _enumerate_vertices(c, a, b, ub, n):
    """Brute-force optimum over all vertices of the bounded polytope."""
    m = a.shape[0]
    rows = [a[i] for i in range(m)] + [np.eye(n)[j] for j in range(n)] * 2
    rhs = list(b) + [0.0] * n + [ub] * n
    kinds = ["ub"] * m + ["lo"] * n + ["hi"] * n
    best = np.inf
    idx = list(range(len(rows)))
    for combo in itertools.combinations(idx, n):
        mat = np.array([rows[i] for i in combo])
        vec = np.array(
            [rhs[i] if kinds[i] != "lo" else 0.0 for i in combo]
        )
        if abs(np.linalg.det(mat)) < 1e-10:
            continue
        x = np.linalg.solve(mat, vec)
        if np.all(x >= -1e-9) and np.all(x <= ub + 1e-9) and np.all(a @ x <= b + 1e-9):
            best = min(best, float(c @ x))
    return best


class TestSaa:
    def test_single_deterministic_scenario_matches_grid(self):
        inst = generate_instance(mild_spec("simplex", 2, seed=20))
        inst.stds = np.full(4, 1e-12)
        cfg = SaaConfig(sample_size=1, tol=1e-9, seed=0)
        res = saa_solve(inst, cfg)
        assert res.converged
        # joint brute force over (x1, x2) simplex grids
        rng = inst.scenario_stream(0)
        batch = inst.sample_scenario_batch(rng, 1)
        scen = batch.scenario(0)
        grid = simplex_grid(2, 400)
        best = np.inf
        for x1 in grid:
            vals = _values_on_grid(scen, grid, x1)
            best = min(best, inst.f1(x1) + vals.min())
        assert res.value == pytest.approx(best, abs=1e-4)

    def test_deterministic_rerun(self):
        inst = generate_instance(mild_spec("simplex", 3, seed=21))
        cfg = SaaConfig(sample_size=50, tol=1e-8, seed=3)
        a = saa_solve(inst, cfg)
        b = saa_solve(inst, cfg)
        assert a.value == b.value
        assert np.array_equal(a.x1, b.x1)

    def test_certificate_is_optimality_gap(self):
        inst = generate_instance(mild_spec("simplex", 3, seed=22))
        cfg = SaaConfig(sample_size=40, tol=1e-8, seed=1)
        res = saa_solve(inst, cfg)
        assert res.converged and res.certificate <= 1e-8
        # compare against a fine first-stage grid on the same sample
        rng = inst.scenario_stream(1)
        batch = inst.sample_scenario_batch(rng, 40)
        grid = simplex_grid(3, 60)
        vals = []
        for x1 in grid:
            _, v, _ = batch.solve_simplex(x1, tol=1e-10)
            vals.append(inst.f1(x1) + v.mean())
        assert res.value <= min(vals) + 1e-6

    def test_ball_instance(self):
        inst = generate_instance(mild_spec("ball", 2, seed=23))
        cfg = SaaConfig(sample_size=30, tol=1e-7, seed=2)
        res = saa_solve(inst, cfg)
        assert res.converged
        assert np.linalg.norm(res.x1 - inst.stage.x0) <= 1.0 + 1e-9


def _values_on_grid(scen, ys, x1):
    const = scen.x_only_value(x1)
    lin = scen.y_linear_term(x1)
    quad = 0.5 * (ys @ scen.d) ** 2 + 0.5 * scen.lam * np.einsum("ij,ij->i", ys, ys)
    return const + quad + ys @ lin


class TestLShaped:
    def test_single_scenario_matches_saa(self):
        inst = generate_instance(mild_spec("simplex", 2, seed=24))
        rng = inst.scenario_stream(5)
        batch = inst.sample_scenario_batch(rng, 1)
        res = lshaped_solve(inst, batch, rel_gap=1e-9, max_iters=400)
        cfg = SaaConfig(sample_size=1, tol=1e-10, seed=5)
        saa = saa_solve(inst, cfg)
        assert res.upper == pytest.approx(saa.value, abs=1e-6)

    def test_bounds_are_ordered_and_monotone(self):
        inst = generate_instance(mild_spec("simplex", 4, seed=25))
        rng = inst.scenario_stream(6)
        batch = inst.sample_scenario_batch(rng, 60)
        res = lshaped_solve(inst, batch, rel_gap=0.01)
        lows = res.bounds["lower"]
        ups = res.bounds["upper"]
        assert np.all(lows <= ups + 1e-9)
        assert np.all(np.diff(lows) >= -1e-9)
        assert np.all(np.diff(ups) <= 1e-9)
        assert (res.upper - res.lower) / max(1.0, abs(res.upper)) <= 0.01

    def test_lower_bound_below_saa_optimum(self):
        inst = generate_instance(mild_spec("simplex", 3, seed=26))
        rng = inst.scenario_stream(7)
        batch = inst.sample_scenario_batch(rng, 40)
        res = lshaped_solve(inst, batch, rel_gap=0.05)
        cfg = SaaConfig(sample_size=40, tol=1e-9, seed=7)
        saa = saa_solve(inst, cfg)
        assert res.lower <= saa.value + 1e-8
        assert res.upper >= saa.value - 1e-8

    def test_master_cuts_minorize_sampled_recourse(self):
        # every aggregated master cut stays below the sampled expected
        # recourse, checked on a first-stage grid
        inst = generate_instance(mild_spec("simplex", 2, seed=28))
        rng = inst.scenario_stream(9)
        batch = inst.sample_scenario_batch(rng, 25)
        cuts = []
        x = np.array([1.0, 0.0])
        for _ in range(4):
            ys, vals, _ = batch.solve_simplex(x, tol=1e-11)
            qbar = vals.mean()
            slope = batch.grad_x_rows(ys, x).mean(axis=0)
            cuts.append((x.copy(), qbar, slope))
            x = np.array([x[1], x[0]]) if x[0] else np.array([0.5, 0.5])
        grid = simplex_grid(2, 60)
        for anchor, qbar, slope in cuts:
            for xg in grid:
                _, vals, _ = batch.solve_simplex(xg, tol=1e-11)
                assert qbar + slope @ (xg - anchor) <= vals.mean() + 1e-8

    def test_rejects_ball_instances(self):
        inst = generate_instance(mild_spec("ball", 2, seed=27))
        rng = inst.scenario_stream(8)
        batch = inst.sample_scenario_batch(rng, 5)
        with pytest.raises(ValueError):
            lshaped_solve(inst, batch)
