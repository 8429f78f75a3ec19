import math

import numpy as np
import pytest

from somtissue.errors import ConfigError, InputError
from somtissue.tissue import (Schedule, TissueMap, export_grid, find_bmu, grid_csv,
                              init_grid, schedule_params, train_step)
from reference import bmu_scan

# init_grid(4, 4, 3, seed=42): numpy default_rng(42).random((4, 4, 3)), recorded once
GOLDEN_4x4x3 = [
    [[0.7739560485559633, 0.4388784397520523, 0.8585979199113825],
     [0.6973680290593639, 0.09417734788764953, 0.9756223516367559],
     [0.761139701990353, 0.7860643052769538, 0.12811363267554587],
     [0.45038593789556713, 0.37079802423258124, 0.9267649888486018]],
    [[0.6438651200806645, 0.82276161327083, 0.44341419882733113],
     [0.2272387217847769, 0.5545847870158348, 0.06381725610417532],
     [0.8276311719925821, 0.6316643991220648, 0.7580877400853738],
     [0.35452596812986836, 0.9706980243949033, 0.8931211213221977]],
    [[0.7783834970737619, 0.19463870785196757, 0.4667210037270342],
     [0.04380376578722878, 0.15428949206754783, 0.6830489532424546],
     [0.7447621559078171, 0.96750973243421, 0.32582535813815194],
     [0.3704597060348689, 0.4695558112758079, 0.1894713590842857]],
    [[0.12992150533547164, 0.47570492622593374, 0.2269093490508841],
     [0.6698139946825103, 0.43715191887233074, 0.8326781960578374],
     [0.7002651020022491, 0.31236664138204107, 0.8322598013952011],
     [0.8047643574968019, 0.38747837903017446, 0.2883281039302441]],
]


def test_minimal_grid():
    g = init_grid(1, 1, 2, seed=7)
    cells = list(g.cells())
    assert len(cells) == 1 and cells[0].coord == (0, 0)
    assert len(cells[0].weights) == 2
    assert all(0.0 <= w <= 1.0 for w in cells[0].weights)
    assert g.step == 0 and cells[0].hit_count == 0 and cells[0].last_hit_step is None


def test_init_is_deterministic():
    a = init_grid(5, 3, 4, seed=11)
    b = init_grid(5, 3, 4, seed=11)
    assert a.weights.tobytes() == b.weights.tobytes()
    assert init_grid(5, 3, 4, seed=12).weights.tobytes() != a.weights.tobytes()


def test_init_golden_snapshot():
    g = init_grid(4, 4, 3, seed=42)
    assert g.weights.tolist() == GOLDEN_4x4x3
    assert len(list(g.cells())) == 16


@pytest.mark.parametrize("args", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (-2, 3, 3)])
def test_init_rejects_bad_dims(args):
    with pytest.raises(ConfigError):
        init_grid(*args)


@pytest.mark.parametrize("kw", [
    dict(alpha0=0.5, alpha_min=0.6),
    dict(alpha0=1.5),
    dict(alpha_min=0.0),
    dict(sigma0=0.5, sigma_min=1.0),
    dict(sigma_min=0.0),
    dict(tau=0.0),
    dict(tau=float("nan")),
])
def test_schedule_validation(kw):
    with pytest.raises(ConfigError):
        Schedule(**kw)


def test_find_bmu_exact_cell():
    g = init_grid(4, 3, 3, seed=1)
    x = g.weights[1, 2].copy()
    assert find_bmu(g, x) == ((1, 2), 0.0)


def test_find_bmu_single_cell():
    g = init_grid(1, 1, 2, seed=3)
    x = [0.2, 0.9]
    coord, d = find_bmu(g, x)
    assert coord == (0, 0)
    assert d == pytest.approx(math.dist(x, g.weights[0, 0]), abs=1e-15)


def test_find_bmu_matches_scan_on_golden_grid():
    g = init_grid(4, 4, 3, seed=42)
    x = [0.5, 0.5, 0.5]
    assert find_bmu(g, x) == bmu_scan(GOLDEN_4x4x3, x)


def test_find_bmu_tie_breaks_row_major():
    w = np.full((2, 3, 2), 0.5)
    g = TissueMap(width=3, height=2, weights=w)
    assert find_bmu(g, [0.1, 0.1])[0] == (0, 0)
    w2 = np.zeros((2, 2, 1))
    w2[0, 1] = w2[1, 0] = 1.0  # two cells equidistant from 0.5 with (0,0),(1,1) at 0
    g2 = TissueMap(width=2, height=2, weights=w2)
    assert find_bmu(g2, [0.5])[0] == (0, 0)


def test_find_bmu_dimension_mismatch():
    g = init_grid(2, 2, 3, seed=0)
    with pytest.raises(InputError):
        find_bmu(g, [0.1, 0.2])
    with pytest.raises(InputError):
        find_bmu(g, [0.1, float("nan"), 0.2])


def test_schedule_params():
    s = Schedule(alpha0=0.8, alpha_min=0.05, sigma0=4.0, sigma_min=0.5, tau=1000.0)
    g = init_grid(2, 2, 1, s, seed=0)
    assert schedule_params(g) == (0.8, 4.0)
    g.step = 1000
    a, sg = schedule_params(g)
    assert a == pytest.approx(max(0.05, 0.8 / math.e), rel=1e-15)
    assert sg == pytest.approx(max(0.5, 4.0 / math.e), rel=1e-15)
    g.step = 10**9
    assert schedule_params(g) == (0.05, 0.5)


def test_schedule_floor_reached_midway():
    s = Schedule(alpha0=0.5, alpha_min=0.3, sigma0=2.0, sigma_min=1.5, tau=10.0)
    g = init_grid(1, 1, 1, s, seed=0)
    g.step = 10
    assert schedule_params(g) == (0.3, 1.5)


def test_full_step_collapse():
    s = Schedule(alpha0=1.0, alpha_min=1.0, sigma0=1e-6, sigma_min=1e-6, tau=1.0)
    g = init_grid(4, 4, 3, s, seed=5)
    before = g.weights.copy()
    x = np.array([0.25, 0.5, 0.75])
    rep = train_step(g, x, 1.0)
    r, c = rep.bmu
    assert np.max(np.abs(g.weights[r, c] - x)) <= 1e-12
    mask = np.ones((4, 4), bool)
    mask[r, c] = False
    assert np.max(np.abs(g.weights[mask] - before[mask])) <= 1e-12


def test_zero_multiplier_freezes_weights():
    g = init_grid(3, 3, 2, seed=9)
    before = g.weights.copy()
    rep = train_step(g, [0.9, 0.1], 0.0)
    assert g.weights.tobytes() == before.tobytes()
    assert rep.growth_magnitude == 0.0 and rep.alpha_eff == 0.0
    assert g.hit_count[rep.bmu] == 1 and g.step == 1


def test_closed_form_two_cell_update():
    # a = 0.5, sigma = 1; cells (0,0)=(0,0) and (0,1)=(1,1); x = (1,0)
    # both cells sit at distance 1 so the row-major tie-break picks (0,0).
    # Expected values from an mpmath evaluation at 40 digits:
    #   w(0,0) = (0.5, 0.0)
    #   w(0,1) = (1.0, 1 - 0.5*exp(-0.5)) = (1.0, 0.6967346701436833)
    #   growth = sqrt(0.25 + (0.5*exp(-0.5))**2) = 0.5847818912148876
    s = Schedule(alpha0=0.5, alpha_min=0.5, sigma0=1.0, sigma_min=1.0, tau=1.0)
    g = TissueMap(width=2, height=1, weights=np.array([[[0.0, 0.0], [1.0, 1.0]]]), schedule=s)
    rep = train_step(g, [1.0, 0.0], 1.0)
    assert rep.bmu == (0, 0) and rep.bmu_distance == 1.0
    assert rep.alpha_eff == 0.5 and rep.sigma_eff == 1.0
    assert g.weights[0, 0].tolist() == pytest.approx([0.5, 0.0], abs=1e-15)
    assert g.weights[0, 1].tolist() == pytest.approx([1.0, 0.6967346701436833], abs=1e-15)
    assert rep.growth_magnitude == pytest.approx(0.5847818912148876, abs=1e-15)
    assert g.cumulative_growth[0, 0] == pytest.approx(0.5, abs=1e-15)


def test_multiplier_clamps_rate_to_one():
    s = Schedule(alpha0=0.5, alpha_min=0.5, sigma0=1.0, sigma_min=1.0, tau=1.0)
    g = init_grid(2, 2, 2, s, seed=0)
    rep = train_step(g, [0.3, 0.3], 10.0)
    assert rep.alpha_eff == 1.0
    assert g.weights[rep.bmu].tolist() == [0.3, 0.3]


def test_train_step_rejects_negative_multiplier():
    g = init_grid(2, 2, 2, seed=0)
    with pytest.raises(InputError):
        train_step(g, [0.1, 0.2], -1.0)


def test_export_grid_rows():
    g = init_grid(1, 1, 2, seed=0)
    rows = export_grid(g)
    assert len(rows) == 1 and rows[0]["hit_count"] == 0 and rows[0]["last_hit_step"] == "never"
    g = init_grid(3, 2, 2, seed=1)
    assert all(r["hit_count"] == 0 for r in export_grid(g))
    rng = np.random.default_rng(0)
    for _ in range(37):
        train_step(g, rng.random(2))
    rows = export_grid(g)
    assert sum(r["hit_count"] for r in rows) == 37
    assert [(r["row"], r["col"]) for r in rows] == [(r, c) for r in range(2) for c in range(3)]


def test_grid_csv_header_and_round_trip():
    g = init_grid(2, 2, 3, seed=4)
    train_step(g, [0.1, 0.2, 0.3])
    lines = grid_csv(g).splitlines()
    assert lines[0] == "row,col,w0,w1,w2,hit_count,last_hit_step,cumulative_growth"
    assert len(lines) == 5
    first = lines[1].split(",")
    assert float(first[2]) == g.weights[0, 0, 0]


def test_hit_and_growth_statistics_never_decrease():
    g = init_grid(3, 3, 2, seed=2)
    rng = np.random.default_rng(1)
    prev_h, prev_g = g.hit_count.copy(), g.cumulative_growth.copy()
    for _ in range(50):
        train_step(g, rng.random(2), float(rng.uniform(0, 3)))
        assert np.all(g.hit_count >= prev_h) and np.all(g.cumulative_growth >= prev_g)
        prev_h, prev_g = g.hit_count.copy(), g.cumulative_growth.copy()
