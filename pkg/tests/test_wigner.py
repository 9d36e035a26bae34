import json
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from oracles import characteristic_wigner, momentum_density, position_density, position_kernel_wigner
from quasiframe import wigner as wg

VACUUM = wg.FockState.number(0)
ONE = wg.FockState.number(1)
PLUS = wg.FockState.pure([1, 1])
FINE = wg.PhaseGrid.square(6, 201)


@pytest.mark.parametrize("m,n", [(0, 0), (1, 1), (1, 0), (0, 1), (2, 0), (3, 1), (2, 2), (5, 3)])
@pytest.mark.parametrize("q,p", [(0.0, 0.0), (0.7, -0.3), (-1.2, 0.9), (1.5, 1.1)])
def test_kernel_matches_position_quadrature(m, n, q, p):
    assert abs(wg.fock_wigner_kernel(m, n, q, p) - position_kernel_wigner(m, n, q, p)) <= 1e-10


def test_kernel_examples():
    assert abs(wg.fock_wigner_kernel(0, 0, 0, 0) - 1 / math.pi) <= 1e-15
    assert abs(wg.fock_wigner_kernel(1, 1, 0, 0) + 1 / math.pi) <= 1e-15
    assert abs(position_kernel_wigner(0, 0, 0, 0) - 1 / math.pi) <= 1e-12
    assert abs(position_kernel_wigner(1, 1, 0, 0) + 1 / math.pi) <= 1e-12
    with pytest.raises(ValueError):
        wg.fock_wigner_kernel(41, 0, 0, 0)


def test_kernel_hermitian_symmetry():
    q, p = np.meshgrid(np.linspace(-2, 2, 5), np.linspace(-2, 2, 5))
    assert np.array_equal(wg.fock_wigner_kernel(0, 1, q, p), np.conj(wg.fock_wigner_kernel(1, 0, q, p)))
    assert np.isrealobj(wg.fock_wigner_kernel(3, 3, q, p))


def test_kernel_agrees_with_bulk_terms():
    q, p = np.meshgrid(np.linspace(-3, 3, 7), np.linspace(-3, 3, 7))
    for m, n, w in wg._kernel_terms(8, q, p):
        assert_allclose(w, wg.fock_wigner_kernel(m, n, q, p), atol=1e-13)


def test_transform_examples():
    w0 = wg.wigner_transform(VACUUM, FINE)
    w1 = wg.wigner_transform(ONE, FINE)
    assert abs(w0.values[100, 100] - 1 / math.pi) <= 1e-15
    assert abs(w1.values[100, 100] + 1 / math.pi) <= 1e-15
    mix = wg.FockState(np.diag([0.5, 0.5]))
    assert_allclose(wg.wigner_transform(mix, FINE).values, (w0.values + w1.values) / 2, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1), st.integers(0, 2**31))
def test_transform_linearity(lam, seed):
    from quasiframe.operators import random_state

    a, b = random_state(4, seed).entries, random_state(4, seed + 1).entries
    grid = wg.PhaseGrid.square(4, 17)
    mix = wg.wigner_transform(lam * a + (1 - lam) * b, grid).values
    parts = lam * wg.wigner_transform(a, grid).values + (1 - lam) * wg.wigner_transform(b, grid).values
    assert np.max(np.abs(mix - parts)) <= 1e-12


def test_imaginary_residue_is_rejected():
    bad = np.array([[0.5, 0.5], [0.0, 0.5]])
    with pytest.raises(ValueError, match="imaginary residue"):
        wg.wigner_values(bad, np.linspace(-1, 1, 9), 0.3)


@pytest.mark.parametrize("state", [VACUUM, ONE, PLUS, wg.FockState([[0.5, 0.5j], [-0.5j, 0.5]])], ids=["vac", "one", "plus", "phase"])
def test_characteristic_function_cross_check(state):
    pts = [(q, p) for q in (-1.0, 0.0, 0.8) for p in (-0.6, 0.0, 1.3)]
    oracle = characteristic_wigner(state.matrix, pts)
    ours = np.array([wg.wigner_values(state, q, p) for q, p in pts])
    assert np.max(np.abs(oracle.imag)) <= 1e-9
    assert np.max(np.abs(oracle.real - ours)) <= 1e-9


def test_marginal_examples():
    grid = wg.PhaseGrid.square(4, 201)
    m = wg.marginals(wg.wigner_transform(VACUUM, grid))
    assert np.max(np.abs(m.q_density - np.exp(-grid.q**2) / math.sqrt(math.pi))) <= 1e-6
    m1 = wg.marginals(wg.wigner_transform(ONE, FINE))
    assert abs(m1.q_density[100]) <= 1e-12
    for w in (wg.wigner_transform(s, FINE) for s in (VACUUM, ONE, PLUS)):
        mq, mp = wg.marginals(w)
        assert abs(wg.density_integral(mq, FINE.q) - 1) <= 1e-6
        assert abs(wg.density_integral(mp, FINE.p) - 1) <= 1e-6


@pytest.mark.parametrize("state", [VACUUM, ONE, PLUS, wg.FockState.pure([1, 1j, 0.5])], ids=["vac", "one", "plus", "complex"])
def test_marginals_match_hermite_densities(state):
    m = wg.marginals(wg.wigner_transform(state, FINE))
    assert np.max(np.abs(m.q_density - position_density(state.matrix, FINE.q))) <= 1e-5
    assert np.max(np.abs(m.p_density - momentum_density(state.matrix, FINE.p))) <= 1e-5


@pytest.mark.parametrize("state", [wg.FockState.number(k) for k in range(5)] + [wg.FockState(np.diag([0.2, 0.3, 0.5]))])
def test_normalization(state):
    assert abs(wg.wigner_transform(state, FINE).integral() - 1) <= 1e-6


def test_reconstruction_examples():
    rec0 = wg.reconstruct_from_wigner(wg.wigner_transform(VACUUM, FINE), 0, VACUUM)
    assert rec0.max_error <= 1e-6
    rec1 = wg.reconstruct_from_wigner(wg.wigner_transform(ONE, FINE), 1, ONE)
    assert rec1.max_error <= 1e-5
    recp = wg.reconstruct_from_wigner(wg.wigner_transform(PLUS, FINE), 3, PLUS)
    assert recp.max_error <= 1e-8
    assert wg.reconstruct_from_wigner(wg.wigner_transform(VACUUM, FINE), 0).max_error is None


def test_reconstruction_refines_monotonically():
    errors = []
    for n in (9, 13, 21):
        w = wg.wigner_transform(ONE, wg.PhaseGrid.square(6, n))
        errors.append(wg.reconstruct_from_wigner(w, 1, ONE).max_error)
    assert errors[0] > errors[1] > errors[2]
    assert errors[-1] < 1e-2


def test_negative_values():
    w = wg.wigner_transform(ONE, FINE)
    assert w.values.min() < -0.3
    assert abs(w.values.min() + 1 / math.pi) <= 1e-12


def test_high_cutoff_is_stable():
    state = wg.FockState.number(40)
    grid = wg.PhaseGrid.square(14, 401)
    w = wg.wigner_transform(state, grid)
    assert np.all(np.isfinite(w.values))
    assert abs(w.integral() - 1) <= 1e-6
    with pytest.raises(ValueError, match="exceeds"):
        wg.FockState.number(41)


def test_fock_state_validation():
    with pytest.raises(ValueError, match="unit trace"):
        wg.FockState(np.eye(2))
    with pytest.raises(ValueError, match="positive semidefinite"):
        wg.FockState(np.diag([1.5, -0.5]))
    s = wg.FockState.from_json(json.loads(json.dumps(PLUS.to_json())))
    assert np.array_equal(s.matrix, PLUS.matrix) and s.cutoff == 1


def test_grid_parse_and_validation():
    g = wg.PhaseGrid.parse("-6,6,-5,5,121,101")
    assert (g.q_min, g.p_max, g.n_q, g.n_p) == (-6, 5, 121, 101)
    assert g.dq == 0.1 and g.dp == 0.1
    with pytest.raises(ValueError, match="6 comma"):
        wg.PhaseGrid.parse("1,2,3")
    with pytest.raises(ValueError, match="q_max > q_min"):
        wg.PhaseGrid(1, 0, -1, 1, 10, 10)
    with pytest.raises(ValueError, match="at least 8"):
        wg.PhaseGrid(-1, 1, -1, 1, 7, 10)
    assert wg.DEFAULT_GRID == g.square(6, 201)


def test_grid_json_and_csv():
    grid = wg.PhaseGrid(-2, 2, -1, 1, 9, 8)
    w = wg.wigner_transform(PLUS, grid)
    again = wg.WignerGrid.from_json(json.loads(json.dumps(w.to_json())))
    assert again.grid == grid and np.array_equal(again.values, w.values)
    rows = w.to_csv().strip().splitlines()
    assert rows[0] == "q,p,W" and len(rows) == 1 + 9 * 8
    q, p, val = map(float, rows[2].split(","))
    assert (q, p, val) == (grid.q[0], grid.p[1], w.values[0, 1])


def test_concurrent_evaluation_is_bit_identical():
    state = wg.FockState(np.diag([0.1, 0.2, 0.3, 0.4]))
    grid = wg.PhaseGrid.square(5, 64)
    full = wg.wigner_transform(state, grid).values
    rows = np.array_split(np.arange(grid.n_q), 4)
    with ThreadPoolExecutor(4) as pool:
        parts = list(pool.map(lambda r: wg.wigner_values(state, grid.q[r][:, None], grid.p[None, :]), rows))
    assert np.array_equal(np.vstack(parts), full)
