import json
from concurrent.futures import ThreadPoolExecutor

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from oracles import I2, frame_operator_dual
from quasiframe import duals as du
from quasiframe import frames as fr
from quasiframe.operators import make_rng


def sdp_best_dual_value(frame, unit_trace):
    """max_t s.t. every dual element minus t I is PSD, over all duals (raw-entry formulation)."""
    n, d, _ = frame.stack.shape
    fvecs = frame.stack.reshape(n, d * d)
    ds = [cp.Variable((d, d), hermitian=True) for _ in range(n)]
    t = cp.Variable()
    cons = [dj - t * np.eye(d) >> 0 for dj in ds]
    # sum_j |D_j>><<F_j| = identity superoperator, written entrywise
    stacked = cp.hstack([cp.reshape(dj, (d * d, 1), order="C") for dj in ds])
    cons.append(stacked @ fvecs.conj() == np.eye(d * d))
    if unit_trace:
        cons += [cp.real(cp.trace(dj)) == 1 for dj in ds]
    cp.Problem(cp.Maximize(t), cons).solve()
    return float(t.value)


BUILTINS = fr.builtin_frames()


@pytest.mark.parametrize("name", list(BUILTINS))
def test_canonical_matches_superoperator_oracle(name):
    frame = BUILTINS[name]
    dual = du.canonical_dual(frame)
    assert_allclose(dual.stack, frame_operator_dual(frame.stack), atol=1e-10)
    assert du.probe_residual(frame, dual) <= 1e-10


def test_canonical_examples():
    w = fr.wootters_frame(2)
    assert_allclose(du.canonical_dual(w).stack, 2 * w.stack, atol=1e-12)
    sic = fr.sic_frame_qubit()
    dual = du.canonical_dual(sic)
    for pi, dj in zip(fr.sic_projectors_qubit(), dual.stack):
        assert_allclose(dj, 3 * pi - I2, atol=1e-12)
        assert_allclose(np.linalg.eigvalsh(dj), [-1, 2], atol=1e-12)
    assert du.dual_space(sic).dimension == 0
    assert du.dual_space(sic, unit_trace=False).dimension == 0


def test_canonical_rejects_rank_deficient():
    with pytest.raises(fr.NotInformationallyComplete, match="rank 1"):
        du.canonical_dual(fr.Frame([I2 / 2, I2 / 2]))


def test_canonical_is_minimum_norm_unit_trace_dual():
    # pseudoinverse dual is unit-trace here, so the two notions coincide
    frame = fr.mub_frame(3)
    pinv = np.linalg.pinv(frame.synthesis)
    assert_allclose(du._canonical_coefficients(frame), pinv, atol=1e-12)
    # random unequal-trace POVM: minimum norm over unit-trace duals
    frame = fr.random_ic_povm(2, 6, 4)
    dual = du.canonical_dual(frame)
    assert_allclose(np.trace(dual.stack, axis1=1, axis2=2).real, 1, atol=1e-10)
    space = du.dual_space(frame)
    base = np.sum(np.abs(dual.stack) ** 2)
    rng = make_rng(3)
    for _ in range(50):
        other = space.stack_at(0.1 * rng.standard_normal(space.dimension))
        assert np.sum(np.abs(other) ** 2) >= base - 1e-12


@pytest.mark.parametrize("frame", [fr.wootters_frame(3), fr.wootters_frame(5)])
def test_tight_frame_dual_is_scaled_frame(frame):
    a, _ = fr.frame_bounds(frame)
    assert_allclose(du.canonical_dual(frame).stack, frame.stack / a, atol=1e-9)


@pytest.mark.parametrize("name", list(BUILTINS))
def test_swapped_reconstruction(name):
    frame = BUILTINS[name]
    assert du.swapped_probe_residual(frame, du.canonical_dual(frame)) <= 1e-9


def test_verify_reconstruction_examples():
    w = fr.wootters_frame(2)
    dual = du.canonical_dual(w)
    assert du.verify_reconstruction(w, dual, 100, 0).max_residual <= 1e-10
    wrong = du.canonical_dual(fr.sic_frame_qubit())
    assert du.verify_reconstruction(w, wrong, 100, 0).max_residual > 1e-3
    with pytest.raises(ValueError, match="not aligned"):
        du.verify_reconstruction(w, du.canonical_dual(fr.mub_frame(2)), 10, 0)


@pytest.mark.parametrize("frame", list(BUILTINS.values()) + [fr.random_frame(2, 7, 2), fr.random_ic_povm(3, 11, 5)])
def test_identity_reconstruction(frame):
    dual = du.canonical_dual(frame)
    traces = np.trace(frame.stack, axis1=1, axis2=2).real
    assert np.max(np.abs(np.tensordot(traces, dual.stack, axes=1) - np.eye(frame.dim))) <= 1e-10


def null_dimension_oracle(frame, unit_trace):
    # solutions X (d^2 x n) of X G = 0, optionally with trace row zero
    n, d = len(frame), frame.dim
    g = frame.synthesis
    rows = []
    for a in range(d * d):
        for c in range(d * d):
            r = np.zeros((d * d, n))
            r[a] = g[:, c]
            rows.append(r.ravel())
    if unit_trace:
        for j in range(n):
            r = np.zeros((d * d, n))
            r[0, j] = 1
            rows.append(r.ravel())
    return d * d * n - np.linalg.matrix_rank(np.array(rows))


@pytest.mark.parametrize("frame", [fr.mub_frame(2), fr.random_ic_povm(2, 5, 1), fr.random_frame(2, 7, 0), fr.random_ic_povm(3, 11, 2)])
def test_dual_space_dimension(frame):
    d, n = frame.dim, len(frame)
    full = du.dual_space(frame, unit_trace=False)
    unit = du.dual_space(frame)
    assert full.dimension == d * d * (n - d * d) == null_dimension_oracle(frame, False)
    assert unit.dimension == (d * d - 1) * (n - d * d) == null_dimension_oracle(frame, True)


def test_mub_qubit_dual_space():
    assert du.dual_space(fr.mub_frame(2), unit_trace=False).dimension == 8
    assert du.dual_space(fr.mub_frame(2)).dimension == 6


@pytest.mark.parametrize("unit_trace", [True, False])
def test_directions_are_kernel_and_orthonormal(unit_trace):
    frame = fr.random_ic_povm(2, 6, 3)
    space = du.dual_space(frame, unit_trace=unit_trace)
    dirs = space.directions
    gram = np.einsum("kjxy,ljyx->kl", dirs, dirs).real
    assert_allclose(gram, np.eye(space.dimension), atol=1e-12)
    for direction in dirs:
        recon = np.einsum("ja,jxy->axy", frame.synthesis, direction)
        assert np.max(np.abs(recon)) <= 1e-10
        if unit_trace:
            assert np.max(np.abs(np.trace(direction, axis1=1, axis2=2))) <= 1e-12
        dual = du.DualFrame(space.canonical.stack + direction, unit_trace=False)
        assert du.verify_reconstruction(frame, dual, 20, 1).max_residual <= 1e-9


def test_perturb_dual():
    frame = fr.mub_frame(2)
    space = du.dual_space(frame)
    assert np.array_equal(du.perturb_dual(space, np.zeros(space.dimension)).stack, space.canonical.stack)
    with pytest.raises(ValueError, match="expected 6"):
        du.perturb_dual(space, np.zeros(5))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_perturb_dual_properties(coeffs):
    frame = fr.mub_frame(2)
    dual = du.perturb_dual(du.dual_space(frame), coeffs)
    assert np.max(np.abs(np.trace(dual.stack, axis1=1, axis2=2).real - 1)) <= 1e-10
    assert du.probe_residual(frame, dual) <= 1e-9


def test_optimizer_unique_dual_examples():
    sic = fr.sic_frame_qubit()
    res = du.optimize_dual_negativity(sic, iters=500, step0=0.5, seed=0)
    assert res.iters == 0 and res.value <= -0.05
    assert abs(res.value + 1) <= 1e-12
    w = fr.wootters_frame(3)
    res = du.optimize_dual_negativity(w, 10)
    assert res.value == du.min_eigen_objective(du.canonical_dual(w).stack)[0]
    with pytest.raises(ValueError):
        du.optimize_dual_negativity(sic, iters=0)


@pytest.fixture(scope="module")
def mub_runs():
    frame = fr.mub_frame(2)
    return frame, {
        ut: du.optimize_dual_negativity(frame, iters=2000, step0=0.5, seed=0, unit_trace=ut) for ut in (True, False)
    }


@pytest.mark.parametrize("unit_trace", [True, False])
def test_optimizer_mub_matches_sdp(mub_runs, unit_trace):
    frame, runs = mub_runs
    res = runs[unit_trace]
    assert res.value < 0
    assert abs(res.value - sdp_best_dual_value(frame, unit_trace)) <= 1e-5
    assert np.all(np.diff(res.trace) >= 0)
    assert len(res.trace) == res.iters == 2000
    assert du.probe_residual(frame, res.best) <= 1e-9


@pytest.mark.parametrize("unit_trace", [True, False])
def test_optimizer_certificate_sanity(mub_runs, unit_trace):
    frame, runs = mub_runs
    res = runs[unit_trace]
    space = du.dual_space(frame, unit_trace=unit_trace)
    rng = make_rng(99)
    for _ in range(100):
        stack = space.stack_at(rng.standard_normal(space.dimension))
        assert np.linalg.eigvalsh(stack).min() <= res.value + 1e-6


def test_optimizer_sdp_gap_on_random_povm():
    frame = fr.random_ic_povm(2, 5, 1)
    res = du.optimize_dual_negativity(frame, iters=2000)
    ceiling = sdp_best_dual_value(frame, True)
    assert res.value <= ceiling + 1e-6
    assert res.value >= ceiling - 1e-3
    assert np.all(np.diff(res.trace) >= 0)


def test_optimizer_seed_semantics():
    frame = fr.random_frame(2, 5, 2)
    a = du.optimize_dual_negativity(frame, iters=50, seed=1)
    b = du.optimize_dual_negativity(frame, iters=50, seed=2)
    assert a.trace == b.trace
    c = du.optimize_dual_negativity(frame, iters=50, seed=1, init_scale=0.3)
    d = du.optimize_dual_negativity(frame, iters=50, seed=1, init_scale=0.3)
    assert c.trace == d.trace and np.array_equal(c.coeffs, d.coeffs)
    assert c.trace != a.trace


def test_min_eigen_objective_ties_pick_lowest_index():
    stack = np.array([np.diag([-1.0, 2.0]), np.diag([-1.0, 0.0]), np.eye(2)])
    value, j, v = du.min_eigen_objective(stack)
    assert value == -1.0 and j == 0
    assert_allclose(v, [1, 0])


def test_concurrent_eigen_evaluation_matches_sequential():
    frame = fr.random_frame(3, 12, 7)
    dual = du.canonical_dual(frame)
    from quasiframe.operators import eig_hermitian

    seq = [eig_hermitian(m) for m in dual.stack]
    with ThreadPoolExecutor(4) as pool:
        par = list(pool.map(eig_hermitian, dual.stack))
    for s, p in zip(seq, par):
        assert np.array_equal(s.eigenvalues, p.eigenvalues)
        assert np.array_equal(s.eigenvectors, p.eigenvectors)


def test_dual_json_round_trip():
    frame = fr.mub_frame(2)
    dual = du.canonical_dual(frame)
    obj = json.loads(json.dumps(dual.to_json()))
    assert obj["parent_frame_hash"] == frame.content_hash()
    again = du.DualFrame.from_json(obj)
    assert np.array_equal(again.stack, dual.stack)
    assert again.unit_trace and again.parent_hash == dual.parent_hash


def test_dual_trace_invariant():
    with pytest.raises(ValueError, match="unit trace"):
        du.DualFrame([I2, np.zeros((2, 2))])
    du.DualFrame([I2, np.zeros((2, 2))], unit_trace=False)


def test_check_dual_rejects_wrong_pair():
    with pytest.raises(ValueError, match="not a dual"):
        du.check_dual(fr.wootters_frame(2), du.canonical_dual(fr.sic_frame_qubit()))
