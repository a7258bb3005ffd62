import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rdmfix.errors import DimensionError, DomainError, NumericalError
from rdmfix.specproj import (
    project_psd,
    project_psd_trace,
    project_simplex,
    shift_function,
    shift_root,
    spectrum,
    symmetrize,
    zero_and_shift,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
eigvecs = arrays(np.float64, st.integers(1, 12), elements=finite)
targets = st.floats(0, 50, allow_nan=False)


def sym_matrices(max_n=6):
    return st.integers(1, max_n).flatmap(lambda n: arrays(np.float64, (n, n), elements=finite)).map(
        lambda a: 0.5 * (a + a.T)
    )


def active_set_oracle(m, trace):
    """Try every number of kept eigenvalues; keep the feasible candidate closest to m."""
    lam, u = np.linalg.eigh(0.5 * (m + m.T))
    lam, u = lam[::-1], u[:, ::-1]
    best = None
    for k in range(1, lam.size + 1):
        sigma = (lam[:k].sum() - trace) / k
        y = np.zeros_like(lam)
        y[:k] = lam[:k] - sigma
        if y.min() < -1e-12:
            continue
        cand = (u * y) @ u.T
        d = np.linalg.norm(cand - m)
        if best is None or d < best[0]:
            best = (d, cand)
    return best[1]


def simplex_oracle(v, total):
    """Sort-based projection onto the scaled simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0)


# ------------------------------------------------------------- symmetrize / spectrum


def test_symmetrize_examples():
    assert np.array_equal(symmetrize([[1, 2], [0, 1]]), [[1, 1], [1, 1]])
    assert np.array_equal(symmetrize([[0, 4], [2, 0]]), [[0, 3], [3, 0]])
    m = np.array([[1.0, 2.0], [2.0, 5.0]])
    assert np.array_equal(symmetrize(m), m)


def test_symmetrize_rejects_non_square():
    with pytest.raises(DimensionError):
        symmetrize(np.zeros((2, 3)))


def test_spectrum_rejects_nan():
    with pytest.raises(NumericalError):
        spectrum(np.array([[np.nan, 0], [0, 1]]))


@given(sym_matrices(8))
def test_spectrum_descending_and_reconstructs(m):
    spec = spectrum(m)
    assert np.all(np.diff(spec.eigenvalues) <= 0)
    scale = max(1.0, np.linalg.norm(m))
    assert np.linalg.norm(spec.rebuild() - m) <= 1e-12 * scale * m.shape[0]
    u = spec.eigenvectors
    assert np.allclose(u.T @ u, np.eye(m.shape[0]), atol=1e-12)


# ------------------------------------------------------------- shift root


@pytest.mark.parametrize(
    "eigs, trace, sigma, shifted",
    [([2, -1], 1, 1.0, [1, 0]), ([1], 1, 0.0, [1]), ([2, 2], 2, 1.0, [1, 1])],
)
@pytest.mark.parametrize("solver", [shift_root, zero_and_shift])
def test_shift_examples(solver, eigs, trace, sigma, shifted):
    res = solver(eigs, trace)
    assert res.sigma0 == pytest.approx(sigma, abs=1e-12)
    assert np.allclose(res.shifted_eigenvalues, shifted, atol=1e-12)


def test_shift_zero_trace():
    res = shift_root([3.0, -1.0, 0.5], 0.0)
    assert res.sigma0 == 3.0
    assert np.all(res.shifted_eigenvalues == 0)


def test_shift_negative_trace_rejected():
    with pytest.raises(DomainError):
        shift_root([1.0], -1.0)
    with pytest.raises(DomainError):
        project_psd_trace(np.eye(2), -0.5)


def test_shift_empty_rejected():
    with pytest.raises(DimensionError):
        shift_root([], 1.0)


@given(eigvecs, targets)
def test_shift_root_solves_f(lam, trace):
    res = shift_root(lam, trace)
    assert abs(shift_function(lam, res.sigma0) - trace) <= 1e-12 * max(1.0, trace) * max(1, lam.size)
    assert np.all(res.shifted_eigenvalues >= 0)
    assert res.shifted_eigenvalues.sum() == pytest.approx(trace, abs=1e-11 * max(1.0, trace))


@given(eigvecs, st.lists(st.floats(-30, 30), min_size=2, max_size=20))
def test_shift_function_nonincreasing(lam, sigmas):
    s = np.sort(sigmas)
    f = shift_function(lam, s)
    assert np.all(np.diff(f) <= 1e-12)


@given(eigvecs, targets)
def test_zero_and_shift_matches_bisection(lam, trace):
    a = shift_root(lam, trace).shifted_eigenvalues
    b = zero_and_shift(lam, trace).shifted_eigenvalues
    assert np.linalg.norm(a - b) <= 1e-8 * max(1.0, trace)


def test_zero_and_shift_when_trace_must_grow():
    # clipping first would drop the negative eigenvalue that the optimum keeps
    res = zero_and_shift([0.5, -0.1], 2.0)
    assert np.allclose(res.shifted_eigenvalues, [1.3, 0.7])


# ------------------------------------------------------------- projections


def test_project_examples():
    assert np.allclose(project_psd_trace(np.diag([2.0, -1.0]), 1.0), np.diag([1.0, 0.0]))
    m = np.diag([0.6, 0.4])
    assert np.allclose(project_psd_trace(m, 1.0), m, atol=1e-14)
    out = project_psd_trace(np.array([[0.0, 1.0], [1.0, 0.0]]), 1.0)
    assert np.allclose(out, 0.5 * np.ones((2, 2)), atol=1e-14)


def test_zero_trace_gives_zero_matrix():
    assert np.array_equal(project_psd_trace(np.eye(3), 0.0), np.zeros((3, 3)))


def test_unknown_strategy():
    with pytest.raises(ValueError):
        project_psd_trace(np.eye(2), 1.0, strategy="newton")


@given(sym_matrices(6), targets)
def test_projection_matches_active_set_oracle(m, trace):
    out = project_psd_trace(m, trace)
    ref = active_set_oracle(m, trace)
    assert np.linalg.norm(out - ref) <= 1e-8 * max(1.0, trace, np.linalg.norm(m))


@given(sym_matrices(6), targets, st.sampled_from(["bisection", "zero_and_shift"]))
def test_projection_feasible_and_idempotent(m, trace, strategy):
    out = project_psd_trace(m, trace, strategy)
    scale = max(1.0, np.linalg.norm(m), trace)
    assert np.array_equal(out, out.T)
    assert np.linalg.eigvalsh(out)[0] >= -1e-12 * scale
    assert np.trace(out) == pytest.approx(trace, abs=1e-10 * scale)
    again = project_psd_trace(out, trace, strategy)
    assert np.linalg.norm(again - out) <= 1e-12 * scale * m.shape[0]


@given(sym_matrices(6), targets)
def test_projection_commutes_with_input(m, trace):
    out = project_psd_trace(m, trace)
    comm = out @ m - m @ out
    assert np.linalg.norm(comm) <= 1e-10 * max(1.0, np.linalg.norm(m)) ** 2


@given(sym_matrices(6), targets)
def test_strategies_agree(m, trace):
    a = project_psd_trace(m, trace, "bisection")
    b = project_psd_trace(m, trace, "zero_and_shift")
    assert np.linalg.norm(a - b) <= 1e-8 * max(1.0, trace)


@given(sym_matrices(6))
def test_higham_no_closer_psd_matrix(m):
    out = project_psd(m)
    assert np.linalg.eigvalsh(out)[0] >= -1e-12 * max(1.0, np.linalg.norm(m))
    d = np.linalg.norm(out - m)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.normal(size=m.shape)
        cand = project_psd(out + 0.1 * (x + x.T))
        assert np.linalg.norm(cand - m) >= d - 1e-10


def test_projection_matches_sdp_solver():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(3)
    for _ in range(4):
        a = rng.normal(size=(5, 5))
        m = 0.5 * (a + a.T)
        trace = float(rng.uniform(0.1, 5))
        x = cp.Variable((5, 5), symmetric=True)
        prob = cp.Problem(cp.Minimize(cp.sum_squares(x - m)), [x >> 0, cp.trace(x) == trace])
        prob.solve(solver=cp.CLARABEL)
        assert np.linalg.norm(project_psd_trace(m, trace) - x.value) <= 1e-5


# ------------------------------------------------------------- simplex


@given(arrays(np.float64, st.integers(1, 15), elements=finite), st.floats(0.01, 20))
def test_simplex_matches_sort_oracle(v, total):
    out = project_simplex(v, total)
    assert np.allclose(out, simplex_oracle(v, total), atol=1e-9 * max(1.0, total))
    assert out.min() >= 0
    assert out.sum() == pytest.approx(total, abs=1e-10 * max(1.0, total))
