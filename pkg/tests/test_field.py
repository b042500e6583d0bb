import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qspecnoise.errors import ConfigError
from qspecnoise.field import (GridField, InitialConditionSpec, ProblemSpec, eval_reference_profile,
                              exact_solution, forward_transform, inverse_transform, make_grid,
                              make_initial_condition, random_initial_condition, sphere_coefficients, spectrum,
                              wavenumbers)


def test_make_grid_small():
    np.testing.assert_allclose(make_grid(ProblemSpec(N=4)), [0, math.pi / 2, math.pi, 3 * math.pi / 2], atol=1e-15)
    np.testing.assert_allclose(make_grid(ProblemSpec(N=2)), [0, math.pi])


def test_make_grid_default_resolution():
    x = make_grid(ProblemSpec())
    assert len(x) == 256
    assert x[0] == 0.0
    np.testing.assert_allclose(np.diff(x), 2 * math.pi / 256, rtol=0, atol=1e-14)
    assert x[-1] == pytest.approx(2 * math.pi - 2 * math.pi / 256, abs=1e-14)


@pytest.mark.parametrize("kwargs", [dict(N=3), dict(N=1), dict(N=96), dict(dt=0), dict(dt=-0.1), dict(L=0)])
def test_problem_spec_rejects_invalid(kwargs):
    with pytest.raises(ConfigError):
        ProblemSpec(**kwargs)


def test_problem_spec_qubits():
    assert ProblemSpec().n == 8
    assert ProblemSpec(N=2).n == 1


@pytest.mark.parametrize("x, expected", [(0.0, 0.6), (math.pi, -0.2), (math.pi / 2, -0.2)])
def test_reference_profile_values(x, expected):
    assert eval_reference_profile(x) == pytest.approx(expected, abs=1e-15)


def test_wavenumber_map():
    np.testing.assert_array_equal(wavenumbers(8), [0, 1, 2, 3, -4, -3, -2, -1])


def test_transform_round_trip_and_parseval(rng):
    u = rng.standard_normal(64)
    c = forward_transform(u)
    np.testing.assert_allclose(inverse_transform(c), u, atol=1e-13)
    # unitary normalization: sum |c_k|^2 = N * mean(u^2)
    assert np.sum(np.abs(c) ** 2) == pytest.approx(64 * np.mean(u ** 2), rel=1e-12)
    # real field <=> conjugate symmetry c_{-k} = conj(c_k)
    k = wavenumbers(64)
    np.testing.assert_allclose(c[(-k) % 64], c.conj(), atol=1e-13)


def test_transform_matches_dense_kernel(rng):
    N = 16
    j = np.arange(N)
    F = np.exp(2j * math.pi * np.outer(j, j) / N) / math.sqrt(N)
    u = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    np.testing.assert_allclose(forward_transform(u), F @ u, atol=1e-13)
    np.testing.assert_allclose(inverse_transform(u), F.conj().T @ u, atol=1e-13)


def _ref_field(spec=ProblemSpec()):
    return GridField(eval_reference_profile(make_grid(spec)), 0.0, spec)


def test_exact_solution_identity_and_period():
    f = _ref_field()
    np.testing.assert_allclose(exact_solution(f, 0.0).values, f.values, atol=1e-14)
    np.testing.assert_allclose(exact_solution(f, 2 * math.pi).values, f.values, atol=1e-13)


def test_exact_solution_sine_shift():
    spec = ProblemSpec()
    x = make_grid(spec)
    out = exact_solution(GridField(np.sin(x), 0.0, spec), math.pi / 2)
    np.testing.assert_allclose(out.values, -np.cos(x), atol=1e-13)
    assert out.time == pytest.approx(math.pi / 2)


@settings(max_examples=40, deadline=None)
@given(t1=st.floats(-10, 10), t2=st.floats(-10, 10), seed=st.integers(0, 2 ** 31))
def test_exact_solution_properties(t1, t2, seed):
    spec = ProblemSpec(N=64)
    f = random_initial_condition(seed, spec)
    g = exact_solution(f, t1)
    np.testing.assert_allclose(np.abs(spectrum(g).coefficients), np.abs(spectrum(f).coefficients), atol=1e-12)
    np.testing.assert_allclose(exact_solution(g, t2).values, exact_solution(f, t1 + t2).values, atol=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 7, 2024, 99991])
def test_random_ic_sphere_and_support(seed):
    base, extra, combined = sphere_coefficients(seed)
    assert np.linalg.norm(base) == pytest.approx(0.3, abs=1e-12)
    assert np.linalg.norm(extra) == pytest.approx(0.3, abs=1e-12)
    np.testing.assert_allclose(combined[:3], base[:3] + extra)
    np.testing.assert_array_equal(combined[3:], base[3:])

    f = random_initial_condition(seed, ProblemSpec())
    c = spectrum(f).coefficients
    k = np.abs(wavenumbers(256))
    assert np.max(np.abs(c[k > 4])) < 1e-12
    assert np.max(np.abs(c[k == 0])) < 1e-12
    # real field: reconstructed samples carry no imaginary part
    assert np.max(np.abs(inverse_transform(c).imag)) < 1e-12


def test_random_ic_series_layout():
    # (a_k, b_k) pairs for k = 1..4 map to cos/sin amplitudes
    spec = ProblemSpec()
    _, _, coeffs = sphere_coefficients(5)
    c = spectrum(random_initial_condition(5, spec)).coefficients
    scale = math.sqrt(spec.N) / 2
    for m in range(4):
        a, b = coeffs[2 * m], coeffs[2 * m + 1]
        # analysis kernel exp(+ikx): cos -> (c_k + c_-k), sin kx -> i(c_k - c_-k)
        assert c[m + 1] == pytest.approx(scale * (a + 1j * b), abs=1e-12)


def test_random_ic_deterministic():
    spec = ProblemSpec()
    a = random_initial_condition(42, spec).values
    b = random_initial_condition(42, spec).values
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, random_initial_condition(43, spec).values)


def test_named_initial_conditions():
    spec = ProblemSpec(N=32)
    f = make_initial_condition(InitialConditionSpec("named", "reference"), spec)
    np.testing.assert_allclose(f.values, eval_reference_profile(make_grid(spec)))
    with pytest.raises(ConfigError):
        make_initial_condition(InitialConditionSpec("named", "nope"), spec)
    with pytest.raises(ConfigError):
        make_initial_condition(InitialConditionSpec("random"), spec)


def test_grid_field_validation():
    spec = ProblemSpec(N=4)
    with pytest.raises(ConfigError):
        GridField(np.zeros(3), 0.0, spec)
    with pytest.raises(ConfigError):
        GridField(np.array([0, np.nan, 0, 0]), 0.0, spec)
