import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hktunnel import ModelParams
from hktunnel.errors import DomainTooSmallError
from hktunnel.folding import derived_scales, exact_kernel
from hktunnel.manifolds import morse_hamiltonian
from hktunnel.quantum import (
    ORACLE_SPEC,
    energy_expectation,
    exact_kernel_quadrature,
    free_gaussian_width,
    gaussian_packet,
    grid_propagate,
    position_width,
    rotation_point,
)

FREE = lambda q: 0.0 * q


def norm(psi, x):
    return float(np.sum(np.abs(psi) ** 2) * (x[1] - x[0]))


@pytest.fixture(scope="module")
def free_grid():
    return np.linspace(-60, 60, 1024, endpoint=False)


class TestKernelQuadrature:
    def test_origin(self, unit_params):
        assert exact_kernel_quadrature(0.0, unit_params).real == pytest.approx(0.355028, abs=1e-6)

    def test_agrees_with_airy_on_grid(self, unit_params):
        xs = np.linspace(-6, 6, 121)
        vals = np.array([exact_kernel_quadrature(x, unit_params) for x in xs])
        assert np.max(np.abs(vals - exact_kernel(xs, unit_params))) < 1e-8
        assert np.max(np.abs(vals.imag)) < 10 * ORACLE_SPEC.abs_tol

    @given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(0.3, 2.0), st.floats(-5, 5))
    @settings(max_examples=15)
    def test_agrees_with_airy_random_params(self, g, tau, hbar, x):
        p = ModelParams(g=g, tau=tau, hbar=hbar)
        q = x * derived_scales(p).l
        assert abs(exact_kernel_quadrature(q, p) - exact_kernel(q, p)) < 1e-8 / derived_scales(p).l

    @pytest.mark.parametrize("q", [-5.0, -1.0, 0.0, 2.5])
    def test_rotation_point_doubling(self, unit_params, q):
        a = exact_kernel_quadrature(q, unit_params)
        b = exact_kernel_quadrature(q, unit_params, P=2 * rotation_point(q, unit_params))
        assert abs(a - b) < 10 * ORACLE_SPEC.abs_tol

    @pytest.mark.parametrize("factor", [0.9, 1.1])
    @pytest.mark.parametrize("q", [-5.0, 0.0, 2.5])
    def test_ray_angle_perturbation(self, unit_params, q, factor):
        a = exact_kernel_quadrature(q, unit_params)
        b = exact_kernel_quadrature(q, unit_params, angle=factor * math.pi / 6)
        assert abs(a - b) < 10 * ORACLE_SPEC.abs_tol

    def test_rotation_point_beyond_saddles(self, unit_params):
        for q in (-9.0, -1.0, 0.0):
            assert rotation_point(q, unit_params) > math.sqrt(abs(q))

    @pytest.mark.parametrize("angle", [0.0, math.pi / 3, -0.1])
    def test_angle_outside_wedge(self, unit_params, angle):
        with pytest.raises(ValueError):
            exact_kernel_quadrature(0.0, unit_params, angle=angle)


class TestGridPropagate:
    def test_free_spreading(self, free_grid):
        psi = gaussian_packet(free_grid, 0.0, 0.5, 1.0)
        out = grid_propagate(FREE, psi, 5.0, 500, free_grid)
        assert position_width(out, free_grid) == pytest.approx(free_gaussian_width(1.0, 5.0), rel=1e-10)

    def test_free_packet_moves_with_group_velocity(self, free_grid):
        psi = gaussian_packet(free_grid, -5.0, 1.5, 1.0)
        out = grid_propagate(FREE, psi, 4.0, 400, free_grid)
        rho = np.abs(out) ** 2
        assert np.sum(rho * free_grid) / np.sum(rho) == pytest.approx(1.0, abs=1e-10)

    def test_norm_over_ten_thousand_steps(self, free_grid):
        psi = gaussian_packet(free_grid, 0.0, 0.0, 1.0)
        out = grid_propagate(FREE, psi, 4.0, 10_000, free_grid)
        assert abs(norm(out, free_grid) / norm(psi, free_grid) - 1) < 1e-12

    @given(st.floats(-3, 3), st.floats(-1, 1), st.floats(0.1, 2.0))
    @settings(max_examples=10)
    def test_norm_any_potential(self, q0, p0, t):
        x = np.linspace(-30, 30, 512, endpoint=False)
        V = lambda q: 0.5 * q**2 + 0.3 * np.cos(2 * q)
        psi = gaussian_packet(x, q0, p0, 0.8)
        out = grid_propagate(V, psi, t, 200, x)
        assert abs(norm(out, x) / norm(psi, x) - 1) < 1e-12

    def test_time_reversal(self):
        x = np.linspace(-30, 60, 2048, endpoint=False)
        V = lambda q: morse_hamiltonian().H(q, 0.0 * q)
        psi = gaussian_packet(x, 9.0, 0.3, 1.0)
        fwd = grid_propagate(V, psi, 3.0, 600, x)
        back = grid_propagate(V, fwd, -3.0, 600, x)
        assert np.max(np.abs(back - psi)) < 1e-10

    def test_morse_energy_constant(self):
        x = np.linspace(-30, 60, 4096, endpoint=False)
        V = lambda q: morse_hamiltonian().H(q, 0.0 * q)
        psi = gaussian_packet(x, 9.0, 0.0, 1.0)
        out = grid_propagate(V, psi, 1.0, 1000, x)
        e0, e1 = energy_expectation(V, psi, x), energy_expectation(V, out, x)
        assert abs(e1 / e0 - 1) < 1e-6

    def test_double_precision_mode_runs(self, free_grid):
        psi = gaussian_packet(free_grid, 0.0, 0.0, 1.0)
        out = grid_propagate(FREE, psi, 1.0, 100, free_grid, precision="double")
        assert out.dtype == np.complex128
        assert abs(norm(out, free_grid) - norm(psi, free_grid)) < 1e-13

    def test_leak_detected(self):
        x = np.linspace(-10, 10, 256, endpoint=False)
        psi = gaussian_packet(x, 0.0, 3.0, 1.0)
        with pytest.raises(DomainTooSmallError):
            grid_propagate(FREE, psi, 3.0, 300, x)

    def test_initial_leak_detected(self):
        x = np.linspace(-10, 10, 256, endpoint=False)
        with pytest.raises(DomainTooSmallError):
            grid_propagate(FREE, gaussian_packet(x, 9.5, 0.0, 1.0), 1.0, 100, x)

    @pytest.mark.parametrize(
        "kw",
        [{"steps": 99}, {"grid": np.array([0.0, 1.0, 3.0] + list(range(4, 12)))}, {"precision": "quad"}],
    )
    def test_invalid_arguments(self, free_grid, kw):
        args = {"V": FREE, "psi0": gaussian_packet(free_grid, 0, 0, 1), "t": 1.0, "steps": 100, "grid": free_grid}
        args.update(kw)
        if "grid" in kw:
            args["psi0"] = np.zeros(kw["grid"].size)
        with pytest.raises(ValueError):
            grid_propagate(**args)
