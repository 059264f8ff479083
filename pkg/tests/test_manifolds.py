import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hktunnel.hk import evolve, folding_hamiltonian, harmonic_hamiltonian
from hktunnel.manifolds import (
    Manifold,
    MorseParams,
    build_line_manifold,
    count_extrema,
    detect_caustics,
    evolve_manifold,
    morse_hamiltonian,
)

MORSE_DT = 5e-3


@pytest.fixture(scope="module")
def morse_evolved():
    m = build_line_manifold(9.0, -3.0, 3.0, 301)
    return evolve_manifold(morse_hamiltonian(MorseParams()), m, 18.0, MORSE_DT)


class TestLineManifold:
    def test_five_points(self):
        m = build_line_manifold(0.0, -2.0, 2.0, 5)
        assert np.array_equal(m.p, [-2, -1, 0, 1, 2]) and np.array_equal(m.q, np.zeros(5))

    def test_endpoints_only(self):
        m = build_line_manifold(9.0, -3.0, 3.0, 2)
        assert len(m) == 2 and list(m.p) == [-3.0, 3.0]

    @pytest.mark.parametrize("args", [(0.0, 1.0, -1.0, 5), (0.0, -1.0, 1.0, 1)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            build_line_manifold(*args)

    def test_parameter_must_increase(self):
        with pytest.raises(ValueError):
            Manifold(q=np.zeros(3), p=np.zeros(3), parameter=np.array([0.0, 1.0, 1.0]))


class TestEvolveManifold:
    @given(st.floats(0.3, 3.0), st.floats(0.3, 3.0))
    @settings(max_examples=15)
    def test_folding_line_becomes_parabola(self, g, tau):
        m = build_line_manifold(0.0, -2.0, 2.0, 41)
        ev = evolve_manifold(folding_hamiltonian(g), m, tau, tau / 10)
        assert np.allclose(ev.final.q, -g * tau * m.p**2, atol=1e-12)
        assert np.array_equal(ev.final.p, m.p)

    def test_time_zero_is_identity(self):
        m = build_line_manifold(9.0, -3.0, 3.0, 11)
        ev = evolve_manifold(morse_hamiltonian(), m, 0.0, MORSE_DT)
        assert np.array_equal(ev.final.q, m.q) and np.array_equal(ev.final.p, m.p)
        assert np.array_equal(ev.trajectories.M, np.broadcast_to(np.eye(2), (11, 2, 2)))

    def test_morse_manifold_is_folded(self, morse_evolved):
        # the evolved line is no longer a graph over q: q_t(p0) has turning points
        assert count_extrema(morse_evolved) >= 2

    def test_morse_unimodular(self, morse_evolved):
        assert np.max(np.abs(morse_evolved.trajectories.det_M - 1)) < 1e-9


class TestCaustics:
    @given(st.floats(0.2, 4.0), st.floats(0.2, 4.0))
    @settings(max_examples=15)
    def test_folding_single_caustic_at_origin(self, g, tau):
        m = build_line_manifold(0.0, -2.0, 2.0, 40)
        ev = evolve_manifold(folding_hamiltonian(g), m, tau, tau / 4)
        found = detect_caustics(ev)
        assert len(found) == 1 and abs(found[0]) < 1e-10

    def test_morse_two_caustics(self, morse_evolved):
        found = detect_caustics(morse_evolved)
        assert len(found) == 2
        assert found == pytest.approx([2.3313, 11.0036], abs=1e-3)

    def test_count_matches_extrema(self, morse_evolved):
        assert len(detect_caustics(morse_evolved)) == count_extrema(morse_evolved)

    def test_refinement_stable(self, morse_evolved):
        fine = evolve_manifold(morse_hamiltonian(), build_line_manifold(9.0, -3.0, 3.0, 601), 18.0, MORSE_DT)
        a, b = detect_caustics(morse_evolved), detect_caustics(fine)
        scale = max(abs(v) for v in a)
        assert np.max(np.abs(np.subtract(a, b))) < 1e-4 * scale

    def test_time_zero_unresolved(self):
        m = build_line_manifold(0.0, -2.0, 2.0, 11)
        ev = evolve_manifold(folding_hamiltonian(), m, 0.0, 0.1)
        scan = detect_caustics(ev, full_output=True)
        assert scan.positions == [] and scan.unresolved

    def test_linear_flow_has_no_caustic(self):
        # quarter period of the oscillator: M12 = sin t never changes sign on a line
        m = build_line_manifold(0.0, -1.0, 1.0, 21)
        ev = evolve_manifold(harmonic_hamiltonian(), m, 1.0, 0.01)
        assert detect_caustics(ev) == []

    def test_caustic_is_a_zero_of_m12(self, morse_evolved):
        scan = detect_caustics(morse_evolved, full_output=True)
        ham = morse_hamiltonian()
        r = evolve(ham, (np.full(2, 9.0), np.array(scan.parameters)), 18.0, MORSE_DT)
        # |dq_t/dp0| is O(10) elsewhere on the manifold
        assert np.all(np.abs(r.M[:, 0, 1]) < 1e-6)
