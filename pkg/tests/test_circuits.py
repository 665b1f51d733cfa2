import numpy as np
import pytest

from ising_lab import circuits, duality, ising


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


def random_program(n, rng, n_layers=4):
    edges = [(a, b) for a in range(n) for b in range(a + 1, n)]
    layers = []
    for _ in range(n_layers):
        kind = rng.integers(0, 4)
        if kind == 0:
            layers.append(circuits.diagonal_layer(
                rng.normal(), edges, rng.normal(size=len(edges)),
                rng.normal(size=n), rng.normal(size=n)))
        elif kind == 1:
            layers.append(circuits.RotationLayer(tuple(rng.normal(size=n))))
        elif kind == 2:
            layers.append(circuits.PhaseLayer(tuple(rng.normal(size=n))))
        else:
            layers.append(circuits.GLayer(tuple(rng.normal(size=n))))
    return circuits.CircuitProgram(n, tuple(layers))


# -- layers --------------------------------------------------------------------

def test_diagonal_alpha_zero_identity():
    psi = random_state(3, 0)
    layer = circuits.diagonal_layer(0.0, [(0, 1)], [1.0], [0, 0, 0])
    assert np.allclose(circuits.apply_layer(psi, layer, 3), psi)


def test_diagonal_single_bond_minus_phase():
    # |+-> basis state: s0 s1 = -1 so the phase is e^{-i pi/2}
    psi = circuits.basis_state(0b10, 2)  # qubit0 =+1, qubit1 = -1
    layer = circuits.diagonal_layer(np.pi / 2, [(0, 1)], [1.0], [0, 0])
    out = circuits.apply_layer(psi, layer, 2)
    assert np.allclose(out, np.exp(-1j * np.pi / 2) * psi)


def test_layers_preserve_norm():
    rng = np.random.default_rng(42)
    for seed in range(5):
        psi = random_state(3, seed + 10)
        prog = random_program(3, rng)
        out = psi
        for layer in prog.layers:
            out = circuits.apply_layer(out, layer, 3)
            assert abs(np.linalg.norm(out) - 1.0) < 1e-10


def test_rotation_theta_zero_identity():
    psi = random_state(2, 3)
    out = circuits.apply_layer(psi, circuits.RotationLayer((0.0, 0.0)), 2)
    assert np.allclose(out, psi)


def test_rotation_quarter_turn():
    # theta = pi/2 sends |+> (bit 0) to |-> (bit 1)
    psi = circuits.basis_state(0, 1)
    out = circuits.apply_layer(psi, circuits.RotationLayer((np.pi / 2,)), 1)
    assert np.allclose(out, circuits.basis_state(1, 1))


def test_rotation_exponential_form():
    for theta in (np.pi / 3, 0.4, 1.2):
        U = circuits.rotation_matrix(theta)
        Jd = circuits.j_down(theta)
        B = circuits.b_factor(theta)
        for s_in in (1, -1):
            for s_out in (1, -1):
                row = 0 if s_out == 1 else 1
                col = 0 if s_in == 1 else 1
                expected = np.exp(Jd * s_in * s_out
                                  + 1j * np.pi / 4 * (s_out - s_in) + B)
                assert abs(U[row, col] - expected) < 1e-12


def test_g_gate_is_had_conjugated_phase():
    had = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    for theta in (0.3, 1.1):
        direct = had @ np.diag([1, np.exp(1j * theta)]) @ had
        assert np.allclose(circuits.g_matrix(theta), direct, atol=1e-12)


def test_g_gate_transfer_matrix_identity():
    # G(-i log tanh(bJ)) = T(bJ) / (2 cosh bJ), entrywise to 1e-12
    for bJ in (0.3, 0.7, 1.1):
        theta = -1j * np.log(np.tanh(bJ))
        G = circuits.g_matrix(theta)
        T = np.array([[np.exp(bJ), np.exp(-bJ)], [np.exp(-bJ), np.exp(bJ)]])
        assert np.allclose(G, T / (2 * np.cosh(bJ)), atol=1e-12)


# -- amplitudes ----------------------------------------------------------------

def test_amplitude_empty_program():
    prog = circuits.CircuitProgram(3, ())
    assert circuits.amplitude(prog) == pytest.approx(1.0)


def test_amplitude_single_bond_cos():
    alpha = np.pi / 3
    prog = circuits.CircuitProgram(
        2, (circuits.diagonal_layer(alpha, [(0, 1)], [1.0], [0, 0]),))
    # 4-term sum: (1/4) sum_{s,s'} e^{i alpha s s'} = cos(alpha)
    assert circuits.amplitude(prog) == pytest.approx(np.cos(alpha), rel=1e-12)


def test_trace_identity_program():
    prog = circuits.CircuitProgram(2, ())
    assert circuits.trace_amplitude(prog) == pytest.approx(1.0)


def test_trace_single_phase():
    phi = 0.7
    prog = circuits.CircuitProgram(1, (circuits.PhaseLayer((phi,)),))
    assert circuits.trace_amplitude(prog) == pytest.approx(np.cos(phi), rel=1e-12)


def test_trace_matches_column_average():
    rng = np.random.default_rng(9)
    prog = random_program(3, rng, n_layers=5)
    # direct column-by-column evaluation of <s|W|s>
    acc = 0j
    for idx in range(8):
        psi = circuits.run_program(prog, state=circuits.basis_state(idx, 3))
        acc += psi[idx]
    assert circuits.trace_amplitude(prog) == pytest.approx(acc / 8, rel=1e-10)


# -- duality -------------------------------------------------------------------

def test_layered_amplitude_matches_enlarged_model():
    rng = np.random.default_rng(21)
    lat = ising.grid_lattice((2, 2))
    steps = []
    for _ in range(2):  # m = 3 slices, n*m = 12
        steps.append(duality.LayerStep(
            tuple(rng.normal(size=lat.n_edges)), tuple(rng.normal(size=4)),
            tuple(rng.normal(size=4)), tuple(rng.uniform(0.2, 1.2, size=4))))
    alpha = 0.8
    prog = duality.build_layered_program(4, lat.edges, steps, alpha)
    a_circuit = circuits.amplitude(prog)
    a_classical = duality.layered_amplitude_via_ising(4, lat.edges, steps, alpha)
    assert abs(a_circuit - a_classical) / abs(a_circuit) < 1e-10


def test_duality_many_random_programs():
    rng = np.random.default_rng(77)
    for trial in range(8):
        n = int(rng.integers(2, 5))
        m_layers = int(rng.integers(1, max(2, 16 // n)))
        if n * (m_layers + 1) > 16:
            m_layers = 16 // n - 1
        edges = tuple((k, k + 1) for k in range(n - 1))
        steps = tuple(duality.LayerStep(
            tuple(rng.normal(size=len(edges))), tuple(rng.normal(size=n)),
            tuple(rng.normal(size=n)), tuple(rng.uniform(0.2, 1.3, size=n)))
            for _ in range(m_layers))
        alpha = float(rng.normal())
        prog = duality.build_layered_program(n, edges, steps, alpha)
        a1 = circuits.amplitude(prog)
        a2 = duality.layered_amplitude_via_ising(n, edges, steps, alpha)
        assert abs(a1 - a2) / max(abs(a1), 1e-30) < 1e-10


# -- protocols -----------------------------------------------------------------

def test_protocol1_equal_states():
    psi = circuits.plus_state(3)
    rec = circuits.simulate_protocol_states(psi, psi, 1, 10_000, seed=5)
    assert abs(rec.value - 1.0) < 3 / np.sqrt(10_000)


def test_protocol1_orthogonal_states():
    phi = circuits.basis_state(0, 3)
    psi = circuits.basis_state(5, 3)
    rec = circuits.simulate_protocol_states(phi, psi, 1, 10_000, seed=6)
    assert abs(rec.value) < 3 / np.sqrt(10_000)


def test_protocol2_mean_converges_to_amplitude():
    rng = np.random.default_rng(31)
    prog = random_program(2, rng, n_layers=3)
    exact = circuits.amplitude(prog)
    shots = 400
    vals = [circuits.simulate_protocol(prog, 2, shots, seed) .value
            for seed in range(100)]
    mean = np.mean(vals)
    # std error of the mean for a +-1 estimator
    se = 1.0 / np.sqrt(shots * len(vals))
    assert abs(mean.real - exact.real) < 5 * se
    assert abs(mean.imag - exact.imag) < 5 * se


def test_protocol_seed_determinism():
    prog = circuits.CircuitProgram(
        2, (circuits.diagonal_layer(0.4, [(0, 1)], [1.0], [0.2, 0.1]),))
    a = circuits.simulate_protocol(prog, 2, 500, seed=9)
    b = circuits.simulate_protocol(prog, 2, 500, seed=9)
    assert np.array_equal(a.tallies["re"], b.tallies["re"])
    assert np.array_equal(a.tallies["im"], b.tallies["im"])
    c = circuits.simulate_protocol(prog, 2, 500, seed=10)
    assert not np.array_equal(a.tallies["re"], c.tallies["re"])


def test_protocol1_full_register_agrees_with_statistics_level():
    rng = np.random.default_rng(55)
    phi = random_state(2, 71)
    psi = random_state(2, 72)
    target = abs(np.vdot(phi, psi)) ** 2
    draws = circuits.protocol1_full_register(phi, psi, 3000, seed=13)
    est = np.mean(draws)
    assert abs(est - target) < 5 / np.sqrt(3000)


def test_protocol2_full_register_agrees_with_overlap():
    phi = random_state(2, 81)
    psi = random_state(2, 82)
    ov = np.vdot(phi, psi)
    re, im = circuits.protocol2_full_register(phi, psi, 3000, seed=14)
    assert abs(np.mean(re) - ov.real) < 5 / np.sqrt(3000)
    assert abs(np.mean(im) - ov.imag) < 5 / np.sqrt(3000)


def test_program_json_roundtrip(tmp_path):
    rng = np.random.default_rng(99)
    prog = random_program(3, rng, n_layers=4)
    path = tmp_path / "prog.json"
    circuits.save_program(prog, path)
    back = circuits.load_program(path)
    assert back.n_qubits == prog.n_qubits
    psi1 = circuits.run_program(prog)
    psi2 = circuits.run_program(back)
    assert np.allclose(psi1, psi2, atol=1e-12)
