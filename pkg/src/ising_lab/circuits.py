"""Dense statevector simulator for layered diagonal/rotation/phase/G circuits.

Qubit k lives on bit k of the state index (little-endian), matching the spin
packing in :mod:`ising_lab.ising`: bit 0 <-> spin +1, bit 1 <-> spin -1.
Layers are applied in the order they appear in CircuitProgram.layers.
Parameters may be complex (the layer is then not unitary; amplitudes are
still the corresponding matrix-element path sums).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .ising import _sign_array

QUBIT_CAP = 24
TRACE_CAP = 12


@dataclass(frozen=True)
class DiagonalLayer:
    """Controlled-phase layer: multiplies |s> by
    exp[i alpha (sum_k kappa_k + sum_k h_k s_k + sum_(k,l) J_kl s_k s_l)]."""

    alpha: complex
    edges: tuple
    couplings: tuple
    fields: tuple
    offsets: tuple

    kind = "diagonal"


@dataclass(frozen=True)
class RotationLayer:
    """Per-site rotation U: |+> -> cos t |+> + sin t |->,
    |-> -> -sin t |+> + cos t |->."""

    thetas: tuple

    kind = "rotation"


@dataclass(frozen=True)
class PhaseLayer:
    """Per-site phase P(phi): |s> -> exp(i phi s) |s>."""

    phis: tuple

    kind = "phase"


@dataclass(frozen=True)
class GLayer:
    """Hadamard-conjugated phase gate G(t) = Had diag(1, e^{it}) Had."""

    thetas: tuple

    kind = "g"


@dataclass(frozen=True)
class CircuitProgram:
    n_qubits: int
    layers: tuple

    def __post_init__(self):
        for layer in self.layers:
            _check_layer(layer, self.n_qubits)


def _check_layer(layer, n):
    if isinstance(layer, DiagonalLayer):
        if not (len(layer.couplings) == len(layer.edges)
                and len(layer.fields) == n and len(layer.offsets) == n):
            raise ValueError("diagonal layer parameter lengths do not match")
        for a, b in layer.edges:
            if not (0 <= a < n and 0 <= b < n and a != b):
                raise ValueError(f"bad edge ({a},{b})")
    elif isinstance(layer, (RotationLayer, GLayer)):
        if len(layer.thetas) != n:
            raise ValueError("angle count does not match qubit count")
    elif isinstance(layer, PhaseLayer):
        if len(layer.phis) != n:
            raise ValueError("phase count does not match qubit count")
    else:
        raise TypeError(f"unknown layer {layer!r}")


def diagonal_layer(alpha, edges, couplings, fields=None, offsets=None, n=None):
    if n is None:
        n = len(fields)
    fields = tuple(fields) if fields is not None else (0.0,) * n
    offsets = tuple(offsets) if offsets is not None else (0.0,) * n
    return DiagonalLayer(alpha, tuple(map(tuple, edges)), tuple(couplings),
                         fields, offsets)


def plus_state(n):
    """|+_x>^{tensor n}."""
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)


def basis_state(bits, n):
    psi = np.zeros(1 << n, dtype=complex)
    psi[int(bits)] = 1.0
    return psi


# -- layer application --------------------------------------------------------

def rotation_matrix(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def phase_matrix(phi):
    return np.array([[np.exp(1j * phi), 0], [0, np.exp(-1j * phi)]],
                    dtype=complex)


def g_matrix(theta):
    e = np.exp(1j * theta)
    return 0.5 * np.array([[1 + e, 1 - e], [1 - e, 1 + e]], dtype=complex)


def j_down(theta):
    """Vertical coupling of the rotation's exponential form (theta not a
    multiple of pi/2)."""
    return -0.5 * np.log(np.tan(np.asarray(theta, dtype=complex))) - 0.25j * np.pi


def b_factor(theta):
    """Scalar B(theta) of the rotation's exponential form."""
    theta = np.asarray(theta, dtype=complex)
    return 0.5 * np.log(np.cos(theta)) + 0.5 * np.log(np.sin(theta)) + 0.25j * np.pi


def diagonal_phase_table(layer, n):
    """exp[i alpha (kappa + h.s + J.ss)] over all 2^n basis states."""
    size = 1 << n
    expo = np.full(size, sum(layer.offsets), dtype=complex)
    for k, h in enumerate(layer.fields):
        if h != 0:
            expo += h * _sign_array(k, size)
    for (a, b), J in zip(layer.edges, layer.couplings):
        if J != 0:
            expo += J * _sign_array(a, size) * _sign_array(b, size)
    return np.exp(1j * layer.alpha * expo)


def _apply_single(state, mat, site, n):
    psi = state.reshape((2,) * n)
    axis = n - 1 - site
    psi = np.tensordot(mat, psi, axes=([1], [axis]))
    return np.moveaxis(psi, 0, axis).reshape(-1)


def apply_layer(state, layer, n=None):
    if n is None:
        n = int(np.log2(len(state)))
    if isinstance(layer, DiagonalLayer):
        return state * diagonal_phase_table(layer, n)
    if isinstance(layer, PhaseLayer):
        size = 1 << n
        expo = np.zeros(size, dtype=complex)
        for k, phi in enumerate(layer.phis):
            if phi != 0:
                expo = expo + phi * _sign_array(k, size)
        return state * np.exp(1j * expo)
    if isinstance(layer, RotationLayer):
        out = state
        for k, t in enumerate(layer.thetas):
            if t != 0:
                out = _apply_single(out, rotation_matrix(t), k, n)
        return out
    if isinstance(layer, GLayer):
        out = state
        for k, t in enumerate(layer.thetas):
            out = _apply_single(out, g_matrix(t), k, n)
        return out
    raise TypeError(f"unknown layer {layer!r}")


def run_program(program, state=None):
    """Apply all layers to |+_x>^n (or the given state)."""
    n = program.n_qubits
    if n > QUBIT_CAP:
        raise ValueError(f"{n} qubits exceeds cap {QUBIT_CAP}")
    psi = plus_state(n) if state is None else np.asarray(state, dtype=complex)
    for layer in program.layers:
        psi = apply_layer(psi, layer, n)
    return psi


def amplitude(program):
    """<+_x^n| (layers) |+_x^n>."""
    psi = run_program(program)
    return complex(np.sum(psi) * 2.0 ** (-program.n_qubits / 2))


def program_unitary(program):
    n = program.n_qubits
    if n > TRACE_CAP:
        raise ValueError(f"{n} qubits exceeds trace cap {TRACE_CAP}")
    dim = 1 << n
    W = np.eye(dim, dtype=complex)
    for layer in program.layers:
        if isinstance(layer, (DiagonalLayer, PhaseLayer)):
            if isinstance(layer, DiagonalLayer):
                W = diagonal_phase_table(layer, n)[:, None] * W
            else:
                expo = np.zeros(dim, dtype=complex)
                for k, phi in enumerate(layer.phis):
                    expo = expo + phi * _sign_array(k, dim)
                W = np.exp(1j * expo)[:, None] * W
        else:
            mats = [rotation_matrix(t) if isinstance(layer, RotationLayer)
                    else g_matrix(t) for t in layer.thetas]
            for k, mat in enumerate(mats):
                M = W.reshape((2,) * n + (dim,))
                axis = n - 1 - k
                M = np.tensordot(mat, M, axes=([1], [axis]))
                W = np.moveaxis(M, 0, axis).reshape(dim, dim)
    return W


def trace_amplitude(program):
    """Tr[W] / 2^n for the program unitary W."""
    return complex(np.trace(program_unitary(program)) / (1 << program.n_qubits))


# -- measurement protocols ----------------------------------------------------

def counter_rng(seed, *key):
    """Counter-based Philox stream keyed by (seed, *key); draws are indexed
    by position in the vectorized call, so results do not depend on any
    parallel schedule."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(seed=ss))


_philox = counter_rng


@dataclass
class ProtocolRecord:
    which: int
    shots: int
    value: complex
    tallies: dict
    exact: complex


def simulate_protocol_states(phi, psi, which, shots, seed):
    """Statistics-level simulation of Protocol 1 or 2 for states phi, psi.

    Per shot, the n-1 ancilla X-basis outcomes m_j are uniform +-1; their
    product (the (-1)^chi sign) multiplies the final polarization. Tallies
    per observable are the signed +-1 sequences whose mean estimates the
    target quantity (Bernoulli variables in the sense of the error theory).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = int(np.log2(len(psi)))
    overlap = complex(np.vdot(phi, psi))
    tallies = {}
    if which == 1:
        target = abs(overlap) ** 2
        rng = _philox(seed, 1, 0)
        s = np.prod(np.where(rng.random((shots, max(n - 1, 0))) < 0.5, 1, -1),
                    axis=1).astype(int)
        x = _sign_signed(rng, shots, s * target)
        tallies["abs2"] = s * x
        value = complex(np.mean(tallies["abs2"]))
        return ProtocolRecord(1, shots, value, tallies, complex(target))
    if which == 2:
        parts = []
        for obs, part in ((0, overlap.real), (1, overlap.imag)):
            rng = _philox(seed, 2, obs)
            s = np.prod(np.where(rng.random((shots, max(n - 1, 0))) < 0.5,
                                 1, -1), axis=1).astype(int)
            x = _sign_signed(rng, shots, s * part)
            tallies["re" if obs == 0 else "im"] = s * x
            parts.append(np.mean(s * x))
        value = complex(parts[0] + 1j * parts[1])
        return ProtocolRecord(2, shots, value, tallies, overlap)
    raise ValueError("protocol must be 1 or 2")


def _sign_signed(rng, shots, mean):
    if np.isscalar(mean):
        mean = np.full(shots, mean, dtype=float)
    p_plus = np.clip((1.0 + mean) / 2.0, 0.0, 1.0)
    return np.where(rng.random(shots) < p_plus, 1, -1)


def simulate_protocol(program, which, shots, seed):
    """Protocols applied to Phi = |+_x>^n, Psi = program |+_x>^n."""
    psi = run_program(program)
    phi = plus_state(program.n_qubits)
    return simulate_protocol_states(phi, psi, which, shots, seed)


def simulate_trace_protocol(program, shots, seed):
    """Protocol 2 with register A maximally mixed: estimates Tr[W]/2^n."""
    target = trace_amplitude(program)
    tallies = {}
    parts = []
    n = program.n_qubits
    for obs, part in ((0, target.real), (1, target.imag)):
        rng = _philox(seed, 3, obs)
        s = np.prod(np.where(rng.random((shots, max(n - 1, 0))) < 0.5, 1, -1),
                    axis=1).astype(int)
        x = _sign_signed(rng, shots, s * part)
        tallies["re" if obs == 0 else "im"] = s * x
        parts.append(np.mean(s * x))
    return ProtocolRecord(2, shots, complex(parts[0] + 1j * parts[1]),
                          tallies, target)


# -- full-register validation (small n) ---------------------------------------

def _measure_x_basis(state, qubit, n, rng):
    """Measure sigma^x on one qubit; returns (outcome +-1, collapsed state)."""
    had = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    rot = _apply_single(state, had, qubit, n)
    psi = rot.reshape((2,) * n)
    axis = n - 1 - qubit
    psi = np.moveaxis(psi, axis, 0)
    p_plus = float(np.sum(np.abs(psi[0]) ** 2))
    if rng.random() < p_plus:
        outcome, branch, norm = 1, 0, np.sqrt(p_plus)
    else:
        outcome, branch, norm = -1, 1, np.sqrt(max(1 - p_plus, 1e-300))
    collapsed = np.zeros_like(psi)
    collapsed[branch] = psi[branch] / norm
    collapsed = np.moveaxis(collapsed, 0, axis).reshape(-1)
    # rotate back to the computational basis
    return outcome, _apply_single(collapsed, had, qubit, n)


def protocol1_full_register(phi, psi, shots, seed):
    """Materialized Protocol 1 on registers R(n) + A(n) + B(n); n <= 4."""
    n = int(np.log2(len(psi)))
    if n > 4:
        raise ValueError("full-register mode supports n <= 4")
    rng = _philox(seed, 11, 0)
    ghz = np.zeros(1 << n, dtype=complex)
    ghz[0] = ghz[-1] = 1 / np.sqrt(2)
    # ordering: qubits 0..n-1 = A, n..2n-1 = B, 2n..3n-1 = R
    full = np.kron(ghz, np.kron(np.asarray(phi), np.asarray(psi)))
    # controlled swap: where R bits are 1 (spin -1), swap A and B bits
    dim = 1 << (3 * n)
    mask = (1 << n) - 1
    idx = np.arange(dim)
    a = idx & mask
    b = (idx >> n) & mask
    r = idx >> (2 * n)
    nr = (~r) & mask
    swapped = (r << (2 * n)) | (((b & nr) | (a & r)) << n) | ((a & nr) | (b & r))
    full = full[swapped]
    draws = np.empty(shots, dtype=int)
    for shot in range(shots):
        state = full.copy()
        sign = 1
        for j in range(n - 1):
            m, state = _measure_x_basis(state, 2 * n + j, 3 * n, rng)
            sign *= m
        x, _ = _measure_x_basis(state, 3 * n - 1, 3 * n, rng)
        draws[shot] = sign * x
    return draws


def protocol2_full_register(phi, psi, shots, seed):
    """Materialized Protocol 2 on registers R(n) + A(n); n <= 4.

    Returns (re draws, im draws)."""
    n = int(np.log2(len(psi)))
    if n > 4:
        raise ValueError("full-register mode supports n <= 4")
    # (|+..+>_R |phi> + |-..->_R |psi>)/sqrt(2); A = qubits 0..n-1
    state0 = np.zeros(1 << (2 * n), dtype=complex)
    state0 = state0.reshape(1 << n, 1 << n)
    state0[0] += np.asarray(phi) / np.sqrt(2)
    state0[-1] += np.asarray(psi) / np.sqrt(2)
    state0 = state0.reshape(-1)
    out = []
    for obs in (0, 1):
        rng = _philox(seed, 12, obs)
        draws = np.empty(shots, dtype=int)
        sdg = np.array([[1, 0], [0, -1j]], dtype=complex)  # maps Y to X basis
        for shot in range(shots):
            state = state0.copy()
            sign = 1
            for j in range(n - 1):
                m, state = _measure_x_basis(state, n + j, 2 * n, rng)
                sign *= m
            if obs == 1:
                state = _apply_single(state, sdg, 2 * n - 1, 2 * n)
            x, _ = _measure_x_basis(state, 2 * n - 1, 2 * n, rng)
            draws[shot] = sign * x
        out.append(draws)
    return tuple(out)


# -- JSON program schema -------------------------------------------------------

def _c2j(x):
    x = complex(x)
    return [x.real, x.imag] if x.imag else x.real


def _j2c(v):
    return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else float(v)


def program_to_dict(program):
    layers = []
    for layer in program.layers:
        if isinstance(layer, DiagonalLayer):
            layers.append({"kind": "diagonal", "alpha": _c2j(layer.alpha),
                           "edges": [list(e) for e in layer.edges],
                           "couplings": [_c2j(v) for v in layer.couplings],
                           "fields": [_c2j(v) for v in layer.fields],
                           "offsets": [_c2j(v) for v in layer.offsets]})
        elif isinstance(layer, RotationLayer):
            layers.append({"kind": "rotation",
                           "thetas": [_c2j(v) for v in layer.thetas]})
        elif isinstance(layer, PhaseLayer):
            layers.append({"kind": "phase",
                           "phis": [_c2j(v) for v in layer.phis]})
        else:
            layers.append({"kind": "g",
                           "thetas": [_c2j(v) for v in layer.thetas]})
    return {"qubits": program.n_qubits, "layers": layers}


def program_from_dict(d):
    layers = []
    for ld in d["layers"]:
        kind = ld["kind"]
        if kind == "diagonal":
            layers.append(DiagonalLayer(
                _j2c(ld["alpha"]), tuple(map(tuple, ld["edges"])),
                tuple(_j2c(v) for v in ld["couplings"]),
                tuple(_j2c(v) for v in ld["fields"]),
                tuple(_j2c(v) for v in ld["offsets"])))
        elif kind == "rotation":
            layers.append(RotationLayer(tuple(_j2c(v) for v in ld["thetas"])))
        elif kind == "phase":
            layers.append(PhaseLayer(tuple(_j2c(v) for v in ld["phis"])))
        elif kind == "g":
            layers.append(GLayer(tuple(_j2c(v) for v in ld["thetas"])))
        else:
            raise ValueError(f"unknown layer kind {kind!r}")
    return CircuitProgram(int(d["qubits"]), tuple(layers))


def save_program(program, path):
    with open(path, "w") as f:
        json.dump(program_to_dict(program), f, indent=1)


def load_program(path):
    with open(path) as f:
        return program_from_dict(json.load(f))
