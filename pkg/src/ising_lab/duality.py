"""Layered circuits and their enlarged-lattice classical duals.

A layered step applies, in order, P(pi/4), a controlled-phase layer with
angle alpha, a rotation layer, and P(-pi/4).  The overlap of m-1 such steps
between |+_x> states equals a complex-coupling Ising partition function on
lattice x time-slices: the dressed rotation contributes the inter-slice
coupling J_down(theta) and the scalar B(theta) per site, the diagonal layer
contributes i*alpha*(J, h) within its slice and the offset phase.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circuits, ising


@dataclass(frozen=True)
class LayerStep:
    """Parameters of one Eq.-13 style layer on a fixed interaction graph."""

    couplings: tuple   # per-edge J_kl(t)
    fields: tuple      # per-site h_k(t)
    offsets: tuple     # per-site kappa_k(t)
    thetas: tuple      # per-site rotation angles


def uniform_steps(n_sites, n_edges, m_layers, J=1.0, h=0.0, theta=0.3):
    return tuple(LayerStep((J,) * n_edges, (h,) * n_sites, (0.0,) * n_sites,
                           (theta,) * n_sites)
                 for _ in range(m_layers))


def build_layered_program(n, edges, steps, alpha, with_phase_gates=True):
    """CircuitProgram for prod_t P(-pi/4) U(t) C^alpha(t) P(pi/4)."""
    layers = []
    quarter = (np.pi / 4,) * n
    for step in steps:
        if with_phase_gates:
            layers.append(circuits.PhaseLayer(quarter))
        layers.append(circuits.diagonal_layer(alpha, edges, step.couplings,
                                              step.fields, step.offsets))
        layers.append(circuits.RotationLayer(step.thetas))
        if with_phase_gates:
            layers.append(circuits.PhaseLayer(tuple(-p for p in quarter)))
    return circuits.CircuitProgram(n, tuple(layers))


def enlarged_ising_model(n, edges, steps, alpha):
    """Dual classical model of the layered program plus its scalar prefactor.

    Returns (model, prefactor) with sites (k, t) -> t*n + k over m = len(steps)+1
    slices, such that
        amplitude(program) = prefactor * 2^-n * Z(model, beta=1).
    """
    m = len(steps) + 1
    sites = n * m
    edge_list, J_list = [], []
    h = np.zeros(sites, dtype=complex)
    prefactor = 1.0 + 0j
    for t, step in enumerate(steps):
        base = t * n
        for (a, b), J in zip(edges, step.couplings):
            edge_list.append((base + a, base + b))
            J_list.append(1j * alpha * J)
        for k, hk in enumerate(step.fields):
            h[base + k] += 1j * alpha * hk
        prefactor *= np.exp(1j * alpha * sum(step.offsets))
        for k, theta in enumerate(step.thetas):
            edge_list.append((base + k, base + n + k))
            J_list.append(complex(circuits.j_down(theta)))
            prefactor *= np.exp(complex(circuits.b_factor(theta)))
    lat = ising.irregular_lattice(sites, edge_list)
    model = ising.IsingModel(lat, np.asarray(J_list, dtype=complex), h)
    return model, complex(prefactor)


def layered_amplitude_via_ising(n, edges, steps, alpha):
    """2^-n * prefactor * Z of the enlarged model (the classical route)."""
    model, prefactor = enlarged_ising_model(n, edges, steps, alpha)
    z = ising.partition_function(model, 1.0)
    return prefactor * z / (1 << n)


# -- disordered variant with G gates (three reconstruction angles) ------------

@dataclass(frozen=True)
class DisorderedSlices:
    """An n-site chain evolved for m slices with +-1 in-slice couplings and
    {-1,0,1} fields; inter-slice bonds carry signs in {+1,-1} choosing which
    of the two G angles (theta_plus / theta_minus) dresses them."""

    n: int
    edges: tuple            # in-slice interaction graph
    slice_couplings: tuple  # (m, n_edges) of +-1
    slice_fields: tuple     # (m, n) in {-1,0,1}
    bond_signs: tuple       # (m-1, n) of +-1

    @property
    def m(self):
        return len(self.slice_couplings)


def random_disordered(n, m, rng, field=1.0):
    lat_edges = tuple((k, k + 1) for k in range(n - 1))
    J = tuple(tuple(rng.choice([-1.0, 1.0], size=len(lat_edges)))
              for _ in range(m))
    h = tuple((field,) * n for _ in range(m))
    signs = tuple(tuple(rng.choice([-1.0, 1.0], size=n)) for _ in range(m - 1))
    return DisorderedSlices(n, lat_edges, J, h, signs)


def disordered_program(spec, alpha, theta_plus, theta_minus):
    """Circuit whose amplitude is the three-angle function A(alpha, t+, t-)."""
    layers = []
    for t in range(spec.m):
        layers.append(circuits.diagonal_layer(
            alpha, spec.edges, spec.slice_couplings[t], spec.slice_fields[t],
            (0.0,) * spec.n))
        if t < spec.m - 1:
            thetas = tuple(theta_plus if s > 0 else theta_minus
                           for s in spec.bond_signs[t])
            layers.append(circuits.GLayer(thetas))
    return circuits.CircuitProgram(spec.n, tuple(layers))


def disordered_classical_model(spec):
    """The real (d+1)-dimensional model the disordered circuit encodes."""
    m, n = spec.m, spec.n
    edge_list, J_list = [], []
    h = np.zeros(n * m)
    for t in range(m):
        base = t * n
        for (a, b), J in zip(spec.edges, spec.slice_couplings[t]):
            edge_list.append((base + a, base + b))
            J_list.append(float(J))
        for k, hk in enumerate(spec.slice_fields[t]):
            h[base + k] = float(hk)
        if t < m - 1:
            for k, s in enumerate(spec.bond_signs[t]):
                edge_list.append((base + k, base + n + k))
                J_list.append(float(s))
    lat = ising.irregular_lattice(n * m, edge_list)
    return ising.IsingModel(lat, np.asarray(J_list), h)


def disordered_counts(spec):
    """(N1, N2_plus, N2_minus): the alpha frequency bound and the counts of
    ferromagnetic / antiferromagnetic inter-slice bonds."""
    n1 = int(sum(np.sum(np.abs(c)) for c in spec.slice_couplings)
             + sum(np.sum(np.abs(f)) for f in spec.slice_fields))
    flat = np.concatenate([np.asarray(s) for s in spec.bond_signs]) \
        if spec.m > 1 else np.zeros(0)
    return n1, int(np.sum(flat > 0)), int(np.sum(flat < 0))
