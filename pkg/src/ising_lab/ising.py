"""Classical Ising models: exact energies, partition functions, conditionals.

Conventions (normative for the whole package):
    H(s) = -sum_i h_i s_i - sum_{(i,j)} J_ij s_i s_j,   s_i in {-1,+1}
    Z(beta) = sum_s exp(-beta * H(s))
Spin packing: site i lives on bit i of an integer index (little-endian),
bit value 0 means s_i = +1 and bit value 1 means s_i = -1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

ENUM_CAP = 26
TRANSFER_CAP = 12
_CHUNK = 1 << 20


class SizeCapError(ValueError):
    """Model too large for the requested exact method."""


@dataclass(frozen=True)
class Lattice:
    """Vertex set with an edge list and an optional grid geometry tag."""

    n_sites: int
    edges: tuple
    dims: tuple | None = None
    periodic: tuple | None = None

    def __post_init__(self):
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop at site {a}")
            if not (0 <= a < self.n_sites and 0 <= b < self.n_sites):
                raise ValueError(f"edge ({a},{b}) out of range")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def is_grid(self):
        return self.dims is not None


def grid_edges(dims, periodic):
    """Canonical edge order for a grid: row-major site loop, axis loop inside.

    Returns a list of (i, j, axis). Periodic wraps are skipped when they would
    duplicate an open edge (extent 2) or form a self-loop (extent 1).
    """
    dims = tuple(int(d) for d in dims)
    periodic = tuple(bool(p) for p in periodic)
    strides = np.ones(len(dims), dtype=int)
    for a in range(len(dims) - 2, -1, -1):
        strides[a] = strides[a + 1] * dims[a + 1]
    edges = []
    for site in range(int(np.prod(dims))):
        coord = [(site // strides[a]) % dims[a] for a in range(len(dims))]
        for a in range(len(dims)):
            if coord[a] + 1 < dims[a]:
                edges.append((site, site + strides[a], a))
            elif periodic[a] and dims[a] > 2:
                edges.append((site, site - (dims[a] - 1) * strides[a], a))
    return edges


def grid_lattice(dims, periodic=None):
    dims = tuple(int(d) for d in dims)
    if periodic is None:
        periodic = (False,) * len(dims)
    periodic = tuple(bool(p) for p in periodic)
    edges = tuple((i, j) for i, j, _ in grid_edges(dims, periodic))
    return Lattice(int(np.prod(dims)), edges, dims=dims, periodic=periodic)


def irregular_lattice(n_sites, edges):
    return Lattice(int(n_sites), tuple(tuple(e) for e in edges))


@dataclass(frozen=True)
class IsingModel:
    """Couplings J per edge and fields h per site on a lattice."""

    lattice: Lattice
    couplings: np.ndarray
    fields: np.ndarray

    def __post_init__(self):
        J = np.asarray(self.couplings)
        h = np.asarray(self.fields)
        if J.shape != (self.lattice.n_edges,):
            raise ValueError("coupling count does not match edge count")
        if h.shape != (self.lattice.n_sites,):
            raise ValueError("field count does not match site count")
        object.__setattr__(self, "couplings", J)
        object.__setattr__(self, "fields", h)

    @property
    def n_sites(self):
        return self.lattice.n_sites


def make_model(lattice, couplings, fields=None):
    J = np.asarray(couplings)
    if J.ndim == 0:
        J = np.full(lattice.n_edges, complex(J) if np.iscomplexobj(J) else float(J))
    if fields is None:
        fields = np.zeros(lattice.n_sites)
    h = np.asarray(fields)
    if h.ndim == 0:
        h = np.full(lattice.n_sites, complex(h) if np.iscomplexobj(h) else float(h))
    return IsingModel(lattice, J, h)


# -- configurations ----------------------------------------------------------

def unpack_config(index, n_sites):
    """Packed index -> array of spins in {-1,+1} (bit 0 <-> +1)."""
    bits = (int(index) >> np.arange(n_sites)) & 1
    return 1 - 2 * bits


def pack_config(spins):
    bits = (1 - np.asarray(spins, dtype=int)) // 2
    return int(np.sum(bits << np.arange(len(bits))))


def spin_table(n_sites, start, count):
    """(count, n_sites) array of +-1 spins for packed indices start..start+count."""
    idx = np.arange(start, start + count, dtype=np.int64)
    return 1 - 2 * ((idx[:, None] >> np.arange(n_sites)[None, :]) & 1)


def energy(model, config):
    """H(s) for one configuration (array of +-1 or packed int)."""
    if np.isscalar(config):
        config = unpack_config(config, model.n_sites)
    s = np.asarray(config)
    if s.shape != (model.n_sites,):
        raise ValueError("configuration length does not match model")
    e = -np.dot(model.fields, s)
    for (a, b), J in zip(model.lattice.edges, model.couplings):
        e -= J * s[a] * s[b]
    return e


def _energy_chunks(model):
    """Yield H(s) over all configurations in fixed chunk order."""
    n = model.n_sites
    edges = np.array(model.lattice.edges, dtype=int).reshape(-1, 2)
    J = model.couplings
    h = model.fields
    total = 1 << n
    for start in range(0, total, _CHUNK):
        count = min(_CHUNK, total - start)
        S = spin_table(n, start, count)
        e = -(S @ h)
        if len(edges):
            e = e - (S[:, edges[:, 0]] * S[:, edges[:, 1]]) @ J
        yield e


def _sign_array(site, length):
    """s_site over packed indices 0..length-1 (bit 0 <-> +1)."""
    block = 1 << site
    return np.tile(np.repeat(np.array([1.0, -1.0]), block), length // (2 * block))


def energy_table(model):
    """H(s) for every packed configuration; requires n_sites <= ENUM_CAP.

    Built by doubling: appending site k adds -s_k (h_k + sum_{i<k} J_ik s_i)
    to every existing configuration, so the work per configuration is the
    incoming edge degree rather than the full term count.
    """
    n = model.n_sites
    if n > ENUM_CAP:
        raise SizeCapError(f"{n} sites exceeds enumeration cap {ENUM_CAP}")
    dtype = np.result_type(np.asarray(model.couplings), np.asarray(model.fields),
                           np.float64)
    incoming = [[] for _ in range(n)]
    for (a, b), J in zip(model.lattice.edges, model.couplings):
        lo, hi = min(a, b), max(a, b)
        incoming[hi].append((lo, J))
    e = np.zeros(1, dtype=dtype)
    for k in range(n):
        drive = np.full(1 << k, model.fields[k], dtype=dtype)
        for i, J in incoming[k]:
            drive += J * _sign_array(i, 1 << k)
        e = np.concatenate([e - drive, e + drive])
    return e


# -- partition functions -----------------------------------------------------

def partition_function(model, beta, method="auto", cap=ENUM_CAP):
    """Z(beta) = sum_s exp(-beta H(s)); beta and couplings may be complex."""
    if model.n_sites == 0:
        return 1.0 + 0j
    if method == "auto":
        method = "enumerate" if model.n_sites <= cap else "transfer"
    if method == "enumerate":
        if model.n_sites > cap:
            raise SizeCapError(f"{model.n_sites} sites exceeds cap {cap}")
        if model.n_sites <= 24:
            return complex(np.sum(np.exp(-beta * energy_table(model))))
        z = 0j
        for e in _energy_chunks(model):
            z += np.sum(np.exp(-beta * e))
        return complex(z)
    if method == "transfer":
        return _transfer_z(model, beta)
    raise ValueError(f"unknown method {method!r}")


def _grid_edge_split(lat, couplings):
    """Split canonical grid-edge couplings into per-row and inter-row lists.

    Works on 2D grids with axis 0 = long (rows), axis 1 = short (columns).
    """
    m, w = lat.dims
    tagged = grid_edges(lat.dims, lat.periodic)
    row_J = [[] for _ in range(m)]
    vert_J = {}
    for (i, j, axis), J in zip(tagged, np.asarray(couplings)):
        if axis == 1:
            row_J[i // w].append((i % w, j % w, J))
        else:
            vert_J.setdefault(i // w, []).append((i % w, J))
    return row_J, vert_J


def _transfer_z(model, beta):
    lat = model.lattice
    if not lat.is_grid or len(lat.dims) != 2:
        raise SizeCapError("transfer method requires a 2D grid lattice")
    dims, periodic = lat.dims, lat.periodic
    transpose = dims[1] > dims[0]
    if transpose:
        # relabel so axis 1 is the short one
        perm = _grid_transpose_permutation(dims)
        model = _permute_model(model, perm, (dims[1], dims[0]),
                               (periodic[1], periodic[0]))
        lat = model.lattice
    m, w = lat.dims
    cap = TRANSFER_CAP if not lat.periodic[0] else TRANSFER_CAP - 2
    if w > cap:
        raise SizeCapError(f"short axis {w} exceeds transfer cap {cap}")

    row_J, vert_J = _grid_edge_split(lat, model.couplings)
    S = spin_table(w, 0, 1 << w)  # (R, w) row configurations
    h = model.fields.reshape(m, w)

    def row_weights(t):
        e = -(S @ h[t])
        for a, b, J in row_J[t]:
            e = e - J * S[:, a] * S[:, b]
        return np.exp(-beta * e)

    def vert_matrix(t):
        Jcol = np.zeros(w, dtype=complex)
        for c, J in vert_J.get(t, []):
            Jcol[c] += J
        return np.exp(beta * ((S * Jcol) @ S.T))  # exp(-beta * -J s s')

    if not lat.periodic[0]:
        v = row_weights(0)
        for t in range(1, m):
            v = (v @ vert_matrix(t - 1)) * row_weights(t)
        return complex(np.sum(v))
    M = np.diag(row_weights(0).astype(complex))
    for t in range(1, m):
        M = (M @ vert_matrix(t - 1)) * row_weights(t)[None, :]
    return complex(np.trace(M @ vert_matrix(m - 1)))


def _grid_transpose_permutation(dims):
    m, w = dims
    perm = np.empty(m * w, dtype=int)
    for i in range(m):
        for j in range(w):
            perm[j * m + i] = i * w + j  # new site (j,i) <- old (i,j)
    return perm


def _permute_model(model, perm, new_dims, new_periodic):
    """Rebuild the model on a transposed grid, keeping couplings per edge."""
    old_edges = {tuple(sorted(e)): J
                 for e, J in zip(model.lattice.edges, model.couplings)}
    lat = grid_lattice(new_dims, new_periodic)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    J = [old_edges[tuple(sorted((perm[a], perm[b])))] for a, b in lat.edges]
    return IsingModel(lat, np.asarray(J), np.asarray(model.fields)[perm])


# -- integer-coefficient form ------------------------------------------------

def xi_coefficients(model):
    """Z(beta) = sum_k xi_k e^{-k beta} for integer couplings and fields.

    Returns {k: xi_k} with xi_k the number of configurations of energy k.
    """
    J = np.asarray(model.couplings)
    h = np.asarray(model.fields)
    if np.iscomplexobj(J) or np.iscomplexobj(h):
        raise ValueError("xi coefficients require real integer couplings")
    if not (np.allclose(J, np.round(J)) and np.allclose(h, np.round(h))):
        raise ValueError("xi coefficients require integer couplings and fields")
    if model.n_sites > ENUM_CAP:
        raise SizeCapError(f"{model.n_sites} sites exceeds cap {ENUM_CAP}")
    counts = {}
    chunks = ([energy_table(model)] if model.n_sites <= 24
              else _energy_chunks(model))
    for e in chunks:
        ks, cs = np.unique(np.round(np.real(e)).astype(np.int64),
                           return_counts=True)
        for k, c in zip(ks, cs):
            counts[int(k)] = counts.get(int(k), 0) + int(c)
    return counts


def xi_series(xi, beta):
    """Evaluate sum_k xi_k e^{-k beta} from a coefficient mapping."""
    return sum(c * np.exp(-k * beta) for k, c in xi.items())


# -- pinning and conditionals ------------------------------------------------

def pin_spins(model, pinned):
    """Fold fixed spins into the remaining sites' fields.

    pinned maps site -> +-1. Returns (reduced model, constant energy offset,
    old->new site index map).
    """
    for site, val in pinned.items():
        if not (0 <= site < model.n_sites):
            raise ValueError(f"pinned site {site} out of range")
        if val not in (-1, 1):
            raise ValueError("pinned values must be +-1")
    if len(set(pinned)) != len(pinned):
        raise ValueError("pinned sites must be distinct")
    keep = [i for i in range(model.n_sites) if i not in pinned]
    new_index = {old: new for new, old in enumerate(keep)}
    dtype = np.result_type(np.asarray(model.fields), np.asarray(model.couplings),
                           np.float64)
    h = np.asarray(model.fields)[keep].astype(dtype)
    offset = -sum(model.fields[i] * v for i, v in pinned.items())
    edges, J = [], []
    for (a, b), Jab in zip(model.lattice.edges, model.couplings):
        ina, inb = a in pinned, b in pinned
        if ina and inb:
            offset -= Jab * pinned[a] * pinned[b]
        elif ina:
            h[new_index[b]] += Jab * pinned[a]
        elif inb:
            h[new_index[a]] += Jab * pinned[b]
        else:
            edges.append((new_index[a], new_index[b]))
            J.append(Jab)
    lat = irregular_lattice(len(keep), edges)
    return IsingModel(lat, np.asarray(J, dtype=np.asarray(model.couplings).dtype)
                      if J else np.zeros(0), h), offset, new_index


def corner_magnetization(model, beta, pinned, site, cap=ENUM_CAP):
    """<s_site> under the Boltzmann distribution conditioned on pinned spins."""
    pinned = dict(pinned or {})
    if site in pinned:
        raise ValueError(f"site {site} is pinned")
    reduced, _, new_index = pin_spins(model, pinned)
    if reduced.n_sites > cap:
        raise SizeCapError(f"{reduced.n_sites} free sites exceeds cap {cap}")
    e = energy_table(reduced)
    e = e - e.min().real
    wts = np.exp(-beta * e)
    S = spin_table(reduced.n_sites, 0, 1 << reduced.n_sites)
    num = np.sum(wts * S[:, new_index[site]])
    return float(np.real(num / np.sum(wts)))


# -- JSON model schema -------------------------------------------------------

def _num_to_json(x):
    if np.iscomplexobj(np.asarray(x)) and np.any(np.imag(np.atleast_1d(x))):
        return [[float(np.real(v)), float(np.imag(v))] for v in np.atleast_1d(x)]
    return [float(np.real(v)) for v in np.atleast_1d(x)]


def _num_from_json(vals):
    arr = np.asarray(vals, dtype=object)
    if len(vals) and isinstance(vals[0], (list, tuple)):
        return np.array([complex(a, b) for a, b in vals])
    return np.asarray(vals, dtype=float)


def model_to_dict(model):
    lat = model.lattice
    if lat.is_grid:
        latd = {"dims": list(lat.dims), "periodic": list(lat.periodic)}
    else:
        latd = {"irregular": {"vertices": lat.n_sites,
                              "edges": [list(e) for e in lat.edges]}}
    return {"lattice": latd,
            "couplings": _num_to_json(model.couplings),
            "fields": _num_to_json(model.fields)}


def model_from_dict(d):
    latd = d["lattice"]
    if "dims" in latd:
        lat = grid_lattice(latd["dims"], latd.get("periodic"))
    else:
        irr = latd["irregular"]
        lat = irregular_lattice(irr["vertices"], irr["edges"])
    return IsingModel(lat, _num_from_json(d["couplings"]),
                      _num_from_json(d["fields"]))


def save_model(model, path):
    with open(path, "w") as f:
        json.dump(model_to_dict(model), f, indent=1)


def load_model(path):
    with open(path) as f:
        return model_from_dict(json.load(f))
