"""Dense reference implementations for cross-checking the MPS pipeline.

Everything here works on full state vectors or density matrices with no
truncation and no trajectory decomposition, so it is exponentially
expensive and meant for small systems only.  The sampling stack is
validated against these references via total variation distance.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import ResourceLimitError
from .linalg import permanent
from .photonic import (
    LossyInputSpec,
    lossy_cat_density,
    lossy_fock_density,
    lossy_single_photon,
)

_MAX_DENSE_DIM = 4096


# ---------------------------------------------------------------------------
# Dense gate application
# ---------------------------------------------------------------------------

def embed_unitary(op, targets, dims) -> np.ndarray:
    """Expand a local operator to the full product space.

    ``op`` acts on the listed target sites in the given order; ``dims``
    are the local dimensions of all sites.  Returns a dense D x D matrix
    with D the product of all dims (site 0 is the most significant index,
    matching the MPS statevector layout).
    """
    targets = [int(t) for t in targets]
    rest = [i for i in range(len(dims)) if i not in targets]
    d_t = int(np.prod([dims[i] for i in targets]))
    d_r = int(np.prod([dims[i] for i in rest])) if rest else 1
    big = np.kron(np.asarray(op, dtype=complex).reshape(d_t, d_t), np.eye(d_r))
    order = targets + rest
    shaped = big.reshape([dims[i] for i in order] * 2)
    perm = list(np.argsort(order))
    full = shaped.transpose(perm + [len(dims) + p for p in perm])
    d_full = int(np.prod(dims))
    return full.reshape(d_full, d_full)


def _gate_operator(gate, dims) -> np.ndarray:
    if gate.matrix is None:
        raise ValueError("gate carries no matrix; cannot apply densely")
    if gate.kind == "diag":
        op = np.diag(gate.matrix.reshape(-1))
    else:
        op = gate.matrix
    return embed_unitary(op, gate.targets, dims)


def apply_gates_dense(vec: np.ndarray, gates, dims) -> np.ndarray:
    """Run a gate list over a dense state vector."""
    out = np.asarray(vec, dtype=complex).reshape(-1)
    for g in gates:
        out = _gate_operator(g, dims) @ out
    return out


def loss_channel_kraus(eta: float, dim: int) -> list:
    """Kraus family of the pure-loss channel on a ``dim``-level mode.

    K_k removes k photons: <n-k|K_k|n> = sqrt(binom(n,k) eta^(n-k) (1-eta)^k).
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    ops = []
    for k in range(dim):
        op = np.zeros((dim, dim), dtype=complex)
        for n in range(k, dim):
            op[n - k, n] = np.sqrt(math.comb(n, k) * eta ** (n - k) * (1.0 - eta) ** k)
        ops.append(op)
    return ops


def apply_channel(rho: np.ndarray, kraus_ops, site: int, dims) -> np.ndarray:
    """Apply a one-site Kraus channel to a dense density matrix."""
    out = np.zeros_like(rho)
    for op in kraus_ops:
        big = embed_unitary(op, (site,), dims)
        out += big @ rho @ big.conj().T
    return out


# ---------------------------------------------------------------------------
# Lossy boson sampling reference
# ---------------------------------------------------------------------------

def _input_mode_density(spec: LossyInputSpec, d: int) -> np.ndarray:
    if spec.kind == "single":
        sigma = lossy_single_photon(spec.eta)
    elif spec.kind == "fock":
        sigma = lossy_fock_density(spec.fock_n, spec.eta)
    else:
        return lossy_cat_density(spec.gamma, spec.parity, spec.eta, d - 1)
    if sigma.shape[0] > d:
        raise ValueError(f"local_dim {d} too small for input density of size {sigma.shape[0]}")
    out = np.zeros((d, d), dtype=complex)
    out[: sigma.shape[0], : sigma.shape[0]] = sigma
    return out


def exact_lossy_bs_distribution(spec: LossyInputSpec, gates) -> dict:
    """Full outcome distribution of the lossy boson sampler.

    Builds the product density matrix of the folded lossy inputs, applies
    every gate as a dense unitary, and reads the Fock-basis diagonal.
    Returns {outcome tuple: probability} over all d^M outcomes, keys in
    lexicographic order.
    """
    d = spec.resolved_local_dim()
    dims = [d] * spec.mode_count
    d_full = d ** spec.mode_count
    if d_full > _MAX_DENSE_DIM:
        raise ResourceLimitError(f"dense dimension {d_full} exceeds {_MAX_DENSE_DIM}")
    vacuum = np.zeros((d, d), dtype=complex)
    vacuum[0, 0] = 1.0
    occupied = set(spec.resolved_input_modes())
    rho = np.ones((1, 1), dtype=complex)
    for mode in range(spec.mode_count):
        rho = np.kron(rho, _input_mode_density(spec, d) if mode in occupied else vacuum)
    for g in gates:
        u = _gate_operator(g, dims)
        rho = u @ rho @ u.conj().T
    probs = np.real(np.diag(rho))
    return {
        outcome: float(probs[idx])
        for idx, outcome in enumerate(itertools.product(range(d), repeat=spec.mode_count))
    }


def exact_bs_probability(u: np.ndarray, outcome, input_modes) -> float:
    """Lossless single-photon outcome probability from a matrix permanent.

    ``u`` is the M x M mode transfer (rows = inputs), ``outcome`` the
    photon count per output mode, ``input_modes`` the occupied inputs (an
    int n means modes 0..n-1).  p = |Perm(A)|^2 / prod(t_j!) with A the
    rows at the inputs and columns repeated by output multiplicity.
    """
    u = np.asarray(u, dtype=complex)
    if isinstance(input_modes, (int, np.integer)):
        input_modes = tuple(range(int(input_modes)))
    outcome = tuple(int(t) for t in outcome)
    if len(outcome) != u.shape[0]:
        raise ValueError(f"outcome length {len(outcome)} does not match {u.shape[0]} modes")
    if any(t < 0 for t in outcome):
        raise ValueError("negative photon count in outcome")
    if sum(outcome) != len(input_modes):
        return 0.0
    cols = [m for m, t in enumerate(outcome) for _ in range(t)]
    a = u[np.ix_(list(input_modes), cols)]
    norm = 1.0
    for t in outcome:
        norm *= math.factorial(t)
    return float(abs(permanent(a)) ** 2 / norm)


# ---------------------------------------------------------------------------
# Noisy IQP reference
# ---------------------------------------------------------------------------

def iqp_layer_phase_vector(circuit, layer_index: int) -> np.ndarray:
    """Diagonal of one IQP layer as a length-2^n phase vector
    (qubit 0 = most significant bit, matching the MPS layout)."""
    n = circuit.qubit_count
    idx = np.arange(1 << n)
    phases = np.ones(1 << n, dtype=complex)
    factors = {"Z": -1.0, "S": 1.0j, "T": np.exp(1j * np.pi / 4.0)}
    for tok in circuit.layers[layer_index]:
        if tok[0] == "CZ":
            b1 = (idx >> (n - 1 - tok[1])) & 1
            b2 = (idx >> (n - 1 - tok[2])) & 1
            phases[(b1 & b2) == 1] *= -1.0
        else:
            bit = (idx >> (n - 1 - tok[1])) & 1
            phases[bit == 1] *= factors[tok[0]]
    return phases


def _pauli_conjugations(n: int, qubit: int):
    """Callables rho -> X rho X, Y rho Y, Z rho Z on qubit ``qubit``."""
    d_full = 1 << n
    idx = np.arange(d_full)
    flip = idx ^ (1 << (n - 1 - qubit))
    sign = 1.0 - 2.0 * ((idx >> (n - 1 - qubit)) & 1)

    def conj_x(rho):
        return rho[np.ix_(flip, flip)]

    def conj_z(rho):
        return sign[:, None] * rho * sign[None, :]

    def conj_y(rho):
        return conj_x(conj_z(rho))

    return conj_x, conj_y, conj_z


def exact_noisy_iqp_distribution(circuit, noise, extra_noise_layer: bool = False) -> dict:
    """Full outcome distribution of the noisy IQP circuit.

    Density-matrix evolution: Hadamard-basis input, then for each layer
    the diagonal unitary followed by one noise channel per qubit
    (dephasing: (1-p) rho + p Z rho Z; depolarizing:
    (1-3p/2) rho + (p/2)(X rho X + Y rho Y + Z rho Z)), an optional extra
    noise round at the end, and the final Hadamard wall.  Keys are bit
    tuples in lexicographic order.
    """
    n = circuit.qubit_count
    d_full = 1 << n
    if d_full > _MAX_DENSE_DIM:
        raise ResourceLimitError(f"dense dimension {d_full} exceeds {_MAX_DENSE_DIM}")
    rho = np.full((d_full, d_full), 1.0 / d_full, dtype=complex)
    p = noise.rate

    def noise_round(rho):
        for qubit in range(n):
            conj_x, conj_y, conj_z = _pauli_conjugations(n, qubit)
            if noise.model == "dephasing":
                rho = (1.0 - p) * rho + p * conj_z(rho)
            else:
                rho = (1.0 - 1.5 * p) * rho + 0.5 * p * (conj_x(rho) + conj_y(rho) + conj_z(rho))
        return rho

    for t in range(circuit.depth):
        phases = iqp_layer_phase_vector(circuit, t)
        rho = phases[:, None] * rho * phases.conj()[None, :]
        rho = noise_round(rho)
    if extra_noise_layer:
        rho = noise_round(rho)
    wall = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    for _ in range(n - 1):
        wall = np.kron(wall, np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0))
    rho = wall @ rho @ wall
    probs = np.real(np.diag(rho))
    return {
        bits: float(probs[idx])
        for idx, bits in enumerate(itertools.product((0, 1), repeat=n))
    }


# ---------------------------------------------------------------------------
# Distribution utilities
# ---------------------------------------------------------------------------

def total_variation_distance(p: dict, q: dict) -> float:
    """TVD between two distributions over the same outcome set.

    Key sets must match exactly; a missing outcome is a mistake in the
    caller (fill with zeros first), not a zero-probability event.
    """
    if set(p) != set(q):
        raise ValueError("distributions are over different outcome sets")
    return 0.5 * float(sum(abs(p[k] - q[k]) for k in p))


def empirical_distribution(outcomes, space=None) -> dict:
    """Frequency dict from a list of outcome tuples.

    With ``space`` given (an iterable of all outcomes), every point is a
    key (zeros included) and an outcome outside the space is an error.
    """
    counts: dict = {}
    total = 0
    for out in outcomes:
        if out is None:
            continue
        key = tuple(int(x) for x in out)
        counts[key] = counts.get(key, 0) + 1
        total += 1
    if total == 0:
        raise ValueError("no outcomes to tabulate")
    if space is None:
        return {k: c / total for k, c in sorted(counts.items())}
    dist = {tuple(k): 0.0 for k in space}
    for k, c in counts.items():
        if k not in dist:
            raise ValueError(f"outcome {k} outside the given space")
        dist[k] = c / total
    return dist


def write_distribution_csv(dist: dict, path):
    """CSV rows ``outcome,probability`` with the outcome space-separated."""
    with open(path, "w") as fh:
        fh.write("outcome,probability\n")
        for key, prob in dist.items():
            fh.write(f"{' '.join(str(int(x)) for x in key)},{prob!r}\n")
