"""Noisy IQP sampling: diagonal circuits between Hadamard walls.

Dephasing noise commutes with every diagonal gate, so d per-layer Z
channels fold into a single front-loaded channel of rate
p_d = (1 - (1-2p)^d)/2 acting right after the first Hadamard wall; the
resulting noisy input is an equal mixture of two unentangled product
states, which is the trajectory decomposition used here.  Depolarizing
noise first splits into X, Y, Z channels of rate q = (1 - sqrt(1-2p))/2;
the Z parts fold like dephasing, while X and Y survive as explicitly
sampled Pauli insertions (a Pauli frame), with Y rewritten as Z*X and the
global phase dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CircuitParseError
from .mps import GateList, MPS, diagonal_gate, one_site_gate, sample_many, shot_rng, branch_rng
from .photonic import DecompositionBranch, SampleRecord, branch_product_mps  # noqa: F401 (shared record type)
from . import photonic

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_SINGLE_QUBIT_DIAG = {
    "Z": np.diag([1.0, -1.0]).astype(complex),
    "S": np.diag([1.0, 1.0j]),
    "T": np.diag([1.0, np.exp(1j * np.pi / 4.0)]),
}
_CZ_TABLE = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex)


# ---------------------------------------------------------------------------
# Circuit representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IQPCircuit:
    """Layers of Z-diagonal gates on ``qubit_count`` qubits.

    Each layer is a tuple of tokens ``("Z", i)``, ``("S", i)``,
    ``("T", i)`` or ``("CZ", i, j)``; everything is diagonal in the
    computational basis by construction.
    """

    qubit_count: int
    layers: tuple

    def __post_init__(self):
        for layer in self.layers:
            for tok in layer:
                name, args = tok[0], tok[1:]
                if name in ("Z", "S", "T"):
                    ok = len(args) == 1
                elif name == "CZ":
                    ok = len(args) == 2 and args[0] != args[1]
                else:
                    raise ValueError(f"unknown gate {name!r}")
                if not ok or any(not 0 <= a < self.qubit_count for a in args):
                    raise ValueError(f"bad gate token {tok} for {self.qubit_count} qubits")

    @property
    def depth(self) -> int:
        return len(self.layers)


def parse_iqp_circuit(text: str, qubit_count: int | None = None) -> IQPCircuit:
    """Parse the one-line-per-layer circuit format.

    Tokens ``Z i``, ``S i``, ``T i``, ``CZ i j`` separated by whitespace;
    ``#`` starts a comment; blank lines are skipped.  Unknown tokens or
    malformed indices raise :class:`CircuitParseError` with the 1-based
    line number.  The qubit count is inferred from the largest index when
    not given.
    """
    layers = []
    max_index = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        layer = []
        pos = 0
        while pos < len(tokens):
            name = tokens[pos]
            if name in ("Z", "S", "T"):
                need = 1
            elif name == "CZ":
                need = 2
            else:
                raise CircuitParseError(f"unknown token {name!r}", lineno)
            args = tokens[pos + 1: pos + 1 + need]
            if len(args) < need:
                raise CircuitParseError(f"{name} needs {need} qubit index(es)", lineno)
            try:
                idx = tuple(int(a) for a in args)
            except ValueError:
                raise CircuitParseError(f"non-integer index after {name}", lineno) from None
            if any(i < 0 for i in idx):
                raise CircuitParseError(f"negative qubit index after {name}", lineno)
            if qubit_count is not None and any(i >= qubit_count for i in idx):
                raise CircuitParseError(f"qubit index out of range after {name}", lineno)
            if name == "CZ" and idx[0] == idx[1]:
                raise CircuitParseError("CZ needs two distinct qubits", lineno)
            max_index = max(max_index, *idx)
            layer.append((name,) + idx)
            pos += 1 + need
        layers.append(tuple(layer))
    if qubit_count is None:
        if max_index < 0:
            raise CircuitParseError("cannot infer qubit count from an empty circuit", 1)
        qubit_count = max_index + 1
    return IQPCircuit(qubit_count, tuple(layers))


def serialize_iqp_circuit(circuit: IQPCircuit) -> str:
    """Inverse of :func:`parse_iqp_circuit` (modulo comments/blank lines)."""
    lines = []
    for layer in circuit.layers:
        lines.append(" ".join(" ".join(str(x) for x in tok) for tok in layer))
    return "\n".join(lines) + ("\n" if lines else "")


def random_iqp_circuit(n: int, depth: int, cz_density: float, seed) -> IQPCircuit:
    """Random layers: adjacent CZs with probability ``cz_density``, then a
    uniform choice of I/Z/S/T on every qubit.  Deterministic given seed."""
    if not 0.0 <= cz_density <= 1.0:
        raise ValueError(f"cz_density must lie in [0, 1], got {cz_density}")
    rng = np.random.default_rng(seed)
    layers = []
    singles = ("I", "Z", "S", "T")
    for _ in range(depth):
        layer = []
        for i in range(n - 1):
            if rng.random() < cz_density:
                layer.append(("CZ", i, i + 1))
        for i in range(n):
            name = singles[rng.integers(0, 4)]
            if name != "I":
                layer.append((name, i))
        layers.append(tuple(layer))
    return IQPCircuit(n, tuple(layers))


def layer_gatelist(circuit: IQPCircuit, layer_index: int) -> GateList:
    """MPS gates for one diagonal layer."""
    gates = GateList()
    for tok in circuit.layers[layer_index]:
        if tok[0] == "CZ":
            gates.append(diagonal_gate(_CZ_TABLE, (tok[1], tok[2])))
        else:
            gates.append(one_site_gate(_SINGLE_QUBIT_DIAG[tok[0]], tok[1]))
    return gates


# ---------------------------------------------------------------------------
# Noise folding and decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseSpec:
    """Per-qubit, per-layer Pauli noise: ``dephasing`` or ``depolarizing``."""

    model: str
    rate: float

    def __post_init__(self):
        if self.model not in ("dephasing", "depolarizing"):
            raise ValueError(f"unknown noise model {self.model!r}")
        if not 0.0 <= self.rate <= 0.5:
            raise ValueError(f"noise rate must lie in [0, 1/2], got {self.rate}")


def fold_dephasing(p: float, depth: int) -> float:
    """Total Z-error rate of ``depth`` composed Z channels of rate p."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"p must lie in [0, 1/2], got {p}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    return (1.0 - (1.0 - 2.0 * p) ** depth) / 2.0


def depolarizing_to_pauli(p: float) -> float:
    """Rate q such that independent X, Y, Z channels of rate q compose to
    the depolarizing channel of rate p.

    Each Bloch axis is flipped by exactly two of the three channels, so
    (1 - 2q)^2 = 1 - 2p, giving q = (1 - sqrt(1 - 2p))/2.
    """
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"p must lie in [0, 1/2], got {p}")
    return (1.0 - np.sqrt(1.0 - 2.0 * p)) / 2.0


def iqp_branch_amplitudes(p_d: float) -> tuple:
    """(q0, q1) with q0 = (sqrt(1-p_d)+sqrt(p_d))/sqrt(2); q0^2+q1^2 = 1."""
    q0 = (np.sqrt(1.0 - p_d) + np.sqrt(p_d)) / np.sqrt(2.0)
    q1 = (np.sqrt(1.0 - p_d) - np.sqrt(p_d)) / np.sqrt(2.0)
    return q0, q1


def iqp_branch_state(p_d: float, sign: int) -> np.ndarray:
    """One of the two pure branches of the dephased |+> input."""
    q0, q1 = iqp_branch_amplitudes(p_d)
    return np.array([q0, q1] if sign > 0 else [q1, q0], dtype=complex)


def dephased_plus_density(p_d: float) -> np.ndarray:
    """|+><+| through a Z channel of rate p_d."""
    plus = np.full((2, 2), 0.5, dtype=complex)
    return (1.0 - p_d) * plus + p_d * (_Z @ plus @ _Z)


def sample_iqp_input_branch(p_d: float, n: int, seed) -> DecompositionBranch:
    """Independent +/- branch per qubit, probability 1/2 each."""
    if not 0.0 <= p_d <= 0.5:
        raise ValueError(f"p_d must lie in [0, 1/2], got {p_d}")
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=n)
    states = tuple(iqp_branch_state(p_d, 1 if s else -1) for s in signs)
    labels = tuple("+" if s else "-" for s in signs)
    return DecompositionBranch(states, labels, -n * np.log(2.0))


def sample_pauli_frame(noise: NoiseSpec, circuit: IQPCircuit, seed,
                       extra_noise_layer: bool = False):
    """Sample the X insertions and trailing Z parity of one trajectory.

    Per noise layer and qubit, an X gate is inserted with probability q
    and a Y gate with probability q (independent draws).  Y is rewritten
    as Z*X up to a dropped global phase: the X part lands in that layer's
    mask, the Z part commutes through the remaining diagonal layers into
    a single trailing parity mask.  The pure-Z channel draws are not part
    of the frame; they fold into the input dephasing rate instead.

    Returns ``(x_masks, z_parity)`` with shapes (layers, n) and (n,).
    For dephasing noise both are all-False.
    """
    rng = np.random.default_rng(seed)
    rounds = circuit.depth + (1 if extra_noise_layer else 0)
    n = circuit.qubit_count
    if noise.model == "dephasing":
        return np.zeros((rounds, n), dtype=bool), np.zeros(n, dtype=bool)
    q = depolarizing_to_pauli(noise.rate)
    draws = rng.random((rounds, n, 2)) < q
    x_draw, y_draw = draws[:, :, 0], draws[:, :, 1]
    x_masks = x_draw ^ y_draw
    z_parity = np.logical_xor.reduce(y_draw, axis=0)
    return x_masks, z_parity


# ---------------------------------------------------------------------------
# Trajectory evolution and sampling
# ---------------------------------------------------------------------------

def input_spec_for(circuit: IQPCircuit) -> photonic.LossyInputSpec:
    """Qubit-shaped input spec so IQP shares the photonic branch plumbing."""
    return photonic.LossyInputSpec("single", circuit.qubit_count, circuit.qubit_count,
                                   eta=0.0, local_dim=2)


def evolve_iqp_branch(circuit: IQPCircuit, branch: DecompositionBranch,
                      chi: int | None = None, x_masks=None, z_parity=None,
                      final_hadamard: bool = True) -> MPS:
    """Evolve one input branch through the diagonal layers.

    ``x_masks`` rows are applied after the corresponding diagonal layer
    (rows beyond the circuit depth, from an extra noise round, apply after
    the last layer); ``z_parity`` is applied after all layers, before the
    final Hadamard wall.
    """
    state = branch_product_mps(input_spec_for(circuit), branch, chi=chi)
    n = circuit.qubit_count
    for t in range(circuit.depth):
        state.apply_all(layer_gatelist(circuit, t))
        if x_masks is not None and t < len(x_masks):
            for i in np.flatnonzero(x_masks[t]):
                state.apply_gate(one_site_gate(_X, int(i)))
    if x_masks is not None:
        for t in range(circuit.depth, len(x_masks)):
            for i in np.flatnonzero(x_masks[t]):
                state.apply_gate(one_site_gate(_X, int(i)))
    if z_parity is not None:
        for i in np.flatnonzero(z_parity):
            state.apply_gate(one_site_gate(_Z, int(i)))
    if final_hadamard:
        for i in range(n):
            state.apply_gate(one_site_gate(_HADAMARD, i))
    return state


def run_noisy_iqp(circuit: IQPCircuit, noise: NoiseSpec, chi: int | None,
                  shots: int, seed, extra_noise_layer: bool = False,
                  first_shot: int = 0) -> list:
    """Sample the noisy IQP circuit shot by shot.

    Z noise (all of it for dephasing, the Z part of the Pauli split for
    depolarizing) folds into the input branch rate; X/Y noise becomes a
    sampled Pauli frame.  Branch/frame draws come from
    ``branch_rng(seed, shot)`` (branch first, then frame) and outcomes
    from ``shot_rng(seed, shot)``, so caching repeated trajectories never
    changes the sampled results.  ``first_shot`` offsets the shot ids for
    chunked runs.
    """
    n = circuit.qubit_count
    rounds = circuit.depth + (1 if extra_noise_layer else 0)
    if noise.model == "dephasing":
        p_d = fold_dephasing(noise.rate, rounds)
    else:
        p_d = fold_dephasing(depolarizing_to_pauli(noise.rate), rounds)

    records: list = [None] * shots
    cache: dict = {}
    by_key: dict = {}
    keys = []
    for r in range(shots):
        rng_b = branch_rng(seed, first_shot + r)
        branch = sample_iqp_input_branch(p_d, n, rng_b)
        x_masks, z_parity = sample_pauli_frame(noise, circuit, rng_b, extra_noise_layer)
        key = (branch.labels, x_masks.tobytes(), z_parity.tobytes())
        keys.append((key, branch, x_masks, z_parity))
        by_key.setdefault(key, []).append(r)

    done = set()
    for key, branch, x_masks, z_parity in keys:
        if key in done:
            continue
        done.add(key)
        rows = by_key[key]
        labels = key[0]
        try:
            if key in cache:
                state = cache[key]
            else:
                state = evolve_iqp_branch(circuit, branch, chi=chi,
                                          x_masks=x_masks, z_parity=z_parity)
                if len(cache) < 8192:
                    cache[key] = state
        except Exception as exc:  # pragma: no cover
            for r in rows:
                records[r] = SampleRecord(first_shot + r, labels, None, 0.0, chi, error=str(exc))
            continue
        uniforms = np.stack([shot_rng(seed, first_shot + r).random(n) for r in rows])
        outcomes = sample_many(state, uniforms)
        for row, r in enumerate(rows):
            records[r] = SampleRecord(first_shot + r, labels, tuple(int(x) for x in outcomes[row]),
                                      state.discarded_weight, chi)
    return records
