"""Lossy boson sampling via pure-state decomposition of the noisy input.

Uniform photon loss commutes through a passive linear-optical circuit, so
the whole pipeline folds the loss to the front, writes the lossy input of
each occupied mode as a uniform mixture of a few pure states, and then
simulates one randomly drawn pure product input per shot with the MPS
engine.  Three input classes are supported: single photons, n-photon Fock
states, and odd/even cat states.

Mode-transfer convention used throughout: a transfer matrix ``T`` maps
input creation operators to outputs as ``a_i -> sum_j T[i, j] a_j``
(rows index inputs, columns outputs), and gates compose left-to-right:
``T_total = T_1 @ T_2 @ ...`` in application order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CutoffError
from .linalg import haar_unitary
from .mps import Gate, GateList, MPS, product_mps, sample_many, shot_rng, branch_rng, two_site_gate

_BRANCH_CACHE_MAX = 65536


# ---------------------------------------------------------------------------
# Input descriptions and decomposition branches
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LossyInputSpec:
    """What enters the interferometer.

    kind
        ``"single"`` (one photon per occupied mode), ``"fock"`` (n photons
        per occupied mode), or ``"cat"``.
    mode_count, occupied_modes
        Total modes M and number of occupied input modes N.  Occupied
        modes default to ``0..N-1``; pass ``input_modes`` to override
        (the USTC-like builder returns its own placement).
    eta
        Total transmission after folding all loss to the front.
    local_dim
        Local Fock-space dimension for the MPS; default is total photon
        number + 1 (single/Fock) or the cat cutoff + 1.
    """

    kind: str
    mode_count: int
    occupied_modes: int
    eta: float
    fock_n: int = 1
    gamma: float = 0.0
    parity: str = "odd"
    local_dim: int | None = None
    input_modes: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("single", "fock", "cat"):
            raise ValueError(f"unknown input kind {self.kind!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not 1 <= self.occupied_modes <= self.mode_count:
            raise ValueError("need 1 <= occupied_modes <= mode_count")
        if self.kind == "fock" and self.fock_n < 1:
            raise ValueError("fock inputs need n >= 1")
        if self.kind == "cat":
            if self.gamma <= 0:
                raise ValueError("cat inputs need gamma > 0")
            if self.parity not in ("odd", "even"):
                raise ValueError(f"parity must be 'odd' or 'even', got {self.parity!r}")
        if self.input_modes is not None and len(self.input_modes) != self.occupied_modes:
            raise ValueError("input_modes length must equal occupied_modes")

    def resolved_input_modes(self) -> tuple:
        if self.input_modes is not None:
            return tuple(self.input_modes)
        return tuple(range(self.occupied_modes))

    def resolved_local_dim(self) -> int:
        if self.local_dim is not None:
            return self.local_dim
        if self.kind == "single":
            return self.occupied_modes + 1
        if self.kind == "fock":
            return self.occupied_modes * self.fock_n + 1
        return default_cat_cutoff(self.gamma) + 1


@dataclass(frozen=True)
class DecompositionBranch:
    """One pure product input drawn from the decomposition ensemble.

    ``local_states`` has one vector per occupied mode; ``labels`` carries
    the per-mode branch choice (sign, phase, or 1/2) and doubles as the
    cache key in the samplers; ``log_probability`` is the log ensemble
    weight (log density for the continuous-phase Fock ensemble).
    """

    local_states: tuple
    labels: tuple
    log_probability: float

    def __post_init__(self):
        for k, v in enumerate(self.local_states):
            norm = np.linalg.norm(v)
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"branch state {k} not normalized (|v| = {norm})")


# ---------------------------------------------------------------------------
# Lossy densities and branch states
# ---------------------------------------------------------------------------

def lossy_single_photon(eta: float) -> np.ndarray:
    """Single photon after transmission eta: diag(1 - eta, eta)."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    return np.diag([1.0 - eta, eta]).astype(complex)


def lossy_fock_density(n: int, eta: float) -> np.ndarray:
    """n-photon Fock state after loss: binomial mixture diag over 0..n."""
    probs = [math.comb(n, k) * eta ** k * (1.0 - eta) ** (n - k) for k in range(n + 1)]
    return np.diag(probs).astype(complex)


def single_photon_branch_state(eta: float, sign: int) -> np.ndarray:
    """sqrt(1-eta)|0> + sign*sqrt(eta)|1>; the two branches average to
    the lossy single-photon state."""
    return np.array([np.sqrt(1.0 - eta), sign * np.sqrt(eta)], dtype=complex)


def fock_branch_state(n: int, eta: float, phi: float) -> np.ndarray:
    """Phase-randomized lossy Fock branch.

    Amplitude sqrt(binom(n,k) eta^k (1-eta)^(n-k)) e^{i phi k} at |k>.
    Averaging the projector over the n+1 phases 2*pi*m/(n+1) removes every
    off-diagonal (|k - k'| <= n) exactly, recovering the binomial mixture.
    """
    ks = np.arange(n + 1)
    mags = np.sqrt([math.comb(n, k) * eta ** k * (1.0 - eta) ** (n - k) for k in ks])
    return mags * np.exp(1j * phi * ks)


def coherent_state(alpha: complex, cutoff: int) -> np.ndarray:
    """Coherent state in the Fock basis, occupations 0..cutoff."""
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for k in range(1, cutoff + 1):
        amps[k] = amps[k - 1] * alpha / np.sqrt(k)
    return amps


def coherent_tail_mass(alpha: complex, cutoff: int) -> float:
    """Probability mass of a coherent state beyond Fock level ``cutoff``."""
    return max(0.0, 1.0 - float(np.sum(np.abs(coherent_state(alpha, cutoff)) ** 2)))


def default_cat_cutoff(gamma: float, tol: float = 1e-14) -> int:
    """Smallest cutoff whose coherent-amplitude tail mass is below tol."""
    cutoff = max(4, int(abs(gamma) ** 2) + 1)
    while coherent_tail_mass(gamma, cutoff) >= tol:
        cutoff += 1
    return cutoff


def cat_state(gamma: float, parity: str, cutoff: int) -> np.ndarray:
    """Normalized lossless cat state (|gamma> +/- |-gamma>) in Fock basis."""
    sign = -1.0 if parity == "odd" else 1.0
    v = coherent_state(gamma, cutoff) + sign * coherent_state(-gamma, cutoff)
    return v / np.linalg.norm(v)


def _cat_coefficients(gamma: float, parity: str, eta: float):
    """The (A, B) mixing coefficients of the two lossy-cat branches."""
    sign = -1.0 if parity == "odd" else 1.0
    c_sq = 2.0 * (1.0 + sign * np.exp(-2.0 * gamma ** 2))
    k = np.exp(-2.0 * gamma ** 2 * (1.0 - eta))
    a = (np.sqrt(1.0 + k) + np.sqrt(1.0 - k)) / np.sqrt(2.0 * c_sq)
    b = (np.sqrt(1.0 + k) - np.sqrt(1.0 - k)) / np.sqrt(2.0 * c_sq)
    return a, b


def cat_branch_state(gamma: float, parity: str, eta: float, which: int, cutoff: int) -> np.ndarray:
    """One of the two pure branches of the lossy cat state.

    Odd parity:  psi1 = A|g> - B|-g>,  psi2 = -B|g> + A|-g>
    Even parity: psi1 = A|g> + B|-g>,  psi2 =  B|g> + A|-g>
    with g = gamma*sqrt(eta).  The branches are orthonormal and average to
    the lossy cat density matrix; psi2 is the photon-number parity flip of
    psi1.  Expanded in the truncated Fock basis and renormalized.
    """
    if which not in (1, 2):
        raise ValueError(f"branch index must be 1 or 2, got {which}")
    if coherent_tail_mass(gamma, cutoff) >= 1e-14:
        raise CutoffError(f"cutoff {cutoff} leaves tail mass >= 1e-14 for gamma={gamma}")
    a, b = _cat_coefficients(gamma, parity, eta)
    plus = coherent_state(gamma * np.sqrt(eta), cutoff)
    minus = coherent_state(-gamma * np.sqrt(eta), cutoff)
    s = -1.0 if parity == "odd" else 1.0
    if which == 1:
        v = a * plus + s * b * minus
    else:
        v = s * b * plus + a * minus
    return v / np.linalg.norm(v)


def lossy_cat_density(gamma: float, parity: str, eta: float, cutoff: int) -> np.ndarray:
    """Cat state after loss, directly in the truncated Fock basis.

    sigma = (|g><g| + |-g><-g| +/- k(|g><-g| + |-g><g|)) / C^2 with
    g = gamma*sqrt(eta) and k = exp(-2 gamma^2 (1-eta)); the cross-term
    sign and normalization C^2 follow the cat parity.
    """
    sign = -1.0 if parity == "odd" else 1.0
    c_sq = 2.0 * (1.0 + sign * np.exp(-2.0 * gamma ** 2))
    k = np.exp(-2.0 * gamma ** 2 * (1.0 - eta))
    plus = coherent_state(gamma * np.sqrt(eta), cutoff)
    minus = coherent_state(-gamma * np.sqrt(eta), cutoff)
    sigma = np.outer(plus, plus.conj()) + np.outer(minus, minus.conj())
    sigma = sigma + sign * k * (np.outer(plus, minus.conj()) + np.outer(minus, plus.conj()))
    return sigma / c_sq


def fold_loss(eta_per_layer: float, depth: int) -> float:
    """Total transmission of ``depth`` uniform loss layers."""
    if not 0.0 <= eta_per_layer <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta_per_layer}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    return eta_per_layer ** depth


# ---------------------------------------------------------------------------
# Branch samplers
# ---------------------------------------------------------------------------

def sample_single_photon_branch(eta: float, mode_count_n: int, seed) -> DecompositionBranch:
    """Independent +/- sign per occupied mode, probability 1/2 each."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=mode_count_n)
    states = tuple(single_photon_branch_state(eta, 1 if s else -1) for s in signs)
    labels = tuple("+" if s else "-" for s in signs)
    return DecompositionBranch(states, labels, -mode_count_n * np.log(2.0))


def sample_fock_branch(n: int, eta: float, mode_count_n: int, seed, quadrature: bool = False) -> DecompositionBranch:
    """Independent uniform phase per occupied mode.

    With ``quadrature=True`` the phases are drawn from the (n+1)-point
    grid 2*pi*m/(n+1), which reproduces the lossy Fock state exactly on
    average; the continuous ensemble does too, and ``log_probability`` is
    then a log density.
    """
    if n < 1:
        raise ValueError("vacuum input needs no decomposition; n must be >= 1")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    rng = np.random.default_rng(seed)
    if quadrature:
        phis = rng.integers(0, n + 1, size=mode_count_n) * (2.0 * np.pi / (n + 1))
        log_p = -mode_count_n * np.log(n + 1.0)
    else:
        phis = rng.uniform(0.0, 2.0 * np.pi, size=mode_count_n)
        log_p = -mode_count_n * np.log(2.0 * np.pi)
    states = tuple(fock_branch_state(n, eta, phi) for phi in phis)
    return DecompositionBranch(states, tuple(float(p) for p in phis), log_p)


def sample_cat_branch(gamma: float, parity: str, eta: float, mode_count_n: int,
                      fock_cutoff: int, seed) -> DecompositionBranch:
    """Independent psi1/psi2 choice per occupied mode, probability 1/2."""
    rng = np.random.default_rng(seed)
    picks = rng.integers(1, 3, size=mode_count_n)
    states = tuple(cat_branch_state(gamma, parity, eta, int(w), fock_cutoff) for w in picks)
    return DecompositionBranch(states, tuple(int(w) for w in picks), -mode_count_n * np.log(2.0))


# ---------------------------------------------------------------------------
# Beamsplitter gates and circuit families
# ---------------------------------------------------------------------------

def beamsplitter_transfer(theta: float, phi: float = 0.0) -> np.ndarray:
    """2x2 mode transfer: a1 -> cos(theta) a1 + e^{i phi} sin(theta) a2."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, np.exp(1j * phi) * s], [-np.exp(-1j * phi) * s, c]], dtype=complex)


def fock_unitary_from_transfer(transfer: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Expand a 2x2 mode transfer into a (d1*d2, d1*d2) Fock-space unitary.

    Photon-number blocks with t <= min(d1, d2) - 1 carry the induced
    action from the binomial expansion of the transformed creation
    operators.  Higher blocks only partially fit in the truncated basis,
    so they are left as identity; callers keep the populated photon number
    below the local dimension (the default local_dim = total photons + 1
    guarantees this), which keeps the gate exactly unitary.
    """
    t00, t01 = transfer[0, 0], transfer[0, 1]
    t10, t11 = transfer[1, 0], transfer[1, 1]
    dim = d1 * d2
    g = np.eye(dim, dtype=complex)
    lg = [math.lgamma(k + 1) for k in range(max(d1, d2) + 1)]
    for t in range(min(d1, d2)):
        for n1 in range(t + 1):
            n2 = t - n1
            col = n1 * d2 + n2
            for m1 in range(t + 1):
                m2 = t - m1
                amp = 0.0 + 0.0j
                for j in range(max(0, m1 - n2), min(n1, m1) + 1):
                    amp += (
                        math.comb(n1, j) * math.comb(n2, m1 - j)
                        * t00 ** j * t01 ** (n1 - j)
                        * t10 ** (m1 - j) * t11 ** (n2 - m1 + j)
                    )
                scale = np.exp(0.5 * (lg[m1] + lg[m2] - lg[n1] - lg[n2]))
                g[m1 * d2 + m2, col] = amp * scale
    return g


def beamsplitter_gate(theta: float, sites, local_dim: int | None, phi: float = 0.0) -> Gate:
    """Beamsplitter as an MPS gate; carries its 2x2 transfer as metadata.

    With ``local_dim=None`` the gate is transfer-only (usable by the
    transfer-matrix accumulator but not applicable to an MPS).
    """
    transfer = beamsplitter_transfer(theta, phi)
    matrix = None if local_dim is None else fock_unitary_from_transfer(transfer, local_dim, local_dim)
    return two_site_gate(matrix, sites, transfer=transfer)


def haar_beamsplitter_gate(sites, local_dim: int | None, rng) -> Gate:
    """Two-mode gate with a Haar-random 2x2 transfer."""
    transfer = haar_unitary(2, rng)
    matrix = None if local_dim is None else fock_unitary_from_transfer(transfer, local_dim, local_dim)
    return two_site_gate(matrix, sites, transfer=transfer)


def worst_case_gatelist(m: int, n: int, local_dim: int | None = None) -> GateList:
    """Balanced splitters pairing mode i with mode i + M/2 for the first N modes.

    Every occupied input sees mixing angle pi/4 across the half cut, which
    maximizes the per-mode entanglement.  Long range on purpose; the
    engine routes the distance with swaps.
    """
    if m % 2:
        raise ValueError(f"mode count must be even, got {m}")
    if not 1 <= n <= m // 2:
        raise ValueError("need 1 <= n <= m/2")
    if local_dim is None:
        local_dim = n + 1
    gates = GateList()
    for i in range(n):
        gates.append(beamsplitter_gate(np.pi / 4.0, (i, i + m // 2), local_dim))
    return gates


def brickwall_gatelist(m: int, depth: int, seed, local_dim: int | None = None) -> GateList:
    """Alternating even/odd layers of Haar-random two-mode gates."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    rng = np.random.default_rng(seed)
    gates = GateList()
    for layer in range(depth):
        start = layer % 2
        for i in range(start, m - 1, 2):
            gates.append(haar_beamsplitter_gate((i, i + 1), local_dim, rng))
    return gates


def ustc_like_gatelist(n: int, seed, local_dim: int | None = None,
                       layers_per_block: int | None = None):
    """Two independent half-size brick-wall blocks plus one coupling layer.

    The mode count is M = 2 k^2 with k the nearest integer to N/sqrt(2);
    ceil(N/2) photons go into the middle of the first half and the rest
    into the middle of the second.  Returns ``(gates, input_modes)``.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 photons, got {n}")
    k = round(n / np.sqrt(2.0))
    half = k * k
    m = 2 * half
    if layers_per_block is None:
        layers_per_block = max(half, 1)
    rng = np.random.default_rng(seed)
    gates = GateList()
    for offset in (0, half):
        for layer in range(layers_per_block):
            start = layer % 2
            for i in range(start, half - 1, 2):
                gates.append(haar_beamsplitter_gate((offset + i, offset + i + 1), local_dim, rng))
    for i in range(half):
        gates.append(haar_beamsplitter_gate((i, i + half), local_dim, rng))
    n_first = (n + 1) // 2
    n_second = n - n_first
    first = range((half - n_first) // 2, (half - n_first) // 2 + n_first)
    second = range(half + (half - n_second) // 2, half + (half - n_second) // 2 + n_second)
    return gates, tuple(first) + tuple(second)


def transfer_matrix(gates, m: int) -> np.ndarray:
    """Accumulate the M x M mode transfer of a linear-optical gate list."""
    total = np.eye(m, dtype=complex)
    for g in gates:
        if g.transfer is None:
            raise ValueError("gate without transfer metadata in transfer_matrix")
        embed = np.eye(m, dtype=complex)
        idx = np.ix_(g.targets, g.targets)
        embed[idx] = g.transfer
        total = total @ embed
    return total


def theta_profile(u: np.ndarray, cut: int) -> np.ndarray:
    """Per-input mixing angles across the cut after the first ``cut`` modes.

    cos^2(theta_j) is the weight input j sends into output modes < cut;
    theta = pi/4 marks balanced (worst-case) mixing.
    """
    u = np.asarray(u)
    m = u.shape[0]
    if not 1 <= cut < m:
        raise ValueError(f"cut must lie in [1, {m}), got {cut}")
    if np.max(np.abs(u.conj().T @ u - np.eye(m))) > 1e-10:
        raise ValueError("theta_profile needs a unitary transfer matrix")
    cos_sq = np.sum(np.abs(u[:, :cut]) ** 2, axis=1)
    return np.arccos(np.sqrt(np.clip(cos_sq, 0.0, 1.0)))


# ---------------------------------------------------------------------------
# End-to-end sampling
# ---------------------------------------------------------------------------

@dataclass
class SampleRecord:
    """One shot of a sampling run; serializes to one JSONL object."""

    shot: int
    branch_labels: tuple
    outcome: tuple | None
    discarded_weight: float
    chi: int | None
    error: str | None = None

    def to_dict(self) -> dict:
        d = {
            "shot": self.shot,
            "branch_labels": list(self.branch_labels),
            "outcome": None if self.outcome is None else list(int(x) for x in self.outcome),
            "discarded_weight": self.discarded_weight,
            "chi": self.chi,
        }
        if self.error is not None:
            d["error"] = self.error
        return d


def write_jsonl(records, path):
    """One compact JSON object per line; key order fixed for determinism."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def _draw_branch(spec: LossyInputSpec, rng) -> DecompositionBranch:
    n = spec.occupied_modes
    if spec.kind == "single":
        return sample_single_photon_branch(spec.eta, n, rng)
    if spec.kind == "fock":
        return sample_fock_branch(spec.fock_n, spec.eta, n, rng)
    cutoff = spec.resolved_local_dim() - 1
    return sample_cat_branch(spec.gamma, spec.parity, spec.eta, n, cutoff, rng)


def branch_product_mps(spec: LossyInputSpec, branch: DecompositionBranch,
                       chi: int | None = None) -> MPS:
    """Product MPS of one branch: branch states on the occupied modes,
    vacuum elsewhere, all padded to the input's resolved local dimension."""
    d = spec.resolved_local_dim()
    vacuum = np.zeros(d, dtype=complex)
    vacuum[0] = 1.0
    states = [vacuum] * spec.mode_count
    for mode, v in zip(spec.resolved_input_modes(), branch.local_states):
        if len(v) > d:
            raise ValueError(f"local_dim {d} too small for a branch state of length {len(v)}")
        padded = np.zeros(d, dtype=complex)
        padded[: len(v)] = v
        states[mode] = padded
    return product_mps(states, chi_max=chi)


def run_lossy_boson_sampling(spec: LossyInputSpec, gates, chi: int | None,
                             shots: int, seed, first_shot: int = 0) -> list:
    """Sample the lossy boson sampler shot by shot.

    Each shot draws an input branch from ``branch_rng(seed, shot)``,
    evolves the branch product state through the gates with bond cap
    ``chi`` (None = unbounded), and samples one photon-number outcome
    with ``shot_rng(seed, shot)``.  Evolved branches are cached by label,
    so repeated branches cost one evolution; the separate outcome stream
    keeps results identical with or without the cache.  Per-shot failures
    are recorded on the SampleRecord, not raised.

    ``first_shot`` offsets the shot ids, so splitting a run into chunks
    reproduces the single-call records exactly.
    """
    if isinstance(gates, GateList):
        gates.validate(spec.mode_count)
    shot_ids_abs = range(first_shot, first_shot + shots)
    branches = [_draw_branch(spec, branch_rng(seed, s)) for s in shot_ids_abs]
    cache: dict = {}
    records: list = [None] * shots
    by_key: dict = {}
    for r, br in enumerate(branches):
        by_key.setdefault(br.labels, []).append(r)

    for labels, rows in by_key.items():
        branch = branches[rows[0]]
        try:
            if labels in cache:
                state = cache[labels]
            else:
                state = branch_product_mps(spec, branch, chi=chi).apply_all(gates)
                if len(cache) < _BRANCH_CACHE_MAX:
                    cache[labels] = state
        except Exception as exc:  # pragma: no cover - engine errors are rare
            for r in rows:
                records[r] = SampleRecord(first_shot + r, labels, None, 0.0, chi, error=str(exc))
            continue
        uniforms = np.stack([shot_rng(seed, first_shot + r).random(spec.mode_count) for r in rows])
        try:
            outcomes = sample_many(state, uniforms)
        except RuntimeError:
            outcomes = None
        for row, r in enumerate(rows):
            shot = first_shot + r
            if outcomes is not None:
                records[r] = SampleRecord(shot, labels, tuple(int(x) for x in outcomes[row]),
                                          state.discarded_weight, chi)
            else:
                try:
                    out = _single_shot(state, shot_rng(seed, shot), spec.mode_count)
                    records[r] = SampleRecord(shot, labels, out, state.discarded_weight, chi)
                except RuntimeError as exc:
                    records[r] = SampleRecord(shot, labels, None, state.discarded_weight, chi,
                                              error=str(exc))
    return records


def _single_shot(state: MPS, rng, sites: int) -> tuple:
    from .mps import sampling_tensors, _outcome_from_uniforms

    return _outcome_from_uniforms(sampling_tensors(state), rng.random(sites))
