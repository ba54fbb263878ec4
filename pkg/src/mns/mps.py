"""Matrix-product-state engine in canonical (Gamma/lambda) form.

The state is stored as one rank-3 tensor per site, index order
(left bond, physical, right bond), plus one real Schmidt vector per
interior bond.  Local gates touch only the two site tensors and the one
bond they straddle, so no sweeping is needed for the randomly ordered
gate lists produced by the photonic circuit builders.

Truncation policy: at every two-site update keep at most ``chi_max``
Schmidt values and drop anything below an absolute floor of 1e-14, then
renormalize the bond vector.  The squared weight removed this way is
accumulated per bond and as a running retained-norm product, so that
``1 - |to_statevector()|^2`` equals :attr:`MPS.discarded_weight` exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError
from .linalg import SVD_FLOOR, rng_from, svd

_UNITARY_TOL = 1e-10
_SNAPSHOT_MAGIC = b"MPS1"


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    """One local gate.

    kind
        ``"one"`` (single-site unitary), ``"two"`` (two-site unitary on an
        arbitrary pair; nonadjacent targets are routed with swaps), or
        ``"diag"`` (two-site diagonal phase table).
    targets
        Site index tuple; length 1 for ``"one"``, 2 otherwise.
    matrix
        The unitary (``(d, d)`` or ``(d1*d2, d1*d2)``) for unitary kinds,
        or the phase table of shape ``(d1, d2)`` for ``"diag"``.  May be
        ``None`` for transfer-only bookkeeping gates (see ``transfer``),
        which cannot be applied to an MPS.
    transfer
        Optional 2x2 (or 1x1) mode-transfer matrix carried by linear-optical
        gates; consumed by the transfer-matrix accumulator, ignored here.
    """

    kind: str
    targets: tuple
    matrix: np.ndarray | None
    transfer: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("one", "two", "diag"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 1 if self.kind == "one" else 2
        if len(self.targets) != want:
            raise ValueError(f"{self.kind!r} gate needs {want} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"repeated target in {self.targets}")


def one_site_gate(matrix, site: int, *, check: bool = True) -> Gate:
    m = np.asarray(matrix, dtype=complex)
    if check and np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) > _UNITARY_TOL:
        raise ValueError("one-site gate is not unitary to 1e-10")
    return Gate("one", (int(site),), m)


def two_site_gate(matrix, sites, *, transfer=None, check: bool = True) -> Gate:
    i, j = (int(s) for s in sites)
    m = None
    if matrix is not None:
        m = np.asarray(matrix, dtype=complex)
        if check and np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) > _UNITARY_TOL:
            raise ValueError("two-site gate is not unitary to 1e-10")
    return Gate("two", (i, j), m, transfer=None if transfer is None else np.asarray(transfer, dtype=complex))


def diagonal_gate(table, sites) -> Gate:
    """Two-site diagonal phase gate; ``table[p1, p2]`` must be unit modulus."""
    i, j = (int(s) for s in sites)
    t = np.asarray(table, dtype=complex)
    if t.ndim != 2:
        raise ValueError(f"phase table must be 2-d, got shape {t.shape}")
    if np.max(np.abs(np.abs(t) - 1.0)) > _UNITARY_TOL:
        raise ValueError("diagonal gate entries must have unit modulus")
    return Gate("diag", (i, j), t)


class GateList:
    """Ordered list of :class:`Gate` objects with index validation."""

    def __init__(self, gates=()):
        self.gates = list(gates)

    def append(self, gate: Gate):
        self.gates.append(gate)

    def extend(self, gates):
        self.gates.extend(gates)

    def __iter__(self):
        return iter(self.gates)

    def __len__(self):
        return len(self.gates)

    def __getitem__(self, idx):
        return self.gates[idx]

    def __add__(self, other):
        return GateList(self.gates + list(other))

    def validate(self, site_count: int):
        """Check that every target index lies in ``[0, site_count)``."""
        for g in self.gates:
            for t in g.targets:
                if not 0 <= t < site_count:
                    raise ValueError(f"gate target {t} out of range for {site_count} sites")


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------

@dataclass
class MPS:
    """Canonical-form matrix product state.

    Use :func:`product_mps` to build one; direct construction assumes the
    tensors are already canonical.
    """

    gammas: list            # per site, shape (chiL, d, chiR)
    lambdas: list           # per interior bond, 1-d real, descending
    chi_max: int | None = None
    discarded_per_bond: np.ndarray = field(default=None)
    retained_norm_sq: float = 1.0

    def __post_init__(self):
        if self.discarded_per_bond is None:
            self.discarded_per_bond = np.zeros(max(self.site_count - 1, 0))

    # -- basic queries ------------------------------------------------

    @property
    def site_count(self) -> int:
        return len(self.gammas)

    @property
    def phys_dims(self) -> tuple:
        return tuple(g.shape[1] for g in self.gammas)

    @property
    def bond_dims(self) -> tuple:
        return tuple(len(lam) for lam in self.lambdas)

    @property
    def discarded_weight(self) -> float:
        """Total squared Schmidt weight removed by truncation so far."""
        return 1.0 - self.retained_norm_sq

    def schmidt_spectrum(self, bond: int) -> np.ndarray:
        """Squared Schmidt values at an interior bond (descending)."""
        return self.lambdas[bond] ** 2

    def bond_entropy(self, bond: int, alpha: float = 1.0) -> float:
        """Renyi-alpha entropy (nats) of the Schmidt spectrum at ``bond``.

        The left and right reduced density matrices across a bond share
        this spectrum, so there is only one entropy per cut.
        """
        from .linalg import renyi_entropy

        if not 0 <= bond < self.site_count - 1:
            raise ValueError(f"bond {bond} out of range")
        return renyi_entropy(self.schmidt_spectrum(bond), alpha)

    # -- gate application ----------------------------------------------

    def apply_gate(self, gate: Gate):
        """Apply one gate in place; returns self for chaining."""
        if gate.matrix is None:
            raise ValueError("gate carries no matrix (transfer-only); cannot apply to an MPS")
        for t in gate.targets:
            if not 0 <= t < self.site_count:
                raise ValueError(f"gate target {t} out of range for {self.site_count} sites")
        if gate.kind == "one":
            self._apply_one_site(gate.matrix, gate.targets[0])
        else:
            i, j = gate.targets
            if gate.kind == "diag":
                table = gate.matrix
                if i > j:
                    i, j = j, i
                    table = table.T
                self._apply_routed(i, j, table=table)
            else:
                matrix = gate.matrix
                if i > j:
                    i, j = j, i
                    matrix = _permute_two_site(matrix, self.phys_dims[j], self.phys_dims[i])
                self._apply_routed(i, j, matrix=matrix)
        return self

    def apply_all(self, gates):
        for g in gates:
            self.apply_gate(g)
        return self

    def _apply_one_site(self, matrix, site):
        g = self.gammas[site]
        if matrix.shape != (g.shape[1], g.shape[1]):
            raise ValueError(f"gate shape {matrix.shape} does not match local dim {g.shape[1]}")
        self.gammas[site] = np.einsum("pq,lqr->lpr", matrix, g)

    def _apply_routed(self, i, j, matrix=None, table=None):
        """Two-site action on (i, j) with i < j, swap-routing if nonadjacent."""
        # Bring site j next to i, apply, swap back.  Swaps are themselves
        # truncated two-site updates, so they take part in norm accounting.
        for s in range(j - 1, i, -1):
            self._update_bond(s, swap=True)
        self._update_bond(i, matrix=matrix, table=table)
        for s in range(i + 1, j):
            self._update_bond(s, swap=True)

    def _update_bond(self, k, matrix=None, table=None, swap=False):
        """Two-site update on bond k (sites k, k+1) with SVD truncation."""
        gl, gr = self.gammas[k], self.gammas[k + 1]
        chi_l, d1, _ = gl.shape
        _, d2, chi_r = gr.shape
        lam_left = self.lambdas[k - 1] if k > 0 else np.ones(1)
        lam_mid = self.lambdas[k]
        lam_right = self.lambdas[k + 1] if k + 1 < self.site_count - 1 else np.ones(1)

        theta = np.einsum("l,lpm,m,mqr,r->lpqr", lam_left, gl, lam_mid, gr, lam_right, optimize=True)
        if swap:
            theta = theta.transpose(0, 2, 1, 3)
            d1, d2 = d2, d1
        elif table is not None:
            if table.shape != (d1, d2):
                raise ValueError(f"phase table shape {table.shape} does not match local dims ({d1}, {d2})")
            theta = theta * table[None, :, :, None]
        elif matrix is not None:
            if matrix.shape != (d1 * d2, d1 * d2):
                raise ValueError(f"gate shape {matrix.shape} does not match local dims ({d1}, {d2})")
            g4 = matrix.reshape(d1, d2, d1, d2)
            theta = np.einsum("pqab,labr->lpqr", g4, theta, optimize=True)

        u, s, vh = svd(theta.reshape(chi_l * d1, d2 * chi_r))

        total_sq = float(np.sum(s ** 2))
        keep = int(np.sum(s > SVD_FLOOR))
        if self.chi_max is not None:
            keep = min(keep, self.chi_max)
        keep = max(keep, 1)
        s_kept = s[:keep]
        kept_sq = float(np.sum(s_kept ** 2))
        if total_sq > 0.0:
            ratio = min(kept_sq / total_sq, 1.0)
            self.discarded_per_bond[k] += 1.0 - ratio
            self.retained_norm_sq *= ratio

        lam_new = s_kept / np.sqrt(kept_sq)
        inv_l = _safe_inverse(lam_left)
        inv_r = _safe_inverse(lam_right)

        gl_new = u[:, :keep].reshape(chi_l, d1, keep) * inv_l[:, None, None]
        gr_new = vh[:keep, :].reshape(keep, d2, chi_r) * inv_r[None, None, :]
        self.gammas[k] = gl_new
        self.gammas[k + 1] = gr_new
        self.lambdas[k] = lam_new

    # -- readout -------------------------------------------------------

    def to_statevector(self) -> np.ndarray:
        """Full amplitude vector, scaled so its squared norm is the
        retained norm (1 minus the accumulated discarded weight)."""
        dims = self.phys_dims
        total = 1
        for d in dims:
            total *= d
            if total > 1 << 20:
                raise ResourceLimitError(f"statevector of dimension prod{dims} exceeds 2^20")
        acc = self.gammas[0].reshape(dims[0], -1)  # (phys-so-far, chiR)
        for k in range(1, self.site_count):
            acc = np.einsum("xm,m,mpr->xpr", acc, self.lambdas[k - 1], self.gammas[k], optimize=True)
            acc = acc.reshape(-1, acc.shape[-1])
        vec = acc.reshape(-1)
        return vec * np.sqrt(max(self.retained_norm_sq, 0.0))

    def canonical_defect(self) -> float:
        """Max deviation of the left/right canonical isometry conditions."""
        worst = 0.0
        for k in range(self.site_count):
            lam_l = self.lambdas[k - 1] if k > 0 else np.ones(1)
            lam_r = self.lambdas[k] if k < self.site_count - 1 else np.ones(1)
            a = self.gammas[k] * lam_l[:, None, None]
            b = self.gammas[k] * lam_r[None, None, :]
            left = np.einsum("lpr,lps->rs", a.conj(), a)
            right = np.einsum("lpr,spr->ls", b, b.conj())
            worst = max(worst, float(np.max(np.abs(left - np.eye(left.shape[0])))))
            worst = max(worst, float(np.max(np.abs(right - np.eye(right.shape[0])))))
        return worst

    def copy(self) -> "MPS":
        return MPS(
            [g.copy() for g in self.gammas],
            [lam.copy() for lam in self.lambdas],
            chi_max=self.chi_max,
            discarded_per_bond=self.discarded_per_bond.copy(),
            retained_norm_sq=self.retained_norm_sq,
        )


def product_mps(local_states, chi_max: int | None = None) -> MPS:
    """Bond-dimension-1 MPS from a list of normalized local vectors."""
    gammas = []
    for k, v in enumerate(local_states):
        v = np.asarray(v, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"local state {k} is not normalized (|v| = {norm})")
        gammas.append(v.reshape(1, -1, 1))
    lambdas = [np.ones(1) for _ in range(len(gammas) - 1)]
    return MPS(gammas, lambdas, chi_max=chi_max)


def _permute_two_site(matrix, d1, d2):
    """Reorder a (d1*d2, d1*d2) unitary so its two factors swap roles."""
    g = matrix.reshape(d1, d2, d1, d2)
    return g.transpose(1, 0, 3, 2).reshape(d2 * d1, d2 * d1)


def _safe_inverse(lam: np.ndarray) -> np.ndarray:
    """1/lam where lam is above the Schmidt floor, 0 elsewhere."""
    out = np.zeros_like(lam)
    mask = lam > SVD_FLOOR
    out[mask] = 1.0 / lam[mask]
    return out


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sampling_tensors(state: MPS) -> list:
    """Right-canonical tensors B_k = Gamma_k diag(lambda_k) for sampling."""
    bs = []
    for k in range(state.site_count):
        g = state.gammas[k]
        if k < state.site_count - 1:
            g = g * state.lambdas[k][None, None, :]
        bs.append(g)
    return bs


def _outcome_from_uniforms(bs, uniforms):
    """Left-to-right conditional sampling with one uniform per site."""
    w = np.ones(1, dtype=complex)
    outcome = []
    for k, b in enumerate(bs):
        amps = np.einsum("l,lpr->pr", w, b)
        q = np.sum(np.abs(amps) ** 2, axis=1)
        total = float(np.sum(q))
        if total < 1e-14:
            raise RuntimeError(f"conditional norm underflow at site {k}; resampling required")
        q = q / total
        p = int(np.searchsorted(np.cumsum(q), uniforms[k], side="right"))
        p = min(p, len(q) - 1)
        outcome.append(p)
        w = amps[p] / np.sqrt(q[p] * total)
    return tuple(outcome)


def sample_outcome(state: MPS, seed) -> tuple:
    """Draw one outcome string from the Born distribution of the state.

    Left-to-right conditional sampling: the site-k marginal is computed
    from the right-canonical tensors, one uniform variate is consumed per
    site, and the chosen outcome is projected before moving right.
    Deterministic given ``seed``.
    """
    rng = np.random.default_rng(seed)
    bs = sampling_tensors(state)
    return _outcome_from_uniforms(bs, rng.random(state.site_count))


def sample_many(state: MPS, uniforms: np.ndarray) -> np.ndarray:
    """Vectorized conditional sampling: one row of uniforms per shot.

    Consumes uniforms exactly like :func:`sample_outcome` (one per site,
    inverse-CDF), so a shot sampled here with
    ``rng_from(seed, shot, 1).random(L)`` equals the single-shot call.
    """
    bs = sampling_tensors(state)
    shots, sites = uniforms.shape
    if sites != state.site_count:
        raise ValueError("need one uniform per site per shot")
    w = np.ones((shots, 1), dtype=complex)
    outcomes = np.zeros((shots, sites), dtype=np.int64)
    for k, b in enumerate(bs):
        amps = np.einsum("sl,lpr->spr", w, b, optimize=True)
        q = np.sum(np.abs(amps) ** 2, axis=2)
        totals = np.sum(q, axis=1)
        if np.any(totals < 1e-14):
            bad = int(np.argmax(totals < 1e-14))
            raise RuntimeError(f"conditional norm underflow at site {k} (shot {bad})")
        q = q / totals[:, None]
        cdf = np.cumsum(q, axis=1)
        # <= matches searchsorted(..., side="right") in sample_outcome
        picks = np.sum(cdf <= uniforms[:, k, None], axis=1)
        picks = np.minimum(picks, q.shape[1] - 1)
        outcomes[:, k] = picks
        w = amps[np.arange(shots), picks, :]
        norms = np.sqrt(np.sum(np.abs(w) ** 2, axis=1))
        w = w / norms[:, None]
    return outcomes


def shot_rng(seed, shot: int) -> np.random.Generator:
    """Outcome-draw stream for one shot; independent of branch draws."""
    return rng_from(seed, shot, 1)


def branch_rng(seed, shot: int) -> np.random.Generator:
    """Branch-draw stream for one shot; independent of outcome draws."""
    return rng_from(seed, shot, 0)


# ---------------------------------------------------------------------------
# Binary snapshots
# ---------------------------------------------------------------------------

def save_mps(state: MPS, path):
    """Write a binary snapshot: magic "MPS1", header (L, phys_dims, chi),
    then per-site tensors and per-bond Schmidt vectors as little-endian
    complex128 (real/imaginary float64 pairs)."""
    with open(path, "wb") as fh:
        fh.write(_SNAPSHOT_MAGIC)
        chi = 0 if state.chi_max is None else state.chi_max
        fh.write(struct.pack("<QQ", state.site_count, chi))
        fh.write(struct.pack(f"<{state.site_count}Q", *state.phys_dims))
        for g in state.gammas:
            fh.write(struct.pack("<QQ", g.shape[0], g.shape[2]))
            fh.write(np.ascontiguousarray(g, dtype="<c16").tobytes())
        for lam in state.lambdas:
            fh.write(struct.pack("<Q", len(lam)))
            fh.write(np.ascontiguousarray(lam, dtype="<c16").tobytes())


def load_mps(path) -> MPS:
    """Read a snapshot written by :func:`save_mps`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _SNAPSHOT_MAGIC:
            raise ValueError(f"not an MPS snapshot (magic {magic!r})")
        site_count, chi = struct.unpack("<QQ", fh.read(16))
        dims = struct.unpack(f"<{site_count}Q", fh.read(8 * site_count))
        gammas = []
        for d in dims:
            chi_l, chi_r = struct.unpack("<QQ", fh.read(16))
            raw = fh.read(16 * chi_l * d * chi_r)
            gammas.append(np.frombuffer(raw, dtype="<c16").reshape(chi_l, d, chi_r).copy())
        lambdas = []
        for _ in range(site_count - 1):
            (n,) = struct.unpack("<Q", fh.read(8))
            raw = fh.read(16 * n)
            lambdas.append(np.frombuffer(raw, dtype="<c16").real.copy())
    return MPS(gammas, lambdas, chi_max=None if chi == 0 else chi)
