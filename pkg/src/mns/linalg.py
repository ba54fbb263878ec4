"""Dense complex linear-algebra primitives shared by the whole toolkit.

Everything here is a pure function of its inputs (plus an explicit seed),
so the routines are safe to call from many threads at once.  Conventions:

* Unitarity is always checked as ``max |U^dag U - 1|`` against a stated
  tolerance.
* ``renyi_entropy`` works on classical probability vectors and is the one
  entropy routine used everywhere else; all entropies are in nats.
"""

from __future__ import annotations

import numpy as np

from .errors import ResourceLimitError

# Absolute floor below which singular/Schmidt values are treated as zero.
SVD_FLOOR = 1e-14

# Ryser's formula is O(2^n n); past this size the "exact oracle" stops
# being an oracle and starts being a space heater.
PERMANENT_MAX_DIM = 20


def rng_from(seed, *stream) -> np.random.Generator:
    """Derive an independent Generator from ``seed`` and a stream key.

    ``rng_from(seed, shot, 0)`` and ``rng_from(seed, shot, 1)`` give
    statistically independent streams for the same shot, which is how the
    samplers keep branch draws and outcome draws decoupled.
    """
    if isinstance(seed, np.random.Generator):
        if stream:
            raise ValueError("cannot re-key an existing Generator")
        return seed
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(s) for s in stream)))


def haar_unitary(dim: int, seed=None) -> np.ndarray:
    """Draw a ``dim x dim`` unitary from the Haar measure.

    Standard Ginibre + QR construction: fill a matrix with complex standard
    Gaussians, QR-factorize, and rescale the columns of Q so that the
    diagonal of R is real positive.  The phase fix removes the gauge
    freedom of the QR decomposition and makes seeded draws reproducible.

    Parameters
    ----------
    dim
        Matrix dimension, at least 1.
    seed
        Integer seed or ``numpy.random.Generator``.
    """
    if dim < 1:
        raise ValueError(f"invalid dimension {dim}: need dim >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return q


def is_unitary(u: np.ndarray, tol: float = 1e-12) -> bool:
    """True when ``max |U^dag U - 1| <= tol``."""
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    eye = np.eye(u.shape[0])
    return bool(np.max(np.abs(u.conj().T @ u - eye)) <= tol)


def permanent(a: np.ndarray) -> complex:
    """Permanent of a square matrix by Ryser's inclusion-exclusion formula.

    Uses the Gray-code ordering of column subsets so each step updates the
    row sums with a single column add/subtract; total cost O(2^n n).
    Limited to dim <= 20 because this routine exists as a desk-scale
    verification reference, not a production kernel.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return complex(1.0)
    if n > PERMANENT_MAX_DIM:
        raise ResourceLimitError(f"permanent limited to dim <= {PERMANENT_MAX_DIM}, got {n}")

    # Ryser: Perm(A) = (-1)^n sum_{S != empty} (-1)^{|S|} prod_i sum_{j in S} a_ij
    row_sum = np.zeros(n, dtype=complex)
    total = 0.0 + 0.0j
    gray = 0
    sign = 1 if n % 2 == 0 else -1
    for k in range(1, 1 << n):
        next_gray = k ^ (k >> 1)
        bit = next_gray ^ gray
        j = bit.bit_length() - 1
        if next_gray & bit:
            row_sum += a[:, j]
        else:
            row_sum -= a[:, j]
        gray = next_gray
        parity = -1 if bin(gray).count("1") % 2 else 1
        total += parity * np.prod(row_sum)
    return complex(sign * total)


def permanent_brute_force(a: np.ndarray) -> complex:
    """Permanent by explicit sum over all permutations (dim <= 8).

    Independent cross-check for :func:`permanent`; intentionally a
    different algorithm.
    """
    from itertools import permutations

    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n > 8:
        raise ResourceLimitError("brute-force permanent limited to dim <= 8")
    rows = range(n)
    return complex(sum(np.prod([a[i, p[i]] for i in rows]) for p in permutations(rows)))


def svd(a: np.ndarray):
    """SVD wrapper: ``A = U diag(s) V^dag`` with s real, nonnegative, descending.

    Thin wrapper over LAPACK with a manual eigen-decomposition fallback for
    the rare non-convergence failures; the contract callers rely on is only
    the reconstruction tolerance and the descending order of ``s``.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"svd needs a nonempty 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("svd input contains non-finite entries")
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError:
        # Fall back to the hermitian eigenproblem of A^dag A.  Slower and
        # slightly less accurate, but it does not share LAPACK's bidiagonal
        # convergence failure mode.
        ata = a.conj().T @ a
        ata = 0.5 * (ata + ata.conj().T)
        w, v = np.linalg.eigh(ata)
        idx = np.argsort(w)[::-1]
        w, v = w[idx], v[:, idx]
        s = np.sqrt(np.clip(w, 0.0, None))
        safe = np.where(s > SVD_FLOOR, s, 1.0)
        u = (a @ v) / safe
        u[:, s <= SVD_FLOOR] = 0.0
        vh = v.conj().T
    return u, s, vh


def renyi_entropy(probs: np.ndarray, alpha: float) -> float:
    """Renyi-alpha entropy (nats) of a classical probability vector.

    ``alpha`` within 1e-9 of 1 takes the von Neumann limit
    ``-sum p log p``.  Zero entries are dropped; tiny negative entries from
    floating-point noise are clipped.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    p = p[p > 0.0]
    if p.size == 0:
        return 0.0
    if abs(alpha - 1.0) < 1e-9:
        return float(-np.sum(p * np.log(p)))
    return float(np.log(np.sum(p ** alpha)) / (1.0 - alpha))
