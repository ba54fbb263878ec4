"""Pure-state decompositions of lossy and dephased inputs.

Every noisy input this package simulates is first rewritten as a uniform
mixture of a handful of pure product states.  This script prints the
branches for each input family and checks, entry by entry, that averaging
the branch projectors reproduces the exact noisy density matrix.

Run:  python3 demos/01_input_decompositions.py
"""

import numpy as np

from mns.iqp import dephased_plus_density, iqp_branch_state
from mns.photonic import (
    cat_branch_state,
    fock_branch_state,
    lossy_cat_density,
    lossy_fock_density,
    lossy_single_photon,
    single_photon_branch_state,
)


def check(label: str, average: np.ndarray, exact: np.ndarray) -> None:
    err = float(np.max(np.abs(average - exact)))
    print(f"  {label}: max |avg - exact| = {err:.2e}  {'ok' if err < 1e-12 else 'MISMATCH'}")


def main() -> None:
    eta = 0.6

    print(f"Single photon through transmission eta = {eta}")
    branches = [single_photon_branch_state(eta, s) for s in (1, -1)]
    for s, v in zip("+-", branches):
        print(f"  psi_{s} = {np.round(v, 4)}")
    avg = sum(np.outer(v, v.conj()) for v in branches) / 2.0
    check("two branches", avg, lossy_single_photon(eta))

    n = 3
    print(f"\nFock |{n}> needs {n + 1} phase branches (uniform quadrature)")
    avg = np.zeros((n + 1, n + 1), dtype=complex)
    for leg in range(n + 1):
        phi = 2.0 * np.pi * leg / (n + 1)
        v = fock_branch_state(n, eta, phi)
        avg += np.outer(v, v.conj()) / (n + 1)
        print(f"  phi = 2*pi*{leg}/{n + 1}: |psi| head = {np.round(np.abs(v[:4]), 4)}")
    check(f"{n + 1} branches", avg, lossy_fock_density(n, eta))

    gamma, parity, cutoff = 1.2, "odd", 24
    print(f"\nOdd cat, gamma = {gamma}, Fock cutoff {cutoff}: two coherent-like branches")
    branches = [cat_branch_state(gamma, parity, eta, w, cutoff) for w in (1, 2)]
    overlap = abs(np.vdot(branches[0], branches[1]))
    print(f"  branch overlap |<psi1|psi2>| = {overlap:.2e} (orthonormal pair)")
    avg = sum(np.outer(v, v.conj()) for v in branches) / 2.0
    check("two branches", avg, lossy_cat_density(gamma, parity, eta, cutoff))

    p_d = 0.2
    print(f"\nDephased |+> at rate p = {p_d}: phi_+/phi_- branches")
    branches = [iqp_branch_state(p_d, s) for s in (1, -1)]
    for s, v in zip("+-", branches):
        print(f"  phi_{s} = {np.round(v, 4)}")
    avg = sum(np.outer(v, v.conj()) for v in branches) / 2.0
    check("two branches", avg, dephased_plus_density(p_d))

    print("\nEach branch is a product state, so a shot of the sampler only ever")
    print("evolves a pure MPS; the noise lives entirely in the branch draw.")


if __name__ == "__main__":
    main()
