"""How large an MPS do you actually need?

For worst-case interferometers the per-cut Schmidt spectrum of every
trajectory is known in closed form, so the bond dimension chi that keeps
the discarded weight below epsilon can be computed exactly -- no circuit
is ever simulated.  This script maps chi and the implied memory footprint
over a small (N, eta) grid, then zooms in on one harder point.

Pass --big to reproduce the forty-mode headline point (chi ~ 1.4e7; takes
a couple of minutes).

Run:  python3 demos/03_bond_dimension_map.py [--big]
"""

import sys

import numpy as np

from mns.analysis import required_bond_dimension, single_photon_site_spectrum


def chi_at(n_modes: int, eta: float, epsilon: float):
    site = single_photon_site_spectrum(eta, np.pi / 4.0)
    return required_bond_dimension(
        [site] * n_modes, epsilon, modes=2 * n_modes, local_dim=n_modes + 1
    )


def human(nbytes: float) -> str:
    for unit in ("B", "KB", "MB", "GB", "TB", "PB", "EB"):
        if nbytes < 1024.0:
            return f"{nbytes:7.1f} {unit}"
        nbytes /= 1024.0
    return f"{nbytes:7.1f} ZB"


def main() -> None:
    epsilon = 0.01
    etas = (0.2, 0.4, 0.6, 0.8)
    print(f"Exact minimal chi for discarded weight <= {epsilon} (worst case, theta = pi/4)")
    print("       " + "".join(f"  eta={e:<11}" for e in etas))
    for n_modes in (4, 8, 12, 16, 20):
        cells = []
        for eta in etas:
            res = chi_at(n_modes, eta, epsilon)
            cells.append(f"{res.chi:>6} {human(res.memory_bytes)}")
        print(f"  N={n_modes:<3} " + " ".join(cells))

    print("\nZoom: N=24, eta=0.5, epsilon sweep")
    for eps in (0.1, 0.05, 0.01, 0.005):
        res = chi_at(24, 0.5, eps)
        print(
            f"  eps={eps:<6} chi={res.chi:>7}  retained={res.retained_weight:.6f}"
            f"  memory={human(res.memory_bytes)}"
        )

    if "--big" in sys.argv[1:]:
        print("\nHeadline point: N=40, eta=0.5, epsilon=0.01 (please wait ~2 min)")
        res = chi_at(40, 0.5, 0.01)
        print(
            f"  chi = {res.chi:,}  retained = {res.retained_weight:.10f}"
            f"  memory = {human(res.memory_bytes)}"
        )
        print("  A faithful MPS of this trajectory would need exabytes -- the")
        print("  instance is out of reach for direct simulation at this accuracy.")
    else:
        print("\n(rerun with --big for the N=40 headline point)")


if __name__ == "__main__":
    main()
