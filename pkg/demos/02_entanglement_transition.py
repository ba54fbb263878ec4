"""Where lossy boson sampling stops being easy: the 4-to-5 transition.

With one photon per input mode and total transmission eta = c / sqrt(N),
the worst-case entanglement entropy across the half cut behaves very
differently depending on c.  Normalizing by log N:

  * c = 4: the curve dips before creeping back up -- entanglement growth
    is (barely) compatible with polylog scaling over this window;
  * c = 5: the curve increases monotonically from the start.

This script prints S1 / ln N for a geometric ladder of sizes and locates
the smallest c on a 0.05 grid whose curve is already monotone.

Run:  python3 demos/02_entanglement_transition.py
"""

import math

import numpy as np

from mns.analysis import ere_single_photon


def ratio_series(coeff: float, sizes) -> np.ndarray:
    return np.array(
        [ere_single_photon(n, coeff / math.sqrt(n), 1.0) / math.log(n) for n in sizes]
    )


def main() -> None:
    sizes = [2 ** k for k in range(6, 15)]

    print("S1(N) / ln N at eta = c / sqrt(N)")
    header = "      N " + "".join(f"{n:>9}" for n in sizes)
    print(header)
    for coeff in (3.0, 4.0, 4.5, 5.0, 6.0):
        row = ratio_series(coeff, sizes)
        marker = "monotone" if np.all(np.diff(row) > 0) else "dips    "
        print(f"  c={coeff:3.1f} " + "".join(f"{r:9.4f}" for r in row) + f"  {marker}")

    grid = np.arange(4.0, 5.01, 0.05)
    first = next(c for c in grid if np.all(np.diff(ratio_series(c, sizes)) > 0))
    print(f"\nSmallest monotone coefficient on a 0.05 grid: c = {first:.2f}")
    print("The regime change sits strictly between 4 and 5; asymptotically the")
    print("ratio approaches c^2/4, so c=4 targets 4.0 and c=5 targets 6.25.")


if __name__ == "__main__":
    main()
