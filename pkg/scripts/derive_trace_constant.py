"""Fix the convention constant of the quadratic trace closed form.

The matrix trace ``tr((k - d)^-1 u (k + d)^-1 conj(u))`` is extrapolated in the
window size and divided by ``coth(kL/2) * sum dxi |u_hat|^2 / (2k - i xi)``.
The printed ratio is the value frozen as ``QUADRATIC_TRACE_CONSTANT``.

    python3 scripts/derive_trace_constant.py
"""

import math

import numpy as np

from hnls_lab import determinant as det
from hnls_lab import operators as ops
from hnls_lab.spectral import SpatialGrid, make_field


def main():
    g = SpatialGrid(64, 16 * math.pi)
    for k, carrier in [(1.0, 0.25), (0.5, 0.0), (2.0, -0.5)]:
        u = make_field("gaussian", g, amplitude=0.5, width=3.0, carrier=carrier)
        lim = ops.pair_trace_limit(
            det.resolvent_symbol(-1, -1, k), u, det.resolvent_symbol(+1, -1, k), u.conj(), half_width=4096, levels=5
        )
        closed = det.periodization_factor(k, g.length) * g.dxi * np.sum(np.abs(u.coefficients) ** 2 / (2 * k - 1j * g.xi))
        ratio = lim["value"] / closed
        print(f"k={k:g} carrier={carrier:g}: ratio = {ratio.real:.15f} {ratio.imag:+.2e}i")
    print(f"frozen constant: {det.QUADRATIC_TRACE_CONSTANT!r}")


if __name__ == "__main__":
    main()
