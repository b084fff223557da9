"""Level-set volumes and the comparison ODE.

Tabulates V(h) on a Schwarzschild graph, locates h0 where the level set
reaches the threshold volume, checks the two volume inequalities above h0
and compares the rescaled volume function with the ODE solution.

Run: ``python3 demos/level_sets_and_comparison.py``
"""

from __future__ import annotations

import numpy as np

from graphstab.comparison import SampledVolume, comparison_check, comparison_constant, \
    integrate_comparison, rescale
from graphstab.levelsets import h_zero, volume2_residual, volume_function, \
    volume_inequality_residual
from graphstab.schwarzschild import schwarzschild_graph, schwarzschild_sup


def main():
    n, m = 5, 0.5
    f = schwarzschild_graph(n, m)
    h0 = h_zero(f, m)
    print(f"Schwarzschild n={n}, m={m}: h0 = {h0:.6f}, sup f = {schwarzschild_sup(n, m):.6f}")

    vf = volume_function(f, np.linspace(h0, 0.95 * f.h_max, 8))
    print(vf.to_csv())

    alphas = np.geomspace(0.1, 10.0, 25)
    for h in vf.h[1:4]:
        split = volume_inequality_residual(f, float(h), alphas, m)
        growth = volume2_residual(f, float(h), m)
        print(f"h={h:.4f}: min split residual {split.min():.4f}, volume-growth residual "
              f"{growth:.4f}")

    sol = integrate_comparison(n)
    print(f"\ncomparison ODE in n={n}: blow-up height {sol.blow_up_height:.8f}")
    print(f"height constant C = {comparison_constant(n):.6f}; "
          f"sup f - h0 = {schwarzschild_sup(n, m) - h0:.6f} <= C m^(1/(n-2)) = "
          f"{comparison_constant(n) * m ** (1 / (n - 2)):.6f}")

    g = rescale(f, m, h0)
    top = 0.99 * min(sol.grid[-1], g.h_max)
    sv = SampledVolume.from_volume_function(volume_function(g, np.linspace(0.0, top, 30)))
    v = comparison_check(sv, sol, 0.0, top)
    print(f"rescaled graph dominates the ODE solution: hypotheses {v.hypotheses_ok}, "
          f"conclusion {v.conclusion_ok}, smallest margin {v.min_margin:.3e}")


if __name__ == "__main__":
    main()
