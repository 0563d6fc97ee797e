"""
Order drop of near-optimal H-infinity controllers
=================================================

The plant has three states, but the optimal controller has order two.
Asking for a third-order controller near the optimum produces growing
coefficients and a nearly cancelling pole/zero pair; the way the extra
order gets absorbed depends on the run.
"""

import numpy as np

from fixorder import ControllerParams, SynthesisOptions, plants, refine, synthesize
from fixorder.analysis import hinf_norm
from fixorder.statespace import close_loop, format_tf, ss_to_tf, tf_to_ss

P = plants.gahinet()
print(f"printed order-2 controller: {hinf_norm(close_loop(P, tf_to_ss(plants.GAHINET_K2.to_rational()))).norm:.4f}")


def show(label, K):
    g = ss_to_tf(K)
    print(label)
    print(format_tf(g.num, g.den, 5))
    poles, zeros = np.roots(g.den), np.roots(g.num)
    for p in poles:
        z = zeros[np.argmin(np.abs(zeros - p))]
        print(f"  pole {p:.4g}  nearest zero {z:.4g}  |p-z|/|p| = {abs(p - z) / abs(p):.2g}")


opts = SynthesisOptions(objective="hinf", n_starts=3, rng_seed=1729)
res = synthesize(P, 3, opts)
print(f"order 3, first call: {res.value:.4f}")
res = refine(P, 3, res, opts)
print(f"order 3, refined:    {res.value:.4f}")
show("synthesized order-3 controller:", res.controller)

# the printed first order-3 controller, refined by a warm start
K3 = ControllerParams.from_statespace(tf_to_ss(plants.GAHINET_K3_FIRST))
warm = synthesize(P, 3, opts, warm_start=K3, n_starts=1)
print(f"warm start from the printed controller: {warm.value:.4f}")
show("warm-started order-3 controller:", warm.controller)
