"""
Minimum sensitivity with a non-proper optimum
=============================================

For G = (s-1)/((s-2)(s-3)) the smallest achievable ||S||_inf is 6, reached
only by a non-proper controller.  Proper first-order controllers get
arbitrarily close by pushing a pole far into the left half plane.
"""

from fixorder import SynthesisOptions, plants, refine, synthesize
from fixorder.analysis import hinf_norm
from fixorder.statespace import close_loop, format_zpk, ss_to_zpk, tf_to_ss

P = plants.kwakernaak()
print("optimal (non-proper) controller:", plants.KWAK_OPT_CONTROLLER)

K = tf_to_ss(plants.KWAK_K_REFINED.to_rational())
print(f"printed refined controller: {hinf_norm(close_loop(P, K)).norm:.5f}")

opts = SynthesisOptions(objective="hinf", n_starts=10, rng_seed=1729)
res = refine(P, 1, synthesize(P, 1, opts), opts)
print(f"order 1: ||S||_inf = {res.value:.5f}  (optimum {plants.KWAK_OPT})")
print(format_zpk(ss_to_zpk(res.controller), 6))
