"""
Maximizing the decay rate of a two-mass-spring system
=====================================================

P(s) = 1/(s^4 + 2 s^2) has a double pole at 0 and a lightly damped pair
at +-i sqrt(2).  We minimize the closed-loop spectral abscissa over
second-order controllers.  The analytic optimum places all six closed-loop
poles at -sqrt(15)/5 = -0.7746; that point is nonsmooth (a sextuple
eigenvalue), so numerical optimizers approach it slowly.
"""

import numpy as np

from fixorder import ControllerParams, SynthesisOptions, plants, refine, synthesize
from fixorder.analysis import spectral_abscissa
from fixorder.statespace import close_loop, format_tf, ss_to_tf, tf_to_ss

P = plants.two_mass_spring()
opts = SynthesisOptions(objective="spectral_abscissa", n_starts=5, rng_seed=1729)

# --- a cold start -----------------------------------------------------------
res = synthesize(P, 2, opts)
print(f"first call:  alpha = {res.value:.4f}")
for i, r in enumerate(res.per_start):
    print(f"  start {i}: {r.value:.4f} ({r.iterations} iterations, {r.reason})")

# --- warm-started refinement -------------------------------------------------
res = refine(P, 2, res, opts)
print(f"after refine: alpha = {res.value:.4f}   (optimum {-np.sqrt(15) / 5:.4f})")
g = ss_to_tf(res.controller)
print(format_tf(g.num, g.den, 6))

# the eigenvalues cluster near the optimal point
ev = np.linalg.eigvals(close_loop(P, res.controller).A)
print("closed-loop eigenvalues:", np.round(np.sort_complex(ev), 3))

# --- the printed first controller, and a refine from it ----------------------
K1 = tf_to_ss(plants.MASS_SPRING_K_FIRST)
print(f"printed first controller: alpha = {spectral_abscissa(close_loop(P, K1))[0]:.4f}")
start = synthesize(P, 2, opts, warm_start=ControllerParams.from_statespace(K1), n_starts=1)
print(f"warm-started from it:      alpha = {start.value:.4f}")
