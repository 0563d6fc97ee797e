"""
Static output feedback stabilization of AC1
===========================================

The AC1 aircraft model has five states and three measured outputs.  A
static gain u = K y (order zero) is enough to stabilize it; the search
stops as soon as the closed-loop spectral abscissa goes negative.
"""

import numpy as np

from fixorder import plants, synthesize
from fixorder.analysis import spectral_abscissa
from fixorder.statespace import close_loop

P = plants.ac1()
print("open-loop eigenvalues:", np.round(np.linalg.eigvals(P.A), 4))

# objective "+" in the command-line tool: stabilize, then quit
res = synthesize(P, 0, objective="stabilize_only", n_starts=3, rng_seed=1729)
K = res.controller
print("static gain K =\n", np.round(K.D, 4))

alpha, et = spectral_abscissa(close_loop(P, K))
print(f"closed-loop spectral abscissa: {alpha:.4f}")
print("closed-loop eigenvalues:", np.round(np.sort_complex(et.values), 4))

# the printed reference gain gives the published eigenvalue list
ref = np.linalg.eigvals(close_loop(P, plants.ac1_reference_controller()).A)
print("with the printed gain:", np.round(np.sort_complex(ref), 4))
