"""
Reduced-order H-infinity control of the four-disk system
========================================================

Eight states, one measurement, one control.  Low-order controllers come
close to the full-order performance; the printed order-8 controller
shows the plant's flexible modes being cancelled (controller valleys sit
on plant resonance peaks).
"""

import numpy as np

from fixorder import SynthesisOptions, plants, refine, synthesize
from fixorder.analysis import hinf_norm, sigma
from fixorder.statespace import close_loop, format_zpk, ss_to_zpk, tf_to_ss

P = plants.four_disk()
print("channel (3,3) of the plant:")
print(format_zpk(ss_to_zpk(P, 2, 2), 5))

for name, K, ref in [("K1", tf_to_ss(plants.FOUR_DISK_K1), 1.42558),
                     ("K2", tf_to_ss(plants.FOUR_DISK_K2), 1.24382),
                     ("K8", tf_to_ss(plants.FOUR_DISK_K8.to_rational()), 1.13171)]:
    print(f"printed {name}: {hinf_norm(close_loop(P, K)).norm:.5f} (printed {ref})")

opts = SynthesisOptions(objective="hinf", n_starts=3, rng_seed=1729)
res = refine(P, 1, synthesize(P, 1, opts), opts)
print(f"order 1 from scratch: {res.value:.5f}")
print(format_zpk(ss_to_zpk(res.controller), 5))

# valleys of |K8| line up with peaks of |P33|
omega = np.logspace(-1, 1, 100)
k8 = sigma(tf_to_ss(plants.FOUR_DISK_K8.to_rational()), omega)[:, 0]
p33 = sigma(P.channel(2, 2), omega)[:, 0]
valleys = [omega[i] for i in range(1, 99) if k8[i] < k8[i - 1] and k8[i] < k8[i + 1]]
peaks = [omega[i] for i in range(1, 99) if p33[i] > p33[i - 1] and p33[i] > p33[i + 1]]
print("controller valleys (rad/s):", np.round(valleys, 3))
print("plant peaks (rad/s):      ", np.round(peaks, 3))
