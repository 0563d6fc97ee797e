"""Literal plant data and printed reference controllers for the six design
experiments.  Matrices are copied digit-for-digit from their published
listings; nothing here is fitted or recomputed."""

from __future__ import annotations

import numpy as np

from .statespace import (
    RationalSiso,
    S,
    StateSpaceModel,
    ZpkForm,
    augw,
    mktito,
    static_gain,
    tf_to_ss,
)

# --- AC1 aircraft (5 states, 3 inputs, 3 outputs) --------------------------

AC1_A = np.array([
    [0, 0, 1.132, 0, -1],
    [0, -0.0538, -0.1712, 0, 0.0705],
    [0, 0, 0, 1, 0],
    [0, 0.0485, 0, -0.8556, -1.013],
    [0, -0.2909, 0, 1.053, -0.6859],
])
AC1_B = np.array([
    [0, 0, 0],
    [-0.12, 1, 0],
    [0, 0, 0],
    [4.419, 0, -1.665],
    [1.575, 0, -0.0732],
])
AC1_C = np.array([
    [1, 0, 0, 0, 0],
    [0, 1, 0, 0, 0],
    [0, 0, 1, 0, 0],
])
AC1_K = np.array([
    [0.1778, -0.06802, -2.76],
    [0.6741, -1.402, 2.051],
    [1.463, 2.957, -1.568],
])
AC1_EIGS = np.array([-0.2537 + 3.2758j, -0.2537 - 3.2758j, -2.3229,
                     -0.0796 + 1.1206j, -0.0796 - 1.1206j])


def ac1() -> StateSpaceModel:
    G = StateSpaceModel(AC1_A, AC1_B, AC1_C, np.zeros((3, 3)))
    return mktito(G, 3, 3)


def ac1_reference_controller() -> StateSpaceModel:
    return static_gain(AC1_K)


# --- two masses and a spring ------------------------------------------------

MASS_SPRING_DEN = [1, 0, 2, 0, 0]
MASS_SPRING_K_FIRST = RationalSiso([6.8308175, -1.8486865, -0.28043397],
                                   [1, 4.2752492, 6.0786141])
MASS_SPRING_K_THIRD = RationalSiso([8.073790, -1.7330367, -0.23544720],
                                   [1, 4.5435259, 6.7343390])
MASS_SPRING_ALPHA_FIRST = -0.7073
MASS_SPRING_ALPHA_SECOND = -0.7380
MASS_SPRING_ALPHA_THIRD = -0.7572
MASS_SPRING_ALPHA_OPT = -np.sqrt(15.0) / 5.0


def mass_spring_optimal_controller() -> RationalSiso:
    r = np.sqrt(15.0)
    return RationalSiso([43 / 5, -54 * r / 125, -27 / 125], [1, 6 * r / 5, 7])


def two_mass_spring() -> StateSpaceModel:
    """1/(s^4 + 2 s^2) with no performance channels; partition (1, 1)."""
    return mktito(tf_to_ss(RationalSiso([1], MASS_SPRING_DEN)), 1, 1)


# --- NASA HiMAT pitch axis --------------------------------------------------

HIMAT_A = np.array([
    [-2.2567e-02, -3.6617e+01, -1.8897e+01, -3.2090e+01, 3.2509e+00, -7.6257e-01],
    [9.2572e-05, -1.8997e+00, 9.8312e-01, -7.2562e-04, -1.7080e-01, -4.9652e-03],
    [1.2338e-02, 1.1720e+01, -2.6316e+00, 8.7582e-04, -3.1604e+01, 2.2396e+01],
    [0, 0, 1.0000e+00, 0, 0, 0],
    [0, 0, 0, 0, -3.0000e+01, 0],
    [0, 0, 0, 0, 0, -3.0000e+01],
])
HIMAT_B = np.array([[0, 0], [0, 0], [0, 0], [0, 0], [30, 0], [0, 30]], dtype=float)
HIMAT_C = np.array([[0, 1, 0, 0, 0, 0], [0, 0, 0, 1, 0, 0]], dtype=float)
HIMAT_MS, HIMAT_AS, HIMAT_WS = 2.0, 0.03, 5.0
HIMAT_MT, HIMAT_AT, HIMAT_WT = 2.0, 0.05, 20.0
# performances per controller order from successive runs; order 10 is the
# full-order mixed-sensitivity reference
HIMAT_PERF = {0: 3.8207, 1: 2.1477, 2: 1.5245, 3: 0.9897, 10: 0.7885}
HIMAT_K3 = StateSpaceModel(
    [[-11.1, -0.2587, 31.93], [2.4, 0.03315, -7.116], [189, 2.964, -559.5]],
    [[-9.617, 50.87], [2.369, -10.98], [108.1, -853.5]],
    [[56.08, 1.175, -88.97], [22.51, 2.271, 47.12]],
    [[-51.53, -77.27], [-106.1, 156.2]],
)


def himat_plant() -> StateSpaceModel:
    return StateSpaceModel(HIMAT_A, HIMAT_B, HIMAT_C, np.zeros((2, 2)))


def himat_weights():
    W1 = (S / HIMAT_MS + HIMAT_WS) / (S + HIMAT_AS * HIMAT_WS)
    W3 = (S + HIMAT_WT / HIMAT_MT) / (HIMAT_AT * S + HIMAT_WT)
    return W1, W3


def himat() -> StateSpaceModel:
    W1, W3 = himat_weights()
    return augw(himat_plant(), W1, None, W3)


# --- four disks -------------------------------------------------------------

FOUR_DISK_A = np.vstack([
    [-0.161, -6.004, -0.58215, -9.9835, -0.40727, -3.982, 0, 0],
    np.hstack([np.eye(7), np.zeros((7, 1))]),
])
FOUR_DISK_B = np.vstack([[1, 0, 1], np.zeros((7, 3))])
FOUR_DISK_C = np.array([
    1e-3 * np.array([0, 0, 0, 0, 0.55, 11, 1.32, 18]),
    np.zeros(8),
    [0, 0, 6.4432e-3, 2.3196e-3, 7.1252e-2, 1.0002, 0.10455, 0.99551],
])
FOUR_DISK_D = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=float)
# achieved performance per order (this toolkit's lineage) and the
# order-reduction results quoted from the literature for comparison
FOUR_DISK_PERF = {8: 1.1317, 7: 1.1267, 6: 1.1326, 2: 1.2438, 1: 1.4256}
FOUR_DISK_PERF_PRECISE = {1: 1.42558, 2: 1.24382, 8: 1.13171}
FOUR_DISK_REDUCTION = {8: 1.1272, 7: 1.1960, 6: 1.1950, 2: 1.4150, 1: 2.4670}
FOUR_DISK_K1 = RationalSiso([-0.1227, -0.003706], [1, 0.2082])
FOUR_DISK_K2 = RationalSiso([-0.03473, -0.1821, -0.006087], [1, 0.6846, 0.2454])


def _quad(b, c):
    r = np.roots([1, b, c])
    return list(r)


FOUR_DISK_K8 = ZpkForm(
    zeros=[-3.232, -0.03049] + _quad(0.02897, 0.5845) + _quad(0.08555, 1.995) + _quad(2.208, 10.51),
    poles=[-3.295, -0.6869] + _quad(0.2009, 0.7842) + _quad(0.4285, 2.09) + _quad(2.205, 10.71),
    gain=-1.1301,
)
# channel (3,3) of the open-loop plant
FOUR_DISK_P33 = ZpkForm(
    zeros=[-4.84] + _quad(0.04, 1) + _quad(-4.52, 31.92),
    poles=[0, 0] + _quad(0.0306, 0.5852) + _quad(0.0564, 1.988) + _quad(0.074, 3.423),
    gain=0.0064432,
)


def four_disk() -> StateSpaceModel:
    return mktito(StateSpaceModel(FOUR_DISK_A, FOUR_DISK_B, FOUR_DISK_C, FOUR_DISK_D), 1, 1)


# --- regular problem with order drop ---------------------------------------

GAHINET_A = np.array([[1, -1, 0], [1, 1, -1], [0, 1, -2]], dtype=float)
GAHINET_B1 = np.array([[1, 2, 0], [0, -1, 0], [1, 1, 0]], dtype=float)
GAHINET_B2 = np.array([[1], [0], [1]], dtype=float)
GAHINET_C1 = np.array([[0, 0, 0], [1, 1, 0], [-1, 0, 1]], dtype=float)
GAHINET_D11 = np.zeros((3, 3))
GAHINET_D12 = np.array([[1], [0], [0]], dtype=float)
GAHINET_C2 = np.array([[0, -1, 1]], dtype=float)
GAHINET_D21 = np.array([[0, 0, 1]], dtype=float)
GAHINET_D22 = np.zeros((1, 1))
GAHINET_OPT = 21.5279         # optimal level from the Riccati theory
GAHINET_ARE = 21.5284         # full-order Riccati-based design
GAHINET_LMI = 21.6040         # LMI-based design
GAHINET_PERF = {3: 21.5488, 2: 21.5284}
GAHINET_PERF_FIRST = {3: 21.9398, 2: 21.5448}
GAHINET_K2 = ZpkForm([-1.672, 0.7551], [-29.28, -0.09616], 21.5284)
GAHINET_K3_FIRST = RationalSiso([12.67, 504.1, 430.7, -632.7], [1, 42.13, 680.1, 64.37])
GAHINET_K3 = RationalSiso([20.64, 1097, 961.6, -1362], [1, 78.46, 1475, 141])


def gahinet() -> StateSpaceModel:
    B = np.hstack([GAHINET_B1, GAHINET_B2])
    C = np.vstack([GAHINET_C1, GAHINET_C2])
    D = np.block([[GAHINET_D11, GAHINET_D12], [GAHINET_D21, GAHINET_D22]])
    return mktito(StateSpaceModel(GAHINET_A, B, C, D), 1, 1)


# --- minimum sensitivity with a non-proper optimum ---------------------------

KWAK_G = RationalSiso([1, -1], np.convolve([1, -2], [1, -3]))
KWAK_OPT = 6.0
KWAK_OPT_CONTROLLER = "K(s) = 5 - (5/6) s"   # non-proper; not realizable here
KWAK_K_FIRST = RationalSiso([-4.882e4, 2.939e5], [1, 5.874e4])
KWAK_K_FIRST_ZPK = ZpkForm([6.019], [-5.874e4], -48816.5465)
KWAK_K_REFINED = ZpkForm([6.001], [-5.851e4], -48748.0539)
KWAK_PERF_FIRST = 6.01608
KWAK_PERF_REFINED = 6.00024


def kwakernaak() -> StateSpaceModel:
    return augw(tf_to_ss(KWAK_G), 1.0, None, None)
