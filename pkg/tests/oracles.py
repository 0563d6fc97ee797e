"""Independent reference computations used by the tests.

Nothing here imports the package's numerical routines: the H-infinity
oracle is a dense frequency sweep, gradients are central differences, and
random systems are drawn directly with numpy.
"""

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def sigma_max_grid(A, B, C, D, omega, chunk=4000):
    """Largest singular value of C (jwI - A)^{-1} B + D on a frequency grid."""
    n = A.shape[0]
    out = np.empty(omega.size)
    I = np.eye(n)
    for lo in range(0, omega.size, chunk):
        w = omega[lo:lo + chunk]
        M = 1j * w[:, None, None] * I[None] - A[None]
        X = np.linalg.solve(M, np.broadcast_to(B.astype(complex), (w.size,) + B.shape))
        G = C[None] @ X + D[None]
        out[lo:lo + chunk] = np.linalg.svd(G, compute_uv=False)[:, 0]
    return out


def _sigma_at(A, B, C, D, w):
    return sigma_max_grid(A, B, C, D, np.array([w]))[0]


def golden_max(f, a, b, rtol=1e-13, max_iter=300):
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= rtol * max(abs(b), 1e-300):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return max(fc, fd)


def grid_hinf(A, B, C, D, n_grid=100_000, wmin=1e-4, wmax=1e4):
    """H-infinity norm by a log grid plus golden-section refinement at the grid maximum.

    omega = 0 and the infinite-frequency value sigma_max(D) are included.
    """
    A, B, C, D = (np.asarray(M, dtype=float) for M in (A, B, C, D))
    omega = np.concatenate([[0.0], np.logspace(np.log10(wmin), np.log10(wmax), n_grid)])
    s = sigma_max_grid(A, B, C, D, omega)
    j = int(np.argmax(s))
    best = s[j]
    lo = omega[max(j - 1, 0)]
    hi = omega[min(j + 1, omega.size - 1)]
    if hi > lo:
        best = max(best, golden_max(lambda w: _sigma_at(A, B, C, D, w), lo, hi))
    d_floor = np.linalg.norm(D, 2) if D.size else 0.0
    return max(best, d_floor)


def random_stable(rng, n, p, m, margin=(0.05, 1.0), with_d=True):
    """Random real (A, B, C, D) with spectral abscissa in -margin."""
    A = rng.standard_normal((n, n))
    shift = np.max(np.linalg.eigvals(A).real) + rng.uniform(*margin)
    A = A - shift * np.eye(n)
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    D = rng.standard_normal((p, m)) * (0.5 if with_d and rng.random() < 0.5 else 0.0)
    return A, B, C, D


def central_difference(f, x, rel=1e-6):
    """Central differences with step h_j = rel * (1 + |x_j|)."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        h = rel * (1.0 + abs(x[j]))
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def poly_from_roots(roots):
    return np.real(np.poly(roots))
