"""Closed-loop performance measures: spectral abscissa, H-infinity norm,
singular-value frequency response and step response."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import NumericalError, SingularFrequencyError
from .statespace import StateSpaceModel

__all__ = [
    "EigTriple",
    "HinfResult",
    "spectral_abscissa",
    "eig_triple",
    "hinf_norm",
    "hamiltonian",
    "has_imaginary_eigenvalue",
    "freqresp",
    "sigma",
    "sigma_max",
    "step_response",
    "dc_gain",
]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class EigTriple:
    values: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray


@dataclass(frozen=True)
class HinfResult:
    norm: float
    peak_frequency: float
    converged: bool = True
    iterations: int = 0


def eig_triple(A: np.ndarray) -> EigTriple:
    """Eigenvalues with matched left and right eigenvectors.

    Left vectors satisfy y^H A = lambda y^H.
    """
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        e = np.zeros(0, complex)
        v = np.zeros((0, 0), complex)
        return EigTriple(e, v, v)
    try:
        w, vl, vr = scipy.linalg.eig(A, left=True, right=True, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigen-solver failed: {exc}") from exc
    return EigTriple(w, vr, vl)


def _abscissa_of(A: np.ndarray) -> float:
    if A.shape[0] == 0:
        return -np.inf
    try:
        w = scipy.linalg.eigvals(A, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigen-solver failed: {exc}") from exc
    return float(np.max(w.real))


def spectral_abscissa(sys):
    """Return ``(alpha, EigTriple)`` where alpha is the largest real part of the
    eigenvalues of the state matrix.  Accepts a model or a bare square matrix."""
    A = sys.A if isinstance(sys, StateSpaceModel) else np.asarray(sys, dtype=float)
    et = eig_triple(A)
    alpha = float(np.max(et.values.real)) if et.values.size else -np.inf
    return alpha, et


# ---------------------------------------------------------------------------
# Frequency response
# ---------------------------------------------------------------------------


def _hess_form(sys: StateSpaceModel):
    """Hessenberg-reduced (H, Q^T B, C Q): cheap repeated resolvent solves."""
    H, Q = scipy.linalg.hessenberg(sys.A, calc_q=True)
    return H, Q.T @ sys.B, sys.C @ Q


def _resp_at(H, Bq, Cq, D, w):
    n = H.shape[0]
    if n == 0:
        return D.astype(complex)
    M = (1j * w) * np.eye(n) - H
    return Cq @ np.linalg.solve(M, Bq.astype(complex)) + D


def freqresp(sys: StateSpaceModel, freqs: Sequence[float]) -> np.ndarray:
    """Complex response C (jwI - A)^{-1} B + D, shape (len(freqs), p, m)."""
    freqs = np.asarray(freqs, dtype=float).ravel()
    H, Bq, Cq = _hess_form(sys) if sys.n else (sys.A, sys.B, sys.C)
    out = np.empty((freqs.size, sys.noutputs, sys.ninputs), dtype=complex)
    ev = scipy.linalg.eigvals(sys.A, check_finite=False) if sys.n else np.zeros(0)
    for i, w in enumerate(freqs):
        # evaluation on a pole: j*w within 1e-12 (relative) of an eigenvalue of A
        if ev.size and np.any(np.abs(1j * w - ev) <= 1e-12 * np.maximum(1.0, np.abs(ev))):
            raise SingularFrequencyError(f"j*{w} is an eigenvalue of A", index=i)
        out[i] = _resp_at(H, Bq, Cq, sys.D, w)
    return out


def sigma(sys: StateSpaceModel, freqs: Sequence[float]) -> np.ndarray:
    """Singular values of the frequency response, one descending row per frequency."""
    freqs = np.asarray(freqs, dtype=float).ravel()
    if np.any(freqs < 0) or not np.all(np.isfinite(freqs)):
        raise ValueError("frequencies must be finite and nonnegative")
    G = freqresp(sys, freqs)
    return np.linalg.svd(G, compute_uv=False)


def sigma_max(sys: StateSpaceModel, w: float) -> float:
    if not np.isfinite(w):
        return float(np.linalg.norm(sys.D, 2)) if sys.D.size else 0.0
    G = sys.evalfr(1j * w)
    return float(np.linalg.norm(G, 2)) if G.size else 0.0


# ---------------------------------------------------------------------------
# H-infinity norm
# ---------------------------------------------------------------------------


def hamiltonian(sys: StateSpaceModel, gamma: float) -> np.ndarray:
    """Hamiltonian whose imaginary eigenvalues are the frequencies where some
    singular value of the transfer matrix equals ``gamma``."""
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    m = D.shape[1]
    R = gamma ** 2 * np.eye(m) - D.T @ D
    Ri = np.linalg.inv(R)
    Ah = A + B @ Ri @ D.T @ C
    return np.block([
        [Ah, B @ Ri @ B.T],
        [-C.T @ (np.eye(D.shape[0]) + D @ Ri @ D.T) @ C, -Ah.T],
    ])


def _axis_frequencies(Hm: np.ndarray) -> np.ndarray:
    """Nonnegative imaginary parts of eigenvalues of Hm lying on the imaginary axis."""
    ev = scipy.linalg.eigvals(Hm, check_finite=False)
    tol = 1e-8 * (1.0 + np.linalg.norm(Hm, "fro"))
    on_axis = np.abs(ev.real) <= tol
    return np.sort(np.abs(ev[on_axis].imag))


def has_imaginary_eigenvalue(sys: StateSpaceModel, gamma: float) -> bool:
    return _axis_frequencies(hamiltonian(sys, gamma)).size > 0


def _golden_max(f, a: float, b: float, rtol: float = 1e-10, max_iter: int = 200):
    """Maximize a unimodal f on [a, b] by plain golden-section search; returns (x, f(x))."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if (b - a) <= rtol * max(abs(a), abs(b), 1e-300):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _brent_max(f, a: float, b: float, rtol: float = 1e-10):
    """Golden-section search with parabolic acceleration (Brent) on [a, b]."""
    res = scipy.optimize.minimize_scalar(
        lambda w: -f(w), bounds=(a, b), method="bounded",
        options={"xatol": rtol * max(abs(a), abs(b), 1e-12), "maxiter": 200})
    return float(res.x), -float(res.fun)


def hinf_norm(sys: StateSpaceModel, tol: float = 1e-6, max_iter: int = 100,
              freq_hint: Optional[float] = None) -> HinfResult:
    """H-infinity norm of a stable continuous-time model.

    Level-set iteration on the Hamiltonian test: the lower bound is raised to
    the best singular value found between consecutive imaginary-axis
    crossings until the level ``(1 + 2 tol) * lower`` has no crossing.  The
    peak is then polished by bounded Brent search inside its crossing
    bracket, so the returned norm is the attained value ``sigma_max(T(j w*))``.
    Unstable models return ``norm = inf``.
    """
    if sys.n and _abscissa_of(sys.A) >= 0:
        return HinfResult(np.inf, np.nan, converged=True)
    sd = float(np.linalg.norm(sys.D, 2)) if sys.D.size else 0.0
    if sys.n == 0 or not np.any(sys.B) or not np.any(sys.C):
        return HinfResult(sd, np.inf if sd > 0 else 0.0)

    H, Bq, Cq = _hess_form(sys)
    D = sys.D

    def smax(w):
        G = _resp_at(H, Bq, Cq, D, w)
        return float(np.linalg.svd(G, compute_uv=False)[0])

    ev = scipy.linalg.eigvals(sys.A, check_finite=False)
    probes = [0.0]
    probes += list(np.abs(ev.imag[ev.imag > 0]))
    probes += list(np.abs(ev))
    if freq_hint is not None and np.isfinite(freq_hint):
        probes.append(abs(freq_hint))
    lo, w_best = sd, np.inf
    for w in probes:
        s = smax(w)
        if s > lo:
            lo, w_best = s, w
    if lo == 0.0:
        return HinfResult(0.0, 0.0)

    bracket = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gamma = (1.0 + 2.0 * tol) * lo
        freqs = _axis_frequencies(hamiltonian(sys, gamma))
        if freqs.size == 0:
            converged = True
            break
        pts = np.concatenate([[0.0], freqs])
        mids = 0.5 * (pts[:-1] + pts[1:])
        vals = np.array([smax(w) for w in mids])
        j = int(np.argmax(vals))
        bracket = (pts[j], pts[j + 1])
        if vals[j] <= lo * (1.0 + 1e-3 * tol):
            # crossings present but no improvement: numerically converged
            converged = True
            break
        lo, w_best = float(vals[j]), float(mids[j])
    if not converged:
        raise NumericalError("H-infinity level-set iteration did not converge",
                             partial=HinfResult(lo, w_best, converged=False, iterations=it))

    if np.isfinite(w_best):
        if bracket is None or not (bracket[0] <= w_best <= bracket[1]):
            bracket = (w_best / 1.05, w_best * 1.05) if w_best > 0 else (0.0, 1e-6)
        w_g, s_g = _brent_max(smax, bracket[0], bracket[1])
        if s_g > lo:
            lo, w_best = s_g, w_g
        if bracket[0] == 0.0 and smax(0.0) >= lo:
            lo, w_best = smax(0.0), 0.0
    return HinfResult(lo, w_best, converged=True, iterations=it)


# ---------------------------------------------------------------------------
# Time response
# ---------------------------------------------------------------------------


def step_response(sys: StateSpaceModel, t_final: float, n_points: int = 200):
    """Unit-step responses by exact zero-order-hold discretization.

    Returns ``(t, y)`` with ``y[k, i, j]`` the response of output i to a step
    on input j at time ``t[k]``.
    """
    if n_points < 2 or not t_final > 0:
        raise ValueError("need n_points >= 2 and t_final > 0")
    t = np.linspace(0.0, t_final, n_points)
    n, p, m = sys.n, sys.noutputs, sys.ninputs
    y = np.empty((n_points, p, m))
    if n == 0:
        y[:] = sys.D
        return t, y
    dt = t[1] - t[0]
    M = np.zeros((n + m, n + m))
    M[:n, :n] = sys.A
    M[:n, n:] = sys.B
    E = scipy.linalg.expm(M * dt)
    Ad, Bd = E[:n, :n], E[:n, n:]
    X = np.zeros((n, m))        # one state trajectory per input channel
    with np.errstate(over="raise", invalid="raise"):
        try:
            for k in range(n_points):
                y[k] = sys.C @ X + sys.D
                X = Ad @ X + Bd
        except FloatingPointError as exc:
            raise NumericalError(f"step response overflowed: {exc}") from exc
    if not np.all(np.isfinite(y)):
        raise NumericalError("step response overflowed")
    return t, y


def dc_gain(sys: StateSpaceModel) -> np.ndarray:
    if sys.n == 0:
        return np.array(sys.D)
    return sys.D - sys.C @ np.linalg.solve(sys.A, sys.B)
