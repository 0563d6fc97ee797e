"""Fixed-order controller synthesis by randomized multi-start nonsmooth BFGS.

The optimization variable is the flat vector of controller matrices
(Ak, Bk, Ck, Dk), each flattened column-major and concatenated in that
order.  Closed loops use positive feedback u = K y.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.linalg

from .analysis import hinf_norm
from .errors import ConfigError, DimensionError, NumericalError, StabilizationFailure
from .statespace import AugmentedPlant, StateSpaceModel, balance_states, controller_matrix

__all__ = [
    "ControllerParams",
    "SynthesisOptions",
    "StartRecord",
    "SynthesisResult",
    "BfgsResult",
    "ClosedLoopObjective",
    "objective_eval",
    "bfgs_nonsmooth",
    "synthesize",
    "refine",
    "OBJECTIVES",
]

log = logging.getLogger(__name__)

OBJECTIVES = ("stabilize_only", "spectral_abscissa", "hinf")
_OBJECTIVE_FLAGS = {"+": "stabilize_only", "s": "spectral_abscissa", "h": "hinf"}

# reciprocal eigenvalue condition below which the attaining eigenvalue is
# treated as defective
_DEFECTIVE_TOL = 1e-13


def resolve_objective(name: str) -> str:
    name = _OBJECTIVE_FLAGS.get(name, name)
    if name not in OBJECTIVES:
        raise ConfigError(f"unknown objective {name!r}; choose from {OBJECTIVES} or +, s, h")
    return name


# ---------------------------------------------------------------------------
# Parameterization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ControllerParams:
    order: int
    ny: int
    nu: int
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).ravel()
        if theta.size != self.size(self.order, self.ny, self.nu):
            raise DimensionError(
                f"theta has {theta.size} entries, order {self.order} {self.nu}x{self.ny} "
                f"controller needs {self.size(self.order, self.ny, self.nu)}")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @staticmethod
    def size(order: int, ny: int, nu: int) -> int:
        k = order
        return k * k + k * ny + nu * k + nu * ny

    def decode(self):
        k, ny, nu = self.order, self.ny, self.nu
        t = self.theta
        i0, i1, i2 = k * k, k * k + k * ny, k * k + k * ny + nu * k
        Ak = t[:i0].reshape((k, k), order="F")
        Bk = t[i0:i1].reshape((k, ny), order="F")
        Ck = t[i1:i2].reshape((nu, k), order="F")
        Dk = t[i2:].reshape((nu, ny), order="F")
        return Ak, Bk, Ck, Dk

    @classmethod
    def encode(cls, Ak, Bk, Ck, Dk) -> "ControllerParams":
        Ak, Bk, Ck, Dk = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (Ak, Bk, Ck, Dk))
        k = Ak.shape[0] if Ak.size else 0
        nu, ny = Dk.shape
        Ak = Ak.reshape(k, k)
        Bk = Bk.reshape(k, ny)
        Ck = Ck.reshape(nu, k)
        theta = np.concatenate([M.ravel(order="F") for M in (Ak, Bk, Ck, Dk)])
        return cls(k, ny, nu, theta)

    @classmethod
    def from_statespace(cls, K: StateSpaceModel, balance: bool = False) -> "ControllerParams":
        """Parameters of K; ``balance=True`` first rescales the state coordinates
        (see ``balance_states``), which helps when K comes from a companion form."""
        if balance:
            K = balance_states(K)
        return cls.encode(K.A, K.B, K.C, K.D)

    def to_statespace(self) -> StateSpaceModel:
        return StateSpaceModel(*self.decode())

    def gain_matrix(self) -> np.ndarray:
        Ak, Bk, Ck, Dk = self.decode()
        return np.block([[Dk, Ck], [Bk, Ak]])

    def with_theta(self, theta) -> "ControllerParams":
        return ControllerParams(self.order, self.ny, self.nu, theta)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.theta))


def _theta_from_gain_grad(GF: np.ndarray, k: int, ny: int, nu: int) -> np.ndarray:
    dD, dC = GF[:nu, :ny], GF[:nu, ny:]
    dB, dA = GF[nu:, :ny], GF[nu:, ny:]
    return np.concatenate([dA.ravel(order="F"), dB.ravel(order="F"),
                           dC.ravel(order="F"), dD.ravel(order="F")])


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------


class ClosedLoopObjective:
    """Objective value and gradient of a closed loop as a function of theta.

    ``hinf`` returns ``+inf`` for destabilizing controllers; the line search
    treats this as an overly long step.
    """

    def __init__(self, p: StateSpaceModel, order: int, objective: str = "hinf",
                 hinf_tol: float = 1e-10):
        if not p.partitioned:
            raise DimensionError("synthesis needs a partitioned plant (see mktito)")
        if order < 0:
            raise ConfigError("controller order must be nonnegative")
        self.objective = resolve_objective(objective)
        self.aug = AugmentedPlant(p, order)
        self.order, self.ny, self.nu = order, p.nmeas, p.ncont
        self.hinf_tol = hinf_tol
        self.nvar = ControllerParams.size(order, self.ny, self.nu)
        self._freq_hint = None
        self.defective = False
        self.nevals = 0

    def params(self, theta) -> ControllerParams:
        return ControllerParams(self.order, self.ny, self.nu, theta)

    def _gain(self, theta):
        return self.params(theta).gain_matrix()

    def closed_loop(self, theta) -> StateSpaceModel:
        return StateSpaceModel(*self.aug.close(self._gain(theta)))

    def abscissa(self, theta) -> float:
        Acl, _, _, _ = self.aug.close(self._gain(theta))
        if Acl.shape[0] == 0:
            return -np.inf
        return float(np.max(scipy.linalg.eigvals(Acl, check_finite=False).real))

    def __call__(self, theta) -> Tuple[float, np.ndarray]:
        self.nevals += 1
        theta = np.asarray(theta, dtype=float)
        if self.objective == "hinf":
            return self._hinf(theta)
        return self._abscissa(theta)

    # -- spectral abscissa --------------------------------------------------
    def _abscissa(self, theta):
        aug = self.aug
        F = self._gain(theta)
        L, N = aug.loop_factors(F)
        Acl, _, _, _ = aug.close(F)
        if Acl.shape[0] == 0:
            return -np.inf, np.zeros(self.nvar)
        w, vl, vr = scipy.linalg.eig(Acl, left=True, right=True, check_finite=False)
        alpha = float(np.max(w.real))
        near = np.flatnonzero(w.real >= alpha - 1e-9)
        # deterministic choice among near-ties: largest |Im|, then largest index
        i = near[np.lexsort((near, np.abs(w[near].imag)))[-1]]
        x, y = vr[:, i], vl[:, i]
        c = np.vdot(y, x)
        self.defective = abs(c) <= _DEFECTIVE_TOL * np.linalg.norm(x) * np.linalg.norm(y)
        if self.defective:
            return alpha, np.full(self.nvar, np.nan)
        left = aug.B2 if L is None else aug.B2 @ L
        right = aug.C2 if N is None else N @ aug.C2
        a = left.conj().T @ y
        b = right @ x
        GF = np.real(np.outer(a.conj(), b) / c)
        return alpha, _theta_from_gain_grad(GF, self.order, self.ny, self.nu)

    # -- H-infinity -----------------------------------------------------------
    def _hinf(self, theta):
        aug = self.aug
        F = self._gain(theta)
        L, N = aug.loop_factors(F)
        Acl, Bcl, Ccl, Dcl = aug.close(F)
        cl = StateSpaceModel(Acl, Bcl, Ccl, Dcl)
        res = hinf_norm(cl, tol=self.hinf_tol, freq_hint=self._freq_hint)
        if not np.isfinite(res.norm):
            return np.inf, np.zeros(self.nvar)
        self._freq_hint = res.peak_frequency if np.isfinite(res.peak_frequency) else None
        w = res.peak_frequency
        n = Acl.shape[0]
        if np.isfinite(w) and n:
            M = 1j * w * np.eye(n) - Acl
            lu = scipy.linalg.lu_factor(M, check_finite=False)
            X = scipy.linalg.lu_solve(lu, Bcl.astype(complex), check_finite=False)
            Yt = scipy.linalg.lu_solve(lu, Ccl.T.astype(complex), trans=1, check_finite=False)
            Y = Yt.T                      # Ccl (jwI - Acl)^{-1}
            T = Ccl @ X + Dcl
        else:
            X = np.zeros((n, Bcl.shape[1]), complex)
            Y = np.zeros((Ccl.shape[0], n), complex)
            T = Dcl.astype(complex)
        U, s, Vh = np.linalg.svd(T)
        u, v = U[:, 0], Vh[0].conj()
        left = aug.D12 + Y @ aug.B2
        right = aug.C2 @ X + aug.D21
        if L is not None:
            left = left @ L
            right = N @ right
        a = left.conj().T @ u
        b = right @ v
        GF = np.real(np.outer(a.conj(), b))
        return float(res.norm), _theta_from_gain_grad(GF, self.order, self.ny, self.nu)


def objective_eval(p: StateSpaceModel, params: ControllerParams, objective: str = "hinf"):
    """Objective value and gradient with respect to ``params.theta``."""
    obj = ClosedLoopObjective(p, params.order, objective)
    if (params.ny, params.nu) != (obj.ny, obj.nu):
        raise DimensionError("controller shape does not match the plant partition")
    return obj(params.theta)


# ---------------------------------------------------------------------------
# BFGS with weak Wolfe line search
# ---------------------------------------------------------------------------


@dataclass
class BfgsResult:
    x: np.ndarray
    f: float
    g: np.ndarray
    reason: str
    iterations: int
    trace: List[float] = field(default_factory=list)


def _finite(f, g) -> bool:
    return np.isfinite(f) and np.all(np.isfinite(g))


def weak_wolfe(f_and_g, x, f0, g0, d, c1=1e-4, c2=0.5, max_steps=50,
               fvalquit=-np.inf):
    """Bracketing/bisection weak Wolfe search along d.

    Returns (t, x_t, f_t, g_t, ok).  When the Wolfe pair is never found the
    best point satisfying sufficient decrease is returned with ok=False
    (t=0 if there is none).
    """
    slope = float(g0 @ d)
    lo, hi = 0.0, np.inf
    t = 1.0
    best = None
    for _ in range(max_steps):
        xt = x + t * d
        ft, gt = f_and_g(xt)
        if not _finite(ft, gt):
            hi = t
        elif ft < fvalquit:
            return t, xt, ft, gt, True
        elif ft > f0 + c1 * t * slope:
            hi = t
        else:
            if best is None or ft < best[2]:
                best = (t, xt, ft, gt)
            if float(gt @ d) < c2 * slope:
                lo = t
            else:
                return t, xt, ft, gt, True
        t = 0.5 * (lo + hi) if np.isfinite(hi) else 2.0 * lo
    if best is not None:
        return (*best, False)
    return 0.0, x, f0, g0, False


def bfgs_nonsmooth(f_and_g: Callable, x0, max_iters: int = 1000, grad_tol: float = 1e-6,
                   fvalquit: float = -np.inf, c1: float = 1e-4, c2: float = 0.5,
                   max_ls: int = 50, stall_iters: int = 50, stall_tol: float = 1e-10) -> BfgsResult:
    """Minimize a locally Lipschitz function with BFGS and weak Wolfe steps.

    Stops on a small gradient, failure to decrease along the search
    direction, ``max_iters``, or when f drops below ``fvalquit``.  Iterates
    are monotone: every accepted step decreases f.  A stall (relative
    decrease below ``stall_tol`` over ``stall_iters`` iterations) counts as
    a line-search failure.
    """
    x = np.array(x0, dtype=float)
    f, g = f_and_g(x)
    trace = [float(f)]
    if not _finite(f, g):
        return BfgsResult(x, float(f), g, "linesearch_fail", 0, trace)
    n = x.size
    H = np.eye(n)
    first = True
    for it in range(1, max_iters + 1):
        if f < fvalquit:
            return BfgsResult(x, f, g, "stabilized_and_quit", it - 1, trace)
        if np.linalg.norm(g) <= grad_tol * (1.0 + abs(f)):
            return BfgsResult(x, f, g, "gradient_small", it - 1, trace)
        d = -H @ g
        if not float(g @ d) < 0:
            H = np.eye(n)
            d = -g
        t, xn, fn, gn, ok = weak_wolfe(f_and_g, x, f, g, d, c1, c2, max_ls, fvalquit)
        if t == 0.0:
            return BfgsResult(x, f, g, "linesearch_fail", it - 1, trace)
        s, y = xn - x, gn - g
        x, f, g = xn, float(fn), gn
        trace.append(f)
        if f < fvalquit:
            return BfgsResult(x, f, g, "stabilized_and_quit", it, trace)
        sty = float(s @ y)
        if sty > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if first:
                H = (sty / float(y @ y)) * np.eye(n)
                first = False
            rho = 1.0 / sty
            Hy = H @ y
            H = (H - rho * (np.outer(s, Hy) + np.outer(Hy, s))
                 + (rho * rho * float(y @ Hy) + rho) * np.outer(s, s))
        if not ok and t > 0 and len(trace) > 2 and trace[-2] - f <= stall_tol * (1 + abs(f)):
            return BfgsResult(x, f, g, "linesearch_fail", it, trace)
        if len(trace) > stall_iters:
            if trace[-stall_iters - 1] - f <= stall_tol * (1.0 + abs(f)):
                return BfgsResult(x, f, g, "linesearch_fail", it, trace)
    return BfgsResult(x, f, g, "max_iters", max_iters, trace)


# ---------------------------------------------------------------------------
# Multi-start driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SynthesisOptions:
    objective: str = "hinf"
    n_starts: int = 3
    rng_seed: int = 0
    max_iters_per_start: int = 1000
    grad_tol: float = 1e-6
    init_scale: float = 1.0
    penalty_barrier: float = 1e-3
    warm_start: Optional[ControllerParams] = None

    def __post_init__(self):
        object.__setattr__(self, "objective", resolve_objective(self.objective))
        if self.n_starts < 1:
            raise ConfigError("n_starts must be at least 1")
        for name in ("max_iters_per_start", "grad_tol", "init_scale", "penalty_barrier"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")


@dataclass
class StartRecord:
    value: float
    iterations: int
    reason: str
    stabilized: bool
    abscissa: float
    theta_norm: float
    theta: np.ndarray
    trace: List[float]
    seconds: float = 0.0


@dataclass
class SynthesisResult:
    best: ControllerParams
    value: float
    per_start: List[StartRecord]
    stabilized: bool
    objective: str = "hinf"

    @property
    def controller(self) -> StateSpaceModel:
        return self.best.to_statespace()


def _initial_theta(opts: SynthesisOptions, nvar: int, i: int, order, ny, nu) -> np.ndarray:
    rng = np.random.default_rng([int(opts.rng_seed), i])
    if opts.warm_start is not None:
        w = opts.warm_start
        if (w.order, w.ny, w.nu) != (order, ny, nu):
            raise DimensionError("warm start does not match (order, ny, nu)")
        if i == 0:
            return np.array(w.theta)
        return w.theta * (1.0 + 0.1 * rng.standard_normal(nvar))
    return opts.init_scale * rng.standard_normal(nvar)


def _run_start(obj_stab: ClosedLoopObjective, obj: ClosedLoopObjective,
               theta0: np.ndarray, opts: SynthesisOptions) -> StartRecord:
    t0 = time.perf_counter()
    quit_level = -opts.penalty_barrier
    theta = theta0
    iters = 0
    reason = None
    trace: List[float] = []
    alpha = obj_stab.abscissa(theta)
    needs_phase1 = opts.objective != "spectral_abscissa" and not alpha < quit_level
    if needs_phase1:
        r = bfgs_nonsmooth(obj_stab, theta, opts.max_iters_per_start, opts.grad_tol,
                           fvalquit=quit_level)
        theta, iters, reason = r.x, r.iterations, r.reason
        alpha = obj_stab.abscissa(theta)
        if r.reason != "stabilized_and_quit" and not alpha < quit_level:
            return StartRecord(np.inf, iters, reason, False, alpha,
                               float(np.linalg.norm(theta)), theta, r.trace,
                               time.perf_counter() - t0)
    if opts.objective == "stabilize_only":
        return StartRecord(alpha, iters, "stabilized_and_quit", alpha < 0, alpha,
                           float(np.linalg.norm(theta)), theta, [alpha],
                           time.perf_counter() - t0)
    r = bfgs_nonsmooth(obj, theta, opts.max_iters_per_start, opts.grad_tol)
    theta, f = r.x, r.f
    alpha = obj_stab.abscissa(theta)
    stabilized = bool(alpha < 0)
    value = float(f) if stabilized or opts.objective == "spectral_abscissa" else np.inf
    return StartRecord(value, iters + r.iterations, r.reason, stabilized, alpha,
                       float(np.linalg.norm(theta)), theta, r.trace,
                       time.perf_counter() - t0)


def synthesize(p: StateSpaceModel, order: int, opts: Optional[SynthesisOptions] = None,
               **overrides) -> SynthesisResult:
    """Search for an order-``order`` controller minimizing ``opts.objective``.

    Each start draws theta0 ~ N(0, init_scale^2) (or the warm start, with 10%
    relative noise after the first start), stabilizes the loop if needed,
    then minimizes the requested objective.  The best stabilized start wins.
    """
    opts = replace(opts or SynthesisOptions(), **overrides)
    if not p.partitioned:
        raise DimensionError("synthesis needs a partitioned plant (see mktito)")
    obj = ClosedLoopObjective(p, order, opts.objective)
    obj_stab = ClosedLoopObjective(p, order, "spectral_abscissa")
    records = []
    for i in range(opts.n_starts):
        theta0 = _initial_theta(opts, obj.nvar, i, order, p.nmeas, p.ncont)
        obj._freq_hint = None
        rec = _run_start(obj_stab, obj, theta0, opts)
        log.info("start %d: value=%.6g iters=%d reason=%s |theta|=%.3g (%.1fs)",
                 i, rec.value, rec.iterations, rec.reason, rec.theta_norm, rec.seconds)
        records.append(rec)
        if opts.objective == "stabilize_only" and rec.stabilized:
            break
    good = [r for r in records if r.stabilized]
    if not good:
        worst = min(records, key=lambda r: r.abscissa)
        raise StabilizationFailure(
            f"no start stabilized the loop (best abscissa {worst.abscissa:.4g})",
            best=obj.params(worst.theta), value=worst.abscissa)
    best = min(good, key=lambda r: r.value)
    return SynthesisResult(obj.params(best.theta), best.value, records, True, opts.objective)


def refine(p: StateSpaceModel, order: int, prev: SynthesisResult,
           opts: Optional[SynthesisOptions] = None, **overrides) -> SynthesisResult:
    """Warm-started rerun from ``prev.best``; never returns a worse value."""
    b = prev.best
    if b.order != order or (b.ny, b.nu) != (p.nmeas, p.ncont):
        raise DimensionError("previous controller does not match (order, partition)")
    opts = replace(opts or SynthesisOptions(objective=prev.objective),
                   warm_start=b, **overrides)
    res = synthesize(p, order, opts)
    if res.value > prev.value:
        return SynthesisResult(prev.best, prev.value, res.per_start, True, res.objective)
    return res
