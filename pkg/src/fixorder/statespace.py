"""State-space and rational transfer-function types plus interconnection algebra.

Sign convention: every closed loop in this package uses positive feedback,
``u = K y``.  A loop written as ``feedback(P, -K)`` in MATLAB notation is
``close_loop(P, K)`` here.

Partitioned ("TITO") plants carry ``nmeas`` and ``ncont``; the measured
outputs are the last ``nmeas`` rows of C and the control inputs are the last
``ncont`` columns of B.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from numbers import Real
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg

from .errors import (
    AlgebraicLoopError,
    ConfigError,
    DegenerateError,
    DimensionError,
    NonProperError,
    PlantFormatError,
)

__all__ = [
    "RationalSiso",
    "ZpkForm",
    "StateSpaceModel",
    "rational_arith",
    "tf_to_ss",
    "ss_to_zpk",
    "ss_to_tf",
    "mktito",
    "augw",
    "close_loop",
    "sensitivity_maps",
    "static_gain",
    "minreal",
    "balance_states",
    "format_zpk",
    "format_tf",
    "S",
]


def _as_matrix(M, rows=None, cols=None) -> np.ndarray:
    M = np.array(M, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    elif M.ndim == 1:
        if M.size == 0:
            M = np.zeros((rows or 0, cols or 0))
        else:
            M = M.reshape(1, -1)
    if M.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {M.shape}")
    M.setflags(write=False)
    return M


def _trim_poly(c: np.ndarray) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1)
    return c[nz[0]:]


# ---------------------------------------------------------------------------
# Rational SISO transfer functions
# ---------------------------------------------------------------------------


class RationalSiso:
    """SISO transfer function num(s)/den(s), coefficients in descending powers.

    The stored representation always has a monic denominator and no common
    power-of-s factor.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1.0,)):
        num = _trim_poly(num)
        den = _trim_poly(den)
        if not np.any(den):
            raise DegenerateError("denominator is identically zero")
        if np.any(num):
            # cancel common factors of s
            while num.size > 1 and den.size > 1 and num[-1] == 0 and den[-1] == 0:
                num = num[:-1]
                den = den[:-1]
        lead = den[0]
        num = num / lead
        den = den / lead
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RationalSiso is immutable")

    @classmethod
    def coerce(cls, x) -> "RationalSiso":
        if isinstance(x, RationalSiso):
            return x
        if isinstance(x, Real):
            return cls([float(x)], [1.0])
        raise TypeError(f"cannot interpret {type(x).__name__} as a RationalSiso")

    @property
    def is_proper(self) -> bool:
        if not np.any(self.num):
            return True
        return self.num.size <= self.den.size

    @property
    def is_zero(self) -> bool:
        return not np.any(self.num)

    def __call__(self, s):
        return np.polyval(self.num, s) / np.polyval(self.den, s)

    def __add__(self, other):
        return rational_arith(self, other, "add")

    __radd__ = __add__

    def __sub__(self, other):
        return rational_arith(self, -RationalSiso.coerce(other), "add")

    def __rsub__(self, other):
        return rational_arith(RationalSiso.coerce(other), -self, "add")

    def __neg__(self):
        return RationalSiso(-self.num, self.den)

    def __mul__(self, other):
        return rational_arith(self, other, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return rational_arith(self, other, "div")

    def __rtruediv__(self, other):
        return rational_arith(RationalSiso.coerce(other), self, "div")

    def __eq__(self, other):
        if not isinstance(other, RationalSiso):
            return NotImplemented
        return (self.num.shape == other.num.shape and self.den.shape == other.den.shape
                and np.array_equal(self.num, other.num) and np.array_equal(self.den, other.den))

    def __hash__(self):
        return hash((self.num.tobytes(), self.den.tobytes()))

    def __repr__(self):
        return f"RationalSiso(num={self.num.tolist()}, den={self.den.tolist()})"

    def __str__(self):
        return format_tf(self.num, self.den)


S = RationalSiso([1.0, 0.0], [1.0])  # the Laplace variable


def rational_arith(a, b, op: str) -> RationalSiso:
    """Exact polynomial arithmetic on rational functions. ``op`` is add, mul or div."""
    a = RationalSiso.coerce(a)
    b = RationalSiso.coerce(b)
    if op == "add":
        num = np.polyadd(np.convolve(a.num, b.den), np.convolve(b.num, a.den))
        den = np.convolve(a.den, b.den)
    elif op == "mul":
        num = np.convolve(a.num, b.num)
        den = np.convolve(a.den, b.den)
    elif op == "div":
        if b.is_zero:
            raise DegenerateError("division by the zero rational function")
        num = np.convolve(a.num, b.den)
        den = np.convolve(a.den, b.num)
    else:
        raise ConfigError(f"unknown rational operation {op!r}")
    return RationalSiso(num, den)


# ---------------------------------------------------------------------------
# Zero/pole/gain
# ---------------------------------------------------------------------------


def _pair_roots(r: np.ndarray, tol: float = 1e-8):
    """Split roots into real ones and representatives of conjugate pairs.

    Ordering is deterministic: sorted on (Re, |Im|).
    """
    r = np.asarray(r, dtype=complex)
    scale = np.maximum(1.0, np.abs(r))
    is_real = np.abs(r.imag) <= tol * scale
    reals = np.sort(r[is_real].real)
    cplx = r[~is_real]
    upper = cplx[cplx.imag > 0]
    upper = upper[np.lexsort((np.abs(upper.imag), upper.real))]
    return reals, upper


@dataclass(frozen=True)
class ZpkForm:
    zeros: np.ndarray
    poles: np.ndarray
    gain: float

    def __post_init__(self):
        for name in ("zeros", "poles"):
            v = np.array(getattr(self, name), dtype=complex).ravel()
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "gain", float(self.gain))

    def to_rational(self, tol: float = 1e-8) -> RationalSiso:
        num = self.gain * np.poly(self.zeros) if self.zeros.size else np.array([self.gain])
        den = np.poly(self.poles) if self.poles.size else np.array([1.0])
        for c in (num, den):
            c_abs = np.max(np.abs(c))
            if np.any(np.abs(np.imag(c)) > tol * max(1.0, c_abs)):
                raise DegenerateError("zeros/poles are not closed under conjugation")
        return RationalSiso(np.real(num), np.real(den))

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        num = self.gain * np.prod([s - z for z in self.zeros], axis=0) if self.zeros.size else self.gain
        den = np.prod([s - p for p in self.poles], axis=0) if self.poles.size else 1.0
        return num / den

    def format(self, digits: int = 4) -> str:
        return format_zpk(self, digits)

    __str__ = format


def _fmt(x: float, digits: int) -> str:
    return f"{x:.{digits}g}"


def _factor_strings(roots, digits):
    roots = np.asarray(roots, dtype=complex)
    # a multiple root at the origin is computed as a tiny cluster; show it as s^k
    snap = 1e-6 * max(1.0, float(np.max(np.abs(roots)))) if roots.size else 0.0
    roots = np.where(np.abs(roots) <= snap, 0.0, roots)
    reals, upper = _pair_roots(roots)
    out = []
    for r in reals:
        if r == 0:
            out.append("s")
        else:
            out.append(f"(s{'+' if -r >= 0 else '-'}{_fmt(abs(r), digits)})")
    for r in upper:
        b = -2.0 * r.real
        c = abs(r) ** 2
        lin = "" if b == 0 else f" {'+' if b > 0 else '-'} {_fmt(abs(b), digits)}s"
        out.append(f"(s^2{lin} + {_fmt(c, digits)})")
    # collapse repeated bare s factors into s^k
    n_s = out.count("s")
    out = [f for f in out if f != "s"]
    if n_s:
        out.insert(0, "s" if n_s == 1 else f"s^{n_s}")
    return out


def format_zpk(z: ZpkForm, digits: int = 4) -> str:
    """Render in factored display form, e.g. ``-1.13 (s+3.232) (s^2 + 0.029s + 0.58)``."""
    num = " ".join([_fmt(z.gain, max(digits, 5))] + _factor_strings(z.zeros, digits))
    den_f = _factor_strings(z.poles, digits)
    den = " ".join(den_f) if den_f else "1"
    width = max(len(num), len(den))
    return f"{num.center(width)}\n{'-' * width}\n{den.center(width)}"


def _poly_string(c: np.ndarray, digits: int) -> str:
    deg = len(c) - 1
    terms = []
    for i, a in enumerate(c):
        if a == 0:
            continue
        p = deg - i
        mag = abs(a)
        coef = "" if (mag == 1 and p > 0) else _fmt(mag, digits)
        var = "" if p == 0 else ("s" if p == 1 else f"s^{p}")
        sep = "" if coef == "" or var == "" else " "
        sign = "-" if a < 0 else "+"
        terms.append((sign, f"{coef}{sep}{var}"))
    if not terms:
        return "0"
    head_sign, head = terms[0]
    s = ("-" if head_sign == "-" else "") + head
    for sign, t in terms[1:]:
        s += f" {sign} {t}"
    return s


def format_tf(num, den, digits: int = 4) -> str:
    top = _poly_string(np.asarray(num, dtype=float), digits)
    bot = _poly_string(np.asarray(den, dtype=float), digits)
    if bot == "1":
        return top
    width = max(len(top), len(bot))
    return f"{top.center(width)}\n{'-' * width}\n{bot.center(width)}"


# ---------------------------------------------------------------------------
# State-space models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateSpaceModel:
    """Continuous-time model dx/dt = A x + B u, y = C x + D u.

    Arrays are stored read-only.  ``nmeas``/``ncont`` are either both set
    (partitioned plant) or both ``None``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    nmeas: Optional[int] = None
    ncont: Optional[int] = None

    def __post_init__(self):
        D = _as_matrix(self.D)
        p, m = D.shape
        A = _as_matrix(self.A)
        n = A.shape[0]
        B = _as_matrix(self.B, n, m)
        C = _as_matrix(self.C, p, n)
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape != (n, m):
            raise DimensionError(f"B has shape {B.shape}, expected {(n, m)}")
        if C.shape != (p, n):
            raise DimensionError(f"C has shape {C.shape}, expected {(p, n)}")
        for name, M in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(M)):
                raise DegenerateError(f"{name} has non-finite entries")
            object.__setattr__(self, name, M)
        if (self.nmeas is None) != (self.ncont is None):
            raise DimensionError("nmeas and ncont must be given together")
        if self.nmeas is not None:
            nmeas, ncont = int(self.nmeas), int(self.ncont)
            if not (0 < nmeas <= p and 0 < ncont <= m):
                raise DimensionError(
                    f"partition ({nmeas}, {ncont}) incompatible with {p} outputs, {m} inputs")
            object.__setattr__(self, "nmeas", nmeas)
            object.__setattr__(self, "ncont", ncont)

    # dimensions -----------------------------------------------------------
    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def noutputs(self) -> int:
        return self.D.shape[0]

    @property
    def ninputs(self) -> int:
        return self.D.shape[1]

    @property
    def partitioned(self) -> bool:
        return self.nmeas is not None

    def blocks(self):
        """Return (A, B1, B2, C1, C2, D11, D12, D21, D22) of a partitioned plant."""
        if not self.partitioned:
            raise DimensionError("plant has no TITO partition")
        nw = self.ninputs - self.ncont
        nz = self.noutputs - self.nmeas
        B, C, D = self.B, self.C, self.D
        return (self.A, B[:, :nw], B[:, nw:], C[:nz], C[nz:],
                D[:nz, :nw], D[:nz, nw:], D[nz:, :nw], D[nz:, nw:])

    # evaluation -----------------------------------------------------------
    def evalfr(self, s: complex) -> np.ndarray:
        """Transfer matrix C (sI - A)^{-1} B + D at the complex point ``s``."""
        if self.n == 0:
            return self.D.astype(complex)
        M = s * np.eye(self.n) - self.A
        return self.C @ np.linalg.solve(M, self.B.astype(complex)) + self.D

    def channel(self, out: int, inp: int) -> "StateSpaceModel":
        if not (0 <= out < self.noutputs and 0 <= inp < self.ninputs):
            raise IndexError(f"channel ({out}, {inp}) outside {self.noutputs}x{self.ninputs}")
        return StateSpaceModel(self.A, self.B[:, [inp]], self.C[[out], :], self.D[[out]][:, [inp]])

    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.A) if self.n else np.zeros(0, complex)

    def without_partition(self) -> "StateSpaceModel":
        return StateSpaceModel(self.A, self.B, self.C, self.D)

    # serialization ----------------------------------------------------------
    def to_dict(self) -> dict:
        d = {"A": self.A.tolist(), "B": self.B.tolist(), "C": self.C.tolist(), "D": self.D.tolist()}
        if self.partitioned:
            d["nmeas"] = self.nmeas
            d["ncont"] = self.ncont
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpaceModel":
        try:
            D = np.array(d["D"], dtype=float)
            if D.ndim != 2:
                D = D.reshape(1, -1) if D.size else np.zeros((0, 0))
            p, m = D.shape
            A = np.array(d.get("A", []), dtype=float)
            n = A.shape[0] if A.size else 0
            A = A.reshape(n, n)
            B = np.array(d.get("B", []), dtype=float).reshape(n, m)
            C = np.array(d.get("C", []), dtype=float).reshape(p, n)
            return cls(A, B, C, D, d.get("nmeas"), d.get("ncont"))
        except (KeyError, ValueError, TypeError) as exc:
            raise PlantFormatError(f"invalid plant description: {exc}") from exc

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "StateSpaceModel":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PlantFormatError(f"invalid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise PlantFormatError("plant JSON must be an object")
        return cls.from_dict(d)

    def __repr__(self):
        part = f", partition=({self.nmeas}, {self.ncont})" if self.partitioned else ""
        return (f"StateSpaceModel(n={self.n}, outputs={self.noutputs}, "
                f"inputs={self.ninputs}{part})")


def static_gain(D) -> StateSpaceModel:
    D = _as_matrix(D)
    return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, D.shape[1])),
                           np.zeros((D.shape[0], 0)), D)


def _block_diag(*systems: StateSpaceModel) -> StateSpaceModel:
    return StateSpaceModel(
        scipy.linalg.block_diag(*[s.A for s in systems]) if systems else np.zeros((0, 0)),
        scipy.linalg.block_diag(*[s.B for s in systems]),
        scipy.linalg.block_diag(*[s.C for s in systems]),
        scipy.linalg.block_diag(*[s.D for s in systems]),
    )


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------


def tf_to_ss(g: RationalSiso) -> StateSpaceModel:
    """Controllable canonical realization of a proper SISO transfer function."""
    g = RationalSiso.coerce(g)
    if not g.is_proper:
        raise NonProperError(f"cannot realize non-proper transfer function {g!r}")
    den = g.den
    n = den.size - 1
    num = np.concatenate([np.zeros(n + 1 - g.num.size), g.num])
    d = num[0]
    rest = num[1:] - d * den[1:]
    A = np.zeros((n, n))
    if n:
        A[0, :] = -den[1:]
        A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    if n:
        B[0, 0] = 1.0
    return StateSpaceModel(A, B, rest.reshape(1, n), [[d]])


def _orth_range(M: np.ndarray, tol: float) -> np.ndarray:
    if M.size == 0:
        return np.zeros((M.shape[0], 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return U[:, s > tol]


def _reachable_basis(A: np.ndarray, B: np.ndarray, tol: float) -> np.ndarray:
    n = A.shape[0]
    scale = max(np.linalg.norm(A, 2), np.linalg.norm(B, 2), 1e-300)
    V = _orth_range(B, tol * scale)
    block = V
    while V.shape[1] < n and block.shape[1] > 0:
        W = A @ block
        for _ in range(2):
            W = W - V @ (V.T @ W)
        block = _orth_range(W, tol * scale)
        V = np.hstack([V, block])
    return V


def minreal(sys: StateSpaceModel, tol: float = 1e-10) -> StateSpaceModel:
    """Remove uncontrollable and unobservable states by orthogonal projection."""
    V = _reachable_basis(sys.A, sys.B, tol)
    A, B, C = V.T @ sys.A @ V, V.T @ sys.B, sys.C @ V
    W = _reachable_basis(A.T, C.T, tol)
    return StateSpaceModel(W.T @ A @ W, W.T @ B, C @ W, sys.D)


def balance_states(sys: StateSpaceModel, sweeps: int = 20) -> StateSpaceModel:
    """Diagonal state scaling that equalizes the row and column norms of [[A, B], [C, 0]].

    Scale factors are powers of two, so the transfer function is unchanged
    to the last bit; only the realization's conditioning improves.
    """
    n = sys.n
    if n == 0:
        return sys
    A, B, C = np.array(sys.A), np.array(sys.B), np.array(sys.C)
    for _ in range(sweeps):
        changed = False
        for i in range(n):
            row = np.hypot(np.linalg.norm(np.delete(A[i], i)), np.linalg.norm(B[i]))
            col = np.hypot(np.linalg.norm(np.delete(A[:, i], i)), np.linalg.norm(C[:, i]))
            if row == 0.0 or col == 0.0:
                continue
            t = 2.0 ** np.round(0.5 * np.log2(row / col))
            if t != 1.0:
                A[i] /= t
                A[:, i] *= t
                B[i] /= t
                C[:, i] *= t
                changed = True
        if not changed:
            break
    return StateSpaceModel(A, B, C, sys.D, sys.nmeas, sys.ncont)


def _finite_zeros(sys: StateSpaceModel) -> np.ndarray:
    n = sys.n
    p, m = sys.D.shape
    M = np.block([[sys.A, sys.B], [sys.C, sys.D]])
    N = np.zeros_like(M)
    N[:n, :n] = np.eye(n)
    if n == 0:
        return np.zeros(0, complex)
    ab = scipy.linalg.eig(M, N, right=False, homogeneous_eigvals=True)
    alpha, beta = ab[0], ab[1]
    finite = np.abs(beta) > 1e-8 * np.abs(alpha)
    finite &= (np.abs(alpha) + np.abs(beta)) > 1e-14 * max(1.0, np.linalg.norm(M))
    return alpha[finite] / beta[finite]


def _clean_conjugates(r: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Snap nearly-real roots onto the axis and make pairs exact conjugates."""
    reals, upper = _pair_roots(r, tol)
    return np.concatenate([reals.astype(complex), upper, upper.conj()])


def ss_to_zpk(sys: StateSpaceModel, out: int = 0, inp: int = 0) -> ZpkForm:
    ch = minreal(sys.channel(out, inp))
    poles = _clean_conjugates(ch.poles())
    zeros = _clean_conjugates(_finite_zeros(ch))
    if ch.n == 0 or zeros.size == poles.size:
        gain = float(ch.D[0, 0])
    else:
        rmax = max(np.max(np.abs(np.concatenate([poles, zeros]))), 1.0)
        pts = rmax * np.array([2.0 + 1.5j, -0.5 + 3.0j, 1.0 - 2.5j])
        vals = [ch.evalfr(s)[0, 0] * np.prod(s - poles) / np.prod(s - zeros) for s in pts]
        gain = float(np.real(np.mean(vals)))
    return ZpkForm(zeros, poles, gain)


def ss_to_tf(sys: StateSpaceModel, out: int = 0, inp: int = 0) -> RationalSiso:
    return ss_to_zpk(sys, out, inp).to_rational()


# ---------------------------------------------------------------------------
# Interconnections
# ---------------------------------------------------------------------------


def mktito(sys: StateSpaceModel, nmeas: int, ncont: int) -> StateSpaceModel:
    """Attach a TITO partition: last ``nmeas`` outputs measured, last ``ncont`` inputs controlled."""
    if not (0 < nmeas <= sys.noutputs and 0 < ncont <= sys.ninputs):
        raise DimensionError(
            f"cannot partition {sys.noutputs}x{sys.ninputs} system with ({nmeas}, {ncont})")
    return StateSpaceModel(sys.A, sys.B, sys.C, sys.D, nmeas, ncont)


WeightLike = Union[None, float, RationalSiso, StateSpaceModel, Sequence]


def _weight_system(w: WeightLike, size: int, name: str) -> Optional[StateSpaceModel]:
    if w is None:
        return None
    if isinstance(w, StateSpaceModel):
        if w.noutputs != size or w.ninputs != size:
            raise DimensionError(f"{name} must be {size}x{size}, got {w.noutputs}x{w.ninputs}")
        return w
    if isinstance(w, (Real, RationalSiso)):
        w = [w] * size
    w = list(w)
    if len(w) != size:
        raise DimensionError(f"{name} needs {size} diagonal entries, got {len(w)}")
    return _block_diag(*[tf_to_ss(RationalSiso.coerce(wi)) for wi in w])


def augw(g: StateSpaceModel, w1: WeightLike = None, w2: WeightLike = None,
         w3: WeightLike = None) -> StateSpaceModel:
    """Mixed-sensitivity augmentation.

    Inputs are [w; u], outputs are [z1; z2; z3; y] with e = w - G u,
    z1 = W1 e, z2 = W2 u, z3 = W3 G u and y = e.  Scalar weights are
    repeated along the diagonal.  With positive feedback u = K y the closed
    loop is [W1 S; W2 K S; W3 T] where S = (I + G K)^{-1}.
    """
    if w1 is None and w2 is None and w3 is None:
        raise ConfigError("augw needs at least one weight")
    ny, nu, ng = g.noutputs, g.ninputs, g.n
    W1 = _weight_system(w1, ny, "W1")
    W2 = _weight_system(w2, nu, "W2")
    W3 = _weight_system(w3, ny, "W3")

    Ag, Bg, Cg, Dg = g.A, g.B, g.C, g.D
    blocks = [(W, src) for W, src in ((W1, "e"), (W2, "u"), (W3, "yg")) if W is not None]
    n = ng + sum(W.n for W, _ in blocks)
    nz = sum(W.noutputs for W, _ in blocks)

    # signals as linear maps of (x, w, u):  e = -Cg xg + w - Dg u ; yg = Cg xg + Dg u
    def sig(src):
        Cx = np.zeros((ny if src != "u" else nu, n))
        if src == "e":
            Cx[:, :ng] = -Cg
            return Cx, np.eye(ny), -Dg
        if src == "yg":
            Cx[:, :ng] = Cg
            return Cx, np.zeros((ny, ny)), Dg
        return Cx, np.zeros((nu, ny)), np.eye(nu)

    A = np.zeros((n, n))
    B = np.zeros((n, ny + nu))
    C = np.zeros((nz + ny, n))
    D = np.zeros((nz + ny, ny + nu))
    A[:ng, :ng] = Ag
    B[:ng, ny:] = Bg
    xo, zo = ng, 0
    for W, src in blocks:
        Sx, Sw, Su = sig(src)
        k, q = W.n, W.noutputs
        A[xo:xo + k, :] += W.B @ Sx
        A[xo:xo + k, xo:xo + k] += W.A
        B[xo:xo + k, :ny] = W.B @ Sw
        B[xo:xo + k, ny:] = W.B @ Su
        C[zo:zo + q, :] = W.D @ Sx
        C[zo:zo + q, xo:xo + k] += W.C
        D[zo:zo + q, :ny] = W.D @ Sw
        D[zo:zo + q, ny:] = W.D @ Su
        xo += k
        zo += q
    Sx, Sw, Su = sig("e")
    C[nz:, :] = Sx
    D[nz:, :ny] = Sw
    D[nz:, ny:] = Su
    return StateSpaceModel(A, B, C, D, nmeas=ny, ncont=nu)


def controller_matrix(k: StateSpaceModel) -> np.ndarray:
    """Stack a controller into the static gain [[Dk, Ck], [Bk, Ak]]."""
    return np.block([[k.D, k.C], [k.B, k.A]])


class AugmentedPlant:
    """Plant padded with k integrator-free controller states.

    Closing this plant with the static gain ``controller_matrix(K)`` is the
    same as closing the original plant with the dynamic controller K.  All
    closed-loop matrices are then rational in the gain F with the common
    structure  X0 + Xl L F N Xr,  which the synthesis gradients rely on.
    """

    def __init__(self, p: StateSpaceModel, order: int):
        A, B1, B2, C1, C2, D11, D12, D21, D22 = p.blocks()
        n, k = p.n, order
        ny, nu = p.nmeas, p.ncont
        self.n, self.k, self.ny, self.nu = n, k, ny, nu
        self.A = scipy.linalg.block_diag(A, np.zeros((k, k)))
        self.B1 = np.vstack([B1, np.zeros((k, B1.shape[1]))])
        self.B2 = scipy.linalg.block_diag(B2, np.eye(k))
        self.C1 = np.hstack([C1, np.zeros((C1.shape[0], k))])
        self.C2 = scipy.linalg.block_diag(C2, np.eye(k))
        self.D11 = D11
        self.D12 = np.hstack([D12, np.zeros((D12.shape[0], k))])
        self.D21 = np.vstack([D21, np.zeros((k, D21.shape[1]))])
        self.D22 = scipy.linalg.block_diag(D22, np.zeros((k, k)))
        self.has_d22 = bool(np.any(D22))

    def loop_factors(self, F: np.ndarray):
        """Return (L, N) with L = (I - F D22)^{-1} and N = (I - D22 F)^{-1}."""
        if not self.has_d22:
            return None, None
        I1 = np.eye(F.shape[0])
        I2 = np.eye(F.shape[1])
        M1 = I1 - F @ self.D22
        if np.linalg.cond(M1) > 1e12:
            raise AlgebraicLoopError("I - Dk*D22 is singular; the loop is ill-posed")
        return np.linalg.inv(M1), np.linalg.inv(I2 - self.D22 @ F)

    def close(self, F: np.ndarray):
        """Closed-loop (Acl, Bcl, Ccl, Dcl) for the static gain F."""
        L, _ = self.loop_factors(F)
        G = F if L is None else L @ F
        B2G = self.B2 @ G
        D12G = self.D12 @ G
        return (self.A + B2G @ self.C2, self.B1 + B2G @ self.D21,
                self.C1 + D12G @ self.C2, self.D11 + D12G @ self.D21)


def close_loop(p: StateSpaceModel, k: StateSpaceModel) -> StateSpaceModel:
    """Lower LFT of partitioned plant ``p`` with controller ``k`` under u = K y."""
    if not p.partitioned:
        raise DimensionError("close_loop needs a partitioned plant (see mktito)")
    if k.ninputs != p.nmeas or k.noutputs != p.ncont:
        raise DimensionError(
            f"controller is {k.noutputs}x{k.ninputs}, plant needs {p.ncont}x{p.nmeas}")
    aug = AugmentedPlant(p, k.n)
    return StateSpaceModel(*aug.close(controller_matrix(k)))


def sensitivity_maps(g: StateSpaceModel, k: StateSpaceModel):
    """Return (S, T) for the unity loop around G K, with S = (I + G K)^{-1} and T = I - S."""
    ny, nu = g.noutputs, g.ninputs
    zero_w = np.zeros((g.n, ny))
    # [z_S; z_T; y] = [[I, -G], [0, G], [I, -G]] [w; u]
    A = g.A
    B = np.hstack([zero_w, g.B])
    C = np.vstack([-g.C, g.C, -g.C])
    D = np.block([[np.eye(ny), -g.D], [np.zeros((ny, ny)), g.D], [np.eye(ny), -g.D]])
    P = StateSpaceModel(A, B, C, D, nmeas=ny, ncont=nu)
    cl = close_loop(P, k)
    Sm = StateSpaceModel(cl.A, cl.B, cl.C[:ny], cl.D[:ny])
    Tm = StateSpaceModel(cl.A, cl.B, cl.C[ny:], cl.D[ny:])
    return Sm, Tm
