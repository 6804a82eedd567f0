"""One-dimensional orthogonal polynomial machinery.

Jacobi/Gegenbauer evaluation by three-term recurrence, closed-form norms in
log-space, Gauss-Jacobi rules for the normalized weight, admissible cut-off
functions and dyadic window families, and the localized univariate kernel
built from a cut-off weighted Jacobi expansion.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

__all__ = [
    "JacobiParams",
    "CutoffSpec",
    "QuadRule1D",
    "jacobi_eval",
    "jacobi_batch",
    "jacobi_norm",
    "jacobi_at_one",
    "gegenbauer_C",
    "gegenbauer_batch",
    "gegenbauer_Z",
    "gegenbauer_Z_batch",
    "gauss_jacobi",
    "smooth_step",
    "cutoff_eval",
    "window_eval",
    "kernel1d",
]


class ParameterError(ValueError):
    """Raised for out-of-range orthogonal-polynomial parameters."""


@dataclass(frozen=True)
class JacobiParams:
    """Jacobi weight exponents; the weight (1-x)^alpha (1+x)^beta needs both > -1."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > -1.0 and self.beta > -1.0):
            raise ParameterError(
                f"Jacobi parameters must exceed -1, got ({self.alpha}, {self.beta})"
            )

    @property
    def log_c(self) -> float:
        """log of c_{alpha,beta} = Gamma(a+b+2) / (Gamma(a+1) Gamma(b+1))."""
        a, b = self.alpha, self.beta
        return gammaln(a + b + 2.0) - gammaln(a + 1.0) - gammaln(b + 1.0)

    @property
    def c(self) -> float:
        return math.exp(self.log_c)

    @property
    def c_prime(self) -> float:
        """Normalization of the weight on [-1,1]: c' = 2^{-a-b-1} c."""
        a, b = self.alpha, self.beta
        return math.exp(self.log_c - (a + b + 1.0) * math.log(2.0))


def jacobi_batch(n: int, p: JacobiParams, x) -> np.ndarray:
    """All Jacobi polynomials P_0..P_n at x (scalar or array), shape (n+1,) + x.shape."""
    a, b = p.alpha, p.beta
    x = np.asarray(x, dtype=float)
    out = np.empty((n + 1,) + x.shape, dtype=float)
    out[0] = 1.0
    if n == 0:
        return out
    out[1] = 0.5 * (a + b + 2.0) * x + 0.5 * (a - b)
    for k in range(2, n + 1):
        c1 = 2.0 * k * (k + a + b) * (2.0 * k + a + b - 2.0)
        c2 = (2.0 * k + a + b - 1.0) * (a * a - b * b)
        c3 = (2.0 * k + a + b - 1.0) * (2.0 * k + a + b) * (2.0 * k + a + b - 2.0)
        c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + a + b)
        out[k] = ((c2 + c3 * x) * out[k - 1] - c4 * out[k - 2]) / c1
    return out


def jacobi_eval(n: int, p: JacobiParams, x):
    """P_n^{(alpha,beta)}(x) by the three-term recurrence."""
    if n < 0:
        raise ParameterError("degree must be nonnegative")
    return jacobi_batch(n, p, x)[n]


def jacobi_at_one(n: int, p: JacobiParams) -> float:
    """P_n^{(alpha,beta)}(1) = binom(n+alpha, n)."""
    return math.exp(gammaln(n + p.alpha + 1.0) - gammaln(p.alpha + 1.0) - gammaln(n + 1.0))


def jacobi_norm(n: int, p: JacobiParams) -> float:
    """h_n, the squared norm of P_n against the normalized weight c' w_{a,b}."""
    if n < 0:
        raise ParameterError("degree must be nonnegative")
    if n == 0:
        return 1.0
    a, b = p.alpha, p.beta
    log_h = (
        gammaln(a + 1.0 + n) - gammaln(a + 1.0)
        + gammaln(b + 1.0 + n) - gammaln(b + 1.0)
        - gammaln(n + 1.0)
        - (gammaln(a + b + 2.0 + n) - gammaln(a + b + 2.0))
    )
    return math.exp(log_h) * (a + b + n + 1.0) / (a + b + 2.0 * n + 1.0)


def gegenbauer_batch(n: int, lam: float, x) -> np.ndarray:
    """All Gegenbauer polynomials C_0..C_n at x, shape (n+1,) + x.shape."""
    if lam <= 0.0:
        raise ParameterError(f"Gegenbauer parameter must be positive, got {lam}")
    x = np.asarray(x, dtype=float)
    out = np.empty((n + 1,) + x.shape, dtype=float)
    out[0] = 1.0
    if n == 0:
        return out
    out[1] = 2.0 * lam * x
    for k in range(2, n + 1):
        out[k] = (2.0 * (k + lam - 1.0) * x * out[k - 1] - (k + 2.0 * lam - 2.0) * out[k - 2]) / k
    return out


def gegenbauer_C(n: int, lam: float, x):
    return gegenbauer_batch(n, lam, x)[n]


def gegenbauer_Z(n: int, lam: float, x):
    """Z_n^lam(x) = ((n+lam)/lam) C_n^lam(x), the zonal kernel building block."""
    return (n + lam) / lam * gegenbauer_C(n, lam, x)


def gegenbauer_Z_batch(n: int, lam: float, x) -> np.ndarray:
    C = gegenbauer_batch(n, lam, x)
    scale = (np.arange(n + 1, dtype=float) + lam) / lam
    return C * scale.reshape((n + 1,) + (1,) * (C.ndim - 1))


@dataclass(frozen=True)
class QuadRule1D:
    """Gauss-Jacobi rule for the normalized measure c' w_{alpha,beta} on (-1,1)."""

    nodes: np.ndarray
    weights: np.ndarray
    params: JacobiParams

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def to_json(self) -> str:
        return json.dumps(
            {
                "alpha": self.params.alpha,
                "beta": self.params.beta,
                "nodes": self.nodes.tolist(),
                "weights": self.weights.tolist(),
            }
        )

    @staticmethod
    def from_json(text: str) -> "QuadRule1D":
        d = json.loads(text)
        return QuadRule1D(
            nodes=np.asarray(d["nodes"], dtype=float),
            weights=np.asarray(d["weights"], dtype=float),
            params=JacobiParams(d["alpha"], d["beta"]),
        )


def gauss_jacobi(m: int, p: JacobiParams) -> QuadRule1D:
    """m-point Gauss-Jacobi rule, exact on degree <= 2m-1 for c' w_{a,b} dx.

    Golub-Welsch: eigen-decompose the symmetric tridiagonal of the recurrence
    coefficients; weights come from squared first eigenvector components.
    """
    if m < 1:
        raise ParameterError("rule size must be >= 1")
    a, b = p.alpha, p.beta
    k = np.arange(m, dtype=float)
    s = 2.0 * k + a + b
    diag = np.empty(m)
    denom = s * (s + 2.0)
    diag[0] = (b - a) / (a + b + 2.0)
    if m > 1:
        diag[1:] = (b * b - a * a) / denom[1:]
    sub = np.zeros(max(m - 1, 0))
    if m > 1:
        # k = 1 separately: the (k+a+b)/(2k+a+b-1) factor cancels there.
        sub[0] = math.sqrt(4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) ** 2 * (3.0 + a + b)))
        kk = np.arange(2.0, m)
        ss = 2.0 * kk + a + b
        sub[1:] = np.sqrt(
            4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) / (ss * ss * (ss + 1.0) * (ss - 1.0))
        )
    try:
        vals, vecs = eigh_tridiagonal(diag, sub)
    except Exception as exc:  # pragma: no cover - LAPACK failure is exotic
        raise ArithmeticError(f"Gauss-Jacobi eigen-solver failed for m={m}: {exc}") from exc
    order = np.argsort(vals)
    nodes = vals[order]
    weights = vecs[0, order] ** 2
    weights = weights / weights.sum()  # total mass 1 for the normalized measure
    return QuadRule1D(nodes=nodes, weights=weights, params=p)


# ---------------------------------------------------------------------------
# cut-off functions and dyadic windows


def smooth_step(s):
    """C^inf step nu with nu=0 for s<=0, nu=1 for s>=1 and nu(s)+nu(1-s)=1."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        hs = np.where(s > 0.0, np.exp(-1.0 / np.clip(s, 1e-300, None)), 0.0)
        h1 = np.where(1.0 - s > 0.0, np.exp(-1.0 / np.clip(1.0 - s, 1e-300, None)), 0.0)
    out = np.where(s <= 0.0, 0.0, np.where(s >= 1.0, 1.0, hs / (hs + h1)))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CutoffSpec:
    """Admissible cut-off: TypeA (lowpass), TypeB (bandpass) or FrameWindow family.

    `smoothness` is the nominal derivative count used when quoting decay
    targets; the transition itself is C^inf.
    """

    kind: str = "TypeA"
    smoothness: int = 8
    transition: str = "exp(-1/s) smooth step"

    def __post_init__(self):
        if self.kind not in ("TypeA", "TypeB", "FrameWindow"):
            raise ParameterError(f"unknown cutoff kind {self.kind!r}")
        if self.smoothness < 1:
            raise ParameterError("smoothness must be a positive integer")


def _lowpass(t):
    """TypeA profile b: 1 on [0,1], smooth decay on [1,2], 0 beyond."""
    t = np.asarray(t, dtype=float)
    out = 1.0 - smooth_step(t - 1.0)
    return np.where(t <= 1.0, 1.0, np.where(t >= 2.0, 0.0, out))


def cutoff_eval(c: CutoffSpec, t):
    """Evaluate the cut-off at t >= 0 (total function, clamped outside support)."""
    t = np.asarray(t, dtype=float)
    if c.kind == "TypeA":
        out = _lowpass(t)
    else:
        # bandpass sqrt(b(t) - b(2t)): support [1/2, 2], squares telescope
        diff = np.clip(_lowpass(t) - _lowpass(2.0 * t), 0.0, None)
        out = np.sqrt(diff)
    return out if out.ndim else float(out)


def window_eval(c: CutoffSpec, j: int, t):
    """Dyadic window g_j: g_0^2 = b and g_j(t)^2 = b(t/2^{j-1}) - b(t/2^{j-2}).

    g_j is the bandpass profile scaled to support (2^{j-2}, 2^j); the squares
    telescope, sum_{j<=J} g_j(k)^2 = b(k 2^{-(J-1)}), which equals 1 for all
    integers k <= 2^{J-1}.
    """
    if j < 0:
        raise ParameterError("window level must be >= 0")
    t = np.asarray(t, dtype=float)
    if j == 0:
        out = np.sqrt(_lowpass(t))
    else:
        diff = np.clip(
            _lowpass(t / 2.0 ** (j - 1)) - _lowpass(t / 2.0 ** (j - 2)), 0.0, None
        )
        out = np.sqrt(diff)
    return out if out.ndim else float(out)


def kernel1d(n: int, p: JacobiParams, c: CutoffSpec, t):
    """Localized Jacobi kernel sum_j a(j/n) P_j(t) P_j(1) / h_j (j <= 2n)."""
    if n < 1:
        raise ParameterError("kernel degree must be >= 1")
    jmax = 2 * n
    coeff = cutoff_eval(c, np.arange(jmax + 1) / n)
    P = jacobi_batch(jmax, p, t)
    scale = np.array(
        [coeff[j] * jacobi_at_one(j, p) / jacobi_norm(j, p) for j in range(jmax + 1)]
    )
    return np.tensordot(scale, P, axes=(0, 0))
