"""Reproducing and localized kernels on the double conic domains.

Explicit orthonormal bases of the even-in-t orthogonal polynomial spaces,
closed-form reproducing kernels via one- or two-fold Gegenbauer integrals
(evaluated exactly by Gauss-Jacobi rules in the auxiliary variables),
cut-off localized kernels, spectral derivative kernels, Christoffel
functions and fast-decaying needle polynomials.

Conventions: base dimension d = 2 for basis evaluation (kernels themselves
are generic in d through the Gegenbauer index); rho > 0 is handled by the
distance-preserving reduction t -> sqrt(t^2 - rho^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .geometry import SOLID, SURFACE, DomainSpec, DomainError, WeightSpec, _pt
from .orthopoly import (
    CutoffSpec,
    JacobiParams,
    cutoff_eval,
    gauss_jacobi,
    gegenbauer_Z_batch,
    jacobi_batch,
    jacobi_norm,
)

__all__ = [
    "BasisIndex",
    "KernelContext",
    "basis_indices",
    "basis_dim",
    "space_dim",
    "degree_slices",
    "basis_eval",
    "basis_norm",
    "basis_matrix",
    "eigenvalue",
    "reprod_seq",
    "reprod_kernel",
    "reprod_many",
    "localized_kernel",
    "localized_many",
    "derivative_kernel",
    "derivative_many",
    "christoffel",
    "kernel_envelope",
    "needle_poly",
]


@dataclass(frozen=True)
class BasisIndex:
    """Index into the even space at degree n: k is the t-radial index,
    j the ball-radial index (solid only), ell picks cos/sin (0/1)."""

    n: int
    k: int
    j: int = 0
    ell: int = 0


def basis_indices(dom: DomainSpec, n: int) -> list:
    out = []
    for k in range(n // 2 + 1):
        m = n - 2 * k
        if dom.kind == SURFACE:
            ells = (0,) if m == 0 else (0, 1)
            out.extend(BasisIndex(n, k, 0, ell) for ell in ells)
        else:
            for j in range(m // 2 + 1):
                eta = m - 2 * j
                ells = (0,) if eta == 0 else (0, 1)
                out.extend(BasisIndex(n, k, j, ell) for ell in ells)
    return out


def basis_dim(dom: DomainSpec, n: int) -> int:
    if dom.kind == SURFACE:
        return n + 1
    return (n // 2 + 1) ** 2 if n % 2 == 0 else (n + 1) * (n + 3) // 4


def space_dim(dom: DomainSpec, n: int) -> int:
    """dim of the even polynomial space of total degree <= n."""
    return sum(basis_dim(dom, k) for k in range(n + 1))


def degree_slices(dom: DomainSpec, nmax: int) -> list:
    slices, start = [], 0
    for n in range(nmax + 1):
        end = start + basis_dim(dom, n)
        slices.append(slice(start, end))
        start = end
    return slices


def _log_c(a: float, b: float) -> float:
    return gammaln(a + b + 2.0) - gammaln(a + 1.0) - gammaln(b + 1.0)


def basis_norm(dom: DomainSpec, w: WeightSpec, idx: BasisIndex) -> float:
    """Squared norm of the (unnormalized) basis element under the
    probability-normalized weighted measure; closed form in Gamma functions."""
    if dom.d != 2:
        raise DomainError("explicit bases are implemented for d = 2")
    a = w.gamma - 0.5
    m = idx.n - 2 * idx.k
    if dom.kind == SURFACE:
        b0, bm = w.beta, m + w.beta
        val = math.exp(_log_c(a, b0) - _log_c(a, bm)) * jacobi_norm(
            idx.k, JacobiParams(a, bm)
        )
        return val
    am = w.mu - 0.5
    eta = m - 2 * idx.j
    b0, bm = w.beta + w.mu, m + w.beta + w.mu
    ball = math.exp(_log_c(am, 0.0) - _log_c(am, eta)) * jacobi_norm(
        idx.j, JacobiParams(am, eta)
    )
    return math.exp(_log_c(a, b0) - _log_c(a, bm)) * jacobi_norm(
        idx.k, JacobiParams(a, bm)
    ) * ball


def _harmonic(z: np.ndarray, eta: int, ell: int) -> np.ndarray:
    """sqrt(2) Re/Im of z^eta (orthonormal circular harmonics); 1 for eta=0."""
    if eta == 0:
        return np.ones(z.shape, dtype=float)
    zp = z**eta
    return math.sqrt(2.0) * (zp.real if ell == 0 else zp.imag)


def basis_matrix(
    dom: DomainSpec, w: WeightSpec, nmax: int, X, T, normalized: bool = True
) -> np.ndarray:
    """All basis elements of degrees 0..nmax at the points: (space_dim, npts).

    Rows follow basis_indices order within each degree, degrees stacked.
    """
    if dom.d != 2:
        raise DomainError("explicit bases are implemented for d = 2")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    T = np.atleast_1d(np.asarray(T, dtype=float))
    npts = len(T)
    rho2 = dom.rho**2
    u = 2.0 * (T * T - rho2) - 1.0
    a = w.gamma - 0.5
    out = np.empty((space_dim(dom, nmax), npts))
    offsets = degree_slices(dom, nmax)
    row_of = {}
    for n in range(nmax + 1):
        for i, idx in enumerate(basis_indices(dom, n)):
            row_of[(idx.n, idx.k, idx.j, idx.ell)] = offsets[n].start + i

    if dom.kind == SURFACE:
        z = X[:, 0] + 1j * X[:, 1]
        zp = np.ones(npts, dtype=complex)
        for m in range(nmax + 1):
            kmax = (nmax - m) // 2
            P = jacobi_batch(kmax, JacobiParams(a, m + w.beta), u)
            harm0 = _harmonic(zp, 0, 0) if m == 0 else math.sqrt(2.0) * zp.real
            harm1 = None if m == 0 else math.sqrt(2.0) * zp.imag
            for k in range(kmax + 1):
                n = m + 2 * k
                scale0 = 1.0
                if normalized:
                    scale0 = 1.0 / math.sqrt(
                        basis_norm(dom, w, BasisIndex(n, k, 0, 0))
                    )
                out[row_of[(n, k, 0, 0)]] = scale0 * P[k] * harm0
                if m > 0:
                    out[row_of[(n, k, 0, 1)]] = scale0 * P[k] * harm1
            zp = zp * z
    else:
        rr2 = np.clip(T * T - rho2, 0.0, None)
        rr = np.sqrt(rr2)
        safe = np.where(rr > 1e-150, rr, 1.0)
        Y = X / safe[:, None]
        Y[rr <= 1e-150] = 0.0
        # no upper clip: the expression is a polynomial in (x, t) and must
        # evaluate faithfully slightly off-domain (finite-difference probes)
        w2 = 2.0 * np.sum(Y * Y, axis=1) - 1.0
        zq = Y[:, 0] + 1j * Y[:, 1]
        am = w.mu - 0.5
        for m in range(nmax + 1):
            kmax = (nmax - m) // 2
            P = jacobi_batch(kmax, JacobiParams(a, m + w.beta + w.mu), u)
            rm = rr**m
            for j in range(m // 2 + 1):
                eta = m - 2 * j
                Q = jacobi_batch(j, JacobiParams(am, eta), w2)[j]
                for ell in ((0,) if eta == 0 else (0, 1)):
                    ball = rm * Q * _harmonic(zq, eta, ell)
                    for k in range(kmax + 1):
                        n = m + 2 * k
                        scale = 1.0
                        if normalized:
                            scale = 1.0 / math.sqrt(
                                basis_norm(dom, w, BasisIndex(n, k, j, ell))
                            )
                        out[row_of[(n, k, j, ell)]] = scale * P[k] * ball
    return out


def basis_eval(dom: DomainSpec, w: WeightSpec, idx: BasisIndex, p) -> float:
    """Single (unnormalized) basis element at a point."""
    x, t = _pt(p)
    M = basis_matrix(dom, w, idx.n, x[None, :], np.array([t]), normalized=False)
    sl = degree_slices(dom, idx.n)[idx.n]
    pos = basis_indices(dom, idx.n).index(idx)
    return float(M[sl][pos, 0])


def eigenvalue(dom: DomainSpec, w: WeightSpec, k: int) -> float:
    """Spectral eigenvalue mu(k) of the second-order operator on degree k."""
    if dom.kind == SURFACE:
        return k * (k + 2.0 * w.gamma + dom.d - 1.0)
    return k * (k + 2.0 * w.gamma + 2.0 * w.mu + dom.d)


# ---------------------------------------------------------------------------
# addition-formula kernels


def _aux_rule(expo: float, size: int):
    """Rule for the normalized measure (1-v^2)^{expo-1} dv; endpoint average
    in the degenerate expo = 0 limit."""
    if expo > 0.0:
        r = gauss_jacobi(size, JacobiParams(expo - 1.0, expo - 1.0))
        return r.nodes, r.weights
    return np.array([-1.0, 1.0]), np.array([0.5, 0.5])


class KernelContext:
    """Holds the auxiliary quadrature needed for exact kernel evaluation up
    to degree nmax (surface: beta = 0, gamma >= 0; solid: beta = 1/2,
    gamma, mu >= 0)."""

    def __init__(self, dom: DomainSpec, w: WeightSpec, nmax: int):
        w.validate(dom)
        if not w.kernel_ready(dom):
            raise DomainError(
                "addition formula needs beta=0 (surface) or beta=1/2 (solid) "
                "with nonnegative gamma (and mu)"
            )
        self.dom = dom
        self.w = w
        self.nmax = int(nmax)
        size = max(1, (self.nmax + 2) // 2)
        if dom.kind == SURFACE:
            self.lam = w.gamma + 0.5 * (dom.d - 1)
            self.vn, self.vw = _aux_rule(w.gamma, size)
            self.un, self.uw = None, None
        else:
            self.lam = w.gamma + w.mu + 0.5 * dom.d
            self.vn, self.vw = _aux_rule(w.gamma, size)
            self.un, self.uw = _aux_rule(w.mu, size)

    def _reduced(self, X, T):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        T = np.atleast_1d(np.asarray(T, dtype=float))
        rho2 = self.dom.rho**2
        return X, np.sqrt(np.clip(T * T - rho2, 0.0, None))

    def _check_sheets(self, t1, t2):
        if self.dom.rho > 0.0 and np.any(np.asarray(t1) * np.asarray(t2) < 0.0):
            raise DomainError("kernel arguments must lie in one sheet when rho > 0")


def reprod_many(ctx: KernelContext, n: int, p, X, T) -> np.ndarray:
    """Reproducing kernels P_j^E(p, q_i) for all degrees j <= n: (n+1, npts).

    The auxiliary integrands are degree-n polynomials, so the context rules
    evaluate the addition formula exactly. sign(ts) is taken as +1: the
    integral only sees t^2 after even reduction, so this is the even kernel.
    """
    if n > ctx.nmax:
        raise DomainError(f"context supports degrees <= {ctx.nmax}")
    x1, t1 = _pt(p)
    ctx._check_sheets(t1, np.asarray(T))
    X1, T1 = ctx._reduced(x1[None, :], np.array([t1]))
    X2, T2 = ctx._reduced(X, T)
    npts = len(T2)
    dot = X2 @ X1[0]
    top = math.sqrt(max(1.0 - T1[0] ** 2, 0.0)) * np.sqrt(np.clip(1.0 - T2 * T2, 0.0, None))
    if ctx.dom.kind == SURFACE:
        zeta = dot[:, None] + top[:, None] * ctx.vn[None, :]
        Z = gegenbauer_Z_batch(n, ctx.lam, np.clip(zeta, -1.0, 1.0))
        return Z @ ctx.vw
    in1 = math.sqrt(max(T1[0] ** 2 - float(X1[0] @ X1[0]), 0.0))
    in2 = np.sqrt(np.clip(T2 * T2 - np.sum(X2 * X2, axis=1), 0.0, None))
    inn = in1 * in2
    xi = (
        dot[:, None, None]
        + inn[:, None, None] * ctx.un[None, :, None]
        + top[:, None, None] * ctx.vn[None, None, :]
    )
    Z = gegenbauer_Z_batch(n, ctx.lam, np.clip(xi.reshape(npts, -1), -1.0, 1.0))
    wts = (ctx.uw[:, None] * ctx.vw[None, :]).ravel()
    return Z @ wts


def reprod_seq(ctx: KernelContext, n: int, p, q) -> np.ndarray:
    x2, t2 = _pt(q)
    return reprod_many(ctx, n, p, x2[None, :], np.array([t2]))[:, 0]


def reprod_kernel(ctx: KernelContext, n: int, p, q) -> float:
    """P_n^E(p, q), the reproducing kernel of the even space at degree n."""
    return float(reprod_seq(ctx, n, p, q)[n])


def localized_many(ctx: KernelContext, n: int, c: CutoffSpec, p, X, T) -> np.ndarray:
    jmax = min(2 * n, ctx.nmax)
    coeff = cutoff_eval(c, np.arange(jmax + 1) / n)
    P = reprod_many(ctx, jmax, p, X, T)
    return coeff @ P


def localized_kernel(ctx: KernelContext, n: int, c: CutoffSpec, p, q) -> float:
    """L_n^E(p, q) = sum_j a(j/n) P_j^E(p, q) (the sum stops at j = 2n)."""
    x2, t2 = _pt(q)
    return float(localized_many(ctx, n, c, p, x2[None, :], np.array([t2]))[0])


def derivative_many(
    ctx: KernelContext, n: int, c: CutoffSpec, r: float, p, X, T
) -> np.ndarray:
    jmax = min(2 * n, ctx.nmax)
    j = np.arange(jmax + 1)
    mu = np.array([eigenvalue(ctx.dom, ctx.w, int(k)) for k in j])
    coeff = cutoff_eval(c, j / n) * mu ** (0.5 * r)
    P = reprod_many(ctx, jmax, p, X, T)
    return coeff @ P


def derivative_kernel(ctx: KernelContext, n: int, c: CutoffSpec, r: float, p, q) -> float:
    """Kernel of the fractional spectral operator applied to L_n^E.

    The constant term carries mu(0)^{r/2} = 0, so r -> 0 recovers the
    localized kernel minus its degree-0 term.
    """
    if r <= 0.0:
        raise DomainError("derivative order must be positive")
    x2, t2 = _pt(q)
    return float(derivative_many(ctx, n, c, r, p, x2[None, :], np.array([t2]))[0])


def christoffel(ctx: KernelContext, n: int, p) -> float:
    """lambda_n^E(p) = 1 / sum_{k<=n} P_k^E(p, p)."""
    return 1.0 / float(np.sum(reprod_seq(ctx, n, p, p)))


def kernel_envelope(ctx: KernelContext, n: int, p) -> float:
    """n^dim / sqrt(w(n; p)) factor appearing in the localization bounds."""
    from .geometry import wn_eval

    dim = ctx.dom.d if ctx.dom.kind == SURFACE else ctx.dom.d + 1
    return n**dim / math.sqrt(wn_eval(ctx.dom, ctx.w, n, p))


# ---------------------------------------------------------------------------
# needle polynomials


def _fejer_ratio(z: np.ndarray, n: int, r: int) -> np.ndarray:
    """S_n(z): value 1 at z = 1, decay (1 + n theta)^{-2r} in z = cos(theta)."""
    m = n // r + 1
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    h = 0.5 * theta
    mm = m + 0.5
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(h < 1e-9, 1.0 - (mm * mm - 1.0) * h * h / 6.0,
                         np.sin(mm * h) / (mm * np.sin(np.where(h < 1e-9, 1.0, h))))
    return ratio ** (2 * r)


def needle_poly(dom: DomainSpec, p, n: int, r: int = 3):
    """Fast-decaying nonnegative polynomial peaking at p: T(p) = 1,
    0 <= T <= 1 + tol, T(q) <~ (1 + n d(p,q))^{-2r}.

    Returns a vectorized evaluator over (X, T) arrays (or a single point).
    """
    if n < 2 or r < 1:
        raise DomainError("needle requires n >= 2 and r >= 1")
    xc, tc = _pt(p)
    rho2 = dom.rho**2
    topc = math.sqrt(max(1.0 + rho2 - tc * tc, 0.0))

    if dom.kind == SURFACE:
        denom = 1.0 + float(_fejer_ratio(np.array([2 * tc * tc - 2 * rho2 - 1.0]), n, r)[0])

        def evaluate(X, T=None):
            if T is None:
                x, t = _pt(X)
                X, T = x[None, :], np.array([t])
                scalar = True
            else:
                X = np.atleast_2d(np.asarray(X, dtype=float))
                T = np.atleast_1d(np.asarray(T, dtype=float))
                scalar = False
            dot = X @ xc
            top = topc * np.sqrt(np.clip(1.0 + rho2 - T * T, 0.0, None))
            val = (_fejer_ratio(dot + top, n, r) + _fejer_ratio(dot - top, n, r)) / denom
            return float(val[0]) if scalar else val

        return evaluate

    # solid: lift to the surface one dimension up and symmetrize in the
    # lifted coordinate
    innc = math.sqrt(max(tc * tc - rho2 - float(np.dot(xc, xc)), 0.0))
    Xc = np.append(xc, innc)
    Xc_star = np.append(xc, -innc)
    dot_star = float(Xc @ Xc_star)
    denom_T = 1.0 + float(_fejer_ratio(np.array([2 * tc * tc - 2 * rho2 - 1.0]), n, r)[0])
    s_star = (
        _fejer_ratio(np.array([dot_star + topc * topc]), n, r)[0]
        + _fejer_ratio(np.array([dot_star - topc * topc]), n, r)[0]
    ) / denom_T

    def evaluate(X, T=None):
        if T is None:
            x, t = _pt(X)
            X, T = x[None, :], np.array([t])
            scalar = True
        else:
            X = np.atleast_2d(np.asarray(X, dtype=float))
            T = np.atleast_1d(np.asarray(T, dtype=float))
            scalar = False
        inn = np.sqrt(np.clip(T * T - rho2 - np.sum(X * X, axis=1), 0.0, None))
        top = topc * np.sqrt(np.clip(1.0 + rho2 - T * T, 0.0, None))
        dot = X @ xc
        val = np.zeros(len(T))
        for sgn in (1.0, -1.0):
            d = dot + sgn * innc * inn
            val += (_fejer_ratio(d + top, n, r) + _fejer_ratio(d - top, n, r)) / denom_T
        val = val / (1.0 + s_star)
        return float(val[0]) if scalar else val

    return evaluate
