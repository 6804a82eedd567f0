"""Projections, near-best approximation, smoothness gauges, spectral checks.

Everything operates on orthogonal projection series: a function even in t is
projected onto the even orthonormal basis by the reference rule, after which
multipliers (cut-offs, the translation-like S_theta family, fractional powers
of the spectral operator) act degree-by-degree and L2 quantities follow from
Parseval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import SOLID, SURFACE, DomainSpec, DomainError, WeightSpec, _pt
from .kernels import (
    BasisIndex,
    basis_matrix,
    basis_indices,
    degree_slices,
    eigenvalue,
    space_dim,
)
from .orthopoly import CutoffSpec, cutoff_eval, gegenbauer_batch, jacobi_batch, JacobiParams
from .quadrature import CubatureRule, reference_rule

__all__ = [
    "ProjectionSeries",
    "SymmetryError",
    "project",
    "near_best",
    "best_error",
    "multiplier_apply",
    "s_theta_multiplier",
    "modulus_and_k",
    "SmoothnessReport",
    "spectral_check",
    "SpectralReport",
]


class SymmetryError(ValueError):
    """Input function is not even in the t variable."""


@dataclass
class ProjectionSeries:
    """Orthonormal-basis coefficients, degrees 0..N stacked."""

    domain: DomainSpec
    weight: WeightSpec
    N: int
    coef: np.ndarray
    f_id: str = ""

    def __post_init__(self):
        self.slices = degree_slices(self.domain, self.N)

    def block(self, n: int) -> np.ndarray:
        return self.coef[self.slices[n]]

    def block_norms2(self) -> np.ndarray:
        return np.array([float(self.block(n) @ self.block(n)) for n in range(self.N + 1)])

    def norm2(self) -> float:
        return math.sqrt(float(self.coef @ self.coef))

    def evaluate(self, X, T) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        T = np.atleast_1d(np.asarray(T, dtype=float))
        out = np.empty(len(T))
        for i0 in range(0, len(T), 8192):
            M = basis_matrix(self.domain, self.weight, self.N, X[i0 : i0 + 8192], T[i0 : i0 + 8192])
            out[i0 : i0 + 8192] = M.T @ self.coef
        return out

    def __call__(self, X, T):
        return self.evaluate(X, T)

    def copy_with(self, coef: np.ndarray, f_id: str | None = None) -> "ProjectionSeries":
        return ProjectionSeries(self.domain, self.weight, self.N, coef, f_id or self.f_id)


def check_even(f, dom: DomainSpec, tol: float = 1e-9, npts: int = 24):
    """Sample f(x, t) against f(x, -t); raise SymmetryError on mismatch."""
    rng = np.random.Generator(np.random.Philox(12345))
    th = rng.uniform(0.1, math.pi / 2 - 0.1, npts)
    t0 = np.cos(th)
    phi = rng.uniform(0, 2 * math.pi, npts)
    rp = np.ones(npts) if dom.kind == SURFACE else np.sqrt(rng.uniform(0, 1, npts))
    r = t0 * rp
    X = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
    T = np.sqrt(t0 * t0 + dom.rho**2)
    up = np.asarray(f(X, T), dtype=float)
    dn = np.asarray(f(X, -T), dtype=float)
    scale = 1.0 + np.max(np.abs(up))
    if np.max(np.abs(up - dn)) > tol * scale:
        raise SymmetryError("function is not even in t")


def project(
    dom: DomainSpec,
    w: WeightSpec,
    f,
    N: int,
    level: int | None = None,
    f_id: str = "",
    check: bool = True,
) -> ProjectionSeries:
    """Coefficients <f, Phi_k> for the orthonormal basis up to degree N.

    `level` is the reference-rule exactness degree (default 2N + 2; raise it
    for functions that are far from band-limited).
    """
    if isinstance(f, ProjectionSeries):
        if f.N >= N:
            out = ProjectionSeries(dom, w, N, f.coef[: space_dim(dom, N)].copy(), f.f_id)
        else:
            coef = np.zeros(space_dim(dom, N))
            coef[: len(f.coef)] = f.coef
            out = ProjectionSeries(dom, w, N, coef, f.f_id)
        return out
    if check:
        check_even(f, dom)
    rule = reference_rule(dom, w, level if level is not None else 2 * N + 2)
    vals = np.asarray(f(rule.X, rule.T), dtype=float)
    coef = np.empty(space_dim(dom, N))
    for i0 in range(0, len(rule.T), 8192):
        M = basis_matrix(dom, w, N, rule.X[i0 : i0 + 8192], rule.T[i0 : i0 + 8192])
        if i0 == 0:
            coef = M @ (rule.weights[i0 : i0 + 8192] * vals[i0 : i0 + 8192])
        else:
            coef += M @ (rule.weights[i0 : i0 + 8192] * vals[i0 : i0 + 8192])
    return ProjectionSeries(dom, w, N, coef, f_id)


def multiplier_apply(series: ProjectionSeries, m) -> ProjectionSeries:
    """Scale the degree-n block by m(n); m is a callable or an array."""
    coef = series.coef.copy()
    for n in range(series.N + 1):
        mn = m(n) if callable(m) else m[n]
        if not np.isfinite(mn):
            raise ArithmeticError(f"multiplier not finite at degree {n}")
        coef[series.slices[n]] *= mn
    return series.copy_with(coef)


def s_theta_multiplier(dom: DomainSpec, w: WeightSpec, theta: float, N: int) -> np.ndarray:
    """Multiplier of the translation-like operator S_theta on degrees 0..N.

    Surface: normalized Gegenbauer C_n^{lam-1/2}(cos t)/C_n^{lam-1/2}(1) with
    lam = gamma + (d-1)/2 (Chebyshev cos(n theta) in the degenerate gamma = 0,
    d = 2 case). Solid: normalized Jacobi R_n^{(lam-1/2, lam-1/2)}(cos theta),
    lam = gamma + mu + d/2.
    """
    z = math.cos(theta)
    if dom.kind == SURFACE:
        lam = w.gamma + 0.5 * (dom.d - 1)
        if abs(lam - 0.5) < 1e-14:
            return np.cos(np.arange(N + 1) * theta)
        C = gegenbauer_batch(N, lam - 0.5, np.array([z, 1.0]))
        return C[:, 0] / C[:, 1]
    lam = w.gamma + w.mu + 0.5 * dom.d
    p = JacobiParams(lam - 0.5, lam - 0.5)
    P = jacobi_batch(N, p, np.array([z, 1.0]))
    return P[:, 0] / P[:, 1]


def near_best(
    dom: DomainSpec,
    w: WeightSpec,
    f,
    n: int,
    c: CutoffSpec | None = None,
    discrete: bool = False,
    rule: CubatureRule | None = None,
    level: int | None = None,
):
    """Near-best approximation L_n * f, an element of the degree-2n space.

    Continuous form: project then apply the low-pass cut-off multiplier.
    Discrete form: discretize the convolution integral by a degree-4n
    cubature rule (pass one via `rule`, else it is solved on demand).
    """
    c = c or CutoffSpec("TypeA")
    if c.kind != "TypeA":
        raise DomainError("near-best operator requires a TypeA cut-off")
    if not discrete:
        series = project(dom, w, f, 2 * n, level=level)
        coeff = cutoff_eval(c, np.arange(2 * n + 1) / n)
        return multiplier_apply(series, lambda k: coeff[k])
    from .quadrature import cubature_solve
    from .kernels import KernelContext, localized_many

    ru = rule if rule is not None else cubature_solve(dom, w, 4 * n)
    fv = np.asarray(f(ru.nodes.X, ru.nodes.T), dtype=float)
    ctx = KernelContext(dom, w, 2 * n)

    def apply(X, T):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        T = np.atleast_1d(np.asarray(T, dtype=float))
        out = np.empty(len(T))
        for i in range(len(T)):
            Lv = localized_many(ctx, n, c, (X[i], T[i]), ru.nodes.X, ru.nodes.T)
            out[i] = float(ru.lambdas @ (Lv * fv))
        return out

    return apply


def best_error(
    dom: DomainSpec,
    w: WeightSpec,
    f,
    n: int,
    p: float = 2.0,
    N: int | None = None,
    level: int | None = None,
) -> float:
    """E_n(f)_p: exact via the coefficient tail for p = 2 (up to the degree-N
    truncation), an upper estimate via the near-best operator for p in {1, inf}."""
    if p == 2.0:
        NN = N if N is not None else max(2 * n, 64)
        series = f if isinstance(f, ProjectionSeries) and f.N >= NN else project(
            dom, w, f, NN, level=level
        )
        tail = series.block_norms2()[n + 1 :]
        return math.sqrt(float(np.sum(tail)))
    if p not in (1.0, math.inf):
        raise DomainError("best_error supports p in {1, 2, inf}")
    g = near_best(dom, w, f, n, level=level)
    rule = reference_rule(dom, w, max(4 * n + 2, 64))
    fv = np.asarray(f(rule.X, rule.T), dtype=float)
    gv = g.evaluate(rule.X, rule.T)
    if p == 1.0:
        return float(rule.weights @ np.abs(fv - gv))
    return float(np.max(np.abs(fv - gv)))


# ---------------------------------------------------------------------------
# modulus of smoothness / K-functional


@dataclass
class SmoothnessReport:
    r: float
    thetas: np.ndarray
    omega: np.ndarray  # modulus at each theta
    ns: np.ndarray
    E_n: np.ndarray
    K_n: np.ndarray  # K-functional surrogate at 1/n
    jackson: np.ndarray  # E_n / K_n
    inverse: np.ndarray  # K_n vs weighted sum of E_k
    K_theta: np.ndarray  # K-functional surrogate on the theta grid
    equivalence: np.ndarray  # omega / K_theta


def _k_functional(series: ProjectionSeries, r: float, tau: float, mus: np.ndarray) -> float:
    """Upper surrogate: infimum restricted to low-pass truncations g_m."""
    N = series.N
    norms2 = series.block_norms2()
    c = CutoffSpec("TypeA")
    best = math.inf
    m = 1
    while m <= N:
        coeff = cutoff_eval(c, np.arange(N + 1) / m)
        err = math.sqrt(float(np.sum((1.0 - coeff) ** 2 * norms2)))
        deriv = math.sqrt(float(np.sum((coeff * mus ** (0.5 * r)) ** 2 * norms2)))
        best = min(best, err + tau**r * deriv)
        m *= 2
    # g = f itself when f is band-limited enough
    deriv_full = math.sqrt(float(np.sum(mus**r * norms2)))
    best = min(best, tau**r * deriv_full)
    return best


def modulus_and_k(
    dom: DomainSpec,
    w: WeightSpec,
    f,
    r: float,
    thetas,
    ns,
    N: int = 128,
    level: int | None = None,
) -> SmoothnessReport:
    """Modulus of smoothness, K-functional surrogate, best-approximation
    errors, and their comparison ratios over the sweep.

    Fractional operators act on the degree-N projection of f (documented
    restriction: smoothness machinery is realized on band-limited data).
    """
    series = f if isinstance(f, ProjectionSeries) else project(dom, w, f, N, level=level)
    N = series.N
    norms2 = series.block_norms2()
    mus = np.array([eigenvalue(dom, w, k) for k in range(N + 1)])
    thetas = np.asarray(thetas, dtype=float)
    ns = np.asarray(ns, dtype=int)

    # modulus: sup over theta' <= theta of the multiplier norm (the sup is
    # resolved on a refinement of the given grid)
    fine = np.unique(np.concatenate([thetas, np.linspace(thetas.min() / 16, thetas.max(), 161)]))
    vals = []
    for th in fine:
        mS = s_theta_multiplier(dom, w, th, N)
        if np.max(np.abs(mS)) > 1.0 + 1e-12:
            raise ArithmeticError("|S_theta multiplier| exceeded 1")
        vals.append(math.sqrt(float(np.sum((1.0 - mS) ** r * norms2))))
    vals = np.array(vals)
    omega = np.array([np.max(vals[fine <= th + 1e-15]) for th in thetas])

    E = np.array(
        [math.sqrt(float(np.sum(norms2[n + 1 :]))) if n < N else 0.0 for n in range(N + 1)]
    )
    E_n = E[np.clip(ns, 0, N)]
    K_n = np.array([_k_functional(series, r, 1.0 / n, mus) for n in ns])
    K_theta = np.array([_k_functional(series, r, th, mus) for th in thetas])
    with np.errstate(divide="ignore", invalid="ignore"):
        jackson = np.where(K_n > 0, E_n / K_n, 0.0)
        inverse_bound = np.array(
            [
                float(np.sum((np.arange(n + 1) + 1.0) ** (r - 1) * E[: n + 1])) / n**r
                for n in ns
            ]
        )
        inverse = np.where(inverse_bound > 0, K_n / inverse_bound, 0.0)
        equivalence = np.where(K_theta > 0, omega / K_theta, 1.0)
    return SmoothnessReport(
        r=r, thetas=thetas, omega=omega, ns=ns, E_n=E_n, K_n=K_n,
        jackson=jackson, inverse=inverse, K_theta=K_theta, equivalence=equivalence,
    )


# ---------------------------------------------------------------------------
# spectral operator check


@dataclass
class SpectralReport:
    idx: BasisIndex
    mu_n: float
    max_rel_dev: float
    probes_used: int
    skipped: int


def _stencil(vals: np.ndarray, h: float, order: int) -> float:
    """4th-order central first/second derivative from 5 samples."""
    if order == 1:
        return float((vals[0] - 8 * vals[1] + 8 * vals[3] - vals[4]) / (12 * h))
    return float((-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h * h))


def _surface_operator(dom, w, series_eval, t, phi, h):
    """Spectral operator in the (t, phi) chart of the surface."""
    rho2 = dom.rho**2
    d = dom.d

    def F(tt, pp):
        rr = math.sqrt(max(tt * tt - rho2, 0.0))
        x = np.array([[rr * math.cos(pp), rr * math.sin(pp)]])
        return float(series_eval(x, np.array([tt]))[0])

    ts = [t + k * h for k in (-2, -1, 0, 1, 2)]
    Ft = np.array([F(tt, phi) for tt in ts])
    Fp = np.array([F(t, phi + k * h) for k in (-2, -1, 0, 1, 2)])
    d1 = _stencil(Ft, h, 1)
    d2 = _stencil(Ft, h, 2)
    dpp = _stencil(Fp, h, 2)
    A = (1.0 + rho2 - t * t) * (1.0 - rho2 / (t * t))
    B = (
        (1.0 + rho2 - t * t) * rho2 / t**3
        - (2.0 * w.gamma + d) * (t * t - rho2) / t
        + (d - 1.0) / t
    )
    return A * d2 + B * d1 + dpp / (t * t - rho2)


def _solid_operator(dom, w, series_eval, x, t, h):
    """Spectral operator in ambient (x, t) coordinates of the solid."""
    rho2 = dom.rho**2
    d = dom.d

    def F(xx, tt):
        return float(series_eval(np.asarray(xx)[None, :], np.array([tt]))[0])

    offs = (-2, -1, 0, 1, 2)
    Ft = np.array([F(x, t + k * h) for k in offs])
    F1 = np.array([F(x + np.array([k * h, 0.0]), t) for k in offs])
    F2 = np.array([F(x + np.array([0.0, k * h]), t) for k in offs])
    Fx = np.array([F(x * (1.0 + k * h), t) for k in offs])  # along <x, grad>
    dt1, dt2 = _stencil(Ft, h, 1), _stencil(Ft, h, 2)
    lap = _stencil(F1, h, 2) + _stencil(F2, h, 2)
    g1, g2 = _stencil(Fx, h, 1), _stencil(Fx, h, 2)
    xgrad = g1
    xgrad2 = g2 + g1  # <x,grad>^2 = s-second-derivative + <x,grad>
    cross = np.array(
        [
            [F(x * (1.0 + i * h), t + j * h) for j in offs]
            for i in offs
        ]
    )
    w4 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12 * h)
    xgrad_dt = float(w4 @ cross @ w4)
    val = (
        (1.0 + rho2 - t * t) * (1.0 - rho2 / (t * t)) * dt2
        + lap - xgrad2 + xgrad
        + (2.0 / t) * (1.0 + rho2 - t * t) * xgrad_dt
        + ((1.0 + rho2 - t * t) * rho2 / (t * t) + 2.0 * w.mu + d) * dt1 / t
        - (2.0 * w.gamma + 2.0 * w.mu + d + 1.0)
        * ((1.0 - rho2 / (t * t)) * t * dt1 + xgrad)
    )
    return val


def spectral_check(
    dom: DomainSpec,
    w: WeightSpec,
    idx: BasisIndex,
    probes: int = 20,
    h: float = 1e-4,
    seed: int = 3,
) -> SpectralReport:
    """Finite-difference verification that the basis element is an
    eigenfunction of the spectral operator with eigenvalue -n(n + ...)."""
    if dom.d != 2:
        raise DomainError("spectral check implemented for d = 2")
    n = idx.n
    mu_n = eigenvalue(dom, w, n)
    pos = basis_indices(dom, n).index(idx)
    sl = degree_slices(dom, n)[n]

    def series_eval(X, T):
        M = basis_matrix(dom, w, n, X, T, normalized=False)
        return M[sl][pos]

    rng = np.random.Generator(np.random.Philox(seed))
    used, skipped = 0, 0
    devs = []
    refs = []
    while used < probes and skipped < 10 * probes:
        t0 = rng.uniform(0.35, 0.9)
        t = math.sqrt(t0 * t0 + dom.rho**2)
        phi = rng.uniform(0, 2 * math.pi)
        if dom.kind == SURFACE:
            rr = t0
            x = np.array([rr * math.cos(phi), rr * math.sin(phi)])
            val = _surface_operator(dom, w, series_eval, t, phi, h)
        else:
            rr = t0 * rng.uniform(0.1, 0.75)
            x = np.array([rr * math.cos(phi), rr * math.sin(phi)])
            val = _solid_operator(dom, w, series_eval, x, t, h)
        base = float(series_eval(x[None, :] if x.ndim == 1 else x, np.array([t]))[0])
        if not np.isfinite(val):
            skipped += 1
            continue
        devs.append(abs(val + mu_n * base))
        refs.append(abs(mu_n * base))
        used += 1
    scale = max(max(refs), 1e-12) if refs else 1.0
    max_rel = max(devs) / scale if devs else math.inf
    if max_rel > 1e-3 and n > 0:
        # Richardson-style fallback: halve the step and keep the better run
        finer = spectral_check(dom, w, idx, probes, 0.5 * h, seed + 1)
        if finer.max_rel_dev < max_rel:
            return finer
    return SpectralReport(idx=idx, mu_n=mu_n, max_rel_dev=max_rel, probes_used=used, skipped=skipped)
