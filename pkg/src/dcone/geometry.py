"""Domains, intrinsic distances, weights, ball measures and separated node sets.

Two domains are supported at base dimension d >= 2: the double conic /
hyperbolic surface (kind "surface", points with ||x||^2 = t^2 - rho^2) and the
solid double cone / hyperboloid (kind "solid", ||x||^2 <= t^2 - rho^2), both
with rho <= |t| <= sqrt(1 + rho^2).

The intrinsic distance identifies (x, t) with (x, -t); every construction here
(node sets, covering checks) is done with that identification in mind.
Explicit maximal epsilon-separated sets are built for d = 2.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

__all__ = [
    "DomainSpec",
    "PointXT",
    "WeightSpec",
    "SeparatedSet",
    "DomainError",
    "distance",
    "distance_arrays",
    "rho_lift",
    "weight_eval",
    "wn_eval",
    "ball_measure",
    "ball_comparison",
    "build_separated",
    "verify_separated",
    "halton",
]

SURFACE = "surface"
SOLID = "solid"

_MEMBERSHIP_TOL = 1e-12


class DomainError(ValueError):
    """Point or parameter outside the admissible domain."""


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    d: int = 2
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in (SURFACE, SOLID):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if self.d < 2:
            raise DomainError("base dimension must be >= 2")
        if self.rho < 0.0:
            raise DomainError("rho must be >= 0")

    @property
    def t_max(self) -> float:
        return math.sqrt(1.0 + self.rho**2)

    def contains(self, x, t: float, tol: float = _MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if len(x) != self.d:
            return False
        r2 = float(np.dot(x, x))
        tt = t * t - self.rho**2
        if not (-tol <= tt <= 1.0 + tol):
            return False
        if self.kind == SURFACE:
            return abs(r2 - tt) <= tol
        return r2 <= tt + tol


@dataclass(frozen=True)
class PointXT:
    """A point (x, t); use DomainSpec.contains to validate membership."""

    x: tuple
    t: float

    def __init__(self, x, t):
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(x)))
        object.__setattr__(self, "t", float(t))

    def as_arrays(self):
        return np.asarray(self.x, dtype=float), self.t


def _pt(p):
    if isinstance(p, PointXT):
        return np.asarray(p.x, dtype=float), p.t
    x, t = p
    return np.asarray(x, dtype=float), float(t)


# ---------------------------------------------------------------------------
# distance


def embed(dom: DomainSpec, X, T) -> np.ndarray:
    """Sphere lift: cos d(p, q) = <embed(p), embed(q)> (unit vectors).

    Surface points map to (x, sqrt(1+rho^2-t^2)); solid points additionally
    carry sqrt(t^2-rho^2-||x||^2). The lift only sees t^2, realizing the
    identification (x, t) ~ (x, -t).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    T = np.atleast_1d(np.asarray(T, dtype=float))
    rho2 = dom.rho**2
    top = np.sqrt(np.clip(1.0 + rho2 - T * T, 0.0, None))
    if dom.kind == SURFACE:
        return np.concatenate([X, top[:, None]], axis=1)
    inner = np.sqrt(np.clip(T * T - rho2 - np.sum(X * X, axis=1), 0.0, None))
    return np.concatenate([X, inner[:, None], top[:, None]], axis=1)


def distance_arrays(dom: DomainSpec, X1, T1, X2, T2, quotient: bool = False) -> np.ndarray:
    """Vectorized intrinsic distance; broadcasting over leading axes.

    The formula only involves t^2, so it extends evenly across sheets; with
    `quotient=True` that extension is used instead of raising for rho > 0
    cross-sheet pairs (the value then is the distance to the mirrored point).
    """
    X1 = np.asarray(X1, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    T1 = np.asarray(T1, dtype=float)
    T2 = np.asarray(T2, dtype=float)
    rho2 = dom.rho**2
    if not quotient and dom.rho > 0.0 and np.any(T1 * T2 < 0.0):
        raise DomainError("distance is defined within one sheet when rho > 0")
    dot = np.sum(X1 * X2, axis=-1)
    top = np.sqrt(np.clip(1.0 + rho2 - T1 * T1, 0.0, None)) * np.sqrt(
        np.clip(1.0 + rho2 - T2 * T2, 0.0, None)
    )
    cosd = dot + top
    if dom.kind == SOLID:
        in1 = np.sqrt(np.clip(T1 * T1 - rho2 - np.sum(X1 * X1, axis=-1), 0.0, None))
        in2 = np.sqrt(np.clip(T2 * T2 - rho2 - np.sum(X2 * X2, axis=-1), 0.0, None))
        cosd = cosd + in1 * in2
    return np.arccos(np.clip(cosd, -1.0, 1.0))


def distance(dom: DomainSpec, p, q) -> float:
    """Intrinsic distance in [0, pi] between two points of the domain."""
    x1, t1 = _pt(p)
    x2, t2 = _pt(q)
    return float(distance_arrays(dom, x1, t1, x2, t2))


def rho_lift(p, from_rho: float, to_rho: float):
    """Map (x, t) at parameter from_rho to the same x at to_rho.

    t goes to sign(t) sqrt(t^2 - from_rho^2 + to_rho^2); distances and ball
    masses are preserved.
    """
    x, t = _pt(p)
    rad = t * t - from_rho**2 + to_rho**2
    if rad < -_MEMBERSHIP_TOL:
        raise DomainError(f"rho_lift radical negative: t={t}, {from_rho}->{to_rho}")
    s = 1.0 if t >= 0.0 else -1.0
    return PointXT(x, s * math.sqrt(max(rad, 0.0)))


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class WeightSpec:
    """Exponents of the Gegenbauer-type weight; mu applies on the solid only."""

    beta: float = 0.0
    gamma: float = 0.5
    mu: float | None = None

    def validate(self, dom: DomainSpec):
        if self.gamma <= -0.5:
            raise DomainError("gamma must exceed -1/2")
        if dom.kind == SOLID:
            if self.mu is None or self.mu <= -0.5:
                raise DomainError("solid weight needs mu > -1/2")
            if self.beta <= (-0.5 if dom.rho > 0 else -(dom.d + 1) / 2):
                raise DomainError("beta out of integrable range")
        else:
            if self.beta <= (-0.5 if dom.rho > 0 else -(dom.d + 1) / 2):
                raise DomainError("beta out of integrable range")

    def kernel_ready(self, dom: DomainSpec) -> bool:
        """Whether an addition formula applies (surface beta=0, solid beta=1/2)."""
        if dom.kind == SURFACE:
            return self.beta == 0.0 and self.gamma >= 0.0
        return (
            self.beta == 0.5
            and self.gamma >= 0.0
            and self.mu is not None
            and self.mu >= 0.0
        )

    def normalization(self, dom: DomainSpec) -> float:
        """Constant making the weighted measure a probability measure."""
        self.validate(dom)
        d = dom.d
        log_omega_d = math.log(2.0) + 0.5 * d * math.log(math.pi) - gammaln(0.5 * d)
        if dom.kind == SURFACE:
            ln = (
                gammaln(self.beta + self.gamma + 0.5 * (d + 1))
                - gammaln(self.beta + 0.5 * d)
                - gammaln(self.gamma + 0.5)
                - log_omega_d
            )
            return math.exp(ln)
        ln = (
            gammaln(self.beta + self.mu + self.gamma + 0.5 * (d + 1))
            - gammaln(self.beta + self.mu + 0.5 * d)
            - gammaln(self.gamma + 0.5)
            + gammaln(self.mu + 0.5 * (d + 1))
            - gammaln(self.mu + 0.5)
            - 0.5 * d * math.log(math.pi)
        )
        return math.exp(ln)


def weight_eval(dom: DomainSpec, w: WeightSpec, p) -> float:
    """Unnormalized pointwise weight density (the |t|-factored form)."""
    x, t = _pt(p)
    rho2 = dom.rho**2
    tt = max(t * t - rho2, 0.0)
    one = 1.0 + rho2 - t * t
    if one < 0.0:
        raise DomainError("point outside the |t| <= sqrt(1+rho^2) slab")

    def pw(base, expo):
        if expo == 0.0:
            return 1.0
        if base <= 0.0:
            return math.inf if expo < 0.0 else 0.0
        return base**expo

    val = abs(t) * pw(tt, w.beta - 0.5) * pw(one, w.gamma - 0.5)
    if dom.kind == SOLID:
        inner = tt - float(np.dot(x, x))
        val *= pw(max(inner, 0.0), w.mu - 0.5)
    return val


def wn_eval(dom: DomainSpec, w: WeightSpec, n: int, p) -> float:
    """Ball-comparison weight w(n; .): wn * n^{-dim} matches ball_measure(., 1/n).

    On the solid the t-exponent is beta - 1/2 (the |t| prefactor of the weight
    is eaten by the section's thickness), so the beta = 1/2 kernel regime
    carries no t-factor at all.
    """
    x, t = _pt(p)
    rho2 = dom.rho**2
    inv2 = 1.0 / (n * n)
    b_exp = w.beta if dom.kind == SURFACE else w.beta - 0.5
    val = (max(t * t - rho2, 0.0) + inv2) ** b_exp * (
        max(1.0 + rho2 - t * t, 0.0) + inv2
    ) ** w.gamma
    if dom.kind == SOLID:
        val *= (max(t * t - rho2 - float(np.dot(x, x)), 0.0) + inv2) ** w.mu
    return val


def ball_comparison(dom: DomainSpec, w: WeightSpec, p, r: float) -> float:
    """Closed-form comparison quantity for the ball mass at radius r."""
    x, t = _pt(p)
    rho2 = dom.rho**2
    r2 = r * r
    b_exp = w.beta if dom.kind == SURFACE else w.beta - 0.5
    val = r**dom.d * (max(t * t - rho2, 0.0) + r2) ** b_exp * (
        max(1.0 + rho2 - t * t, 0.0) + r2
    ) ** w.gamma
    if dom.kind == SOLID:
        val *= r * (max(t * t - rho2 - float(np.dot(x, x)), 0.0) + r2) ** w.mu
    return val


def _gl_grid(a: float, b: float, m: int):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    x, wt = np.polynomial.legendre.leggauss(m)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * wt


def _arc_measure(a, b, cos_r):
    """Angular measure of {phi: a cos(phi) + b >= cos_r} on the circle."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    u = np.where(np.abs(a) > 1e-15, (cos_r - b) / np.where(a == 0.0, 1.0, a), np.nan)
    arc = np.empty_like(b)
    tiny = np.abs(a) <= 1e-15
    arc[tiny] = np.where(b[tiny] >= cos_r, 2.0 * math.pi, 0.0)
    pos = (~tiny) & (a > 0.0)
    neg = (~tiny) & (a < 0.0)
    arc[pos] = 2.0 * np.arccos(np.clip(u[pos], -1.0, 1.0))
    arc[neg] = 2.0 * (math.pi - np.arccos(np.clip(u[neg], -1.0, 1.0)))
    return arc


def ball_measure(
    dom: DomainSpec, w: WeightSpec, center, r: float, resolution: int = 200
) -> float:
    """Normalized weighted mass of the intrinsic ball of radius r (d = 2).

    Semi-analytic: the angular section of the ball is an arc whose length is
    explicit, leaving one (surface) or two (solid) numerical integrals.
    """
    if dom.d != 2:
        raise DomainError("ball_measure implemented for d = 2")
    if r <= 0.0:
        return 0.0
    if r > math.pi / 12.0 + 1e-12:
        warnings.warn("ball radius outside the r <= pi/12 comparison regime")
    xc, tc = _pt(center)
    rho = dom.rho
    # reduce rho > 0 to the cone: masses are preserved under the lift
    if rho > 0.0:
        xc0, tc0 = _pt(rho_lift((xc, tc), rho, 0.0))
        dom0 = DomainSpec(dom.kind, dom.d, 0.0)
        return ball_measure(dom0, w, (xc0, tc0), r, resolution)

    cos_r = math.cos(r)
    norm = w.normalization(dom)
    theta_c = math.acos(min(1.0, max(-1.0, abs(tc))))
    # the ball meets the two sheets in theta = arccos(s) intervals around
    # theta_c and pi - theta_c; merge them when they overlap near the apex
    iv1 = (max(theta_c - r, 0.0), min(theta_c + r, math.pi))
    iv2 = (max(math.pi - theta_c - r, 0.0), min(math.pi - theta_c + r, math.pi))
    if iv1[0] > iv2[0]:
        iv1, iv2 = iv2, iv1
    intervals = [iv1, iv2] if iv2[0] > iv1[1] else [(iv1[0], max(iv1[1], iv2[1]))]
    total = 0.0
    for th_lo, th_hi in intervals:
        theta, wt = _gl_grid(th_lo, th_hi, resolution)
        s = np.cos(theta)
        sin_th = np.sin(theta)
        if dom.kind == SURFACE:
            a = tc * s  # coefficient of cos(angular offset) in cos(distance)
            b = np.sqrt(np.clip(1 - tc * tc, 0, None)) * np.sqrt(np.clip(1 - s * s, 0, None))
            arc = _arc_measure(a, b, cos_r)
            dens = np.abs(s) ** (2 * w.beta + dom.d - 1) * sin_th ** (2 * w.gamma)
            total += float(np.dot(wt, dens * arc))
        else:
            rc = float(np.linalg.norm(xc))
            inner_c = math.sqrt(max(tc * tc - rc * rc, 0.0))
            alpha, awt = _gl_grid(0.0, 0.5 * math.pi, resolution)
            rp = np.sin(alpha)[None, :]  # radius fraction within the t-section
            cosa = np.cos(alpha)[None, :]
            sv = s[:, None]
            a = rc * np.abs(sv) * rp
            b = inner_c * np.abs(sv) * cosa + math.sqrt(
                max(1 - tc * tc, 0.0)
            ) * np.sqrt(np.clip(1 - sv * sv, 0, None))
            arc = _arc_measure(np.broadcast_to(a, b.shape).copy(), b, cos_r)
            dens_s = np.abs(s) ** (2 * w.beta + 2 * w.mu + dom.d - 1) * sin_th ** (2 * w.gamma)
            dens_a = cosa ** (2 * w.mu) * np.sin(alpha)[None, :]
            inner = np.sum(awt[None, :] * dens_a * arc, axis=1)
            total += float(np.dot(wt, dens_s * inner))
    return norm * total


# ---------------------------------------------------------------------------
# separated sets


@dataclass
class Band:
    t: float
    t_minus: float
    t_plus: float
    eps_j: float


@dataclass
class SeparatedSet:
    """Maximal epsilon-separated node set with its product cells.

    Nodes are stored upper sheet first; `mirror` maps each node index to its
    evenly-symmetric partner (-x, -t).
    """

    domain: DomainSpec
    epsilon: float
    N: int
    bands: list
    X: np.ndarray  # (K, d) node x-coordinates
    T: np.ndarray  # (K,) node t-coordinates
    band_of: np.ndarray  # (K,) band index, 1-based as in the construction
    cell_of: np.ndarray  # (K,) cell index within the band
    cells: list  # per node: dict describing the product cell
    mirror: np.ndarray  # (K,) index of (-x,-t)
    evenly_symmetric: bool = True

    def __len__(self):
        return len(self.T)

    def points(self):
        return [PointXT(self.X[i], self.T[i]) for i in range(len(self.T))]

    def to_json(self) -> str:
        return json.dumps(
            {
                "domain": {"kind": self.domain.kind, "d": self.domain.d, "rho": self.domain.rho},
                "epsilon": self.epsilon,
                "bands": [
                    {"t": b.t, "tminus": b.t_minus, "tplus": b.t_plus, "epsj": b.eps_j}
                    for b in self.bands
                ],
                "nodes": [
                    {
                        "x": self.X[i].tolist(),
                        "t": float(self.T[i]),
                        "band": int(self.band_of[i]),
                        "cell": int(self.cell_of[i]),
                    }
                    for i in range(len(self.T))
                ],
            }
        )

    @staticmethod
    def from_json(text: str) -> "SeparatedSet":
        d = json.loads(text)
        dom = DomainSpec(d["domain"]["kind"], d["domain"]["d"], d["domain"]["rho"])
        built = build_separated(dom, d["epsilon"])
        X = np.array([nd["x"] for nd in d["nodes"]])
        T = np.array([nd["t"] for nd in d["nodes"]])
        if len(T) == len(built.T) and np.allclose(X, built.X) and np.allclose(T, built.T):
            return built
        # foreign node list: keep coordinates, drop cell geometry
        band_of = np.array([nd["band"] for nd in d["nodes"]], dtype=int)
        cell_of = np.array([nd["cell"] for nd in d["nodes"]], dtype=int)
        bands = [Band(b["t"], b["tminus"], b["tplus"], b["epsj"]) for b in d["bands"]]
        mirror = _mirror_index(X, T)
        sym = bool(np.all(mirror >= 0))
        return SeparatedSet(
            dom, d["epsilon"], len(bands), bands, X, T, band_of, cell_of,
            [None] * len(T), mirror, sym,
        )


def _mirror_index(X: np.ndarray, T: np.ndarray) -> np.ndarray:
    lookup = {}
    for i in range(len(T)):
        lookup[tuple(np.round(np.append(X[i], T[i]), 9))] = i
    out = np.full(len(T), -1, dtype=int)
    for i in range(len(T)):
        key = tuple(np.round(np.append(-X[i], -T[i]), 9))
        out[i] = lookup.get(key, -1)
    return out


def _odd_count(limit: float) -> int:
    """Largest odd integer <= limit, at least 1."""
    m = int(math.floor(limit))
    if m < 1:
        return 1
    return m if m % 2 == 1 else m - 1


def build_separated(dom: DomainSpec, eps: float, complete: bool | None = None) -> SeparatedSet:
    """Evenly symmetric maximal eps-separated set with product cells (d = 2).

    Bands at t_j = cos((2j-1) pi / (2N)); within each upper band an angular
    (surface) or ring-by-angle (solid) net sized so that, together with the
    mirrored lower sheet, pairwise intrinsic distances stay >= eps exactly.
    Angular counts are odd so the mirrored nodes interleave on the quotient
    circle instead of colliding with the identification (x,t) ~ (x,-t).

    `complete` runs a deterministic greedy saturation pass (symmetric pairs
    from the probe Halton stream) so that radius-eps balls cover the domain;
    default: enabled unless the band net alone exceeds 30k nodes.
    """
    if dom.d != 2:
        raise DomainError("explicit point sets are implemented for d = 2")
    if not (0.0 < eps <= math.pi / 4.0 + 1e-15):
        raise DomainError("eps must lie in (0, pi/4]")
    N = 2 * int(math.floor(0.5 * math.pi / eps))
    if N < 2:
        raise DomainError("eps too large: fewer than two bands")
    half = math.pi / (2.0 * N)
    sin_half_eps = math.sin(0.5 * eps)

    bands = []
    for j in range(1, N + 1):
        theta = (2 * j - 1) * math.pi / (2.0 * N)
        bands.append(
            Band(
                t=math.cos(theta),
                t_minus=math.cos(theta + half),
                t_plus=math.cos(theta - half),
                eps_j=0.5 * math.pi * eps / abs(math.cos(theta)),
            )
        )

    xs, ts, band_of, cell_of, cells = [], [], [], [], []
    if dom.kind == SURFACE:
        for j in range(1, N // 2 + 1):
            tj = bands[j - 1].t
            psi = math.asin(min(1.0, sin_half_eps / tj))
            M = _odd_count(0.5 * math.pi / psi)
            for a in range(M):
                phi = 2.0 * math.pi * a / M
                xs.append([tj * math.cos(phi), tj * math.sin(phi)])
                ts.append(tj)
                band_of.append(j)
                cell_of.append(a)
                cells.append({"band": j, "phi": phi, "half_arc": math.pi / M, "M": M})
    else:
        for j in range(1, N // 2 + 1):
            tj = bands[j - 1].t
            phi_j = math.asin(min(1.0, sin_half_eps / tj))
            # rings at radii sin(alpha), alpha from phi_j (mirror-separation
            # limit, which also keeps the axis covered) out to the lateral
            # boundary, spaced by at least 2 phi_j
            span = 0.5 * math.pi - phi_j
            gaps = int(math.floor(span / (2.0 * phi_j)))
            if gaps >= 1:
                alphas = [phi_j + i * span / gaps for i in range(gaps + 1)]
            else:
                alphas = [max(phi_j, 0.25 * math.pi)]
            bounds = [0.0]
            for k in range(len(alphas) - 1):
                bounds.append(0.5 * (alphas[k] + alphas[k + 1]))
            bounds.append(0.5 * math.pi)
            cell_idx = 0
            for k, alpha in enumerate(alphas):
                rk = math.sin(alpha)
                psi = math.asin(min(1.0, sin_half_eps / (tj * rk)))
                M = _odd_count(0.5 * math.pi / psi)
                for a in range(M):
                    phi = 2.0 * math.pi * a / M
                    xs.append([tj * rk * math.cos(phi), tj * rk * math.sin(phi)])
                    ts.append(tj)
                    band_of.append(j)
                    cell_of.append(cell_idx)
                    cells.append(
                        {
                            "band": j,
                            "ring": k + 1,
                            "alpha": alpha,
                            "alpha_lo": bounds[k],
                            "alpha_hi": bounds[k + 1],
                            "phi": phi,
                            "half_arc": math.pi / M,
                            "M": M,
                        }
                    )
                    cell_idx += 1

    if complete is None:
        complete = 2 * len(ts) <= 30_000
    if complete:
        xs, ts, band_of, cell_of, cells = _greedy_complete(
            dom, eps, N, xs, ts, band_of, cell_of, cells
        )

    n_up = len(ts)
    X = np.array(xs + [[-x[0], -x[1]] for x in xs])
    T = np.array(ts + [-t for t in ts])
    band_of = np.array(band_of + [N + 1 - j for j in band_of], dtype=int)
    cell_of = np.array(cell_of + cell_of, dtype=int)
    cells = cells + [dict(c, band=N + 1 - c["band"], mirrored=True) for c in cells]
    mirror = np.concatenate([np.arange(n_up) + n_up, np.arange(n_up)])

    if dom.rho > 0.0:
        T = np.sign(T) * np.sqrt(T * T + dom.rho**2)

    return SeparatedSet(
        domain=dom,
        epsilon=eps,
        N=N,
        bands=bands,
        X=X,
        T=T,
        band_of=band_of,
        cell_of=cell_of,
        cells=cells,
        mirror=mirror,
        evenly_symmetric=True,
    )


def _greedy_complete(dom, eps, N, xs, ts, band_of, cell_of, cells):
    """Saturate the band net: add evenly-symmetric candidate pairs that stay
    eps-away from everything, drawn from the verification Halton stream."""
    dom0 = DomainSpec(dom.kind, dom.d, 0.0)
    n_cand = max(30_000, 25 * 2 * len(ts))
    Xc, Tc = _probe_points(dom0, n_cand)
    # quotient upper representatives of the current symmetric set
    Xq = np.array(xs + [[-x[0], -x[1]] for x in xs])
    Tq = np.abs(np.array(ts + ts))
    # symmetric-pair self distance: 2 arcsin(|t|) on the surface, 2 arcsin(||x||) inside
    self_arg = np.abs(Tc) if dom.kind == SURFACE else np.linalg.norm(Xc, axis=1)
    ok_self = 2.0 * np.arcsin(np.clip(self_arg, 0.0, 1.0)) >= eps
    Vc = embed(dom0, Xc, Tc)
    Vn = embed(dom0, Xq, Tq)
    cos_eps = math.cos(eps)
    cmax = np.empty(n_cand)
    chunk = 8192
    for i0 in range(0, n_cand, chunk):
        cmax[i0 : i0 + chunk] = (Vc[i0 : i0 + chunk] @ Vn.T).max(axis=1)
    survivors = np.flatnonzero((cmax <= cos_eps) & ok_self)

    added_X, added_T = [], []
    for i in survivors:
        x, tq = Xc[i], abs(Tc[i])
        if added_X:
            AX = np.asarray(added_X)
            AT = np.asarray(added_T)
            d1 = distance_arrays(dom0, x, tq, AX, AT, quotient=True)
            d2 = distance_arrays(dom0, x, tq, -AX, AT, quotient=True)
            if min(d1.min(), d2.min()) < eps:
                continue
        added_X.append(x)
        added_T.append(tq)

    half = math.pi / (2.0 * N)
    for x, tq in zip(added_X, added_T):
        theta = math.acos(min(1.0, tq))
        j = min(N // 2, max(1, int(math.floor(theta / (2.0 * half))) + 1))
        xs.append([float(x[0]), float(x[1])])
        ts.append(float(tq))
        band_of.append(j)
        cell_of.append(-1)
        cells.append({"band": j, "greedy": True})
    return xs, ts, band_of, cell_of, cells


@dataclass
class SeparationReport:
    min_pairwise: float
    epsilon: float
    multiplicity_min: int
    multiplicity_max: int
    multiplicity_histogram: dict
    evenly_symmetric: bool
    separated: bool
    covered: bool


def halton(n: int, dims: int, skip: int = 20) -> np.ndarray:
    """Deterministic Halton sequence in [0,1)^dims."""
    primes = [2, 3, 5, 7, 11, 13][:dims]
    out = np.empty((n, dims))
    for d_, p in enumerate(primes):
        seq = np.zeros(n)
        for i in range(n):
            f, r, idx = 1.0, 0.0, i + skip
            while idx > 0:
                f /= p
                r += f * (idx % p)
                idx //= p
            seq[i] = r
        out[:, d_] = seq
    return out


def _probe_points(dom: DomainSpec, n: int):
    u = halton(n, 3 if dom.kind == SOLID else 2)
    theta = u[:, 0] * math.pi
    t0 = np.cos(theta)  # cone-parameter t at rho = 0
    phi = 2.0 * math.pi * u[:, 1]
    if dom.kind == SURFACE:
        rp = np.ones(n)
    else:
        rp = np.sqrt(u[:, 2])
    r_abs = np.abs(t0) * rp
    X = np.stack([r_abs * np.cos(phi), r_abs * np.sin(phi)], axis=1)
    T = np.sign(t0) * np.sqrt(t0 * t0 + dom.rho**2)
    return X, T


def verify_separated(s: SeparatedSet, probes: int = 10_000) -> SeparationReport:
    """Check pairwise separation, radius-eps covering multiplicity and symmetry."""
    dom, eps = s.domain, s.epsilon
    K = len(s)
    V = embed(dom, s.X, s.T)
    cos_eps = math.cos(eps)
    cmax = -np.inf
    chunk = 4096
    for i0 in range(0, K, chunk):
        i1 = min(i0 + chunk, K)
        G = V[i0:i1] @ V.T
        G[np.arange(i1 - i0), np.arange(i0, i1)] = -np.inf
        cmax = max(cmax, float(G.max()))
    min_d = math.acos(min(1.0, max(-1.0, cmax)))

    Xp, Tp = _probe_points(dom, probes)
    Vp = embed(dom, Xp, Tp)
    counts = np.zeros(probes, dtype=int)
    for i0 in range(0, probes, chunk):
        i1 = min(i0 + chunk, probes)
        counts[i0:i1] = np.sum(Vp[i0:i1] @ V.T >= cos_eps, axis=1)
    hist = {int(k): int(v) for k, v in zip(*np.unique(counts, return_counts=True))}

    mirror = _mirror_index(s.X, s.T)
    symmetric = bool(np.all(mirror >= 0)) and len(s) > 0
    return SeparationReport(
        min_pairwise=min_d,
        epsilon=eps,
        multiplicity_min=int(counts.min()) if probes else 0,
        multiplicity_max=int(counts.max()) if probes else 0,
        multiplicity_histogram=hist,
        evenly_symmetric=symmetric,
        separated=bool(min_d >= eps - 1e-12),
        covered=bool(counts.min() >= 1) if probes else False,
    )
