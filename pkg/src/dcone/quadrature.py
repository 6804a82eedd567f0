"""Reference integration, positive cubature rules, and MZ sampling checks.

The reference rule is an exact product rule (Gauss-Jacobi in the even t
variable, equispaced angles, a radial Gauss-Jacobi factor inside the solid)
listing both sheets explicitly. Cubature rules over evenly symmetric
separated sets are found by anchoring node weights at ball-comparison masses
and applying a weighted least-norm moment correction; weights stay positive,
the rule is re-symmetrized, and infeasibility triggers a denser retry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    SOLID,
    SURFACE,
    DomainSpec,
    DomainError,
    SeparatedSet,
    WeightSpec,
    ball_comparison,
    build_separated,
    distance_arrays,
    halton,
)
from .kernels import basis_matrix, space_dim
from .orthopoly import JacobiParams, gauss_jacobi

__all__ = [
    "ReferenceRule",
    "reference_rule",
    "reference_integrate",
    "CubatureRule",
    "CubatureError",
    "cubature_solve",
    "mz_check",
]


class IntegrationError(ArithmeticError):
    pass


class CubatureError(ArithmeticError):
    def __init__(self, msg, residual=None, min_lambda=None):
        super().__init__(msg)
        self.residual = residual
        self.min_lambda = min_lambda


@dataclass(frozen=True)
class ReferenceRule:
    """Product rule nodes/weights for the normalized weighted measure."""

    domain: DomainSpec
    weight: WeightSpec
    level: int
    X: np.ndarray
    T: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        vals = np.asarray(f(self.X, self.T), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmax(~np.isfinite(vals)))
            raise IntegrationError(
                f"non-finite integrand at x={self.X[bad]}, t={self.T[bad]}"
            )
        return float(self.weights @ vals)


_rule_cache: dict = {}


def reference_rule(dom: DomainSpec, w: WeightSpec, level: int) -> ReferenceRule:
    """Rule exact on even polynomials of total degree <= level (d = 2)."""
    if dom.d != 2:
        raise DomainError("reference rule implemented for d = 2")
    key = (dom.kind, dom.rho, w.beta, w.gamma, w.mu, level)
    if key in _rule_cache:
        return _rule_cache[key]
    w.validate(dom)
    m_u = level // 2 + 1
    m_ang = level + 1
    extra = w.mu if dom.kind == SOLID else 0.0
    tr = gauss_jacobi(m_u, JacobiParams(w.gamma - 0.5, w.beta + extra + 0.5 * dom.d - 1.0))
    v = 0.5 * (1.0 + tr.nodes)  # v = t^2 - rho^2 on (0, 1)
    t_up = np.sqrt(v + dom.rho**2)
    phis = 2.0 * math.pi * np.arange(m_ang) / m_ang

    if dom.kind == SURFACE:
        r_up = np.sqrt(v)
        TT, PP = np.meshgrid(t_up, phis, indexing="ij")
        RR = np.repeat(r_up[:, None], m_ang, axis=1)
        WW = np.repeat(tr.weights[:, None] / m_ang, m_ang, axis=1)
        X = np.stack([RR * np.cos(PP), RR * np.sin(PP)], axis=-1).reshape(-1, 2)
        T = TT.ravel()
        wts = WW.ravel()
    else:
        rr = gauss_jacobi(m_u, JacobiParams(w.mu - 0.5, 0.0))
        rad = np.sqrt(0.5 * (1.0 + rr.nodes))
        TT, RR, PP = np.meshgrid(t_up, rad, phis, indexing="ij")
        SS = np.sqrt(np.repeat(v[:, None], m_u, axis=1))[:, :, None]
        WW = (tr.weights[:, None] * rr.weights[None, :])[:, :, None] / m_ang
        WW = np.broadcast_to(WW, TT.shape)
        R_ABS = SS * RR
        X = np.stack([R_ABS * np.cos(PP), R_ABS * np.sin(PP)], axis=-1).reshape(-1, 2)
        T = TT.ravel()
        wts = WW.ravel()

    # both sheets, half weight each
    X = np.concatenate([X, X])
    T = np.concatenate([T, -T])
    wts = 0.5 * np.concatenate([wts, wts])
    rule = ReferenceRule(dom, w, level, X, T, wts)
    if len(_rule_cache) > 64:
        _rule_cache.clear()
    _rule_cache[key] = rule
    return rule


def reference_integrate(dom: DomainSpec, w: WeightSpec, f, level: int) -> float:
    """Integral of f against the normalized weighted measure; exact for even
    polynomials of degree <= level. f takes (X, T) arrays."""
    return reference_rule(dom, w, level).integrate(f)


# ---------------------------------------------------------------------------
# positive cubature


@dataclass
class CubatureRule:
    domain: DomainSpec
    weight: WeightSpec
    degree: int
    nodes: SeparatedSet
    lambdas: np.ndarray
    residual: float
    delta: float

    def __len__(self):
        return len(self.lambdas)

    def integrate(self, f) -> float:
        return float(self.lambdas @ np.asarray(f(self.nodes.X, self.nodes.T)))

    def to_json(self) -> str:
        return json.dumps(
            {
                "domain": {
                    "kind": self.domain.kind,
                    "d": self.domain.d,
                    "rho": self.domain.rho,
                },
                "weight": {
                    "beta": self.weight.beta,
                    "gamma": self.weight.gamma,
                    "mu": self.weight.mu,
                },
                "degree": self.degree,
                "delta": self.delta,
                "residual": self.residual,
                "nodes": [
                    {
                        "x": self.nodes.X[i].tolist(),
                        "t": float(self.nodes.T[i]),
                        "lambda": float(self.lambdas[i]),
                    }
                    for i in range(len(self.lambdas))
                ],
            }
        )

    @staticmethod
    def from_json(text: str) -> "CubatureRule":
        d = json.loads(text)
        dom = DomainSpec(d["domain"]["kind"], d["domain"]["d"], d["domain"]["rho"])
        wspec = WeightSpec(d["weight"]["beta"], d["weight"]["gamma"], d["weight"]["mu"])
        lam = np.array([nd["lambda"] for nd in d["nodes"]])
        eps = d["delta"] / d["degree"] if d["degree"] > 0 else d["delta"]
        nodes = build_separated(dom, eps)
        X = np.array([nd["x"] for nd in d["nodes"]])
        T = np.array([nd["t"] for nd in d["nodes"]])
        if len(T) != len(nodes.T) or not np.allclose(X, nodes.X):
            nodes = SeparatedSet(
                dom, eps, 0, [], X, T,
                np.zeros(len(T), dtype=int), np.zeros(len(T), dtype=int),
                [None] * len(T), np.arange(len(T)), False,
            )
        return CubatureRule(dom, wspec, d["degree"], nodes, lam, d["residual"], d["delta"])


def _basis_chunks(dom, w, n, X, T, chunk=8192):
    for i0 in range(0, len(T), chunk):
        yield i0, basis_matrix(dom, w, n, X[i0 : i0 + chunk], T[i0 : i0 + chunk])


def _solve_on_nodes(dom, w, n, nodes, tol):
    dim = space_dim(dom, n)
    K = len(nodes)
    if K < dim:
        raise CubatureError(f"{K} nodes < dim {dim}")
    eps = nodes.epsilon
    lam0 = np.array(
        [ball_comparison(dom, w, (nodes.X[i], nodes.T[i]), 0.5 * eps) for i in range(K)]
    )
    lam0 *= 1.0 / lam0.sum()

    m = np.zeros(dim)
    m[0] = 1.0

    G = np.zeros((dim, dim))
    r = m.copy()
    for i0, M in _basis_chunks(dom, w, n, nodes.X, nodes.T):
        lam_c = lam0[i0 : i0 + M.shape[1]]
        G += (M * lam_c) @ M.T
        r -= M @ lam_c
    tau = 1e-12 * np.trace(G) / dim
    Greg = G + tau * np.eye(dim)

    lam = lam0.copy()
    for _ in range(4):
        y = np.linalg.solve(Greg, r)
        for i0, M in _basis_chunks(dom, w, n, nodes.X, nodes.T):
            lam[i0 : i0 + M.shape[1]] += lam0[i0 : i0 + M.shape[1]] * (M.T @ y)
        r = m.copy()
        for i0, M in _basis_chunks(dom, w, n, nodes.X, nodes.T):
            r -= M @ lam[i0 : i0 + M.shape[1]]
        if np.max(np.abs(r)) < 0.01 * tol:
            break

    # re-symmetrize: even weight and evenly symmetric nodes keep exactness
    if nodes.evenly_symmetric and np.all(nodes.mirror >= 0):
        lam = 0.5 * (lam + lam[nodes.mirror])
    resid = m.copy()
    for i0, M in _basis_chunks(dom, w, n, nodes.X, nodes.T):
        resid -= M @ lam[i0 : i0 + M.shape[1]]
    return lam, float(np.max(np.abs(resid)))


def cubature_solve(
    dom: DomainSpec,
    w: WeightSpec,
    n: int,
    nodes: SeparatedSet | None = None,
    tol: float = 1e-8,
    delta: float = 0.25,
    max_retry: int = 3,
) -> CubatureRule:
    """Positive rule exact on the even space of degree n over separated nodes.

    Node weights are anchored at ball-comparison masses and corrected by a
    weighted least-norm solve of the orthonormal moment equations; the delta
    ladder halves the separation until all weights are positive.
    """
    w.validate(dom)
    best = None
    for attempt in range(max_retry + 1):
        dl = delta / 2**attempt
        nds = nodes if (nodes is not None and attempt == 0) else build_separated(
            dom, dl / n, complete=False
        )
        try:
            lam, resid = _solve_on_nodes(dom, w, n, nds, tol)
        except CubatureError as exc:
            best = (math.inf, 0.0, dl)
            continue
        mn = float(lam.min())
        if resid <= tol and mn > 0.0:
            return CubatureRule(dom, w, n, nds, lam, resid, dl)
        if best is None or resid < best[0]:
            best = (resid, mn, dl)
    raise CubatureError(
        f"no positive rule after {max_retry + 1} attempts "
        f"(best residual {best[0]:.3e}, min lambda {best[1]:.3e})",
        residual=best[0],
        min_lambda=best[1],
    )


# ---------------------------------------------------------------------------
# Marcinkiewicz-Zygmund check


@dataclass
class MZReport:
    n: int
    p: float
    upper: np.ndarray  # per trial
    lower: np.ndarray

    @property
    def upper_max(self):
        return float(self.upper.max())

    @property
    def lower_max(self):
        return float(self.lower.max())


def _ball_samples(dom: DomainSpec, nodes: SeparatedSet, k: int):
    """k quasi-random sample points inside each node's radius-eps ball."""
    eps = nodes.epsilon
    K = len(nodes)
    u = halton(K * k, 3, skip=101)
    th_c = np.arccos(np.clip(np.abs(nodes.T) / math.sqrt(1 + dom.rho**2), -1, 1))
    # parameter box around each node, then clip by the actual distance
    th = np.clip(
        np.repeat(th_c, k) + (u[:, 0] - 0.5) * 2 * eps, 1e-6, math.pi / 2 - 1e-6
    )
    t0 = np.cos(th)
    sgn = np.repeat(np.sign(nodes.T), k)
    phi_c = np.repeat(np.arctan2(nodes.X[:, 1], nodes.X[:, 0]), k)
    tq = np.repeat(np.abs(nodes.T), k)
    dphi = (u[:, 1] - 0.5) * 2 * np.clip(eps / np.maximum(t0, eps), 0, math.pi)
    phi = phi_c + dphi
    if dom.kind == SURFACE:
        r_abs = t0
    else:
        rc = np.repeat(np.linalg.norm(nodes.X, axis=1), k) / tq
        al_c = np.arcsin(np.clip(rc, 0, 1))
        al = np.clip(al_c + (u[:, 2] - 0.5) * 2 * np.clip(eps / np.maximum(t0, eps), 0, math.pi / 2), 0, math.pi / 2)
        r_abs = t0 * np.sin(al)
    Xs = np.stack([r_abs * np.cos(phi), r_abs * np.sin(phi)], axis=1)
    Ts = sgn * np.sqrt(t0 * t0 + dom.rho**2)
    # keep samples within the ball; fall back to the node itself
    D = distance_arrays(
        dom, Xs.reshape(K, k, 2), Ts.reshape(K, k),
        nodes.X[:, None, :], nodes.T[:, None], quotient=True,
    )
    ok = D <= eps
    Xs = Xs.reshape(K, k, 2)
    Ts = Ts.reshape(K, k)
    for i in range(K):
        if not ok[i].any():
            Xs[i, 0] = nodes.X[i]
            Ts[i, 0] = nodes.T[i]
            ok[i, 0] = True
    return Xs, Ts, ok


def mz_check(
    dom: DomainSpec,
    w: WeightSpec,
    n: int,
    nodes: SeparatedSet,
    trials: int = 16,
    p: float = 2.0,
    k_samples: int = 16,
    seed: int = 0,
) -> MZReport:
    """Sampled-vs-continuous norm comparison for random even polynomials.

    Upper: sum over nodes of (max_ball |f|^p) * ball-mass vs ||f||_p^p;
    lower: ||f||_p^p vs sum of (min_ball |f|^p) * ball-mass. Ball masses use
    the closed-form comparison at radius eps, so the ratios carry one
    uniform constant; the point of the check is their stability in n.
    """
    dim = space_dim(dom, n)
    rng = np.random.Generator(np.random.Philox(seed))
    C = rng.standard_normal((dim, trials))
    Xs, Ts, ok = _ball_samples(dom, nodes, k_samples)
    K = len(nodes)
    F = np.empty((K, k_samples, trials))
    flatX = Xs.reshape(-1, 2)
    flatT = Ts.ravel()
    for i0 in range(0, len(flatT), 8192):
        M = basis_matrix(dom, w, n, flatX[i0 : i0 + 8192], flatT[i0 : i0 + 8192])
        F.reshape(-1, trials)[i0 : i0 + 8192] = M.T @ C

    absF = np.abs(F)
    big = np.where(ok[:, :, None], absF, 0.0).max(axis=1) ** p
    small = np.where(ok[:, :, None], absF, np.inf).min(axis=1) ** p
    mass = np.array(
        [ball_comparison(dom, w, (nodes.X[i], nodes.T[i]), nodes.epsilon) for i in range(K)]
    )

    if p == 2.0:
        norms = np.sum(C * C, axis=0)
    else:
        rule = reference_rule(dom, w, 2 * n + 2)
        vals = np.empty((len(rule.T), trials))
        for i0 in range(0, len(rule.T), 8192):
            M = basis_matrix(dom, w, n, rule.X[i0 : i0 + 8192], rule.T[i0 : i0 + 8192])
            vals[i0 : i0 + 8192] = M.T @ C
        norms = rule.weights @ np.abs(vals) ** p

    upper = (mass @ big) / norms
    lower = norms / (mass @ small)
    return MZReport(n=n, p=p, upper=upper, lower=lower)
