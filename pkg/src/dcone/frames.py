"""Semi-discrete localized tight frames from dyadic windows and cubature.

Level j carries the window g_j supported on degrees (2^{j-2}, 2^j) (g_0 the
low-pass profile, so constants are captured) and a positive cubature rule
exact on the even space of degree 2^{j+1}. Since G_j f has degree < 2^j,
both the discretized Gram identity sum_z lambda_z |G_j f(z)|^2 = ||G_j f||^2
and the discretized synthesis are exact for every f. Frame elements are
psi_{z,j} = sqrt(lambda_z) K_{g_j}(., z).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .geometry import DomainSpec, DomainError, WeightSpec
from .kernels import KernelContext, basis_matrix, degree_slices, reprod_many, space_dim
from .orthopoly import CutoffSpec, window_eval
from .quadrature import CubatureRule, cubature_solve
from .approx import ProjectionSeries, project

__all__ = [
    "Frame",
    "FrameCoefficients",
    "build_frame",
    "frame_analyze",
    "frame_synthesize",
    "needlet_eval",
    "parseval_defect",
]


@dataclass
class FrameCoefficients:
    """Per-level coefficient arrays, aligned with the level's node order."""

    levels: list

    def total_energy(self) -> float:
        return float(sum(np.sum(c * c) for c in self.levels))

    def flatten(self):
        return [(j, i, float(v)) for j, c in enumerate(self.levels) for i, v in enumerate(c)]


@dataclass
class Frame:
    domain: DomainSpec
    weight: WeightSpec
    J: int
    cutoff: CutoffSpec
    rules: list  # CubatureRule per level 0..J

    @property
    def max_degree(self) -> int:
        """Largest degree any window can see: 2^J - 1 (g_J lives below 2^J)."""
        return 2**self.J - 1

    def window(self, j: int, k) -> np.ndarray:
        return window_eval(self.cutoff, j, k)

    def save(self, directory: str):
        os.makedirs(directory, exist_ok=True)
        meta = {
            "domain": {"kind": self.domain.kind, "d": self.domain.d, "rho": self.domain.rho},
            "weight": {"beta": self.weight.beta, "gamma": self.weight.gamma, "mu": self.weight.mu},
            "J": self.J,
            "levels": [f"level{j}.json" for j in range(self.J + 1)],
        }
        for j, rule in enumerate(self.rules):
            path = os.path.join(directory, f"level{j}.json")
            tmp = path + ".tmp"
            with open(tmp, "w") as fh:
                fh.write(rule.to_json())
            os.replace(tmp, path)
        path = os.path.join(directory, "frame.json")
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(meta, fh, sort_keys=True)
        os.replace(tmp, path)

    @staticmethod
    def load(directory: str) -> "Frame":
        with open(os.path.join(directory, "frame.json")) as fh:
            meta = json.load(fh)
        rules = []
        for name in meta["levels"]:
            with open(os.path.join(directory, name)) as fh:
                rules.append(CubatureRule.from_json(fh.read()))
        dom = DomainSpec(meta["domain"]["kind"], meta["domain"]["d"], meta["domain"]["rho"])
        w = WeightSpec(meta["weight"]["beta"], meta["weight"]["gamma"], meta["weight"]["mu"])
        return Frame(dom, w, meta["J"], CutoffSpec("FrameWindow"), rules)


def build_frame(dom: DomainSpec, w: WeightSpec, J: int, delta: float = 0.25) -> Frame:
    """Tight frame with levels 0..J; level j gets separation delta / 2^{j+1}
    and cubature exact on degree 2^{j+1}."""
    if J > 6:
        raise DomainError("desk scale keeps J <= 6")
    rules = []
    for j in range(J + 1):
        n_exact = 2 ** (j + 1)
        try:
            rules.append(cubature_solve(dom, w, n_exact, delta=delta))
        except Exception as exc:
            raise DomainError(f"cubature failed at frame level {j}: {exc}") from exc
    return Frame(dom, w, J, CutoffSpec("FrameWindow"), rules)


def _series_of(fr: Frame, f, level=None) -> ProjectionSeries:
    if isinstance(f, ProjectionSeries):
        return project(fr.domain, fr.weight, f, fr.max_degree)
    return project(fr.domain, fr.weight, f, fr.max_degree, level=level)


def frame_analyze(fr: Frame, f, level=None) -> FrameCoefficients:
    """Coefficients <f, psi_{z,j}> = sqrt(lambda_z) (G_j f)(z).

    Exact (up to the projection) for band-limited f; pass a ProjectionSeries
    to skip the reference-rule projection.
    """
    series = _series_of(fr, f, level)
    slices = degree_slices(fr.domain, series.N)
    levels = []
    for j, rule in enumerate(fr.rules):
        gj = fr.window(j, np.arange(series.N + 1))
        coef = series.coef.copy()
        for n in range(series.N + 1):
            coef[slices[n]] *= gj[n]
        active = np.flatnonzero(gj)
        if len(active) == 0 or not np.any(coef):
            levels.append(np.zeros(len(rule)))
            continue
        vals = np.empty(len(rule))
        X, T = rule.nodes.X, rule.nodes.T
        for i0 in range(0, len(T), 8192):
            M = basis_matrix(fr.domain, fr.weight, series.N, X[i0 : i0 + 8192], T[i0 : i0 + 8192])
            vals[i0 : i0 + 8192] = M.T @ coef
        levels.append(np.sqrt(rule.lambdas) * vals)
    return FrameCoefficients(levels)


def frame_synthesize(fr: Frame, coeffs: FrameCoefficients) -> ProjectionSeries:
    """Sum of coeff * psi over all levels, assembled as one projection series."""
    N = fr.max_degree
    slices = degree_slices(fr.domain, N)
    out = np.zeros(space_dim(fr.domain, N))
    for j, rule in enumerate(fr.rules):
        c = coeffs.levels[j]
        if not np.any(c):
            continue
        u = np.zeros(space_dim(fr.domain, N))
        X, T = rule.nodes.X, rule.nodes.T
        wts = np.sqrt(rule.lambdas) * c
        for i0 in range(0, len(T), 8192):
            M = basis_matrix(fr.domain, fr.weight, N, X[i0 : i0 + 8192], T[i0 : i0 + 8192])
            u += M @ wts[i0 : i0 + 8192]
        gj = fr.window(j, np.arange(N + 1))
        for n in range(N + 1):
            out[slices[n]] += gj[n] * u[slices[n]]
    return ProjectionSeries(fr.domain, fr.weight, N, out, "frame-synthesis")


def needlet_eval(fr: Frame, j: int, node_index: int, X, T) -> np.ndarray:
    """psi_{z,j} evaluated at points: sqrt(lambda_z) sum_k g_j(k) P_k(., z)."""
    rule = fr.rules[j]
    nmax = max(2**j - 1, 1)
    ctx = KernelContext(fr.domain, fr.weight, nmax)
    z = (rule.nodes.X[node_index], rule.nodes.T[node_index])
    gj = fr.window(j, np.arange(nmax + 1))
    P = reprod_many(ctx, nmax, z, X, T)
    return math.sqrt(rule.lambdas[node_index]) * (gj @ P)


def parseval_defect(fr: Frame, f, level=None) -> float:
    """Relative defect |sum |<f,psi>|^2 - ||f||^2| / ||f||^2 (band-limited f)."""
    series = _series_of(fr, f, level)
    energy = frame_analyze(fr, series).total_energy()
    norm2 = float(series.coef @ series.coef)
    return abs(energy - norm2) / norm2
