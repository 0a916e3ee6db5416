"""Levenberg-Marquardt least squares with a numeric Jacobian.

Parameters are internally divided by ``x_scale`` so that a single relative
step and a single damping schedule work whether a parameter is a gap in
metres or a frequency in hertz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from emx.errors import DomainError, RankDeficiencyError


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 200
    ftol: float = 1e-10
    xtol: float = 1e-10
    rel_step: float = 1e-6
    abs_step: float = 1e-12
    lambda0: float = 1e-3
    rank_rtol: float = 1e-8


@dataclass
class FitResult:
    """Estimates and diagnostics of one least-squares fit.

    ``covariance`` is in the units of the parameters. When the data carried
    no uncertainties it is scaled by the reduced chi-square.
    """

    names: list[str]
    values: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    message: str = ""
    dof: int = 0
    flags: list[str] = field(default_factory=list)
    cost_history: list[float] = field(default_factory=list)

    @property
    def params(self) -> dict[str, float]:
        return dict(zip(self.names, map(float, self.values)))

    @property
    def stderr(self) -> dict[str, float]:
        d = np.sqrt(np.clip(np.diag(self.covariance), 0, None))
        return dict(zip(self.names, map(float, d)))

    def value(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def error(self, name: str) -> float:
        i = self.names.index(name)
        return float(math.sqrt(max(self.covariance[i, i], 0.0)))

    @property
    def chi2(self) -> float:
        return self.residual_norm**2

    @property
    def reduced_chi2(self) -> float:
        return self.chi2 / self.dof if self.dof > 0 else math.nan

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "values": [float(v) for v in self.values],
            "stderr": [self.stderr[n] for n in self.names],
            "covariance": np.asarray(self.covariance, dtype=float).tolist(),
            "residual_norm": float(self.residual_norm),
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
            "dof": self.dof,
            "flags": list(self.flags),
        }


def numeric_jacobian(fun: Callable[[np.ndarray], np.ndarray], q: np.ndarray, f0: np.ndarray,
                     rel_step: float, abs_step) -> np.ndarray:
    """Forward-difference Jacobian of ``fun`` at ``q``.

    ``q`` is in scaled coordinates where 1 is a typical magnitude, so the
    step is relative to ``max(|q|, 1)``; ``abs_step`` is a per-parameter
    floor in the same coordinates.
    """
    jac = np.empty((f0.size, q.size))
    floor = np.broadcast_to(np.asarray(abs_step, dtype=float), q.shape)
    for j in range(q.size):
        h = max(rel_step * max(abs(q[j]), 1.0), floor[j])
        qh = q.copy()
        qh[j] += h
        jac[:, j] = (fun(qh) - f0) / (qh[j] - q[j])
    return jac


def _null_directions(jac: np.ndarray, names: Sequence[str], rtol: float) -> list[dict[str, float]]:
    norms = np.linalg.norm(jac, axis=0)
    dead = norms == 0
    scaled = jac / np.where(dead, 1.0, norms)
    # Only V is needed; the full U would be (points x points).
    _, s, vt = np.linalg.svd(scaled, full_matrices=jac.shape[0] < jac.shape[1])
    s_full = np.zeros(jac.shape[1])
    s_full[: s.size] = s
    top = s_full.max() if s_full.size else 0.0
    out = []
    for j in np.flatnonzero(dead):
        out.append({names[j]: 1.0})
    for k in np.flatnonzero(s_full <= rtol * top):
        v = vt[k]
        if any(dead[np.abs(v) > 1e-6]):
            continue
        out.append({n: float(c) for n, c in zip(names, v) if abs(c) > 1e-6})
    return out


def least_squares(model: Callable[[np.ndarray, np.ndarray], np.ndarray], p0: Sequence[float],
                  x, y, sigma=None, names: Sequence[str] | None = None,
                  options: FitOptions | None = None, x_scale: Sequence[float] | None = None) -> FitResult:
    """Minimise ``sum(((y - model(x, p)) / sigma)^2)``.

    Parameters
    ----------
    model : callable
        ``model(x, p) -> prediction`` with ``p`` in physical units.
    sigma : array_like, optional
        Absolute one-sigma uncertainties. Without them the covariance is
        rescaled by the reduced chi-square.
    x_scale : sequence of float, optional
        Typical magnitude of each parameter. Defaults to ``|p0|`` (1 where
        ``p0`` is zero).

    Returns
    -------
    FitResult
        Not converged after ``max_iterations`` is reported, not raised.

    Raises
    ------
    RankDeficiencyError
        If the normal equations are singular at the solution.
    """
    opts = options or FitOptions()
    p0 = np.asarray(p0, dtype=float)
    names = list(names) if names is not None else [f"p{i}" for i in range(p0.size)]
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(p0))):
        raise DomainError("least_squares", "data and initial parameters must be finite")
    absolute = sigma is not None
    if absolute:
        sigma = np.asarray(sigma, dtype=float)
        if not np.all(np.isfinite(sigma) & (sigma > 0)):
            raise DomainError("least_squares", "sigma must be finite and > 0")
    w = 1.0 / sigma if absolute else np.ones_like(y)
    scale = np.where(p0 != 0, np.abs(p0), 1.0) if x_scale is None else np.asarray(x_scale, dtype=float)

    def resid(q):
        return (y - np.asarray(model(x, q * scale), dtype=float)) * w

    def neg_resid(q):
        return -resid(q)

    abs_floor = opts.abs_step
    q = p0 / scale
    r = resid(q)
    if not np.all(np.isfinite(r)):
        raise DomainError("least_squares", "model is not finite at the initial parameters")
    cost = float(r @ r)
    history = [cost]
    lam = opts.lambda0
    converged = False
    message = "maximum iterations reached"
    it = 0
    jac = numeric_jacobian(neg_resid, q, -r, opts.rel_step, abs_floor)
    for it in range(1, opts.max_iterations + 1):
        a = jac.T @ jac
        g = jac.T @ r
        diag = np.diag(a).copy()
        diag[diag == 0] = 1.0
        improved = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(a + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            q_new = q + step
            r_new = resid(q_new)
            cost_new = float(r_new @ r_new) if np.all(np.isfinite(r_new)) else math.inf
            if cost_new <= cost:
                improved = True
                break
            lam *= 10.0
        if not improved:
            converged = True
            message = "no further decrease possible"
            break
        lam = max(lam / 10.0, 1e-15)
        dcost = cost - cost_new
        small_step = np.linalg.norm(step) <= opts.xtol * (np.linalg.norm(q_new) + opts.xtol)
        q, r, cost = q_new, r_new, cost_new
        history.append(cost)
        if cost == 0.0 or dcost <= opts.ftol * cost or small_step:
            converged = True
            message = "converged"
            jac = numeric_jacobian(neg_resid, q, -r, opts.rel_step, abs_floor)
            break
        jac = numeric_jacobian(neg_resid, q, -r, opts.rel_step, abs_floor)

    dof = y.size - p0.size
    directions = _null_directions(jac, names, opts.rank_rtol)
    if directions:
        raise RankDeficiencyError(directions)
    cov_q = np.linalg.pinv(jac.T @ jac)
    if not absolute:
        cov_q = cov_q * (cost / dof if dof > 0 else math.nan)
    cov = cov_q * np.outer(scale, scale)
    cov = 0.5 * (cov + cov.T)
    return FitResult(names, q * scale, cov, math.sqrt(cost), it, converged, message, dof, [], history)
