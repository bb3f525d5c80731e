"""Preconditioned Chebyshev iteration on a known spectral interval."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import apply


class ChebyshevError(RuntimeError):
    pass


class DivergenceError(ChebyshevError):
    code = "diverged"


class IterationCapError(ChebyshevError):
    code = "iteration-cap"


@dataclass
class ChebyshevConfig:
    """Spectral interval ``[1, kappa_bound]`` for the preconditioned operator.

    The iteration stops once the relative residual ``||b - A x|| / ||b||``
    falls to ``tol``.  ``max_iters`` defaults to
    ``10 sqrt(kappa_bound) ln(1/tol) + 100``.  With ``fixed_iters`` the
    iteration runs exactly that many steps and never stops early.
    With ``backward_tol`` set, the true residual is recomputed every
    ``check_every`` steps and the iteration also stops once the normwise
    backward error ``||r|| / (||A||_1 ||x|| + ||b||)`` is at most
    ``backward_tol``; this ends runs whose target lies below roundoff.
    """

    kappa_bound: float
    tol: float = 1e-8
    max_iters: int = None
    fixed_iters: int = None
    raise_on_cap: bool = True
    divergence_factor: float = 10.0
    divergence_window: int = 20
    backward_tol: float = 0.0
    check_every: int = 50

    def __post_init__(self):
        if not self.kappa_bound >= 1:
            raise ValueError(f"kappa_bound must be at least 1, got {self.kappa_bound}")
        if self.max_iters is None:
            self.max_iters = iteration_cap(self.kappa_bound, self.tol)
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


def iteration_cap(kappa, tol) -> int:
    return int(math.ceil(10 * math.sqrt(kappa) * math.log(1 / min(tol, 0.5)) + 100))


@dataclass
class ChebyshevResult:
    iterations: int
    residuals: list = field(default_factory=list)
    converged: bool = False
    capped: bool = False
    replacements: int = 0
    roundoff_stop: bool = False


def chebyshev(a, inner_solve, b, cfg: ChebyshevConfig, callback=None):
    """Solve ``A x = b`` with preconditioner solve ``inner_solve``.

    Returns ``(x, result)``.  ``callback(k, x)`` is invoked after every
    iteration.  The residual is tracked by recurrence and recomputed from
    scratch before declaring convergence.
    """
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b)
    res = ChebyshevResult(0)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        res.converged = True
        res.residuals.append(0.0)
        return x, res
    r = b.copy()
    res.residuals.append(1.0)
    lo, hi = 1.0, float(cfg.kappa_bound)
    theta = 0.5 * (hi + lo)
    delta = 0.5 * (hi - lo)
    limit = cfg.fixed_iters if cfg.fixed_iters is not None else cfg.max_iters
    watch_backward = cfg.backward_tol > 0 and cfg.fixed_iters is None
    if watch_backward:
        csr = a.csr if hasattr(a, "csr") else a
        anorm = float(abs(csr).sum(axis=0).max())
    z = inner_solve(r)
    d = z / theta
    sigma1 = theta / delta if delta > 0 else math.inf
    rho = 1.0 / sigma1
    grow = 0
    k = 0
    while k < limit:
        k += 1
        x += d
        r -= apply(a, d)
        rel = float(np.linalg.norm(r)) / bnorm
        if cfg.fixed_iters is None and rel <= cfg.tol:
            # confirm against the true residual before stopping
            r = b - apply(a, x)
            rel = float(np.linalg.norm(r)) / bnorm
            if rel <= cfg.tol:
                res.residuals.append(rel)
                res.iterations = k
                res.converged = True
                if callback is not None:
                    callback(k, x)
                return x, res
            res.replacements += 1
        if watch_backward and k % cfg.check_every == 0:
            r = b - apply(a, x)
            rnorm = float(np.linalg.norm(r))
            rel = rnorm / bnorm
            res.replacements += 1
            if rnorm <= cfg.backward_tol * (anorm * float(np.linalg.norm(x)) + bnorm):
                res.residuals.append(rel)
                res.iterations = k
                res.converged = res.roundoff_stop = True
                if callback is not None:
                    callback(k, x)
                return x, res
        res.residuals.append(rel)
        if callback is not None:
            callback(k, x)
        grow = grow + 1 if rel > cfg.divergence_factor else 0
        if grow >= cfg.divergence_window:
            res.iterations = k
            err = DivergenceError(
                f"diverged: residual above {cfg.divergence_factor}x initial for "
                f"{cfg.divergence_window} iterations (kappa_bound={hi:g})")
            err.result = res
            err.x = x
            raise err
        z = inner_solve(r)
        if delta == 0:
            d = z
        else:
            rho_new = 1.0 / (2 * sigma1 - rho)
            d = (rho_new * rho) * d + (2 * rho_new / delta) * z
            rho = rho_new
    res.iterations = k
    if cfg.fixed_iters is not None:
        res.converged = res.residuals[-1] <= cfg.tol
        return x, res
    res.capped = True
    if cfg.raise_on_cap:
        err = IterationCapError(
            f"iteration cap {limit} reached with relative residual {res.residuals[-1]:.3e} "
            f"(target {cfg.tol:.3e})")
        err.result = res
        err.x = x
        raise err
    return x, res


def envelope(k, kappa_hat, kappa_a, kappa_b) -> float:
    """Exact-solve error envelope ``exp(-k/sqrt(kappa_hat)) kappa_f(A) sqrt(kappa_f(B))``."""
    return math.exp(-k / math.sqrt(kappa_hat)) * kappa_a * math.sqrt(kappa_b)


def inexact_envelope(k, kappa_hat, kappa_a, kappa_b) -> float:
    """Inexact-solve envelope ``6 2^(-k/sqrt(kappa_hat)) kappa_f(A) sqrt(kappa_f(B))``."""
    return 6.0 * 2.0 ** (-k / math.sqrt(kappa_hat)) * kappa_a * math.sqrt(kappa_b)


def noise_threshold(kappa_b, support) -> float:
    """Admissible relative inner-solve error ``1 / (128 sqrt(kappa_f(B)) sigma(A, B))``."""
    return 1.0 / (128.0 * math.sqrt(kappa_b) * support)
