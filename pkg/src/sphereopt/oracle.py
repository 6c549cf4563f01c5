"""Reference estimators: multistart local search and Monte-Carlo integration.

These are deliberately independent of the relaxation machinery so they can
serve as external checks on it.  The maximizer is a projected gradient
ascent on the sphere with backtracking; it returns a certified-by-evaluation
lower estimate of the true maximum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polymat import evaluate, gradient


@dataclass(frozen=True, eq=False)
class OracleResult:
    value: float
    argmax: np.ndarray
    restarts_used: int
    converged: bool


def _restart_rng(seed, r):
    return np.random.default_rng(np.random.SeedSequence([seed, r]))


def sphere_maximize(T, restarts=32, max_iterations=500, initial_step=0.1,
                    seed=0):
    """Estimate max of T over the unit sphere by multistart projected ascent.

    Each restart draws a uniform starting point from its own child seed (so
    results for a given restart index never depend on the total restart
    count), then iterates x <- normalize(x + eta grad T), halving eta from
    ``initial_step`` until the objective improves.  A restart stops when no
    improving step exists, when the move is below 1e-12, or after
    ``max_iterations`` iterations; the convergence flag of the best restart
    is reported.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    best_val = -np.inf
    best_x = None
    best_conv = False
    for r in range(restarts):
        rng = _restart_rng(seed, r)
        x = rng.standard_normal(T.n)
        nrm = np.linalg.norm(x)
        while nrm < 1e-12:
            x = rng.standard_normal(T.n)
            nrm = np.linalg.norm(x)
        x = x / nrm
        fx = evaluate(T, x)
        converged = False
        for _ in range(max_iterations):
            g = gradient(T, x)
            eta = initial_step
            xn, fn = None, None
            while eta > 1e-14:
                cand = x + eta * g
                nrm = np.linalg.norm(cand)
                if nrm > 0.0:
                    cand = cand / nrm
                    val = evaluate(T, cand)
                    if val > fx:
                        xn, fn = cand, val
                        break
                eta *= 0.5
            if xn is None:
                converged = True
                break
            small = np.linalg.norm(xn - x) < 1e-12
            x, fx = xn, fn
            if small:
                converged = True
                break
        if fx > best_val:
            best_val, best_x, best_conv = fx, x, converged
    return OracleResult(value=float(best_val), argmax=best_x,
                        restarts_used=restarts, converged=best_conv)


def mc_sphere_integral(f, n, samples, seed=0, chunk=200_000):
    """Monte-Carlo mean of f over the uniform sphere measure on S^{n-1}.

    ``f`` receives a (m, n) batch of unit vectors and returns (m,) values.
    Points are normalized standard Gaussians.  Returns (estimate,
    standard_error); the error is the sample standard deviation over
    sqrt(samples), zero for a constant integrand.
    """
    if samples < 1:
        raise ValueError("need a positive sample count")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        pts = rng.standard_normal((m, n))
        nrm = np.linalg.norm(pts, axis=1)
        good = nrm > 1e-12
        pts = pts[good] / nrm[good, None]
        vals = np.asarray(f(pts), dtype=float)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += int(good.sum())
    mean = total / done
    var = max(total_sq / done - mean * mean, 0.0)
    if done > 1:
        var *= done / (done - 1)
    return mean, (var / done) ** 0.5


def mc_sphere_integral_poly(T, samples, seed=0):
    """Monte-Carlo integral of a homogeneous polynomial over the sphere."""
    return mc_sphere_integral(lambda X: evaluate(T, X), T.n, samples,
                              seed=seed)
