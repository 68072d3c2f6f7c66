"""Non-negative least squares and the two NNLS-backed rule constructors.

``nnls`` is a Lawson-Hanson active-set solver working on the normal
equations, with the Gram submatrix of the passive set grown incrementally
so large candidate pools stay cheap.  On top of it sit

* ``construct_poly_exact``: random spectral candidates reweighted to match
  every normal moment of total degree <= R, and
* ``reweight``: data-adaptive weights minimizing the empirical mean
  squared kernel error over sampled pairs, with an optional l1 penalty
  (folded into the linear term of the KKT system) and a bisection on the
  penalty to hit a target support size.

Reweighted grids keep their fitted scale: the least-squares objective
governs, so the weights are deliberately not renormalized to sum to 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConstructionError, ConvergenceError
from .grids import (
    DEFAULT_CONSTRAINT_CAP,
    GridQuadrature,
    moment_multi_indices,
    moment_targets,
    monomial_matrix,
)
from .kernels import AnovaKernel, GaussianKernel, kernel_values


@dataclass(frozen=True)
class NnlsSolution:
    """Solution of min ||Ma - b||^2 s.t. a >= 0 (plus optional linear term)."""

    a: np.ndarray
    residual_norm: float
    active_set: tuple[int, ...]
    iterations: int
    objectives: tuple[float, ...]


def nnls(M: np.ndarray, b: np.ndarray, tol: float = 1e-10,
         max_iter: Optional[int] = None) -> NnlsSolution:
    """Lawson-Hanson NNLS.

    KKT at exit: gradient components on the support vanish to within
    ``tol * ||M^T b||`` and are non-negative off the support.  Raises
    ConvergenceError (best iterate attached) past ``max_iter`` outer
    iterations, default 3p.
    """
    return _lawson_hanson(np.asarray(M, dtype=float), np.asarray(b, dtype=float),
                          shift=0.0, tol=tol, max_iter=max_iter)


def _lawson_hanson(M: np.ndarray, b: np.ndarray, shift: float,
                   tol: float, max_iter: Optional[int]) -> NnlsSolution:
    """Minimize 0.5||Ma - b||^2 + shift * 1'a subject to a >= 0."""
    if M.ndim != 2 or b.shape != (M.shape[0],):
        raise ValueError("M must be (n, p) and b length n")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n, p = M.shape
    if max_iter is None:
        max_iter = 3 * p
    f = M.T @ b - shift
    scale = float(np.linalg.norm(f)) or 1.0
    a = np.zeros(p)
    passive: list[int] = []
    Gsub = np.zeros((0, 0))
    Ma = np.zeros(n)
    objectives: list[float] = []
    outer = 0

    def current_objective():
        r = Ma - b
        return 0.5 * float(r @ r) + shift * float(a.sum())

    def solution():
        active = tuple(i for i in range(p) if a[i] == 0.0)
        return NnlsSolution(a.copy(), float(np.linalg.norm(Ma - b)), active,
                            outer, tuple(objectives))

    while True:
        objectives.append(current_objective())
        w = f - M.T @ Ma
        mask = np.ones(p, dtype=bool)
        mask[passive] = False
        if not mask.any() or w[mask].max() <= tol * scale:
            return solution()
        if outer >= max_iter:
            raise ConvergenceError(
                f"NNLS did not converge within {max_iter} iterations",
                iterations=outer, best=solution())
        outer += 1
        j = int(np.flatnonzero(mask)[np.argmax(w[mask])])
        col = M[:, j]
        if passive:
            cross = M[:, passive].T @ col
            Gsub = np.block([[Gsub, cross[:, None]],
                             [cross[None, :], np.array([[col @ col]])]])
        else:
            Gsub = np.array([[col @ col]])
        passive.append(j)

        inner = 0
        while True:
            inner += 1
            if inner > p + 1:
                raise ConvergenceError(
                    "NNLS inner loop cycled", iterations=outer, best=solution())
            try:
                z = np.linalg.solve(Gsub, f[passive])
            except np.linalg.LinAlgError:
                z, *_ = np.linalg.lstsq(Gsub, f[passive], rcond=None)
            if z.min() > 0.0:
                a[:] = 0.0
                a[passive] = z
                break
            ap = a[passive]
            neg = z <= 0.0
            alpha = float(np.min(ap[neg] / (ap[neg] - z[neg])))
            ap = ap + alpha * (z - ap)
            keep = ap > 1e-15 * float(np.abs(ap).max())
            a[:] = 0.0
            for pos, idx in enumerate(passive):
                if keep[pos]:
                    a[idx] = ap[pos]
            drop = np.flatnonzero(~keep)
            Gsub = np.delete(np.delete(Gsub, drop, axis=0), drop, axis=1)
            passive = [idx for pos, idx in enumerate(passive) if keep[pos]]
            if not passive:
                Ma = np.zeros(n)
                break
        Ma = M[:, passive] @ a[passive] if passive else np.zeros(n)


def construct_poly_exact(d: int, R: int, D: int, seed: int,
                         exact_tol: float = 1e-8,
                         cap: int = DEFAULT_CONSTRAINT_CAP) -> GridQuadrature:
    """Polynomially-exact rule from random candidates.

    Draws D i.i.d. standard-normal candidate points, then solves the
    moment system (one row per exponent vector of total degree <= R,
    right-hand side the analytic normal moment) by NNLS.  Candidates with
    zero weight are dropped.  Raises ConstructionError, carrying the
    achieved residual, when the worst constraint violation exceeds
    ``exact_tol``; the caller may raise D and retry.
    """
    if d < 1 or D < 1:
        raise ValueError("d and D must be positive")
    if R < 0 or R % 2 != 0:
        raise ValueError("R must be a non-negative even integer")
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((D, d))
    indices = moment_multi_indices(d, R, cap=cap)
    system = monomial_matrix(points, indices)
    targets = moment_targets(indices)
    # with D >= #constraints an exact fit exists; drive the KKT pass hard
    # so the degree-0 row (the weight sum) lands within the grid invariant
    sol = nnls(system, targets, tol=1e-13)
    residual = float(np.abs(system @ sol.a - targets).max())
    if residual > exact_tol:
        raise ConstructionError(
            f"poly-exact construction reached residual {residual:.3e} "
            f"> {exact_tol:.1e} (d={d}, R={R}, D={D})",
            residual=residual)
    keep = sol.a > 0.0
    return GridQuadrature(
        points[keep], sol.a[keep],
        provenance=f"poly_exact(d={d}, R={R}, D={D}, seed={seed}, "
                   f"residual={residual:.3e})")


PairsLike = Union[Sequence[tuple[np.ndarray, np.ndarray]],
                  tuple[np.ndarray, np.ndarray]]


def _pairs_to_arrays(pairs: PairsLike) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(pairs, tuple) and len(pairs) == 2 and np.ndim(pairs[0]) == 2:
        X, Y = (np.asarray(p, dtype=float) for p in pairs)
    else:
        X = np.array([np.asarray(x, dtype=float) for x, _ in pairs])
        Y = np.array([np.asarray(y, dtype=float) for _, y in pairs])
    if X.shape != Y.shape or X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("pairs must give matching (n, d) arrays with n >= 1")
    return X, Y


def _kernel_gamma(kernel, gamma: Optional[float]) -> float:
    if gamma is not None:
        return float(gamma)
    if isinstance(kernel, GaussianKernel):
        return kernel.gamma
    if isinstance(kernel, AnovaKernel):
        return kernel.base.gamma
    raise ValueError("gamma is required when the kernel is a bare callable")


def _reweight_system(candidates: GridQuadrature, pairs: PairsLike, kernel,
                     gamma: Optional[float]):
    X, Y = _pairs_to_arrays(pairs)
    g = _kernel_gamma(kernel, gamma)
    freqs = candidates.points * np.sqrt(2.0 * g)
    U = X - Y
    system = np.cos(U @ freqs.T)
    targets = kernel_values(kernel, U)
    return system, targets


def _solve_reweight(candidates: GridQuadrature, system: np.ndarray,
                    targets: np.ndarray, lam: float) -> GridQuadrature:
    n = system.shape[0]
    # (1/n)||Ma-b||^2 + lam 1'a  ==  (2/n) * (0.5||Ma-b||^2 + (n lam / 2) 1'a)
    sol = _lawson_hanson(system, targets, shift=0.5 * n * lam,
                         tol=1e-10, max_iter=None)
    keep = sol.a > 0.0
    mse = sol.residual_norm**2 / n
    return GridQuadrature(
        candidates.points[keep], sol.a[keep], normalized=False,
        provenance=f"reweighted(lam={lam!r}, n={n}, "
                   f"sum_a={sol.a.sum()!r}, mse={mse!r}) "
                   f"of {candidates.provenance}")


def reweight(candidates: GridQuadrature, pairs: PairsLike, kernel,
             lam: float = 0.0, gamma: Optional[float] = None) -> GridQuadrature:
    """Refit grid weights to observed kernel values.

    Builds M[l, i] = cos(w_i'(x_l - y_l)) and b_l = k(x_l - y_l), then
    minimizes (1/n)||Ma - b||^2 + lam 1'a over a >= 0.  Zero-weight points
    are dropped, and the weight sum is left at its fitted value.
    ``kernel`` may be a GaussianKernel, AnovaKernel, or a callable on
    displacements (pass ``gamma`` explicitly in the callable case; it sets
    the sqrt(2 gamma) node scaling).
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    if not candidates.nonnegative:
        raise ValueError("candidate grids must have non-negative weights")
    system, targets = _reweight_system(candidates, pairs, kernel, gamma)
    return _solve_reweight(candidates, system, targets, lam)


@dataclass(frozen=True)
class BisectResult:
    """Outcome of the support-size bisection.

    ``lam``/``grid`` is the accepted solution (largest support found with
    nnz <= target).  ``lam_below``/``nnz_below`` certify the bracket: the
    neighboring rejected penalty and its (too large) support size, or None
    when the unpenalized fit was already small enough.
    """

    lam: float
    grid: GridQuadrature
    lam_below: Optional[float]
    nnz_below: Optional[int]


def bisect_lambda(candidates: GridQuadrature, pairs: PairsLike, kernel,
                  target_D: int, lam_hi: float = 1.0, iters: int = 30,
                  gamma: Optional[float] = None,
                  refit_support: bool = True) -> BisectResult:
    """Bisect the l1 penalty until at most ``target_D`` points survive.

    Support shrinkage in lam is an empirical observation, not a theorem,
    so the result carries a bracket certificate instead of assuming
    monotonicity.  The number of bisection steps is fixed (default 30)
    for determinism.

    With ``refit_support`` (the default) the penalty only selects the
    support: the returned weights are refit at lam = 0 restricted to the
    surviving points, so hitting a small target does not cost systematic
    shrinkage of the weight sum.  Pass False for the raw penalized
    solution.
    """
    if target_D < 1:
        raise ValueError("target_D must be positive")
    if lam_hi <= 0:
        raise ValueError("lam_hi must be positive")
    system, targets = _reweight_system(candidates, pairs, kernel, gamma)
    base = _solve_reweight(candidates, system, targets, 0.0)
    if base.count <= target_D:
        return BisectResult(0.0, base, None, None)

    hi = lam_hi
    sol_hi = _solve_reweight(candidates, system, targets, hi)
    doublings = 0
    while sol_hi.count > target_D:
        doublings += 1
        if doublings > 60:
            raise ConvergenceError(
                "penalty doubling failed to shrink the support",
                iterations=doublings, best=sol_hi)
        hi *= 2.0
        sol_hi = _solve_reweight(candidates, system, targets, hi)

    lo, nnz_lo = 0.0, base.count
    best_lam, best = hi, sol_hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        sol_mid = _solve_reweight(candidates, system, targets, mid)
        if sol_mid.count <= target_D:
            hi = mid
            if sol_mid.count > best.count or (sol_mid.count == best.count
                                              and mid < best_lam):
                best_lam, best = mid, sol_mid
        else:
            lo, nnz_lo = mid, sol_mid.count
    if refit_support and best.count > 0:
        keep = _support_indices(candidates, best)
        support = GridQuadrature(candidates.points[keep],
                                 np.full(keep.size, 1.0 / keep.size),
                                 provenance=candidates.provenance)
        refit = _solve_reweight(support, system[:, keep], targets, 0.0)
        best = GridQuadrature(
            refit.points, refit.weights, normalized=False,
            provenance=best.provenance + " refit(lam=0 on selected support)")
    return BisectResult(best_lam, best, lo, nnz_lo)


def _support_indices(candidates: GridQuadrature, grid: GridQuadrature) -> np.ndarray:
    """Rows of ``candidates.points`` present in ``grid.points`` (exact match)."""
    lookup = {tuple(row): i for i, row in enumerate(candidates.points)}
    return np.array([lookup[tuple(row)] for row in grid.points], dtype=int)
