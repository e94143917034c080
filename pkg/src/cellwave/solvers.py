"""Damped Newton, complex root search and pseudo-arclength continuation."""

from __future__ import annotations

import numpy as np

from .errors import ContinuationStalledError, NewtonConvergenceError, SolverError


def fd_jacobian(fun, x, f0=None, step: float = 1e-7) -> np.ndarray:
    """Forward-difference Jacobian with per-component step step*(1+|x_i|)."""
    x = np.asarray(x, dtype=float)
    if f0 is None:
        f0 = np.asarray(fun(x), dtype=float)
    n = x.size
    jac = np.empty((f0.size, n))
    for i in range(n):
        h = step * (1.0 + abs(x[i]))
        xp = x.copy()
        xp[i] += h
        jac[:, i] = (np.asarray(fun(xp), dtype=float) - f0) / h
    return jac


def newton_solve(
    fun,
    x0,
    jac=None,
    *,
    tol: float = 1e-10,
    max_iter: int = 50,
    max_backtracks: int = 60,
    fd_step: float = 1e-7,
) -> np.ndarray:
    """Solve fun(x) = 0 by damped Newton iteration.

    Convergence criterion is ||fun(x)||_inf <= tol * (1 + ||x||_inf).  The
    line search halves the step while the residual norm fails to decrease,
    spending at most ``max_backtracks`` halvings over the whole solve.

    Parameters
    ----------
    fun : callable
        Maps a length-n vector to a length-n residual vector.
    x0 : array_like
        Starting point.
    jac : callable, optional
        Analytic Jacobian; forward differences with step fd_step*(1+|x_i|)
        are used when omitted.

    Returns
    -------
    ndarray
        Converged solution.

    Raises
    ------
    NewtonConvergenceError
        On iteration/backtrack exhaustion; carries the best iterate.
    """
    x = np.array(x0, dtype=float)
    fx = np.asarray(fun(x), dtype=float)
    if fx.size != x.size:
        raise SolverError(f"square system required, got {fx.size}x{x.size}")
    norm = lambda v: float(np.max(np.abs(v))) if v.size else 0.0
    best_x, best_res = x.copy(), norm(fx)
    backtracks = 0
    for _ in range(max_iter):
        res = norm(fx)
        if res <= tol * (1.0 + norm(x)):
            return x
        jmat = jac(x) if jac is not None else fd_jacobian(fun, x, fx, fd_step)
        try:
            dx = np.linalg.solve(jmat, -fx)
        except np.linalg.LinAlgError:
            dx, *_ = np.linalg.lstsq(jmat, -fx, rcond=None)
        step = 1.0
        while True:
            xn = x + step * dx
            fn = np.asarray(fun(xn), dtype=float)
            if norm(fn) <= (1.0 - 1e-4 * step) * res or norm(fn) <= tol:
                x, fx = xn, fn
                break
            backtracks += 1
            step *= 0.5
            if backtracks > max_backtracks:
                raise NewtonConvergenceError(
                    f"line search exhausted after {backtracks} halvings "
                    f"(residual {best_res:.3e})",
                    best_x,
                    best_res,
                )
        if norm(fx) < best_res:
            best_x, best_res = x.copy(), norm(fx)
    if norm(fx) <= tol * (1.0 + norm(x)):
        return x
    raise NewtonConvergenceError(
        f"no convergence in {max_iter} iterations (residual {best_res:.3e})",
        best_x,
        best_res,
    )


def _complex_newton(fun, z0, tol_abs, max_iter=60, max_backtracks=40):
    """Damped Newton for a scalar analytic function; returns (root, |f|) or None."""
    z = complex(z0)
    fz = fun(z)
    afz = abs(fz)
    backtracks = 0
    for _ in range(max_iter):
        if afz <= tol_abs:
            return z, afz
        h = 1e-6 * (1.0 + abs(z))
        d = (fun(z + h) - fun(z - h)) / (2.0 * h)
        if d == 0 or not np.isfinite(d.real) or not np.isfinite(d.imag):
            return None
        dz = -fz / d
        step = 1.0
        while True:
            zn = z + step * dz
            fn = fun(zn)
            if abs(fn) < afz or abs(fn) <= tol_abs:
                z, fz, afz = zn, fn, abs(fn)
                break
            backtracks += 1
            step *= 0.5
            if backtracks > max_backtracks:
                return (z, afz) if afz <= tol_abs else None
    return (z, afz) if afz <= tol_abs else None


def find_complex_roots(
    fun,
    region,
    seeds=(40, 20),
    *,
    residual_factor: float = 1e-10,
    dedup_tol: float = 1e-6,
    fun_grid=None,
) -> list[complex]:
    """Locate roots of an analytic function on a rectangle.

    The function is sampled on a seed grid; Newton iterations are started
    from every local minimum of |f| on the grid.  Converged points within
    a 2% margin of the region are deduplicated (pairwise distance >
    ``dedup_tol``) and returned sorted by (real, imag).

    Parameters
    ----------
    fun : callable
        Analytic complex -> complex.
    region : tuple
        (re_min, re_max, im_min, im_max).
    seeds : tuple
        (nx, ny) seed-grid resolution.
    residual_factor : float
        Accepted roots satisfy |f(root)| <= residual_factor * (1 + scale),
        where scale is the median of |f| over the seed grid.
    fun_grid : callable, optional
        Vectorised evaluation over a flat complex array (else fun is looped).

    Returns
    -------
    list of complex
        Possibly empty; no convergence anywhere is not an error.
    """
    re_min, re_max, im_min, im_max = map(float, region)
    nx, ny = seeds
    xs = np.linspace(re_min, re_max, nx)
    ys = np.linspace(im_min, im_max, ny)
    zx, zy = np.meshgrid(xs, ys, indexing="ij")
    zgrid = (zx + 1j * zy).ravel()
    if fun_grid is not None:
        fvals = np.asarray(fun_grid(zgrid))
    else:
        fvals = np.array([fun(z) for z in zgrid])
    mag = np.abs(fvals).reshape(nx, ny)
    finite = mag[np.isfinite(mag)]
    scale = float(np.median(finite)) if finite.size else 1.0
    tol_abs = residual_factor * (1.0 + scale)

    starts = []
    for i in range(nx):
        for j in range(ny):
            v = mag[i, j]
            if not np.isfinite(v):
                continue
            neigh = []
            if i > 0:
                neigh.append(mag[i - 1, j])
            if i < nx - 1:
                neigh.append(mag[i + 1, j])
            if j > 0:
                neigh.append(mag[i, j - 1])
            if j < ny - 1:
                neigh.append(mag[i, j + 1])
            if all(v <= nv for nv in neigh):
                starts.append(xs[i] + 1j * ys[j])

    margin_re = 0.02 * (re_max - re_min)
    margin_im = 0.02 * (im_max - im_min)
    found: list[tuple[complex, float]] = []
    for z0 in starts:
        hit = _complex_newton(fun, z0, tol_abs)
        if hit is None:
            continue
        root, res = hit
        if not (re_min - margin_re <= root.real <= re_max + margin_re):
            continue
        if not (im_min - margin_im <= root.imag <= im_max + margin_im):
            continue
        for k, (other, other_res) in enumerate(found):
            if abs(root - other) <= dedup_tol:
                if res < other_res:
                    found[k] = (root, res)
                break
        else:
            found.append((root, res))
    roots = sorted((r for r, _ in found), key=lambda z: (z.real, z.imag))
    return roots


def arclength_continue(
    fun,
    start,
    tangent,
    steps: int,
    ds: float,
    *,
    newton_tol: float = 1e-10,
    max_iter: int = 50,
) -> list[np.ndarray]:
    """Pseudo-arclength predictor-corrector for fun: R^{n+1} -> R^n.

    Each accepted point solves [fun(u); t.(u - predictor)] = 0 to the Newton
    tolerance.  On corrector failure the step is halved, down to ds/64.

    Parameters
    ----------
    fun : callable
        Underdetermined system with a one-parameter solution set.
    start : array_like
        Point with ||fun(start)|| within tolerance.
    tangent : array_like
        Initial tangent direction (need not be normalised).
    steps : int
        Number of points to append beyond the start.
    ds : float
        Arclength step.

    Returns
    -------
    list of ndarray
        [start, u_1, ..., u_steps].

    Raises
    ------
    ContinuationStalledError
        On step underflow; carries the partial branch.
    """
    u = np.array(start, dtype=float)
    f0 = np.asarray(fun(u), dtype=float)
    if f0.size != u.size - 1:
        raise SolverError(
            f"expected map R^{u.size} -> R^{u.size - 1}, got R^{f0.size}"
        )
    if np.max(np.abs(f0)) > newton_tol * (1.0 + np.max(np.abs(u))):
        raise SolverError("continuation start does not satisfy the system")
    t = np.array(tangent, dtype=float)
    t /= np.linalg.norm(t)
    points = [u.copy()]
    ds_min = ds / 64.0
    for _ in range(steps):
        h = ds
        while True:
            pred = u + h * t

            def extended(v, _pred=pred, _t=t):
                return np.concatenate(
                    [np.asarray(fun(v), dtype=float), [_t @ (v - _pred)]]
                )

            try:
                sol = newton_solve(
                    extended, pred, tol=newton_tol, max_iter=max_iter
                )
                break
            except NewtonConvergenceError:
                h *= 0.5
                if h < ds_min:
                    raise ContinuationStalledError(
                        f"corrector failed down to step {h:.3e}", points
                    ) from None
        secant = sol - u
        norm = np.linalg.norm(secant)
        if norm > 0:
            t = secant / norm
        u = sol
        points.append(u.copy())
    return points
