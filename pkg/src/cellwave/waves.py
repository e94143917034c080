"""Traveling-wave shapes, the boundary residual, and branch continuation.

The free boundary is written as r(theta) = R0 + rho(theta) with rho an even
truncated cosine series (reflection symmetry about the direction of motion).
A traveling wave at speed V solves the curvature equation

    gamma*kappa + chi_c f_act(c) + chi_u f_und(V n_1) + V r cos(theta) = p1_phys

on the boundary, together with the fixed-area and centering constraints.
``residual_F`` discretises this by collocation at 2N equispaced angles and
projection onto cosine modes 0..N.  The pressure constant carried by states
is measured relative to the resting value, i.e. the physical constant is
``p1 + gamma/R0 + chi_c f_act(c0)``; with that convention the disk with
V = 0, p1 = 0 is an exact root of the residual for every chi_c, which is
what makes (chi_c_star, disk, 0, 0) the bifurcation point of the branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    BranchRangeError,
    ContinuationStalledError,
    GeometryError,
    NewtonConvergenceError,
    SolverError,
)
from .forces import ForceLaw
from .model import ModelParams, chi_c_star, tw_concentration, tw_pressure
from .solvers import arclength_continue, fd_jacobian, newton_solve
from .special import gauss_legendre

#: Default truncation order of the cosine series.
DEFAULT_N = 64

#: Newton tolerance for traveling-wave solves.
SOLVE_TOL = 1e-12

#: Jacobian condition number beyond which branch stepping switches to
#: pseudo-arclength continuation.
COND_SWITCH = 1e10


@lru_cache(maxsize=8)
def _grid(n: int):
    """Collocation tables for truncation order n (2n equispaced angles)."""
    nc = 2 * n
    thetas = 2.0 * np.pi * np.arange(nc) / nc
    k = np.arange(n + 1)
    cos_t = np.cos(np.outer(k, thetas))
    sin_t = np.sin(np.outer(k, thetas))
    return thetas, k, cos_t, sin_t


def collocation_nodes(n: int) -> np.ndarray:
    """The 2n equispaced collocation angles on [0, 2*pi)."""
    return _grid(n)[0].copy()


def project_cosine(values: np.ndarray) -> np.ndarray:
    """Cosine-series coefficients 0..n of samples at the 2n collocation nodes."""
    nc = values.size
    spec = np.fft.rfft(values)
    coeffs = 2.0 * spec.real / nc
    coeffs[0] *= 0.5
    coeffs[-1] *= 0.5          # Nyquist mode carries half weight
    return coeffs


@dataclass(frozen=True, eq=False)
class Shape:
    """Even boundary perturbation rho(theta) = sum_k rho_cos[k] cos(k theta).

    Evenness is structural: no sine coefficients exist.  The radius
    R0 + rho must stay positive (checked at twice the collocation density).
    """

    rho_cos: np.ndarray
    R0: float

    def __post_init__(self):
        arr = np.asarray(self.rho_cos, dtype=float)
        object.__setattr__(self, "rho_cos", arr)
        if arr.ndim != 1 or arr.size < 2:
            raise GeometryError("rho_cos must be a 1-D array with >= 2 modes")
        thetas = np.linspace(0.0, 2.0 * np.pi, 4 * (arr.size - 1), endpoint=False)
        if np.min(self.radius(thetas)) <= 0.0:
            raise GeometryError("R0 + rho(theta) must stay positive")

    @property
    def N(self) -> int:
        return self.rho_cos.size - 1

    def _tables(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        k = np.arange(self.N + 1)
        ang = np.outer(k, theta)
        return theta, k, np.cos(ang), np.sin(ang)

    def rho(self, theta):
        _, _, cos_t, _ = self._tables(theta)
        out = self.rho_cos @ cos_t
        return out if np.ndim(theta) else float(out[0])

    def drho(self, theta):
        _, k, _, sin_t = self._tables(theta)
        out = -(self.rho_cos * k) @ sin_t
        return out if np.ndim(theta) else float(out[0])

    def d2rho(self, theta):
        _, k, cos_t, _ = self._tables(theta)
        out = -(self.rho_cos * k * k) @ cos_t
        return out if np.ndim(theta) else float(out[0])

    def radius(self, theta):
        return self.R0 + self.rho(theta)


def disk_shape(R0: float, n: int = DEFAULT_N) -> Shape:
    """The unperturbed disk at truncation order n."""
    return Shape(np.zeros(n + 1), R0)


def normal_vector(shape: Shape, theta):
    """Outward unit normal (n_1, n_2) of the boundary at angle theta."""
    r = shape.radius(theta)
    rp = shape.drho(theta)
    if np.min(np.atleast_1d(r)) <= 0.0:
        raise GeometryError("degenerate radius")
    den = np.sqrt(r * r + rp * rp)
    n1 = (r * np.cos(theta) + rp * np.sin(theta)) / den
    n2 = (r * np.sin(theta) - rp * np.cos(theta)) / den
    return n1, n2


def normal_x(shape: Shape, theta):
    """First component of the outward unit normal."""
    return normal_vector(shape, theta)[0]


def mean_curvature(shape: Shape, theta):
    """Curvature of the polar boundary (positive for a disk).

    kappa = (r^2 + 2 r'^2 - r r'') / (r^2 + r'^2)^(3/2) with r = R0 + rho;
    the derivatives are spectral (exact for the stored cosine series).
    """
    r = shape.radius(theta)
    if np.min(np.atleast_1d(r)) <= 0.0:
        raise GeometryError("degenerate radius")
    rp = shape.drho(theta)
    rpp = shape.d2rho(theta)
    return (r * r + 2.0 * rp * rp - r * rpp) / (r * r + rp * rp) ** 1.5


def _radial_weight(s, radii):
    """int_0^R exp(s r) r dr, elementwise; series fallback near s = 0."""
    s = np.asarray(s, dtype=float)
    radii = np.asarray(radii, dtype=float)
    out = np.empty_like(radii)
    small = np.abs(s * radii) < 0.05
    if np.any(small):
        ss, rr = s[small], radii[small]
        acc = rr * rr / 2.0
        term = np.ones_like(rr)
        # term_k = s^k R^{k+2} / (k! (k+2))
        fact = 1.0
        for kk in range(1, 12):
            fact *= kk
            term = term * ss * rr
            acc = acc + term * rr * rr / (fact * (kk + 2))
        out[small] = acc
    big = ~small
    if np.any(big):
        ss, rr = s[big], radii[big]
        out[big] = (np.exp(ss * rr) * (ss * rr - 1.0) + 1.0) / (ss * ss)
    return out


def marker_normalization(shape: Shape, V: float, params: ModelParams,
                         thetas: np.ndarray | None = None) -> float:
    """Concentration scale c_1 fixing the total marker mass.

    c_1 = M / (integral over the domain of exp(-a V x)); the radial part is
    integrated in closed form per angle and the angular part by the periodic
    trapezoid rule on the collocation grid.
    """
    if thetas is None:
        thetas = _grid(shape.N)[0]
    radii = shape.radius(thetas)
    s = -params.a * V * np.cos(thetas)
    weights = _radial_weight(s, radii)
    denom = 2.0 * np.pi * float(np.mean(weights))
    return params.M / denom


@dataclass(frozen=True, eq=False)
class TravelingWaveState:
    """One point on the traveling-wave branch.

    ``p1`` is the pressure constant relative to the resting pressure; the
    physical constant is recovered by ``p1_physical``.
    """

    shape: Shape
    V: float
    p1: float
    chi_c: float
    c1: float

    def p1_physical(self, params: ModelParams, f_act: ForceLaw) -> float:
        return (self.p1 + params.gamma / params.R0
                + self.chi_c * float(f_act.eval(params.c0)))


def rest_state(params: ModelParams, f_act: ForceLaw, f_und: ForceLaw,
               n: int = DEFAULT_N) -> TravelingWaveState:
    """The branch root: disk at the bifurcation point, V = 0."""
    return TravelingWaveState(
        shape=disk_shape(params.R0, n),
        V=0.0,
        p1=0.0,
        chi_c=chi_c_star(params, f_act, f_und),
        c1=params.c0,
    )


def _area_centering(rho_cos: np.ndarray, R0: float) -> tuple[float, float]:
    """Exact fixed-area and centering functionals of the cosine series.

    int (r^2 - R0^2) dtheta = 4 pi R0 rho_0 + 2 pi rho_0^2 + pi sum_{k>=1} rho_k^2
    int rho cos(theta) dtheta = pi rho_1
    """
    area = (4.0 * np.pi * R0 * rho_cos[0]
            + 2.0 * np.pi * rho_cos[0] ** 2
            + np.pi * float(np.sum(rho_cos[1:] ** 2)))
    centering = np.pi * rho_cos[1]
    return area, centering


def _residual_vector(rho_cos, V, p1, chi_c, params, f_act, f_und):
    """Discretised boundary residual: cosine modes 0..N, then area, centering."""
    n = rho_cos.size - 1
    thetas, k, cos_t, sin_t = _grid(n)
    r = params.R0 + rho_cos @ cos_t
    if np.min(r) <= 1e-9 * params.R0:
        # Degenerate trial shape inside a Newton line search: hand back a
        # large residual so the step is rejected instead of raising.
        return np.full(n + 3, 1e6)
    rp = -(rho_cos * k) @ sin_t
    rpp = -(rho_cos * k * k) @ cos_t
    r2p2 = r * r + rp * rp
    kappa = (r * r + 2.0 * rp * rp - r * rpp) / r2p2 ** 1.5
    n1 = (r * np.cos(thetas) + rp * np.sin(thetas)) / np.sqrt(r2p2)

    s = -params.a * V * np.cos(thetas)
    weights = _radial_weight(s, r)
    c1 = params.M / (2.0 * np.pi * float(np.mean(weights)))
    c_bnd = c1 * np.exp(s * r)
    c_bnd = np.maximum(c_bnd, 0.0)

    c0 = params.c0
    block = (params.gamma * kappa
             + chi_c * (np.asarray(f_act.eval(c_bnd)) - float(f_act.eval(c0)))
             + params.chi_u * np.asarray(f_und.eval(V * n1))
             + V * r * np.cos(thetas)
             - p1
             - params.gamma / params.R0)
    modes = project_cosine(block)
    area, centering = _area_centering(rho_cos, params.R0)
    return np.concatenate([modes, [area, centering]])


def residual_F(state: TravelingWaveState, params: ModelParams,
               f_act: ForceLaw, f_und: ForceLaw) -> np.ndarray:
    """Traveling-wave residual of a state: N+1 projected cosine modes of the
    curvature-equation defect, then the area and centering scalars.

    Zero (to round-off) at the disk with V = 0, p1 = 0 for every chi_c.
    """
    return _residual_vector(state.shape.rho_cos, state.V, state.p1,
                            state.chi_c, params, f_act, f_und)


def linearized_residual(rho_cos, V, p1, chi_c, params: ModelParams,
                        f_act: ForceLaw, f_und: ForceLaw) -> np.ndarray:
    """Derivative of the residual at the disk, applied to (rho, V, p1).

    First block (per angle):
        -gamma (rho + rho'')/R0^2
        - (chi_c c0 f_act'(c0) / (pi R0)) * int rho dtheta
        + (chi_u f_und'(0) + R0 - a c0 chi_c f_act'(c0) R0) V cos(theta)
        - p1
    followed by the linearised area (4 pi R0 rho_0) and centering (pi rho_1)
    rows, discretised exactly like ``residual_F``.
    """
    rho_cos = np.asarray(rho_cos, dtype=float)
    n = rho_cos.size - 1
    thetas, k, cos_t, _ = _grid(n)
    rho = rho_cos @ cos_t
    rpp = -(rho_cos * k * k) @ cos_t
    c0 = params.c0
    fp = float(f_act.d1(c0))
    fu = float(f_und.d1(0.0))
    mean_term = (chi_c * c0 * fp / (np.pi * params.R0)) * (2.0 * np.pi * rho_cos[0])
    v_coef = (params.chi_u * fu + params.R0
              - params.a * c0 * chi_c * fp * params.R0)
    block = (-params.gamma * (rho + rpp) / params.R0 ** 2
             - mean_term
             + v_coef * V * np.cos(thetas)
             - p1)
    modes = project_cosine(block)
    area = 4.0 * np.pi * params.R0 * rho_cos[0]
    centering = np.pi * rho_cos[1]
    return np.concatenate([modes, [area, centering]])


# ---------------------------------------------------------------------------
# Solving and continuation.
# ---------------------------------------------------------------------------

def _pack(state: TravelingWaveState) -> np.ndarray:
    return np.concatenate([state.shape.rho_cos, [state.p1, state.chi_c]])


def _unpack(u: np.ndarray, V: float, params: ModelParams) -> TravelingWaveState:
    rho_cos = np.asarray(u[:-2], dtype=float)
    shape = Shape(rho_cos, params.R0)
    c1 = marker_normalization(shape, V, params)
    return TravelingWaveState(shape=shape, V=V, p1=float(u[-2]),
                              chi_c=float(u[-1]), c1=c1)


def state_diagnostics(state: TravelingWaveState, params: ModelParams,
                      f_act: ForceLaw, f_und: ForceLaw,
                      radial_points: int = 32) -> dict:
    """Independent invariant checks of a traveling-wave state.

    The curvature-equation defect is reassembled pointwise from the
    closed-form pressure and concentration fields (not from the solver's
    residual path); the marker mass is re-integrated with Gauss-Legendre in
    radius on a doubled angular grid.
    """
    shape = state.shape
    n = shape.N
    thetas = _grid(n)[0]
    r = shape.radius(thetas)
    kappa = mean_curvature(shape, thetas)
    n1 = normal_x(shape, thetas)
    x = r * np.cos(thetas)
    p1_phys = state.p1_physical(params, f_act)
    pressure = np.array([tw_pressure(state.V, p1_phys, (xi,)) for xi in x])
    conc = np.array(
        [tw_concentration(params, state.V, state.c1, (xi,)) for xi in x]
    )
    defect = (params.gamma * kappa
              - (pressure
                 - state.chi_c * np.asarray(f_act.eval(conc))
                 - params.chi_u * np.asarray(f_und.eval(state.V * n1))))
    area, centering = _area_centering(shape.rho_cos, params.R0)

    fine = np.linspace(0.0, 2.0 * np.pi, 4 * n, endpoint=False)
    radii = shape.radius(fine)
    mass = 0.0
    rule = gauss_legendre(radial_points, 0.0, 1.0)
    for th, rad in zip(fine, radii):
        rr = rule.nodes * rad
        vals = np.exp(-params.a * state.V * rr * np.cos(th)) * rr
        mass += float(np.dot(rule.weights * rad, vals))
    mass *= state.c1 * 2.0 * np.pi / fine.size

    return {
        "residual_sup": float(np.max(np.abs(defect))),
        "area_error": abs(area),
        "centering_error": abs(centering),
        "mass_rel_error": abs(mass - params.M) / params.M,
        "min_boundary_concentration": float(
            np.min(state.c1 * np.exp(-params.a * state.V * x))
        ),
    }


def solve_at_velocity(V: float, guess: TravelingWaveState, params: ModelParams,
                      f_act: ForceLaw, f_und: ForceLaw, *,
                      tol: float = SOLVE_TOL) -> TravelingWaveState:
    """Solve the traveling-wave system at a fixed nonzero speed.

    Unknowns are the cosine modes rho_0..rho_N, the pressure constant p1 and
    the active strength chi_c; the centering row pins the cos(theta) mode.

    Parameters
    ----------
    V : float
        Wave speed; V = 0 is rejected (the system is singular there: the
        disk solves it for every chi_c).
    guess : TravelingWaveState
        Starting point within the Newton basin (a disk state works for
        small V).

    Raises
    ------
    SolverError
        For V = 0, Newton failure, or a violated state invariant.
    """
    if V == 0.0:
        raise SolverError(
            "V = 0 is singular: every chi_c solves it with the disk; "
            "start the branch at a small positive V instead"
        )

    def fun(u):
        return _residual_vector(u[:-2], V, u[-2], u[-1], params, f_act, f_und)

    try:
        sol = newton_solve(fun, _pack(guess), tol=tol)
    except NewtonConvergenceError as exc:
        raise SolverError(
            f"traveling-wave solve failed at V={V:g}: {exc} "
            f"(best residual {exc.best_residual:.3e})"
        ) from exc
    state = _unpack(sol, V, params)
    diag = state_diagnostics(state, params, f_act, f_und)
    if diag["area_error"] > 1e-10 or diag["centering_error"] > 1e-10:
        raise SolverError(f"constraint violation at V={V:g}: {diag}")
    if diag["min_boundary_concentration"] <= 0.0:
        raise SolverError(f"non-positive boundary concentration at V={V:g}")
    return state


@dataclass(frozen=True)
class Branch:
    """Ordered traveling-wave states with the bifurcation point as root."""

    states: tuple
    used_arclength: bool = False

    def velocities(self) -> np.ndarray:
        return np.array([s.V for s in self.states])

    def chi_values(self) -> np.ndarray:
        return np.array([s.chi_c for s in self.states])

    def state_nearest(self, V: float) -> TravelingWaveState:
        vs = self.velocities()
        if V > vs[-1] + 1e-12 or V < vs[0] - 1e-12:
            raise BranchRangeError(
                f"V={V:g} outside computed branch [{vs[0]:g}, {vs[-1]:g}]"
            )
        return self.states[int(np.argmin(np.abs(vs - V)))]


def continue_branch(params: ModelParams, f_act: ForceLaw, f_und: ForceLaw,
                    V_max: float, ds: float, *, n: int = DEFAULT_N,
                    tol: float = SOLVE_TOL,
                    cond_switch: float = COND_SWITCH) -> Branch:
    """Trace the traveling-wave branch from the bifurcation point.

    Steps the speed directly (the branch is a graph over V near onset since
    the kernel direction at the bifurcation point is the pure-V direction);
    if the fixed-V Jacobian condition number exceeds ``cond_switch`` the
    remaining stretch is traced by pseudo-arclength continuation in
    (rho, p1, chi_c, V) instead, which is robust through folds.

    Failed steps are retried with halved substeps down to ds/64.

    Raises
    ------
    ContinuationStalledError
        Carrying the partial branch on stall.
    """
    if V_max <= 0 or ds <= 0:
        raise ValueError("V_max and ds must be positive")
    states = [rest_state(params, f_act, f_und, n)]
    n_steps = max(1, int(round(V_max / ds)))
    targets = list(np.linspace(V_max / n_steps, V_max, n_steps))

    def fixed_v_fun(u, V):
        return _residual_vector(u[:-2], V, u[-2], u[-1], params, f_act, f_und)

    def advance(prev, V_to, depth=0):
        try:
            return solve_at_velocity(V_to, prev, params, f_act, f_und, tol=tol)
        except SolverError:
            if depth >= 6:          # substeps down to ds/64
                raise
            half = prev.V + 0.5 * (V_to - prev.V)
            inter = advance(prev, half, depth + 1)
            return advance(inter, V_to, depth + 1)

    for V_to in targets:
        try:
            state = advance(states[-1], V_to)
        except SolverError as exc:
            raise ContinuationStalledError(
                f"branch stalled before V={V_to:g}: {exc}",
                Branch(states=tuple(states)),
            ) from exc
        states.append(state)
        u = _pack(state)
        jac = fd_jacobian(lambda v: fixed_v_fun(v, state.V), u)
        if np.linalg.cond(jac) > cond_switch:
            return _arclength_tail(states, params, f_act, f_und, V_max, ds, tol)
    return Branch(states=tuple(states))


def _arclength_tail(states, params, f_act, f_und, V_max, ds, tol):
    """Continue in (rho, p1, chi_c, V) by pseudo-arclength until V_max."""

    def fun(u_ext):
        return _residual_vector(u_ext[:-3], u_ext[-1], u_ext[-3], u_ext[-2],
                                params, f_act, f_und)

    last = states[-1]
    u_last = np.concatenate([_pack(last), [last.V]])
    if len(states) >= 2:
        prev = states[-2]
        u_prev = np.concatenate([_pack(prev), [prev.V]])
        tangent = u_last - u_prev
    else:
        tangent = np.zeros_like(u_last)
        tangent[-1] = 1.0
    while states[-1].V < V_max - 1e-12:
        try:
            points = arclength_continue(fun, u_last, tangent, 1, ds,
                                        newton_tol=tol)
        except ContinuationStalledError as exc:
            raise ContinuationStalledError(
                str(exc), Branch(states=tuple(states), used_arclength=True)
            ) from exc
        new = points[-1]
        tangent = new - u_last
        u_last = new
        if new[-1] >= V_max:
            # Overshot the requested endpoint: land exactly on V_max with a
            # fixed-speed solve warm-started from the overshoot point.
            guess = _unpack(new[:-1], V_max, params)
            states.append(solve_at_velocity(V_max, guess, params, f_act,
                                            f_und, tol=tol))
            break
        states.append(_unpack(new[:-1], float(new[-1]), params))
    return Branch(states=tuple(states), used_arclength=True)


# ---------------------------------------------------------------------------
# Bifurcation-point structure and the branch expansion report.
# ---------------------------------------------------------------------------

def bifurcation_jacobian(params: ModelParams, f_act: ForceLaw, f_und: ForceLaw,
                         n: int = DEFAULT_N, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the residual in (rho, V, p1) at the
    bifurcation point (chi_c_star, disk, 0, 0)."""
    star = chi_c_star(params, f_act, f_und)

    def fun(x):
        return _residual_vector(x[: n + 1], x[n + 1], x[n + 2], star,
                                params, f_act, f_und)

    x0 = np.zeros(n + 3)
    cols = []
    for i in range(n + 3):
        h = step
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((fun(xp) - fun(xm)) / (2.0 * h))
    return np.column_stack(cols)


def kernel_alignment(params: ModelParams, f_act: ForceLaw, f_und: ForceLaw,
                     n: int = DEFAULT_N) -> dict:
    """Kernel structure of the bifurcation-point Jacobian.

    Returns the angle between the smallest-singular-vector and the pure-V
    direction, plus the two smallest singular values (a one-dimensional
    kernel shows one near-zero value and a clear gap).
    """
    jac = bifurcation_jacobian(params, f_act, f_und, n)
    _, svals, vh = np.linalg.svd(jac)
    v = vh[-1]
    e_v = np.zeros(n + 3)
    e_v[n + 1] = 1.0
    cosang = abs(float(v @ e_v)) / np.linalg.norm(v)
    angle = math.acos(min(1.0, cosang))
    return {
        "angle_to_v_direction": angle,
        "sigma_min": float(svals[-1]),
        "sigma_next": float(svals[-2]),
        "kernel_vector": v,
    }


def transversality_product(params: ModelParams, f_act: ForceLaw,
                           f_und: ForceLaw, n: int = DEFAULT_N,
                           dv: float = 1e-4, dchi: float = 1e-2) -> float:
    """Mixed chi_c/V derivative of the residual at the bifurcation point,
    projected on cos(theta).

    Central differences in V give the V-column of the Jacobian at the disk;
    a central difference in chi_c of its first-block cos(theta) integral
    yields -a c0 f_act'(c0) R0 pi, nonzero, which is the transversality
    condition that makes the bifurcation simple.  The projected V-column is
    linear in chi_c, so the wide dchi costs no truncation error while
    keeping nested-difference rounding noise far below target.
    """
    star = chi_c_star(params, f_act, f_und)
    zeros = np.zeros(n + 1)

    def v_column_cos1(chi):
        rp = _residual_vector(zeros, dv, 0.0, chi, params, f_act, f_und)
        rm = _residual_vector(zeros, -dv, 0.0, chi, params, f_act, f_und)
        col = (rp - rm) / (2.0 * dv)
        return math.pi * col[1]       # integral of first block against cos

    return (v_column_cos1(star + dchi) - v_column_cos1(star - dchi)) / (2.0 * dchi)


@dataclass(frozen=True)
class BifurcationReport:
    """Finite-difference expansion of the branch at its root.

    ``d2_chi_ds2_candidates`` holds the two closed forms that differ in the
    coefficient (1/3 vs 1/4) of the cubic undercooling term; ``verdict``
    records which one the numerics support ("coincident" when the cubic
    term is absent, "inconclusive" when neither fits within 25%).
    """

    chi_c_star_closed_form: float
    chi_c_star_numeric: float
    d_chi_ds_at_0: float
    d2_chi_ds2_at_0: float
    d2_chi_error_estimate: float
    d2_chi_ds2_candidates: dict
    verdict: str
    matched_within: float
    symmetry: dict
    details: dict


def chi_second_derivative_candidates(params: ModelParams, f_act: ForceLaw,
                                     f_und: ForceLaw) -> dict:
    """The two closed-form branch curvatures (shared leading part, cubic
    undercooling coefficient 1/3 vs 1/4)."""
    c0 = params.c0
    fp = float(f_act.d1(c0))
    fpp = float(f_act.d2(c0))
    fppp = float(f_act.d3(c0))
    fu3 = float(f_und.d3(0.0))
    shared = (-(params.R0 + params.chi_u * float(f_und.d1(0.0)))
              * params.a * params.R0 / (2.0 * fp * fp)
              * (fpp + params.M / (2.0 * np.pi * params.R0 ** 2) * fppp))
    cubic = params.chi_u * fu3 / (params.a * c0 * params.R0 * fp)
    return {
        "statement_third": shared + cubic / 3.0,
        "proof_quarter": shared + cubic / 4.0,
        "shared_term": shared,
        "cubic_unit": cubic,
    }


def bifurcation_report(params: ModelParams, f_act: ForceLaw, f_und: ForceLaw,
                       *, n: int = DEFAULT_N, h: float = 0.04,
                       tol: float = SOLVE_TOL) -> BifurcationReport:
    """Estimate chi_c'(0) and chi_c''(0) along the branch and compare the
    curvature against the closed-form candidates.

    Solves at speeds h, h/2, h/4 (and at -h/2 once, to assert the
    reflection symmetry V -> -V before exploiting it for the centred
    second-difference stencil).  One Richardson pass removes the V^2
    truncation term; chi_c'(0) uses a one-sided second-order stencil so the
    symmetry is not trivially baked into the answer.  Since the speed
    parametrises the branch with unit derivative at onset, derivatives in V
    at 0 equal the derivatives in the bifurcation parameter.
    """
    star = chi_c_star(params, f_act, f_und)
    root = rest_state(params, f_act, f_und, n)
    speeds = [h, 0.5 * h, 0.25 * h]
    sols = {}
    prev = root
    for v in speeds:
        prev = solve_at_velocity(v, prev, params, f_act, f_und, tol=tol)
        sols[v] = prev

    mirrored = solve_at_velocity(-0.5 * h, sols[0.5 * h], params, f_act,
                                 f_und, tol=tol)
    twin = sols[0.5 * h]
    k = np.arange(n + 1)
    reflect_dev = float(np.max(np.abs(
        mirrored.shape.rho_cos - ((-1.0) ** k) * twin.shape.rho_cos
    )))
    symmetry = {
        "chi_mismatch": abs(mirrored.chi_c - twin.chi_c),
        "shape_reflection_mismatch": reflect_dev,
        "p1_mismatch": abs(mirrored.p1 - twin.p1),
    }

    chis = {v: sols[v].chi_c for v in speeds}
    second = {v: 2.0 * (chis[v] - star) / v ** 2 for v in speeds}
    rich_coarse = (4.0 * second[0.5 * h] - second[h]) / 3.0
    rich_fine = (4.0 * second[0.25 * h] - second[0.5 * h]) / 3.0
    d2 = rich_fine
    d2_err = abs(rich_fine - rich_coarse)

    # chi'(0), one-sided second order at the two finer steps.
    one_sided = {
        hh: (-3.0 * star + 4.0 * chis[hh] - chis[2.0 * hh]) / (2.0 * hh)
        for hh in (0.5 * h, 0.25 * h)
    }
    d1 = one_sided[0.25 * h]

    # Even-polynomial extrapolation of chi_c(V) to V = 0 from the three
    # solved speeds only (independent of the closed-form root value).
    t = np.array([v * v for v in speeds])
    vander = np.column_stack([np.ones_like(t), t, t * t])
    coef = np.linalg.solve(vander, np.array([chis[v] for v in speeds]))
    star_numeric = float(coef[0])

    cands = chi_second_derivative_candidates(params, f_act, f_und)
    rels = {
        name: abs(d2 - cands[name]) / max(abs(cands[name]), 1e-300)
        for name in ("statement_third", "proof_quarter")
    }
    if abs(cands["cubic_unit"]) < 1e-12 * max(1.0, abs(cands["shared_term"])):
        verdict = "coincident"
        matched = rels["proof_quarter"]
    else:
        best = min(rels, key=rels.get)
        matched = rels[best]
        verdict = best if matched <= 0.25 else "inconclusive"

    rho2_cos2 = 2.0 * sols[0.25 * h].shape.rho_cos[2] / (0.25 * h) ** 2
    return BifurcationReport(
        chi_c_star_closed_form=star,
        chi_c_star_numeric=star_numeric,
        d_chi_ds_at_0=d1,
        d2_chi_ds2_at_0=d2,
        d2_chi_error_estimate=d2_err,
        d2_chi_ds2_candidates={k: cands[k] for k in
                               ("statement_third", "proof_quarter")},
        verdict=verdict,
        matched_within=matched,
        symmetry=symmetry,
        details={
            "relative_mismatch": rels,
            "second_difference_by_step": second,
            "d_chi_one_sided": one_sided,
            "shape_second_derivative_cos2": rho2_cos2,
        },
    )
