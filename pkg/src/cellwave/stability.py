"""Linear stability of the resting disk.

For each angular mode m the linearised growth rates are the complex roots of
a transcendental dispersion function built from modified Bessel functions.
``dispersion_H`` is the literal transcription of that function (principal
square root).  Root finding instead operates on ``dispersion_kernel``: the
same function with its structural zero at the origin factored out and written
in terms of even Bessel ratios, which makes it entire in the growth rate and
removes the square-root branch entirely.  The structural zero modes
(translation and the two mass/concentration neutral modes) are handled by
closed-form algebra in ``zero_mode_basis``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ResidualError, SolverError
from .forces import ForceLaw
from .model import ModelParams, chi_c_star
from .solvers import find_complex_roots
from .special import bessel_I

#: Located roots must satisfy |kernel| <= RESIDUAL_TOL * (largest additive term).
RESIDUAL_TOL = 1e-9

#: Re(lambda) above this counts as unstable.
CLASSIFY_TOL = 1e-9

#: |lambda| below this is treated as the structural zero.
ZERO_RADIUS = 1e-12

DEFAULT_SEEDS = (40, 20)


def default_root_region(params: ModelParams) -> tuple[float, float, float, float]:
    """Default complex search rectangle, scaled with the rest radius."""
    r2 = params.R0 ** 2
    return (-80.0 / r2, 20.0 / r2, -10.0, 10.0)


def _mode_constants(m: int, params: ModelParams, f_act: ForceLaw,
                    f_und: ForceLaw) -> tuple[float, float, float]:
    c0 = params.c0
    coef_c = params.a * params.chi_c * c0 * float(f_act.d1(c0)) / params.R0
    b_m = 1.0 + m * params.chi_u * float(f_und.d1(0.0)) / params.R0
    d_m = params.gamma * m * (m * m - 1) / params.R0 ** 3
    return coef_c, b_m, d_m


def dispersion_H(m: int, z: complex, params: ModelParams, f_act: ForceLaw,
                 f_und: ForceLaw) -> complex:
    """Literal mode-m dispersion function H_m(z), principal square root.

    H_m(z) = z m (a chi_c c0 f_act'(c0) / R0) I_m(-R0 sqrt(z))
           + (sqrt(z)/2) [z (1 + (m/R0) chi_u f_und'(0))
                          + (gamma/R0^3) m (m^2 - 1)]
                        [I_{m-1}(-R0 sqrt(z)) + I_{m+1}(-R0 sqrt(z))]

    with I_{-1} = I_1.  Under the opposite square-root branch the value
    changes by exactly (-1)^m, so the root set is branch independent.
    """
    if m < 0:
        raise ValueError("mode index must be nonnegative")
    coef_c, b_m, d_m = _mode_constants(m, params, f_act, f_und)
    z = complex(z)
    sq = cmath.sqrt(z)
    w = -params.R0 * sq
    i_lo = bessel_I(1, w) if m == 0 else bessel_I(m - 1, w)
    term1 = z * m * coef_c * bessel_I(m, w)
    term2 = 0.5 * sq * (z * b_m + d_m) * (i_lo + bessel_I(m + 1, w))
    return term1 + term2


def structural_exponent(m: int) -> float:
    """Order of the structural zero of H_m at the origin: H_m = z^e * kernel."""
    if m == 0:
        return 2.0
    if m == 1:
        return 1.5
    return 0.5 * m


def dispersion_kernel(m: int, z: complex, params: ModelParams, f_act: ForceLaw,
                      f_und: ForceLaw) -> tuple[complex, float]:
    """Dispersion function with the structural origin zero factored out.

    Returns (value, scale) with scale the magnitude of the largest additive
    term; the nonzero growth rates of mode m are exactly the roots of the
    value.  Entire in z (no square-root branch).
    """
    coef_c, b_m, d_m = _mode_constants(m, params, f_act, f_und)
    val, scale = _kernels.phi_mode(int(m), complex(z), params.R0, coef_c, b_m, d_m)
    return complex(val), float(scale)


def _kernel_closures(m, params, f_act, f_und):
    coef_c, b_m, d_m = _mode_constants(m, params, f_act, f_und)
    r0 = params.R0

    def fun(z):
        return _kernels.phi_mode(m, complex(z), r0, coef_c, b_m, d_m)[0]

    def fun_grid(zs):
        zs = np.ascontiguousarray(zs, dtype=np.complex128)
        return _kernels.phi_mode_grid(m, zs, r0, coef_c, b_m, d_m)[0]

    def fun_scaled(z):
        return _kernels.phi_mode(m, complex(z), r0, coef_c, b_m, d_m)

    return fun, fun_grid, fun_scaled


def _polish_root(fun_scaled, z0, *, rel_tol=1e-13, max_iter=80):
    """Newton-polish a root of the dispersion kernel from a warm start.

    Iterates until |value| <= rel_tol * (largest additive term) or damping
    stops helping; always returns (best_z, best_rel).
    """
    z = complex(z0)
    val, scale = fun_scaled(z)
    rel = abs(val) / max(scale, 1e-300)
    backtracks = 0
    for _ in range(max_iter):
        if rel <= rel_tol:
            break
        h = 1e-7 * (1.0 + abs(z))
        d = (fun_scaled(z + h)[0] - fun_scaled(z - h)[0]) / (2.0 * h)
        if d == 0:
            break
        dz = -val / d
        step = 1.0
        improved = False
        while backtracks <= 50:
            zn = z + step * dz
            vn, sn = fun_scaled(zn)
            rn = abs(vn) / max(sn, 1e-300)
            if rn < rel or rn <= rel_tol:
                z, val, scale, rel = zn, vn, sn, rn
                improved = True
                break
            backtracks += 1
            step *= 0.5
        if not improved:
            break
    return z, rel


@dataclass(frozen=True)
class ModeSpectrum:
    """Located nonzero growth rates of one angular mode.

    ``principal`` is the located root with the largest real part; the
    structural zero at the origin is never included (for m in {0, 1} it is
    a genuine neutral eigenvalue, recorded via ``zero_eigenspace_dim``; for
    m >= 2 it only admits the zero eigenfunction and is not an eigenvalue).
    """

    m: int
    roots: tuple
    residuals: tuple
    principal: complex | None
    zero_eigenspace_dim: int

    @property
    def has_structural_zero(self) -> bool:
        return self.zero_eigenspace_dim > 0


def mode_spectrum(m: int, params: ModelParams, f_act: ForceLaw, f_und: ForceLaw,
                  region=None, seeds=DEFAULT_SEEDS) -> ModeSpectrum:
    """Locate the nonzero growth rates of mode m inside a rectangle.

    Roots are found by Newton iterations on the branch-free dispersion
    kernel seeded from a grid; each returned root passes the normalised
    residual check |kernel| <= RESIDUAL_TOL * (largest additive term).
    """
    if region is None:
        region = default_root_region(params)
    fun, fun_grid, fun_scaled = _kernel_closures(m, params, f_act, f_und)
    raw = find_complex_roots(fun, region, seeds, fun_grid=fun_grid)
    roots = []
    residuals = []
    for z in raw:
        z, rel = _polish_root(fun_scaled, z)
        if any(abs(z - other) <= 1e-6 for other in roots):
            continue
        if rel <= RESIDUAL_TOL:
            roots.append(z)
            residuals.append(rel)
    order = sorted(range(len(roots)), key=lambda i: (roots[i].real, roots[i].imag))
    roots = [roots[i] for i in order]
    residuals = [residuals[i] for i in order]
    principal = None
    if roots:
        principal = max(roots, key=lambda z: (z.real, -abs(z.imag), z.imag))
    return ModeSpectrum(
        m=m,
        roots=tuple(roots),
        residuals=tuple(residuals),
        principal=principal,
        zero_eigenspace_dim=zero_eigenspace_dimension(m, params, f_act, f_und),
    )


# ---------------------------------------------------------------------------
# Eigenmodes.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenMode:
    """Modal amplitudes (rho_hat, c_hat, P_hat) for one growth rate.

    The boundary perturbation is rho_hat * cos(m theta); the concentration
    and pressure radial profiles follow from ``concentration_profile`` and
    ``pressure_profile``.
    """

    m: int
    lam: complex
    rho_hat: complex
    c_hat: complex
    P_hat: complex

    def concentration_profile(self, r):
        """Radial concentration profile at radius r (scalar or array)."""
        if self.lam == 0:
            return self.c_hat * np.power(np.asarray(r, dtype=float), self.m)
        sq = cmath.sqrt(self.lam)
        rs = np.atleast_1d(np.asarray(r, dtype=float))
        vals = np.array([bessel_I(self.m, -ri * sq) for ri in rs])
        out = self.c_hat * vals
        return out[0] if np.isscalar(r) else out

    def pressure_profile(self, r):
        """Radial pressure profile P_hat * r^m."""
        return self.P_hat * np.power(np.asarray(r, dtype=float), self.m)


def _eigen_matrix(m: int, lam: complex, params: ModelParams, f_act: ForceLaw,
                  f_und: ForceLaw) -> np.ndarray:
    """3x3 homogeneous system for (rho_hat, c_hat, P_hat) at growth rate lam."""
    r0 = params.R0
    c0 = params.c0
    fp = float(f_act.d1(c0))
    fu = float(f_und.d1(0.0))
    sq = cmath.sqrt(complex(lam))
    w = -r0 * sq
    i_m = bessel_I(m, w)
    i_lo = bessel_I(1, w) if m == 0 else bessel_I(m - 1, w)
    i_hi = bessel_I(m + 1, w)
    return np.array(
        [
            [lam, 0.0, m * r0 ** (m - 1)],
            [-(params.gamma / r0 ** 2 * (m * m - 1) + lam * params.chi_u * fu),
             -params.chi_c * fp * i_m,
             r0 ** m],
            [-lam * params.a * c0, 0.5 * sq * (i_lo + i_hi), 0.0],
        ],
        dtype=complex,
    )


def eigenmode_residual(mode: EigenMode, params: ModelParams, f_act: ForceLaw,
                       f_und: ForceLaw) -> float:
    """Largest row residual of the 3x3 system, each row normalised."""
    mat = _eigen_matrix(mode.m, mode.lam, params, f_act, f_und)
    vec = np.array([mode.rho_hat, mode.c_hat, mode.P_hat])
    worst = 0.0
    for row in mat:
        scale = np.max(np.abs(row)) * np.max(np.abs(vec))
        if scale == 0.0:
            continue
        worst = max(worst, abs(row @ vec) / scale)
    return worst


def zero_mode_basis(m: int, params: ModelParams, f_act: ForceLaw,
                    f_und: ForceLaw) -> list[EigenMode]:
    """Neutral (lambda = 0) eigenmodes of mode m.

    At lambda = 0 the radial profiles degenerate to powers of r, and the
    algebra reduces to: P_hat forced to zero for m >= 1 by the kinematic
    row, c_hat tied to P_hat by the flux row, and the pressure row closing
    the system.  The result: a two-dimensional kernel for m = 0 (area and
    concentration modes), the translation mode for m = 1, and nothing for
    m >= 2.  Each returned basis vector is verified against the assembled
    constraint matrix.
    """
    c0 = params.c0
    fp = float(f_act.d1(c0))
    dim = zero_eigenspace_dimension(m, params, f_act, f_und)
    if dim == 0:
        return []
    if m == 0:
        basis = [
            EigenMode(0, 0j, 1.0, 0.0, -params.gamma / params.R0 ** 2),
            EigenMode(0, 0j, 0.0, 1.0, params.chi_c * fp),
        ]
    else:
        basis = [EigenMode(1, 0j, 1.0, 0.0, 0.0)]
    mat = _zero_constraint_matrix(m, params, f_act, f_und)
    for mode in basis:
        vec = np.array([mode.rho_hat, mode.c_hat, mode.P_hat])
        resid = np.max(np.abs(mat @ vec)) / max(np.max(np.abs(mat)), 1.0)
        if resid > 1e-12:
            raise ResidualError(
                f"zero-mode basis fails the m={m} constraint rows ({resid:.2e})"
            )
    return basis


def _zero_constraint_matrix(m: int, params: ModelParams, f_act: ForceLaw,
                            f_und: ForceLaw) -> np.ndarray:
    """Constraints on (rho_hat, c_hat, P_hat) at lambda = 0.

    Uses the regular lambda -> 0 profiles c(r) = c_hat r^m, P(r) = P_hat r^m;
    rows: kinematic (radial pressure gradient vanishes), marker flux, and
    the pressure boundary condition.
    """
    r0 = params.R0
    c0 = params.c0
    fp = float(f_act.d1(c0))
    fu = float(f_und.d1(0.0))
    return np.array(
        [
            [0.0, 0.0, float(m)],
            [0.0, float(m), -m * params.a * c0],
            [params.gamma / r0 ** 2 * (m * m - 1),
             params.chi_c * fp * r0 ** m,
             -(r0 ** m + params.chi_u * fu * m * r0 ** (m - 1))],
        ]
    )


def zero_eigenspace_dimension(m: int, params: ModelParams, f_act: ForceLaw,
                              f_und: ForceLaw) -> int:
    """Dimension of the genuine lambda = 0 eigenspace of mode m."""
    mat = _zero_constraint_matrix(m, params, f_act, f_und)
    svals = np.linalg.svd(mat, compute_uv=False)
    tol = 1e-10 * max(1.0, svals[0] if svals.size else 0.0)
    rank = int(np.sum(svals > tol))
    return 3 - rank


def eigenmode(m: int, lam: complex, params: ModelParams, f_act: ForceLaw,
              f_und: ForceLaw) -> list[EigenMode]:
    """Eigenmode amplitudes for a located growth rate.

    For lam = 0 this returns the closed-form neutral basis (two modes for
    m = 0, one for m = 1, none for m >= 2).  Otherwise lam must satisfy the
    dispersion residual check; the returned single mode is the null vector
    of the 3x3 system, normalised so max(|rho_hat|, |c_hat|, |P_hat|) = 1
    with the largest component rotated to the positive real axis.

    Raises
    ------
    ResidualError
        If lam is not a root of the mode-m dispersion function.
    """
    lam = complex(lam)
    if abs(lam) <= ZERO_RADIUS:
        return zero_mode_basis(m, params, f_act, f_und)
    val, scale = dispersion_kernel(m, lam, params, f_act, f_und)
    if abs(val) > 100.0 * RESIDUAL_TOL * max(scale, 1e-300):
        raise ResidualError(
            f"lambda = {lam!r} is not a root of the mode-{m} dispersion "
            f"function (normalised residual {abs(val) / max(scale, 1e-300):.2e})"
        )
    mat = _eigen_matrix(m, lam, params, f_act, f_und)
    # Normalise rows to balance scales before extracting the null vector.
    norms = np.max(np.abs(mat), axis=1)
    norms[norms == 0.0] = 1.0
    _, _, vh = np.linalg.svd(mat / norms[:, None])
    vec = vh[-1].conj()
    idx = int(np.argmax(np.abs(vec)))
    vec = vec / vec[idx]
    vec = vec / np.max(np.abs(vec))
    return [EigenMode(m, lam, complex(vec[0]), complex(vec[1]), complex(vec[2]))]


# ---------------------------------------------------------------------------
# Sweeps, threshold location, classification.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    """Principal growth rate at one active-strength value."""

    chi_c: float
    principal: complex | None
    ambiguous: bool


def principal_eigenvalue_sweep(m: int, params: ModelParams, f_act: ForceLaw,
                               f_und: ForceLaw, chi_c_grid, region=None,
                               seeds=DEFAULT_SEEDS) -> list[SweepPoint]:
    """Principal growth rate of mode m along an ascending chi_c grid.

    Tracking between consecutive grid points is by nearest-neighbour
    matching; a point is flagged ambiguous when the two largest-real-part
    roots are closer than the dedup tolerance or when the matched root
    jumps by more than 5x the recent path scale.
    """
    grid = [float(c) for c in chi_c_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("chi_c grid must be strictly ascending")
    out: list[SweepPoint] = []
    prev: complex | None = None
    prev_jump = None
    for chi in grid:
        p = params.with_chi_c(chi)
        spec = mode_spectrum(m, p, f_act, f_und, region=region, seeds=seeds)
        principal = spec.principal
        ambiguous = False
        if principal is not None and len(spec.roots) >= 2:
            ordered = sorted(spec.roots, key=lambda z: -z.real)
            if abs(ordered[0] - ordered[1]) <= 1e-6:
                ambiguous = True
        if principal is not None and prev is not None:
            jump = abs(principal - prev)
            scale = max(prev_jump or 0.0, 1e-3 * (1.0 + abs(prev)))
            if jump > 5.0 * scale and prev_jump is not None:
                ambiguous = True
            prev_jump = jump
        prev = principal
        out.append(SweepPoint(chi_c=chi, principal=principal, ambiguous=ambiguous))
    return out


def _principal_root(m, params, f_act, f_und, warm=None, region=None,
                    seeds=DEFAULT_SEEDS):
    """Principal root of mode m, warm-started when a previous root is known."""
    if warm is not None:
        _, _, fun_scaled = _kernel_closures(m, params, f_act, f_und)
        z, rel = _polish_root(fun_scaled, warm)
        if rel <= 1e-11:
            return z
    spec = mode_spectrum(m, params, f_act, f_und, region=region, seeds=seeds)
    if spec.principal is None:
        raise SolverError(f"no mode-{m} roots located in the search region")
    return spec.principal


def refine_threshold(params: ModelParams, f_act: ForceLaw, f_und: ForceLaw,
                     *, m: int = 1, bracket=None, tol: float = 1e-8,
                     region=None) -> float:
    """Active strength where the principal mode-m growth rate crosses zero.

    Bisection on the sign of Re(principal root), warm-starting the root
    polish across bisection steps; the bracket defaults to an interval
    around the closed-form threshold, expanded until the sign changes.

    Returns the crossing to ``tol`` absolute in chi_c.
    """
    if bracket is None:
        guess = chi_c_star(params, f_act, f_und)
        lo, hi = 0.5 * guess, 1.5 * guess
    else:
        lo, hi = map(float, bracket)

    warm_cache: dict[str, complex] = {}

    def principal_re(chi):
        p = params.with_chi_c(chi)
        root = _principal_root(m, p, f_act, f_und, warm=warm_cache.get("z"),
                               region=region)
        warm_cache["z"] = root
        return root.real

    f_lo = principal_re(lo)
    f_hi = principal_re(hi)
    grow = 0
    while f_lo * f_hi > 0.0:
        grow += 1
        if grow > 40:
            raise SolverError("could not bracket the stability threshold")
        if f_lo > 0.0:
            lo = max(lo / 1.6, 1e-12)
            f_lo = principal_re(lo)
        else:
            hi *= 1.6
            f_hi = principal_re(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = principal_re(mid)
        if fm == 0.0:
            return mid
        if f_lo * fm < 0.0:
            hi, f_hi = mid, fm
        else:
            lo, f_lo = mid, fm
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class StabilityReport:
    """Verdict of the modal stability scan."""

    stable: bool
    margin: float
    margin_mode: int
    spectra: tuple


def classify(params: ModelParams, f_act: ForceLaw, f_und: ForceLaw,
             m_max: int = 8, region=None, seeds=DEFAULT_SEEDS) -> StabilityReport:
    """Stable/unstable verdict over modes 0..m_max.

    Unstable iff any located nonzero root has Re(lambda) > CLASSIFY_TOL;
    the margin is the largest real part over all located nonzero roots.
    The curvature term stiffens high modes, which is what makes a finite
    m_max meaningful; the margin report shows how far below zero the
    higher modes sit.
    """
    if m_max < 2:
        raise ValueError("m_max must be at least 2")
    spectra = []
    margin = -math.inf
    margin_mode = -1
    for m in range(m_max + 1):
        spec = mode_spectrum(m, params, f_act, f_und, region=region, seeds=seeds)
        spectra.append(spec)
        if spec.principal is not None and spec.principal.real > margin:
            margin = spec.principal.real
            margin_mode = m
    return StabilityReport(
        stable=not margin > CLASSIFY_TOL,
        margin=margin,
        margin_mode=margin_mode,
        spectra=tuple(spectra),
    )


def threshold_slope_report(params: ModelParams, f_act: ForceLaw,
                           f_und: ForceLaw, *, delta: float = 1e-4) -> dict:
    """Measure d Re(lambda_1)/d chi_c at the threshold and identify which
    closed-form linearisation it matches.

    Two closed forms circulate for the near-threshold principal rate: the
    quadratic-in-z expansion of the mode-1 dispersion function gives slope
    4 a c0 f_act'(c0) / (R0^2 * (1 + chi_u f_und'(0)/R0)), while the
    displayed leading-order rate omits the undercooling factor in the
    denominator (and flips its sign inside the bracket).  The two coincide
    when chi_u = 0.  The slope is fitted numerically; nothing is assumed.
    """
    star = chi_c_star(params, f_act, f_und)
    c0 = params.c0
    fp = float(f_act.d1(c0))
    fu = float(f_und.d1(0.0))
    b1 = 1.0 + params.chi_u * fu / params.R0
    base = 4.0 * params.a * c0 * fp / params.R0 ** 2
    candidates = {
        "quadratic_expansion": base / b1,
        "displayed_leading_rate": base,
    }
    h = delta * star
    warm = None
    rates = {}
    for sign in (+1.0, -1.0):
        p = params.with_chi_c(star + sign * h)
        root = _principal_root(1, p, f_act, f_und, warm=warm)
        warm = root
        rates[sign] = root.real
    slope = (rates[1.0] - rates[-1.0]) / (2.0 * h)
    rel = {
        name: abs(slope - cand) / abs(cand) for name, cand in candidates.items()
    }
    if abs(candidates["quadratic_expansion"]
           - candidates["displayed_leading_rate"]) < 1e-12 * abs(base):
        verdict = "indistinguishable"
    else:
        verdict = min(rel, key=rel.get)
    return {
        "chi_c_star": star,
        "numeric_slope": slope,
        "candidates": candidates,
        "relative_mismatch": rel,
        "verdict": verdict,
    }
