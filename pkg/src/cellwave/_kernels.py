"""Low-level numeric kernels, JIT-compiled when numba is available.

The hot inner loops of the package live here: modified-Bessel evaluation for
complex arguments (ascending series plus Miller downward recurrence), the real
Bessel-J evaluation used by the root oracle, and the per-mode dispersion
kernel.  Every kernel is written in a numba-compatible subset of Python; when
numba is importable and ``CELLWAVE_NO_NUMBA`` is unset the functions are
compiled with ``@njit``, otherwise the same code runs as plain Python/numpy.

``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

from __future__ import annotations

import cmath
import os

import numpy as np

#: Radius below which the ascending power series is used for I_m(z), J_m(x).
SERIES_RADIUS = 4.0

#: Radius (in u = R0^2 * z) below which the even series is used for psi_tilde.
PSI_SERIES_RADIUS = 16.0


def numba_requested() -> bool:
    """True unless the environment selects the pure-numpy fallback."""
    flag = os.environ.get("CELLWAVE_NO_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes")


def _load_numba():
    if not numba_requested():
        return None
    try:
        import numba
    except ImportError:
        return None
    return numba


_NUMBA = _load_numba()
NUMBA_ENABLED = _NUMBA is not None


def _jit(fn):
    if _NUMBA is not None:
        return _NUMBA.njit(cache=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# Modified Bessel functions I_m for complex argument.
# ---------------------------------------------------------------------------

def _iv_series_impl(m, z):
    """Ascending series for I_m(z); accurate for |z| <= SERIES_RADIUS."""
    half = 0.5 * z
    term = 1.0 + 0.0j
    for j in range(1, m + 1):
        term *= half / j
    total = term
    u = half * half
    k = 0
    while k < 300:
        k += 1
        term *= u / (k * (k + m))
        total += term
        if abs(term) <= 1e-18 * (abs(total) + 1e-300):
            break
    return total


iv_series = _jit(_iv_series_impl)


def _iv_chain_impl(mmax, z):
    """I_0(z)..I_mmax(z) by Miller's downward recurrence; requires Re z >= 0.

    The recurrence I_{k-1} = I_{k+1} + (2k/z) I_k is run down from a start
    order well above max(mmax, |z|) and normalised with
    e^z = I_0 + 2 * sum_{k>=1} I_k, which is cancellation-free for Re z >= 0.
    """
    out = np.zeros(mmax + 1, dtype=np.complex128)
    az = abs(z)
    start = mmax + 40 + int(2.0 * az)
    two_over_z = 2.0 / z
    ip = 0.0 + 0.0j          # unnormalised I_{k+1}
    ic = 1e-250 + 0.0j       # unnormalised I_k, k = start
    ssum = 2.0 * ic
    for k in range(start, 0, -1):
        im1 = ip + k * two_over_z * ic
        ip = ic
        ic = im1
        if k - 1 >= 1:
            ssum += 2.0 * im1
        else:
            ssum += im1
        if k - 1 <= mmax:
            out[k - 1] = im1
        if abs(im1.real) > 1e250 or abs(im1.imag) > 1e250:
            ip *= 1e-250
            ic *= 1e-250
            ssum *= 1e-250
            for i in range(mmax + 1):
                out[i] *= 1e-250
    factor = cmath.exp(z) / ssum
    for i in range(mmax + 1):
        out[i] *= factor
    return out


iv_chain = _jit(_iv_chain_impl)


def _bessel_i_impl(m, z):
    """I_m(z) for integer m >= 0 and complex z (parity-reduced dispatch)."""
    sign = 1.0
    if z.real < 0.0:
        z = -z
        if m % 2 == 1:
            sign = -1.0
    if abs(z) <= SERIES_RADIUS:
        return sign * iv_series(m, z)
    return sign * iv_chain(m, z)[m]


bessel_i_kernel = _jit(_bessel_i_impl)


def _psi_tilde_impl(k, u):
    """Entire even part of I_k: psi_k(u) = I_k(w)/w^k with u = w^2.

    Branch-free in u, which is what makes the dispersion kernel single
    valued across the negative real axis.
    """
    if abs(u) <= PSI_SERIES_RADIUS:
        term = (0.5 ** k) + 0.0j
        for j in range(1, k + 1):
            term /= j
        total = term
        q = 0.25 * u
        j = 0
        while j < 300:
            j += 1
            term *= q / (j * (j + k))
            total += term
            if abs(term) <= 1e-18 * (abs(total) + 1e-300):
                break
        return total
    w = cmath.sqrt(u)        # principal root: Re w >= 0, as the chain needs
    return iv_chain(k, w)[k] / w ** k


psi_tilde = _jit(_psi_tilde_impl)


def _phi_mode_impl(m, z, r0, coef_c, b_m, d_m):
    """Dispersion kernel for mode m with the structural zero factored out.

    Returns (value, scale).  The scale is the magnitude of the largest
    additive piece, measured one level inside the Bessel bracket so that it
    stays a meaningful residual normaliser at roots and when a top-level
    term vanishes identically (m = 0, or zero active strength).  The
    nonzero roots of the mode-m dispersion function are exactly the roots
    of this kernel.
    """
    u = r0 * r0 * z
    if m == 0:
        val = -r0 * psi_tilde(1, u)
        sc = r0 * abs(psi_tilde(0, u))
        if abs(val) > sc:
            sc = abs(val)
        return val, sc
    pm1 = psi_tilde(m - 1, u)
    pm = psi_tilde(m, u)
    pp1 = psi_tilde(m + 1, u)
    if m == 1:
        t1 = -r0 * coef_c * pm
        bracket = 0.5 * b_m
    else:
        t1 = m * coef_c * (-r0) ** m * z * pm
        bracket = 0.5 * (-r0) ** (m - 1) * (z * b_m + d_m)
    t2 = bracket * (pm1 + u * pp1)
    sc = abs(bracket) * (abs(pm1) + abs(u * pp1))
    if abs(t1) > sc:
        sc = abs(t1)
    return t1 + t2, sc


phi_mode = _jit(_phi_mode_impl)


def _phi_mode_grid_impl(m, zs, r0, coef_c, b_m, d_m):
    """Vectorised phi_mode over a flat complex array (seed screening)."""
    n = zs.shape[0]
    vals = np.empty(n, dtype=np.complex128)
    scales = np.empty(n, dtype=np.float64)
    for i in range(n):
        v, s = phi_mode(m, zs[i], r0, coef_c, b_m, d_m)
        vals[i] = v
        scales[i] = s
    return vals, scales


phi_mode_grid = _jit(_phi_mode_grid_impl)


# ---------------------------------------------------------------------------
# Real Bessel J for the root oracle.
# ---------------------------------------------------------------------------

def _jv_series_impl(m, x):
    """Alternating ascending series for J_m(x); accurate for |x| <= 4."""
    half = 0.5 * x
    term = 1.0
    for j in range(1, m + 1):
        term *= half / j
    total = term
    u = -half * half
    k = 0
    while k < 300:
        k += 1
        term *= u / (k * (k + m))
        total += term
        if abs(term) <= 1e-18 * (abs(total) + 1e-300):
            break
    return total


jv_series = _jit(_jv_series_impl)


def _jv_chain_impl(mmax, x):
    """J_0(x)..J_mmax(x) by Miller's recurrence; requires x > 0.

    Normalised with 1 = J_0 + 2 * sum_{k>=1} J_{2k}.
    """
    out = np.zeros(mmax + 1, dtype=np.float64)
    start = mmax + 40 + int(1.5 * x)
    if start % 2 == 1:
        start += 1
    jp = 0.0
    jc = 1e-250
    ssum = 2.0 * jc          # start order is even and >= 2
    for k in range(start, 0, -1):
        jm1 = (2.0 * k / x) * jc - jp
        jp = jc
        jc = jm1
        if (k - 1) % 2 == 0:
            if k - 1 == 0:
                ssum += jm1
            else:
                ssum += 2.0 * jm1
        if k - 1 <= mmax:
            out[k - 1] = jm1
        if abs(jm1) > 1e250:
            jp *= 1e-250
            jc *= 1e-250
            ssum *= 1e-250
            for i in range(mmax + 1):
                out[i] *= 1e-250
    for i in range(mmax + 1):
        out[i] /= ssum
    return out


jv_chain = _jit(_jv_chain_impl)


def _bessel_j_impl(m, x):
    """J_m(x) for integer m >= 0 and real x."""
    sign = 1.0
    if x < 0.0:
        x = -x
        if m % 2 == 1:
            sign = -1.0
    if x == 0.0:
        return 1.0 if m == 0 else 0.0
    if x <= SERIES_RADIUS:
        return sign * jv_series(m, x)
    return sign * jv_chain(m, x)[m]


bessel_j_kernel = _jit(_bessel_j_impl)
