"""Hot numerical kernels.

Every function here is written in the subset of Python/numpy that numba can
compile. When numba is importable and ``HPL_DISABLE_NUMBA`` is unset (or
``0``), the functions are compiled with ``@njit``; otherwise the very same
source runs as plain Python on numpy arrays. Both paths are exercised by the
test-suite and compared in ``benchmarks/bench_kernels.py``.

Conventions: modes are 0-based inside this module, quadratures are
interleaved (x0, p0, x1, p1, ...), the vacuum covariance is I/4.
"""

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None


def _numba_requested():
    flag = os.environ.get("HPL_DISABLE_NUMBA", "0").strip().lower()
    return flag in ("", "0", "false", "no")


USE_NUMBA = numba is not None and _numba_requested()


def kernel(fn):
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


# gate kind codes, in the canonical order R, S1, B, S2
PHASE = 0
SQUEEZE1 = 1
BEAMSPLITTER = 2
SQUEEZE2 = 3

# heralding scheme codes
NO_HERALD = 0
CLICK = 1
SINGLE_PHOTON = 2

SP_TAP_ANGLE = 0.1
EPS = 2.220446049250313e-16

# Gauss-Kronrod 15-point nodes/weights (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# y-range truncation: 10 standard deviations of the e^{-y^2} weight
Y_TRUNC = 10.0 / math.sqrt(2.0)
MAX_SUBDIVISIONS = 10000
# initial partition width in y; the integrand's Gaussian weight has std 1/sqrt(2)
INITIAL_PIECE = 1.0


# ---------------------------------------------------------------- gates


@kernel
def gate_block(kind, param):
    """Non-trivial block of a gate's symplectic matrix (2x2 or 4x4)."""
    if kind == PHASE:
        c = math.cos(param)
        s = math.sin(param)
        blk = np.empty((2, 2))
        blk[0, 0] = c
        blk[0, 1] = s
        blk[1, 0] = -s
        blk[1, 1] = c
        return blk
    if kind == SQUEEZE1:
        blk = np.zeros((2, 2))
        blk[0, 0] = math.exp(-param)
        blk[1, 1] = math.exp(param)
        return blk
    blk = np.zeros((4, 4))
    if kind == BEAMSPLITTER:
        c = math.cos(param)
        s = math.sin(param)
        for k in range(2):
            blk[k, k] = c
            blk[2 + k, 2 + k] = c
            blk[k, 2 + k] = s
            blk[2 + k, k] = -s
    else:
        ch = math.cosh(param)
        sh = math.sinh(param)
        for k in range(2):
            # off-diagonal block is -sinh(r) * sigma_z
            z = 1.0 if k == 0 else -1.0
            blk[k, k] = ch
            blk[2 + k, 2 + k] = ch
            blk[k, 2 + k] = -sh * z
            blk[2 + k, k] = -sh * z
    return blk


@kernel
def _block_indices(kind, i, j):
    if kind == PHASE or kind == SQUEEZE1:
        idx = np.empty(2, dtype=np.int64)
        idx[0] = 2 * i
        idx[1] = 2 * i + 1
        return idx
    idx = np.empty(4, dtype=np.int64)
    idx[0] = 2 * i
    idx[1] = 2 * i + 1
    idx[2] = 2 * j
    idx[3] = 2 * j + 1
    return idx


@kernel
def apply_block(sigma, mu, idx, blk):
    """In place: sigma <- M sigma M^T, mu <- M mu for M = identity except blk on idx."""
    d = sigma.shape[0]
    k = idx.shape[0]
    rows = np.empty((k, d))
    for a in range(k):
        for col in range(d):
            acc = 0.0
            for b in range(k):
                acc += blk[a, b] * sigma[idx[b], col]
            rows[a, col] = acc
    for a in range(k):
        for col in range(d):
            sigma[idx[a], col] = rows[a, col]
    cols = np.empty((d, k))
    for row in range(d):
        for a in range(k):
            acc = 0.0
            for b in range(k):
                acc += sigma[row, idx[b]] * blk[a, b]
            cols[row, a] = acc
    for row in range(d):
        for a in range(k):
            sigma[row, idx[a]] = cols[row, a]
    tmp = np.empty(k)
    for a in range(k):
        acc = 0.0
        for b in range(k):
            acc += blk[a, b] * mu[idx[b]]
        tmp[a] = acc
    for a in range(k):
        mu[idx[a]] = tmp[a]


@kernel
def apply_gate_inplace(sigma, mu, kind, i, j, param):
    apply_block(sigma, mu, _block_indices(kind, i, j), gate_block(kind, param))


@kernel
def simulate(n_modes, kinds, mode_a, mode_b, params):
    """Covariance and mean of a gate sequence applied to the N-mode vacuum."""
    d = 2 * n_modes
    sigma = np.eye(d) * 0.25
    mu = np.zeros(d)
    for g in range(kinds.shape[0]):
        apply_gate_inplace(sigma, mu, kinds[g], mode_a[g], mode_b[g], params[g])
    return sigma, mu


@kernel
def loss_inplace(sigma, mu, m, tau):
    """Pure-loss channel of transmissivity tau on mode m (closed form)."""
    d = sigma.shape[0]
    st = math.sqrt(tau)
    for a in range(2 * m, 2 * m + 2):
        mu[a] *= st
        for col in range(d):
            if col != 2 * m and col != 2 * m + 1:
                sigma[a, col] *= st
                sigma[col, a] *= st
    for a in range(2 * m, 2 * m + 2):
        for b in range(2 * m, 2 * m + 2):
            sigma[a, b] *= tau
        sigma[a, a] += 0.25 * (1.0 - tau)


# ---------------------------------------------------------------- heralding


@kernel
def delete_mode(sigma, mu, m):
    d = sigma.shape[0]
    out_s = np.empty((d - 2, d - 2))
    out_m = np.empty(d - 2)
    r = 0
    for a in range(d):
        if a == 2 * m or a == 2 * m + 1:
            continue
        out_m[r] = mu[a]
        c = 0
        for b in range(d):
            if b == 2 * m or b == 2 * m + 1:
                continue
            out_s[r, c] = sigma[a, b]
            c += 1
        r += 1
    return out_s, out_m


@kernel
def no_click_gaussian(sigma, mu, m, eta):
    """No-click conditioning of one Gaussian on mode m.

    Returns the reduced (sigma, mu) and the no-click probability. Uses the
    Woodbury form of (Sigma^-1 + F)^-1 so only a 2x2 system is solved.
    """
    f = 4.0 * eta / (2.0 - eta)
    i0 = 2 * m
    i1 = 2 * m + 1
    a00 = 1.0 + f * sigma[i0, i0]
    a01 = f * sigma[i0, i1]
    a10 = f * sigma[i1, i0]
    a11 = 1.0 + f * sigma[i1, i1]
    det_a = a00 * a11 - a01 * a10
    if not det_a > 0.0:
        return sigma[:0, :0].copy(), mu[:0].copy(), -1.0
    # K = f * A^{-1}
    k00 = f * a11 / det_a
    k01 = -f * a01 / det_a
    k10 = -f * a10 / det_a
    k11 = f * a00 / det_a
    m0 = mu[i0]
    m1 = mu[i1]
    quad = m0 * (k00 * m0 + k01 * m1) + m1 * (k10 * m0 + k11 * m1)
    prob = 2.0 / (2.0 - eta) / math.sqrt(det_a) * math.exp(-0.5 * quad)
    d = sigma.shape[0]
    new_s = sigma.copy()
    new_m = mu.copy()
    for a in range(d):
        ca0 = sigma[a, i0]
        ca1 = sigma[a, i1]
        t0 = ca0 * k00 + ca1 * k10
        t1 = ca0 * k01 + ca1 * k11
        new_m[a] -= t0 * m0 + t1 * m1
        for b in range(d):
            new_s[a, b] -= t0 * sigma[i0, b] + t1 * sigma[i1, b]
    # symmetrise against rounding
    for a in range(d):
        for b in range(a + 1, d):
            v = 0.5 * (new_s[a, b] + new_s[b, a])
            new_s[a, b] = v
            new_s[b, a] = v
    out_s, out_m = delete_mode(new_s, new_m, m)
    return out_s, out_m, prob


@kernel
def lcg_no_click(weights, means, covs, m, eta):
    """No-click on mode m of every component; returns (w, means, covs, p)."""
    n_comp = weights.shape[0]
    d = covs.shape[1]
    out_w = np.empty(n_comp)
    out_m = np.empty((n_comp, d - 2))
    out_c = np.empty((n_comp, d - 2, d - 2))
    total = 0.0
    for k in range(n_comp):
        s, mu, p = no_click_gaussian(covs[k], means[k], m, eta)
        if p < 0.0:
            return out_w, out_m, out_c, np.nan
        out_w[k] = weights[k] * p
        out_m[k] = mu
        out_c[k] = s
        total += weights[k] * p
    if total > 0.0:
        for k in range(n_comp):
            out_w[k] /= total
    return out_w, out_m, out_c, total


@kernel
def lcg_click(weights, means, covs, m, eta):
    """Click on mode m: each component k splits into (traced, no-click)."""
    n_comp = weights.shape[0]
    d = covs.shape[1]
    out_w = np.empty(2 * n_comp)
    out_m = np.empty((2 * n_comp, d - 2))
    out_c = np.empty((2 * n_comp, d - 2, d - 2))
    p_none = 0.0
    for k in range(n_comp):
        s, mu, p = no_click_gaussian(covs[k], means[k], m, eta)
        if p < 0.0:
            return out_w, out_m, out_c, np.nan
        ts, tm = delete_mode(covs[k], means[k], m)
        out_w[2 * k] = weights[k]
        out_m[2 * k] = tm
        out_c[2 * k] = ts
        out_w[2 * k + 1] = -weights[k] * p
        out_m[2 * k + 1] = mu
        out_c[2 * k + 1] = s
        p_none += weights[k] * p
    p_click = 1.0 - p_none
    if p_click > 0.0:
        for k in range(2 * n_comp):
            out_w[k] /= p_click
    return out_w, out_m, out_c, p_click


@kernel
def lcg_append_vacuum(means, covs):
    n_comp = covs.shape[0]
    d = covs.shape[1]
    out_m = np.zeros((n_comp, d + 2))
    out_c = np.zeros((n_comp, d + 2, d + 2))
    for k in range(n_comp):
        out_m[k, :d] = means[k]
        out_c[k, :d, :d] = covs[k]
        out_c[k, d, d] = 0.25
        out_c[k, d + 1, d + 1] = 0.25
    return out_m, out_c


@kernel
def lcg_single_photon(weights, means, covs, m, eta):
    """Weak-tap herald: vacuum ancilla, B(0.1), click on tap, no-click on mode.

    Returns (w, means, covs, p_click, p_no_click).
    """
    am, ac = lcg_append_vacuum(means, covs)
    anc = ac.shape[1] // 2 - 1
    blk = gate_block(BEAMSPLITTER, SP_TAP_ANGLE)
    idx = _block_indices(BEAMSPLITTER, m, anc)
    for k in range(ac.shape[0]):
        apply_block(ac[k], am[k], idx, blk)
    w1, m1, c1, p1 = lcg_click(weights, am, ac, anc, eta)
    if not p1 > 0.0:
        return w1, m1, c1, p1, 0.0
    w2, m2, c2, p2 = lcg_no_click(w1, m1, c1, m, eta)
    return w2, m2, c2, p1, p2


# ---------------------------------------------------------------- quadrature


@kernel
def _erf_integrand(y, a_hi, a_lo, c):
    return math.exp(-y * y) * (math.erf(a_hi - c * y) - math.erf(a_lo - c * y))


@kernel
def _qk15(a, b, a_hi, a_lo, c):
    centr = 0.5 * (a + b)
    hlgth = 0.5 * (b - a)
    dhlgth = abs(hlgth)
    fc = _erf_integrand(centr, a_hi, a_lo, c)
    resg = fc * _WG[3]
    resk = fc * _WGK[7]
    resabs = abs(resk)
    fv1 = np.empty(7)
    fv2 = np.empty(7)
    for j in range(3):
        jtw = 2 * j + 1
        absc = hlgth * _XGK[jtw]
        f1 = _erf_integrand(centr - absc, a_hi, a_lo, c)
        f2 = _erf_integrand(centr + absc, a_hi, a_lo, c)
        fv1[jtw] = f1
        fv2[jtw] = f2
        resg += _WG[j] * (f1 + f2)
        resk += _WGK[jtw] * (f1 + f2)
        resabs += _WGK[jtw] * (abs(f1) + abs(f2))
    for j in range(4):
        jtwm1 = 2 * j
        absc = hlgth * _XGK[jtwm1]
        f1 = _erf_integrand(centr - absc, a_hi, a_lo, c)
        f2 = _erf_integrand(centr + absc, a_hi, a_lo, c)
        fv1[jtwm1] = f1
        fv2[jtwm1] = f2
        resk += _WGK[jtwm1] * (f1 + f2)
        resabs += _WGK[jtwm1] * (abs(f1) + abs(f2))
    reskh = resk * 0.5
    resasc = _WGK[7] * abs(fc - reskh)
    for j in range(7):
        resasc += _WGK[j] * (abs(fv1[j] - reskh) + abs(fv2[j] - reskh))
    result = resk * hlgth
    resabs *= dhlgth
    resasc *= dhlgth
    abserr = abs((resk - resg) * hlgth)
    if resasc != 0.0 and abserr != 0.0:
        abserr = resasc * min(1.0, (200.0 * abserr / resasc) ** 1.5)
    if resabs > 2.2250738585072014e-308 / (50.0 * EPS):
        abserr = max(50.0 * EPS * resabs, abserr)
    return result, abserr, resabs


@kernel
def _grow(arr, cap):
    out = np.empty(cap)
    out[:arr.shape[0]] = arr
    return out


@kernel
def adaptive_erf_integral(y_lo, y_hi, a_hi, a_lo, c, tol):
    """Adaptive GK15 of exp(-y^2)[erf(a_hi - c y) - erf(a_lo - c y)] on [y_lo, y_hi].

    Bisects the interval with the largest error estimate until the summed
    estimate is below ``tol`` (or at the rounding floor), capped at
    MAX_SUBDIVISIONS intervals. Returns (value, error_estimate, n_intervals).
    """
    if not y_hi > y_lo:
        return 0.0, 0.0, 0
    n0 = int(math.ceil((y_hi - y_lo) / INITIAL_PIECE))
    if n0 < 1:
        n0 = 1
    cap = max(32, 2 * n0)
    lo = np.empty(cap)
    hi = np.empty(cap)
    val = np.empty(cap)
    err = np.empty(cap)
    width = (y_hi - y_lo) / n0
    total = 0.0
    total_err = 0.0
    for k in range(n0):
        a = y_lo + k * width
        b = y_hi if k == n0 - 1 else y_lo + (k + 1) * width
        r, e, _ = _qk15(a, b, a_hi, a_lo, c)
        lo[k] = a
        hi[k] = b
        val[k] = r
        err[k] = e
        total += r
        total_err += e
    n = n0
    while total_err > tol and n < MAX_SUBDIVISIONS:
        if n == cap:
            cap = min(2 * cap, MAX_SUBDIVISIONS)
            lo = _grow(lo, cap)
            hi = _grow(hi, cap)
            val = _grow(val, cap)
            err = _grow(err, cap)
        worst = 0
        for k in range(1, n):
            if err[k] > err[worst]:
                worst = k
        a = lo[worst]
        b = hi[worst]
        mid = 0.5 * (a + b)
        if not (a < mid < b):
            break
        r1, e1, _ = _qk15(a, mid, a_hi, a_lo, c)
        r2, e2, _ = _qk15(mid, b, a_hi, a_lo, c)
        total += r1 + r2 - val[worst]
        total_err += e1 + e2 - err[worst]
        hi[worst] = mid
        val[worst] = r1
        err[worst] = e1
        lo[n] = mid
        hi[n] = b
        val[n] = r2
        err[n] = e2
        n += 1
        # every interval is at its rounding floor: nothing left to gain
        floor = 0.0
        for k in range(n):
            floor += 50.0 * EPS * abs(val[k])
        if total_err <= 2.0 * floor + 1e-300:
            break
    # recompute the sum to shed accumulated update rounding
    total = 0.0
    total_err = 0.0
    for k in range(n):
        total += val[k]
        total_err += err[k]
    return total, total_err, n


@kernel
def rect_integral(m1, m2, sa, sb, sc, u1, v1, u2, v2, tol):
    """Bivariate normal mass on [u1,v1]x[u2,v2] via the 1D erf reduction.

    sa, sb are the variances of x1, x2 and sc their covariance. Bounds may be
    +-inf. Returns NaN if the covariance is singular (det <= 1e-300).
    """
    det = sa * sb - sc * sc
    if not (det > 1e-300 and sb > 0.0):
        return np.nan
    sqdet = math.sqrt(det)
    ssb = math.sqrt(sb)
    scale = math.sqrt(2.0 * sb)
    y_lo = (u2 - m2) / scale
    y_hi = (v2 - m2) / scale
    if y_lo < -Y_TRUNC:
        y_lo = -Y_TRUNC
    if y_hi > Y_TRUNC:
        y_hi = Y_TRUNC
    if not y_hi > y_lo:
        return 0.0
    a_hi = ssb * (v1 - m1) / math.sqrt(2.0) / sqdet
    a_lo = ssb * (u1 - m1) / math.sqrt(2.0) / sqdet
    c = sc / sqdet
    pref = 0.5 / math.sqrt(math.pi)
    value, _, _ = adaptive_erf_integral(y_lo, y_hi, a_hi, a_lo, c, tol / pref)
    return pref * value


@kernel
def rotated_marginal(sigma, mu, theta, phi):
    """x-quadrature marginal of a 2-mode Gaussian after R(theta) x R(phi)."""
    c1 = math.cos(theta)
    s1 = math.sin(theta)
    c2 = math.cos(phi)
    s2 = math.sin(phi)
    sa = c1 * c1 * sigma[0, 0] + 2.0 * c1 * s1 * sigma[0, 1] + s1 * s1 * sigma[1, 1]
    sb = c2 * c2 * sigma[2, 2] + 2.0 * c2 * s2 * sigma[2, 3] + s2 * s2 * sigma[3, 3]
    sc = (c1 * c2 * sigma[0, 2] + c1 * s2 * sigma[0, 3]
          + s1 * c2 * sigma[1, 2] + s1 * s2 * sigma[1, 3])
    m1 = c1 * mu[0] + s1 * mu[1]
    m2 = c2 * mu[2] + s2 * mu[3]
    return m1, m2, sa, sb, sc


@kernel
def correlator_kernel(weights, means, covs, theta, phi, rects, mirror, tol):
    """-1 + 2 sum_k w_k sum_rect I_rect. NaN on a degenerate component.

    ``mirror[r] = q`` (q < r) declares rectangle r the point reflection of
    rectangle q; for a zero-mean component its mass is reused.
    """
    acc = 0.0
    n_rect = rects.shape[0]
    masses = np.empty(n_rect)
    for k in range(weights.shape[0]):
        m1, m2, sa, sb, sc = rotated_marginal(covs[k], means[k], theta, phi)
        centred = m1 == 0.0 and m2 == 0.0
        mass = 0.0
        for r in range(n_rect):
            q = mirror[r]
            if centred and q >= 0:
                masses[r] = masses[q]
            else:
                masses[r] = rect_integral(m1, m2, sa, sb, sc, rects[r, 0], rects[r, 1],
                                          rects[r, 2], rects[r, 3], tol)
            mass += masses[r]
        acc += weights[k] * mass
    return -1.0 + 2.0 * acc


@kernel
def chsh_kernel(weights, means, covs, angles, rects, mirror, tol):
    """Returns (score, E00, E01, E10, E11) for angles = (th0, th1, ph0, ph1)."""
    e00 = correlator_kernel(weights, means, covs, angles[0], angles[2], rects, mirror, tol)
    e01 = correlator_kernel(weights, means, covs, angles[0], angles[3], rects, mirror, tol)
    e10 = correlator_kernel(weights, means, covs, angles[1], angles[2], rects, mirror, tol)
    e11 = correlator_kernel(weights, means, covs, angles[1], angles[3], rects, mirror, tol)
    return abs(e00 + e01 + e10 - e11), e00, e01, e10, e11


# ---------------------------------------------------------------- pipeline

STATUS_OK = 0
STATUS_HERALD_FAILED = 1
STATUS_NUMERICAL = 2
# score computed, but sum |w_k| is so large that cancellation leaves it unreliable
STATUS_IMPRECISE = 3
# beyond this total |weight| the correlator keeps fewer than ~3 trustworthy digits
WEIGHT_CEILING = 1e12


@kernel
def herald_pipeline(sigma, mu, schemes, etas, threshold):
    """Herald modes N-1 .. 2 (0-based) of a single Gaussian.

    Returns (weights, means, covs, total_probability, status). A heralded mode
    whose stage probability falls below ``threshold`` aborts with
    STATUS_HERALD_FAILED.
    """
    n_modes = sigma.shape[0] // 2
    weights = np.ones(1)
    means = mu.reshape((1, mu.shape[0])).copy()
    covs = sigma.reshape((1, sigma.shape[0], sigma.shape[1])).copy()
    total = 1.0
    for m in range(n_modes - 1, 1, -1):
        scheme = schemes[m]
        if scheme == NO_HERALD:
            continue
        if scheme == CLICK:
            weights, means, covs, p = lcg_click(weights, means, covs, m, etas[m])
        else:
            weights, means, covs, p1, p2 = lcg_single_photon(weights, means, covs, m, etas[m])
            p = p1 * p2
        if not p == p:
            return weights, means, covs, total, STATUS_NUMERICAL
        if p < threshold:
            return weights, means, covs, total * max(p, 0.0), STATUS_HERALD_FAILED
        total *= p
    return weights, means, covs, total, STATUS_OK


@kernel
def heralded_two_mode(n_modes, kinds, mode_a, mode_b, params, schemes, etas,
                      loss_mode, loss_tau, threshold):
    """Gates -> optional loss -> herald -> drop un-heralded extra modes.

    Returns (weights, means, covs, probability, status).
    """
    sigma, mu = simulate(n_modes, kinds, mode_a, mode_b, params)
    if loss_mode >= 0:
        loss_inplace(sigma, mu, loss_mode, loss_tau)
    w, ms, cs, prob, status = herald_pipeline(sigma, mu, schemes, etas, threshold)
    if status != STATUS_OK:
        return w, ms, cs, prob, status
    while cs.shape[1] > 4:
        n_comp = w.shape[0]
        d = cs.shape[1]
        ns = np.empty((n_comp, d - 2, d - 2))
        nm = np.empty((n_comp, d - 2))
        for k in range(n_comp):
            s, mm = delete_mode(cs[k], ms[k], d // 2 - 1)
            ns[k] = s
            nm[k] = mm
        cs = ns
        ms = nm
    return w, ms, cs, prob, status


@kernel
def evaluate_circuit(n_modes, kinds, mode_a, mode_b, params, schemes, etas,
                     loss_mode, loss_tau, angles, rects, mirror, threshold, tol):
    """Full pipeline: gates -> optional loss -> herald -> CHSH.

    Returns an array (chsh, probability, E00, E01, E10, E11, status). On
    herald failure the state is the 2-mode vacuum, whose score is 0.
    """
    out = np.zeros(7)
    w, ms, cs, prob, status = heralded_two_mode(n_modes, kinds, mode_a, mode_b, params,
                                                schemes, etas, loss_mode, loss_tau, threshold)
    out[1] = prob
    out[6] = status
    if status != STATUS_OK:
        return out
    score, e00, e01, e10, e11 = chsh_kernel(w, ms, cs, angles, rects, mirror, tol)
    if not score == score:
        out[6] = STATUS_NUMERICAL
        return out
    out[0] = score
    if np.abs(w).sum() > WEIGHT_CEILING:
        out[6] = STATUS_IMPRECISE
    out[2] = e00
    out[3] = e01
    out[4] = e10
    out[5] = e11
    return out
