"""Numeric kernels for the per-group geometry features.

These are the hot inner loops: a redesign search evaluates every candidate
group under every axis permutation, so a single 6-point request already
needs 720 x 56 feature vectors. Kernels are compiled with numba's @njit by
default; set GROUPSENSE_NUMBA=0 to run the identical code paths as plain
numpy/Python (slower, dependency-free). `benchmarks/bench_kernels.py`
compares the two.

Feature semantics (pixel space, group g vs complement r):
  slope, error        least-squares line through g; error is the sum of
                      absolute residuals (exact 0 for 2-point groups)
  x_sep, y_sep        min over inter-set pairs of |dx| resp. |dy|
  cvx_overlap         area(hull_g ^ hull_r) / area(hull_g u hull_r); a hull
                      that degenerates to a segment is inflated to a 1 px
                      wide rectangle along the segment, a lone point to a
                      1 x 1 px square
  centroid_distance   ||centroid(g) - centroid(r)|| / plot diagonal
  centroid_diameter   mean distance of g's points to g's centroid
  centroid_ratio      min inter-set point distance / centroid_diameter
                      (the refined numerator, robust when g sits inside r)
"""

from __future__ import annotations

import math
import os

import numpy as np

_flag = os.environ.get("GROUPSENSE_NUMBA", "1").strip().lower()
NUMBA_ENABLED = _flag not in ("0", "false", "no", "off")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dep, but degrade anyway
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):
        """No-op stand-in so the same sources run as pure Python/numpy."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


# Canonical feature order; also the CSV/JSON field order.
FEATURE_NAMES = (
    "slope",
    "error",
    "x_sep",
    "y_sep",
    "cvx_overlap",
    "centroid_distance",
    "centroid_diameter",
    "centroid_ratio",
)
N_FEATURES = len(FEATURE_NAMES)

SLOPE, ERROR, X_SEP, Y_SEP, CVX_OVERLAP, C_DIST, C_DIAM, C_RATIO = range(8)

_BUF = 32  # vertex buffer; convex ^ convex of <= 8-gons stays well under this


@njit(cache=True)
def fit_line(xs, ys):
    """Least-squares slope and sum of absolute residuals. xs must vary."""
    k = xs.shape[0]
    if k == 2:
        return (ys[1] - ys[0]) / (xs[1] - xs[0]), 0.0
    mx = 0.0
    my = 0.0
    for i in range(k):
        mx += xs[i]
        my += ys[i]
    mx /= k
    my /= k
    sxx = 0.0
    sxy = 0.0
    for i in range(k):
        dx = xs[i] - mx
        sxx += dx * dx
        sxy += dx * (ys[i] - my)
    slope = sxy / sxx
    err = 0.0
    for i in range(k):
        err += abs(ys[i] - (my + slope * (xs[i] - mx)))
    return slope, err


@njit(cache=True)
def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


@njit(cache=True)
def _convex_hull(px, py, hx, hy):
    """Andrew monotone chain into (hx, hy); returns vertex count.

    Strict turns only, so collinear inputs collapse to their two endpoints
    and a single repeated point to one vertex.
    """
    n = px.shape[0]
    idx = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):  # drop exact duplicates
        dup = False
        for j in range(m):
            if px[idx[j]] == px[i] and py[idx[j]] == py[i]:
                dup = True
                break
        if not dup:
            idx[m] = i
            m += 1
    # insertion sort by (x, y); inputs are tiny
    for i in range(1, m):
        cur = idx[i]
        j = i - 1
        while j >= 0 and (
            px[idx[j]] > px[cur]
            or (px[idx[j]] == px[cur] and py[idx[j]] > py[cur])
        ):
            idx[j + 1] = idx[j]
            j -= 1
        idx[j + 1] = cur
    if m == 1:
        hx[0] = px[idx[0]]
        hy[0] = py[idx[0]]
        return 1
    k = 0
    for ii in range(m):  # lower hull
        p = idx[ii]
        while k >= 2 and _cross(hx[k - 2], hy[k - 2], hx[k - 1], hy[k - 1], px[p], py[p]) <= 0.0:
            k -= 1
        hx[k] = px[p]
        hy[k] = py[p]
        k += 1
    t = k + 1
    for ii in range(m - 2, -1, -1):  # upper hull
        p = idx[ii]
        while k >= t and _cross(hx[k - 2], hy[k - 2], hx[k - 1], hy[k - 1], px[p], py[p]) <= 0.0:
            k -= 1
        hx[k] = px[p]
        hy[k] = py[p]
        k += 1
    return k - 1  # last vertex repeats the first


@njit(cache=True)
def _signed_area2(xs, ys, n):
    s = 0.0
    for i in range(n):
        j = (i + 1) % n
        s += xs[i] * ys[j] - xs[j] * ys[i]
    return s


@njit(cache=True)
def _ensure_ccw(xs, ys, n):
    if _signed_area2(xs, ys, n) < 0.0:
        i = 0
        j = n - 1
        while i < j:
            xs[i], xs[j] = xs[j], xs[i]
            ys[i], ys[j] = ys[j], ys[i]
            i += 1
            j -= 1


@njit(cache=True)
def _inflate(hx, hy, count, half):
    """Replace a degenerate hull in place: point -> square, segment ->
    rectangle of width 2*half oriented along the segment. Returns new count."""
    if count == 1:
        x = hx[0]
        y = hy[0]
        hx[0] = x - half
        hy[0] = y - half
        hx[1] = x + half
        hy[1] = y - half
        hx[2] = x + half
        hy[2] = y + half
        hx[3] = x - half
        hy[3] = y + half
        return 4
    x1 = hx[0]
    y1 = hy[0]
    x2 = hx[1]
    y2 = hy[1]
    dx = x2 - x1
    dy = y2 - y1
    ln = math.sqrt(dx * dx + dy * dy)
    ux = -dy / ln * half
    uy = dx / ln * half
    hx[0] = x1 + ux
    hy[0] = y1 + uy
    hx[1] = x2 + ux
    hy[1] = y2 + uy
    hx[2] = x2 - ux
    hy[2] = y2 - uy
    hx[3] = x1 - ux
    hy[3] = y1 - uy
    return 4


@njit(cache=True)
def _clip_area(ax, ay, an, bx, by, bn):
    """Area of the intersection of two convex CCW polygons (Sutherland-Hodgman)."""
    cur_x = np.empty(_BUF, dtype=np.float64)
    cur_y = np.empty(_BUF, dtype=np.float64)
    nxt_x = np.empty(_BUF, dtype=np.float64)
    nxt_y = np.empty(_BUF, dtype=np.float64)
    nc = an
    for i in range(an):
        cur_x[i] = ax[i]
        cur_y[i] = ay[i]
    for e in range(bn):
        ex1 = bx[e]
        ey1 = by[e]
        ex2 = bx[(e + 1) % bn]
        ey2 = by[(e + 1) % bn]
        nn = 0
        for i in range(nc):
            sx = cur_x[i]
            sy = cur_y[i]
            tx = cur_x[(i + 1) % nc]
            ty = cur_y[(i + 1) % nc]
            ds = _cross(ex1, ey1, ex2, ey2, sx, sy)
            dt = _cross(ex1, ey1, ex2, ey2, tx, ty)
            if ds >= 0.0:
                nxt_x[nn] = sx
                nxt_y[nn] = sy
                nn += 1
                if dt < 0.0:
                    t = ds / (ds - dt)
                    nxt_x[nn] = sx + t * (tx - sx)
                    nxt_y[nn] = sy + t * (ty - sy)
                    nn += 1
            elif dt >= 0.0:
                t = ds / (ds - dt)
                nxt_x[nn] = sx + t * (tx - sx)
                nxt_y[nn] = sy + t * (ty - sy)
                nn += 1
        nc = nn
        if nc < 3:
            return 0.0
        for i in range(nc):
            cur_x[i] = nxt_x[i]
            cur_y[i] = nxt_y[i]
    return abs(_signed_area2(cur_x, cur_y, nc)) / 2.0


@njit(cache=True)
def hull_overlap(gx, gy, rx, ry):
    """Convex-hull overlap ratio in [0, 1] with degenerate-hull inflation."""
    ahx = np.empty(_BUF, dtype=np.float64)
    ahy = np.empty(_BUF, dtype=np.float64)
    bhx = np.empty(_BUF, dtype=np.float64)
    bhy = np.empty(_BUF, dtype=np.float64)
    an = _convex_hull(gx, gy, ahx, ahy)
    bn = _convex_hull(rx, ry, bhx, bhy)
    if an < 3:
        an = _inflate(ahx, ahy, an, 0.5)
    if bn < 3:
        bn = _inflate(bhx, bhy, bn, 0.5)
    _ensure_ccw(ahx, ahy, an)
    _ensure_ccw(bhx, bhy, bn)
    area_a = abs(_signed_area2(ahx, ahy, an)) / 2.0
    area_b = abs(_signed_area2(bhx, bhy, bn)) / 2.0
    inter = _clip_area(ahx, ahy, an, bhx, bhy, bn)
    union = area_a + area_b - inter
    return inter / union


@njit(cache=True)
def separations(gx, gy, rx, ry):
    """(min pair distance, min |dx|, min |dy|) over inter-set point pairs."""
    best_d = np.inf
    best_x = np.inf
    best_y = np.inf
    for i in range(gx.shape[0]):
        for j in range(rx.shape[0]):
            dx = abs(gx[i] - rx[j])
            dy = abs(gy[i] - ry[j])
            d = math.sqrt(dx * dx + dy * dy)
            if d < best_d:
                best_d = d
            if dx < best_x:
                best_x = dx
            if dy < best_y:
                best_y = dy
    return best_d, best_x, best_y


@njit(cache=True)
def features_batch(xs, ys, masks, width, height):
    """Feature matrix for candidate groups of one laid-out chart.

    xs, ys: point coordinates (n,); masks: bool (m, n), True = in group.
    Returns (m, 8) float64 in canonical feature order. Every mask must
    select between 2 and n-1 points.
    """
    m, n = masks.shape
    out = np.empty((m, N_FEATURES), dtype=np.float64)
    diag = math.sqrt(width * width + height * height)
    gx = np.empty(n, dtype=np.float64)
    gy = np.empty(n, dtype=np.float64)
    rx = np.empty(n, dtype=np.float64)
    ry = np.empty(n, dtype=np.float64)
    for row in range(m):
        ng = 0
        nr = 0
        for i in range(n):
            if masks[row, i]:
                gx[ng] = xs[i]
                gy[ng] = ys[i]
                ng += 1
            else:
                rx[nr] = xs[i]
                ry[nr] = ys[i]
                nr += 1
        g_x = gx[:ng]
        g_y = gy[:ng]
        r_x = rx[:nr]
        r_y = ry[:nr]

        slope, err = fit_line(g_x, g_y)

        cgx = 0.0
        cgy = 0.0
        for i in range(ng):
            cgx += g_x[i]
            cgy += g_y[i]
        cgx /= ng
        cgy /= ng
        crx = 0.0
        cry = 0.0
        for i in range(nr):
            crx += r_x[i]
            cry += r_y[i]
        crx /= nr
        cry /= nr

        diam = 0.0
        for i in range(ng):
            dx = g_x[i] - cgx
            dy = g_y[i] - cgy
            diam += math.sqrt(dx * dx + dy * dy)
        diam /= ng

        min_d, x_sep, y_sep = separations(g_x, g_y, r_x, r_y)

        ddx = cgx - crx
        ddy = cgy - cry
        out[row, SLOPE] = slope
        out[row, ERROR] = err
        out[row, X_SEP] = x_sep
        out[row, Y_SEP] = y_sep
        out[row, CVX_OVERLAP] = hull_overlap(g_x, g_y, r_x, r_y)
        out[row, C_DIST] = math.sqrt(ddx * ddx + ddy * ddy) / diag
        out[row, C_DIAM] = diam
        out[row, C_RATIO] = min_d / diam
    return out


def python_impl(kernel):
    """Uncompiled twin of a kernel (the pure numpy path); identity when
    numba is disabled."""
    return getattr(kernel, "py_func", kernel)
