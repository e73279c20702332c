# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: transportation simplex and power-diagram integration.

Mirrors ``_pycore.py`` function for function.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, ceil, fabs, hypot
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF STATUS_OPTIMAL = 0
DEF STATUS_MAXITER = 1

# -- transportation simplex ---------------------------------------------------

cdef void _potentials(const double[:, ::1] C, long[::1] bi, long[::1] bj,
                      int k1, int k2, double[::1] pot, long[::1] parent,
                      long[::1] pedge, long[::1] depth, long[::1] deg,
                      long[::1] start, long[::1] nbr, long[::1] nedge,
                      long[::1] queue) noexcept nogil:
    cdef int n = k1 + k2
    cdef int nb = k1 + k2 - 1
    cdef int e, a, b, head, tail, s, t
    for a in range(n):
        deg[a] = 0
        depth[a] = -1
    for e in range(nb):
        deg[bi[e]] += 1
        deg[k1 + bj[e]] += 1
    start[0] = 0
    for a in range(n):
        start[a + 1] = start[a] + deg[a]
        deg[a] = 0
    for e in range(nb):
        a = bi[e]
        b = k1 + bj[e]
        s = start[a] + deg[a]
        nbr[s] = b
        nedge[s] = e
        deg[a] += 1
        s = start[b] + deg[b]
        nbr[s] = a
        nedge[s] = e
        deg[b] += 1
    depth[0] = 0
    pot[0] = 0.0
    parent[0] = -1
    pedge[0] = -1
    queue[0] = 0
    head = 0
    tail = 1
    while head < tail:
        a = queue[head]
        head += 1
        for t in range(start[a], start[a + 1]):
            b = nbr[t]
            if depth[b] >= 0:
                continue
            e = nedge[t]
            depth[b] = depth[a] + 1
            parent[b] = a
            pedge[b] = e
            pot[b] = C[bi[e], bj[e]] - pot[a]
            queue[tail] = b
            tail += 1


cdef void _northwest(const double[::1] v, const double[::1] w, long[::1] bi,
                     long[::1] bj, double[::1] flow) noexcept nogil:
    cdef int k1 = v.shape[0]
    cdef int k2 = w.shape[0]
    cdef double *s = <double *> malloc(k1 * sizeof(double))
    cdef double *d = <double *> malloc(k2 * sizeof(double))
    cdef int i = 0, j = 0, e = 0
    cdef double x
    for i in range(k1):
        s[i] = v[i]
    for j in range(k2):
        d[j] = w[j]
    i = 0
    j = 0
    while True:
        x = s[i] if s[i] < d[j] else d[j]
        if i == k1 - 1 and j == k2 - 1:
            x = s[i] if s[i] > d[j] else d[j]
        bi[e] = i
        bj[e] = j
        flow[e] = x
        e += 1
        s[i] -= x
        d[j] -= x
        if i == k1 - 1 and j == k2 - 1:
            break
        if i == k1 - 1:
            j += 1
        elif j == k2 - 1:
            i += 1
        elif s[i] <= d[j]:
            i += 1
        else:
            j += 1
    free(s)
    free(d)


def transport_simplex(v, w, C, double tol=1e-12, long maxiter=1_000_000):
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[:, ::1] CC = np.ascontiguousarray(C, dtype=np.float64)
    cdef int k1 = vv.shape[0]
    cdef int k2 = ww.shape[0]
    cdef int n = k1 + k2
    cdef int nb = n - 1
    bi_arr = np.zeros(nb, dtype=np.int64)
    bj_arr = np.zeros(nb, dtype=np.int64)
    flow_arr = np.zeros(nb)
    pot_arr = np.zeros(n)
    cdef long[::1] bi = bi_arr
    cdef long[::1] bj = bj_arr
    cdef double[::1] flow = flow_arr
    cdef double[::1] pot = pot_arr
    cdef long[::1] parent = np.zeros(n, dtype=np.int64)
    cdef long[::1] pedge = np.zeros(n, dtype=np.int64)
    cdef long[::1] depth = np.zeros(n, dtype=np.int64)
    cdef long[::1] deg = np.zeros(n, dtype=np.int64)
    cdef long[::1] start = np.zeros(n + 1, dtype=np.int64)
    cdef long[::1] nbr = np.zeros(2 * nb, dtype=np.int64)
    cdef long[::1] nedge = np.zeros(2 * nb, dtype=np.int64)
    cdef long[::1] queue = np.zeros(n, dtype=np.int64)
    cdef long[::1] path = np.zeros(n, dtype=np.int64)
    cdef long[::1] down = np.zeros(n, dtype=np.int64)
    cdef long it = 0
    cdef int status = STATUS_MAXITER
    cdef int i, j, ei, ej, a, b, na, nd, t, e, leave
    cdef double r, theta
    cdef long key, best
    with nogil:
        _northwest(vv, ww, bi, bj, flow)
        while it < maxiter:
            _potentials(CC, bi, bj, k1, k2, pot, parent, pedge, depth, deg,
                        start, nbr, nedge, queue)
            ei = -1
            for i in range(k1):
                for j in range(k2):
                    r = CC[i, j] - pot[i] - pot[k1 + j]
                    if r < -tol:
                        ei = i
                        ej = j
                        break
                if ei >= 0:
                    break
            if ei < 0:
                status = STATUS_OPTIMAL
                break
            a = ei
            b = k1 + ej
            na = 0
            nd = 0
            while depth[a] > depth[b]:
                path[na] = pedge[a]
                na += 1
                a = parent[a]
            while depth[b] > depth[a]:
                down[nd] = pedge[b]
                nd += 1
                b = parent[b]
            while a != b:
                path[na] = pedge[a]
                na += 1
                a = parent[a]
                down[nd] = pedge[b]
                nd += 1
                b = parent[b]
            for t in range(nd):
                path[na + t] = down[nd - 1 - t]
            na += nd
            theta = flow[path[0]]
            for t in range(0, na, 2):
                if flow[path[t]] < theta:
                    theta = flow[path[t]]
            leave = -1
            best = -1
            for t in range(0, na, 2):
                e = path[t]
                if flow[e] == theta:
                    key = bi[e] * k2 + bj[e]
                    if leave < 0 or key < best:
                        leave = e
                        best = key
            for t in range(na):
                e = path[t]
                if t % 2 == 0:
                    flow[e] -= theta
                else:
                    flow[e] += theta
            bi[leave] = ei
            bj[leave] = ej
            flow[leave] = theta
            it += 1
        if status != STATUS_OPTIMAL:
            _potentials(CC, bi, bj, k1, k2, pot, parent, pedge, depth, deg,
                        start, nbr, nedge, queue)
    return (bi_arr, bj_arr, np.maximum(flow_arr, 0.0), pot_arr[:k1].copy(),
            pot_arr[k1:].copy(), int(it), status)


# -- polygon clipping ---------------------------------------------------------

DEF GEOM_EPS = 1e-12

cdef int _clip(double *xs, double *ys, long *lab, int n,
               double nx, double ny, double c, long label,
               double *ox, double *oy, long *ol) noexcept nogil:
    """Clip to nx*x + ny*y <= c; returns the new vertex count (0 if empty)."""
    cdef double scale = GEOM_EPS * (1.0 + fabs(c))
    cdef int k, k2, m = 0
    cdef double dp, dq, t, dmax = -1e300
    cdef bint pin, qin
    if n == 0:
        return 0
    for k in range(n):
        dp = nx * xs[k] + ny * ys[k] - c
        if dp > dmax:
            dmax = dp
    if dmax <= scale:
        for k in range(n):
            ox[k] = xs[k]
            oy[k] = ys[k]
            ol[k] = lab[k]
        return n
    for k in range(n):
        k2 = k + 1 if k + 1 < n else 0
        dp = nx * xs[k] + ny * ys[k] - c
        dq = nx * xs[k2] + ny * ys[k2] - c
        pin = dp <= scale
        qin = dq <= scale
        if pin:
            ox[m] = xs[k]
            oy[m] = ys[k]
            ol[m] = lab[k]
            m += 1
        if pin != qin:
            t = dp / (dp - dq)
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            ox[m] = xs[k] + t * (xs[k2] - xs[k])
            oy[m] = ys[k] + t * (ys[k2] - ys[k])
            ol[m] = label if pin else lab[k]
            m += 1
    if m < 3:
        return 0
    return m


cdef void _moments(double *xs, double *ys, int n, double *out) noexcept nogil:
    cdef int k, k2
    cdef double x0, y0, x1, y1, cr
    cdef double a = 0.0, mx = 0.0, my = 0.0, m2 = 0.0
    for k in range(n):
        k2 = k + 1 if k + 1 < n else 0
        x0 = xs[k]
        y0 = ys[k]
        x1 = xs[k2]
        y1 = ys[k2]
        cr = x0 * y1 - x1 * y0
        a += cr
        mx += (x0 + x1) * cr
        my += (y0 + y1) * cr
        m2 += (x0 * x0 + x0 * x1 + x1 * x1 + y0 * y0 + y0 * y1 + y1 * y1) * cr
    out[0] = a / 2.0
    out[1] = mx / 6.0
    out[2] = my / 6.0
    out[3] = m2 / 12.0


cdef void _grid_moments(double *xs, double *ys, int n, double ox, double oy,
                        const double[:, ::1] values, double lo0, double lo1,
                        double hx, double hy, double *buf, long *lbuf,
                        double *out) noexcept nogil:
    cdef int nxg = values.shape[0]
    cdef int nyg = values.shape[1]
    cdef double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300
    cdef int k, i, j, i0, i1, j0, j1, ns, np_
    cdef double cx0, cy0, val
    cdef double mom[4]
    # scratch: 6 coordinate and 3 label buffers of capacity n + 8
    cdef int cap = n + 8
    cdef double *sx = buf
    cdef double *sy = buf + cap
    cdef double *tx = buf + 2 * cap
    cdef double *ty = buf + 3 * cap
    cdef double *px = buf + 4 * cap
    cdef double *py = buf + 5 * cap
    cdef long *l0 = lbuf
    cdef long *l1 = lbuf + cap
    cdef long *l2 = lbuf + 2 * cap
    out[0] = 0.0
    out[1] = 0.0
    out[2] = 0.0
    out[3] = 0.0
    if n == 0:
        return
    for k in range(n):
        l0[k] = 0
        if xs[k] + ox < minx:
            minx = xs[k] + ox
        if xs[k] + ox > maxx:
            maxx = xs[k] + ox
        if ys[k] + oy < miny:
            miny = ys[k] + oy
        if ys[k] + oy > maxy:
            maxy = ys[k] + oy
    i0 = <int> floor((minx - lo0) / hx)
    i1 = <int> floor((maxx - lo0) / hx)
    j0 = <int> floor((miny - lo1) / hy)
    j1 = <int> floor((maxy - lo1) / hy)
    if i0 < 0:
        i0 = 0
    if j0 < 0:
        j0 = 0
    if i1 > nxg - 1:
        i1 = nxg - 1
    if j1 > nyg - 1:
        j1 = nyg - 1
    for i in range(i0, i1 + 1):
        cx0 = lo0 + i * hx - ox
        ns = _clip(xs, ys, l0, n, 1.0, 0.0, cx0 + hx, 0, tx, ty, l1)
        ns = _clip(tx, ty, l1, ns, -1.0, 0.0, -cx0, 0, sx, sy, l0)
        if ns == 0:
            for k in range(n):
                l0[k] = 0
            continue
        for j in range(j0, j1 + 1):
            val = values[i, j]
            if val == 0.0:
                continue
            cy0 = lo1 + j * hy - oy
            np_ = _clip(sx, sy, l0, ns, 0.0, 1.0, cy0 + hy, 0, tx, ty, l1)
            np_ = _clip(tx, ty, l1, np_, 0.0, -1.0, -cy0, 0, px, py, l2)
            if np_ == 0:
                continue
            _moments(px, py, np_, mom)
            out[0] += val * mom[0]
            out[1] += val * mom[1]
            out[2] += val * mom[2]
            out[3] += val * mom[3]
        for k in range(n):
            l0[k] = 0


def polygon_grid_moments(xs, ys, double ox, double oy, values, lo, spacing):
    cdef double[::1] X = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] Y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef const double[:, ::1] V = np.ascontiguousarray(values, dtype=np.float64)
    cdef int n = X.shape[0]
    cdef int cap = n + 8
    cdef double *buf = <double *> malloc(6 * cap * sizeof(double))
    cdef long *lbuf = <long *> malloc(3 * cap * sizeof(long))
    cdef double out[4]
    if n == 0:
        free(buf)
        free(lbuf)
        return 0.0, 0.0, 0.0, 0.0
    _grid_moments(&X[0], &Y[0], n, ox, oy, V, lo[0], lo[1], spacing[0],
                  spacing[1], buf, lbuf, out)
    free(buf)
    free(lbuf)
    return out[0], out[1], out[2], out[3]


cdef double _segment_integral(double x0, double y0, double x1, double y1,
                              const double[:, ::1] values, double lo0,
                              double lo1, double hx, double hy,
                              double *ts) noexcept nogil:
    cdef int nxg = values.shape[0]
    cdef int nyg = values.shape[1]
    cdef double length = hypot(x1 - x0, y1 - y0)
    cdef double dx = x1 - x0, dy = y1 - y0, a, b, t, tm, dt, total = 0.0
    cdef int nt = 2, g, k, m, i, j
    if length == 0.0:
        return 0.0
    ts[0] = 0.0
    ts[1] = 1.0
    if dx != 0.0:
        a = (x0 - lo0) / hx
        b = (x1 - lo0) / hx
        if a > b:
            a, b = b, a
        for g in range(<int> ceil(a), <int> floor(b) + 1):
            t = (lo0 + g * hx - x0) / dx
            if 0.0 < t < 1.0:
                ts[nt] = t
                nt += 1
    if dy != 0.0:
        a = (y0 - lo1) / hy
        b = (y1 - lo1) / hy
        if a > b:
            a, b = b, a
        for g in range(<int> ceil(a), <int> floor(b) + 1):
            t = (lo1 + g * hy - y0) / dy
            if 0.0 < t < 1.0:
                ts[nt] = t
                nt += 1
    # insertion sort; nt is small
    for k in range(1, nt):
        t = ts[k]
        m = k - 1
        while m >= 0 and ts[m] > t:
            ts[m + 1] = ts[m]
            m -= 1
        ts[m + 1] = t
    for k in range(nt - 1):
        dt = ts[k + 1] - ts[k]
        if dt <= 0.0:
            continue
        tm = 0.5 * (ts[k] + ts[k + 1])
        i = <int> floor((x0 + tm * dx - lo0) / hx)
        j = <int> floor((y0 + tm * dy - lo1) / hy)
        if i < 0:
            i = 0
        if i > nxg - 1:
            i = nxg - 1
        if j < 0:
            j = 0
        if j > nyg - 1:
            j = nyg - 1
        total += values[i, j] * dt
    return total * length


def segment_grid_integral(double x0, double y0, double x1, double y1, values,
                          lo, spacing):
    cdef const double[:, ::1] V = np.ascontiguousarray(values, dtype=np.float64)
    cdef int cap = V.shape[0] + V.shape[1] + 8
    cdef double *ts = <double *> malloc(cap * sizeof(double))
    cdef double r = _segment_integral(x0, y0, x1, y1, V, lo[0], lo[1],
                                      spacing[0], spacing[1], ts)
    free(ts)
    return r


cdef int _power_cell(const double[:, ::1] S, const double[::1] phi, int i,
                     double xmin, double xmax, double ymin, double ymax,
                     double phimax, const long[::1] order,
                     double *xs, double *ys, long *lab,
                     double *tx, double *ty, long *tl) noexcept nogil:
    """Writes the cell of site i (site-relative) into xs/ys/lab; returns size."""
    cdef int k = S.shape[0]
    cdef double sx = S[i, 0], sy = S[i, 1]
    cdef int n = 4, q, q2, j, m
    cdef double dxj, dyj, d2, nrm, radius, r2, c
    xs[0] = xmin - sx
    ys[0] = ymin - sy
    xs[1] = xmax - sx
    ys[1] = ymin - sy
    xs[2] = xmax - sx
    ys[2] = ymax - sy
    xs[3] = xmin - sx
    ys[3] = ymax - sy
    lab[0] = -1
    lab[1] = -2
    lab[2] = -3
    lab[3] = -4
    for q in range(k):
        j = order[q]
        if j == i:
            continue
        dxj = S[j, 0] - sx
        dyj = S[j, 1] - sy
        d2 = dxj * dxj + dyj * dyj
        nrm = sqrt(d2)
        radius = 0.0
        for m in range(n):
            r2 = xs[m] * xs[m] + ys[m] * ys[m]
            if r2 > radius:
                radius = r2
        radius = sqrt(radius)
        if nrm >= radius and 0.5 * d2 - radius * nrm + phi[i] - phimax >= 0:
            break
        c = 0.5 * d2 + phi[i] - phi[j]
        m = _clip(xs, ys, lab, n, dxj, dyj, c, j, tx, ty, tl)
        for q2 in range(m):
            xs[q2] = tx[q2]
            ys[q2] = ty[q2]
            lab[q2] = tl[q2]
        n = m
        if n == 0:
            break
    return n


def power_cell(sites, phi, int i, box):
    cdef const double[:, ::1] S = np.ascontiguousarray(sites, dtype=np.float64)
    cdef const double[::1] P = np.ascontiguousarray(phi, dtype=np.float64)
    cdef int k = S.shape[0]
    cdef int cap = k + 8
    d = np.asarray(sites, dtype=np.float64) - np.asarray(sites, dtype=np.float64)[i]
    cdef const long[::1] order = np.argsort(d[:, 0] ** 2 + d[:, 1] ** 2, kind="stable").astype(np.int64)
    xs = np.zeros(cap)
    ys = np.zeros(cap)
    lab = np.zeros(cap, dtype=np.int64)
    tx = np.zeros(cap)
    ty = np.zeros(cap)
    tl = np.zeros(cap, dtype=np.int64)
    cdef double[::1] X = xs, Y = ys, TX = tx, TY = ty
    cdef long[::1] L = lab, TL = tl
    cdef int n = _power_cell(S, P, i, box[0], box[1], box[2], box[3],
                             float(np.max(phi)), order, &X[0], &Y[0], &L[0],
                             &TX[0], &TY[0], &TL[0])
    return list(xs[:n]), list(ys[:n]), [int(x) for x in lab[:n]]


def laguerre_cells(sites, phi, box, values, lo, spacing, bint want_facets=True):
    cdef const double[:, ::1] S = np.ascontiguousarray(sites, dtype=np.float64)
    cdef const double[::1] P = np.ascontiguousarray(phi, dtype=np.float64)
    cdef const double[:, ::1] V = np.ascontiguousarray(values, dtype=np.float64)
    cdef int k = S.shape[0]
    cdef int cap = k + 8
    cdef double lo0 = lo[0], lo1 = lo[1], hx = spacing[0], hy = spacing[1]
    cdef double xmin = box[0], xmax = box[1], ymin = box[2], ymax = box[3]
    cdef double phimax = float(np.max(phi))
    mass_a = np.zeros(k)
    mx_a = np.zeros(k)
    my_a = np.zeros(k)
    m2_a = np.zeros(k)
    cdef double[::1] mass = mass_a, mx = mx_a, my = my_a, m2 = m2_a
    xs_a = np.zeros(cap)
    ys_a = np.zeros(cap)
    lab_a = np.zeros(cap, dtype=np.int64)
    tx_a = np.zeros(cap)
    ty_a = np.zeros(cap)
    tl_a = np.zeros(cap, dtype=np.int64)
    cdef double[::1] X = xs_a, Y = ys_a, TX = tx_a, TY = ty_a
    cdef long[::1] L = lab_a, TL = tl_a
    cdef double *buf = <double *> malloc(6 * (cap + 8) * sizeof(double))
    cdef long *lbuf = <long *> malloc(3 * (cap + 8) * sizeof(long))
    cdef double *ts = <double *> malloc((V.shape[0] + V.shape[1] + 8) * sizeof(double))
    cdef double out[4]
    cdef int i, n, e, e2, j
    cdef double ox, oy, X0, Y0, X1, Y1
    allsites = np.asarray(S)
    polys = []
    facets = []
    cdef const long[::1] order
    try:
        for i in range(k):
            dd = allsites - allsites[i]
            order = np.argsort(dd[:, 0] ** 2 + dd[:, 1] ** 2, kind="stable").astype(np.int64)
            n = _power_cell(S, P, i, xmin, xmax, ymin, ymax, phimax, order,
                            &X[0], &Y[0], &L[0], &TX[0], &TY[0], &TL[0])
            ox = S[i, 0]
            oy = S[i, 1]
            if n == 0:
                polys.append(np.zeros((0, 2)))
                continue
            polys.append(np.column_stack([xs_a[:n] + ox, ys_a[:n] + oy]))
            _grid_moments(&X[0], &Y[0], n, ox, oy, V, lo0, lo1, hx, hy, buf, lbuf, out)
            mass[i] = out[0]
            mx[i] = out[1]
            my[i] = out[2]
            m2[i] = out[3]
            if want_facets:
                for e in range(n):
                    j = L[e]
                    if j <= i:
                        continue
                    e2 = e + 1 if e + 1 < n else 0
                    X0 = X[e] + ox
                    Y0 = Y[e] + oy
                    X1 = X[e2] + ox
                    Y1 = Y[e2] + oy
                    facets.append((i, j,
                                   _segment_integral(X0, Y0, X1, Y1, V, lo0, lo1, hx, hy, ts),
                                   hypot(X1 - X0, Y1 - Y0)))
    finally:
        free(buf)
        free(lbuf)
        free(ts)
    facet_arr = np.asarray(facets, dtype=np.float64).reshape(-1, 4)
    return mass_a, mx_a, my_a, m2_a, polys, facet_arr
