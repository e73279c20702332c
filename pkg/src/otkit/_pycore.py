"""Pure-Python kernels.

Reference implementations of the inner loops that ``_core.pyx`` compiles.
The two modules expose the same functions with the same signatures and
return values; :mod:`otkit.kernels` picks one at import time.
"""
from __future__ import annotations

import math

import numpy as np

# -- transportation simplex ---------------------------------------------------

STATUS_OPTIMAL = 0
STATUS_MAXITER = 1


def _northwest_corner(v, w):
    k1, k2 = v.size, w.size
    s, d = v.copy(), w.copy()
    bi, bj, flow = [], [], []
    i = j = 0
    while True:
        x = min(s[i], d[j])
        if i == k1 - 1 and j == k2 - 1:
            # absorb round-off in the final cell
            x = max(s[i], d[j])
        bi.append(i)
        bj.append(j)
        flow.append(x)
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
    return bi, bj, flow


def _tree_potentials(C, bi, bj, k1, k2):
    """Potentials with u_0 = 0 plus BFS parent/depth arrays on the basis tree."""
    n = k1 + k2
    adj = [[] for _ in range(n)]
    for e, (i, j) in enumerate(zip(bi, bj)):
        adj[i].append((k1 + j, e))
        adj[k1 + j].append((i, e))
    pot = [0.0] * n
    parent = [-1] * n
    pedge = [-1] * n
    depth = [-1] * n
    depth[0] = 0
    queue = [0]
    head = 0
    while head < len(queue):
        a = queue[head]
        head += 1
        for b, e in adj[a]:
            if depth[b] >= 0:
                continue
            depth[b] = depth[a] + 1
            parent[b] = a
            pedge[b] = e
            c = C[bi[e], bj[e]]
            pot[b] = c - pot[a]
            queue.append(b)
    return pot, parent, pedge, depth


def transport_simplex(v, w, C, tol=1e-12, maxiter=1_000_000):
    """Transportation simplex with a north-west-corner start and Bland pivoting.

    Returns ``(rows, cols, flows, u, v, iterations, status)`` where the first
    three arrays list the ``k1 + k2 - 1`` basic cells (degenerate ones carry
    zero flow) and ``u``, ``v`` are the dual potentials.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    C = np.asarray(C, dtype=float)
    k1, k2 = v.size, w.size
    bi, bj, flow = _northwest_corner(v, w)
    status = STATUS_MAXITER
    it = 0
    while it < maxiter:
        pot, parent, pedge, depth = _tree_potentials(C, bi, bj, k1, k2)
        u = np.asarray(pot[:k1])
        vv = np.asarray(pot[k1:])
        reduced = C - u[:, None] - vv[None, :]
        neg = np.flatnonzero(reduced.ravel() < -tol)
        if neg.size == 0:
            status = STATUS_OPTIMAL
            break
        ei, ej = divmod(int(neg[0]), k2)
        # path in the tree from row node ei to column node k1 + ej
        a, b = ei, k1 + ej
        up_a, up_b = [], []
        while depth[a] > depth[b]:
            up_a.append(pedge[a])
            a = parent[a]
        while depth[b] > depth[a]:
            up_b.append(pedge[b])
            b = parent[b]
        while a != b:
            up_a.append(pedge[a])
            a = parent[a]
            up_b.append(pedge[b])
            b = parent[b]
        path = up_a + up_b[::-1]
        minus = path[0::2]
        plus = path[1::2]
        theta = min(flow[e] for e in minus)
        leave = min(
            (e for e in minus if flow[e] == theta),
            key=lambda e: bi[e] * k2 + bj[e],
        )
        for e in minus:
            flow[e] -= theta
        for e in plus:
            flow[e] += theta
        bi[leave], bj[leave], flow[leave] = ei, ej, theta
        it += 1
    else:
        pot, *_ = _tree_potentials(C, bi, bj, k1, k2)
        u = np.asarray(pot[:k1])
        vv = np.asarray(pot[k1:])
    flows = np.maximum(np.asarray(flow), 0.0)
    return (
        np.asarray(bi, dtype=np.int64),
        np.asarray(bj, dtype=np.int64),
        flows,
        u,
        vv,
        it,
        status,
    )


# -- polygon clipping and moments ---------------------------------------------

GEOM_EPS = 1e-12


def clip_halfplane(xs, ys, labels, nx, ny, c, label):
    """Sutherland-Hodgman clip of a labelled polygon to ``nx*x + ny*y <= c``.

    ``labels[k]`` tags the edge from vertex ``k`` to ``k+1``; the edge created
    along the clip line gets ``label``.
    """
    n = len(xs)
    ox, oy, ol = [], [], []
    if n == 0:
        return ox, oy, ol
    scale = GEOM_EPS * (1.0 + abs(c))
    dist = [nx * xs[k] + ny * ys[k] - c for k in range(n)]
    if max(dist) <= scale:
        return list(xs), list(ys), list(labels)
    for k in range(n):
        k2 = k + 1 if k + 1 < n else 0
        dp, dq = dist[k], dist[k2]
        pin, qin = dp <= scale, dq <= scale
        if pin:
            ox.append(xs[k])
            oy.append(ys[k])
            ol.append(labels[k])
        if pin != qin:
            t = min(max(dp / (dp - dq), 0.0), 1.0)
            ox.append(xs[k] + t * (xs[k2] - xs[k]))
            oy.append(ys[k] + t * (ys[k2] - ys[k]))
            # leaving: continue along the clip line; entering: along the old edge
            ol.append(label if pin else labels[k])
    if len(ox) < 3:
        return [], [], []
    return ox, oy, ol


def polygon_moments(xs, ys):
    """Area, first moments and polar second moment of a simple CCW polygon."""
    n = len(xs)
    a = mx = my = m2 = 0.0
    for k in range(n):
        k2 = k + 1 if k + 1 < n else 0
        x0, y0, x1, y1 = xs[k], ys[k], xs[k2], ys[k2]
        cr = x0 * y1 - x1 * y0
        a += cr
        mx += (x0 + x1) * cr
        my += (y0 + y1) * cr
        m2 += (x0 * x0 + x0 * x1 + x1 * x1 + y0 * y0 + y0 * y1 + y1 * y1) * cr
    return a / 2.0, mx / 6.0, my / 6.0, m2 / 12.0


def power_cell(sites, phi, i, box):
    """Laguerre cell of site ``i`` for cost ``|x - y|^2 / 2`` clipped to ``box``.

    Coordinates are returned relative to the site.  Edge labels are the
    neighbouring site index, or ``-1..-4`` for the bottom, right, top and left
    sides of the box.
    """
    xmin, xmax, ymin, ymax = box
    sx, sy = sites[i, 0], sites[i, 1]
    xs = [xmin - sx, xmax - sx, xmax - sx, xmin - sx]
    ys = [ymin - sy, ymin - sy, ymax - sy, ymax - sy]
    labels = [-1, -2, -3, -4]
    d = sites - sites[i]
    dist2 = d[:, 0] ** 2 + d[:, 1] ** 2
    order = np.argsort(dist2, kind="stable")
    phimax = float(np.max(phi))
    for j in order:
        j = int(j)
        if j == i:
            continue
        nrm = math.sqrt(dist2[j])
        radius = math.sqrt(max(xx * xx + yy * yy for xx, yy in zip(xs, ys)))
        if nrm >= radius and 0.5 * dist2[j] - radius * nrm + phi[i] - phimax >= 0:
            break
        c = 0.5 * dist2[j] + phi[i] - phi[j]
        xs, ys, labels = clip_halfplane(xs, ys, labels, d[j, 0], d[j, 1], c, j)
        if not xs:
            break
    return xs, ys, labels


def polygon_grid_moments(xs, ys, ox, oy, values, lo, spacing):
    """Density-weighted moments of a polygon over a piecewise-constant grid.

    The polygon is given relative to the origin ``(ox, oy)``; moments are
    returned relative to that origin as ``(mass, mx, my, m2)``.
    """
    nx_, ny_ = values.shape
    hx, hy = spacing
    ax = [x + ox for x in xs]
    ay = [y + oy for y in ys]
    if not ax:
        return 0.0, 0.0, 0.0, 0.0
    i0 = max(int(math.floor((min(ax) - lo[0]) / hx)), 0)
    i1 = min(int(math.floor((max(ax) - lo[0]) / hx)), nx_ - 1)
    j0 = max(int(math.floor((min(ay) - lo[1]) / hy)), 0)
    j1 = min(int(math.floor((max(ay) - lo[1]) / hy)), ny_ - 1)
    mass = mx = my = m2 = 0.0
    for i in range(i0, i1 + 1):
        cx0 = lo[0] + i * hx - ox
        lab = [0] * len(xs)
        sx, sy, lab = clip_halfplane(xs, ys, lab, 1.0, 0.0, cx0 + hx, 0)
        sx, sy, lab = clip_halfplane(sx, sy, lab, -1.0, 0.0, -cx0, 0)
        if not sx:
            continue
        for j in range(j0, j1 + 1):
            val = values[i, j]
            if val == 0.0:
                continue
            cy0 = lo[1] + j * hy - oy
            l2 = [0] * len(sx)
            px, py, l2 = clip_halfplane(sx, sy, l2, 0.0, 1.0, cy0 + hy, 0)
            px, py, l2 = clip_halfplane(px, py, l2, 0.0, -1.0, -cy0, 0)
            if not px:
                continue
            a, bx, by, b2 = polygon_moments(px, py)
            mass += val * a
            mx += val * bx
            my += val * by
            m2 += val * b2
    return mass, mx, my, m2


def segment_grid_integral(x0, y0, x1, y1, values, lo, spacing):
    """Line integral of a piecewise-constant grid density along a segment."""
    nx_, ny_ = values.shape
    hx, hy = spacing
    length = math.hypot(x1 - x0, y1 - y0)
    if length == 0.0:
        return 0.0
    ts = [0.0, 1.0]
    dx, dy = x1 - x0, y1 - y0
    if dx != 0.0:
        a, b = sorted(((x0 - lo[0]) / hx, (x1 - lo[0]) / hx))
        for g in range(int(math.ceil(a)), int(math.floor(b)) + 1):
            t = (lo[0] + g * hx - x0) / dx
            if 0.0 < t < 1.0:
                ts.append(t)
    if dy != 0.0:
        a, b = sorted(((y0 - lo[1]) / hy, (y1 - lo[1]) / hy))
        for g in range(int(math.ceil(a)), int(math.floor(b)) + 1):
            t = (lo[1] + g * hy - y0) / dy
            if 0.0 < t < 1.0:
                ts.append(t)
    ts.sort()
    total = 0.0
    for k in range(len(ts) - 1):
        dt = ts[k + 1] - ts[k]
        if dt <= 0.0:
            continue
        tm = 0.5 * (ts[k] + ts[k + 1])
        i = min(max(int(math.floor((x0 + tm * dx - lo[0]) / hx)), 0), nx_ - 1)
        j = min(max(int(math.floor((y0 + tm * dy - lo[1]) / hy)), 0), ny_ - 1)
        total += values[i, j] * dt
    return total * length


def laguerre_cells(sites, phi, box, values, lo, spacing, want_facets=True):
    """Power diagram plus per-cell density integrals.

    Returns ``(mass, mx, my, m2, polygons, facets)``: moments relative to each
    site; ``polygons[i]`` is an ``(n, 2)`` array of absolute coordinates (empty
    for empty cells); ``facets`` is an ``(F, 4)`` array of rows
    ``(i, j, integral of rho along the shared edge, edge length)`` with
    ``i < j``.
    """
    sites = np.ascontiguousarray(sites, dtype=float)
    phi = np.ascontiguousarray(phi, dtype=float)
    values = np.ascontiguousarray(values, dtype=float)
    k = sites.shape[0]
    mass = np.zeros(k)
    mx = np.zeros(k)
    my = np.zeros(k)
    m2 = np.zeros(k)
    polys = []
    facets = []
    for i in range(k):
        xs, ys, labels = power_cell(sites, phi, i, box)
        ox, oy = sites[i, 0], sites[i, 1]
        if not xs:
            polys.append(np.zeros((0, 2)))
            continue
        polys.append(np.column_stack([np.asarray(xs) + ox, np.asarray(ys) + oy]))
        mass[i], mx[i], my[i], m2[i] = polygon_grid_moments(xs, ys, ox, oy, values, lo, spacing)
        if want_facets:
            n = len(xs)
            for e in range(n):
                j = labels[e]
                if j <= i:
                    continue
                e2 = e + 1 if e + 1 < n else 0
                X0, Y0 = xs[e] + ox, ys[e] + oy
                X1, Y1 = xs[e2] + ox, ys[e2] + oy
                integral = segment_grid_integral(X0, Y0, X1, Y1, values, lo, spacing)
                facets.append((i, j, integral, math.hypot(X1 - X0, Y1 - Y0)))
    facets = np.asarray(facets, dtype=float).reshape(-1, 4)
    return mass, mx, my, m2, polys, facets
