# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled shortest-path kernels; arithmetic twin of mulesim.planning.pure.

Expression order, neighbor order, and (f, h, cell index) tie-breaking match
the pure module exactly so both backends return bit-identical results.
"""

from libc.math cimport sqrt, isfinite

import numpy as np


cdef double SQRT2 = sqrt(2.0)

cdef int[8] DY = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] DX = [-1, 0, 1, -1, 1, -1, 0, 1]
cdef int[8] DIAG = [1, 0, 1, 0, 0, 1, 0, 1]


cdef class _Heap:
    """Binary min-heap keyed lexicographically by (f, h, idx)."""

    cdef double[::1] f
    cdef double[::1] h
    cdef long long[::1] idx
    cdef Py_ssize_t n

    def __cinit__(self, Py_ssize_t cap):
        self.f = np.empty(cap, dtype=np.float64)
        self.h = np.empty(cap, dtype=np.float64)
        self.idx = np.empty(cap, dtype=np.int64)
        self.n = 0

    cdef void _grow(self):
        cdef Py_ssize_t cap = self.f.shape[0] * 2
        f2 = np.empty(cap, dtype=np.float64)
        h2 = np.empty(cap, dtype=np.float64)
        i2 = np.empty(cap, dtype=np.int64)
        f2[: self.n] = np.asarray(self.f)[: self.n]
        h2[: self.n] = np.asarray(self.h)[: self.n]
        i2[: self.n] = np.asarray(self.idx)[: self.n]
        self.f = f2
        self.h = h2
        self.idx = i2

    cdef inline bint _less(self, Py_ssize_t i, Py_ssize_t j):
        if self.f[i] != self.f[j]:
            return self.f[i] < self.f[j]
        if self.h[i] != self.h[j]:
            return self.h[i] < self.h[j]
        return self.idx[i] < self.idx[j]

    cdef inline void _swap(self, Py_ssize_t i, Py_ssize_t j):
        cdef double tf = self.f[i]
        cdef double th = self.h[i]
        cdef long long ti = self.idx[i]
        self.f[i] = self.f[j]
        self.h[i] = self.h[j]
        self.idx[i] = self.idx[j]
        self.f[j] = tf
        self.h[j] = th
        self.idx[j] = ti

    cdef void push(self, double f, double h, long long idx):
        cdef Py_ssize_t i, up
        if self.n == self.f.shape[0]:
            self._grow()
        i = self.n
        self.f[i] = f
        self.h[i] = h
        self.idx[i] = idx
        self.n += 1
        while i > 0:
            up = (i - 1) >> 1
            if self._less(i, up):
                self._swap(i, up)
                i = up
            else:
                break

    cdef long long pop(self):
        cdef long long out = self.idx[0]
        cdef Py_ssize_t i = 0, left, right, best
        self.n -= 1
        if self.n > 0:
            self.f[0] = self.f[self.n]
            self.h[0] = self.h[self.n]
            self.idx[0] = self.idx[self.n]
            while True:
                left = 2 * i + 1
                right = left + 1
                best = i
                if left < self.n and self._less(left, best):
                    best = left
                if right < self.n and self._less(right, best):
                    best = right
                if best == i:
                    break
                self._swap(i, best)
                i = best
        return out


def astar_path(double[:, ::1] cost, Py_ssize_t sx, Py_ssize_t sy,
               Py_ssize_t gx, Py_ssize_t gy, double resolution):
    """8-connected A*; see the pure twin for the contract."""
    cdef Py_ssize_t h = cost.shape[0]
    cdef Py_ssize_t w = cost.shape[1]
    cdef long long start = sy * w + sx
    cdef long long goal = gy * w + gx
    if not isfinite(cost[sy, sx]) or not isfinite(cost[gy, gx]):
        return None

    g_arr = np.full(h * w, np.inf, dtype=np.float64)
    parent_arr = np.full(h * w, -1, dtype=np.int64)
    closed_arr = np.zeros(h * w, dtype=np.uint8)
    cdef double[::1] g = g_arr
    cdef long long[::1] parent = parent_arr
    cdef unsigned char[::1] closed = closed_arr

    cdef double step_card = resolution
    cdef double step_diag = resolution * SQRT2
    cdef double dx0 = <double> (sx - gx)
    cdef double dy0 = <double> (sy - gy)
    cdef double h0 = sqrt(dx0 * dx0 + dy0 * dy0) * resolution

    cdef _Heap heap = _Heap(1024)
    g[start] = 0.0
    heap.push(h0, h0, start)

    cdef long long idx, nidx
    cdef Py_ssize_t cy, cx, ny, nx, k
    cdef double cf, gc, ct, step, ng, nh, ddx, ddy

    while heap.n > 0:
        idx = heap.pop()
        if closed[idx]:
            continue
        closed[idx] = 1
        if idx == goal:
            break
        cy = idx // w
        cx = idx - cy * w
        cf = cost[cy, cx]
        gc = g[idx]
        for k in range(8):
            ny = cy + DY[k]
            nx = cx + DX[k]
            if ny < 0 or ny >= h or nx < 0 or nx >= w:
                continue
            nidx = ny * w + nx
            if closed[nidx]:
                continue
            ct = cost[ny, nx]
            if not isfinite(ct):
                continue
            step = step_diag if DIAG[k] else step_card
            ng = gc + step * ((cf + ct) * 0.5)
            if ng < g[nidx]:
                g[nidx] = ng
                parent[nidx] = idx
                ddx = <double> (nx - gx)
                ddy = <double> (ny - gy)
                nh = sqrt(ddx * ddx + ddy * ddy) * resolution
                heap.push(ng + nh, nh, nidx)

    if not closed[goal]:
        return None
    path = []
    idx = goal
    while idx >= 0:
        cy = idx // w
        cx = idx - cy * w
        path.append((cx, cy))
        idx = parent[idx]
    path.reverse()
    return float(g[goal]), path


def distance_field(double[:, ::1] cost, Py_ssize_t sx, Py_ssize_t sy,
                   double resolution):
    """Dijkstra distances from (sx, sy); see the pure twin for the contract."""
    cdef Py_ssize_t h = cost.shape[0]
    cdef Py_ssize_t w = cost.shape[1]
    cdef long long start = sy * w + sx

    dist_arr = np.full(h * w, np.inf, dtype=np.float64)
    cdef double[::1] dist = dist_arr
    if not isfinite(cost[sy, sx]):
        return dist_arr.reshape(h, w)
    closed_arr = np.zeros(h * w, dtype=np.uint8)
    cdef unsigned char[::1] closed = closed_arr

    cdef double step_card = resolution
    cdef double step_diag = resolution * SQRT2

    cdef _Heap heap = _Heap(1024)
    dist[start] = 0.0
    heap.push(0.0, 0.0, start)

    cdef long long idx, nidx
    cdef Py_ssize_t cy, cx, ny, nx, k
    cdef double cf, gc, ct, step, ng

    while heap.n > 0:
        idx = heap.pop()
        if closed[idx]:
            continue
        closed[idx] = 1
        cy = idx // w
        cx = idx - cy * w
        cf = cost[cy, cx]
        gc = dist[idx]
        for k in range(8):
            ny = cy + DY[k]
            nx = cx + DX[k]
            if ny < 0 or ny >= h or nx < 0 or nx >= w:
                continue
            nidx = ny * w + nx
            if closed[nidx]:
                continue
            ct = cost[ny, nx]
            if not isfinite(ct):
                continue
            step = step_diag if DIAG[k] else step_card
            ng = gc + step * ((cf + ct) * 0.5)
            if ng < dist[nidx]:
                dist[nidx] = ng
                heap.push(ng, 0.0, nidx)

    return dist_arr.reshape(h, w)
