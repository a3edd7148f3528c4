"""Ray-triangle intersection: watertight kernel plus a median-split BVH.

The per-triangle test is the axis-permutation + shear formulation with
edge functions U, V, W evaluated in double precision, which is
orientation-independent (hits count from both sides) and watertight along
shared edges.  The BVH prunes a node only when its entry distance is
strictly beyond the current best hit, so it returns the exact same
lexicographic-minimum (t, triangle id) as an exhaustive scan.
"""
from __future__ import annotations

import numpy as np

_TINY = 1e-300


def _ray_frame(direction):
    """Permutation (kx, ky, kz) and shear constants for one ray."""
    d = np.asarray(direction, dtype=np.float64)
    kz = int(np.argmax(np.abs(d)))
    kx = (kz + 1) % 3
    ky = (kz + 2) % 3
    if d[kz] < 0.0:
        kx, ky = ky, kx
    dz = d[kz]
    sx = d[kx] / dz
    sy = d[ky] / dz
    sz = 1.0 / dz
    return kx, ky, kz, sx, sy, sz


def intersect_triangles(origin, direction, v0, v1, v2, tmin: float = 0.0):
    """Watertight ray test against a batch of triangles.

    Returns (t, bary, valid): t is inf where invalid; bary is (m, 3)
    barycentric weights of (v0, v1, v2) rows; valid marks real hits with
    t > tmin.
    """
    origin = np.asarray(origin, dtype=np.float64)
    kx, ky, kz, sx, sy, sz = _ray_frame(direction)

    a = v0 - origin
    b = v1 - origin
    c = v2 - origin
    ax = a[:, kx] - sx * a[:, kz]
    ay = a[:, ky] - sy * a[:, kz]
    bx = b[:, kx] - sx * b[:, kz]
    by = b[:, ky] - sy * b[:, kz]
    cx = c[:, kx] - sx * c[:, kz]
    cy = c[:, ky] - sy * c[:, kz]

    u = cx * by - cy * bx
    v = ax * cy - ay * cx
    w = bx * ay - by * ax

    det = u + v + w
    same_sign = ((u >= 0) & (v >= 0) & (w >= 0)) | ((u <= 0) & (v <= 0) & (w <= 0))
    valid = same_sign & (det != 0.0)

    az = sz * a[:, kz]
    bz = sz * b[:, kz]
    cz = sz * c[:, kz]
    tnum = u * az + v * bz + w * cz

    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(valid, tnum / det, np.inf)
        bary = np.empty((len(v0), 3), dtype=np.float64)
        bary[:, 0] = u / det
        bary[:, 1] = v / det
        bary[:, 2] = w / det
    valid &= t > tmin
    t = np.where(valid, t, np.inf)
    return t, bary, valid


def _best_hit(t, bary, valid, ids):
    """Lexicographic minimum of (t, id) over valid hits, or None."""
    if not valid.any():
        return None
    tv = t[valid]
    iv = ids[valid]
    bv = bary[valid]
    tbest = tv.min()
    at = np.nonzero(tv == tbest)[0]
    pick = at[np.argmin(iv[at])]
    return float(tv[pick]), int(iv[pick]), bv[pick].copy()


def intersect_brute(vertices, triangles, origin, direction, tmin: float = 0.0):
    """Exhaustive per-triangle scan: nearest hit as (t, tri_id, bary) or None."""
    v0 = vertices[triangles[:, 0]]
    v1 = vertices[triangles[:, 1]]
    v2 = vertices[triangles[:, 2]]
    t, bary, valid = intersect_triangles(origin, direction, v0, v1, v2, tmin)
    return _best_hit(t, bary, valid, np.arange(len(triangles)))


class TriangleBVH:
    """Axis-aligned median-split hierarchy stored as flat arrays."""

    __slots__ = ("vertices", "triangles", "order", "node_lo", "node_hi",
                 "node_left", "node_right", "node_start", "node_count",
                 "_v0", "_v1", "_v2")

    def __init__(self, vertices, triangles, leaf_size: int = 8):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        self.triangles = np.asarray(triangles, dtype=np.int64)
        m = len(self.triangles)
        tv = self.vertices[self.triangles]          # (m, 3, 3)
        tri_lo = tv.min(axis=1)
        tri_hi = tv.max(axis=1)
        centroids = tv.mean(axis=1)

        order = np.arange(m, dtype=np.int64)
        node_lo, node_hi = [], []
        node_left, node_right = [], []
        node_start, node_count = [], []

        # iterative build over [start, end) ranges of `order`
        stack = [(0, m, -1, False)]
        while stack:
            start, end, parent, is_right = stack.pop()
            idx = order[start:end]
            lo = tri_lo[idx].min(axis=0)
            hi = tri_hi[idx].max(axis=0)
            me = len(node_lo)
            node_lo.append(lo)
            node_hi.append(hi)
            node_left.append(-1)
            node_right.append(-1)
            node_start.append(start)
            node_count.append(0)
            if parent >= 0:
                if is_right:
                    node_right[parent] = me
                else:
                    node_left[parent] = me
            count = end - start
            cen = centroids[idx]
            spread = cen.max(axis=0) - cen.min(axis=0)
            axis = int(np.argmax(spread))
            if count <= leaf_size or spread[axis] <= 0.0:
                node_count[me] = count
                continue
            local = np.argsort(cen[:, axis], kind="stable")
            order[start:end] = idx[local]
            mid = start + count // 2
            stack.append((mid, end, me, True))
            stack.append((start, mid, me, False))

        self.order = order
        self.node_lo = np.asarray(node_lo)
        self.node_hi = np.asarray(node_hi)
        self.node_left = np.asarray(node_left, dtype=np.int64)
        self.node_right = np.asarray(node_right, dtype=np.int64)
        self.node_start = np.asarray(node_start, dtype=np.int64)
        self.node_count = np.asarray(node_count, dtype=np.int64)
        ordered = self.triangles[order]
        self._v0 = self.vertices[ordered[:, 0]]
        self._v1 = self.vertices[ordered[:, 1]]
        self._v2 = self.vertices[ordered[:, 2]]

    def _slabs(self, origin, direction):
        d = np.asarray(direction, dtype=np.float64)
        safe = np.where(np.abs(d) < _TINY, np.copysign(_TINY, d), d)
        inv = 1.0 / safe
        return np.asarray(origin, dtype=np.float64), inv

    def _node_entry_exit(self, node, origin, inv):
        t0 = (self.node_lo[node] - origin) * inv
        t1 = (self.node_hi[node] - origin) * inv
        tlo = np.minimum(t0, t1)
        thi = np.maximum(t0, t1)
        return max(tlo[0], tlo[1], tlo[2]), min(thi[0], thi[1], thi[2])

    def intersect(self, origin, direction, tmin: float = 0.0):
        """Nearest hit as (t, tri_id, bary) with ids in input triangle order."""
        origin, inv = self._slabs(origin, direction)
        best_t = np.inf
        best = None
        stack = [0]
        while stack:
            node = stack.pop()
            entry, exit_ = self._node_entry_exit(node, origin, inv)
            # prune only strictly-beyond nodes so exact ties match brute force
            if entry > best_t or exit_ < max(entry, tmin) or exit_ < tmin:
                continue
            cnt = self.node_count[node]
            if cnt > 0:
                s = self.node_start[node]
                e = s + cnt
                t, bary, valid = intersect_triangles(
                    origin, direction, self._v0[s:e], self._v1[s:e],
                    self._v2[s:e], tmin)
                hit = _best_hit(t, bary, valid, self.order[s:e])
                if hit is not None:
                    if hit[0] < best_t or (hit[0] == best_t and
                                           (best is None or hit[1] < best[1])):
                        best_t = hit[0]
                        best = hit
            else:
                left, right = self.node_left[node], self.node_right[node]
                el, _ = self._node_entry_exit(left, origin, inv)
                er, _ = self._node_entry_exit(right, origin, inv)
                # visit nearer child first
                if el <= er:
                    stack.append(right)
                    stack.append(left)
                else:
                    stack.append(left)
                    stack.append(right)
        return best

    def occluded(self, origin, direction, tmax: float, tmin: float = 0.0) -> bool:
        """True if any triangle is hit with tmin < t < tmax (early exit)."""
        origin, inv = self._slabs(origin, direction)
        stack = [0]
        while stack:
            node = stack.pop()
            entry, exit_ = self._node_entry_exit(node, origin, inv)
            if entry >= tmax or exit_ < max(entry, tmin):
                continue
            cnt = self.node_count[node]
            if cnt > 0:
                s = self.node_start[node]
                e = s + cnt
                t, _, valid = intersect_triangles(
                    origin, direction, self._v0[s:e], self._v1[s:e],
                    self._v2[s:e], tmin)
                if (t[valid] < tmax).any():
                    return True
            else:
                stack.append(self.node_right[node])
                stack.append(self.node_left[node])
        return False
