"""Reliability-sorted 2D phase unwrapping.

Per-pixel reliability is derived from wrapped second differences along the
horizontal, vertical and both diagonal directions (border pixels use
mirrored neighbors).  Edges between 4-neighbors are scored by the sum of
their endpoint reliabilities and processed in decreasing score; an offset
union-find merges pixel groups, adding the integer multiple of 2 pi that
removes the edge's wrapped jump to the smaller group.  The global piston
is left free.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateSize
from .raster import RealField


def wrap(phase):
    return np.angle(np.exp(1j * np.asarray(phase, dtype=np.float64)))


def _reliability(p: np.ndarray) -> np.ndarray:
    pad = np.pad(p, 1, mode="reflect")

    def second(dy, dx):
        a = pad[1 - dy:pad.shape[0] - 1 - dy, 1 - dx:pad.shape[1] - 1 - dx]
        b = pad[1 + dy:pad.shape[0] - 1 + dy, 1 + dx:pad.shape[1] - 1 + dx]
        return wrap(a - p) - wrap(p - b)

    h = second(0, 1)
    v = second(1, 0)
    d1 = second(1, 1)
    d2 = second(1, -1)
    dsum = h * h + v * v + d1 * d1 + d2 * d2
    return np.where(dsum > 0, 1.0 / np.maximum(dsum, 1e-300), 1e300)


def unwrap2d(wrapped: RealField) -> RealField:
    """Continuous phase from wrapped phase; output differs from the input by
    an integer multiple of 2 pi at every pixel."""
    p = wrapped.data
    h, w = p.shape
    if h < 2 or w < 2:
        raise DegenerateSize("unwrap2d needs at least 2 x 2")
    rel = _reliability(p)
    flat = p.ravel()
    idx = np.arange(h * w).reshape(h, w)

    # horizontal edges first, then vertical; ties break on lower edge index
    ea = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    eb = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    score = np.concatenate([(rel[:, :-1] + rel[:, 1:]).ravel(),
                            (rel[:-1, :] + rel[1:, :]).ravel()])
    order = np.argsort(-score, kind="stable")

    parent = np.arange(h * w)
    size = np.ones(h * w, dtype=np.int64)
    offset = np.zeros(h * w, dtype=np.int64)  # 2pi multiples relative to parent

    def find(i):
        path = []
        while parent[i] != i:
            path.append(i)
            i = parent[i]
        acc = 0
        for j in reversed(path):
            acc += offset[j]
            parent[j] = i
            offset[j] = acc
        return i

    two_pi = 2.0 * np.pi
    for e in order:
        a = int(ea[e])
        b = int(eb[e])
        ra = find(a)
        rb = find(b)
        if ra == rb:
            continue
        # k shifts b's group so the edge jump disappears
        k = int(np.rint((flat[a] + two_pi * offset[a]
                         - flat[b] - two_pi * offset[b]) / two_pi))
        if size[ra] < size[rb]:
            parent[ra] = rb
            offset[ra] = -k
            size[rb] += size[ra]
        else:
            parent[rb] = ra
            offset[rb] = k
            size[ra] += size[rb]

    for i in range(h * w):
        find(i)
    return RealField((flat + two_pi * offset).reshape(h, w))
