"""Fincke–Pohst enumeration of shifted integer points in a positive definite ellipsoid.

Enumerates integer x with (x + c)^T P (x + c) <= R. The two innermost levels are
vectorised with numpy; an optional quadratic level constraint (x + c)^T A (x + c) / 2 = t
is solved for the innermost coordinate instead of scanning it.
"""

from __future__ import annotations

import math

import numpy as np


class NotPositiveDefinite(ValueError):
    pass


def _upper_factor(p: np.ndarray):
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    scale = max(1.0, float(np.max(np.abs(p)))) if n else 1.0
    w = np.linalg.eigvalsh(p) if n else np.array([1.0])
    if n and w[0] <= 1e-12 * scale:
        raise NotPositiveDefinite(f"majorant is not positive definite (min eigenvalue {w[0]:.3e})")
    u = np.linalg.cholesky(p).T
    diag = np.diag(u).copy()
    q = u / diag[:, None]
    return diag**2, q


def fincke_pohst(p, center, bound: float, level=None, max_points: int = 50_000_000) -> np.ndarray:
    """Integer points x with (x+center)^T p (x+center) <= bound, sorted lexicographically.

    ``level`` is an optional pair ``(A, t)``; only points with (x+c)^T A (x+c)/2 close to t
    (within float tolerance) are returned, and the caller is expected to confirm exactly.
    """
    p = np.asarray(p, dtype=float)
    c = np.asarray(center, dtype=float)
    n = p.shape[0]
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    if bound < 0:
        return np.zeros((0, n), dtype=np.int64)
    qd, q = _upper_factor(p)
    r_eff = bound * (1 + 1e-10) + 1e-12
    if level is not None:
        a_mat = np.asarray(level[0], dtype=float)
        t = float(level[1])
    chunks: list[np.ndarray] = []
    total = [0]

    def finish(y_rows: np.ndarray, rem: np.ndarray):
        # y_rows: (k, n) with coordinate 0 unset (zero); rem: remaining budget per row
        cen = -(y_rows[:, 1:] @ q[0, 1:]) if n > 1 else np.zeros(len(y_rows))
        half = np.sqrt(np.maximum(rem, 0.0) / qd[0])
        lo = np.ceil(cen - half - c[0] - 1e-12).astype(np.int64)
        hi = np.floor(cen + half - c[0] + 1e-12).astype(np.int64)
        if level is None:
            counts = np.maximum(hi - lo + 1, 0)
            m = int(counts.sum())
            if m == 0:
                return
            idx = np.repeat(np.arange(len(y_rows)), counts)
            offs = np.arange(m) - np.repeat(np.cumsum(counts) - counts, counts)
            x0 = np.repeat(lo, counts) + offs
            rows = y_rows[idx].copy()
            rows[:, 0] = x0 + c[0]
        else:
            a2 = 0.5 * a_mat[0, 0]
            b1 = y_rows @ a_mat[0]
            c0 = 0.5 * np.einsum("ij,jk,ik->i", y_rows, a_mat, y_rows) - t
            cands = []
            if abs(a2) > 1e-14:
                disc = b1 * b1 - 4 * a2 * c0
                ok = disc >= -1e-9 * (1 + b1 * b1)
                sq = np.sqrt(np.maximum(disc, 0.0))
                for sgn in (1.0, -1.0):
                    root = (-b1 + sgn * sq) / (2 * a2)
                    cands.append((np.where(ok, root, np.nan)))
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    cands.append(np.where(np.abs(b1) > 1e-14, -c0 / b1, np.nan))
            sel_rows = []
            sel_x = []
            seen = None
            for k, root in enumerate(cands):
                good = np.isfinite(root)
                x0 = np.where(good, np.rint(np.where(good, root, 0.0) - c[0]), 0).astype(np.int64)
                good &= (x0 >= lo) & (x0 <= hi)
                if k == 1 and seen is not None:
                    good &= ~(seen[0] & (seen[1] == x0))
                if k == 0:
                    seen = (good.copy(), x0.copy())
                sel_rows.append(np.nonzero(good)[0])
                sel_x.append(x0[good])
            idx = np.concatenate(sel_rows)
            x0 = np.concatenate(sel_x)
            if len(idx) == 0:
                return
            rows = y_rows[idx].copy()
            rows[:, 0] = x0 + c[0]
            val = 0.5 * np.einsum("ij,jk,ik->i", rows, a_mat, rows) - t
            scale = 1.0 + np.abs(t) + np.einsum("ij,jk,ik->i", np.abs(rows), np.abs(a_mat), np.abs(rows))
            rows = rows[np.abs(val) <= 1e-7 * scale]
        if len(rows):
            vals = np.einsum("ij,jk,ik->i", rows, p, rows)
            rows = rows[vals <= bound + 1e-12 * max(1.0, abs(bound))]
            x = np.rint(rows - c).astype(np.int64)
            total[0] += len(x)
            if total[0] > max_points:
                raise RuntimeError("enumeration budget exceeded")
            chunks.append(x)

    def expand_level1(y: np.ndarray, rem: float):
        cen = -(y[2:] @ q[1, 2:])
        half = math.sqrt(max(rem, 0.0) / qd[1])
        lo = math.ceil(cen - half - c[1] - 1e-12)
        hi = math.floor(cen + half - c[1] + 1e-12)
        if hi < lo:
            return
        x1 = np.arange(lo, hi + 1)
        rows = np.tile(y, (len(x1), 1))
        rows[:, 1] = x1 + c[1]
        rem1 = rem - qd[1] * (rows[:, 1] - cen) ** 2
        keep = rem1 >= -1e-12
        finish(rows[keep], rem1[keep])

    def dfs(i: int, y: np.ndarray, rem: float):
        if i == 1:
            expand_level1(y, rem)
            return
        cen = -(y[i + 1 :] @ q[i, i + 1 :])
        half = math.sqrt(max(rem, 0.0) / qd[i])
        lo = math.ceil(cen - half - c[i] - 1e-12)
        hi = math.floor(cen + half - c[i] + 1e-12)
        for xi in range(lo, hi + 1):
            yi = xi + c[i]
            r2 = rem - qd[i] * (yi - cen) ** 2
            if r2 < -1e-12:
                continue
            y2 = y.copy()
            y2[i] = yi
            dfs(i - 1, y2, r2)

    y0 = np.zeros(n)
    if n == 1:
        finish(y0[None, :], np.array([r_eff]))
    else:
        dfs(n - 1, y0, r_eff)
    if not chunks:
        return np.zeros((0, n), dtype=np.int64)
    out = np.concatenate(chunks)
    order = np.lexsort(out.T[::-1])
    return out[order]
