"""Hot loops: ball scans and direct lattice sums.

Each public function dispatches to a numba kernel or to a vectorised numpy
fallback depending on :func:`roughfrac._accel.backend`.  Both paths visit
cells in the same (C, lexicographic) order and use the same membership test,
so they select identical cell sets; sums can differ only by rounding.

Conventions shared by all kernels:

* grid values are flattened in C order, ``m`` cells per axis, ``n`` axes;
* a cell with index ``i`` along an axis has coordinate ``-L + (i + 0.5) * h``;
* a cell belongs to a ball when ``|y - c|**2 <= r**2 * (1 + MEMBERSHIP_RTOL)``;
* lattice stencils are arrays of shape ``(2m - 1,)*n`` flattened, indexed by
  offset ``x - y + (m - 1)`` per axis.
"""
import numpy as np

from ._accel import backend, jit
from .geometry import MEMBERSHIP_RTOL


# ---------------------------------------------------------------------------
# ball scans with arbitrary (float) centres
# ---------------------------------------------------------------------------

def _box_bounds(center, radius, L, h, m):
    lo = np.maximum(0, np.ceil((center - radius + L) / h - 0.5).astype(np.int64) - 1)
    hi = np.minimum(m - 1, np.floor((center + radius + L) / h - 0.5).astype(np.int64) + 1)
    return lo, hi


@jit
def _ball_box(c, r, L, h, m, lo, hi):
    n = c.shape[0]
    total = 1
    for d in range(n):
        a = int(np.ceil((c[d] - r + L) / h - 0.5)) - 1
        b = int(np.floor((c[d] + r + L) / h - 0.5)) + 1
        lo[d] = max(0, a)
        hi[d] = min(m - 1, b)
        if hi[d] < lo[d]:
            return 0
        total *= hi[d] - lo[d] + 1
    return total


@jit
def _ball_sums_nb(arrs, centers, radii, L, h, m, rtol):
    k = arrs.shape[0]
    K, n = centers.shape
    sums = np.zeros((K, k))
    counts = np.zeros(K, dtype=np.int64)
    lo = np.zeros(n, dtype=np.int64)
    hi = np.zeros(n, dtype=np.int64)
    idx = np.zeros(n, dtype=np.int64)
    for b in range(K):
        r = radii[b]
        r2 = r * r * (1.0 + rtol)
        total = _ball_box(centers[b], r, L, h, m, lo, hi)
        for t in range(total):
            rem = t
            for d in range(n - 1, -1, -1):
                span = hi[d] - lo[d] + 1
                idx[d] = lo[d] + rem % span
                rem //= span
            d2 = 0.0
            flat = 0
            for d in range(n):
                dx = (-L + (idx[d] + 0.5) * h) - centers[b, d]
                d2 += dx * dx
                flat = flat * m + idx[d]
            if d2 <= r2:
                counts[b] += 1
                for a in range(k):
                    sums[b, a] += arrs[a, flat]
    return sums, counts


def _ball_mask_np(center, radius, L, h, m):
    n = center.shape[0]
    lo, hi = _box_bounds(center, radius, L, h, m)
    if np.any(hi < lo):
        return None, None
    d2 = 0.0
    for d in range(n):
        c = -L + (np.arange(lo[d], hi[d] + 1) + 0.5) * h
        dx = c - center[d]
        shp = [1] * n
        shp[d] = -1
        d2 = d2 + (dx * dx).reshape(shp)
    slices = tuple(slice(lo[d], hi[d] + 1) for d in range(n))
    return slices, d2 <= radius * radius * (1.0 + MEMBERSHIP_RTOL)


def _ball_sums_np(arrs, centers, radii, L, h, m):
    k = arrs.shape[0]
    K, n = centers.shape
    grids = arrs.reshape((k,) + (m,) * n)
    sums = np.zeros((K, k))
    counts = np.zeros(K, dtype=np.int64)
    for b in range(K):
        slices, mask = _ball_mask_np(centers[b], radii[b], L, h, m)
        if slices is None:
            continue
        counts[b] = int(mask.sum())
        for a in range(k):
            sums[b, a] = grids[(a,) + slices][mask].sum()
    return sums, counts


def ball_sums(arrays, centers, radii, L, h, m):
    """Sums of each array over the cells of each ball, plus cell counts.

    ``arrays`` has shape (k, m**n); returns ``(sums (K, k), counts (K,))``.
    """
    arrs = np.ascontiguousarray(arrays, dtype=float).reshape(len(arrays), -1)
    centers = np.ascontiguousarray(centers, dtype=float)
    radii = np.ascontiguousarray(radii, dtype=float)
    if backend() == "numba":
        return _ball_sums_nb(arrs, centers, radii, float(L), float(h), int(m), MEMBERSHIP_RTOL)
    return _ball_sums_np(arrs, centers, radii, L, h, m)


@jit
def _ball_osc_nb(b_vals, mu, centers, radii, means, power, L, h, m, rtol):
    K, n = centers.shape
    out = np.zeros(K)
    lo = np.zeros(n, dtype=np.int64)
    hi = np.zeros(n, dtype=np.int64)
    idx = np.zeros(n, dtype=np.int64)
    for b in range(K):
        r = radii[b]
        r2 = r * r * (1.0 + rtol)
        total = _ball_box(centers[b], r, L, h, m, lo, hi)
        acc = 0.0
        for t in range(total):
            rem = t
            for d in range(n - 1, -1, -1):
                span = hi[d] - lo[d] + 1
                idx[d] = lo[d] + rem % span
                rem //= span
            d2 = 0.0
            flat = 0
            for d in range(n):
                dx = (-L + (idx[d] + 0.5) * h) - centers[b, d]
                d2 += dx * dx
                flat = flat * m + idx[d]
            if d2 <= r2:
                dev = abs(b_vals[flat] - means[b])
                if power == 1.0:
                    acc += dev * mu[flat]
                else:
                    acc += dev**power * mu[flat]
        out[b] = acc
    return out


def ball_oscillation(b_vals, mu, centers, radii, means, power, L, h, m):
    """Per ball: sum over cells of |b - mean_ball|**power * mu."""
    b_vals = np.ascontiguousarray(b_vals, dtype=float).ravel()
    mu = np.ascontiguousarray(mu, dtype=float).ravel()
    centers = np.ascontiguousarray(centers, dtype=float)
    radii = np.ascontiguousarray(radii, dtype=float)
    means = np.ascontiguousarray(means, dtype=float)
    if backend() == "numba":
        return _ball_osc_nb(b_vals, mu, centers, radii, means, float(power), float(L), float(h), int(m), MEMBERSHIP_RTOL)
    n = centers.shape[1]
    bg = b_vals.reshape((m,) * n)
    mg = mu.reshape((m,) * n)
    out = np.zeros(len(radii))
    for k in range(len(radii)):
        slices, mask = _ball_mask_np(centers[k], radii[k], L, h, m)
        if slices is None:
            continue
        dev = np.abs(bg[slices][mask] - means[k])
        out[k] = np.sum((dev if power == 1.0 else dev**power) * mg[slices][mask])
    return out


@jit
def _scatter_max_nb(values, centers, radii, L, h, m, rtol, out):
    K, n = centers.shape
    lo = np.zeros(n, dtype=np.int64)
    hi = np.zeros(n, dtype=np.int64)
    idx = np.zeros(n, dtype=np.int64)
    for b in range(K):
        r = radii[b]
        r2 = r * r * (1.0 + rtol)
        total = _ball_box(centers[b], r, L, h, m, lo, hi)
        v = values[b]
        for t in range(total):
            rem = t
            for d in range(n - 1, -1, -1):
                span = hi[d] - lo[d] + 1
                idx[d] = lo[d] + rem % span
                rem //= span
            d2 = 0.0
            flat = 0
            for d in range(n):
                dx = (-L + (idx[d] + 0.5) * h) - centers[b, d]
                d2 += dx * dx
                flat = flat * m + idx[d]
            if d2 <= r2 and v > out[flat]:
                out[flat] = v
    return out


def ball_scatter_max(values, centers, radii, L, h, m, n):
    """Cellwise maximum of ``values[b]`` over the balls containing each cell.

    Cells covered by no ball are left at ``-inf``.
    """
    values = np.ascontiguousarray(values, dtype=float)
    centers = np.ascontiguousarray(centers, dtype=float)
    radii = np.ascontiguousarray(radii, dtype=float)
    out = np.full(m**n, -np.inf)
    if backend() == "numba":
        return _scatter_max_nb(values, centers, radii, float(L), float(h), int(m), MEMBERSHIP_RTOL, out).reshape((m,) * n)
    grid = out.reshape((m,) * n)
    for k in range(len(values)):
        slices, mask = _ball_mask_np(centers[k], radii[k], L, h, m)
        if slices is None:
            continue
        view = grid[slices]
        view[mask] = np.maximum(view[mask], values[k])
    return grid


# ---------------------------------------------------------------------------
# direct lattice sums over the support of the input
# ---------------------------------------------------------------------------

def cell_coords(m, n):
    """Integer coordinates (N, n) of every cell in C order."""
    return np.stack(np.unravel_index(np.arange(m**n), (m,) * n), axis=1).astype(np.int64)


def support(values):
    """Flat indices and integer coordinates of the nonzero cells."""
    flat = np.flatnonzero(values.ravel())
    coords = np.stack(np.unravel_index(flat, values.shape), axis=1).astype(np.int64)
    return flat, coords


@jit
def _stencil_sum_nb(stencil, f_sup, sup_coords, m, n, N):
    w = 2 * m - 1
    out = np.zeros(N)
    xc = np.zeros(n, dtype=np.int64)
    S = f_sup.shape[0]
    for x in range(N):
        rem = x
        for d in range(n - 1, -1, -1):
            xc[d] = rem % m
            rem //= m
        acc = 0.0
        for s in range(S):
            idx = 0
            for d in range(n):
                idx = idx * w + (xc[d] - sup_coords[s, d] + m - 1)
            acc += stencil[idx] * f_sup[s]
        out[x] = acc
    return out


def _stencil_flat_index(xc, sup_coords, m):
    w = 2 * m - 1
    off = xc[None, :] - sup_coords + (m - 1)
    idx = off[:, 0]
    for d in range(1, off.shape[1]):
        idx = idx * w + off[:, d]
    return idx


def stencil_sum(stencil, values):
    """out[x] = sum_y stencil[x - y] * values[y], summed over y in C order."""
    m = values.shape[0]
    n = values.ndim
    flat, coords = support(values)
    f_sup = values.ravel()[flat].astype(float)
    st = np.ascontiguousarray(stencil, dtype=float).ravel()
    if backend() == "numba":
        return _stencil_sum_nb(st, f_sup, coords, m, n, m**n).reshape(values.shape)
    out = np.zeros(m**n)
    if f_sup.size:
        for x, xc in enumerate(cell_coords(m, n)):
            out[x] = st[_stencil_flat_index(xc, coords, m)] @ f_sup
    return out.reshape(values.shape)


@jit
def _commutator_sum_nb(stencil, b, f_sup, b_sup, sup_coords, m, n, N):
    w = 2 * m - 1
    out = np.zeros(N)
    xc = np.zeros(n, dtype=np.int64)
    S = f_sup.shape[0]
    for x in range(N):
        rem = x
        for d in range(n - 1, -1, -1):
            xc[d] = rem % m
            rem //= m
        bx = b[x]
        acc = 0.0
        for s in range(S):
            idx = 0
            for d in range(n):
                idx = idx * w + (xc[d] - sup_coords[s, d] + m - 1)
            acc += stencil[idx] * (bx - b_sup[s]) * f_sup[s]
        out[x] = acc
    return out


def commutator_sum(stencil, b, values):
    """out[x] = sum_y stencil[x - y] * (b[x] - b[y]) * values[y]."""
    m = values.shape[0]
    n = values.ndim
    flat, coords = support(values)
    bf = np.ascontiguousarray(b, dtype=float).ravel()
    f_sup = values.ravel()[flat].astype(float)
    b_sup = bf[flat]
    st = np.ascontiguousarray(stencil, dtype=float).ravel()
    if backend() == "numba":
        return _commutator_sum_nb(st, bf, f_sup, b_sup, coords, m, n, m**n).reshape(values.shape)
    out = np.zeros(m**n)
    if f_sup.size:
        for x, xc in enumerate(cell_coords(m, n)):
            out[x] = st[_stencil_flat_index(xc, coords, m)] @ ((bf[x] - b_sup) * f_sup)
    return out.reshape(values.shape)


def radius_bins(radii, h, m, n):
    """Lookup table: squared integer offset -> first ladder index that contains it.

    Entries equal to ``len(radii)`` mark offsets beyond the largest radius.
    """
    d2 = np.arange(n * (m - 1) ** 2 + 1, dtype=float) * h * h
    lim = np.asarray(radii, dtype=float) ** 2 * (1.0 + MEMBERSHIP_RTOL)
    return np.searchsorted(lim, d2, side="left").astype(np.int64)


@jit
def _ladder_bins_nb(stencil, g_sup, sup_coords, bins, J, m, n, N):
    w = 2 * m - 1
    out = np.zeros((J, N))
    xc = np.zeros(n, dtype=np.int64)
    S = g_sup.shape[0]
    for x in range(N):
        rem = x
        for d in range(n - 1, -1, -1):
            xc[d] = rem % m
            rem //= m
        for s in range(S):
            idx = 0
            d2 = 0
            for d in range(n):
                off = xc[d] - sup_coords[s, d]
                d2 += off * off
                idx = idx * w + (off + m - 1)
            j = bins[d2]
            if j < J:
                out[j, x] += stencil[idx] * g_sup[s]
    return out


def ladder_sums(stencil, values, radii, h):
    """Centred-ball sums S_j(x) = sum_{|y-x| <= r_j} stencil[x-y] * values[y].

    Returns an array of shape (len(radii),) + values.shape, cumulative in j.
    """
    m = values.shape[0]
    n = values.ndim
    J = len(radii)
    bins = radius_bins(radii, h, m, n)
    flat, coords = support(values)
    g_sup = values.ravel()[flat].astype(float)
    st = np.ascontiguousarray(stencil, dtype=float).ravel()
    if backend() == "numba":
        parts = _ladder_bins_nb(st, g_sup, coords, bins, J, m, n, m**n)
    else:
        parts = np.zeros((J, m**n))
        if g_sup.size:
            for x, xc in enumerate(cell_coords(m, n)):
                off = xc[None, :] - coords
                j = bins[np.sum(off * off, axis=1)]
                contrib = st[_stencil_flat_index(xc, coords, m)] * g_sup
                parts[:, x] = np.bincount(j, weights=contrib, minlength=J + 1)[:J]
    return np.cumsum(parts, axis=0).reshape((J,) + values.shape)


@jit
def _abs_commutator_nb(ang, ker, b, f_sup, b_sup, sup_coords, bins, J, m, n, N):
    w = 2 * m - 1
    parts = np.zeros((J, N))
    tsum = np.zeros(N)
    xc = np.zeros(n, dtype=np.int64)
    S = f_sup.shape[0]
    for x in range(N):
        rem = x
        for d in range(n - 1, -1, -1):
            xc[d] = rem % m
            rem //= m
        bx = b[x]
        acc = 0.0
        for s in range(S):
            idx = 0
            d2 = 0
            for d in range(n):
                off = xc[d] - sup_coords[s, d]
                d2 += off * off
                idx = idx * w + (off + m - 1)
            g = abs(bx - b_sup[s]) * f_sup[s]
            acc += ker[idx] * g
            j = bins[d2]
            if j < J:
                parts[j, x] += ang[idx] * g
        tsum[x] = acc
    return parts, tsum


def abs_commutator_sums(ang_stencil, ker_stencil, b, f_abs, radii, h):
    """Both nonnegative commutator sums in one pass over the support of f.

    Returns ``(S, T)`` with S_j(x) = sum_{|y-x|<=r_j} ang[x-y] |b(x)-b(y)| f(y)
    (cumulative in j) and T(x) = sum_y ker[x-y] |b(x)-b(y)| f(y).
    """
    m = f_abs.shape[0]
    n = f_abs.ndim
    J = len(radii)
    bins = radius_bins(radii, h, m, n)
    flat, coords = support(f_abs)
    bf = np.ascontiguousarray(b, dtype=float).ravel()
    f_sup = f_abs.ravel()[flat].astype(float)
    b_sup = bf[flat]
    ang = np.ascontiguousarray(ang_stencil, dtype=float).ravel()
    ker = np.ascontiguousarray(ker_stencil, dtype=float).ravel()
    if backend() == "numba":
        parts, tsum = _abs_commutator_nb(ang, ker, bf, f_sup, b_sup, coords, bins, J, m, n, m**n)
    else:
        parts = np.zeros((J, m**n))
        tsum = np.zeros(m**n)
        if f_sup.size:
            for x, xc in enumerate(cell_coords(m, n)):
                off = xc[None, :] - coords
                j = bins[np.sum(off * off, axis=1)]
                sidx = _stencil_flat_index(xc, coords, m)
                g = np.abs(bf[x] - b_sup) * f_sup
                tsum[x] = ker[sidx] @ g
                parts[:, x] = np.bincount(j, weights=ang[sidx] * g, minlength=J + 1)[:J]
    return np.cumsum(parts, axis=0).reshape((J,) + f_abs.shape), tsum.reshape(f_abs.shape)
