"""Hot inner loops: exhaustive search over laminar-feasible sets and matroid axiom scans.

Each public kernel has a numba implementation (depth-first enumeration with
incremental counters) and a pure-numpy implementation (vectorised over
bitmasks).  ``_accel.BACKEND`` picks one at import time; both are always
importable as ``<name>_numba`` / ``<name>_numpy`` for cross-checking and
benchmarking.  Element ``i`` of a ground set corresponds to bit ``1 << i``.
"""

import numpy as np

from . import _accel
from ._accel import njit

TIE_TOL = 1e-9
NUMPY_CHUNK = 1 << 14


# -- input packing --------------------------------------------------------------

def pack_cover(cover):
    """CSR form of a boolean (n_sets, universe) cover matrix."""
    cover = np.asarray(cover, dtype=bool)
    indptr = np.zeros(cover.shape[0] + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(cover.sum(axis=1))
    indices = np.nonzero(cover)[1].astype(np.int64)
    return indptr, indices


def popcount(masks):
    masks = np.asarray(masks, dtype=np.int64).copy()
    out = np.zeros(masks.shape, dtype=np.int64)
    while np.any(masks):
        out += masks & 1
        masks >>= 1
    return out


# -- exhaustive coverage maximisation -----------------------------------------

@njit
def _coverage_optimum_numba(indptr, indices, weights, chains, quotas, tol):
    n = indptr.shape[0] - 1
    hits = np.zeros(weights.shape[0], dtype=np.int64)
    load = np.zeros(quotas.shape[0], dtype=np.int64)
    value = np.zeros(n + 1)
    chosen = np.zeros(n + 1, dtype=np.int64)
    start = np.zeros(n + 1, dtype=np.int64)
    h = chains.shape[1]
    best_value = 0.0
    best_mask = 0
    mask = 0
    depth = 0
    visited = 1
    while True:
        j = start[depth]
        while j < n:
            ok = True
            for t in range(h):
                node = chains[j, t]
                if node < 0:
                    break
                if load[node] >= quotas[node]:
                    ok = False
                    break
            if ok:
                break
            j += 1
        if j >= n:
            if depth == 0:
                break
            depth -= 1
            e = chosen[depth]
            for t in range(h):
                node = chains[e, t]
                if node < 0:
                    break
                load[node] -= 1
            for p in range(indptr[e], indptr[e + 1]):
                hits[indices[p]] -= 1
            mask ^= 1 << e
            start[depth] = e + 1
            continue
        for t in range(h):
            node = chains[j, t]
            if node < 0:
                break
            load[node] += 1
        gain = 0.0
        for p in range(indptr[j], indptr[j + 1]):
            u = indices[p]
            if hits[u] == 0:
                gain += weights[u]
            hits[u] += 1
        chosen[depth] = j
        mask |= 1 << j
        value[depth + 1] = value[depth] + gain
        depth += 1
        visited += 1
        if value[depth] > best_value + tol:
            best_value = value[depth]
            best_mask = mask
        start[depth] = j + 1
    return best_mask, best_value, visited


def _masks_to_bits(masks, n):
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def _independent_rows(bits, membership, quotas):
    load = bits.astype(np.int64) @ membership
    return np.all(load <= quotas, axis=1)


def _lex_key(mask, n):
    return [i for i in range(n) if (mask >> i) & 1]


def _coverage_optimum_numpy(indptr, indices, weights, chains, quotas, tol):
    n = indptr.shape[0] - 1
    cover = np.zeros((n, weights.shape[0]), dtype=np.float64)
    for i in range(n):
        cover[i, indices[indptr[i]:indptr[i + 1]]] = 1.0
    membership = np.zeros((n, quotas.shape[0]), dtype=np.int64)
    for i in range(n):
        for node in chains[i]:
            if node < 0:
                break
            membership[i, node] = 1
    kept_masks, kept_values = [], []
    total = 1 << n
    for lo in range(0, total, NUMPY_CHUNK):
        masks = np.arange(lo, min(total, lo + NUMPY_CHUNK), dtype=np.int64)
        bits = _masks_to_bits(masks, n)
        keep = _independent_rows(bits, membership, quotas)
        masks, bits = masks[keep], bits[keep]
        covered = (bits.astype(np.float64) @ cover) > 0
        kept_masks.append(masks)
        kept_values.append(np.where(covered, weights, 0.0).sum(axis=1))
    masks = np.concatenate(kept_masks)
    values = np.concatenate(kept_values)
    best_value = float(values.max())
    ties = masks[values >= best_value - tol]
    best_mask = min((int(m) for m in ties), key=lambda m: _lex_key(m, n))
    visited = masks.shape[0]
    return best_mask, best_value, visited


def coverage_optimum(cover, weights, chains, quotas, tol=TIE_TOL, backend=None):
    """Best laminar-feasible subset for a weighted coverage objective.

    ``chains[i]`` lists the quota-node indices containing element ``i``
    (padded with -1); ``quotas`` holds the node capacities.  Returns
    ``(mask, value, n_feasible_sets_visited)``.  Among sets within ``tol`` of
    the best value, the lexicographically smallest sorted index list wins.
    """
    indptr, indices = pack_cover(cover)
    args = (indptr, indices, np.ascontiguousarray(weights, dtype=np.float64),
            np.ascontiguousarray(chains, dtype=np.int64),
            np.ascontiguousarray(quotas, dtype=np.int64), float(tol))
    backend = backend or _accel.BACKEND
    if backend == "numba":
        if not _accel.HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        mask, value, visited = _coverage_optimum_numba(*args)
    else:
        mask, value, visited = _coverage_optimum_numpy(*args)
    return int(mask), float(value), int(visited)


# -- matroid axiom scans ------------------------------------------------------

@njit
def _independent_masks_numba(member_masks, quotas, n):
    total = 1 << n
    out = np.ones(total, dtype=np.bool_)
    for s in range(total):
        for k in range(member_masks.shape[0]):
            x = s & member_masks[k]
            c = 0
            while x:
                x &= x - 1
                c += 1
            if c > quotas[k]:
                out[s] = False
                break
    return out


def _independent_masks_numpy(member_masks, quotas, n):
    masks = np.arange(1 << n, dtype=np.int64)
    out = np.ones(masks.shape[0], dtype=bool)
    for mm, q in zip(member_masks, quotas):
        out &= popcount(masks & mm) <= q
    return out


def independent_masks(member_masks, quotas, n, backend=None):
    """Boolean table over all ``2**n`` subsets: is the subset within every quota?"""
    member_masks = np.ascontiguousarray(member_masks, dtype=np.int64)
    quotas = np.ascontiguousarray(quotas, dtype=np.int64)
    if (backend or _accel.BACKEND) == "numba":
        return _independent_masks_numba(member_masks, quotas, n)
    return _independent_masks_numpy(member_masks, quotas, n)


@njit
def _downward_violation_numba(indep, n):
    for s in range(indep.shape[0]):
        if not indep[s]:
            continue
        for x in range(n):
            if (s >> x) & 1 and not indep[s ^ (1 << x)]:
                return s, s ^ (1 << x)
    return -1, -1


def _downward_violation_numpy(indep, n):
    masks = np.nonzero(indep)[0].astype(np.int64)
    bad = np.zeros(masks.shape[0], dtype=bool)
    for x in range(n):
        has = (masks >> x) & 1 == 1
        bad[has] |= ~indep[masks[has] ^ (1 << x)]
    if not bad.any():
        return -1, -1
    s = int(masks[np.argmax(bad)])
    x = next(x for x in range(n) if (s >> x) & 1 and not indep[s ^ (1 << x)])
    return s, s ^ (1 << x)


def downward_violation(indep, n, backend=None):
    """First independent set with a dependent one-smaller subset, or ``(-1, -1)``."""
    indep = np.ascontiguousarray(indep, dtype=np.bool_)
    if (backend or _accel.BACKEND) == "numba":
        a, b = _downward_violation_numba(indep, n)
    else:
        a, b = _downward_violation_numpy(indep, n)
    return int(a), int(b)


@njit
def _augmentation_violation_numba(indep, n):
    total = indep.shape[0]
    sizes = np.zeros(total, dtype=np.int64)
    for s in range(total):
        x = s
        c = 0
        while x:
            x &= x - 1
            c += 1
        sizes[s] = c
    for a in range(total):
        if not indep[a]:
            continue
        ext = 0
        for x in range(n):
            bit = 1 << x
            if not (a & bit) and indep[a | bit]:
                ext |= bit
        for b in range(total):
            if indep[b] and sizes[b] > sizes[a] and (b & ~a & ext) == 0:
                return a, b
    return -1, -1


def _augmentation_violation_numpy(indep, n):
    masks = np.arange(indep.shape[0], dtype=np.int64)
    sizes = popcount(masks)
    for a in np.nonzero(indep)[0]:
        a = int(a)
        ext = 0
        for x in range(n):
            bit = 1 << x
            if not (a & bit) and indep[a | bit]:
                ext |= bit
        bad = indep & (sizes > sizes[a]) & ((masks & ~a & ext) == 0)
        if bad.any():
            return a, int(np.argmax(bad))
    return -1, -1


def augmentation_violation(indep, n, backend=None):
    """First pair of independent sets ``(A, B)`` with ``|A| < |B|`` such that no
    element of ``B - A`` extends ``A``; ``(-1, -1)`` when augmentation holds."""
    indep = np.ascontiguousarray(indep, dtype=np.bool_)
    if (backend or _accel.BACKEND) == "numba":
        a, b = _augmentation_violation_numba(indep, n)
    else:
        a, b = _augmentation_violation_numpy(indep, n)
    return int(a), int(b)
