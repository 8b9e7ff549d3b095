"""Compiled inner loops for the deposition processes."""
import numpy as np
from numba import njit

NNN = 0
NN = 1


@njit(cache=True, nogil=True, inline="always")
def _update(h, indptr, indices, x, rule):
    hx = h[x]
    m = hx
    for p in range(indptr[x], indptr[x + 1]):
        v = h[indices[p]]
        if v > m:
            m = v
    if rule == NNN:
        h[x] = m + 1
    elif hx + 1 > m:
        h[x] = hx + 1
    else:
        h[x] = m
    return h[x]


@njit(cache=True, nogil=True)
def grow(h, indptr, indices, seq, rule):
    """Apply the deposition rule at every vertex of ``seq`` in place."""
    for i in range(seq.shape[0]):
        _update(h, indptr, indices, seq[i], rule)


@njit(cache=True, nogil=True)
def grow_tracked(h, indptr, indices, seq, rule, out_max, out_min):
    """Like ``grow`` but record max and min height after every step."""
    n = h.shape[0]
    for i in range(seq.shape[0]):
        _update(h, indptr, indices, seq[i], rule)
        mx = h[0]
        mn = h[0]
        for j in range(1, n):
            if h[j] > mx:
                mx = h[j]
            if h[j] < mn:
                mn = h[j]
        out_max[i] = mx
        out_min[i] = mn


@njit(cache=True, nogil=True)
def grow_coupled(h_sub, ip_sub, ix_sub, rule_sub, h_sup, ip_sup, ix_sup, rule_sup,
                 preimage, seq, out_max_sub, out_max_sup):
    """Drive two processes with one jump stream on the larger vertex set.

    ``preimage[y]`` is the vertex of the smaller graph embedded at ``y`` or -1.
    Returns the number of steps at which pointwise domination failed.
    """
    violations = 0
    mx_sub = h_sub.max()
    mx_sup = h_sup.max()
    for i in range(seq.shape[0]):
        y = seq[i]
        v = _update(h_sup, ip_sup, ix_sup, y, rule_sup)
        if v > mx_sup:
            mx_sup = v
        x = preimage[y]
        if x >= 0:
            u = _update(h_sub, ip_sub, ix_sub, x, rule_sub)
            if u > mx_sub:
                mx_sub = u
            if u > v:
                violations += 1
        out_max_sub[i] = mx_sub
        out_max_sup[i] = mx_sup
    return violations


@njit(cache=True, nogil=True)
def grow_pair_supnorm(h1, h2, indptr, indices, seq, rule, out_diff):
    """Grow two height vectors with the same choices; record sup-norm gaps."""
    n = h1.shape[0]
    for i in range(seq.shape[0]):
        x = seq[i]
        _update(h1, indptr, indices, x, rule)
        _update(h2, indptr, indices, x, rule)
        d = 0
        for j in range(n):
            a = abs(h1[j] - h2[j])
            if a > d:
                d = a
        out_diff[i] = d
