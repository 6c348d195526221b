"""Loop kernels compiled with numba. Semantics mirror ``_numpy``."""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True, nogil=True, inline="always")
def eval_real(half, x):
    K = half.shape[0] - 1
    if K == 0:
        return half[0].real
    w = complex(math.cos(TWO_PI * x), math.sin(TWO_PI * x))
    acc = half[K]
    for k in range(K - 1, 0, -1):
        acc = acc * w + half[k]
    acc = acc * w
    return half[0].real + 2.0 * acc.real


@njit(cache=True, nogil=True, inline="always")
def step(xi, y, l, P, phi, eps, q, r):
    y = y + eval_real(phi, xi / P)
    xi = (l * xi) % P
    if eps != 0.0:
        y = y + eps * eval_real(q, xi / P)
        y -= math.floor(y)
        if y >= 1.0:
            y = 0.0
        d = eps * eval_real(r, y)
        d -= math.floor(d)
        xi = (xi + np.int64(d * P)) % P
    else:
        y -= math.floor(y)
        if y >= 1.0:
            y = 0.0
    return xi, y


@njit(cache=True, nogil=True)
def eval_observables(x, y, tj, tk, tre, tim, tobs, shifts, has_shift, out):
    n_obs = out.shape[0]
    ys = np.empty(n_obs)
    for o in range(n_obs):
        out[o] = 0.0
        ys[o] = y - eval_real(shifts[o], x) if has_shift[o] else y
    for t in range(tj.shape[0]):
        o = tobs[t]
        ang = TWO_PI * (tj[t] * x + tk[t] * ys[o])
        out[o] += tre[t] * math.cos(ang) - tim[t] * math.sin(ang)


@njit(cache=True, nogil=True)
def trajectory(xi, y, n, stride, l, P, phi, eps, q, r):
    count = n // stride + 1
    xs = np.empty(count, dtype=np.int64)
    ys = np.empty(count)
    xs[0] = xi
    ys[0] = y
    j = 1
    for i in range(1, n + 1):
        xi, y = step(xi, y, l, P, phi, eps, q, r)
        if i % stride == 0:
            xs[j] = xi
            ys[j] = y
            j += 1
    return xs[:j], ys[:j]


@njit(cache=True, nogil=True)
def time_averages(x0, y0, n, l, P, phi, eps, q, r, tj, tk, tre, tim, tobs, shifts, has_shift, n_obs):
    M = x0.shape[0]
    out = np.zeros((M, n_obs))
    vals = np.empty(n_obs)
    acc = np.empty(n_obs)
    for m in range(M):
        xi = x0[m]
        y = y0[m]
        acc[:] = 0.0
        for _ in range(n):
            eval_observables(xi / P, y, tj, tk, tre, tim, tobs, shifts, has_shift, vals)
            for o in range(n_obs):
                acc[o] += vals[o]
            xi, y = step(xi, y, l, P, phi, eps, q, r)
        for o in range(n_obs):
            out[m, o] = acc[o] / n
    return out


@njit(cache=True, nogil=True)
def correlation_sums(x0, y0, n_max, l, P, phi, eps, q, r,
                     a_tj, a_tk, a_tre, a_tim, a_tobs, a_shifts, a_has,
                     b_tj, b_tk, b_tre, b_tim, b_tobs, b_shifts, b_has):
    sums = np.zeros(n_max + 1)
    sumsq = np.zeros(n_max + 1)
    sumb = np.zeros(n_max + 1)
    suma = 0.0
    va = np.empty(1)
    vb = np.empty(1)
    for s in range(x0.shape[0]):
        xi = x0[s]
        y = y0[s]
        eval_observables(xi / P, y, a_tj, a_tk, a_tre, a_tim, a_tobs, a_shifts, a_has, va)
        a = va[0]
        suma += a
        for n in range(n_max + 1):
            eval_observables(xi / P, y, b_tj, b_tk, b_tre, b_tim, b_tobs, b_shifts, b_has, vb)
            c = a * vb[0]
            sums[n] += c
            sumsq[n] += c * c
            sumb[n] += vb[0]
            if n < n_max:
                xi, y = step(xi, y, l, P, phi, eps, q, r)
    return sums, sumsq, suma, sumb


@njit(cache=True, nogil=True)
def cylinder_hits(x0, y0, boxes, l, P, phi, eps, q, r):
    hits = 0
    depth = boxes.shape[0]
    for s in range(x0.shape[0]):
        xi = x0[s]
        y = y0[s]
        inside = True
        for i in range(depth):
            x = xi / P
            if not (boxes[i, 0] <= x < boxes[i, 1] and boxes[i, 2] <= y < boxes[i, 3]):
                inside = False
                break
            if i < depth - 1:
                xi, y = step(xi, y, l, P, phi, eps, q, r)
        if inside:
            hits += 1
    return hits


@njit(cache=True, nogil=True)
def series_table(xs, prefixes, lengths, N, l, dphi):
    """eta and h partial sums for every (prefix, x) pair, zero digits after the prefix.

    eta[c, g] = sum_{j<=N} dphi(x_j) / l^j along the backward orbit of xs[g];
    h[c, g] = sum_{n<=N} l^-n (dphi(tau_n(xs[g])) - dphi(tau_n(0))) on the lift.
    """
    C = prefixes.shape[0]
    G = xs.shape[0]
    eta = np.zeros((C, G))
    h = np.zeros((C, G))
    for c in range(C):
        L = lengths[c]
        for g in range(G):
            a = xs[g]
            b = 0.0
            w = 1.0
            se = 0.0
            sh = 0.0
            for j in range(N):
                d = prefixes[c, j] if j < L else 0
                a = (a + d) / l
                b = (b + d) / l
                w /= l
                fa = eval_real(dphi, a)
                se += fa * w
                sh += (fa - eval_real(dphi, b)) * w
            eta[c, g] = se
            h[c, g] = sh
    return eta, h
