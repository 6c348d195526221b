"""Vectorized numpy kernels; the fallback when numba is disabled.

Each function vectorizes over the sample axis and keeps the time loop in
Python, so it is only competitive when many samples run side by side.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def eval_real(half, x):
    x = np.asarray(x, dtype=float)
    K = half.shape[0] - 1
    if K == 0:
        return np.full(x.shape, half[0].real)
    w = np.cos(TWO_PI * x) + 1j * np.sin(TWO_PI * x)
    acc = np.full(x.shape, half[K], dtype=complex)
    for k in range(K - 1, 0, -1):
        acc = acc * w + half[k]
    acc = acc * w
    return half[0].real + 2.0 * acc.real


def _wrap(y):
    y = y - np.floor(y)
    y[y >= 1.0] = 0.0
    return y


def step(xi, y, l, P, phi, eps, q, r):
    y = y + eval_real(phi, xi / P)
    xi = (l * xi) % P
    if eps != 0.0:
        y = _wrap(y + eps * eval_real(q, xi / P))
        d = eps * eval_real(r, y)
        d = d - np.floor(d)
        xi = (xi + (d * P).astype(np.int64)) % P
    else:
        y = _wrap(y)
    return xi, y


def eval_observables(x, y, tj, tk, tre, tim, tobs, shifts, has_shift, n_obs):
    out = np.zeros((n_obs,) + np.shape(x))
    ys = [y - eval_real(shifts[o], x) if has_shift[o] else y for o in range(n_obs)]
    for t in range(tj.shape[0]):
        o = tobs[t]
        ang = TWO_PI * (tj[t] * x + tk[t] * ys[o])
        out[o] += tre[t] * np.cos(ang) - tim[t] * np.sin(ang)
    return out


def trajectory(xi, y, n, stride, l, P, phi, eps, q, r):
    xs = [np.int64(xi)]
    ys = [float(y)]
    xi = np.array([xi], dtype=np.int64)
    y = np.array([y], dtype=float)
    for i in range(1, n + 1):
        xi, y = step(xi, y, l, P, phi, eps, q, r)
        if i % stride == 0:
            xs.append(xi[0])
            ys.append(y[0])
    return np.array(xs, dtype=np.int64), np.array(ys)


def time_averages(x0, y0, n, l, P, phi, eps, q, r, tj, tk, tre, tim, tobs, shifts, has_shift, n_obs):
    xi = np.array(x0, dtype=np.int64)
    y = np.array(y0, dtype=float)
    acc = np.zeros((n_obs, xi.shape[0]))
    for _ in range(n):
        acc += eval_observables(xi / P, y, tj, tk, tre, tim, tobs, shifts, has_shift, n_obs)
        xi, y = step(xi, y, l, P, phi, eps, q, r)
    return (acc / n).T


def correlation_sums(x0, y0, n_max, l, P, phi, eps, q, r,
                     a_tj, a_tk, a_tre, a_tim, a_tobs, a_shifts, a_has,
                     b_tj, b_tk, b_tre, b_tim, b_tobs, b_shifts, b_has):
    xi = np.array(x0, dtype=np.int64)
    y = np.array(y0, dtype=float)
    a = eval_observables(xi / P, y, a_tj, a_tk, a_tre, a_tim, a_tobs, a_shifts, a_has, 1)[0]
    sums = np.zeros(n_max + 1)
    sumsq = np.zeros(n_max + 1)
    sumb = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        b = eval_observables(xi / P, y, b_tj, b_tk, b_tre, b_tim, b_tobs, b_shifts, b_has, 1)[0]
        c = a * b
        sums[n] = c.sum()
        sumsq[n] = (c * c).sum()
        sumb[n] = b.sum()
        if n < n_max:
            xi, y = step(xi, y, l, P, phi, eps, q, r)
    return sums, sumsq, a.sum(), sumb


def cylinder_hits(x0, y0, boxes, l, P, phi, eps, q, r):
    xi = np.array(x0, dtype=np.int64)
    y = np.array(y0, dtype=float)
    alive = np.ones(xi.shape[0], dtype=bool)
    depth = boxes.shape[0]
    for i in range(depth):
        x = xi / P
        alive &= (boxes[i, 0] <= x) & (x < boxes[i, 1]) & (boxes[i, 2] <= y) & (y < boxes[i, 3])
        if i < depth - 1:
            xi, y = step(xi, y, l, P, phi, eps, q, r)
    return int(alive.sum())


def series_table(xs, prefixes, lengths, N, l, dphi):
    C = prefixes.shape[0]
    G = xs.shape[0]
    a = np.broadcast_to(np.asarray(xs, dtype=float), (C, G)).copy()
    b = np.zeros((C, G))
    eta = np.zeros((C, G))
    h = np.zeros((C, G))
    w = 1.0
    for j in range(N):
        d = np.where(j < lengths, prefixes[:, j] if j < prefixes.shape[1] else 0, 0)[:, None]
        a = (a + d) / l
        b = (b + d) / l
        w /= l
        fa = eval_real(dphi, a)
        eta += fa * w
        h += (fa - eval_real(dphi, b)) * w
    return eta, h
