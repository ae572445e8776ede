"""Slow, deliberately naive reference implementations used only by tests."""

import math

import numpy as np


def psnr_oracle(a, b, cap=99.0):
    h, w, c = a.shape
    total = 0.0
    for i in range(h):
        for j in range(w):
            for k in range(c):
                d = float(a[i, j, k]) - float(b[i, j, k])
                total += d * d
    mse = total / (h * w * c)
    return cap if mse == 0 else min(10 * math.log10(1 / mse), cap)


def _gauss2d(size=11, sigma=1.5):
    r = size // 2
    w = np.array([[math.exp(-((i - r) ** 2 + (j - r) ** 2) / (2 * sigma * sigma)) for j in range(size)]
                  for i in range(size)])
    return w / w.sum()


def ssim_oracle(a, b, size=11, sigma=1.5, k1=0.01, k2=0.03):
    win = _gauss2d(size, sigma)
    c1, c2 = (k1 * 1.0) ** 2, (k2 * 1.0) ** 2
    h, w, nc = a.shape
    per_channel = []
    for k in range(nc):
        x, y = a[..., k], b[..., k]
        vals = []
        for i in range(h - size + 1):
            for j in range(w - size + 1):
                px, py = x[i:i + size, j:j + size], y[i:i + size, j:j + size]
                mx, my = np.sum(win * px), np.sum(win * py)
                vx = np.sum(win * px * px) - mx * mx
                vy = np.sum(win * py * py) - my * my
                cxy = np.sum(win * px * py) - mx * my
                vals.append((2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2)))
        per_channel.append(sum(vals) / len(vals))
    return sum(per_channel) / nc


def histogram_oracle(values, bins=256):
    edges = [k / bins for k in range(bins + 1)]
    counts = [0] * bins
    for v in np.ravel(values):
        b = 0
        while b < bins - 1 and v >= edges[b + 1]:
            b += 1
        counts[b] += 1
    return counts


def kld_oracle(ref, test, bins=256, eps=1e-8):
    def dist(vals):
        counts = histogram_oracle(vals, bins)
        n = sum(counts)
        p = [c / n + eps for c in counts]
        z = sum(p)
        return [v / z for v in p]

    p, q = dist(ref), dist(test)
    return sum(pi * math.log(pi / qi) for pi, qi in zip(p, q))
