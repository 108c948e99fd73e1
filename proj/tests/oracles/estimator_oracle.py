"""Reference values for CHROM, POS and the Welch spectrum, computed with NumPy/SciPy.

Run once; the printed numbers are frozen into tests/test_estimators.cpp and
tests/test_eval.cpp.
"""
import math

import numpy as np
from scipy import signal

fs = 30.0
n = 128
t = np.arange(n) / fs
r = 100 + 2 * np.sin(2 * np.pi * 1.2 * t) + 0.5 * np.cos(2 * np.pi * 0.3 * t)
g = 80 + 3 * np.sin(2 * np.pi * 1.2 * t + 0.3) + 0.2 * t
b = 60 + 1 * np.sin(2 * np.pi * 1.2 * t + 0.6) + 0.4 * np.sin(2 * np.pi * 2.7 * t)


def chrom(r, g, b):
    rn, gn, bn = r / r.mean(), g / g.mean(), b / b.mean()
    x = 3 * rn - 2 * gn
    y = 1.5 * rn + gn - 1.5 * bn
    bb, aa = signal.butter(2, [0.7, 4.0], btype="band", fs=fs)
    xf = signal.filtfilt(bb, aa, x)
    yf = signal.filtfilt(bb, aa, y)
    s = xf - (xf.std() / yf.std()) * yf
    return s - s.mean()


def pos(r, g, b):
    l = math.ceil(1.6 * fs)
    out = np.zeros(len(r))
    for m in range(len(r) - l + 1):
        c = np.stack([r[m:m + l], g[m:m + l], b[m:m + l]])
        cn = c / c.mean(axis=1, keepdims=True)
        s = np.array([[0, 1, -1], [-2, 1, 1]]) @ cn
        h = s[0] + (s[0].std() / s[1].std()) * s[1]
        out[m:m + l] += h - h.mean()
    return out


for name, f in (("chrom", chrom), ("pos", pos)):
    s = f(r, g, b)
    for i in (0, 17, 64, 100, 127):
        print(f"{name}[{i}] = {s[i]!r}")

x = np.sin(2 * np.pi * 1.25 * t) + 0.3 * np.cos(2 * np.pi * 2.1 * t)
seg = min(256, n)
nfft = max(2048, 1 << (4 * seg - 1).bit_length())
f, p = signal.welch(x, fs=fs, window="hann", nperseg=seg, noverlap=seg // 2, nfft=nfft,
                    detrend=False, scaling="density")
print("nfft =", nfft, "bins =", len(f))
for k in (0, 85, 86, 143, 500, 1024):
    print(f"psd[{k}] f={f[k]!r} p={p[k]!r}")

for k in (64, 256, 1024, 4096):
    print(f"log10({k}!) = {math.lgamma(k + 1) / math.log(10)!r}")
