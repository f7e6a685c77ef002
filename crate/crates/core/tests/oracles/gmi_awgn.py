"""AWGN bit-metric GMI of Gray-labeled square QAM by Gauss-Hermite quadrature.

Square QAM with a binary reflected Gray code per axis factorizes into two
PAM alphabets, so the 4D value is four times the per-dimension PAM GMI.
SNR is Es/N0 with unit complex symbol energy.
"""
import sys
import numpy as np


def pam_gmi(levels: int, sigma2: float, nodes: int = 200) -> float:
    a = 2.0 * np.arange(levels) - (levels - 1)
    a = a / np.sqrt(np.mean(a**2) * 2.0)  # half the complex energy per axis
    labels = np.arange(levels) ^ (np.arange(levels) >> 1)
    m = int(np.log2(levels))
    x, w = np.polynomial.hermite.hermgauss(nodes)
    noise = np.sqrt(2.0 * sigma2) * x  # E[f(n)] = sum w f(sqrt(2) s x) / sqrt(pi)
    total = 0.0
    for i, ai in enumerate(a):
        y = ai + noise[:, None]
        logp = -((y - a[None, :]) ** 2) / (2.0 * sigma2)
        lse_all = np.logaddexp.reduce(logp, axis=1)
        for b in range(m):
            bit = (labels >> (m - 1 - b)) & 1
            same = bit == bit[i]
            lse_same = np.logaddexp.reduce(logp[:, same], axis=1)
            total += np.sum(w * (lse_all - lse_same)) / np.sqrt(np.pi)
    return m - total / levels / np.log(2.0)


def qam_gmi_4d(order: int, snr_db: float) -> float:
    side = int(round(np.sqrt(order)))
    sigma2 = 10 ** (-snr_db / 10) / 2.0
    return 4.0 * pam_gmi(side, sigma2)


if __name__ == "__main__":
    order = int(sys.argv[1]) if len(sys.argv) > 1 else 64
    for snr in [10.0, 14.0, 18.0, 20.0, 22.0, 26.0]:
        print(f"{order}QAM {snr:5.1f} dB: {qam_gmi_4d(order, snr):.6f}")
