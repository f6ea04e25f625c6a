"""Reference computations that do not share code paths with the package."""

import numpy as np
from scipy.special import wofz

# filled by the acceptance tests, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def lfsr_walk(n, taps, seed):
    """Plain list-based Fibonacci LFSR. Returns (output bits, visited states)."""
    state = list(seed)
    seen, out = [], []
    while True:
        seen.append(tuple(state))
        out.append(state[-1])
        fb = 0
        for t in taps:
            fb ^= state[t - 1]
        state = [fb] + state[:-1]
        if tuple(state) == tuple(seed) or len(seen) > 2**n:
            return out, seen


def spread_leak(chips, sigma=0.1, t0=0.5, T=1.0, sigma_filt=None):
    """Reflected fraction of a spread Gaussian packet through a Gaussian FBG.

    The spread packet is periodic with the bin, so its spectrum lives on the
    lines f = m/T. Each line weight is the chip-by-chip integral of the
    Gaussian, done in closed form with the Faddeeva function.
    """
    S = len(chips)
    sf = 1 / (4 * np.pi * sigma)
    if sigma_filt is None:
        sigma_filt = 8 * np.pi / 5 * sf
    L = int(np.ceil(12 * sigma_filt * T))
    f = np.arange(-L, L + 1) / T
    u = (np.arange(S + 1) * T / S - t0)[None, :]
    z = (u + 4j * np.pi * sigma**2 * f[:, None]) / (2 * sigma)
    # exp(-(2 pi sigma f)^2) erf(z) minus its edge-independent constant
    E = -np.exp(-(u**2) / (4 * sigma**2) - 2j * np.pi * f[:, None] * u) * wofz(1j * z)
    seg = E[:, 1:] - E[:, :-1]
    amp = (2 * np.pi * sigma**2) ** -0.25 * sigma * np.sqrt(np.pi)
    X = amp * np.exp(-2j * np.pi * f * t0) * (seg @ np.asarray(chips, float))
    R2 = np.exp(-(f**2) / (2 * sigma_filt**2))
    return float((R2 * abs(X) ** 2).sum() / T)


def matched_reflection(sigma_f, sigma_filt):
    """Analytic integral of R(f)^2 |Phi(f)|^2 for Gaussian packet and filter."""
    return sigma_filt / np.sqrt(sigma_filt**2 + sigma_f**2)


def single_user_delivery(sigma_f, sigma_filt):
    """Norm left after two matched reflections, R^4 against |Phi|^2."""
    s2 = sigma_filt**2 / 2
    return np.sqrt(s2) / np.sqrt(s2 + sigma_f**2)
