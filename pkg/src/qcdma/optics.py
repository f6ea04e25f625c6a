"""Ideal phase modulators, Gaussian FBG reflect/transmit splits and OADM stages.

Circulators are lossless routers, so they only show up as the routing inside
:func:`mux_stage` and :func:`demux_stage`. Every kernel works on a stack of
per-photon amplitude rows; photons never interact, so each row evolves alone.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft

from .codes import Code
from .signal import GridMismatch, TimeGrid, Wavefunction, spectral_width

WIDE_RATIO = 8 * np.pi / 5
FILTER_RULES = ("wide", "narrow", "brickwall")


def fft_workers() -> int:
    """Worker threads for batched FFTs, capped by ``QCDMA_THREADS``."""
    env = os.environ.get("QCDMA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class FbgFilter:
    """Reflectivity ``R(f) = exp(-(f - fc)^2 / 4 sigma^2)``, ``T = sqrt(1 - R^2)``.

    ``shape="brickwall"`` reflects ``|f - fc| <= half_width`` completely. Its
    width gives the same equivalent power bandwidth as the Gaussian of the
    same ``sigma_filt``.
    """

    sigma_filt: float
    center_freq: float = 0.0
    shape: str = "gaussian"

    def __post_init__(self):
        if not self.sigma_filt > 0:
            raise ValueError("filter width must be positive")
        if self.shape not in ("gaussian", "brickwall"):
            raise ValueError(f"unknown filter shape {self.shape!r}")

    @property
    def half_width(self) -> float:
        return np.sqrt(np.pi / 2) * self.sigma_filt

    def responses(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        df2 = (np.asarray(f, dtype=float) - self.center_freq) ** 2
        if self.shape == "brickwall":
            refl = (df2 <= self.half_width**2).astype(float)
            return refl, 1.0 - refl
        refl = np.exp(-df2 / (4 * self.sigma_filt**2))
        # -expm1 keeps T accurate where R is close to 1
        return refl, np.sqrt(-np.expm1(-df2 / (2 * self.sigma_filt**2)))

    def reflectance(self, f) -> np.ndarray:
        return self.responses(f)[0]

    def transmittance(self, f) -> np.ndarray:
        return self.responses(f)[1]


def filter_for_rule(rule: str, packet_sigma: float) -> FbgFilter:
    """Filter width relative to the unspread packet's spectral std.

    ``wide``: filter 8*pi/5 times wider than the photon. ``narrow``: the
    opposite reading, 8*pi/5 times narrower. ``brickwall``: rectangular
    counterpart of ``wide``.
    """
    sf = spectral_width(packet_sigma)
    if rule == "wide":
        return FbgFilter(WIDE_RATIO * sf)
    if rule == "narrow":
        return FbgFilter(sf / WIDE_RATIO)
    if rule == "brickwall":
        return FbgFilter(WIDE_RATIO * sf, shape="brickwall")
    raise ValueError(f"unknown filter rule {rule!r}; expected one of {FILTER_RULES}")


@dataclass(frozen=True)
class Modulator:
    """Ideal 0/pi phase modulator: chip +1 leaves a sample alone, -1 flips it."""

    code: Code
    chip_samples: int = 2

    def chip_wave(self, grid: TimeGrid) -> np.ndarray:
        """+-1 per sample over the whole grid; the code restarts every bin."""
        _check_alignment(self, grid)
        per_bin = np.repeat(self.code.chips.astype(float), self.chip_samples)
        return np.tile(per_bin, grid.total_bins)


def _check_alignment(m: Modulator, grid: TimeGrid) -> None:
    if m.code.length * m.chip_samples != grid.samples_per_bin:
        raise GridMismatch(
            f"code of {m.code.length} chips x {m.chip_samples} samples does not "
            f"fill a bin of {grid.samples_per_bin} samples"
        )


def spread(w: Wavefunction, m: Modulator, bin_index: int | None = None) -> Wavefunction:
    """Multiply by the chip sequence, in one bin or (``None``) in every bin."""
    chips = m.chip_wave(w.grid)
    if bin_index is None:
        return Wavefunction(w.amplitudes * chips, w.grid)
    if not 0 <= bin_index < w.grid.total_bins:
        raise GridMismatch(f"bin {bin_index} outside a {w.grid.total_bins}-bin grid")
    sl = w.grid.bin_slice(bin_index)
    amps = w.amplitudes.copy()
    amps[sl] *= chips[sl]
    return Wavefunction(amps, w.grid)


# chips square to one, so despreading is the same multiplication
despread = spread


# ---- array kernels ---------------------------------------------------------


def split_rows(x: np.ndarray, refl: np.ndarray, trans: np.ndarray, workers: int = 1):
    """Reflected and transmitted time-domain parts of each row of ``x``."""
    X = scipy.fft.fft(x, axis=-1, workers=workers)
    r = scipy.fft.ifft(X * refl, axis=-1, workers=workers)
    t = scipy.fft.ifft(X * trans, axis=-1, workers=workers)
    return r, t


def row_norm2(x: np.ndarray, dt: float) -> np.ndarray:
    return np.einsum("...i,...i->...", x.real, x.real) * dt + np.einsum(
        "...i,...i->...", x.imag, x.imag
    ) * dt


def insert_rows(x, chips, refl, trans, dt, workers=1):
    """New photon reflected onto the bus and spread. Returns (bus rows, lost norm)."""
    r, t = split_rows(x, refl, trans, workers)
    return r * chips, row_norm2(t, dt)


def through_rows(x, chips, refl, trans, dt, workers=1):
    """Bus photons crossing a foreign add stage. Returns (bus rows, lost norm)."""
    r, t = split_rows(x * chips, refl, trans, workers)
    return t * chips, row_norm2(r, dt)


def drop_rows(x, chips, refl, trans, workers=1):
    """Bus photons at a drop stage. Returns (delivered rows, bus rows)."""
    r, t = split_rows(x * chips, refl, trans, workers)
    return r, t * chips


# ---- single-photon API -----------------------------------------------------


def fbg_split(w: Wavefunction, f: FbgFilter) -> tuple[Wavefunction, Wavefunction]:
    refl, trans = f.responses(w.grid.freqs())
    r, t = split_rows(w.amplitudes[None, :], refl, trans)
    return Wavefunction(r[0], w.grid), Wavefunction(t[0], w.grid)


def _stack(bus: Sequence[Wavefunction], grid: TimeGrid) -> np.ndarray:
    for w in bus:
        if w.grid != grid:
            raise GridMismatch("bus photons live on different grids")
    if not bus:
        return np.zeros((0, grid.size), dtype=np.complex128)
    return np.array([w.amplitudes for w in bus])


def mux_stage(
    bus: Sequence[Wavefunction],
    new_photon: Wavefunction | None,
    m: Modulator,
    f: FbgFilter,
) -> tuple[list[Wavefunction], list[float]]:
    """One add stage.

    Bus photons are spread with the stage code, lose their FBG-reflected part
    back up the input fibre, and are restored by the second modulator. The
    new photon is reflected onto the bus and leaves the second modulator
    spread with the stage code; its transmitted part is its insertion loss.
    Returns the bus (new photon last) and the norm each photon lost here.
    """
    grid = new_photon.grid if new_photon is not None else (bus[0].grid if bus else None)
    if grid is None:
        return [], []
    refl, trans = f.responses(grid.freqs())
    chips = m.chip_wave(grid)
    x = _stack(bus, grid)
    out, lost = through_rows(x, chips, refl, trans, grid.dt)
    photons = [Wavefunction(row, grid) for row in out]
    losses = [float(v) for v in lost]
    if new_photon is not None:
        if new_photon.grid != grid:
            raise GridMismatch("new photon and bus live on different grids")
        row, ins_lost = insert_rows(new_photon.amplitudes[None, :], chips, refl, trans, grid.dt)
        photons.append(Wavefunction(row[0], grid))
        losses.append(float(ins_lost[0]))
    return photons, losses


def demux_stage(
    bus: Sequence[Wavefunction], m: Modulator, f: FbgFilter
) -> tuple[list[Wavefunction], list[Wavefunction]]:
    """One drop stage: (components delivered to this receiver, remaining bus)."""
    if not bus:
        return [], []
    grid = bus[0].grid
    refl, trans = f.responses(grid.freqs())
    delivered, remaining = drop_rows(_stack(bus, grid), m.chip_wave(grid), refl, trans)
    return (
        [Wavefunction(r, grid) for r in delivered],
        [Wavefunction(r, grid) for r in remaining],
    )
