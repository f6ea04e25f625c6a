"""Sampled single-photon amplitudes on a chip-aligned time grid."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.fft
from scipy.special import erfc

NORM_EPS = 1e-9
SIGMA_FRACTION = 0.1  # packet std as a fraction of the bin duration
TRUNCATION_TOL = 1e-6

LABELS = ("zero", "one", "plus", "minus")


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """``total_bins`` bins of ``samples_per_bin`` samples each.

    The bin duration is *defined* as ``dt * samples_per_bin`` so the two can
    never drift apart.
    """

    dt: float
    samples_per_bin: int
    total_bins: int = 1
    chips_per_bin: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.samples_per_bin < 1 or self.total_bins < 1:
            raise ValueError("grid needs at least one sample and one bin")
        if self.samples_per_bin % self.chips_per_bin:
            raise ValueError(
                f"{self.samples_per_bin} samples per bin not divisible by "
                f"{self.chips_per_bin} chips"
            )

    @classmethod
    def for_code(cls, S: int, samples_per_chip: int = 2, bins: int = 1, T: float = 1.0):
        spb = S * samples_per_chip
        return cls(T / spb, spb, bins, S)

    @property
    def bin_duration(self) -> float:
        return self.dt * self.samples_per_bin

    @property
    def samples_per_chip(self) -> int:
        return self.samples_per_bin // self.chips_per_bin

    @property
    def size(self) -> int:
        return self.samples_per_bin * self.total_bins

    @property
    def duration(self) -> float:
        return self.dt * self.size

    def times(self) -> np.ndarray:
        return np.arange(self.size) * self.dt

    def freqs(self) -> np.ndarray:
        return scipy.fft.fftfreq(self.size, self.dt)

    def with_bins(self, bins: int) -> "TimeGrid":
        return TimeGrid(self.dt, self.samples_per_bin, bins, self.chips_per_bin)

    def bin_slice(self, b: int) -> slice:
        return slice(b * self.samples_per_bin, (b + 1) * self.samples_per_bin)


@dataclass(frozen=True, eq=False)
class Wavefunction:
    amplitudes: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.grid.size,):
            raise GridMismatch(f"{amps.shape} samples on a grid of {self.grid.size}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zeros(cls, grid: TimeGrid) -> "Wavefunction":
        return cls(np.zeros(grid.size, dtype=np.complex128), grid)

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real * self.grid.dt)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def scaled(self, factor: complex) -> "Wavefunction":
        return Wavefunction(self.amplitudes * factor, self.grid)

    def normalized(self) -> "Wavefunction":
        n2 = self.norm2()
        if n2 < 1e-12:
            raise ValueError("cannot normalize a wavefunction with no photon")
        return self.scaled(1 / np.sqrt(n2))

    def __add__(self, other: "Wavefunction") -> "Wavefunction":
        _check_grid(self, other)
        return Wavefunction(self.amplitudes + other.amplitudes, self.grid)

    def __sub__(self, other: "Wavefunction") -> "Wavefunction":
        _check_grid(self, other)
        return Wavefunction(self.amplitudes - other.amplitudes, self.grid)


def _check_grid(a: Wavefunction, b: Wavefunction) -> None:
    if a.grid != b.grid:
        raise GridMismatch("wavefunctions live on different grids")


def gaussian_amplitude(t, center: float, width: float, phase: float = 0.0):
    """Continuum normalized packet ``e^{i phase} (2 pi w^2)^{-1/4} e^{-(t-c)^2 / 4w^2}``."""
    t = np.asarray(t, dtype=float)
    norm = (2 * np.pi * width**2) ** -0.25
    return norm * np.exp(1j * phase) * np.exp(-((t - center) ** 2) / (4 * width**2))


def gaussian_packet(
    grid: TimeGrid, center: float, width: float, phase: float = 0.0
) -> Wavefunction:
    if width <= 0:
        raise ValueError("packet width must be positive")
    t = grid.times()
    lo, hi = t[0], t[-1] + grid.dt
    if not lo <= center <= hi:
        raise ValueError(f"packet center {center} outside grid [{lo}, {hi}]")
    # |phi|^2 is normal with std `width`; mass beyond the grid must stay tiny.
    outside = 0.5 * erfc((center - lo) / (width * np.sqrt(2))) + 0.5 * erfc(
        (hi - center) / (width * np.sqrt(2))
    )
    if outside > TRUNCATION_TOL:
        raise ValueError(f"packet truncated: {outside:.2e} of its mass lies outside the grid")
    w = Wavefunction(gaussian_amplitude(t, center, width, phase), grid)
    return w.scaled(1 / np.sqrt(w.norm2()))


def packet_width(grid: TimeGrid) -> float:
    return SIGMA_FRACTION * grid.bin_duration


@dataclass(frozen=True)
class TimeBinState:
    label: str
    wavefunction: Wavefunction


def make_timebin_state(label: str, grid: TimeGrid, phase: float = 0.0) -> TimeBinState:
    if label not in LABELS:
        raise ValueError(f"unknown time-bin state {label!r}; expected one of {LABELS}")
    if grid.total_bins < 2:
        raise ValueError("time-bin states need a grid of at least two bins")
    T = grid.bin_duration
    sigma = packet_width(grid)
    early = gaussian_packet(grid, T / 2, sigma, phase)
    late = gaussian_packet(grid, 3 * T / 2, sigma, phase)
    if label == "zero":
        w = early
    elif label == "one":
        w = late
    else:
        sign = 1.0 if label == "plus" else -1.0
        w = Wavefunction((early.amplitudes + sign * late.amplitudes) / np.sqrt(2), grid)
        w = w.normalized()
    return TimeBinState(label, w)


def encode_bitstring(
    bits: Sequence[int], grid: TimeGrid, phases: Sequence[float] | None = None
) -> Wavefunction:
    """Concatenated bins: 1 -> unit packet centred in its bin, 0 -> empty.

    The result is a photon-number amplitude, so its norm is the photon count.
    """
    bits = [int(b) for b in bits]
    if len(bits) != grid.total_bins:
        raise ValueError(f"{len(bits)} bits for a grid of {grid.total_bins} bins")
    if phases is None:
        phases = [0.0] * len(bits)
    one_bin = grid.with_bins(1)
    packet = gaussian_packet(one_bin, one_bin.bin_duration / 2, packet_width(grid))
    amps = np.zeros(grid.size, dtype=np.complex128)
    for b, (bit, ph) in enumerate(zip(bits, phases)):
        if bit not in (0, 1):
            raise ValueError(f"bit {b} is {bit}, expected 0 or 1")
        if bit:
            amps[grid.bin_slice(b)] = packet.amplitudes * np.exp(1j * ph)
    return Wavefunction(amps, grid)


def overlap(a: Wavefunction, b: Wavefunction) -> complex:
    """Discrete ``integral conj(a) b dt``."""
    _check_grid(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.dt)


def fidelity(input: Wavefunction, output: Wavefunction) -> float:
    out = output.normalized()
    return float(min(1.0, abs(overlap(out, input)) ** 2))


def spectrum(w: Wavefunction) -> np.ndarray:
    """Continuous-FT approximation ``dt * DFT``; ``sum |Phi|^2 df`` equals the norm."""
    return scipy.fft.fft(w.amplitudes) * w.grid.dt


def inverse_spectrum(spec: np.ndarray, grid: TimeGrid) -> Wavefunction:
    return Wavefunction(scipy.fft.ifft(spec) / grid.dt, grid)


def spectral_width(width: float) -> float:
    """Std of ``|Phi(f)|^2`` for a packet whose ``|phi(t)|^2`` has std ``width``."""
    return 1 / (4 * np.pi * width)


def write_waveform_csv(w: Wavefunction, path: str | Path, header: dict | None = None) -> None:
    """Columns ``t, re, im, density``; optional ``# key=value`` header lines."""
    t = w.grid.times()
    with open(path, "w", newline="") as fh:
        for k, v in (header or {}).items():
            fh.write(f"# {k}={v}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "re", "im", "density"])
        for ti, a in zip(t, w.amplitudes):
            writer.writerow([repr(float(ti)), repr(float(a.real)), repr(float(a.imag)),
                             repr(float(abs(a) ** 2))])


def read_waveform_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(t, amplitudes)`` from a file written by :func:`write_waveform_csv`."""
    rows = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    data = np.loadtxt(rows[1:], delimiter=",", ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]
