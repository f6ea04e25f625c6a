"""End-to-end add/drop network over one shared fibre.

Two layouts are supported:

``ring`` (default)
    Node ``k`` is an add-drop multiplexer that first drops channel ``k``
    then adds channel ``k``, both keyed by code ``c_k``. A photon added at
    node ``p`` crosses the drop and add stages of every other node before
    reaching drop ``p``: ``2N - 2`` lossy crossings for every photon.
``chain``
    All add stages in order ``1..N``, then all drop stages in order ``1..N``.
    Photon ``p`` crosses the ``N - p`` downstream add stages and the
    ``p - 1`` drop stages ahead of its own.

Every stage is linear and the code restarts each bin, so a photon's journey
depends only on its source user: the network response to one unit packet
per user is computed once, on the photon's own bin window, and every
emitted photon is that response times its phase factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .codes import CodeFamily, LfsrSpec, build_family
from .optics import (
    FILTER_RULES,
    FbgFilter,
    drop_rows,
    fft_workers,
    filter_for_rule,
    insert_rows,
    row_norm2,
    through_rows,
)
from .signal import TimeGrid, Wavefunction, gaussian_packet, packet_width

TOPOLOGIES = ("ring", "chain")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkConfig:
    users: int = 5
    n: int = 10
    samples_per_chip: int = 2
    bits: int = 8
    filter_rule: str = "wide"
    topology: str = "ring"
    bin_duration: float = 1.0

    def __post_init__(self):
        if self.users < 1:
            raise ConfigError("need at least one user")
        if self.n < 2:
            raise ConfigError("spreading exponent n must be >= 2")
        if self.users > self.S:
            raise ConfigError(f"{self.users} users exceed S = {self.S} codes")
        if self.samples_per_chip < 1:
            raise ConfigError("samples per chip must be >= 1")
        if self.bits < 1:
            raise ConfigError("need at least one bit per user")
        if self.filter_rule not in FILTER_RULES:
            raise ConfigError(f"filter rule must be one of {FILTER_RULES}")
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"topology must be one of {TOPOLOGIES}")

    @property
    def S(self) -> int:
        return 2**self.n - 1

    def grid(self, bins: int | None = None) -> TimeGrid:
        return TimeGrid.for_code(
            self.S, self.samples_per_chip, self.bits if bins is None else bins,
            self.bin_duration,
        )

    @property
    def packet_sigma(self) -> float:
        return packet_width(self.grid(1))

    @property
    def filter(self) -> FbgFilter:
        return filter_for_rule(self.filter_rule, self.packet_sigma)


def ideal_loss_bound(N: int, S: int) -> float:
    """Worst-case loss with ``2N - 2`` crossings that each leak ``1/S``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return (2 * N - 2) / S


@dataclass
class ChannelResponse:
    """How a photon from each source user ends up, on its own window.

    ``delivered[p, k]`` is the norm photon ``p`` hands to receiver ``k``;
    ``own[p]`` the wavefunction reaching its own receiver. ``components``,
    when kept, holds every delivered wavefunction as ``(p, k, samples)``.
    """

    grid: TimeGrid
    delivered: np.ndarray
    lost: np.ndarray
    residual: np.ndarray
    own: np.ndarray
    tail: np.ndarray
    crossings: np.ndarray
    components: np.ndarray | None = None

    def ledger_error(self) -> float:
        total = self.delivered.sum(axis=1) + self.lost + self.residual
        return float(np.max(np.abs(total - 1.0)))


class Network:
    """Stage definitions for one configuration, shared read-only by trials."""

    def __init__(self, config: NetworkConfig):
        self.config = config
        self.family: CodeFamily = build_family(LfsrSpec.standard(config.n), config.users)
        self.filter = config.filter
        self._cache: dict = {}

    @cached_property
    def chip_matrix(self) -> np.ndarray:
        return self.family.chip_matrix().astype(float)

    def _chip_rows(self, grid: TimeGrid, users: np.ndarray) -> np.ndarray:
        per_bin = np.repeat(self.chip_matrix[users], self.config.samples_per_chip, axis=1)
        return np.tile(per_bin, (1, grid.total_bins))

    def unit_packet(self) -> Wavefunction:
        grid = self.config.grid(1)
        return gaussian_packet(grid, grid.bin_duration / 2, self.config.packet_sigma)

    def response(self, template: Wavefunction | None = None, keep_components: bool = False):
        """Propagate ``template`` (default: unit packet in one bin) from every user."""
        if template is None:
            template = self.unit_packet()
        key = (template.grid, template.amplitudes.tobytes(), keep_components)
        if key not in self._cache:
            self._cache[key] = self._respond(template, keep_components)
        return self._cache[key]

    def _respond(self, template: Wavefunction, keep: bool) -> ChannelResponse:
        cfg = self.config
        N = cfg.users
        grid = template.grid
        if grid.samples_per_bin != cfg.S * cfg.samples_per_chip:
            raise ConfigError("template grid does not match the code length")
        dt = grid.dt
        workers = fft_workers()
        refl, trans = self.filter.responses(grid.freqs())
        rows = np.arange(N)
        delivered = np.zeros((N, N))
        lost = np.zeros(N)
        crossings = np.zeros(N, dtype=int)
        own = np.zeros((N, grid.size), dtype=np.complex128)
        comps = np.zeros((N, N, grid.size), dtype=np.complex128) if keep else None

        x = np.broadcast_to(template.amplitudes, (N, grid.size))
        x, lost_here = insert_rows(x, self._chip_rows(grid, rows), refl, trans, dt, workers)
        lost += lost_here

        def drop(x, users, active):
            r, t = drop_rows(x, self._chip_rows(grid, users), refl, trans, workers)
            got = row_norm2(r, dt)
            delivered[rows[active], users[active]] += got[active]
            if keep:
                comps[rows[active], users[active]] += r[active]
            mine = active & (users == rows)
            own[mine] = r[mine]
            crossings[active & ~mine & ~done] += 1
            done[mine] = True
            return np.where(active[:, None], t, x)

        def through(x, users, active):
            y, lost_here = through_rows(x, self._chip_rows(grid, users), refl, trans, dt, workers)
            lost[active] += lost_here[active]
            crossings[active & ~done] += 1
            return np.where(active[:, None], y, x)

        done = np.zeros(N, dtype=bool)
        everyone = np.ones(N, dtype=bool)
        if cfg.topology == "ring":
            for s in range(1, N):
                node = (rows + s) % N
                x = drop(x, node, everyone)
                x = through(x, node, everyone)
            x = drop(x, rows, everyone)
        else:
            for q in range(N):
                x = through(x, np.full(N, q), rows < q)
            for k in range(N):
                x = drop(x, np.full(N, k), everyone)

        return ChannelResponse(
            grid=grid,
            delivered=delivered,
            lost=lost,
            residual=row_norm2(x, dt),
            own=own,
            tail=x,
            crossings=crossings,
            components=comps,
        )


@lru_cache(maxsize=4)
def get_network(config: NetworkConfig) -> Network:
    return Network(config)


@dataclass
class PhotonRecord:
    source: int
    bin: int
    phase: float
    response: ChannelResponse = field(repr=False)

    @property
    def lost(self) -> float:
        return float(self.response.lost[self.source])

    @property
    def residual(self) -> float:
        return float(self.response.residual[self.source])

    @property
    def delivered(self) -> dict[int, float]:
        return {k: float(v) for k, v in enumerate(self.response.delivered[self.source])}

    @property
    def crossings(self) -> int:
        return int(self.response.crossings[self.source])

    @property
    def wavefunction(self) -> Wavefunction:
        """What is left on the bus after the last stage, on the bin window."""
        return Wavefunction(
            self.response.tail[self.source] * np.exp(1j * self.phase), self.response.grid
        )

    def delivered_to(self, k: int) -> Wavefunction:
        phase = np.exp(1j * self.phase)
        if k == self.source:
            return Wavefunction(self.response.own[self.source] * phase, self.response.grid)
        if self.response.components is None:
            raise ValueError("propagate with keep_components=True to get leaked waveforms")
        return Wavefunction(self.response.components[self.source, k] * phase, self.response.grid)


@dataclass
class PropagationResult:
    config: NetworkConfig
    records: list[PhotonRecord]
    bits: np.ndarray

    @property
    def photon_count(self) -> int:
        return len(self.records)

    def ledger_error(self) -> float:
        total = sum(r.lost + r.residual + sum(r.delivered.values()) for r in self.records)
        return abs(total - self.photon_count)

    def received_norm(self, k: int, b: int) -> float:
        """Integrated photon-number density of receiver ``k`` over bin ``b``."""
        return sum(
            float(r.response.delivered[r.source, k]) for r in self.records if r.bin == b
        )

    def outputs(self) -> list[list[tuple[int, Wavefunction]]]:
        """Per receiver, ``(bin, component)`` pairs of every delivered photon part."""
        out: list[list[tuple[int, Wavefunction]]] = [[] for _ in range(self.config.users)]
        for r in self.records:
            for k in range(self.config.users):
                if k == r.source or r.response.components is not None:
                    out[k].append((r.bin, r.delivered_to(k)))
        return out


def _normalize_bits(config: NetworkConfig, bitstrings) -> np.ndarray:
    rows = [list(s) if isinstance(s, str) else s for s in bitstrings]
    try:
        bits = np.array(rows, dtype=np.int8)
    except ValueError as exc:
        raise ConfigError(f"malformed bitstrings: {exc}") from None
    if bits.shape != (config.users, config.bits):
        raise ConfigError(
            f"expected {config.users} bitstrings of {config.bits} bits, got shape {bits.shape}"
        )
    if np.any((bits != 0) & (bits != 1)):
        raise ConfigError("bitstrings may only contain 0 and 1")
    return bits


def propagate(
    config: NetworkConfig | Network,
    bitstrings: Sequence,
    seed: int | np.random.Generator | None = 0,
    *,
    in_phase: bool = False,
    keep_components: bool = False,
) -> PropagationResult:
    """Send every 1-bit of every user through the network.

    Each photon gets an independent uniform phase drawn from ``seed`` unless
    ``in_phase`` is set. Delivered parts are reported in the source bin's
    time frame; time of flight is dropped.
    """
    net = config if isinstance(config, Network) else get_network(config)
    cfg = net.config
    bits = _normalize_bits(cfg, bitstrings)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    phases = np.zeros(bits.shape) if in_phase else rng.uniform(0, 2 * np.pi, bits.shape)
    records: list[PhotonRecord] = []
    if bits.any():
        resp = net.response(keep_components=keep_components)
        for p, b in zip(*np.nonzero(bits)):
            records.append(PhotonRecord(int(p), int(b), float(phases[p, b]), resp))
    return PropagationResult(cfg, records, bits)
