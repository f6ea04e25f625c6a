"""Monte Carlo figures of merit: photon loss, crosstalk and state fidelity.

Trial ``i`` of a run seeded with ``seed`` draws from
``default_rng([seed, i])``, so results do not depend on execution order or
on how many workers evaluate trials.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .network import (
    Network,
    NetworkConfig,
    PropagationResult,
    get_network,
    propagate,
)
from .signal import LABELS, TimeGrid, Wavefunction, fidelity, make_timebin_state


@dataclass(frozen=True)
class MetricResult:
    metric: str
    S: int
    N: int
    trials: int
    mean: float
    stderr: float
    seed: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LossResult(MetricResult):
    pass


@dataclass(frozen=True)
class CrosstalkResult(MetricResult):
    pass


@dataclass(frozen=True)
class FidelityResult(MetricResult):
    state: str = ""
    infidelity: float = 0.0


def trial_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, i])


def _summarize(values: Sequence[float]) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(len(v)))


def _net(config: NetworkConfig | Network) -> Network:
    return config if isinstance(config, Network) else get_network(config)


def photon_loss_probability(
    config: NetworkConfig | Network, trials: int = 200, seed: int = 0
) -> LossResult:
    """Mean of ``1 - (norm delivered to its own receiver)`` for one lone photon per trial."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    net = _net(config)
    cfg = net.config
    losses = []
    for i in range(trials):
        rng = trial_rng(seed, i)
        user = int(rng.integers(cfg.users))
        b = int(rng.integers(cfg.bits))
        bits = np.zeros((cfg.users, cfg.bits), dtype=np.int8)
        bits[user, b] = 1
        res = propagate(net, bits, rng)
        losses.append(1.0 - res.records[0].delivered[user])
    mean, se = _summarize(losses)
    return LossResult("loss", cfg.S, cfg.users, trials, mean, se, seed)


class NoEmptyBin(RuntimeError):
    pass


def crosstalk_probability(
    config: NetworkConfig | Network, runs: int = 128, seed: int = 0, max_redraws: int = 1000
) -> CrosstalkResult:
    """Photon number found in a random channel-bin whose own bit is 0.

    Each run draws fresh random bits for every user, redrawing if no empty
    bin exists, then integrates the receiver's density over the chosen bin.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    net = _net(config)
    cfg = net.config
    values = []
    for i in range(runs):
        rng = trial_rng(seed, i)
        for _ in range(max_redraws):
            bits = rng.integers(0, 2, size=(cfg.users, cfg.bits), dtype=np.int8)
            empty = np.argwhere(bits == 0)
            if len(empty):
                break
        else:
            raise NoEmptyBin(f"run {i}: no empty bin after {max_redraws} draws")
        k, b = empty[rng.integers(len(empty))]
        res = propagate(net, bits, rng)
        values.append(res.received_norm(int(k), int(b)))
    mean, se = _summarize(values)
    return CrosstalkResult("crosstalk", cfg.S, cfg.users, runs, mean, se, seed)


def _background_leak(
    net: Network, grid: TimeGrid, receiver: int, rng: np.random.Generator
) -> np.ndarray:
    """Coherent sum of other users' random photons leaking into ``receiver``."""
    cfg = net.config
    resp = net.response(keep_components=True)
    out = np.zeros(grid.size, dtype=np.complex128)
    for b in range(grid.total_bins):
        bits = rng.integers(0, 2, size=cfg.users)
        phases = rng.uniform(0, 2 * np.pi, size=cfg.users)
        for j in np.nonzero(bits)[0]:
            if j == receiver:
                continue
            out[grid.bin_slice(b)] += resp.components[j, receiver] * np.exp(1j * phases[j])
    return out


def state_fidelity_sweep(
    config: NetworkConfig | Network,
    states: Iterable[str] = LABELS,
    seed: int = 0,
    background: str = "silent",
    runs: int = 0,
) -> dict[str, FidelityResult]:
    """Fidelity between each time-bin state and what its receiver gets.

    With a silent background every channel is measured once. With
    ``background="random"`` each of ``runs`` trials (default ``4 N``) picks a
    random channel and adds other users' random photons in the same bins.
    """
    if background not in ("silent", "random"):
        raise ValueError("background must be 'silent' or 'random'")
    net = _net(config)
    cfg = net.config
    grid = cfg.grid(2)
    results = {}
    for label in states:
        state = make_timebin_state(label, grid).wavefunction
        resp = net.response(state)
        if background == "silent":
            fids = [fidelity(state, Wavefunction(resp.own[p], grid)) for p in range(cfg.users)]
        else:
            fids = []
            for i in range(runs or 4 * cfg.users):
                rng = trial_rng(seed, i)
                p = int(rng.integers(cfg.users))
                out = resp.own[p] + _background_leak(net, grid, p, rng)
                fids.append(fidelity(state, Wavefunction(out, grid)))
        mean, se = _summarize(fids)
        results[label] = FidelityResult(
            "fidelity", cfg.S, cfg.users, len(fids), mean, se, seed, label, 1.0 - mean
        )
    return results


def photon_number_density(result: PropagationResult) -> np.ndarray:
    """Per-receiver density ``sum_j |phi_j(t)|^2`` over the full bit grid.

    Shape ``(users, samples)``. Leaked components are included only when the
    propagation kept them.
    """
    cfg = result.config
    grid = cfg.grid()
    dens = np.zeros((cfg.users, grid.size))
    for k, comps in enumerate(result.outputs()):
        for b, w in comps:
            dens[k, grid.bin_slice(b)] += w.density()
    return dens


def bin_integrals(result: PropagationResult) -> np.ndarray:
    """``(users, bits)`` photon number per receiver per bin."""
    cfg = result.config
    out = np.zeros((cfg.users, cfg.bits))
    for r in result.records:
        out[:, r.bin] += r.response.delivered[r.source]
    return out
