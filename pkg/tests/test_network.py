import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcdma.metrics import photon_loss_probability, state_fidelity_sweep
from qcdma.network import (
    ConfigError,
    Network,
    NetworkConfig,
    get_network,
    ideal_loss_bound,
    propagate,
)
from qcdma.signal import spectral_width

from oracles import single_user_delivery


def one_photon(cfg, user, b=0):
    bits = np.zeros((cfg.users, cfg.bits), dtype=np.int8)
    bits[user, b] = 1
    return bits


def test_config_validation():
    with pytest.raises(ConfigError):
        NetworkConfig(users=8, n=3)
    with pytest.raises(ConfigError):
        NetworkConfig(topology="star")
    with pytest.raises(ConfigError):
        NetworkConfig(filter_rule="x")
    cfg = NetworkConfig(users=7, n=3)
    assert cfg.S == 7 and cfg.grid().samples_per_bin % 7 == 0


def test_single_user_delivery():
    cfg = NetworkConfig(users=1, n=10, bits=1)
    res = propagate(cfg, [[1]], seed=3)
    rec = res.records[0]
    expect = single_user_delivery(spectral_width(cfg.packet_sigma), cfg.filter.sigma_filt)
    assert rec.delivered[0] >= 0.90
    assert rec.delivered[0] == pytest.approx(expect, abs=1e-5)
    assert rec.crossings == 0
    assert res.ledger_error() < 1e-9


def test_lone_photon_loss_scale():
    cfg = NetworkConfig(users=5, n=8)
    rec = propagate(cfg, one_photon(cfg, 2, 4), seed=1).records[0]
    loss = 1 - rec.delivered[2]
    assert 0.15 < loss < 0.5
    assert rec.crossings == 8


def test_silent_network():
    cfg = NetworkConfig(users=3, n=5)
    res = propagate(cfg, np.zeros((3, 8), dtype=int))
    assert res.photon_count == 0 and res.ledger_error() == 0
    assert all(not out for out in res.outputs())
    assert res.received_norm(0, 0) == 0


def test_bitstring_forms():
    cfg = NetworkConfig(users=2, n=4, bits=3)
    a = propagate(cfg, ["101", "010"], seed=5)
    b = propagate(cfg, np.array([[1, 0, 1], [0, 1, 0]]), seed=5)
    assert [(r.source, r.bin, r.phase) for r in a.records] == \
           [(r.source, r.bin, r.phase) for r in b.records]
    with pytest.raises(ConfigError):
        propagate(cfg, ["10", "01"])
    with pytest.raises(ConfigError):
        propagate(cfg, ["102", "010"])


@pytest.mark.parametrize("N,S,expect", [(1, 255, 0.0), (5, 255, 8 / 255),
                                        (50, 2**14 - 1, 98 / 16383)])
def test_ideal_loss_bound(N, S, expect):
    assert ideal_loss_bound(N, S) == pytest.approx(expect)
    assert ideal_loss_bound(5, 255) == pytest.approx(0.03137, abs=1e-5)


@pytest.mark.parametrize("topology", ["ring", "chain"])
@pytest.mark.parametrize("N", [1, 2, 5])
def test_crossing_counts(topology, N):
    cfg = NetworkConfig(users=N, n=6, topology=topology)
    resp = get_network(cfg).response()
    expect = 2 * N - 2 if topology == "ring" else N - 1
    assert np.all(resp.crossings == expect)
    assert resp.crossings.max() <= 2 * N - 2
    assert resp.ledger_error() < 1e-9


@given(users=st.integers(1, 6), n=st.integers(4, 8), seed=st.integers(0, 10_000),
       topology=st.sampled_from(["ring", "chain"]), in_phase=st.booleans())
def test_energy_ledger(users, n, seed, topology, in_phase):
    cfg = NetworkConfig(users=users, n=n, bits=4, topology=topology)
    bits = np.random.default_rng(seed).integers(0, 2, (users, 4))
    res = propagate(cfg, bits, seed, in_phase=in_phase)
    assert res.photon_count == bits.sum()
    assert res.ledger_error() <= 1e-9 * max(1, res.photon_count)
    for r in res.records:
        assert 0 <= r.lost <= 1 and 0 <= r.residual <= 1
        assert all(0 <= v <= 1 + 1e-9 for v in r.delivered.values())


def test_components_are_consistent():
    cfg = NetworkConfig(users=3, n=6, bits=2)
    res = propagate(cfg, ["11", "01", "10"], seed=2, keep_components=True)
    for r in res.records:
        for k in range(3):
            assert r.delivered_to(k).norm2() == pytest.approx(r.delivered[k], rel=1e-9)
    plain = propagate(cfg, ["11", "01", "10"], seed=2)
    with pytest.raises(ValueError):
        plain.records[0].delivered_to((plain.records[0].source + 1) % 3)


def test_response_is_phase_covariant():
    cfg = NetworkConfig(users=2, n=5, bits=1)
    a = propagate(cfg, [[1], [0]], seed=0, in_phase=True).records[0]
    b = propagate(cfg, [[1], [0]], seed=9).records[0]
    ratio = b.delivered_to(0).amplitudes / a.delivered_to(0).amplitudes
    big = np.abs(a.delivered_to(0).amplitudes) > 1e-3
    assert np.allclose(ratio[big], np.exp(1j * b.phase))


def test_loss_monotone():
    by_N = [photon_loss_probability(NetworkConfig(users=N, n=8), 100, 0).mean
            for N in (2, 5, 10)]
    assert by_N[0] < by_N[1] < by_N[2]
    by_S = [photon_loss_probability(NetworkConfig(users=5, n=n), 100, 0).mean
            for n in (6, 8, 10)]
    assert by_S[0] > by_S[1] > by_S[2]


def test_lone_user_fidelity():
    res = state_fidelity_sweep(NetworkConfig(users=1, n=10))
    for r in res.values():
        assert r.mean >= 0.999


def test_network_reuse():
    cfg = NetworkConfig(users=2, n=4)
    assert get_network(cfg) is get_network(cfg)
    net = Network(cfg)
    assert net.response() is net.response()
