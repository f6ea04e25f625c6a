"""How much of a spread packet a matched grating reflects, against 1/S.

    python scripts/leak_study.py

Prints the reflected fraction times S for several code lengths and filter
rules, and the single-photon loss with the brick-wall filter next to the
``2 (2N - 2) / S`` reference.
"""

import argparse

import numpy as np

from qcdma.codes import LfsrSpec, generate_mseq
from qcdma.network import NetworkConfig, get_network, ideal_loss_bound
from qcdma.optics import FILTER_RULES, Modulator, fbg_split, filter_for_rule, spread
from qcdma.signal import TimeGrid, gaussian_packet


def spread_leak(n, rule, sigma=0.1, samples_per_chip=2):
    code = generate_mseq(LfsrSpec.standard(n))
    grid = TimeGrid.for_code(code.length, samples_per_chip)
    w = spread(gaussian_packet(grid, 0.5, sigma), Modulator(code, samples_per_chip))
    return fbg_split(w, filter_for_rule(rule, sigma))[0].norm2()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="6,8,10,12,14")
    args = ap.parse_args()
    ns = [int(x) for x in args.n.split(",")]

    print("reflected fraction x S")
    print(f"{'n':>4}" + "".join(f"{r:>12}" for r in FILTER_RULES))
    for n in ns:
        S = 2**n - 1
        print(f"{n:>4}" + "".join(f"{spread_leak(n, r) * S:>12.3f}" for r in FILTER_RULES))

    print("\nbrick-wall worst-case loss (n=10)")
    for N in (2, 5, 10):
        cfg = NetworkConfig(users=N, n=10, filter_rule="brickwall")
        resp = get_network(cfg).response()
        loss = 1 - np.diag(resp.delivered)
        print(f"  N={N:>2}  max loss {loss.max():.4f}   2(2N-2)/S {2 * ideal_loss_bound(N, cfg.S):.4f}")


if __name__ == "__main__":
    main()
