"""``qcdma`` command line: table sweeps, density traces and code checks.

CSV column order for table experiments is fixed as
``S, N, metric, mean, stderr, trials, seed``. Density traces use
``t, rx1, ..., rxN``. Every file starts with ``# key=value`` lines holding
the effective experiment spec.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .codes import LfsrSpec, build_family, correlation_matrix, generate_mseq, lfsr_period
from .config import (
    FORMATS,
    KINDS,
    ConfigFileError,
    ExperimentSpec,
    build_spec,
    coerce,
    read_config_file,
)
from .metrics import (
    bin_integrals,
    crosstalk_probability,
    photon_loss_probability,
    photon_number_density,
    state_fidelity_sweep,
)
from .network import ConfigError, NetworkConfig, propagate
from .optics import FILTER_RULES

TABLE_COLUMNS = ["S", "N", "metric", "mean", "stderr", "trials", "seed"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _header_lines(spec: ExperimentSpec, extra: dict | None = None) -> str:
    items = {"qcdma": __version__, **spec.effective(), **(extra or {})}
    return "".join(f"# {k}={json.dumps(v) if not isinstance(v, str) else v}\n"
                   for k, v in items.items())


def _network_config(spec: ExperimentSpec, n: int, users: int) -> NetworkConfig:
    return NetworkConfig(
        users=users,
        n=n,
        samples_per_chip=spec.samples_per_chip,
        bits=spec.bits,
        filter_rule=spec.filter_rule,
        topology=spec.topology,
    )


# ---- table experiments -----------------------------------------------------


def table_rows(spec: ExperimentSpec) -> list[dict]:
    rows = []
    for n in spec.n:
        for users in spec.users:
            cfg = _network_config(spec, n, users)
            if spec.experiment == "loss-table":
                results = [photon_loss_probability(cfg, spec.trials, spec.seed)]
            elif spec.experiment == "crosstalk-table":
                results = [crosstalk_probability(cfg, spec.runs, spec.seed)]
            else:
                fid = state_fidelity_sweep(cfg, seed=spec.seed, background=spec.background)
                results = []
                for label, r in fid.items():
                    results.append(dict(metric=f"fidelity[{label}]", mean=r.mean, res=r))
                    results.append(dict(metric=f"infidelity[{label}]", mean=r.infidelity, res=r))
            for r in results:
                if isinstance(r, dict):
                    res = r["res"]
                    rows.append(dict(S=res.S, N=res.N, metric=r["metric"], mean=r["mean"],
                                     stderr=res.stderr, trials=res.trials, seed=res.seed))
                else:
                    rows.append({k: getattr(r, k) for k in TABLE_COLUMNS})
    return rows


def render_rows(spec: ExperimentSpec, rows: list[dict]) -> str:
    fmt = spec.output_format
    if fmt == "json":
        return json.dumps({"spec": spec.effective(), "results": rows}, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(_header_lines(spec))
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in TABLE_COLUMNS])
        return buf.getvalue()
    # text table: one block per metric, S down the side, N across
    metrics = list(dict.fromkeys(r["metric"] for r in rows))
    Ns = sorted({r["N"] for r in rows})
    Ss = sorted({r["S"] for r in rows})
    for m in metrics:
        buf.write(f"\n{m}\n")
        buf.write(f"{'S':>22}" + "".join(f"{f'N={N}':>14}" for N in Ns) + "\n")
        for S in Ss:
            n = int(np.log2(S + 1))
            cells = {r["N"]: r["mean"] for r in rows if r["metric"] == m and r["S"] == S}
            line = f"{f'2^{n}-1 = {S}':>22}"
            line += "".join(f"{cells[N]:>14.4g}" if N in cells else f"{'':>14}" for N in Ns)
            buf.write(line + "\n")
    return buf.getvalue()


# ---- density traces --------------------------------------------------------


def _trace_bits(spec: ExperimentSpec, users: int) -> np.ndarray:
    if spec.patterns:
        return np.array([[int(c) for c in p] for p in spec.patterns], dtype=np.int8)
    rng = np.random.default_rng([spec.seed, 0xB175])
    return rng.integers(0, 2, size=(users, spec.bits), dtype=np.int8)


def density_trace(spec: ExperimentSpec, n: int) -> tuple[dict, str]:
    users = len(spec.patterns) if spec.patterns else spec.users[0]
    cfg = _network_config(spec, n, users)
    bits = _trace_bits(spec, users)
    res = propagate(cfg, bits, spec.seed, in_phase=spec.in_phase, keep_components=True)
    dens = photon_number_density(res)
    integrals = bin_integrals(res)
    grid = cfg.grid()
    stride = spec.stride or max(1, grid.samples_per_bin // 512)
    summary = {
        "n": n,
        "S": cfg.S,
        "bits": ["".join(map(str, row)) for row in bits],
        "bin_integrals": integrals.tolist(),
    }
    fmt = spec.output_format
    extra = {"trace_n": n, "trace_bits": summary["bits"], "stride": stride}
    if fmt == "json":
        t = grid.times()[::stride]
        payload = {"spec": spec.effective(), **summary, "stride": stride,
                   "t": t.tolist(), "density": dens[:, ::stride].tolist()}
        return summary, json.dumps(payload) + "\n"
    buf = io.StringIO()
    buf.write(_header_lines(spec, extra))
    if fmt == "text-table":
        buf.write(f"{'bin':>6}" + "".join(f"{f'rx{k + 1}':>16}" for k in range(users)) + "\n")
        for b in range(cfg.bits):
            cells = "".join(
                f"{f'{integrals[k, b]:.4f} ({bits[k, b]})':>16}" for k in range(users)
            )
            buf.write(f"{b:>6}{cells}\n")
        return summary, buf.getvalue()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"rx{k + 1}" for k in range(users)])
    t = grid.times()
    for i in range(0, grid.size, stride):
        w.writerow([repr(float(t[i]))] + [repr(float(d)) for d in dens[:, i]])
    return summary, buf.getvalue()


# ---- code check ------------------------------------------------------------


def code_check(spec: ExperimentSpec, n: int) -> str:
    lfsr = LfsrSpec.standard(n)
    base = generate_mseq(lfsr)
    count = lfsr.length if lfsr.length <= 64 else min(lfsr.length, max(spec.users))
    fam = build_family(lfsr, count)
    C = correlation_matrix(fam.members)
    off = C[~np.eye(count, dtype=bool)]
    info = {
        "n": n,
        "taps": list(lfsr.taps),
        "S": lfsr.length,
        "period": lfsr_period(lfsr),
        "balance": int(base.chips.sum()),
        "diagonal": sorted(set(np.diag(C).tolist())),
        "off_diagonal": sorted(set(off.tolist())),
    }
    if spec.code_out:
        base.save(spec.code_out, "json" if spec.code_out.endswith(".json") else "text")
    fmt = spec.output_format
    if fmt == "json":
        return json.dumps({"spec": spec.effective(), **info, "matrix": C.tolist()}) + "\n"
    buf = io.StringIO()
    buf.write(_header_lines(spec))
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["shift"] + [str(j) for j in range(count)])
        for i in range(count):
            w.writerow([str(i)] + [str(v) for v in C[i]])
        return buf.getvalue()
    for k, v in info.items():
        buf.write(f"{k}: {v}\n")
    width = max(len(str(v)) for v in C.ravel()) + 1
    for row in C:
        buf.write("".join(f"{v:>{width}d}" for v in row) + "\n")
    return buf.getvalue()


# ---- orchestration ---------------------------------------------------------


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def _suffixed(path: str | None, n: int, many: bool) -> str | None:
    if path is None or path == "-" or not many:
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}_n{n}{p.suffix}"))


def run(spec: ExperimentSpec) -> int:
    """Execute ``spec`` and write its artifacts. Returns the exit status."""
    if spec.experiment in ("loss-table", "crosstalk-table", "fidelity-table"):
        _write(spec.out, render_rows(spec, table_rows(spec)))
    elif spec.experiment == "density-trace":
        many = len(spec.n) > 1
        for n in spec.n:
            _, text = density_trace(spec, n)
            _write(_suffixed(spec.out, n, many), text)
    else:
        many = len(spec.n) > 1
        for n in spec.n:
            _write(_suffixed(spec.out, n, many), code_check(spec, n))
    return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _bits(text: str):
    """``8`` is a bit count; ``1011,0110`` (any comma) lists one bitstring per user."""
    if "," in text:
        return [p.strip() for p in text.split(",") if p.strip()]
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--bits takes a count or comma-separated bitstrings, got {text!r}"
        )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcdma", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="experiment", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", help="key: value experiment file")
        p.add_argument("--n", type=_int_list, help="register count(s), e.g. 8,10,12")
        p.add_argument("--users", type=_int_list, help="user count(s), e.g. 5,20,50")
        p.add_argument("--trials", type=int)
        p.add_argument("--runs", type=int)
        p.add_argument("--bits", type=_bits)
        p.add_argument("--seed", type=int)
        p.add_argument("--samples-per-chip", type=int, dest="samples_per_chip")
        p.add_argument("--filter-rule", choices=FILTER_RULES, dest="filter_rule")
        p.add_argument("--topology", choices=("ring", "chain"))
        p.add_argument("--background", choices=("silent", "random"))
        p.add_argument("--in-phase", action="store_true", default=None, dest="in_phase")
        p.add_argument("--stride", type=int, help="density-trace: keep every k-th sample")
        p.add_argument("--code-out", dest="code_out", help="code-check: export base code")
        p.add_argument("--allow-large", action="store_true", default=None, dest="allow_large")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=FORMATS)
    return ap


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    values = read_config_file(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k != "config" and v is not None}
    bits = flags.pop("bits", None)
    values.update(coerce(flags))
    if isinstance(bits, list):
        values["patterns"] = tuple(bits)
        values["bits"] = len(bits[0])
    elif bits is not None:
        values["bits"] = bits
        values["patterns"] = ()
    return build_spec(values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = spec_from_args(args)
    except ConfigFileError as exc:
        parser.error(str(exc))
    try:
        return run(spec)
    except (ConfigError, ConfigFileError, ValueError) as exc:
        print(f"qcdma: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"qcdma: cannot write output: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
