"""Command-line front end.

Subcommands: encode, decode, ber, exit-lc, exit-cc, search-h, shannon.
Configuration is a flat key=value file (one key per line, ``#`` comments);
``--set key=value`` overrides individual keys. Every run writes its
artifacts to ``<outdir>/<subcommand>-<timestamp>/`` as ``results.csv``
plus ``manifest.txt``; the manifest is itself a valid config file, so any
run can be repeated bit-for-bit with ``--config <manifest>``.

All randomness derives from the single ``master_seed`` key.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, exitchart, sim
from .convcode import TrellisSpec, cc_encode
from .iterdec import DecoderConfig, decode
from .lc import lc_encode_groups, pack_groups, unpack_groups

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_UNKNOWN_KEY = 2
EXIT_INVALID_VALUE = 3
EXIT_INFEASIBLE = 4


class UnknownKeyError(ValueError):
    pass


class InvalidValueError(ValueError):
    pass


class InfeasibleBlockError(ValueError):
    pass


def _parse_int(s):
    return int(s)


def _parse_float(s):
    return float(s)


def _parse_floats(s):
    return tuple(float(tok) for tok in str(s).split(",") if tok.strip() != "")


def _parse_h(s):
    s = str(s).strip()
    if s == "search":
        return "search"
    parts = s.split(",")
    if len(parts) != 2:
        raise ValueError("h must be 'search' or two comma-separated indices")
    return (int(parts[0]), int(parts[1]))


def _parse_pair_str(s):
    parts = str(s).split(",")
    if len(parts) != 2:
        raise ValueError("expected two comma-separated values")
    return (parts[0].strip(), parts[1].strip())


def _parse_bits(s):
    s = str(s).strip()
    if any(c not in "01" for c in s):
        raise ValueError("bit strings may only contain 0 and 1")
    return s


def _fmt(value):
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# key -> (parser, default, help)
KEY_SPECS = {
    "q": (_parse_int, 4, "field order exponent, elements live in GF(2^q)"),
    "lambda_db": (_parse_float, 0.0, "parity/coded energy ratio in dB"),
    "h": (_parse_h, "search", "coefficients 'h1,h2' (element indices) or 'search'"),
    "generators": (_parse_pair_str, ("554", "774"),
                   "octal generator pair of the rate-1/2 code"),
    "target_symbols": (_parse_int, 2000, "approximate transmitted symbols per frame"),
    "iters": (_parse_int, 20, "decoder iterations per frame"),
    "ebno_grid_db": (_parse_floats, (), "comma-separated Eb/N0 points in dB"),
    "stop_errors": (_parse_int, 100, "bit errors collected before a point stops"),
    "max_bits": (_parse_int, 10_000_000, "info-bit budget per point"),
    "master_seed": (_parse_int, 1, "root of all randomness"),
    "es_bar": (_parse_float, 1.0, "average energy per transmitted symbol"),
    "threads": (_parse_int, 0, "worker threads (0 = machine parallelism)"),
    "batch": (_parse_int, 32, "frames per stopping-rule evaluation"),
    "search_snr_db": (_parse_float, 3.0, "symbol SNR used when h = search"),
    "search_symbols": (_parse_int, 20000, "bits per branch per search evaluation"),
    "snr_db": (_parse_float, 3.0, "symbol SNR (es_bar/N0, dB) for exit-lc"),
    "ia_grid": (_parse_floats, exitchart.DEFAULT_IA_GRID,
                "a-priori mutual information grid"),
    "exit_symbols": (_parse_int, 20000, "bits per branch per exit-lc point"),
    "exit_bits": (_parse_int, 100_000, "coded bits per exit-cc point"),
    "decode_ebno_db": (_parse_float, 3.0, "assumed Eb/N0 for the decode command"),
    "info_bits": (_parse_bits, "", "source bits for encode ('' = draw randomly)"),
    "infile": (str, "", "input sample file for decode (one real per line)"),
}

SUBCOMMANDS = ("encode", "decode", "ber", "exit-lc", "exit-cc", "search-h", "shannon")


def parse_config_file(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidValueError(f"{path}:{lineno}: expected key = value")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key] = val
    return values


def resolve_config(file_values: dict, overrides: list[str]) -> dict:
    cfg = {key: default for key, (_, default, _) in KEY_SPECS.items()}
    merged = dict(file_values)
    for item in overrides:
        if "=" not in item:
            raise InvalidValueError(f"--set needs key=value, got {item!r}")
        key, val = (part.strip() for part in item.split("=", 1))
        merged[key] = val
    for key, val in merged.items():
        if key not in KEY_SPECS:
            raise UnknownKeyError(f"unknown config key {key!r}")
        parser = KEY_SPECS[key][0]
        try:
            cfg[key] = parser(val)
        except (ValueError, TypeError) as exc:
            raise InvalidValueError(f"bad value for {key!r}: {exc}") from exc
    return cfg


def config_reference() -> str:
    lines = ["key                  default                 description",
             "-" * 72]
    for key, (_, default, help_) in KEY_SPECS.items():
        lines.append(f"{key:<20} {_fmt(default):<23} {help_}")
    return "\n".join(lines)


def write_manifest(path, subcommand: str, cfg: dict, extra: dict | None = None):
    with open(path, "w") as fh:
        fh.write(f"# {subcommand} run, lccode {__version__}\n")
        fh.write(f"# created {_dt.datetime.now().isoformat()}\n")
        fh.write(f"# numpy {np.__version__}\n")
        if extra:
            for key, val in extra.items():
                fh.write(f"# {key} = {_fmt(val)}\n")
        for key in KEY_SPECS:
            fh.write(f"{key} = {_fmt(cfg[key])}\n")


def _sim_config(cfg: dict) -> sim.SimConfig:
    threads = cfg["threads"] if cfg["threads"] > 0 else (os.cpu_count() or 1)
    return sim.SimConfig(
        q=cfg["q"],
        lambda_db=cfg["lambda_db"],
        h=cfg["h"],
        generators=cfg["generators"],
        target_symbols=cfg["target_symbols"],
        iters=cfg["iters"],
        ebno_grid_db=cfg["ebno_grid_db"],
        stop_errors=cfg["stop_errors"],
        max_bits=cfg["max_bits"],
        master_seed=cfg["master_seed"],
        es_bar=cfg["es_bar"],
        threads=threads,
        batch=cfg["batch"],
        search_snr_db=cfg["search_snr_db"],
        search_symbols=cfg["search_symbols"],
    )


def _resolve_h(cfg: dict, snr_key: str) -> tuple[int, int]:
    if cfg["h"] != "search":
        return cfg["h"]
    res = exitchart.search_coefficients(
        cfg["q"], cfg["lambda_db"], cfg[snr_key],
        n_symbols=cfg["search_symbols"], seed=cfg["master_seed"],
    )
    return res.best_h


def _derive_sizes_checked(cfg: dict):
    try:
        return sim.derive_block_sizes(cfg["q"], cfg["target_symbols"])
    except ValueError as exc:
        raise InfeasibleBlockError(str(exc)) from exc


# -- subcommand bodies -------------------------------------------------------

def _cmd_encode(cfg, rundir):
    scfg = _sim_config(cfg)
    if scfg.h == "search":
        scfg = sim.SimConfig(**{**scfg.__dict__, "h": _resolve_h(cfg, "search_snr_db")})
    _derive_sizes_checked(cfg)
    system = sim.build_system(scfg)
    if cfg["info_bits"]:
        u = np.array([int(c) for c in cfg["info_bits"]], dtype=np.int64)
        if u.size != 2 * system.k:
            raise InvalidValueError(
                f"info_bits must hold {2 * system.k} bits, got {u.size}"
            )
    else:
        rng = np.random.default_rng(
            np.random.SeedSequence([scfg.master_seed, 0xE5C0])
        )
        u = rng.integers(0, 2, size=2 * system.k)
    c1 = cc_encode(u[: system.k], system.trellis)
    c2 = cc_encode(u[system.k:], system.trellis)
    x1 = system.il1.apply(c1)
    x2 = system.il2.apply(c2)
    x3 = unpack_groups(
        lc_encode_groups(pack_groups(x1, system.field),
                         pack_groups(x2, system.field), system.lc_cfg),
        system.field,
    )
    x = np.concatenate([x1, x2, x3])
    s = np.concatenate([
        system.plan.amp_cc * (2.0 * x1 - 1.0),
        system.plan.amp_cc * (2.0 * x2 - 1.0),
        system.plan.amp_lc * (2.0 * x3 - 1.0),
    ])
    with open(rundir / "results.csv", "w") as fh:
        fh.write("t,x,s\n")
        for t in range(x.size):
            fh.write(f"{t + 1},{int(x[t])},{s[t]!r}\n")
    cfg = dict(cfg)
    cfg["info_bits"] = "".join(str(int(b)) for b in u)
    cfg["h"] = system.lc_cfg.h
    extra = {"derived_k": system.k, "derived_n": system.n,
             "effective_rate": system.effective_rate}
    return cfg, extra, f"encoded 2K={2 * system.k} bits into 3N={3 * system.n} symbols"


def _cmd_decode(cfg, rundir):
    if not cfg["infile"]:
        raise InvalidValueError("decode requires infile=<path>")
    y = np.loadtxt(cfg["infile"], dtype=np.float64, ndmin=1)
    scfg = _sim_config(cfg)
    if scfg.h == "search":
        scfg = sim.SimConfig(**{**scfg.__dict__, "h": _resolve_h(cfg, "search_snr_db")})
    _derive_sizes_checked(cfg)
    system = sim.build_system(scfg)
    if y.size != 3 * system.n:
        raise InvalidValueError(f"expected {3 * system.n} samples, got {y.size}")
    rate = system.effective_rate
    n0 = scfg.es_bar / (rate * 10.0 ** (cfg["decode_ebno_db"] / 10.0))
    dec_cfg = DecoderConfig(
        trellis=system.trellis, lc_cfg=system.lc_cfg, il1=system.il1,
        il2=system.il2, plan=system.plan, n0=n0, iters=scfg.iters,
    )
    result = decode(y, dec_cfg)
    with open(rundir / "results.csv", "w") as fh:
        fh.write("k,u_hat\n")
        for k, bit in enumerate(result.u_hat):
            fh.write(f"{k + 1},{int(bit)}\n")
    cfg = dict(cfg)
    cfg["h"] = system.lc_cfg.h
    extra = {"derived_k": system.k, "derived_n": system.n,
             "mean_abs_llr": float(result.llr_trace[-1])}
    return cfg, extra, f"decoded {result.u_hat.size} information bits"


def _cmd_ber(cfg, rundir):
    scfg = _sim_config(cfg)
    if not scfg.ebno_grid_db:
        raise InvalidValueError("ber requires a nonempty ebno_grid_db")
    if scfg.h == "search":
        scfg = sim.SimConfig(**{**scfg.__dict__, "h": _resolve_h(cfg, "search_snr_db")})
    k, n = _derive_sizes_checked(cfg)
    records = sim.run_sweep(scfg, csv_path=rundir / "results.csv")
    cfg = dict(cfg)
    cfg["h"] = records[0].h
    extra = {"derived_k": k, "derived_n": n,
             "effective_rate": records[0].effective_rate}
    lines = [f"{r.ebno_db} dB: ber={r.ber:.3e} ({r.bit_errors} errors)"
             for r in records]
    return cfg, extra, "\n".join(lines)


def _cmd_exit_lc(cfg, rundir):
    h = _resolve_h(cfg, "snr_db")
    curve = exitchart.lc_transfer(
        cfg["q"], h, cfg["lambda_db"], cfg["snr_db"],
        ia_grid=cfg["ia_grid"], n_symbols=cfg["exit_symbols"],
        seed=cfg["master_seed"],
    )
    curve.write_csv(rundir / "results.csv")
    cfg = dict(cfg)
    cfg["h"] = h
    t = dict(curve.points)
    extra = {"t0": t.get(0.0), "t1": t.get(1.0)}
    return cfg, extra, f"transfer curve with {len(curve.points)} points"


def _cmd_exit_cc(cfg, rundir):
    trellis = TrellisSpec.from_octal(*cfg["generators"])
    curve = exitchart.cc_transfer(
        trellis, ia_grid=cfg["ia_grid"], n_bits=cfg["exit_bits"],
        seed=cfg["master_seed"],
    )
    curve.write_csv(rundir / "results.csv")
    return dict(cfg), {"area": curve.area()}, (
        f"transfer curve with {len(curve.points)} points, area {curve.area():.4f}"
    )


def _cmd_search_h(cfg, rundir):
    threads = cfg["threads"] if cfg["threads"] > 0 else (os.cpu_count() or 1)
    res = exitchart.search_coefficients(
        cfg["q"], cfg["lambda_db"], cfg["snr_db"],
        n_symbols=cfg["search_symbols"], seed=cfg["master_seed"],
        threads=threads,
    )
    res.write_csv(rundir / "results.csv")
    cfg = dict(cfg)
    cfg["h"] = res.best_h
    extra = {"best_h": res.best_h, "objective": res.objective}
    return cfg, extra, (
        f"best h = {res.best_h} with objective {res.objective:.4f} "
        f"({len(res.table)} pairs)"
    )


def _cmd_shannon(cfg, rundir):
    k, n = _derive_sizes_checked(cfg)
    rate = 2.0 * k / (3.0 * n)
    limit = sim.ebno_limit_db(rate)
    with open(rundir / "results.csv", "w") as fh:
        fh.write("q,n,k,effective_rate,ebno_limit_db\n")
        fh.write(f"{cfg['q']},{n},{k},{rate!r},{limit!r}\n")
    extra = {"derived_k": k, "derived_n": n}
    return dict(cfg), extra, (
        f"rate {rate:.4f}: capacity limit at Eb/N0 = {limit:.3f} dB"
    )


_HANDLERS = {
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "ber": _cmd_ber,
    "exit-lc": _cmd_exit_lc,
    "exit-cc": _cmd_exit_cc,
    "search-h": _cmd_search_h,
    "shannon": _cmd_shannon,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lccode",
        description="linear-combination coupled convolutional code toolkit",
    )
    parser.add_argument("--config-help", action="store_true",
                        help="print the config key reference and exit")
    parser.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key")
    parser.add_argument("--outdir", default="runs", help="artifact directory root")
    args = parser.parse_args(argv)

    if args.config_help:
        print(config_reference())
        return EXIT_OK
    if args.subcommand is None:
        parser.error("a subcommand is required")

    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = resolve_config(file_values, args.set)
        stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S%f")
        rundir = Path(args.outdir) / f"{args.subcommand}-{stamp}"
        rundir.mkdir(parents=True, exist_ok=False)
        final_cfg, extra, summary = _HANDLERS[args.subcommand](cfg, rundir)
        write_manifest(rundir / "manifest.txt", args.subcommand, final_cfg, extra)
        print(summary)
        print(f"artifacts in {rundir}")
        return EXIT_OK
    except UnknownKeyError as exc:
        print(f"error kind=unknown-key msg={exc}", file=sys.stderr)
        return EXIT_UNKNOWN_KEY
    except InvalidValueError as exc:
        print(f"error kind=invalid-value msg={exc}", file=sys.stderr)
        return EXIT_INVALID_VALUE
    except InfeasibleBlockError as exc:
        print(f"error kind=infeasible-block msg={exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except Exception as exc:  # noqa: BLE001 - single-line contract
        print(f"error kind=failure msg={exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
