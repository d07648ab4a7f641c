"""Monte Carlo bit-error-rate evaluation of the full transmit/decode chain.

Each SNR point draws random source blocks, runs encode -> interleave ->
parity -> modulate -> AWGN -> iterative decode, and counts errors over the
information bits only (never tail or parity). A point stops once the
target error count or the bit budget is reached. Per-frame seeds are
derived from (master seed, point index, frame index), so any stopping
point, batch size or execution order reproduces identical numbers.
"""

from __future__ import annotations

import concurrent.futures as _futures
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import exitchart
from .convcode import TrellisSpec, cc_encode
from .gf import GF2q
from .interleave import Interleaver, gen_spread
from .iterdec import DecoderConfig, decode
from .lc import LcConfig, lc_encode_groups, pack_groups, unpack_groups
from .txchain import EnergyPlan, plan_energy

BER_CSV_HEADER = (
    "ebno_db,snr_db,q,lambda_db,h1,h2,info_bits,bit_errors,"
    "frames,frame_errors,ber,fer,effective_rate"
)


def derive_block_sizes(q: int, target_symbols: int = 2000, memory: int = 6):
    """Pick (K, N): N is the smallest multiple of lcm(2, q) with
    3N >= target_symbols + q; K excludes the termination tail."""
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    step = math.lcm(2, q)
    base = (target_symbols + q) / 3.0
    n = step * math.ceil(base / step)
    k = n // 2 - memory
    if k <= 0:
        raise ValueError(
            f"target_symbols={target_symbols} infeasible for q={q}: K={k}"
        )
    return k, n


@dataclass(frozen=True)
class SimConfig:
    q: int = 4
    lambda_db: float = 0.0
    h: tuple[int, int] | str = "search"
    generators: tuple[str, str] = ("554", "774")
    target_symbols: int = 2000
    iters: int = 20
    ebno_grid_db: tuple[float, ...] = ()
    stop_errors: int = 100
    max_bits: int = 10_000_000
    master_seed: int = 1
    es_bar: float = 1.0
    threads: int = 1
    batch: int = 32
    search_snr_db: float | None = None
    search_symbols: int = 20000

    def __post_init__(self):
        if self.stop_errors < 1:
            raise ValueError("stop_errors must be >= 1")
        if self.h == "search" and self.search_snr_db is None:
            raise ValueError("h='search' requires search_snr_db")


@dataclass
class BerRecord:
    ebno_db: float
    snr_db: float
    q: int
    lambda_db: float
    h: tuple[int, int]
    info_bits_sent: int
    bit_errors: int
    frame_errors: int
    frames: int
    ber: float
    fer: float
    effective_rate: float


@dataclass(frozen=True)
class System:
    """Everything fixed across the frames of a sweep."""

    cfg: SimConfig
    field: GF2q
    trellis: TrellisSpec
    lc_cfg: LcConfig
    il1: Interleaver
    il2: Interleaver
    plan: EnergyPlan
    k: int
    n: int

    @property
    def effective_rate(self) -> float:
        return 2.0 * self.k / (3.0 * self.n)


def build_system(cfg: SimConfig) -> System:
    """Resolve block sizes, trellis, interleavers and coefficients."""
    fld = GF2q(cfg.q)
    trellis = TrellisSpec.from_octal(*cfg.generators)
    k, n = derive_block_sizes(cfg.q, cfg.target_symbols, trellis.memory)
    h = cfg.h
    if h == "search":
        res = exitchart.search_coefficients(
            cfg.q, cfg.lambda_db, cfg.search_snr_db,
            n_symbols=cfg.search_symbols,
            seed=cfg.master_seed, threads=cfg.threads, field=fld,
        )
        h = res.best_h
    elif isinstance(h, str):
        raise ValueError(f"h must be a coefficient pair or 'search', got {h!r}")
    lc_cfg = LcConfig(fld, (int(h[0]), int(h[1])))
    seed1, seed2 = np.random.SeedSequence([cfg.master_seed, 0x494C]).generate_state(2)
    il1 = gen_spread(n, cfg.q, int(seed1))
    il2 = gen_spread(n, cfg.q, int(seed2))
    plan = plan_energy(cfg.lambda_db, cfg.es_bar)
    return System(cfg=cfg, field=fld, trellis=trellis, lc_cfg=lc_cfg,
                  il1=il1, il2=il2, plan=plan, k=k, n=n)


def transmit_frame(system: System, rng: np.random.Generator, n0: float):
    """Draw a source block and produce its noisy channel output."""
    cfg = system.cfg
    k, n = system.k, system.n
    u = rng.integers(0, 2, size=2 * k)
    c1 = cc_encode(u[:k], system.trellis)
    c2 = cc_encode(u[k:], system.trellis)
    x1 = system.il1.apply(c1)
    x2 = system.il2.apply(c2)
    v3 = lc_encode_groups(
        pack_groups(x1, system.field), pack_groups(x2, system.field),
        system.lc_cfg,
    )
    x3 = unpack_groups(v3, system.field)
    s = np.concatenate([
        system.plan.amp_cc * (2.0 * x1 - 1.0),
        system.plan.amp_cc * (2.0 * x2 - 1.0),
        system.plan.amp_lc * (2.0 * x3 - 1.0),
    ])
    y = s if n0 == 0 else s + rng.normal(0.0, np.sqrt(n0 / 2.0), size=s.shape)
    return u, y


def _run_frame(system: System, dec_cfg: DecoderConfig, frame_seed) -> tuple[int, int]:
    rng = np.random.default_rng(frame_seed)
    u, y = transmit_frame(system, rng, dec_cfg.n0)
    result = decode(y, dec_cfg)
    errs = int(np.sum(result.u_hat != u))
    return errs, 2 * system.k


def run_ber_point(
    cfg: SimConfig, ebno_db: float, point_index: int = 0,
    system: System | None = None,
) -> BerRecord:
    """Simulate one Eb/N0 point until ``stop_errors`` bit errors or
    ``max_bits`` information bits."""
    sys_ = system if system is not None else build_system(cfg)
    rate = sys_.effective_rate
    n0 = cfg.es_bar / (rate * 10.0 ** (ebno_db / 10.0))
    dec_cfg = DecoderConfig(
        trellis=sys_.trellis, lc_cfg=sys_.lc_cfg, il1=sys_.il1, il2=sys_.il2,
        plan=sys_.plan, n0=n0, iters=cfg.iters,
    )

    bit_errors = 0
    frame_errors = 0
    bits_sent = 0
    frames = 0
    batch = max(1, cfg.batch)
    pool = (
        _futures.ThreadPoolExecutor(max_workers=cfg.threads)
        if cfg.threads > 1 else None
    )
    try:
        while bit_errors < cfg.stop_errors and bits_sent < cfg.max_bits:
            seeds = [
                np.random.SeedSequence([cfg.master_seed, point_index, frames + j])
                for j in range(batch)
            ]
            if pool is not None:
                outs = list(pool.map(
                    lambda sd: _run_frame(sys_, dec_cfg, sd), seeds
                ))
            else:
                outs = [_run_frame(sys_, dec_cfg, sd) for sd in seeds]
            for errs, nbits in outs:
                bit_errors += errs
                frame_errors += int(errs > 0)
                bits_sent += nbits
                frames += 1
    finally:
        if pool is not None:
            pool.shutdown()

    return BerRecord(
        ebno_db=float(ebno_db),
        snr_db=float(ebno_db + 10.0 * np.log10(rate)),
        q=cfg.q,
        lambda_db=cfg.lambda_db,
        h=sys_.lc_cfg.h,
        info_bits_sent=bits_sent,
        bit_errors=bit_errors,
        frame_errors=frame_errors,
        frames=frames,
        ber=bit_errors / bits_sent,
        fer=frame_errors / frames,
        effective_rate=rate,
    )


def run_sweep(cfg: SimConfig, csv_path=None) -> list[BerRecord]:
    """One record per grid entry, in grid order; optionally stream a CSV."""
    if not cfg.ebno_grid_db:
        raise ValueError("ebno_grid_db must not be empty")
    system = build_system(cfg)
    records = []
    fh = open(csv_path, "w") if csv_path is not None else None
    try:
        if fh is not None:
            fh.write(BER_CSV_HEADER + "\n")
            fh.flush()
        for idx, ebno in enumerate(cfg.ebno_grid_db):
            rec = run_ber_point(cfg, ebno, point_index=idx, system=system)
            records.append(rec)
            if fh is not None:
                fh.write(format_ber_row(rec) + "\n")
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return records


def format_ber_row(r: BerRecord) -> str:
    return ",".join([
        repr(float(r.ebno_db)), repr(float(r.snr_db)), str(r.q),
        repr(float(r.lambda_db)), str(r.h[0]), str(r.h[1]),
        str(r.info_bits_sent), str(r.bit_errors), str(r.frames),
        str(r.frame_errors), repr(float(r.ber)), repr(float(r.fer)),
        repr(float(r.effective_rate)),
    ])


def write_ber_csv(records: list[BerRecord], path) -> None:
    with open(path, "w") as fh:
        fh.write(BER_CSV_HEADER + "\n")
        for r in records:
            fh.write(format_ber_row(r) + "\n")


# -- capacity bookkeeping ----------------------------------------------------

def biawgn_capacity(es_n0: float) -> float:
    """Capacity (bits per real channel use) of binary input +-sqrt(Es) in
    Gaussian noise of variance N0/2, by Gauss-Hermite quadrature."""
    if es_n0 <= 0:
        return 0.0
    nodes, weights = np.polynomial.hermite.hermgauss(127)
    # Channel LLR under x=+1 is consistent Gaussian: mean 4Es/N0, var 8Es/N0.
    mean = 4.0 * es_n0
    std = np.sqrt(8.0 * es_n0)
    ll = mean + std * np.sqrt(2.0) * nodes
    vals = np.logaddexp(0.0, -ll) / np.log(2.0)
    return float(1.0 - (vals @ weights) / np.sqrt(np.pi))


def ebno_limit_db(rate: float) -> float:
    """Eb/N0 (dB) at which binary-input AWGN capacity equals ``rate``."""
    if not 0.0 < rate < 1.0:
        raise ValueError(f"rate must be in (0, 1), got {rate}")

    def gap(ebno_db):
        es_n0 = rate * 10.0 ** (ebno_db / 10.0)
        return biawgn_capacity(es_n0) - rate

    return float(brentq(gap, -1.7, 40.0, xtol=1e-9))


def shannon_gap(record: BerRecord) -> float:
    """dB distance of a measured point from the capacity limit at its
    effective rate."""
    return float(record.ebno_db - ebno_limit_db(record.effective_rate))
