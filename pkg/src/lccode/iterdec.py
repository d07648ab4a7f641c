"""Iterative decoder: parity check nodes and two trellis decoders in turn.

Channel observations enter the factor graph only through the parity check
nodes, so every iteration starts there: (1) check-node update with the
current bit priors, (2) de-interleave the resulting messages and run both
trellis decoders, (3) interleave the extrinsic coded messages back as the
new priors. After a fixed number of iterations the information posteriors
of the last trellis pass are hard-decided. Passing extrinsics (not full
posteriors) around the loop prevents each decoder's own output from being
fed back to it.
"""

from __future__ import annotations

from dataclasses import dataclass, field as _dcfield

import numpy as np

from .convcode import TrellisSpec, cc_bcjr
from .interleave import Interleaver
from .lc import LcConfig, branch_symbol_likelihoods, checknode_messages
from .txchain import EnergyPlan

_LLR_CLIP = 1e-300


@dataclass(frozen=True)
class DecoderConfig:
    trellis: TrellisSpec
    lc_cfg: LcConfig
    il1: Interleaver
    il2: Interleaver
    plan: EnergyPlan
    n0: float
    iters: int = 20

    def __post_init__(self):
        n = self.il1.n
        if self.il2.n != n:
            raise ValueError("the two interleavers must have equal length")
        if n % 2 != 0 or n // 2 <= self.trellis.memory:
            raise ValueError(f"coded length {n} incompatible with the trellis")
        if n % self.lc_cfg.q != 0:
            raise ValueError(f"coded length {n} not divisible by q={self.lc_cfg.q}")
        if self.iters < 1:
            raise ValueError("iters must be >= 1")
        if self.n0 <= 0:
            raise ValueError("n0 must be > 0")

    @property
    def n(self) -> int:
        return self.il1.n

    @property
    def k(self) -> int:
        return self.n // 2 - self.trellis.memory


@dataclass
class DecodeResult:
    u_hat: np.ndarray          # 2K bits, branch 1 then branch 2
    info_app: np.ndarray       # (2K, 2) posterior pairs in the same order
    iterations_run: int
    llr_trace: np.ndarray = _dcfield(default_factory=lambda: np.empty(0))


def hard_decision(app: np.ndarray) -> np.ndarray:
    """Bit = 1 iff p1 > p0; the (measure-zero) tie goes to 0."""
    app = np.asarray(app, dtype=np.float64)
    return (app[..., 1] > app[..., 0]).astype(np.int64)


def _mean_abs_llr(app1: np.ndarray, app2: np.ndarray) -> float:
    p = np.concatenate([app1, app2], axis=0)
    p = np.clip(p, _LLR_CLIP, None)
    return float(np.mean(np.abs(np.log(p[:, 0]) - np.log(p[:, 1]))))


def decode(y: np.ndarray, cfg: DecoderConfig) -> DecodeResult:
    """Decode one received frame of 3N real samples."""
    y = np.asarray(y, dtype=np.float64).ravel()
    n = cfg.n
    if y.size != 3 * n:
        raise ValueError(f"expected {3 * n} samples, got {y.size}")
    q = cfg.lc_cfg.q
    L = n // q
    fld = cfg.lc_cfg.field

    y1, y2, y3 = (y[j * n:(j + 1) * n].reshape(L, q) for j in range(3))
    py1 = branch_symbol_likelihoods(y1, cfg.plan.amp_cc, cfg.n0, fld)
    py2 = branch_symbol_likelihoods(y2, cfg.plan.amp_cc, cfg.n0, fld)
    py3 = branch_symbol_likelihoods(y3, cfg.plan.amp_lc, cfg.n0, fld)

    pa1 = np.full((n, 2), 0.5)
    pa2 = np.full((n, 2), 0.5)
    trace = np.empty(cfg.iters)
    app1 = app2 = None
    for it in range(cfg.iters):
        g1, g2 = checknode_messages(
            py1, py2, py3, pa1.reshape(L, q, 2), pa2.reshape(L, q, 2), cfg.lc_cfg
        )
        app1, ext1 = cc_bcjr(cfg.il1.invert(g1.reshape(n, 2)), cfg.trellis)
        app2, ext2 = cc_bcjr(cfg.il2.invert(g2.reshape(n, 2)), cfg.trellis)
        pa1 = cfg.il1.apply(ext1)
        pa2 = cfg.il2.apply(ext2)
        trace[it] = _mean_abs_llr(app1, app2)

    info_app = np.concatenate([app1, app2], axis=0)
    return DecodeResult(
        u_hat=hard_decision(info_app),
        info_app=info_app,
        iterations_run=cfg.iters,
        llr_trace=trace,
    )
