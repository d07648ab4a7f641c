"""The linear-combination (LC) parity code and its check-node update.

Per symbol group l, the parity symbol is

    v3 = h1 (x) v1  XOR  h2 (x) v2

with nonzero coefficients h = (h1, h2) in GF(2^q). The check-node update
fuses, for each group, the channel likelihoods of all three branches with
the current per-bit priors of branches 1 and 2, and emits a per-bit
message for every bit of branches 1 and 2:

    out[m][i](x) ~ sum over symbols v of branch m with bit i equal to x of
                   p(y_m | v) * P_lc(v) * prod_{i' != i} prior_m(bit i'),
    P_lc(v)      = sum over v_other of p(y_other | v_other)
                   * prior-product(v_other) * p(y_3 | h1 v XOR h2 v_other).

Everything runs in the linear probability domain; with 2^q <= 256 terms
per symbol the dynamic range is safe and the arithmetic matches
brute-force marginalization to machine precision. Batched variants treat
all N/q groups of a frame at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field as _dcfield

import numpy as np

from .errors import DecodeError
from .gf import GF2q, GFElement


@dataclass(frozen=True)
class LcConfig:
    """Field and coefficient pair of the parity combination.

    Coefficients are element indices; both must be nonzero so that fixing
    one operand makes the parity symbol a bijection of the other.
    """

    field: GF2q
    h: tuple[int, int]
    _t1: np.ndarray = _dcfield(init=False, repr=False, compare=False)
    _t2: np.ndarray = _dcfield(init=False, repr=False, compare=False)
    _pair: np.ndarray = _dcfield(init=False, repr=False, compare=False)

    def __post_init__(self):
        h1, h2 = (int(v) for v in self.h)
        object.__setattr__(self, "h", (h1, h2))
        for hm in (h1, h2):
            self.field._check_index(hm)
            if hm == 0:
                raise ValueError("coefficients must be nonzero field elements")
        t1 = self.field.mul_table[h1].copy()
        t2 = self.field.mul_table[h2].copy()
        pair = t1[:, None] ^ t2[None, :]  # pair[v1, v2] = h1*v1 + h2*v2
        for a in (t1, t2, pair):
            a.setflags(write=False)
        object.__setattr__(self, "_t1", t1)
        object.__setattr__(self, "_t2", t2)
        object.__setattr__(self, "_pair", pair)

    @property
    def q(self) -> int:
        return self.field.q


@dataclass
class LcGroupEvidence:
    """Everything one check node sees: channel samples of the three
    branches, bit priors of branches 1 and 2, noise level, amplitudes."""

    chan: np.ndarray      # (3, q) received samples, branch-major
    priors: np.ndarray    # (2, q, 2) probability pairs
    n0: float
    amp_cc: float
    amp_lc: float


def _as_index(v, cfg: LcConfig) -> int:
    if isinstance(v, GFElement):
        if v.field != cfg.field:
            raise ValueError("element does not belong to the configured field")
        return v.index
    v = int(v)
    cfg.field._check_index(v)
    return v


def lc_encode(v1, v2, cfg: LcConfig) -> int:
    """Parity symbol index h1*v1 XOR h2*v2; accepts indices or GFElement."""
    i1 = _as_index(v1, cfg)
    i2 = _as_index(v2, cfg)
    return int(cfg._pair[i1, i2])


def lc_encode_groups(v1: np.ndarray, v2: np.ndarray, cfg: LcConfig) -> np.ndarray:
    """Vectorized parity symbols for arrays of element indices."""
    return cfg._pair[np.asarray(v1, dtype=np.int64), np.asarray(v2, dtype=np.int64)]


def pack_groups(bits: np.ndarray, field: GF2q) -> np.ndarray:
    """Fold a bit sequence of length L*q into L symbol indices (bit k of a
    group is the coefficient of z^k)."""
    bits = np.asarray(bits, dtype=np.int64)
    q = field.q
    if bits.size % q != 0:
        raise ValueError(f"bit count {bits.size} not divisible by q={q}")
    return bits.reshape(-1, q) @ (1 << np.arange(q, dtype=np.int64))


def unpack_groups(symbols: np.ndarray, field: GF2q) -> np.ndarray:
    """Inverse of :func:`pack_groups`; returns a flat bit sequence."""
    return field.bits[np.asarray(symbols, dtype=np.int64)].astype(np.int64).ravel()


def symbol_channel_likelihood(
    samples: np.ndarray, amp: float, n0: float, field: GF2q
) -> np.ndarray:
    """Likelihood of each candidate symbol given the q samples of one branch.

    p(v) ~ prod_i exp(-(y_i - amp*(2 b_i(v) - 1))^2 / n0), normalized.
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size != field.q:
        raise ValueError(f"expected {field.q} samples, got {samples.size}")
    return branch_symbol_likelihoods(samples[None, :], amp, n0, field)[0]


def branch_symbol_likelihoods(
    y: np.ndarray, amp: float, n0: float, field: GF2q
) -> np.ndarray:
    """Batched symbol likelihoods, y of shape (L, q) -> (L, 2^q).

    The squared-distance terms common to all candidates cancel after
    normalization, leaving logits (2*amp/n0) * (y . s_v).
    """
    if n0 <= 0:
        raise ValueError(f"n0 must be > 0, got {n0}")
    if amp <= 0:
        raise ValueError(f"amp must be > 0, got {amp}")
    y = np.asarray(y, dtype=np.float64)
    logits = (2.0 * amp / n0) * (y @ field.bipolar.T)
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=1, keepdims=True)
    return p


def _excluded_products(f: np.ndarray) -> np.ndarray:
    """Along the last axis: out[..., i] = prod of f over all i' != i.

    Computed with prefix/suffix products so zero entries stay exact
    (no division)."""
    q = f.shape[-1]
    pre = np.ones_like(f)
    suf = np.ones_like(f)
    for i in range(1, q):
        pre[..., i] = pre[..., i - 1] * f[..., i - 1]
        suf[..., q - 1 - i] = suf[..., q - i] * f[..., q - i]
    return pre * suf


def checknode_messages(
    py1: np.ndarray,
    py2: np.ndarray,
    py3: np.ndarray,
    pa1: np.ndarray,
    pa2: np.ndarray,
    cfg: LcConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Check-node update for all groups of a frame at once.

    Parameters
    ----------
    py1, py2, py3 : (L, 2^q) arrays
        Per-branch channel likelihoods of each candidate symbol.
    pa1, pa2 : (L, q, 2) arrays
        Current per-bit priors of branches 1 and 2.

    Returns
    -------
    (g1, g2) : (L, q, 2) arrays
        Normalized per-bit messages toward the two convolutional decoders.
    """
    B = cfg.field.bits  # (Q, q)
    q = cfg.q
    idx_i = np.arange(q)[None, :]

    f1 = pa1[:, idx_i, B]  # (L, Q, q): prior of bit i under symbol v
    f2 = pa2[:, idx_i, B]
    e1 = _excluded_products(f1)
    e2 = _excluded_products(f2)
    w1 = py1 * f1.prod(axis=2)
    w2 = py2 * f2.prod(axis=2)

    py3_pair = py3[:, cfg._pair]  # (L, Q, Q): parity likelihood per (v1, v2)
    plc1 = np.einsum("lvw,lw->lv", py3_pair, w2)
    plc2 = np.einsum("lvw,lv->lw", py3_pair, w1)

    onehot = np.stack([1.0 - B, B.astype(np.float64)], axis=2)  # (Q, q, 2)
    g1 = np.einsum("lv,lvi,vix->lix", py1 * plc1, e1, onehot)
    g2 = np.einsum("lv,lvi,vix->lix", py2 * plc2, e2, onehot)

    out = []
    for g in (g1, g2):
        sums = g.sum(axis=2)
        if np.any(sums <= 0):
            raise DecodeError("check-node output has zero total mass")
        out.append(g / sums[:, :, None])
    return out[0], out[1]


def lc_checknode_update(ev: LcGroupEvidence, cfg: LcConfig) -> np.ndarray:
    """Single-group check-node update.

    Returns an array of shape (2, q, 2): the message for bit i of branch m
    is ``out[m, i]`` as a probability pair.
    """
    chan = np.asarray(ev.chan, dtype=np.float64)
    priors = np.asarray(ev.priors, dtype=np.float64)
    q = cfg.q
    if chan.shape != (3, q):
        raise ValueError(f"chan must have shape (3, {q})")
    if priors.shape != (2, q, 2):
        raise ValueError(f"priors must have shape (2, {q}, 2)")
    sums = priors.sum(axis=2)
    if np.any(priors < 0) or np.any(sums <= 0):
        raise ValueError("priors must be nonnegative with positive mass")
    priors = priors / sums[:, :, None]

    py1 = branch_symbol_likelihoods(chan[0][None, :], ev.amp_cc, ev.n0, cfg.field)
    py2 = branch_symbol_likelihoods(chan[1][None, :], ev.amp_cc, ev.n0, cfg.field)
    py3 = branch_symbol_likelihoods(chan[2][None, :], ev.amp_lc, ev.n0, cfg.field)
    g1, g2 = checknode_messages(
        py1, py2, py3, priors[0][None, :, :], priors[1][None, :, :], cfg
    )
    return np.stack([g1[0], g2[0]])
