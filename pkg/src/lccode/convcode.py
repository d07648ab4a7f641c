"""Rate-1/2 terminated feed-forward convolutional code and its soft decoder.

The encoder is a non-systematic shift register with two tap sets; a tail
of ``memory`` zero bits is appended internally so every codeword starts
and ends in state 0. The soft-in/soft-out decoder is the exact
forward-backward (MAP) algorithm over the code trellis, run in the log
domain with exact log-sum-exp and per-step normalization.

Message convention throughout: a soft bit message is a probability pair
(p0, p1), arrays of shape (n, 2).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .errors import DecodeError

# Log-domain sentinels. LOG_FLOOR stands in for log(0) of an input message;
# NEG marks trellis branches that are structurally forbidden (tail steps).
LOG_FLOOR = -1.0e5
NEG = -1.0e18


def taps_from_octal(octal: str, memory: int = 6) -> tuple[int, ...]:
    """Expand an octal generator string, MSB first, to ``memory + 1`` taps.

    Each octal digit contributes three bits; the string is left-justified,
    so a 3-digit generator holds 9 bits of which the leading 7 form a
    memory-6 tap set. taps[0] multiplies the current input bit.
    """
    bits = "".join(f"{int(d, 8):03b}" for d in octal)
    if len(bits) < memory + 1:
        raise ValueError(f"octal generator {octal!r} too short for memory {memory}")
    return tuple(int(b) for b in bits[: memory + 1])


class TrellisSpec:
    """Transition structure of a rate-1/2 feed-forward convolutional code.

    The state is the previous ``memory`` input bits, most recent in the
    high bit. Every state has exactly two outgoing and two incoming
    transitions, and feeding ``memory`` zeros from any state reaches
    state 0, which is what makes zero-tail termination work.
    """

    def __init__(self, taps1, taps2):
        taps1 = tuple(int(t) for t in taps1)
        taps2 = tuple(int(t) for t in taps2)
        if len(taps1) != len(taps2):
            raise ValueError("tap vectors must have equal length")
        if len(taps1) < 2:
            raise ValueError("need memory >= 1 (tap vectors of length >= 2)")
        for taps in (taps1, taps2):
            if any(t not in (0, 1) for t in taps):
                raise ValueError("taps must be 0/1")
            if not any(taps):
                raise ValueError("tap vector must not be all zero")
        self.taps1 = taps1
        self.taps2 = taps2
        self.memory = len(taps1) - 1
        self.state_count = 1 << self.memory

        m = self.memory
        # g has bit m on the current input, bit m-1 on the newest state bit.
        g1 = sum(t << (m - i) for i, t in enumerate(taps1))
        g2 = sum(t << (m - i) for i, t in enumerate(taps2))

        S = self.state_count
        self.next_state = np.empty((S, 2), dtype=np.int64)
        self.out_bits = np.empty((S, 2, 2), dtype=np.int64)
        for s in range(S):
            for b in (0, 1):
                reg = (b << m) | s
                self.next_state[s, b] = (b << (m - 1)) | (s >> 1)
                self.out_bits[s, b, 0] = bin(g1 & reg).count("1") & 1
                self.out_bits[s, b, 1] = bin(g2 & reg).count("1") & 1
        self.next_state.setflags(write=False)
        self.out_bits.setflags(write=False)

        counts = np.bincount(self.next_state.ravel(), minlength=S)
        if not np.all(counts == 2):
            raise AssertionError("trellis must have exactly 2 incoming edges per state")
        for s in range(S):
            t = s
            for _ in range(m):
                t = int(self.next_state[t, 0])
            if t != 0:
                raise AssertionError("feeding zeros must drive every state to 0")

    @classmethod
    def from_octal(cls, g1: str = "554", g2: str = "774", memory: int = 6):
        return cls(taps_from_octal(g1, memory), taps_from_octal(g2, memory))

    def coded_length(self, k: int) -> int:
        return 2 * (k + self.memory)

    def __repr__(self) -> str:
        return f"TrellisSpec(taps1={self.taps1}, taps2={self.taps2})"


def cc_encode(info: np.ndarray, trellis: TrellisSpec) -> np.ndarray:
    """Encode ``info`` bits, appending the zero tail; output interleaves
    the two generator outputs per input bit: (c1_1, c2_1, c1_2, ...)."""
    info = np.asarray(info, dtype=np.int64).ravel()
    if info.size == 0:
        raise ValueError("empty information word")
    if np.any((info != 0) & (info != 1)):
        raise ValueError("information bits must be 0/1")
    k = info.size
    m = trellis.memory
    out = np.empty(2 * (k + m), dtype=np.int64)
    state = 0
    for t in range(k + m):
        b = int(info[t]) if t < k else 0
        out[2 * t] = trellis.out_bits[state, b, 0]
        out[2 * t + 1] = trellis.out_bits[state, b, 1]
        state = int(trellis.next_state[state, b])
    assert state == 0
    return out


@njit(cache=True, nogil=True, inline="always")
def _maxstar(a, b):
    """Exact log(e^a + e^b). The correction term is skipped once it falls
    below double-precision resolution (|a-b| > 37, exp < 8.5e-17)."""
    if a > b:
        m, d = a, a - b
    else:
        m, d = b, b - a
    if d > 37.0:
        return m
    return m + math.log1p(math.exp(-d))


@njit(cache=True, nogil=True)
def _bcjr_log_kernel(lm1, lm2, out1, out2, nxt, n_info):
    """Forward-backward pass over the trellis, exact log-sum-exp.

    lm1/lm2: (T, 2) log input messages for the first/second coded bit of
    each trellis step. out1/out2/nxt: (S, 2) tables indexed by
    (state, input bit). Steps >= n_info only admit input 0 (the tail).

    Returns log-domain, per-position-normalized (n_info, 2) information
    posteriors and (2T, 2) extrinsic coded messages (each coded position's
    own input message excluded).
    """
    T = lm1.shape[0]
    S = nxt.shape[0]

    lg = np.empty((T, S, 2))
    for t in range(T):
        for s in range(S):
            for b in range(2):
                if t >= n_info and b == 1:
                    lg[t, s, b] = NEG
                else:
                    lg[t, s, b] = lm1[t, out1[s, b]] + lm2[t, out2[s, b]]

    alpha = np.full((T + 1, S), NEG)
    alpha[0, 0] = 0.0
    for t in range(T):
        nxt_col = alpha[t + 1]
        for s in range(S):
            nxt_col[s] = NEG
        for s in range(S):
            a = alpha[t, s]
            for b in range(2):
                j = nxt[s, b]
                v = a + lg[t, s, b]
                nxt_col[j] = _maxstar(nxt_col[j], v)
        m = nxt_col[0]
        for s in range(1, S):
            if nxt_col[s] > m:
                m = nxt_col[s]
        for s in range(S):
            nxt_col[s] -= m

    beta = np.full((T + 1, S), NEG)
    beta[T, 0] = 0.0
    for t in range(T - 1, -1, -1):
        col = beta[t]
        for s in range(S):
            v = lg[t, s, 0] + beta[t + 1, nxt[s, 0]]
            w = lg[t, s, 1] + beta[t + 1, nxt[s, 1]]
            col[s] = _maxstar(v, w)
        m = col[0]
        for s in range(1, S):
            if col[s] > m:
                m = col[s]
        for s in range(S):
            col[s] -= m

    info_app = np.empty((n_info, 2))
    coded_ext = np.empty((2 * T, 2))
    for t in range(T):
        a0 = NEG
        a1 = NEG
        e1_0 = NEG
        e1_1 = NEG
        e2_0 = NEG
        e2_1 = NEG
        nb = 2 if t < n_info else 1
        for s in range(S):
            for b in range(nb):
                base = alpha[t, s] + beta[t + 1, nxt[s, b]]
                c1 = out1[s, b]
                c2 = out2[s, b]
                v = base + lm2[t, c2]
                if c1 == 0:
                    e1_0 = _maxstar(e1_0, v)
                else:
                    e1_1 = _maxstar(e1_1, v)
                w = base + lm1[t, c1]
                if c2 == 0:
                    e2_0 = _maxstar(e2_0, w)
                else:
                    e2_1 = _maxstar(e2_1, w)
                if t < n_info:
                    full = v + lm1[t, c1]
                    if b == 0:
                        a0 = _maxstar(a0, full)
                    else:
                        a1 = _maxstar(a1, full)
        if t < n_info:
            norm = _maxstar(a0, a1)
            info_app[t, 0] = a0 - norm
            info_app[t, 1] = a1 - norm
        n1 = _maxstar(e1_0, e1_1)
        coded_ext[2 * t, 0] = e1_0 - n1
        coded_ext[2 * t, 1] = e1_1 - n1
        n2 = _maxstar(e2_0, e2_1)
        coded_ext[2 * t + 1, 0] = e2_0 - n2
        coded_ext[2 * t + 1, 1] = e2_1 - n2

    return info_app, coded_ext


def _checked_messages(coded_msgs: np.ndarray) -> np.ndarray:
    msgs = np.asarray(coded_msgs, dtype=np.float64)
    if msgs.ndim != 2 or msgs.shape[1] != 2:
        raise ValueError("coded messages must have shape (n, 2)")
    if np.any(msgs < 0) or not np.all(np.isfinite(msgs)):
        raise ValueError("message probabilities must be finite and >= 0")
    sums = msgs.sum(axis=1)
    if np.any(sums <= 0):
        raise DecodeError("non-normalizable coded message (both probabilities 0)")
    return msgs / sums[:, None]


def cc_bcjr(
    coded_msgs: np.ndarray, trellis: TrellisSpec
) -> tuple[np.ndarray, np.ndarray]:
    """MAP-decode soft coded-bit messages on the terminated trellis.

    Parameters
    ----------
    coded_msgs : (N, 2) array
        Probability pairs for each coded bit, N = 2*(K + memory).

    Returns
    -------
    info_app : (K, 2) array
        Posterior probabilities of each information bit.
    coded_ext : (N, 2) array
        Extrinsic coded-bit messages: the a-posteriori message with the
        input message at that position divided out.
    """
    msgs = _checked_messages(coded_msgs)
    n = msgs.shape[0]
    if n % 2 != 0:
        raise ValueError(f"coded length {n} is not even")
    t_steps = n // 2
    k = t_steps - trellis.memory
    if k < 1:
        raise ValueError(f"coded length {n} too short for memory {trellis.memory}")

    with np.errstate(divide="ignore"):
        lm = np.log(msgs)
    lm = np.maximum(lm, LOG_FLOOR)
    info_log, ext_log = _bcjr_log_kernel(
        np.ascontiguousarray(lm[0::2]),
        np.ascontiguousarray(lm[1::2]),
        trellis.out_bits[:, :, 0],
        trellis.out_bits[:, :, 1],
        trellis.next_state,
        k,
    )
    info_app = np.exp(info_log)
    info_app /= info_app.sum(axis=1)[:, None]
    coded_ext = np.exp(ext_log)
    coded_ext /= coded_ext.sum(axis=1)[:, None]
    return info_app, coded_ext


def cc_bcjr_prob(
    coded_msgs: np.ndarray, trellis: TrellisSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Probability-domain reference of :func:`cc_bcjr` (per-step sum
    normalization). Kept for cross-checking the log-domain path."""
    msgs = _checked_messages(coded_msgs)
    n = msgs.shape[0]
    t_steps = n // 2
    k = t_steps - trellis.memory
    S = trellis.state_count
    nxt = trellis.next_state
    o1 = trellis.out_bits[:, :, 0]
    o2 = trellis.out_bits[:, :, 1]

    gam = np.empty((t_steps, S, 2))
    for t in range(t_steps):
        gam[t] = msgs[2 * t][o1] * msgs[2 * t + 1][o2]
        if t >= k:
            gam[t, :, 1] = 0.0

    alpha = np.zeros((t_steps + 1, S))
    alpha[0, 0] = 1.0
    for t in range(t_steps):
        nx = np.zeros(S)
        for b in (0, 1):
            np.add.at(nx, nxt[:, b], alpha[t] * gam[t, :, b])
        tot = nx.sum()
        if tot == 0:
            raise DecodeError("all trellis paths have zero probability")
        alpha[t + 1] = nx / tot

    beta = np.zeros((t_steps + 1, S))
    beta[t_steps, 0] = 1.0
    for t in range(t_steps - 1, -1, -1):
        beta[t] = (
            gam[t, :, 0] * beta[t + 1][nxt[:, 0]]
            + gam[t, :, 1] * beta[t + 1][nxt[:, 1]]
        )
        tot = beta[t].sum()
        if tot == 0:
            raise DecodeError("all trellis paths have zero probability")
        beta[t] /= tot

    info_app = np.empty((k, 2))
    for t in range(k):
        for b in (0, 1):
            info_app[t, b] = np.sum(alpha[t] * gam[t, :, b] * beta[t + 1][nxt[:, b]])
    info_app /= info_app.sum(axis=1)[:, None]

    coded_ext = np.zeros((n, 2))
    for t in range(t_steps):
        nb = 1 if t >= k else 2
        for b in range(nb):
            base = alpha[t] * beta[t + 1][nxt[:, b]]
            v1 = base * msgs[2 * t + 1][o2[:, b]]
            v2 = base * msgs[2 * t][o1[:, b]]
            for s in range(S):
                coded_ext[2 * t, o1[s, b]] += v1[s]
                coded_ext[2 * t + 1, o2[s, b]] += v2[s]
    sums = coded_ext.sum(axis=1)
    if np.any(sums <= 0):
        raise DecodeError("extrinsic message degenerated to zero mass")
    coded_ext /= sums[:, None]
    return info_app, coded_ext
