"""Spread (S-random) interleavers.

A spread-S permutation maps any two positions within distance S to outputs
at distance >= S, so the bits grouped into one parity symbol come from
well-separated trellis positions. Construction is the usual randomized
greedy draw with rejection and restart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SpreadConstructionError(RuntimeError):
    """Raised when no spread permutation is found within the restart budget."""

    def __init__(self, n: int, s: int, restarts: int):
        super().__init__(
            f"no spread-{s} permutation of length {n} found after {restarts} restarts"
        )
        self.restarts = restarts


@dataclass(frozen=True)
class Interleaver:
    """A fixed permutation with its spread factor and generating seed.

    ``perm`` is 0-based: position i of the input is placed at output
    position ``perm[i]``. Plain-text serialization is 1-based.
    """

    perm: np.ndarray = field(repr=False)
    spread: int
    seed: int

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        perm.setflags(write=False)
        object.__setattr__(self, "perm", perm)
        if not is_permutation(perm):
            raise ValueError("perm is not a permutation of 0..n-1")
        if not has_spread(perm, self.spread):
            raise ValueError(f"perm violates the spread-{self.spread} property")

    @property
    def n(self) -> int:
        return int(self.perm.size)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Interleave: out[perm[i]] = x[i]."""
        x = np.asarray(x)
        if x.shape[0] != self.n:
            raise ValueError(f"sequence length {x.shape[0]} != {self.n}")
        out = np.empty_like(x)
        out[self.perm] = x
        return out

    def invert(self, y: np.ndarray) -> np.ndarray:
        """De-interleave: out[i] = y[perm[i]]."""
        y = np.asarray(y)
        if y.shape[0] != self.n:
            raise ValueError(f"sequence length {y.shape[0]} != {self.n}")
        return y[self.perm]

    def to_text(self, path) -> None:
        """Write the permutation as 1-based indices, one per line."""
        with open(path, "w") as fh:
            for p in self.perm:
                fh.write(f"{int(p) + 1}\n")


def is_permutation(perm: np.ndarray) -> bool:
    seen = np.zeros(perm.size, dtype=bool)
    if perm.min(initial=0) < 0 or perm.max(initial=-1) >= perm.size:
        return False
    seen[perm] = True
    return bool(seen.all())


def has_spread(perm: np.ndarray, s: int) -> bool:
    """O(n*s) check: |i-j| <= s and i != j imply |perm[i]-perm[j]| >= s."""
    n = perm.size
    for d in range(1, s + 1):
        if d >= n:
            break
        if np.any(np.abs(perm[d:] - perm[:-d]) < s):
            return False
    return True


def gen_spread(n: int, s: int, seed: int, max_restarts: int = 1000) -> Interleaver:
    """Generate a spread-s permutation of length n, deterministic per seed.

    Greedy construction: positions are filled in order with a random
    unused value that keeps distance >= s from the values of the previous
    s positions. After n*100 rejected draws the attempt restarts from
    scratch; after ``max_restarts`` restarts construction fails.
    """
    if s < 1:
        raise ValueError(f"spread must be >= 1, got {s}")
    if n < s * s:
        raise ValueError(f"n={n} below feasibility heuristic n >= s^2 for s={s}")
    rng = np.random.default_rng(seed)
    fail_budget = n * 100
    for restart in range(max_restarts):
        perm = np.empty(n, dtype=np.int64)
        unused = list(range(n))
        fails = 0
        ok = True
        for i in range(n):
            lo = max(0, i - s)
            recent = perm[lo:i]
            order = rng.permutation(len(unused))
            placed = False
            for idx in order:
                v = unused[idx]
                if recent.size == 0 or np.abs(recent - v).min() >= s:
                    perm[i] = v
                    unused.pop(idx)
                    placed = True
                    break
                fails += 1
                if fails > fail_budget:
                    break
            if not placed or fails > fail_budget:
                ok = False
                break
        if ok:
            return Interleaver(perm=perm, spread=s, seed=seed)
    raise SpreadConstructionError(n, s, max_restarts)
