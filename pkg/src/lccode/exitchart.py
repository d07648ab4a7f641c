"""Extrinsic-information transfer analysis and coefficient search.

A-priori knowledge is modeled by consistent Gaussian log-likelihood
ratios: for a bit b, L ~ N((2b-1) sigma^2/2, sigma^2). J(sigma) is the
mutual information carried by such an LLR; it is tabulated once from
Gauss-Hermite quadrature and interpolated monotonically, with the inverse
taken on the swapped table.

The parity code's transfer curve depends on channel SNR (it sees the
channel directly); the convolutional curve does not (it sees only its
input messages). Coefficient pairs are ranked by the product
T(1) * T(0), the two endpoints the area constraint trades off.

LLR orientation in this module: L = ln(p1 / p0), so +L favors bit 1.
"""

from __future__ import annotations

import concurrent.futures as _futures
from dataclasses import dataclass, field as _dcfield

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import expit

from .convcode import TrellisSpec, cc_bcjr, cc_encode
from .gf import GF2q
from .lc import (
    LcConfig,
    branch_symbol_likelihoods,
    checknode_messages,
    lc_encode_groups,
    pack_groups,
    unpack_groups,
)
from .txchain import plan_energy

_LN2 = np.log(2.0)
_SIGMA_MAX = 15.0

DEFAULT_IA_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 1.0)


@dataclass
class ExitCurve:
    """Measured transfer points (i_a, i_e) with their generation context."""

    points: list[tuple[float, float]]
    context: dict
    samples_per_point: int

    def __post_init__(self):
        ia = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(ia, ia[1:])):
            raise ValueError("i_a grid must be strictly increasing")
        if any(not 0.0 <= p[1] <= 1.0 for p in self.points):
            raise ValueError("i_e values must lie in [0, 1]")

    def ia(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    def ie(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def area(self) -> float:
        return float(np.trapezoid(self.ie(), self.ia()))

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("ia,ie\n")
            for a, e in self.points:
                fh.write(f"{a!r},{e!r}\n")


@dataclass
class CoeffSearchResult:
    """Exhaustive objective table over all nonzero coefficient pairs."""

    best_h: tuple[int, int]
    objective: float
    table: list[tuple[int, int, float, float, float]]  # (h1, h2, t0, t1, obj)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("h1,h2,t0,t1,objective\n")
            for h1, h2, t0, t1, obj in self.table:
                fh.write(f"{h1},{h2},{t0!r},{t1!r},{obj!r}\n")


# -- consistent-Gaussian mutual information --------------------------------

_J_TABLES: dict[str, object] = {}


def _mi_of_sigma(sigma: np.ndarray) -> np.ndarray:
    """Gauss-Hermite evaluation of 1 - E[log2(1 + exp(-L))], L consistent."""
    nodes, weights = np.polynomial.hermite.hermgauss(127)
    sigma = np.atleast_1d(np.asarray(sigma, dtype=np.float64))
    ll = sigma[:, None] ** 2 / 2.0 + np.sqrt(2.0) * sigma[:, None] * nodes[None, :]
    vals = np.logaddexp(0.0, -ll) / _LN2
    return 1.0 - (vals @ weights) / np.sqrt(np.pi)


def _j_tables():
    if not _J_TABLES:
        grid = np.unique(np.concatenate([
            np.linspace(0.0, 1.0, 41),
            np.linspace(1.0, 5.0, 161),
            np.linspace(5.0, _SIGMA_MAX, 101),
        ]))
        j = _mi_of_sigma(grid)
        j[0] = 0.0
        # Strictly increasing values are required for the inverse table.
        j = np.maximum.accumulate(j)
        keep = np.concatenate([[True], np.diff(j) > 0])
        grid, j = grid[keep], j[keep]
        _J_TABLES["fwd"] = PchipInterpolator(grid, j)
        _J_TABLES["inv"] = PchipInterpolator(j, grid)
        _J_TABLES["jmax"] = float(j[-1])
    return _J_TABLES


def j_function(sigma):
    """Mutual information of a consistent Gaussian LLR with std ``sigma``."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma < 0):
        raise ValueError("sigma must be >= 0")
    tab = _j_tables()
    out = tab["fwd"](np.minimum(sigma, _SIGMA_MAX))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def j_inverse(i):
    """Inverse of :func:`j_function`; defined on [0, 1)."""
    i = np.asarray(i, dtype=np.float64)
    if np.any(i < 0) or np.any(i >= 1.0):
        raise ValueError("mutual information must lie in [0, 1)")
    tab = _j_tables()
    out = tab["inv"](np.minimum(i, tab["jmax"]))
    out = np.clip(out, 0.0, _SIGMA_MAX)
    return float(out) if out.ndim == 0 else out


def measure_mi(llrs: np.ndarray, bits: np.ndarray) -> float:
    """Time-average MI estimate between LLRs (ln p1/p0) and known bits."""
    llrs = np.asarray(llrs, dtype=np.float64).ravel()
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if llrs.size == 0:
        raise ValueError("empty LLR sequence")
    if llrs.size != bits.size:
        raise ValueError("llrs and bits must have equal length")
    signed = (2.0 * bits - 1.0) * llrs
    i = 1.0 - float(np.mean(np.logaddexp(0.0, -signed))) / _LN2
    return float(np.clip(i, 0.0, 1.0))


def synth_priors(bits: np.ndarray, ia: float, rng: np.random.Generator) -> np.ndarray:
    """Consistent-Gaussian a-priori probability pairs at level ``ia``.

    ``ia == 1`` yields hard correct priors; ``ia == 0`` yields uniform ones.
    """
    bits = np.asarray(bits, dtype=np.int64).ravel()
    n = bits.size
    if ia >= 1.0:
        out = np.zeros((n, 2))
        out[np.arange(n), bits] = 1.0
        return out
    sigma = j_inverse(ia)
    if sigma == 0.0:
        return np.full((n, 2), 0.5)
    llr = rng.normal((2.0 * bits - 1.0) * sigma**2 / 2.0, sigma)
    p1 = expit(llr)
    return np.stack([expit(-llr), p1], axis=1)


def _llr_of_pairs(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(p[..., 1]) - np.log(p[..., 0])


# -- transfer curves ---------------------------------------------------------

def lc_transfer(
    q: int,
    h: tuple[int, int],
    lambda_db: float,
    snr_db: float,
    ia_grid=DEFAULT_IA_GRID,
    n_symbols: int = 20000,
    seed: int = 0,
    field: GF2q | None = None,
) -> ExitCurve:
    """Transfer curve of the parity code at a given channel SNR.

    ``snr_db`` is the average symbol SNR (es_bar / N0 in dB, es_bar = 1);
    ``n_symbols`` counts bits per coded branch and must be a multiple
    of q. Each grid point uses freshly drawn frames, priors and noise,
    all derived deterministically from ``seed``.
    """
    fld = field if field is not None else GF2q(q)
    if fld.q != q:
        raise ValueError("field order does not match q")
    cfg = LcConfig(fld, (int(h[0]), int(h[1])))
    if n_symbols % q != 0:
        raise ValueError(f"n_symbols={n_symbols} not divisible by q={q}")
    L = n_symbols // q
    plan = plan_energy(lambda_db, 1.0)
    n0 = 10.0 ** (-snr_db / 10.0)

    points = []
    for pt, ia in enumerate(ia_grid):
        rng = np.random.default_rng(np.random.SeedSequence([seed, pt]))
        bits1 = rng.integers(0, 2, size=n_symbols)
        bits2 = rng.integers(0, 2, size=n_symbols)
        v1 = pack_groups(bits1, fld)
        v2 = pack_groups(bits2, fld)
        bits3 = unpack_groups(lc_encode_groups(v1, v2, cfg), fld)

        def received(bits, amp):
            s = amp * (2.0 * bits.reshape(L, q) - 1.0)
            return s + rng.normal(0.0, np.sqrt(n0 / 2.0), size=s.shape)

        py1 = branch_symbol_likelihoods(received(bits1, plan.amp_cc),
                                        plan.amp_cc, n0, fld)
        py2 = branch_symbol_likelihoods(received(bits2, plan.amp_cc),
                                        plan.amp_cc, n0, fld)
        py3 = branch_symbol_likelihoods(received(bits3, plan.amp_lc),
                                        plan.amp_lc, n0, fld)
        pa1 = synth_priors(bits1, ia, rng).reshape(L, q, 2)
        pa2 = synth_priors(bits2, ia, rng).reshape(L, q, 2)

        g1, g2 = checknode_messages(py1, py2, py3, pa1, pa2, cfg)
        llrs = np.concatenate([
            _llr_of_pairs(g1.reshape(-1, 2)),
            _llr_of_pairs(g2.reshape(-1, 2)),
        ])
        ie = measure_mi(llrs, np.concatenate([bits1, bits2]))
        points.append((float(ia), ie))

    return ExitCurve(
        points=points,
        context={"q": q, "h": tuple(cfg.h), "lambda_db": lambda_db,
                 "snr_db": snr_db, "seed": seed},
        samples_per_point=2 * n_symbols,
    )


def cc_transfer(
    trellis: TrellisSpec,
    ia_grid=DEFAULT_IA_GRID,
    n_bits: int = 100000,
    seed: int = 0,
) -> ExitCurve:
    """Transfer curve of the trellis decoder driven by coded-bit priors
    only. SNR-independent because no channel term enters."""
    k = n_bits // 2 - trellis.memory
    if k < 1:
        raise ValueError(f"n_bits={n_bits} too small")
    points = []
    for pt, ia in enumerate(ia_grid):
        rng = np.random.default_rng(np.random.SeedSequence([seed, pt]))
        info = rng.integers(0, 2, size=k)
        coded = cc_encode(info, trellis)
        priors = synth_priors(coded, ia, rng)
        _, ext = cc_bcjr(priors, trellis)
        ie = measure_mi(_llr_of_pairs(ext), coded)
        points.append((float(ia), ie))
    return ExitCurve(
        points=points,
        context={"trellis": repr(trellis), "seed": seed},
        samples_per_point=n_bits,
    )


def search_coefficients(
    q: int,
    lambda_db: float,
    snr_db: float,
    n_symbols: int = 20000,
    seed: int = 0,
    threads: int = 1,
    field: GF2q | None = None,
) -> CoeffSearchResult:
    """Exhaustive search over all (2^q - 1)^2 nonzero coefficient pairs,
    maximizing T(1) * T(0). Deterministic given ``seed``; evaluations are
    independent tasks merged by pair index."""
    if q > 5:
        raise ValueError("exhaustive search supported for q <= 5")
    fld = field if field is not None else GF2q(q)
    nz = fld.nonzero_indices()
    pairs = [(h1, h2) for h1 in nz for h2 in nz]
    pair_seeds = np.random.SeedSequence(seed).generate_state(len(pairs))

    def evaluate(idx):
        h1, h2 = pairs[idx]
        curve = lc_transfer(
            q, (h1, h2), lambda_db, snr_db, ia_grid=(0.0, 1.0),
            n_symbols=n_symbols, seed=int(pair_seeds[idx]), field=fld,
        )
        t0, t1 = curve.ie()
        return h1, h2, float(t0), float(t1), float(t0 * t1)

    if threads > 1:
        with _futures.ThreadPoolExecutor(max_workers=threads) as pool:
            table = list(pool.map(evaluate, range(len(pairs))))
    else:
        table = [evaluate(i) for i in range(len(pairs))]

    best = max(table, key=lambda row: row[4])
    return CoeffSearchResult(best_h=(best[0], best[1]), objective=best[4],
                             table=table)
