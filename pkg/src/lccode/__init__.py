"""Short-block channel code built from two terminated convolutional codes
coupled by a GF(2^q) linear-combination parity code with unequal energy
allocation, plus its iterative decoder, EXIT analysis and BER harness."""

__version__ = "0.1.0"

from .convcode import TrellisSpec, cc_bcjr, cc_encode
from .errors import DecodeError
from .gf import GF2q, GFElement, gf_add, gf_mul
from .interleave import Interleaver, gen_spread
from .iterdec import DecodeResult, DecoderConfig, decode, hard_decision
from .lc import LcConfig, LcGroupEvidence, lc_checknode_update, lc_encode
from .sim import BerRecord, SimConfig, derive_block_sizes, run_ber_point, run_sweep
from .txchain import EnergyPlan, awgn, modulate, plan_energy

__all__ = [
    "BerRecord",
    "DecodeError",
    "DecodeResult",
    "DecoderConfig",
    "EnergyPlan",
    "GF2q",
    "GFElement",
    "Interleaver",
    "LcConfig",
    "LcGroupEvidence",
    "SimConfig",
    "TrellisSpec",
    "awgn",
    "cc_bcjr",
    "cc_encode",
    "decode",
    "derive_block_sizes",
    "gen_spread",
    "gf_add",
    "gf_mul",
    "hard_decision",
    "lc_checknode_update",
    "lc_encode",
    "modulate",
    "plan_energy",
    "run_ber_point",
    "run_sweep",
]
