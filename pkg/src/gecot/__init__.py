"""String oblivious transfer over simulated generalized erasure channels.

Subpackages by layer: ``channel`` (the erasure channel and its capacity),
``typicality`` (typical-sequence tests and candidate enumeration),
``subset_codec`` (subset rank/unrank and bit-string encoding), ``uhash``
(Toeplitz 2-universal hashing), ``interactive_hashing`` (the two-output
string commitment), ``protocol`` (the eight-step OT session), ``adversary``
(malicious strategies and measurements), ``harness`` (campaigns and CLI).
"""

from .channel import (
    ChannelStats,
    Dmc,
    GecSpec,
    InputDistribution,
    bsc,
    capacity_solve,
    channel_entropies,
    gec_from_json,
    gec_to_json,
    identity_dmc,
    load_gec,
    transmit,
    uniform_input,
    validate_gec,
)
from .protocol import ProtocolParams, SessionResult, derive_params, run_session

__version__ = "0.1.0"

__all__ = [
    "ChannelStats",
    "Dmc",
    "GecSpec",
    "InputDistribution",
    "ProtocolParams",
    "SessionResult",
    "bsc",
    "capacity_solve",
    "channel_entropies",
    "derive_params",
    "gec_from_json",
    "gec_to_json",
    "identity_dmc",
    "load_gec",
    "run_session",
    "transmit",
    "uniform_input",
    "validate_gec",
    "__version__",
]
