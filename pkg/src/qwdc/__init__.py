"""Quantum-walk direct communication: simulation, attacks and security analysis."""
from ._accel import get_backend, set_backend
from .walk import (
    CoinParams,
    WalkState,
    basis_state,
    encode_symbol,
    evolve,
    make_coin,
    make_shift,
    make_step,
    make_translation,
    measure,
    position_distribution,
)
from .protocol import Message, ProtocolConfig, chunk_message, run_cqd, run_qsdc, unchunk
from .lm05 import run_lm05
from .analysis import (
    JointTable,
    MiResult,
    ParameterSpace,
    detection_rate,
    joint_dist_ir1,
    joint_dist_ir2,
    lm05_mutual_information,
    marginal,
    mutual_information,
    sweep,
)

__version__ = "0.1.0"
