"""Simulator and verification suite for multitime two-way channel protocols.

Exact state-vector simulation of protocols that trickle quantum amplitude
back and forth through a channel over many rounds, with per-transit Cost
accounting, Gram-matrix bookkeeping, asymptotic formulas, and the Cost
trade-off bound |dG01(A)| <= sqrt(Q0 Q1).
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .ledger import (
    BoundCheck,
    BoundReport,
    ChannelUse,
    Direction,
    GramReport,
    PassivityViolation,
    RunLedger,
    channel_gram,
    check_passivity,
    delta_gram_prediction,
    gram_blocks,
    record_use,
    round_increments,
    total_costs,
    verify_tradeoff_bound,
)
from .protocols import (
    PairOutcome,
    ProtocolConfig,
    ProtocolKind,
    RunOutcome,
    Schedule,
    run,
    run_one_way,
    run_pair,
    run_polarization,
    run_random_bob_pair,
    run_simple,
    run_slaz,
    slaz_regime_ok,
)
from .analysis import (
    SweepRecord,
    run_sweep,
    slaz_absorption_profile,
    slaz_cost_formula,
    slaz_overlap_formula,
    slaz_ratio_formula,
    zeno_approx_error,
)
from .states import (
    ATOL,
    BlockUnitary,
    InvariantViolation,
    Partition,
    StateVector,
    apply_block_unitary,
    apply_phase,
    apply_rotation,
    apply_swap,
    block_weight,
    inner_product,
    make_state,
    random_unitary,
)

__version__ = "0.1.0"
