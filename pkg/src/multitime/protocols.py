"""Two-party channel protocols as pure functions from configuration to outcome.

Each run produces the final state, a complete transit ledger, and
diagnostics.  Two structural rules are common to every protocol here:

* Alice's operations never depend on the bit being transmitted; only
  Bob's do.  The small protocols log Alice's operation stream so a run
  pair can be checked for bit-independence; the hierarchical kernels
  share one Alice stream by construction.
* The transit schedule is fixed per configuration, with zero-amplitude
  uses recorded where a run sends nothing, so the ledgers of a run pair
  align round for round.

Protocols: ``oneway`` (sender splits one unit of amplitude over rounds),
``simple`` (phase-encoded two-way exchange, total Cost 1), ``polarization``
(two-dimensional channel, total Cost 2), and ``slaz`` (hierarchical
reflect-or-absorb protocol with outer and inner rounds).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from ._compsum import abs2_sum, compensated_complex_sum, fsum
from ._kernels import _slaz_py
from .ledger import (
    ChannelUse,
    Direction,
    GramReport,
    BoundReport,
    RunLedger,
    delta_gram_prediction,
    gram_blocks,
    total_costs,
    verify_tradeoff_bound,
)
from .states import (
    ATOL,
    InvariantViolation,
    Partition,
    StateVector,
    make_state,
    random_unitary,
    _matrix_inplace,
    _rotate_inplace,
    _swap_inplace,
)


class ProtocolKind(str, enum.Enum):
    ONE_WAY = "oneway"
    SIMPLE = "simple"
    POLARIZATION = "polarization"
    SLAZ = "slaz"


#: Declared schedule totals: a one-way run moves the full unit of weight,
#: a two-way run moves half (the other half stays with Alice).
ONE_WAY_TOTAL = 1.0
TWO_WAY_TOTAL = 0.5


@dataclass(frozen=True)
class Schedule:
    """Positive per-round weight increments with a declared total."""

    eps: tuple[float, ...]
    total: float

    def __init__(self, eps: Iterable[float], total: float):
        eps = tuple(float(e) for e in eps)
        if not eps:
            raise ValueError("schedule must have at least one round")
        for k, e in enumerate(eps):
            if not e > 0.0:
                raise ValueError(f"schedule entry {k} is {e}; every increment must be > 0")
        if total not in (ONE_WAY_TOTAL, TWO_WAY_TOTAL):
            raise ValueError(f"schedule total must be {ONE_WAY_TOTAL} or {TWO_WAY_TOTAL}")
        s = fsum(eps)
        if abs(s - total) > 1e-9:
            raise ValueError(f"schedule sum {s!r} != required total {total}")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "total", total)

    @classmethod
    def uniform(cls, rounds: int, total: float) -> "Schedule":
        if rounds < 1:
            raise ValueError("rounds must be >= 1")
        return cls((total / rounds,) * rounds, total)

    @property
    def rounds(self) -> int:
        return len(self.eps)


def slaz_regime_ok(outer: int, inner: int) -> bool:
    """Whether (M, N) sits in the regime where the asymptotic formulas apply.

    Operationalized as M >= 4 and 4*M <= N.  Outside it the protocol still
    runs exactly; only the closed-form approximations degrade.
    """
    return outer >= 4 and 4 * outer <= inner


@dataclass
class ProtocolConfig:
    """Protocol selector plus parameters; ``validate`` returns warnings."""

    kind: ProtocolKind
    bit: int | None = None
    rounds: int = 1
    outer: int = 1
    schedule: Schedule | None = None
    record_trace: bool = False

    def validate(self) -> list[str]:
        if self.bit not in (None, 0, 1):
            raise ValueError(f"bit must be 0 or 1, got {self.bit}")
        if self.rounds < 1 or self.outer < 1:
            raise ValueError("round counts must be >= 1")
        if self.schedule is not None:
            if self.kind not in (ProtocolKind.ONE_WAY, ProtocolKind.SIMPLE):
                raise ValueError(f"protocol {self.kind.value} does not take a schedule")
            want = ONE_WAY_TOTAL if self.kind is ProtocolKind.ONE_WAY else TWO_WAY_TOTAL
            if self.schedule.total != want:
                raise ValueError(
                    f"schedule total {self.schedule.total} does not match protocol "
                    f"{self.kind.value} (requires {want})"
                )
        warnings = []
        if self.kind is ProtocolKind.SLAZ and not slaz_regime_ok(self.outer, self.rounds):
            warnings.append(
                f"outside asymptotic regime: need outer >= 4 and 4*outer <= inner, "
                f"got outer={self.outer}, inner={self.rounds}; closed-form "
                "approximations may be poor"
            )
        return warnings

    def resolved_schedule(self) -> Schedule | None:
        if self.kind is ProtocolKind.ONE_WAY:
            return self.schedule or Schedule.uniform(self.rounds, ONE_WAY_TOTAL)
        if self.kind is ProtocolKind.SIMPLE:
            return self.schedule or Schedule.uniform(self.rounds, TWO_WAY_TOTAL)
        return None


@dataclass
class RunOutcome:
    """Result of one protocol run.

    ``a_history`` (small protocols only) holds the Alice-block amplitudes
    at every round boundary; ``alice_ops`` the logged Alice operation
    stream.  Both exist so a run pair can be cross-checked.
    """

    final_state: StateVector
    ledger: RunLedger
    diagnostics: dict[str, float]
    trace: list[tuple[str, StateVector]] | None = None
    warnings: list[str] = field(default_factory=list)
    initial_state: StateVector | None = None
    a_history: list[np.ndarray] | None = None
    alice_ops: list[tuple] | None = None
    alice_labels: frozenset[str] = frozenset({"A"})


@dataclass
class PairOutcome:
    """A bit-0 and bit-1 run with identical Alice operations, plus the
    Gram report, both routes to dG01(A), and the bound report."""

    run0: RunOutcome
    run1: RunOutcome
    gram: GramReport
    bound: BoundReport
    delta_g01_states: complex
    delta_g01_ledger: complex
    g01_rounds: np.ndarray | None = None


def _check_bit(bit: int) -> int:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return bit


class _Runner:
    """Sequential executor for the small (non-hierarchical) protocols.

    Owns its amplitude buffer; Alice operations are logged, Bob operations
    are not.  Snapshots of the Alice blocks are taken at round boundaries.
    """

    def __init__(self, partition: Partition, run_label: int, alice_labels,
                 channel_label: str = "C", trace: bool = False):
        self.partition = partition
        self.amps = np.zeros(partition.total_dim, dtype=np.complex128)
        self.channel = partition.block_slice(channel_label)
        self.alice_labels = frozenset(alice_labels)
        slices = [partition.block_slice(l) for l in partition.labels if l in self.alice_labels]
        self._a_index = np.concatenate([np.arange(s.start, s.stop) for s in slices])
        self.ledger = RunLedger(run_label, channel_dim=partition.dim(channel_label))
        self.alice_ops: list[tuple] = []
        self.a_history: list[np.ndarray] = []
        self.trace: list[tuple[str, StateVector]] | None = [] if trace else None
        self.initial_state: StateVector | None = None

    def set_initial(self, entries: Sequence[tuple[int, complex]]) -> None:
        for slot, value in entries:
            self.amps[slot] = value
        self.initial_state = StateVector(self.partition, self.amps.copy())
        self._snapshot("initial")

    def _snapshot(self, tag: str) -> None:
        self.a_history.append(self.amps[self._a_index].copy())
        if self.trace is not None:
            self.trace.append((tag, StateVector(self.partition, self.amps.copy())))

    def end_round(self, n: int) -> None:
        self._snapshot(f"round {n}")

    def alice_rotate(self, i: int, j: int, theta: float) -> None:
        self.alice_ops.append(("rot", i, j, theta))
        _rotate_inplace(self.amps, i, j, math.cos(theta), math.sin(theta))

    def alice_swap(self, i: int, j: int) -> None:
        self.alice_ops.append(("swap", i, j))
        _swap_inplace(self.amps, i, j)

    def bob_rotate(self, i: int, j: int, theta: float) -> None:
        _rotate_inplace(self.amps, i, j, math.cos(theta), math.sin(theta))

    def bob_phase(self, slot: int, phase: complex) -> None:
        self.amps[slot] *= phase

    def bob_matrix(self, slots: Sequence[int], matrix: np.ndarray) -> None:
        _matrix_inplace(self.amps, slots, matrix)

    def record(self, direction: Direction, outer: int, inner: int) -> None:
        self.ledger.append(
            ChannelUse(direction, outer, inner, tuple(self.amps[self.channel]))
        )

    def finish(self, diagnostics: dict[str, float], warnings: list[str] | None = None) -> RunOutcome:
        stray = float(np.abs(self.amps[self.channel]).max())
        if stray > ATOL:
            raise InvariantViolation(f"channel not empty at end of run: |c| = {stray:.3e}")
        norm = abs2_sum(self.amps)
        if abs(norm - 1.0) > ATOL:
            raise InvariantViolation(f"final squared norm {norm!r} deviates from 1")
        return RunOutcome(
            final_state=StateVector(self.partition, self.amps.copy()),
            ledger=self.ledger,
            diagnostics=diagnostics,
            trace=self.trace,
            warnings=list(warnings or []),
            initial_state=self.initial_state,
            a_history=self.a_history,
            alice_ops=self.alice_ops,
            alice_labels=self.alice_labels,
        )


# ---------------------------------------------------------------------------
# one-way transmission

def run_one_way(schedule: Schedule, bit: int, *, record_trace: bool = False) -> RunOutcome:
    """Bob splits one unit of amplitude over the schedule, phase-encoding
    the bit; Alice banks each arrival in a fresh slot.  Total Cost 1,
    all transits Bob-to-Alice."""
    _check_bit(bit)
    if schedule.total != ONE_WAY_TOTAL:
        raise ValueError("one-way transmission needs a schedule with total 1")
    n_rounds = schedule.rounds
    partition = Partition([("A", n_rounds), ("C", 1), ("B", 1)])
    c = partition.slot("C")
    b = partition.slot("B")
    runner = _Runner(partition, bit, {"A"}, trace=record_trace)
    runner.set_initial([(b, 1.0)])
    remaining = 1.0
    for n, eps in enumerate(schedule.eps, start=1):
        left = max(remaining - eps, 0.0)
        runner.bob_rotate(b, c, math.atan2(math.sqrt(eps), math.sqrt(left)))
        if bit:
            runner.bob_phase(c, -1.0)
        runner.record(Direction.BOB_TO_ALICE, 1, n)
        runner.alice_swap(c, partition.slot("A", n - 1))
        runner.end_round(n)
        remaining = left
    return runner.finish({})


# ---------------------------------------------------------------------------
# simple two-way exchange (phase encoding, Cost 1)

def run_simple(bit: int, schedule: Schedule | None = None, *, rounds: int = 1,
               record_trace: bool = False) -> RunOutcome:
    """Alice trickles weight into the channel, Bob phase-flips it (or not),
    Alice accumulates coherently.  Ends in (sqrt(1/2), +-sqrt(1/2); 0) with
    total Cost exactly 1 for either bit and any valid schedule."""
    _check_bit(bit)
    if schedule is None:
        schedule = Schedule.uniform(rounds, TWO_WAY_TOTAL)
    elif schedule.total != TWO_WAY_TOTAL:
        raise ValueError("two-way exchange needs a schedule with total 1/2")
    partition = Partition([("A", 2), ("C", 1)])
    a1 = partition.slot("A", 0)
    a2 = partition.slot("A", 1)
    c = partition.slot("C")
    runner = _Runner(partition, bit, {"A"}, trace=record_trace)
    runner.set_initial([(a1, 1.0)])
    used = 0.0
    for n, eps in enumerate(schedule.eps, start=1):
        used_after = used + eps
        runner.alice_rotate(a1, c, math.atan2(math.sqrt(eps), math.sqrt(max(1.0 - used_after, 0.0))))
        runner.record(Direction.ALICE_TO_BOB, 1, n)
        runner.bob_phase(c, -1.0 if bit else 1.0)
        runner.record(Direction.BOB_TO_ALICE, 1, n)
        # bit-independent accumulator: maps (+-sqrt(used), +-sqrt(eps))
        # to (+-sqrt(used + eps), 0) for both signs at once
        runner.alice_rotate(a2, c, -math.atan2(math.sqrt(eps), math.sqrt(used)))
        runner.end_round(n)
        used = used_after
    return runner.finish({})


# ---------------------------------------------------------------------------
# polarization variant (two-dimensional channel, Cost 2)

def run_polarization(bit: int, *, record_trace: bool = False) -> RunOutcome:
    """Alice sends the whole photon as H; Bob returns H for bit 0 or
    rotates to V for bit 1.  Costs are 1 each way for either bit."""
    _check_bit(bit)
    partition = Partition([("A", 2), ("C", 2)])
    a_h, a_v = partition.slot("A", 0), partition.slot("A", 1)
    c_h, c_v = partition.slot("C", 0), partition.slot("C", 1)
    runner = _Runner(partition, bit, {"A"}, trace=record_trace)
    runner.set_initial([(a_h, 1.0)])
    runner.alice_swap(a_h, c_h)
    runner.alice_swap(a_v, c_v)
    runner.record(Direction.ALICE_TO_BOB, 1, 1)
    runner.bob_rotate(c_h, c_v, bit * (math.pi / 2))
    runner.record(Direction.BOB_TO_ALICE, 1, 1)
    runner.alice_swap(c_h, a_h)
    runner.alice_swap(c_v, a_v)
    runner.end_round(1)
    return runner.finish({})


# ---------------------------------------------------------------------------
# hierarchical reflect-or-absorb protocol

SLAZ_ALICE_LABELS = frozenset({"A1", "A2", "A3", "A4"})


def _slaz_partition(outer: int, inner: int) -> Partition:
    return Partition([
        ("A1", 1), ("A2", 1), ("A3", 1), ("A4", outer), ("C", 1), ("B", outer * inner),
    ])


def _slaz_ledger(bit: int, outer: int, inner: int, send: np.ndarray) -> RunLedger:
    m_n = outer * inner
    dirs = np.tile(np.array([0, 1], dtype=np.uint8), m_n)
    outer_col = np.repeat(np.arange(1, outer + 1, dtype=np.int64), 2 * inner)
    inner_col = np.tile(np.repeat(np.arange(1, inner + 1, dtype=np.int64), 2), outer)
    amps = np.zeros(2 * m_n, dtype=np.complex128)
    amps[0::2] = send
    if bit == 0:
        amps[1::2] = send  # reflected back unchanged
    return RunLedger.from_arrays(bit, dirs, outer_col, inner_col, amps.reshape(-1, 1))


def _slaz_state(partition: Partition, bit: int, a_part: np.ndarray,
                send: np.ndarray, n_rounds_filled: int) -> StateVector:
    amps = np.zeros(partition.total_dim, dtype=np.complex128)
    n_a = len(a_part)
    amps[:n_a] = a_part
    if bit == 1 and n_rounds_filled:
        b = partition.block_slice("B")
        amps[b.start:b.start + n_rounds_filled] = send[:n_rounds_filled]
    return StateVector(partition, amps)


def run_slaz(bit: int, outer_rounds: int, inner_rounds: int, *,
             record_trace: bool = False) -> RunOutcome:
    """Hierarchical protocol: per outer round, a small rotation feeds the
    exchange register, then ``inner_rounds`` trips send a sliver through
    the channel which Bob reflects (bit 0) or absorbs into a fresh slot
    of his block (bit 1); each outer round ends by banking the exchange
    register in a fresh Alice slot.

    Diagnostics expose the final-state correction magnitudes: ``r1``/``r4``
    for bit 0, ``s1``/``s2``/``s_b`` for bit 1.
    """
    _check_bit(bit)
    if outer_rounds < 1 or inner_rounds < 1:
        raise ValueError("outer_rounds and inner_rounds must be >= 1")
    config = ProtocolConfig(ProtocolKind.SLAZ, bit=bit, rounds=inner_rounds, outer=outer_rounds)
    warnings = config.validate()
    m_n = outer_rounds * inner_rounds
    partition = _slaz_partition(outer_rounds, inner_rounds)

    if record_trace:
        # the snapshot hook exists only in the fallback kernel; results are
        # bit-identical across backends so mixing is safe
        snapshots: list[np.ndarray] = []
        a_part, send = _slaz_py.slaz_single(bit, outer_rounds, inner_rounds, snapshots)
    else:
        snapshots = []
        a_part, send = _kernels.slaz_single(bit, outer_rounds, inner_rounds)

    final = _slaz_state(partition, bit, a_part, send, m_n)
    stray = abs(final.amps[partition.slot("C")])
    if stray > ATOL:
        raise InvariantViolation(f"channel not empty at end of run: |c| = {stray:.3e}")
    norm = final.norm_sq()
    if abs(norm - 1.0) > ATOL:
        raise InvariantViolation(f"final squared norm {norm!r} deviates from 1")

    if bit == 0:
        diagnostics = {
            "r1": 1.0 - float(a_part[0]),
            "r4": math.sqrt(abs2_sum(a_part[3:])),
        }
    else:
        diagnostics = {
            "s1": float(a_part[0]),
            "s2": 1.0 - float(a_part[1]),
            "s_b": math.sqrt(abs2_sum(send)),
        }

    trace = None
    if record_trace:
        initial = make_state(partition, [(0, 1.0)])
        trace = [("initial", initial)]
        for m, snap in enumerate(snapshots, start=1):
            trace.append(
                (f"outer {m}", _slaz_state(partition, bit, snap, send, m * inner_rounds))
            )

    return RunOutcome(
        final_state=final,
        ledger=_slaz_ledger(bit, outer_rounds, inner_rounds, send),
        diagnostics=diagnostics,
        trace=trace,
        warnings=warnings,
        initial_state=make_state(partition, [(0, 1.0)]),
        alice_labels=SLAZ_ALICE_LABELS,
    )


# ---------------------------------------------------------------------------
# run pairs

def _pair_g01_from_histories(out0: RunOutcome, out1: RunOutcome) -> np.ndarray:
    h0, h1 = out0.a_history, out1.a_history
    if h0 is None or h1 is None or len(h0) != len(h1):
        raise InvariantViolation("run pair lacks aligned Alice-block histories")
    return np.array(
        [compensated_complex_sum(np.conj(a) * b) for a, b in zip(h0, h1)],
        dtype=np.complex128,
    )


def _assemble_pair(out0: RunOutcome, out1: RunOutcome,
                   g01_rounds: np.ndarray | None) -> PairOutcome:
    if out0.alice_ops is not None and out1.alice_ops is not None:
        if out0.alice_ops != out1.alice_ops:
            raise InvariantViolation("Alice operation streams differ between the two runs")
    gram = gram_blocks(out0.final_state, out1.final_state,
                       initial=(out0.initial_state, out1.initial_state))
    deltas = gram.delta_total(sorted(out0.alice_labels))
    d_states = complex(deltas[0, 1])
    d_ledger = delta_gram_prediction(out0.ledger, out1.ledger)
    k0, khat0, q0 = total_costs(out0.ledger)
    k1, khat1, q1 = total_costs(out1.ledger)
    bound = verify_tradeoff_bound(
        d_states, q0, q1, k0, k1, khat0, khat1,
        delta_g00=float(deltas[0, 0].real), delta_g11=float(deltas[1, 1].real),
    )
    return PairOutcome(out0, out1, gram, bound, d_states, d_ledger, g01_rounds)


def run_pair(config: ProtocolConfig, *, per_round: bool = False) -> PairOutcome:
    """Run both bits with identical Alice operations and align the results.

    With ``per_round`` the outcome also carries the Alice-side Gram overlap
    at every round boundary, to be checked against the ledger increments.
    """
    warnings = config.validate()
    kind = config.kind
    if kind is ProtocolKind.SLAZ:
        out0 = run_slaz(0, config.outer, config.rounds, record_trace=config.record_trace)
        out1 = run_slaz(1, config.outer, config.rounds, record_trace=config.record_trace)
        g01 = None
        if per_round:
            _, _, _, _, g01_raw = _kernels.slaz_pair(config.outer, config.rounds, True)
            g01 = g01_raw.astype(np.complex128)
        return _assemble_pair(out0, out1, g01)

    if kind is ProtocolKind.ONE_WAY:
        schedule = config.resolved_schedule()
        out0 = run_one_way(schedule, 0, record_trace=config.record_trace)
        out1 = run_one_way(schedule, 1, record_trace=config.record_trace)
    elif kind is ProtocolKind.SIMPLE:
        schedule = config.resolved_schedule()
        out0 = run_simple(0, schedule, record_trace=config.record_trace)
        out1 = run_simple(1, schedule, record_trace=config.record_trace)
    elif kind is ProtocolKind.POLARIZATION:
        out0 = run_polarization(0, record_trace=config.record_trace)
        out1 = run_polarization(1, record_trace=config.record_trace)
    else:
        raise ValueError(f"unknown protocol kind {kind!r}")
    out0.warnings.extend(warnings)
    out1.warnings.extend(warnings)
    g01 = _pair_g01_from_histories(out0, out1) if per_round else None
    return _assemble_pair(out0, out1, g01)


def run_random_bob_pair(rounds: int, seed: int, *, per_round: bool = True) -> PairOutcome:
    """A run pair where Bob applies seeded random unitaries on C+B.

    Bob's actions differ arbitrarily between the two runs and need not be
    passive; the trade-off bound and the per-round ledger identity hold
    for any such strategy, which is exactly what this pair exercises.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    partition = Partition([("A", rounds + 1), ("C", 1), ("B", 2)])
    c = partition.slot("C")
    bob_slots = (c, partition.slot("B", 0), partition.slot("B", 1))
    eps = 0.9 / rounds  # keep the source slot populated so emissions stay well-defined

    outcomes = []
    for bit in (0, 1):
        rng = np.random.default_rng([seed, bit])
        runner = _Runner(partition, bit, {"A"})
        src = partition.slot("A", 0)
        runner.set_initial([(src, 1.0)])
        remaining = 1.0
        for n in range(1, rounds + 1):
            left = remaining - eps
            runner.alice_rotate(src, c, math.atan2(math.sqrt(eps), math.sqrt(left)))
            runner.record(Direction.ALICE_TO_BOB, 1, n)
            runner.bob_matrix(bob_slots, random_unitary(3, rng))
            runner.record(Direction.BOB_TO_ALICE, 1, n)
            runner.alice_swap(c, partition.slot("A", n))
            runner.end_round(n)
            remaining = left
        outcomes.append(runner.finish({}))
    out0, out1 = outcomes
    g01 = _pair_g01_from_histories(out0, out1) if per_round else None
    return _assemble_pair(out0, out1, g01)


def run(config: ProtocolConfig) -> RunOutcome:
    """Dispatch a single configured run (CLI entry point)."""
    warnings = config.validate()
    if config.bit is None:
        raise ValueError("a single run needs bit 0 or 1 (use run_pair for both)")
    kind = config.kind
    if kind is ProtocolKind.ONE_WAY:
        out = run_one_way(config.resolved_schedule(), config.bit,
                          record_trace=config.record_trace)
    elif kind is ProtocolKind.SIMPLE:
        out = run_simple(config.bit, config.resolved_schedule(),
                         record_trace=config.record_trace)
    elif kind is ProtocolKind.POLARIZATION:
        out = run_polarization(config.bit, record_trace=config.record_trace)
    elif kind is ProtocolKind.SLAZ:
        return run_slaz(config.bit, config.outer, config.rounds,
                        record_trace=config.record_trace)
    else:
        raise ValueError(f"unknown protocol kind {kind!r}")
    out.warnings.extend(warnings)
    return out
