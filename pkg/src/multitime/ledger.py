"""Channel-usage ledgers, Costs, Gram matrices, and the trade-off bound.

Every protocol run records each channel transit (direction, round indices,
the amplitude vector that crossed).  From the ledger follow the Costs
K (Alice to Bob), K-hat (Bob to Alice) and their sum Q, the aligned
channel inner products of two runs, and the predicted change of the
Alice-side Gram overlap.  ``verify_tradeoff_bound`` checks the inequality
chain |dG01(A)| <= sqrt(K0 K1) + sqrt(K0^ K1^) <= sqrt(Q0 Q1).

Ledgers are stored columnar (direction / round indices / amplitudes as
arrays) so runs with ~1e6 transits stay cheap; ``uses()`` materializes
:class:`ChannelUse` records on demand.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from ._compsum import abs2_sum, compensated_complex_sum
from .states import ATOL, StateVector, _require_same_partition


class Direction(enum.IntEnum):
    ALICE_TO_BOB = 0
    BOB_TO_ALICE = 1


@dataclass(frozen=True)
class ChannelUse:
    """One channel transit: direction, (outer, inner) round, amplitudes sent."""

    direction: Direction
    outer_round: int
    inner_round: int
    amps: tuple[complex, ...]

    def __post_init__(self):
        if self.outer_round < 0 or self.inner_round < 0:
            raise ValueError("round indices must be nonnegative")
        object.__setattr__(self, "amps", tuple(complex(a) for a in self.amps))

    @property
    def cost(self) -> float:
        """Absolute square of the transported amplitude."""
        return math.fsum(a.real * a.real + a.imag * a.imag for a in self.amps)


class RunLedger:
    """Ordered record of every channel transit of one run."""

    def __init__(self, run_label: int = 0, channel_dim: int = 1):
        if channel_dim < 1:
            raise ValueError("channel_dim must be >= 1")
        self.run_label = run_label
        self.channel_dim = channel_dim
        self._frozen = None  # consolidated (dirs, outer, inner, amps)
        self._buf_dirs: list[int] = []
        self._buf_outer: list[int] = []
        self._buf_inner: list[int] = []
        self._buf_amps: list[complex] = []

    @classmethod
    def from_arrays(cls, run_label, directions, outer, inner, amps) -> "RunLedger":
        """Bulk constructor used by the protocol kernels.

        ``amps`` has shape (n_uses, channel_dim).
        """
        amps = np.asarray(amps, dtype=np.complex128)
        if amps.ndim != 2:
            raise ValueError("amps must be a 2-d array (n_uses, channel_dim)")
        n, channel_dim = amps.shape
        directions = np.asarray(directions, dtype=np.uint8)
        outer = np.asarray(outer, dtype=np.int64)
        inner = np.asarray(inner, dtype=np.int64)
        if not (len(directions) == len(outer) == len(inner) == n):
            raise ValueError("column length mismatch")
        ledger = cls(run_label, channel_dim)
        ledger._frozen = (directions, outer, inner, amps)
        return ledger

    def append(self, use: ChannelUse) -> None:
        if len(use.amps) != self.channel_dim:
            raise ValueError(
                f"use has {len(use.amps)} amplitude(s); ledger channel_dim is {self.channel_dim}"
            )
        self._buf_dirs.append(int(use.direction))
        self._buf_outer.append(use.outer_round)
        self._buf_inner.append(use.inner_round)
        self._buf_amps.extend(use.amps)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Consolidated (directions, outer, inner, amps) columns."""
        if self._buf_dirs:
            fresh = (
                np.asarray(self._buf_dirs, dtype=np.uint8),
                np.asarray(self._buf_outer, dtype=np.int64),
                np.asarray(self._buf_inner, dtype=np.int64),
                np.asarray(self._buf_amps, dtype=np.complex128).reshape(-1, self.channel_dim),
            )
            if self._frozen is None:
                self._frozen = fresh
            else:
                self._frozen = tuple(
                    np.concatenate([old, new]) for old, new in zip(self._frozen, fresh)
                )
            self._buf_dirs, self._buf_outer, self._buf_inner, self._buf_amps = [], [], [], []
        if self._frozen is None:
            self._frozen = (
                np.empty(0, dtype=np.uint8),
                np.empty(0, dtype=np.int64),
                np.empty(0, dtype=np.int64),
                np.empty((0, self.channel_dim), dtype=np.complex128),
            )
        return self._frozen

    def __len__(self) -> int:
        return len(self.arrays()[0])

    def uses(self) -> Iterator[ChannelUse]:
        dirs, outer, inner, amps = self.arrays()
        for k in range(len(dirs)):
            yield ChannelUse(Direction(dirs[k]), int(outer[k]), int(inner[k]), tuple(amps[k]))

    def costs(self) -> tuple[float, float, float]:
        dirs, _, _, amps = self.arrays()
        send = dirs == Direction.ALICE_TO_BOB
        k = abs2_sum(amps[send])
        khat = abs2_sum(amps[~send])
        return k, khat, k + khat


def record_use(ledger: RunLedger, use: ChannelUse) -> RunLedger:
    """Append one transit; zero-amplitude uses are allowed and cost 0."""
    ledger.append(use)
    return ledger


def total_costs(ledger: RunLedger) -> tuple[float, float, float]:
    """(K, K-hat, Q): Alice-to-Bob, Bob-to-Alice, and total Cost."""
    return ledger.costs()


def _aligned(l0: RunLedger, l1: RunLedger):
    if l0.channel_dim != l1.channel_dim:
        raise ValueError("misaligned transit sequences: channel dimensions differ")
    d0, o0, i0, a0 = l0.arrays()
    d1, o1, i1, a1 = l1.arrays()
    if len(d0) != len(d1) or not (
        np.array_equal(d0, d1) and np.array_equal(o0, o1) and np.array_equal(i0, i1)
    ):
        raise ValueError(
            "misaligned transit sequences: the two ledgers do not enumerate the same "
            "(direction, outer, inner) transit slots"
        )
    return d0, o0, i0, a0, a1


def channel_gram(l0: RunLedger, l1: RunLedger) -> tuple[complex, complex]:
    """Direction-resolved channel inner products (<C0|C1>, <C0^|C1^>).

    Requires both ledgers to enumerate the same transit schedule; protocols
    guarantee this by recording zero-amplitude uses where a run sends nothing.
    """
    dirs, _, _, a0, a1 = _aligned(l0, l1)
    prods = np.conj(a0) * a1
    send = dirs == Direction.ALICE_TO_BOB
    cc = compensated_complex_sum(prods[send])
    cchat = compensated_complex_sum(prods[~send])
    return cc, cchat


def delta_gram_prediction(l0: RunLedger, l1: RunLedger) -> complex:
    """Ledger-side prediction of the total change of G01(A):
    <C0^|C1^> - <C0|C1>."""
    cc, cchat = channel_gram(l0, l1)
    return cchat - cc


def round_increments(l0: RunLedger, l1: RunLedger) -> np.ndarray:
    """Per-round ledger increments of G01(A), one per (outer, inner) group.

    Returned in round order; each entry is the return-direction inner
    product minus the send-direction inner product of that round.
    """
    dirs, outer, inner, a0, a1 = _aligned(l0, l1)
    if len(dirs) == 0:
        return np.empty(0, dtype=np.complex128)
    prods = (np.conj(a0) * a1).sum(axis=1)
    signed = np.where(dirs == Direction.BOB_TO_ALICE, prods, -prods)
    key = outer * (inner.max() + 1) + inner
    starts = np.flatnonzero(np.diff(key)) + 1
    starts = np.concatenate([[0], starts])
    return np.add.reduceat(signed, starts)


class PassivityViolation(NamedTuple):
    outer_round: int
    inner_round: int
    sent_norm: float
    returned_norm: float


def check_passivity(ledger: RunLedger) -> list[PassivityViolation]:
    """Rounds where Bob returned more amplitude than he received.

    The ledger must pair up as one send then one return per round;
    anything else raises ValueError.
    """
    dirs, outer, inner, amps = ledger.arrays()
    n = len(dirs)
    if n % 2 != 0:
        raise ValueError("unpairable ledger: odd number of transits")
    norms = np.sqrt((amps.real ** 2 + amps.imag ** 2).sum(axis=1))
    violations = []
    for k in range(0, n, 2):
        send, ret = k, k + 1
        if (
            dirs[send] != Direction.ALICE_TO_BOB
            or dirs[ret] != Direction.BOB_TO_ALICE
            or outer[send] != outer[ret]
            or inner[send] != inner[ret]
        ):
            raise ValueError(
                f"unpairable ledger: transits {send},{ret} are not a (send, return) "
                "pair of the same round"
            )
        if norms[ret] > norms[send] + ATOL:
            violations.append(
                PassivityViolation(int(outer[send]), int(inner[send]), float(norms[send]), float(norms[ret]))
            )
    return violations


# ---------------------------------------------------------------------------
# Gram matrices of a pair of runs

@dataclass(frozen=True)
class GramReport:
    """Per-block 2x2 Gram matrices of two states, totals, optional deltas.

    Matrix element [mu][nu] is <psi_mu| P |psi_nu> for the given block
    projector P; totals sum the blocks (additivity is structural here).
    """

    blocks: dict[str, np.ndarray]
    totals: np.ndarray
    deltas: dict[str, np.ndarray] | None = None

    def block(self, label: str) -> np.ndarray:
        return self.blocks[label]

    def delta_total(self, labels) -> np.ndarray:
        """Sum of per-block deltas over the given labels (e.g. Alice's side)."""
        if self.deltas is None:
            raise ValueError("report carries no deltas (no initial states were supplied)")
        out = np.zeros((2, 2), dtype=np.complex128)
        for label in labels:
            out += self.deltas[label]
        return out


def _pair_blocks(s0: StateVector, s1: StateVector) -> dict[str, np.ndarray]:
    blocks = {}
    for label, _ in s0.partition.blocks:
        b0 = s0.block(label)
        b1 = s1.block(label)
        g = np.empty((2, 2), dtype=np.complex128)
        g[0, 0] = compensated_complex_sum(np.conj(b0) * b0)
        g[0, 1] = compensated_complex_sum(np.conj(b0) * b1)
        g[1, 0] = compensated_complex_sum(np.conj(b1) * b0)
        g[1, 1] = compensated_complex_sum(np.conj(b1) * b1)
        blocks[label] = g
    return blocks


def gram_blocks(
    s0: StateVector,
    s1: StateVector,
    initial: tuple[StateVector, StateVector] | None = None,
) -> GramReport:
    """Per-block Gram matrices for a run pair (mu=0, nu=1).

    With ``initial`` supplied, the report also carries per-block deltas
    (final minus initial), from which the Alice-side total change follows.
    """
    _require_same_partition(s0, s1)
    blocks = _pair_blocks(s0, s1)
    totals = np.zeros((2, 2), dtype=np.complex128)
    for g in blocks.values():
        totals += g
    deltas = None
    if initial is not None:
        init0, init1 = initial
        _require_same_partition(s0, init0)
        _require_same_partition(s0, init1)
        first = _pair_blocks(init0, init1)
        deltas = {label: blocks[label] - first[label] for label in blocks}
    return GramReport(blocks=blocks, totals=totals, deltas=deltas)


# ---------------------------------------------------------------------------
# trade-off bound

@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    tol: float = 1e-9

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tol


@dataclass(frozen=True)
class BoundReport:
    checks: tuple[BoundCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def named(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def min_slack(self) -> float:
        return min(c.slack for c in self.checks)


def verify_tradeoff_bound(
    delta_g: complex,
    q0: float,
    q1: float,
    k0: float,
    k1: float,
    khat0: float,
    khat1: float,
    delta_g00: float | None = None,
    delta_g11: float | None = None,
) -> BoundReport:
    """Check the Cost trade-off inequality chain for one run pair.

    * |dG01(A)| <= sqrt(K0 K1) + sqrt(K0^ K1^)  (overlap vs split costs)
    * sqrt(K0 K1) + sqrt(K0^ K1^) <= sqrt(Q0 Q1)
    * |dG01(A)| <= sqrt(Q0 Q1)
    * optionally dG_mumu(A) <= Q_mu for the diagonal weights
    * when |dG01| reaches 1 (a full protocol), the corollary Q0 Q1 >= 1

    Returns per-inequality pass/fail with slack values.
    """
    for name, value in (("Q0", q0), ("Q1", q1), ("K0", k0), ("K1", k1),
                        ("Khat0", khat0), ("Khat1", khat1)):
        if value < 0:
            raise ValueError(f"negative cost input {name} = {value}")
    overlap = abs(delta_g)
    split = math.sqrt(k0 * k1) + math.sqrt(khat0 * khat1)
    total = math.sqrt(q0 * q1)
    checks = [
        BoundCheck("overlap_vs_split", overlap, split),
        BoundCheck("split_vs_total", split, total),
        BoundCheck("overlap_vs_total", overlap, total),
    ]
    if delta_g00 is not None:
        checks.append(BoundCheck("diag_weight_0", delta_g00, q0))
    if delta_g11 is not None:
        checks.append(BoundCheck("diag_weight_1", delta_g11, q1))
    if overlap >= 1.0 - 1e-9:
        checks.append(BoundCheck("min_cost_product", 1.0, q0 * q1, tol=1e-8))
    return BoundReport(tuple(checks))
