"""Closed-form asymptotics for the hierarchical protocol and sweep tooling.

The formulas here are the analytic counterparts of what the simulator
measures: per-bit total Costs, their ratio and product, the finite-sum
channel overlap, and the accuracy of the small-angle approximation that
underlies the whole construction.  ``run_sweep`` tabulates simulation
against formula over a parameter grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ledger import Direction, RunLedger, total_costs
from .protocols import ProtocolConfig, ProtocolKind, run_pair, slaz_regime_ok


def slaz_cost_formula(bit: int, outer: int, inner: int) -> float:
    """Asymptotic total Cost: (pi^2/8)(M/N) for bit 1, (pi^2/4)(N/M) for bit 0."""
    if outer < 1 or inner < 1:
        raise ValueError("outer and inner must be >= 1")
    if bit == 1:
        return (math.pi ** 2 / 8.0) * (outer / inner)
    if bit == 0:
        return (math.pi ** 2 / 4.0) * (inner / outer)
    raise ValueError(f"bit must be 0 or 1, got {bit!r}")


def slaz_ratio_formula(outer: int, inner: int) -> float:
    """Asymptotic Cost ratio Q0/Q1 = 2 N^2 / M^2."""
    if outer < 1 or inner < 1:
        raise ValueError("outer and inner must be >= 1")
    return 2.0 * inner * inner / (outer * outer)


def slaz_overlap_formula(outer: int, inner: int) -> float:
    """Exact finite double sum behind the send-channel overlap of a run pair:

        sin(tM) sin(tN) * sum_{m<=M, n<=N} sin(m tM) sin(n tN)

    with tM = pi/2M, tN = pi/2N.  The double sum factorizes, so it is
    evaluated as the product of the two single sums.  Tends to 1 for
    large M, N; returning the finite value keeps finite-size deviations
    attributable (formula-vs-asymptote separate from simulation-vs-formula).
    """
    if outer < 1 or inner < 1:
        raise ValueError("outer and inner must be >= 1")
    t_m = math.pi / (2.0 * outer)
    t_n = math.pi / (2.0 * inner)
    sum_m = math.fsum(math.sin(m * t_m) for m in range(1, outer + 1))
    sum_n = math.fsum(math.sin(n * t_n) for n in range(1, inner + 1))
    return math.sin(t_m) * math.sin(t_n) * sum_m * sum_n


def slaz_absorption_profile(ledger: RunLedger) -> np.ndarray:
    """Exact absorbed (send-direction) weight per outer round.

    For a bit-1 run this is the per-outer-round probability of the photon
    landing in Bob's block; entry m-1 tracks (pi^2/4) sin^2(m pi/2M) / N,
    with depletion corrections that stay under 10% once N is a couple of
    dozen times M.  Reported exactly so nothing is asserted about the
    approximation itself.
    """
    dirs, outer, _, amps = ledger.arrays()
    send = dirs == Direction.ALICE_TO_BOB
    weights = (np.abs(amps[send]) ** 2).sum(axis=1)
    rounds = outer[send]
    if len(rounds) == 0:
        return np.empty(0)
    return np.array([weights[rounds == m].sum() for m in range(1, int(rounds.max()) + 1)])


def zeno_approx_error(inner: int) -> float:
    """|cos(pi/2N)^N - (1 - pi^2/8N)|: accuracy of the small-angle survival
    approximation at N rounds."""
    if inner < 1:
        raise ValueError("inner must be >= 1")
    t_n = math.pi / (2.0 * inner)
    return abs(math.cos(t_n) ** inner - (1.0 - math.pi ** 2 / (8.0 * inner)))


@dataclass(frozen=True)
class SweepRecord:
    """One (grid point, bit) row of a sweep: measured costs vs formula,
    plus the pair-level overlap change and bound slack."""

    protocol: str
    outer: int
    inner: int
    bit: int
    k: float
    khat: float
    q: float
    q_formula: float
    rel_err: float
    delta_g01: complex
    bound_slack: float
    regime_ok: bool


def run_sweep(grid: list[tuple[int, int]]) -> list[SweepRecord]:
    """Run the hierarchical protocol pair at every (outer, inner) grid point.

    Returns two records per point (bit 0 and bit 1), in grid order;
    deterministic given the grid.
    """
    if not grid:
        raise ValueError("sweep grid must not be empty")
    records = []
    for outer, inner in grid:
        pair = run_pair(ProtocolConfig(ProtocolKind.SLAZ, rounds=inner, outer=outer))
        slack = pair.bound.min_slack()
        ok = slaz_regime_ok(outer, inner)
        for bit, outcome in ((0, pair.run0), (1, pair.run1)):
            k, khat, q = total_costs(outcome.ledger)
            q_formula = slaz_cost_formula(bit, outer, inner)
            rel_err = abs(q / q_formula - 1.0) if q_formula > 0 else float("nan")
            records.append(
                SweepRecord(
                    protocol=ProtocolKind.SLAZ.value,
                    outer=outer,
                    inner=inner,
                    bit=bit,
                    k=k,
                    khat=khat,
                    q=q,
                    q_formula=q_formula,
                    rel_err=rel_err,
                    delta_g01=pair.delta_g01_states,
                    bound_slack=slack,
                    regime_ok=ok,
                )
            )
    return records
