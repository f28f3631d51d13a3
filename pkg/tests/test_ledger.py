import math

import numpy as np
import pytest

from multitime import (
    ATOL,
    ChannelUse,
    Direction,
    Partition,
    RunLedger,
    channel_gram,
    check_passivity,
    delta_gram_prediction,
    gram_blocks,
    inner_product,
    make_state,
    record_use,
    round_increments,
    total_costs,
    verify_tradeoff_bound,
)
from conftest import random_state

SQ2 = 1.0 / math.sqrt(2.0)
A2B, B2A = Direction.ALICE_TO_BOB, Direction.BOB_TO_ALICE


def simple_exchange_ledger(bit):
    """One-round exchange: send 1/sqrt(2), Bob applies (-1)^bit, return."""
    led = RunLedger(bit)
    record_use(led, ChannelUse(A2B, 1, 1, (SQ2,)))
    record_use(led, ChannelUse(B2A, 1, 1, ((-1.0) ** bit * SQ2,)))
    return led


class TestRecordAndCosts:
    def test_single_send_cost(self):
        led = RunLedger(0)
        record_use(led, ChannelUse(A2B, 1, 1, (SQ2,)))
        k, khat, q = total_costs(led)
        assert k == pytest.approx(0.5, abs=ATOL) and khat == 0.0

    def test_zero_amplitude_use_costs_nothing(self):
        led = RunLedger(0)
        record_use(led, ChannelUse(B2A, 1, 1, (0.0,)))
        assert total_costs(led) == (0.0, 0.0, 0.0)

    def test_two_dimensional_channel_cost(self):
        use = ChannelUse(A2B, 1, 1, (0.6, 0.8j))
        assert use.cost == pytest.approx(1.0, abs=ATOL)
        led = RunLedger(0, channel_dim=2)
        record_use(led, use)
        assert total_costs(led)[0] == pytest.approx(1.0, abs=ATOL)

    def test_simple_exchange_totals(self):
        for bit in (0, 1):
            assert total_costs(simple_exchange_ledger(bit)) == pytest.approx((0.5, 0.5, 1.0), abs=ATOL)

    def test_empty_ledger(self):
        assert total_costs(RunLedger(0)) == (0.0, 0.0, 0.0)

    def test_channel_dim_enforced(self):
        led = RunLedger(0, channel_dim=2)
        with pytest.raises(ValueError):
            record_use(led, ChannelUse(A2B, 1, 1, (1.0,)))

    def test_uses_round_trip(self):
        led = simple_exchange_ledger(1)
        uses = list(led.uses())
        assert uses[0].direction is A2B and uses[1].direction is B2A
        assert uses[1].amps == (-SQ2,)
        assert len(led) == 2


class TestChannelGram:
    def test_simple_exchange_overlaps(self):
        l0, l1 = simple_exchange_ledger(0), simple_exchange_ledger(1)
        cc, cchat = channel_gram(l0, l1)
        assert cc == pytest.approx(0.5, abs=ATOL)
        assert cchat == pytest.approx(-0.5, abs=ATOL)
        assert delta_gram_prediction(l0, l1) == pytest.approx(-1.0, abs=ATOL)

    def test_zero_returns_kill_return_overlap(self):
        l0 = simple_exchange_ledger(0)
        l1 = RunLedger(1)
        record_use(l1, ChannelUse(A2B, 1, 1, (SQ2,)))
        record_use(l1, ChannelUse(B2A, 1, 1, (0.0,)))
        assert channel_gram(l0, l1)[1] == 0.0

    def test_identical_passive_full_return_has_zero_delta(self):
        led = simple_exchange_ledger(0)
        assert delta_gram_prediction(led, led) == pytest.approx(0.0, abs=ATOL)

    def test_misaligned_sequences_rejected(self):
        l0 = simple_exchange_ledger(0)
        l1 = RunLedger(1)
        record_use(l1, ChannelUse(A2B, 1, 2, (SQ2,)))
        record_use(l1, ChannelUse(B2A, 1, 2, (SQ2,)))
        with pytest.raises(ValueError, match="misaligned"):
            channel_gram(l0, l1)
        short = RunLedger(1)
        record_use(short, ChannelUse(A2B, 1, 1, (SQ2,)))
        with pytest.raises(ValueError, match="misaligned"):
            channel_gram(l0, short)

    def test_round_increments_match_brute_force(self, rng):
        l0, l1 = RunLedger(0), RunLedger(1)
        expected = []
        for n in range(1, 6):
            c0, c1 = rng.normal(size=2) + 1j * rng.normal(size=2)
            r0, r1 = rng.normal(size=2) + 1j * rng.normal(size=2)
            record_use(l0, ChannelUse(A2B, 1, n, (c0,)))
            record_use(l1, ChannelUse(A2B, 1, n, (c1,)))
            record_use(l0, ChannelUse(B2A, 1, n, (r0,)))
            record_use(l1, ChannelUse(B2A, 1, n, (r1,)))
            expected.append(np.conj(r0) * r1 - np.conj(c0) * c1)
        inc = round_increments(l0, l1)
        assert np.abs(inc - np.array(expected)).max() <= ATOL
        assert np.abs(inc.sum() - delta_gram_prediction(l0, l1)).max() <= ATOL


class TestGramBlocks:
    def test_identical_states_have_unit_totals(self, rng):
        p = Partition([("A", 2), ("C", 1), ("B", 2)])
        s = random_state(p, rng)
        report = gram_blocks(s, s)
        assert np.abs(report.totals - np.ones((2, 2))).max() <= ATOL

    def test_phase_encoded_finals_give_identity_on_alice(self):
        p = Partition([("A", 2), ("C", 1)])
        s0 = make_state(p, [(0, SQ2), (1, SQ2)])
        s1 = make_state(p, [(0, SQ2), (1, -SQ2)])
        g = gram_blocks(s0, s1).block("A")
        assert np.abs(g - np.eye(2)).max() <= ATOL

    def test_mid_protocol_channel_overlap(self):
        p = Partition([("A", 2), ("C", 1)])
        s0 = make_state(p, [(0, SQ2), (2, SQ2)])
        s1 = make_state(p, [(0, SQ2), (2, -SQ2)])
        g = gram_blocks(s0, s1)
        assert g.block("C")[0, 1] == pytest.approx(-0.5, abs=ATOL)
        assert g.block("A")[0, 1] == pytest.approx(0.5, abs=ATOL)

    def test_additivity_and_hermiticity(self, rng):
        p = Partition([("A", 3), ("C", 2), ("B", 3)])
        s0, s1 = random_state(p, rng), random_state(p, rng)
        report = gram_blocks(s0, s1)
        summed = sum(report.blocks.values())
        assert np.abs(summed - report.totals).max() <= ATOL
        assert report.totals[0, 1] == pytest.approx(inner_product(s0, s1), abs=ATOL)
        for g in list(report.blocks.values()) + [report.totals]:
            assert g[1, 0] == pytest.approx(np.conj(g[0, 1]), abs=ATOL)
            assert g[0, 0].imag == pytest.approx(0.0, abs=ATOL)
            assert g[0, 0].real >= -ATOL

    def test_deltas(self, rng):
        p = Partition([("A", 2), ("C", 1)])
        init = make_state(p, [(0, 1.0)])
        s0 = make_state(p, [(0, SQ2), (1, SQ2)])
        s1 = make_state(p, [(0, SQ2), (1, -SQ2)])
        report = gram_blocks(s0, s1, initial=(init, init))
        assert report.delta_total(["A"])[0, 1] == pytest.approx(-1.0, abs=ATOL)
        bare = gram_blocks(s0, s1)
        with pytest.raises(ValueError):
            bare.delta_total(["A"])

    def test_partition_mismatch(self, rng):
        s0 = random_state(Partition([("A", 2)]), rng)
        s1 = random_state(Partition([("A", 3)]), rng)
        with pytest.raises(ValueError):
            gram_blocks(s0, s1)


class TestPassivity:
    def test_passive_ledger_clean(self):
        assert check_passivity(simple_exchange_ledger(0)) == []

    def test_zero_returns_are_passive(self):
        led = RunLedger(1)
        record_use(led, ChannelUse(A2B, 1, 1, (0.3,)))
        record_use(led, ChannelUse(B2A, 1, 1, (0.0,)))
        assert check_passivity(led) == []

    def test_amplified_return_flagged(self):
        led = RunLedger(0)
        record_use(led, ChannelUse(A2B, 1, 1, (0.5,)))
        record_use(led, ChannelUse(B2A, 1, 1, (0.55,)))
        violations = check_passivity(led)
        assert len(violations) == 1
        assert violations[0].outer_round == 1
        assert violations[0].returned_norm == pytest.approx(0.55)

    def test_unpairable_rejected(self):
        odd = RunLedger(0)
        record_use(odd, ChannelUse(A2B, 1, 1, (0.5,)))
        with pytest.raises(ValueError, match="unpairable"):
            check_passivity(odd)
        flipped = RunLedger(0)
        record_use(flipped, ChannelUse(B2A, 1, 1, (0.5,)))
        record_use(flipped, ChannelUse(A2B, 1, 1, (0.5,)))
        with pytest.raises(ValueError, match="unpairable"):
            check_passivity(flipped)


class TestTradeoffBound:
    def test_optimal_exchange_saturates(self):
        report = verify_tradeoff_bound(-1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5)
        assert report.ok
        assert report.named("overlap_vs_split").slack == pytest.approx(0.0, abs=ATOL)
        assert report.named("split_vs_total").slack == pytest.approx(0.0, abs=ATOL)
        assert report.named("min_cost_product").slack == pytest.approx(0.0, abs=ATOL)

    def test_lopsided_costs_leave_slack(self):
        report = verify_tradeoff_bound(-1.0, 4.0, 0.5, 2.0, 0.25, 2.0, 0.25)
        assert report.ok
        assert report.named("overlap_vs_total").slack == pytest.approx(math.sqrt(2) - 1, abs=ATOL)

    def test_cheap_full_protocol_flagged(self):
        report = verify_tradeoff_bound(1.0, 0.4, 0.4, 0.2, 0.2, 0.2, 0.2)
        assert not report.ok
        assert not report.named("min_cost_product").passed

    def test_diagonal_checks_present_when_supplied(self):
        report = verify_tradeoff_bound(0.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5,
                                       delta_g00=0.2, delta_g11=1.5)
        assert report.named("diag_weight_0").passed
        assert not report.named("diag_weight_1").passed

    def test_negative_cost_rejected(self):
        with pytest.raises(ValueError):
            verify_tradeoff_bound(0.0, -1.0, 1.0, 0.5, 0.5, 0.5, 0.5)


def test_from_arrays_and_append_interleave():
    led = RunLedger.from_arrays(
        0,
        np.array([0, 1], dtype=np.uint8),
        np.array([1, 1]),
        np.array([1, 1]),
        np.array([[0.5], [0.5]], dtype=complex),
    )
    record_use(led, ChannelUse(A2B, 1, 2, (0.1,)))
    record_use(led, ChannelUse(B2A, 1, 2, (0.1,)))
    assert len(led) == 4
    k, khat, q = total_costs(led)
    assert q == pytest.approx(0.52, abs=ATOL)
    assert check_passivity(led) == []
