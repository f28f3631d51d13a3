import math

import numpy as np
import pytest

from multitime import (
    ATOL,
    BlockUnitary,
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
from conftest import random_state

SQ2 = 1.0 / math.sqrt(2.0)


@pytest.fixture
def p_ac():
    return Partition([("A", 2), ("C", 1)])


class TestPartition:
    def test_layout(self):
        p = Partition([("A", 3), ("C", 2), ("B", 2)])
        assert p.total_dim == 7
        assert p.labels == ("A", "C", "B")
        assert p.slot("C", 1) == 4
        assert p.block_slice("B") == slice(5, 7)
        assert p.locate(4) == ("C", 1)

    def test_rejects_duplicates_and_empty_blocks(self):
        with pytest.raises(ValueError):
            Partition([("A", 2), ("A", 1)])
        with pytest.raises(ValueError):
            Partition([("A", 0)])
        with pytest.raises(ValueError):
            Partition([])

    def test_bad_lookups(self):
        p = Partition([("A", 2)])
        with pytest.raises(ValueError):
            p.slot("X")
        with pytest.raises(ValueError):
            p.slot("A", 2)


class TestMakeState:
    def test_single_entry(self, p_ac):
        s = make_state(p_ac, [(0, 1.0)])
        assert list(s.amps) == [1.0, 0.0, 0.0]

    def test_empty_entries_give_zero_vector(self, p_ac):
        s = make_state(p_ac, [])
        assert s.norm_sq() == 0.0

    def test_hierarchical_start_state(self):
        p = Partition([("A1", 1), ("A2", 1), ("A3", 1), ("A4", 4), ("C", 1), ("B", 4)])
        s = make_state(p, [(0, 1.0)])
        assert s.amps[0] == 1.0
        assert s.norm_sq() == 1.0

    def test_no_normalization(self, p_ac):
        s = make_state(p_ac, [(0, 2.0), (2, 1j)])
        assert s.norm_sq() == pytest.approx(5.0, abs=ATOL)

    def test_rejects_duplicate_and_invalid_slots(self, p_ac):
        with pytest.raises(ValueError):
            make_state(p_ac, [(0, 1.0), (0, 0.5)])
        with pytest.raises(ValueError):
            make_state(p_ac, [(3, 1.0)])


class TestInnerProduct:
    def test_normalized_self(self, p_ac, rng):
        s = random_state(p_ac, rng)
        assert inner_product(s, s) == pytest.approx(1.0, abs=ATOL)

    def test_basis_orthogonality(self, p_ac):
        e0 = make_state(p_ac, [(0, 1.0)])
        e1 = make_state(p_ac, [(1, 1.0)])
        assert inner_product(e0, e1) == 0.0

    def test_phase_encoded_finals_are_orthogonal(self, p_ac):
        s0 = make_state(p_ac, [(0, SQ2), (1, SQ2)])
        s1 = make_state(p_ac, [(0, SQ2), (1, -SQ2)])
        assert abs(inner_product(s0, s1)) <= ATOL

    def test_conjugation_side(self, p_ac):
        s0 = make_state(p_ac, [(0, 1j)])
        s1 = make_state(p_ac, [(0, 1.0)])
        assert inner_product(s0, s1) == pytest.approx(-1j)

    def test_partition_mismatch(self, p_ac):
        other = Partition([("A", 3)])
        with pytest.raises(ValueError):
            inner_product(make_state(p_ac, []), make_state(other, []))


class TestBlockWeight:
    def test_all_in_one_block(self, p_ac):
        s = make_state(p_ac, [(0, 1.0)])
        assert block_weight(s, "A") == 1.0
        assert block_weight(s, "C") == 0.0

    def test_half_in_channel(self, p_ac):
        s = make_state(p_ac, [(0, SQ2), (2, SQ2)])
        assert block_weight(s, "C") == pytest.approx(0.5, abs=ATOL)

    def test_unknown_label(self, p_ac):
        with pytest.raises(ValueError):
            block_weight(make_state(p_ac, []), "Z")


class TestRotation:
    def test_quarter_turn(self, p_ac):
        s = apply_rotation(make_state(p_ac, [(0, 1.0)]), 0, 1, math.pi / 2)
        assert abs(s.amps[0]) <= ATOL and s.amps[1] == pytest.approx(1.0, abs=ATOL)
        s = apply_rotation(make_state(p_ac, [(1, 1.0)]), 0, 1, math.pi / 2)
        assert s.amps[0] == pytest.approx(-1.0, abs=ATOL) and abs(s.amps[1]) <= ATOL

    def test_zero_angle_is_identity(self, p_ac, rng):
        s = random_state(p_ac, rng)
        assert np.array_equal(apply_rotation(s, 0, 1, 0.0).amps, s.amps)

    def test_eighth_turn(self, p_ac):
        s = apply_rotation(make_state(p_ac, [(0, 1.0)]), 0, 1, math.pi / 4)
        assert s.amps[0] == pytest.approx(SQ2, abs=ATOL)
        assert s.amps[1] == pytest.approx(SQ2, abs=ATOL)

    def test_composition(self, p_ac, rng):
        for _ in range(25):
            s = random_state(p_ac, rng)
            t1, t2 = rng.uniform(-math.pi, math.pi, size=2)
            two = apply_rotation(apply_rotation(s, 0, 2, t1), 0, 2, t2)
            one = apply_rotation(s, 0, 2, t1 + t2)
            assert np.abs(two.amps - one.amps).max() <= ATOL

    def test_zeno_identity(self, rng):
        p = Partition([("A", 2)])
        for m in range(1, 65):
            s = random_state(p, rng)
            stepped = s
            for _ in range(m):
                stepped = apply_rotation(stepped, 0, 1, math.pi / (2 * m))
            once = apply_rotation(s, 0, 1, math.pi / 2)
            assert np.abs(stepped.amps - once.amps).max() <= ATOL

    def test_slot_collision(self, p_ac):
        with pytest.raises(ValueError):
            apply_rotation(make_state(p_ac, []), 1, 1, 0.3)


class TestSwapAndPhase:
    def test_swap_values(self, p_ac):
        s = make_state(p_ac, [(0, 0.6), (2, 0.8j)])
        out = apply_swap(s, 0, 2)
        assert out.amps[0] == 0.8j and out.amps[2] == 0.6

    def test_swap_involution(self, p_ac, rng):
        s = random_state(p_ac, rng)
        assert np.array_equal(apply_swap(apply_swap(s, 0, 2), 0, 2).amps, s.amps)

    def test_swap_is_rotation_plus_phase(self, p_ac, rng):
        # fixed convention: swap == phase(-1 on first slot) after R(pi/2)
        for _ in range(10):
            s = random_state(p_ac, rng)
            direct = apply_swap(s, 0, 2)
            via = apply_phase(apply_rotation(s, 0, 2, math.pi / 2), 0, -1.0)
            assert np.abs(direct.amps - via.amps).max() <= ATOL

    def test_phase_flip(self, p_ac):
        s = make_state(p_ac, [(2, SQ2)])
        assert apply_phase(s, 2, -1.0).amps[2] == -SQ2

    def test_phase_identity_and_composition(self, p_ac, rng):
        s = random_state(p_ac, rng)
        assert np.array_equal(apply_phase(s, 1, 1.0).amps, s.amps)
        twice_i = apply_phase(apply_phase(s, 1, 1j), 1, 1j)
        minus = apply_phase(s, 1, -1.0)
        assert np.abs(twice_i.amps - minus.amps).max() <= ATOL

    def test_non_unimodular_phase_rejected(self, p_ac):
        with pytest.raises(ValueError):
            apply_phase(make_state(p_ac, []), 0, 0.5)


class TestBlockUnitary:
    def test_identity(self, p_ac, rng):
        s = random_state(p_ac, rng)
        u = BlockUnitary((0, 2), np.eye(2))
        assert np.array_equal(apply_block_unitary(s, u).amps, s.amps)

    def test_matches_rotation(self, p_ac, rng):
        s = random_state(p_ac, rng)
        theta = 0.7343
        c, si = math.cos(theta), math.sin(theta)
        u = BlockUnitary((0, 1), np.array([[c, -si], [si, c]]))
        assert np.abs(
            apply_block_unitary(s, u).amps - apply_rotation(s, 0, 1, theta).amps
        ).max() <= ATOL

    def test_random_unitary_preserves_norm(self, rng):
        # oracle is the norm computation itself
        p = Partition([("A", 2), ("C", 1)])
        for _ in range(25):
            s = random_state(p, rng)
            u = BlockUnitary((0, 1, 2), random_unitary(3, rng))
            assert abs(apply_block_unitary(s, u).norm_sq() - s.norm_sq()) <= ATOL

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            BlockUnitary((0, 1), np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            BlockUnitary((0, 1, 2), np.eye(2))


class TestNormAndLocality:
    def test_random_sequences_preserve_norm(self, rng):
        p = Partition([("A", 3), ("C", 1), ("B", 2)])
        for _ in range(20):
            s = random_state(p, rng)
            out = s
            for _ in range(15):
                i, j = (int(x) for x in rng.choice(p.total_dim, size=2, replace=False))
                pick = rng.integers(3)
                if pick == 0:
                    out = apply_rotation(out, i, j, float(rng.uniform(-3, 3)))
                elif pick == 1:
                    out = apply_swap(out, i, j)
                else:
                    out = apply_phase(out, i, np.exp(1j * rng.uniform(0, 7)))
            assert abs(out.norm_sq() - s.norm_sq()) <= ATOL

    def test_untouched_slots_bit_identical(self, rng):
        p = Partition([("A", 3), ("C", 1), ("B", 2)])
        s = random_state(p, rng)
        out = apply_rotation(s, 1, 3, 0.9)
        rest = [0, 2, 4, 5]
        assert np.array_equal(out.amps[rest], s.amps[rest])


def test_state_vector_shape_validation():
    with pytest.raises(ValueError):
        StateVector(Partition([("A", 2)]), np.zeros(3, dtype=complex))
