"""Exact complex state vectors over labeled direct-sum partitions.

States live in a single Hilbert space split into labeled orthogonal blocks
(for protocol work: Alice's blocks, the channel, Bob's blocks).  The space
is a direct sum of subspaces, not a tensor product, so dimensions stay tiny
and plain dense double-precision arithmetic is exact enough for everything
downstream: the suite-wide identity tolerance is ``ATOL = 1e-12``.

Unitary primitives are value-like: they return a new :class:`StateVector`
and never mutate their input.  Protocol runners that need speed use the
private ``*_inplace`` helpers on an exclusively owned buffer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._compsum import abs2_sum, compensated_complex_sum

#: Absolute tolerance for exact identities throughout the suite.
ATOL = 1e-12


class InvariantViolation(RuntimeError):
    """A runtime invariant (norm preservation, channel emptiness) was breached."""


@dataclass(frozen=True)
class Partition:
    """Ordered list of labeled block dimensions: a projective decomposition.

    Slot indices are flat global indices into the concatenated blocks;
    block labels are the public addressing scheme.
    """

    blocks: tuple[tuple[str, int], ...]
    total_dim: int = field(init=False, repr=False, compare=False)

    def __init__(self, blocks: Iterable[tuple[str, int]]):
        normalized = tuple((str(label), int(dim)) for label, dim in blocks)
        if not normalized:
            raise ValueError("partition needs at least one block")
        labels = [label for label, _ in normalized]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate block labels in {labels}")
        for label, dim in normalized:
            if dim < 1:
                raise ValueError(f"block {label!r} has dimension {dim}; blocks must be nonempty")
        object.__setattr__(self, "blocks", normalized)
        object.__setattr__(self, "total_dim", sum(dim for _, dim in normalized))
        offsets = {}
        at = 0
        for label, dim in normalized:
            offsets[label] = (at, dim)
            at += dim
        object.__setattr__(self, "_offsets", offsets)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.blocks)

    def dim(self, label: str) -> int:
        return self._ofs(label)[1]

    def block_slice(self, label: str) -> slice:
        at, dim = self._ofs(label)
        return slice(at, at + dim)

    def slot(self, label: str, index: int = 0) -> int:
        """Flat slot of element ``index`` of block ``label``."""
        at, dim = self._ofs(label)
        if not 0 <= index < dim:
            raise ValueError(f"index {index} out of range for block {label!r} (dim {dim})")
        return at + index

    def locate(self, slot: int) -> tuple[str, int]:
        """Resolve a flat slot to its (label, offset-within-block)."""
        self._check_slot(slot)
        for label, (at, dim) in self._offsets.items():
            if at <= slot < at + dim:
                return label, slot - at
        raise AssertionError("unreachable")

    def _ofs(self, label: str) -> tuple[int, int]:
        try:
            return self._offsets[label]
        except KeyError:
            raise ValueError(f"unknown block label {label!r}; have {list(self._offsets)}") from None

    def _check_slot(self, slot: int) -> None:
        if not 0 <= slot < self.total_dim:
            raise ValueError(f"slot {slot} out of range [0, {self.total_dim})")


@dataclass
class StateVector:
    """A complex amplitude vector over a :class:`Partition`.

    Treat instances as read-only values; all primitives return new states.
    """

    partition: Partition
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (self.partition.total_dim,):
            raise ValueError(
                f"amplitude array has shape {amps.shape}, expected ({self.partition.total_dim},)"
            )
        self.amps = amps

    def copy(self) -> "StateVector":
        return StateVector(self.partition, self.amps.copy())

    def norm_sq(self) -> float:
        """Squared norm, compensated so it is trustworthy at 1e-12."""
        return abs2_sum(self.amps)

    def block(self, label: str) -> np.ndarray:
        """The amplitudes of one labeled block (a view; do not mutate)."""
        return self.amps[self.partition.block_slice(label)]


@dataclass(frozen=True)
class BlockUnitary:
    """A unitary matrix acting on an explicit list of slots."""

    slots: tuple[int, ...]
    matrix: np.ndarray

    def __init__(self, slots: Sequence[int], matrix: np.ndarray):
        slots = tuple(int(s) for s in slots)
        if len(set(slots)) != len(slots):
            raise ValueError(f"duplicate slots in {slots}")
        matrix = np.asarray(matrix, dtype=np.complex128)
        k = len(slots)
        if matrix.shape != (k, k):
            raise ValueError(f"matrix shape {matrix.shape} does not match {k} slots")
        defect = np.abs(matrix.conj().T @ matrix - np.eye(k)).max()
        if defect > ATOL:
            raise ValueError(f"matrix is not unitary: max |U^dag U - I| = {defect:.3e}")
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "matrix", matrix)


# ---------------------------------------------------------------------------
# construction and scalar queries

def make_state(partition: Partition, entries: Iterable[tuple[int, complex]]) -> StateVector:
    """Build a state with the listed (slot, amplitude) entries, others zero.

    No normalization is applied; the caller owns the normalization choice.
    """
    amps = np.zeros(partition.total_dim, dtype=np.complex128)
    seen = set()
    for slot, value in entries:
        partition._check_slot(slot)
        if slot in seen:
            raise ValueError(f"duplicate slot {slot} in entries")
        seen.add(slot)
        amps[slot] = value
    return StateVector(partition, amps)


def inner_product(s1: StateVector, s2: StateVector) -> complex:
    """<s1|s2> with the first argument conjugated."""
    _require_same_partition(s1, s2)
    return compensated_complex_sum(np.conj(s1.amps) * s2.amps)


def block_weight(s: StateVector, label: str) -> float:
    """Squared amplitude carried by one labeled block."""
    return abs2_sum(s.block(label))


# ---------------------------------------------------------------------------
# unitary primitives

def apply_rotation(s: StateVector, slot_i: int, slot_j: int, theta: float) -> StateVector:
    """Real rotation on two slots:
    (a_i, a_j) -> (a_i cos t - a_j sin t, a_i sin t + a_j cos t).
    """
    _check_slot_pair(s.partition, slot_i, slot_j)
    amps = s.amps.copy()
    _rotate_inplace(amps, slot_i, slot_j, math.cos(theta), math.sin(theta))
    return StateVector(s.partition, amps)


def apply_swap(s: StateVector, slot_i: int, slot_j: int) -> StateVector:
    """Plain transposition of two slots (determinant -1, not a rotation)."""
    _check_slot_pair(s.partition, slot_i, slot_j)
    amps = s.amps.copy()
    _swap_inplace(amps, slot_i, slot_j)
    return StateVector(s.partition, amps)


def apply_phase(s: StateVector, slot: int, phase: complex) -> StateVector:
    """Multiply the amplitude at one slot by a unit-modulus phase."""
    s.partition._check_slot(slot)
    if abs(abs(phase) - 1.0) > ATOL:
        raise ValueError(f"phase {phase!r} is not unimodular (|phase| = {abs(phase):.15g})")
    amps = s.amps.copy()
    amps[slot] *= phase
    return StateVector(s.partition, amps)


def apply_block_unitary(s: StateVector, u: BlockUnitary) -> StateVector:
    """Apply ``u.matrix`` to the sub-vector on ``u.slots``."""
    for slot in u.slots:
        s.partition._check_slot(slot)
    amps = s.amps.copy()
    _matrix_inplace(amps, u.slots, u.matrix)
    return StateVector(s.partition, amps)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


# ---------------------------------------------------------------------------
# in-place kernels for runners that own their buffer

def _rotate_inplace(amps: np.ndarray, i: int, j: int, c: float, s: float) -> None:
    ai = amps[i]
    aj = amps[j]
    amps[i] = ai * c - aj * s
    amps[j] = ai * s + aj * c


def _swap_inplace(amps: np.ndarray, i: int, j: int) -> None:
    amps[i], amps[j] = amps[j], amps[i]


def _matrix_inplace(amps: np.ndarray, slots: Sequence[int], matrix: np.ndarray) -> None:
    idx = list(slots)
    amps[idx] = matrix @ amps[idx]


def _check_slot_pair(partition: Partition, slot_i: int, slot_j: int) -> None:
    partition._check_slot(slot_i)
    partition._check_slot(slot_j)
    if slot_i == slot_j:
        raise ValueError(f"slot collision: both operands are slot {slot_i}")


def _require_same_partition(s1: StateVector, s2: StateVector) -> None:
    if s1.partition != s2.partition:
        raise ValueError("partition mismatch between states")
