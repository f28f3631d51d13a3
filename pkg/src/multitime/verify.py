"""Programmatic invariant suite behind ``multitime verify``.

Each check returns (name, ok, detail) with deterministic detail strings
for a fixed seed, so two invocations with the same seed produce identical
manifests.  ``inject_fault`` deliberately corrupts one step (used to
demonstrate that the suite actually detects violations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analysis, protocols
from ._kernels import HAVE_CYTHON, _slaz_py
from ._kernels._ddtrig import dd_add, dd_mul
from .ledger import (
    Direction,
    check_passivity,
    gram_blocks,
    round_increments,
    total_costs,
)
from .protocols import (
    ProtocolConfig,
    ProtocolKind,
    Schedule,
    run_one_way,
    run_pair,
    run_polarization,
    run_random_bob_pair,
    run_simple,
    run_slaz,
)
from .states import (
    Partition,
    StateVector,
    apply_phase,
    apply_rotation,
    apply_swap,
    block_weight,
    inner_product,
    random_unitary,
    _matrix_inplace,
)

FAULTS = ("nonunitary-bob",)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.detail}"


def _random_state(partition: Partition, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=partition.total_dim) + 1j * rng.normal(size=partition.total_dim)
    amps /= np.linalg.norm(amps)
    return StateVector(partition, amps)


def _result(name: str, worst: float, tol: float, extra: str = "") -> CheckResult:
    detail = f"worst {worst:.3e} (tol {tol:.1e}){extra}"
    return CheckResult(name, worst <= tol, detail)


# ---------------------------------------------------------------------------
# state-core invariants

def _check_rotation_composition(rng) -> CheckResult:
    p = Partition([("A", 2), ("C", 1)])
    worst = 0.0
    for _ in range(50):
        s = _random_state(p, rng)
        t1, t2 = rng.uniform(-math.pi, math.pi, size=2)
        via_two = apply_rotation(apply_rotation(s, 0, 1, t1), 0, 1, t2)
        direct = apply_rotation(s, 0, 1, t1 + t2)
        worst = max(worst, float(np.abs(via_two.amps - direct.amps).max()))
    return _result("rotation_composition", worst, 1e-12)


def _check_zeno_rotation_power(rng) -> CheckResult:
    p = Partition([("A", 2)])
    worst = 0.0
    for m in range(1, 65):
        s = _random_state(p, rng)
        stepped = s
        for _ in range(m):
            stepped = apply_rotation(stepped, 0, 1, math.pi / (2 * m))
        once = apply_rotation(s, 0, 1, math.pi / 2)
        worst = max(worst, float(np.abs(stepped.amps - once.amps).max()))
    return _result("zeno_rotation_power", worst, 1e-12)


def _check_zeno_cosine_approx(rng) -> CheckResult:
    worst_ratio = 0.0
    for n in range(16, 4097):
        ratio = analysis.zeno_approx_error(n) / (2.0 / (n * n))
        worst_ratio = max(worst_ratio, ratio)
    return _result("zeno_cosine_approx", worst_ratio, 1.0, " [error / (2/N^2)]")


def _check_swap_rotation_relation(rng) -> CheckResult:
    p = Partition([("A", 2), ("C", 1)])
    worst = 0.0
    for _ in range(50):
        s = _random_state(p, rng)
        swapped = apply_swap(s, 0, 2)
        via_rot = apply_phase(apply_rotation(s, 0, 2, math.pi / 2), 0, -1.0)
        worst = max(worst, float(np.abs(swapped.amps - via_rot.amps).max()))
    return _result("swap_equals_rotation_plus_phase", worst, 1e-12)


def _check_norm_and_locality(rng) -> CheckResult:
    p = Partition([("A", 3), ("C", 1), ("B", 2)])
    worst = 0.0
    for _ in range(25):
        s = _random_state(p, rng)
        before = s.norm_sq()
        touched = set()
        out = s
        for _ in range(12):
            i, j = rng.choice(p.total_dim, size=2, replace=False)
            op = rng.integers(3)
            if op == 0:
                out = apply_rotation(out, int(i), int(j), float(rng.uniform(-3, 3)))
            elif op == 1:
                out = apply_swap(out, int(i), int(j))
            else:
                out = apply_phase(out, int(i), 1j)
                j = i
            touched |= {int(i), int(j)}
        worst = max(worst, abs(out.norm_sq() - before))
        untouched = sorted(set(range(p.total_dim)) - touched)
        if untouched and not np.array_equal(out.amps[untouched], s.amps[untouched]):
            return CheckResult("primitive_norm_and_locality", False,
                               "untouched amplitudes changed bit-identically")
    return _result("primitive_norm_and_locality", worst, 1e-12)


# ---------------------------------------------------------------------------
# Gram conservation

def _check_gram_conservation(rng, fault: str | None) -> CheckResult:
    p = Partition([("A", 3), ("C", 2), ("B", 3)])
    worst = 0.0
    for trial in range(40):
        s0, s1 = _random_state(p, rng), _random_state(p, rng)
        before = gram_blocks(s0, s1).totals
        k = int(rng.integers(2, 5))
        slots = sorted(int(x) for x in rng.choice(p.total_dim, size=k, replace=False))
        u = random_unitary(k, rng)
        if fault == "nonunitary-bob" and trial == 7:
            u = u * 1.02  # deliberately breaks unitarity, bypassing validation
        a0, a1 = s0.amps.copy(), s1.amps.copy()
        _matrix_inplace(a0, slots, u)
        _matrix_inplace(a1, slots, u)
        after = gram_blocks(StateVector(p, a0), StateVector(p, a1)).totals
        worst = max(worst, float(np.abs(after - before).max()))
    return _result("gram_conservation", worst, 1e-12,
                   " [common unitary must conserve the total Gram matrix]")


def _check_gram_block_transfer(rng) -> CheckResult:
    p = Partition([("A", 3), ("C", 2), ("B", 3)])
    ac_slots = list(range(5))  # A and C blocks
    worst_sum = 0.0
    moved = 0.0
    for _ in range(40):
        s0, s1 = _random_state(p, rng), _random_state(p, rng)
        g_before = gram_blocks(s0, s1)
        k = int(rng.integers(2, 6))
        slots = sorted(int(x) for x in rng.choice(ac_slots, size=k, replace=False))
        u = random_unitary(k, rng)
        a0, a1 = s0.amps.copy(), s1.amps.copy()
        _matrix_inplace(a0, slots, u)
        _matrix_inplace(a1, slots, u)
        g_after = gram_blocks(StateVector(p, a0), StateVector(p, a1))
        sum_before = g_before.block("A") + g_before.block("C")
        sum_after = g_after.block("A") + g_after.block("C")
        worst_sum = max(worst_sum, float(np.abs(sum_after - sum_before).max()))
        moved = max(moved, float(np.abs(g_after.block("A") - g_before.block("A")).max()))
    extra = f" [blocks themselves moved by up to {moved:.3e}]"
    return _result("gram_block_transfer_within_ac", worst_sum, 1e-12, extra)


def _check_gram_bit_dependent_cb(rng) -> CheckResult:
    p = Partition([("A", 3), ("C", 2), ("B", 3)])
    cb_slots = list(range(3, 8))  # C and B blocks
    worst = 0.0
    for _ in range(40):
        s0, s1 = _random_state(p, rng), _random_state(p, rng)
        g_before = gram_blocks(s0, s1)
        k = int(rng.integers(2, 6))
        slots = sorted(int(x) for x in rng.choice(cb_slots, size=k, replace=False))
        a0, a1 = s0.amps.copy(), s1.amps.copy()
        _matrix_inplace(a0, slots, random_unitary(k, rng))  # run-0 Bob
        _matrix_inplace(a1, slots, random_unitary(k, rng))  # different run-1 Bob
        g_after = gram_blocks(StateVector(p, a0), StateVector(p, a1))
        worst = max(worst, float(abs(g_after.block("A")[0, 1] - g_before.block("A")[0, 1])))
        worst = max(worst, float(abs(g_after.totals[0, 0] - g_before.totals[0, 0])))
        worst = max(worst, float(abs(g_after.totals[1, 1] - g_before.totals[1, 1])))
    return _result("gram_bit_dependent_cb_leaves_alice", worst, 1e-12)


# ---------------------------------------------------------------------------
# protocol exactness

def _random_two_way_schedule(rng, n: int) -> Schedule:
    x = rng.random(n) + 0.01
    return Schedule(x / (2.0 * x.sum()), protocols.TWO_WAY_TOTAL)


def _check_simple_exactness(rng) -> CheckResult:
    worst = 0.0
    for n in (1, 2, 5, 32):
        schedules = [Schedule.uniform(n, protocols.TWO_WAY_TOTAL)]
        schedules += [_random_two_way_schedule(rng, n) for _ in range(3)]
        for sched in schedules:
            outs = [run_simple(bit, sched) for bit in (0, 1)]
            for out in outs:
                _, _, q = total_costs(out.ledger)
                worst = max(worst, abs(q - 1.0))
                worst = max(worst, float(np.abs(out.final_state.block("C")).max()))
            g = gram_blocks(outs[0].final_state, outs[1].final_state).block("A")
            worst = max(worst, float(np.abs(g - np.eye(2)).max()))
    return _result("simple_exactness", worst, 1e-12)


def _check_simple_schedule_invariance(rng) -> CheckResult:
    worst = 0.0
    for n in (2, 5, 9):
        ref = run_simple(1, Schedule.uniform(n, protocols.TWO_WAY_TOTAL))
        ref_a = ref.final_state.block("A")
        ref_q = total_costs(ref.ledger)[2]
        for _ in range(3):
            out = run_simple(1, _random_two_way_schedule(rng, n))
            worst = max(worst, float(np.abs(out.final_state.block("A") - ref_a).max()))
            worst = max(worst, abs(total_costs(out.ledger)[2] - ref_q))
    return _result("simple_schedule_invariance", worst, 1e-12)


def _check_oneway(rng) -> CheckResult:
    worst = 0.0
    schedules = [
        Schedule([1.0], protocols.ONE_WAY_TOTAL),
        Schedule([0.5, 0.5], protocols.ONE_WAY_TOTAL),
        Schedule([0.3, 0.2, 0.5], protocols.ONE_WAY_TOTAL),
    ]
    x = rng.random(6) + 0.01
    schedules.append(Schedule(x / x.sum(), protocols.ONE_WAY_TOTAL))
    for sched in schedules:
        for bit in (0, 1):
            out = run_one_way(sched, bit)
            k, khat, q = total_costs(out.ledger)
            worst = max(worst, abs(q - 1.0), k)  # all Cost must be Bob-to-Alice
            dirs = out.ledger.arrays()[0]
            if not np.all(dirs == Direction.BOB_TO_ALICE):
                return CheckResult("oneway_costs", False, "found an Alice-to-Bob transit")
    return _result("oneway_costs", worst, 1e-12)


def _check_polarization(rng) -> CheckResult:
    out0, out1 = run_polarization(0), run_polarization(1)
    worst = 0.0
    for out in (out0, out1):
        k, khat, q = total_costs(out.ledger)
        worst = max(worst, abs(k - 1.0), abs(khat - 1.0), abs(q - 2.0))
    overlap = abs(inner_product(out0.final_state, out1.final_state))
    worst = max(worst, overlap)
    return _result("polarization_costs_and_orthogonality", worst, 1e-12)


# ---------------------------------------------------------------------------
# pair grid: ledger identity, bound chain, passivity

def _pair_grid(rng, n_random_bob: int) -> list[tuple[str, object]]:
    pairs = []
    for n in (1, 2, 5, 32):
        pairs.append((f"simple[N={n}]",
                      run_pair(ProtocolConfig(ProtocolKind.SIMPLE, rounds=n), per_round=True)))
    for eps in ([1.0], [0.5, 0.5], [0.3, 0.2, 0.5]):
        sched = Schedule(eps, protocols.ONE_WAY_TOTAL)
        pairs.append((f"oneway[{len(eps)}]",
                      run_pair(ProtocolConfig(ProtocolKind.ONE_WAY, rounds=len(eps),
                                              schedule=sched), per_round=True)))
    pairs.append(("polarization",
                  run_pair(ProtocolConfig(ProtocolKind.POLARIZATION), per_round=True)))
    for m, n in ((1, 1), (2, 8), (4, 16), (8, 64)):
        pairs.append((f"slaz[{m},{n}]",
                      run_pair(ProtocolConfig(ProtocolKind.SLAZ, rounds=n, outer=m),
                               per_round=True)))
    for k in range(n_random_bob):
        seed = int(rng.integers(2 ** 31))
        pairs.append((f"random_bob[seed={seed}]", run_random_bob_pair(6, seed)))
    return pairs


def _check_ledger_identity(rng) -> CheckResult:
    worst = 0.0
    for label, pair in _pair_grid(rng, 5):
        state_steps = np.diff(pair.g01_rounds)
        ledger_steps = round_increments(pair.run0.ledger, pair.run1.ledger)
        worst = max(worst, float(np.abs(state_steps - ledger_steps).max()))
        worst = max(worst, abs(pair.delta_g01_states - pair.delta_g01_ledger))
    return _result("ledger_identity_per_round", worst, 1e-10)


def _check_bound_chain(rng) -> CheckResult:
    worst_slack = math.inf
    corollary_worst = math.inf
    for label, pair in _pair_grid(rng, 25):
        worst_slack = min(worst_slack, pair.bound.min_slack())
        if not pair.bound.ok:
            return CheckResult("bound_chain", False, f"bound violated for {label}")
        if abs(pair.delta_g01_states) >= 1.0 - 1e-9:
            q0 = total_costs(pair.run0.ledger)[2]
            q1 = total_costs(pair.run1.ledger)[2]
            corollary_worst = min(corollary_worst, q0 * q1 - 1.0)
    ok = worst_slack >= -1e-9 and corollary_worst >= -1e-8
    return CheckResult("bound_chain", ok,
                       f"min chain slack {worst_slack:.3e}, "
                       f"min (Q0*Q1 - 1) over full protocols {corollary_worst:.3e}")


def _check_passivity(rng) -> CheckResult:
    count = 0
    for n in (1, 4, 16):
        for bit in (0, 1):
            count += len(check_passivity(run_simple(bit, rounds=n).ledger))
    for bit in (0, 1):
        count += len(check_passivity(run_polarization(bit).ledger))
        count += len(check_passivity(run_slaz(bit, 4, 16).ledger))
    return CheckResult("passivity", count == 0, f"{count} violations across the grid")


# ---------------------------------------------------------------------------
# hierarchical protocol structure and asymptotics

def _check_slaz_structure(rng) -> CheckResult:
    worst = 0.0
    for m, n in ((1, 1), (2, 4), (4, 16), (8, 64)):
        out0 = run_slaz(0, m, n)
        out1 = run_slaz(1, m, n)
        b_weight = float(np.abs(out0.final_state.block("B")).max())
        if b_weight != 0.0:
            return CheckResult("slaz_structure", False, "bit-0 run leaked into B")
        k1, khat1, _ = total_costs(out1.ledger)
        if khat1 != 0.0:
            return CheckResult("slaz_structure", False, "bit-1 return Cost not exactly 0")
        a1_expected = math.cos(math.pi / (2 * m)) ** m
        worst = max(worst, abs(float(out0.final_state.amps[0].real) - a1_expected))
    reduction = run_slaz(0, 1, 1)
    worst = max(worst, abs(float(reduction.final_state.amps[0].real)))
    worst = max(worst, abs(block_weight(reduction.final_state, "A4") - 1.0))
    r1 = run_slaz(0, 32, 256).diagnostics["r1"]
    ratio = r1 / (math.pi ** 2 / (8 * 32))
    if not 0.7 < ratio < 1.3:
        return CheckResult("slaz_structure", False,
                           f"r1 far from pi^2/8M: ratio {ratio:.3f}")
    return _result("slaz_structure", worst, 1e-12)


def _check_slaz_asymptotics(rng) -> CheckResult:
    m, n = 16, 1024
    pair = run_pair(ProtocolConfig(ProtocolKind.SLAZ, rounds=n, outer=m))
    worst = 0.0
    for bit, out in ((0, pair.run0), (1, pair.run1)):
        q = total_costs(out.ledger)[2]
        worst = max(worst, abs(q / analysis.slaz_cost_formula(bit, m, n) - 1.0))
    worst = max(worst, abs(pair.delta_g01_states + 1.0))
    return _result("slaz_asymptotics_smoke", worst, 0.15, f" [at ({m},{n})]")


def _check_kernel_equivalence(rng) -> CheckResult:
    if not HAVE_CYTHON:
        return CheckResult("kernel_backend_equivalence", True,
                           "compiled backend not present; single-backend install")
    from ._kernels import _slaz_cy
    for bit in (0, 1):
        for m, n in ((1, 1), (3, 5), (4, 16)):
            a_py, send_py = _slaz_py.slaz_single(bit, m, n)
            a_cy, send_cy = _slaz_cy.slaz_single(bit, m, n)
            if not (np.array_equal(a_py, a_cy) and np.array_equal(send_py, send_cy)):
                return CheckResult("kernel_backend_equivalence", False,
                                   f"backends differ at bit={bit}, ({m},{n})")
    return CheckResult("kernel_backend_equivalence", True,
                       "python and cython kernels agree bit for bit")


def _check_formula_consistency(rng) -> CheckResult:
    worst = 0.0
    target = math.pi ** 4 / 32.0
    for m in (1, 3, 8, 32, 100):
        for n in (1, 7, 64, 4096):
            prod = analysis.slaz_cost_formula(0, m, n) * analysis.slaz_cost_formula(1, m, n)
            worst = max(worst, abs(prod - target))
            ratio = analysis.slaz_cost_formula(0, m, n) / analysis.slaz_cost_formula(1, m, n)
            worst = max(worst, abs(ratio / analysis.slaz_ratio_formula(m, n) - 1.0))
    return _result("formula_consistency", worst, 1e-12)


def _check_dd_constants(rng) -> CheckResult:
    worst = 0.0
    for n in (1, 2, 16, 512, 8192):
        ch, cl, sh, sl = _slaz_py._constants(1, n)[2:]
        c2 = dd_mul(ch, cl, ch, cl)
        s2 = dd_mul(sh, sl, sh, sl)
        total = dd_add(*c2, *s2)
        worst = max(worst, abs(total[0] - 1.0) + abs(total[1]))
    return _result("rotation_constant_norm_defect", worst, 1e-25)


_CHECKS = [
    _check_rotation_composition,
    _check_zeno_rotation_power,
    _check_zeno_cosine_approx,
    _check_swap_rotation_relation,
    _check_norm_and_locality,
    _check_gram_block_transfer,
    _check_gram_bit_dependent_cb,
    _check_simple_exactness,
    _check_simple_schedule_invariance,
    _check_oneway,
    _check_polarization,
    _check_ledger_identity,
    _check_bound_chain,
    _check_passivity,
    _check_slaz_structure,
    _check_slaz_asymptotics,
    _check_kernel_equivalence,
    _check_formula_consistency,
    _check_dd_constants,
]


def run_checks(seed: int = 0, inject_fault: str | None = None) -> list[CheckResult]:
    """Run every invariant check; deterministic for a fixed seed."""
    if inject_fault is not None and inject_fault not in FAULTS:
        raise ValueError(f"unknown fault {inject_fault!r}; choose from {FAULTS}")
    streams = np.random.SeedSequence(seed).spawn(len(_CHECKS) + 1)
    results = [
        _check_gram_conservation(np.random.default_rng(streams[0]), inject_fault)
    ]
    for check, stream in zip(_CHECKS, streams[1:]):
        results.append(check(np.random.default_rng(stream)))
    results.sort(key=lambda r: r.name)
    return results
