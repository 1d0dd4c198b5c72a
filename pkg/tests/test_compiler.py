import numpy as np
import pytest

from spinref import compiler, cooling, machine
from spinref.compiler import (
    compile_phase1,
    compile_phase2_round,
    compile_phase3_round,
    equivalence_check,
    phase1_cost,
    phase2_round_cost,
    phase3_round_cost,
)
from spinref.machine import GATES, Gate


def all_inputs(width):
    xs = np.arange(2**width, dtype=np.int64)
    return ((xs[:, None] >> np.arange(width - 1, -1, -1)) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# phase 1


def test_phase1_single_equal_pair():
    prog = compile_phase1(2)
    assert list(prog.run(np.array([0, 0], dtype=np.uint8))) == [0]
    assert list(prog.run(np.array([1, 0], dtype=np.uint8))) == []


def test_phase1_matches_abstract_exhaustive_w8():
    prog = compile_phase1(8)
    report = equivalence_check(prog, lambda b: cooling.phase1_round(b)[0], 8)
    assert report.mode == "exhaustive" and report.cases == 256
    assert report.mismatches == 0


def test_phase1_matches_abstract_odd_width():
    prog = compile_phase1(7)
    report = equivalence_check(prog, lambda b: cooling.phase1_round(b)[0], 7)
    assert report.mismatches == 0


def test_phase1_random_w64():
    prog = compile_phase1(64)
    report = equivalence_check(
        prog, lambda b: cooling.phase1_round(b)[0], 64, samples=300, seed=1
    )
    assert report.mode == "sampled" and report.mismatches == 0


def test_phase1_cost_formula_and_envelope():
    for N in (2, 3, 8, 17, 64, 129, 512):
        assert compile_phase1(N).steps == phase1_cost(N)
    ratios = [phase1_cost(N) / N**2 for N in (8, 32, 128, 512)]
    assert max(ratios) < 1.0  # quadratic envelope


# ---------------------------------------------------------------------------
# phase 2


def test_phase2_bin_passthrough():
    prog = compile_phase2_round(3, 3)
    assert list(prog.run(np.array([0, 0, 0], dtype=np.uint8))) == [0, 0]
    assert list(prog.run(np.array([0, 1, 0], dtype=np.uint8))) == []


def test_phase2_matches_abstract_exhaustive_n12_k3():
    prog = compile_phase2_round(12, 3)
    report = equivalence_check(
        prog, lambda b: cooling.phase2_round(b, 3, seed=None)[0], 12
    )
    assert report.cases == 4096 and report.mismatches == 0


def test_phase2_matches_abstract_k5_with_remainder():
    prog = compile_phase2_round(13, 5)
    report = equivalence_check(
        prog, lambda b: cooling.phase2_round(b, 5, seed=None)[0], 13
    )
    assert report.mismatches == 0


def test_phase2_cost_formula():
    for N, k in ((3, 3), (12, 3), (13, 5), (64, 7), (100, 21)):
        assert compile_phase2_round(N, k).steps == phase2_round_cost(N, k)


def test_phase2_trace_data_independent():
    prog = compile_phase2_round(12, 3)
    rng = np.random.default_rng(0)
    base = None
    for _ in range(50):
        bits = rng.integers(0, 2, 12, dtype=np.uint8)
        st = machine.new_tape(bits)
        t = machine.trace(st, prog.instructions)
        if base is None:
            base = t
        assert t == base
        assert st.steps == prog.steps


# ---------------------------------------------------------------------------
# phase 3


def test_phase3_all_zero_block():
    prog = compile_phase3_round(10, 10)
    assert list(prog.run(np.zeros(10, dtype=np.uint8))) == [0] * 7


def test_phase3_matches_abstract_clean_headers():
    # exhaustive over the 2^5 payload suffixes with first three bits zero
    prog = compile_phase3_round(8, 8)
    for x in range(32):
        bits = np.zeros(8, dtype=np.uint8)
        for j in range(5):
            bits[3 + j] = (x >> (4 - j)) & 1
        got = prog.run(bits)
        want, _ = cooling.phase3_round(bits, 8)
        assert np.array_equal(got, want)


def test_phase3_counter_trace_inspection():
    # after the counting walk the register pair holds the payload ones mod 4
    k = 8
    prog = compile_phase3_round(k, k)
    # the counting walk ends right before the back-travel: find the first
    # Shift(-1) and cut there
    cut = next(
        i for i, ins in enumerate(prog.instructions) if isinstance(ins, machine.Shift)
        and ins.direction == -1
    )
    prefix = prog.instructions[:cut]
    for x in range(256):
        bits = np.array([(x >> (7 - j)) & 1 for j in range(8)], dtype=np.uint8)
        st = machine.new_tape(bits)
        machine.execute(st, prefix)
        m = int(bits[3:].sum()) % 4
        assert st.register == [m >> 1, m & 1]


def test_phase3_cost_formula():
    for N, k in ((4, 4), (10, 10), (20, 4), (100, 10), (27, 5)):
        assert compile_phase3_round(N, k).steps == phase3_round_cost(N, k)


def test_phase3_pass_flag_polarity():
    # the deposited third bit reads 1 = pass, matching count == 0 mod 4
    prog = compile_phase3_round(8, 8)
    clean = np.zeros(8, dtype=np.uint8)
    _, st = prog.run(clean, return_state=True)
    cells = st.logical()
    residue = cells[5 * 1 : 5 + 3]  # B=1: payload [0,5), residue [5,8)
    assert residue[2] == 1  # all-zero block passes


# ---------------------------------------------------------------------------
# program properties


def test_programs_are_reversible():
    rng = np.random.default_rng(3)
    for prog in (compile_phase1(10), compile_phase2_round(12, 3), compile_phase3_round(12, 4)):
        bits = rng.integers(0, 2, prog.n_cells, dtype=np.uint8)
        st = machine.new_tape(bits)
        snap = st.snapshot()
        machine.execute(st, prog.instructions)
        machine.execute(st, machine.invert_program(prog.instructions))
        assert st.snapshot() == snap


def test_register_clean_after_programs():
    rng = np.random.default_rng(4)
    for prog in (compile_phase1(9), compile_phase2_round(14, 7), compile_phase3_round(20, 5)):
        bits = rng.integers(0, 2, prog.n_cells, dtype=np.uint8)
        _, st = prog.run(bits, return_state=True)
        assert st.register == [0, 0]
        assert st.head == 0


def test_program_text_roundtrip():
    prog = compile_phase2_round(6, 3)
    text = prog.to_text()
    back = machine.text_to_program(text)
    assert back == prog.instructions


def test_equivalence_check_negative_control():
    prog = compile_phase1(6)
    # corrupt one gate: swap instead of the equality mark
    bad = [
        Gate(GATES["SWAP2"]) if isinstance(ins, Gate) and ins.gate.name == "EQMARK" and i == 0
        else ins
        for i, ins in enumerate(prog.instructions)
    ]
    broken = compiler.MachineProgram("broken", 6, bad, prog.live_map)
    report = equivalence_check(broken, lambda b: cooling.phase1_round(b)[0], 6)
    assert report.mismatches > 0
    assert report.witness is not None


def test_equivalence_identity_program():
    ident = compiler.MachineProgram(
        "id", 4, [], type("L", (), {"extract": staticmethod(lambda c: c)})()
    )
    report = equivalence_check(ident, lambda b: b, 4)
    assert report.mismatches == 0


def test_equivalence_check_validation():
    prog = compile_phase1(8)
    with pytest.raises(ValueError):
        equivalence_check(prog, lambda b: b, 10)
    with pytest.raises(ValueError):
        equivalence_check(compile_phase1(20), lambda b: b, 20)  # needs samples
