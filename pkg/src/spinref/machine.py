"""Abstract cyclic-tape machine with a head-carried two-bit register.

The machine state is a ring of n classical bits plus a two-bit register
(y1, y2) that logically travels with the head.  Four primitive families are
supported, each costing exactly one step:

* ``shift``            -- move the head one cell around the ring (O(1) offset,
                          the data never moves),
* ``apply_head_gate``  -- a reversible gate of width 2..4 acting on
                          (cell[head], cell[head+1], y1, y2),
* ``measure_first``    -- read the bit currently under the head,
* ``ca_parallel_gate`` -- one synchronous pulse applying a width-2 gate to
                          every cell pair (l*k, l*k+1) in head-relative
                          coordinates,
* ``swap_register``    -- exchange y1 or y2 with the cell under the head.

All primitives are bijections on the global state, so any program built from
them is reversible.  Head-relative ("logical") index i refers to physical
cell (head + i) mod n; the bit "under the head" is logical index 0.

The step cost of a parallel pulse is charged as 1, the same as a single head
gate; nothing in the model pins this choice down, so it is a convention of
this simulator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ReversibleGate",
    "TapeState",
    "new_tape",
    "shift",
    "apply_head_gate",
    "measure_first",
    "ca_parallel_gate",
    "swap_register",
    "Shift",
    "Gate",
    "SwapReg",
    "Measure",
    "CA",
    "execute",
    "trace",
    "invert_program",
    "program_to_text",
    "text_to_program",
    "GATES",
]


# ---------------------------------------------------------------------------
# gates


class ReversibleGate:
    """A bijection on bit tuples of width 2, 3 or 4.

    ``table[i]`` is the output index for input index ``i``.  Bit tuples are
    packed most-significant-first: for width 2 the tuple (c1, c2) has index
    2*c1 + c2, width 3 appends y1, width 4 appends y1 then y2.
    """

    __slots__ = ("name", "width", "table")

    def __init__(self, name, width, table):
        if width not in (2, 3, 4):
            raise ValueError(f"gate width must be 2, 3 or 4, got {width}")
        table = tuple(int(t) for t in table)
        if sorted(table) != list(range(1 << width)):
            raise ValueError(f"gate table for {name!r} is not a permutation")
        self.name = name
        self.width = width
        self.table = table

    @classmethod
    def from_function(cls, name, width, fn):
        """Build a gate from ``fn`` mapping bit tuples to bit tuples."""
        table = []
        for i in range(1 << width):
            bits = tuple((i >> (width - 1 - j)) & 1 for j in range(width))
            out = fn(*bits)
            if len(out) != width:
                raise ValueError("gate function changed tuple width")
            table.append(sum(b << (width - 1 - j) for j, b in enumerate(out)))
        return cls(name, width, table)

    def inverse(self, name=None):
        inv = [0] * len(self.table)
        for i, o in enumerate(self.table):
            inv[o] = i
        return ReversibleGate(name or f"{self.name}^-1", self.width, inv)

    def is_wire_permutation(self):
        """True if the gate only rearranges its input bits (conserves ones)."""
        width = self.width
        for i, o in enumerate(self.table):
            if bin(i).count("1") != bin(o).count("1"):
                return False
        return True

    def __eq__(self, other):
        return (
            isinstance(other, ReversibleGate)
            and self.width == other.width
            and self.table == other.table
        )

    def __hash__(self):
        return hash((self.width, self.table))

    def __repr__(self):
        return f"ReversibleGate({self.name!r}, width={self.width})"


def _mk(name, width, fn):
    return ReversibleGate.from_function(name, width, fn)


# Standard gate zoo.  c1, c2 are the cells under and after the head.
GATES = {}
for _g in [
    _mk("ID2", 2, lambda c1, c2: (c1, c2)),
    _mk("SWAP2", 2, lambda c1, c2: (c2, c1)),
    # "are they equal?" marker: c1 <- c1 xor c2 (0 marks an equal pair)
    _mk("EQMARK", 2, lambda c1, c2: (c1 ^ c2, c2)),
    # CNOT with the first cell as control
    _mk("CNOT12", 2, lambda c1, c2: (c1, c2 ^ c1)),
    # parity accumulate: y1 ^= cell under head
    _mk("PAR3", 3, lambda c1, c2, y1: (c1, c2, y1 ^ c1)),
    # deposit: cell under head ^= y1
    _mk("XDEP3", 3, lambda c1, c2, y1: (c1 ^ y1, c2, y1)),
    # mod-4 counter (y1 high, y2 low) += cell under head
    _mk("INC4", 4, lambda c1, c2, y1, y2: (c1, c2, y1 ^ (c1 & y2), y2 ^ c1)),
    _mk("DEC4", 4, lambda c1, c2, y1, y2: (c1, c2, y1 ^ (c1 & (1 - y2)), y2 ^ c1)),
    # pass-flag deposit: cell under head ^= [counter == 0]
    _mk("DEP34", 4, lambda c1, c2, y1, y2: (c1 ^ (1 - (y1 | y2)), c2, y1, y2)),
]:
    GATES[_g.name] = _g


# ---------------------------------------------------------------------------
# state


@dataclass
class TapeState:
    """Ring of n bits, head offset, register (y1, y2) and a step counter."""

    cells: np.ndarray
    head: int = 0
    register: list = field(default_factory=lambda: [0, 0])
    steps: int = 0

    @property
    def n(self):
        return len(self.cells)

    def bit(self, i):
        """Bit at logical (head-relative) index i."""
        return int(self.cells[(self.head + i) % self.n])

    def logical(self):
        """The tape contents as seen from the head."""
        return np.roll(self.cells, -self.head)

    def copy(self):
        return TapeState(self.cells.copy(), self.head, list(self.register), self.steps)

    def snapshot(self):
        return (self.cells.tobytes(), self.head, tuple(self.register))


def new_tape(bits):
    """Fresh state: head at 0, register (0, 0), zero steps."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("tape needs a non-empty 1-d bit sequence")
    if arr.max(initial=0) > 1:
        raise ValueError("tape cells must be bits")
    return TapeState(arr.copy())


# ---------------------------------------------------------------------------
# primitives


def shift(state, direction):
    """Move the head one cell; direction is +1 or -1."""
    if direction not in (1, -1):
        raise ValueError("shift direction must be +1 or -1")
    state.head = (state.head + direction) % state.n
    state.steps += 1
    return state


def _gate_cells(state, width):
    n = state.n
    idx = [state.head % n, (state.head + 1) % n]
    return idx[: min(width, 2)]


def apply_head_gate(state, gate):
    """Apply ``gate`` to (cell[head], cell[head+1], y1, y2)[:width]."""
    w = gate.width
    n = state.n
    i0 = state.head % n
    i1 = (state.head + 1) % n
    bits = [int(state.cells[i0]), int(state.cells[i1])]
    if w >= 3:
        bits.append(state.register[0])
    if w == 4:
        bits.append(state.register[1])
    packed = 0
    for b in bits:
        packed = (packed << 1) | b
    out = gate.table[packed]
    outbits = [(out >> (w - 1 - j)) & 1 for j in range(w)]
    state.cells[i0] = outbits[0]
    state.cells[i1] = outbits[1]
    if w >= 3:
        state.register[0] = outbits[2]
    if w == 4:
        state.register[1] = outbits[3]
    state.steps += 1
    return state


def measure_first(state):
    """Read the bit under the head.  Costs one step; the state is unchanged."""
    state.steps += 1
    return int(state.cells[state.head % state.n])


def ca_parallel_gate(state, k, gate):
    """One pulse: apply a width-2 gate to every logical pair (l*k, l*k+1)."""
    if gate.width != 2:
        raise ValueError("parallel pulses take a width-2 gate")
    n = state.n
    if k <= 0 or n % k != 0:
        raise ValueError(f"spacing k={k} must divide n={n}")
    if k == 1:
        raise ValueError("spacing k=1 would address overlapping pairs")
    first = (state.head + np.arange(0, n, k)) % n
    second = (first + 1) % n
    a = state.cells[first].astype(np.int64)
    b = state.cells[second].astype(np.int64)
    table = np.asarray(gate.table)
    out = table[2 * a + b]
    state.cells[first] = (out >> 1) & 1
    state.cells[second] = out & 1
    state.steps += 1
    return state


def swap_register(state, which):
    """Exchange y_which (1 or 2) with the cell under the head."""
    if which not in (1, 2):
        raise ValueError("register index must be 1 or 2")
    i = state.head % state.n
    state.register[which - 1], state.cells[i] = (
        int(state.cells[i]),
        state.register[which - 1],
    )
    state.steps += 1
    return state


# ---------------------------------------------------------------------------
# programs: a program is a list of instruction tuples


@dataclass(frozen=True)
class Shift:
    direction: int


@dataclass(frozen=True)
class Gate:
    gate: ReversibleGate


@dataclass(frozen=True)
class SwapReg:
    which: int


@dataclass(frozen=True)
class Measure:
    pass


@dataclass(frozen=True)
class CA:
    k: int
    gate: ReversibleGate


def execute(state, program):
    """Run a program in place; returns the list of measurement results."""
    measured = []
    for ins in program:
        if isinstance(ins, Shift):
            shift(state, ins.direction)
        elif isinstance(ins, Gate):
            apply_head_gate(state, ins.gate)
        elif isinstance(ins, SwapReg):
            swap_register(state, ins.which)
        elif isinstance(ins, Measure):
            measured.append(measure_first(state))
        elif isinstance(ins, CA):
            ca_parallel_gate(state, ins.k, ins.gate)
        else:
            raise TypeError(f"unknown instruction {ins!r}")
    return measured


def trace(state, program):
    """Execute and record the (mnemonic, head) pair before each primitive."""
    out = []
    for ins in program:
        out.append((_mnemonic(ins), state.head))
        execute(state, [ins])
    return out


def invert_program(program):
    """The inverse primitive sequence; programs with measurements are refused."""
    inv = []
    for ins in reversed(program):
        if isinstance(ins, Shift):
            inv.append(Shift(-ins.direction))
        elif isinstance(ins, Gate):
            inv.append(Gate(ins.gate.inverse(_inverse_name(ins.gate.name))))
        elif isinstance(ins, SwapReg):
            inv.append(ins)
        elif isinstance(ins, CA):
            inv.append(CA(ins.k, ins.gate.inverse(_inverse_name(ins.gate.name))))
        else:
            raise ValueError("cannot invert a program containing measurements")
    return inv


_INVERSE_NAMES = {"INC4": "DEC4", "DEC4": "INC4"}


def _inverse_name(name):
    if name in _INVERSE_NAMES:
        return _INVERSE_NAMES[name]
    g = GATES.get(name)
    if g is not None and g.inverse("x").table == g.table:
        return name
    return f"{name}^-1"


def _mnemonic(ins):
    if isinstance(ins, Shift):
        return f"SHIFT {'+1' if ins.direction > 0 else '-1'}"
    if isinstance(ins, Gate):
        return f"GATE {ins.gate.name}"
    if isinstance(ins, SwapReg):
        return f"SWAPREG {ins.which}"
    if isinstance(ins, Measure):
        return "MEASURE"
    if isinstance(ins, CA):
        return f"CA {ins.k} {ins.gate.name}"
    raise TypeError(f"unknown instruction {ins!r}")


def program_to_text(program):
    """One primitive per line: SHIFT +1 | GATE <id> | SWAPREG 1|2 | MEASURE | CA <k> <id>."""
    return "\n".join(_mnemonic(ins) for ins in program) + ("\n" if program else "")


def text_to_program(text, gates=None):
    """Parse the line format back; ``gates`` supplies non-standard gate ids."""
    registry = dict(GATES)
    if gates:
        registry.update(gates)
    program = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        op = parts[0]
        try:
            if op == "SHIFT":
                program.append(Shift(1 if parts[1] == "+1" else -1))
            elif op == "GATE":
                program.append(Gate(registry[parts[1]]))
            elif op == "SWAPREG":
                program.append(SwapReg(int(parts[1])))
            elif op == "MEASURE":
                program.append(Measure())
            elif op == "CA":
                program.append(CA(int(parts[1]), registry[parts[2]]))
            else:
                raise KeyError(op)
        except (KeyError, IndexError) as exc:
            raise ValueError(f"bad trace line {lineno}: {raw!r}") from exc
    return program
