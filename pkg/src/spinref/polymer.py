"""Pulse-driven polymer architectures: rings of typed spin sites.

A polymer is a ring built from repetitions of a short atom-type pattern
(e.g. ABC or ABCD).  A resonant pulse addressed at a type pair (X, Y)
transposes the contents of *every* adjacent site pair of those two types
simultaneously; head pulses act only on the distinguished pair of sites next
to the D atom.  This module computes the exact position permutation induced
by any pulse sequence, decomposes it into tracks (orbits), and builds the
rotation sequences used by the tape abstractions:

* the single-tape triple (A,B), (C,A), (B,C), which advances two disjoint
  tracks (the A/C sites and the B sites) rather than rotating the ring
  uniformly, and
* the two-tape sequence (A,B)(B,C)(A,B)(C,D)(A,D)(C,D) on ABCD rings, which
  advances the A and C contents by one period while fixing every B and D.

``realize_abstract_shift`` turns the single-tape triple into a true
single-cell cyclic shift of a declared logical cell ordering by adding a
head-local boundary fix-up (a head swap conjugated by (A,B) pulses).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import perms
from .machine import GATES, ReversibleGate

__all__ = [
    "PolymerSpec",
    "TypePulse",
    "HeadPulse",
    "PulseSequence",
    "single_tape_spec",
    "two_tape_spec",
    "ca_spec",
    "induced_permutation",
    "track_decomposition",
    "two_tape_rotate_seq",
    "transposition_as_cnots",
    "cnot_layer",
    "apply_sequence_to_bits",
    "realize_abstract_shift",
    "RealizedShift",
    "sequence_to_text",
    "text_to_sequence",
]


@dataclass(frozen=True)
class PolymerSpec:
    """Ring description: atom-type pattern, period count, special sites.

    ``d_site`` is the ring position of the C atom of the C-A boundary that
    the D atom adjoins (single-tape variant).  ``e_site`` and ``d_spacing``
    describe the cellular-automaton variant: a D atom every ``d_spacing``
    periods plus one distinguished E site.
    """

    pattern: tuple
    periods: int
    d_site: int | None = None
    e_site: int | None = None
    d_spacing: int | None = None

    def __post_init__(self):
        if self.periods < 1:
            raise ValueError("periods must be >= 1")
        if len(self.pattern) < 2:
            raise ValueError("pattern needs at least two atom types")
        n = self.ring_length
        if self.d_site is not None:
            d = self.d_site % n
            if not (self.type_at(d) == "C" and self.type_at(d + 1) == "A"):
                raise ValueError("d_site must sit at a C-A boundary")
        if self.d_spacing is not None and self.periods % self.d_spacing != 0:
            raise ValueError("d_spacing must divide the period count")

    @property
    def ring_length(self):
        return len(self.pattern) * self.periods

    def type_at(self, i):
        return self.pattern[i % self.ring_length % len(self.pattern)]

    def positions_of(self, t):
        base = [i for i, x in enumerate(self.pattern) if x == t]
        return [p * len(self.pattern) + b for p in range(self.periods) for b in base]


def single_tape_spec(periods):
    """ABC ring with the head (D atom) at the last C-A boundary."""
    return PolymerSpec(("A", "B", "C"), periods, d_site=3 * periods - 1)


def two_tape_spec(periods):
    return PolymerSpec(("A", "B", "C", "D"), periods)


def ca_spec(periods, d_spacing):
    """ABC ring with a D site every d_spacing periods and one E site."""
    return PolymerSpec(("A", "B", "C"), periods, e_site=0, d_spacing=d_spacing)


@dataclass(frozen=True)
class TypePulse:
    """Transpose every adjacent site pair whose types are {a, b}."""

    a: str
    b: str


@dataclass(frozen=True)
class HeadPulse:
    """Arbitrary width-2 gate on the D-adjacent pair (d_site, d_site+1)."""

    gate: ReversibleGate


class PulseSequence(list):
    """Ordered pulses; plain list with a constructor that normalizes tuples."""

    def __init__(self, pulses=()):
        super().__init__(
            TypePulse(*p) if isinstance(p, tuple) else p for p in pulses
        )


def _pulse_pairs(spec, pulse):
    """The disjoint position pairs a type pulse addresses on this ring."""
    n = spec.ring_length
    want = {pulse.a, pulse.b}
    if len(want) != 2:
        raise ValueError("a pulse needs two distinct types")
    pairs = []
    for i in range(n):
        j = (i + 1) % n
        if {spec.type_at(i), spec.type_at(j)} == want:
            pairs.append((i, j))
    if not pairs:
        raise ValueError(f"types {pulse.a}{pulse.b} are never adjacent in this ring")
    touched = [p for pair in pairs for p in pair]
    if len(set(touched)) != len(touched):
        raise ValueError(
            f"pulse ({pulse.a},{pulse.b}) addresses overlapping pairs on this ring"
        )
    return pairs


def _layer_perm(spec, pulse):
    n = spec.ring_length
    perm = np.arange(n)
    if isinstance(pulse, TypePulse):
        for i, j in _pulse_pairs(spec, pulse):
            perm[i], perm[j] = j, i
    elif isinstance(pulse, HeadPulse):
        if spec.d_site is None:
            raise ValueError("head pulses need a spec with a d_site")
        d = spec.d_site % n
        e = (d + 1) % n
        if pulse.gate == GATES["SWAP2"]:
            perm[d], perm[e] = e, d
        elif pulse.gate == GATES["ID2"]:
            pass
        else:
            raise ValueError(
                "only SWAP2/ID2 head pulses induce a position permutation; "
                "use apply_sequence_to_bits for general head gates"
            )
    else:
        raise TypeError(f"unknown pulse {pulse!r}")
    return perm


def induced_permutation(spec, seq):
    """Exact composite destination map of a pulse sequence.

    Content at ring position i ends at position perm[i] after applying the
    pulses in order.
    """
    perm = np.arange(spec.ring_length)
    for pulse in seq:
        perm = perms.compose(perm, _layer_perm(spec, pulse))
    return perm


def track_decomposition(perm):
    """Disjoint cycles of the induced permutation; each cycle is one track."""
    if not perms.is_permutation(perm):
        raise ValueError("not a permutation")
    return perms.cycles(perm)


def two_tape_rotate_seq():
    """The six-pulse sequence that advances the A/C tape and fixes B/D."""
    return PulseSequence(
        [("A", "B"), ("B", "C"), ("A", "B"), ("C", "D"), ("A", "D"), ("C", "D")]
    )


def transposition_as_cnots(pair):
    """Expand a transposition pulse into three directed CNOT pulses."""
    a, b = pair
    return [(a, b), (b, a), (a, b)]


def cnot_layer(spec, src, dst, bits):
    """Bit-level CNOT pulse: dst-site ^= src-site on every {src,dst} adjacency."""
    out = np.array(bits, dtype=np.uint8)
    for i, j in _pulse_pairs(spec, TypePulse(src, dst)):
        s, d = (i, j) if spec.type_at(i) == src else (j, i)
        out[d] ^= out[s]
    return out


def apply_sequence_to_bits(spec, seq, bits):
    """Run a pulse sequence on explicit ring contents (head gates allowed)."""
    out = np.array(bits, dtype=np.uint8)
    n = spec.ring_length
    if len(out) != n:
        raise ValueError("bit vector length must equal the ring length")
    for pulse in seq:
        if isinstance(pulse, TypePulse):
            for i, j in _pulse_pairs(spec, pulse):
                out[i], out[j] = out[j], out[i]
        elif isinstance(pulse, HeadPulse):
            d = spec.d_site % n
            e = (d + 1) % n
            packed = 2 * int(out[d]) + int(out[e])
            res = pulse.gate.table[packed]
            out[d], out[e] = (res >> 1) & 1, res & 1
        else:
            raise TypeError(f"unknown pulse {pulse!r}")
    return out


@dataclass
class RealizedShift:
    """A pulse sequence plus the logical cell ordering it cyclically shifts."""

    sequence: PulseSequence
    logical_order: np.ndarray
    permutation: np.ndarray = field(repr=False)

    @property
    def pulse_cost(self):
        return len(self.sequence)


def realize_abstract_shift(spec):
    """Build a true single-cell logical shift for a single-tape ABC ring.

    The bare rotation triple (A,B),(C,A),(B,C) advances two disjoint tracks:
    the A/C sites (one orbit of length 2*periods) and the B sites (length
    periods).  A single head swap at the D site, conjugated by (A,B) pulses,
    contributes the cross-track transposition that splices the two orbits
    into one ring of length 3*periods.  The returned ``logical_order`` lists
    ring positions L_0..L_{n-1} such that one application of ``sequence``
    moves the content of L_j to L_{j+1 mod n}.
    """
    if tuple(spec.pattern) != ("A", "B", "C") or spec.d_site is None:
        raise ValueError("realized shifts are built for single-tape ABC rings")
    n = spec.ring_length
    d = spec.d_site % n

    triple = PulseSequence([("A", "B"), ("C", "A"), ("B", "C")])
    sigma = induced_permutation(spec, triple)

    # orbit of the head C site under the bare rotation: all A and C sites
    track_ac = [d]
    j = int(sigma[d])
    while j != d:
        track_ac.append(j)
        j = int(sigma[j])
    # orbit of the B site two past the head: all B sites
    b0 = (d + 2) % n
    track_b = [b0]
    j = int(sigma[b0])
    while j != b0:
        track_b.append(j)
        j = int(sigma[j])
    logical = np.array(track_ac + track_b)

    fixup = PulseSequence([("A", "B"), HeadPulse(GATES["SWAP2"]), ("A", "B")])
    sequence = PulseSequence(list(triple) + list(fixup))
    perm = induced_permutation(spec, sequence)

    # sanity: the composite must advance the declared ordering by one
    expect = np.roll(logical, -1)
    if not np.array_equal(perm[logical], expect):
        raise AssertionError("realized shift does not advance the logical order")
    return RealizedShift(sequence, logical, perm)


def sequence_to_text(seq):
    """Serialize pulses one per line: P(A,B) or HEAD <gate-id>."""
    lines = []
    for pulse in seq:
        if isinstance(pulse, TypePulse):
            lines.append(f"P({pulse.a},{pulse.b})")
        elif isinstance(pulse, HeadPulse):
            lines.append(f"HEAD {pulse.gate.name}")
        else:
            raise TypeError(f"unknown pulse {pulse!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def text_to_sequence(text, gates=None):
    registry = dict(GATES)
    if gates:
        registry.update(gates)
    seq = PulseSequence()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            if line.startswith("P(") and line.endswith(")"):
                a, b = line[2:-1].split(",")
                seq.append(TypePulse(a.strip(), b.strip()))
            elif line.startswith("HEAD "):
                seq.append(HeadPulse(registry[line.split()[1]]))
            else:
                raise ValueError
        except (ValueError, KeyError) as exc:
            raise ValueError(f"bad pulse line {lineno}: {raw!r}") from exc
    return seq
