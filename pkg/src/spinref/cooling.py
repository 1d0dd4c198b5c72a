"""The three-phase initialization pipeline in abstract bit-vector form.

Phase 1 (pairing) doubles the bias per round: pairs with equal bits keep
their second bit, unequal pairs are discarded.  Phase 2 (parity binning)
XORs each bin into its first bit and passes the remainder of the bin only
on even parity.  Phase 3 (mod-4 counting) passes the payload of a block iff
the block's ones-count is divisible by four.  Round counts and bin sizes
are always driven by the deterministic analytic recurrences, never by
peeking at the data, so the machine realization stays oblivious; the
empirical trace is recorded for validation only.

Per-round step costs are charged from the compiled-program cost formulas
(single-tape canonical); the pipeline additionally accumulates totals for
the two-tape and two-tape-plus-cellular-automaton cost models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis, compiler, perms, thermal

__all__ = [
    "CoolingError",
    "Phase1Config",
    "Phase2Schedule",
    "RoundRecord",
    "choose_k",
    "phase1_round",
    "phase1_run",
    "phase2_round",
    "phase2_plan",
    "phase2_run",
    "phase3_round",
    "phase3_run",
    "block_partition",
    "block_size",
    "gather",
    "gather_perm",
    "pipeline",
    "PipelineResult",
]


class CoolingError(RuntimeError):
    """A phase could not proceed as planned (e.g. population exhausted)."""


@dataclass(frozen=True)
class Phase1Config:
    """Stop threshold for the pairing phase, optional fixed round count."""

    target_bias: float = 0.856
    rounds: int | None = None

    def __post_init__(self):
        if not 0.0 < self.target_bias < 1.0:
            raise ValueError("target bias must lie in (0, 1)")


@dataclass(frozen=True)
class Phase2Schedule:
    """Bin-size schedule for parity binning.

    Regions (right-inclusive) map the ones-fraction to a bin size; below the
    last boundary the power rule k = ceil(delta^-0.4) applies (always
    >= 33 there).  Once the rule would exceed n**alpha the remaining rounds
    use the whole interaction block (size n^(1/3)); rounds stop when the
    predicted ones-fraction falls to the halt level n^(-0.3).
    """

    alpha: float = 0.3
    regions: tuple = ((0.0188, 0.072, 3), (0.0027, 0.0188, 7), (0.000158, 0.0027, 21))
    power_boundary: float = 0.000158
    power_exponent: float = 0.4

    def __post_init__(self):
        if not 0.2 < self.alpha <= 0.32:
            raise ValueError("alpha must lie in (0.2, 0.32]")

    @property
    def delta_max(self):
        return max(hi for _, hi, _ in self.regions)


def choose_k(delta, schedule=None):
    """Bin size for the current (predicted) ones-fraction."""
    sch = schedule or Phase2Schedule()
    if not 0.0 < delta <= sch.delta_max:
        raise ValueError(f"delta={delta} outside (0, {sch.delta_max}]")
    for lo, hi, k in sch.regions:
        if lo < delta <= hi:
            return k
    # power rule; round before ceil so exact powers don't overshoot
    return math.ceil(round(delta**-sch.power_exponent, 9))


@dataclass
class RoundRecord:
    """Per-round trace entry; ``u`` counts bins holding exactly one 1."""

    phase: int
    round: int
    n_in: int
    n_out: int
    ones_in: int
    ones_out: int
    bias_emp: float
    bias_pred: float
    steps: int
    u: int | None = None
    k: int | None = None

    def __post_init__(self):
        if self.n_out > self.n_in or self.ones_out > self.ones_in or self.steps < 0:
            raise ValueError("inconsistent round record")


def _bias(ones, n):
    return 1.0 - 2.0 * ones / n if n else 1.0


# ---------------------------------------------------------------------------
# phase 1: pairing


def phase1_round(bits, bias_pred_in=None, round_index=0):
    """One pairing round: keep the second bit of each equal pair."""
    bits = np.asarray(bits, dtype=np.uint8)
    n_in = len(bits)
    m2 = n_in - (n_in % 2)
    a, b = bits[0:m2:2], bits[1:m2:2]
    out = b[a == b]
    eps_in = bias_pred_in if bias_pred_in is not None else _bias(int(bits.sum()), n_in)
    rec = RoundRecord(
        phase=1,
        round=round_index,
        n_in=n_in,
        n_out=len(out),
        ones_in=int(bits.sum()),
        ones_out=int(out.sum()),
        bias_emp=_bias(int(out.sum()), len(out)),
        bias_pred=analysis.bias_forward(min(max(eps_in, 0.0), 1.0)),
        steps=compiler.phase1_cost(n_in) if n_in >= 2 else 0,
    )
    return out, rec


def phase1_run(bits, config=None, eps0=None):
    """Pairing rounds until the predicted bias passes the target.

    The round count comes from the forward orbit of the declared input bias
    ``eps0`` (empirical estimate if omitted), matching the backward-orbit
    count; it never adapts to the data.  Raises ``CoolingError`` if the
    population runs out before the planned rounds finish.
    """
    cfg = config or Phase1Config()
    bits = np.asarray(bits, dtype=np.uint8)
    if eps0 is None:
        eps0 = max(_bias(int(bits.sum()), len(bits)), 1e-12)
    if eps0 >= cfg.target_bias and cfg.rounds is None:
        return bits, []
    rounds = cfg.rounds
    if rounds is None:
        rounds = len(analysis.forward_orbit(eps0, cfg.target_bias)) - 1
    records = []
    eps_pred = eps0
    for r in range(rounds):
        if len(bits) < 2:
            raise CoolingError(
                f"population exhausted after {r} pairing rounds; "
                f"{rounds - r} more needed to reach bias {cfg.target_bias}"
            )
        bits, rec = phase1_round(bits, bias_pred_in=eps_pred, round_index=r)
        eps_pred = rec.bias_pred
        records.append(rec)
    return bits, records


# ---------------------------------------------------------------------------
# phase 2: parity binning


def phase2_round(bits, k, seed=None, delta_pred_in=None, round_index=0):
    """One parity-binning round.

    With a seed the bits are shuffled into bins first (the rerandomization
    belongs to the experimenter); ``seed=None`` keeps fixed consecutive
    binning, which is what the compiled program implements.  Bin bits beyond
    the last full bin are discarded.
    """
    if k < 2:
        raise ValueError("bin size must be >= 2")
    bits = np.asarray(bits, dtype=np.uint8)
    n_in = len(bits)
    work = bits
    if seed is not None:
        rng = np.random.default_rng(seed)
        work = bits[rng.permutation(n_in)]
    m = (n_in // k) * k
    rows = work[:m].reshape(-1, k)
    parity = np.bitwise_xor.reduce(rows, axis=1) if m else np.zeros(0, dtype=np.uint8)
    out = rows[parity == 0][:, 1:].ravel()
    delta_in = (
        delta_pred_in
        if delta_pred_in is not None
        else (int(bits.sum()) / n_in if n_in else 0.0)
    )
    pred_out = analysis.phase2_delta_bound(min(delta_in, 0.5), k) if delta_in > 0 else 0.0
    rec = RoundRecord(
        phase=2,
        round=round_index,
        n_in=n_in,
        n_out=len(out),
        ones_in=int(bits.sum()),
        ones_out=int(out.sum()),
        bias_emp=_bias(int(out.sum()), len(out)),
        bias_pred=1.0 - 2.0 * pred_out,
        steps=compiler.phase2_round_cost(n_in, k) if n_in >= k else 0,
        u=int((rows.sum(axis=1) == 1).sum()) if m else 0,
        k=k,
    )
    return out, rec


@dataclass(frozen=True)
class PlannedRound:
    k: int
    delta_in: float
    delta_out: float


def phase2_plan(delta0, n, schedule=None):
    """Deterministic round plan: (k, predicted delta in/out) per round.

    Driven by the conservative one-round bound, starting from the declared
    input ones-fraction; halts when the prediction reaches n^(-0.3).
    """
    sch = schedule or Phase2Schedule()
    if not 0.0 <= delta0 <= sch.delta_max:
        raise ValueError(f"phase 2 needs input delta <= {sch.delta_max} (bias >= 0.856)")
    _, halt = analysis.phase2_stationary(n)
    k_cap = float(n) ** sch.alpha
    k_end = max(2, block_size(n))
    plan = []
    delta = delta0
    while delta > halt:
        if len(plan) >= 200:
            raise CoolingError("parity-bin plan failed to converge")
        k = choose_k(delta, sch)
        if k > k_cap:
            k = k_end
        delta_next = analysis.phase2_delta_bound(delta, k)
        plan.append(PlannedRound(k, delta, delta_next))
        delta = delta_next
    return plan


def phase2_run(bits, n, schedule=None, seed=0, delta0=None):
    """Run the planned parity-binning rounds with per-round reshuffles."""
    if delta0 is None:
        delta0 = (1.0 - 0.856) / 2.0
    plan = phase2_plan(delta0, n, schedule)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(len(plan)) if plan else []
    records = []
    for i, (pr, child) in enumerate(zip(plan, children)):
        bits, rec = phase2_round(
            bits, pr.k, seed=child, delta_pred_in=pr.delta_in, round_index=i
        )
        records.append(rec)
    return bits, records


# ---------------------------------------------------------------------------
# phase 3: mod-4 counting


def phase3_round(bits, k, delta_pred_in=None, bias_pred_out=None, round_index=0):
    """One mod-4 counting round on fixed consecutive blocks of size k.

    A block passes its payload (everything beyond the first three bits) iff
    its total ones-count is divisible by 4; the three header bits are always
    consumed.
    """
    if k < 4:
        raise ValueError("block size must be >= 4")
    bits = np.asarray(bits, dtype=np.uint8)
    n_in = len(bits)
    m = (n_in // k) * k
    rows = bits[:m].reshape(-1, k)
    keep = (rows.sum(axis=1) % 4) == 0 if m else np.zeros(0, dtype=bool)
    out = rows[keep][:, 3:].ravel() if m else bits[:0]
    if bias_pred_out is None:
        delta_in = (
            delta_pred_in
            if delta_pred_in is not None
            else (int(bits.sum()) / n_in if n_in else 0.0)
        )
        delta_in = min(delta_in, 0.999)
        pass_one = analysis.binomial_class_mass(delta_in, k - 1, 3, 4, start=3)
        floor = (1.0 - delta_in) ** k
        bias_pred_out = 1.0 - 2.0 * (
            delta_in * pass_one * k / ((k - 3) * floor) if floor else 0.0
        )
    rec = RoundRecord(
        phase=3,
        round=round_index,
        n_in=n_in,
        n_out=len(out),
        ones_in=int(bits.sum()),
        ones_out=int(out.sum()),
        bias_emp=_bias(int(out.sum()), len(out)),
        bias_pred=bias_pred_out,
        steps=compiler.phase3_round_cost(n_in, k) if n_in >= k else 0,
        k=k,
    )
    return out, rec


def phase3_run(bits, n, k=None, delta0=None):
    """Run the certified number of mod-4 rounds for population budget n."""
    if delta0 is None:
        delta0 = float(n) ** -0.3
    cert = analysis.phase3_certificate(n, delta0=delta0, k=k)
    records = []
    for r in range(cert.rounds):
        bits, rec = phase3_round(
            bits,
            cert.k,
            bias_pred_out=1.0 - 2.0 * cert.deltas[r + 1],
            round_index=r,
        )
        records.append(rec)
    return bits, records


# ---------------------------------------------------------------------------
# blocks and gathering


def block_size(n):
    """Interaction-block size: floor(n^(1/3))."""
    m = round(n ** (1.0 / 3.0))
    while m**3 > n:
        m -= 1
    while (m + 1) ** 3 <= n:
        m += 1
    return max(1, m)


def block_partition(bits, n=None):
    """Split into consecutive blocks of size floor(n^(1/3)); the final block
    may be short and is processed identically."""
    bits = np.asarray(bits, dtype=np.uint8)
    if n is None:
        n = len(bits)
    m = block_size(n)
    return [bits[i : i + m] for i in range(0, len(bits), m)]


def gather(blocks):
    """Concatenate the per-block clean segments into one prefix."""
    blocks = [np.asarray(b, dtype=np.uint8) for b in blocks]
    if not blocks:
        return np.zeros(0, dtype=np.uint8)
    return np.concatenate(blocks)


def gather_perm(live_mask):
    """Destination map packing live cells to the prefix, order preserved."""
    live_mask = np.asarray(live_mask, dtype=bool)
    n = len(live_mask)
    dest = np.empty(n, dtype=np.int64)
    live = np.flatnonzero(live_mask)
    dead = np.flatnonzero(~live_mask)
    dest[live] = np.arange(len(live))
    dest[dead] = len(live) + np.arange(len(dead))
    return dest


# ---------------------------------------------------------------------------
# the full pipeline


@dataclass
class PipelineResult:
    clean_bits: int
    bits: np.ndarray = field(repr=False)
    records: list = field(repr=False)
    ledger: analysis.YieldLedger
    steps: dict
    mode: str
    n: int
    seed: int


def _arch_init_cost(n, perm):
    inv = perms.count_inversions(perm)
    return {
        "single": n * n + inv,
        "two_tape": int(6 * n ** (4.0 / 3.0)),
        "two_tape_ca": n,
    }


def _arch_gather_cost(n):
    return {"single": n * n, "two_tape": 6 * n, "two_tape_ca": n}


def pipeline(model, n, seed, mode="binomial-direct", schedule=None, p1config=None,
             initial_perm=None):
    """End-to-end run: sample, (permute), cool in three phases, gather.

    ``binomial-direct`` skips the initial permutation and runs the phases on
    the whole population (valid when the source really is binomial).
    ``shuffled-blocks`` applies a spreading permutation (``stride`` by
    default, ``uniform`` on request), confines every phase to interaction
    blocks of size n^(1/3), and gathers the per-block clean segments at the
    end; this is the layout the correlated-source analysis needs.

    Step totals are tracked for three cost models: ``single`` (one tape),
    ``two_tape`` (linear-time terminal gather, n^(4/3) initial permutation)
    and ``two_tape_ca`` (block-parallel rounds, linear permutations).
    """
    if mode not in ("binomial-direct", "shuffled-blocks"):
        raise ValueError(f"unknown mode {mode!r}")
    cfg = p1config or Phase1Config()
    sch = schedule or Phase2Schedule()
    bits = thermal.sample(model, n, seed)

    steps = {"single": 0, "two_tape": 0, "two_tape_ca": 0}
    records = []

    # deterministic analytic drivers, from the declared model bias only
    eps0 = max(model.epsilon, 1e-12)
    if eps0 >= cfg.target_bias:
        orbit = [eps0]
    else:
        orbit = analysis.forward_orbit(eps0, cfg.target_bias)
    r1 = len(orbit) - 1
    # the orbit end sits within the threshold slack of the target; clamp the
    # declared phase-2 entry level to the schedule's region maximum
    delta_p2 = min((1.0 - orbit[-1]) / 2.0, sch.delta_max)
    plan2 = phase2_plan(delta_p2, n, sch)
    delta_p3 = plan2[-1].delta_out if plan2 else delta_p2
    cert3 = analysis.phase3_certificate(n, delta0=delta_p3)

    if mode == "binomial-direct":
        groups = [bits]
    else:
        which = initial_perm or "auto"
        if which == "auto":
            which = "stride" if round(n ** (1 / 3)) ** 3 == n else "uniform"
        if which == "stride":
            perm = thermal.stride_shuffle_perm(n)
        elif which == "uniform":
            perm = thermal.uniform_random_perm(n, np.random.SeedSequence((seed, 0xA11CE)))
        else:
            raise ValueError(f"unknown initial permutation {which!r}")
        for arch, c in _arch_init_cost(n, perm).items():
            steps[arch] += c
        bits = perms.apply_to(bits, perm)
        groups = block_partition(bits, n)

    ss2 = np.random.SeedSequence((seed, 0x5EED2))
    round2_rngs = [np.random.default_rng(c) for c in ss2.spawn(len(plan2))]

    def run_rounds(phase, plans, fn):
        nonlocal groups
        for i, plan in enumerate(plans):
            stats = {"n_in": 0, "n_out": 0, "ones_in": 0, "ones_out": 0, "u": 0}
            block_costs = []
            new_groups = []
            for g in groups:
                out, rec = fn(g, i, plan)
                new_groups.append(out)
                stats["n_in"] += rec.n_in
                stats["n_out"] += rec.n_out
                stats["ones_in"] += rec.ones_in
                stats["ones_out"] += rec.ones_out
                stats["u"] += rec.u or 0
                if rec.steps:
                    block_costs.append(rec.steps)
            groups = new_groups
            total = sum(block_costs) + n
            steps["single"] += total
            steps["two_tape"] += total
            steps["two_tape_ca"] += max(block_costs, default=0)
            records.append(
                RoundRecord(
                    phase=phase,
                    round=i,
                    n_in=stats["n_in"],
                    n_out=stats["n_out"],
                    ones_in=stats["ones_in"],
                    ones_out=stats["ones_out"],
                    bias_emp=_bias(stats["ones_out"], stats["n_out"]),
                    bias_pred=plan["bias_pred"],
                    steps=total,
                    u=stats["u"] if phase == 2 else None,
                    k=plan.get("k"),
                )
            )

    run_rounds(
        1,
        [{"bias_pred": orbit[r + 1]} for r in range(r1)],
        lambda g, i, plan: phase1_round(g, bias_pred_in=orbit[i], round_index=i),
    )
    run_rounds(
        2,
        [
            {"bias_pred": 1.0 - 2.0 * pr.delta_out, "k": pr.k}
            for pr in plan2
        ],
        lambda g, i, plan: phase2_round(
            g, plan2[i].k, seed=round2_rngs[i], delta_pred_in=plan2[i].delta_in,
            round_index=i,
        ),
    )
    run_rounds(
        3,
        [
            {"bias_pred": 1.0 - 2.0 * cert3.deltas[r + 1], "k": cert3.k}
            for r in range(cert3.rounds)
        ],
        lambda g, i, plan: phase3_round(
            g, cert3.k, bias_pred_out=1.0 - 2.0 * cert3.deltas[i + 1], round_index=i
        ),
    )

    clean = gather(groups)
    for arch, c in _arch_gather_cost(n).items():
        steps[arch] += c

    ledger = analysis.yield_ledger(eps0, n, len(clean))
    return PipelineResult(
        clean_bits=len(clean),
        bits=clean,
        records=records,
        ledger=ledger,
        steps=steps,
        mode=mode,
        n=n,
        seed=seed,
    )
