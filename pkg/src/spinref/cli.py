"""Batch experiment harness.

Subcommands:

* ``pipeline`` -- full end-to-end runs (round trace CSV + yield ledger JSON)
* ``phase``    -- a single phase on freshly sampled bits
* ``analyze``  -- recurrence orbits, schedules and constants, no sampling
* ``arch``     -- pulse-sequence permutation reports for a polymer ring
* ``equiv``    -- compiled-versus-abstract equivalence suites
* ``bench``    -- step-count scaling and fitted runtime exponents

Exit codes: 0 success, 1 validation error, 2 conformance/assertion failure.
Every emitted byte is a function of (config, seed); trial parallelism
(``--jobs``) merges results in seed order so it never changes output bytes.
``SPINREF_SEED`` provides the default seed.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, compiler, cooling, polymer, reports, thermal

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFORMANCE = 2


def _default_seed():
    try:
        return int(os.environ.get("SPINREF_SEED", "0"))
    except ValueError:
        return 0


def _build_parser():
    ap = argparse.ArgumentParser(prog="spinref", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--model", choices=["binomial", "markov"], default=None)
        p.add_argument("--ell", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--target-bias", dest="target_bias", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--config", type=str, default=None)
        return p

    common(sub.add_parser("pipeline", help="full cooling run")).add_argument(
        "--mode", choices=["binomial-direct", "shuffled-blocks"], default=None
    )
    pp = sub.add_parser("phase", help="run a single phase")
    common(pp)
    pp.add_argument("which", type=int, choices=[1, 2, 3])
    common(sub.add_parser("analyze", help="orbits, schedules, constants"))
    pa = sub.add_parser("arch", help="pulse-permutation verification")
    common(pa)
    pa.add_argument("--pattern", type=str, default="ABC")
    pa.add_argument("--periods", type=int, default=3)
    common(sub.add_parser("equiv", help="compiled-vs-abstract suites"))
    pb = sub.add_parser("bench", help="runtime-exponent fits")
    common(pb)
    pb.add_argument("--sizes", type=str, default=None, help="comma list, default 3^6..3^9")
    pb.add_argument("--tol", type=float, default=0.15)
    return ap


_DEFAULTS = {
    "n": 1_000_000,
    "epsilon": 0.25,
    "model": "binomial",
    "ell": 10,
    "trials": 1,
    "target_bias": 0.856,
    "alpha": 0.3,
    "format": "csv",
    "out": ".",
    "jobs": 1,
    "mode": "binomial-direct",
}


def _resolve(args):
    """Config-file values fill unset flags; explicit flags always win."""
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ValueError("config file must hold a JSON object")
    merged = argparse.Namespace(**vars(args))
    for key, hard in _DEFAULTS.items():
        if getattr(merged, key, None) is None:
            setattr(merged, key, cfg.get(key, hard))
    if merged.seed is None:
        merged.seed = int(cfg.get("seed", _default_seed()))
    if merged.n < 1:
        raise ValueError("--n must be >= 1")
    if merged.trials < 1:
        raise ValueError("--trials must be >= 1")
    if merged.jobs < 1:
        raise ValueError("--jobs must be >= 1")
    return merged


def _model(args):
    if args.model == "binomial":
        return thermal.BiasModel("binomial", args.epsilon)
    return thermal.BiasModel("markov", args.epsilon, ell=args.ell)


def _records_payload(records, fmt, outdir, stem):
    if fmt == "json":
        rows = [
            {
                "phase": r.phase,
                "round": r.round,
                "n_in": r.n_in,
                "n_out": r.n_out,
                "ones_in": r.ones_in,
                "ones_out": r.ones_out,
                "bias_emp": r.bias_emp,
                "bias_pred": r.bias_pred,
                "steps": r.steps,
            }
            for r in records
        ]
        reports.write_text(outdir / f"{stem}.json", reports.to_json(rows))
    else:
        reports.write_text(outdir / f"{stem}.csv", reports.records_to_csv(records))


def _pipeline_trial(payload):
    kind, eps, ell, n, seed, mode, target, alpha = payload
    model = (
        thermal.BiasModel("binomial", eps)
        if kind == "binomial"
        else thermal.BiasModel("markov", eps, ell=ell)
    )
    res = cooling.pipeline(
        model,
        n,
        seed,
        mode=mode,
        p1config=cooling.Phase1Config(target_bias=target),
        schedule=cooling.Phase2Schedule(alpha=alpha),
    )
    return {
        "seed": seed,
        "clean_bits": res.clean_bits,
        "ones_out": int(res.bits.sum()),
        "steps": res.steps,
        "ledger": res.ledger.as_dict(),
        "records": res.records,
    }


def _map_trials(fn, payloads, jobs):
    if jobs <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with multiprocessing.Pool(processes=min(jobs, len(payloads))) as pool:
        return pool.map(fn, payloads)


def _cmd_pipeline(args, outdir):
    payloads = [
        (args.model, args.epsilon, args.ell, args.n, args.seed + t, args.mode,
         args.target_bias, args.alpha)
        for t in range(args.trials)
    ]
    results = _map_trials(_pipeline_trial, payloads, args.jobs)
    _records_payload(results[0]["records"], args.format, outdir, "rounds")
    summary = {
        "config": {
            "model": args.model,
            "epsilon": args.epsilon,
            "ell": args.ell if args.model == "markov" else None,
            "n": args.n,
            "seed": args.seed,
            "trials": args.trials,
            "mode": args.mode,
        },
        "trials": [
            {k: r[k] for k in ("seed", "clean_bits", "ones_out", "steps")}
            for r in results
        ],
        "ledger": results[0]["ledger"],
    }
    reports.write_text(outdir / "ledger.json", reports.to_json(summary))
    ok = all(
        r["ledger"]["within_entropy_cap"] if i == 0 else True
        for i, r in enumerate(results)
    ) and all(r["clean_bits"] <= results[0]["ledger"]["entropy_cap"] for r in results)
    return EXIT_OK if ok else EXIT_CONFORMANCE


def _cmd_phase(args, outdir):
    model = _model(args)
    bits = thermal.sample(model, args.n, args.seed)
    if args.which == 1:
        out, recs = cooling.phase1_run(
            bits, cooling.Phase1Config(target_bias=args.target_bias), eps0=args.epsilon
        )
    elif args.which == 2:
        out, recs = cooling.phase2_run(
            bits, args.n, cooling.Phase2Schedule(alpha=args.alpha), seed=args.seed
        )
    else:
        out, recs = cooling.phase3_run(bits, args.n)
    _records_payload(recs, args.format, outdir, f"phase{args.which}_rounds")
    summary = {
        "n_in": int(args.n),
        "n_out": int(len(out)),
        "ones_out": int(out.sum()),
        "rounds": len(recs),
    }
    reports.write_text(outdir / f"phase{args.which}_summary.json", reports.to_json(summary))
    return EXIT_OK


def _cmd_analyze(args, outdir):
    orbit = analysis.forward_orbit(args.epsilon, args.target_bias)
    reports.write_text(outdir / "bias_orbit.csv", reports.orbit_to_csv("epsilon", orbit))
    back = analysis.backward_orbit(args.target_bias, max(len(orbit) - 1, 7))
    reports.write_text(outdir / "bias_orbit_backward.csv", reports.orbit_to_csv("epsilon", back))
    delta0 = min((1.0 - orbit[-1]) / 2.0, cooling.Phase2Schedule().delta_max)
    plan = cooling.phase2_plan(delta0, args.n, cooling.Phase2Schedule(alpha=args.alpha))
    reports.write_text(
        outdir / "parity_plan.csv",
        reports.orbit_to_csv("delta", [delta0] + [p.delta_out for p in plan]),
    )
    cert = analysis.phase3_certificate(args.n, delta0=plan[-1].delta_out if plan else delta0)
    payload = {
        "epsilon": args.epsilon,
        "target_bias": args.target_bias,
        "phase1_rounds": len(orbit) - 1,
        "phase1_overhead_sq": analysis.phase1_overhead(args.epsilon, args.target_bias) ** 2,
        "phase2_plan": [
            {"k": p.k, "delta_in": p.delta_in, "delta_out": p.delta_out} for p in plan
        ],
        "phase3_rounds": cert.rounds,
        "phase3_final_delta": cert.final_delta,
        "phase3_loss_factors": cert.loss_factors,
        "ledger_constant": analysis.ledger_constant(),
        "entropy_cap": analysis.entropy_cap(args.n, args.epsilon),
    }
    reports.write_text(outdir / "analysis.json", reports.to_json(payload))
    return EXIT_OK


def _cmd_arch(args, outdir):
    pattern = tuple(args.pattern.upper())
    payload = {"pattern": "".join(pattern), "periods": args.periods}
    ok = True
    if pattern == ("A", "B", "C", "D"):
        spec = polymer.two_tape_spec(args.periods)
        perm = polymer.induced_permutation(spec, polymer.two_tape_rotate_seq())
        A, C = spec.positions_of("A"), spec.positions_of("C")
        fixed = all(
            int(perm[i]) == i for i in spec.positions_of("B") + spec.positions_of("D")
        )
        adv = all(int(perm[A[i]]) == A[(i + 1) % args.periods] for i in range(args.periods))
        adv &= all(int(perm[C[i]]) == C[(i - 1) % args.periods] for i in range(args.periods))
        payload.update(
            {
                "sequence": polymer.sequence_to_text(polymer.two_tape_rotate_seq()).split(),
                "bd_fixed": fixed,
                "ac_advance_one_period": adv,
                "tracks": [len(c) for c in polymer.track_decomposition(perm)],
            }
        )
        ok = fixed and adv
    elif pattern == ("A", "B", "C"):
        spec = polymer.single_tape_spec(args.periods)
        rs = polymer.realize_abstract_shift(spec)
        n = spec.ring_length
        from . import perms as _perms

        acc = _perms.identity(n)
        for _ in range(n):
            acc = _perms.compose(acc, rs.permutation)
        closes = bool(np.array_equal(acc, _perms.identity(n)))
        payload.update(
            {
                "sequence": polymer.sequence_to_text(rs.sequence).split("\n")[:-1],
                "logical_order": [int(x) for x in rs.logical_order],
                "n_applications_identity": closes,
                "pulse_cost_per_shift": rs.pulse_cost,
            }
        )
        ok = closes
    else:
        raise ValueError("arch verification supports patterns ABC and ABCD")
    reports.write_text(outdir / "arch.json", reports.to_json(payload))
    return EXIT_OK if ok else EXIT_CONFORMANCE


def _cmd_equiv(args, outdir):
    suites = {}
    p1 = compiler.compile_phase1(8)
    suites["phase1_w8"] = compiler.equivalence_check(
        p1, lambda b: cooling.phase1_round(b)[0], 8
    ).as_dict()
    p1w = compiler.compile_phase1(64)
    suites["phase1_w64"] = compiler.equivalence_check(
        p1w, lambda b: cooling.phase1_round(b)[0], 64, samples=1000, seed=args.seed
    ).as_dict()
    p2 = compiler.compile_phase2_round(12, 3)
    suites["phase2_n12_k3"] = compiler.equivalence_check(
        p2, lambda b: cooling.phase2_round(b, 3, seed=None)[0], 12
    ).as_dict()
    reports.write_text(outdir / "equiv.json", reports.to_json(suites))
    bad = sum(s["mismatches"] for s in suites.values())
    return EXIT_OK if bad == 0 else EXIT_CONFORMANCE


def _cmd_bench(args, outdir):
    sizes = (
        [int(s) for s in args.sizes.split(",")]
        if args.sizes
        else [3**6, 3**7, 3**8, 3**9]
    )
    model = _model(args)
    totals = {"single": [], "two_tape": [], "two_tape_ca": []}
    for n in sizes:
        res = cooling.pipeline(model, n, args.seed, mode="shuffled-blocks")
        for a in totals:
            totals[a].append(res.steps[a])
    slopes = {a: analysis.runtime_exponent(a, sizes, totals[a]) for a in totals}
    payload = {
        "sizes": sizes,
        "steps": totals,
        "slopes": slopes,
        "expected": analysis.EXPECTED_SLOPES,
        "tolerance": args.tol,
    }
    reports.write_text(outdir / "bench.json", reports.to_json(payload))
    ok = all(
        abs(slopes[a] - analysis.EXPECTED_SLOPES[a]) <= args.tol for a in slopes
    )
    return EXIT_OK if ok else EXIT_CONFORMANCE


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        args = _resolve(args)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        handler = {
            "pipeline": _cmd_pipeline,
            "phase": _cmd_phase,
            "analyze": _cmd_analyze,
            "arch": _cmd_arch,
            "equiv": _cmd_equiv,
            "bench": _cmd_bench,
        }[args.command]
        return handler(args, outdir)
    except (ValueError, OSError, cooling.CoolingError) as exc:
        print(f"spinref: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
