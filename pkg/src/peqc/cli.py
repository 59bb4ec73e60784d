"""Command-line front end: check a pair, generate pairs, run benchmarks.

Exit codes: 0 equivalent (or inconclusive sampling), 1 not equivalent,
2 usage or parse error, 3 resource bound exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing
import sys
import time
from pathlib import Path

from . import benchgen, checker
from .circuit import Circuit, CircuitError, ParseError, pad_ancillas, parse
from .oracle import SizeLimitError
from .verdict import Verdict

EXIT_EQUIVALENT = 0
EXIT_NOT_EQUIVALENT = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _verdict_word(verdict: Verdict) -> str:
    if verdict.equivalent is True:
        return "equivalent"
    if verdict.equivalent is False:
        return "not_equivalent"
    return "inconclusive"


def _exit_code(verdict: Verdict) -> int:
    return EXIT_NOT_EQUIVALENT if verdict.equivalent is False else EXIT_EQUIVALENT


def _circuit_stats(c: Circuit) -> dict:
    return {"n": c.n, "d": c.d, "m": c.m, "k": c.k, "gates": c.gate_count}


def _report(verdict: Verdict, c1: Circuit, c2: Circuit) -> dict:
    cex = None
    if verdict.counterexample is not None:
        cex = {
            "psi": [[z.real, z.imag] for z in verdict.counterexample.psi],
            "outcome": verdict.counterexample.outcome,
            "probability_1": verdict.counterexample.probability_1,
            "probability_2": verdict.counterexample.probability_2,
        }
    return {
        "verdict": _verdict_word(verdict),
        "equivalent": verdict.equivalent,
        "algorithm": verdict.algorithm,
        "circuit_1": _circuit_stats(c1),
        "circuit_2": _circuit_stats(c2),
        "seconds": verdict.seconds,
        "peak_nodes": verdict.peak_nodes,
        "slice_width": verdict.slice_width,
        "details": verdict.details,
        "counterexample": cex,
    }


def _load_pair(args):
    text1 = Path(args.c1).read_text()
    text2 = Path(args.c2).read_text()
    c1 = parse(text1, args.data_qubits, args.measured_qubits)
    c2 = parse(text2, args.data_qubits, args.measured_qubits)
    if c1.k < c2.k:
        c1 = pad_ancillas(c1, c2.k - c1.k)
    elif c2.k < c1.k:
        c2 = pad_ancillas(c2, c1.k - c2.k)
    return c1, c2


def cmd_check(args) -> int:
    c1, c2 = _load_pair(args)
    mode = args.algorithm.replace("-", "_")
    verdict = checker.check(
        c1, c2, mode=mode,
        dense_bound=args.dense_bound,
        mc_samples=args.samples, mc_seed=args.seed,
        attach_witness=args.witness,
    )
    report = _report(verdict, c1, c2)
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2) + "\n")
    word = report["verdict"].replace("_", " ")
    print(
        f"{word}  [{verdict.algorithm}]  "
        f"n={c1.n} d={c1.d} m={c1.m} k={c1.k}  "
        f"gates={c1.gate_count}/{c2.gate_count}  "
        f"time={verdict.seconds:.3f}s peak_nodes={verdict.peak_nodes}"
    )
    if verdict.counterexample is not None:
        cx = verdict.counterexample
        print(
            f"counterexample: outcome {cx.outcome} with probabilities "
            f"{cx.probability_1:.6f} vs {cx.probability_2:.6f}"
        )
    return _exit_code(verdict)


def cmd_gen(args) -> int:
    cfg = benchgen.GenConfig(
        d=args.d, m=args.m, with_ancilla=args.ancilla, k=args.k, seed=args.seed
    )
    if args.kind == "pe":
        record = benchgen.build_pe_record(cfg)
    else:
        record = benchgen.build_te_record(cfg)
    manifest = benchgen.write_record(record, args.out)
    print(
        f"wrote {args.out}/c1.qasm ({manifest['gates_c1']} gates), "
        f"{args.out}/c2.qasm ({manifest['gates_c2']} gates), "
        f"{args.out}/manifest.json"
    )
    return EXIT_EQUIVALENT


def _bench_worker(conn, d, m, ancilla, seed):
    try:
        cfg = benchgen.GenConfig(d=d, m=m, with_ancilla=ancilla, seed=seed)
        record = benchgen.build_pe_record(cfg)
        start = time.perf_counter()
        verdict = checker.check(record.c1, record.c2, mode="auto")
        conn.send({
            "ok": True,
            "time": time.perf_counter() - start,
            "peak_nodes": verdict.peak_nodes,
            "equivalent": verdict.equivalent,
            "gates_c1": record.c1.gate_count,
            "gates_c2": record.c2.gate_count,
        })
    except Exception as exc:  # pragma: no cover - reported to the parent
        conn.send({"ok": False, "error": repr(exc)})
    finally:
        conn.close()


def cmd_bench(args) -> int:
    try:
        d_list = [int(v) for v in args.d_list.split(",") if v.strip()]
    except ValueError:
        print("bench: --d-list must be a comma-separated list of integers",
              file=sys.stderr)
        return EXIT_USAGE
    if not d_list or args.groups < 1:
        print("bench: need at least one d and one group", file=sys.stderr)
        return EXIT_USAGE
    ctx = multiprocessing.get_context("fork")
    rows = []
    for d in d_list:
        times, peaks, g1s, g2s = [], [], [], []
        timeouts = 0
        m = args.m if args.m is not None else max(1, d // 2)
        for group in range(args.groups):
            seed = args.seed + 100003 * group + 17 * d
            parent, child = ctx.Pipe()
            proc = ctx.Process(
                target=_bench_worker, args=(child, d, m, args.ancilla, seed)
            )
            proc.start()
            child.close()
            result = None
            if parent.poll(args.timeout_secs):
                result = parent.recv()
            proc.join(0.1)
            if proc.is_alive():
                proc.terminate()
                proc.join()
            parent.close()
            if result is None:
                timeouts += 1
                print(f"d={d} group={group}: TO (> {args.timeout_secs}s)")
                continue
            if not result.get("ok"):
                print(f"d={d} group={group}: error {result.get('error')}",
                      file=sys.stderr)
                return EXIT_USAGE
            if result["equivalent"] is not True:
                print(f"d={d} group={group}: UNEXPECTED not-equivalent verdict",
                      file=sys.stderr)
                return EXIT_USAGE
            times.append(result["time"])
            peaks.append(result["peak_nodes"])
            g1s.append(result["gates_c1"])
            g2s.append(result["gates_c2"])
            print(
                f"d={d} group={group}: equivalent in {result['time']:.3f}s "
                f"(peak {result['peak_nodes']} nodes)"
            )
        mean = lambda xs: (sum(xs) / len(xs)) if xs else 0.0
        rows.append({
            "d": d,
            "m": m,
            "gates_c1": round(mean(g1s), 2),
            "gates_c2": round(mean(g2s), 2),
            "time_s": round(mean(times), 4),
            "peak_nodes": round(mean(peaks), 1),
            "timeouts": timeouts,
        })
    header = ["d", "m", "gates_c1", "gates_c2", "time_s", "peak_nodes", "timeouts"]
    print(",".join(header))
    for row in rows:
        print(",".join(str(row[h]) for h in header))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=header)
            writer.writeheader()
            writer.writerows(rows)
    return EXIT_EQUIVALENT


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peqc",
        description="Partial equivalence checking of quantum circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="decide partial equivalence of two circuits")
    p_check.add_argument("--c1", required=True, help="first circuit file")
    p_check.add_argument("--c2", required=True, help="second circuit file")
    p_check.add_argument("--data-qubits", "-d", type=int, required=True)
    p_check.add_argument("--measured-qubits", "-m", type=int, required=True)
    p_check.add_argument(
        "--algorithm", default="auto",
        choices=["auto", "general", "zero-ancilla", "dense", "monte-carlo"],
    )
    p_check.add_argument("--json", help="write a JSON report to this path")
    p_check.add_argument("--witness", action="store_true",
                         help="attach a sampled counterexample to refutations")
    p_check.add_argument("--dense-bound", type=int, default=12)
    p_check.add_argument("--samples", type=int, default=100)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.set_defaults(func=cmd_check)

    p_gen = sub.add_parser("gen", help="generate an equivalent circuit pair")
    p_gen.add_argument("--kind", required=True, choices=["pe", "te"])
    p_gen.add_argument("--d", type=int, required=True)
    p_gen.add_argument("--m", type=int, default=None)
    p_gen.add_argument("--ancilla", action="store_true")
    p_gen.add_argument("--k", type=int, default=None)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.set_defaults(func=cmd_gen)

    p_bench = sub.add_parser("bench", help="generate, check and tabulate benchmarks")
    p_bench.add_argument("--d-list", required=True,
                         help="comma-separated data-qubit counts")
    p_bench.add_argument("--groups", type=int, default=20)
    p_bench.add_argument("--m", type=int, default=None)
    p_bench.add_argument("--timeout-secs", type=float, default=600.0)
    p_bench.add_argument("--ancilla", action="store_true")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--csv", help="write the summary table to this path")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ParseError, CircuitError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SizeLimitError as exc:
        print(f"resource bound: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
