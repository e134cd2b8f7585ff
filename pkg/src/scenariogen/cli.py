"""Command line driver.

Every command that takes ``--out DIR`` also writes ``DIR/manifest.json``
recording the command, its parameters, the sha256 of each input and
output, and solver statistics.  ``replay`` reruns a manifest and reports
whether the outputs came out byte-identical.

Exit codes: 0 success, 1 usage, 2 parse error, 3 unsatisfiable model,
4 internal assertion.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import statistics
import sys
import time
from pathlib import Path

from .augment import EvolutionNotMonotone, ExhaustedRetries, augment_suite
from .citgen import GenConfig, coverage_report, generate_suite, valid_pair_universe
from .cnf import ModelTooLarge, from_dimacs
from .formats import (
    FIXTURES,
    ModelParseError,
    load_model,
    read_suite,
    suite_to_csv,
    suite_to_json,
    suite_to_switch_table,
)
from .model import DomainError, TestSuite
from .rearrange import creation_cost, rearrange
from .sat import Solver, SolverStats, UnsatisfiableModel

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_UNSAT, EXIT_INTERNAL = range(5)

SUITE_FILES = {"csv": "suite.csv", "switch": "suite_switch.txt", "json": "suite.json"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _input_hash(ref: str) -> str:
    if ref in FIXTURES and not Path(ref).exists():
        return "fixture:" + ref
    return _sha256(Path(ref))


def _serialize(suite: TestSuite, fmt: str) -> str:
    if fmt == "csv":
        return suite_to_csv(suite)
    if fmt == "switch":
        return suite_to_switch_table(suite)
    return suite_to_json(suite)


def _write_suite(suite: TestSuite, out: Path | None, fmt: str, always=("csv", "switch")) -> list[str]:
    """Write the suite files into ``out`` or print ``fmt`` to stdout."""
    if out is None:
        sys.stdout.write(_serialize(suite, fmt))
        return []
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for f in dict.fromkeys([*always, fmt]):
        (out / SUITE_FILES[f]).write_text(_serialize(suite, f), encoding="utf-8")
        names.append(SUITE_FILES[f])
    return names


def _write_manifest(out: Path, command: str, params: dict, inputs: dict, outputs: list[str], stats: dict):
    manifest = {
        "command": command,
        "seed": params.get("seed"),
        "parameters": params,
        "inputs": {k: _input_hash(v) for k, v in inputs.items()},
        "outputs": {name: _sha256(out / name) for name in outputs},
        "stats": stats,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _gen_config(a) -> GenConfig:
    return GenConfig(
        m_candidates=a.candidates,
        opt_core_dead=not a.no_opt_core_dead,
        opt_propagation=not a.no_opt_propagation,
        rng_seed=a.seed,
        threads=a.threads,
    )


# -- commands ---------------------------------------------------------------


def cmd_generate(a) -> int:
    model = load_model(a.model)
    suite, stats, _ = generate_suite(model, cfg=_gen_config(a))
    t0 = model.default_scenario()
    if a.rearrange:
        suite = rearrange(suite, t0)
    files = _write_suite(suite, a.out, a.format)
    summary = {"size": len(suite), "creation_cost": creation_cost(suite, t0), **stats.as_dict()}
    print(f"generated {summary['size']} scenarios, creation cost {summary['creation_cost']}", file=sys.stderr)
    if a.out is not None:
        params = {
            "model": a.model,
            "candidates": a.candidates,
            "seed": a.seed,
            "opt_core_dead": not a.no_opt_core_dead,
            "opt_propagation": not a.no_opt_propagation,
            "threads": a.threads,
            "format": a.format,
            "rearrange": a.rearrange,
        }
        _write_manifest(a.out, "generate", params, {"model": a.model}, files, summary)
    return EXIT_OK


def cmd_rearrange(a) -> int:
    model = load_model(a.model)
    suite = read_suite(a.suite, model)
    t0 = model.default_scenario()
    before = creation_cost(suite, t0)
    after_suite = rearrange(suite, t0)
    after = creation_cost(after_suite, t0)
    files = _write_suite(after_suite, a.out, a.format) if a.out is not None else []
    print(f"creation cost: {before} -> {after}")
    if a.out is not None:
        params = {"model": a.model, "suite": a.suite, "format": a.format}
        stats = {"cost_before": before, "cost_after": after, "size": len(suite)}
        _write_manifest(a.out, "rearrange", params, {"model": a.model, "suite": a.suite}, files, stats)
    return EXIT_OK


def cmd_augment(a) -> int:
    old_model = load_model(a.old_model)
    new_model = load_model(a.new_model)
    old_suite = read_suite(a.suite, old_model)
    rep = augment_suite(
        old_suite,
        new_model,
        strategy=a.strategy,
        window=a.window,
        partials=a.partials,
        m_candidates=a.candidates,
        rng_seed=a.seed,
        threads=a.threads,
    )
    report = {
        "updated": rep.updated_count,
        "dismissed": rep.dismissed_count,
        "generated": rep.generated_count,
        "size": len(rep.suite),
        "modification_cost": rep.modification_cost,
        "generation_cost": rep.generation_cost,
        "total_cost": rep.total_cost,
        "updates_per_partial": round(rep.updates_per_partial, 6),
    }
    if a.out is None:
        sys.stdout.write(_serialize(rep.suite, a.format))
    else:
        files = _write_suite(rep.suite, a.out, a.format)
        (a.out / "report.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        params = {
            "old_model": a.old_model,
            "new_model": a.new_model,
            "suite": a.suite,
            "strategy": a.strategy,
            "window": a.window,
            "partials": a.partials,
            "candidates": a.candidates,
            "seed": a.seed,
            "threads": a.threads,
            "format": a.format,
        }
        inputs = {"old_model": a.old_model, "new_model": a.new_model, "suite": a.suite}
        _write_manifest(a.out, "augment", params, inputs, files + ["report.json"], report)
    print(
        "updated {updated}, dismissed {dismissed}, generated {generated}; "
        "cost {modification_cost} + {generation_cost} = {total_cost}".format(**report),
        file=sys.stderr,
    )
    return EXIT_OK


BENCH_CONFIGS = {
    "none": (False, False),
    "opt1": (True, False),
    "opt2": (False, True),
    "both": (True, True),
}


def cmd_bench(a) -> int:
    model = load_model(a.model)
    universe = valid_pair_universe(model)
    print(f"{'config':<8}{'median_s':>10}{'size':>8}{'solve_calls':>13}{'propagations':>14}{'propagated':>12}")
    for name, (o1, o2) in BENCH_CONFIGS.items():
        times, sizes, total = [], [], SolverStats()
        for r in range(a.runs):
            cfg = GenConfig(a.candidates, o1, o2, a.seed + r, a.threads)
            start = time.perf_counter()
            suite, stats, _ = generate_suite(model, cfg=cfg, universe=universe)
            times.append(time.perf_counter() - start)
            sizes.append(len(suite))
            total = total + stats
        n = a.runs
        print(
            f"{name:<8}{statistics.median(times):>10.3f}{statistics.mean(sizes):>8.2f}"
            f"{total.solve_calls / n:>13.1f}{total.propagations / n:>14.1f}{total.propagated_values / n:>12.1f}"
        )
    return EXIT_OK


def cmd_coverage(a) -> int:
    model = load_model(a.model)
    suite = read_suite(a.suite, model)
    u = valid_pair_universe(model)
    covered, uncovered = coverage_report(suite, u)
    print(f"valid pairs {len(u)}, covered {covered}, uncovered {len(uncovered)}")
    if a.list:
        names = model.universe.names
        for p, q in uncovered:
            print(f"  {names[p >> 1]}={'A' if p & 1 else 'D'}  {names[q >> 1]}={'A' if q & 1 else 'D'}")
    return EXIT_OK


def cmd_sat_check(a) -> int:
    text = sys.stdin.read() if a.cnf == "-" else Path(a.cnf).read_text(encoding="utf-8")
    f = from_dimacs(text)
    r = Solver(f).solve()
    if r.sat:
        print("s SATISFIABLE")
        lits = [str(v + 1 if b else -(v + 1)) for v, b in enumerate(r.model)]
        print("v " + " ".join(lits + ["0"]))
    else:
        print("s UNSATISFIABLE")
    return EXIT_OK


def cmd_replay(a) -> int:
    manifest = json.loads(Path(a.manifest).read_text(encoding="utf-8"))
    command, params = manifest["command"], manifest["parameters"]
    if command not in REPLAYABLE:
        raise UsageError(f"cannot replay command {command!r}")
    for key, expected in manifest["inputs"].items():
        if _input_hash(params[key]) != expected:
            raise UsageError(f"input {params[key]!r} changed since the manifest was written")
    out = Path(a.out) if a.out else Path(a.manifest).parent
    argv = REPLAYABLE[command](params) + ["--out", str(out)]
    code = main(argv)
    if code != EXIT_OK:
        return code
    mismatched = [n for n, h in manifest["outputs"].items() if _sha256(out / n) != h]
    if mismatched:
        print("outputs differ: " + ", ".join(mismatched))
        return EXIT_INTERNAL
    print(f"replay identical: {len(manifest['outputs'])} outputs")
    return EXIT_OK


def _generate_argv(p):
    argv = ["generate", p["model"], "--candidates", str(p["candidates"]), "--seed", str(p["seed"])]
    argv += ["--threads", str(p["threads"]), "--format", p["format"]]
    if not p["opt_core_dead"]:
        argv.append("--no-opt-core-dead")
    if not p["opt_propagation"]:
        argv.append("--no-opt-propagation")
    if p["rearrange"]:
        argv.append("--rearrange")
    return argv


def _rearrange_argv(p):
    return ["rearrange", p["suite"], "--model", p["model"], "--format", p["format"]]


def _augment_argv(p):
    argv = ["augment", p["old_model"], p["new_model"], p["suite"], "--strategy", p["strategy"]]
    argv += ["--window", str(p["window"]), "--candidates", str(p["candidates"])]
    argv += ["--seed", str(p["seed"]), "--threads", str(p["threads"]), "--format", p["format"]]
    if p["partials"] is not None:
        argv += ["--partials", str(p["partials"])]
    return argv


REPLAYABLE = {"generate": _generate_argv, "rearrange": _rearrange_argv, "augment": _augment_argv}


# -- argument parsing -------------------------------------------------------


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scenariogen", description="Pairwise scenario generation for context-oriented models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, generation=True):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=sorted(SUITE_FILES), default="csv")
        sp.add_argument("--out", type=Path, help="output directory; a manifest is written there")
        if generation:
            sp.add_argument("--candidates", type=_positive, default=30, metavar="M")
            sp.add_argument("--threads", type=_positive, default=1)

    g = sub.add_parser("generate", help="build a pairwise suite for a model")
    g.add_argument("model", help="model file or bundled fixture name")
    common(g)
    g.add_argument("--no-opt-core-dead", action="store_true")
    g.add_argument("--no-opt-propagation", action="store_true")
    g.add_argument("--rearrange", action="store_true", help="reorder the suite to reduce context switches")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("rearrange", help="reorder a suite and report creation costs")
    r.add_argument("suite")
    r.add_argument("--model", required=True)
    common(r, generation=False)
    r.set_defaults(func=cmd_rearrange)

    au = sub.add_parser("augment", help="carry a suite over to an evolved model")
    au.add_argument("old_model")
    au.add_argument("new_model")
    au.add_argument("suite")
    common(au)
    au.add_argument("--strategy", choices=("sat", "partial"), default="partial")
    au.add_argument("--window", type=_positive, default=9, metavar="S")
    au.add_argument("--partials", type=_positive, default=None, metavar="m")
    au.set_defaults(func=cmd_augment)

    b = sub.add_parser("bench", help="time generation with each optimization setting")
    b.add_argument("model")
    b.add_argument("--runs", type=_positive, default=10)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--candidates", type=_positive, default=30, metavar="M")
    b.add_argument("--threads", type=_positive, default=1)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("coverage", help="count covered and uncovered valid pairs")
    c.add_argument("model")
    c.add_argument("suite")
    c.add_argument("--list", action="store_true", help="print the uncovered pairs")
    c.set_defaults(func=cmd_coverage)

    s = sub.add_parser("sat", help="solver utilities")
    ssub = s.add_subparsers(dest="sat_command", required=True, parser_class=_Parser)
    sc = ssub.add_parser("check", help="solve a DIMACS CNF file ('-' for stdin)")
    sc.add_argument("cnf")
    sc.set_defaults(func=cmd_sat_check)

    rp = sub.add_parser("replay", help="rerun a manifest and compare outputs")
    rp.add_argument("manifest")
    rp.add_argument("--out", help="write outputs here instead of next to the manifest")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelParseError, DomainError, EvolutionNotMonotone, json.JSONDecodeError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except UnsatisfiableModel as e:
        print(f"unsatisfiable model: {e}", file=sys.stderr)
        return EXIT_UNSAT
    except (UsageError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ModelTooLarge) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (AssertionError, ExhaustedRetries) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
