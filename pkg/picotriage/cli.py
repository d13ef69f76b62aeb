""" Command-line entry point.

    picotriage validate NET
    picotriage infer NET [--evidence FILE] [--query VAR ...]
    picotriage simulate SCENARIO [--seed N] [--sweep N] [--workers W]
    picotriage score ASSESSMENTS TRUTH [--baseline FILE]
    picotriage fuse EVENTS|- [--network NET] [--policy FILE] [--until T]
    picotriage bench NET [--updates N] [--check]

Exit status is 0 on success, 1 for usage errors, 2 for invalid input and 3
for runtime failures.
"""

import argparse
import logging
import sys
from typing import List, Optional

from . import __version__, jsonio
from .bench import DEFAULT_UPDATES, run_bench
from .deserializer import fromfile
from .document import compile
from .errors import (BadConfig, EvidenceError, FusionError, InferenceError, InvalidNetwork,
                     MalformedJson, NetworkError, ScoringError, TriageError)
from .evidence import EvidenceSet
from .fusion import FusionPolicy, FusionService, read_events, write_events, write_snapshots
from .inference import infer_marginals
from .scoring import (compare_metrics, compute_metrics, format_metrics, load_assessments,
                      load_truths, score_run)
from .sim import ScenarioConfig, emit_observations, generate_scenario, run_simulation, sweep
from .triage import (DEFAULT_NETWORK_FILE, FIELDS, GoldenWindow, band_annotations,
                     check_band_annotations, resolve_asset)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_RUNTIME = 3

INVALID_INPUT = (NetworkError, EvidenceError, FusionError, ScoringError, TriageError,
                 BadConfig, MalformedJson)


class UsageError(Exception):
    pass

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("{}: {}".format(self.prog, message))

class BudgetExceeded(Exception):
    pass


def _non_negative(text: str) -> float:
    value = float(text)
    if not value >= 0.0:
        raise argparse.ArgumentTypeError("must be non-negative, received {}".format(text))
    return value

def _seed(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("seeds are non-negative, received {}".format(text))
    return value

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1, received {}".format(text))
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="picotriage",
                     description="Casualty triage by Bayesian-network evidence fusion.")
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="log progress (-v) or debug detail (-vv) to stderr")
    common.add_argument("--format", choices=("text", "json"), default="text")

    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("validate", parents=[common], help="compile a .bnet network")
    p.add_argument("network")

    p = sub.add_parser("infer", parents=[common], help="print posterior marginals")
    p.add_argument("network")
    p.add_argument("--evidence", help="JSON file with 'hard' and 'virtual' evidence")
    p.add_argument("--query", nargs="+", help="variables to report (default all)")

    p = sub.add_parser("simulate", parents=[common], help="replay a scenario through both arms")
    p.add_argument("scenario")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--sweep", type=_positive_int, metavar="N", help="run N consecutive seeds")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--output", help="write the result here instead of stdout")
    p.add_argument("--events", help="also write the message stream as NDJSON")

    p = sub.add_parser("score", parents=[common], help="score assessments against truth")
    p.add_argument("assessments")
    p.add_argument("truth")
    p.add_argument("--baseline", help="baseline assessments for a side-by-side report")
    p.add_argument("--gw", type=_non_negative, default=300.0, help="golden window in seconds")
    p.add_argument("--gw-mode", choices=("snapshot", "first_report"), default="snapshot")

    p = sub.add_parser("fuse", parents=[common],
                       help="replay a message stream and emit assessment snapshots")
    p.add_argument("events", help="NDJSON message stream, '-' for standard input")
    p.add_argument("--network", default=DEFAULT_NETWORK_FILE)
    p.add_argument("--policy", help="JSON fusion policy")
    p.add_argument("--until", type=_non_negative, help="keep the cadence ticking up to this time")

    p = sub.add_parser("bench", parents=[common], help="measure posterior-update latency")
    p.add_argument("network")
    p.add_argument("--updates", type=_positive_int, default=DEFAULT_UPDATES)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--check", action="store_true", help="fail when a budget is exceeded")
    p.add_argument("--max-median-ms", type=_non_negative, default=1.0)
    p.add_argument("--max-rss-mb", type=_non_negative, default=100.0)
    return parser


def configure_logging(verbosity: int, stream=None) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, stream=stream or sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def _load_network(path):
    return compile(fromfile(resolve_asset(path)))

def _emit(args, out, obj, text):
    if args.format == "json":
        out.write(jsonio.dumps(obj, indent=2) + "\n")
    else:
        out.write(text + "\n")


def cmd_validate(args, out):
    net = _load_network(args.network)
    annotated = list(band_annotations(net))
    outside = check_band_annotations(net)
    for a in outside:
        logger.warning("%s row %s: %s entry %.3f outside the %s band",
                       a.child, ", ".join(a.key) or "-", a.state, a.probability, a.band.value)
    text = "{} variables, acyclic".format(len(net))
    text += "\n{} band annotations, {} outside their interval".format(len(annotated), len(outside))
    _emit(args, out, {"variables": len(net), "acyclic": True,
                      "treewidth": net.elimination_tree.width,
                      "band_annotations": len(annotated),
                      "band_violations": [{"child": a.child, "key": list(a.key),
                                           "band": a.band.value, "probability": a.probability}
                                          for a in outside]}, text)

def cmd_infer(args, out):
    net = _load_network(args.network)
    ev = None
    if args.evidence:
        ev = EvidenceSet.fromdict(net, jsonio.load(args.evidence))
    marginals = infer_marginals(net, ev, query=args.query)
    lines = []
    for name, dist in marginals.todict().items():
        lines.append("{:<22} {}".format(name, "  ".join(
            "{}={:.6f}".format(s, p) for s, p in dist.items())))
    _emit(args, out, marginals.todict(), "\n".join(lines))

def cmd_simulate(args, out):
    config = ScenarioConfig.fromdict(jsonio.load(resolve_asset(args.scenario)))
    seed = config.seed if args.seed is None else args.seed
    if args.sweep:
        summary = sweep(config, range(seed, seed + args.sweep), workers=args.workers)
        obj, text = summary.todict(), summary.totext()
    else:
        scenario = generate_scenario(config, seed)
        result = run_simulation(scenario)
        if args.events:
            with open(args.events, "w") as f:
                write_events(emit_observations(scenario), f)
        obj, text = result.todict(), result.totext()
    if args.output:
        with open(args.output, "w") as f:
            _emit(args, f, obj, text)
    else:
        _emit(args, out, obj, text)

def cmd_score(args, out):
    truths = load_truths(args.truth)
    gw = GoldenWindow(args.gw)
    fused = load_assessments(args.assessments)
    report = score_run(fused, truths, gw, args.gw_mode)
    metrics = compute_metrics(fused, truths)
    obj = {"scores": report.todict(), "metrics": metrics.todict()}
    sections = ["score {}".format(report.summary()), report.totext(), ""]
    baseline_metrics = None
    if args.baseline:
        baseline = load_assessments(args.baseline)
        baseline_report = score_run(baseline, truths, gw, args.gw_mode)
        baseline_metrics = compute_metrics(baseline, truths)
        obj["baseline"] = {"scores": baseline_report.todict(),
                           "metrics": baseline_metrics.todict()}
        obj["comparison"] = compare_metrics(baseline_metrics, metrics).todict()
        sections = ["baseline score {}".format(baseline_report.summary()), ""] + sections
    sections.append(format_metrics(metrics, baseline=baseline_metrics))
    _emit(args, out, obj, "\n".join(sections))

def _snapshot_line(a) -> str:
    return "{:>8.1f}  {:<12} {:<13} {}".format(
        a.timestamp, a.casualty_id, a.trigger,
        " ".join(a.label(f) or "-" for f in FIELDS))

def cmd_fuse(args, out):
    net = _load_network(args.network)
    policy = FusionPolicy()
    if args.policy:
        policy = FusionPolicy.fromdict(jsonio.load(args.policy))
    service = FusionService(net, policy)
    events = read_events(sys.stdin if args.events == "-" else args.events)
    snapshots = service.replay(events, until=args.until)
    if args.format == "json":
        n = write_snapshots(snapshots, out, flush=True)
    else:
        n = 0
        for snap in snapshots:
            out.write(_snapshot_line(snap.assessment) + "\n")
            n += 1
    logger.info("%d snapshots for %d casualties, %d stale messages dropped",
                n, len(service.registry), service.dropped)

def cmd_bench(args, out):
    net = _load_network(args.network)
    result = run_bench(net, updates=args.updates, seed=args.seed)
    _emit(args, out, result.todict(), result.totext())
    if args.check:
        failures = result.check(args.max_median_ms * 1e-3, args.max_rss_mb)
        if failures:
            raise BudgetExceeded("; ".join(failures))

COMMANDS = {
    "validate": cmd_validate,
    "infer": cmd_infer,
    "simulate": cmd_simulate,
    "score": cmd_score,
    "fuse": cmd_fuse,
    "bench": cmd_bench,
}


def _source(args):
    return getattr(args, "network", None) or getattr(args, "scenario", "")

def run_command(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    """ Run one subcommand and return its exit status. """
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        err.write("{}\n".format(e))
        return EXIT_USAGE
    configure_logging(args.verbose, err)
    try:
        COMMANDS[args.command](args, out)
    except InvalidNetwork as e:
        for error in e:
            err.write("{}:{}\n".format(_source(args), error))
        return EXIT_INVALID
    except NetworkError as e:
        if e.position is None:
            err.write("error: {}\n".format(e))
        else:
            err.write("{}:{}\n".format(_source(args), e))
        return EXIT_INVALID
    except INVALID_INPUT as e:
        err.write("error: {}\n".format(e))
        return EXIT_INVALID
    except (InferenceError, BudgetExceeded, OSError) as e:
        err.write("error: {}\n".format(e))
        return EXIT_RUNTIME
    return EXIT_OK

def main():
    sys.exit(run_command())
