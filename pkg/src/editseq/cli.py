"""Command line entry point: ``mine``, ``predict`` and ``evaluate``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import random
import sys
from dataclasses import asdict, fields
from typing import Dict, List, Optional, Sequence, TextIO

from .ast import serialize
from .minilang import unparse
from .pipeline import Config, ConfigError, mine
from .rankpredict import Metrics, Outcome, ReplayContext, compute_metrics, ensemble_outcomes, predict
from .template import dump_patterns, load_patterns
from .trace import MalformedRecord, Trace, debounce, load_corpus, load_trace

__all__ = ["main", "cmd_mine", "cmd_predict", "cmd_evaluate", "read_config_file", "split_folds", "EXIT_OK", "EXIT_IO", "EXIT_MALFORMED", "EXIT_CONFIG"]

EXIT_OK = 0
EXIT_IO = 2
EXIT_MALFORMED = 3
EXIT_CONFIG = 4

log = logging.getLogger("editseq")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # bad flags are configuration errors, not I/O errors
    def error(self, message):
        raise _UsageError(message)


def read_config_file(path: str) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out


def _build_config(args) -> Config:
    values: Dict[str, object] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for f in fields(Config):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return Config.from_mapping(values)


def split_folds(trace_ids: Sequence[str], folds: int, seed: int) -> List[List[str]]:
    """Seeded shuffle of the ids cut into ``folds`` near-equal parts."""
    if folds > len(trace_ids):
        raise ConfigError(f"cannot split {len(trace_ids)} traces into {folds} folds")
    ids = sorted(trace_ids)
    random.Random(seed).shuffle(ids)
    size, extra = divmod(len(ids), folds)
    out, start = [], 0
    for k in range(folds):
        stop = start + size + (1 if k < extra else 0)
        out.append(ids[start:stop])
        start = stop
    return out


def _render(tree) -> str:
    try:
        return unparse(tree)
    except ValueError:
        return serialize(tree) + "\n"


# -- commands ------------------------------------------------------------------


def cmd_mine(corpus: str, config: Config, out: str, stdout: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    traces = load_corpus(corpus)
    result = mine(traces, config)
    dump_patterns(result.records(), out)
    print(
        f"traces={len(traces)} edits={len(result.graph.nodes)} sketches={len(result.sketches)} "
        f"candidates={len(result.candidates)} selected={len(result.selected)}",
        file=stdout,
    )
    return EXIT_OK


def cmd_predict(patterns: str, trace_file: str, at: int, config: Config, stdout: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    records = sorted(load_patterns(patterns), key=lambda r: r.rank)
    trace = load_trace(trace_file)
    if not 0 <= at < len(trace):
        raise ConfigError(f"--at {at} outside 0..{len(trace) - 1}")
    for r in records:
        tree = predict(r.esp, trace, at, config.max_diff_nodes)
        if tree is not None:
            stdout.write(_render(tree))
            return EXIT_OK
    print("no prediction", file=stdout)
    return EXIT_OK


def _fmt(x: float) -> str:
    return "   n/a" if math.isnan(x) else f"{100 * x:6.2f}"


def _mean(xs: Sequence[float]) -> float:
    xs = [x for x in xs if not math.isnan(x)]
    return sum(xs) / len(xs) if xs else math.nan


def _json_num(x: float):
    return None if math.isnan(x) else round(x, 6)


def cmd_evaluate(corpus: str, config: Config, out: Optional[str] = None, stdout: Optional[TextIO] = None, traces: Optional[List[Trace]] = None) -> int:
    """k-fold evaluation: mine on the training folds, replay on the held-out
    fold, compare against the (0, 0) baseline mined on the same folds."""
    stdout = stdout or sys.stdout
    if traces is None:
        traces = load_corpus(corpus)
    by_id = {t.trace_id: t for t in traces}
    folds = split_folds(list(by_id), config.folds, config.seed)
    records: List[dict] = []
    rows: List[Metrics] = []
    base_recall: List[float] = []
    lines = [
        f"{'fold':>4} {'train':>5} {'test':>4} {'pats':>4} {'base':>4} {'corr':>4} {'inc':>4} "
        f"{'prec':>6} {'recall':>6} {'F':>6}"
    ]
    for k, held in enumerate(folds):
        train = [by_id[i] for i in sorted(by_id) if i not in held]
        test = [debounce(by_id[i], config.debounce_ms) for i in held]
        result = mine(train, config)
        baseline = result.select(0.0, 0.0)
        ctx = ReplayContext(test, config.max_diff_nodes)
        selected = [c.esp for c in result.selected]
        base_esps = [c.esp for c in baseline]
        m = compute_metrics(selected, base_esps, test, config.gamma, ctx)
        rows.append(m)
        base_recall.append(compute_metrics(base_esps, base_esps, test, config.gamma, ctx).recall_rel)
        for (tid, vm), (rank, o) in sorted(ensemble_outcomes(selected, ctx).items()):
            records.append({"fold": k, "trace": tid, "m": vm, "pattern": rank + 1, "outcome": o.kind.value})
        lines.append(
            f"{k:>4} {len(train):>5} {len(test):>4} {len(selected):>4} {len(baseline):>4} {m.correct:>4} {m.incorrect:>4} "
            f"{_fmt(m.precision)} {_fmt(m.recall_rel)} {_fmt(m.f_gamma)}"
        )
    mean = {
        "precision": _mean([r.precision for r in rows]),
        "recall_rel": _mean([r.recall_rel for r in rows]),
        "f_gamma": _mean([r.f_gamma for r in rows]),
        "baseline_recall_rel": _mean([r for r in base_recall if not math.isnan(r)]),
    }
    lines.append(f"{'mean':>4} {'':>5} {'':>4} {'':>4} {'':>4} {'':>4} {'':>4} {_fmt(mean['precision'])} {_fmt(mean['recall_rel'])} {_fmt(mean['f_gamma'])}")
    lines.append(f"baseline (0, 0): recall_rel {_fmt(mean['baseline_recall_rel']).strip()}")
    stdout.write("\n".join(lines) + "\n")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
            for k, r in enumerate(rows):
                fh.write(json.dumps({"fold": k, "summary": {kk: _json_num(v) if isinstance(v, float) else v for kk, v in asdict(r).items()}}, sort_keys=True) + "\n")
            fh.write(json.dumps({"mean": {kk: _json_num(v) for kk, v in mean.items()}}, sort_keys=True) + "\n")
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int)
    common.add_argument("--support", type=int)
    common.add_argument("--debounce-ms", dest="debounce_ms", type=int)
    common.add_argument("--max-diff-nodes", dest="max_diff_nodes", type=int)
    common.add_argument("--t1", type=float)
    common.add_argument("--t2", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--folds", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--out", help="output path")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="editseq", description="Learn edit sequence patterns and predict the next edit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    m = sub.add_parser("mine", parents=[common], help="learn a ranked pattern file from a corpus")
    m.add_argument("corpus")
    pr = sub.add_parser("predict", parents=[common], help="predict the version after v_m")
    pr.add_argument("patterns")
    pr.add_argument("trace")
    pr.add_argument("--at", type=int, required=True, help="version index m")
    ev = sub.add_parser("evaluate", parents=[common], help="k-fold evaluation of a corpus")
    ev.add_argument("corpus")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except _UsageError as exc:
        print(f"editseq: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = _build_config(args)
        if args.command == "mine":
            if not args.out:
                raise ConfigError("mine needs --out")
            return cmd_mine(args.corpus, config, args.out)
        if args.command == "predict":
            return cmd_predict(args.patterns, args.trace, args.at, config)
        return cmd_evaluate(args.corpus, config, args.out)
    except MalformedRecord as exc:
        print(f"editseq: malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except ConfigError as exc:
        print(f"editseq: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"editseq: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # pattern files report bad records as ValueError("path:line: ...")
        print(f"editseq: malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
