"""Command-line entry point.

Exit codes: 0 success, 1 config or usage error, 2 verification failure,
3 runtime or transport error. Report files are written to a temporary file
next to the target and renamed into place, so a failed run never leaves a
partial report behind.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from .combine import Palette
from .config import RunConfig, load_config
from .decode import generate
from .dist import Vocabulary
from .errors import ConfigError, PaletteError
from .evaluation import (LINEAR, PALETTE, UNION, emit_report, fluctuation_band, run_conflict_eval,
                         run_strength_sweep, run_t_sweep, score_increase, spearman)
from .providers import dumps_ngram, read_corpus, train_ngram
from .verify import run_suite

log = logging.getLogger("palette")

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def write_atomic(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _emit(args, cfg: RunConfig | None, data: bytes) -> None:
    out = args.out or (cfg.output if cfg else None)
    if out is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        write_atomic(out, data)
        log.info("wrote %s", out)


def _fmt(args, cfg: RunConfig) -> str:
    return args.format or cfg.format


def _load(args) -> RunConfig:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    cfg = load_config(args.config)
    return cfg.with_seed(args.seed) if args.seed is not None else cfg


def _need_base(cfg: RunConfig) -> None:
    if cfg.base is None:
        raise ConfigError("config declares no base model")


def cmd_generate(args) -> int:
    cfg = _load(args)
    _need_base(cfg)
    strategy = Palette(cfg.palette_config())
    max_tokens = args.max_tokens or int(cfg.scenario.get("max_tokens", 12))
    trace = generate(strategy, cfg.prompt(), max_tokens, cfg.sampler)
    print(trace.text)
    steps = []
    for tok, dist, terms in zip(trace.tokens, trace.step_distributions, trace.step_terms):
        top = dist.probs.argsort(kind="stable")[::-1][:5]
        step = {"token": tok, "prob": float(dist.prob(tok)),
                "top": [[cfg.vocab.tokens[i], float(dist.probs[i])] for i in top]}
        if terms is not None:
            step.update(m1=terms.m1, m2=terms.m2, complement_active=terms.complement_active)
        steps.append(step)
        if args.trace:
            shown = " ".join(f"{t}={p:.3f}" for t, p in step["top"])
            print(f"  {tok:<12} p={step['prob']:.4f}  top: {shown}")
    if args.out or cfg.output:
        doc = {"prompt": list(trace.prompt), "tokens": trace.tokens, "seed": cfg.seed, "steps": steps}
        _emit(args, cfg, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = args.seed
    if seed is None and args.config:
        seed = load_config(args.config).seed
    results = run_suite(seed or 0)
    for r in results:
        print(r.line())
    if args.out:
        # no timings in the file, so identical runs give identical bytes
        text = "".join(r.line(timed=False) + "\n" for r in results)
        write_atomic(args.out, text.encode("utf-8"))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def _strategies(cfg: RunConfig, default):
    return tuple(cfg.scenario.get("strategies") or default)


def cmd_sweep_s(args) -> int:
    cfg = _load(args)
    _need_base(cfg)
    grid = cfg.scenario.get("s_grid")
    if not grid:
        raise ConfigError("scenario.s_grid is required for sweep-s")
    scenario = cfg.build_scenario()
    strategies = _strategies(cfg, (PALETTE,))
    rows = run_strength_sweep(scenario, grid, cfg.scenario.get("sweep_attribute"), strategies, jobs=args.jobs)
    _emit(args, cfg, emit_report(rows, _fmt(args, cfg)))
    for name in strategies:
        sub = [r for r in rows if r.strategy == name]
        if len(sub) > 1:
            rho = spearman([r.param for r in sub], [r.score_mean for r in sub])
            print(f"{name}: spearman(s, score) = {rho:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep_t(args) -> int:
    cfg = _load(args)
    _need_base(cfg)
    grid = cfg.scenario.get("t_grid")
    if not grid:
        raise ConfigError("scenario.t_grid is required for sweep-t")
    rows = run_t_sweep(cfg.build_scenario(), grid, jobs=args.jobs)
    _emit(args, cfg, emit_report(rows, _fmt(args, cfg)))
    if any(r.param == 0.0 for r in rows):
        print(f"fluctuation band: {fluctuation_band(rows):.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_conflict_eval(args) -> int:
    cfg = _load(args)
    _need_base(cfg)
    grid = cfg.scenario.get("ratio_grid")
    if not grid:
        raise ConfigError("scenario.ratio_grid is required for conflict-eval")
    sc = cfg.scenario
    strategies = _strategies(cfg, (PALETTE, LINEAR, UNION))
    table = run_conflict_eval(cfg.build_scenario(), grid, sc.get("overlapping"), sc.get("target"),
                              strategies, jobs=args.jobs)
    rows = list(table.rows)
    summary = [f"palette >= {name} on {frac:.0%} of ratios"
               for name, frac in ((LINEAR, table.palette_ge_linear), (UNION, table.palette_ge_union))
               if PALETTE in strategies and name in strategies]
    same_provider = sc.get("same_trend_provider")
    if same_provider:
        ovl = sc.get("overlapping") or cfg.attributes[0].id
        ovl = ovl if isinstance(ovl, str) else ovl[0]
        attrs = [replace(a, model=cfg.providers[same_provider]) if a.id == ovl else a for a in cfg.attributes]
        same = run_conflict_eval(cfg.build_scenario(attrs), grid, sc.get("overlapping"), sc.get("target"),
                                 strategies, jobs=args.jobs)
        rows += [replace(r, strategy=f"same_trend/{r.strategy}") for r in same.rows]
        for name in strategies:
            summary.append(f"{name}: same-trend score increase = {score_increase(same, table, name):+.4f}")
    _emit(args, cfg, emit_report(rows, _fmt(args, cfg)))
    for line in summary:
        print(line, file=sys.stderr)
    return EXIT_OK


def cmd_train_ngram(args) -> int:
    cfg = load_config(args.config) if args.config else None
    train = dict(cfg.train) if cfg else {}
    if args.vocab:
        vocab_path = Path(args.vocab)
        if not vocab_path.exists():
            raise ConfigError(f"vocabulary file not found: {vocab_path}")
        vocab = Vocabulary.from_file(vocab_path)
    elif cfg:
        vocab = cfg.vocab
    else:
        raise ConfigError("train-ngram needs --vocab or --config")
    corpus = args.corpus or train.get("corpus")
    if corpus is None:
        raise ConfigError("train-ngram needs --corpus or train.corpus in the config")
    if not Path(corpus).exists():
        raise ConfigError(f"corpus file not found: {corpus}")
    order = args.order or train.get("order", 2)
    add_k = args.add_k if args.add_k is not None else train.get("add_k", 1.0)
    try:
        model = train_ngram(read_corpus(corpus), vocab, order=int(order), add_k=float(add_k))
    except ValueError as exc:
        if isinstance(exc, PaletteError):
            raise
        raise ConfigError(str(exc)) from exc
    _emit(args, cfg, dumps_ngram(model).encode("utf-8"))
    return EXIT_OK


COMMANDS = {
    "generate": (cmd_generate, "sample one continuation of the scenario prompt"),
    "verify": (cmd_verify, "run the numerical verification suite"),
    "sweep-s": (cmd_sweep_s, "attribute strength sweep report"),
    "sweep-t": (cmd_sweep_t, "complementary weight t sweep report"),
    "conflict-eval": (cmd_conflict_eval, "overlapping-attribute comparison report"),
    "train-ngram": (cmd_train_ngram, "train and serialize an n-gram model"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML run config")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", help="output file (default: config 'output', else stdout)")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker threads for sweeps")
    common.add_argument("--format", choices=("csv", "json"), help="report format (default: config or csv)")

    parser = _Parser(prog="palette", description="Palette attribute combination toolkit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if name == "generate":
            p.add_argument("--max-tokens", type=int, help="override scenario.max_tokens")
            p.add_argument("--trace", action="store_true", help="print the top tokens of every step")
        if name == "train-ngram":
            p.add_argument("--vocab", help="vocabulary file (overrides the config)")
            p.add_argument("--corpus", help="training corpus, one sentence per line")
            p.add_argument("--order", type=int, help="n-gram order")
            p.add_argument("--add-k", type=float, dest="add_k", help="add-k smoothing constant")
    return parser


def _setup_logging() -> None:
    level = os.environ.get("PALETTE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("palette: error: a subcommand is required", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("palette: error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs < 1:
        print("palette: error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PaletteError, OSError, ValueError) as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
