"""Command-line interface.

Subcommands: train-lm, generate, batch, evaluate, perturb, serve-check.
Generation defaults are p=0.75, k=100, tau=0.1, alpha=0.7, at most 30 new
tokens, stopping on a generated period.

Exit codes: 0 success, 1 usage or validation error, 2 backend failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources

from . import analysis, evaluation
from .core import GenerationConfig, RelationTaxonomy
from .decoder import GenerationRecord, generate, read_records, write_records
from .discourse import CueDiscourseBackend, CueLexicon, RemoteDiscourseBackend
from .errors import (BackendUnavailable, ConfigError, InconsistentBatch, MalformedName,
                     MalformedResponse, ProtocolMismatch, RelgenError, UnknownRelation)
from .lm import RemoteLmBackend, train_ngram
from .wire import WireClient

ENDPOINT_ENV = "RELGEN_ENDPOINT"

TESTED_RELATIONS = [
    "Cause_NS", "Condition_NS", "Contrast_NN", "Elaboration_NS",
    "Evaluation_NS", "Joint_NN", "Manner-Means_NS",
]


def _data_path(name: str) -> str:
    return str(resources.files("relgen.data").joinpath(name))


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=["desk", "remote"], default="desk")
    parser.add_argument("--endpoint", default=os.environ.get(ENDPOINT_ENV),
                        help=f"remote backend URL (default: ${ENDPOINT_ENV})")
    parser.add_argument("--corpus", default=_data_path("corpus.txt"),
                        help="training corpus for the desk language model")
    parser.add_argument("--lexicon", default=_data_path("lexicon.tsv"),
                        help="cue lexicon for the desk discourse backend")
    parser.add_argument("--order", type=int, default=2)
    parser.add_argument("--delta", type=float, default=0.01)


def _add_generation_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=float, default=0.75)
    parser.add_argument("--k", type=int, default=100)
    parser.add_argument("--tau", type=float, default=0.1)
    parser.add_argument("--alpha", type=float, default=0.7)
    parser.add_argument("--max-tokens", type=int, default=30)
    parser.add_argument("--no-period-stop", action="store_true")
    parser.add_argument("--prep-prompt", action="store_true",
                        help="strip trailing sentence punctuation and append a comma")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relgen",
                                     description="Relation-controlled text generation")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_train = sub.add_parser("train-lm", help="train and persist the desk n-gram model")
    p_train.add_argument("--corpus", default=_data_path("corpus.txt"))
    p_train.add_argument("--order", type=int, default=2)
    p_train.add_argument("--delta", type=float, default=0.01)
    p_train.add_argument("--out", required=True)

    p_gen = sub.add_parser("generate", help="generate one controlled completion")
    p_gen.add_argument("--prompt", required=True)
    p_gen.add_argument("--relation", required=True)
    _add_generation_flags(p_gen)
    _add_backend_flags(p_gen)

    p_batch = sub.add_parser("batch", help="generate records for prompts x relations (+ baseline)")
    p_batch.add_argument("--prompts", default=_data_path("prompts.txt"))
    p_batch.add_argument("--relations", default=",".join(TESTED_RELATIONS),
                         help="comma-separated relation names")
    p_batch.add_argument("--out", required=True)
    _add_generation_flags(p_batch)
    _add_backend_flags(p_batch)

    p_eval = sub.add_parser("evaluate", help="score a records file into a report")
    p_eval.add_argument("--records", required=True)
    p_eval.add_argument("--out", help="also write the report as CSV")
    _add_backend_flags(p_eval)

    p_perturb = sub.add_parser("perturb", help="export the per-step score-spread curve")
    p_perturb.add_argument("--records", required=True)
    p_perturb.add_argument("--out", required=True)

    p_check = sub.add_parser("serve-check", help="probe a remote endpoint's health")
    p_check.add_argument("--endpoint", default=os.environ.get(ENDPOINT_ENV))

    return parser


def _make_backends(args):
    if args.backend == "remote":
        if not args.endpoint:
            raise ConfigError(f"remote backend requires --endpoint or ${ENDPOINT_ENV}")
        return RemoteLmBackend(args.endpoint), RemoteDiscourseBackend(args.endpoint)
    taxonomy = RelationTaxonomy.default()
    with open(args.corpus, encoding="utf-8") as handle:
        lm = train_ngram(handle, order=args.order, delta=args.delta)
    parser = CueDiscourseBackend(CueLexicon.from_file(args.lexicon, taxonomy), taxonomy)
    return lm, parser


def _make_config(args) -> GenerationConfig:
    return GenerationConfig(
        p=args.p, k=args.k, tau=args.tau, alpha=args.alpha,
        max_new_tokens=args.max_tokens, stop_on_period=not args.no_period_stop,
    )


def _prep_prompt(text: str) -> str:
    stripped = text.rstrip()
    while stripped and stripped[-1] in ".!?,;:":
        stripped = stripped[:-1].rstrip()
    return stripped + " ,"


def _cmd_train_lm(args) -> int:
    with open(args.corpus, encoding="utf-8") as handle:
        model = train_ngram(handle, order=args.order, delta=args.delta)
    model.save(args.out)
    print(f"trained order-{model.order} model over {len(model.vocabulary)} entries -> {args.out}")
    return 0


def _cmd_generate(args) -> int:
    taxonomy = RelationTaxonomy.default()
    relation = taxonomy.parse(args.relation)
    lm, parser = _make_backends(args)
    prompt = _prep_prompt(args.prompt) if args.prep_prompt else args.prompt
    result = generate(lm, parser, prompt, relation, _make_config(args))
    print(result.completion_text)
    return 0


def _cmd_batch(args) -> int:
    taxonomy = RelationTaxonomy.default()
    relation_names = [name for name in args.relations.split(",") if name]
    relations = {name: taxonomy.parse(name) for name in relation_names}
    config = _make_config(args)
    baseline_config = GenerationConfig(
        p=config.p, k=config.k, tau=config.tau, alpha=0.0,
        max_new_tokens=config.max_new_tokens, stop_on_period=config.stop_on_period,
    )
    lm, parser = _make_backends(args)

    with open(args.prompts, encoding="utf-8") as handle:
        prompts = [line.strip() for line in handle if line.strip()]
    if not prompts:
        raise ConfigError(f"prompts file {args.prompts} is empty")
    if args.prep_prompt:
        prompts = [_prep_prompt(p) for p in prompts]

    # The uncontrolled baseline runs with alpha=0; its relation argument is
    # irrelevant to token choice, so any taxonomy entry serves.
    placeholder = taxonomy[0]
    records = []
    failures = 0
    for prompt in prompts:
        for name in relation_names:
            try:
                result = generate(lm, parser, prompt, relations[name], config)
                records.append(GenerationRecord(prompt, name, config, result))
            except RelgenError as exc:
                failures += 1
                print(f"error: {prompt!r} x {name}: {exc}", file=sys.stderr)
        try:
            result = generate(lm, parser, prompt, placeholder, baseline_config)
            records.append(GenerationRecord(prompt, None, baseline_config, result))
        except RelgenError as exc:
            failures += 1
            print(f"error: {prompt!r} x baseline: {exc}", file=sys.stderr)

    with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
        write_records(records, handle)
    print(f"wrote {len(records)} records to {args.out}"
          + (f" ({failures} failed rows skipped)" if failures else ""))
    return 0


def _cmd_evaluate(args) -> int:
    lm, parser = _make_backends(args)
    with open(args.records, encoding="utf-8") as handle:
        records = read_records(handle)
    report = evaluation.build_report(lm, parser, records)
    print(report.to_text())
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(report.to_csv())
    return 0


def _cmd_perturb(args) -> int:
    with open(args.records, encoding="utf-8") as handle:
        records = read_records(handle)
    curve = analysis.perturbation_curve([r.result for r in records])
    analysis.export_curve(curve, args.out)
    print(f"wrote {len(curve)}-step curve over {curve.n_generations} generations to {args.out}")
    return 0


def _cmd_serve_check(args) -> int:
    if not args.endpoint:
        raise ConfigError(f"serve-check requires --endpoint or ${ENDPOINT_ENV}")
    payload = WireClient(args.endpoint).health()
    print(f"protocol_version={payload.get('protocol_version')} "
          f"lm={payload.get('lm_model')} parser={payload.get('parser_model')}")
    return 0


_COMMANDS = {
    "train-lm": _cmd_train_lm,
    "generate": _cmd_generate,
    "batch": _cmd_batch,
    "evaluate": _cmd_evaluate,
    "perturb": _cmd_perturb,
    "serve-check": _cmd_serve_check,
}

_USAGE_ERRORS = (ConfigError, UnknownRelation, MalformedName, InconsistentBatch,
                 FileNotFoundError)
_RUNTIME_ERRORS = (BackendUnavailable, ProtocolMismatch, MalformedResponse)


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return _COMMANDS[args.subcommand](args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except _RUNTIME_ERRORS as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 2
    except RelgenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
