"""Command-line entry point: ``srlhop <command> [options]``.

Commands: synth, ingest, build-graph, train-selector, train-joint, predict,
evaluate, export-graph. Run ``srlhop <command> -h`` for options.

Hyperparameters resolve in this order, later wins: built-in defaults, the
hyperparameters stored in a loaded checkpoint, ``--config`` (a JSON object of
Hyper fields plus optional ``seed``), then individual flags.

Exit status is 0 on success, 1 on a runtime failure and 2 on a usage or
configuration error; failures also print one JSON line to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields

from .data import (
    SrlAnnotation,
    dumps_jsonl,
    from_hotpot,
    instances_text,
    iter_jsonl,
    read_instances,
    read_srl,
    srl_text,
)
from .embed import VocabEmbeddings, load_vectors
from .errors import ConfigError, SrlHopError
from .fileio import atomic_write, load_checkpoint, save_checkpoint
from .graph import build_graph, export_graph, graph_to_dict
from .metrics import evaluate_predictions, is_covered
from .model import ModelParams, ordered_gold_selection, select_paragraphs
from .synth import SynthConfig, audit, generate
from .train import Dataset, Hyper, predict, prediction_examples, train, train_selector

log = logging.getLogger("srlhop")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _hyper_flags() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("hyperparameters")
    g.add_argument("--config", help="JSON file of Hyper fields (and optional seed)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="default 0")
    for f in fields(Hyper):
        flag = "--" + f.name.replace("_", "-")
        if isinstance(f.default, bool):
            g.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction,
                           default=argparse.SUPPRESS, help=f"default {f.default}")
        else:
            g.add_argument(flag, dest=f.name, type=type(f.default), default=argparse.SUPPRESS,
                           metavar=type(f.default).__name__.upper(), help=f"default {f.default}")
    g.add_argument("--vectors", help="word vector text file (token v1 ... vD); OOV tokens are hashed")
    g.add_argument("--oov-seed", type=int, default=0)
    return p


def _resolve(args, base: dict | None = None) -> tuple:
    """Return ``(Hyper, seed)`` from defaults, checkpoint, config file and flags."""
    merged = dict(base or {})
    seed = merged.pop("seed", 0)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg = dict(cfg)
        seed = cfg.pop("seed", seed)
        merged.update(cfg)
    for f in fields(Hyper):
        if hasattr(args, f.name):
            merged[f.name] = getattr(args, f.name)
    seed = getattr(args, "seed", seed)
    try:
        h = Hyper.from_dict(merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    return h, seed


def _vectors(args, h: Hyper) -> VocabEmbeddings:
    if args.vectors:
        v = load_vectors(args.vectors, h.dim, args.oov_seed)
    else:
        v = VocabEmbeddings(h.dim, {}, args.oov_seed)
    return v


def _dataset(inst_path, srl_path, v) -> Dataset:
    instances = read_instances(inst_path)
    srl = read_srl(srl_path, instances) if srl_path else {i.id: SrlAnnotation() for i in instances}
    return Dataset(instances, srl, v)


def _load_model(path) -> tuple:
    P, manifest = load_checkpoint(path)
    return P, manifest.get("extra", {}).get("hyper", {}) | {"seed": manifest.get("extra", {}).get("seed", 0)}


def _save_model(P, path, h: Hyper, seed: int, stage: str) -> None:
    save_checkpoint(P, path, {"hyper": h.to_dict(), "seed": seed, "stage": stage})


def _emit(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


def _json_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _selection(args, P, inst, srl, v, h):
    if P is None:
        return ordered_gold_selection(inst, srl, h.settings)
    return select_paragraphs(P, inst, v, h.max_q_new)


def coverage(data: Dataset, h: Hyper) -> float:
    """Gold-selection graph coverage of a dataset."""
    if not data.instances:
        return 0.0
    s = h.settings
    hits = 0
    for inst in data.instances:
        srl = data.srl.get(inst.id, SrlAnnotation())
        g = build_graph(inst, srl, ordered_gold_selection(inst, srl, s), s.window, s.pmi_floor)
        hits += is_covered(inst, g, s.T)
    return hits / len(data.instances)


# ---------------------------------------------------------------------------
# commands


def cmd_synth(args) -> int:
    try:
        cfg = SynthConfig(args.n_instances, args.n_distractors, args.bridge_fraction, args.vocab_size,
                          args.seed, args.yesno_fraction)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    instances, srl = generate(cfg)
    summary = {"instances": len(instances)}
    if args.audit:
        summary["coverage"] = audit(instances, srl)["coverage"]
    if args.dev_size:
        if not 0 < args.dev_size < len(instances):
            raise ConfigError("--dev-size must be between 1 and n_instances - 1")
        cut = len(instances) - args.dev_size
        splits = {"train": instances[:cut], "dev": instances[cut:]}
    else:
        splits = {"data": instances}
    for name, part in splits.items():
        atomic_write(f"{args.out}/{name}.jsonl", instances_text(part))
        atomic_write(f"{args.out}/{name}.srl.jsonl", srl_text(part, srl))
        summary[name] = len(part)
    sys.stdout.write(_json_line(summary))
    return 0


def cmd_ingest(args) -> int:
    if args.hotpot:
        with open(args.hotpot, encoding="utf-8") as fh:
            text = fh.read()
        try:
            raw = json.loads(text)
            records = raw if isinstance(raw, list) else [raw]
        except json.JSONDecodeError:
            records = list(iter_jsonl(args.hotpot))
        instances = [from_hotpot(r) for r in records]
        srl = {i.id: SrlAnnotation() for i in instances}
    else:
        if not args.instances:
            raise ConfigError("ingest needs --instances or --hotpot")
        instances = read_instances(args.instances)
        srl = read_srl(args.srl, instances) if args.srl else {i.id: SrlAnnotation() for i in instances}
    if args.out_instances:
        atomic_write(args.out_instances, instances_text(instances))
    if args.out_srl:
        atomic_write(args.out_srl, srl_text(instances, srl))
    frames = sum(len(a) for a in srl.values())
    sys.stdout.write(_json_line({"instances": len(instances), "srl_frames": frames}))
    return 0


def cmd_build_graph(args) -> int:
    P, base = _load_model(args.model) if args.model else (None, None)
    h, _ = _resolve(args, base)
    v = _vectors(args, h)
    data = _dataset(args.instances, args.srl, v).prepared(h.max_paragraph_tokens)
    out = []
    for inst in data.instances:
        srl = data.srl[inst.id]
        sel = _selection(args, P, inst, srl, v, h)
        g = build_graph(inst, srl, sel, h.window, h.pmi_floor)
        out.append({"id": inst.id, "selected": list(sel), "covered": is_covered(inst, g, h.T),
                    "graph": graph_to_dict(g)})
    _emit(args.out, dumps_jsonl(out))
    return 0


def cmd_export_graph(args) -> int:
    P, base = _load_model(args.model) if args.model else (None, None)
    h, _ = _resolve(args, base)
    v = _vectors(args, h)
    data = _dataset(args.instances, args.srl, v).prepared(h.max_paragraph_tokens)
    by_id = {i.id: i for i in data.instances}
    iid = args.id if args.id is not None else (data.instances[0].id if data.instances else None)
    if iid not in by_id:
        raise ConfigError(f"no instance with id {iid!r}")
    inst = by_id[iid]
    sel = _selection(args, P, inst, data.srl[iid], v, h)
    g = build_graph(inst, data.srl[iid], sel, h.window, h.pmi_floor)
    _emit(args.out, export_graph(g, args.format))
    return 0


def cmd_train_selector(args) -> int:
    h, seed = _resolve(args)
    v = _vectors(args, h)
    data = _dataset(args.train, args.train_srl, v).prepared(h.max_paragraph_tokens)
    P = train_selector(ModelParams.init(h.dims, seed), data, h, seed)
    _save_model(P, args.out, h, seed, "selector")
    return 0


def cmd_train_joint(args) -> int:
    P, base = _load_model(args.selector) if args.selector else (None, None)
    h, seed = _resolve(args, base)
    if P is not None and P.dims != h.dims:
        raise ConfigError(f"selector checkpoint dims {P.dims} differ from requested {h.dims}")
    v = _vectors(args, h)
    train_data = _dataset(args.train, args.train_srl, v)
    dev = _dataset(args.dev, args.dev_srl, v) if args.dev else None
    P, history = train(train_data, h, seed, dev, params=P, train_selector_stage=P is None)
    _save_model(P, args.out, h, seed, "joint")
    if args.metrics:
        atomic_write(args.metrics, dumps_jsonl(history))
    return 0


def _predictions(P, h, data) -> list:
    examples = prediction_examples(P, data.prepared(h.max_paragraph_tokens), h)
    return [p.to_record() for p in predict(P, examples, h)]


def cmd_predict(args) -> int:
    P, base = _load_model(args.model)
    h, _ = _resolve(args, base)
    v = _vectors(args, h)
    data = _dataset(args.instances, args.srl, v)
    _emit(args.out, dumps_jsonl(_predictions(P, h, data)))
    return 0


def cmd_evaluate(args) -> int:
    if (args.model is None) == (args.predictions is None):
        raise ConfigError("evaluate needs exactly one of --model or --predictions")
    P, base = _load_model(args.model) if args.model else (None, None)
    h, _ = _resolve(args, base)
    v = _vectors(args, h)
    data = _dataset(args.instances, args.srl, v)
    if P is not None:
        records = _predictions(P, h, data)
    else:
        records = list(iter_jsonl(args.predictions))
    preds = {}
    for r in records:
        if not isinstance(r, dict) or "id" not in r or "answer" not in r or "supporting_facts" not in r:
            raise SrlHopError(f"prediction record missing id/answer/supporting_facts: {r!r:.80}")
        preds[r["id"]] = r
    prepared = data.prepared(h.max_paragraph_tokens)
    report = evaluate_predictions(preds, prepared.instances, coverage(prepared, h))
    _emit(args.out, _json_line(report.to_dict() | {"instances": len(prepared.instances)}))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    hyper = _hyper_flags()
    p = _Parser(prog="srlhop", description="Multi-hop QA over semantic-role graphs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("synth", help="generate a synthetic corpus")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--n-instances", type=int, default=250)
    s.add_argument("--n-distractors", type=int, default=2)
    s.add_argument("--bridge-fraction", type=float, default=0.5)
    s.add_argument("--yesno-fraction", type=float, default=0.5)
    s.add_argument("--vocab-size", type=int, default=5000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dev-size", type=int, default=0,
                   help="write train/dev splits with this many dev instances (last ones)")
    s.add_argument("--audit", action="store_true", help="fail unless every instance passes the audit")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ingest", help="validate and canonicalize instance/SRL files")
    s.add_argument("--instances")
    s.add_argument("--srl")
    s.add_argument("--hotpot", help="raw HotpotQA JSON (array or JSON lines) to convert")
    s.add_argument("--out-instances")
    s.add_argument("--out-srl")
    s.set_defaults(func=cmd_ingest)

    for name, func, hlp in (("build-graph", cmd_build_graph, "build graphs for every instance"),
                            ("export-graph", cmd_export_graph, "export one instance's graph")):
        s = sub.add_parser(name, parents=[hyper], help=hlp)
        s.add_argument("--instances", required=True)
        s.add_argument("--srl", required=True)
        s.add_argument("--model", help="select paragraphs with this checkpoint (default: gold)")
        s.add_argument("--out", default="-")
        if name == "export-graph":
            s.add_argument("--id", help="instance id (default: first)")
            s.add_argument("--format", choices=("dot", "structured"), default="dot")
        s.set_defaults(func=func)

    s = sub.add_parser("train-selector", parents=[hyper], help="stage 1: paragraph selector")
    s.add_argument("--train", required=True)
    s.add_argument("--train-srl")
    s.add_argument("--out", required=True, help="checkpoint path")
    s.set_defaults(func=cmd_train_selector)

    s = sub.add_parser("train-joint", parents=[hyper], help="stage 2 (runs stage 1 unless --selector)")
    s.add_argument("--train", required=True)
    s.add_argument("--train-srl", required=True)
    s.add_argument("--dev")
    s.add_argument("--dev-srl")
    s.add_argument("--selector", help="checkpoint from train-selector")
    s.add_argument("--out", required=True, help="checkpoint path")
    s.add_argument("--metrics", help="per-epoch metrics, JSON lines")
    s.set_defaults(func=cmd_train_joint)

    s = sub.add_parser("predict", parents=[hyper], help="write predictions as JSON lines")
    s.add_argument("--model", required=True)
    s.add_argument("--instances", required=True)
    s.add_argument("--srl", required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", parents=[hyper], help="score a model or a predictions file")
    s.add_argument("--instances", required=True)
    s.add_argument("--srl", required=True)
    s.add_argument("--model")
    s.add_argument("--predictions")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        if args.verbose:
            logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(name)s: %(message)s")
        return args.func(args)
    except ConfigError as exc:
        _report(exc, command)
        return 2
    except (SrlHopError, ValueError, OSError, KeyError) as exc:
        _report(exc, command)
        return 1


def _report(exc: BaseException, command) -> None:
    sys.stderr.write(_json_line({"error": type(exc).__name__, "stage": command, "message": str(exc)}))


if __name__ == "__main__":
    sys.exit(main())
