"""``hideval`` command line: evaluate, validate, stats, merge, synth.

Exit codes: 0 success, 1 validation failure, 2 input or schema error,
3 frame-key mismatch between predictions and ground truth.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .dataio import (
    DEFAULT_NUM_ACTIONS,
    DatasetMeta,
    KeyMismatchError,
    SchemaError,
    dataset_stats,
    dumps_frames,
    read_dataset,
    validate_ground_truth,
)
from .geometry import BBox
from .group_metrics import MatchConfig
from .matching import EPSILON, MATCH_IOU
from .merge import (
    ALPHA_PRESET,
    MERGE_MODES,
    GroupProposal,
    Instance,
    MergeConfig,
    merge_frame,
    rescale_cosine,
    semantic_similarity_inner_product,
    semantic_similarity_linear,
)
from .report import evaluate
from .synthkit import ScenarioSpec, generate

EXIT_OK, EXIT_INVALID, EXIT_INPUT, EXIT_KEYS = 0, 1, 2, 3


class InputError(Exception):
    pass


def _workers(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("HID_EVAL_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"HID_EVAL_WORKERS must be an integer, got {env!r}") from None
    return 1


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ----------------------------------------------------------------------------
# commands


def cmd_evaluate(args: argparse.Namespace) -> int:
    meta, gt = read_dataset(args.gt, "gt")
    pred_meta, pred = read_dataset(args.pred, "pred")
    if pred_meta.num_actions != meta.num_actions:
        raise SchemaError(f"action vocabularies differ: gt K={meta.num_actions}, pred K={pred_meta.num_actions}")
    match = MatchConfig(epsilon=args.epsilon, cost_iou=args.match_iou, filter_iou=args.filter_iou)
    report = evaluate(
        gt, pred, meta=meta, match=match, iou_threshold=args.iou_threshold, score_mode=args.score_mode, workers=_workers(args.workers)
    )
    _emit(report.to_json(), args.output)
    if not args.quiet:
        print(report.table(), file=sys.stderr)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    meta, frames = read_dataset(args.gt, "gt", strict=False)
    k = args.num_actions or meta.num_actions
    report = validate_ground_truth(frames, num_actions=k)
    _emit(json.dumps(report.to_dict(), indent=2), args.output)
    if not args.quiet:
        for rule, msgs in report.violations.items():
            for m in msgs:
                print(f"violation [{rule}]: {m}", file=sys.stderr)
        for rule, msgs in report.warnings.items():
            for m in msgs:
                print(f"warning [{rule}]: {m}", file=sys.stderr)
        status = "ok" if report.ok else "FAILED"
        print(f"{status}: {report.num_violations} violation(s), {report.num_warnings} warning(s) in {report.num_frames} frame(s)", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_stats(args: argparse.Namespace) -> int:
    _, frames = read_dataset(args.gt, "gt")
    _emit(json.dumps(dataset_stats(frames).to_dict(), indent=2), args.output)
    return EXIT_OK


def _read_jsonl(path: str) -> tuple[dict | None, list[tuple[int, dict]]]:
    p = Path(path)
    if not p.exists():
        raise InputError(f"no such file: {p}")
    meta, rows = None, []
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{p}: line {lineno} is not valid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise SchemaError(f"{p}: line {lineno} must be an object")
        if "meta" in obj and not rows:
            meta = obj["meta"]
            continue
        rows.append((lineno, obj))
    return meta, rows


def _frame_key(obj: dict, where: str) -> tuple[str, int]:
    vid, ts = obj.get("video_id"), obj.get("timestamp")
    if not isinstance(vid, str) or not isinstance(ts, int) or isinstance(ts, bool):
        raise SchemaError(f"{where}: needs string 'video_id' and integer 'timestamp'")
    return vid, ts


def _box(raw: Any, where: str) -> BBox:
    try:
        return BBox.from_seq(raw)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: bad box {raw!r}: {exc}") from None


def _vector(raw: Any, where: str) -> tuple[float, ...] | None:
    if raw is None:
        return None
    if not isinstance(raw, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raise SchemaError(f"{where}: expected a list of numbers")
    return tuple(float(v) for v in raw)


def _load_weights(path: str) -> tuple[list[float], float]:
    p = Path(path)
    if not p.exists():
        raise InputError(f"no such file: {p}")
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{p}: not valid JSON: {exc.msg}") from None
    w = obj.get("weights") if isinstance(obj, dict) else None
    if not isinstance(w, list):
        raise SchemaError(f"{p}: needs a 'weights' list")
    return [float(v) for v in w], float(obj.get("bias", 0.0))


def cmd_merge(args: argparse.Namespace) -> int:
    config = MergeConfig(
        alpha=args.alpha,
        person_score_threshold=args.person_threshold,
        group_score_threshold=args.group_threshold,
        min_group_size=args.min_group_size,
    )
    meta_obj, rows = _read_jsonl(args.instances)
    num_actions = int((meta_obj or {}).get("num_actions", DEFAULT_NUM_ACTIONS))
    emb_by_key: dict[tuple[str, int], dict] = {}
    if args.embeddings:
        _, emb_rows = _read_jsonl(args.embeddings)
        for lineno, obj in emb_rows:
            emb_by_key[_frame_key(obj, f"{args.embeddings}: line {lineno}")] = obj
    elif args.mode != "spatial":
        raise InputError(f"--mode {args.mode} needs --embeddings")
    weights = None
    if args.semantic == "linear":
        if not args.weights:
            raise InputError("--semantic linear needs --weights")
        weights = _load_weights(args.weights)

    frames = []
    for lineno, obj in rows:
        where = f"{args.instances}: line {lineno}"
        vid, ts = _frame_key(obj, where)
        emb = emb_by_key.get((vid, ts), {})
        inst_emb = emb.get("instance_embeddings") or []
        grp_emb = emb.get("group_embeddings") or []
        instances = []
        for i, rec in enumerate(obj.get("instances", [])):
            acts = _vector(rec.get("action_scores", [0.0] * num_actions), f"{where} instances[{i}]")
            e = _vector(inst_emb[i], f"{where} instance_embeddings[{i}]") if i < len(inst_emb) else None
            instances.append(Instance(_box(rec.get("box"), f"{where} instances[{i}]"), float(rec.get("score", 1.0)), acts, e))
        groups = []
        for j, rec in enumerate(obj.get("groups", [])):
            e = _vector(grp_emb[j], f"{where} group_embeddings[{j}]") if j < len(grp_emb) else None
            groups.append(GroupProposal(_box(rec.get("box"), f"{where} groups[{j}]"), float(rec.get("score", 1.0)), e))

        semantic = None
        if args.mode != "spatial" and instances and groups:
            if emb.get("theta") is not None:
                semantic = np.asarray(emb["theta"], dtype=np.float64)
            elif not emb:
                raise InputError(f"no embeddings for frame ({vid}, {ts})")
            elif args.semantic == "linear":
                semantic = semantic_similarity_linear(instances, groups, weights[0], weights[1])
            else:
                semantic = semantic_similarity_inner_product(instances, groups)
            if args.clamp_semantic:
                semantic = rescale_cosine(semantic)
        frames.append(merge_frame(instances, groups, config, args.mode, semantic, vid, ts))
    _emit(dumps_frames(frames, DatasetMeta(num_actions)).rstrip("\n"), args.output)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    spec = ScenarioSpec(
        seed=args.seed,
        num_frames=args.frames,
        people=(args.people_min, args.people_max),
        groups=(args.groups_min, args.groups_max),
        jitter=args.jitter,
        corruption=args.corruption,
        noise=args.noise,
        num_actions=args.num_actions,
        num_videos=args.videos,
    )
    gt, pred = generate(spec)
    meta = DatasetMeta(args.num_actions)
    Path(args.out_gt).write_text(dumps_frames(gt, meta), encoding="utf-8")
    Path(args.out_pred).write_text(dumps_frames(pred, meta), encoding="utf-8")
    print(f"wrote {len(gt)} frames to {args.out_gt} and {args.out_pred}", file=sys.stderr)
    return EXIT_OK


# ----------------------------------------------------------------------------
# parser


def _unit(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is outside [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hideval", description="Interaction detection evaluation toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings such as clamped coordinates")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evaluate", help="group AP and person action mAP")
    e.add_argument("gt")
    e.add_argument("pred")
    e.add_argument("--iou-threshold", type=_unit, default=0.5, help="box IoU for person action AP (default 0.5)")
    e.add_argument("--match-iou", type=_unit, default=MATCH_IOU, help="IoU at which member pairs get a finite cost")
    e.add_argument("--filter-iou", type=_unit, default=MATCH_IOU, help="IoU floor for keeping matched members")
    e.add_argument("--epsilon", type=float, default=EPSILON, help="cost of a non-overlapping member pair")
    e.add_argument("--score-mode", choices=("action", "action*person"), default="action")
    e.add_argument("--workers", type=int, default=None, help="worker processes (env HID_EVAL_WORKERS)")
    e.add_argument("-o", "--output", help="write the JSON report here instead of stdout")
    e.add_argument("-q", "--quiet", action="store_true", help="skip the summary table on stderr")
    e.set_defaults(func=cmd_evaluate)

    v = sub.add_parser("validate", help="check ground-truth annotation rules")
    v.add_argument("gt")
    v.add_argument("--num-actions", type=int, default=None)
    v.add_argument("-o", "--output")
    v.add_argument("-q", "--quiet", action="store_true")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("stats", help="dataset statistics")
    s.add_argument("gt")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_stats)

    m = sub.add_parser("merge", help="assign detected people to detected groups")
    m.add_argument("instances", help="JSONL with per-frame 'instances' and 'groups'")
    m.add_argument("--embeddings", help="JSONL with per-frame embeddings and/or precomputed 'theta'")
    m.add_argument("--mode", choices=MERGE_MODES, default="blend")
    m.add_argument("--alpha", type=_unit, default=ALPHA_PRESET, help="weight of the spatial prior (default 0.3)")
    m.add_argument("--semantic", choices=("inner", "linear"), default="inner")
    m.add_argument("--weights", help="JSON {'weights': [...], 'bias': b} for --semantic linear")
    m.add_argument("--clamp-semantic", action="store_true", help="rescale semantic scores from [-1, 1] to [0, 1]")
    m.add_argument("--person-threshold", type=_unit, default=0.0)
    m.add_argument("--group-threshold", type=_unit, default=0.0)
    m.add_argument("--min-group-size", type=int, default=1)
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_merge)

    y = sub.add_parser("synth", help="write a seeded synthetic gt/pred pair")
    y.add_argument("--seed", type=int, default=0)
    y.add_argument("--frames", type=int, default=100)
    y.add_argument("--people-min", type=int, default=2)
    y.add_argument("--people-max", type=int, default=8)
    y.add_argument("--groups-min", type=int, default=1)
    y.add_argument("--groups-max", type=int, default=3)
    y.add_argument("--jitter", type=_unit, default=0.0)
    y.add_argument("--corruption", type=_unit, default=0.0)
    y.add_argument("--noise", type=_unit, default=0.0)
    y.add_argument("--num-actions", type=int, default=DEFAULT_NUM_ACTIONS)
    y.add_argument("--videos", type=int, default=1)
    y.add_argument("--out-gt", required=True)
    y.add_argument("--out-pred", required=True)
    y.set_defaults(func=cmd_synth)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except KeyMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_KEYS
    except (SchemaError, InputError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
