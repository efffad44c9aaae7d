"""Frame schemas, JSONL reading/writing, annotation validation and statistics.

Files are JSON Lines with one frame per line. An optional first line
``{"meta": {"num_actions": K, "labels": [...]}}`` declares the action
vocabulary; ``K`` defaults to 17 when it is absent.

Ground truth line::

    {"video_id": str, "timestamp": int,
     "persons": [{"box": [x1, y1, x2, y2], "actions": [int, ...]}],
     "groups": [[int, ...], ...]}

Prediction line::

    {"video_id": str, "timestamp": int,
     "persons": [{"box": [...], "score": float, "action_scores": [float] * K}],
     "groups": [{"members": [int, ...], "score": float, "box": [...] | null}]}
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Literal, Sequence, Union

from .geometry import BBox

log = logging.getLogger(__name__)

DEFAULT_NUM_ACTIONS = 17

FrameKey = tuple[str, int]
Kind = Literal["gt", "pred"]


class SchemaError(ValueError):
    """A file or record does not follow the frame schema."""


class KeyMismatchError(ValueError):
    """Prediction frames do not line up with ground-truth frames."""

    def __init__(self, message: str, keys: Sequence[FrameKey] = ()):
        super().__init__(message)
        self.keys = list(keys)


@dataclass(frozen=True)
class DatasetMeta:
    num_actions: int = DEFAULT_NUM_ACTIONS
    labels: tuple[str, ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"num_actions": self.num_actions}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out


@dataclass(frozen=True)
class PersonGT:
    box: BBox
    actions: tuple[int, ...] = ()


@dataclass(frozen=True)
class FrameGroundTruth:
    video_id: str
    timestamp: int
    persons: tuple[PersonGT, ...] = ()
    groups: tuple[tuple[int, ...], ...] = ()

    @property
    def key(self) -> FrameKey:
        return (self.video_id, self.timestamp)

    def group_boxes(self, g: int) -> list[BBox]:
        return [self.persons[i].box for i in self.groups[g]]


@dataclass(frozen=True)
class PredPerson:
    box: BBox
    score: float
    action_scores: tuple[float, ...]


@dataclass(frozen=True)
class PredGroup:
    members: tuple[int, ...]
    score: float
    box: BBox | None = None


@dataclass(frozen=True)
class FramePrediction:
    video_id: str
    timestamp: int
    persons: tuple[PredPerson, ...] = ()
    groups: tuple[PredGroup, ...] = ()

    @property
    def key(self) -> FrameKey:
        return (self.video_id, self.timestamp)

    def group_boxes(self, g: int) -> list[BBox]:
        return [self.persons[i].box for i in self.groups[g].members]


Frame = Union[FrameGroundTruth, FramePrediction]


# ----------------------------------------------------------------------------
# record -> object


def _fail(msg: str, key: Any = None) -> SchemaError:
    where = f" at frame {key}" if key is not None else ""
    return SchemaError(f"{msg}{where}")


def _require(obj: dict, name: str, key: Any) -> Any:
    if name not in obj:
        raise _fail(f"missing field '{name}'", key)
    return obj[name]


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _parse_box(raw: Any, field_name: str, key: Any) -> BBox:
    if not isinstance(raw, list) or len(raw) != 4 or not all(_is_number(v) for v in raw):
        raise _fail(f"field '{field_name}' must be a list of 4 numbers", key)
    coords = [float(v) for v in raw]
    if not all(math.isfinite(v) for v in coords):
        raise _fail(f"field '{field_name}' has non-finite coordinates", key)
    clamped = [min(1.0, max(0.0, v)) for v in coords]
    if clamped != coords:
        log.warning("clamped %s %s -> %s at frame %s", field_name, coords, clamped, key)
    try:
        return BBox(*clamped)
    except ValueError as exc:
        raise _fail(f"field '{field_name}': {exc}", key) from None


def _parse_score(raw: Any, field_name: str, key: Any, strict: bool) -> float:
    if not _is_number(raw) or not math.isfinite(raw):
        raise _fail(f"field '{field_name}' must be a finite number", key)
    if strict and not 0.0 <= raw <= 1.0:
        raise _fail(f"field '{field_name}'={raw} outside [0, 1]", key)
    return float(raw)


def _parse_key(obj: dict, lineno: int | None) -> FrameKey:
    where = f" (line {lineno})" if lineno else ""
    vid = obj.get("video_id")
    ts = obj.get("timestamp")
    if not isinstance(vid, str):
        raise SchemaError(f"field 'video_id' must be a string{where}")
    if not _is_int(ts):
        raise SchemaError(f"field 'timestamp' must be an integer number of seconds{where}")
    return (vid, ts)


def _check_members(groups: Sequence[Sequence[int]], num_persons: int, key: FrameKey, min_size: int) -> None:
    seen: set[int] = set()
    for g, members in enumerate(groups):
        for m in members:
            if not 0 <= m < num_persons:
                raise _fail(f"group {g} member index {m} out of range [0, {num_persons})", key)
        if len(set(members)) != len(members):
            raise _fail(f"group {g} repeats a member", key)
        if len(members) < min_size:
            raise _fail(f"group {g} has {len(members)} member(s), need at least {min_size}", key)
        if seen & set(members):
            raise SchemaError(f"groups not disjoint at frame {key}")
        seen |= set(members)


def gt_from_dict(obj: dict, meta: DatasetMeta = DatasetMeta(), strict: bool = True, lineno: int | None = None) -> FrameGroundTruth:
    """Build a ground-truth frame.

    ``strict=False`` only checks types and boxes; partition, index and label
    rules are left to :func:`validate_ground_truth`.
    """
    if not isinstance(obj, dict):
        raise SchemaError(f"frame record must be an object (line {lineno})")
    key = _parse_key(obj, lineno)
    raw_persons = _require(obj, "persons", key)
    raw_groups = obj.get("groups", [])
    if not isinstance(raw_persons, list):
        raise _fail("field 'persons' must be a list", key)
    if not isinstance(raw_groups, list):
        raise _fail("field 'groups' must be a list", key)
    persons = []
    for i, p in enumerate(raw_persons):
        if not isinstance(p, dict):
            raise _fail(f"persons[{i}] must be an object", key)
        box = _parse_box(_require(p, "box", key), f"persons[{i}].box", key)
        actions = p.get("actions", [])
        if not isinstance(actions, list) or not all(_is_int(a) for a in actions):
            raise _fail(f"field 'persons[{i}].actions' must be a list of integers", key)
        if strict:
            bad = [a for a in actions if not 0 <= a < meta.num_actions]
            if bad:
                raise _fail(f"field 'persons[{i}].actions' has unknown class {bad[0]} (K={meta.num_actions})", key)
        persons.append(PersonGT(box, tuple(sorted(set(actions)))))
    groups = []
    for g, members in enumerate(raw_groups):
        if not isinstance(members, list) or not all(_is_int(m) for m in members):
            raise _fail(f"field 'groups[{g}]' must be a list of integers", key)
        groups.append(tuple(members))
    if strict:
        _check_members(groups, len(persons), key, min_size=2)
        for g, members in enumerate(groups):
            for m in members:
                if not persons[m].actions:
                    raise _fail(f"person {m} in group {g} has no action labels", key)
    return FrameGroundTruth(key[0], key[1], tuple(persons), tuple(groups))


def pred_from_dict(obj: dict, meta: DatasetMeta = DatasetMeta(), strict: bool = True, lineno: int | None = None) -> FramePrediction:
    if not isinstance(obj, dict):
        raise SchemaError(f"frame record must be an object (line {lineno})")
    key = _parse_key(obj, lineno)
    raw_persons = _require(obj, "persons", key)
    raw_groups = obj.get("groups", [])
    if not isinstance(raw_persons, list):
        raise _fail("field 'persons' must be a list", key)
    if not isinstance(raw_groups, list):
        raise _fail("field 'groups' must be a list", key)
    persons = []
    for i, p in enumerate(raw_persons):
        if not isinstance(p, dict):
            raise _fail(f"persons[{i}] must be an object", key)
        box = _parse_box(_require(p, "box", key), f"persons[{i}].box", key)
        score = _parse_score(_require(p, "score", key), f"persons[{i}].score", key, strict)
        raw_scores = _require(p, "action_scores", key)
        if not isinstance(raw_scores, list):
            raise _fail(f"field 'persons[{i}].action_scores' must be a list", key)
        if strict and len(raw_scores) != meta.num_actions:
            raise _fail(
                f"field 'persons[{i}].action_scores' has {len(raw_scores)} entries, expected K={meta.num_actions}", key
            )
        scores = tuple(_parse_score(s, f"persons[{i}].action_scores", key, strict) for s in raw_scores)
        persons.append(PredPerson(box, score, scores))
    groups = []
    for g, rg in enumerate(raw_groups):
        if not isinstance(rg, dict):
            raise _fail(f"groups[{g}] must be an object", key)
        members = _require(rg, "members", key)
        if not isinstance(members, list) or not all(_is_int(m) for m in members):
            raise _fail(f"field 'groups[{g}].members' must be a list of integers", key)
        score = _parse_score(_require(rg, "score", key), f"groups[{g}].score", key, strict)
        raw_box = rg.get("box")
        box = None if raw_box is None else _parse_box(raw_box, f"groups[{g}].box", key)
        groups.append(PredGroup(tuple(members), score, box))
    if strict:
        _check_members([g.members for g in groups], len(persons), key, min_size=1)
    return FramePrediction(key[0], key[1], tuple(persons), tuple(groups))


# ----------------------------------------------------------------------------
# object -> record


def gt_to_dict(frame: FrameGroundTruth) -> dict[str, Any]:
    return {
        "video_id": frame.video_id,
        "timestamp": frame.timestamp,
        "persons": [{"box": p.box.to_list(), "actions": list(p.actions)} for p in frame.persons],
        "groups": [list(g) for g in frame.groups],
    }


def pred_to_dict(frame: FramePrediction) -> dict[str, Any]:
    return {
        "video_id": frame.video_id,
        "timestamp": frame.timestamp,
        "persons": [
            {"box": p.box.to_list(), "score": p.score, "action_scores": list(p.action_scores)} for p in frame.persons
        ],
        "groups": [
            {"members": list(g.members), "score": g.score, "box": None if g.box is None else g.box.to_list()}
            for g in frame.groups
        ],
    }


def frame_to_dict(frame: Frame) -> dict[str, Any]:
    if isinstance(frame, FrameGroundTruth):
        return gt_to_dict(frame)
    return pred_to_dict(frame)


def dumps_frames(frames: Iterable[Frame], meta: DatasetMeta | None = None) -> str:
    # json uses repr() for floats, which round-trips exactly
    lines = []
    if meta is not None:
        lines.append(json.dumps({"meta": meta.to_dict()}))
    lines.extend(json.dumps(frame_to_dict(f)) for f in frames)
    return "".join(line + "\n" for line in lines)


def write_dataset(path: str | Path, frames: Iterable[Frame], meta: DatasetMeta | None = None) -> None:
    Path(path).write_text(dumps_frames(frames, meta), encoding="utf-8")


# ----------------------------------------------------------------------------
# files


def _parse_meta(obj: Any, lineno: int) -> DatasetMeta:
    if not isinstance(obj, dict):
        raise SchemaError(f"'meta' must be an object (line {lineno})")
    k = obj.get("num_actions", DEFAULT_NUM_ACTIONS)
    if not _is_int(k) or k < 1:
        raise SchemaError(f"'meta.num_actions' must be a positive integer (line {lineno})")
    labels = obj.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
            raise SchemaError(f"'meta.labels' must be a list of strings (line {lineno})")
        if len(labels) != k:
            raise SchemaError(f"'meta.labels' has {len(labels)} names for {k} actions (line {lineno})")
        labels = tuple(labels)
    return DatasetMeta(k, labels)


def loads_frames(text: str, kind: Kind, strict: bool = True, source: str = "<string>") -> tuple[DatasetMeta, list[Frame]]:
    if kind not in ("gt", "pred"):
        raise ValueError(f"kind must be 'gt' or 'pred', got {kind!r}")
    build = gt_from_dict if kind == "gt" else pred_from_dict
    meta = DatasetMeta()
    frames: list[Frame] = []
    seen: set[FrameKey] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{source}: line {lineno} is not valid JSON: {exc.msg}") from None
        if isinstance(obj, dict) and "meta" in obj:
            if frames:
                raise SchemaError(f"{source}: 'meta' header must precede frames (line {lineno})")
            meta = _parse_meta(obj["meta"], lineno)
            continue
        try:
            frame = build(obj, meta, strict=strict, lineno=lineno)
        except SchemaError as exc:
            raise SchemaError(f"{source}: line {lineno}: {exc}") from None
        if strict and frame.key in seen:
            raise SchemaError(f"{source}: line {lineno}: duplicate frame key {frame.key}")
        seen.add(frame.key)
        frames.append(frame)
    return meta, frames


def read_dataset(path: str | Path, kind: Kind, strict: bool = True) -> tuple[DatasetMeta, list[Frame]]:
    """Parse a JSONL file into ``(meta, frames)``, keeping file order."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"no such file: {path}") from None
    return loads_frames(text, kind, strict=strict, source=str(path))


def parse_dataset(path: str | Path, kind: Kind, strict: bool = True) -> list[Frame]:
    return read_dataset(path, kind, strict=strict)[1]


# ----------------------------------------------------------------------------
# validation


RULES = (
    "partition_disjoint",
    "group_size",
    "index_bounds",
    "duplicate_key",
    "action_labels",
)
WARNINGS = ("single_person_with_group", "two_person_without_group")


@dataclass
class ValidationReport:
    num_frames: int = 0
    violations: dict[str, list[str]] = field(default_factory=lambda: {r: [] for r in RULES})
    warnings: dict[str, list[str]] = field(default_factory=lambda: {w: [] for w in WARNINGS})

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    @property
    def num_violations(self) -> int:
        return sum(len(v) for v in self.violations.values())

    @property
    def num_warnings(self) -> int:
        return sum(len(v) for v in self.warnings.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "num_frames": self.num_frames,
            "num_violations": self.num_violations,
            "num_warnings": self.num_warnings,
            "violations": self.violations,
            "warnings": self.warnings,
        }


def validate_ground_truth(frames: Sequence[FrameGroundTruth], num_actions: int = DEFAULT_NUM_ACTIONS) -> ValidationReport:
    """Check annotation invariants frame by frame; never raises on bad data."""
    report = ValidationReport(num_frames=len(frames))
    viol, warn = report.violations, report.warnings
    keys = Counter(f.key for f in frames)
    for key, n in keys.items():
        if n > 1:
            viol["duplicate_key"].append(f"frame {key} appears {n} times")
    for f in frames:
        n = len(f.persons)
        owner: dict[int, int] = {}
        for g, members in enumerate(f.groups):
            if len(members) < 2:
                viol["group_size"].append(f"group {g} at frame {f.key} has {len(members)} member(s)")
            for m in members:
                if not 0 <= m < n:
                    viol["index_bounds"].append(f"group {g} at frame {f.key} references person {m} of {n}")
                    continue
                if m in owner and owner[m] != g:
                    viol["partition_disjoint"].append(
                        f"groups not disjoint at frame {f.key}: person {m} in groups {owner[m]} and {g}"
                    )
                elif m in owner:
                    viol["partition_disjoint"].append(f"group {g} at frame {f.key} lists person {m} twice")
                owner[m] = g
        for i, p in enumerate(f.persons):
            bad = [a for a in p.actions if not 0 <= a < num_actions]
            if bad:
                viol["action_labels"].append(f"person {i} at frame {f.key} has unknown action {bad[0]}")
            if i in owner and not p.actions:
                viol["action_labels"].append(f"person {i} at frame {f.key} is grouped but has no actions")
        if n == 1 and f.groups:
            warn["single_person_with_group"].append(f"frame {f.key} has one person but {len(f.groups)} group(s)")
        if n == 2 and not f.groups and all(p.actions for p in f.persons):
            warn["two_person_without_group"].append(f"frame {f.key} has two labelled persons but no group")
    return report


# ----------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class DatasetStats:
    num_frames: int = 0
    num_groups_total: int = 0
    num_interaction_categories_present: int = 0
    max_groups_per_frame: int = 0
    max_people_per_group: int = 0
    mean_people_per_group: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


# Published figures for the full AVA-I annotation release.
AVA_I_REFERENCE = DatasetStats(
    num_frames=85_254,
    num_groups_total=86_338,
    num_interaction_categories_present=17,
    max_groups_per_frame=4,
    max_people_per_group=13,
    mean_people_per_group=2.5,
)


def dataset_stats(frames: Iterable[FrameGroundTruth]) -> DatasetStats:
    num_frames = 0
    sizes: list[int] = []
    max_groups = 0
    categories: set[int] = set()
    for f in frames:
        num_frames += 1
        max_groups = max(max_groups, len(f.groups))
        sizes.extend(len(g) for g in f.groups)
        for p in f.persons:
            categories.update(p.actions)
    return DatasetStats(
        num_frames=num_frames,
        num_groups_total=len(sizes),
        num_interaction_categories_present=len(categories),
        max_groups_per_frame=max_groups,
        max_people_per_group=max(sizes, default=0),
        mean_people_per_group=sum(sizes) / len(sizes) if sizes else 0.0,
    )
