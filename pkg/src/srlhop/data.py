"""QA instances and SRL annotations: types, parsing, validation and file IO.

Instance file (one JSON object per line)::

    {"id": "b0001",
     "question": ["where", "was", ...],
     "contexts": [{"title": ["ent0012"], "sentences": [["ent0012", "directed", ...], ...]}, ...],
     "answer": {"type": "span", "text": "loc0007"},      # type: yes | no | span
     "supporting_facts": [["ent0012", 0], ["ent0045", 1]], # (title, sentence index)
     "gold_titles": ["ent0012", "ent0045"]}

Titles are referenced by their tokens joined with a single space.

SRL file (one JSON object per annotated sentence)::

    {"id": "b0001", "sentence": "question" | [paragraph_index, sentence_index],
     "frames": [{"predicate": 4, "arguments": [["ARG0", 6, 7], ["ARG1", 2, 4]]}]}

Argument spans are half-open token ranges ``[start, end)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Union

from .errors import (
    DanglingSupportingFact,
    MalformedRecord,
    SpanOutOfRange,
    UnknownSentenceRef,
)

QUESTION = "question"

SentenceRef = Union[str, tuple[int, int]]

ANSWER_KINDS = ("yes", "no", "span")


@dataclass(frozen=True)
class Paragraph:
    title: tuple[str, ...]
    sentences: tuple[tuple[str, ...], ...]

    @property
    def title_text(self) -> str:
        return " ".join(self.title)

    def tokens(self) -> list[str]:
        """Title followed by every sentence, flattened."""
        out = list(self.title)
        for s in self.sentences:
            out.extend(s)
        return out

    def n_tokens(self) -> int:
        return len(self.title) + sum(len(s) for s in self.sentences)


@dataclass(frozen=True)
class Answer:
    kind: str
    text: str

    @classmethod
    def yes(cls) -> "Answer":
        return cls("yes", "yes")

    @classmethod
    def no(cls) -> "Answer":
        return cls("no", "no")

    @classmethod
    def span(cls, text: str) -> "Answer":
        return cls("span", text)


@dataclass(frozen=True)
class QAInstance:
    id: str
    question: tuple[str, ...]
    contexts: tuple[Paragraph, ...]
    answer: Answer
    gold_sf: frozenset = field(default_factory=frozenset)
    gold_titles: frozenset = field(default_factory=frozenset)

    def sentence(self, ref: SentenceRef) -> tuple[str, ...]:
        if ref == QUESTION:
            return self.question
        p, s = ref
        if not (0 <= p < len(self.contexts)) or not (0 <= s < len(self.contexts[p].sentences)):
            raise UnknownSentenceRef(f"{self.id}: no sentence {ref!r}")
        return self.contexts[p].sentences[s]

    def gold_paragraph_indices(self) -> list[int]:
        """Indices of the gold paragraphs, first occurrence of each gold title."""
        out = []
        for t in sorted(self.gold_titles):
            for i, p in enumerate(self.contexts):
                if p.title_text == t:
                    out.append(i)
                    break
        return sorted(out)


@dataclass(frozen=True)
class SrlFrame:
    sentence_ref: SentenceRef
    predicate_index: int
    arguments: tuple[tuple[str, int, int], ...]


@dataclass(frozen=True)
class SrlAnnotation:
    groups: tuple[tuple[SentenceRef, tuple[SrlFrame, ...]], ...] = ()

    def frames(self, ref: SentenceRef) -> tuple[SrlFrame, ...]:
        for r, fs in self.groups:
            if r == ref:
                return fs
        return ()

    def all_frames(self) -> list[SrlFrame]:
        return [f for _, fs in self.groups for f in fs]

    def __len__(self) -> int:
        return sum(len(fs) for _, fs in self.groups)


# ---------------------------------------------------------------------------
# parsing


def _tokens(value, what: str) -> tuple[str, ...]:
    if not isinstance(value, list):
        raise MalformedRecord(f"{what}: expected a token list, got {type(value).__name__}")
    for tok in value:
        if not isinstance(tok, str) or not tok or any(c.isspace() for c in tok):
            raise MalformedRecord(f"{what}: bad token {tok!r}")
    return tuple(value)


def _require(raw: dict, key: str):
    if key not in raw:
        raise MalformedRecord(f"missing field {key!r}")
    return raw[key]


def parse_answer(raw) -> Answer:
    if isinstance(raw, str):
        low = raw.lower()
        if low in ("yes", "no"):
            return Answer(low, low)
        raw = {"type": "span", "text": raw}
    if not isinstance(raw, dict):
        raise MalformedRecord("answer: expected an object")
    kind = raw.get("type")
    if kind not in ANSWER_KINDS:
        raise MalformedRecord(f"answer: unknown type {kind!r}")
    if kind != "span":
        return Answer(kind, kind)
    text = raw.get("text")
    if not isinstance(text, str) or not text.strip():
        raise MalformedRecord("answer: span answers need non-empty text")
    return Answer.span(text)


def parse_instance(raw: dict) -> QAInstance:
    if not isinstance(raw, dict):
        raise MalformedRecord("instance record must be an object")
    iid = _require(raw, "id")
    if not isinstance(iid, str) or not iid:
        raise MalformedRecord("id must be a non-empty string")
    question = _tokens(_require(raw, "question"), f"{iid}.question")
    if not question:
        raise MalformedRecord(f"{iid}: empty question")
    ctx_raw = _require(raw, "contexts")
    if not isinstance(ctx_raw, list) or not ctx_raw:
        raise MalformedRecord(f"{iid}: contexts must be a non-empty list")
    contexts = []
    for pi, p in enumerate(ctx_raw):
        if not isinstance(p, dict):
            raise MalformedRecord(f"{iid}: paragraph {pi} must be an object")
        title = _tokens(_require(p, "title"), f"{iid}.contexts[{pi}].title")
        sents_raw = _require(p, "sentences")
        if not isinstance(sents_raw, list) or not sents_raw:
            raise MalformedRecord(f"{iid}: paragraph {pi} has no sentences")
        sents = tuple(_tokens(s, f"{iid}.contexts[{pi}].sentences[{si}]")
                      for si, s in enumerate(sents_raw))
        contexts.append(Paragraph(title, sents))
    answer = parse_answer(_require(raw, "answer"))

    sf_raw = raw.get("supporting_facts", [])
    if not isinstance(sf_raw, list):
        raise MalformedRecord(f"{iid}: supporting_facts must be a list")
    gold_sf = set()
    for item in sf_raw:
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or not isinstance(item[0], str) or not isinstance(item[1], int)):
            raise MalformedRecord(f"{iid}: bad supporting fact {item!r}")
        title, idx = item
        if not any(p.title_text == title and 0 <= idx < len(p.sentences) for p in contexts):
            raise DanglingSupportingFact(f"{iid}: supporting fact {item!r} names no sentence")
        gold_sf.add((title, idx))

    titles_raw = raw.get("gold_titles")
    if titles_raw is None:
        gold_titles = {t for t, _ in gold_sf}
    else:
        if not isinstance(titles_raw, list) or not all(isinstance(t, str) for t in titles_raw):
            raise MalformedRecord(f"{iid}: gold_titles must be a list of strings")
        gold_titles = set(titles_raw)
        known = {p.title_text for p in contexts}
        missing = gold_titles - known
        if missing:
            raise MalformedRecord(f"{iid}: gold title(s) not in contexts: {sorted(missing)}")
    return QAInstance(iid, question, tuple(contexts), answer, frozenset(gold_sf), frozenset(gold_titles))


def serialize_instance(inst: QAInstance) -> dict:
    ans = {"type": inst.answer.kind}
    if inst.answer.kind == "span":
        ans["text"] = inst.answer.text
    return {
        "id": inst.id,
        "question": list(inst.question),
        "contexts": [{"title": list(p.title), "sentences": [list(s) for s in p.sentences]}
                     for p in inst.contexts],
        "answer": ans,
        "supporting_facts": [[t, i] for t, i in sorted(inst.gold_sf)],
        "gold_titles": sorted(inst.gold_titles),
    }


def _parse_ref(raw, inst: QAInstance) -> SentenceRef:
    if raw == QUESTION:
        return QUESTION
    if (isinstance(raw, (list, tuple)) and len(raw) == 2
            and all(isinstance(x, int) and not isinstance(x, bool) for x in raw)):
        p, s = raw
        if not (0 <= p < len(inst.contexts)) or not (0 <= s < len(inst.contexts[p].sentences)):
            raise UnknownSentenceRef(f"{inst.id}: sentence ref {list(raw)} does not exist")
        return (p, s)
    raise MalformedRecord(f"{inst.id}: bad sentence ref {raw!r}")


def _parse_frame(raw, ref: SentenceRef, length: int, iid: str) -> SrlFrame:
    if not isinstance(raw, dict):
        raise MalformedRecord(f"{iid}: frame must be an object")
    pred = _require(raw, "predicate")
    if not isinstance(pred, int) or not (0 <= pred < length):
        raise SpanOutOfRange(f"{iid}: predicate index {pred!r} outside sentence {ref!r}")
    args = []
    for a in _require(raw, "arguments"):
        if (not isinstance(a, (list, tuple)) or len(a) != 3 or not isinstance(a[0], str)
                or not isinstance(a[1], int) or not isinstance(a[2], int)):
            raise MalformedRecord(f"{iid}: bad argument {a!r}")
        role, start, end = a
        if not role:
            raise MalformedRecord(f"{iid}: empty role label")
        if not (0 <= start < end <= length):
            raise SpanOutOfRange(f"{iid}: span [{start},{end}) invalid for sentence {ref!r} of length {length}")
        args.append((role, start, end))
    return SrlFrame(ref, pred, tuple(args))


def parse_srl(raw, inst: QAInstance) -> SrlAnnotation:
    """Parse SRL records for one instance.

    ``raw`` is a single sentence record or an iterable of them. Records for the
    same sentence are merged; frames are ordered by predicate index.
    """
    records = [raw] if isinstance(raw, dict) else list(raw)
    grouped: dict = {}
    order: list = []
    for rec in records:
        if not isinstance(rec, dict):
            raise MalformedRecord(f"{inst.id}: SRL record must be an object")
        if rec.get("id", inst.id) != inst.id:
            raise MalformedRecord(f"SRL record for {rec.get('id')!r} given to instance {inst.id!r}")
        ref = _parse_ref(_require(rec, "sentence"), inst)
        length = len(inst.sentence(ref))
        frames = [_parse_frame(f, ref, length, inst.id) for f in _require(rec, "frames")]
        if ref not in grouped:
            grouped[ref] = []
            order.append(ref)
        grouped[ref].extend(frames)
    order.sort(key=_ref_sort_key)
    groups = tuple((ref, tuple(sorted(grouped[ref], key=lambda f: f.predicate_index)))
                   for ref in order)
    return SrlAnnotation(groups)


def _ref_sort_key(ref: SentenceRef):
    return (-1, -1) if ref == QUESTION else ref


def serialize_srl(iid: str, srl: SrlAnnotation) -> list[dict]:
    out = []
    for ref, frames in srl.groups:
        out.append({
            "id": iid,
            "sentence": QUESTION if ref == QUESTION else list(ref),
            "frames": [{"predicate": f.predicate_index,
                        "arguments": [list(a) for a in f.arguments]} for f in frames],
        })
    return out


# ---------------------------------------------------------------------------
# truncation


def truncate_paragraph(p: Paragraph, max_tokens: int) -> Paragraph:
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    if len(p.title) >= max_tokens:
        return Paragraph(p.title[:max_tokens], ())
    budget = max_tokens - len(p.title)
    kept = []
    for s in p.sentences:
        if budget <= 0:
            break
        if len(s) <= budget:
            kept.append(s)
            budget -= len(s)
        else:
            kept.append(s[:budget])
            budget = 0
    return Paragraph(p.title, tuple(kept))


def truncate_instance(inst: QAInstance, max_tokens: int) -> QAInstance:
    """Truncate every paragraph; supporting facts that fall off are dropped."""
    contexts = tuple(truncate_paragraph(p, max_tokens) for p in inst.contexts)
    if contexts == inst.contexts:
        return inst
    sf = frozenset((t, i) for t, i in inst.gold_sf
                   if any(p.title_text == t and i < len(p.sentences) for p in contexts))
    return QAInstance(inst.id, inst.question, contexts, inst.answer, sf, inst.gold_titles)


def restrict_srl(srl: SrlAnnotation, inst: QAInstance) -> SrlAnnotation:
    """Drop frames and arguments that no longer fit ``inst`` (e.g. after truncation)."""
    groups = []
    for ref, frames in srl.groups:
        try:
            length = len(inst.sentence(ref))
        except Exception:
            continue
        kept = []
        for f in frames:
            if f.predicate_index >= length:
                continue
            args = tuple(a for a in f.arguments if a[2] <= length)
            if args:
                kept.append(SrlFrame(ref, f.predicate_index, args))
        if kept:
            groups.append((ref, tuple(kept)))
    return SrlAnnotation(tuple(groups))


# ---------------------------------------------------------------------------
# files


def iter_jsonl(path) -> Iterable[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(f"{path}:{lineno}: {exc.msg}") from None


def dumps_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in records)


def read_instances(path) -> list[QAInstance]:
    return [parse_instance(r) for r in iter_jsonl(path)]


def read_srl(path, instances: list[QAInstance]) -> dict[str, SrlAnnotation]:
    by_id = {inst.id: inst for inst in instances}
    recs: dict[str, list] = {iid: [] for iid in by_id}
    for r in iter_jsonl(path):
        iid = r.get("id")
        if iid not in by_id:
            raise MalformedRecord(f"SRL record for unknown instance {iid!r}")
        recs[iid].append(r)
    return {iid: parse_srl(rs, by_id[iid]) for iid, rs in recs.items()}


def from_hotpot(raw: dict) -> QAInstance:
    """Convert one raw HotpotQA record (``_id``, ``question``, ``context``, ...).

    A stub: tokens are whitespace-split and lowercased, nothing smarter.
    """
    def toks(text):
        return [t for t in str(text).lower().split()]

    try:
        answer = str(raw["answer"]).strip()
        contexts = [{"title": toks(title), "sentences": [toks(s) or ["."] for s in sents]}
                    for title, sents in raw["context"]]
        rec = {"id": str(raw["_id"]), "question": toks(raw["question"]), "contexts": contexts}
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(f"not a HotpotQA record: {exc!r}") from None
    if answer.lower() in ("yes", "no"):
        rec["answer"] = {"type": answer.lower()}
    else:
        rec["answer"] = {"type": "span", "text": " ".join(toks(answer))}
    rec["supporting_facts"] = [[" ".join(toks(t)), int(i)] for t, i in raw.get("supporting_facts", [])]
    return parse_instance(rec)


def instances_text(instances: Iterable[QAInstance]) -> str:
    return dumps_jsonl(serialize_instance(i) for i in instances)


def srl_text(instances: Iterable[QAInstance], srl: dict[str, SrlAnnotation]) -> str:
    recs = []
    for inst in instances:
        recs.extend(serialize_srl(inst.id, srl.get(inst.id, SrlAnnotation())))
    return dumps_jsonl(recs)
