"""Synthetic multi-hop corpora with complete SRL annotations.

Three question families are produced:

* bridge: ``where was the film directed by X released ?`` -- X's paragraph
  names the film E, E's paragraph names the location (the answer).
* comparison, entity answer: ``who was born in 1950 , X or Y ?`` -- both
  people share a profession argument; the answer is the one whose birth year
  matches.
* comparison, yes/no: ``were X and Y both born in 1950 ?``

Tokens are synthetic (``ent0042``, ``loc0007``, years) so exact matching is
unambiguous. Every sentence carries a frame. Distractor paragraphs use fresh
entities, avoid the gold profession and birth years, and so share no argument
with the question or the gold paragraphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import QUESTION, Answer, Paragraph, QAInstance, SrlAnnotation, SrlFrame
from .errors import AuditFailure
from .metrics import answer_metrics

FILM_VERBS = ("directed", "wrote", "produced")
RELEASE_VERBS = ("released", "premiered", "screened")
PROFESSIONS = (
    ("a", "former", "football", "player"),
    ("an", "american", "film", "director"),
    ("a", "retired", "boxer"),
    ("a", "famous", "painter"),
)
YEARS = tuple(str(y) for y in range(1900, 2000))


@dataclass(frozen=True)
class SynthConfig:
    n_instances: int = 250
    n_distractors: int = 2
    bridge_fraction: float = 0.5
    vocab_size: int = 5000
    seed: int = 0
    yesno_fraction: float = 0.5

    def __post_init__(self):
        if self.n_instances < 0 or self.n_distractors < 0:
            raise ValueError("counts must be >= 0")
        if not (0 <= self.bridge_fraction <= 1 and 0 <= self.yesno_fraction <= 1):
            raise ValueError("fractions must lie in [0, 1]")
        if self.vocab_size < 64:
            raise ValueError("vocab_size must be >= 64")


class _Sentence:
    """Tokens plus frames ``(predicate_index, [(role, start, end), ...])``."""

    def __init__(self, tokens, frames):
        self.tokens = list(tokens)
        self.frames = frames


def _two_args(a, verb, b):
    return _Sentence([a, verb, b, "."], [(1, [("ARG0", 0, 1), ("ARG1", 2, 3)])])


def _film(x, verb, e):
    return _two_args(x, verb, e)


def _release(e, verb, loc):
    return _Sentence([e, "was", verb, "in", loc, "."], [(2, [("ARG1", 0, 1), ("LOC", 4, 5)])])


def _grew_up(x, loc):
    return _Sentence([x, "grew", "up", "in", loc, "."], [(1, [("ARG0", 0, 1), ("LOC", 4, 5)])])


def _starred(z, e):
    return _Sentence([z, "starred", "in", e, "."], [(1, [("ARG0", 0, 1), ("ARG1", 3, 4)])])


def _profile(x, prof, year):
    toks = [x, ","] + list(prof) + [",", "was", "born", "in", year, "."]
    born = 3 + len(prof) + 1
    return _Sentence(toks, [(born, [("ARG0", 0, 1), ("ARG1", 2, 2 + len(prof)),
                                   ("TEMPORAL", born + 2, born + 3)])])


class _Pools:
    """Draws fresh entity / location tokens without reuse inside one instance."""

    def __init__(self, rng: np.random.Generator, vocab_size: int):
        self.rng = rng
        self.ents = [f"ent{i:04d}" for i in rng.permutation(vocab_size)]
        self.locs = [f"loc{i:04d}" for i in rng.permutation(vocab_size)]
        self.used: set = set()
        self.professions: set = set()

    def _take(self, pool):
        while True:
            tok = pool[int(self.rng.integers(len(pool)))]
            if tok not in self.used:
                self.used.add(tok)
                return tok

    def ent(self):
        return self._take(self.ents)

    def loc(self):
        return self._take(self.locs)

    def pick(self, options):
        return options[int(self.rng.integers(len(options)))]

    def profession(self, fresh=False):
        """Pick a profession; ``fresh`` skips those already used by gold paragraphs."""
        options = [p for p in PROFESSIONS if not (fresh and p in self.professions)]
        prof = self.pick(options)
        if not fresh:
            self.professions.add(prof)
        return prof

    def year(self, avoid=()):
        while True:
            y = self.pick(YEARS)
            if y not in avoid:
                return y


def _distractor(pools: _Pools, avoid_years) -> tuple:
    title = pools.ent()
    makers = [
        lambda: _two_args(title, "married", pools.ent()),
        lambda: _grew_up(title, pools.loc()),
        lambda: _two_args(title, "coached", pools.ent()),
        lambda: _film(title, pools.pick(FILM_VERBS), pools.ent()),
        lambda: _release(title, pools.pick(RELEASE_VERBS), pools.loc()),
        lambda: _profile(title, pools.profession(fresh=True), pools.year(avoid_years)),
        lambda: _two_args(pools.ent(), "praised", pools.ent()),
    ]
    n = 2 + int(pools.rng.integers(2))
    picks = pools.rng.choice(len(makers), size=n, replace=False)
    return [title], [makers[int(k)]() for k in picks]


def _paragraph(pools: _Pools, title, gold, decoys):
    """Shuffle ``gold`` among ``decoys``; return (title, sentences, gold position)."""
    sents = list(decoys)
    pos = int(pools.rng.integers(len(sents) + 1))
    sents.insert(pos, gold)
    return [title], sents, pos


def _bridge(pools: _Pools):
    x, e = pools.ent(), pools.ent()
    film_verb, rel_verb = pools.pick(FILM_VERBS), pools.pick(RELEASE_VERBS)
    answer = pools.loc()
    p1 = _paragraph(pools, x, _film(x, film_verb, e),
                    [_grew_up(x, pools.loc()), _two_args(x, "married", pools.ent())])
    p2 = _paragraph(pools, e, _release(e, rel_verb, answer),
                    [_starred(pools.ent(), e), _two_args(pools.ent(), "praised", pools.ent())])
    question = _Sentence(
        ["where", "was", "the", "film", film_verb, "by", x, rel_verb, "?"],
        [(4, [("ARG1", 2, 4), ("ARG0", 6, 7)]), (7, [("LOC", 0, 1), ("ARG1", 2, 7)])])
    return question, [p1, p2], Answer.span(answer), ()


def _comparison(pools: _Pools, yesno: bool):
    x, y = pools.ent(), pools.ent()
    prof = pools.profession()
    asked = pools.year()
    if yesno:
        both = bool(pools.rng.integers(2))
        if both:
            yx = yy = asked
        else:
            yx = pools.year((asked,))
            yy = pools.year((asked, yx))
        answer = Answer.yes() if both else Answer.no()
        question = _Sentence(["were", x, "and", y, "both", "born", "in", asked, "?"],
                             [(5, [("ARG0", 1, 2), ("TEMPORAL", 7, 8)])])
    else:
        yx, yy = asked, pools.year((asked,))
        answer = Answer.span(x)
        first, second = (x, y) if pools.rng.integers(2) else (y, x)
        question = _Sentence(["who", "was", "born", "in", asked, ",", first, "or", second, "?"],
                             [(2, [("ARG0", 0, 1), ("TEMPORAL", 4, 5)])])
    p1 = _paragraph(pools, x, _profile(x, prof, yx),
                    [_two_args(x, "married", pools.ent()), _two_args(x, "coached", pools.ent())])
    p2 = _paragraph(pools, y, _profile(y, prof, yy),
                    [_two_args(y, "married", pools.ent())])
    return question, [p1, p2], answer, (asked, yx, yy)


def generate(cfg: SynthConfig):
    """Return ``(instances, srl)`` with ``srl`` keyed by instance id."""
    rng = np.random.default_rng(cfg.seed)
    instances, srl = [], {}
    for k in range(cfg.n_instances):
        pools = _Pools(rng, cfg.vocab_size)
        if rng.random() < cfg.bridge_fraction:
            kind = "b"
            question, gold, answer, years = _bridge(pools)
        else:
            yesno = rng.random() < cfg.yesno_fraction
            kind = "y" if yesno else "c"
            question, gold, answer, years = _comparison(pools, yesno)
        paras = [(title, sents, pos, True) for title, sents, pos in gold]
        for _ in range(cfg.n_distractors):
            title, sents = _distractor(pools, years)
            paras.append((title, sents, None, False))
        order = rng.permutation(len(paras))
        contexts, gold_sf, gold_titles, groups = [], set(), set(), []
        for new_idx, old in enumerate(order.tolist()):
            title, sents, pos, is_gold = paras[old]
            contexts.append(Paragraph(tuple(title), tuple(tuple(s.tokens) for s in sents)))
            if is_gold:
                gold_sf.add((" ".join(title), pos))
                gold_titles.add(" ".join(title))
            for si, s in enumerate(sents):
                ref = (new_idx, si)
                groups.append((ref, tuple(SrlFrame(ref, p, tuple(args)) for p, args in s.frames)))
        q_frames = tuple(SrlFrame(QUESTION, p, tuple(args)) for p, args in question.frames)
        iid = f"{kind}{k:05d}"
        instances.append(QAInstance(iid, tuple(question.tokens), tuple(contexts), answer,
                                    frozenset(gold_sf), frozenset(gold_titles)))
        srl[iid] = SrlAnnotation(((QUESTION, q_frames),) + tuple(groups))
    return instances, srl


def audit(instances, srl, T: int = 2, window: int = 10, pmi_floor: float = 0.1) -> dict:
    """Check chain connectivity, answer recoverability and label consistency.

    Raises :class:`AuditFailure` naming every offending instance.
    """
    from .answer import ContextLayout
    from .chain import gold_path
    from .errors import GoldPathDisconnected
    from .graph import build_graph
    from .model import Settings, ordered_gold_selection

    s = Settings(window=window, pmi_floor=pmi_floor, T=T)
    bad, covered = {}, 0
    for inst in instances:
        ann = srl.get(inst.id, SrlAnnotation())
        problems = []
        sf_titles = {t for t, _ in inst.gold_sf}
        if not inst.gold_sf or not sf_titles <= set(inst.gold_titles):
            problems.append("supporting facts outside gold titles")
        elif sf_titles != set(inst.gold_titles):
            problems.append("gold title without a supporting fact")
        if len(inst.gold_paragraph_indices()) != 2:
            problems.append("expected two gold paragraphs")
        else:
            sel = ordered_gold_selection(inst, ann, s)
            g = build_graph(inst, ann, sel, window, pmi_floor)
            try:
                path = gold_path(g, inst, T)
                covered += 1
            except GoldPathDisconnected:
                path = None
                problems.append("gold chain not connected")
            if inst.answer.kind == "span":
                layout = ContextLayout.build(inst, sel)
                prefer = [(g.nodes[i].paragraph, g.nodes[i].sentence) for i in (path or [])[1:]]
                span = layout.find(inst.answer.text.split(), prefer)
                if span is None:
                    problems.append("answer not a context span")
                elif answer_metrics(" ".join(layout.tokens[span[0]:span[1] + 1]), inst.answer.text)[0] != 1:
                    problems.append("answer span text mismatch")
        if problems:
            bad[inst.id] = problems
    report = {"instances": len(instances), "coverage": covered / len(instances) if instances else 0.0,
              "failures": bad}
    if bad:
        raise AuditFailure(f"{len(bad)} instance(s) failed audit: {sorted(bad)}", sorted(bad))
    return report
