import pytest

from srlhop.data import parse_instance, parse_srl
from srlhop.embed import VocabEmbeddings
from srlhop.synth import SynthConfig, generate
from srlhop.train import Hyper

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def tiny_hyper(**kw) -> Hyper:
    base = dict(dim=12, d_model=6, gcn_hidden=7, gcn_out=5, rnn_hidden=6, head_hidden=5, sel_hidden=4)
    base.update(kw)
    return Hyper(**base)


def _build(raw, frames):
    inst = parse_instance(raw)
    srl = parse_srl([{"id": inst.id, "sentence": ref, "frames": fs} for ref, fs in frames], inst)
    return inst, srl


def players_fixture():
    """Two players sharing "a former football player", plus two-predicate arguments."""
    raw = {
        "id": "players",
        "question": "who is younger keith bostic or jerry glanville ?".split(),
        "contexts": [
            {"title": ["keith", "bostic"], "sentences": [
                "keith bostic is a coach .".split(),
                "keith bostic played and became a former football player .".split()]},
            {"title": ["jerry", "glanville"], "sentences": [
                "jerry glanville is a coach .".split(),
                "jerry glanville was a former football player born in 1941 .".split()]},
            {"title": ["other"], "sentences": ["nothing happens here .".split()]},
        ],
        "answer": {"type": "span", "text": "keith bostic"},
        "supporting_facts": [["keith bostic", 1], ["jerry glanville", 1]],
    }
    frames = [
        ("question", [{"predicate": 2, "arguments": [["ARG0", 3, 5]]},
                      {"predicate": 2, "arguments": [["ARG0", 6, 8]]}]),
        ([0, 1], [{"predicate": 2, "arguments": [["ARG0", 0, 2], ["ARG1", 5, 9]]},
                  {"predicate": 4, "arguments": [["ARG0", 0, 2], ["ARG1", 5, 9]]}]),
        ([1, 1], [{"predicate": 2, "arguments": [["ARG0", 0, 2], ["ARG1", 3, 7]]},
                  {"predicate": 7, "arguments": [["ARG0", 0, 2], ["TEMPORAL", 9, 10]]}]),
    ]
    return _build(raw, frames)


def bridge_fixture():
    """q links s2 and s3; s3 links s4 and s5; gold chain is q, s3, s5."""
    raw = {
        "id": "bridge",
        "question": "where did alpha meet beta ?".split(),
        "contexts": [
            {"title": ["pa"], "sentences": ["alpha sang .".split(), "beta met gamma with delta .".split()]},
            {"title": ["pb"], "sentences": ["gamma slept .".split(), "delta ran in rome .".split()]},
        ],
        "answer": {"type": "span", "text": "rome"},
        "supporting_facts": [["pa", 1], ["pb", 1]],
    }
    frames = [
        ("question", [{"predicate": 3, "arguments": [["ARG0", 2, 3], ["ARG1", 4, 5]]}]),
        ([0, 0], [{"predicate": 1, "arguments": [["ARG0", 0, 1]]}]),
        ([0, 1], [{"predicate": 1, "arguments": [["ARG1", 0, 1], ["ARG2", 2, 3], ["ARG3", 4, 5]]}]),
        ([1, 0], [{"predicate": 1, "arguments": [["ARG2", 0, 1]]}]),
        ([1, 1], [{"predicate": 1, "arguments": [["ARG3", 0, 1], ["LOC", 3, 4]]}]),
    ]
    return _build(raw, frames)


@pytest.fixture
def players():
    return players_fixture()


@pytest.fixture
def bridge():
    return bridge_fixture()


@pytest.fixture(scope="session")
def small_corpus():
    return generate(SynthConfig(n_instances=24, seed=3))


@pytest.fixture
def vectors():
    return VocabEmbeddings(12, {}, 0)
