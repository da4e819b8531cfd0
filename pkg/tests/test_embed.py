import numpy as np
import pytest

from srlhop.embed import (
    OVERLAP_WEIGHT,
    EncoderParams,
    VocabEmbeddings,
    embed_phrase,
    encode_tokens,
    load_vectors,
    lookup,
    overlap_fractions,
    save_vectors,
    summarize_sequence,
    summary_features,
    summary_width,
)
from srlhop.errors import EmptyLeftSequence, EmptyPhrase, EmptySequence, MalformedRecord


def random_encoder(dim, d_model, seed=0):
    rng = np.random.default_rng(seed)
    return EncoderParams(rng.normal(size=(summary_width(dim), d_model)), rng.normal(size=d_model),
                         rng.normal(size=(dim + 1, d_model)), rng.normal(size=d_model))


def test_table_lookup():
    row = np.arange(4.0)
    v = VocabEmbeddings(4, {"cat": row})
    assert lookup(v, "cat") is row


def test_oov_deterministic_and_unit_norm():
    v1, v2 = VocabEmbeddings(8, {}, 3), VocabEmbeddings(8, {}, 3)
    a = lookup(v1, "zebra")
    assert np.array_equal(a, lookup(v2, "zebra"))
    assert np.isclose(np.linalg.norm(a), 1.0)
    assert not np.array_equal(a, lookup(VocabEmbeddings(8, {}, 4), "zebra"))


def test_oov_distinct_over_sample():
    v = VocabEmbeddings(16)
    rows = {tuple(lookup(v, f"tok{i}")) for i in range(1000)}
    assert len(rows) == 1000


def test_embed_phrase():
    a, b = np.array([1.0, 0.0]), np.array([0.0, 3.0])
    v = VocabEmbeddings(2, {"a": a, "b": b})
    assert np.array_equal(embed_phrase(v, ["a"]), a)
    assert np.allclose(embed_phrase(v, ["a", "b"]), (a + b) / 2)
    with pytest.raises(EmptyPhrase):
        embed_phrase(v, [])


def test_summary_deterministic_and_zero_weights():
    v = VocabEmbeddings(6)
    enc = random_encoder(6, 3)
    left, right = ["x", "y"], ["y", "z", "w"]
    assert np.array_equal(summarize_sequence(enc, v, left, right), summarize_sequence(enc, v, left, right))
    zero = EncoderParams(np.zeros_like(enc.W), enc.b, enc.W_tok, enc.b_tok)
    assert np.array_equal(summarize_sequence(zero, v, left, right), np.tanh(enc.b))


def test_overlap_identity_is_one():
    seq = ["a", "b", "a", "c"]
    assert overlap_fractions(seq, seq) == (1.0, 1.0)
    f = summary_features(VocabEmbeddings(5), seq, seq)
    assert f[10] == 1.0 * OVERLAP_WEIGHT and f[11] == 1.0 * OVERLAP_WEIGHT


def test_summary_layout():
    a, b, c = np.eye(3)
    v = VocabEmbeddings(3, {"a": a, "b": b, "c": c})
    f = summary_features(v, ["a", "b"], ["b", "c", "c", "c"])
    assert f.shape == (summary_width(3),)
    assert np.allclose(f[:3], (a + b) / 2)
    assert np.allclose(f[3:6], (b + 3 * c) / 4)
    assert np.allclose(f[6:] / OVERLAP_WEIGHT, [1 / 4, 1 / 2, 2 / 6, 4 / 6])
    assert np.array_equal(summary_features(v, ["a"], [])[3:6], np.zeros(3))
    with pytest.raises(EmptyLeftSequence):
        summary_features(v, [], ["a"])


def test_encode_tokens_shapes_and_zero_weights():
    v = VocabEmbeddings(5)
    enc = random_encoder(5, 4)
    assert encode_tokens(enc, v, ["only"]).shape == (1, 4)
    zero = EncoderParams(enc.W, enc.b, np.zeros_like(enc.W_tok), enc.b_tok)
    out = encode_tokens(zero, v, ["p", "q", "r"])
    assert np.allclose(out, np.tanh(enc.b_tok))
    with pytest.raises(EmptySequence):
        encode_tokens(enc, v, [])


def test_encode_tokens_permutation_only_moves_position_feature():
    v = VocabEmbeddings(5)
    enc = random_encoder(5, 4)
    toks = ["p", "q", "r", "s"]
    perm = [2, 0, 3, 1]
    out = encode_tokens(enc, v, toks)
    out_p = encode_tokens(enc, v, [toks[i] for i in perm])
    n = len(toks)
    for new, old in enumerate(perm):
        # remove the position contribution, then the rows must agree
        shift = (new - old) / n * enc.W_tok[-1]
        assert np.allclose(np.arctanh(out_p[new]) - shift, np.arctanh(out[old]))


def test_vector_file_round_trip(tmp_path):
    v = VocabEmbeddings(3, {"a": np.array([0.5, -1.0, 2.0]), "b": np.array([1e-9, 0.0, 3.0])})
    save_vectors(v, tmp_path / "v.txt")
    back = load_vectors(tmp_path / "v.txt")
    assert back.dim == 3 and all(np.array_equal(back.table[k], v.table[k]) for k in v.table)
    (tmp_path / "bad.txt").write_text("a 1 2 3\nb 1 2\n")
    with pytest.raises(MalformedRecord):
        load_vectors(tmp_path / "bad.txt")
