import numpy as np
import pytest

from augpet.lexicons import (
    EmbeddingTable,
    HalfScale,
    LexiconError,
    ScaleSet,
    default_stopwords,
    load_embeddings,
    load_half_scales,
    load_thesaurus,
    milder_alternatives,
)


def test_scale_line(fixtures):
    s = load_half_scales(fixtures / "scales.txt")
    assert s.scales[0] == HalfScale(("few", "some", "many"), "custom")
    with pytest.raises(LexiconError):
        HalfScale(("alone",))


def test_scale_files_merge_to_187(tmp_path):
    paths = []
    for name, n in (("demelo", 87), ("crowd", 79), ("wilkinson", 21)):
        p = tmp_path / f"{name}.txt"
        p.write_text(f"#source={name}\n" + "".join(f"{name}a{i},{name}b{i}\n" for i in range(n)))
        paths.append(p)
    s = load_half_scales(paths)
    assert len(s) == 187
    assert {h.source for h in s.scales} == {"demelo", "crowd", "wilkinson"}


def test_milder_alternatives():
    s = ScaleSet((HalfScale(("harmful", "toxic", "deadly")),))
    assert milder_alternatives(s, "deadly") == ["toxic", "harmful"]
    assert milder_alternatives(s, "toxic") == ["harmful"]
    assert milder_alternatives(s, "harmful") == []
    two = ScaleSet((HalfScale(("ok", "good", "great")), HalfScale(("fine", "good", "superb"))))
    assert milder_alternatives(two, "good") == ["ok", "fine"]


def test_thesaurus(fixtures, tmp_path):
    t = load_thesaurus(fixtures / "thesaurus_escaped.tsv")
    assert t.synonyms("escaped") == ("break away",)
    dup = tmp_path / "d.tsv"
    dup.write_text("a\tb\na\tc\n")
    with pytest.raises(LexiconError, match="duplicate"):
        load_thesaurus(dup)


def test_default_stopwords():
    sw = default_stopwords()
    assert "the" in sw and "hospital" not in sw


def test_embedding_arity_error(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("1 300\nfoo " + " ".join(["0.1"] * 299) + "\n")
    with pytest.raises(LexiconError, match="line 2"):
        load_embeddings(p)
    q = tmp_path / "f.txt"
    q.write_text("foo 1 2 3\nbar 1 2\n")
    with pytest.raises(LexiconError, match="line 2"):
        load_embeddings(q)


def test_embedding_pool_and_freeze(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("a 1 0\nb 0 1\na 5 5\n")
    t = load_embeddings(p)
    assert np.array_equal(t["a"], [1, 0])  # first occurrence wins
    vec, found = t.pool(["a", "b", "zzz"])
    assert found == 2 and np.allclose(vec, [0.5, 0.5])
    vec, found = t.pool(["zzz"])
    assert found == 0 and not vec.any()
    with pytest.raises(ValueError):
        t.matrix[0, 0] = 3.0
    assert t.source == str(p) or t.source.endswith("e.txt")


def test_digest_tracks_content():
    a = EmbeddingTable.from_dict({"x": [1.0, 2.0]})
    b = EmbeddingTable.from_dict({"x": [1.0, 2.0]})
    c = EmbeddingTable.from_dict({"x": [1.0, 2.5]})
    assert a.digest() == b.digest() != c.digest()
