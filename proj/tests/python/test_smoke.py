import json
import os
import tempfile

import pytest

import perg2p


SRC = os.environ.get("G2P_SOURCE_DIR", os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))


@pytest.fixture(scope="module")
def fa_alphabet():
    return perg2p.Alphabet.load(os.path.join(SRC, "data", "alphabet_fa.tsv"))


@pytest.fixture(scope="module")
def fa_norm():
    return perg2p.NormTable.load(os.path.join(SRC, "data", "normalize_fa.tsv"))


def test_normalize_tokenize(fa_alphabet, fa_norm):
    text, unk = perg2p.normalize("يك  کتاب.", fa_alphabet, fa_norm)
    assert unk == 0
    tokens = perg2p.tokenize(text, fa_alphabet)
    assert tokens[-1] == (".", True)
    assert len(tokens) == 3


def test_edit_distance():
    assert perg2p.edit_distance("abc", "abc") == 0
    assert perg2p.edit_distance("abc", "abd") == 1
    assert perg2p.edit_distance("", "ab") == 2


def test_apply_ezafe(fa_alphabet):
    assert perg2p.apply_ezafe("d/ft/r", 1, fa_alphabet) == "d/ft/re"
    assert perg2p.apply_ezafe("xane", 1, fa_alphabet) == "xaneye"
    assert perg2p.apply_ezafe("xane", 0, fa_alphabet) == "xane"


def test_parse_lexicon():
    entries = perg2p.parse_lexicon("نفتش\t(N1,n/ft/$)\n")
    assert entries[0]["variants"] == [("N1", "n/ft/$", False)]
    with pytest.raises(perg2p._core.G2pParseError):
        perg2p.parse_lexicon("bad\t(N1\n")


def test_metrics():
    assert perg2p.word_accuracy(["ab", "cd"], ["ab", "xx"]) == 0.5
    res = perg2p.homograph_score(
        [("h", "p1", "p1"), ("h", "p1", "p1"), ("h", "p1", "p2"), ("h", "p2", "p1")],
        {"h": ["p1", "p2"]},
    )
    assert abs(res["score"] - 1.0 / 3) < 1e-12
    acc = perg2p.ezafe_accuracy([1, 0], [1, 1])
    assert acc["accuracy"] == 0.5
    assert acc["fn"] == 1


def test_synth_train_convert_roundtrip():
    with tempfile.TemporaryDirectory() as tmp:
        data = perg2p.synth_generate(
            os.path.join(tmp, "data"),
            {"vocab_size": 80, "sentence_count": 120, "homograph_count": 3,
             "multi_pron_count": 2, "rare_band": 10, "seed": 5},
        )
        manifest = os.path.join(tmp, "manifest.conf")
        with open(manifest, "w") as f:
            f.write(
                "\n".join(
                    [
                        f"alphabet = {data['alphabet']}",
                        f"lexicon = {data['lexicon']}",
                        f"exceptions = {data['exceptions']}",
                        f"corpus = {data['corpus']}",
                        f"checkpoint_dir = {tmp}",
                        "seed = 9",
                        "epochs = 1",
                        "batch = 16",
                        "d_model = 16",
                        "heads = 2",
                        "enc_layers = 1",
                        "dec_layers = 1",
                        "ffn = 32",
                        "char_embed = 8",
                        "word_hidden = 8",
                        "cross_hidden = 8",
                        "decoder_hidden = 12",
                        "phoneme_embed = 8",
                        "word_embed = 8",
                        "dropout = 0.0",
                        "window_cap = 150",
                        "oov_dup_cap = 2",
                        "",
                    ]
                )
            )
        oov = perg2p.train_module("oov", manifest)
        assert os.path.exists(oov)
        ez = perg2p.train_module("ezafe-i", manifest)
        hg = perg2p.train_module("homograph", manifest)
        system = perg2p.G2pSystem.from_manifest(
            manifest,
            {"oov_checkpoint": oov, "ezafe_i_checkpoint": ez,
             "homograph_checkpoint": hg},
        )
        with open(data["corpus"]) as f:
            sentence = f.readline().split("\t")[0]
        results = system.convert(sentence)
        assert len(results) == len(sentence.split())
        for r in results:
            assert r["route"] in {"dict", "homograph", "oov"}
            assert r["ezafe"] in (0, 1)
        # dictionary-route prons are byte-equal to the lexicon's forms
        again = system.convert(sentence)
        assert [r["pron"] for r in results] == [r["pron"] for r in again]


def test_gradcheck_runs():
    ok, text = perg2p.run_gradcheck()
    assert ok, text
