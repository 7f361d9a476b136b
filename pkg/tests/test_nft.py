"""One-way transducers: structure predicates, normalization, and the
exact oracle on ultimately periodic inputs."""

import random

import pytest

from omegastream import nft
from omegastream.nft import AmbiguityError, OneWayTransducer
from omegastream.words import UPWord, parse_upword, up_equal, word

from conftest import random_upword


# -- structure ---------------------------------------------------------------


def test_fixture_shapes(replace_t, double_t, normalize_t):
    assert double_t.initial == frozenset({"q0"})
    assert double_t.final == frozenset({"q0", "q1"})
    assert normalize_t.initial == frozenset({"q0", "q2"})
    assert normalize_t.final == frozenset({"q0", "q1"})
    assert replace_t.initial == replace_t.final == frozenset({"q0"})


def test_push(double_t):
    assert frozenset(nft.push(double_t, {"q0"}, ("0",))) == frozenset({"q1", "q2"})
    assert frozenset(nft.push(double_t, {"q0"}, ("1",))) == frozenset({"q0"})
    assert frozenset(nft.push(double_t, {"q1"}, ("2",))) == frozenset()


def test_predicates_on_fixtures(replace_t, double_t, normalize_t):
    for T in (replace_t, double_t, normalize_t):
        assert nft.is_trim(T)
        assert nft.is_clean(T)
        assert nft.is_unambiguous(T)
        assert nft.is_productive(T)


def test_normalization_idempotent(replace_t, double_t, normalize_t):
    for T in (replace_t, double_t, normalize_t):
        Tn = nft.normalize(T)
        assert nft.is_trim(Tn) and nft.is_clean(Tn) and nft.is_productive(Tn)
        Tn2 = nft.normalize(Tn)
        assert set(Tn2.states) == set(Tn.states)
        assert Tn2.transitions == Tn.transitions


def test_trim_removes_dead_states(replace_t):
    T = replace_t
    trans = dict(T.transitions)
    trans[("dead", "0", "dead")] = word("0")
    bigger = OneWayTransducer(
        input_alphabet=T.input_alphabet,
        output_alphabet=T.output_alphabet,
        states=T.states | {"dead"},
        initial=T.initial,
        final=T.final,
        transitions=trans,
    )
    assert not nft.is_trim(bigger)
    assert set(nft.trim(bigger).states) == set(T.states)


def _ambiguous_machine():
    # two accepting runs over (a)^w
    return OneWayTransducer(
        input_alphabet=frozenset("a"),
        output_alphabet=frozenset("xy"),
        states=frozenset({"p", "q"}),
        initial=frozenset({"p", "q"}),
        final=frozenset({"p", "q"}),
        transitions={
            ("p", "a", "p"): word("x"),
            ("q", "a", "q"): word("y"),
        },
    )


def test_ambiguity_detected():
    M = _ambiguous_machine()
    assert not nft.is_unambiguous(M)
    with pytest.raises(AmbiguityError):
        nft.oracle_eval(M, parse_upword("(a)^w"))


# -- the oracle --------------------------------------------------------------


def test_oracle_goldens(replace_t, double_t, normalize_t):
    assert up_equal(nft.oracle_eval(replace_t, parse_upword("(001)^w")),
                    parse_upword("(111)^w"))
    assert up_equal(nft.oracle_eval(double_t, parse_upword("002(0)^w")),
                    parse_upword("00002(0)^w"))
    assert up_equal(nft.oracle_eval(double_t, parse_upword("(0)^w")),
                    parse_upword("(0)^w"))
    assert up_equal(nft.oracle_eval(normalize_t, parse_upword("0(1)^w")),
                    parse_upword("1(0)^w"))
    assert nft.oracle_eval(replace_t, parse_upword("(0)^w")) is None
    assert nft.oracle_eval(normalize_t, parse_upword("(1)^w")) is None


def test_oracle_run_structure(replace_t):
    rl = nft.oracle_run(replace_t, parse_upword("(001)^w"))
    assert up_equal(rl.output, parse_upword("(1)^w"))
    assert rl.stem_states[0] in replace_t.initial
    assert rl.loop_states[0] == rl.loop_states[-1]
    assert set(rl.loop_states) & replace_t.final


def test_oracle_preserved_by_normalization(replace_t, double_t, normalize_t):
    rng = random.Random(11)
    for T, alpha in ((replace_t, "012"), (double_t, "012"), (normalize_t, "01")):
        Tn = nft.normalize(T)
        for _ in range(25):
            x = random_upword(rng, alpha)
            y1 = nft.oracle_eval(T, x)
            y2 = nft.oracle_eval(Tn, x)
            if y1 is None:
                assert y2 is None
            else:
                assert y2 is not None and up_equal(y1, y2)


def test_accepting_future(replace_t):
    Tn = nft.normalize(replace_t)
    for q in Tn.states:
        fut = nft.accepting_future(Tn, q)
        assert isinstance(fut, UPWord)


# -- JSON round trip ---------------------------------------------------------


def test_json_roundtrip(tmp_path, double_t):
    p = tmp_path / "m.json"
    nft.save(double_t, str(p))
    T2 = nft.load(str(p))
    assert T2.states == double_t.states
    assert T2.transitions == double_t.transitions
    assert T2.initial == double_t.initial and T2.final == double_t.final
