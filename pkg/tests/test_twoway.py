"""Two-way transducers with a left endmarker."""

import pytest

from omegastream import twoway
from omegastream.twoway import (
    ENDMARKER,
    LEFT,
    RIGHT,
    LookbehindDFA,
    TwoWayTransducer,
    eval_2dt,
)
from omegastream.words import parse_upword, word


def test_goldens(replace_2dt_m, double_2dt_m):
    r = eval_2dt(replace_2dt_m, parse_upword("(001)^w"), 6)
    assert (r.status, r.output) == ("ok", tuple("111111"))
    r = eval_2dt(replace_2dt_m, parse_upword("(001002)^w"), 6)
    assert (r.status, r.output) == ("ok", tuple("111222"))
    r = eval_2dt(double_2dt_m, parse_upword("(0)^w"), 5)
    assert (r.status, r.output) == ("ok", tuple("00000"))
    r = eval_2dt(double_2dt_m, parse_upword("002(0)^w"), 8)
    assert (r.status, r.output) == ("ok", tuple("00002000"))


def _oscillator():
    return TwoWayTransducer(
        input_alphabet=frozenset("a"),
        output_alphabet=frozenset("a"),
        states=frozenset({"p", "q"}),
        initial="p",
        delta={
            ("p", ENDMARKER): ("p", RIGHT),
            ("p", "a"): ("q", RIGHT),
            ("q", "a"): ("p", LEFT),
            ("q", ENDMARKER): ("p", RIGHT),
        },
        out={
            ("p", ENDMARKER): (),
            ("p", "a"): ("a",),
            ("q", "a"): (),
            ("q", ENDMARKER): (),
        },
    )


def test_loop_detected():
    r = eval_2dt(_oscillator(), parse_upword("(a)^w"), 50)
    assert r.status == "undefined"


def test_missing_transition_undefined():
    T = TwoWayTransducer(
        input_alphabet=frozenset("a"),
        output_alphabet=frozenset("a"),
        states=frozenset({"p", "q"}),
        initial="p",
        delta={("p", ENDMARKER): ("p", RIGHT), ("p", "a"): ("q", RIGHT)},
        out={("p", ENDMARKER): (), ("p", "a"): ("a",)},
    )
    r = eval_2dt(T, parse_upword("(a)^w"), 10)
    assert r.status == "undefined"


def test_inconclusive_budget(replace_2dt_m):
    r = eval_2dt(replace_2dt_m, parse_upword("(001)^w"), 50, step_budget=5)
    assert r.status == "inconclusive"
    assert r.steps == 5


def test_endmarker_must_move_right():
    with pytest.raises(ValueError):
        TwoWayTransducer(
            input_alphabet=frozenset("a"),
            output_alphabet=frozenset("a"),
            states=frozenset({"p"}),
            initial="p",
            delta={("p", ENDMARKER): ("p", LEFT)},
            out={("p", ENDMARKER): ()},
        )


def test_delta_out_same_domain():
    with pytest.raises(ValueError):
        TwoWayTransducer(
            input_alphabet=frozenset("a"),
            output_alphabet=frozenset("a"),
            states=frozenset({"p"}),
            initial="p",
            delta={("p", ENDMARKER): ("p", RIGHT)},
            out={},
        )


def test_lookbehind_refinement():
    """A copier that outputs A when the lookbehind has seen an even number
    of letters and B otherwise."""
    lb = LookbehindDFA(
        states=frozenset({"even", "odd"}),
        initial="even",
        delta={("even", "a"): "odd", ("odd", "a"): "even"},
    )
    T = TwoWayTransducer(
        input_alphabet=frozenset("a"),
        output_alphabet=frozenset("AB"),
        states=frozenset({"p"}),
        initial="p",
        delta={
            ("p", ENDMARKER): ("p", RIGHT),
            ("p", "a", "odd"): ("p", RIGHT),
            ("p", "a", "even"): ("p", RIGHT),
        },
        out={
            ("p", ENDMARKER): (),
            ("p", "a", "odd"): ("A",),
            ("p", "a", "even"): ("B",),
        },
        lookbehind=lb,
    )
    r = eval_2dt(T, parse_upword("(a)^w"), 6)
    assert (r.status, r.output) == ("ok", tuple("ABABAB"))


def test_json_roundtrip(tmp_path, replace_2dt_m):
    p = tmp_path / "t.json"
    twoway.save(replace_2dt_m, str(p))
    T2 = twoway.load(str(p))
    assert T2.delta == replace_2dt_m.delta
    assert T2.out == replace_2dt_m.out
    r1 = eval_2dt(T2, parse_upword("(02)^w"), 8)
    r2 = eval_2dt(replace_2dt_m, parse_upword("(02)^w"), 8)
    assert r1.output == r2.output and r1.status == r2.status
