"""The online annotator producing the compatible-set stream."""

import random

import pytest

from omegastream import nft
from omegastream.analysis import AnalysisContext
from omegastream.annotator import DivergedError, annotate, default_max_lookahead
from omegastream.words import parse_upword

from conftest import in_domain_corpus


def _annotations(ctx, x, n):
    ann = annotate(ctx, (x.letter_at(i) for i in range(10 * n + 500)))
    C0 = next(ann)
    items = [next(ann) for _ in range(n)]
    return C0, items


def test_golden_double(double_t):
    ctx = AnalysisContext(nft.normalize(double_t))
    C0, items = _annotations(ctx, parse_upword("(001)^w"), 6)
    assert C0 == frozenset({"q0"})
    expect = [
        ("0", {"q1", "q2"}),
        ("0", {"q1", "q2"}),
        ("1", {"q0"}),
        ("0", {"q1", "q2"}),
        ("0", {"q1", "q2"}),
        ("1", {"q0"}),
    ]
    assert [(a, set(C)) for a, C in items] == expect


def test_golden_replace(replace_t):
    ctx = AnalysisContext(nft.normalize(replace_t))
    C0, items = _annotations(ctx, parse_upword("(1)^w"), 4)
    assert C0 == frozenset({"q0"})
    assert all((a, set(C)) == ("1", {"q0"}) for a, C in items)


def test_default_max_lookahead(double_t):
    assert default_max_lookahead(double_t) == 270


def test_deterministic(double_t):
    ctx = AnalysisContext(nft.normalize(double_t))
    x = parse_upword("01(0012)^w")
    a = _annotations(ctx, x, 30)
    b = _annotations(ctx, x, 30)
    assert a == b


def test_divergence(replace_t):
    """On (0)^w the cover can never be verified: replace needs a non-0
    letter to disambiguate its guess."""
    ctx = AnalysisContext(nft.normalize(replace_t))
    ann = annotate(ctx, ("0" for _ in range(10 ** 6)), max_lookahead=50)
    with pytest.raises(DivergedError):
        next(ann)
        for _ in range(200):
            next(ann)


def test_prestep_chain_and_run_containment(replace_t, double_t):
    """Consecutive annotations form pre-steps, each C is compatible, and
    the accepting run's state at every position lies in the annotation."""
    rng = random.Random(23)
    for T in (replace_t, double_t):
        Tn = nft.normalize(T)
        ctx = AnalysisContext(Tn)
        for x in in_domain_corpus(Tn, rng, "012", 6):
            C0, items = _annotations(ctx, x, 30)
            rl = nft.oracle_run(Tn, x)
            stem, loop = rl.stem_states, rl.loop_states

            def run_state(i):
                if i < len(stem):
                    return stem[i]
                return loop[(i - (len(stem) - 1)) % (len(loop) - 1)]

            assert ctx.is_compatible(C0) is not None
            assert run_state(0) in C0
            prev = C0
            for i, (a, C) in enumerate(items, start=1):
                assert ctx.is_compatible(C) is not None
                sa = ctx.analyze_step(prev, (a,), C)
                assert sa is not None and set(sa.pre) == set(C)
                assert run_state(i) in C
                prev = C
