"""The streaming determinizer: initialization, stepping, the toolbox, the
full pipeline, and trace 1-boundedness."""

import random

import pytest

from omegastream import nft
from omegastream.analysis import AnalysisContext, ContinuityViolation
from omegastream.determinize import (
    Determinizer,
    InvariantChecker,
    InvariantError,
    _Recorder,
    one_bounded_trace,
    path_register,
    run_pipeline,
)
from omegastream.nft import ContractError
from omegastream.words import parse_upword, up_starts_with

from conftest import flushy_corpus


@pytest.fixture()
def ddet(double_t):
    ctx = AnalysisContext(nft.normalize(double_t))
    det = Determinizer(ctx)
    det.init(frozenset({"q0"}))
    return det


def test_path_register():
    C = frozenset({"q1", "q2"})
    assert path_register((C,)) == "out"
    assert path_register((C, frozenset({"q1"}))) == "out@{q1,q2}>{q1}"


def test_init(ddet, replace_t):
    assert ddet.mode == "nonsep"
    assert ddet.lag == {"q0": ()}
    assert ddet.emitted == []
    rctx = AnalysisContext(nft.normalize(replace_t))
    rdet = Determinizer(rctx)
    rdet.init(frozenset({"q0"}))
    assert rdet.mode == "nonsep"


def test_init_rejects_incompatible(replace_t):
    rctx = AnalysisContext(nft.normalize(replace_t))
    det = Determinizer(rctx)
    with pytest.raises(ContractError):
        det.init(frozenset({"q1", "q2"}))


def test_first_step_double(ddet):
    delta = ddet.step("0", frozenset({"q1", "q2"}))
    assert delta == ("0",)
    assert ddet.mode == "sep"
    # remainders: q1 caught up, q2 holds one pending 0 (split between the
    # transient lag and the sub-theta last)
    assert ddet.lag["q1"] + ddet.last["q1"] == ()
    assert ddet.lag["q2"] + ddet.last["q2"] == ("0",)


def test_step_replace(replace_t):
    rctx = AnalysisContext(nft.normalize(replace_t))
    det = Determinizer(rctx)
    det.init(frozenset({"q0"}))
    delta = det.step("1", frozenset({"q0"}))
    assert delta == ("1",)
    assert det.mode == "nonsep"
    assert det.lag == {"q0": ()}


def test_step_rejects_non_prestep(ddet):
    with pytest.raises(ContractError):
        ddet.step("0", frozenset({"q0"}))


# -- toolbox -----------------------------------------------------------------


def _sep_state(double_t):
    ctx = AnalysisContext(nft.normalize(double_t))
    det = Determinizer(ctx)
    det.init(frozenset({"q0"}))
    det.step("0", frozenset({"q1", "q2"}))
    assert det.mode == "sep"
    return det


def _run_resize(det):
    rec = _Recorder({"out": tuple(det.emitted), **det.out_regs})
    from omegastream.sst import Reg

    for name in det.out_regs:
        rec.sym[name] = [Reg(name)]
    det._resize_last(rec)
    _, contents = rec.finish()
    det.emitted = list(contents.pop("out"))
    det.out_regs = contents


def test_resize_factors_theta_powers(double_t):
    det = _sep_state(double_t)
    th = det.theta
    root = (det.C,)
    assert det.nb[root] == {"q1": 0, "q2": 0}
    tail = det.last["q2"]
    det.last["q2"] = th * 2 + tail
    _run_resize(det)
    # last(q2) = theta^2 w with |w| < |theta|  ->  last(q2) = w, nb += 2
    # (q1's counter is 0, so nothing is emitted and nothing overflows)
    assert det.last["q2"] == tail
    assert det.nb[root]["q2"] == 2


def test_down_clamps_and_pushes_overflow(double_t):
    det = _sep_state(double_t)
    th = det.theta
    root = (det.C,)
    p1 = (det.C, frozenset({"q1"}))
    det.nb[root]["q1"] = 4
    det.nb[root]["q2"] = 0
    _run_resize(det)
    # min is 0, so the root clamps q1 to 2 and sends 2 to the singleton
    # child, which immediately turns them into theta-powers in its register
    assert det.nb[root]["q1"] == 2
    assert det.nb[p1]["q1"] == 0
    assert det.out_regs[path_register(p1)] == th * 2
    for m in det.nb.values():
        assert all(0 <= v <= 2 for v in m.values())


def test_down_emits_common_minimum(double_t):
    det = _sep_state(double_t)
    th = det.theta
    root = (det.C,)
    if det.max_lag == ():
        before = len(det.emitted)
        det.nb[root] = {q: 1 for q in det.C}
        _run_resize(det)
        assert tuple(det.emitted[before:]) == th
        assert all(v == 0 for v in det.nb[root].values())


# -- pipeline ----------------------------------------------------------------


def test_pipeline_goldens(replace_t, double_t):
    r = run_pipeline(replace_t, parse_upword("(001)^w"), 30)
    assert r.emitted == ("1",) * 30
    assert len(r.emitted) >= 20
    r2 = run_pipeline(double_t, parse_upword("002(0)^w"), 40)
    assert r2.emitted == tuple("000020")
    assert up_starts_with(parse_upword("00002(0)^w"), r2.emitted)


def test_pipeline_rejects_discontinuous(normalize_t):
    with pytest.raises(ContinuityViolation):
        run_pipeline(normalize_t, parse_upword("(01)^w"), 10)


def test_prefix_soundness_and_invariants(replace_t, double_t):
    for T in (replace_t, double_t):
        for x in flushy_corpus(5):
            y = nft.oracle_eval(T, x)
            assert y is not None
            r = run_pipeline(T, x, 80, check_invariants=True)
            emitted = ()
            for rec in r.trace:
                emitted = emitted + rec.emitted_delta
                assert up_starts_with(y, emitted)


def test_one_bounded_traces(replace_t, double_t):
    for T in (replace_t, double_t):
        for x in flushy_corpus(4):
            r = run_pipeline(T, x, 60)
            assert one_bounded_trace(r.trace)


def test_invariant_checker_catches_corruption(double_t):
    ctx = AnalysisContext(nft.normalize(double_t))
    det = Determinizer(ctx)
    det.init(frozenset({"q0"}))
    checker = InvariantChecker(det)
    x = parse_upword("(001)^w")
    ann_C = [frozenset({"q1", "q2"}), frozenset({"q1", "q2"}), frozenset({"q0"})]
    for a, C in zip("001", ann_C):
        det.step(a, C)
        checker.after_step(a, det.trace[-1].pre_step)
    det.lag = {q: det.lag[q] + ("2",) for q in det.lag}
    with pytest.raises(InvariantError):
        checker.check()


def test_trace_records(double_t):
    r = run_pipeline(double_t, parse_upword("(012)^w"), 12)
    assert r.trace[0].letter is None
    assert [rec.index for rec in r.trace] == list(range(len(r.trace)))
    for rec in r.trace[1:]:
        assert rec.mode in ("sep", "nonsep")
        assert isinstance(rec.assign, dict) and "out" in rec.assign
