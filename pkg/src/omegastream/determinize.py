"""Streaming determinizer: a 1-bounded register machine consuming the
annotated stream C0 x[1] C1 x[2] C2 ... and emitting f(x) incrementally.

The interpreter keeps the machine's state explicitly (the reachable state
space is finite but astronomically large, so it is never materialized):

- non-separable mode: out = common production of the surviving runs,
  lag(q) = the per-state remainder (bounded);
- separable mode: remainders can grow unboundedly but only by iterating a
  fixed word theta; the machine tracks a transient max_lag, per-state
  sub-theta words last(q), and theta-counters nb arranged along the tree
  of compatible subsets, with one overflow register out_pi per tree path.

Every step records the exact substitution applied to the registers
(out and the out_pi), so 1-boundedness can be checked on traces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, FrozenSet, List, Optional, Tuple

from .analysis import (
    AdvanceProfile,
    AnalysisContext,
    ContinuityViolation,
    is_continuous,
)
from .annotator import annotate
from .nft import ContractError, OneWayTransducer, normalize
from .sst import Reg
from .words import UPWord, Word, is_prefix, lcp_finite, up_starts_with


class InvariantError(Exception):
    def __init__(self, which: str, message: str):
        super().__init__(f"invariant {which}: {message}")
        self.which = which


def path_register(path: Tuple[FrozenSet[str], ...]) -> str:
    """Register name of a tree path; the root path is the out register."""
    if len(path) == 1:
        return "out"
    return "out@" + ">".join("{" + ",".join(sorted(C)) + "}" for C in path)


class _Recorder:
    """Per-step symbolic register store.

    Tokens always reference step-start register contents, so the recorded
    assignment is the one-transition substitution the machine applies."""

    def __init__(self, old: Dict[str, Word]):
        self.old = dict(old)
        self.sym: Dict[str, List] = {"out": [Reg("out")]}

    def fresh(self, name: str):
        self.sym[name] = []

    def append_letters(self, name: str, w):
        self.sym[name].extend(w)

    def splice(self, name: str, source: str):
        """Append the current symbolic value of `source` to `name`."""
        self.sym[name] = self.sym[name] + list(self.sym[source])

    def remap(self, mapping: Dict[str, Optional[str]]):
        """Rebuild the register set: mapping[new] = old-current name or None
        (fresh empty).  out must be mapped explicitly."""
        self.sym = {
            new: (list(self.sym[src]) if src is not None else [])
            for new, src in mapping.items()
        }

    def resolve(self, name: str) -> Word:
        out: List = []
        for t in self.sym[name]:
            if isinstance(t, Reg):
                out.extend(self.old[t])
            else:
                out.append(t)
        return tuple(out)

    def finish(self):
        assign = {name: tuple(toks) for name, toks in self.sym.items()}
        contents = {name: self.resolve(name) for name in self.sym}
        return assign, contents


@dataclass
class StepRecord:
    index: int
    letter: object
    mode: str
    C: Tuple[str, ...]
    lag: Dict[str, Word]
    max_lag: Word
    nb: Dict[str, Dict[str, int]]
    emitted_delta: Word
    assign: Dict[str, Tuple]
    pre_step: Dict[str, str]


class Determinizer:
    """The transition system; one instance per stream."""

    def __init__(self, ctx: AnalysisContext):
        self.ctx = ctx
        self.T = ctx.T
        self.trace: List[StepRecord] = []
        self._tree_cache: Dict[FrozenSet[str], List[Tuple]] = {}
        self.steps = 0

    # -- structure helpers -----------------------------------------------------

    def tree(self, C: FrozenSet[str]) -> List[Tuple[FrozenSet[str], ...]]:
        C = frozenset(C)
        if C in self._tree_cache:
            return self._tree_cache[C]
        comp = self.ctx.comp_subsets(C)
        paths: List[Tuple] = []

        def extend(path):
            paths.append(path)
            for D in comp:
                if D < path[-1]:
                    extend(path + (D,))

        extend((C,))
        self._tree_cache[C] = paths
        return paths

    def _children(self, Cn: FrozenSet[str]) -> List[FrozenSet[str]]:
        return [D for D in self.ctx.comp_subsets(Cn) if D != Cn]

    def lagging(self, q: str) -> bool:
        return len(self.lag[q]) < len(self.max_lag)

    # -- initialization --------------------------------------------------------

    def init(self, C0):
        C0 = frozenset(C0)
        if self.ctx.is_compatible(C0) is None:
            raise ContractError(f"initial set {sorted(C0)} is not compatible")
        self.C = C0
        self.J = C0
        self.pre_total = {q: q for q in C0}
        self.lag = {q: () for q in C0}
        self.max_lag: Word = ()
        self.emitted: List = []
        self.mode = "nonsep"
        self.theta: Word = ()
        self.nb: Dict[Tuple, Dict[str, int]] = {}
        self.last: Dict[str, Word] = {}
        self.out_regs: Dict[str, Word] = {}
        rec = _Recorder({"out": ()})
        if self.ctx.is_separable(C0) is not None:
            self._enter_separable(rec, {q: () for q in C0})
        self._commit(rec, letter=None, pre_step={q: q for q in C0})

    # -- the step dispatcher ---------------------------------------------------

    def step(self, a, C_next) -> Word:
        C_next = frozenset(C_next)
        rec = _Recorder({"out": tuple(self.emitted), **self.out_regs})
        for name in self.out_regs:
            rec.sym[name] = [Reg(name)]
        sa = self.ctx.analyze_step(self.C, (a,), C_next)
        if sa is None or set(sa.pre) != C_next:
            raise ContractError(
                f"annotated move {sorted(self.C)} --{a}--> {sorted(C_next)} "
                "is not a pre-step"
            )
        if self.mode == "nonsep":
            pre_step = dict(sa.pre)
            self._step_nonsep(rec, sa)
        elif sa.is_step:
            pre_step = dict(sa.pre)
            self._step_sep_aligned(rec, sa)
        else:
            pre_step = self._preprocess(rec, sa, a)
        return self._commit(rec, letter=a, pre_step=pre_step)

    def _commit(self, rec: _Recorder, letter, pre_step) -> Word:
        assign, contents = rec.finish()
        new_out = contents.pop("out")
        delta = new_out[len(self.emitted):]
        self.emitted.extend(delta)
        self.out_regs = contents
        self.trace.append(
            StepRecord(
                index=self.steps,
                letter=letter,
                mode=self.mode,
                C=tuple(sorted(self.C)),
                lag={q: self.lag[q] for q in sorted(self.lag)},
                max_lag=self.max_lag,
                nb={
                    path_register(p): dict(m) for p, m in self.nb.items()
                },
                emitted_delta=delta,
                assign=assign,
                pre_step=pre_step,
            )
        )
        self.steps += 1
        return delta

    # -- non-separable mode ----------------------------------------------------

    def _step_nonsep(self, rec: _Recorder, sa):
        delta = {
            q: self.lag[sa.pre[q]] + sa.val[q] for q in sa.target
        }
        c = reduce(lcp_finite, [delta[q] for q in sorted(sa.target)])
        rec.append_letters("out", c)
        alphas = {q: delta[q][len(c):] for q in sa.target}
        self.pre_total = {q: self.pre_total[sa.pre[q]] for q in sa.target}
        self.C = sa.target
        self.J = frozenset(self.pre_total.values())
        if self.ctx.is_separable(self.C) is not None:
            self._enter_separable(rec, alphas)
        else:
            self.mode = "nonsep"
            self.lag = alphas
            self.max_lag = ()
            self.last = {}
            self.nb = {}

    def _enter_separable(self, rec: _Recorder, alphas: Dict[str, Word]):
        profile = AdvanceProfile(
            common=(),
            advance=dict(alphas),
            max_advance=max(alphas.values(), key=len),
        )
        lf = self.ctx.looping_future(self.C, profile)
        self.mode = "sep"
        self.theta = lf.theta
        k = len(lf.tau)
        self.max_lag = lf.tau
        self.lag = {q: alphas[q][:k] for q in self.C}
        self.last = {q: alphas[q][k:] for q in self.C}
        for q in self.C:
            if not is_prefix(self.lag[q], self.max_lag):
                raise InvariantError("4a", f"lag({q}) escapes max_lag")
        paths = self.tree(self.C)
        self.nb = {p: {q: 0 for q in p[-1]} for p in paths}
        for p in paths:
            if len(p) > 1:
                rec.fresh(path_register(p))
        self._resize_last(rec)

    # -- toolbox ---------------------------------------------------------------

    def _resize_last(self, rec: _Recorder):
        th = self.theta
        L = len(th)
        root = (self.C,)
        for q in self.C:
            w = self.last[q]
            n = 0
            while len(w) >= L and w[:L] == th:
                w = w[L:]
                n += 1
            if not is_prefix(w, th):
                raise InvariantError("4c", f"last({q}) is not a theta prefix")
            self.last[q] = w
            self.nb[root][q] += n
        self._down(rec, root)
        for p, m in self.nb.items():
            if any(v > 2 for v in m.values()):
                raise InvariantError("toolbox", f"nb not clamped on {p}")

    def _down(self, rec: _Recorder, path: Tuple):
        Cn = path[-1]
        m = min(self.nb[path][q] for q in Cn)
        if m > 0:
            rec.append_letters(path_register(path), self.theta * m)
            for q in Cn:
                self.nb[path][q] -= m
        for q in Cn:
            if self.nb[path][q] > 2:
                over = self.nb[path][q] - 2
                for D in self._children(Cn):
                    if q in D:
                        self.nb[path + (D,)][q] += over
                self.nb[path][q] = 2
        for D in self._children(Cn):
            self._down(rec, path + (D,))

    # -- separable mode, aligned step ------------------------------------------

    def _step_sep_aligned(self, rec: _Recorder, sa):
        pre_a, val = sa.pre, sa.val
        target = sa.target
        new_tree = self.tree(target)
        mapping: Dict[str, Optional[str]] = {"out": "out"}
        new_nb: Dict[Tuple, Dict[str, int]] = {}
        for path in new_tree:
            chain = tuple(
                frozenset(pre_a[q] for q in D) for D in path
            )
            rho = [chain[0]]
            for Ci in chain[1:]:
                if Ci != rho[-1]:
                    rho.append(Ci)
            rho = tuple(rho)
            single_tail = len(chain) == 1 or chain[-1] != chain[-2]
            name = path_register(path)
            if single_tail:
                if rho not in self.nb:
                    raise InvariantError(
                        "2", f"remapped path {rho} missing from the tree"
                    )
                new_nb[path] = {
                    q: self.nb[rho][pre_a[q]] for q in path[-1]
                }
                if name != "out":
                    mapping[name] = path_register(rho)
            else:
                new_nb[path] = {q: 0 for q in path[-1]}
                if name != "out":
                    mapping[name] = None
        rec.remap(mapping)
        new_lag = {}
        new_last = {}
        for q in target:
            p = pre_a[q]
            if not is_prefix(self.lag[p], self.max_lag):
                raise InvariantError("4a", f"lag({p}) escapes max_lag")
            k = len(self.max_lag) - len(self.lag[p])
            v = val[q]
            new_lag[q] = self.lag[p] + v[:k]
            new_last[q] = self.last[p] + v[k:]
            if not is_prefix(new_lag[q], self.max_lag):
                raise ContinuityViolation(
                    f"production at {q} leaves the looping future"
                )
        c = reduce(lcp_finite, [new_lag[q] for q in sorted(target)])
        rec.append_letters("out", c)
        self.lag = {q: new_lag[q][len(c):] for q in target}
        self.last = new_last
        self.max_lag = self.max_lag[len(c):]
        self.nb = new_nb
        self.pre_total = {q: self.pre_total[pre_a[q]] for q in target}
        self.C = target
        self.J = frozenset(self.pre_total.values())
        self._resize_last(rec)

    # -- separable mode, preprocessing -----------------------------------------

    def _preprocess(self, rec: _Recorder, sa, a) -> Dict[str, str]:
        Cp = frozenset(sa.pre.values())
        if Cp == self.C:
            raise ContractError("preprocess requires a strict pre-image")
        pi = (self.C, Cp)
        if pi not in self.nb:
            raise ContractError(
                f"pre-image {sorted(Cp)} is not a compatible subset"
            )
        root = (self.C,)
        close = all(
            (not any(self.nb[p].values()))
            and self.out_regs.get(path_register(p), ()) == ()
            for p in self.nb
            if len(p) > 2 and p[:2] == pi
        )
        th = self.theta
        pi_name = path_register(pi)
        if close:
            nbC, nbCC = self.nb[root], self.nb[pi]
            if any(self.lagging(q) for q in Cp):
                if self.out_regs.get(pi_name, ()) != ():
                    raise InvariantError(
                        "4d", "lagging state with nonempty branch register"
                    )
                delta = {
                    q: self.lag[q] + th * (nbC[q] + nbCC[q]) + self.last[q]
                    for q in Cp
                }
                c = reduce(lcp_finite, [delta[q] for q in sorted(Cp)])
                rec.append_letters("out", c)
            else:
                delta = {
                    q: th * (nbC[q] + nbCC[q]) + self.last[q] for q in Cp
                }
                c = reduce(lcp_finite, [delta[q] for q in sorted(Cp)])
                rec.append_letters("out", self.max_lag)
                rec.splice("out", pi_name)
                rec.append_letters("out", c)
            alphas = {q: delta[q][len(c):] for q in Cp}
            # drop the separable structure; the branch registers vanish
            rec.remap({"out": "out"})
            self.pre_total = {q: self.pre_total[q] for q in Cp}
            self.C = Cp
            self.J = frozenset(self.pre_total.values())
            self.mode = "nonsep"
            self.lag = alphas
            self.max_lag = ()
            self.last = {}
            self.nb = {}
            if self.ctx.is_separable(Cp) is not None:
                self._enter_separable(rec, alphas)
        else:
            c = reduce(lcp_finite, [self.lag[q] for q in sorted(Cp)])
            rec.append_letters("out", c)
            rec.splice("out", pi_name)
            new_lag = {q: self.lag[q][len(c):] for q in Cp}
            new_last = {
                q: th * self.nb[root][q] + self.last[q] for q in Cp
            }
            self.max_lag = self.max_lag[len(c):]
            mapping: Dict[str, Optional[str]] = {"out": "out"}
            new_nb: Dict[Tuple, Dict[str, int]] = {}
            for path in self.tree(Cp):
                old = (self.C,) + path
                if path == (Cp,):
                    new_nb[path] = dict(self.nb[pi])
                else:
                    if old not in self.nb:
                        raise InvariantError(
                            "2", f"subtree path {old} missing from the tree"
                        )
                    new_nb[path] = dict(self.nb[old])
                    mapping[path_register(path)] = path_register(old)
            rec.remap(mapping)
            self.nb = new_nb
            self.lag = new_lag
            self.last = new_last
            self.pre_total = {q: self.pre_total[q] for q in Cp}
            self.C = Cp
            self.J = frozenset(self.pre_total.values())
            self._resize_last(rec)
        # the pending letter: C', a, C_next is now a step
        sa2 = self.ctx.analyze_step(self.C, (a,), sa.target)
        if sa2 is None or set(sa2.pre) != sa.target or not sa2.is_step:
            raise ContractError("preprocessed move did not become a step")
        if self.mode == "nonsep":
            self._step_nonsep(rec, sa2)
        else:
            self._step_sep_aligned(rec, sa2)
        return dict(sa2.pre)


# -- invariant checking ------------------------------------------------------------


class InvariantChecker:
    """Oracle-backed per-step verification of the determinizer invariants.

    Maintains the run productions val(q) incrementally (mirroring the
    machine), spot-recomputes them from scratch periodically, and checks
    each invariant against the machine's state."""

    def __init__(self, det: Determinizer, x: Optional[UPWord] = None,
                 recompute_every: int = 25, future_letters: int = 6):
        self.det = det
        self.x = x
        self.recompute_every = recompute_every
        self.future_letters = future_letters
        self.letters: List = []
        self.vals: Dict[str, Word] = {q: () for q in det.C}
        self.history: List[Dict] = [
            {"C": det.C, "vals": dict(self.vals), "pre": {q: q for q in det.C}}
        ]
        self.checked = 0
        self.check()

    def after_step(self, a, pre_step: Dict[str, str]):
        det = self.det
        sa = det.ctx.analyze_step(self.history[-1]["C"], (a,), det.C)
        if sa is None:
            raise InvariantError("2", "consumed move is not a pre-step")
        self.letters.append(a)
        self.vals = {
            q: self.vals[sa.pre[q]] + sa.val[q] for q in det.C
        }
        self.history.append(
            {"C": det.C, "vals": dict(self.vals), "pre": dict(sa.pre)}
        )
        if len(self.letters) % self.recompute_every == 0:
            self._spot_recompute()
        self.check()

    def _spot_recompute(self):
        det = self.det
        sa = det.ctx.analyze_step(det.J, tuple(self.letters), det.C)
        if sa is None or not sa.is_step:
            raise InvariantError("2", "J, x[1:i], C is not an initial step")
        for q in det.C:
            if sa.val[q] != self.vals[q]:
                raise InvariantError(
                    "2", f"incremental val({q}) drifted from recomputation"
                )
            if sa.pre[q] != det.pre_total[q]:
                raise InvariantError("2", f"pre({q}) drifted")

    # individual invariants ----------------------------------------------------

    def check(self):
        det = self.det
        emitted = tuple(det.emitted)
        # inv 2 (shape): pre maps into J and covers it
        if frozenset(det.pre_total.values()) != det.J:
            raise InvariantError("2", "pre image differs from J")
        for q in det.C:
            if not is_prefix(emitted, self.vals[q]) and not is_prefix(
                self.vals[q], emitted
            ):
                raise InvariantError("soundness", f"out diverges from val({q})")
        if det.mode == "nonsep":
            common = reduce(
                lcp_finite, [self.vals[q] for q in sorted(det.C)]
            )
            if emitted != common:
                raise InvariantError("3a", "out != common production")
            for q in det.C:
                if det.lag[q] != self.vals[q][len(common):]:
                    raise InvariantError("3b", f"lag({q}) != advance({q})")
        else:
            self._check_sep(emitted)
        self.checked += 1

    def _check_sep(self, emitted: Word):
        det = self.det
        th = det.theta
        if not any(len(det.lag[q]) == 0 for q in det.C):
            raise InvariantError("4a", "no state with empty lag")
        for q in det.C:
            if not is_prefix(det.lag[q], det.max_lag):
                raise InvariantError("4a", f"lag({q}) not a prefix of max_lag")
        for p in det.nb:
            if len(p) == 1:
                continue
            w = det.out_regs.get(path_register(p), ())
            if len(w) % len(th) != 0 or any(
                w[i:i + len(th)] != th for i in range(0, len(w), len(th))
            ):
                raise InvariantError("4b", f"out_{p} not a power of theta")
        for q in det.C:
            w = det.last[q]
            if len(w) >= len(th) or not is_prefix(w, th):
                raise InvariantError("4c", f"last({q}) not below theta")
        for q in det.C:
            if det.lagging(q):
                if det.last[q] != ():
                    raise InvariantError("4d", f"lagging {q} with last != eps")
                for p, m in det.nb.items():
                    if q in p[-1] and m[q] != 0:
                        raise InvariantError("4d", f"lagging {q} with nb != 0")
                    if (
                        q in p[-1]
                        and len(p) > 1
                        and det.out_regs.get(path_register(p), ()) != ()
                    ):
                        raise InvariantError(
                            "4d", f"lagging {q} with out_pi != eps"
                        )
        self._check_past(emitted)
        self._check_future(emitted)
        self._check_decompositions()

    def _check_past(self, emitted: Word):
        det = self.det
        th = det.theta
        for p in det.nb:
            if len(p[-1]) != 1:
                continue
            (q,) = p[-1]
            if det.lagging(q):
                expected = emitted + det.lag[q]
            else:
                expected = emitted + det.max_lag + th * det.nb[(det.C,)][q]
                for i in range(1, len(p)):
                    sub = p[: i + 1]
                    expected = (
                        expected
                        + det.out_regs.get(path_register(sub), ())
                        + th * det.nb[sub][q]
                    )
                expected = expected + det.last[q]
            if expected != self.vals[q]:
                raise InvariantError(
                    "4e", f"stored decomposition of val({q}) is wrong"
                )

    def _check_future(self, emitted: Word):
        det = self.det
        if self.x is None:
            return
        future = UPWord(prefix=det.max_lag, period=det.theta)
        i = len(self.letters)
        u: List = []
        C = det.C
        vals = dict(self.vals)
        for m in range(self.future_letters):
            a = self.x.letter_at(i + m)
            D = frozenset(
                q2 for q in C for q2, _ in det.T.succ(q, a)
            )
            if not D:
                break
            sa = det.ctx.analyze_step(C, (a,), D)
            if sa is None:
                break
            vals = {q: vals[sa.pre[q]] + sa.val[q] for q in D}
            C = D
            full = det.ctx.analyze_step(det.C, tuple(u) + (a,), D)
            u.append(a)
            if full is None or not full.is_step:
                # only extensions forming a step from det.C are constrained
                continue
            for q in D:
                w = vals[q]
                if not is_prefix(emitted, w):
                    if not is_prefix(w, emitted):
                        raise InvariantError(
                            "4f", f"future val({q}) diverges from out"
                        )
                    continue
                rest = w[len(emitted):]
                if not up_starts_with(future, rest):
                    raise InvariantError(
                        "4f", f"future val({q}) escapes max_lag theta^w"
                    )

    def _check_decompositions(self):
        det = self.det
        two_theta = 2 * len(det.theta)
        for p in det.nb:
            if len(p) == 1:
                continue
            deeper = [
                p2 for p2 in det.nb if len(p2) > len(p) and p2[: len(p)] == p
            ]
            close = all(
                not any(det.nb[p2].values())
                and det.out_regs.get(path_register(p2), ()) == ()
                for p2 in deeper
            )
            if close:
                continue
            if not self._find_decomposition(p[-1], two_theta):
                raise InvariantError(
                    "4g", f"no split point found for non-close path {p}"
                )

    def _find_decomposition(self, Cn: FrozenSet[str], bound: int) -> bool:
        # walk the run states of Cn backwards through the stored pre maps,
        # looking for a past position whose advances already spread by >= bound
        states = {q: q for q in Cn}
        for j in range(len(self.history) - 1, -1, -1):
            snap = self.history[j]
            vals = [snap["vals"][states[q]] for q in sorted(Cn)]
            common = reduce(lcp_finite, vals)
            if max(len(v) for v in vals) - len(common) >= bound:
                return True
            if j > 0:
                states = {q: snap["pre"][states[q]] for q in Cn}
        return False


# -- pipeline ---------------------------------------------------------------------


@dataclass
class PipelineResult:
    emitted: Word
    steps: int
    trace: List[StepRecord]
    transducer: OneWayTransducer = field(repr=False)
    context: AnalysisContext = field(repr=False)
    annotations: List = field(default_factory=list, repr=False)


def run_pipeline(
    T: OneWayTransducer,
    x: UPWord,
    n: int,
    check_invariants: bool = False,
    max_lookahead: Optional[int] = None,
    bound: Optional[int] = None,
    theta_policy: str = "capped",
) -> PipelineResult:
    """Normalize, annotate and determinize T over the first n letters of x."""
    ok, witness = is_continuous(T, bound=bound)
    if not ok:
        raise ContinuityViolation(
            f"function is not continuous: outputs {witness.words[0]} and "
            f"{witness.words[1]} diverge on arbitrarily close inputs"
        )
    Tn = normalize(T)
    ctx = AnalysisContext(Tn, bound=bound, theta_policy=theta_policy)
    stream = (x.letter_at(i) for i in range(10 * n + 1000))
    ann = annotate(ctx, stream, max_lookahead=max_lookahead)
    C0 = next(ann)
    det = Determinizer(ctx)
    det.init(C0)
    checker = InvariantChecker(det, x) if check_invariants else None
    annotations = [C0]
    for a, C in ann:
        det.step(a, C)
        annotations.append((a, C))
        if checker is not None:
            checker.after_step(a, det.trace[-1].pre_step)
        if det.steps - 1 >= n:
            break
    return PipelineResult(
        emitted=tuple(det.emitted),
        steps=det.steps - 1,
        trace=det.trace,
        transducer=Tn,
        context=ctx,
        annotations=annotations,
    )


def one_bounded_trace(trace: List[StepRecord]) -> bool:
    """Whether every window of the trace's substitutions is 1-bounded."""
    from .sst import compose_counting, counting_matrix

    cap = 2
    window_products: set = set()
    for rec in trace:
        m = counting_matrix(rec.assign, cap)
        frozen = tuple(sorted(m.items()))
        new_products = {frozen}
        for p in window_products:
            new_products.add(
                tuple(sorted(compose_counting(dict(p), m, cap).items()))
            )
        window_products = new_products
        for p in window_products:
            if any(c > 1 for _, c in p):
                return False
    return True
