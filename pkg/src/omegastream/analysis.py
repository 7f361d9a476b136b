"""Structural analysis of unambiguous transducers over omega-words.

Everything here works on a normalized (unambiguous, clean, trim) machine:
compatible state sets and their witnesses, pre-steps/steps with predecessor
and production maps, the common/advance split of an initial step's
productions, end-words, separability, looping futures (tau, theta), and the
continuity decision itself.

An AnalysisContext memoizes the expensive searches (tuple-product lassos,
compatible subsets, theta) for one machine.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import reduce
from math import ceil
from typing import Dict, FrozenSet, List, Optional, Tuple

from .nft import OneWayTransducer, accepting_future, ContractError
from .words import (
    UPWord,
    Word,
    canonicalize,
    concat_up,
    lcp_finite,
    lcm,
    mutual_prefixes,
    strip_prefix,
    up_equal,
    up_starts_with,
    word,
)

NODE_BUDGET = 400_000
OMEGA_CAP = 100_000


class ContinuityViolation(Exception):
    """Production words that should be mutual prefixes are not."""


class BudgetExceeded(Exception):
    """A bounded search ran out of its node budget."""


@dataclass
class CompatibleSet:
    states: FrozenSet[str]
    d: Dict[str, str]
    u: Word
    u_loop: Word
    alphas: Dict[str, Word]       # outputs along u, per source state
    loop_alphas: Dict[str, Word]  # outputs along the loop, per source state


@dataclass
class StepAnalysis:
    source: FrozenSet[str]
    word: Word
    target: FrozenSet[str]
    pre: Dict[str, str]
    val: Dict[str, Word]
    is_step: bool
    initial: bool


@dataclass
class AdvanceProfile:
    common: Word
    advance: Dict[str, Word]
    max_advance: Word


@dataclass
class LoopingFuture:
    tau: Word
    theta: Word
    period_length: int


@dataclass
class SeparabilityWitness:
    i: Dict[str, str]
    ell: Dict[str, str]
    u: Word
    u_loop: Word
    u_tail: Word
    loop_outputs: Dict[str, Word]
    unequal_pair: Tuple[str, str]


@dataclass
class ContinuityWitness:
    u: Word
    u_loop: Word
    starts: Tuple[str, str]
    anchor: Tuple[str, str]
    outputs: Tuple[Word, Word]
    loop_outputs: Tuple[Word, Word]
    words: Tuple[UPWord, UPWord]


# -- tuple-product searches ---------------------------------------------------


def _tuple_successors(T: OneWayTransducer, tup, a):
    per = [T.succ(q, a) for q in tup]
    if any(not s for s in per):
        return
    for combo in itertools.product(*per):
        yield tuple(c[0] for c in combo), tuple(c[1] for c in combo)


def _tuple_bfs(T: OneWayTransducer, starts, budget=NODE_BUDGET):
    """Forward BFS over state tuples; parents[t] = (prev, letter, outs)."""
    parents = {t: None for t in starts}
    queue = deque(starts)
    while queue:
        t = queue.popleft()
        for a in sorted(T.input_alphabet, key=str):
            for nxt, outs in _tuple_successors(T, t, a):
                if nxt not in parents:
                    if len(parents) >= budget:
                        raise BudgetExceeded("tuple-product search too large")
                    parents[nxt] = (t, a, outs)
                    queue.append(nxt)
    return parents


def _tuple_path(parents, node):
    """Reconstruct (letters, per-component outputs, start) to node."""
    letters: List = []
    outs_rev: List = []
    cur = node
    while parents[cur] is not None:
        prev, a, outs = parents[cur]
        letters.append(a)
        outs_rev.append(outs)
        cur = prev
    letters.reverse()
    outs_rev.reverse()
    k = len(node)
    outputs = [tuple(b for step in outs_rev for b in step[i]) for i in range(k)]
    return tuple(letters), outputs, cur


def _tuple_cycle(T: OneWayTransducer, t, budget=NODE_BUDGET,
                 final_component=None, weight_idx=None):
    """A cycle t ->+ t in the tuple graph.

    final_component: if set, some visited tuple along the cycle must have a
    final state at any component (checked on arrival tuples).
    weight_idx: if set to (i, j), require that the cycle's outputs at
    components i and j have different total lengths; the search space then
    carries the running length difference.
    """
    finals = T.final

    def feature(tup):
        if final_component is None:
            return True
        return any(q in finals for q in tup)

    # node: (tuple, seen_final_flag, weight_diff)
    start = (t, feature(t) if final_component is not None else True, 0)
    parents = {start: None}
    queue = deque([start])
    wcap = None
    if weight_idx is not None:
        wcap = 4 * _max_out_len(T) * (len(T.states) ** len(t) + 2)
    while queue:
        node = queue.popleft()
        tup, flag, diff = node
        for a in sorted(T.input_alphabet, key=str):
            for nxt, outs in _tuple_successors(T, tup, a):
                d2 = diff
                if weight_idx is not None:
                    i, j = weight_idx
                    d2 = diff + len(outs[i]) - len(outs[j])
                    if abs(d2) > wcap:
                        continue
                f2 = flag or feature(nxt)
                key = (nxt, f2, d2)
                if nxt == t and f2 and (weight_idx is None or d2 != 0):
                    # found; reconstruct through parents
                    letters = [a]
                    outs_rev = [outs]
                    cur = node
                    while parents[cur] is not None:
                        prev, la, lo = parents[cur]
                        letters.append(la)
                        outs_rev.append(lo)
                        cur = prev
                    letters.reverse()
                    outs_rev.reverse()
                    k = len(t)
                    outputs = [
                        tuple(b for step in outs_rev for b in step[i])
                        for i in range(k)
                    ]
                    return tuple(letters), outputs
                if key not in parents:
                    if len(parents) >= budget:
                        raise BudgetExceeded("tuple-cycle search too large")
                    parents[key] = (node, a, outs)
                    queue.append(key)
    return None


def _max_out_len(T: OneWayTransducer) -> int:
    return max((len(o) for o in T.transitions.values()), default=0)


# -- context -------------------------------------------------------------------


class AnalysisContext:
    """Memoized analysis session for one normalized transducer."""

    def __init__(self, T: OneWayTransducer, bound: Optional[int] = None,
                 m_override: Optional[int] = None,
                 theta_policy: str = "capped"):
        self.T = T
        self.bound = bound
        self.M = m_override if m_override is not None else max(10, _max_out_len(T))
        if theta_policy not in ("lcm", "capped"):
            raise ValueError(f"unknown theta policy {theta_policy!r}")
        self.theta_policy = theta_policy
        self._compat: Dict[FrozenSet[str], Optional[CompatibleSet]] = {}
        self._separ: Dict[FrozenSet[str], Optional[SeparabilityWitness]] = {}
        self._ends: Dict[FrozenSet[str], Dict[str, UPWord]] = {}
        self._theta: Optional[int] = None

    # compatible sets ---------------------------------------------------------

    def is_compatible(self, C) -> Optional[CompatibleSet]:
        C = frozenset(C)
        if not C:
            return None
        if C in self._compat:
            return self._compat[C]
        order = tuple(sorted(C))
        base = order
        res = None
        parents = _tuple_bfs(self.T, [base])
        for t in sorted(parents, key=str):
            if not any(q in self.T.final for q in t):
                continue
            cyc = _tuple_cycle(self.T, t)
            if cyc is None:
                continue
            u, alphas, _ = _tuple_path(parents, t)
            u_loop, loop_alphas = cyc
            res = CompatibleSet(
                states=C,
                d={order[i]: t[i] for i in range(len(order))},
                u=u,
                u_loop=u_loop,
                alphas={order[i]: tuple(alphas[i]) for i in range(len(order))},
                loop_alphas={order[i]: tuple(loop_alphas[i]) for i in range(len(order))},
            )
            break
        self._compat[C] = res
        return res

    def comp_subsets(self, S) -> List[FrozenSet[str]]:
        S = sorted(S)
        out = []
        for r in range(1, len(S) + 1):
            for sub in itertools.combinations(S, r):
                if self.is_compatible(frozenset(sub)) is not None:
                    out.append(frozenset(sub))
        return out

    # steps --------------------------------------------------------------------

    def analyze_step(self, C, u, D) -> Optional[StepAnalysis]:
        return analyze_step(self.T, C, u, D)

    # ends ----------------------------------------------------------------------

    def end_words(self, C) -> Dict[str, UPWord]:
        C = frozenset(C)
        if C in self._ends:
            return self._ends[C]
        w = self.is_compatible(C)
        if w is None:
            raise ContractError(f"{sorted(C)} is not compatible")
        ends = {}
        for q in sorted(C):
            a, al = w.alphas[q], w.loop_alphas[q]
            if len(al) > 0:
                ends[q] = canonicalize(a, al)
            else:
                beta = accepting_future(self.T, w.d[q])
                if beta is None:
                    raise ContractError(f"state {w.d[q]} has no accepting future")
                ends[q] = concat_up(a, beta)
        self._ends[C] = ends
        return ends

    # separability ----------------------------------------------------------------

    def is_separable(self, C) -> Optional[SeparabilityWitness]:
        C = frozenset(C)
        if C in self._separ:
            return self._separ[C]
        res = self._search_separable(C)
        self._separ[C] = res
        return res

    def _search_separable(self, C) -> Optional[SeparabilityWitness]:
        if self.is_compatible(C) is None:
            return None
        T = self.T
        order = tuple(sorted(C))
        base = order
        starts = [tuple(c) for c in itertools.product(sorted(T.initial), repeat=len(order))]
        fwd = _tuple_bfs(T, starts)
        if base not in fwd:
            return None
        # adjacency restricted to forward-reachable tuples
        adj: Dict[tuple, List[tuple]] = {}
        for t in fwd:
            adj[t] = sorted(
                {nxt for a in T.input_alphabet for nxt, _ in _tuple_successors(T, t, a)
                 if nxt in fwd},
                key=str,
            )
        # tuples that can reach base
        rev: Dict[tuple, List[tuple]] = {t: [] for t in fwd}
        for t, ns in adj.items():
            for n in ns:
                rev[n].append(t)
        can_reach = {base}
        queue = deque([base])
        while queue:
            t = queue.popleft()
            for p in rev[t]:
                if p not in can_reach:
                    can_reach.add(p)
                    queue.append(p)
        anchors = sorted((t for t in fwd if t in can_reach), key=str)
        for i_idx in range(len(order)):
            for j_idx in range(len(order)):
                if i_idx == j_idx:
                    continue
                for t in anchors:
                    cyc = _tuple_cycle(T, t, weight_idx=(i_idx, j_idx))
                    if cyc is None:
                        continue
                    u, _, start = _tuple_path(fwd, t)
                    u_loop, loop_outs = cyc
                    # tail t -> base
                    tail = _tuple_bfs(T, [t])
                    if base not in tail:
                        continue
                    u_tail, _, _ = _tuple_path(tail, base)
                    return SeparabilityWitness(
                        i={order[k]: start[k] for k in range(len(order))},
                        ell={order[k]: t[k] for k in range(len(order))},
                        u=u,
                        u_loop=u_loop,
                        u_tail=u_tail,
                        loop_outputs={order[k]: tuple(loop_outs[k]) for k in range(len(order))},
                        unequal_pair=(order[i_idx], order[j_idx]),
                    )
        return None

    # theta ---------------------------------------------------------------------

    def theta_length(self) -> int:
        """The global period length Theta shared by all looping futures.

        Computed once per machine: the lcm of every loop-output length and
        end-word period length arising from separable compatible sets,
        scaled (under the default policy) to exceed four times the
        comparison bound, so that alignment adjustments stay within one
        period.
        """
        if self._theta is not None:
            return self._theta
        pool = {1}
        tau_lens = [0]
        for C in self.comp_subsets(self.T.states):
            w = self.is_separable(C)
            if w is None:
                continue
            compat = self.is_compatible(C)
            pool |= {len(o) for o in w.loop_outputs.values() if len(o) > 0}
            pool |= {len(o) for o in compat.loop_alphas.values() if len(o) > 0}
            ends = self.end_words(C)
            pool |= {len(e.period) for e in ends.values()}
            tau_lens.append(max(len(e.prefix) for e in ends.values()))
        base = reduce(lcm, pool)
        if self.theta_policy == "lcm":
            theta = base
        else:
            nq = len(self.T.states)
            omega_eff = min(self.M * nq ** nq, OMEGA_CAP)
            target = 4 * max(omega_eff, max(tau_lens), 1)
            theta = base * ceil(target / base)
        self._theta = theta
        return theta

    def looping_future(self, C, profile: AdvanceProfile) -> LoopingFuture:
        """(tau, theta) bounding all future productions from separable C.

        Both come from the end-word of a zero-advance state r: the step's
        remaining output is exactly advance(q) . end(q) for every q, and the
        zero-advance instance makes that word directly available.  tau is
        its transient prefix, theta the canonical period unrolled to the
        global Theta length.
        """
        C = frozenset(C)
        if self.is_separable(C) is None:
            raise ContractError(f"{sorted(C)} is not separable")
        zero = [q for q in sorted(C) if len(profile.advance[q]) == 0]
        if not zero:
            raise ContractError("no zero-advance state in profile")
        ends = self.end_words(C)
        y = ends[zero[0]]
        big_theta = self.theta_length()
        if big_theta % len(y.period) != 0:
            raise ContractError("theta pool missed an end-word period")
        k = len(y.prefix)
        tau = y.first(k)
        theta = y.first(k + big_theta)[k:]
        if not up_starts_with(y, profile.max_advance):
            raise ContinuityViolation(
                "max advance escapes the looping future; machine not continuous?"
            )
        return LoopingFuture(tau=tau, theta=theta, period_length=big_theta)


# -- step analysis (context-free) ----------------------------------------------


def analyze_step(T: OneWayTransducer, C, u, D) -> Optional[StepAnalysis]:
    """pre/val maps of the (pre-)step C, u, D; None when some target state
    has no u-run from C or the run is not unique."""
    C = frozenset(C)
    D = frozenset(D)
    u = word(u)
    # entries per state: {(start, output): multiplicity<=2}
    entries: Dict[str, Dict[Tuple[str, Word], int]] = {
        q: {(q, ()): 1} for q in C
    }
    for a in u:
        nxt: Dict[str, Dict[Tuple[str, Word], int]] = {}
        for q, cell in entries.items():
            for q2, out in T.succ(q, a):
                tgt = nxt.setdefault(q2, {})
                for (start, w), mult in cell.items():
                    key = (start, w + out)
                    tgt[key] = min(2, tgt.get(key, 0) + mult)
        entries = nxt
    pre = {}
    val = {}
    for q in D:
        cell = entries.get(q, {})
        total = sum(cell.values())
        if total != 1:
            return None
        (start, w), _ = next(iter(cell.items()))
        pre[q] = start
        val[q] = w
    image = set(pre.values())
    is_step = image == set(C)
    return StepAnalysis(
        source=C,
        word=u,
        target=D,
        pre=pre,
        val=val,
        is_step=is_step,
        initial=is_step and C <= T.initial,
    )


def advance_profile(sa: StepAnalysis) -> AdvanceProfile:
    """common/advance split of an initial step's productions."""
    if not sa.initial:
        raise ContractError("advance profile requires an initial step")
    vals = [sa.val[q] for q in sorted(sa.target)]
    for x, y in zip(vals, vals[1:]):
        if not mutual_prefixes(x, y):
            raise ContinuityViolation(
                f"productions {x!r} and {y!r} are not mutual prefixes"
            )
    common = reduce(lcp_finite, vals)
    advance = {q: sa.val[q][len(common):] for q in sa.target}
    max_advance = max(advance.values(), key=len)
    return AdvanceProfile(common=common, advance=advance, max_advance=max_advance)


# -- continuity ------------------------------------------------------------------


def _simple_pair_paths(T: OneWayTransducer, bound: int, budget: int):
    """DFS over simple product paths from I x I; yields
    (start_pair, path_pairs, out1, out2) for every prefix endpoint."""
    starts = sorted(
        {(p, q) for p in T.initial for q in T.initial}, key=str
    )
    count = [0]

    def dfs(pair, visited, out1, out2, letters, start):
        count[0] += 1
        if count[0] > budget:
            raise BudgetExceeded("continuity path search too large")
        yield start, pair, out1, out2, letters
        if len(visited) > bound:
            return
        p, q = pair
        for a in sorted(T.input_alphabet, key=str):
            for p2, o1 in T.succ(p, a):
                for q2, o2 in T.succ(q, a):
                    if (p2, q2) in visited:
                        continue
                    yield from dfs(
                        (p2, q2),
                        visited | {(p2, q2)},
                        out1 + o1,
                        out2 + o2,
                        letters + (a,),
                        start,
                    )

    for s in starts:
        yield from dfs(s, {s}, (), (), (), s)


def _simple_pair_cycles(T: OneWayTransducer, anchor, bound: int, budget: int):
    """Simple product cycles at anchor: yields (out1, out2, letters)."""
    count = [0]

    def dfs(pair, visited, out1, out2, letters):
        count[0] += 1
        if count[0] > budget:
            raise BudgetExceeded("continuity cycle search too large")
        if len(letters) > bound:
            return
        p, q = pair
        for a in sorted(T.input_alphabet, key=str):
            for p2, o1 in T.succ(p, a):
                for q2, o2 in T.succ(q, a):
                    nxt = (p2, q2)
                    if nxt == anchor:
                        yield out1 + o1, out2 + o2, letters + (a,)
                        continue
                    if nxt in visited:
                        continue
                    yield from dfs(
                        nxt, visited | {nxt}, out1 + o1, out2 + o2, letters + (a,)
                    )

    yield from dfs(anchor, set(), (), (), ())


def accepting_futures(T: OneWayTransducer, q: str, limit: int = 4) -> List[UPWord]:
    """Up to `limit` distinct outputs of accepting runs from q."""
    results: List[UPWord] = []
    seen_pref = set()
    frontier = deque([(q, ())])
    visited = {q: 0}
    while frontier and len(results) < limit:
        p, out = frontier.popleft()
        fut = accepting_future(T, p)
        if fut is not None:
            cand = concat_up(out, fut)
            if not any(up_equal(cand, r) for r in results):
                results.append(cand)
        for a, p2, o in T.out_edges(p):
            k = visited.get(p2, 0)
            if k < 2 and (p2, out + o) not in seen_pref:
                visited[p2] = k + 1
                seen_pref.add((p2, out + o))
                frontier.append((p2, out + o))
    return results


def is_continuous(
    T: OneWayTransducer, bound: Optional[int] = None, budget: int = NODE_BUDGET
) -> Tuple[bool, Optional[ContinuityWitness]]:
    """Decide continuity via the synchronized-loop criterion.

    Searches product paths u from a pair of initial states to an anchor
    (q1', q2') with q1' final, and product loops u' at the anchor; the two
    resulting omega-outputs must coincide.  Simple paths/cycles up to
    `bound` (default |Q|^2) suffice in practice; raise the bound to the
    pumping bound for a certificate.
    """
    if bound is None:
        bound = max(4, len(T.states) ** 2)
    checked = set()
    for start, anchor, out1, out2, path in _simple_pair_paths(T, bound, budget):
        f, q = anchor
        if f not in T.final:
            continue
        key = (anchor, out1, out2)
        if key in checked:
            continue
        checked.add(key)
        for c1, c2, letters in _simple_pair_cycles(T, anchor, bound, budget):
            if len(c1) == 0:
                # a final-visiting silent loop would violate cleanliness;
                # nothing to check against
                continue
            w1 = canonicalize(out1, c1)
            if len(c2) > 0:
                w2 = canonicalize(out2, c2)
                if not up_equal(w1, w2):
                    return False, ContinuityWitness(
                        u=path, u_loop=letters, starts=start, anchor=anchor,
                        outputs=(out1, out2), loop_outputs=(c1, c2),
                        words=(w1, w2),
                    )
            else:
                for beta in accepting_futures(T, q):
                    w2 = concat_up(out2, beta)
                    if not up_equal(w1, w2):
                        return False, ContinuityWitness(
                            u=path, u_loop=letters, starts=start, anchor=anchor,
                            outputs=(out1, out2), loop_outputs=(c1, c2),
                            words=(w1, w2),
                        )
    return True, None
