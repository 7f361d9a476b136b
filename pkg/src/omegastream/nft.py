"""One-way nondeterministic Buchi transducers.

Machines are loaded from JSON, kept immutable, and evaluated exactly on
ultimately periodic inputs via lasso search.  Normalization passes (trim,
clean, make_productive) preserve the computed function; each has a matching
predicate so already-normal machines are returned unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from .words import (
    UPWord,
    Word,
    canonicalize,
    format_word,
    parse_word,
    up_equal,
    word,
)

Transition = Tuple[str, object, str]  # (source, letter, target)


class AmbiguityError(Exception):
    """Two distinct accepting runs were found on the same input."""


class ContractError(Exception):
    """A precondition of an operation was violated."""


@dataclass(frozen=True)
class OneWayTransducer:
    input_alphabet: FrozenSet[object]
    output_alphabet: FrozenSet[object]
    states: FrozenSet[str]
    initial: FrozenSet[str]
    final: FrozenSet[str]
    transitions: Dict[Transition, Word] = field(hash=False)

    def __post_init__(self):
        for (q, a, q2), out in self.transitions.items():
            if q not in self.states or q2 not in self.states:
                raise ValueError(f"transition {q}-{a}->{q2} references unknown state")
            if a not in self.input_alphabet:
                raise ValueError(f"unknown input letter {a!r}")
            for b in out:
                if b not in self.output_alphabet:
                    raise ValueError(f"unknown output letter {b!r}")
        if not self.initial <= self.states or not self.final <= self.states:
            raise ValueError("initial/final not subsets of states")

    # -- indexes -------------------------------------------------------------

    def succ(self, q: str, a: object) -> List[Tuple[str, Word]]:
        """(target, output) pairs for transitions q -a-> ."""
        return self._by_src().get((q, a), [])

    def out_edges(self, q: str) -> List[Tuple[object, str, Word]]:
        return self._edges().get(q, [])

    def _by_src(self):
        cache = self.__dict__.get("_by_src_cache")
        if cache is None:
            cache = {}
            for (q, a, q2), out in self.transitions.items():
                cache.setdefault((q, a), []).append((q2, out))
            for v in cache.values():
                v.sort(key=lambda t: (t[0], t[1]))
            object.__setattr__(self, "_by_src_cache", cache)
        return cache

    def _edges(self):
        cache = self.__dict__.get("_edges_cache")
        if cache is None:
            cache = {}
            for (q, a, q2), out in self.transitions.items():
                cache.setdefault(q, []).append((a, q2, out))
            for v in cache.values():
                v.sort(key=lambda t: (str(t[0]), t[1]))
            object.__setattr__(self, "_edges_cache", cache)
        return cache


# -- JSON format -------------------------------------------------------------


def from_dict(doc: dict) -> OneWayTransducer:
    transitions = {}
    for t in doc["transitions"]:
        key = (t["from"], t["letter"], t["to"])
        if key in transitions:
            raise ValueError(f"duplicate transition {key}")
        transitions[key] = word(t.get("out", ""))
    return OneWayTransducer(
        input_alphabet=frozenset(doc["input_alphabet"]),
        output_alphabet=frozenset(doc["output_alphabet"]),
        states=frozenset(doc["states"]),
        initial=frozenset(doc["initial"]),
        final=frozenset(doc["final"]),
        transitions=transitions,
    )


def to_dict(T: OneWayTransducer) -> dict:
    return {
        "input_alphabet": sorted(map(str, T.input_alphabet)),
        "output_alphabet": sorted(map(str, T.output_alphabet)),
        "states": sorted(T.states),
        "initial": sorted(T.initial),
        "final": sorted(T.final),
        "transitions": [
            {"from": q, "letter": a, "to": q2, "out": format_word(out)}
            for (q, a, q2), out in sorted(
                T.transitions.items(), key=lambda kv: (kv[0][0], str(kv[0][1]), kv[0][2])
            )
        ],
    }


def load(path: str) -> OneWayTransducer:
    with open(path) as fh:
        return from_dict(json.load(fh))


def save(T: OneWayTransducer, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(to_dict(T), fh, indent=2)
        fh.write("\n")


# -- reachability and normal forms -------------------------------------------


def push(T: OneWayTransducer, S, u) -> FrozenSet[str]:
    """Image of the state set S under runs labelled by u."""
    cur = set(S)
    for a in word(u):
        cur = {q2 for q in cur for q2, _ in T.succ(q, a)}
    return frozenset(cur)


def _accessible(T: OneWayTransducer) -> FrozenSet[str]:
    seen = set(T.initial)
    stack = list(T.initial)
    while stack:
        q = stack.pop()
        for _, q2, _ in T.out_edges(q):
            if q2 not in seen:
                seen.add(q2)
                stack.append(q2)
    return frozenset(seen)


def _reaches(T: OneWayTransducer, sources, targets) -> FrozenSet[str]:
    """States in `sources` (all states if None) that can reach `targets`."""
    rev: Dict[str, set] = {}
    for (q, _, q2) in T.transitions:
        rev.setdefault(q2, set()).add(q)
    seen = set(targets)
    stack = list(targets)
    while stack:
        q = stack.pop()
        for p in rev.get(q, ()):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


def _on_cycle(T: OneWayTransducer, q: str, nonempty_output=False) -> bool:
    """Whether q lies on a cycle; optionally restrict to all-ε-output cycles
    being excluded (nonempty_output=True requires some output on the cycle).

    With nonempty_output=False the plain graph is used.
    """
    # BFS from successors of q back to q
    frontier = [(q2, len(out) > 0) for _, q2, out in T.out_edges(q)]
    seen = {}
    found = False
    while frontier:
        p, has_out = frontier.pop()
        if p == q and (has_out or not nonempty_output):
            found = True
            break
        prev = seen.get(p)
        if prev is not None and (prev or not has_out):
            continue
        seen[p] = has_out
        for _, p2, out in T.out_edges(p):
            frontier.append((p2, has_out or len(out) > 0))
    return found


def is_trim(T: OneWayTransducer) -> bool:
    return _trim_keep(T) == T.states


def _trim_keep(T: OneWayTransducer) -> FrozenSet[str]:
    acc = _accessible(T)
    # live final states: finals lying on a cycle (reachable from themselves)
    live = {f for f in T.final if _on_cycle(T, f)}
    coacc = _reaches(T, None, live)
    return acc & coacc


def trim(T: OneWayTransducer) -> OneWayTransducer:
    keep = _trim_keep(T)
    if keep == T.states:
        return T
    return OneWayTransducer(
        input_alphabet=T.input_alphabet,
        output_alphabet=T.output_alphabet,
        states=keep,
        initial=T.initial & keep,
        final=T.final & keep,
        transitions={
            (q, a, q2): out
            for (q, a, q2), out in T.transitions.items()
            if q in keep and q2 in keep
        },
    )


def is_clean(T: OneWayTransducer) -> bool:
    """No cycle through a final state with empty total output."""
    eps = {k: v for k, v in T.transitions.items() if len(v) == 0}
    if not eps:
        return True
    sub = OneWayTransducer(
        T.input_alphabet, T.output_alphabet, T.states, T.initial, T.final, eps
    )
    return not any(_on_cycle(sub, f) for f in T.final)


def clean(T: OneWayTransducer) -> OneWayTransducer:
    """Equivalent clean transducer via the two-layer construction.

    Layer 1 is "must still produce"; leaving a final state drops to layer 0,
    which climbs back to layer 1 only through a producing transition.  Final
    states live in layer 1, so any accepting cycle produces output.
    """
    if is_clean(T):
        return trim(T)

    def name(q, layer):
        return f"{q}~{layer}"

    states = {name(q, i) for q in T.states for i in (0, 1)}
    transitions = {}
    for (q, a, q2), out in T.transitions.items():
        # from layer 1
        target_layer = 0 if q in T.final else 1
        transitions[(name(q, 1), a, name(q2, target_layer))] = out
        # from layer 0
        back_layer = 1 if len(out) > 0 else 0
        transitions[(name(q, 0), a, name(q2, back_layer))] = out
    T2 = OneWayTransducer(
        input_alphabet=T.input_alphabet,
        output_alphabet=T.output_alphabet,
        states=frozenset(states),
        initial=frozenset(name(q, 1) for q in T.initial),
        final=frozenset(name(q, 1) for q in T.final),
        transitions=transitions,
    )
    return trim(T2)


# -- unambiguity ---------------------------------------------------------------


def is_unambiguous(T: OneWayTransducer) -> bool:
    """No input labels two distinct accepting runs.

    Searched on the self-product: track pairs (p, q) plus a divergence bit
    that flips once the two run histories differ.  The input is ambiguous iff
    a diverged pair reaches a nontrivial product SCC containing both a pair
    with first component final and a pair with second component final (a
    single product cycle can then visit both kinds).
    """
    # product graph over ordered pairs
    def pair_succ(p, q, a):
        for p2, _ in T.succ(p, a):
            for q2, _ in T.succ(q, a):
                yield p2, q2

    # reachable diverged pairs
    start = [(p, q, p != q) for p in T.initial for q in T.initial]
    seen = set(start)
    stack = list(start)
    diverged = set()
    while stack:
        p, q, d = stack.pop()
        if d:
            diverged.add((p, q))
        for a in T.input_alphabet:
            succ_p = T.succ(p, a)
            succ_q = T.succ(q, a)
            for p2, _ in succ_p:
                for q2, _ in succ_q:
                    d2 = d or (p != q) or (p2 != q2)
                    node = (p2, q2, d2)
                    if node not in seen:
                        seen.add(node)
                        stack.append(node)
    if not diverged:
        return True

    # SCCs of the full pair graph (inputs synchronized)
    pairs = {(p, q) for p in T.states for q in T.states}
    adj = {
        pq: sorted(
            {t for a in T.input_alphabet for t in pair_succ(pq[0], pq[1], a)}
        )
        for pq in pairs
    }
    index = {}
    low = {}
    on_stack = set()
    stack2: List = []
    sccs = []
    counter = [0]

    def strongconnect(v):
        # iterative Tarjan
        work = [(v, iter(adj[v]))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack2.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack2.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj[w])))
                    advanced = True
                    break
                elif w in on_stack:
                    low[node] = min(low[node], index[w])
            if not advanced:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])
                if low[node] == index[node]:
                    comp = []
                    while True:
                        w = stack2.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == node:
                            break
                    sccs.append(comp)

    for v in adj:
        if v not in index:
            strongconnect(v)

    scc_of = {}
    for i, comp in enumerate(sccs):
        for v in comp:
            scc_of[v] = i
    good_sccs = set()
    for i, comp in enumerate(sccs):
        nontrivial = len(comp) > 1 or any(v in adj[v] for v in comp)
        if not nontrivial:
            continue
        if any(p in T.final for p, _ in comp) and any(q in T.final for _, q in comp):
            good_sccs.add(i)
    if not good_sccs:
        return True

    # can a diverged pair reach a good SCC?
    target = {v for i in good_sccs for v in sccs[i]}
    frontier = [pq for pq in diverged]
    seen_r = set(frontier)
    while frontier:
        pq = frontier.pop()
        if pq in target:
            return False
        for w in adj[pq]:
            if w not in seen_r:
                seen_r.add(w)
                frontier.append(w)
    return True


# -- lasso evaluation ----------------------------------------------------------


@dataclass
class RunLasso:
    """An accepting lasso run over a UP word.

    stem_states[i] is the state after reading i letters; loop_states starts
    and ends at stem_states[-1]'s node (phase-aligned), letters-per-loop =
    len(loop_states) - 1.
    """

    stem_states: List[str]
    loop_states: List[str]
    output: Optional[UPWord]  # None when the run output is finite

    def state_at(self, i: int) -> str:
        if i < len(self.stem_states):
            return self.stem_states[i]
        k = (i - (len(self.stem_states) - 1)) % (len(self.loop_states) - 1)
        return self.loop_states[k]


def _phase_graph(T: OneWayTransducer, v: Word):
    """Nodes (q, j) for j < |v|; edges consume v[j]."""
    n = len(v)
    adj = {}
    for q in T.states:
        for j in range(n):
            adj[(q, j)] = [
                ((q2, (j + 1) % n), out) for q2, out in T.succ(q, v[j])
            ]
    return adj


def _bfs_path(adj, src, targets, min_len=0):
    """Shortest path of length >= min_len from src to any target.

    Returns (node, path) where path is a list of (node, out) edges, or None.
    Tracks (node, min(len, min_len)) to honor the length floor.
    """
    from collections import deque

    start = (src, 0 if min_len > 0 else min_len)
    parent = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        node, l = cur
        if node in targets and l >= min_len:
            # reconstruct
            path = []
            walk = cur
            while parent[walk] is not None:
                prev, edge = parent[walk]
                path.append(edge)
                walk = prev
            path.reverse()
            return node, path
        for nxt, out in adj[node]:
            l2 = min(l + 1, min_len) if min_len else 0
            key = (nxt, l2)
            if key not in parent:
                parent[key] = (cur, (nxt, out))
                queue.append(key)
    return None


def accepting_lassos(T: OneWayTransducer, x: UPWord):
    """All candidate accepting lasso runs on x (deduplicated by anchor).

    Every returned candidate is a genuine accepting run on x; under
    unambiguity they all denote the same run.
    """
    u, v = x.prefix, x.period
    nQ = len(T.states)
    P = len(u) + (nQ + 1) * len(v)
    # forward witnesses: (pos, q) -> list of (states tuple, output word), <= 2
    wit = {(0, q): [((q,), ())] for q in T.initial}
    for i in range(P):
        a = x.letter_at(i)
        for q in sorted(T.states):
            entries = wit.get((i, q))
            if not entries:
                continue
            for q2, out in T.succ(q, a):
                cell = wit.setdefault((i + 1, q2), [])
                for states, w in entries:
                    cand = (states + (q2,), w + out)
                    if len(cell) < 2 and cand not in cell:
                        cell.append(cand)

    adj = _phase_graph(T, v)
    f_nodes = {(q, j) for q in T.final for j in range(len(v))}

    # cycle cache: anchor node -> (loop_states, loop_out) or None
    cyc_cache: Dict = {}

    def cycle_at(node):
        if node in cyc_cache:
            return cyc_cache[node]
        res = None
        got = _bfs_path(adj, node, f_nodes, min_len=0)
        # path node -> f, then f -> node (total length >= 1)
        if got is not None:
            f, p1 = got
            back = _bfs_path(adj, f, {node}, min_len=0 if p1 else 1)
            if back is not None:
                _, p2 = back
                states = [node[0]]
                out = []
                for (q2, _), o in [(n_, o_) for n_, o_ in p1] + list(p2):
                    states.append(q2)
                    out.extend(o)
                res = (states, tuple(out))
        cyc_cache[node] = res
        return res

    candidates = []
    for i in range(len(u), P + 1):
        ph = (i - len(u)) % len(v)
        for q in sorted(T.states):
            entries = wit.get((i, q))
            if not entries:
                continue
            # nearest reachable anchor m that carries an accepting cycle
            start = (q, ph)
            reach = _bfs_path(
                adj, start, {m for m in adj if cycle_at(m) is not None}, 0
            )
            if reach is None:
                continue
            m, path = reach
            loop_states, loop_out = cycle_at(m)
            bridge_states = [q] + [n[0] for n, _ in path]
            bridge_out = tuple(b for _, o in path for b in o)
            for states, w in entries:
                stem_states = list(states) + bridge_states[1:]
                stem_out = w + bridge_out
                output = (
                    canonicalize(stem_out, loop_out) if loop_out else None
                )
                candidates.append(
                    (
                        RunLasso(stem_states, loop_states, output),
                        len(entries) > 1,
                        stem_out,
                    )
                )
    return candidates


def oracle_run(T: OneWayTransducer, x: UPWord) -> Optional[RunLasso]:
    """The unique accepting run on x as a lasso, or None.

    Raises AmbiguityError when the search surfaces two distinct accepting
    runs (contract violation: T was assumed unambiguous).
    """
    cands = accepting_lassos(T, x)
    if not cands:
        return None
    chosen = None
    for lasso, multi_stem, stem_out in cands:
        if multi_stem:
            raise AmbiguityError("two run prefixes share an accepting future")
        if chosen is None:
            chosen = lasso
            continue
        if (chosen.output is None) != (lasso.output is None):
            raise AmbiguityError("finite- and infinite-output accepting runs")
        if chosen.output is not None and not up_equal(chosen.output, lasso.output):
            raise AmbiguityError("two accepting runs with different outputs")
    return chosen


def oracle_eval(T: OneWayTransducer, x: UPWord) -> Optional[UPWord]:
    """f(x) on a UP input, or None when undefined (no run / finite output)."""
    run = oracle_run(T, x)
    if run is None:
        return None
    return run.output


def accepting_future(T: OneWayTransducer, q: str) -> Optional[UPWord]:
    """Output of some accepting infinite-output run from q, as a UPWord."""
    # lasso in the plain graph: q -> m, cycle at m through F with output
    adj = {
        p: [((p2, 0), out) for _, p2, out in T.out_edges(p)] for p in T.states
    }
    # reuse the phase-graph helpers with a single phase
    adj1 = {(p, 0): [((p2, 0), out) for _, p2, out in T.out_edges(p)] for p in T.states}
    f_nodes = {(f, 0) for f in T.final}

    def cyc(node):
        got = _bfs_path(adj1, node, f_nodes, 0)
        if got is None:
            return None
        f, p1 = got
        back = _bfs_path(adj1, f, {node}, min_len=0 if p1 else 1)
        if back is None:
            return None
        _, p2 = back
        out = tuple(b for _, o in list(p1) + list(p2) for b in o)
        return out

    # prefer anchors whose cycle output is nonempty
    best = None
    seen = {(q, 0)}
    frontier = [((q, 0), ())]
    while frontier:
        node, pref = frontier.pop(0)
        loop = cyc(node)
        if loop is not None and len(loop) > 0:
            return canonicalize(pref, loop)
        for nxt, out in adj1[node]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, pref + out))
    return best


# -- productivity ---------------------------------------------------------------


def _constant_state_witness(T: OneWayTransducer, q: str):
    """Witness that q (not final) is constant: a pair of runs from I over the
    same word reaching (f, q) with f final, then a synchronized loop at
    (f, q) whose second-component output is empty.

    Returns (alpha1, alpha1_loop, alpha2) or None.
    """
    if q in T.final:
        return None
    # reachable pairs with outputs (capped witnesses)
    from collections import deque

    start = {(p1, p2): ((), ()) for p1 in T.initial for p2 in T.initial}
    parent = dict(start)
    queue = deque(start)
    order = []
    while queue:
        p1, p2 = queue.popleft()
        order.append((p1, p2))
        w1, w2 = parent[(p1, p2)]
        for a in T.input_alphabet:
            for t1, o1 in T.succ(p1, a):
                for t2, o2 in T.succ(p2, a):
                    if (t1, t2) not in parent:
                        parent[(t1, t2)] = (w1 + o1, w2 + o2)
                        queue.append((t1, t2))
    for (f, p2), (a1, a2) in parent.items():
        if f not in T.final or p2 != q:
            continue
        # synchronized loop at (f, q) with epsilon second output
        loop = _pair_loop(T, f, q)
        if loop is not None:
            return a1, loop, a2
    return None


def _pair_loop(T: OneWayTransducer, f: str, q: str):
    """Loop output of the first component on a synchronized cycle at (f, q)
    where the second component produces ε; None if no such cycle."""
    from collections import deque

    start = (f, q)
    parent = {start: ((), True)}  # (first output so far, is_start)
    queue = deque([start])
    first = True
    while queue:
        p1, p2 = queue.popleft()
        w1, is_start = parent[(p1, p2)]
        if (p1, p2) == start and not is_start:
            pass
        for a in T.input_alphabet:
            for t1, o1 in T.succ(p1, a):
                for t2, o2 in T.succ(p2, a):
                    if len(o2) != 0:
                        continue
                    if (t1, t2) == start:
                        return w1 + o1
                    if (t1, t2) not in parent:
                        parent[(t1, t2)] = (w1 + o1, False)
                        queue.append((t1, t2))
    return None


def is_productive(T: OneWayTransducer) -> bool:
    return all(
        _constant_state_witness(T, q) is None for q in sorted(T.states)
    )


def make_productive(T: OneWayTransducer) -> OneWayTransducer:
    """Replace constant states' futures by gadgets with steady output.

    A non-final state q is constant when some final run shadows it over a
    shared input with an ε-producing loop on q's side: every final run from
    q then outputs the single word α_q α'_q^ω.  The gadget re-emits that
    word at one α'_q per letter, which removes the ε loops.

    Requires a continuous input function (otherwise α_q is ill-defined).
    """
    constants = {}
    for q in sorted(T.states):
        w = _constant_state_witness(T, q)
        if w is not None:
            a1, loop1, a2 = w
            if len(loop1) == 0:
                # final-side loop silent too: cleanliness violated upstream
                raise ContractError("clean precondition violated")
            target = canonicalize(a1, loop1)
            if target.first(len(a2)) != a2:
                raise ContractError(
                    "constant-state output ill-defined: input not continuous"
                )
            from .words import strip_prefix

            constants[q] = strip_prefix(target, a2)
    if not constants:
        return trim(T)

    states = set(T.states)
    transitions = dict(T.transitions)
    final = set(T.final)
    for q, beta in constants.items():
        alpha, alpha_loop = beta.prefix, beta.period
        # states reachable from q (in the original machine)
        reach = set()
        stack = [q]
        while stack:
            p = stack.pop()
            for _, p2, _ in T.out_edges(p):
                if p2 not in reach:
                    reach.add(p2)
                    stack.append(p2)

        def gname(p, q=q):
            return f"{p}!{q}"

        states.update(gname(p) for p in reach)
        final.update(gname(p) for p in reach if p in T.final)
        # remove q's original outgoing transitions
        for (p, a, p2) in list(transitions):
            if p == q:
                del transitions[(p, a, p2)]
        # first transition emits alpha . alpha_loop, later ones alpha_loop
        for a, p2, _ in T.out_edges(q):
            transitions[(q, a, gname(p2))] = alpha + alpha_loop
        for p in reach:
            for a, p2, _ in T.out_edges(p):
                if p2 in reach:
                    transitions[(gname(p), a, gname(p2))] = alpha_loop
    T2 = OneWayTransducer(
        input_alphabet=T.input_alphabet,
        output_alphabet=T.output_alphabet,
        states=frozenset(states),
        initial=T.initial,
        final=frozenset(final),
        transitions=transitions,
    )
    return trim(T2)


def normalize(T: OneWayTransducer) -> OneWayTransducer:
    """trim + clean + make_productive, the evaluation-ready form."""
    return make_productive(clean(trim(T)))
