"""Word automata for one-dimensional SFTs.

States are the locally admissible words of length max(d, 1) where d is the
largest forbidden-word spread; reading a letter slides the window one step.
Bi-infinite configurations correspond to bi-infinite paths, so all global
questions (admissibility of a finite word, classification, mixing
constants, gap filling) reduce to reachability in this graph.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from . import core
from .core import Sft

Word = tuple[int, ...]


@dataclass(frozen=True)
class WordAutomaton:
    sft: Sft
    word_len: int
    states: tuple[Word, ...]
    # edges[i] = sorted tuple of (letter, target state index)
    edges: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def index(self) -> dict:
        return {w: i for i, w in enumerate(self.states)}

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.states)))
        for i, outs in enumerate(self.edges):
            for letter, j in outs:
                g.add_edge(i, j, letter=letter)
        return g


@dataclass(frozen=True)
class Classification:
    kind: str  # empty | irreducible_aperiodic | irreducible_periodic | reducible
    period: int | None
    classes: tuple[frozenset, ...]  # communication classes, state indices

    @property
    def class_count(self) -> int:
        return len(self.classes)

    def __str__(self) -> str:
        if self.kind == "irreducible_periodic":
            return f"irreducible_periodic({self.period})"
        if self.kind == "reducible":
            return f"reducible({self.class_count})"
        return self.kind


def _word_admissible(sft: Sft, word: Word) -> bool:
    for p in sft.forbidden:
        if not p.cells:
            return False
        span = p.extent[0]
        if span > len(word):
            continue
        offs = [o[0] for o, _ in p.cells]
        syms = [s for _, s in p.cells]
        for a in range(len(word) - span + 1):
            if all(word[a + o] == s for o, s in zip(offs, syms)):
                return False
    return True


@functools.lru_cache(maxsize=None)
def build_automaton(sft: Sft) -> WordAutomaton:
    if sft.dim != 1:
        raise ValueError("word automata are for 1D SFTs")
    wl = max(sft.diameter, 1)
    nsym = len(sft.alphabet)
    states: list[Word] = []
    stack: list[Word] = [()]
    # depth-first extension keeps the admissibility checks incremental
    while stack:
        w = stack.pop()
        if len(w) == wl:
            states.append(w)
            continue
        for s in range(nsym - 1, -1, -1):
            w2 = w + (s,)
            if _word_admissible(sft, w2):
                stack.append(w2)
    states.sort()
    index = {w: i for i, w in enumerate(states)}
    edges = []
    for w in states:
        outs = []
        for b in range(nsym):
            if _word_admissible(sft, w + (b,)):
                tgt = w[1:] + (b,)
                if tgt in index:
                    outs.append((b, index[tgt]))
        edges.append(tuple(outs))
    return WordAutomaton(sft=sft, word_len=wl, states=tuple(states),
                         edges=tuple(edges))


def communication_classes(auto: WordAutomaton) -> tuple[frozenset, ...]:
    """Strongly connected components that contain a cycle, in sorted order."""
    g = auto.graph()
    out = []
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(g.has_edge(v, v) for v in comp):
            out.append(frozenset(comp))
    out.sort(key=lambda c: sorted(c))
    return tuple(out)


def _class_period(auto: WordAutomaton, cls: frozenset) -> int:
    nodes = sorted(cls)
    level = {nodes[0]: 0}
    queue = [nodes[0]]
    g = 0
    while queue:
        u = queue.pop()
        for letter, v in auto.edges[u]:
            if v not in cls:
                continue
            if v in level:
                g = math.gcd(g, level[u] + 1 - level[v])
            else:
                level[v] = level[u] + 1
                queue.append(v)
    return abs(g) if g else 1


def classify(auto: WordAutomaton) -> Classification:
    classes = communication_classes(auto)
    if not classes:
        return Classification(kind="empty", period=None, classes=())
    if len(classes) > 1:
        return Classification(kind="reducible", period=None, classes=classes)
    p = _class_period(auto, classes[0])
    if p == 1:
        return Classification(kind="irreducible_aperiodic", period=1, classes=classes)
    return Classification(kind="irreducible_periodic", period=p, classes=classes)


@functools.lru_cache(maxsize=None)
def _live_sets(auto: WordAutomaton):
    """(reachable from a cycle, co-reachable to a cycle) as frozensets."""
    classes = communication_classes(auto)
    seeds = set().union(*classes) if classes else set()
    g = auto.graph()
    fwd = set(seeds)
    for s in seeds:
        fwd |= nx.descendants(g, s)
    bwd = set(seeds)
    rg = g.reverse()
    for s in seeds:
        bwd |= nx.descendants(rg, s)
    return frozenset(fwd), frozenset(bwd)


def live_states(auto: WordAutomaton) -> frozenset:
    """States through which some bi-infinite path passes."""
    fwd, bwd = _live_sets(auto)
    return fwd & bwd


def coerce_word(sft: Sft, word) -> Word:
    if isinstance(word, str):
        return tuple(sft.symbol_index(ch) for ch in word)
    return tuple(int(x) for x in word)


def format_word(sft: Sft, word: Word) -> str:
    return "".join(sft.alphabet[s] for s in word)


def is_globally_admissible(auto: WordAutomaton, word) -> bool:
    """Does the word occur in some bi-infinite admissible configuration?

    For words at least as long as the state length this is a path check
    where every visited state must be reachable from a cycle and
    co-reachable to a cycle.  Shorter words only need to occur inside some
    such state.
    """
    w = coerce_word(auto.sft, word)
    wl = auto.word_len
    live = live_states(auto)
    if len(w) < wl:
        for i in live:
            s = auto.states[i]
            if any(s[a:a + len(w)] == w for a in range(wl - len(w) + 1)):
                return True
        return False
    index = auto.index
    prev = index.get(w[:wl])
    if prev is None or prev not in live:
        return False
    for i in range(wl, len(w)):
        nxt = index.get(w[i - wl + 1:i + 1])
        if nxt is None or nxt not in live:
            return False
        if not any(b == w[i] and j == nxt for b, j in auto.edges[prev]):
            return False
        prev = nxt
    return True


def _wielandt_cap(k: int) -> int:
    return (k - 1) ** 2 + 2 if k > 1 else 2


def sticking_constant_n0(auto: WordAutomaton) -> int:
    """Least n0 >= 1 such that any two states of the communication class
    can be joined through a gap of any length n >= n0.

    A gap of length n corresponds to a path of n + word_len edges, so this
    is the primitivity index of the class adjacency matrix shifted by the
    state length.  Only defined for irreducible aperiodic automata.
    """
    cls = classify(auto)
    if cls.kind != "irreducible_aperiodic":
        raise ValueError(f"sticking constant needs irreducible aperiodic, got {cls}")
    nodes = sorted(cls.classes[0])
    pos = {v: i for i, v in enumerate(nodes)}
    k = len(nodes)
    a = np.zeros((k, k), dtype=np.uint8)
    for u in nodes:
        for _, v in auto.edges[u]:
            if v in pos:
                a[pos[u], pos[v]] = 1
    power = a.copy()
    for m in range(1, _wielandt_cap(k) + 1):
        if power.all():
            return max(1, m - auto.word_len)
        power = np.minimum(power @ a, 1)
    raise ValueError("class matrix is not primitive despite aperiodicity")


def peel_constant_C(auto: WordAutomaton, refined: bool = False) -> int:
    """Letters to strip from each end of a locally admissible word so the
    rest is globally admissible.

    The basic bound counts every state outside the communication class;
    the refined variant replaces that count by the longest chain of
    transient states, which can be much smaller.  Requires exactly one
    communication class.
    """
    classes = communication_classes(auto)
    if len(classes) != 1:
        raise ValueError("peel constant needs exactly one communication class")
    cls = classes[0]
    transient = [v for v in range(len(auto.states)) if v not in cls]
    if refined and transient:
        g = auto.graph().subgraph(transient)
        k = max((nx.dag_longest_path_length(g) + 1) if g.edges else 1, 1)
    else:
        k = len(transient)
    return max(k, -(-auto.sft.diameter // 2))


@dataclass(frozen=True)
class RepairConstants:
    word_len: int
    n0: int
    C: int
    D: int
    E: int


def repair_constants(auto: WordAutomaton, refined: bool = False) -> RepairConstants:
    n0 = sticking_constant_n0(auto)
    c = peel_constant_C(auto, refined=refined)
    half_d = -(-auto.sft.diameter // 2)
    d_const = max(c, -(-n0 // 2))
    return RepairConstants(word_len=auto.word_len, n0=n0, C=c,
                           D=d_const, E=d_const + half_d)


class _ReachTable:
    """R(t) = set of states with a path of exactly t edges to the target.

    The sequence of sets is eventually periodic, so only the preperiod and
    one period are stored; lookups for any t are O(1).
    """

    def __init__(self, auto: WordAutomaton, target: int):
        preds: list[list[int]] = [[] for _ in auto.states]
        for u, outs in enumerate(auto.edges):
            for _, v in outs:
                preds[v].append(u)
        seen: dict[frozenset, int] = {}
        seq: list[frozenset] = [frozenset([target])]
        seen[seq[0]] = 0
        self.start = None
        self.period = None
        while True:
            nxt = frozenset(u for v in seq[-1] for u in preds[v])
            if nxt in seen:
                self.start = seen[nxt]
                self.period = len(seq) - self.start
                break
            seen[nxt] = len(seq)
            seq.append(nxt)
        self.seq = seq

    def __call__(self, t: int) -> frozenset:
        if t < len(self.seq):
            return self.seq[t]
        return self.seq[self.start + (t - self.start) % self.period]


def _state_index(auto: WordAutomaton, state) -> int:
    if isinstance(state, int) and not isinstance(state, bool):
        if 0 <= state < len(auto.states):
            # bare ints name single-letter states when word_len is 1
            if auto.word_len == 1 and (state,) in auto.index:
                return auto.index[(state,)]
            return state
        raise ValueError(f"no state {state}")
    w = coerce_word(auto.sft, state)
    try:
        return auto.index[w]
    except KeyError:
        raise ValueError(f"{w} is not a state") from None


def fill_gap(auto: WordAutomaton, left, right, n: int) -> Word | None:
    """Lexicographically least word w of length n with left.w.right locally
    admissible as a path, or None when no such word exists.

    Deterministic: ties are broken by alphabet order at every letter.
    """
    if n < 0:
        raise ValueError("gap length must be nonnegative")
    li = _state_index(auto, left)
    ri = _state_index(auto, right)
    reach = _ReachTable(auto, ri)
    wl = auto.word_len
    if li not in reach(n + wl):
        return None
    out = []
    cur = li
    for i in range(n):
        remaining = n - i - 1 + wl
        step = None
        for b, j in auto.edges[cur]:
            if j in reach(remaining):
                step = (b, j)
                break
        assert step is not None
        out.append(step[0])
        cur = step[1]
    return tuple(out)


def extend_from(auto: WordAutomaton, state, n: int, *, forward: bool = True) -> Word:
    """Lex-least n-letter continuation from (or into) a state, staying
    within the live part so the result remains globally admissible."""
    live = live_states(auto)
    idx = _state_index(auto, state)
    if idx not in live:
        raise ValueError("state has no bi-infinite extension")
    out = []
    if forward:
        cur = idx
        for _ in range(n):
            b, j = min((b, j) for b, j in auto.edges[cur] if j in live)
            out.append(b)
            cur = j
        return tuple(out)
    # backwards: choose predecessors; lex-least means minimizing earlier
    # letters first, so scan positions left to right among live paths
    preds: list[list[tuple[int, int]]] = [[] for _ in auto.states]
    for u, outs in enumerate(auto.edges):
        if u not in live:
            continue
        for b, v in outs:
            preds[v].append((u, b))
    # reachable_to[t] = states that reach idx in exactly t live steps
    reach = [{idx}]
    for _ in range(n):
        prev = reach[-1]
        reach.append({u for v in prev for u, _ in preds[v]})
    if not reach[n]:
        raise ValueError("state has no live history long enough")
    start = min(reach[n], key=lambda u: auto.states[u])
    cur = start
    for t in range(n, 0, -1):
        b, j = min((b, j) for b, j in auto.edges[cur]
                   if j in live and j in reach[t - 1])
        out.append(b)
        cur = j
    assert cur == idx
    # the full word is start-state letters then edge labels; the last
    # word_len letters of it spell the target state, so the prepended
    # word is the first n letters
    full = auto.states[start] + tuple(out)
    return full[:n]


def lex_least_admissible_word(auto: WordAutomaton, n: int) -> Word | None:
    """Lex-least globally admissible word of length n, None if none exists."""
    live = live_states(auto)
    if not live:
        return None
    wl = auto.word_len
    if n <= wl:
        best = None
        for i in sorted(live, key=lambda j: auto.states[j]):
            s = auto.states[i]
            for a in range(wl - n + 1):
                w = s[a:a + n]
                if best is None or w < best:
                    best = w
        return best
    start = min(live, key=lambda j: auto.states[j])
    return auto.states[start] + extend_from(auto, start, n - wl, forward=True)
