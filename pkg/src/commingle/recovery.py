"""Collaborative parsing of two difference sequences of one signal.

Every nonzero entry of a difference sequence belongs to exactly one cluster:

* ``A``  -- one entry equal to one step g_{j+1} - g_j;
* ``F``/``S`` -- two same-signed entries summing to one step (first part
  at least / at most half of it);
* ``P``  -- three entries summing to two consecutive steps, whose middle
  entry mixes the tail of the first step with the head of the second.

Reading a parse left to right, the prefix sum at the end of each cluster is
the signal level at a step boundary; inside a ``P`` the middle level is only
known to lie in an interval. Two parses of the two sequences are *jointly
consistent* when they agree on every boundary level.

``recover`` runs the ordered match rules (resetting to the first rule after
every match) to choose labels, and only accepts a match if a complete
jointly consistent parse still extends it. Step values are reported exact
only when every jointly consistent parse agrees on them; otherwise the
interval hull over all of them is reported.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import IdenticalSequencesError, InconsistentSequencesError
from .labeling import Token

MAX_PARSES = 20000


@dataclass(frozen=True)
class CountInterval:
    """Closed integer interval of counts; ``lo == hi`` means an exact value."""

    lo: int
    hi: int

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def value(self) -> int:
        if not self.exact:
            raise ValueError(f"[{self.lo}, {self.hi}] is not exact")
        return self.lo

    def __contains__(self, x: int) -> bool:
        return self.lo <= x <= self.hi

    def to_json(self) -> int | list[int]:
        return self.lo if self.exact else [self.lo, self.hi]

    def __str__(self) -> str:
        return str(self.lo) if self.exact else f"[{self.lo}, {self.hi}]"


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def p_split_interval(triple: Sequence[int]) -> tuple[int, int] | None:
    """Integer range of the first step hidden in a commingled triple (p1, p2, p3).

    The first step is p1 + a and the second is p3 + (p2 - a), where a has the
    sign of p1 with 0 < |a| <= |p1| and p2 - a has the sign of p3 with
    0 < |p2 - a| <= |p3|. Returns None when no split exists.
    """
    p1, p2, p3 = triple
    if p1 == 0 or p3 == 0:
        return None
    lo_a, hi_a = (1, p1) if p1 > 0 else (p1, -1)
    lo_b, hi_b = (1, p3) if p3 > 0 else (p3, -1)
    lo, hi = max(lo_a, p2 - hi_b), min(hi_a, p2 - lo_b)
    if lo > hi:
        return None
    return p1 + lo, p1 + hi


def interval_bounds_5d(
    entries0: Sequence[int],
    entries1: Sequence[int] | None = None,
    known_first: int | None = None,
) -> tuple[CountInterval, CountInterval]:
    """Bounds on two consecutive steps hidden in commingled triples.

    ``entries0`` (and ``entries1``, if given) are triples covering the same
    two steps; ``known_first`` pins the first step when another parse
    supplies it. Raises InconsistentSequencesError if the constraints clash.
    """
    total = sum(entries0)
    ranges = [p_split_interval(entries0)]
    if entries1 is not None:
        if sum(entries1) != total:
            raise InconsistentSequencesError("triples do not cover the same pair of steps")
        ranges.append(p_split_interval(entries1))
    if known_first is not None:
        ranges.append((known_first, known_first))
    if any(r is None for r in ranges):
        raise InconsistentSequencesError("triple admits no split")
    lo = max(r[0] for r in ranges)
    hi = min(r[1] for r in ranges)
    if lo > hi:
        raise InconsistentSequencesError("split ranges do not intersect")
    return CountInterval(lo, hi), CountInterval(total - hi, total - lo)


# ---------------------------------------------------------------------------
# Single-sequence clusters


@dataclass(frozen=True)
class Cluster:
    kind: str  # "A", "F", "S" or "P"
    start: int
    end: int  # exclusive

    @property
    def slots(self) -> int:
        return 2 if self.kind == "P" else 1

    def tokens(self) -> tuple[Token, ...]:
        return {
            "A": (Token.A,),
            "F": (Token.F1, Token.F2),
            "S": (Token.S1, Token.S2),
            "P": (Token.P1, Token.P2, Token.P3),
        }[self.kind]


class _Seq:
    def __init__(self, delta: Sequence[int]):
        self.d = tuple(int(x) for x in delta)
        self.n = len(self.d)
        pre = [0]
        for x in self.d:
            pre.append(pre[-1] + x)
        self.pre = tuple(pre)
        nxt = [self.n] * (self.n + 1)
        for i in range(self.n - 1, -1, -1):
            nxt[i] = i if self.d[i] != 0 else nxt[i + 1]
        self.next_nz = tuple(nxt)

    def options(self, i: int) -> list[Cluster]:
        """Admissible clusters starting at nonzero index ``i``, smallest first."""
        d, n = self.d, self.n
        if i >= n:
            return []
        out = [Cluster("A", i, i + 1)]
        if i + 1 < n and d[i + 1] != 0 and _sign(d[i]) == _sign(d[i + 1]):
            if abs(d[i]) >= abs(d[i + 1]):
                out.append(Cluster("F", i, i + 2))
            if abs(d[i]) <= abs(d[i + 1]):
                out.append(Cluster("S", i, i + 2))
        if i + 2 < n and p_split_interval(d[i:i + 3]) is not None:
            out.append(Cluster("P", i, i + 3))
        return out

    def boundaries(self, c: Cluster) -> list[tuple[int, int]]:
        """Level intervals for the boundaries closed by ``c`` (one or two)."""
        close = self.pre[c.end]
        if c.kind != "P":
            return [(close, close)]
        lo, hi = p_split_interval(self.d[c.start:c.end])
        base = self.pre[c.start]
        return [(base + lo, base + hi), (close, close)]


# ---------------------------------------------------------------------------
# Joint parse state


@dataclass(frozen=True)
class _Side:
    pos: int
    hist: tuple[tuple[int, int], ...]  # level interval per boundary 0..b
    clusters: tuple[Cluster, ...] = ()

    @property
    def b(self) -> int:
        return len(self.hist) - 1


@dataclass(frozen=True)
class _State:
    sides: tuple[_Side, _Side]

    def key(self) -> tuple:
        s0, s1 = self.sides
        lag = min(s0.b, s1.b)
        lead = s0 if s0.b >= s1.b else s1
        return (s0.pos, s0.b, s1.pos, s1.b, lead.hist[lag + 1:])

    @property
    def aligned(self) -> bool:
        return self.sides[0].b == self.sides[1].b


class _Joint:
    def __init__(self, d0: Sequence[int], d1: Sequence[int]):
        self.seqs = (_Seq(d0), _Seq(d1))
        self._feasible = lru_cache(maxsize=None)(self._feasible_key)
        self._states: dict[tuple, _State] = {}

    def initial(self) -> _State:
        return _State(tuple(_Side(q.next_nz[0], ((0, 0),)) for q in self.seqs))

    def finished(self, st: _State) -> bool:
        return all(s.pos >= q.n for s, q in zip(st.sides, self.seqs)) and st.aligned

    def extend(self, st: _State, side: int, c: Cluster) -> _State | None:
        """Apply one cluster to one side; None if it contradicts the other side."""
        me, other = st.sides[side], st.sides[1 - side]
        q = self.seqs[side]
        if c.start != me.pos:
            return None
        hist = list(me.hist)
        for iv in q.boundaries(c):
            k = len(hist)
            if k <= other.b:
                o = other.hist[k]
                iv = (max(iv[0], o[0]), min(iv[1], o[1]))
                if iv[0] > iv[1]:
                    return None
            hist.append(iv)
        # levels already fixed on the other side are tightened too
        new_me = _Side(q.next_nz[c.end], tuple(hist), me.clusters + (c,))
        new_other = other
        if other.b >= me.b + 1:
            ohist = list(other.hist)
            for k in range(me.b + 1, min(other.b, new_me.b) + 1):
                ohist[k] = new_me.hist[k]
            new_other = _Side(other.pos, tuple(ohist), other.clusters)
        sides = [None, None]
        sides[side], sides[1 - side] = new_me, new_other
        return _State(tuple(sides))

    def lagging(self, st: _State) -> int | None:
        """Side that must move next, or None if the state is a dead end."""
        s0, s1 = st.sides
        done0, done1 = s0.pos >= self.seqs[0].n, s1.pos >= self.seqs[1].n
        if s0.b < s1.b or (s0.b == s1.b and not done0):
            return None if done0 else 0
        return None if done1 else 1

    def children(self, st: _State) -> Iterator[_State]:
        side = self.lagging(st)
        if side is None:
            return
        for c in self.seqs[side].options(st.sides[side].pos):
            nxt = self.extend(st, side, c)
            if nxt is not None:
                yield nxt

    def feasible(self, st: _State) -> bool:
        k = st.key()
        self._states.setdefault(k, st)
        return self._feasible(k)

    def _feasible_key(self, k: tuple) -> bool:
        st = self._states[k]
        if self.finished(st):
            return True
        return any(self.feasible(ch) for ch in self.children(st))

    def complete_parses(self, st: _State, limit: int = MAX_PARSES) -> tuple[list[_State], bool]:
        """All finished descendants of ``st`` (up to ``limit``) and a truncation flag."""
        out: list[_State] = []
        stack = [st]
        while stack:
            cur = stack.pop()
            if self.finished(cur):
                out.append(cur)
                if len(out) >= limit:
                    return out, True
                continue
            for ch in self.children(cur):
                if self.feasible(ch):
                    stack.append(ch)
        return out, False


# ---------------------------------------------------------------------------
# Rule engine


@dataclass(frozen=True)
class RecoveryResult:
    labels0: tuple[Token, ...]
    labels1: tuple[Token, ...]
    gd: tuple[CountInterval, ...]
    amplitudes: tuple[CountInterval, ...]
    diagnostics: tuple[str, ...] = ()
    complete: bool = True
    n_parses: int = 0

    @property
    def exact(self) -> bool:
        return bool(self.gd) and all(x.exact for x in self.gd)

    def to_json(self) -> dict:
        return {
            "labels0": [str(t) for t in self.labels0],
            "labels1": [str(t) for t in self.labels1],
            "gd": [x.to_json() for x in self.gd],
            "amplitudes": [x.to_json() for x in self.amplitudes],
            "rules": list(self.diagnostics),
            "complete": self.complete,
            "joint_parses": self.n_parses,
        }


def _orient(pair: Sequence[int]) -> str | None:
    a, b = pair
    if a == 0 or b == 0 or _sign(a) != _sign(b):
        return None
    return "F" if abs(a) > abs(b) else "S" if abs(a) < abs(b) else "F"


@dataclass
class _Engine:
    joint: _Joint
    reset: bool = True
    trace: list[str] = field(default_factory=list)

    # A move is a list of (side, kind) cluster requests applied lagging-side first.
    def try_move(self, st: _State, moves: Sequence[tuple[int, str]]) -> _State | None:
        pending = [[k for s, k in moves if s == side] for side in (0, 1)]
        cur = st
        while pending[0] or pending[1]:
            s0, s1 = cur.sides
            side = 0 if (s0.b <= s1.b and pending[0]) or not pending[1] else 1
            kind = pending[side].pop(0)
            q = self.joint.seqs[side]
            pos = cur.sides[side].pos
            size = {"A": 1, "F": 2, "S": 2, "P": 3}[kind]
            c = Cluster(kind, pos, pos + size)
            if c not in q.options(pos):
                return None
            cur = self.joint.extend(cur, side, c)
            if cur is None:
                return None
        return cur if self.joint.feasible(cur) else None

    def _first(self, st, candidates, rule):
        for moves in candidates:
            nxt = self.try_move(st, moves)
            if nxt is not None:
                self.trace.append(rule)
                return nxt
        return None

    def _heads(self, st: _State, side: int, k: int) -> list[int] | None:
        q = self.joint.seqs[side]
        pos = st.sides[side].pos
        if pos + k > q.n:
            return None
        return list(q.d[pos:pos + k])

    # Rule 1: first entries equal.
    def rule1(self, st):
        x, y = self._heads(st, 0, 1), self._heads(st, 1, 1)
        if x and y and x[0] == y[0]:
            return self._first(st, [[(0, "A"), (1, "A")]], "1")
        return None

    # Rule 2: one entry against a same-signed pair.
    def rule2(self, st):
        cands = []
        for x in (0, 1):
            one, two = self._heads(st, x, 1), self._heads(st, 1 - x, 2)
            if one and two and one[0] == sum(two) and _orient(two):
                cands.append([(x, "A"), (1 - x, _orient(two))])
        return self._first(st, cands, "2")

    # Rule 3: pair against pair.
    def rule3(self, st):
        p, q = self._heads(st, 0, 2), self._heads(st, 1, 2)
        if p and q and sum(p) == sum(q) and _orient(p) and _orient(q):
            return self._first(st, [[(0, _orient(p)), (1, _orient(q))]], "3")
        return None

    # Rule 4: commingled triple against two pairs.
    def rule4(self, st):
        cands = []
        for x in (0, 1):
            tri, four = self._heads(st, x, 3), self._heads(st, 1 - x, 4)
            if not tri or not four or p_split_interval(tri) is None or sum(tri) != sum(four):
                continue
            o1, o2 = _orient(four[:2]), _orient(four[2:])
            if o1 and o2:
                cands.append([(x, "P"), (1 - x, o1), (1 - x, o2)])
        return self._first(st, cands, "4")

    # Rule 5: three against three.
    def _triple_guess(self, t: list[int], other_first: int) -> tuple[str, list[str]]:
        m = [abs(v) for v in t]
        if m[0] > m[1] > m[2]:
            return "5a", ["A", "F"]
        if m[0] < m[1] < m[2]:
            return "5b", ["S", "A"]
        if m[1] > m[0] and m[1] > m[2]:
            if _sign(t[0]) != _sign(t[2]):
                return "5c", ["A", "F"] if _sign(t[0]) != _sign(t[1]) else ["S", "A"]
            if m[0] > abs(other_first):
                return "5c", ["A", "F"]
            if m[0] < abs(other_first):
                return "5c", ["S", "A"]
            self.trace.append("5c:tie")
        return "5d", ["P"]

    def rule5(self, st):
        t0, t1 = self._heads(st, 0, 3), self._heads(st, 1, 3)
        if not t0 or not t1 or sum(t0) != sum(t1):
            return None
        r0, g0 = self._triple_guess(t0, t1[0])
        r1, g1 = self._triple_guess(t1, t0[0])
        alts = [["P"], ["F", "A"], ["A", "S"], ["A", "F"], ["S", "A"]]
        order0 = [g0] + [a for a in alts if a != g0]
        order1 = [g1] + [a for a in alts if a != g1]
        cands, labels = [], []
        for a in order0:
            for b in order1:
                cands.append([(0, k) for k in a] + [(1, k) for k in b])
                labels.append(r0 if a == g0 and r0 != "5d" else r1 if b == g1 and r1 != "5d" else "5d")
        for moves, lab in zip(cands, labels):
            nxt = self.try_move(st, moves)
            if nxt is not None:
                self.trace.append(lab)
                return nxt
        return None

    # Rule 6: a leading cluster followed by a commingled triple, against a triple.
    def rule6(self, st):
        if not st.aligned:
            return self._continue(st)
        cands = []
        for x in (0, 1):
            h, o = self._heads(st, x, 4), self._heads(st, 1 - x, 3)
            if not o:
                continue
            if h and len(h) == 4:
                m = [abs(v) for v in h]
                if m[2] < m[1] and m[2] < m[3] and m[0] > abs(o[0]):
                    cands.append(("6a", [(x, "A"), (x, "P"), (1 - x, "P")]))
                if m[2] > m[3] and m[0] < m[1]:
                    cands.append(("6b", [(x, "S"), (x, "P"), (1 - x, "P")]))
                if m[2] > m[3] and _sign(h[0]) == _sign(h[1]):
                    if _sign(h[0]) != _sign(h[2]):
                        ok = m[0] + m[1] > abs(o[0]) + abs(o[1])
                    else:
                        ok = abs(sum(h[:3])) < abs(sum(o[:3]))
                    if ok:
                        cands.append(("6c", [(x, "F"), (x, "P"), (1 - x, "P")]))
        for lab, moves in cands:
            nxt = self.try_move(st, moves)
            if nxt is not None:
                self.trace.append(lab)
                return nxt
        # patterns whose magnitude tests fail are still admissible openings
        for x in (0, 1):
            for lead in ("A", "S", "F"):
                nxt = self.try_move(st, [(x, lead), (x, "P"), (1 - x, "P")])
                if nxt is not None:
                    self.trace.append("6")
                    return nxt
        return None

    def _continue(self, st):
        """Collaborative step: the side that explains fewer steps takes its smallest admissible cluster."""
        side = self.joint.lagging(st)
        if side is None:
            return None
        for kind in ("A", "F", "S", "P"):
            nxt = self.try_move(st, [(side, kind)])
            if nxt is not None:
                self.trace.append(f"6:{kind}")
                return nxt
        return None

    def fallback(self, st):
        for ch in self.joint.children(st):
            if self.joint.feasible(ch):
                self.trace.append("fallback")
                return ch
        return None

    def run(self, st: _State) -> tuple[_State, bool]:
        rules = (self.rule1, self.rule2, self.rule3, self.rule4, self.rule5, self.rule6)
        start = 0
        guard = 4 * (self.joint.seqs[0].n + self.joint.seqs[1].n) + 8
        while not self.joint.finished(st) and guard:
            guard -= 1
            if start >= len(rules):
                return st, False
            first = start if st.aligned else len(rules) - 1
            for r in range(first, len(rules)):
                nxt = rules[r](st)
                if nxt is not None:
                    st = nxt
                    start = 0 if self.reset else r + 1
                    break
            else:
                if not self.reset:
                    return st, False
                nxt = self.fallback(st)
                if nxt is None:
                    return st, False
                st = nxt
                start = 0
        return st, self.joint.finished(st)


def _labels(n: int, clusters: Sequence[Cluster]) -> tuple[Token, ...]:
    out = [Token.Z] * n
    for c in clusters:
        for i, t in zip(range(c.start, c.end), c.tokens()):
            out[i] = t
    return tuple(out)


def _hull(values: list[tuple[int, int]]) -> CountInterval:
    return CountInterval(min(v[0] for v in values), max(v[1] for v in values))


def _certify(parses: list[_State]) -> tuple[tuple[CountInterval, ...], tuple[CountInterval, ...], list[str]]:
    notes = []
    lengths = {p.sides[0].b for p in parses}
    if len(lengths) != 1:
        notes.append(f"ambiguous step count: consistent parses explain {sorted(lengths)} steps")
        return (), (), notes
    B = lengths.pop()
    levels: list[list[tuple[int, int]]] = [[] for _ in range(B + 1)]
    steps: list[list[tuple[int, int]]] = [[] for _ in range(B)]
    for p in parses:
        h = p.sides[0].hist
        for k in range(B + 1):
            levels[k].append(h[k])
        for k in range(B):
            steps[k].append((h[k + 1][0] - h[k][1], h[k + 1][1] - h[k][0]))
    gd = tuple(_hull(s) for s in steps)
    amps = tuple(_hull(levels[k]) for k in range(1, B))
    return gd, amps, notes


def recover(delta0: Sequence[int], delta1: Sequence[int], *, reset: bool = True,
            max_parses: int = MAX_PARSES) -> RecoveryResult:
    """Jointly label two difference sequences of one signal and recover its steps."""
    d0, d1 = tuple(int(x) for x in delta0), tuple(int(x) for x in delta1)
    if d0 == d1:
        raise IdenticalSequencesError("the two difference sequences are identical")
    if sum(d0) != 0 or sum(d1) != 0:
        raise InconsistentSequencesError(
            f"difference sequences must sum to zero (got {sum(d0)} and {sum(d1)})")
    # the engine is run on a canonical ordering so that swapping inputs swaps labels exactly
    swap = d1 < d0
    if swap:
        d0, d1 = d1, d0
    joint = _Joint(d0, d1)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10000))
    try:
        root = joint.initial()
        if not joint.feasible(root):
            raise InconsistentSequencesError("no jointly consistent parse exists")
        engine = _Engine(joint, reset=reset)
        final, complete = engine.run(root)
        parses, truncated = joint.complete_parses(root, max_parses)
    finally:
        sys.setrecursionlimit(limit)
    gd, amps, notes = _certify(parses)
    if truncated:
        notes.append(f"joint parse enumeration stopped at {max_parses}; no step certified")
        gd, amps = (), ()
    if not complete:
        notes.append("no rule applies to the remaining entries")
    labels = [_labels(joint.seqs[s].n, final.sides[s].clusters) for s in (0, 1)]
    if swap:
        labels.reverse()
    return RecoveryResult(labels[0], labels[1], gd, amps,
                          tuple(engine.trace) + tuple(notes), complete, len(parses))
