"""Distributed elementary net systems and their token-game semantics.

A net system couples a finite net (places, transitions, flow) with an
initial marking and a location map: every place and transition belongs
either to the environment or to one of the users, and a transition must
share its location with all of its input places, so that every choice
is resolved locally by a single agent.
"""

from __future__ import annotations

import functools
from collections import deque
from typing import Iterable, Mapping, Optional

from .errors import BoundExceeded, InputError, PreconditionError

#: A marking is a plain frozenset of place identifiers.
Marking = frozenset

DEFAULT_STATE_BOUND = 100_000


def marking_key(m: Marking) -> tuple:
    """Canonical sort key for markings (sorted place-name tuple)."""
    return tuple(sorted(m))


def format_marking(m: Marking) -> str:
    return "{" + ",".join(sorted(m)) + "}"


def parse_marking(text: str) -> Marking:
    body = text.strip()
    if body.startswith("{") and body.endswith("}"):
        body = body[1:-1]
    parts = [p.strip() for p in body.replace(",", " ").split()]
    return frozenset(p for p in parts if p)


class NetSystem:
    """An immutable distributed elementary net system.

    ``locations`` lists the environment first, then one entry per user.
    ``assignment`` maps every place and transition to its location.
    Construction normalises everything into sorted tuples so that two
    structurally equal nets compare and print identically.
    """

    __slots__ = ("name", "places", "transitions", "flow", "initial",
                 "locations", "assignment", "__dict__")

    def __init__(self, name: str, places: Iterable[str], transitions: Iterable[str],
                 flow: Iterable[tuple[str, str]], initial: Iterable[str],
                 locations: Iterable[str], assignment: Mapping[str, str]):
        self.name = name
        self.places = frozenset(places)
        self.transitions = frozenset(transitions)
        self.flow = frozenset((str(a), str(b)) for a, b in flow)
        self.initial = frozenset(initial)
        self.locations = tuple(locations)
        self.assignment = dict(assignment)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetSystem):
            return NotImplemented
        return (self.name, self.places, self.transitions, self.flow, self.initial,
                self.locations, self.assignment) == \
               (other.name, other.places, other.transitions, other.flow, other.initial,
                other.locations, other.assignment)

    def __hash__(self) -> int:
        return hash((self.name, self.places, self.transitions, self.flow,
                     self.initial, self.locations))

    def __repr__(self) -> str:
        return (f"NetSystem({self.name!r}, |P|={len(self.places)}, "
                f"|T|={len(self.transitions)}, locations={list(self.locations)})")

    # -- structural accessors -------------------------------------------

    @functools.cached_property
    def _pre(self) -> dict[str, frozenset]:
        pre: dict[str, set] = {x: set() for x in self.places | self.transitions}
        for a, b in self.flow:
            if b in pre:
                pre[b].add(a)
        return {x: frozenset(s) for x, s in pre.items()}

    @functools.cached_property
    def _post(self) -> dict[str, frozenset]:
        post: dict[str, set] = {x: set() for x in self.places | self.transitions}
        for a, b in self.flow:
            if a in post:
                post[a].add(b)
        return {x: frozenset(s) for x, s in post.items()}

    def pre(self, x: str) -> frozenset:
        try:
            return self._pre[x]
        except KeyError:
            raise InputError(f"unknown net element {x!r}") from None

    def post(self, x: str) -> frozenset:
        try:
            return self._post[x]
        except KeyError:
            raise InputError(f"unknown net element {x!r}") from None

    @property
    def env(self) -> str:
        return self.locations[0]

    @property
    def users(self) -> tuple:
        return self.locations[1:]

    def location_of(self, x: str) -> str:
        try:
            return self.assignment[x]
        except KeyError:
            raise InputError(f"element {x!r} has no location") from None

    def is_controllable(self, t: str) -> bool:
        return self.location_of(t) != self.env

    def transitions_of(self, location: str) -> tuple:
        return tuple(sorted(t for t in self.transitions
                            if self.assignment.get(t) == location))


class ReachabilityGraph:
    """Explicit reachable-marking graph, deterministically ordered."""

    def __init__(self, states: Iterable[Marking], edges: Iterable[tuple], initial: Marking):
        self.states = tuple(sorted(states, key=marking_key))
        self.edges = tuple(sorted(edges, key=lambda e: (marking_key(e[0]), e[1])))
        self.initial = initial
        self.index = {m: i for i, m in enumerate(self.states)}

    def successors(self, m: Marking) -> tuple:
        return tuple((t, m2) for m1, t, m2 in self.edges if m1 == m)

    def __len__(self) -> int:
        return len(self.states)


def validate_net(net: NetSystem) -> list[str]:
    """Check all structural invariants; return one diagnostic per violation.

    An empty list means the net is a well-formed distributed elementary
    net system (it may still fail the contact-freeness check, which
    needs the reachability graph).
    """
    diags: list[str] = []
    overlap = net.places & net.transitions
    for x in sorted(overlap):
        diags.append(f"identifier {x!r} is both a place and a transition")
    for a, b in sorted(net.flow):
        ok = (a in net.places and b in net.transitions) or \
             (a in net.transitions and b in net.places)
        if not ok:
            diags.append(f"flow arc ({a},{b}) does not connect a place and a transition")
    if len(net.locations) != len(set(net.locations)):
        diags.append("duplicate location names")
    for x in sorted(net.places | net.transitions):
        loc = net.assignment.get(x)
        if loc is None:
            diags.append(f"element {x!r} has no location")
        elif loc not in net.locations:
            diags.append(f"element {x!r} assigned to unknown location {loc!r}")
    for t in sorted(net.transitions):
        if not net.pre(t):
            diags.append(f"empty pre-set of {t}")
        if not net.post(t):
            diags.append(f"empty post-set of {t}")
    for t in sorted(net.transitions):
        for p in sorted(net.pre(t)):
            if p in net.places and net.assignment.get(p) != net.assignment.get(t):
                diags.append(f"distribution violated at ({p},{t}): "
                             f"input place and transition have different locations")
    for p in sorted(net.initial):
        if p not in net.places:
            diags.append(f"initial marking contains unknown place {p!r}")
    return diags


def require_valid(net: NetSystem) -> None:
    diags = validate_net(net)
    if diags:
        raise InputError("invalid net: " + "; ".join(diags))


def enabled_set(net: NetSystem, m: Marking) -> frozenset:
    """Transitions enabled at ``m``: pre-set marked and post-set token-free."""
    unknown = m - net.places
    if unknown:
        raise InputError(f"marking contains unknown places: {sorted(unknown)}")
    return frozenset(t for t in net.transitions
                     if net.pre(t) <= m and not (net.post(t) & m))


def fire(net: NetSystem, m: Marking, t: str) -> Marking:
    """Fire ``t`` at ``m``, producing ``post(t) | (m - pre(t))``."""
    if t not in net.transitions:
        raise InputError(f"unknown transition {t!r}")
    if t not in enabled_set(net, m):
        raise PreconditionError(
            f"transition {t} is not enabled at {format_marking(m)}")
    return net.post(t) | (m - net.pre(t))


def reachability_graph(net: NetSystem, max_states: int = DEFAULT_STATE_BOUND) -> ReachabilityGraph:
    """BFS over the token game from the initial marking."""
    require_valid(net)
    transitions = sorted(net.transitions)
    seen = {net.initial}
    queue = deque([net.initial])
    edges = []
    while queue:
        m = queue.popleft()
        for t in transitions:
            if net.pre(t) <= m and not (net.post(t) & m):
                m2 = net.post(t) | (m - net.pre(t))
                edges.append((m, t, m2))
                if m2 not in seen:
                    if len(seen) >= max_states:
                        raise BoundExceeded(
                            f"reachability graph exceeds {max_states} states", max_states)
                    seen.add(m2)
                    queue.append(m2)
    return ReachabilityGraph(seen, edges, net.initial)


def check_contact_free(net: NetSystem, max_states: int = DEFAULT_STATE_BOUND,
                       ) -> tuple[bool, Optional[tuple[Marking, str]]]:
    """Exhaustively check contact-freeness over all reachable markings.

    Returns ``(True, None)`` or ``(False, (marking, transition))`` with the
    first witness in canonical order: a reachable marking covering some
    pre-set while the corresponding post-set is not token-free.
    """
    graph = reachability_graph(net, max_states=max_states)
    for m in graph.states:
        for t in sorted(net.transitions):
            if net.pre(t) <= m and net.post(t) & m:
                return False, (m, t)
    return True, None


def require_contact_free(net: NetSystem, max_states: int = DEFAULT_STATE_BOUND) -> None:
    ok, witness = check_contact_free(net, max_states=max_states)
    if not ok:
        m, t = witness
        raise InputError(
            f"net is not contact-free: transition {t} has a marked post-set "
            f"at reachable marking {format_marking(m)}")


class StructuralRelation:
    """Result of the pairwise transition query."""

    __slots__ = ("kind", "concurrent_at")

    def __init__(self, kind: str, concurrent_at: Optional[bool]):
        self.kind = kind              # "conflict" | "independent" | "neither"
        self.concurrent_at = concurrent_at

    def __repr__(self) -> str:
        return f"StructuralRelation({self.kind!r}, concurrent_at={self.concurrent_at})"


def structural_relation(net: NetSystem, t1: str, t2: str,
                        m: Optional[Marking] = None) -> StructuralRelation:
    """Classify ``t1`` vs ``t2``: conflict (shared input place), independent
    (disjoint neighbourhoods), or neither; with ``m`` given, additionally
    report whether they are concurrent there (independent and both enabled)."""
    for t in (t1, t2):
        if t not in net.transitions:
            raise InputError(f"unknown transition {t!r}")
    if t1 == t2:
        raise InputError("structural_relation requires two distinct transitions")
    if net.pre(t1) & net.pre(t2):
        kind = "conflict"
    elif not ((net.pre(t1) | net.post(t1)) & (net.pre(t2) | net.post(t2))):
        kind = "independent"
    else:
        kind = "neither"
    concurrent_at = None
    if m is not None:
        enabled = enabled_set(net, m)
        concurrent_at = kind == "independent" and t1 in enabled and t2 in enabled
    return StructuralRelation(kind, concurrent_at)


# -- text format ---------------------------------------------------------
#
#   net <name>
#   locations <env> <u1> ... <uk>
#   place <id> @<location> [init]
#   trans <id> @<location> pre <id>+ post <id>+
#
# '#' starts a comment, blank lines are ignored.

def parse_net(text: str) -> NetSystem:
    name = None
    locations: list[str] = []
    places: list[str] = []
    transitions: list[str] = []
    flow: list[tuple[str, str]] = []
    initial: list[str] = []
    assignment: dict[str, str] = {}

    def fail(lineno: int, msg: str) -> None:
        raise InputError(f"net format error on line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0]
        if kind == "net":
            if len(tokens) != 2:
                fail(lineno, "expected: net <name>")
            name = tokens[1]
        elif kind == "locations":
            if len(tokens) < 2:
                fail(lineno, "expected: locations <env> [<user> ...]")
            locations = tokens[1:]
        elif kind == "place":
            if len(tokens) < 3 or not tokens[2].startswith("@"):
                fail(lineno, "expected: place <id> @<location> [init]")
            pid, loc = tokens[1], tokens[2][1:]
            rest = tokens[3:]
            if rest not in ([], ["init"]):
                fail(lineno, f"unexpected tokens {rest} after place declaration")
            places.append(pid)
            assignment[pid] = loc
            if rest == ["init"]:
                initial.append(pid)
        elif kind == "trans":
            if len(tokens) < 3 or not tokens[2].startswith("@"):
                fail(lineno, "expected: trans <id> @<location> pre <id>+ post <id>+")
            tid, loc = tokens[1], tokens[2][1:]
            try:
                pre_at = tokens.index("pre")
                post_at = tokens.index("post")
            except ValueError:
                fail(lineno, "transition needs both a 'pre' and a 'post' list")
            pre_ids = tokens[pre_at + 1:post_at]
            post_ids = tokens[post_at + 1:]
            if not pre_ids or not post_ids:
                fail(lineno, "empty pre or post list")
            transitions.append(tid)
            assignment[tid] = loc
            for p in pre_ids:
                flow.append((p, tid))
            for p in post_ids:
                flow.append((tid, p))
        else:
            fail(lineno, f"unknown declaration {kind!r}")
    if name is None:
        raise InputError("net format error: missing 'net <name>' line")
    if not locations:
        raise InputError("net format error: missing 'locations' line")
    return NetSystem(name, places, transitions, flow, initial, locations, assignment)


def format_net(net: NetSystem) -> str:
    """Canonical text form; parse(format(net)) reproduces the net."""
    lines = [f"net {net.name}", "locations " + " ".join(net.locations)]
    for p in sorted(net.places):
        init = " init" if p in net.initial else ""
        lines.append(f"place {p} @{net.assignment[p]}{init}")
    for t in sorted(net.transitions):
        pre = " ".join(sorted(net.pre(t)))
        post = " ".join(sorted(net.post(t)))
        lines.append(f"trans {t} @{net.assignment[t]} pre {pre} post {post}")
    return "\n".join(lines) + "\n"


def dot_reachability(graph: ReachabilityGraph) -> str:
    """DOT rendering of the reachability graph (stable across runs)."""
    out = ["digraph reachability {", "  rankdir=LR;", "  node [shape=ellipse];"]
    for m in graph.states:
        label = format_marking(m)
        shape = ' penwidth=2' if m == graph.initial else ""
        out.append(f'  "{label}" [label="{label}"{shape}];')
    for m1, t, m2 in graph.edges:
        out.append(f'  "{format_marking(m1)}" -> "{format_marking(m2)}" [label="{t}"];')
    out.append("}")
    return "\n".join(out) + "\n"
