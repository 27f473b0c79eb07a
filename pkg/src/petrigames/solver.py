"""Memoryless strategy synthesis and ATL model checking on the game
structure.

Two engines answer the same question -- does the grand coalition have a
memoryless profile under which every fair computation satisfies the path
formula (and at least one fair computation exists)?

* ``synthesize_enumerate`` sweeps all profiles in canonical order and
  verifies each one exactly; it is the correctness oracle.
* ``synthesize_fixpoint`` prunes the same search with attractor-based
  solving of the two-player fair game on a monitor/counter product: a
  partial profile is abandoned as soon as the adversary (environment plus
  scheduler) can force a fair violating computation even against users
  with full memory.  Complete survivors are verified exactly, so both
  engines return identical verdicts and witnesses wherever both run.

Verification of one profile restricts the user moves, builds the product
with a small monitor automaton for the path formula (2 states for G,
3 for U), and looks for a reachable strongly connected component that
contains a violating cycle satisfying every weak fairness constraint
(disabled at some position or taken at some step).  Weak fairness makes
this a generalized Buechi condition, so SCC inspection is exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import BoundExceeded, EngineDisagreement, InputError
from .formulas import (
    Coalition,
    Formula,
    PathFormula,
    check_fragment,
    format_formula,
    holds_in,
)
from .game import (
    FairnessConstraint,
    GameStructure,
    LassoComputation,
    build_fairness,
    build_game,
)
from .nets import NetSystem, format_marking, marking_key, parse_marking
from .unfold import BranchingProcess, NetStrategy, cut_step, enabled_events, \
    events_before_cut, initial_cut

DEFAULT_PROFILE_BOUND = 200_000

# monitor states
_PENDING, _SAT, _FAILED = 0, 1, 2


@dataclass(frozen=True)
class PathObjective:
    """A path formula compiled to per-state truth tables."""
    op: str                      # "G" or "U"
    left: tuple
    right: Optional[tuple] = None

    @staticmethod
    def from_path_formula(g: GameStructure, pf: PathFormula) -> "PathObjective":
        left = tuple(holds_in(pf.left, g.w(qi)) for qi in range(len(g.states)))
        right = None
        if pf.op == "U":
            right = tuple(holds_in(pf.right, g.w(qi)) for qi in range(len(g.states)))
        return PathObjective(pf.op, left, right)

    @staticmethod
    def from_state_sets(g: GameStructure, op: str, left: frozenset,
                        right: Optional[frozenset] = None) -> "PathObjective":
        n = len(g.states)
        return PathObjective(
            op,
            tuple(qi in left for qi in range(n)),
            tuple(qi in right for qi in range(n)) if right is not None else None)

    def monitor_step(self, mon: int, qi: int) -> int:
        if self.op == "G":
            if mon == _FAILED:
                return _FAILED
            return _PENDING if self.left[qi] else _FAILED
        if mon in (_SAT, _FAILED):
            return mon
        if self.right[qi]:
            return _SAT
        if not self.left[qi]:
            return _FAILED
        return _PENDING

    def violating_monitors(self) -> frozenset:
        # G: a violation was seen; U: failed, or pending forever
        return frozenset({_FAILED}) if self.op == "G" \
            else frozenset({_PENDING, _FAILED})


@dataclass(frozen=True)
class GameProfile:
    """One memoryless strategy per user: a move index for every state."""
    moves: tuple    # moves[user][state index] -> move index

    def move(self, user: int, qi: int) -> int:
        return self.moves[user][qi]


def validate_game_profile(g: GameStructure, profile: GameProfile) -> None:
    if len(profile.moves) != g.user_count:
        raise InputError(f"profile must cover {g.user_count} users")
    for a, per_state in enumerate(profile.moves):
        if len(per_state) != len(g.states):
            raise InputError("profile must assign a move at every state")
        for qi, j in enumerate(per_state):
            if not 0 <= j < g.d(a, qi):
                raise InputError(
                    f"move {j} out of range for user {g.player_names[a]} at "
                    f"{format_marking(g.states[qi])}")


def profile_space(g: GameStructure) -> int:
    space = 1
    for a in range(g.user_count):
        for qi in range(len(g.states)):
            space *= g.d(a, qi)
    return space


def iter_profiles(g: GameStructure):
    """All profiles in canonical order: users major, states minor, move
    indices ascending."""
    ranges = [range(g.d(a, qi))
              for a in range(g.user_count) for qi in range(len(g.states))]
    n = len(g.states)
    for flat in itertools.product(*ranges):
        yield GameProfile(tuple(flat[a * n:(a + 1) * n]
                                for a in range(g.user_count)))


@dataclass
class Verdict:
    satisfied: bool
    witness: Optional[GameProfile] = None
    counterexample: Optional[LassoComputation] = None
    reason: str = ""
    state_sets: dict = field(default_factory=dict)


class VerifyOutcome:
    __slots__ = ("ok", "counterexample", "reason")

    def __init__(self, ok: bool, counterexample: Optional[LassoComputation],
                 reason: str):
        self.ok = ok
        self.counterexample = counterexample
        self.reason = reason


def _edge_taken(g: GameStructure, fc: FairnessConstraint,
                qi: int, scheduled: int, j: int) -> bool:
    if fc.player == g.scheduler_player:
        return scheduled in fc.at(qi)
    return scheduled == fc.player and j in fc.at(qi)


def _profile_vector(g: GameStructure, profile: GameProfile,
                    qi: int, scheduled: int, j: int) -> tuple:
    vec = []
    for a in range(g.user_count):
        vec.append(j if a == scheduled else profile.move(a, qi))
    vec.append(j if scheduled == g.env_player else 0)
    vec.append(scheduled)
    return tuple(vec)


def _restricted_edges(g: GameStructure, profile: GameProfile, qi: int):
    """Outgoing (scheduled, move, successor) under the profile; adversary
    keeps the scheduler and environment choices."""
    for a in range(g.user_count):
        j = profile.move(a, qi)
        yield a, j, g.apply_move(qi, a, j)
    for j in range(g.d(g.env_player, qi)):
        yield g.env_player, j, g.apply_move(qi, g.env_player, j)


def verify_profile(g: GameStructure, constraints: Sequence[FairnessConstraint],
                   profile: GameProfile, pf, q0: Optional[int] = None,
                   ) -> VerifyOutcome:
    """Exact check of one profile: true iff fair computations from q0 exist
    and every one of them satisfies the path formula.

    On failure returns a fair violating lasso, or a reason when the
    profile admits no fair computation at all.
    """
    validate_game_profile(g, profile)
    if q0 is None:
        q0 = g.initial_state()
    if not 0 <= q0 < len(g.states):
        raise InputError(f"unknown state index {q0}")
    objective = pf if isinstance(pf, PathObjective) \
        else PathObjective.from_path_formula(g, pf)
    constraints = tuple(constraints)

    root = (q0, objective.monitor_step(_PENDING, q0))
    adjacency: dict[tuple, list] = {}
    stack = [root]
    while stack:
        node = stack.pop()
        if node in adjacency:
            continue
        qi, mon = node
        edges = []
        for a, j, qj in _restricted_edges(g, profile, qi):
            target = (qj, objective.monitor_step(mon, qj))
            edges.append((target, a, j))
            if target not in adjacency:
                stack.append(target)
        adjacency[node] = edges
    for edges in adjacency.values():
        edges.sort(key=lambda e: (e[0], e[1], e[2]))

    sccs = _strongly_connected_components(sorted(adjacency), adjacency)

    def fair_scc(component: frozenset) -> bool:
        for fc in constraints:
            if any(not fc.enabled(qi) for qi, _ in component):
                continue
            if any(_edge_taken(g, fc, qi, a, j)
                   for (qi, mon) in component
                   for (target, a, j) in adjacency[(qi, mon)]
                   if target in component):
                continue
            return False
        return True

    def has_cycle(component: frozenset) -> bool:
        if len(component) > 1:
            return True
        node = next(iter(component))
        return any(target == node for target, _, _ in adjacency[node])

    violating = objective.violating_monitors()
    any_fair = False
    for component in sccs:
        if not has_cycle(component) or not fair_scc(component):
            continue
        any_fair = True
        if next(iter(component))[1] in violating:
            lasso = _extract_lasso(g, profile, constraints, adjacency,
                                   root, component)
            return VerifyOutcome(False, lasso, "fair violating computation found")
    if not any_fair:
        return VerifyOutcome(
            False, None, "profile admits no fair computation from the initial state")
    return VerifyOutcome(True, None, "")


def _strongly_connected_components(nodes: Sequence, adjacency: Mapping) -> list:
    """Iterative Tarjan; deterministic given node and edge order.  Returns
    components as frozensets, ordered by their smallest node."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    components = []
    counter = itertools.count()

    for start in nodes:
        if start in index:
            continue
        work = [(start, iter(adjacency[start]))]
        index[start] = low[start] = next(counter)
        stack.append(start)
        on_stack.add(start)
        while work:
            node, edge_iter = work[-1]
            advanced = False
            for target, _, _ in edge_iter:
                if target not in index:
                    index[target] = low[target] = next(counter)
                    stack.append(target)
                    on_stack.add(target)
                    work.append((target, iter(adjacency[target])))
                    advanced = True
                    break
                if target in on_stack:
                    low[node] = min(low[node], index[target])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.add(member)
                    if member == node:
                        break
                components.append(frozenset(component))
    components.sort(key=lambda comp: min(comp))
    return components


def _extract_lasso(g: GameStructure, profile: GameProfile,
                   constraints: Sequence[FairnessConstraint],
                   adjacency: Mapping, root, component: frozenset
                   ) -> LassoComputation:
    """Deterministic counterexample: shortest path to the component, then a
    tour visiting a witness (disabled position or taken edge) for every
    constraint, closed back to its anchor."""

    def bfs(source, goal_test, allowed=None):
        # returns the edge list of a shortest path; ties broken by edge order
        seen = {source: None}
        queue = [source]
        while queue:
            nxt = []
            for node in queue:
                if goal_test(node):
                    path = []
                    while seen[node] is not None:
                        prev, edge = seen[node]
                        path.append((prev, edge))
                        node = prev
                    return list(reversed(path))
                for edge in adjacency[node]:
                    target = edge[0]
                    if allowed is not None and target not in allowed:
                        continue
                    if target not in seen:
                        seen[target] = (node, edge)
                        nxt.append(target)
            queue = nxt
        raise AssertionError("bfs goal unreachable")

    anchor = min(component)
    prefix_edges = bfs(root, lambda n: n == anchor)

    tour = []
    pos = anchor
    for fc in constraints:
        disabled = sorted(n for n in component if not fc.enabled(n[0]))
        if disabled:
            segment = bfs(pos, lambda n: not fc.enabled(n[0]), allowed=component)
            tour.extend(segment)
            pos = segment[-1][1][0] if segment else pos
            continue
        taken_sources = sorted(
            n for n in component
            if any(t in component and _edge_taken(g, fc, n[0], a, j)
                   for t, a, j in adjacency[n]))
        segment = bfs(pos, lambda n: n in set(taken_sources), allowed=component)
        tour.extend(segment)
        pos = segment[-1][1][0] if segment else pos
        edge = next(e for e in adjacency[pos]
                    if e[0] in component and _edge_taken(g, fc, pos[0], e[1], e[2]))
        tour.append((pos, edge))
        pos = edge[0]
    if pos != anchor or not tour:
        if not tour and pos == anchor:
            edge = next(e for e in adjacency[anchor] if e[0] in component)
            tour.append((anchor, edge))
            pos = edge[0]
        tour.extend(bfs(pos, lambda n: n == anchor, allowed=component))

    def steps(edge_list):
        return tuple((node[0], _profile_vector(g, profile, node[0], a, j))
                     for node, (target, a, j) in edge_list)

    return LassoComputation(steps(prefix_edges), steps(tour))


# -- enumerative engine ---------------------------------------------------------

def synthesize_enumerate(g: GameStructure, constraints: Sequence[FairnessConstraint],
                         pf, q0: Optional[int] = None,
                         max_profiles: int = DEFAULT_PROFILE_BOUND) -> Verdict:
    """Try every profile in canonical order; the first winning one is the
    witness.  Unsatisfied verdicts carry the last profile's counterexample."""
    space = profile_space(g)
    if space > max_profiles:
        raise BoundExceeded(
            f"profile space of size {space} exceeds the enumeration bound "
            f"{max_profiles}; use the fixpoint engine", max_profiles)
    objective = pf if isinstance(pf, PathObjective) \
        else PathObjective.from_path_formula(g, pf)
    last: Optional[VerifyOutcome] = None
    for profile in iter_profiles(g):
        outcome = verify_profile(g, constraints, profile, objective, q0)
        if outcome.ok:
            return Verdict(True, witness=profile)
        last = outcome
    return Verdict(False, counterexample=last.counterexample if last else None,
                   reason=last.reason if last else "no profiles to try")


# -- fixed-point engine -----------------------------------------------------------

class _FairGame:
    """Buechi game on the (state, monitor, awaited-constraint, tick)
    product.  The adversary (scheduler and environment) wins by forcing a
    computation that satisfies every weak fairness constraint infinitely
    often while violating the objective; user moves at assigned slots are
    frozen, the rest stay free protagonist choices."""

    def __init__(self, g: GameStructure, constraints: Sequence[FairnessConstraint],
                 objective: PathObjective, q0: int):
        self.g = g
        self.constraints = tuple(constraints)
        self.objective = objective
        self.q0 = q0
        self.m = max(1, len(self.constraints))

    def _advance(self, qi: int, scheduled: int, j: int, cnt: int) -> tuple:
        """Move the awaited-constraint counter across one game step."""
        if not self.constraints:
            return 0, True
        tick = False
        for _ in range(self.m):
            fc = self.constraints[cnt]
            if fc.enabled(qi) and not _edge_taken(self.g, fc, qi, scheduled, j):
                break
            cnt = (cnt + 1) % self.m
            if cnt == 0:
                tick = True
        return cnt, tick

    def solve(self, assignment: Mapping) -> bool:
        """True iff the adversary wins from the initial node."""
        g = self.g
        objective = self.objective
        violating = objective.violating_monitors()
        root = ("c", self.q0, objective.monitor_step(_PENDING, self.q0), 0, False)

        adjacency: dict = {}
        owner_adv: dict = {}
        accept: set = set()
        stack = [root]
        while stack:
            node = stack.pop()
            if node in adjacency:
                continue
            edges = []
            if node[0] == "c":
                _, qi, mon, cnt, tick = node
                owner_adv[node] = True
                if tick and mon in violating:
                    accept.add(node)
                for a in range(g.user_count):
                    fixed = assignment.get((a, qi))
                    if fixed is None and g.d(a, qi) > 1:
                        edges.append(("u", qi, mon, cnt, a))
                    else:
                        j = fixed if fixed is not None else 0
                        edges.append(self._step(qi, mon, cnt, a, j))
                for j in range(g.d(g.env_player, qi)):
                    edges.append(self._step(qi, mon, cnt, g.env_player, j))
            else:
                _, qi, mon, cnt, a = node
                owner_adv[node] = False
                for j in range(g.d(a, qi)):
                    edges.append(self._step(qi, mon, cnt, a, j))
            adjacency[node] = edges
            for target in edges:
                if target not in adjacency:
                    stack.append(target)

        return root in _buchi_win(adjacency, owner_adv, accept)

    def _step(self, qi: int, mon: int, cnt: int, scheduled: int, j: int) -> tuple:
        qj = self.g.apply_move(qi, scheduled, j)
        mon2 = self.objective.monitor_step(mon, qj)
        cnt2, tick = self._advance(qi, scheduled, j, cnt)
        return ("c", qj, mon2, cnt2, tick)


def _attractor(adjacency: Mapping, owner_adv: Mapping, for_adversary: bool,
               target: set, arena: set) -> set:
    """Player attractor within ``arena`` (standard backward fixpoint)."""
    preds: dict = {node: [] for node in arena}
    degree: dict = {}
    for node in arena:
        succ = [t for t in adjacency[node] if t in arena]
        degree[node] = len(succ)
        for t in succ:
            preds[t].append(node)
    attracted = set(target)
    queue = list(target)
    while queue:
        node = queue.pop()
        for p in preds.get(node, ()):
            if p in attracted:
                continue
            if owner_adv[p] == for_adversary:
                attracted.add(p)
                queue.append(p)
            else:
                degree[p] -= 1
                if degree[p] == 0:
                    attracted.add(p)
                    queue.append(p)
    return attracted


def _buchi_win(adjacency: Mapping, owner_adv: Mapping, accept: set) -> set:
    """Adversary's winning region for 'visit accepting nodes infinitely
    often' (classical repeated-attractor algorithm)."""
    arena = set(adjacency)
    while True:
        reach = _attractor(adjacency, owner_adv, True, accept & arena, arena)
        trap = arena - reach
        if not trap:
            return arena
        escape = _attractor(adjacency, owner_adv, False, trap, arena)
        arena -= escape
        if not arena:
            return arena


def synthesize_fixpoint(g: GameStructure, constraints: Sequence[FairnessConstraint],
                        pf, q0: Optional[int] = None) -> Verdict:
    """Attractor-pruned search over profiles.

    A depth-first sweep fixes user moves slot by slot in canonical order;
    a branch is cut as soon as the adversary wins the fair game against
    users with unrestricted memory on the remaining slots (sound: the
    restriction only weakens the users).  Complete assignments are
    verified exactly, including non-vacuity, so the verdict and witness
    match the enumerative engine.
    """
    if q0 is None:
        q0 = g.initial_state()
    objective = pf if isinstance(pf, PathObjective) \
        else PathObjective.from_path_formula(g, pf)
    constraints = tuple(constraints)
    game = _FairGame(g, constraints, objective, q0)
    n = len(g.states)
    vacuity_probe = PathObjective("G", (True,) * n)

    slots = [(a, qi) for a in range(g.user_count)
             for qi in range(n) if g.d(a, qi) > 1]

    assignment: dict = {}

    def complete_profile() -> GameProfile:
        return GameProfile(tuple(
            tuple(assignment.get((a, qi), 0) for qi in range(n))
            for a in range(g.user_count)))

    def search(idx: int) -> Optional[GameProfile]:
        if game.solve(assignment):
            return None
        if idx == len(slots):
            # the leaf game solve is exact on a fully assigned profile, so
            # only non-vacuity (a fair computation exists) remains
            profile = complete_profile()
            if verify_profile(g, constraints, profile, vacuity_probe, q0).ok:
                return profile
            return None
        slot = slots[idx]
        for j in range(g.d(slot[0], slot[1])):
            assignment[slot] = j
            found = search(idx + 1)
            if found is not None:
                return found
            del assignment[slot]
        return None

    found = search(0)
    if found is not None:
        return Verdict(True, witness=found)
    fallback = verify_profile(g, constraints, next(iter_profiles(g)), objective, q0)
    return Verdict(False, counterexample=fallback.counterexample,
                   reason="adversary defeats every memoryless profile "
                          "(fixed-point search exhausted)")


ENGINES = ("enumerate", "fixpoint", "both")


def synthesize(g: GameStructure, constraints: Sequence[FairnessConstraint], pf,
               q0: Optional[int] = None, engine: str = "enumerate",
               max_profiles: int = DEFAULT_PROFILE_BOUND) -> Verdict:
    if engine == "enumerate":
        return synthesize_enumerate(g, constraints, pf, q0, max_profiles)
    if engine == "fixpoint":
        return synthesize_fixpoint(g, constraints, pf, q0)
    if engine == "both":
        left = synthesize_enumerate(g, constraints, pf, q0, max_profiles)
        right = synthesize_fixpoint(g, constraints, pf, q0)
        if left.satisfied != right.satisfied:
            raise EngineDisagreement(
                f"engines disagree: enumerate={left.satisfied} "
                f"fixpoint={right.satisfied}")
        return left
    raise InputError(f"unknown engine {engine!r}")


# -- model checking -----------------------------------------------------------------

def model_check(g: GameStructure, constraints: Sequence[FairnessConstraint],
                formula: Formula, q0: Optional[int] = None,
                engine: str = "enumerate",
                max_profiles: int = DEFAULT_PROFILE_BOUND) -> Verdict:
    """Bottom-up labelling: boolean connectives as set operations, coalition
    subformulas solved per state by strategy synthesis."""
    violations = check_fragment(formula, g.net)
    if violations:
        raise InputError("formula outside the checkable fragment: "
                         + "; ".join(violations))
    if q0 is None:
        q0 = g.initial_state()
    constraints = tuple(constraints)
    all_states = frozenset(range(len(g.states)))
    state_sets: dict = {}
    verdict_cache: dict = {}

    def states_of(node) -> frozenset:
        key = format_formula(node)
        if key in state_sets:
            return state_sets[key]
        name = type(node).__name__
        if name == "Prop":
            result = frozenset(qi for qi in all_states if node.name in g.w(qi))
        elif name == "TrueConst":
            result = all_states
        elif name == "Not":
            result = all_states - states_of(node.sub)
        elif name == "Or":
            result = states_of(node.left) | states_of(node.right)
        elif name == "And":
            result = states_of(node.left) & states_of(node.right)
        elif name == "Coalition":
            left = states_of(node.args[0])
            right = states_of(node.args[1]) if node.op == "U" else None
            objective = PathObjective.from_state_sets(g, node.op, left, right)
            winning = set()
            for qi in sorted(all_states):
                verdict = synthesize(g, constraints, objective, qi,
                                     engine=engine, max_profiles=max_profiles)
                verdict_cache[(key, qi)] = verdict
                if verdict.satisfied:
                    winning.add(qi)
            result = frozenset(winning)
        else:
            raise InputError(f"not a formula node: {node!r}")
        state_sets[key] = result
        return result

    holds = states_of(formula)
    verdict = Verdict(q0 in holds)
    if isinstance(formula, Coalition):
        root = verdict_cache[(format_formula(formula), q0)]
        verdict.witness = root.witness
        verdict.counterexample = root.counterexample
        verdict.reason = root.reason
    verdict.state_sets = {
        key: tuple(sorted((g.states[qi] for qi in states), key=marking_key))
        for key, states in sorted(state_sets.items())}
    return verdict


def check_net(net: NetSystem, formula: Formula, engine: str = "enumerate",
              single_user_simplification: bool = False,
              max_states: int = 100_000,
              max_profiles: int = DEFAULT_PROFILE_BOUND) -> tuple:
    """Convenience front door: build the game and fairness constraints,
    then model-check the formula at the initial state."""
    g = build_game(net, single_user_simplification=single_user_simplification,
                   max_states=max_states)
    constraints = build_fairness(net, g)
    verdict = model_check(g, constraints, formula, engine=engine,
                          max_profiles=max_profiles)
    return g, constraints, verdict


# -- strategy conversion -----------------------------------------------------------

def profile_from_net_strategies(g: GameStructure,
                                strategies: Iterable[NetStrategy]) -> GameProfile:
    """Net to game: pick the lexicographically least chosen transition per
    marking; empty choices become the idle move."""
    by_owner: dict = {}
    for strategy in strategies:
        if strategy.owner not in g.net.users:
            raise InputError(f"{strategy.owner!r} is not a user location")
        by_owner[strategy.owner] = strategy
        for m in strategy.choice:
            if m not in g.state_index:
                raise InputError(
                    f"strategy references unknown state {format_marking(m)}")
    moves = []
    for a, user in enumerate(g.net.users):
        strategy = by_owner.get(user)
        per_state = []
        for qi in range(len(g.states)):
            chosen = strategy.at(g.states[qi]) if strategy else frozenset()
            labels = g.moves[a][qi]
            if chosen:
                pick = min(chosen)
                if pick not in labels:
                    raise InputError(
                        f"strategy for {user} chooses {pick}, not enabled at "
                        f"{format_marking(g.states[qi])}")
                per_state.append(labels.index(pick))
            else:
                idle = g.idle_move(a, qi)
                if idle is None:
                    raise InputError(
                        f"user {user} must move at {format_marking(g.states[qi])} "
                        "(idle move removed by the single-user simplification)")
                per_state.append(idle)
        moves.append(tuple(per_state))
    return GameProfile(tuple(moves))


def net_strategies_from_profile(g: GameStructure, profile: GameProfile) -> tuple:
    """Game to net: singleton choice per marking, empty for idle moves."""
    validate_game_profile(g, profile)
    strategies = []
    for a, user in enumerate(g.net.users):
        choice = {}
        for qi, m in enumerate(g.states):
            label = g.move_label(a, qi, profile.move(a, qi))
            if label is not None:
                choice[m] = frozenset({label})
        strategies.append(NetStrategy(user, choice))
    return tuple(strategies)


def convert_strategy(direction: str, g: GameStructure, payload):
    if direction == "net-to-game":
        return profile_from_net_strategies(g, payload)
    if direction == "game-to-net":
        return net_strategies_from_profile(g, payload)
    raise InputError(f"unknown conversion direction {direction!r}")


def full_memory_from_cut_strategy(bp: BranchingProcess, g: GameStructure,
                                  owner: str,
                                  cut_choice: Mapping) -> dict:
    """Cut-keyed to prefix-keyed conversion over a bounded prefix.

    For every B-cut of the prefix, all interleavings of its past events
    yield state sequences; each sequence (up to stutter removal) is mapped
    to one transition arbitrarily-but-canonically chosen from the cut's
    choice set.  Conflicting assignments keep the least transition.
    """
    from .formulas import canonical_lasso as _canon

    if owner not in g.net.users:
        raise InputError(f"{owner!r} is not a user location")
    known_cuts = set()
    queue = [initial_cut(bp)]
    while queue:
        cut = queue.pop()
        if cut in known_cuts:
            continue
        known_cuts.add(cut)
        for eid in enabled_events(bp, cut):
            queue.append(cut_step(bp, cut, eid))
    for cut in cut_choice:
        if frozenset(cut) not in known_cuts:
            raise InputError("cut-keyed strategy references an unknown cut")

    mapping: dict = {}
    for cut in sorted(known_cuts, key=lambda c: tuple(sorted(c))):
        chosen = sorted(cut_choice.get(cut, cut_choice.get(frozenset(cut), ())))
        value = chosen[0] if chosen else None
        past = sorted(events_before_cut(bp, cut))
        order = {e: {f for f in past if f != e and bp.causally_le(f, e)}
                 for e in past}
        for extension in _linear_extensions_of(order, past):
            seq = [bp.mu(initial_cut(bp))]
            walking = initial_cut(bp)
            for eid in extension:
                walking = cut_step(bp, walking, eid)
                seq.append(bp.mu(walking))
            key = _canon(seq, ())[0]
            if key not in mapping or _prefer(value, mapping[key]):
                mapping[key] = value
    return mapping


def _prefer(new, old) -> bool:
    if old is None:
        return new is not None
    if new is None:
        return False
    return new < old


def _linear_extensions_of(order: Mapping, items: Sequence):
    items = sorted(items)
    if not items:
        yield ()
        return
    remaining = set(items)

    def extend(done: tuple):
        if len(done) == len(items):
            yield done
            return
        for x in items:
            if x in remaining and order.get(x, set()) <= set(done):
                remaining.discard(x)
                yield from extend(done + (x,))
                remaining.add(x)

    yield from extend(())


# -- strategy files ---------------------------------------------------------------

def format_profile(g: GameStructure, profile: GameProfile) -> str:
    """``strategy <user>: <marking> -> <transition|pass>`` lines."""
    lines = []
    for a, user in enumerate(g.net.users):
        for qi, m in enumerate(g.states):
            label = g.move_label(a, qi, profile.move(a, qi))
            lines.append(f"strategy {user}: {format_marking(m)} -> "
                         f"{label if label is not None else 'pass'}")
    return "\n".join(lines) + "\n"


def parse_profile(g: GameStructure, text: str) -> GameProfile:
    moves = [[None] * len(g.states) for _ in range(g.user_count)]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("strategy "):
            raise InputError(f"strategy file error on line {lineno}")
        head, _, tail = line[len("strategy "):].partition(":")
        user = head.strip()
        if user not in g.net.users:
            raise InputError(f"unknown user {user!r} on line {lineno}")
        a = g.net.users.index(user)
        marking_text, _, move_text = tail.partition("->")
        marking = parse_marking(marking_text)
        if marking not in g.state_index:
            raise InputError(
                f"unknown state {format_marking(marking)} on line {lineno}")
        qi = g.state_index[marking]
        move = move_text.strip()
        labels = g.moves[a][qi]
        label = None if move == "pass" else move
        if label not in labels:
            raise InputError(f"move {move!r} not available on line {lineno}")
        moves[a][qi] = labels.index(label)
    for a in range(g.user_count):
        for qi in range(len(g.states)):
            if moves[a][qi] is None:
                idle = g.idle_move(a, qi)
                moves[a][qi] = idle if idle is not None else 0
    return GameProfile(tuple(tuple(per) for per in moves))
