"""Turn-based asynchronous game structure of a distributed net system.

Players are indexed 0..n-1: users first (in the net's location order),
then the environment (index k), then the scheduler (index k+1 = n-1).
At every state the scheduler picks one of the k+1 other players; only the
selected player's move takes effect, so the transition function is
turn-based by construction.

Move lists are canonical: a user's moves are its enabled transitions in
lexicographic order followed by the idle move (None); the environment
moves are the enabled uncontrollable transitions, or a single idle move
when there are none.  The scheduler's j-th move selects player j.

Weak fairness constraints come in three families:
  * scheduler constraints: every non-scheduler player is selected
    infinitely often;
  * environment constraints, one per uncontrollable transition t: when t
    stays enabled, eventually the environment fires t or an enabled
    uncontrollable transition in conflict with it;
  * user progress constraints at states enabling only controllable
    transitions: a user with enabled transitions there must not idle at
    that state forever.

A constraint is satisfied by a lasso when it is disabled at some cycle
position or taken at some cycle step ("taken" for a non-scheduler player
also requires the scheduler to have selected that player).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import BoundExceeded, InputError, PreconditionError
from .formulas import canonical_lasso
from .nets import (
    Marking,
    NetSystem,
    format_marking,
    marking_key,
    reachability_graph,
    require_contact_free,
    require_valid,
)
from .unfold import Play, materialise_play, validate_play

SCHEDULER_NAME = "scheduler"
DEFAULT_LINEARISATION_BOUND = 1000


class GameStructure:
    """Immutable game structure over the reachable markings of a net."""

    def __init__(self, net: NetSystem, states: Sequence[Marking],
                 moves: Sequence[Sequence[tuple]], single_user_simplification: bool):
        self.net = net
        self.states = tuple(states)
        self.state_index = {m: i for i, m in enumerate(self.states)}
        self.user_count = len(net.users)
        self.player_count = self.user_count + 2
        self.env_player = self.user_count
        self.scheduler_player = self.player_count - 1
        self.player_names = tuple(net.users) + (net.env, SCHEDULER_NAME)
        #: moves[a][qi] is the tuple of move labels of player a at state qi
        #: (transition names or None for users/environment, player indices
        #: for the scheduler)
        self.moves = tuple(tuple(per_state) for per_state in moves)
        self.props = frozenset(net.places)
        self.single_user_simplification = single_user_simplification

    # -- basic queries -----------------------------------------------------

    def initial_state(self) -> int:
        return self.state_index[self.net.initial]

    def w(self, qi: int) -> frozenset:
        """Propositions true at a state: exactly its marking."""
        return self.states[qi]

    def d(self, player: int, qi: int) -> int:
        return len(self.moves[player][qi])

    def move_label(self, player: int, qi: int, j: int):
        try:
            return self.moves[player][qi][j]
        except IndexError:
            raise InputError(
                f"move {j} out of range for player {self.player_names[player]} "
                f"at state {format_marking(self.states[qi])}") from None

    def idle_move(self, player: int, qi: int) -> Optional[int]:
        labels = self.moves[player][qi]
        return labels.index(None) if None in labels else None

    def apply_move(self, qi: int, player: int, j: int) -> int:
        """Successor state when ``player`` is scheduled and plays move ``j``."""
        label = self.move_label(player, qi, j)
        if label is None:
            return qi
        marking = self.states[qi]
        nxt = self.net.post(label) | (marking - self.net.pre(label))
        return self.state_index[nxt]

    def tau(self, qi: int, vector: Sequence[int]) -> int:
        """Transition function over full move vectors."""
        if len(vector) != self.player_count:
            raise InputError(f"move vector must have {self.player_count} components")
        scheduled = self.move_label(self.scheduler_player, qi, vector[self.scheduler_player])
        return self.apply_move(qi, scheduled, vector[scheduled])

    def move_vectors(self, qi: int):
        return itertools.product(*(range(self.d(a, qi))
                                   for a in range(self.player_count)))

    def vector_for(self, qi: int, player: int, j: int) -> tuple:
        """Canonical full vector: the scheduled player plays ``j``, users
        idle where possible and the environment picks its first move."""
        vec = []
        for a in range(self.player_count - 1):
            if a == player:
                vec.append(j)
            else:
                idle = self.idle_move(a, qi)
                vec.append(idle if idle is not None else 0)
        vec.append(player)
        return tuple(vec)

    def edges(self, qi: int):
        """All (scheduled player, move index, successor) triples at a state."""
        for a in range(self.player_count - 1):
            for j in range(self.d(a, qi)):
                yield a, j, self.apply_move(qi, a, j)


def build_game(net: NetSystem, single_user_simplification: bool = False,
               max_states: int = 100_000) -> GameStructure:
    """The turn-based asynchronous game structure of a distributed net."""
    require_valid(net)
    require_contact_free(net, max_states=max_states)
    graph = reachability_graph(net, max_states=max_states)
    states = graph.states
    users = net.users
    k = len(users)

    enabled_by_state = []
    for m in states:
        enabled_by_state.append(tuple(
            t for t in sorted(net.transitions)
            if net.pre(t) <= m and not (net.post(t) & m)))

    moves: list[list[tuple]] = []
    for a, user in enumerate(users):
        per_state = []
        for qi, m in enumerate(states):
            own = tuple(t for t in enabled_by_state[qi]
                        if net.location_of(t) == user)
            uncontrollable = any(not net.is_controllable(t)
                                 for t in enabled_by_state[qi])
            if single_user_simplification and k == 1 and own and not uncontrollable:
                per_state.append(own)
            else:
                per_state.append(own + (None,))
        moves.append(per_state)
    env_moves = []
    for qi in range(len(states)):
        unc = tuple(t for t in enabled_by_state[qi] if not net.is_controllable(t))
        env_moves.append(unc if unc else (None,))
    moves.append(env_moves)
    moves.append([tuple(range(k + 1)) for _ in states])
    return GameStructure(net, states, moves, single_user_simplification)


@dataclass(frozen=True)
class FairnessConstraint:
    """A weak fairness constraint: a player and a per-state move subset."""
    player: int
    name: str
    moves: Mapping[int, frozenset]   # state index -> move indices; missing = empty

    def at(self, qi: int) -> frozenset:
        return self.moves.get(qi, frozenset())

    def enabled(self, qi: int) -> bool:
        return bool(self.moves.get(qi))


def build_fairness(net: NetSystem, g: GameStructure) -> tuple:
    """All weak fairness constraints of the game structure, in canonical
    order: scheduler constraints, per-transition environment constraints,
    user progress constraints."""
    constraints: list[FairnessConstraint] = []
    sched = g.scheduler_player
    for j in range(g.player_count - 1):
        constraints.append(FairnessConstraint(
            sched, f"schedule:{g.player_names[j]}",
            {qi: frozenset({j}) for qi in range(len(g.states))}))

    env = g.env_player
    for t in sorted(net.transitions):
        if net.is_controllable(t):
            continue
        per_state: dict[int, frozenset] = {}
        for qi, m in enumerate(g.states):
            if not (net.pre(t) <= m and not (net.post(t) & m)):
                continue
            group = {t}
            for other in g.moves[env][qi]:
                if other is not None and other != t and net.pre(other) & net.pre(t):
                    group.add(other)
            per_state[qi] = frozenset(g.moves[env][qi].index(x) for x in group)
        constraints.append(FairnessConstraint(env, f"weak:{t}", per_state))

    if not g.single_user_simplification:
        for qi, m in enumerate(g.states):
            enabled = [t for t in sorted(net.transitions)
                       if net.pre(t) <= m and not (net.post(t) & m)]
            if not enabled or any(not net.is_controllable(t) for t in enabled):
                continue
            for a, user in enumerate(net.users):
                non_idle = frozenset(
                    j for j, label in enumerate(g.moves[a][qi]) if label is not None)
                if non_idle:
                    constraints.append(FairnessConstraint(
                        a, f"progress:{format_marking(m)}:{user}", {qi: non_idle}))
    return tuple(constraints)


# -- computations ---------------------------------------------------------------

@dataclass(frozen=True)
class LassoComputation:
    """An infinite computation: a finite prefix and a repeating cycle of
    (state index, move vector) steps; the cycle returns to its start."""
    prefix: tuple
    cycle: tuple

    def initial(self) -> int:
        return self.prefix[0][0] if self.prefix else self.cycle[0][0]


def validate_lasso(g: GameStructure, lasso: LassoComputation) -> None:
    if not lasso.cycle:
        raise InputError("a computation needs a non-empty cycle")
    steps = list(lasso.prefix) + list(lasso.cycle)
    for (qi, vec), (qj, _) in zip(steps, steps[1:]):
        if g.tau(qi, vec) != qj:
            raise InputError(
                f"inconsistent computation: tau does not lead from "
                f"{format_marking(g.states[qi])} to {format_marking(g.states[qj])}")
    last_q, last_vec = lasso.cycle[-1]
    if g.tau(last_q, last_vec) != lasso.cycle[0][0]:
        raise InputError("computation cycle does not close")


class FairnessReport:
    __slots__ = ("fair", "violated")

    def __init__(self, fair: bool, violated: tuple):
        self.fair = fair
        self.violated = violated

    def __bool__(self) -> bool:
        return self.fair


def lasso_is_fair(g: GameStructure, constraints: Iterable[FairnessConstraint],
                  lasso: LassoComputation) -> FairnessReport:
    """Check every weak fairness constraint on the cycle: disabled at some
    position, or taken at some step (with the right scheduler choice)."""
    validate_lasso(g, lasso)
    violated = []
    for fc in constraints:
        ok = False
        for qi, vec in lasso.cycle:
            allowed = fc.at(qi)
            if not allowed:
                ok = True
                break
            if vec[fc.player] in allowed and \
                    (fc.player == g.scheduler_player or
                     vec[g.scheduler_player] == fc.player):
                ok = True
                break
        if not ok:
            violated.append(fc.name)
    return FairnessReport(not violated, tuple(violated))


def stutter_remove(g: GameStructure, lasso: LassoComputation
                   ) -> tuple[tuple, tuple]:
    """The stutter-free projection of a computation, as canonical
    (prefix, cycle) marking sequences; an empty cycle marks a finite
    projection whose last marking repeats forever."""
    validate_lasso(g, lasso)
    prefix_states = [g.states[qi] for qi, _ in lasso.prefix]
    cycle_states = [g.states[qi] for qi, _ in lasso.cycle]
    return canonical_lasso(prefix_states, cycle_states)


def computation_to_play(net: NetSystem, g: GameStructure,
                        constraints: Iterable[FairnessConstraint],
                        lasso: LassoComputation) -> Play:
    """Project a fair computation to a play: one event per non-idle step,
    one recorded cut after each event."""
    report = lasso_is_fair(g, constraints, lasso)
    if not report.fair:
        raise PreconditionError(
            "computation is not fair; violated: " + ", ".join(report.violated))

    def fired(qi: int, vec) -> Optional[str]:
        scheduled = g.move_label(g.scheduler_player, qi, vec[g.scheduler_player])
        return g.move_label(scheduled, qi, vec[scheduled])

    steps = tuple((t,) for qi, vec in lasso.prefix
                  if (t := fired(qi, vec)) is not None)
    cycle = tuple(t for qi, vec in lasso.cycle
                  if (t := fired(qi, vec)) is not None)
    return Play(steps, cycle, ())


def _linear_extensions(order: Mapping[str, set], items: Sequence[str]):
    """All linear extensions of a finite partial order, lexicographically."""
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


def play_to_computations(net: NetSystem, g: GameStructure,
                         constraints: Iterable[FairnessConstraint],
                         play: Play,
                         bound: int = DEFAULT_LINEARISATION_BOUND) -> tuple:
    """All computations obtained by linearising the events between
    consecutive cuts of a valid play, up to ``bound``; a deadlocked play
    gets the idle self-loop as its cycle.

    At least one returned computation is fair: when no plain
    linearisation is, the first one is repaired by appending idle steps
    for every player the cycle never schedules.
    """
    constraints = tuple(constraints)
    needed = sum(len(s) for s in play.steps) + len(play.cycle) + len(play.trailing)
    diags = validate_play(net, play, horizon=needed)
    if diags:
        raise PreconditionError("not a valid play: " + "; ".join(diags))

    mat = materialise_play(net, play, passes=1)
    bp = mat.bp

    # linear extensions per prefix gap, under the gap's causal order
    gap_choices = []
    for fired in mat.step_events[: mat.cycle_starts_at]:
        order = {e: {f for f in fired if f != e and bp.causally_le(f, e)}
                 for e in fired}
        labels = [tuple(bp.events[e].label for e in ext)
                  for ext in _linear_extensions(order, fired)]
        gap_choices.append(labels)

    def step_for(qi: int, t: str) -> tuple:
        owner = net.location_of(t)
        player = g.player_names.index(owner)
        j = g.moves[player][qi].index(t)
        return (qi, g.vector_for(qi, player, j))

    cycle_labels = list(play.cycle)

    def build(choice) -> LassoComputation:
        qi = g.initial_state()
        prefix = []
        for gap in choice:
            for t in gap:
                step = step_for(qi, t)
                prefix.append(step)
                qi = g.tau(*step)
        cycle = []
        if cycle_labels:
            for t in cycle_labels:
                step = step_for(qi, t)
                cycle.append(step)
                qi = g.tau(*step)
        else:
            cycle.append((qi, g.vector_for(qi, g.env_player,
                                           g.idle_move(g.env_player, qi))))
        return LassoComputation(tuple(prefix), tuple(cycle))

    computations = []
    for choice in itertools.product(*gap_choices):
        if len(computations) >= bound:
            break
        computations.append(build(choice))
    if not computations:
        raise BoundExceeded(
            f"no computation within linearisation bound {bound}", bound)

    if not any(lasso_is_fair(g, constraints, lam).fair for lam in computations):
        computations.append(_repair_fairness(g, computations[0]))
    return tuple(computations)


def _repair_fairness(g: GameStructure, lasso: LassoComputation) -> LassoComputation:
    """Append idle steps at the end of the cycle for every player the
    scheduler never selects there (possible for every valid play: users
    can always idle, and the environment only starves in cycles whose
    states enable no uncontrollable transition)."""
    scheduled = {vec[g.scheduler_player] for _, vec in lasso.cycle}
    home = lasso.cycle[0][0]
    extra = []
    for player in range(g.player_count - 1):
        if player in scheduled:
            continue
        idle = g.idle_move(player, home)
        if idle is None:
            continue
        extra.append((home, g.vector_for(home, player, idle)))
    return LassoComputation(lasso.prefix, lasso.cycle + tuple(extra))


# -- lasso files -------------------------------------------------------------------
#
# Same shape as play files: transition tokens, one per step, with
# ``pass@<player>`` for idle steps and an optional ``cycle:`` line.

def format_lasso(g: GameStructure, lasso: LassoComputation) -> str:
    def token(qi: int, vec) -> str:
        scheduled = g.move_label(g.scheduler_player, qi, vec[g.scheduler_player])
        label = g.move_label(scheduled, qi, vec[scheduled])
        return label if label is not None else f"pass@{g.player_names[scheduled]}"

    lines = []
    if lasso.prefix:
        lines.append(" ".join(token(qi, vec) for qi, vec in lasso.prefix))
    lines.append("cycle: " + " ".join(token(qi, vec) for qi, vec in lasso.cycle))
    return "\n".join(lines) + "\n"


def parse_lasso(g: GameStructure, text: str) -> LassoComputation:
    from .unfold import parse_play  # same token syntax

    play = parse_play(text)
    if play.trailing:
        raise InputError("lasso files cannot have trailing events")

    def step_for(qi: int, token: str) -> tuple:
        if token.startswith("pass@"):
            name = token[len("pass@"):]
            if name not in g.player_names[:-1]:
                raise InputError(f"unknown player in token {token!r}")
            player = g.player_names.index(name)
            idle = g.idle_move(player, qi)
            if idle is None:
                raise InputError(
                    f"player {name} has no idle move at {format_marking(g.states[qi])}")
            return (qi, g.vector_for(qi, player, idle))
        owner = g.net.location_of(token)
        player = g.player_names.index(owner)
        if token not in g.moves[player][qi]:
            raise InputError(
                f"transition {token} is not a move of {owner} at "
                f"{format_marking(g.states[qi])}")
        return (qi, g.vector_for(qi, player, g.moves[player][qi].index(token)))

    qi = g.initial_state()
    prefix = []
    for step in play.steps:
        if len(step) != 1:
            raise InputError("lasso files take one move per step")
        s = step_for(qi, step[0])
        prefix.append(s)
        qi = g.tau(*s)
    cycle = []
    for token in play.cycle:
        s = step_for(qi, token)
        cycle.append(s)
        qi = g.tau(*s)
    lasso = LassoComputation(tuple(prefix), tuple(cycle))
    validate_lasso(g, lasso)
    return lasso


# -- inspection exports --------------------------------------------------------------

def dot_game(g: GameStructure) -> str:
    """DOT rendering: states labelled by markings, edges by scheduled
    player and move."""
    out = ["digraph game {", "  rankdir=LR;", "  node [shape=ellipse];"]
    for qi, m in enumerate(g.states):
        label = format_marking(m)
        mark = " penwidth=2" if qi == g.initial_state() else ""
        out.append(f'  "{label}" [label="{label}"{mark}];')
    for qi, m in enumerate(g.states):
        for a, j, qj in g.edges(qi):
            move = g.move_label(a, qi, j)
            text = move if move is not None else "pass"
            out.append(f'  "{format_marking(m)}" -> "{format_marking(g.states[qj])}"'
                       f' [label="{g.player_names[a]}:{text}"];')
    out.append("}")
    return "\n".join(out) + "\n"


def fairness_table(g: GameStructure, constraints: Iterable[FairnessConstraint]) -> str:
    """Tabular dump of move counts and fairness constraints."""
    lines = [f"players: {' '.join(g.player_names)}", "moves:"]
    for qi, m in enumerate(g.states):
        cells = []
        for a in range(g.player_count):
            labels = g.moves[a][qi]
            text = ",".join("pass" if x is None else str(x) for x in labels)
            cells.append(f"{g.player_names[a]}=[{text}]")
        lines.append(f"  {format_marking(m)}: " + " ".join(cells))
    lines.append("fairness:")
    for fc in constraints:
        lines.append(f"  {fc.name} (player {g.player_names[fc.player]})")
        for qi in sorted(fc.moves):
            allowed = fc.at(qi)
            if not allowed:
                continue
            labels = []
            for j in sorted(allowed):
                label = g.move_label(fc.player, qi, j)
                labels.append("pass" if label is None else str(label))
            lines.append(f"    {format_marking(g.states[qi])}: " + ",".join(labels))
    return "\n".join(lines) + "\n"
