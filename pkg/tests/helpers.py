"""Shared generators and oracles for the property and acceptance suites."""

import random

from petrigames.formulas import holds_in
from petrigames.game import LassoComputation
from petrigames.nets import enabled_set, fire, reachability_graph
from petrigames.unfold import Play, cut_step, enabled_events, initial_cut


def full_edges(g):
    """Adjacency of the unrestricted game graph: qi -> [(a, j, qj)]."""
    return [list(g.edges(qi)) for qi in range(len(g.states))]


def _sccs(n, succ):
    """Kosaraju over nodes 0..n-1; returns a list of node sets."""
    order = []
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        stack = [(start, iter(succ[start]))]
        seen[start] = True
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, iter(succ[nxt])))
                    break
            else:
                order.append(node)
                stack.pop()
    pred = [[] for _ in range(n)]
    for u in range(n):
        for v in succ[u]:
            pred[v].append(u)
    comp = [-1] * n
    label = 0
    for node in reversed(order):
        if comp[node] != -1:
            continue
        stack = [node]
        comp[node] = label
        while stack:
            u = stack.pop()
            for v in pred[u]:
                if comp[v] == -1:
                    comp[v] = label
                    stack.append(v)
        label += 1
    groups = [set() for _ in range(label)]
    for node, c in enumerate(comp):
        groups[c].add(node)
    return groups


def _bfs_edges(edges, source, goal_test, allowed=None, rng=None):
    """Shortest edge path to a goal node; random tie-breaking when rng given."""
    seen = {source: None}
    frontier = [source]
    goal = None
    while frontier and goal is None:
        nxt = []
        for node in frontier:
            if goal_test(node):
                goal = node
                break
            out = list(edges[node])
            if rng is not None:
                rng.shuffle(out)
            for a, j, qj in out:
                if allowed is not None and qj not in allowed:
                    continue
                if qj not in seen:
                    seen[qj] = (node, (a, j, qj))
                    nxt.append(qj)
        frontier = nxt
    if goal is None:
        return None
    path = []
    node = goal
    while seen[node] is not None:
        prev, edge = seen[node]
        path.append((prev, edge))
        node = prev
    return list(reversed(path))


def _edge_taken(g, fc, qi, a, j):
    if fc.player == g.scheduler_player:
        return a in fc.at(qi)
    return a == fc.player and j in fc.at(qi)


def random_fair_lasso(g, constraints, rng):
    """A random fair computation: a random walk into a terminal strongly
    connected component, then a tour witnessing every fairness constraint."""
    edges = full_edges(g)
    succ = [sorted({qj for _, _, qj in edges[qi]}) for qi in range(len(g.states))]

    prefix_edges = []
    qi = g.initial_state()
    for _ in range(rng.randrange(0, 6)):
        a, j, qj = rng.choice(edges[qi])
        prefix_edges.append((qi, (a, j, qj)))
        qi = qj

    # walk into a terminal SCC reachable from qi
    groups = _sccs(len(g.states), succ)
    comp_of = {}
    for idx, grp in enumerate(groups):
        for node in grp:
            comp_of[node] = idx
    terminal = [idx for idx, grp in enumerate(groups)
                if all(comp_of[qj] == idx for node in grp for qj in succ[node])]
    reachable_terminals = []
    stack, seen = [qi], {qi}
    while stack:
        node = stack.pop()
        if comp_of[node] in terminal:
            reachable_terminals.append(comp_of[node])
        for qj in succ[node]:
            if qj not in seen:
                seen.add(qj)
                stack.append(qj)
    target = set(groups[rng.choice(sorted(set(reachable_terminals)))])
    path = _bfs_edges(edges, qi, lambda n: n in target, rng=rng)
    prefix_edges.extend(path)
    anchor = path[-1][1][2] if path else qi

    # tour the component, witnessing every constraint
    tour = []
    pos = anchor
    for fc in constraints:
        if any(not fc.enabled(n) for n in target):
            seg = _bfs_edges(edges, pos, lambda n: not fc.enabled(n),
                             allowed=target, rng=rng)
            tour.extend(seg)
            pos = seg[-1][1][2] if seg else pos
            continue
        sources = {n for n in target
                   if any(qj in target and _edge_taken(g, fc, n, a, j)
                          for a, j, qj in edges[n])}
        seg = _bfs_edges(edges, pos, lambda n: n in sources,
                         allowed=target, rng=rng)
        tour.extend(seg)
        pos = seg[-1][1][2] if seg else pos
        a, j, qj = next((a, j, qj) for a, j, qj in edges[pos]
                        if qj in target and _edge_taken(g, fc, pos, a, j))
        tour.append((pos, (a, j, qj)))
        pos = qj
    if pos != anchor or not tour:
        if not tour:
            a, j, qj = next((a, j, qj) for a, j, qj in edges[anchor]
                            if qj in target)
            tour.append((anchor, (a, j, qj)))
            pos = qj
        if pos != anchor:
            tour.extend(_bfs_edges(edges, pos, lambda n: n == anchor,
                                   allowed=target, rng=rng))

    def steps(edge_list):
        return tuple((node, g.vector_for(node, a, j))
                     for node, (a, j, qj) in edge_list)

    return LassoComputation(steps(prefix_edges), steps(tour))


def random_lasso(g, rng, max_steps=12):
    """A random (not necessarily fair) computation: walk until a state
    repeats, close the cycle there."""
    edges = full_edges(g)
    qi = g.initial_state()
    walk = []
    visited = {qi: 0}
    for _ in range(max_steps):
        a, j, qj = rng.choice(edges[qi])
        walk.append((qi, g.vector_for(qi, a, j)))
        qi = qj
        if qi in visited:
            cut = visited[qi]
            return LassoComputation(tuple(walk[:cut]), tuple(walk[cut:]))
        visited[qi] = len(walk)
    # force closure with idle steps at the current state
    idle_player = next(a for a in range(g.player_count - 1)
                       if g.idle_move(a, qi) is not None)
    step = (qi, g.vector_for(qi, idle_player, g.idle_move(idle_player, qi)))
    return LassoComputation(tuple(walk), (step,))


def insert_stutters(g, lasso, rng):
    """A stutter-equivalent twin: idle steps spliced into prefix and cycle."""
    def pad(steps):
        out = []
        for qi, vec in steps:
            for _ in range(rng.randrange(0, 3)):
                player = rng.choice([a for a in range(g.player_count - 1)
                                     if g.idle_move(a, qi) is not None])
                out.append((qi, g.vector_for(qi, player, g.idle_move(player, qi))))
            out.append((qi, vec))
        return tuple(out)

    return LassoComputation(pad(lasso.prefix), pad(lasso.cycle))


def random_valid_play(net, rng, prefix_depth=6):
    """A random valid play: a bounded random firing prefix, then either a
    deadlock or a cycle touring a terminal SCC of the reachability graph
    firing every transition enabled inside it."""
    marking = net.initial
    prefix = []
    for _ in range(rng.randrange(0, prefix_depth + 1)):
        enabled = sorted(enabled_set(net, marking))
        if not enabled:
            break
        t = rng.choice(enabled)
        prefix.append(t)
        marking = fire(net, marking, t)

    graph = reachability_graph(net)
    index = graph.index
    succ = [[] for _ in graph.states]
    edge_map = [[] for _ in graph.states]
    for m1, t, m2 in graph.edges:
        succ[index[m1]].append(index[m2])
        edge_map[index[m1]].append((t, index[m2]))

    qi = index[marking]
    if not succ[qi]:
        return Play.from_sequence(prefix)

    groups = _sccs(len(graph.states), succ)
    comp_of = {}
    for idx, grp in enumerate(groups):
        for node in grp:
            comp_of[node] = idx
    terminals = {idx for idx, grp in enumerate(groups)
                 if all(comp_of[qj] == idx for node in grp for qj in succ[node])}

    def bfs(source, goal_test, allowed=None):
        seen = {source: None}
        frontier = [source]
        goal = None
        while frontier and goal is None:
            nxt = []
            for node in frontier:
                if goal_test(node):
                    goal = node
                    break
                options = list(edge_map[node])
                rng.shuffle(options)
                for t, qj in options:
                    if allowed is not None and qj not in allowed:
                        continue
                    if qj not in seen:
                        seen[qj] = (node, t)
                        nxt.append(qj)
            frontier = nxt
        if goal is None:
            return None
        labels = []
        node = goal
        while seen[node] is not None:
            prev, t = seen[node]
            labels.append(t)
            node = prev
        return list(reversed(labels)), goal

    into = bfs(qi, lambda n: comp_of[n] in terminals)
    labels, entry = into
    prefix.extend(labels)
    target = groups[comp_of[entry]]
    if len(target) == 1 and not succ[entry]:
        return Play.from_sequence(prefix)

    # tour: fire every transition enabled anywhere inside the component
    must_fire = sorted({t for node in target for t, qj in edge_map[node]
                        if qj in target})
    cycle = []
    pos = entry
    for t in must_fire:
        sources = {n for n in target if any(tt == t and qj in target
                                            for tt, qj in edge_map[n])}
        seg = bfs(pos, lambda n: n in sources, allowed=target)
        cycle.extend(seg[0])
        pos = seg[1]
        qj = next(qj for tt, qj in edge_map[pos] if tt == t and qj in target)
        cycle.append(t)
        pos = qj
    if pos != entry:
        seg = bfs(pos, lambda n: n == entry, allowed=target)
        cycle.extend(seg[0])
    return Play.from_sequence(prefix, cycle)


# -- bounded net-side play checking -------------------------------------------------

_PENDING, _SAT, _FAILED = 0, 1, 2


def monitor_start(pf, props):
    return monitor_step(pf, _PENDING, props)


def monitor_step(pf, mon, props):
    if pf.op == "G":
        if mon == _FAILED:
            return _FAILED
        return _PENDING if holds_in(pf.left, props) else _FAILED
    if mon in (_SAT, _FAILED):
        return mon
    if holds_in(pf.right, props):
        return _SAT
    if not holds_in(pf.left, props):
        return _FAILED
    return _PENDING


def some_consistent_play_refutes(net, bp, strategies, pf, viable, horizon=8):
    """Exhaustive enumeration of consistent play prefixes on the unfolding
    prefix: does any refute the path formula within the horizon?

    Moves are single events per step: any enabled uncontrollable event, or
    a user event selected by that user's strategy at the current cut.
    ``viable`` is the set of markings from which a consistent play can
    continue at all; prefixes are only counted while they stay inside it,
    since every prefix of a consistent play does.
    """
    strategy_of = {s.owner: s for s in strategies}
    memo = {}

    def walk(cut, mon, depth):
        if mon == _FAILED:
            return True
        if depth == 0:
            return False
        props = bp.mu(cut)
        key = (props, mon, depth)
        if key in memo:
            return memo[key]
        result = False
        for eid in enabled_events(bp, cut):
            label = bp.events[eid].label
            owner = net.location_of(label)
            if net.is_controllable(label):
                strategy = strategy_of.get(owner)
                if strategy is None or label not in strategy.at(props):
                    continue
            nxt = cut_step(bp, cut, eid)
            if bp.mu(nxt) not in viable:
                continue
            if walk(nxt, monitor_step(pf, mon, bp.mu(nxt)), depth - 1):
                result = True
                break
        memo[key] = result
        return result

    start = initial_cut(bp)
    if bp.mu(start) not in viable:
        return False
    return walk(start, monitor_start(pf, bp.mu(start)), horizon)
