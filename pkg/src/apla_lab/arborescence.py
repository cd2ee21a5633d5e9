"""Minimum-cost spanning arborescences (Chu-Liu/Edmonds).

The stability analysis ranks states by the cheapest way to route every
other state into them, which is a minimum-cost spanning in-arborescence.
The solver works on the reversed digraph as the classic rooted
out-arborescence problem: greedily pick each node's cheapest in-edge,
contract any cycle with reduced costs, recurse, and expand.

Returned totals are re-summed from the original costs, so only tie
breaking (not the reported value) is affected by the reduced-cost
arithmetic.
"""

from __future__ import annotations

from itertools import count

from .errors import UsageError

Edge = tuple[object, object, float, object]  # (tail, head, cost, token)


def _find_cycle(parent: dict, root) -> list | None:
    """A cycle in the functional graph ``node -> parent[node]``, if any."""
    state: dict = {}
    for start in parent:
        if state.get(start):
            continue
        walk: list = []
        node = start
        while True:
            if node == root or node not in parent or state.get(node) == 2:
                break
            if state.get(node) == 1:
                return walk[walk.index(node):]
            state[node] = 1
            walk.append(node)
            node = parent[node]
        for w in walk:
            state[w] = 2
    return None


def _solve(nodes: set, edges: list[Edge], root, fresh) -> set:
    best: dict = {}
    for edge in edges:
        tail, head, cost, _ = edge
        if head == root or tail == head:
            continue
        if head not in best or cost < best[head][2]:
            best[head] = edge
    for node in nodes:
        if node != root and node not in best:
            raise UsageError("digraph has no spanning arborescence for this root")
    cycle = _find_cycle({head: e[0] for head, e in best.items()}, root)
    if cycle is None:
        return {e[3] for e in best.values()}

    cyc = set(cycle)
    super_node = f"contracted-{next(fresh)}"
    enter_map: dict = {}
    new_edges: list[Edge] = []
    for edge in edges:
        tail, head, cost, token = edge
        if tail in cyc and head in cyc:
            continue
        if head in cyc:
            wrapper = (super_node, len(enter_map))
            enter_map[wrapper] = (token, head)
            new_edges.append((tail, super_node, cost - best[head][2], wrapper))
        elif tail in cyc:
            new_edges.append((super_node, head, cost, token))
        else:
            new_edges.append(edge)
    new_nodes = (nodes - cyc) | {super_node}
    sub_tokens = _solve(new_nodes, new_edges, root, fresh)

    chosen: set = set()
    entry_head = None
    for token in sub_tokens:
        if token in enter_map:
            original, entry_head = enter_map[token]
            chosen.add(original)
        else:
            chosen.add(token)
    if entry_head is None:
        raise AssertionError("contracted component was never entered")
    for node in cycle:
        if node != entry_head:
            chosen.add(best[node][3])
    return chosen


def minimum_out_arborescence(
    num_nodes: int, costs: dict[tuple[int, int], float], root: int
) -> tuple[float, dict[int, int]]:
    """Cheapest spanning out-tree from ``root``; returns total cost and the
    in-edge map ``head -> tail``."""
    if not 0 <= root < num_nodes:
        raise UsageError(f"root {root} out of range")
    if num_nodes == 1:
        return 0.0, {}
    edges: list[Edge] = [
        (tail, head, float(cost), (tail, head))
        for (tail, head), cost in costs.items()
        if tail != head
    ]
    tokens = _solve(set(range(num_nodes)), edges, root, count())
    parents: dict[int, int] = {}
    total = 0.0
    for tail, head in tokens:
        parents[head] = tail
        total += costs[(tail, head)]
    if len(parents) != num_nodes - 1:
        raise AssertionError("arborescence does not span all nodes")
    return total, parents


def minimum_in_arborescence(
    num_nodes: int, costs: dict[tuple[int, int], float], root: int
) -> tuple[float, dict[int, int]]:
    """Cheapest spanning in-tree into ``root``; returns total cost and the
    out-edge map ``node -> successor`` (every node but the root has one)."""
    reversed_costs = {(head, tail): cost for (tail, head), cost in costs.items()}
    total, parents = minimum_out_arborescence(num_nodes, reversed_costs, root)
    return total, dict(parents)
