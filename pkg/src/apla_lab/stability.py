"""Resistance digraphs, rooted-graph enumeration, and stability prediction.

Nodes are the pure strategy states (one per joint action profile); the
directed edges are the one-step transitions, i.e. pairs of profiles
differing in a single player's action.  A rooted graph assigns every
node outside the root set exactly one outgoing one-step arrow with no
cycles.  Summing edge probabilities over all such graphs gives the
tree-characterization of the chain's stationary distribution; summing
step-size-free resistance coefficients and minimizing over graphs ranks
states, and the minimum-coefficient states form the predicted
stochastically stable set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arborescence import minimum_in_arborescence
from .dynamics import APLA, Params
from .errors import CapacityError, ParameterError, UsageError
from .games import (
    Game,
    better_replies,
    decode_profile,
    improvement_path_to,
    is_weakly_acyclic,
    payoff_dominant_equilibria,
    pure_nash_equilibria,
    require_weakly_acyclic,
    unilateral_deviations,
    validate_positive_utility,
)
from .transition import ASYMPTOTIC, EdgeAnalysis, analyze_edge

ENUMERATION_CAP = 12

TREE_SUM = "tree-sum"
SOLVER = "solver"


@dataclass(frozen=True)
class WGraph:
    """Arrow assignment with root set: every node outside ``root_set`` has
    exactly one outgoing arrow and every arrow chain ends in the roots."""

    root_set: frozenset[int]
    arrows: dict[int, int] = field(default_factory=dict)

    def total_cost(self, costs: dict[tuple[int, int], float]) -> float:
        return sum(costs[(a, b)] for a, b in self.arrows.items())


@dataclass(frozen=True)
class ResistanceDigraph:
    """All one-step edges of a game, annotated for a given parameter set."""

    game: Game
    params: Params
    delta: float
    resistance_mode: str
    edges: dict[tuple[int, int], EdgeAnalysis]

    @property
    def num_nodes(self) -> int:
        return self.game.num_profiles

    def coefficient_costs(self) -> dict[tuple[int, int], float]:
        return {key: edge.coefficient for key, edge in self.edges.items()}

    def successors(self, node: int) -> list[int]:
        return sorted(
            dest for i in range(self.game.n)
            for dest in unilateral_deviations(self.game, node, i)
        )


def build_digraph(
    game: Game,
    params: Params,
    delta: float = 0.1,
    resistance_mode: str = ASYMPTOTIC,
) -> ResistanceDigraph:
    """Analyze every ordered one-step pair of profiles.

    Produces ``sum_s sum_i (|A_i| - 1)`` directed edges.
    """
    params.validate_against(game)
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must be in (0, 1), got {delta}")
    edges: dict[tuple[int, int], EdgeAnalysis] = {}
    for source in game.profiles():
        for player in range(game.n):
            for dest in unilateral_deviations(game, source, player):
                edges[(source, dest)] = analyze_edge(
                    game, params, source, dest, delta=delta,
                    resistance_mode=resistance_mode,
                )
    return ResistanceDigraph(
        game=game, params=params, delta=delta,
        resistance_mode=resistance_mode, edges=edges,
    )


def enumerate_wgraphs(
    digraph: ResistanceDigraph,
    roots: frozenset[int] | set[int],
    cap: int = ENUMERATION_CAP,
):
    """Yield every one-step rooted graph for the given root set.

    Exhaustive recursive assignment with cycle pruning; refuses node
    counts above ``cap`` (use the arborescence path instead).
    """
    root_set = frozenset(roots)
    if not root_set:
        raise UsageError("root set must be nonempty")
    for node in root_set:
        if not 0 <= node < digraph.num_nodes:
            raise UsageError(f"root {node} is not a node of the digraph")
    if digraph.num_nodes > cap:
        raise CapacityError(
            f"{digraph.num_nodes} nodes exceeds the enumeration cap {cap}; "
            "use min_resistance (arborescence) or the solver stationary mode"
        )
    free = [v for v in range(digraph.num_nodes) if v not in root_set]
    succs = {v: digraph.successors(v) for v in free}
    arrows: dict[int, int] = {}

    def leads_back(start: int, new_tail: int) -> bool:
        node = start
        while True:
            if node == new_tail:
                return True
            if node not in arrows:
                return False
            node = arrows[node]

    def assign(idx: int):
        if idx == len(free):
            yield WGraph(root_set=root_set, arrows=dict(arrows))
            return
        v = free[idx]
        for u in succs[v]:
            if not leads_back(u, v):
                arrows[v] = u
                yield from assign(idx + 1)
                del arrows[v]

    yield from assign(0)


def check_wgraph(digraph: ResistanceDigraph, wg: WGraph) -> None:
    """Raise unless ``wg`` satisfies both rooted-graph conditions over the
    digraph's one-step edges."""
    free = set(range(digraph.num_nodes)) - wg.root_set
    if set(wg.arrows) != free:
        raise UsageError("every node outside the root set needs exactly one arrow")
    for a, b in wg.arrows.items():
        if (a, b) not in digraph.edges:
            raise UsageError(f"arrow {a}->{b} is not a one-step transition")
    for start in free:
        node, seen = start, set()
        while node in wg.arrows:
            if node in seen:
                raise UsageError(f"cycle through node {node}")
            seen.add(node)
            node = wg.arrows[node]
        if node not in wg.root_set:
            raise UsageError(f"chain from {start} ends outside the root set")


def _edge_weights(digraph: ResistanceDigraph) -> np.ndarray:
    """Off-diagonal chain entries ``gamma * probability``; the self-loop
    remainder ``1 - row sum`` is implicit and never formed explicitly,
    because it rounds to 1.0 when the transition masses are tiny."""
    size = digraph.num_nodes
    weights = np.zeros((size, size))
    for (a, b), edge in digraph.edges.items():
        weight = edge.gamma * edge.probability
        if weight <= 0.0:
            raise ParameterError(
                f"one-step probability underflowed to zero on {a}->{b}; "
                "use a larger delta or epsilon for finite-parameter chains"
            )
        weights[a, b] = weight
    if np.any(weights.sum(axis=1) > 1.0):
        raise ParameterError(
            "one-step transition mass exceeds 1: epsilon too large for the "
            "chain approximation"
        )
    return weights


def fw_stationary(
    digraph: ResistanceDigraph,
    chain_mode: str = TREE_SUM,
    cap: int = ENUMERATION_CAP,
) -> np.ndarray:
    """Stationary distribution of the one-step chain.

    ``tree-sum`` evaluates the rooted-graph characterization literally:
    the weight of state ``s`` is the sum over all ``{s}``-graphs of the
    product of edge probabilities.  ``solver`` computes the left
    stationary vector of the row-normalized chain.  The two agree to
    1e-9 on valid inputs and are cross-checked in the test suite.
    """
    weights = _edge_weights(digraph)
    size = digraph.num_nodes
    if chain_mode == TREE_SUM:
        totals = np.empty(size)
        for s in range(size):
            total = 0.0
            for wg in enumerate_wgraphs(digraph, {s}, cap=cap):
                product = 1.0
                for a, b in wg.arrows.items():
                    product *= weights[a, b]
                total += product
            totals[s] = total
        if totals.sum() <= 0.0:
            raise ParameterError("all rooted-graph weights vanished (underflow)")
        return totals / totals.sum()
    if chain_mode == SOLVER:
        # Solve the balance equations in flux coordinates
        # y_j = pi_j * outflow_j: transition masses can span hundreds of
        # orders of magnitude, but stationary fluxes are commensurate,
        # which keeps the linear system well conditioned.
        outflow = weights.sum(axis=1)
        generator = weights.T.copy()
        generator[np.diag_indices(size)] = -outflow
        system = generator / outflow[np.newaxis, :]
        system[-1, :] = 1.0
        rhs = np.zeros(size)
        rhs[-1] = 1.0
        flux = np.linalg.solve(system, rhs)
        if flux.min() < -1e-9 * max(flux.max(), 1.0):
            raise ParameterError("solver produced a negative stationary mass")
        pi = np.clip(flux, 0.0, None) / outflow
        return pi / pi.sum()
    raise UsageError(f"chain_mode must be '{TREE_SUM}' or '{SOLVER}', got {chain_mode!r}")


def fw_stationary_check(
    digraph: ResistanceDigraph, cap: int = ENUMERATION_CAP
) -> tuple[np.ndarray, np.ndarray, float]:
    """Both stationary computations and their max entrywise discrepancy."""
    tree = fw_stationary(digraph, TREE_SUM, cap=cap)
    solved = fw_stationary(digraph, SOLVER)
    return tree, solved, float(np.max(np.abs(tree - solved)))


def min_resistance(digraph: ResistanceDigraph, s: int) -> tuple[float, WGraph]:
    """Minimum summed resistance coefficient over all one-step
    ``{s}``-graphs, with a witness graph attaining it.

    Computed as a minimum-cost spanning in-arborescence; agrees exactly
    with brute-force enumeration below the cap.
    """
    if not 0 <= s < digraph.num_nodes:
        raise UsageError(f"node {s} out of range")
    if digraph.num_nodes == 1:
        return 0.0, WGraph(root_set=frozenset({s}))
    value, arrows = minimum_in_arborescence(
        digraph.num_nodes, digraph.coefficient_costs(), s
    )
    return value, WGraph(root_set=frozenset({s}), arrows=arrows)


def min_resistance_bruteforce(
    digraph: ResistanceDigraph, s: int, cap: int = ENUMERATION_CAP
) -> float:
    """Enumeration oracle for :func:`min_resistance`."""
    costs = digraph.coefficient_costs()
    best = np.inf
    for wg in enumerate_wgraphs(digraph, {s}, cap=cap):
        best = min(best, wg.total_cost(costs))
    return float(best) if digraph.num_nodes > 1 else 0.0


def stochastically_stable_set(
    digraph: ResistanceDigraph, rel_tol: float = 1e-9
) -> set[int]:
    """States whose minimum resistance coefficient is within ``rel_tol``
    (relative) of the global minimum."""
    if rel_tol <= 0.0:
        raise UsageError(f"rel_tol must be positive, got {rel_tol}")
    values = {s: min_resistance(digraph, s)[0] for s in range(digraph.num_nodes)}
    floor = min(values.values())
    return {s for s, v in values.items() if v <= floor * (1.0 + rel_tol)}


def build_improvement_sne_graph(game: Game) -> WGraph:
    """A rooted graph on the pure Nash set whose every arrow is a better
    reply.

    Built from shortest better-reply witness paths: each non-equilibrium
    profile keeps the arrow that advances its shortest path, ties toward
    the smallest destination id.  Raises unless the game is weakly
    acyclic.
    """
    require_weakly_acyclic(game)
    ne = pure_nash_equilibria(game)
    reply_succs: dict[int, list[int]] = {}
    reverse: dict[int, list[int]] = {p: [] for p in game.profiles()}
    for p in game.profiles():
        succs = sorted({
            dev for i in range(game.n) for dev in better_replies(game, p, i)[0]
        })
        reply_succs[p] = succs
        for dev in succs:
            reverse[dev].append(p)
    dist = {p: 0 for p in ne}
    frontier = sorted(ne)
    level = 0
    while frontier:
        level += 1
        nxt = []
        for q in frontier:
            for p in reverse[q]:
                if p not in dist:
                    dist[p] = level
                    nxt.append(p)
        frontier = sorted(nxt)
    arrows = {}
    for p in game.profiles():
        if p in ne:
            continue
        arrows[p] = min(q for q in reply_succs[p] if dist[q] == dist[p] - 1)
    return WGraph(root_set=frozenset(ne), arrows=arrows)


def check_corollaries(game: Game, params: Params) -> dict:
    """Structural prediction report: positivity, weak acyclicity, the
    aspiration-floor bound ``h < u_min``, best-reply reachability of the
    payoff-dominant set, and the implied containment class for the
    stable set."""
    positive = validate_positive_utility(game)
    weakly_acyclic, _ = is_weakly_acyclic(game)
    ne = pure_nash_equilibria(game)
    dominant = payoff_dominant_equilibria(game)
    warnings: list[str] = []
    h_bound = 0.0 < params.h < game.u_min
    aspiration_mode = params.mode == APLA
    cor71 = positive and weakly_acyclic and aspiration_mode and h_bound
    best_reply_reach = False
    if dominant:
        best_reply_reach = all(
            improvement_path_to(game, p, dominant, best_reply_only=True) is not None
            for p in game.profiles()
            if p not in ne
        )
    cor72 = cor71 and best_reply_reach
    if not positive:
        warnings.append("payoffs are not strictly positive; analysis inapplicable")
    if not weakly_acyclic:
        warnings.append("game is not weakly acyclic; containment results inapplicable")
    if aspiration_mode and not h_bound:
        warnings.append(
            f"h = {params.h:g} violates h < u_min = {game.u_min:g}; "
            "equilibrium containment is not guaranteed"
        )
    if aspiration_mode and params.c_asp <= 0.0:
        warnings.append(
            "aspiration slope c_asp = 0: payoff-dominance selection needs "
            "h > 0 and c_asp > 0"
        )
    if not aspiration_mode:
        warnings.append(
            "pla mode: equilibrium-containment conditions do not apply; "
            "use the resistance ranking directly"
        )
    if cor72:
        prediction = "subset_of_payoff_dominant"
    elif cor71:
        prediction = "subset_of_pure_nash"
    else:
        prediction = "unrestricted"
    return {
        "positive_utility": positive,
        "weakly_acyclic": weakly_acyclic,
        "mode": params.mode,
        "h": params.h,
        "u_min": game.u_min,
        "h_bound_satisfied": h_bound,
        "nash_containment_applies": cor71,
        "best_reply_paths_to_payoff_dominant": best_reply_reach,
        "payoff_dominance_applies": cor72,
        "pure_nash": sorted(ne),
        "payoff_dominant": sorted(dominant),
        "prediction_class": prediction,
        "warnings": warnings,
    }


@dataclass(frozen=True)
class StabilityReport:
    """Full analyzer output for one game/parameter pair."""

    digraph: ResistanceDigraph
    rel_tol: float
    node_resistance: dict[int, float]
    witnesses: dict[int, WGraph]
    stable_set: set[int]
    corollaries: dict
    stationary: dict | None = None

    def to_dict(self) -> dict:
        game = self.digraph.game
        doc = {
            "delta": self.digraph.delta,
            "resistance_mode": self.digraph.resistance_mode,
            "rel_tol": self.rel_tol,
            "params": self.digraph.params.to_dict(),
            "nodes": [
                {
                    "profile": p,
                    "actions": list(decode_profile(game, p)),
                    "min_resistance": self.node_resistance[p],
                    "witness_arrows": {
                        str(a): b for a, b in sorted(self.witnesses[p].arrows.items())
                    },
                }
                for p in game.profiles()
            ],
            "edges": [
                edge.to_dict() for _, edge in sorted(self.digraph.edges.items())
            ],
            "stochastically_stable_set": sorted(self.stable_set),
            "corollaries": self.corollaries,
        }
        if self.stationary is not None:
            doc["stationary"] = self.stationary
        return doc


def analyze_stability(
    game: Game,
    params: Params,
    delta: float = 0.1,
    resistance_mode: str = ASYMPTOTIC,
    rel_tol: float = 1e-9,
    with_stationary: bool = False,
    cap: int = ENUMERATION_CAP,
) -> StabilityReport:
    """Build the digraph, rank all states, and assemble the report."""
    digraph = build_digraph(game, params, delta=delta, resistance_mode=resistance_mode)
    node_resistance: dict[int, float] = {}
    witnesses: dict[int, WGraph] = {}
    for s in game.profiles():
        value, witness = min_resistance(digraph, s)
        node_resistance[s] = value
        witnesses[s] = witness
    floor = min(node_resistance.values())
    stable = {
        s for s, v in node_resistance.items() if v <= floor * (1.0 + rel_tol)
    }
    stationary = None
    if with_stationary:
        if game.num_profiles <= cap:
            tree, solved, gap = fw_stationary_check(digraph, cap=cap)
            stationary = {
                "tree_sum": tree.tolist(),
                "solver": solved.tolist(),
                "max_discrepancy": gap,
            }
        else:
            solved = fw_stationary(digraph, SOLVER)
            stationary = {"solver": solved.tolist(), "max_discrepancy": None}
    return StabilityReport(
        digraph=digraph,
        rel_tol=rel_tol,
        node_resistance=node_resistance,
        witnesses=witnesses,
        stable_set=stable,
        corollaries=check_corollaries(game, params),
        stationary=stationary,
    )
