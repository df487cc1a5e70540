from typing import Iterable, List, Optional, Sequence, Union

import networkx as nx
import numpy as np

from config.env_config import env
from schemas.heuristics_schema import EdgeSet, HeuristicMethod, HeuristicResult, ImprovementStrategy
from schemas.instance_schema import CostMatrix, Instance
from schemas.tour_schema import Tour
from services.instance import as_cost_matrix, check_triangle_inequality, transform_max, transform_offset
from services.tour import canonical_tour, tour_length
from utils.errors import TspAnalysisError
from utils.kopt_kernels import k_opt_search
from utils.logger_utils import setup_logger

logger = setup_logger(__name__)

CostsLike = Union[Instance, CostMatrix]


class OddNodeSetError(TspAnalysisError):
    """Perfect matching requested on an odd number of nodes."""
    pass

class EulerianGraphError(TspAnalysisError):
    """Graph has an odd-degree vertex or a disconnected edge support."""
    pass

class IncompleteWalkError(TspAnalysisError):
    """Closed walk does not visit every node."""
    pass


def _complete_graph(costs: CostMatrix, nodes: Sequence[int]) -> nx.Graph:
    # Lexicographic insertion fixes tie-breaking in the networkx solvers
    graph = nx.Graph()
    ordered = sorted(nodes)
    graph.add_nodes_from(ordered)
    for idx, u in enumerate(ordered):
        for v in ordered[idx + 1:]:
            graph.add_edge(u, v, weight=float(costs.values[u, v]))
    return graph


def _edge_set(pairs: Iterable, costs: CostMatrix) -> EdgeSet:
    edges = []
    for u, v in pairs:
        u, v = (int(u), int(v)) if u < v else (int(v), int(u))
        edges.append((u, v, float(costs.values[u, v])))
    return EdgeSet(edges=sorted(edges))


# =========================
# Christofides building blocks
# =========================

def minimum_spanning_tree(costs: CostsLike) -> EdgeSet:
    """Kruskal MST; ties resolve by lexicographic edge index."""
    matrix = as_cost_matrix(costs)
    tree = nx.minimum_spanning_tree(_complete_graph(matrix, range(matrix.n)), algorithm="kruskal")
    return _edge_set(tree.edges(), matrix)


def odd_degree_vertices(tree: EdgeSet, n: int) -> List[int]:
    degree = np.zeros(n, dtype=np.int64)
    for u, v, _ in tree.edges:
        degree[u] += 1
        degree[v] += 1
    return [int(v) for v in np.flatnonzero(degree % 2 == 1)]


def min_weight_perfect_matching(nodes: Sequence[int], costs: CostsLike, exact: bool = True) -> EdgeSet:
    """
    Minimum-weight perfect matching on `nodes`.

    The exact path runs the blossom solver; `exact=False` pairs nodes
    greedily by ascending (weight, u, v) instead.

    Raises:
        OddNodeSetError: Odd number of nodes.
    """
    matrix = as_cost_matrix(costs)
    nodes = sorted(int(v) for v in nodes)
    if len(nodes) % 2:
        raise OddNodeSetError(f"Perfect matching needs an even node set, got {len(nodes)} nodes")
    if not nodes:
        return EdgeSet(edges=[])

    if exact:
        matching = nx.min_weight_matching(_complete_graph(matrix, nodes))
        return _edge_set(matching, matrix)

    candidates = sorted(
        (float(matrix.values[u, v]), u, v) for idx, u in enumerate(nodes) for v in nodes[idx + 1:]
    )
    matched = set()
    pairs = []
    for _, u, v in candidates:
        if u not in matched and v not in matched:
            matched.update((u, v))
            pairs.append((u, v))
    return _edge_set(pairs, matrix)


def eulerian_circuit(graph: EdgeSet, n: int, source: int = 0) -> List[int]:
    """
    Closed walk using every edge once (multiplicities respected).

    Raises:
        EulerianGraphError: Odd-degree vertex or disconnected edge support.

    Returns:
        List[int]: Node walk whose first and last entries coincide.
    """
    multigraph = nx.MultiGraph()
    for u, v, w in graph.edges:
        multigraph.add_edge(u, v, weight=w)
    if multigraph.number_of_edges() == 0:
        raise EulerianGraphError("Edge set is empty")

    odd = [v for v, deg in multigraph.degree() if deg % 2]
    if odd:
        raise EulerianGraphError(f"Vertices with odd degree: {sorted(odd)}")
    if not nx.is_connected(multigraph):
        raise EulerianGraphError("Edge support is disconnected")

    if source not in multigraph:
        source = min(multigraph.nodes)
    walk = [source]
    walk.extend(v for _, v in nx.eulerian_circuit(multigraph, source=source))
    return walk


def shortcut(walk: Sequence[int], n: Optional[int] = None) -> Tour:
    """
    Keep the first occurrence of every node along the walk.

    Raises:
        IncompleteWalkError: Some node of 0..n-1 never appears.
    """
    seen = set()
    order = []
    for v in walk:
        if v not in seen:
            seen.add(v)
            order.append(int(v))
    n = len(order) if n is None else n
    if len(order) != n or seen != set(range(n)):
        missing = sorted(set(range(n)) - seen)
        raise IncompleteWalkError(f"Walk misses nodes {missing}")
    return canonical_tour(order)


def christofides(
    instance: CostsLike,
    exact_matching: bool = True,
    check_metric: bool = True,
) -> HeuristicResult:
    """
    Christofides construction: MST, odd-degree vertices, minimum matching,
    Euler circuit, shortcut.

    Args:
        instance (Instance | CostMatrix): Metric instance.
        exact_matching (bool): False swaps in the greedy matching; the
            result then carries exact_matching=False.
        check_metric (bool): Count triangle violations and warn when found.

    Returns:
        HeuristicResult: At most 1.5x the optimum on metric instances with
        exact matching.
    """
    matrix = as_cost_matrix(instance)
    n = matrix.n

    if check_metric:
        slack = 0.0 if matrix.is_integral else 1e-9 * float(matrix.values.max())
        violations = check_triangle_inequality(matrix, slack=slack)
        if violations:
            logger.warning(f"{violations} triangle-inequality violations (rounding); proceeding")

    tree = minimum_spanning_tree(matrix)
    odd = odd_degree_vertices(tree, n)
    matching = min_weight_perfect_matching(odd, matrix, exact=exact_matching)
    logger.debug(f"MST weight {tree.total_weight}, {len(odd)} odd vertices, matching weight {matching.total_weight}")

    walk = eulerian_circuit(EdgeSet(edges=tree.edges + matching.edges), n)
    tour = shortcut(walk, n)
    length = tour_length(tour, matrix)
    return HeuristicResult(
        tour=tour.model_copy(update={"length": length}),
        length=length,
        method=HeuristicMethod.CHRISTOFIDES,
        exact_matching=exact_matching,
    )


def nearest_neighbor_tour(costs: CostsLike, start: int = 0) -> HeuristicResult:
    """Greedy construction from `start`; ties go to the lowest node index."""
    matrix = as_cost_matrix(costs)
    n = matrix.n
    visited = np.zeros(n, dtype=bool)
    order = [start]
    visited[start] = True
    for _ in range(n - 1):
        row = np.where(visited, np.inf, matrix.values[order[-1]])
        nxt = int(np.argmin(row))
        order.append(nxt)
        visited[nxt] = True
    length = tour_length(order, matrix)
    return HeuristicResult(
        tour=canonical_tour(order, length=length), length=length, method=HeuristicMethod.NEAREST_NEIGHBOR
    )


# =========================
# k-opt improvement
# =========================

def neighbor_lists(costs: CostMatrix, size: int) -> np.ndarray:
    """Per node, the `size` nearest other nodes by ascending (cost, index)."""
    values = costs.values.copy()
    np.fill_diagonal(values, np.inf)
    size = min(size, costs.n - 1)
    return np.argsort(values, axis=1, kind="stable")[:, :size].astype(np.int64)


def k_opt_improve(
    tour: Union[Tour, Sequence[int]],
    costs: CostsLike,
    k: int = 3,
    strategy: ImprovementStrategy = ImprovementStrategy.FIRST,
    max_passes: Optional[int] = None,
    full_scan: Optional[bool] = None,
) -> HeuristicResult:
    """
    Sequential 2-opt or 3-opt local search.

    A move is accepted when it shortens the tour by more than
    TGB_IMPROVEMENT_TOLERANCE x length (any strict decrease on integral
    instances). Up to TGB_FULL_SCAN_MAX_N nodes every move is scanned;
    larger instances restrict moves to nearest-neighbour lists.

    Args:
        tour (Tour | Sequence[int]): Starting tour.
        costs (Instance | CostMatrix): Cost source.
        k (int): 2 or 3.
        strategy (ImprovementStrategy): first- or best-improvement.
        max_passes (Optional[int]): Full sweeps allowed (TGB_MAX_PASSES).
        full_scan (Optional[bool]): Force or disable the exhaustive scan.

    Returns:
        HeuristicResult: Canonical tour never longer than the input.
    """
    if k not in (2, 3):
        raise ValueError(f"k must be 2 or 3, got {k}")
    matrix = as_cost_matrix(costs)
    order = tour.order if isinstance(tour, Tour) else list(tour)
    start = np.asarray(order, dtype=np.int64)
    max_passes = env.max_passes if max_passes is None else max_passes
    if max_passes < 1:
        raise ValueError("max_passes must be >= 1")
    full_scan = matrix.n <= env.full_scan_max_n if full_scan is None else full_scan
    tolerance = 0.0 if matrix.is_integral else env.improvement_tolerance
    neighbors = (
        np.zeros((matrix.n, 0), dtype=np.int64) if full_scan
        else neighbor_lists(matrix, env.neighbor_list_size)
    )

    improved, steps, passes = k_opt_search(
        np.ascontiguousarray(matrix.values),
        start,
        k == 3,
        ImprovementStrategy(strategy) == ImprovementStrategy.BEST,
        int(max_passes),
        float(tolerance),
        neighbors,
        not full_scan,
    )
    length = tour_length(improved.tolist(), matrix)
    logger.debug(f"{k}-opt: {steps} moves in {passes} passes, length {length}")
    return HeuristicResult(
        tour=canonical_tour(improved.tolist(), length=length),
        length=length,
        method=HeuristicMethod.THREE_OPT if k == 3 else HeuristicMethod.TWO_OPT,
        improvement_steps=int(steps),
    )


# =========================
# Maximum tour estimate
# =========================

def max_tour_result(instance: CostsLike) -> HeuristicResult:
    """
    Estimate the longest tour: minimize M - c with Christofides + 3-opt.

    The transformed matrix need not be metric, so the triangle check is
    skipped. The reported length is n * M - (transformed length), which
    never exceeds the true maximum.
    """
    matrix = as_cost_matrix(instance)
    transformed = transform_max(matrix)
    offset = transform_offset(matrix)
    start = christofides(transformed, check_metric=False)
    improved = k_opt_improve(start.tour, transformed, k=3)
    length = matrix.n * offset - improved.length
    logger.info(f"Max-tour estimate {length} (M={offset})")
    return HeuristicResult(
        tour=improved.tour.model_copy(update={"length": length}),
        length=length,
        method=HeuristicMethod.MAX_TRANSFORM,
        improvement_steps=improved.improvement_steps,
    )


def max_tour_heuristic(instance: CostsLike) -> float:
    """Estimated maximum tour length B."""
    return max_tour_result(instance).length
