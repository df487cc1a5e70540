import math
from concurrent.futures import ProcessPoolExecutor
from itertools import permutations
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from config.env_config import env
from schemas.instance_schema import CostMatrix, Instance
from schemas.tour_schema import CountBasis, EnumerationResult, Histogram, MomentSet, Tour
from services.instance import as_cost_matrix
from utils.enumeration_kernels import enumerate_shard
from utils.errors import TspAnalysisError
from utils.logger_utils import setup_logger
from utils.moment_utils import MomentAccumulator

logger = setup_logger(__name__)

TourLike = Union[Tour, Sequence[int]]
CostsLike = Union[Instance, CostMatrix]
Visitor = Callable[[Tour, float], None]

# Below this size the closed-form variance has no disjoint edge pairs
MIN_CLOSED_FORM_N = 5
MIN_SAMPLE_SIZE = 1000


class TourDimensionError(TspAnalysisError):
    """Tour and cost matrix disagree on n."""
    pass

class EnumerationCapError(TspAnalysisError):
    """Enumeration requested above the configured size limits."""
    pass

class TourArgumentError(TspAnalysisError):
    """Invalid sample size or histogram binning."""
    pass


# =========================
# Tours
# =========================

def _order_of(tour: TourLike) -> List[int]:
    return list(tour.order) if isinstance(tour, Tour) else [int(v) for v in tour]


def tour_length(tour: TourLike, costs: CostsLike) -> float:
    """
    Closed-cycle length sum_k c[T(k), T(k+1)] with T(n) = T(0).

    The sum is correctly rounded, so rotations and reversals of a tour
    give bit-identical lengths.

    Raises:
        TourDimensionError: The tour does not cover exactly the n nodes.
    """
    matrix = as_cost_matrix(costs)
    order = np.asarray(_order_of(tour), dtype=np.int64)
    if order.size != matrix.n:
        raise TourDimensionError(f"Tour has {order.size} nodes, cost matrix has {matrix.n}")
    return math.fsum(matrix.values[order, np.roll(order, -1)].tolist())


def canonical_tour(tour: TourLike, length: Optional[float] = None) -> Tour:
    """Rotate to start at node 0 and orient so that order[1] < order[n-1]."""
    order = _order_of(tour)
    start = order.index(0)
    order = order[start:] + order[:start]
    if len(order) > 2 and order[1] > order[-1]:
        order = [0] + order[1:][::-1]
    return Tour(order=order, length=length)


# =========================
# Exhaustive enumeration
# =========================

def _check_enumeration_size(n: int, allow_long: bool, cap: Optional[int]) -> None:
    cap = env.enumeration_cap if cap is None else cap
    if n > cap:
        raise EnumerationCapError(f"n={n} exceeds the enumeration cap of {cap}")
    if n > env.long_enumeration_n and not allow_long:
        raise EnumerationCapError(
            f"n={n} enumerates {math.factorial(n - 1) // 2} tours; pass allow_long to run it"
        )


def can_enumerate(n: int, allow_long: bool = False, cap: Optional[int] = None) -> bool:
    cap = env.enumeration_cap if cap is None else cap
    return n <= cap and (n <= env.long_enumeration_n or allow_long)


def _run_shard(args: Tuple[np.ndarray, int, float, float, int]):
    values, first, lo, hi, bins = args
    return enumerate_shard(values, first, lo, hi, bins)


def _enumerate_with_visitor(matrix: CostMatrix, visitor: Visitor) -> EnumerationResult:
    n = matrix.n
    acc = MomentAccumulator()
    best = worst = None
    for rest in permutations(range(1, n)):
        if rest[0] > rest[-1]:
            continue
        order = [0, *rest]
        length = tour_length(order, matrix)
        tour = Tour(order=order, length=length)
        visitor(tour, length)
        if best is None or length < best.length:
            best = tour
        if worst is None or length > worst.length:
            worst = tour
        acc.push(length)
    return EnumerationResult(
        moments=acc.to_moment_set(CountBasis.EXACT_ENUMERATION), best=best, worst=worst
    )


def run_enumeration(
    costs: CostsLike,
    visitor: Optional[Visitor] = None,
    workers: Optional[int] = None,
    allow_long: bool = False,
    cap: Optional[int] = None,
    bins: int = 0,
    hist_range: Optional[Tuple[float, float]] = None,
) -> EnumerationResult:
    """
    Visit each of the (n-1)!/2 canonical tours once.

    Work is sharded by the value of order[1]; shard results merge in shard
    order, so moments do not depend on the worker count. A visitor forces
    a single-process pass that hands every tour to the callback.

    Args:
        costs (Instance | CostMatrix): The instance.
        visitor (Optional[Callable[[Tour, float], None]]): Per-tour callback.
        workers (Optional[int]): Worker processes (defaults to TGB_WORKERS).
        allow_long (bool): Permit runs above TGB_LONG_ENUMERATION_N.
        cap (Optional[int]): Overrides TGB_ENUMERATION_CAP.
        bins (int): Histogram bins filled inside the kernel (0 disables).
        hist_range (Optional[Tuple[float, float]]): Histogram range when bins > 0.

    Raises:
        EnumerationCapError: n above the configured limits.

    Returns:
        EnumerationResult: Exact moments, argmin/argmax tours, optional histogram.
    """
    matrix = as_cost_matrix(costs)
    n = matrix.n
    _check_enumeration_size(n, allow_long, cap)
    total = math.factorial(n - 1) // 2
    logger.info(f"Enumerating {total} tours (n={n})")

    if visitor is not None:
        return _enumerate_with_visitor(matrix, visitor)

    lo, hi = hist_range if hist_range is not None else (0.0, 1.0)
    values = np.ascontiguousarray(matrix.values)
    jobs = [(values, first, float(lo), float(hi), int(bins)) for first in range(1, n)]
    workers = env.workers if workers is None else workers
    show_progress = n > env.long_enumeration_n

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            shards = list(tqdm(pool.map(_run_shard, jobs), total=len(jobs), desc="shards", disable=not show_progress))
    else:
        shards = [_run_shard(job) for job in tqdm(jobs, desc="shards", disable=not show_progress)]

    acc = MomentAccumulator()
    counts = np.zeros(max(bins, 1), dtype=np.int64)
    best_order = worst_order = None
    for stats, best, worst, shard_counts in shards:
        shard = MomentAccumulator.from_stats(stats)
        if shard.count == 0:
            continue
        if best_order is None or shard.min < acc.min:
            best_order = best.tolist()
        if worst_order is None or shard.max > acc.max:
            worst_order = worst.tolist()
        acc.merge(shard)
        counts += shard_counts

    histogram = None
    if bins > 0:
        histogram = Histogram(
            bin_edges=np.linspace(lo, hi, bins + 1).tolist(), counts=counts.tolist(), total=int(counts.sum())
        )
    logger.info(f"Enumeration done: count={acc.count} min={acc.min} max={acc.max}")
    return EnumerationResult(
        moments=acc.to_moment_set(CountBasis.EXACT_ENUMERATION),
        best=Tour(order=best_order, length=acc.min),
        worst=Tour(order=worst_order, length=acc.max),
        histogram=histogram,
    )


def enumerate_tours(
    costs: CostsLike,
    visitor: Optional[Visitor] = None,
    workers: Optional[int] = None,
    allow_long: bool = False,
    cap: Optional[int] = None,
) -> MomentSet:
    """Exact moments over all canonical tours; see `run_enumeration`."""
    return run_enumeration(costs, visitor=visitor, workers=workers, allow_long=allow_long, cap=cap).moments


def enumerate_histogram(
    costs: CostsLike,
    bins: int,
    hist_range: Optional[Tuple[float, float]] = None,
    workers: Optional[int] = None,
    allow_long: bool = False,
    cap: Optional[int] = None,
) -> Histogram:
    """
    Histogram of every tour length, binned inside the enumeration kernel.

    Without a range a first pass finds [min, max].
    """
    _check_bins(bins, hist_range)
    if hist_range is None:
        first_pass = run_enumeration(costs, workers=workers, allow_long=allow_long, cap=cap)
        lo, hi = first_pass.moments.min, first_pass.moments.max
        hist_range = (lo, hi) if hi > lo else (lo - 0.5, lo + 0.5)
    result = run_enumeration(costs, workers=workers, allow_long=allow_long, cap=cap, bins=bins, hist_range=hist_range)
    return result.histogram


# =========================
# Closed-form moments
# =========================

def exact_mean(costs: CostsLike) -> float:
    """Every edge lies in a fraction 2/(n-1) of the tours: mean = sum_{i<j} c_ij * 2/(n-1)."""
    matrix = as_cost_matrix(costs)
    return float(matrix.values.sum()) / (matrix.n - 1)


def exact_variance(costs: CostsLike) -> float:
    """
    Exact variance from pairwise edge co-occurrence probabilities.

    In a uniform random Hamiltonian cycle on n >= 5 nodes an edge appears
    with probability 2/(n-1), two edges sharing a vertex with
    2/((n-1)(n-2)) and two disjoint edges with 4/((n-1)(n-2)). Smaller
    instances fall back to enumeration.
    """
    matrix = as_cost_matrix(costs)
    n = matrix.n
    if n < MIN_CLOSED_FORM_N:
        return enumerate_tours(matrix, workers=1).variance

    # Every tour has n edges, so shifting all costs leaves the variance unchanged
    off_diagonal = ~np.eye(n, dtype=bool)
    shifted = np.where(off_diagonal, matrix.values - matrix.values[off_diagonal].mean(), 0.0)

    p_same = 2.0 / (n - 1)
    p_adjacent = 2.0 / ((n - 1) * (n - 2))
    p_disjoint = 4.0 / ((n - 1) * (n - 2))

    sum_sq = float((shifted * shifted).sum()) / 2.0
    total = float(shifted.sum()) / 2.0
    row_sums = shifted.sum(axis=1)
    adjacent = float((row_sums * row_sums).sum()) - 2.0 * sum_sq
    disjoint = total * total - sum_sq - adjacent

    second_moment = p_same * sum_sq + p_adjacent * adjacent + p_disjoint * disjoint
    mean = p_same * total
    return max(second_moment - mean * mean, 0.0)


def with_exact_mean_variance(sampled: MomentSet, costs: CostsLike) -> MomentSet:
    """Sampled moments with mean and variance replaced by their closed forms."""
    return sampled.model_copy(update={
        "mean": exact_mean(costs),
        "variance": exact_variance(costs),
        "closed_form_fields": ["mean", "variance"],
    })


# =========================
# Uniform sampling
# =========================

def _block_lengths(values: np.ndarray, count: int, seed: int, block_index: int) -> np.ndarray:
    n = values.shape[0]
    # Counter-based stream per block: identical draws for any worker count
    rng = np.random.Generator(np.random.Philox(seed).jumped(block_index + 1))
    perms = rng.permuted(np.tile(np.arange(n), (count, 1)), axis=1)
    return values[perms, np.roll(perms, -1, axis=1)].sum(axis=1)


def _sample_block(args: Tuple[np.ndarray, int, int, int]) -> MomentAccumulator:
    return MomentAccumulator.from_array(_block_lengths(*args))


def _sample_jobs(values: np.ndarray, sample_size: int, seed: int) -> List[Tuple[np.ndarray, int, int, int]]:
    block = env.sample_block
    return [
        (values, min(block, sample_size - start), seed, index)
        for index, start in enumerate(range(0, sample_size, block))
    ]


def sample_lengths(costs: CostsLike, sample_size: int, seed: int) -> np.ndarray:
    """Lengths of the same uniform tours `sample_moments` draws for (sample_size, seed)."""
    matrix = as_cost_matrix(costs)
    values = np.ascontiguousarray(matrix.values)
    return np.concatenate([_block_lengths(*job) for job in _sample_jobs(values, sample_size, seed)])


def sample_moments(
    costs: CostsLike,
    sample_size: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> MomentSet:
    """
    Four moments of uniformly drawn tours.

    Tours are uniform permutations (unbiased shuffles); tour length does
    not depend on rotation or orientation, so no canonicalization is
    needed before measuring. Draws are split into blocks of
    TGB_SAMPLE_BLOCK tours, each with its own jumped Philox stream, and
    merged in block order.

    Raises:
        TourArgumentError: sample_size below 1000.
    """
    matrix = as_cost_matrix(costs)
    sample_size = env.sample_size if sample_size is None else sample_size
    seed = env.seed if seed is None else seed
    if sample_size < MIN_SAMPLE_SIZE:
        raise TourArgumentError(f"sample_size must be at least {MIN_SAMPLE_SIZE}, got {sample_size}")

    jobs = _sample_jobs(np.ascontiguousarray(matrix.values), sample_size, seed)

    workers = env.workers if workers is None else workers
    logger.info(f"Sampling {sample_size} tours in {len(jobs)} blocks (n={matrix.n}, seed={seed})")
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_sample_block, jobs))
    else:
        partials = [_sample_block(job) for job in jobs]

    acc = MomentAccumulator()
    for partial in partials:
        acc.merge(partial)
    return acc.to_moment_set(CountBasis.SAMPLED, sample_size=sample_size, seed=seed)


# =========================
# Histograms
# =========================

def _check_bins(bins: int, hist_range: Optional[Tuple[float, float]]) -> None:
    if bins < 2:
        raise TourArgumentError(f"histogram needs at least 2 bins, got {bins}")
    if hist_range is not None and not hist_range[0] < hist_range[1]:
        raise TourArgumentError(f"histogram range {hist_range} is empty")


def histogram(lengths: Iterable[float], bins: int, hist_range: Tuple[float, float]) -> Histogram:
    """
    Count lengths into half-open bins over hist_range.

    Values outside the range are clamped into the first or last bin.
    """
    _check_bins(bins, hist_range)
    lo, hi = float(hist_range[0]), float(hist_range[1])
    values = np.fromiter(lengths, dtype=np.float64)
    index = np.floor((values - lo) / (hi - lo) * bins).astype(np.int64)
    counts = np.bincount(np.clip(index, 0, bins - 1), minlength=bins)
    return Histogram(
        bin_edges=np.linspace(lo, hi, bins + 1).tolist(), counts=counts.tolist(), total=int(values.size)
    )
