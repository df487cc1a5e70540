import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.env_config import env
from schemas.beta_schema import GBParams, TruncationWindow
from schemas.instance_schema import Instance
from schemas.tgb_schema import (
    PRINTED_ITERATION_FORMULA,
    IterationFormula,
    RatioRow,
    ReferenceRow,
    TgbIteration,
    TgbSchedule,
    UpperBoundRow,
)
from services.betadist import DomainError, fit_from_bound_and_moments, gb_pdf, truncated_mean_fraction, truncated_pdf
from services.heuristics import christofides, k_opt_improve, max_tour_heuristic
from services.instance import generate_random
from services.tour import sample_moments
from utils.errors import TspAnalysisError
from utils.logger_utils import setup_logger

logger = setup_logger(__name__)

# Linear regression of random unit-square parameters on n (fitted for 20 <= n <= 100)
REGRESSION_MIN_N = 20
REGRESSION_MAX_N = 100

# Published random-instance parameters: n -> (A, B, alpha, beta)
PUBLISHED_RANDOM_ROWS: Dict[int, Tuple[float, float, float, float]] = {
    90: (7.18, 65.75, 179.68, 96.49),
    91: (7.15, 69.49, 180.38, 96.30),
    92: (7.01, 69.18, 185.51, 108.55),
    93: (8.00, 71.24, 182.22, 100.63),
    94: (7.73, 68.58, 175.38, 94.00),
    95: (7.77, 69.53, 181.09, 105.93),
    96: (7.40, 73.10, 204.60, 115.61),
    97: (8.00, 74.01, 186.85, 107.33),
    98: (7.73, 76.44, 208.67, 123.96),
    99: (7.54, 74.95, 203.46, 109.03),
}
REFERENCE_SHAPE_TOLERANCE = 0.10

# Published TSPLIB fits: instance -> (A, B, alpha, beta)
PUBLISHED_INSTANCE_ROWS: Dict[str, Tuple[float, float, float, float]] = {
    "burma14": (3323.0, 9139.0, 13.97, 11.79),
    "ulysses16": (73.98, 180.52, 10.24, 6.52),
    "gr17": (2085.0, 6160.0, 19.22, 10.60),
    "gr21": (2707.0, 10680.0, 32.95, 19.80),
    "ulysses22": (75.3, 241.50, 17.52, 12.79),
    "gr24": (1272.0, 4929.0, 51.55, 27.21),
    "fri26": (937.0, 3681.0, 28.87, 16.91),
    "bayg29": (1610.0, 6654.0, 42.17, 26.42),
    "bays29": (2020.0, 8442.0, 45.14, 27.52),
}

# Published (instance, alpha, K-1) rows of the approximation-ratio table
PUBLISHED_RATIO_ROWS: List[Tuple[str, float, int]] = [
    ("ulysses22", 17.52, 91),
    ("berlin52", 57.40, 101),
    ("pr76", 115.54, 2451),
    ("rat99", 128.18, 1821),
    ("kroA100", 137.30, 3366),
    ("pr299", 422.28, 29117),
    ("lin318", 563.15, 39112),
    ("rd400", 735.15, 34936),
    ("d493", 695.93, 129767),
    ("rat575", 892.03, 84814),
]

RANDOM_ENVELOPE = 0.065
TSPLIB_ENVELOPE = 0.07
BOUND_SLACK = 1e-12


class TargetRatioError(TspAnalysisError):
    """Target ratio outside (1, 1.5)."""
    pass

class ScheduleBoundError(TspAnalysisError):
    """A schedule iterate exceeded its ratio bound where the bound must hold."""
    pass


# =========================
# Approximation ratio
# =========================

def approximation_ratio(alpha: float, K: int) -> float:
    """1 + 0.5 ((alpha+1)/(alpha+2))^(K-1), in log space."""
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if K < 1:
        raise DomainError(f"K must be at least 1, got {K}")
    return 1.0 + 0.5 * math.exp((K - 1) * math.log1p(-1.0 / (alpha + 2.0)))


def min_iterations(alpha: float, target_ratio: float) -> int:
    """
    Smallest K with approximation_ratio(alpha, K) <= target_ratio.

    Raises:
        TargetRatioError: target_ratio not in (1, 1.5).
    """
    if not 1.0 < target_ratio < 1.5:
        raise TargetRatioError(f"target ratio must lie in (1, 1.5), got {target_ratio}")
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    steps = math.log(2.0 * (target_ratio - 1.0)) / math.log1p(-1.0 / (alpha + 2.0))
    K = 1 + max(0, math.ceil(steps))
    # Rounding at the ceiling boundary
    while K > 1 and approximation_ratio(alpha, K - 1) <= target_ratio:
        K -= 1
    while approximation_ratio(alpha, K) > target_ratio:
        K += 1
    return K


def printed_iteration_formula(alpha: float, target_ratio: float) -> float:
    """Literal value of 1 + log2(C0-1)/log(1-1/(alpha+1)) with a natural log below."""
    return 1.0 + math.log2(target_ratio - 1.0) / math.log(1.0 - 1.0 / (alpha + 1.0))


def iteration_formula(alpha: float, target_ratio: float) -> IterationFormula:
    return IterationFormula(
        target_ratio=target_ratio,
        min_iterations=min_iterations(alpha, target_ratio),
        printed_formula=PRINTED_ITERATION_FORMULA,
        printed_formula_value=printed_iteration_formula(alpha, target_ratio),
    )


def ratio_table(rows: Optional[Sequence[Tuple[str, float, int]]] = None) -> List[RatioRow]:
    """Recompute the ratio column for (instance, alpha, K-1) rows."""
    rows = PUBLISHED_RATIO_ROWS if rows is None else rows
    return [
        RatioRow(instance=name, alpha=alpha, iterations=steps, ratio=approximation_ratio(alpha, steps + 1))
        for name, alpha, steps in rows
    ]


# =========================
# Truncation schedule
# =========================

def window_bound(p: GBParams, K: int) -> float:
    """Bound on the normalized truncated mean after K iterations: (0.5A/(B-A)) r^(K-1)."""
    return 0.5 * p.A / p.width * math.exp((K - 1) * math.log1p(-1.0 / (p.alpha + 2.0)))


def iterate_tgb(
    p: GBParams,
    max_K: Optional[int] = None,
    stop_epsilon: Optional[float] = None,
) -> TgbSchedule:
    """
    Iterated upper truncation of the GB starting from the 1.5A ceiling.

    K=1 records mu = 1.5A. For K >= 2 the window is
    b_hat_K = (mu_{K-1} - A)/(B - A) (clamped to 1) and
    mu_K = A + (B - A) * E[x_hat | x_hat <= b_hat_K]. Stops when
    mu_K - A < stop_epsilon * A or at max_K.

    Raises:
        DomainError: A <= 0.
        ScheduleBoundError: mu_K > ratio_bound * A while alpha, beta > 1.
    """
    if p.A <= 0.0:
        raise DomainError(f"Schedule needs a positive lower bound, got A={p.A}")
    max_K = env.max_k if max_K is None else max_K
    stop_epsilon = env.stop_epsilon if stop_epsilon is None else stop_epsilon
    bound_applies = p.alpha > 1.0 and p.beta > 1.0

    mu = 1.5 * p.A
    iterations = [TgbIteration(K=1, b_hat=None, mu_t=mu, ratio_bound=1.5)]
    first_window = 0.5 * p.A / p.width
    clamped = first_window > 1.0
    if clamped:
        logger.warning(f"1.5A exceeds B (A={p.A}, B={p.B}); first window clamped to the full support")

    converged_at = None
    for K in range(2, max_K + 1):
        b_hat = min(1.0, (mu - p.A) / p.width)
        mu = p.A + p.width * truncated_mean_fraction(p, b_hat)
        ratio = approximation_ratio(p.alpha, K)
        iterations.append(TgbIteration(K=K, b_hat=b_hat, mu_t=mu, ratio_bound=ratio))
        if mu > ratio * p.A * (1.0 + BOUND_SLACK):
            message = f"mu_t at K={K} is {mu}, above the bound {ratio * p.A}"
            if bound_applies:
                raise ScheduleBoundError(message)
            logger.warning(message)
        if mu - p.A < stop_epsilon * p.A:
            converged_at = K
            break

    logger.info(f"Schedule: {len(iterations)} iterations, converged_at={converged_at}")
    return TgbSchedule(params=p, iterations=iterations, converged_at=converged_at, first_window_clamped=clamped)


def schedule_density_series(
    schedule: TgbSchedule,
    Ks: Sequence[int],
    points: int = 200,
) -> List[Dict[str, float]]:
    """
    Rows of (x, GB density, truncated density for each requested K) over [A, B].

    The window at K is the one used to produce mu_K; K=1 uses [A, 1.5A].
    """
    p = schedule.params
    windows = {}
    for K in Ks:
        if not 1 <= K <= len(schedule.iterations):
            raise DomainError(f"K={K} outside the schedule's 1..{len(schedule.iterations)}")
        if K == 1:
            windows[K] = min(1.0, 0.5 * p.A / p.width)
        else:
            windows[K] = schedule.iterations[K - 1].b_hat
    xs = np.linspace(p.A, p.B, points)
    base = gb_pdf(xs, p)
    columns = {K: truncated_pdf(xs, p, TruncationWindow(b_hat=b_hat)) for K, b_hat in windows.items()}
    rows = []
    for idx, x in enumerate(xs):
        row = {"x": float(x), "gb": float(base[idx])}
        for K in Ks:
            row[f"K={K}"] = float(columns[K][idx])
        rows.append(row)
    return rows


# =========================
# Random-instance regression
# =========================

def regression_params(n: int) -> GBParams:
    """
    Regression of (alpha, beta, A, B) on n for unit-square instances.

    Outside the fitted range 20..100 the values are returned with a warning.

    Raises:
        DomainError: n so small that a fitted shape is not positive (n <= 16).
    """
    if not REGRESSION_MIN_N <= n <= REGRESSION_MAX_N:
        logger.warning(f"n={n} lies outside the fitted range {REGRESSION_MIN_N}..{REGRESSION_MAX_N}")
    alpha = 1.9197 * n - 32.166
    beta = 1.1168 * n - 15.854
    if alpha <= 0.0 or beta <= 0.0:
        raise DomainError(f"Regression shapes are not positive at n={n} (alpha={alpha}, beta={beta})")
    return GBParams(
        alpha=alpha,
        beta=beta,
        A=0.6932 * math.sqrt(n) + 0.8029,
        B=0.7649 * n - 0.6393,
    )


def published_instance_params(name: str) -> GBParams:
    """GB parameters published for a TSPLIB instance (A is the optimum)."""
    if name not in PUBLISHED_INSTANCE_ROWS:
        raise DomainError(f"No published fit for '{name}'; known: {', '.join(PUBLISHED_INSTANCE_ROWS)}")
    A, B, alpha, beta = PUBLISHED_INSTANCE_ROWS[name]
    return GBParams(alpha=alpha, beta=beta, A=A, B=B)


def random_reference_table() -> List[ReferenceRow]:
    """Published n = 90..99 parameters against the regression, with discrepancy flags."""
    rows = []
    for n, (A, B, alpha, beta) in sorted(PUBLISHED_RANDOM_ROWS.items()):
        published = GBParams(alpha=alpha, beta=beta, A=A, B=B)
        regression = regression_params(n)
        discrepancy = (
            abs(regression.alpha - alpha) / alpha > REFERENCE_SHAPE_TOLERANCE
            or abs(regression.beta - beta) / beta > REFERENCE_SHAPE_TOLERANCE
        )
        if discrepancy:
            logger.warning(
                f"n={n}: published (alpha, beta)=({alpha}, {beta}) vs regression "
                f"({regression.alpha:.2f}, {regression.beta:.2f})"
            )
        rows.append(ReferenceRow(n=n, published=published, regression=regression, discrepancy=discrepancy))
    return rows


def regression_upper_bound_error(n: int, seed: int) -> float:
    """|heuristic maxTSP - B(n)| / heuristic maxTSP on a seeded unit-square instance."""
    heuristic = max_tour_heuristic(generate_random(n, seed))
    return abs(heuristic - regression_params(n).B) / heuristic


# =========================
# Upper-bound study
# =========================

def best_heuristic_length(instance: Instance) -> float:
    """Christofides followed by 3-opt."""
    start = christofides(instance)
    return k_opt_improve(start.tour, instance, k=3).length


def upper_bound_study(
    instances: Sequence[Instance],
    sample_size: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[UpperBoundRow]:
    """
    Fitted B (heuristic A plus sampled moments) against the max-tour heuristic.

    Rows beyond the envelope (6.5% for unit-square instances, 7% for
    TSPLIB instances) are flagged and logged, never raised.
    """
    rows = []
    for instance in instances:
        A = best_heuristic_length(instance)
        moments = sample_moments(instance, sample_size=sample_size, seed=seed)
        fitted = fit_from_bound_and_moments(A, moments.mean, moments.variance, moments.skewness)
        heuristic_B = max_tour_heuristic(instance)
        error = (fitted.B - heuristic_B) / heuristic_B
        envelope = TSPLIB_ENVELOPE if instance.rounded else RANDOM_ENVELOPE
        exceeds = abs(error) > envelope
        if exceeds:
            logger.warning(f"{instance.name}: fitted B off by {error:.2%}, envelope {envelope:.1%}")
        rows.append(UpperBoundRow(
            instance=instance.name,
            n=instance.n,
            A=A,
            B_fitted=fitted.B,
            B_heuristic=heuristic_B,
            relative_error=error,
            envelope=envelope,
            exceeds=exceeds,
        ))
    return rows
