import math
from typing import Dict, List, Optional, Union

import numpy as np
from scipy import optimize, special, stats

from schemas.beta_schema import FitReport, GBParams, TruncationWindow
from schemas.tour_schema import CountBasis, MomentSet
from utils.errors import TspAnalysisError
from utils.logger_utils import setup_logger

logger = setup_logger(__name__)

ArrayLike = Union[float, np.ndarray]

# Continued fraction / series controls
CF_MAX_ITERATIONS = 10_000
CF_EPSILON = 1e-15
CF_TINY = 1e-300
SERIES_MAX_TERMS = 200_000
SERIES_TOLERANCE = 1e-12

# Bracketing grid for the bound-and-moments fit
BETA_GRID_MIN = 1e-3
BETA_GRID_MAX = 1e6
BETA_GRID_POINTS = 361
ROOT_XTOL = 1e-12


class DomainError(TspAnalysisError):
    """Argument outside the domain of a Beta-family function."""
    pass

class InfeasibleMomentsError(TspAnalysisError):
    """Skewness/kurtosis pair outside the Beta-feasible region."""
    pass

class DegenerateDistributionError(TspAnalysisError):
    """Zero variance: no Beta distribution matches."""
    pass

class RootBracketError(TspAnalysisError):
    """No sign change of the skewness equation on the search grid."""
    pass

class SeriesConvergenceError(TspAnalysisError):
    """Continued fraction or series did not converge within its term cap."""
    pass


# =========================
# Density, beta function, moments
# =========================

def beta_function(alpha: float, beta: float) -> float:
    """Gamma(a)Gamma(b)/Gamma(a+b) through log-gamma."""
    if alpha <= 0 or beta <= 0:
        raise DomainError(f"Beta function needs positive arguments, got ({alpha}, {beta})")
    return float(np.exp(special.betaln(alpha, beta)))


def gb_pdf(x: ArrayLike, p: GBParams) -> ArrayLike:
    """
    Generalized Beta density on [A, B], zero outside.

    (x-A)^(a-1) (B-x)^(b-1) / (Beta(a,b) (B-A)^(a+b-1)), evaluated in log space.
    """
    arr = np.asarray(x, dtype=np.float64)
    inside = (arr >= p.A) & (arr <= p.B)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_density = (
            special.xlogy(p.alpha - 1.0, arr - p.A)
            + special.xlogy(p.beta - 1.0, p.B - arr)
            - special.betaln(p.alpha, p.beta)
            - (p.alpha + p.beta - 1.0) * math.log(p.width)
        )
        density = np.where(inside, np.exp(log_density), 0.0)
    return float(density) if np.ndim(density) == 0 else density


def gb_cdf(x: ArrayLike, p: GBParams) -> ArrayLike:
    """Regularized incomplete beta of the normalized coordinate."""
    u = np.clip((np.asarray(x, dtype=np.float64) - p.A) / p.width, 0.0, 1.0)
    value = special.betainc(p.alpha, p.beta, u)
    return float(value) if np.ndim(value) == 0 else value


def gb_quantile(q: ArrayLike, p: GBParams) -> ArrayLike:
    value = p.A + p.width * special.betaincinv(p.alpha, p.beta, np.asarray(q, dtype=np.float64))
    return float(value) if np.ndim(value) == 0 else value


def gb_sample(p: GBParams, size: int, seed: int) -> np.ndarray:
    """Inverse-CDF draws; deterministic given the seed."""
    rng = np.random.default_rng(seed)
    return np.asarray(gb_quantile(rng.random(size), p))


def gb_moments(p: GBParams) -> MomentSet:
    """Closed-form mean, variance, skewness and ordinary kurtosis."""
    a, b = p.alpha, p.beta
    nu = a + b
    mean = p.A + p.width * a / nu
    variance = p.width ** 2 * a * b / (nu * nu * (nu + 1.0))
    skewness = 2.0 * (b - a) * math.sqrt(nu + 1.0) / ((nu + 2.0) * math.sqrt(a * b))
    excess = 6.0 * ((a - b) ** 2 * (nu + 1.0) - a * b * (nu + 2.0)) / (a * b * (nu + 2.0) * (nu + 3.0))
    return MomentSet(
        mean=mean,
        variance=variance,
        skewness=skewness,
        kurtosis=excess + 3.0,
        min=p.A,
        max=p.B,
        count_basis=CountBasis.CLOSED_FORM,
    )


def moment_residuals(p: GBParams, m: MomentSet) -> Dict[str, float]:
    """Relative residuals for mean and variance, absolute for skewness and excess kurtosis."""
    fitted = gb_moments(p)
    return {
        "mean": (fitted.mean - m.mean) / m.mean if m.mean else fitted.mean - m.mean,
        "variance": (fitted.variance - m.variance) / m.variance if m.variance else fitted.variance,
        "skewness": fitted.skewness - m.skewness,
        "excess_kurtosis": fitted.excess_kurtosis - m.excess_kurtosis,
    }


# =========================
# Moment matching
# =========================

def fit_from_four_moments(m: MomentSet) -> GBParams:
    """
    Match mean, variance, skewness and kurtosis (Pearson type I).

    Shapes come from skewness and excess kurtosis, then the support from
    mean and variance.

    Raises:
        DegenerateDistributionError: variance is zero.
        InfeasibleMomentsError: kurtosis outside (skew^2 + 1, 3 + 1.5 skew^2).
    """
    if m.variance <= 0.0:
        raise DegenerateDistributionError("Cannot fit a Beta distribution to zero variance")
    g2 = m.skewness ** 2
    kurt = m.kurtosis
    if not kurt > g2 + 1.0:
        raise InfeasibleMomentsError(f"kurtosis {kurt} must exceed skewness^2 + 1 = {g2 + 1.0}")
    if not kurt < 3.0 + 1.5 * g2:
        raise InfeasibleMomentsError(
            f"kurtosis {kurt} must be below 3 + 1.5 skewness^2 = {3.0 + 1.5 * g2} for a bounded fit"
        )

    excess = kurt - 3.0
    nu = 3.0 * (excess - g2 + 2.0) / (1.5 * g2 - excess)
    if g2 == 0.0:
        alpha = beta = nu / 2.0
    else:
        spread = 1.0 / math.sqrt(1.0 + 16.0 * (nu + 1.0) / ((nu + 2.0) ** 2 * g2))
        small, large = nu / 2.0 * (1.0 - spread), nu / 2.0 * (1.0 + spread)
        # Left skew puts the heavier shape on alpha
        alpha, beta = (large, small) if m.skewness < 0 else (small, large)

    width = math.sqrt(m.variance * nu * nu * (nu + 1.0) / (alpha * beta))
    lower = m.mean - width * alpha / nu
    params = GBParams(alpha=alpha, beta=beta, A=lower, B=lower + width)
    logger.debug(f"Four-moment fit: {params}")
    return params


def _alpha_for(beta: float, ratio: float) -> float:
    # Positive root of r a^2 + r (b + 1) a - b = 0, rationalized
    s = ratio * (beta + 1.0)
    return 2.0 * beta / (s + math.sqrt(s * s + 4.0 * ratio * beta))


def _skewness(alpha: float, beta: float) -> float:
    nu = alpha + beta
    return 2.0 * (beta - alpha) * math.sqrt(nu + 1.0) / ((nu + 2.0) * math.sqrt(alpha * beta))


def fit_from_bound_and_moments(A: float, mean: float, variance: float, skewness: float) -> GBParams:
    """
    Solve for (B, alpha, beta) given the lower bound A.

    Mean and variance eliminate B and alpha, leaving the skewness equation
    in beta, which is bracketed on a log grid and solved with Brent's
    method. When several roots exist the smallest beta is used.

    Raises:
        DegenerateDistributionError: variance is zero (checked first).
        DomainError: A >= mean.
        RootBracketError: No sign change on the grid.
    """
    if variance <= 0.0:
        raise DegenerateDistributionError("Cannot fit a Beta distribution to zero variance")
    if not A < mean:
        raise DomainError(f"Lower bound A={A} must be below the mean {mean}")

    offset = mean - A
    ratio = variance / (offset * offset)

    def residual(beta: float) -> float:
        return _skewness(_alpha_for(beta, ratio), beta) - skewness

    grid = np.logspace(math.log10(BETA_GRID_MIN), math.log10(BETA_GRID_MAX), BETA_GRID_POINTS)
    values = np.array([residual(b) for b in grid])
    brackets = [
        (grid[i], grid[i + 1])
        for i in range(len(grid) - 1)
        if np.isfinite(values[i]) and np.isfinite(values[i + 1]) and values[i] * values[i + 1] <= 0.0
    ]
    if not brackets:
        raise RootBracketError(
            f"Skewness equation has no sign change for beta in [{BETA_GRID_MIN}, {BETA_GRID_MAX}] "
            f"(A={A}, mean={mean}, variance={variance}, skewness={skewness})"
        )
    if len(brackets) > 1:
        logger.warning(f"{len(brackets)} roots bracketed for the skewness equation; using the smallest beta")

    lo, hi = brackets[0]
    beta = lo if residual(lo) == 0.0 else optimize.brentq(residual, lo, hi, xtol=ROOT_XTOL)
    alpha = _alpha_for(beta, ratio)
    upper = A + offset * (alpha + beta) / alpha
    params = GBParams(alpha=alpha, beta=beta, A=A, B=upper)
    logger.debug(f"Bound-and-moments fit: {params}")
    return params


def fit_report(method: str, params: GBParams, m: MomentSet, diagnostics: Optional[List[str]] = None) -> FitReport:
    return FitReport(method=method, params=params, residuals=moment_residuals(params, m), diagnostics=diagnostics or [])


# =========================
# Incomplete beta and hypergeometric series
# =========================

def _continued_fraction(t: float, a: float, b: float) -> float:
    """Modified Lentz evaluation of the incomplete beta continued fraction."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * t / qap
    d = 1.0 / (d if abs(d) > CF_TINY else CF_TINY)
    h = d
    for m in range(1, CF_MAX_ITERATIONS + 1):
        m2 = 2 * m
        aa = m * (b - m) * t / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > CF_TINY else CF_TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > CF_TINY else CF_TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * t / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > CF_TINY else CF_TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > CF_TINY else CF_TINY
        step = d * c
        h *= step
        if abs(step - 1.0) < CF_EPSILON:
            return h
    raise SeriesConvergenceError(f"Incomplete beta continued fraction did not converge (t={t}, a={a}, b={b})")


def _check_incomplete_args(t: float, alpha: float, beta: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t} outside [0, 1]")
    if alpha <= 0 or beta <= 0:
        raise DomainError(f"Incomplete beta needs positive shapes, got ({alpha}, {beta})")


def regularized_incomplete_beta(t: float, alpha: float, beta: float) -> float:
    """I_t(alpha, beta) from the continued fraction, split at (alpha+1)/(alpha+beta+2)."""
    _check_incomplete_args(t, alpha, beta)
    if t == 0.0 or t == 1.0:
        return t
    log_front = alpha * math.log(t) + beta * math.log1p(-t) - special.betaln(alpha, beta)
    if t < (alpha + 1.0) / (alpha + beta + 2.0):
        return math.exp(log_front) * _continued_fraction(t, alpha, beta) / alpha
    return 1.0 - math.exp(log_front) * _continued_fraction(1.0 - t, beta, alpha) / beta


def incomplete_beta(t: float, alpha: float, beta: float) -> float:
    """
    Unregularized incomplete beta: integral of x^(a-1)(1-x)^(b-1) over [0, t].

    Below the split point t^a (1-t)^b / a times the continued fraction;
    above it Beta(a, b) minus the mirrored integral.
    """
    _check_incomplete_args(t, alpha, beta)
    if t == 0.0:
        return 0.0
    if t == 1.0:
        return beta_function(alpha, beta)
    if t < (alpha + 1.0) / (alpha + beta + 2.0):
        front = math.exp(alpha * math.log(t) + beta * math.log1p(-t))
        return front * _continued_fraction(t, alpha, beta) / alpha
    front = math.exp(beta * math.log1p(-t) + alpha * math.log(t))
    return beta_function(alpha, beta) - front * _continued_fraction(1.0 - t, beta, alpha) / beta


def hypergeometric_2f1(a: float, b: float, c: float, x: float) -> float:
    """
    Gauss series sum_k (a)_k (b)_k / ((c)_k k!) x^k for |x| < 1.

    For x > 0 with a negative upper parameter the terms alternate, so the
    Euler transform (1-x)^(c-a-b) 2F1(c-a, c-b; c; x) is summed instead
    whenever its terms are all positive.

    Raises:
        DomainError: |x| >= 1 or c a non-positive integer.
        SeriesConvergenceError: Tolerance not met within the term cap.
    """
    if not abs(x) < 1.0:
        raise DomainError(f"Series needs |x| < 1, got {x}")
    if c <= 0 and float(c).is_integer():
        raise DomainError(f"c={c} is a non-positive integer")

    if x > 0.0 and min(a, b) < 0.0 and c > 0.0 and c - a > 0.0 and c - b > 0.0:
        return (1.0 - x) ** (c - a - b) * _gauss_series(c - a, c - b, c, x)
    return _gauss_series(a, b, c, x)


def _gauss_series(a: float, b: float, c: float, x: float) -> float:
    total = 1.0
    term = 1.0
    previous_ratio = math.inf
    for k in range(SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x
        total += term
        if term == 0.0:
            return total
        ratio = abs((a + k + 1.0) * (b + k + 1.0) / ((c + k + 1.0) * (k + 2.0)) * x)
        # Term ratios tend to |x|; a ratio still climbing above it bounds nothing
        if ratio > abs(x) and ratio > previous_ratio:
            previous_ratio = ratio
            continue
        previous_ratio = ratio
        bound = max(ratio, abs(x))
        tail = abs(term) * bound / (1.0 - bound)
        if tail <= SERIES_TOLERANCE * abs(total):
            return total
    raise SeriesConvergenceError(f"2F1({a}, {b}; {c}; {x}) did not converge in {SERIES_MAX_TERMS} terms")


# =========================
# Truncation and goodness of fit
# =========================

def truncated_mean_fraction(p: GBParams, b_hat: float) -> float:
    """
    Normalized mean of the GB conditioned on x_hat <= b_hat:
    B2(b_hat; a+1, b) / B2(b_hat; a, b).
    """
    if not b_hat > 0.0:
        raise DomainError(f"b_hat must be positive, got {b_hat}")
    a, b = p.alpha, p.beta
    if b_hat >= 1.0:
        return a / (a + b)
    if b_hat < (a + 1.0) / (a + b + 2.0):
        # Ratio of continued fractions: the t^a (1-t)^b fronts cancel
        return b_hat * a / (a + 1.0) * _continued_fraction(b_hat, a + 1.0, b) / _continued_fraction(b_hat, a, b)
    return a / (a + b) * regularized_incomplete_beta(b_hat, a + 1.0, b) / regularized_incomplete_beta(b_hat, a, b)


def truncated_mean(p: GBParams, w: TruncationWindow) -> float:
    """
    Expectation of the GB conditioned on X <= A + b_hat (B - A).

    Raises:
        DomainError: Window truncates from below (a_hat > 0).
    """
    if w.a_hat != 0.0:
        raise DomainError("Only upper truncation (a_hat = 0) is supported")
    return p.A + p.width * truncated_mean_fraction(p, w.b_hat)


def truncated_pdf(x: ArrayLike, p: GBParams, w: TruncationWindow) -> ArrayLike:
    """GB density renormalized to [A + a_hat (B-A), A + b_hat (B-A)]."""
    lo = p.A + w.a_hat * p.width
    hi = p.A + w.b_hat * p.width
    mass = gb_cdf(hi, p) - gb_cdf(lo, p)
    if mass <= 0.0:
        raise DomainError(f"Truncation window [{lo}, {hi}] carries no probability mass")
    arr = np.asarray(x, dtype=np.float64)
    density = np.where((arr >= lo) & (arr <= hi), np.asarray(gb_pdf(arr, p)) / mass, 0.0)
    return float(density) if np.ndim(density) == 0 else density


def ks_statistic(samples: np.ndarray, p: GBParams) -> float:
    """Kolmogorov-Smirnov distance between the samples' ECDF and the GB CDF."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise DomainError("K-S statistic needs at least one sample")
    reference = stats.beta(p.alpha, p.beta, loc=p.A, scale=p.width)
    return float(stats.kstest(np.sort(samples), reference.cdf).statistic)
