import operator
from functools import wraps
from typing import Annotated, Callable, Dict, List, Optional, Sequence, TypedDict

from langgraph.graph import END, START, StateGraph

from schemas.beta_schema import GBParams
from schemas.instance_schema import Instance
from schemas.tgb_schema import ASource, IterationFormula, ReportOptions, TgbReport, TgbSchedule
from schemas.tour_schema import MomentSet
from services.betadist import fit_from_bound_and_moments
from services.heuristics import christofides, k_opt_improve, max_tour_heuristic
from services.tgb import iteration_formula, iterate_tgb
from services.tour import can_enumerate, run_enumeration, sample_moments, with_exact_mean_variance
from utils.logger_utils import setup_logger

logger = setup_logger(__name__)

STAGES = ["lower_bound", "upper_bound", "moments", "fit", "schedule", "compare"]


def _merge(left: Optional[Dict], right: Optional[Dict]) -> Dict:
    return {**(left or {}), **(right or {})}


class ReportState(TypedDict, total=False):
    """Shared state of the report pipeline; stages fill their own keys."""
    instance: Instance
    options: ReportOptions
    A: float
    A_source: ASource
    B: float
    B_enumerated: float
    moments: MomentSet
    fitted: GBParams
    schedule: TgbSchedule
    christofides_length: float
    kopt_length: float
    observed_ratio: float
    iteration_formula: IterationFormula
    relative_errors: Annotated[Dict[str, float], _merge]
    stage_errors: Annotated[Dict[str, str], _merge]
    warnings: Annotated[List[str], operator.add]


def _stage(name: str, requires: Sequence[str] = ()) -> Callable:
    """
    Wrap a node so failures land in `stage_errors` instead of aborting the run.

    A node whose inputs were not produced upstream records "skipped".
    """
    def decorator(fn: Callable[[ReportState], Dict]) -> Callable[[ReportState], Dict]:
        @wraps(fn)
        def node(state: ReportState) -> Dict:
            missing = [key for key in requires if state.get(key) is None]
            if missing:
                logger.info(f"Stage '{name}' skipped: missing {', '.join(missing)}")
                return {"stage_errors": {name: f"skipped: missing {', '.join(missing)}"}}
            logger.info(f"Stage '{name}' started")
            try:
                return fn(state)
            except Exception as exc:
                logger.error(f"Stage '{name}' failed: {type(exc).__name__}: {exc}")
                return {"stage_errors": {name: f"{type(exc).__name__}: {exc}"}}
        return node
    return decorator


# =========================
# Stages
# =========================

@_stage("lower_bound")
def lower_bound_node(state: ReportState) -> Dict:
    instance, options = state["instance"], state["options"]
    start = christofides(instance)
    improved = k_opt_improve(start.tour, instance, k=3)
    update = {"christofides_length": start.length, "kopt_length": improved.length}

    if can_enumerate(instance.n, options.allow_long, options.enumeration_cap):
        result = run_enumeration(
            instance, workers=options.workers, allow_long=options.allow_long, cap=options.enumeration_cap
        )
        update.update({
            "A": result.best.length,
            "A_source": ASource.ENUMERATION,
            "B_enumerated": result.worst.length,
            "moments": result.moments,
        })
    else:
        update.update({"A": min(start.length, improved.length), "A_source": ASource.HEURISTIC_BEST})
    return update


@_stage("upper_bound")
def upper_bound_node(state: ReportState) -> Dict:
    B = max_tour_heuristic(state["instance"])
    update = {"B": B}
    if state.get("B_enumerated") is not None:
        exact = state["B_enumerated"]
        update["relative_errors"] = {"B_heuristic_vs_enumerated": (B - exact) / exact}
    return update


@_stage("moments")
def moments_node(state: ReportState) -> Dict:
    if state.get("moments") is not None:
        return {"warnings": []}
    instance, options = state["instance"], state["options"]
    sampled = sample_moments(instance, sample_size=options.sample_size, seed=options.seed, workers=options.workers)
    # Mean and variance are known exactly; only the shape moments are estimated
    moments = with_exact_mean_variance(sampled, instance)
    return {
        "moments": moments,
        "warnings": ["skewness and kurtosis are sampled; mean and variance are exact"],
    }


@_stage("fit", requires=("A", "moments"))
def fit_node(state: ReportState) -> Dict:
    m = state["moments"]
    return {"fitted": fit_from_bound_and_moments(state["A"], m.mean, m.variance, m.skewness)}


@_stage("schedule", requires=("fitted",))
def schedule_node(state: ReportState) -> Dict:
    options = state["options"]
    schedule = iterate_tgb(state["fitted"], max_K=options.max_K, stop_epsilon=options.stop_epsilon)
    update = {"schedule": schedule}
    if schedule.first_window_clamped:
        update["warnings"] = ["1.5A exceeds B; the first truncation window covers the whole support"]
    return update


@_stage("compare", requires=("A", "kopt_length"))
def compare_node(state: ReportState) -> Dict:
    A, kopt = state["A"], state["kopt_length"]
    errors = {
        "christofides_vs_A": (state["christofides_length"] - A) / A,
        "kopt_vs_A": (kopt - A) / A,
    }
    if state.get("fitted") is not None and state.get("B") is not None:
        errors["B_fitted_vs_heuristic"] = (state["fitted"].B - state["B"]) / state["B"]
    if state.get("schedule") is not None:
        errors["mu_final_vs_kopt"] = (state["schedule"].final.mu_t - kopt) / kopt

    update = {"relative_errors": errors, "observed_ratio": kopt / A}
    target = state["options"].target_ratio
    if target is None and 1.0 < kopt / A < 1.5:
        target = kopt / A
    if target is not None and state.get("fitted") is not None:
        update["iteration_formula"] = iteration_formula(state["fitted"].alpha, target)
    return update


# =========================
# Graph
# =========================

def build_report_graph():
    """Compile the linear stage pipeline lower_bound -> ... -> compare."""
    graph = StateGraph(ReportState)
    graph.add_node("lower_bound", lower_bound_node)
    graph.add_node("upper_bound", upper_bound_node)
    graph.add_node("moments", moments_node)
    graph.add_node("fit", fit_node)
    graph.add_node("schedule", schedule_node)
    graph.add_node("compare", compare_node)

    graph.add_edge(START, STAGES[0])
    for current, following in zip(STAGES, STAGES[1:]):
        graph.add_edge(current, following)
    graph.add_edge(STAGES[-1], END)
    return graph.compile()


def tgb_report(instance: Instance, options: Optional[ReportOptions] = None) -> TgbReport:
    """
    End-to-end analysis of one instance.

    Stages: A (enumeration when small enough, else best of Christofides and
    3-opt), B from the max-tour heuristic, moments (enumerated, or sampled
    with exact mean and variance), bound-and-moments fit, truncation
    schedule, relative errors (estimate - reference) / reference. Failed
    stages are recorded in `stage_errors`; the report always returns.
    """
    options = options or ReportOptions()
    logger.info(f"Starting report for '{instance.name}' (n={instance.n})")
    state = build_report_graph().invoke({
        "instance": instance,
        "options": options,
        "relative_errors": {},
        "stage_errors": {},
        "warnings": [],
    })
    report = TgbReport(
        instance_name=instance.name,
        n=instance.n,
        **{key: state.get(key) for key in (
            "A_source", "A", "B", "B_enumerated", "moments", "fitted", "schedule",
            "christofides_length", "kopt_length", "observed_ratio", "iteration_formula",
        )},
        relative_errors=state.get("relative_errors", {}),
        stage_errors=state.get("stage_errors", {}),
        warnings=state.get("warnings", []),
    )
    logger.info(f"Report for '{instance.name}' done with {len(report.stage_errors)} stage errors")
    return report
