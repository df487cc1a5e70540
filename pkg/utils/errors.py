class TspAnalysisError(Exception):
    """Base error for every failure the analysis services report to callers."""
    pass
