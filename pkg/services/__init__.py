from services.experiment_service import ExperimentService, RunOutcome, experiment_service
from services.report_formatter import ReportFormatter, report_formatter
from services.run_registry import RunRegistry

__all__ = [
    "experiment_service",
    "ExperimentService",
    "RunOutcome",
    "report_formatter",
    "ReportFormatter",
    "RunRegistry",
]
