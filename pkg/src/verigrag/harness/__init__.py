"""Generation and evaluation harness: sampling, checking, pass@k."""

from .evaluate import (REPORT_SCHEMA, check_sample, evaluate, report_json,
                       validate_report, write_report, write_samples_jsonl)
from .generate import GenerationPipeline, SampleRecord, generate_samples
from .passk import pass_at_k
from .tasks import (CHECKER_PATH_ENV, BenchmarkTask, CheckOutcome,
                    load_benchmark, run_checker)

__all__ = [
    "REPORT_SCHEMA", "check_sample", "evaluate", "report_json",
    "validate_report", "write_report", "write_samples_jsonl",
    "GenerationPipeline", "SampleRecord", "generate_samples", "pass_at_k",
    "BenchmarkTask", "CheckOutcome", "load_benchmark", "run_checker",
    "CHECKER_PATH_ENV",
]
