"""Benchmark evaluation: generate, check, aggregate pass@k, emit the report.

The report is deterministic for a fixed (benchmark, checkpoints, n,
k_list, temperatures, seed) tuple: tasks are processed in sorted order and
serialization uses a fixed key layout.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

import jsonschema

from ..errors import DomainError
from .generate import GenerationPipeline, SampleRecord, generate_samples
from .passk import pass_at_k
from .tasks import BenchmarkTask, load_benchmark, run_checker

REPORT_SCHEMA_VERSION = 1

REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "config", "tasks", "metrics"],
    "properties": {
        "schema_version": {"const": REPORT_SCHEMA_VERSION},
        "config": {"type": "object"},
        "tasks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["task_id", "n", "c_syntax", "c_function",
                             "per_temperature"],
                "properties": {
                    "task_id": {"type": "string"},
                    "n": {"type": "integer", "minimum": 1},
                    "c_syntax": {"type": "integer", "minimum": 0},
                    "c_function": {"type": "integer", "minimum": 0},
                    "no_prompt": {"type": "boolean"},
                    "per_temperature": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "object",
                            "required": ["n", "c_syntax", "c_function"],
                        },
                    },
                },
            },
        },
        "metrics": {
            "type": "object",
            "required": ["syntax", "function"],
            "properties": {
                "syntax": {"type": "object",
                           "additionalProperties": {"type": "number"}},
                "function": {"type": "object",
                             "additionalProperties": {"type": "number"}},
            },
        },
    },
}


def check_sample(record: SampleRecord, task: BenchmarkTask,
                 work_dir=None) -> SampleRecord:
    """Run the syntax checker, then the functional checker only on success."""
    with tempfile.NamedTemporaryFile(
            "w", suffix=".v", dir=work_dir, delete=False,
            encoding="utf-8") as fh:
        fh.write(record.code)
        fh.write("\n")
        code_file = fh.name
    try:
        syntax = run_checker(task.syntax_cmd, code_file, task.timeout_s)
        record.syntax_pass = syntax.passed
        record.timed_out = syntax.timed_out
        record.function_pass = False
        if syntax.passed:
            function = run_checker(task.function_cmd, code_file,
                                   task.timeout_s)
            record.function_pass = function.passed
            record.timed_out = record.timed_out or function.timed_out
    finally:
        Path(code_file).unlink(missing_ok=True)
    return record


def evaluate(benchmark_dir, pipeline: GenerationPipeline, n: int,
             k_list: list[int], temperatures: list[float] | None = None,
             seed: int = 0) -> dict:
    """Evaluate every task and return the report document."""
    temperatures = temperatures or [0.2, 0.5, 0.8]
    for k in k_list:
        if not 1 <= k <= n:
            raise DomainError(f"k={k} outside [1, n={n}]")
    tasks = load_benchmark(benchmark_dir)

    task_rows = []
    records_by_task: dict[str, list[SampleRecord]] = {}
    for task in tasks:
        records = [check_sample(r, task)
                   for r in generate_samples(task, pipeline, n, temperatures,
                                             seed=seed)]
        records_by_task[task.task_id] = records
        per_temp = {}
        for t in temperatures:
            subset = [r for r in records if r.temperature == float(t)]
            per_temp[f"{t:g}"] = {
                "n": len(subset),
                "c_syntax": sum(r.syntax_pass for r in subset),
                "c_function": sum(r.function_pass for r in subset),
            }
        task_rows.append({
            "task_id": task.task_id,
            "n": n,
            "c_syntax": sum(r.syntax_pass for r in records),
            "c_function": sum(r.function_pass for r in records),
            "no_prompt": any(r.no_prompt for r in records),
            "per_temperature": per_temp,
        })

    metrics = {"syntax": {}, "function": {}}
    for k in sorted(k_list):
        key = f"pass@{k}"
        metrics["syntax"][key] = sum(
            pass_at_k(row["n"], row["c_syntax"], k)
            for row in task_rows) / len(task_rows)
        metrics["function"][key] = sum(
            pass_at_k(row["n"], row["c_function"], k)
            for row in task_rows) / len(task_rows)

    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": {
            "n": n,
            "k_list": sorted(k_list),
            "temperatures": [float(t) for t in temperatures],
            "seed": seed,
            "num_tasks": len(tasks),
        },
        "tasks": task_rows,
        "metrics": metrics,
    }
    validate_report(report)
    report["_samples"] = {tid: [r.to_dict() for r in recs]
                          for tid, recs in records_by_task.items()}
    return report


def validate_report(report: dict) -> None:
    jsonschema.validate({k: v for k, v in report.items()
                         if not k.startswith("_")}, REPORT_SCHEMA)


def report_json(report: dict) -> str:
    """Deterministic serialization, sample records excluded."""
    doc = {k: v for k, v in report.items() if not k.startswith("_")}
    return json.dumps(doc, indent=2, sort_keys=False)


def write_report(path, report: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report_json(report))
        fh.write("\n")


def write_samples_jsonl(path, report: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for records in report.get("_samples", {}).values():
            for record in records:
                fh.write(json.dumps(record))
                fh.write("\n")
