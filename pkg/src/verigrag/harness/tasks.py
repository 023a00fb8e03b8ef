"""Benchmark task loading and checker execution.

A task directory holds ``description.txt``, ``check_syntax.cmd``,
``check_function.cmd`` (one-line command templates with a ``{code_file}``
placeholder; exit 0 means pass) and ``meta.json`` with the timeout. The
``VERIGRAG_CHECKER_PATH`` environment variable is prepended to PATH when
resolving checker executables.
"""

from __future__ import annotations

import json
import os
import shlex
import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path

from ..errors import CheckerUnavailable, NoTasksError

CHECKER_PATH_ENV = "VERIGRAG_CHECKER_PATH"


@dataclass(frozen=True)
class BenchmarkTask:
    task_id: str
    description: str
    syntax_cmd: str
    function_cmd: str
    timeout_s: int


@dataclass
class CheckOutcome:
    passed: bool
    timed_out: bool = False


def load_benchmark(bench_dir) -> list[BenchmarkTask]:
    root = Path(bench_dir)
    tasks = []
    if root.is_dir():
        for tdir in sorted(p for p in root.iterdir() if p.is_dir()):
            desc_file = tdir / "description.txt"
            syn_file = tdir / "check_syntax.cmd"
            fun_file = tdir / "check_function.cmd"
            if not (desc_file.exists() and syn_file.exists()
                    and fun_file.exists()):
                continue
            timeout = 30
            meta_file = tdir / "meta.json"
            if meta_file.exists():
                meta = json.loads(meta_file.read_text(encoding="utf-8"))
                timeout = int(meta.get("timeout_s", timeout))
            tasks.append(BenchmarkTask(
                task_id=tdir.name,
                description=desc_file.read_text(encoding="utf-8").strip(),
                syntax_cmd=syn_file.read_text(encoding="utf-8").strip(),
                function_cmd=fun_file.read_text(encoding="utf-8").strip(),
                timeout_s=timeout,
            ))
    if not tasks:
        raise NoTasksError(f"no benchmark tasks under {bench_dir}")
    return tasks


def _resolve_env() -> dict:
    env = dict(os.environ)
    extra = env.get(CHECKER_PATH_ENV)
    if extra:
        env["PATH"] = extra + os.pathsep + env.get("PATH", "")
    return env


def run_checker(cmd_template: str, code_file: str,
                timeout_s: int) -> CheckOutcome:
    """Run one checker command; exit 0 = pass, timeout = fail."""
    argv = shlex.split(cmd_template.format(code_file=code_file))
    if not argv:
        raise CheckerUnavailable("empty checker command")
    env = _resolve_env()
    if shutil.which(argv[0], path=env.get("PATH")) is None:
        raise CheckerUnavailable(f"checker executable {argv[0]!r} not found")
    try:
        proc = subprocess.run(argv, env=env, timeout=timeout_s,
                              stdout=subprocess.DEVNULL,
                              stderr=subprocess.DEVNULL)
    except subprocess.TimeoutExpired:
        return CheckOutcome(passed=False, timed_out=True)
    except OSError as exc:
        raise CheckerUnavailable(f"cannot run checker {argv[0]!r}: {exc}")
    return CheckOutcome(passed=proc.returncode == 0)
