"""Target-program execution over the exit-code / stdout-label protocol."""

import subprocess
import time
from dataclasses import dataclass

from ..errors import TargetError
from .config import LabelMode, TargetSpec


@dataclass(frozen=True)
class ExecutionResult:
    accepted: bool
    label: str | None
    wall_ms: float
    reason: str | None = None  # "timeout", "exit_code", "spawn" on rejection
    stderr: bytes = b""


def execute_target(spec: TargetSpec, input_path: str) -> ExecutionResult:
    """Run the target with {input} substituted.

    Exit code 0 means accepted. In stdout-label mode the first stdout line is
    the label. A timeout kills the process and rejects with reason "timeout".
    """
    argv = spec.argv_for(str(input_path))
    start = time.perf_counter()
    try:
        proc = subprocess.run(
            argv,
            capture_output=True,
            timeout=spec.timeout_ms / 1000.0,
        )
    except subprocess.TimeoutExpired as exc:
        wall = (time.perf_counter() - start) * 1000.0
        return ExecutionResult(False, None, wall, "timeout", exc.stderr or b"")
    except FileNotFoundError as exc:
        raise TargetError(f"cannot spawn target: {exc}") from None
    wall = (time.perf_counter() - start) * 1000.0
    if proc.returncode != 0:
        return ExecutionResult(False, None, wall, "exit_code", proc.stderr)
    label = None
    if spec.label_mode == LabelMode.STDOUT_LABEL:
        first_line = proc.stdout.decode("utf-8", errors="replace").splitlines()
        label = first_line[0].strip() if first_line else None
    return ExecutionResult(True, label, wall, None, proc.stderr)
