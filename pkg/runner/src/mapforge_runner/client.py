"""Driver side of the candidate-runner protocol.

Spawns one worker process per candidate, drives PING/RANGE/QUIT over pipes,
and enforces a wall-clock deadline by killing the worker.  Every way a
candidate can misbehave (bad source, exceptions, hangs, garbage output,
sudden death) surfaces as either a per-index EvalError record or a
RunnerVerdict; nothing a candidate does can take the caller down.
"""

from __future__ import annotations

import os
import select
import subprocess
import sys
import tempfile
import threading
import time
from collections import deque
from dataclasses import dataclass

__all__ = [
    "RunnerLimits",
    "EvalError",
    "RunnerVerdict",
    "RunnerHandle",
    "RunnerBusyError",
    "RunnerDeadError",
    "RunnerTimeoutError",
    "RunnerProtocolError",
    "spawn_runner",
    "evaluate_source",
]

_NC_EXIT_CODE = 3  # worker: candidate failed to load
_STDERR_KEEP = 65536


@dataclass(frozen=True)
class RunnerLimits:
    """Wall-clock budget for one full validation and the per-request batch size."""

    timeout: float = 300.0
    batch_size: int = 100_000

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class EvalError:
    """Per-index failure: the candidate raised or returned a non-coordinate."""

    message: str


@dataclass(frozen=True)
class RunnerVerdict:
    """Whole-run failure: status is non_compiling, runtime_failure, or timeout."""

    status: str
    detail: str


class RunnerBusyError(RuntimeError):
    pass


class RunnerDeadError(RuntimeError):
    pass


class RunnerTimeoutError(RuntimeError):
    pass


class RunnerProtocolError(RuntimeError):
    pass


class _StderrDrain(threading.Thread):
    # keeps the worker from blocking on a full stderr pipe; retains the tail
    def __init__(self, pipe):
        super().__init__(daemon=True)
        self.pipe = pipe
        self.chunks: deque = deque()
        self.size = 0
        self.start()

    def run(self) -> None:
        try:
            while True:
                chunk = self.pipe.read(8192)
                if not chunk:
                    return
                self.chunks.append(chunk)
                self.size += len(chunk)
                while self.size > _STDERR_KEEP and len(self.chunks) > 1:
                    self.size -= len(self.chunks.popleft())
        except (OSError, ValueError):
            return

    def text(self) -> str:
        return b"".join(self.chunks).decode("utf-8", "replace").strip()


class RunnerHandle:
    """One live worker; protocol state is idle, busy, or dead."""

    def __init__(self, proc: subprocess.Popen, limits: RunnerLimits, source_path: str):
        self.proc = proc
        self.limits = limits
        self.state = "idle"
        self._source_path = source_path
        self._stdout_fd = proc.stdout.fileno()
        os.set_blocking(self._stdout_fd, False)
        self._buf = bytearray()
        self._newlines = 0
        self._stderr = _StderrDrain(proc.stderr)

    @property
    def pid(self) -> int:
        return self.proc.pid

    def __enter__(self) -> "RunnerHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()

    # ------------------------------------------------------------- plumbing

    def _send(self, line: str) -> None:
        try:
            self.proc.stdin.write((line + "\n").encode("utf-8"))
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._kill()
            raise RunnerDeadError(f"worker died: {self._stderr.text()}") from None

    def _fill(self, deadline: float) -> None:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            self._kill()
            raise RunnerTimeoutError(f"wall-clock limit of {self.limits.timeout}s exceeded")
        ready, _, _ = select.select([self._stdout_fd], [], [], min(remaining, 0.5))
        if not ready:
            return
        try:
            chunk = os.read(self._stdout_fd, 1 << 16)
        except BlockingIOError:
            return
        if not chunk:
            self._kill()
            raise RunnerDeadError(f"worker closed its output: {self._stderr.text()}")
        self._buf += chunk
        self._newlines += chunk.count(b"\n")

    def _read_lines(self, n: int, deadline: float) -> list[str]:
        while self._newlines < n:
            self._fill(deadline)
        out = []
        buf = self._buf
        idx = 0
        for _ in range(n):
            end = buf.find(b"\n", idx)
            out.append(buf[idx:end].decode("utf-8", "replace"))
            idx = end + 1
        del buf[:idx]
        self._newlines -= n
        return out

    def _kill(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            pass
        self.state = "dead"
        self._cleanup()

    def _cleanup(self) -> None:
        for pipe in (self.proc.stdin, self.proc.stdout):
            try:
                pipe.close()
            except OSError:
                pass
        try:
            os.unlink(self._source_path)
        except OSError:
            pass

    # ------------------------------------------------------------ protocol

    def eval_range(self, start: int, count: int, deadline: float | None = None) -> list:
        """Exactly `count` records in index order; per-index failures become
        EvalError records, overruns kill the worker."""
        if self.state == "dead":
            raise RunnerDeadError("handle is dead")
        if self.state == "busy":
            raise RunnerBusyError("a request is already in flight")
        if count < 0 or count > self.limits.batch_size:
            raise ValueError(f"count must be in [0, {self.limits.batch_size}], got {count}")
        if start < 0:
            raise ValueError(f"start must be >= 0, got {start}")
        if deadline is None:
            deadline = time.monotonic() + self.limits.timeout
        self.state = "busy"
        try:
            self._send(f"RANGE {start} {count}")
            lines = self._read_lines(count, deadline)
        except Exception:
            self.state = "dead"
            raise
        self.state = "idle"
        records: list = []
        for line in lines:
            if line.startswith("ERR ") or line == "ERR":
                records.append(EvalError(line[4:]))
                continue
            parts = line.split(" ")
            if len(parts) in (2, 3):
                try:
                    coord = tuple(int(p) for p in parts)
                except ValueError:
                    coord = None
                if coord is not None and all(c >= 0 for c in coord):
                    records.append(coord)
                    continue
            self._kill()
            raise RunnerProtocolError(f"malformed worker output: {line!r}")
        return records

    def ping(self, deadline: float | None = None) -> bool:
        if self.state != "idle":
            raise RunnerDeadError("handle is not idle")
        if deadline is None:
            deadline = time.monotonic() + self.limits.timeout
        self._send("PING")
        line = self._read_lines(1, deadline)[0]
        if line != "PONG":
            self._kill()
            raise RunnerProtocolError(f"expected PONG, got {line!r}")
        return True

    def shutdown(self) -> None:
        """QUIT if alive, then reap; idempotent, never raises."""
        if self.state == "dead" and self.proc.poll() is not None:
            return
        if self.proc.poll() is None:
            try:
                self.proc.stdin.write(b"QUIT\n")
                self.proc.stdin.flush()
            except (BrokenPipeError, OSError):
                pass
            try:
                self.proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                pass
        self._kill()


def spawn_runner(source: str, limits: RunnerLimits | None = None):
    """Start a worker on the candidate source.

    Returns a live RunnerHandle (PING answered), or a RunnerVerdict:
    non_compiling when the source fails to load, timeout when it hangs before
    the handshake.  OS-level spawn failures raise OSError.
    """
    if not source.strip():
        return RunnerVerdict("non_compiling", "empty candidate source")
    limits = limits or RunnerLimits()
    fd, path = tempfile.mkstemp(suffix=".py", prefix="candidate_")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(source)
    try:
        proc = subprocess.Popen(
            [sys.executable, "-m", "mapforge_runner.worker", path],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
        )
    except OSError:
        os.unlink(path)
        raise
    handle = RunnerHandle(proc, limits, path)
    try:
        handle.ping()
    except RunnerTimeoutError:
        return RunnerVerdict("timeout", "candidate hung before answering PING")
    except (RunnerDeadError, RunnerProtocolError):
        code = proc.poll()
        detail = handle._stderr.text() or f"worker exited with code {code}"
        return RunnerVerdict("non_compiling", detail)
    return handle


def evaluate_source(source: str, count: int, limits: RunnerLimits | None = None):
    """Evaluate a candidate over indices [0, count).

    Returns the full record list (coordinate tuples and EvalError entries), or
    a RunnerVerdict for whole-run failures.  The run is runtime_failure when
    the probe at index 0 fails or the worker dies mid-run; wall-clock overrun
    is timeout.  One deadline covers the whole validation.
    """
    limits = limits or RunnerLimits()
    spawned = spawn_runner(source, limits)
    if isinstance(spawned, RunnerVerdict):
        return spawned
    handle = spawned
    deadline = time.monotonic() + limits.timeout
    try:
        probe = handle.eval_range(0, 1, deadline=deadline)
        if probe and isinstance(probe[0], EvalError):
            return RunnerVerdict(
                "runtime_failure", f"candidate fails at index 0: {probe[0].message}"
            )
        records: list = []
        pos = 0
        while pos < count:
            step = min(limits.batch_size, count - pos)
            records.extend(handle.eval_range(pos, step, deadline=deadline))
            pos += step
        return records
    except RunnerTimeoutError as exc:
        return RunnerVerdict("timeout", str(exc))
    except (RunnerDeadError, RunnerProtocolError) as exc:
        return RunnerVerdict("runtime_failure", str(exc))
    finally:
        handle.shutdown()
