import os
import subprocess
import sys
import tempfile
import time

import pytest

from mapforge_runner import (
    EvalError,
    RunnerBusyError,
    RunnerDeadError,
    RunnerHandle,
    RunnerLimits,
    RunnerProtocolError,
    RunnerTimeoutError,
    RunnerVerdict,
    evaluate_source,
    spawn_runner,
)
from mapforge_runner.reference import load_source

FAST = RunnerLimits(timeout=10.0, batch_size=1000)

ODD_RAISER = """\
def map_to_coordinates(n):
    if n % 2 == 1:
        raise RuntimeError("odd index")
    return (n, 0)
"""


def test_spawn_answers_ping():
    handle = spawn_runner(load_source("triangular2d"), FAST)
    assert isinstance(handle, RunnerHandle)
    try:
        assert handle.state == "idle"
        assert handle.ping()
    finally:
        handle.shutdown()
    assert handle.proc.poll() is not None


def test_spawn_syntax_error_is_non_compiling():
    verdict = spawn_runner("def map_to_coordinates(n:\n    pass", FAST)
    assert isinstance(verdict, RunnerVerdict)
    assert verdict.status == "non_compiling"
    assert "SyntaxError" in verdict.detail


def test_spawn_wrong_name_is_non_compiling():
    verdict = spawn_runner("def map_coords(n):\n    return (n, 0)", FAST)
    assert isinstance(verdict, RunnerVerdict)
    assert verdict.status == "non_compiling"
    assert "map_to_coordinates not found" in verdict.detail


def test_spawn_empty_source():
    verdict = spawn_runner("   \n", FAST)
    assert verdict.status == "non_compiling"


def test_eval_range_frozen_values():
    # expected coordinates from the row-enumeration oracle
    with spawn_runner(load_source("triangular2d"), FAST) as handle:
        assert handle.eval_range(0, 3) == [(0, 0), (1, 0), (1, 1)]
        assert handle.eval_range(10, 1) == [(4, 0)]


def test_eval_range_per_index_failures():
    with spawn_runner(ODD_RAISER, FAST) as handle:
        records = handle.eval_range(0, 4)
    assert records[0] == (0, 0) and records[2] == (2, 0)
    assert isinstance(records[1], EvalError) and "odd index" in records[1].message
    assert isinstance(records[3], EvalError)


def test_eval_range_determinism():
    with spawn_runner(load_source("menger3d"), FAST) as handle:
        first = handle.eval_range(100, 200)
        second = handle.eval_range(100, 200)
    assert first == second


def test_eval_range_guards():
    handle = spawn_runner(load_source("gasket2d"), FAST)
    try:
        with pytest.raises(ValueError):
            handle.eval_range(0, FAST.batch_size + 1)
        with pytest.raises(ValueError):
            handle.eval_range(-1, 10)
    finally:
        handle.shutdown()
    with pytest.raises(RunnerDeadError):
        handle.eval_range(0, 1)


def test_infinite_loop_killed_within_timeout():
    src = "def map_to_coordinates(n):\n    while True:\n        pass"
    handle = spawn_runner(src, RunnerLimits(timeout=1.5, batch_size=100))
    assert isinstance(handle, RunnerHandle)
    t0 = time.monotonic()
    with pytest.raises(RunnerTimeoutError):
        handle.eval_range(0, 1)
    assert time.monotonic() - t0 < 5.0
    assert handle.state == "dead"
    assert handle.proc.poll() is not None  # killed and reaped, no zombie
    handle.shutdown()  # idempotent after a kill


def test_module_level_hang_times_out_at_spawn():
    src = "while True:\n    pass\ndef map_to_coordinates(n):\n    return (0, 0)"
    t0 = time.monotonic()
    verdict = spawn_runner(src, RunnerLimits(timeout=1.5, batch_size=100))
    assert isinstance(verdict, RunnerVerdict)
    assert verdict.status == "timeout"
    assert time.monotonic() - t0 < 5.0


def test_worker_sudden_death_is_contained():
    src = (
        "import os\n"
        "def map_to_coordinates(n):\n"
        "    if n == 5:\n"
        "        os._exit(9)\n"
        "    return (n, 0)\n"
    )
    outcome = evaluate_source(src, 20, FAST)
    assert isinstance(outcome, RunnerVerdict)
    assert outcome.status == "runtime_failure"


def test_candidate_prints_do_not_corrupt_protocol():
    src = (
        "def map_to_coordinates(n):\n"
        "    print('chatty candidate', n)\n"
        "    return (n, n)\n"
    )
    with spawn_runner(src, FAST) as handle:
        assert handle.eval_range(0, 3) == [(0, 0), (1, 1), (2, 2)]


def test_non_coordinate_returns_become_failures():
    src = (
        "def map_to_coordinates(n):\n"
        "    if n == 0:\n"
        "        return (1, 2)\n"
        "    if n == 1:\n"
        "        return 'xy'\n"
        "    if n == 2:\n"
        "        return (1.5, 2)\n"
        "    if n == 3:\n"
        "        return (-1, 0)\n"
        "    if n == 4:\n"
        "        return (1, 2, 3, 4)\n"
        "    return (2.0, 3.0)\n"  # integral floats coerce
    )
    with spawn_runner(src, FAST) as handle:
        records = handle.eval_range(0, 6)
    assert records[0] == (1, 2)
    assert all(isinstance(records[i], EvalError) for i in (1, 2, 3, 4))
    assert records[5] == (2, 3)


def test_probe_failure_at_index_zero_is_runtime_failure():
    src = "def map_to_coordinates(n):\n    raise ValueError('always')"
    outcome = evaluate_source(src, 10, FAST)
    assert isinstance(outcome, RunnerVerdict)
    assert outcome.status == "runtime_failure"
    assert "index 0" in outcome.detail


def test_shutdown_is_idempotent():
    handle = spawn_runner(load_source("carpet2d"), FAST)
    handle.shutdown()
    assert handle.state == "dead"
    handle.shutdown()
    assert handle.state == "dead"


def test_rogue_worker_output_is_protocol_violation():
    # drive the client against a fake worker that answers PONG then garbage
    fake = (
        "import sys\n"
        "for line in sys.stdin:\n"
        "    cmd = line.strip()\n"
        "    if cmd == 'PING':\n"
        "        print('PONG', flush=True)\n"
        "    elif cmd.startswith('RANGE'):\n"
        "        print('utter nonsense', flush=True)\n"
        "    elif cmd == 'QUIT':\n"
        "        break\n"
    )
    with tempfile.NamedTemporaryFile("w", suffix=".py", delete=False) as fh:
        fh.write(fake)
        fake_path = fh.name
    proc = subprocess.Popen(
        [sys.executable, fake_path],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    handle = RunnerHandle(proc, FAST, fake_path)
    try:
        handle.ping()
        with pytest.raises(RunnerProtocolError):
            handle.eval_range(0, 1)
        assert handle.state == "dead"
    finally:
        handle.shutdown()
        if os.path.exists(fake_path):
            os.unlink(fake_path)


def test_evaluate_source_batches_across_requests():
    records = evaluate_source(
        load_source("sierpinski3d"), 2500, RunnerLimits(timeout=30, batch_size=1000)
    )
    assert isinstance(records, list) and len(records) == 2500
    assert records[0] == (0, 0, 0)
    assert records[9] == (1, 2, 0)  # digits (1, 2): (1,0,0) + (0,1,0)*2
