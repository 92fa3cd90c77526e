"""mapforge-runner: isolated execution of untrusted mapping candidates."""

from mapforge_runner.client import (
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

__version__ = "0.1.0"
