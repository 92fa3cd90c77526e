"""Worker process hosting one untrusted candidate function.

Launched as ``python -m mapforge_runner.worker <candidate-source-file>``.
Speaks a line protocol on stdin/stdout (UTF-8, LF):

    PING                  -> PONG
    RANGE <start> <count> -> exactly <count> lines, each "<c1> <c2>[ <c3>]"
                             or "ERR <message>"
    QUIT                  -> exits 0

The candidate's own stdout is redirected to /dev/null so stray prints cannot
corrupt the protocol stream.  Load failures exit with code 3 and the reason on
stderr.  This is crash containment, not a security boundary.
"""

from __future__ import annotations

import inspect
import operator
import os
import sys


def _coerce(value) -> list[int]:
    # candidate output contract: a tuple of non-negative integers, 2 or 3 wide
    if not isinstance(value, (tuple, list)):
        raise ValueError(f"expected a tuple of integers, got {type(value).__name__}")
    comps = []
    for v in value:
        try:
            iv = operator.index(v)
        except TypeError:
            if isinstance(v, float) and v.is_integer():
                iv = int(v)
            else:
                raise ValueError(f"non-integer component {v!r}") from None
        if iv < 0:
            raise ValueError(f"negative component {iv}")
        comps.append(iv)
    if len(comps) not in (2, 3):
        raise ValueError(f"expected 2 or 3 components, got {len(comps)}")
    return comps


def _load_candidate(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        source = fh.read()
    namespace: dict = {"__name__": "__candidate__"}
    code = compile(source, "<candidate>", "exec")
    exec(code, namespace)
    fn = namespace.get("map_to_coordinates")
    if not callable(fn):
        raise LookupError("map_to_coordinates not found")
    try:
        inspect.signature(fn).bind(0)
    except TypeError:
        raise LookupError("map_to_coordinates must accept one positional argument") from None
    return fn


def main(argv: list[str]) -> int:
    if len(argv) != 2:
        print("usage: worker <candidate-source-file>", file=sys.stderr)
        return 2

    # keep the real stdout for the protocol; candidate prints go nowhere
    proto = os.fdopen(os.dup(1), "w", encoding="utf-8", newline="\n")
    devnull = os.open(os.devnull, os.O_WRONLY)
    os.dup2(devnull, 1)
    os.close(devnull)
    sys.stdout = os.fdopen(1, "w", encoding="utf-8")

    try:
        fn = _load_candidate(argv[1])
    except BaseException as exc:  # noqa: BLE001 - candidate code may raise anything
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3

    for raw in sys.stdin:
        line = raw.strip()
        if line == "PING":
            proto.write("PONG\n")
            proto.flush()
        elif line == "QUIT":
            return 0
        elif line.startswith("RANGE "):
            try:
                _, start_s, count_s = line.split()
                start, count = int(start_s), int(count_s)
            except ValueError:
                print(f"malformed request: {line!r}", file=sys.stderr)
                return 4
            out = []
            for n in range(start, start + count):
                try:
                    comps = _coerce(fn(n))
                    out.append(" ".join(str(c) for c in comps))
                except BaseException as exc:  # noqa: BLE001
                    msg = f"{type(exc).__name__}: {exc}".replace("\n", " ").replace("\r", " ")
                    out.append(f"ERR {msg}")
            if out:
                proto.write("\n".join(out) + "\n")
            proto.flush()
        elif line:
            print(f"unknown command: {line!r}", file=sys.stderr)
            return 4
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
