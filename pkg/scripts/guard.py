#!/usr/bin/env python
from __future__ import annotations

from collections.abc import Callable

from scripts.guards.boundary_guard import run as run_boundary_guard
from scripts.guards.pattern_guard import run as run_pattern_guard

Runner = Callable[[list[str]], int]

ROOTS: list[str] = ["src", "scripts", "tests"]


def run_guards(roots: list[str]) -> int:
    runners: list[Runner] = [run_pattern_guard, run_boundary_guard]
    failed = 0
    for runner in runners:
        rc = runner(roots)
        failed = failed or rc
    return failed


def main() -> int:
    return run_guards(ROOTS)


if __name__ == "__main__":
    raise SystemExit(main())
