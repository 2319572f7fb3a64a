"""Untyped numeric libraries may only be imported by their adapter modules."""

from __future__ import annotations

import re
import sys
from pathlib import Path

from scripts.guards.pattern_guard import ROOT, iter_files

# library -> the one module allowed to import it
ADAPTERS: dict[str, str] = {
    "sympy": "polys.py",
    "flint": "intervals.py",
}

_IMPORT = re.compile(r"^\s*(?:import|from)\s+(\w+)")


def scan_file(path: Path) -> list[str]:
    if path.suffix != ".py" or "src" not in path.parts:
        return []
    errors: list[str] = []
    text = path.read_text(encoding="utf-8", errors="ignore")
    for i, line in enumerate(text.splitlines(), start=1):
        found = _IMPORT.match(line)
        if found is None:
            continue
        adapter = ADAPTERS.get(found.group(1))
        if adapter is not None and path.name != adapter:
            errors.append(f"{path}:{i}: {found.group(1)} imported outside {adapter}")
    return errors


def run(roots: list[str]) -> int:
    violations: list[str] = []
    for file_path in iter_files(ROOT / r for r in roots):
        violations.extend(scan_file(file_path))
    if violations:
        sys.stdout.write("Boundary guard failed:\n")
        sys.stdout.writelines(f"  {v}\n" for v in violations)
        return 2
    sys.stdout.write("Boundary guard OK\n")
    return 0
