from __future__ import annotations

import re
import sys
from collections.abc import Iterable
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]

EXCLUDE_DIRNAMES = {".venv", "__pycache__", "node_modules", "examples"}
ALLOW_EXT = {".py"}
GUARD_FILES = frozenset({"guard.py", "pattern_guard.py", "boundary_guard.py"})

# Tokens are assembled so this file does not trip its own rules.
_SUP = "sup"
_ANY = "A" + "ny"
_MARKERS = ("TO" + "DO", "FIX" + "ME", "HA" + "CK", "X" * 3, "W" + "IP")

PATTERNS: dict[str, re.Pattern[str]] = {
    f"typing.{_ANY}": re.compile(rf"\btyping\.{_ANY}\b"),
    f"{_ANY} usage": re.compile(rf"(?<!\w){_ANY}(?!\w)"),
    "type: ignore": re.compile(r"type:\s*" + "ign" + "ore"),
    "typing.cast": re.compile(r"\btyping\.cast\b|\bfrom\s+typing\s+import\b[^#\n]*\bcast\b"),
    "marker comment": re.compile(r"\b(" + "|".join(_MARKERS) + r")\b"),
    "logging.basicConfig": re.compile(r"\blogging\.basic" + r"Config\s*\("),
    "noqa": re.compile(r"#\s*no" + r"qa\b"),
    "sup-helper": re.compile(rf"(?i)({_SUP}press|{_SUP}ress)"),
    "float literal in exact code": re.compile(r"\bFraction\(\s*\d+\.\d+"),
}


def iter_files(paths: Iterable[Path]) -> Iterable[Path]:
    for base in paths:
        if not base.exists():
            continue
        for path in sorted(base.rglob("*")):
            if not path.is_file() or any(p in EXCLUDE_DIRNAMES for p in path.parts):
                continue
            if path.suffix == ".pyi":
                yield path
            elif path.suffix in ALLOW_EXT and path.name not in GUARD_FILES:
                yield path


def _scan_patterns(path: Path, lines: list[str], *, in_tests: bool) -> list[str]:
    errors: list[str] = []
    for i, line in enumerate(lines, start=1):
        for name, pattern in PATTERNS.items():
            if name == "noqa" and in_tests:
                continue
            if pattern.search(line):
                errors.append(f"{path}:{i}: disallowed pattern: {name}")
    return errors


def _scan_prints(path: Path, lines: list[str]) -> list[str]:
    return [
        f"{path}:{i}: disallowed pattern: print() in library code (write to sys.stdout)"
        for i, line in enumerate(lines, start=1)
        if re.search(r"(^|\s)print\s*\(", line)
    ]


def scan_file(path: Path) -> list[str]:
    if path.suffix == ".pyi":
        return [f"{path}: disallowed file: .pyi stubs are not permitted"]
    try:
        text = path.read_text(encoding="utf-8", errors="ignore")
    except OSError as exc:  # pragma: no cover
        raise RuntimeError(f"failed to read {path}: {exc}") from exc
    in_tests = "tests" in path.parts
    lines = text.splitlines()
    errors = _scan_patterns(path, lines, in_tests=in_tests)
    if not in_tests:
        errors.extend(_scan_prints(path, lines))
    return errors


def run(roots: list[str]) -> int:
    violations: list[str] = []
    for file_path in iter_files(ROOT / r for r in roots):
        violations.extend(scan_file(file_path))
    if violations:
        sys.stdout.write("Pattern guard failed:\n")
        sys.stdout.writelines(f"  {v}\n" for v in violations)
        return 2
    sys.stdout.write("Pattern guard OK\n")
    return 0


def main() -> int:
    return run(["src", "scripts", "tests"])


if __name__ == "__main__":  # pragma: no cover - CLI entry
    raise SystemExit(main())
