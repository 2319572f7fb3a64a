"""Batch command-line surface.

Every run prints one report: the resolved configuration followed by the result
(or a structured error). Exit codes: 0 success, 1 domain or resource error,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Final, Literal, NoReturn, TypeGuard

from .bounds import C3Variant
from .config import (
    FieldConfig,
    OutputFormat,
    Settings,
    is_json_list,
    is_json_object,
    load_field_config,
    rational_field_config,
)
from .constants import CertifiedUpper, ProblemData, kappa_report, problem_data
from .decomposition import A1Cache, build_a1, enumerate_box
from .errors import InternalConsistencyError, ThueMahlerError, UsageError, body_for
from .forms_equivalence import (
    BinaryForm,
    describe_form,
    equivalent_twists,
    exceptional_twists,
    ns_inequality_solve,
    s_equivalence_test,
    twist_search,
)
from .intervals import RealBall, log10_of
from .logging import setup_logging
from .number_field import FieldElement, NumberField
from .places import product_formula_check
from .s_arithmetic import SContext, delta_k, s_context, s_norm
from .sunit_solver import UnitEquation, solve_unit_equation
from .thue_mahler import (
    FamilySolution,
    PairReport,
    Strategy,
    canonicalize,
    classify_subsums,
    partition_classes,
    solve_classic,
    solve_family,
    solve_reduced,
    verify_family_solution,
)

_logger = logging.getLogger(__name__)

Command = Literal[
    "field",
    "constants",
    "enumerate-box",
    "a1",
    "sunit-solve",
    "solve-family",
    "solve-classic",
    "classify-subsums",
    "canonicalize",
    "twist-search",
    "equiv",
    "ns-solve",
    "delta-k",
    "solve-reduced",
    "exceptional-twists",
    "equivalent-twists",
]

COMMANDS: Final[tuple[Command, ...]] = (
    "field",
    "constants",
    "enumerate-box",
    "a1",
    "sunit-solve",
    "solve-family",
    "solve-classic",
    "classify-subsums",
    "canonicalize",
    "twist-search",
    "equiv",
    "ns-solve",
    "delta-k",
    "solve-reduced",
    "exceptional-twists",
    "equivalent-twists",
)

# Flags that must be present for a command, by Invocation attribute.
REQUIRED: Final[dict[Command, tuple[str, ...]]] = {
    "enumerate-box": ("height",),
    "delta-k": ("height",),
    "sunit-solve": ("deltas",),
    "solve-classic": ("alphas",),
    "classify-subsums": ("solution",),
    "canonicalize": ("solution",),
    "twist-search": ("config", "form"),
    "equiv": ("form", "form_g"),
    "ns-solve": ("form",),
    "equivalent-twists": ("eps",),
}

FAMILY_HEADER: Final[tuple[str, ...]] = ("x", "y", "z", "eps1", "eps2", "eps3", "eps", "class_id")


# -- invocation -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Invocation:
    command: Command
    config: Path | None = None
    primes: tuple[str, ...] = ()
    mu: str = "1"
    alphas: tuple[str, ...] = ("1", "1", "1")
    box: int = 1
    xy_box: int = 1
    precision: int = 128
    output_format: OutputFormat = "json"
    out: Path | None = None
    cap: int = 100_000_000
    deltas: tuple[str, ...] = ()
    seed: int = 0
    workers: int = 1
    height: Fraction | None = None
    samples: int = 0
    m: int | None = None
    k: int = 1
    form: tuple[str, ...] = ()
    form_g: tuple[str, ...] = ()
    eps: tuple[str, ...] = ()
    solution: tuple[str, ...] = ()
    pivot: int = 2
    strategy: Strategy = "both"
    coprime: bool = False
    nontrivial: bool = False
    normalized: bool = False
    variant: C3Variant = "standard"
    literal_pi: bool = False

    def describe(self: Invocation) -> dict[str, object]:
        """The resolved configuration echoed into every report.

        Worker count and output location do not change results and are left out.
        """
        return {
            "command": self.command,
            "config": None if self.config is None else str(self.config),
            "primes": list(self.primes),
            "mu": self.mu,
            "alphas": list(self.alphas),
            "box": self.box,
            "xy_box": self.xy_box,
            "precision": self.precision,
            "cap": str(self.cap),
            "deltas": list(self.deltas),
            "seed": self.seed,
            "height": None if self.height is None else str(self.height),
            "samples": self.samples,
            "m": None if self.m is None else str(self.m),
            "k": str(self.k),
            "form": list(self.form),
            "form_g": list(self.form_g),
            "eps": list(self.eps),
            "solution": list(self.solution),
            "pivot": self.pivot,
            "strategy": self.strategy,
            "coprime": self.coprime,
            "nontrivial": self.nontrivial,
            "normalized": self.normalized,
            "variant": self.variant,
            "literal_pi": self.literal_pi,
        }


class _Parser(argparse.ArgumentParser):
    def error(self: _Parser, message: str) -> NoReturn:
        raise UsageError(message)


class _Namespace(argparse.Namespace):
    command: str
    config: str | None
    primes: str | None
    mu: str | None
    alphas: str | None
    box: int | None
    xy_box: int | None
    precision: int | None
    format: str | None
    out: str | None
    cap: int | None
    deltas: str | None
    seed: int | None
    workers: int | None
    height: str | None
    samples: int | None
    m: int | None
    k: int | None
    form: str | None
    form_g: str | None
    eps: str | None
    solution: str | None
    pivot: int | None
    strategy: str | None
    variant: str | None
    coprime: bool
    nontrivial: bool
    normalized: bool
    literal_pi: bool


def _build_parser() -> _Parser:
    parser = _Parser(prog="thue-mahler", description="S-unit arithmetic and Thue-Mahler solvers")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config")
    for name in ("--primes", "--mu", "--alphas", "--deltas", "--height", "--out"):
        parser.add_argument(name)
    for name in ("--form", "--form-g", "--eps", "--solution"):
        parser.add_argument(name)
    for name in ("--box", "--xy-box", "--precision", "--cap", "--seed", "--workers"):
        parser.add_argument(name, type=int)
    for name in ("--samples", "--m", "--k", "--pivot"):
        parser.add_argument(name, type=int)
    parser.add_argument("--format", choices=("json", "csv"))
    parser.add_argument("--strategy", choices=("direct", "factored", "both"))
    parser.add_argument("--variant", choices=("standard", "alt"))
    parser.add_argument("--coprime", action="store_true")
    parser.add_argument("--nontrivial", action="store_true")
    parser.add_argument("--normalized", action="store_true")
    parser.add_argument("--literal-pi", action="store_true")
    return parser


USAGE: Final[str] = _build_parser().format_usage()


def _csv_list(raw: str | None) -> tuple[str, ...]:
    if raw is None:
        return ()
    return tuple(p.strip() for p in raw.split(",") if p.strip() != "")


def _non_negative(name: str, value: int | None, default: int) -> int:
    if value is None:
        return default
    if value < 0:
        raise UsageError(f"--{name} must be non-negative, got {value}")
    return value


def _fraction_flag(name: str, raw: str | None) -> Fraction | None:
    if raw is None:
        return None
    try:
        return Fraction(raw.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"--{name}: not a rational {raw!r}") from exc


def _pick_command(raw: str) -> Command:
    for name in COMMANDS:
        if name == raw:
            return name
    raise UsageError(f"unknown command {raw!r}")


def _pick_strategy(raw: str | None) -> Strategy:
    if raw == "direct":
        return "direct"
    return "factored" if raw == "factored" else "both"


def _given(ns: _Namespace) -> frozenset[str]:
    flags: dict[str, str | None] = {
        "config": ns.config,
        "deltas": ns.deltas,
        "alphas": ns.alphas,
        "solution": ns.solution,
        "form": ns.form,
        "form_g": ns.form_g,
        "eps": ns.eps,
        "height": ns.height,
    }
    return frozenset(name for name, raw in flags.items() if raw is not None)


def parse_invocation(argv: Sequence[str], settings: Settings | None = None) -> Invocation:
    env = settings if settings is not None else Settings.from_env()
    ns = _build_parser().parse_args(list(argv), namespace=_Namespace())
    command = _pick_command(ns.command)
    given = _given(ns)
    missing = [f"--{n.replace('_', '-')}" for n in REQUIRED.get(command, ()) if n not in given]
    if missing:
        raise UsageError(f"{command} requires {', '.join(missing)}")
    precision = ns.precision if ns.precision is not None else env.precision
    if precision < 32:
        raise UsageError(f"--precision must be at least 32 bits, got {precision}")
    fmt = ns.format if ns.format is not None else env.output_format
    return Invocation(
        command=command,
        config=None if ns.config is None else Path(ns.config),
        primes=_csv_list(ns.primes),
        mu=ns.mu if ns.mu is not None else "1",
        alphas=_csv_list(ns.alphas) or ("1", "1", "1"),
        box=_non_negative("box", ns.box, 1),
        xy_box=_non_negative("xy-box", ns.xy_box, 1),
        precision=precision,
        output_format="csv" if fmt == "csv" else "json",
        out=None if ns.out is None else Path(ns.out),
        cap=_non_negative("cap", ns.cap, env.cap),
        deltas=_csv_list(ns.deltas),
        seed=ns.seed if ns.seed is not None else 0,
        workers=max(1, ns.workers if ns.workers is not None else env.workers),
        height=_fraction_flag("height", ns.height),
        samples=_non_negative("samples", ns.samples, 0),
        m=ns.m,
        k=ns.k if ns.k is not None else 1,
        form=_csv_list(ns.form),
        form_g=_csv_list(ns.form_g),
        eps=_csv_list(ns.eps),
        solution=_csv_list(ns.solution),
        pivot=ns.pivot if ns.pivot is not None else 2,
        strategy=_pick_strategy(ns.strategy),
        coprime=ns.coprime,
        nontrivial=ns.nontrivial,
        normalized=ns.normalized,
        variant="alt" if ns.variant == "alt" else "standard",
        literal_pi=ns.literal_pi,
    )


# -- session: lazily built field, S and problem --------------------------------------------------


def parse_element(fld: NumberField, text: str) -> FieldElement:
    """``"3/2"`` is a rational; ``"c0:c1:..."`` lists power-basis coordinates."""
    parts = text.strip().split(":")
    if len(parts) > fld.degree:
        raise UsageError(f"{text!r} has more than {fld.degree} coordinates")
    try:
        coords = [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a field element: {text!r}") from exc
    return fld.element(coords + [Fraction(0)] * (fld.degree - len(coords)))


class _Session:
    def __init__(self: _Session, inv: Invocation) -> None:
        self.inv = inv

    @cached_property
    def field_config(self: _Session) -> FieldConfig:
        if self.inv.config is None:
            return rational_field_config()
        return load_field_config(self.inv.config)

    @cached_property
    def field(self: _Session) -> NumberField:
        cfg = self.field_config
        return NumberField(cfg.min_poly, cfg.basis)

    @cached_property
    def ctx(self: _Session) -> SContext:
        return s_context(
            self.field,
            self.inv.primes,
            config=self.field_config,
            precision=self.inv.precision,
            cap=self.inv.cap,
        )

    @cached_property
    def problem(self: _Session) -> ProblemData:
        alphas = self.elements(self.inv.alphas)
        if len(alphas) != 3:
            raise UsageError(f"the family needs three alphas, got {len(alphas)}")
        mu = self.element(self.inv.mu)
        return problem_data(self.ctx, mu, (alphas[0], alphas[1], alphas[2]))

    def a1_cache(self: _Session) -> A1Cache:
        inv = self.inv
        return A1Cache(self.problem, precision=inv.precision, cap=inv.cap, workers=inv.workers)

    def element(self: _Session, text: str) -> FieldElement:
        return parse_element(self.field, text)

    def elements(self: _Session, texts: Sequence[str]) -> list[FieldElement]:
        return [self.element(t) for t in texts]

    def form(self: _Session, texts: Sequence[str], *, with_root: bool) -> BinaryForm:
        try:
            coeffs = [Fraction(t) for t in texts]
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"form coefficients must be rationals: {list(texts)}") from exc
        return BinaryForm.of(coeffs, self.field.alpha() if with_root else None)

    def family_solution(self: _Session) -> FamilySolution:
        if len(self.inv.solution) != 7:
            raise UsageError("--solution takes x,y,z,eps1,eps2,eps3,eps")
        return verify_family_solution(self.problem, self.elements(self.inv.solution))


# -- command handlers -----------------------------------------------------------------------


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: list[tuple[str, ...]]


Outcome = tuple[dict[str, object], Table | None]


def _self_check(s: _Session) -> dict[str, object]:
    """Seeded product-formula and S-norm checks on random integral elements."""
    rng = random.Random(s.inv.seed)
    fld = s.field
    passed = 0
    checked = 0
    for _ in range(s.inv.samples):
        a = fld.from_basis([rng.randint(-10, 10) for _ in range(fld.degree)])
        if a.is_zero():
            continue
        checked += 1
        if product_formula_check(a, precision=s.inv.precision).passed:
            passed += 1
        s_norm(a, s.ctx)
    return {"samples": checked, "product_formula_passed": passed, "ns_checked": checked}


def _run_field(s: _Session) -> Outcome:
    out: dict[str, object] = {
        "field": s.field.describe(),
        "theta": s.field.theta(s.inv.precision),
        "s_context": s.ctx.describe(),
    }
    if s.inv.samples > 0:
        out["self_check"] = _self_check(s)
    return out, None


def _run_constants(s: _Session) -> Outcome:
    inv = s.inv
    report = kappa_report(
        s.problem,
        variant=inv.variant,
        literal_pi_exponent=inv.literal_pi,
        precision=inv.precision,
        cap=inv.cap,
    )
    return {"problem": s.problem.describe(), **report.describe()}, None


def _height(inv: Invocation) -> Fraction:
    if inv.height is None:
        raise UsageError("--height is required")
    return inv.height


def _run_enumerate_box(s: _Session) -> Outcome:
    inv = s.inv
    box = enumerate_box(
        s.field, _height(inv), precision=inv.precision, cap=inv.cap, workers=inv.workers
    )
    return box.describe(), None


def _run_a1(s: _Session) -> Outcome:
    inv = s.inv
    m = inv.m if inv.m is not None else s.problem.m
    a1 = build_a1(m, s.problem, precision=inv.precision, cap=inv.cap, workers=inv.workers)
    return a1.describe(), None


def _run_delta_k(s: _Session) -> Outcome:
    inv = s.inv
    found = delta_k(
        s.field, _height(inv), precision=inv.precision, cap=inv.cap, workers=inv.workers
    )
    return found.describe(), None


def _run_sunit_solve(s: _Session) -> Outcome:
    inv = s.inv
    eq = UnitEquation(tuple(s.elements(inv.deltas)), s.ctx, inv.box)
    report = solve_unit_equation(eq, workers=inv.workers, cap=inv.cap)
    header = tuple(f"x{i + 1}" for i in range(len(inv.deltas)))
    rows = [tuple(str(v) for v in sol.values) for sol in report.solutions]
    return report.describe(), Table(header, rows)


def _family_rows(sols: Sequence[FamilySolution], ids: Sequence[int]) -> list[tuple[str, ...]]:
    return [
        (*(str(c) for c in sol.seven()), str(cid)) for sol, cid in zip(sols, ids, strict=True)
    ]


def _run_solve_family(s: _Session) -> Outcome:
    inv = s.inv
    search = solve_family(
        s.problem,
        inv.xy_box,
        inv.box,
        strategy=inv.strategy,
        normalized=inv.normalized,
        a1=s.a1_cache(),
        workers=inv.workers,
        cap=inv.cap,
    )
    classes = partition_classes(search.solutions)
    result = {**search.describe(), "classes": classes.describe()}
    return result, Table(FAMILY_HEADER, _family_rows(search.solutions, classes.class_ids))


def _pair_table(report: PairReport) -> Table:
    twisted = any(p.twist is not None for p in report.solutions)
    header: tuple[str, ...] = ("x", "y", "eps1", "eps2") if twisted else ("x", "y")
    header = (*header, "eps", "class_id")
    rows: list[tuple[str, ...]] = []
    for sol, cid in zip(report.solutions, report.class_ids, strict=True):
        eps = "" if sol.eps is None else str(sol.eps)
        twist = () if sol.twist is None else (str(sol.twist[0]), str(sol.twist[1]))
        rows.append((str(sol.x), str(sol.y), *twist, eps, str(cid)))
    return Table(header, rows)


def _run_solve_classic(s: _Session) -> Outcome:
    inv = s.inv
    report = solve_classic(
        s.elements(inv.alphas),
        s.element(inv.mu),
        s.ctx,
        inv.xy_box,
        coprime=inv.coprime,
        cap=inv.cap,
    )
    return report.describe(), _pair_table(report)


def _run_solve_reduced(s: _Session) -> Outcome:
    report = solve_reduced(s.ctx, s.inv.xy_box, s.inv.box, cap=s.inv.cap)
    return report.describe(), _pair_table(report)


def _run_classify(s: _Session) -> Outcome:
    sol = s.family_solution()
    return classify_subsums(sol, s.inv.pivot).describe(), None


def _run_canonicalize(s: _Session) -> Outcome:
    sol = s.family_solution()
    rep = canonicalize(sol, s.a1_cache())
    rows = [(*(str(c) for c in rep.solution.seven()), "0")]
    return rep.describe(), Table(FAMILY_HEADER, rows)


def _run_twist_search(s: _Session) -> Outcome:
    inv = s.inv
    f = s.form(inv.form, with_root=True)
    report = twist_search(f, inv.k, s.ctx, inv.box, inv.xy_box, workers=inv.workers, cap=inv.cap)
    rows = [
        (str(t.x), str(t.y), str(t.eps), str(t.sign), ";".join(map(str, t.exponents)))
        + (str(t.class_id),)
        for t in report.solutions
    ]
    header = ("x", "y", "eps", "sign", "z", "class_id")
    return {"form": describe_form(f), **report.describe()}, Table(header, rows)


def _run_equiv(s: _Session) -> Outcome:
    inv = s.inv
    f = s.form(inv.form, with_root=False)
    g = s.form(inv.form_g, with_root=False)
    result = s_equivalence_test(f, g, s.ctx, inv.box, cap=inv.cap)
    return {"f": describe_form(f), "g": describe_form(g), **result.describe()}, None


def _run_ns_solve(s: _Session) -> Outcome:
    inv = s.inv
    f = s.form(inv.form, with_root=False)
    m = inv.m if inv.m is not None else 1
    report = ns_inequality_solve(
        f, m, s.ctx, inv.xy_box, nontrivial_only=inv.nontrivial, cap=inv.cap
    )
    return report.describe(), _pair_table(report)


def _run_exceptional(s: _Session) -> Outcome:
    inv = s.inv
    found = exceptional_twists(s.elements(inv.alphas), s.ctx, inv.box, inv.xy_box, cap=inv.cap)
    return {"count": len(found), "twists": [t.to_json() for t in found]}, None


def _run_equivalent_twists(s: _Session) -> Outcome:
    inv = s.inv
    found = equivalent_twists(
        s.elements(inv.eps), s.elements(inv.alphas), s.ctx, inv.box, cap=inv.cap
    )
    return {"count": len(found), "matches": [t.to_json() for t in found]}, None


_HANDLERS: Final[dict[Command, Callable[[_Session], Outcome]]] = {
    "field": _run_field,
    "constants": _run_constants,
    "enumerate-box": _run_enumerate_box,
    "a1": _run_a1,
    "sunit-solve": _run_sunit_solve,
    "solve-family": _run_solve_family,
    "solve-classic": _run_solve_classic,
    "classify-subsums": _run_classify,
    "canonicalize": _run_canonicalize,
    "twist-search": _run_twist_search,
    "equiv": _run_equiv,
    "ns-solve": _run_ns_solve,
    "delta-k": _run_delta_k,
    "solve-reduced": _run_solve_reduced,
    "exceptional-twists": _run_exceptional,
    "equivalent-twists": _run_equivalent_twists,
}


# -- reports --------------------------------------------------------------------------------


@dataclass(frozen=True)
class Report:
    command: Command
    config: dict[str, object]
    result: dict[str, object] | None = None
    table: Table | None = None
    error: dict[str, str | None] | None = None


def execute(inv: Invocation) -> tuple[Report, int]:
    header = inv.describe()
    try:
        result, table = _HANDLERS[inv.command](_Session(inv))
    except UsageError as exc:
        _logger.warning("usage error in %s: %s", inv.command, exc)
        return Report(inv.command, header, error=body_for(exc)), 2
    except ThueMahlerError as exc:
        _logger.error("%s failed: %s (%s)", inv.command, exc, exc.kind)
        return Report(inv.command, header, error=body_for(exc)), 1
    return Report(inv.command, header, result, table), 0


def _ball_json(ball: RealBall) -> dict[str, str | None]:
    top = ball.upper()
    return {"upper": str(top), "log10": f"{log10_of(top):.6f}" if top > 0 else None}


def _is_tuple(value: object) -> TypeGuard[tuple[object, ...]]:
    return isinstance(value, tuple)


def to_plain(value: object) -> object:
    """JSON-ready copy: exact numbers as strings, balls as upper bound plus log10."""
    if value is None or isinstance(value, bool | int | float | str):
        return value
    if isinstance(value, RealBall):
        return _ball_json(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, FieldElement):
        return value.to_json()
    if isinstance(value, CertifiedUpper):
        return to_plain(value.to_json())
    if is_json_object(value):
        return {str(k): to_plain(v) for k, v in value.items()}
    if is_json_list(value) or _is_tuple(value):
        return [to_plain(v) for v in value]
    raise InternalConsistencyError(f"cannot render {type(value).__name__}")


def _csv_bytes(report: Report) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if report.table is not None:
        writer.writerow(report.table.header)
        writer.writerows(report.table.rows)
    else:
        writer.writerow(("key", "value"))
        for key, value in sorted((report.result or {}).items()):
            writer.writerow((key, json.dumps(to_plain(value), sort_keys=True)))
    return buf.getvalue().encode("utf-8")


def _json_bytes(doc: dict[str, object]) -> bytes:
    return (json.dumps(to_plain(doc), sort_keys=True, indent=2) + "\n").encode("utf-8")


def render_report(report: Report, fmt: OutputFormat = "json") -> bytes:
    """Errors always render as JSON so callers can read ``error.kind``."""
    if fmt == "csv" and report.error is None:
        return _csv_bytes(report)
    doc: dict[str, object] = {"command": report.command, "config": report.config}
    if report.error is not None:
        doc["error"] = report.error
    else:
        doc["result"] = report.result
    return _json_bytes(doc)


@dataclass(frozen=True)
class RunOutput:
    payload: bytes
    code: int
    out: Path | None = None
    parsed: bool = True


def run(argv: Sequence[str], settings: Settings | None = None) -> RunOutput:
    """Parse, execute and render. Unparseable arguments give an error document with code 2."""
    try:
        inv = parse_invocation(argv, settings)
    except UsageError as exc:
        doc: dict[str, object] = {"error": body_for(exc), "usage": USAGE.strip()}
        return RunOutput(_json_bytes(doc), 2, parsed=False)
    report, code = execute(inv)
    return RunOutput(render_report(report, inv.output_format), code, inv.out)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        settings = Settings.from_env()
    except ThueMahlerError as exc:
        sys.stderr.write(_json_bytes({"error": body_for(exc)}).decode("utf-8"))
        return 2
    setup_logging(settings.log_level, stream=sys.stderr)
    result = run(list(argv) if argv is not None else sys.argv[1:], settings)
    if not result.parsed:
        sys.stderr.write(result.payload.decode("utf-8"))
    elif result.out is not None:
        result.out.write_bytes(result.payload)
        _logger.info("report written to %s", result.out)
    else:
        sys.stdout.write(result.payload.decode("utf-8"))
    return result.code
