from __future__ import annotations

from fractions import Fraction

import pytest

from thue_mahler_kit.constants import ProblemData, problem_data
from thue_mahler_kit.decomposition import A1Cache
from thue_mahler_kit.errors import (
    CardinalityError,
    InvalidSolutionError,
    TrivialSolutionError,
    UsageError,
)
from thue_mahler_kit.number_field import FieldElement, NumberField
from thue_mahler_kit.s_arithmetic import s_context
from thue_mahler_kit.thue_mahler import (
    FamilySolution,
    PairSolution,
    canonicalize,
    classify_subsums,
    partition_classes,
    s3_dependence_test,
    s_dependence_test,
    solve_classic,
    solve_family,
    solve_reduced,
    verify_family_solution,
)

Q = NumberField([0, 1])


def _n(*values: int | Fraction) -> list[FieldElement]:
    return [Q.from_scalar(v) for v in values]


def _problem() -> ProblemData:
    one = Q.one()
    return problem_data(s_context(Q, [2, 3]), one, (one, one, one))


def _solution(pd: ProblemData, *values: int | Fraction) -> FamilySolution:
    return verify_family_solution(pd, _n(*values))


def test_verify_known_solution() -> None:
    pd = _problem()
    sol = _solution(pd, 3, 1, 1, 1, 2, -1, 8)
    assert [b.rational() for b in sol.beta] == [2, 1, 4]
    assert sol.k_primed == (1, 1, 1)
    assert not sol.trivial
    assert sol.to_json()["eps"] == ["8"]


def test_verify_rejects_bad_tuples() -> None:
    pd = _problem()
    with pytest.raises(InvalidSolutionError):
        _solution(pd, 3, 1, 1, 1, 2, -1, 9)
    with pytest.raises(InvalidSolutionError):
        _solution(pd, 3, 1, 1, 1, 5, -1, 8)
    with pytest.raises(CardinalityError):
        _solution(pd, 3, 1, 1, 1, 1, -1, 8)
    with pytest.raises(UsageError):
        verify_family_solution(pd, _n(3, 1, 1))


def test_trivial_solution_is_flagged() -> None:
    pd = _problem()
    sol = _solution(pd, 2, 0, 1, 1, 2, -1, 8)
    assert sol.trivial
    with pytest.raises(TrivialSolutionError):
        classify_subsums(sol, 2)


def test_s3_dependence() -> None:
    pd = _problem()
    a = _solution(pd, 3, 1, 1, 1, 2, -1, 8)
    b = _solution(pd, 6, 2, 1, 1, 2, -1, 64)
    c = _solution(pd, 5, 1, 1, 1, 2, -1, 72)
    dep = s3_dependence_test(a, b)
    assert dep.equivalent
    assert dep.eta is not None and dep.eta[0].rational() == 2
    assert not s3_dependence_test(a, c).equivalent
    partition = partition_classes([a, b, c])
    assert partition.class_ids == [0, 0, 1]
    assert partition.count == 2


def test_subsum_case() -> None:
    pd = _problem()
    sol = _solution(pd, 3, 1, 1, 1, 2, -1, 8)
    cert = classify_subsums(sol, 2)
    assert cert.label == "3+3-repeated-beta"
    assert cert.vanishing[0] == (0, 4, 5)
    assert sum(t.rational() for t in cert.terms) == 0
    other = classify_subsums(sol, 3)
    assert other.sign == -1
    with pytest.raises(UsageError):
        classify_subsums(sol, 1)


def test_canonical_representative() -> None:
    pd = _problem()
    cache = A1Cache(pd)
    a = canonicalize(_solution(pd, 3, 1, 1, 1, 2, -1, 8), cache)
    b = canonicalize(_solution(pd, 6, 2, 1, 1, 2, -1, 64), cache)
    assert (a.x0.rational(), a.y0.rational()) == (Fraction(3, 2), Fraction(1, 2))
    assert a.solution.eps.rational() == 1
    assert [g.rational() for g in a.gammas] == [1, 1, 1]
    assert a.class_key() == b.class_key()


def _two_only() -> ProblemData:
    one = Q.one()
    return problem_data(s_context(Q, [2]), one, (one, one, one))


def _keys(sols: list[FamilySolution]) -> set[tuple[Fraction, ...]]:
    return {tuple(c.rational() for c in s.seven()) for s in sols}


def _row(*values: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


def test_family_strategies_agree() -> None:
    pd = _two_only()
    search = solve_family(pd, 3, 2)
    assert search.direct_count == len(search.solutions)
    assert search.factored_count is not None
    assert 0 < search.factored_count <= len(search.solutions)
    assert _row(3, 1, 1, 1, 2, 4, -2) in _keys(search.solutions)
    for sol in search.solutions:
        assert not sol.trivial
        classify_subsums(sol, 2)


def test_factored_search_reaches_beyond_the_box() -> None:
    pd = _two_only()
    search = solve_family(pd, 3, 2, strategy="factored")
    assert search.direct_count is None
    beyond = _keys(search.beyond_box)
    assert _row(6, 2, 1, 1, 2, 4, -16) in beyond
    for sol in search.beyond_box:
        assert max(abs(sol.x.rational()), abs(sol.y.rational())) > 3
        assert verify_family_solution(pd, list(sol.seven())).key() == sol.key()
    assert search.describe()["beyond_box"] == [s.to_json() for s in search.beyond_box]


def test_normalized_search_keeps_first_twist_at_one() -> None:
    pd = _problem()
    search = solve_family(pd, 5, 2, strategy="direct", normalized=True)
    keys = _keys(search.solutions)
    assert _row(5, 1, 1, 1, 2, 4, 12) in keys
    assert _row(3, 1, 1, 1, 2, 4, -2) in keys
    assert all(s.epsilons[0].rational() == 1 for s in search.solutions)
    wanted = {_row(3, 1, 1, 1, 2, 4, -2), _row(5, 1, 1, 1, 2, 4, 12)}
    chosen = [s for s in search.solutions if tuple(c.rational() for c in s.seven()) in wanted]
    assert partition_classes(chosen).count == 2


def test_every_found_solution_canonicalizes() -> None:
    pd = _two_only()
    search = solve_family(pd, 2, 1, strategy="direct")
    cache = A1Cache(pd)
    reps = [canonicalize(sol, cache) for sol in search.solutions]
    assert reps
    ids = partition_classes(search.solutions).class_ids
    by_key: dict[object, int] = {}
    by_class: dict[int, object] = {}
    for rep, cid in zip(reps, ids, strict=True):
        assert by_key.setdefault(rep.class_key(), cid) == cid
        assert by_class.setdefault(cid, rep.class_key()) == rep.class_key()


def test_family_parallel_matches_serial() -> None:
    pd = _problem()
    serial = solve_family(pd, 2, 1, strategy="direct")
    parallel = solve_family(pd, 2, 1, strategy="direct", workers=4)
    assert [s.key() for s in serial.solutions] == [s.key() for s in parallel.solutions]
    assert serial.factored_count is None


def test_classic_equation() -> None:
    ctx = s_context(Q, [2, 3])
    report = solve_classic(_n(1, 2, 3), Q.one(), ctx, 5)
    points = {(s.x.rational(), s.y.rational()) for s in report.solutions}
    assert (Fraction(4), Fraction(1)) in points
    assert (Fraction(-4), Fraction(-1)) in points
    assert report.class_count < len(report.solutions)
    for sol in report.solutions:
        assert sol.eps is not None


def test_classic_warns_on_repeated_alphas() -> None:
    ctx = s_context(Q, [2])
    report = solve_classic(_n(1, 1, 2), Q.one(), ctx, 2)
    assert report.notes == ["fewer than three distinct alphas"]


def test_pair_dependence() -> None:
    ctx = s_context(Q, [2])
    a = PairSolution(Q.from_scalar(1), Q.from_scalar(3), Q.from_scalar(2))
    b = PairSolution(Q.from_scalar(2), Q.from_scalar(6), Q.from_scalar(16))
    c = PairSolution(Q.from_scalar(3), Q.from_scalar(9), Q.from_scalar(54))
    assert s_dependence_test(a, b, ctx)
    assert not s_dependence_test(a, c, ctx)


def test_reduced_equation() -> None:
    ctx = s_context(Q, [2])
    report = solve_reduced(ctx, 2, 1)
    assert report.solutions
    for sol in report.solutions:
        assert sol.twist is not None
        e1, e2 = sol.twist
        value = (sol.x - sol.y) * (sol.x - e1 * sol.y) * (sol.x - e2 * sol.y)
        assert sol.eps is not None and value == sol.eps
