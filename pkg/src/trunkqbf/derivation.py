"""The derivation-sequence engine.

Variables are eliminated along an elimination ordering that agrees with
a trunk-aligned tree decomposition, one rule per step:

* R1 - the variable was already removed by an earlier strategy
  extension: copy the state.
* R2 - existential, and no still-quantified variable depending on it
  sits in its forget bag: resolve it away in every matrix.
* R3 - universal under the same side condition: reduce it everywhere.
* R4 - otherwise: branch over all partial existential strategies and
  universal plays up to the variable (strategy extension).

The R2/R3 side condition uses strict dependence; under the reflexive
relation the tested set would always contain the variable itself (it is
in its own forget bag) and the rules could never fire.

Families are sets of sets of matrices; both levels deduplicate eagerly
on canonical encodings after every rule application.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .decomposition import (
    TrunkTreeDecomposition,
    elimination_ordering,
    forget_node,
    validate_nice,
    validate_trunk_aligned,
    ValidationReport,
)
from .formulas import (
    EXISTS,
    Clause,
    Matrix,
    Prefix,
    QbfInstance,
    ground_truth,
    is_tautological,
    remove_tautologies,
    restrict,
)
from .posets import DependencyPoset

MatrixSet = FrozenSet[Matrix]
Family = FrozenSet[MatrixSet]

RULES = ("R1", "R2", "R3", "R4")


class DerivationError(Exception):
    pass


class ValidationError(DerivationError):
    """Input failed decomposition or instance validation."""

    def __init__(self, message: str, report: Optional[ValidationReport] = None):
        super().__init__(message)
        self.report = report


class ResourceLimitError(DerivationError):
    pass


class InvariantError(DerivationError):
    """A runtime invariant of the engine was violated (internal error)."""


@dataclass(frozen=True)
class EngineLimits:
    max_family_size: int = 2**16
    max_set_size: int = 2**14
    max_strategies: int = 2**20

    def __post_init__(self) -> None:
        if min(self.max_family_size, self.max_set_size, self.max_strategies) < 1:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class DerivationState:
    prefix: Prefix
    family: Family
    step_index: int


@dataclass(frozen=True)
class TraceEvent:
    step: int
    variable: int
    rule: str
    family_before: int
    family_after: int
    max_set_size: int
    micros: int


@dataclass(frozen=True)
class DerivationResult:
    verdict: bool
    trace: Tuple[TraceEvent, ...]
    final: DerivationState


def _require_no_tautologies(matrix: Matrix) -> None:
    for clause in matrix.clauses:
        if is_tautological(clause):
            raise ValueError(f"matrix contains a tautological clause {clause!r}")


def resolve(matrix: Matrix, x: int) -> Matrix:
    """Exhaustively resolve the pivot away.

    Replaces all clauses mentioning x by every non-tautological
    resolvent of a positive and a negative occurrence; the result
    contains neither a literal of x nor a tautology.
    """
    _require_no_tautologies(matrix)
    positive = [c for c in matrix.clauses if x in c]
    negative = [c for c in matrix.clauses if -x in c]
    kept = [c for c in matrix.clauses if x not in c and -x not in c]
    resolvents = []
    for c1 in positive:
        for c2 in negative:
            merged = Clause(
                tuple(l for l in c1.lits if l != x) + tuple(l for l in c2.lits if l != -x)
            )
            if not is_tautological(merged):
                resolvents.append(merged)
    return Matrix(tuple(kept + resolvents))


def reduce(matrix: Matrix, u: int) -> Matrix:
    """Delete every occurrence of the universal variable from every clause."""
    _require_no_tautologies(matrix)
    return Matrix(
        tuple(Clause(tuple(l for l in c.lits if abs(l) != u)) for c in matrix.clauses)
    )


def _assignments(variables: Sequence[int]) -> List[Dict[int, int]]:
    variables = sorted(variables)
    return [
        dict(zip(variables, bits))
        for bits in itertools.product((0, 1), repeat=len(variables))
    ]


def _freeze(assignment: Dict[int, int]) -> Tuple[Tuple[int, int], ...]:
    return tuple(sorted(assignment.items()))


def strategy_extension(
    pi: MatrixSet,
    v: int,
    prefix: Prefix,
    poset: DependencyPoset,
    limits: EngineLimits = EngineLimits(),
) -> Family:
    """Branch over all partial existential strategies up to v.

    With B the universal plays on the still-quantified part of dep(v)
    and A the partial existential strategies on its existential part
    (one response table per variable, keyed by the play restricted to
    that variable's own dependencies), the output contains, for every
    tuple of per-matrix strategies, the set of all matrices the tuple
    can produce against plays from B.  Every output matrix is free of
    tautologies and of all variables in dep(v).
    """
    if v not in prefix.variables:
        raise ValueError(f"variable {v} is not quantified in the prefix")
    matrices = sorted(pi, key=Matrix.encoding)
    for m in matrices:
        _require_no_tautologies(m)
    dep_v = poset.dep(v)
    universal_dep = sorted(prefix.universal & dep_v)
    existential_dep = [
        x for x in prefix.variables_in_order() if x in dep_v and x in prefix.existential
    ]
    for x in existential_dep:
        if not poset.dep(x) <= dep_v:
            raise InvariantError(
                f"poset is not transitive at {x}: dep({x}) exceeds dep({v})"
            )

    plays = _assignments(universal_dep)
    domains = {x: _assignments(set(universal_dep) & poset.dep(x)) for x in existential_dep}

    n_strategies = 1
    for x in existential_dep:
        n_strategies *= 2 ** len(domains[x])
    cost = (n_strategies ** len(matrices)) * len(plays)
    if cost > limits.max_strategies:
        raise ResourceLimitError(
            f"strategy extension up to {v} needs {cost} branches, "
            f"limit is {limits.max_strategies}"
        )

    # One full assignment per (strategy, play); strategies enumerate the
    # per-variable response tables in binary-counter order.
    table_space = [
        list(itertools.product((0, 1), repeat=len(domains[x]))) for x in existential_dep
    ]
    strategy_assignments: List[List[Dict[int, int]]] = []
    for tables in itertools.product(*table_space):
        lookup = {
            x: dict(zip(map(_freeze, domains[x]), tables[i]))
            for i, x in enumerate(existential_dep)
        }
        per_play = []
        for beta in plays:
            full = dict(beta)
            for x in existential_dep:
                restricted_play = {u: val for u, val in beta.items() if u in poset.dep(x)}
                full[x] = lookup[x][_freeze(restricted_play)]
            per_play.append(full)
        strategy_assignments.append(per_play)

    # Restriction table: matrix index x strategy index -> set of results.
    restricted: List[List[FrozenSet[Matrix]]] = []
    for m in matrices:
        row = []
        for per_play in strategy_assignments:
            row.append(frozenset(restrict(m, a) for a in per_play))
        restricted.append(row)

    out = set()
    for choice in itertools.product(range(len(strategy_assignments)), repeat=len(matrices)):
        merged: set = set()
        for j, k in enumerate(choice):
            merged |= restricted[j][k]
        out.add(frozenset(merged))
    return frozenset(out)


def check_neighborhood_invariant(
    state: DerivationState, v: int, td: TrunkTreeDecomposition
) -> bool:
    """True iff, in every matrix of the family, every variable sharing a
    clause with v lies in v's forget bag."""
    bag = td.bag(forget_node(td, v))
    for pi in state.family:
        for matrix in pi:
            for clause in matrix.clauses:
                variables = clause.variables()
                if v in variables and not (variables - {v}) <= bag:
                    return False
    return True


def check_r4_assertion(
    prefix: Prefix, v: int, poset: DependencyPoset, td: TrunkTreeDecomposition
) -> bool:
    """True iff every still-quantified variable v depends on sits in v's
    forget bag (must hold whenever R4 fires on a trunk-aligned input)."""
    bag = td.bag(forget_node(td, v))
    return (prefix.variables & poset.dep(v)) <= bag


def _enforce_limits(family: Family, limits: EngineLimits) -> None:
    if len(family) > limits.max_family_size:
        raise ResourceLimitError(
            f"family has {len(family)} sets, limit is {limits.max_family_size}"
        )
    for pi in family:
        if len(pi) > limits.max_set_size:
            raise ResourceLimitError(
                f"a matrix set has {len(pi)} matrices, limit is {limits.max_set_size}"
            )


def step(
    state: DerivationState,
    v: int,
    td: TrunkTreeDecomposition,
    poset: DependencyPoset,
    limits: EngineLimits = EngineLimits(),
    checks: bool = False,
) -> Tuple[DerivationState, TraceEvent]:
    """Apply the unique applicable rule for the next elimination variable."""
    started = time.perf_counter()
    prefix = state.prefix
    family = state.family
    if v not in prefix.variables:
        rule = "R1"
        new_prefix, new_family = prefix, family
    else:
        bag = td.bag(forget_node(td, v))
        blocked = any(
            w in bag for w in poset.dependents_strict(v) if w in prefix.variables
        )
        if not blocked:
            if prefix.quantifier(v) == EXISTS:
                rule = "R2"
                new_family = frozenset(
                    frozenset(resolve(m, v) for m in pi) for pi in family
                )
            else:
                rule = "R3"
                new_family = frozenset(
                    frozenset(reduce(m, v) for m in pi) for pi in family
                )
            new_prefix = prefix.remove((v,))
        else:
            rule = "R4"
            if checks and not check_r4_assertion(prefix, v, poset, td):
                raise InvariantError(
                    f"strategy extension at {v}: a still-quantified dependency "
                    f"is outside the forget bag"
                )
            merged = set()
            for pi in sorted(family, key=lambda s: sorted(m.encoding() for m in s)):
                merged |= strategy_extension(pi, v, prefix, poset, limits)
            new_family = frozenset(merged)
            new_prefix = prefix.remove(prefix.variables & poset.dep(v))
    _enforce_limits(new_family, limits)
    micros = int((time.perf_counter() - started) * 1_000_000)
    event = TraceEvent(
        step=state.step_index + 1,
        variable=v,
        rule=rule,
        family_before=len(family),
        family_after=len(new_family),
        max_set_size=max((len(pi) for pi in new_family), default=0),
        micros=micros,
    )
    return DerivationState(new_prefix, new_family, state.step_index + 1), event


def initial_state(instance: QbfInstance) -> DerivationState:
    return DerivationState(
        instance.prefix, frozenset({frozenset({instance.matrix})}), 0
    )


def _check_clean(state: DerivationState, eliminated: FrozenSet[int]) -> None:
    for pi in state.family:
        for matrix in pi:
            for clause in matrix.clauses:
                if is_tautological(clause):
                    raise InvariantError(f"tautological clause {clause!r} after a step")
            leftover = matrix.variables() & eliminated
            if leftover:
                raise InvariantError(
                    f"eliminated variables {sorted(leftover)} still occur in a matrix"
                )


def run_derivation(
    instance: QbfInstance,
    td: TrunkTreeDecomposition,
    poset: DependencyPoset,
    limits: EngineLimits = EngineLimits(),
    checks: bool = False,
) -> DerivationResult:
    """Decide the instance along the decomposition's elimination ordering.

    Tautological clauses are removed up front, the decomposition is
    validated (niceness, then trunk alignment), and the rules are
    applied once per variable.  The verdict is true iff some final set
    consists of empty matrices only.  With ``checks`` enabled the
    neighborhood, tautology-freeness and exhaustive-elimination
    invariants are asserted at every step.
    """
    cleaned = QbfInstance(instance.prefix, remove_tautologies(instance.matrix))
    nice_report = validate_nice(td, cleaned)
    if not nice_report.ok:
        raise ValidationError(
            f"decomposition is not nice: {nice_report.summary()}", nice_report
        )
    trunk_report = validate_trunk_aligned(td, cleaned, poset)
    if not trunk_report.ok:
        raise ValidationError(
            f"decomposition is not trunk-aligned: {trunk_report.summary()}", trunk_report
        )
    ordering = elimination_ordering(td)
    if set(ordering) != set(cleaned.prefix.variables):
        raise ValidationError(
            "elimination ordering does not cover the quantified variables"
        )

    state = initial_state(cleaned)
    trace: List[TraceEvent] = []
    for i, v in enumerate(ordering, start=1):
        if checks and not check_neighborhood_invariant(state, v, td):
            raise InvariantError(
                f"step {i}: a matrix neighbor of {v} lies outside its forget bag"
            )
        state, event = step(state, v, td, poset, limits, checks)
        trace.append(event)
        if checks:
            _check_clean(state, frozenset(ordering[:i]))

    verdict = False
    for pi in state.family:
        try:
            if all(ground_truth(m) for m in pi):
                verdict = True
                break
        except ValueError as exc:
            raise InvariantError(f"final matrix is not variable-free: {exc}") from exc
    return DerivationResult(verdict, tuple(trace), state)
