"""Ground-truth brute-force QBF evaluation.

``evaluate`` plays the two-player game by recursion over the prefix;
``evaluate_by_strategy_enumeration`` is an independent cross-check that
enumerates whole existential strategy tables and is only meant for very
small instances.  Both explore value 0 before value 1 so runs are
reproducible.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .formulas import (
    EXISTS,
    FORALL,
    Clause,
    Matrix,
    Prefix,
    QbfInstance,
    restrict,
)
from .posets import DependencyPoset


class BudgetExceededError(Exception):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_variables: int = 24

    def __post_init__(self) -> None:
        if self.max_variables < 1:
            raise ValueError("budget must be positive")


def evaluate(instance: QbfInstance, budget: OracleBudget = OracleBudget()) -> bool:
    """Game-tree truth: OR over existential choices, AND over universal."""
    n = len(instance.prefix.variables)
    if n > budget.max_variables:
        raise BudgetExceededError(
            f"instance has {n} variables, budget allows {budget.max_variables}"
        )
    order = instance.prefix.variables_in_order()
    quantifiers = [instance.prefix.quantifier(v) for v in order]

    def rec(i: int, matrix: Matrix) -> bool:
        if matrix.is_empty:
            return True
        if matrix.has_empty_clause:
            return False
        v = order[i]
        low = rec(i + 1, restrict(matrix, {v: 0}))
        if quantifiers[i] == EXISTS:
            return low or rec(i + 1, restrict(matrix, {v: 1}))
        return low and rec(i + 1, restrict(matrix, {v: 1}))

    return rec(0, instance.matrix)


def equisatisfiable(
    q1: QbfInstance, q2: QbfInstance, budget: OracleBudget = OracleBudget()
) -> bool:
    return evaluate(q1, budget) == evaluate(q2, budget)


def _assignments(variables: Sequence[int]) -> List[Dict[int, int]]:
    """All assignments over the variables, in binary-counter order."""
    variables = sorted(variables)
    out = []
    for bits in itertools.product((0, 1), repeat=len(variables)):
        out.append(dict(zip(variables, bits)))
    return out


def evaluate_by_strategy_enumeration(
    instance: QbfInstance, budget: OracleBudget = OracleBudget(max_variables=5)
) -> bool:
    """Truth via exhaustive search for a winning existential strategy.

    Each candidate strategy assigns every existential variable a value
    for every assignment to the universal variables quantified to its
    left; it wins if the matrix is satisfied under every universal play.
    Exponentially more expensive than ``evaluate``; cross-check only.
    """
    n = len(instance.prefix.variables)
    if n > budget.max_variables:
        raise BudgetExceededError(
            f"instance has {n} variables, budget allows {budget.max_variables}"
        )
    prefix = instance.prefix
    order = prefix.variables_in_order()
    existentials = [v for v in order if prefix.quantifier(v) == EXISTS]
    left_universals = {}
    seen_universals: List[int] = []
    for v in order:
        if prefix.quantifier(v) == FORALL:
            seen_universals.append(v)
        else:
            left_universals[v] = tuple(seen_universals)
    universal_plays = _assignments(sorted(prefix.universal))

    # A strategy table per existential: one output bit per play restriction.
    domains = {
        x: _assignments(left_universals[x]) for x in existentials
    }
    table_choices = [
        list(itertools.product((0, 1), repeat=len(domains[x]))) for x in existentials
    ]
    for tables in itertools.product(*table_choices):
        strategy = {
            x: dict(zip(map(_freeze, domains[x]), tables[i]))
            for i, x in enumerate(existentials)
        }
        if all(
            restrict(instance.matrix, _play(beta, strategy, left_universals)).is_empty
            for beta in universal_plays
        ):
            return True
    return False


def _freeze(assignment: Dict[int, int]) -> Tuple[Tuple[int, int], ...]:
    return tuple(sorted(assignment.items()))


def _play(
    beta: Dict[int, int],
    strategy: Dict[int, Dict[Tuple[Tuple[int, int], ...], int]],
    left_universals: Dict[int, Tuple[int, ...]],
) -> Dict[int, int]:
    full = dict(beta)
    for x, table in strategy.items():
        seen = _freeze({u: beta[u] for u in left_universals[x]})
        full[x] = table[seen]
    return full


def verify_poset_property2(
    instance: QbfInstance,
    poset: DependencyPoset,
    budget: OracleBudget = OracleBudget(),
) -> bool:
    """Check that every linear extension of the poset preserves truth.

    Rebuilds the prefix along each extension (quantifiers travel with
    their variables) and compares oracle verdicts.  Guarded to at most
    7 variables since all linear extensions are enumerated.
    """
    variables = sorted(instance.prefix.variables)
    if len(variables) > 7:
        raise BudgetExceededError(
            f"property-2 check enumerates linear extensions; {len(variables)} variables is too many"
        )
    reference = evaluate(instance, budget)
    quantifier = {v: instance.prefix.quantifier(v) for v in variables}
    for perm in itertools.permutations(variables):
        if not _is_linear_extension(perm, poset):
            continue
        blocks = tuple((quantifier[v], (v,)) for v in perm)
        reordered = QbfInstance(Prefix(blocks), instance.matrix)
        if evaluate(reordered, budget) != reference:
            return False
    return True


def _is_linear_extension(perm: Sequence[int], poset: DependencyPoset) -> bool:
    position = {v: i for i, v in enumerate(perm)}
    for u, v in poset.strict_pairs():
        if position[u] > position[v]:
            return False
    return True


def random_instance(
    seed: int,
    n_vars: int,
    n_clauses: int,
    clause_width: int,
    alternations: int,
) -> QbfInstance:
    """Deterministic pseudo-random instance.

    Splits [1..n_vars] into up to ``alternations`` contiguous blocks of
    alternating quantifiers (first quantifier drawn from the seed) and
    samples clauses of ``clause_width`` distinct variables, so clauses
    are never tautological.
    """
    if n_vars < 1 or n_clauses < 0 or clause_width < 1 or alternations < 1:
        raise ValueError("generator parameters must be positive")
    rng = random.Random(seed)
    n_blocks = min(alternations, n_vars)
    cuts = sorted(rng.sample(range(1, n_vars), n_blocks - 1)) if n_blocks > 1 else []
    bounds = [0] + cuts + [n_vars]
    first = rng.choice((EXISTS, FORALL))
    blocks = []
    for i in range(n_blocks):
        quant = first if i % 2 == 0 else (FORALL if first == EXISTS else EXISTS)
        blocks.append((quant, tuple(range(bounds[i] + 1, bounds[i + 1] + 1))))
    width = min(clause_width, n_vars)
    clauses = []
    for _ in range(n_clauses):
        chosen = rng.sample(range(1, n_vars + 1), width)
        clauses.append(Clause(tuple(v if rng.random() < 0.5 else -v for v in chosen)))
    return QbfInstance(Prefix(tuple(blocks)), Matrix(tuple(clauses)))
