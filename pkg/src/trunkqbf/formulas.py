"""Core value types for prenex-CNF quantified Boolean formulas.

Variables are 1-based integers (QDIMACS numbering) and a literal is a
signed integer: ``v`` for the positive literal of variable ``v`` and
``-v`` for its negation.  Clauses, matrices, prefixes and instances are
immutable values with deterministic canonical encodings; every set-like
structure in the package deduplicates on those encodings.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Mapping, Set, Tuple

Variable = int
Literal = int

# Assignments map variables to 0/1.
Assignment = Mapping[int, int]

EXISTS = "e"
FORALL = "a"


def _check_literal(lit: int) -> None:
    if not isinstance(lit, int) or isinstance(lit, bool) or lit == 0:
        raise ValueError(f"literal must be a non-zero integer, got {lit!r}")


def _lit_key(lit: int) -> Tuple[int, bool]:
    """Canonical literal order: by variable id, negative polarity first."""
    return (abs(lit), lit > 0)


@dataclass(frozen=True)
class Clause:
    """A duplicate-free set of literals in canonical order.

    Two clauses are equal iff their canonical literal tuples are equal.
    """

    lits: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for lit in self.lits:
            _check_literal(lit)
        canonical = tuple(sorted(set(self.lits), key=_lit_key))
        object.__setattr__(self, "lits", canonical)
        object.__setattr__(self, "_hash", hash(canonical))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.lits)

    def __contains__(self, lit: int) -> bool:
        return lit in self.lits

    @property
    def is_empty(self) -> bool:
        return not self.lits

    def variables(self) -> FrozenSet[int]:
        return frozenset(abs(lit) for lit in self.lits)

    def sort_key(self) -> Tuple[Tuple[int, bool], ...]:
        return tuple(_lit_key(lit) for lit in self.lits)

    def __repr__(self) -> str:
        return f"Clause({list(self.lits)!r})"


#: The empty clause.
BOTTOM = Clause()


@dataclass(frozen=True)
class Matrix:
    """A CNF formula: a duplicate-free set of clauses in canonical order."""

    clauses: Tuple[Clause, ...] = ()

    def __post_init__(self) -> None:
        canonical = tuple(sorted(set(self.clauses), key=Clause.sort_key))
        object.__setattr__(self, "clauses", canonical)
        object.__setattr__(self, "_hash", hash(canonical))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.clauses)

    def __contains__(self, clause: Clause) -> bool:
        return clause in self.clauses

    @property
    def is_empty(self) -> bool:
        return not self.clauses

    @property
    def has_empty_clause(self) -> bool:
        return any(c.is_empty for c in self.clauses)

    def variables(self) -> FrozenSet[int]:
        out: Set[int] = set()
        for clause in self.clauses:
            out.update(clause.variables())
        return frozenset(out)

    def encoding(self) -> Tuple[Tuple[int, ...], ...]:
        """Canonical encoding: tuple of canonical literal tuples."""
        return tuple(c.lits for c in self.clauses)

    def __repr__(self) -> str:
        return f"Matrix({[list(c.lits) for c in self.clauses]!r})"


def matrix_of(*clauses: Iterable[int]) -> Matrix:
    """Build a matrix from raw literal collections."""
    return Matrix(tuple(Clause(tuple(c)) for c in clauses))


@dataclass(frozen=True)
class Prefix:
    """A quantifier prefix of strictly alternating blocks.

    Adjacent same-quantifier blocks are merged and empty blocks dropped
    on construction, so the alternation invariant always holds.  Block
    variable order is canonical (ascending id); block membership, not
    written order, carries the semantics.
    """

    blocks: Tuple[Tuple[str, Tuple[int, ...]], ...] = ()

    def __post_init__(self) -> None:
        merged: list[tuple[str, list[int]]] = []
        seen: Set[int] = set()
        for quant, variables in self.blocks:
            if quant not in (EXISTS, FORALL):
                raise ValueError(f"unknown quantifier {quant!r}")
            block_vars = list(variables)
            for v in block_vars:
                if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                    raise ValueError(f"variable ids must be positive integers, got {v!r}")
                if v in seen:
                    raise ValueError(f"variable {v} occurs in more than one block")
                seen.add(v)
            if not block_vars:
                continue
            if merged and merged[-1][0] == quant:
                merged[-1][1].extend(block_vars)
            else:
                merged.append((quant, block_vars))
        canonical = tuple((q, tuple(sorted(vs))) for q, vs in merged)
        object.__setattr__(self, "blocks", canonical)

    @cached_property
    def variables(self) -> FrozenSet[int]:
        return frozenset(v for _, vs in self.blocks for v in vs)

    @cached_property
    def existential(self) -> FrozenSet[int]:
        return frozenset(v for q, vs in self.blocks for v in vs if q == EXISTS)

    @cached_property
    def universal(self) -> FrozenSet[int]:
        return frozenset(v for q, vs in self.blocks for v in vs if q == FORALL)

    @cached_property
    def _block_index(self) -> Dict[int, int]:
        return {v: i for i, (_, vs) in enumerate(self.blocks) for v in vs}

    def block_index(self, v: int) -> int:
        try:
            return self._block_index[v]
        except KeyError:
            raise KeyError(f"variable {v} is not quantified") from None

    def quantifier(self, v: int) -> str:
        return self.blocks[self.block_index(v)][0]

    def variables_in_order(self) -> Tuple[int, ...]:
        """All variables, block by block, ascending id inside each block."""
        return tuple(v for _, vs in self.blocks for v in vs)

    def remove(self, variables: Iterable[int]) -> "Prefix":
        """Prefix with the given variables dropped (blocks re-merged)."""
        drop = set(variables)
        return Prefix(
            tuple((q, tuple(v for v in vs if v not in drop)) for q, vs in self.blocks)
        )

    def __repr__(self) -> str:
        inner = " ".join(f"{q}{list(vs)}" for q, vs in self.blocks)
        return f"Prefix({inner})"


@dataclass(frozen=True)
class QbfInstance:
    """A prenex QBF: quantifier prefix plus CNF matrix."""

    prefix: Prefix
    matrix: Matrix

    def __post_init__(self) -> None:
        free = self.matrix.variables() - self.prefix.variables
        if free:
            raise ValueError(f"matrix variables not quantified: {sorted(free)}")

    def variables(self) -> FrozenSet[int]:
        return self.prefix.variables


def is_tautological(clause: Clause) -> bool:
    """True iff some variable occurs in both polarities in the clause."""
    lits = set(clause.lits)
    return any(-lit in lits for lit in lits)


def remove_tautologies(matrix: Matrix) -> Matrix:
    """Drop every tautological clause."""
    return Matrix(tuple(c for c in matrix.clauses if not is_tautological(c)))


def restrict(matrix: Matrix, assignment: Assignment) -> Matrix:
    """Apply a partial assignment to the matrix.

    Clauses containing a satisfied literal are removed, falsified
    literals are deleted from the remaining clauses.  Variables outside
    the assignment's domain are untouched; the result may contain the
    empty clause.
    """
    out = []
    for clause in matrix.clauses:
        kept = []
        satisfied = False
        for lit in clause.lits:
            value = assignment.get(abs(lit))
            if value is None:
                kept.append(lit)
            elif (lit > 0) == bool(value):
                satisfied = True
                break
        if not satisfied:
            out.append(Clause(tuple(kept)))
    return Matrix(tuple(out))


def ground_truth(matrix: Matrix) -> bool:
    """Truth of a variable-free matrix: true iff it has no clauses.

    Raises ValueError if the matrix still contains a variable.
    """
    for clause in matrix.clauses:
        if clause.lits:
            raise ValueError(f"matrix is not variable-free: contains {clause!r}")
    return matrix.is_empty


def primal_graph(instance: QbfInstance) -> Dict[int, Set[int]]:
    """Adjacency sets of the primal graph on all quantified variables.

    Two variables are adjacent iff some clause contains both.
    """
    adjacency: Dict[int, Set[int]] = {v: set() for v in instance.prefix.variables}
    for clause in instance.matrix.clauses:
        variables = sorted(clause.variables())
        for i, u in enumerate(variables):
            for w in variables[i + 1 :]:
                adjacency[u].add(w)
                adjacency[w].add(u)
    return adjacency
