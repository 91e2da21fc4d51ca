"""Instance and decomposition generators.

The parity family pairs an n-ary XOR constraint chain with a width-2
trunk decomposition; ``single_bag_td`` is the generic fallback that
introduces every variable in prefix order and forgets in reverse, so it
exists for every instance (at width n-1).

Variable numbering of ``qparity(n)``: ``x_i -> i``, ``u -> n+1``,
``z_i -> n+1+i``.
"""

from __future__ import annotations

from typing import FrozenSet, List

from .decomposition import TrunkTreeDecomposition
from .formulas import EXISTS, FORALL, Clause, Matrix, Prefix, QbfInstance


def _eq(a: int, b: int) -> List[Clause]:
    return [Clause((a, -b)), Clause((-a, b))]


def _xor(a: int, b: int, c: int) -> List[Clause]:
    # a = b xor c, as the four sign-combination clauses
    return [
        Clause((-a, b, c)),
        Clause((a, -b, c)),
        Clause((a, b, -c)),
        Clause((-a, -b, -c)),
    ]


def qparity(n: int) -> QbfInstance:
    """The n-th parity instance: 2n+1 variables, 4n clauses, false for all n."""
    if n < 2:
        raise ValueError(f"qparity requires n >= 2, got {n}")
    x = {i: i for i in range(1, n + 1)}
    u = n + 1
    z = {i: n + 1 + i for i in range(1, n + 1)}
    clauses = _eq(x[1], z[1]) + _eq(u, z[n])
    for i in range(1, n):
        clauses += _xor(z[i + 1], x[i + 1], z[i])
    prefix = Prefix(
        (
            (EXISTS, tuple(x[i] for i in range(1, n + 1))),
            (FORALL, (u,)),
            (EXISTS, tuple(z[i] for i in range(n, 0, -1))),
        )
    )
    return QbfInstance(prefix, Matrix(tuple(clauses)))


def qparity_td(n: int) -> TrunkTreeDecomposition:
    """The width-2 single-path trunk decomposition of qparity(n).

    Bag sequence (leaf to root): empty, {x1}, {x1,z1}, {z1}, then for
    each middle index {z_{i-1},x_i}, {z_{i-1},x_i,z_i}, {x_i,z_i},
    {z_i}, then {z_{n-1},x_n}, {z_{n-1},x_n,z_n}, {x_n,z_n},
    {x_n,z_n,u}, {z_n,u}, {u}, empty.  The trunk is the whole path.
    """
    if n < 2:
        raise ValueError(f"qparity_td requires n >= 2, got {n}")
    u = n + 1
    z = {i: n + 1 + i for i in range(1, n + 1)}
    bag_seq: List[FrozenSet[int]] = [
        frozenset(),
        frozenset({1}),
        frozenset({1, z[1]}),
        frozenset({z[1]}),
    ]
    for i in range(2, n):
        bag_seq += [
            frozenset({z[i - 1], i}),
            frozenset({z[i - 1], i, z[i]}),
            frozenset({i, z[i]}),
            frozenset({z[i]}),
        ]
    bag_seq += [
        frozenset({z[n - 1], n}),
        frozenset({z[n - 1], n, z[n]}),
        frozenset({n, z[n]}),
        frozenset({n, z[n], u}),
        frozenset({z[n], u}),
        frozenset({u}),
        frozenset(),
    ]
    bags = {i + 1: bag for i, bag in enumerate(bag_seq)}
    parent = {i: i + 1 for i in range(1, len(bag_seq))}
    trunk = tuple(range(1, len(bag_seq) + 1))
    return TrunkTreeDecomposition(bags, parent, len(bag_seq), trunk)


def single_bag_td(instance: QbfInstance) -> TrunkTreeDecomposition:
    """Path decomposition introducing all variables in prefix order and
    forgetting them in reverse prefix order (in-block ties: descending id).

    Width is |var| - 1; with the trivial poset every variable satisfies
    P1, so the derivation engine only ever resolves and reduces on it.
    """
    intro = list(instance.prefix.variables_in_order())
    if not intro:
        raise ValueError("instance has no variables")
    forget = [
        v
        for _, block in reversed(instance.prefix.blocks)
        for v in sorted(block, reverse=True)
    ]
    bag_seq: List[FrozenSet[int]] = [frozenset()]
    current: set = set()
    for v in intro:
        current.add(v)
        bag_seq.append(frozenset(current))
    for v in forget:
        current.discard(v)
        bag_seq.append(frozenset(current))
    bags = {i + 1: bag for i, bag in enumerate(bag_seq)}
    parent = {i: i + 1 for i in range(1, len(bag_seq))}
    trunk = tuple(range(1, len(bag_seq) + 1))
    return TrunkTreeDecomposition(bags, parent, len(bag_seq), trunk)
