"""Rooted nice tree decompositions with a designated trunk path.

The decomposition object only enforces structural shape (a tree rooted
at ``root`` whose trunk is a leaf-to-root path).  Niceness (T1-T4) and
trunk alignment (P1/P2) are checked by the validators below, which
report violations instead of raising.

Trunk alignment is evaluated with strict dependence for P1: the
reflexive pair (u, u) is ignored, otherwise no variable could ever
satisfy P1 since every variable sits in its own forget bag.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .formulas import QbfInstance, primal_graph
from .posets import DependencyPoset


class DecompositionError(ValueError):
    """Structurally broken decomposition (not a tree, bad trunk, ...)."""


@dataclass(frozen=True)
class Violation:
    rule: str  # T1 | T2 | T3 | T4 | TRUNK | P1P2
    subject: str  # node id or variable id as text
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()
    #: For trunk-alignment checks: variable -> "P1" | "P2" | "P1P2".
    property_held: Mapping[int, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"[{v.rule}] {v.subject}: {v.message}" for v in self.violations)


class TrunkTreeDecomposition:
    """A rooted tree of bags with a leaf-to-root trunk path.

    ``bags`` maps node ids to variable sets, ``parent`` maps every
    non-root node to its parent, ``trunk`` lists the trunk nodes from
    the designated leaf up to the root.
    """

    def __init__(
        self,
        bags: Mapping[int, Iterable[int]],
        parent: Mapping[int, int],
        root: int,
        trunk: Sequence[int],
    ):
        self._bags: Dict[int, FrozenSet[int]] = {
            node: frozenset(variables) for node, variables in bags.items()
        }
        if root not in self._bags:
            raise DecompositionError(f"root {root} is not a node")
        self._root = root
        self._parent: Dict[int, int] = dict(parent)
        self._children: Dict[int, List[int]] = {node: [] for node in self._bags}
        for child, par in self._parent.items():
            if child not in self._bags or par not in self._bags:
                raise DecompositionError(f"edge ({par}, {child}) mentions unknown node")
            if child == root:
                raise DecompositionError("root must not have a parent")
            self._children[par].append(child)
        for node in self._bags:
            if node != root and node not in self._parent:
                raise DecompositionError(f"node {node} is disconnected (no parent)")
        # Parent walks must reach the root; a failure indicates a cycle.
        for node in self._bags:
            seen = set()
            cur = node
            while cur != root:
                if cur in seen:
                    raise DecompositionError(f"cycle through node {cur}")
                seen.add(cur)
                cur = self._parent[cur]
        for node in self._children:
            self._children[node].sort()
        self._trunk: Tuple[int, ...] = tuple(trunk)
        self._check_trunk()

    def _check_trunk(self) -> None:
        trunk = self._trunk
        if not trunk:
            raise DecompositionError("trunk must not be empty")
        for node in trunk:
            if node not in self._bags:
                raise DecompositionError(f"trunk mentions unknown node {node}")
        if trunk[-1] != self._root:
            raise DecompositionError("trunk must end at the root")
        if self._children[trunk[0]]:
            raise DecompositionError(f"trunk start {trunk[0]} is not a leaf")
        for lower, upper in zip(trunk, trunk[1:]):
            if self._parent.get(lower) != upper:
                raise DecompositionError(
                    f"trunk nodes {lower} and {upper} are not child and parent"
                )

    @property
    def nodes(self) -> Tuple[int, ...]:
        return tuple(sorted(self._bags))

    @property
    def root(self) -> int:
        return self._root

    @property
    def trunk(self) -> Tuple[int, ...]:
        return self._trunk

    def bag(self, node: int) -> FrozenSet[int]:
        return self._bags[node]

    def parent_of(self, node: int) -> Optional[int]:
        return self._parent.get(node)

    def children(self, node: int) -> Tuple[int, ...]:
        return tuple(self._children[node])

    def is_leaf(self, node: int) -> bool:
        return not self._children[node]

    def bag_variables(self) -> FrozenSet[int]:
        out: Set[int] = set()
        for bag in self._bags.values():
            out |= bag
        return frozenset(out)

    def postorder(self) -> Tuple[int, ...]:
        """Deterministic post-order: children ascending by id."""
        order: List[int] = []
        stack: List[Tuple[int, bool]] = [(self._root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            stack.append((node, True))
            for child in reversed(self._children[node]):
                stack.append((child, False))
        return tuple(order)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrunkTreeDecomposition):
            return NotImplemented
        return (
            self._bags == other._bags
            and self._parent == other._parent
            and self._root == other._root
            and self._trunk == other._trunk
        )

    def __repr__(self) -> str:
        return (
            f"TrunkTreeDecomposition(nodes={len(self._bags)}, "
            f"width={width(self)}, trunk_len={len(self._trunk)})"
        )


def width(td: TrunkTreeDecomposition) -> int:
    """Size of the largest bag minus one."""
    return max(len(td.bag(t)) for t in td.nodes) - 1


def _nodes_with_variable(td: TrunkTreeDecomposition) -> Dict[int, List[int]]:
    occ: Dict[int, List[int]] = {}
    for node in td.nodes:
        for v in td.bag(node):
            occ.setdefault(v, []).append(node)
    return occ


def _variable_subtree_tops(td: TrunkTreeDecomposition, nodes: List[int]) -> List[int]:
    """Nodes of the occurrence set whose parent is outside the set."""
    node_set = set(nodes)
    return [t for t in nodes if td.parent_of(t) not in node_set]


def forget_map(td: TrunkTreeDecomposition) -> Dict[int, int]:
    """Map every bag variable to its forget node (highest bag containing it).

    Raises DecompositionError when a variable has several topmost
    occurrences (a T2 violation) or shares its forget node with another
    variable (impossible in a nice decomposition).
    """
    result: Dict[int, int] = {}
    used_nodes: Dict[int, int] = {}
    for v, nodes in _nodes_with_variable(td).items():
        tops = _variable_subtree_tops(td, nodes)
        if len(tops) != 1:
            raise DecompositionError(
                f"variable {v} has {len(tops)} topmost occurrences {sorted(tops)}"
            )
        node = tops[0]
        if node in used_nodes:
            raise DecompositionError(
                f"variables {used_nodes[node]} and {v} share forget node {node}"
            )
        used_nodes[node] = v
        result[v] = node
    return result


def forget_node(td: TrunkTreeDecomposition, v: int) -> int:
    """The unique highest node whose bag contains v."""
    nodes = [t for t in td.nodes if v in td.bag(t)]
    if not nodes:
        raise DecompositionError(f"variable {v} is never introduced")
    tops = _variable_subtree_tops(td, nodes)
    if len(tops) != 1:
        raise DecompositionError(
            f"variable {v} has {len(tops)} topmost occurrences {sorted(tops)}"
        )
    return tops[0]


def subtree_vars(td: TrunkTreeDecomposition, node: int) -> FrozenSet[int]:
    """Union of the bags in the subtree rooted at the node."""
    try:
        td.bag(node)
    except KeyError:
        raise DecompositionError(f"unknown node {node}") from None
    out: Set[int] = set()
    stack = [node]
    while stack:
        cur = stack.pop()
        out |= td.bag(cur)
        stack.extend(td.children(cur))
    return frozenset(out)


def _subtree_vars_map(td: TrunkTreeDecomposition) -> Dict[int, FrozenSet[int]]:
    out: Dict[int, Set[int]] = {}
    for node in td.postorder():
        acc: Set[int] = set(td.bag(node))
        for child in td.children(node):
            acc |= out[child]
        out[node] = acc
    return {node: frozenset(acc) for node, acc in out.items()}


def validate_nice(td: TrunkTreeDecomposition, instance: QbfInstance) -> ValidationReport:
    """Check T1-T4 and trunk path shape, listing every violation."""
    violations: List[Violation] = []
    variables = instance.prefix.variables

    foreign = td.bag_variables() - variables
    for v in sorted(foreign):
        violations.append(
            Violation("T2", str(v), "appears in bags but is not a variable of the instance")
        )

    # T1: every primal edge inside some bag.
    covered: Set[Tuple[int, int]] = set()
    for node in td.nodes:
        bag = sorted(td.bag(node))
        for i, u in enumerate(bag):
            for w in bag[i + 1 :]:
                covered.add((u, w))
    adjacency = primal_graph(instance)
    for u in sorted(adjacency):
        for w in sorted(adjacency[u]):
            if u < w and (u, w) not in covered:
                violations.append(
                    Violation("T1", f"{u},{w}", "primal edge not contained in any bag")
                )

    # T2: occurrences of each variable form a nonempty connected subtree.
    occurrences = _nodes_with_variable(td)
    for v in sorted(variables):
        nodes = occurrences.get(v)
        if not nodes:
            violations.append(Violation("T2", str(v), "variable occurs in no bag"))
            continue
        tops = _variable_subtree_tops(td, nodes)
        if len(tops) != 1:
            violations.append(
                Violation(
                    "T2",
                    str(v),
                    f"occurrences split into {len(tops)} components (tops {sorted(tops)})",
                )
            )

    # T3: leaf and root bags are empty.
    for node in td.nodes:
        if (td.is_leaf(node) or node == td.root) and td.bag(node):
            violations.append(
                Violation("T3", str(node), f"leaf/root bag is not empty: {sorted(td.bag(node))}")
            )

    # T4: every non-leaf node is introduce, forget, or join.
    for node in td.nodes:
        kids = td.children(node)
        if not kids:
            continue
        if len(kids) == 1:
            child_bag = td.bag(kids[0])
            bag = td.bag(node)
            if len(bag) == len(child_bag) + 1 and child_bag < bag:
                continue  # introduce
            if len(bag) == len(child_bag) - 1 and bag < child_bag:
                continue  # forget
            violations.append(
                Violation("T4", str(node), "single-child node is neither introduce nor forget")
            )
        elif len(kids) == 2:
            if not (td.bag(node) == td.bag(kids[0]) == td.bag(kids[1])):
                violations.append(
                    Violation("T4", str(node), "join node bags differ from children")
                )
        else:
            violations.append(
                Violation("T4", str(node), f"node has {len(kids)} children")
            )

    # Trunk shape is construction-enforced; re-checked for completeness.
    trunk = td.trunk
    if trunk[-1] != td.root or td.children(trunk[0]):
        violations.append(Violation("TRUNK", str(trunk[0]), "trunk is not a leaf-to-root path"))

    return ValidationReport(tuple(violations))


def validate_trunk_aligned(
    td: TrunkTreeDecomposition, instance: QbfInstance, poset: DependencyPoset
) -> ValidationReport:
    """Check that every variable satisfies P1 or P2.

    P1 (strict): no distinct variable depending on u sits in u's forget
    bag.  P2: u is forgotten on the trunk and everything u depends on
    occurs in the subtree at or below u's forget node.  The report
    records which property held for each variable.
    """
    violations: List[Violation] = []
    held: Dict[int, str] = {}
    fmap = forget_map(td)
    below = _subtree_vars_map(td)
    trunk_set = set(td.trunk)
    for u in sorted(instance.prefix.variables):
        node = fmap.get(u)
        if node is None:
            violations.append(Violation("P1P2", str(u), "variable occurs in no bag"))
            continue
        bag = td.bag(node)
        p1 = all(v not in bag for v in poset.dependents_strict(u))
        p2 = node in trunk_set and poset.dep(u) <= below[node]
        if p1 and p2:
            held[u] = "P1P2"
        elif p1:
            held[u] = "P1"
        elif p2:
            held[u] = "P2"
        else:
            offenders = sorted(v for v in poset.dependents_strict(u) if v in bag)
            violations.append(
                Violation(
                    "P1P2",
                    str(u),
                    f"P1 fails (dependents {offenders} in forget bag {node}) and P2 fails",
                )
            )
    return ValidationReport(tuple(violations), held)


def elimination_ordering(td: TrunkTreeDecomposition) -> Tuple[int, ...]:
    """Variables ordered by a fixed total extension of the node order.

    The extension is the deterministic post-order DFS that visits the
    trunk child of every trunk node last among its siblings, remaining
    siblings ascending by node id.  Variables are then sorted by the
    position of their forget nodes.
    """
    trunk_child: Dict[int, int] = {}
    for lower, upper in zip(td.trunk, td.trunk[1:]):
        trunk_child[upper] = lower
    position: Dict[int, int] = {}
    stack: List[Tuple[int, bool]] = [(td.root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            position[node] = len(position)
            continue
        stack.append((node, True))
        kids = list(td.children(node))
        tc = trunk_child.get(node)
        if tc is not None:
            kids = [c for c in kids if c != tc] + [tc]
        for child in reversed(kids):
            stack.append((child, False))
    fmap = forget_map(td)
    return tuple(sorted(fmap, key=lambda v: position[fmap[v]]))


def _check_t2_rough(td: TrunkTreeDecomposition) -> None:
    for v, nodes in _nodes_with_variable(td).items():
        tops = _variable_subtree_tops(td, nodes)
        if len(tops) != 1:
            raise DecompositionError(
                f"input violates T2: variable {v} occurs in {len(tops)} components"
            )


def normalize(rough: TrunkTreeDecomposition) -> TrunkTreeDecomposition:
    """Turn a rough decomposition into a nice one with the same bags.

    Inserts introduce/forget chains below leaves, between bag changes
    and above the root, and splits multi-way branches into binary join
    spines.  The rough trunk maps onto a leaf-to-root trunk path of the
    output.  The input must be a tree with connected variable
    occurrences (T2); T1 and P1/P2 are the caller's concern, so the
    output must be re-validated.
    """
    _check_t2_rough(rough)
    bags: Dict[int, FrozenSet[int]] = {}
    parent: Dict[int, int] = {}
    counter = itertools.count(1)

    def new_node(bag: Set[int], child: Optional[int] = None) -> int:
        nid = next(counter)
        bags[nid] = frozenset(bag)
        if child is not None:
            parent[child] = nid
        return nid

    def chain(top: int, from_bag: FrozenSet[int], to_bag: FrozenSet[int]) -> int:
        cur = top
        cur_bag = set(from_bag)
        for v in sorted(from_bag - to_bag):
            cur_bag.discard(v)
            cur = new_node(cur_bag, cur)
        for v in sorted(to_bag - from_bag):
            cur_bag.add(v)
            cur = new_node(cur_bag, cur)
        return cur

    image: Dict[int, int] = {}
    leaf_image: Dict[int, int] = {}
    for node in rough.postorder():
        kids = rough.children(node)
        if not kids:
            leaf = new_node(set())
            leaf_image[node] = leaf
            image[node] = chain(leaf, frozenset(), rough.bag(node))
        elif len(kids) == 1:
            image[node] = chain(image[kids[0]], rough.bag(kids[0]), rough.bag(node))
        else:
            tops = [chain(image[c], rough.bag(c), rough.bag(node)) for c in kids]
            cur = tops[0]
            for other in tops[1:]:
                join = new_node(set(rough.bag(node)))
                parent[cur] = join
                parent[other] = join
                cur = join
            image[node] = cur
    new_root = chain(image[rough.root], rough.bag(rough.root), frozenset())

    trunk: List[int] = [leaf_image[rough.trunk[0]]]
    while trunk[-1] != new_root:
        trunk.append(parent[trunk[-1]])
    return TrunkTreeDecomposition(bags, parent, new_root, trunk)


def min_dependency_elimination_width(
    instance: QbfInstance, poset: DependencyPoset, limit: int = 12
) -> int:
    """Exact minimum width over all elimination orderings respecting the poset.

    Enumerates linear extensions of the reverse of the poset (a variable
    may be eliminated only once everything depending on it is gone),
    building the fill-in clique at each elimination, with
    branch-and-bound pruning on the width achieved so far.
    """
    variables = sorted(instance.prefix.variables)
    if len(variables) > limit:
        raise ValueError(
            f"instance has {len(variables)} variables, brute-force limit is {limit}"
        )
    if not variables:
        return 0
    adjacency = {v: set(nbrs) for v, nbrs in primal_graph(instance).items()}
    blockers = {v: set(poset.dependents_strict(v)) for v in variables}
    best = len(variables)  # any ordering has width <= n - 1

    def search(adj: Dict[int, Set[int]], remaining: Set[int], width_so_far: int) -> None:
        nonlocal best
        if width_so_far >= best:
            return
        if not remaining:
            best = width_so_far
            return
        for v in sorted(remaining):
            if blockers[v] & remaining:
                continue
            degree = len(adj[v])
            new_width = max(width_so_far, degree)
            if new_width >= best:
                continue
            neighbors = sorted(adj[v])
            added: List[Tuple[int, int]] = []
            for i, a in enumerate(neighbors):
                for b in neighbors[i + 1 :]:
                    if b not in adj[a]:
                        adj[a].add(b)
                        adj[b].add(a)
                        added.append((a, b))
            for a in neighbors:
                adj[a].discard(v)
            saved = adj.pop(v)
            remaining.discard(v)

            search(adj, remaining, new_width)

            remaining.add(v)
            adj[v] = saved
            for a in neighbors:
                adj[a].add(v)
            for a, b in added:
                adj[a].discard(b)
                adj[b].discard(a)

    search(adjacency, set(variables), 0)
    return best
