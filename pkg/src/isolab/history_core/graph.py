"""
Conflicts, dependency graphs, history equivalence and the serializability check.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from enum import Enum

import networkx as nx
from attrs import field, frozen

from isolab.history_core.models import Action, Flavor, History, PredicateDecl
from isolab.shared.constants import ErrorMessages, Notation
from isolab.shared.errors import HistoryValidationError

logger = logging.getLogger(__name__)


class EdgeLabel(str, Enum):
    WW = "ww"
    WR = "wr"
    RW = "rw"


class ConflictScope(str, Enum):
    ITEM = "item"
    PREDICATE = "predicate"


@frozen(order=True)
class DependencyEdge:
    source: int
    target: int
    label: EdgeLabel
    scope: ConflictScope
    # ItemKey for item scope, predicate name for predicate scope
    subject: str

    def describe(self) -> str:
        subject = self.subject
        if self.scope is ConflictScope.PREDICATE:
            subject = f"{Notation.PREDICATE_PREFIX}{subject}"
        return f"{self.label.value} {subject}"


@frozen
class DependencyGraph:
    nodes: frozenset[int] = field(converter=frozenset)
    edges: frozenset[DependencyEdge] = field(converter=frozenset)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(sorted(self.nodes))
        for edge in sorted(self.edges):
            graph.add_edge(edge.source, edge.target)
        return graph

    def find_cycle(self) -> list[int] | None:
        """Return the transactions along one cycle, or None when the graph is acyclic"""
        try:
            cycle = nx.find_cycle(self.to_networkx(), orientation="original")
        except nx.NetworkXNoCycle:
            return None
        return [source for source, _, _ in cycle]

    def to_dot(self) -> str:
        lines = ["digraph dependencies {"]
        for node in sorted(self.nodes):
            lines.append(f"  T{node};")
        for edge in sorted(self.edges):
            lines.append(f'  T{edge.source} -> T{edge.target} [label="{edge.describe()}"];')
        lines.append("}")
        return "\n".join(lines)


def _predicate_map(preds: Mapping[str, PredicateDecl] | Iterable[PredicateDecl]) -> Mapping[str, PredicateDecl]:
    if isinstance(preds, Mapping):
        return preds
    return {decl.name: decl for decl in preds}


def action_conflicts(a: Action, b: Action, preds: Mapping[str, PredicateDecl] | Iterable[PredicateDecl]) -> bool:
    """
    Check whether two data actions conflict.

    Args:
        a: First action
        b: Second action
        preds: Predicate declarations, by name or as a sequence

    Returns:
        bool: True for different transactions, at least one write, and overlapping targets
    """
    if a.is_terminal or b.is_terminal or a.txn == b.txn:
        return False
    if not (a.is_write or b.is_write):
        return False

    if a.is_predicate_read or b.is_predicate_read:
        predicate_action, write = (a, b) if a.is_predicate_read else (b, a)
        decl = _predicate_map(preds).get(predicate_action.target)
        return decl is not None and decl.covers(write.target)

    return a.target == b.target


def _require_single_version(history: History) -> None:
    if history.flavor is Flavor.MULTI_VERSION:
        raise HistoryValidationError(ErrorMessages.MULTIVERSION_INPUT)


def _edge_for(first: Action, second: Action) -> DependencyEdge:
    if first.is_write and second.is_write:
        label = EdgeLabel.WW
    elif first.is_write:
        label = EdgeLabel.WR
    else:
        label = EdgeLabel.RW

    if first.is_predicate_read or second.is_predicate_read:
        predicate_action = first if first.is_predicate_read else second
        return DependencyEdge(first.txn, second.txn, label, ConflictScope.PREDICATE, predicate_action.target)
    return DependencyEdge(first.txn, second.txn, label, ConflictScope.ITEM, first.target)


def dependency_graph(history: History) -> DependencyGraph:
    """Build the dependency graph over the committed transactions of a single-version history"""
    _require_single_version(history)
    committed = history.committed()
    predicates = _predicate_map(history.predicates)
    data_actions = [
        action for action in history.actions
        if not action.is_terminal and action.txn in committed
    ]

    edges = set()
    for position, first in enumerate(data_actions):
        for second in data_actions[position + 1:]:
            if action_conflicts(first, second, predicates):
                edges.add(_edge_for(first, second))

    return DependencyGraph(nodes=committed, edges=edges)


def is_serializable(history: History) -> tuple[bool, list[int] | None]:
    """Return (True, None) for an acyclic dependency graph, else (False, cycle)"""
    if history.is_serial():
        return True, None
    cycle = dependency_graph(history).find_cycle()
    if cycle is not None:
        logger.debug(f"Dependency cycle {cycle}")
        return False, cycle
    return True, None


def histories_equivalent(first: History, second: History) -> bool:
    """Same committed transactions and the same labeled dependency graph"""
    if first.committed() != second.committed():
        return False
    return dependency_graph(first) == dependency_graph(second)
