"""Dependency Resolver - Order methods by depends_on and match shape facts"""
from typing import Any, Dict, Iterable, List, Set

from ..errors import PreconditionError


class DependencyResolver:
    """Resolves method dependencies into execution groups"""

    def __init__(self, manifests: Dict[str, Dict[str, Any]]):
        self.manifests = manifests

    def resolve(self, enabled: Iterable[str]) -> List[List[str]]:
        """
        Group methods so that every method comes after the ones it depends on.
        Methods in the same group run concurrently.

        Raises:
            PreconditionError: the dependency graph has a cycle
        """
        enabled = list(enabled)
        graph = {
            name: [d for d in self.get_dependencies(name) if d in enabled]
            for name in enabled
        }

        if self._has_cycle(graph):
            raise PreconditionError("Circular dependency detected in methods")

        groups: List[List[str]] = []
        done: Set[str] = set()
        remaining = set(enabled)

        while remaining:
            ready = {name for name in remaining if set(graph[name]) <= done}
            groups.append(sorted(ready))
            done |= ready
            remaining -= ready

        return groups

    def _has_cycle(self, graph: Dict[str, List[str]]) -> bool:
        """DFS with a recursion stack"""
        visited = set()
        stack = set()

        def visit(node):
            if node in stack:
                return True
            if node in visited:
                return False
            visited.add(node)
            stack.add(node)
            if any(visit(nb) for nb in graph.get(node, [])):
                return True
            stack.remove(node)
            return False

        return any(visit(node) for node in graph)

    def get_dependencies(self, name: str) -> List[str]:
        return list(self.manifests.get(name, {}).get('depends_on', []))

    def check_expects(self, name: str, facts: Set[str]) -> bool:
        """
        Whether every shape fact the method expects holds.

        Args:
            facts: Facts of one tensor orientation, e.g. {'p=3', 'square', 'm<=n'}
        """
        return all(expect in facts for expect in self.manifests.get(name, {}).get('expects', []))
