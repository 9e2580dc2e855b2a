"""Dependency trees, LCA-path pruning and adjacency construction.

Tokens are numbered 1..n as in the source sentence; a head of 0 marks the
root. A *contextual sub-tree* for a trigger-entity pair keeps the tree paths
from every span token up to their lowest common ancestor, then widens by all
nodes within ``dist`` undirected hops of the non-LCA path nodes. ``dist=0``
is the bare path, ``dist<0`` keeps the whole tree. The LCA itself is always
retained but does not seed the widening, so unrelated material hanging off
the shared ancestor (typically the clause's main verb) stays out of small-
dist sub-trees.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class TreeError(ValueError):
    """Malformed head array, span out of range, or disconnected node set."""


Span = tuple[int, int]


@dataclass(frozen=True)
class DepTree:
    """An immutable dependency tree over tokens 1..n."""

    heads: tuple[int, ...]
    deprels: tuple[str, ...]
    root: int
    children: tuple[tuple[int, ...], ...]
    depth: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.heads)

    def parent(self, node: int) -> int:
        """Head of a node, 0 for the root."""
        return self.heads[node - 1]

    def neighbors(self, node: int) -> list[int]:
        out = list(self.children[node - 1])
        if self.heads[node - 1] != 0:
            out.append(self.heads[node - 1])
        return out


def build_tree(heads: Sequence[int], deprels: Sequence[str] | None = None) -> DepTree:
    """Validate a 1-based head array and index it as a DepTree.

    Requires exactly one root (head 0), heads in range, no self-loops, and
    every node reachable from the root (which rules out cycles).
    """
    heads = tuple(int(h) for h in heads)
    n = len(heads)
    if n == 0:
        raise TreeError("empty head array")
    if deprels is None:
        deprels = ("dep",) * n
    else:
        deprels = tuple(deprels)
        if len(deprels) != n:
            raise TreeError(f"{n} heads but {len(deprels)} relation labels")
    roots = [i + 1 for i, h in enumerate(heads) if h == 0]
    if len(roots) != 1:
        raise TreeError(f"expected exactly one root, found {len(roots)}: {roots}")
    kids: list[list[int]] = [[] for _ in range(n)]
    for i, h in enumerate(heads, start=1):
        if h < 0 or h > n:
            raise TreeError(f"token {i}: head {h} out of range 0..{n}")
        if h == i:
            raise TreeError(f"token {i} is its own head")
        if h != 0:
            kids[h - 1].append(i)
    root = roots[0]
    depth = [-1] * n
    depth[root - 1] = 0
    queue = deque([root])
    reached = 1
    while queue:
        node = queue.popleft()
        for child in kids[node - 1]:
            depth[child - 1] = depth[node - 1] + 1
            reached += 1
            queue.append(child)
    if reached != n:
        orphans = [i + 1 for i, d in enumerate(depth) if d < 0]
        raise TreeError(f"nodes unreachable from root {root} (cycle?): {orphans}")
    return DepTree(
        heads=heads,
        deprels=deprels,
        root=root,
        children=tuple(tuple(c) for c in kids),
        depth=tuple(depth),
    )


def _check_node(tree: DepTree, node: int) -> int:
    node = int(node)
    if not 1 <= node <= tree.n:
        raise TreeError(f"token index {node} out of range 1..{tree.n}")
    return node


def _check_span(tree: DepTree, span: Span, what: str) -> Span:
    start, end = int(span[0]), int(span[1])
    if not (1 <= start <= end <= tree.n):
        raise TreeError(f"{what} span {start}:{end} out of range 1..{tree.n}")
    return start, end


def lca(tree: DepTree, a: int | Iterable[int], b: int | Iterable[int]) -> int:
    """Lowest common ancestor of two nodes or node groups."""
    nodes = []
    for group in (a, b):
        if isinstance(group, int):
            nodes.append(_check_node(tree, group))
        else:
            members = [_check_node(tree, x) for x in group]
            if not members:
                raise TreeError("lca: empty node group")
            nodes.extend(members)
    anc = nodes[0]
    for node in nodes[1:]:
        x, y = anc, node
        while tree.depth[x - 1] > tree.depth[y - 1]:
            x = tree.parent(x)
        while tree.depth[y - 1] > tree.depth[x - 1]:
            y = tree.parent(y)
        while x != y:
            x = tree.parent(x)
            y = tree.parent(y)
        anc = x
    return anc


def path_nodes(tree: DepTree, trigger: Span, entity: Span) -> tuple[int, set[int]]:
    """LCA of both spans plus the union of paths from every span token to it."""
    ts, te = _check_span(tree, trigger, "trigger")
    es, ee = _check_span(tree, entity, "entity")
    tokens = list(range(ts, te + 1)) + list(range(es, ee + 1))
    ancestor = lca(tree, range(ts, te + 1), range(es, ee + 1))
    on_path: set[int] = {ancestor}
    for tok in tokens:
        node = tok
        while node != ancestor:
            on_path.add(node)
            node = tree.parent(node)
    return ancestor, on_path


@dataclass(frozen=True)
class SubTree:
    """A pruned node set for one trigger-entity pair.

    ``nodes`` are original 1-based token indices in sentence order;
    ``trigger_rows`` / ``entity_rows`` are positions of the span tokens
    inside ``nodes``, i.e. row indices into any matrix laid out over it.
    """

    nodes: tuple[int, ...]
    trigger: Span
    entity: Span
    dist: int
    local: dict[int, int] = field(repr=False)

    @property
    def trigger_rows(self) -> list[int]:
        return [self.local[i] for i in range(self.trigger[0], self.trigger[1] + 1)]

    @property
    def entity_rows(self) -> list[int]:
        return [self.local[i] for i in range(self.entity[0], self.entity[1] + 1)]

    def render(self, tokens: Sequence[str]) -> str:
        """Retained token texts in sentence order, space-joined."""
        return " ".join(tokens[i - 1] for i in self.nodes)


def contextual_subtree(tree: DepTree, trigger: Span, entity: Span, dist: int) -> SubTree:
    """Prune the tree around a trigger-entity pair.

    dist < 0 keeps every node. Otherwise the result is the LCA path for the
    pair widened by every node within ``dist`` hops (edges counted without
    direction) of a non-LCA path node; see the module docstring for why the
    LCA does not seed the widening.
    """
    trigger = _check_span(tree, trigger, "trigger")
    entity = _check_span(tree, entity, "entity")
    dist = int(dist)
    if dist < 0:
        keep = set(range(1, tree.n + 1))
    else:
        ancestor, on_path = path_nodes(tree, trigger, entity)
        seeds = on_path - {ancestor} or on_path
        keep = set(on_path)
        frontier = deque((s, 0) for s in seeds)
        seen = set(seeds)
        while frontier:
            node, d = frontier.popleft()
            if d == dist:
                continue
            for nb in tree.neighbors(node):
                if nb not in seen:
                    seen.add(nb)
                    keep.add(nb)
                    frontier.append((nb, d + 1))
    nodes = tuple(sorted(keep))
    local = {orig: row for row, orig in enumerate(nodes)}
    return SubTree(nodes=nodes, trigger=trigger, entity=entity, dist=dist, local=local)


@dataclass(frozen=True)
class AdjMatrix:
    """Undirected adjacency with self-loops over a sub-tree's nodes.

    ``matrix`` is symmetric with a unit diagonal; ``degrees[i]`` is the row
    sum, so every entry is at least 1.
    """

    nodes: tuple[int, ...]
    matrix: np.ndarray
    degrees: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)


def to_adjacency(tree: DepTree, sub: SubTree | None = None) -> AdjMatrix:
    """Adjacency over a sub-tree's nodes (whole tree when sub is None).

    Raises TreeError if the retained nodes are not connected through
    retained edges, which would leave the graph convolution with isolated
    islands.
    """
    nodes = sub.nodes if sub is not None else tuple(range(1, tree.n + 1))
    local = {orig: row for row, orig in enumerate(nodes)}
    m = len(nodes)
    mat = np.eye(m, dtype=np.float64)
    for orig in nodes:
        head = tree.parent(orig)
        if head != 0 and head in local:
            i, j = local[orig], local[head]
            mat[i, j] = 1.0
            mat[j, i] = 1.0
    reached = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in range(m):
            if j not in reached and mat[i, j] > 0 and i != j:
                reached.add(j)
                queue.append(j)
    if len(reached) != m:
        missing = [nodes[j] for j in range(m) if j not in reached]
        raise TreeError(f"retained nodes are disconnected; unreachable: {missing}")
    return AdjMatrix(nodes=nodes, matrix=mat, degrees=mat.sum(axis=1))


def to_dot(tree: DepTree, tokens: Sequence[str], sub: SubTree | None = None) -> str:
    """Graphviz rendering of the tree; sub-tree nodes are drawn solid."""
    if len(tokens) != tree.n:
        raise TreeError(f"{tree.n} tree nodes but {len(tokens)} token texts")
    kept = set(sub.nodes) if sub is not None else set(range(1, tree.n + 1))
    lines = ["digraph deptree {", "  rankdir=TB;", "  node [shape=box];"]
    for i in range(1, tree.n + 1):
        style = "solid" if i in kept else "dotted"
        label = f"{i}: {tokens[i - 1]}".replace('"', '\\"')
        lines.append(f'  n{i} [label="{label}", style={style}];')
    for i in range(1, tree.n + 1):
        head = tree.parent(i)
        if head != 0:
            style = "solid" if i in kept and head in kept else "dotted"
            rel = tree.deprels[i - 1].replace('"', '\\"')
            lines.append(f'  n{head} -> n{i} [label="{rel}", style={style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
