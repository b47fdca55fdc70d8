"""A red-black tree map with parent links, and a stream over it whose seek
climbs from the cursor before descending, so that nearby targets cost
little and distant ones O(log n).
"""

from __future__ import annotations

from typing import Any, Callable

from .core import Contraction, IndexedStream, MaskFn, instrumentation
from .fusion import INDENT, Gen, Val, below


class Node:
    __slots__ = ("key", "value", "left", "right", "parent", "red")

    def __init__(self, key, value, parent=None):
        self.key = key
        self.value = value
        self.left = None
        self.right = None
        self.parent = parent
        self.red = True

    def __repr__(self):
        return f"Node({self.key!r})"


def _zero_of(default):
    return default() if callable(default) else default


class OrderedTreeMap:
    """Insert/get map; also a keyed sink (missing keys read as
    ``default``, which may be a factory)."""

    __slots__ = ("root", "size", "default", "plain")

    def __init__(self, default: Any = 0):
        self.root: Node | None = None
        self.size = 0
        self.default = default
        self.plain = True  # no stream-like values stored

    @classmethod
    def from_items(cls, items, default: Any = 0) -> OrderedTreeMap:
        t = cls(default)
        for k, v in items:
            t.insert(k, v)
        return t

    def __len__(self):
        return self.size

    def _find(self, key):
        n = self.root
        while n is not None:
            k = n.key
            if key < k:
                n = n.left
            elif k < key:
                n = n.right
            else:
                return n
        return None

    def get(self, key, default=None):
        n = self._find(key)
        return default if n is None else n.value

    def __contains__(self, key):
        return self._find(key) is not None

    def insert(self, key, value) -> OrderedTreeMap:
        """Set ``key`` to ``value`` (replacing any existing entry)."""
        if self.plain and isinstance(value, (IndexedStream, Contraction, MaskFn)):
            self.plain = False
        parent = None
        n = self.root
        while n is not None:
            parent = n
            if key < n.key:
                n = n.left
            elif n.key < key:
                n = n.right
            else:
                n.value = value
                return self
        z = Node(key, value, parent)
        if parent is None:
            self.root = z
        elif key < parent.key:
            parent.left = z
        else:
            parent.right = z
        self.size += 1
        self._fixup(z)
        return self

    def _rotate_left(self, x):
        y = x.right
        x.right = y.left
        if y.left is not None:
            y.left.parent = x
        y.parent = x.parent
        if x.parent is None:
            self.root = y
        elif x is x.parent.left:
            x.parent.left = y
        else:
            x.parent.right = y
        y.left = x
        x.parent = y

    def _rotate_right(self, x):
        y = x.left
        x.left = y.right
        if y.right is not None:
            y.right.parent = x
        y.parent = x.parent
        if x.parent is None:
            self.root = y
        elif x is x.parent.right:
            x.parent.right = y
        else:
            x.parent.left = y
        y.right = x
        x.parent = y

    def _fixup(self, z):
        while z.parent is not None and z.parent.red:
            p = z.parent
            g = p.parent
            if p is g.left:
                u = g.right
                if u is not None and u.red:
                    p.red = u.red = False
                    g.red = True
                    z = g
                    continue
                if z is p.right:
                    z = p
                    self._rotate_left(z)
                    p = z.parent
                p.red = False
                g.red = True
                self._rotate_right(g)
            else:
                u = g.left
                if u is not None and u.red:
                    p.red = u.red = False
                    g.red = True
                    z = g
                    continue
                if z is p.left:
                    z = p
                    self._rotate_right(z)
                    p = z.parent
                p.red = False
                g.red = True
                self._rotate_left(g)
        self.root.red = False

    # sink interface

    def zero(self):
        return _zero_of(self.default)

    def slot(self, key):
        n = self._find(key)
        return _zero_of(self.default) if n is None else n.value

    def put(self, key, value):
        self.insert(key, value)

    def add(self, key, value):
        n = self._find(key)
        if n is None:
            self.insert(key, _zero_of(self.default) + value)
        else:
            n.value = n.value + value

    def update(self, key, modify: Callable[[Any], Any]) -> OrderedTreeMap:
        n = self._find(key)
        if n is None:
            return self.insert(key, modify(_zero_of(self.default)))
        n.value = v = modify(n.value)
        if self.plain and isinstance(v, (IndexedStream, Contraction, MaskFn)):
            self.plain = False
        return self

    # traversal

    def first(self) -> Node | None:
        n = self.root
        if n is None:
            return None
        while n.left is not None:
            n = n.left
        return n

    def items(self):
        out = []
        n = self.first()
        while n is not None:
            out.append((n.key, n.value))
            n = successor(n)
        return out

    def keys(self):
        return [k for k, _ in self.items()]

    def validate(self) -> int:
        """Check order, colouring, black heights and parent links; returns
        the black height. Raises AssertionError on a violation."""
        root = self.root
        if root is None:
            return 0
        assert root.parent is None, "root has a parent"
        assert not root.red, "red root"
        count = [0]

        def walk(n, lo, hi):
            if n is None:
                return 1
            count[0] += 1
            assert lo is None or lo < n.key, f"order violated at {n.key!r}"
            assert hi is None or n.key < hi, f"order violated at {n.key!r}"
            for c in (n.left, n.right):
                if c is not None:
                    assert c.parent is n, f"bad parent link under {n.key!r}"
                    assert not (n.red and c.red), f"red-red at {n.key!r}"
            hl = walk(n.left, lo, n.key)
            hr = walk(n.right, n.key, hi)
            assert hl == hr, f"black heights differ at {n.key!r}"
            return hl + (0 if n.red else 1)

        h = walk(root, None, None)
        assert count[0] == self.size, "size mismatch"
        return h

    def __repr__(self):
        return f"OrderedTreeMap({self.items()!r})"


def successor(n: Node) -> Node | None:
    if n.right is not None:
        n = n.right
        while n.left is not None:
            n = n.left
        return n
    p = n.parent
    while p is not None and n is p.right:
        n = p
        p = p.parent
    return p


def tree_seek(node: Node | None, is_below: Callable[[Any], bool]) -> Node | None:
    """The least node at or after ``node`` whose key is not ``is_below``.

    ``is_below`` must be downward closed. Never moves backward. Climbs
    parent links until the target is known to lie under the current
    subtree, then binary-searches down.
    """
    if node is None or not is_below(node.key):
        return node
    candidate = node
    current = node.right
    while True:
        parent = candidate.parent
        left_child = parent is None or parent.left is candidate
        candidate = parent
        if left_child:
            if candidate is None or not is_below(candidate.key):
                break
            current = candidate.right
        elif current is not None:
            # one binary-search step while climbing
            if is_below(current.key):
                current = current.right
            else:
                candidate = current
                current = current.left
                break
    while current is not None:
        if is_below(current.key):
            current = current.right
        else:
            candidate = current
            current = current.left
    return candidate


def seek_node(node: Node | None, key, strict: bool) -> Node | None:
    """``tree_seek`` specialised to a seek target ``(key, strict)``."""
    counter = instrumentation.counter
    if counter is not None:
        def is_below(k):
            counter.comparisons += 1
            return k <= key if strict else k < key
        return tree_seek(node, is_below)
    if node is None:
        return None
    k = node.key
    if not (k <= key if strict else k < key):
        return node
    candidate = node
    current = node.right
    if strict:
        while True:
            parent = candidate.parent
            if parent is None:
                candidate = None
                break
            if parent.left is candidate:
                candidate = parent
                if key < parent.key:
                    break
                current = parent.right
            else:
                candidate = parent
                if current is not None:
                    if current.key <= key:
                        current = current.right
                    else:
                        candidate = current
                        current = current.left
                        break
        while current is not None:
            if current.key <= key:
                current = current.right
            else:
                candidate = current
                current = current.left
    else:
        while True:
            parent = candidate.parent
            if parent is None:
                candidate = None
                break
            if parent.left is candidate:
                candidate = parent
                if not parent.key < key:
                    break
                current = parent.right
            else:
                candidate = parent
                if current is not None:
                    if current.key < key:
                        current = current.right
                    else:
                        candidate = current
                        current = current.left
                        break
        while current is not None:
            if current.key < key:
                current = current.right
            else:
                candidate = current
                current = current.left
    return candidate


class TreeStream(IndexedStream):
    """In-order stream over an ``OrderedTreeMap``; the state is a node
    (None once exhausted)."""

    __slots__ = ("tree",)

    def __init__(self, tree: OrderedTreeMap):
        self.tree = tree

    def extent(self):
        return self.tree.size

    def start(self):
        return self.tree.first()

    def valid(self, q):
        return q is not None

    def ready(self, q):
        return True

    def index(self, q):
        return q.key

    def value(self, q):
        return q.value

    def seek(self, q, key, strict):
        c = instrumentation.counter
        if c is not None:
            c.seeks += 1
        return seek_node(q, key, strict)

    def _shape(self):
        return ("tree",) if self.tree.plain else None

    def _gen(self, em, ref):
        if em.backend != "python":
            from .fusion import NotFusable
            raise NotFusable("tree streams need the python backend")
        init: list[str] = []
        t = ref.load(em, init, "tree", "tree")
        nd = em.fresh("nd")
        sk = em.lift(seek_node, "seek_node")
        init.append(f"{nd} = {t}.first()")
        tree = ref.node.tree if hasattr(ref, "node") else ref.rep.tree
        kind = "scalar" if tree.plain else "any"
        k = em.fresh("key")

        def seek(key, s):
            if s == "True":
                # the common case: step to the in-order successor
                return em.count("seeks") + [
                    f"if {key} == {k}:",
                    f"{INDENT}{nd} = {em.lift(successor, 'succ')}({nd})",
                    "else:",
                    f"{INDENT}{nd} = {sk}({nd}, {key}, True)"]
            return em.count("seeks") + [f"if {below(k, key, s)}:",
                                        f"{INDENT}{nd} = {sk}({nd}, {key}, {s})"]

        return Gen(init, f"{nd} is not None", k, "True", Val(f"{nd}.value", (), kind), seek,
                   [f"{k} = {nd}.key"])

    def __repr__(self):
        return f"tree_stream({self.tree!r})"


def tree_stream(tree: OrderedTreeMap) -> TreeStream:
    return TreeStream(tree)
