"""Reduced ordered binary decision diagrams with complement edges.

Functions are referred to by integer handles.  ``1`` is the constant true
function and ``-1`` the constant false function; any other handle ``+v`` /
``-v`` denotes the function of the node stored at index ``v``, plain or
complemented.  Every stored node keeps its high branch regular
(uncomplemented), which together with hash-consing makes the representation
canonical: two handles in one manager denote the same Boolean function
exactly when the handles are equal.

A manager and every function inside it belong to one thread of control at a
time; independent managers may be used concurrently.
"""

from __future__ import annotations

import weakref

TRUE = 1
FALSE = -1

_GC_MIN_THRESHOLD = 1 << 16


class BddError(Exception):
    """Misuse of the BDD API (wrong manager, unknown variable, ...)."""


class BddManager:
    """Owns the unique node table, the operation caches and the variables.

    ``num_vars`` fixes the variable universe up front.  ``order`` optionally
    lists the variable indices from the top level downwards; the default is
    the identity order.  There is no dynamic reordering: results are
    deterministic functions of the construction order of operations.
    """

    def __init__(self, num_vars: int, order=None, gc_threshold: int = 1 << 18):
        if num_vars < 0:
            raise BddError("num_vars must be non-negative")
        self.num_vars = num_vars
        if order is None:
            order = list(range(num_vars))
        else:
            order = list(order)
            if sorted(order) != list(range(num_vars)):
                raise BddError("order must be a permutation of 0..num_vars-1")
        self._var_at_level = order
        self._level_of = [0] * num_vars
        for lvl, v in enumerate(order):
            self._level_of[v] = lvl
        # _nodes[i] = (level, high, low); index 0 unused, index 1 = terminal.
        self._nodes = [None, (num_vars, 0, 0)]
        self._unique = {}
        self._ite_cache = {}
        self._cof_cache = {}
        self._swap_cache = {}
        self._free = []
        self._live = 1
        self.peak_live = 1
        self._gc_threshold = max(gc_threshold, _GC_MIN_THRESHOLD)
        # objects with a gc_roots() method whose functions must survive
        # garbage collection (Bdd wrappers, algebraic matrices)
        self._providers = weakref.WeakSet()

    def register(self, provider) -> None:
        self._providers.add(provider)

    # ------------------------------------------------------------------
    # node construction
    # ------------------------------------------------------------------

    def _mk(self, level: int, high: int, low: int) -> int:
        if high == low:
            return high
        if high < 0:
            return -self._mk(level, -high, -low)
        key = (level, high, low)
        found = self._unique.get(key)
        if found is not None:
            return found
        if self._free:
            idx = self._free.pop()
            self._nodes[idx] = key
        else:
            idx = len(self._nodes)
            self._nodes.append(key)
        self._unique[key] = idx
        self._live += 1
        if self._live > self.peak_live:
            self.peak_live = self._live
        return idx

    def _branches(self, e: int, level: int):
        node = self._nodes[abs(e)]
        if node[0] != level:
            return e, e
        if e > 0:
            return node[1], node[2]
        return -node[1], -node[2]

    def level_of_var(self, var: int) -> int:
        if not 0 <= var < self.num_vars:
            raise BddError(f"unknown variable {var}")
        return self._level_of[var]

    # ------------------------------------------------------------------
    # core operations (raw handles)
    # ------------------------------------------------------------------

    def var(self, var: int) -> int:
        return self._mk(self.level_of_var(var), TRUE, FALSE)

    def ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE:
            return g
        if f == FALSE:
            return h
        if g == h:
            return g
        if g == f:
            g = TRUE
        elif g == -f:
            g = FALSE
        if h == f:
            h = FALSE
        elif h == -f:
            h = TRUE
        if g == h:
            return g
        if g == TRUE and h == FALSE:
            return f
        if g == FALSE and h == TRUE:
            return -f
        # Normalize for cache hits: first argument regular, then-branch regular,
        # and commutative forms (and/or/xor) ordered by handle.
        if f < 0:
            f, g, h = -f, h, g
        neg = False
        if g < 0:
            g, h, neg = -g, -h, True
        if h == FALSE and f > g:        # f & g
            f, g = g, f
        elif g == TRUE and 0 < h < f:   # f | h
            f, h = h, f
        elif h == -g and f > g:         # ~(f ^ g)
            f, g, h = g, f, -f
        key = (f, g, h)
        res = self._ite_cache.get(key)
        if res is None:
            nodes = self._nodes
            lf = nodes[f][0]
            lg = nodes[abs(g)][0]
            lh = nodes[abs(h)][0]
            top = lf
            if lg < top:
                top = lg
            if lh < top:
                top = lh
            f1, f0 = self._branches(f, top)
            g1, g0 = self._branches(g, top)
            h1, h0 = self._branches(h, top)
            res = self._mk(top, self.ite(f1, g1, h1), self.ite(f0, g0, h0))
            self._ite_cache[key] = res
        return -res if neg else res

    def apply_and(self, f: int, g: int) -> int:
        return self.ite(f, g, FALSE)

    def apply_or(self, f: int, g: int) -> int:
        return self.ite(f, TRUE, g)

    def apply_xor(self, f: int, g: int) -> int:
        return self.ite(f, -g, g)

    def apply_not(self, f: int) -> int:
        return -f

    def cofactor(self, f: int, var: int, value) -> int:
        """Restriction of f with ``var`` fixed to 0 or 1."""
        return self._cofactor_level(f, self.level_of_var(var), 1 if value else 0)

    def _cofactor_level(self, f: int, level: int, value: int) -> int:
        if f == TRUE or f == FALSE:
            return f
        if f < 0:
            return -self._cofactor_level(-f, level, value)
        node = self._nodes[f]
        if node[0] > level:
            return f
        if node[0] == level:
            return node[1] if value else node[2]
        key = (f, level, value)
        res = self._cof_cache.get(key)
        if res is None:
            res = self._mk(
                node[0],
                self._cofactor_level(node[1], level, value),
                self._cofactor_level(node[2], level, value),
            )
            self._cof_cache[key] = res
        return res

    def swap_branches(self, f: int, var: int) -> int:
        """Exchange the two cofactors of f on ``var``.

        The result g satisfies g|_{var=1} = f|_{var=0} and vice versa; a
        function independent of ``var`` is returned unchanged.
        """
        return self._swap_level(f, self.level_of_var(var))

    def _swap_level(self, f: int, level: int) -> int:
        if f == TRUE or f == FALSE:
            return f
        if f < 0:
            return -self._swap_level(-f, level)
        node = self._nodes[f]
        if node[0] > level:
            return f
        if node[0] == level:
            return self._mk(level, node[2], node[1])
        key = (f, level)
        res = self._swap_cache.get(key)
        if res is None:
            res = self._mk(
                node[0],
                self._swap_level(node[1], level),
                self._swap_level(node[2], level),
            )
            self._swap_cache[key] = res
        return res

    def equal(self, f: int, g: int) -> bool:
        return f == g

    def evaluate(self, f: int, values) -> bool:
        """Evaluate f under ``values``, a sequence indexed by variable."""
        while f != TRUE and f != FALSE:
            sign = f < 0
            level, high, low = self._nodes[abs(f)]
            f = high if values[self._var_at_level[level]] else low
            if sign:
                f = -f
        return f == TRUE

    def count_nodes(self, f: int) -> int:
        """Number of distinct nodes (terminal included) reachable from f."""
        seen = set()
        stack = [abs(f)]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            if v != 1:
                _, high, low = self._nodes[v]
                stack.append(abs(high))
                stack.append(abs(low))
        return len(seen)

    @property
    def live_nodes(self) -> int:
        return self._live

    # ------------------------------------------------------------------
    # garbage collection
    # ------------------------------------------------------------------

    def maybe_collect(self, roots=()) -> None:
        if self._live >= self._gc_threshold:
            self.collect(roots)

    def collect(self, roots=()) -> None:
        """Reclaim nodes unreachable from ``roots`` and registered providers.

        Handles of surviving nodes are unchanged; freed indices are recycled
        by later allocations.  All operation caches are dropped.
        """
        mark = {1}
        stack = [abs(r) for r in roots]
        for provider in self._providers:
            stack.extend(abs(r) for r in provider.gc_roots())
        nodes = self._nodes
        while stack:
            v = stack.pop()
            if v in mark:
                continue
            mark.add(v)
            _, high, low = nodes[v]
            if abs(high) not in mark:
                stack.append(abs(high))
            if abs(low) not in mark:
                stack.append(abs(low))
        free = self._free
        unique = self._unique
        for idx in range(2, len(nodes)):
            entry = nodes[idx]
            if entry is not None and idx not in mark:
                del unique[entry]
                nodes[idx] = None
                free.append(idx)
        self._live = len(mark)
        self._ite_cache.clear()
        self._cof_cache.clear()
        self._swap_cache.clear()
        self._gc_threshold = max(_GC_MIN_THRESHOLD, 2 * self._live)

    # ------------------------------------------------------------------
    # wrapper API
    # ------------------------------------------------------------------

    def constant(self, value: bool) -> "Bdd":
        return self.bdd(TRUE if value else FALSE)

    def variable(self, var: int) -> "Bdd":
        return self.bdd(self.var(var))

    def bdd(self, handle: int) -> "Bdd":
        return Bdd(self, handle)

    def to_dot(self, f: int, name: str = "bdd") -> str:
        """Render the graph of f as DOT text (debugging aid)."""
        lines = [f"digraph {name} {{"]
        lines.append('  one [label="1", shape=box];')
        seen = set()
        stack = [abs(f)]
        while stack:
            v = stack.pop()
            if v in seen or v == 1:
                continue
            seen.add(v)
            level, high, low = self._nodes[v]
            lines.append(f'  n{v} [label="x{self._var_at_level[level]}"];')
            for child, style in ((high, "solid"), (low, "dashed")):
                tgt = "one" if abs(child) == 1 else f"n{abs(child)}"
                dot = " [style=%s%s]" % (style, ", arrowhead=odot" if child < 0 else "")
                lines.append(f"  n{v} -> {tgt}{dot};")
                stack.append(abs(child))
        root = "one" if abs(f) == 1 else f"n{abs(f)}"
        lines.append(f'  root [shape=point]; root -> {root}{" [arrowhead=odot]" if f < 0 else ""};')
        lines.append("}")
        return "\n".join(lines)


class Bdd:
    """A Boolean function bound to a manager.

    Thin operator-overloading wrapper around a raw handle.  Wrapper objects
    are tracked weakly by the manager so their functions survive garbage
    collection.
    """

    __slots__ = ("manager", "_root", "__weakref__")

    def __init__(self, manager: BddManager, root: int):
        self.manager = manager
        self._root = root
        manager.register(self)

    def gc_roots(self):
        return (self._root,)

    @property
    def root(self) -> int:
        return self._root

    def _coerce(self, other: "Bdd") -> int:
        if other.manager is not self.manager:
            raise BddError("operands belong to different managers")
        return other._root

    def __and__(self, other):
        return Bdd(self.manager, self.manager.apply_and(self._root, self._coerce(other)))

    def __or__(self, other):
        return Bdd(self.manager, self.manager.apply_or(self._root, self._coerce(other)))

    def __xor__(self, other):
        return Bdd(self.manager, self.manager.apply_xor(self._root, self._coerce(other)))

    def __invert__(self):
        return Bdd(self.manager, -self._root)

    def ite(self, g: "Bdd", h: "Bdd"):
        return Bdd(self.manager, self.manager.ite(self._root, self._coerce(g), self._coerce(h)))

    def cofactor(self, var: int, value) -> "Bdd":
        return Bdd(self.manager, self.manager.cofactor(self._root, var, value))

    def swap_branches(self, var: int) -> "Bdd":
        return Bdd(self.manager, self.manager.swap_branches(self._root, var))

    def __eq__(self, other):
        return (
            isinstance(other, Bdd)
            and other.manager is self.manager
            and other._root == self._root
        )

    def __hash__(self):
        return hash((id(self.manager), self._root))

    def __call__(self, values) -> bool:
        return self.manager.evaluate(self._root, values)

    def is_true(self) -> bool:
        return self._root == TRUE

    def is_false(self) -> bool:
        return self._root == FALSE

    def count_nodes(self) -> int:
        return self.manager.count_nodes(self._root)

    def to_dot(self) -> str:
        return self.manager.to_dot(self._root)

    def __repr__(self):
        return f"Bdd(root={self._root})"
