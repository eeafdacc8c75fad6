"""Colored rooted trees for stochastic B-series.

Trees carry one color per noise channel (0 for the drift/time channel,
1..M for the Wiener channels) plus a special unary color A for the linear
part.  Every tree is stored in the normal form [core]_A^q: ``a_height``
counts the chain of A-nodes grafted above the core node, so the
"A-nodes are unary" constraint is unrepresentable rather than checked.
A core color of ``None`` denotes the empty core, i.e. the tree is a pure
A-chain acting on the initial value (``a_height == 0`` is the empty tree).

Children are re-sorted into a fixed canonical order on construction, so
structural equality coincides with tree isomorphism and ``Tree`` values
can be used directly as dictionary keys.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

__all__ = [
    "Tree",
    "EMPTY",
    "leaf",
    "a_chain",
    "node",
    "rho",
    "alpha",
    "enumerate_trees",
    "canonical_key",
    "elementary_differential_text",
    "format_tree",
    "parse_tree",
]

DRIFT = 0  # letter of the drift/time channel


@dataclass(frozen=True)
class Tree:
    """Canonical colored rooted tree ``[core]_A^a_height``.

    ``color is None`` means the core is empty (pure A-chain); otherwise the
    core is a node of that color with the given children.  Children are
    normalized to canonical order by the constructor.
    """

    color: int | None
    a_height: int = 0
    children: tuple["Tree", ...] = ()

    def __post_init__(self) -> None:
        if self.a_height < 0:
            raise ValueError(f"a_height must be >= 0, got {self.a_height}")
        if self.color is None:
            if self.children:
                raise ValueError("a tree with an empty core has no children")
        elif self.color < 0:
            raise ValueError(f"color must be >= 0, got {self.color}")
        kids = tuple(self.children)
        if not kids:
            object.__setattr__(self, "children", kids)
            return
        for c in kids:
            if not isinstance(c, Tree):
                raise TypeError(f"child {c!r} is not a Tree")
            if c.is_empty:
                raise ValueError("children must be nonempty trees")
        object.__setattr__(self, "children", tuple(sorted(kids, key=_sort_key)))

    @property
    def is_empty(self) -> bool:
        return self.color is None and self.a_height == 0


EMPTY = Tree(None, 0)


def leaf(color: int) -> Tree:
    """Single node of the given color (a_height 0)."""
    return Tree(color, 0, ())


def a_chain(q: int) -> Tree:
    """The tree [empty]_A^q; q = 0 gives the empty tree."""
    return Tree(None, q, ())


def node(color: int, children=(), a_height: int = 0) -> Tree:
    return Tree(color, a_height, tuple(children))


def _rho2(t: Tree) -> int:
    """Tree order in half units (exact integer arithmetic)."""
    if t.color is None:
        return 2 * t.a_height
    root = 2 if t.color == DRIFT else 1
    return 2 * t.a_height + root + sum(_rho2(c) for c in t.children)


def rho(t: Tree) -> Fraction:
    """Order of the tree: 1 per A-level or drift node, 1/2 per Wiener node."""
    return Fraction(_rho2(t), 2)


def alpha(t: Tree) -> Fraction:
    """Symmetry-type coefficient; a_height leaves it unchanged."""
    if t.color is None:
        return Fraction(1)
    out = Fraction(1)
    for child in t.children:
        out *= alpha(child)
    for count in Counter(t.children).values():
        out /= factorial(count)
    return out


def _color_rank(t: Tree) -> int:
    # Pure A-chains sort before colored cores of equal order.
    return -1 if t.color is None else t.color


def _sort_key(t: Tree):
    return (_rho2(t), _color_rank(t), canonical_key(t))


def canonical_key(t: Tree) -> bytes:
    """Deterministic total-order key; equal keys iff isomorphic trees."""
    return format_tree(t).encode("ascii")


def format_tree(t: Tree) -> str:
    """Canonical textual notation, e.g. ``0[1, 1[A, 0]]`` or ``A^2[]``."""
    if t.color is None:
        if t.a_height == 0:
            return "()"
        if t.a_height == 1:
            return "A"
        return f"A^{t.a_height}[]"
    core = str(t.color)
    if t.children:
        core += "[" + ", ".join(format_tree(c) for c in t.children) + "]"
    if t.a_height == 0:
        return core
    return f"A^{t.a_height}[{core}]"


def parse_tree(text: str) -> Tree:
    """Parse the textual notation produced by :func:`format_tree`.

    Grammar: a bare integer is a leaf; ``m[t1, t2, ...]`` a colored node;
    ``A`` the single A-node over an empty core; ``A^q[...]`` an explicit
    A-chain of height q over an optional subtree (``A^q[]`` for the empty
    core).  Nested A-chains are folded into one height.
    """
    tree, pos = _parse_tree(text, _skip_ws(text, 0))
    pos = _skip_ws(text, pos)
    if pos != len(text):
        raise ValueError(f"trailing input at position {pos}: {text[pos:]!r}")
    return tree


def _skip_ws(s: str, i: int) -> int:
    while i < len(s) and s[i].isspace():
        i += 1
    return i


def _parse_int(s: str, i: int) -> tuple[int, int]:
    j = i
    while j < len(s) and s[j].isdigit():
        j += 1
    if j == i:
        raise ValueError(f"expected integer at position {i}")
    return int(s[i:j]), j


def _parse_tree(s: str, i: int) -> tuple[Tree, int]:
    if i >= len(s):
        raise ValueError(f"unexpected end of input at position {i}")
    if s[i] == "A":
        i += 1
        q = 1
        if i < len(s) and s[i] == "^":
            q, i = _parse_int(s, i + 1)
        if i < len(s) and s[i] == "[":
            i = _skip_ws(s, i + 1)
            if i < len(s) and s[i] == "]":
                return Tree(None, q), i + 1
            inner, i = _parse_tree(s, i)
            i = _skip_ws(s, i)
            if i >= len(s) or s[i] != "]":
                raise ValueError(f"expected ']' at position {i}")
            return _wrap_a(inner, q), i + 1
        return Tree(None, q), i
    color, i = _parse_int(s, i)
    children: list[Tree] = []
    if i < len(s) and s[i] == "[":
        i = _skip_ws(s, i + 1)
        while True:
            child, i = _parse_tree(s, i)
            children.append(child)
            i = _skip_ws(s, i)
            if i < len(s) and s[i] == ",":
                i = _skip_ws(s, i + 1)
                continue
            if i < len(s) and s[i] == "]":
                i += 1
                break
            raise ValueError(f"expected ',' or ']' at position {i}")
    return Tree(color, 0, tuple(children)), i


def _wrap_a(t: Tree, q: int) -> Tree:
    if t.color is None:
        return Tree(None, t.a_height + q)
    return Tree(t.color, t.a_height + q, t.children)


def enumerate_trees(max_order, noises: int) -> list[Tree]:
    """All nonempty trees with rho(t) <= max_order over colors {0..noises, A}.

    Every tree appears exactly once, in canonical form, sorted by
    (rho, A-chains-first color rank, canonical key).  Generation works by
    order because every constructor raises rho by at least 1/2.
    """
    bound = Fraction(max_order)
    if bound < 0:
        raise ValueError(f"max_order must be >= 0, got {max_order}")
    if noises < 0:
        raise ValueError(f"noises must be >= 0, got {noises}")
    b2 = int(2 * bound)  # floor: rho lives on the half-integer grid
    smaller: list[Tree] = []  # all trees with rho2 < current k, in order
    result: list[Tree] = []
    for k in range(1, b2 + 1):
        bucket: list[Tree] = []
        if k % 2 == 0:
            bucket.append(Tree(None, k // 2))
        for m in range(noises + 1):
            budget = k - (2 if m == DRIFT else 1)
            if budget < 0:
                continue
            for q in range(budget // 2 + 1):
                for kids in _child_multisets(smaller, budget - 2 * q):
                    bucket.append(Tree(m, q, kids))
        bucket.sort(key=_sort_key)
        result.extend(bucket)
        smaller.extend(bucket)
    return result


def _child_multisets(cands: list[Tree], budget: int) -> list[tuple[Tree, ...]]:
    """Multisets of candidate trees whose orders sum exactly to budget.

    Candidates must be sorted with nondecreasing _rho2; index-monotone
    selection yields each multiset exactly once.
    """
    out: list[tuple[Tree, ...]] = []
    acc: list[Tree] = []

    def rec(start: int, remaining: int) -> None:
        if remaining == 0:
            out.append(tuple(acc))
            return
        for idx in range(start, len(cands)):
            r2 = _rho2(cands[idx])
            if r2 > remaining:
                break
            acc.append(cands[idx])
            rec(idx, remaining - r2)
            acc.pop()

    rec(0, budget)
    return out


def elementary_differential_text(t: Tree) -> str:
    """Human-readable elementary differential, e.g. ``g_0''(g_1, A x0)(x0)``."""
    if t.is_empty:
        return "x0"
    return _ed_text(t, top=True)


def _primes(k: int) -> str:
    return "'" * k if k <= 3 else f"^({k})"


def _ed_text(t: Tree, top: bool) -> str:
    if t.color is None:
        body = "x0"
    else:
        body = f"g_{t.color}"
        if t.children:
            args = ", ".join(_ed_text(c, top=False) for c in t.children)
            body += _primes(len(t.children)) + "(" + args + ")"
    if t.a_height == 1:
        body = "A " + body
    elif t.a_height >= 2:
        body = f"A^{t.a_height} " + body
    if top and t.color is not None:
        body += "(x0)"
    return body
