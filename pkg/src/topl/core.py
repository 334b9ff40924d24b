"""Low-level automata over infinite value alphabets.

Values are opaque atoms compared only by equality.  An automaton with
``registers`` store cells and ``arity``-wide letters moves between states
via transitions labelled with a guard (store/letter comparisons) and an
action (copy letter components into store cells).  All indices are
1-based, both in code and in the serialized form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Union


class StructureError(Exception):
    """An automaton (or an operation on it) is structurally invalid."""


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    """An opaque value; two atoms are equal iff their names are equal."""

    name: str

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"


@dataclass(frozen=True)
class EventId:
    """Identifier of an observable event: a call or return of a method."""

    kind: str  # "call" | "ret"
    method: str

    def __post_init__(self) -> None:
        if self.kind not in ("call", "ret"):
            raise ValueError(f"event kind must be 'call' or 'ret', got {self.kind!r}")

    def __repr__(self) -> str:
        return f"EventId({self.kind} {self.method})"


@dataclass(frozen=True)
class _Bottom:
    """The dummy value; equal only to itself."""

    def __repr__(self) -> str:
        return "BOTTOM"


BOTTOM = _Bottom()

Value = Union[Atom, EventId, _Bottom]

# Letters and stores are fixed-length tuples of values; the owning
# automaton fixes the lengths (arity n and register count m).
Letter = tuple  # tuple[Value, ...], length n >= 1
Store = tuple   # tuple[Value, ...], length m >= 0
Word = tuple    # tuple[Letter, ...]


# ---------------------------------------------------------------------------
# Guards
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Eq:
    """store(reg) == letter(pos)"""

    reg: int
    pos: int


@dataclass(frozen=True)
class Neq:
    """store(reg) != letter(pos)"""

    reg: int
    pos: int


@dataclass(frozen=True)
class TrueGuard:
    """Always satisfied."""


@dataclass(frozen=True)
class And:
    left: "Guard"
    right: "Guard"


@dataclass(frozen=True)
class MethodMatch:
    """letter(pos) is an EventId of `kind` whose method matches a pattern.

    Patterns are alternatives of glob strings (``*`` matches any run of
    characters; matching is exact when no ``*`` is present).  With
    ``negated`` the node is the exact complement: satisfied unless the
    component is a matching event id of that kind.  This node is an
    extension used by the property compiler; the translations to
    register-automaton form and from high-level automata reject it,
    because a pattern cannot be evaluated against a stored value.
    """

    pos: int
    kind: str  # "call" | "ret"
    patterns: tuple  # tuple[str, ...]
    negated: bool = False


TRUE = TrueGuard()

Guard = Union[Eq, Neq, TrueGuard, And, MethodMatch]


def conjuncts(g: Guard) -> list:
    """Flatten nested conjunctions into the list of atomic guards."""
    if isinstance(g, And):
        return conjuncts(g.left) + conjuncts(g.right)
    if isinstance(g, TrueGuard):
        return []
    return [g]


def conjoin(atoms: Iterable[Guard]) -> Guard:
    """Left-associated conjunction of atomic guards; TRUE when empty."""
    result: Guard = None  # type: ignore[assignment]
    for a in atoms:
        result = a if result is None else And(result, a)
    return TRUE if result is None else result


@lru_cache(maxsize=1024)
def _glob_regex(pattern: str) -> "re.Pattern[str]":
    parts = (re.escape(p) for p in pattern.split("*"))
    return re.compile(".*".join(parts) + r"\Z")


def method_matches(patterns: tuple, name: str) -> bool:
    for pat in patterns:
        if "*" in pat:
            if _glob_regex(pat).match(name):
                return True
        elif pat == name:
            return True
    return False


# ---------------------------------------------------------------------------
# Actions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    """store(reg) := letter(pos)"""

    reg: int
    pos: int


# An action is an ordered tuple of assignments, applied left to right;
# the empty tuple is the no-op.
Action = tuple  # tuple[Assign, ...]

NOP: Action = ()


# ---------------------------------------------------------------------------
# Automata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Transition:
    source: str
    guard: Guard
    action: Action
    target: str


@dataclass(frozen=True)
class ToplAutomaton:
    """Finite-state automaton with an m-register store over n-tuple letters.

    A transition fires when its guard holds of (current store, letter);
    its action then updates the store, and the letter is consumed whole.
    A word is accepted when some run from (initial, store) ends in a
    final state.  The empty word is accepted iff the initial state is
    final.
    """

    arity: int
    registers: int
    states: frozenset
    initial: str
    store: Store
    transitions: tuple  # tuple[Transition, ...]
    final: frozenset

    def outgoing(self, state: str) -> tuple:
        index = self.__dict__.get("_outgoing")
        if index is None:
            index = {}
            for t in self.transitions:
                index.setdefault(t.source, []).append(t)
            index = {q: tuple(ts) for q, ts in index.items()}
            self.__dict__["_outgoing"] = index
        return index.get(state, ())


@dataclass(frozen=True)
class Configuration:
    state: str
    store: Store


# ---------------------------------------------------------------------------
# Semantics
# ---------------------------------------------------------------------------

def _check_reg(reg: int, m: int) -> None:
    if not 1 <= reg <= m:
        raise StructureError(f"register index {reg} out of range 1..{m}")


def _check_pos(pos: int, n: int) -> None:
    if not 1 <= pos <= n:
        raise StructureError(f"letter index {pos} out of range 1..{n}")


def eval_guard(g: Guard, s: Store, l: Letter) -> bool:
    """Truth of guard `g` for store `s` and letter `l` (1-based indices).

    Out-of-bounds indices raise StructureError: a malformed automaton is
    an error, never a quiet False.
    """
    if isinstance(g, TrueGuard):
        return True
    if isinstance(g, Eq):
        _check_reg(g.reg, len(s))
        _check_pos(g.pos, len(l))
        return s[g.reg - 1] == l[g.pos - 1]
    if isinstance(g, Neq):
        _check_reg(g.reg, len(s))
        _check_pos(g.pos, len(l))
        return s[g.reg - 1] != l[g.pos - 1]
    if isinstance(g, And):
        return eval_guard(g.left, s, l) and eval_guard(g.right, s, l)
    if isinstance(g, MethodMatch):
        _check_pos(g.pos, len(l))
        v = l[g.pos - 1]
        hit = isinstance(v, EventId) and v.kind == g.kind and method_matches(g.patterns, v.method)
        return hit != g.negated
    raise StructureError(f"unknown guard node {g!r}")


def apply_action(a: Action, l: Letter, s: Store) -> Store:
    """Store after running the assignments of `a` left to right on `s`."""
    if not a:
        return s
    out = list(s)
    for asg in a:
        _check_reg(asg.reg, len(s))
        _check_pos(asg.pos, len(l))
        out[asg.reg - 1] = l[asg.pos - 1]
    return tuple(out)


def step(a: ToplAutomaton, c: Configuration, l: Letter) -> set:
    """All configurations reachable from `c` by consuming the letter `l`."""
    if len(l) != a.arity:
        raise StructureError(f"letter has arity {len(l)}, automaton expects {a.arity}")
    out = set()
    for t in a.outgoing(c.state):
        if eval_guard(t.guard, c.store, l):
            out.add(Configuration(t.target, apply_action(t.action, l, c.store)))
    return out


def accepts(a: ToplAutomaton, w: Iterable[Letter]) -> bool:
    """Breadth-first set-of-configurations run; True iff some run accepts."""
    frontier = {Configuration(a.initial, a.store)}
    for letter in w:
        nxt = set()
        for c in frontier:
            nxt |= step(a, c, letter)
        frontier = nxt
        if not frontier:
            return False
    return any(c.state in a.final for c in frontier)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _guard_diagnostics(g: Guard, m: int, n: int, where: str) -> Iterator[str]:
    for atom in conjuncts(g):
        if isinstance(atom, (Eq, Neq)):
            if not 1 <= atom.reg <= m:
                yield f"{where}: register index out of range ({atom.reg} not in 1..{m})"
            if not 1 <= atom.pos <= n:
                yield f"{where}: letter index out of range ({atom.pos} not in 1..{n})"
        elif isinstance(atom, MethodMatch):
            if not 1 <= atom.pos <= n:
                yield f"{where}: letter index out of range ({atom.pos} not in 1..{n})"
            if atom.kind not in ("call", "ret"):
                yield f"{where}: bad event kind {atom.kind!r}"


def validate_automaton(a: ToplAutomaton) -> list:
    """Every violated structural invariant, as human-readable diagnostics.

    An empty list means the automaton is well formed.
    """
    diags: list = []
    if a.arity < 1:
        diags.append(f"arity must be >= 1, got {a.arity}")
    if a.registers < 0:
        diags.append(f"register count must be >= 0, got {a.registers}")
    if a.initial not in a.states:
        diags.append(f"initial state unknown ({a.initial!r} not in states)")
    for q in sorted(a.final):
        if q not in a.states:
            diags.append(f"final state unknown ({q!r} not in states)")
    if len(a.store) != a.registers:
        diags.append(f"initial store has length {len(a.store)}, expected {a.registers}")
    for i, t in enumerate(a.transitions):
        where = f"transition {i} ({t.source}->{t.target})"
        if t.source not in a.states:
            diags.append(f"{where}: source state unknown")
        if t.target not in a.states:
            diags.append(f"{where}: target state unknown")
        diags.extend(_guard_diagnostics(t.guard, a.registers, a.arity, where))
        for asg in t.action:
            if not 1 <= asg.reg <= a.registers:
                diags.append(f"{where}: register index out of range ({asg.reg} not in 1..{a.registers})")
            if not 1 <= asg.pos <= a.arity:
                diags.append(f"{where}: letter index out of range ({asg.pos} not in 1..{a.arity})")
    return diags


def require_valid(a: ToplAutomaton) -> None:
    diags = validate_automaton(a)
    if diags:
        raise StructureError("invalid automaton: " + "; ".join(diags))
