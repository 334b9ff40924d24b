"""Shared fixtures for the test suite: the worked automata used across
modules, independent acceptance oracles, and seeded random generators.

The oracles deliberately avoid the library's search routines: word
acceptance is re-derived by enumerating transition paths, and high-level
acceptance by direct recursion over consume/skip choices, so they can
serve as ground truth for the breadth-first implementations.
"""

from __future__ import annotations

import random
from itertools import product

from topl.core import (
    BOTTOM,
    NOP,
    TRUE,
    And,
    Assign,
    Atom,
    Eq,
    Neq,
    ToplAutomaton,
    Transition,
    apply_action,
    conjoin,
    eval_guard,
)
from topl.hl import HlAutomaton, HlTransition


def atoms(*names):
    return tuple(Atom(n) for n in names)


# ---------------------------------------------------------------------------
# Worked automata
# ---------------------------------------------------------------------------

def three_letter_automaton() -> ToplAutomaton:
    """Words abc (arity 1) with a != c and b != c; 2 registers."""
    return ToplAutomaton(
        arity=1,
        registers=2,
        states=frozenset({"1", "2", "3", "4"}),
        initial="1",
        store=(BOTTOM, BOTTOM),
        transitions=(
            Transition("1", TRUE, (Assign(1, 1),), "2"),
            Transition("2", TRUE, (Assign(2, 1),), "3"),
            Transition("3", And(Neq(1, 1), Neq(2, 1)), NOP, "4"),
        ),
        final=frozenset({"4"}),
    )


def list_cycle_automaton(head="v0") -> ToplAutomaton:
    """Letters (next, node, successor); accepts exactly the traversals of
    a linked list starting at `head` that close a cycle."""
    next_atom = Atom("next")
    v0 = Atom(head)
    g_step = And(Eq(1, 1), Eq(3, 2))
    return ToplAutomaton(
        arity=3,
        registers=3,
        states=frozenset({"q0", "q1", "q2"}),
        initial="q0",
        store=(next_atom, v0, v0),
        transitions=(
            Transition("q0", g_step, (Assign(3, 3),), "q0"),
            Transition("q0", g_step, (Assign(2, 2), Assign(3, 3)), "q1"),
            Transition("q0", And(g_step, Eq(3, 3)), NOP, "q2"),
            Transition("q1", g_step, (Assign(3, 3),), "q1"),
            Transition("q1", And(g_step, Eq(2, 3)), NOP, "q2"),
            Transition("q2", TRUE, NOP, "q2"),
        ),
        final=frozenset({"q2"}),
    )


def ab_example() -> HlAutomaton:
    """Words over {A, B} whose first A is not surrounded by two Bs."""
    return HlAutomaton(
        arity=1,
        registers=2,
        states=frozenset({"1", "2", "3"}),
        initial="1",
        store=(Atom("A"), Atom("B")),
        transitions=(
            HlTransition("1", ((Eq(2, 1), NOP), (Eq(1, 1), NOP), (Eq(2, 1), NOP)), "2"),
            HlTransition("1", ((Eq(1, 1), NOP),), "3"),
        ),
        final=frozenset({"3"}),
    )


def single_eq_automaton(value="v") -> ToplAutomaton:
    """One transition guarded by eq 1; as a low-level automaton it accepts
    only the one-letter word (value); with skip semantics it accepts every
    word containing it."""
    return ToplAutomaton(
        arity=1,
        registers=1,
        states=frozenset({"i", "f"}),
        initial="i",
        store=(Atom(value),),
        transitions=(Transition("i", Eq(1, 1), NOP, "f"),),
        final=frozenset({"f"}),
    )


def as_hl(a: ToplAutomaton) -> HlAutomaton:
    """Reinterpret a low-level automaton as high-level with singleton
    labels (changes the language: skips become possible)."""
    return HlAutomaton(
        arity=a.arity,
        registers=a.registers,
        states=a.states,
        initial=a.initial,
        store=a.store,
        transitions=tuple(HlTransition(t.source, ((t.guard, t.action),), t.target) for t in a.transitions),
        final=a.final,
    )


# ---------------------------------------------------------------------------
# Independent acceptance oracles
# ---------------------------------------------------------------------------

def brute_accepts(a: ToplAutomaton, word) -> bool:
    """Path enumeration of depth |word| from the initial configuration."""
    def walk(state, store, i):
        if i == len(word):
            return state in a.final
        letter = word[i]
        for t in a.transitions:
            if t.source == state and eval_guard(t.guard, store, letter):
                if walk(t.target, apply_action(t.action, letter, store), i + 1):
                    return True
        return False

    return walk(a.initial, a.store, 0)


def brute_hl_accepts(a: HlAutomaton, word) -> bool:
    """Direct recursion over consume/skip choices: a transition whose
    label sequence matches a prefix may fire; one letter is skipped iff
    none does."""
    def chain(store, labels, segment):
        for (g, act), letter in zip(labels, segment):
            if not eval_guard(g, store, letter):
                return None
            store = apply_action(act, letter, store)
        return store

    def walk(state, store, rest):
        if not rest and state in a.final:
            return True
        moved = False
        for t in a.transitions:
            if t.source != state or len(t.labels) > len(rest):
                continue
            store2 = chain(store, t.labels, rest[: len(t.labels)])
            if store2 is not None:
                moved = True
                if walk(t.target, store2, rest[len(t.labels):]):
                    return True
        if not moved and rest:
            return walk(state, store, rest[1:])
        return False

    return walk(a.initial, a.store, tuple(word))


def all_words(universe, arity, max_len):
    """Every word of length 0..max_len over universe^arity."""
    letters = [tuple(c) for c in product(universe, repeat=arity)]
    out = [()]
    for length in range(1, max_len + 1):
        out.extend(product(letters, repeat=length))
    return out


def language(a: ToplAutomaton, universe, max_len) -> frozenset:
    """Accepted words of length <= max_len over the universe, computed by
    sharing configuration sets along the word trie."""
    letters = [tuple(c) for c in product(universe, repeat=a.arity)]
    accepted = []

    def node_accepts(frontier):
        return any(q in a.final for q, _ in frontier)

    def explore(prefix, frontier):
        if node_accepts(frontier):
            accepted.append(prefix)
        if len(prefix) == max_len:
            return
        for letter in letters:
            nxt = set()
            for q, store in frontier:
                for t in a.outgoing(q):
                    if eval_guard(t.guard, store, letter):
                        nxt.add((t.target, apply_action(t.action, letter, store)))
            if nxt:
                explore(prefix + (letter,), frozenset(nxt))

    explore((), frozenset({(a.initial, a.store)}))
    return frozenset(accepted)


# ---------------------------------------------------------------------------
# Random instance generators (plain seeded random; deterministic)
# ---------------------------------------------------------------------------

UNIVERSE = atoms("a", "b", "c")


def random_guard(rng: random.Random, m: int, n: int):
    k = rng.randint(0, 2)
    picks = []
    for _ in range(k):
        if m == 0:
            break
        cls = rng.choice((Eq, Neq))
        picks.append(cls(rng.randint(1, m), rng.randint(1, n)))
    return conjoin(picks)


def random_action(rng: random.Random, m: int, n: int):
    k = rng.randint(0, 2)
    if m == 0:
        return NOP
    return tuple(Assign(rng.randint(1, m), rng.randint(1, n)) for _ in range(k))


def random_topl(seed: int, max_states: int = 4, max_regs: int = 2, max_arity: int = 2) -> ToplAutomaton:
    rng = random.Random(seed)
    n_states = rng.randint(1, max_states)
    m = rng.randint(0, max_regs)
    n = rng.randint(1, max_arity)
    states = [f"s{i}" for i in range(n_states)]
    transitions = tuple(
        Transition(rng.choice(states), random_guard(rng, m, n), random_action(rng, m, n), rng.choice(states))
        for _ in range(rng.randint(1, 6))
    )
    n_final = rng.randint(0, n_states)
    return ToplAutomaton(
        arity=n,
        registers=m,
        states=frozenset(states),
        initial=rng.choice(states),
        store=tuple(rng.choice(UNIVERSE) for _ in range(m)),
        transitions=transitions,
        final=frozenset(rng.sample(states, n_final)),
    )


def random_hl(seed: int, max_states: int = 4, max_regs: int = 2, max_arity: int = 1,
              max_label_len: int = 3) -> HlAutomaton:
    rng = random.Random(seed)
    n_states = rng.randint(1, max_states)
    m = rng.randint(0, max_regs)
    n = rng.randint(1, max_arity)
    states = [f"s{i}" for i in range(n_states)]
    transitions = []
    for _ in range(rng.randint(1, 4)):
        length = rng.randint(1, max_label_len)
        labels = tuple((random_guard(rng, m, n), random_action(rng, m, n)) for _ in range(length))
        transitions.append(HlTransition(rng.choice(states), labels, rng.choice(states)))
    n_final = rng.randint(0, n_states)
    return HlAutomaton(
        arity=n,
        registers=m,
        states=frozenset(states),
        initial=rng.choice(states),
        store=tuple(rng.choice(UNIVERSE) for _ in range(m)),
        transitions=tuple(transitions),
        final=frozenset(rng.sample(states, n_final)),
    )


def random_ra(seed: int, max_states: int = 5, max_regs: int = 3):
    from topl.translate import RegisterAutomaton

    rng = random.Random(seed)
    n_states = rng.randint(1, max_states)
    m = rng.randint(1, max_regs)
    states = [f"s{i}" for i in range(n_states)]
    fresh = conjoin(Neq(i, 1) for i in range(1, m + 1))
    transitions = []
    for _ in range(rng.randint(1, 7)):
        if rng.random() < 0.5:
            label = (fresh, (Assign(rng.randint(1, m), 1),))
        else:
            label = (Eq(rng.randint(1, m), 1), NOP)
        transitions.append(Transition(rng.choice(states), label[0], label[1], rng.choice(states)))
    n_final = rng.randint(0, n_states)
    store_pool = atoms("a", "b", "c", "d", "e")
    return RegisterAutomaton(
        arity=1,
        registers=m,
        states=frozenset(states),
        initial=rng.choice(states),
        store=tuple(rng.choice(store_pool) for _ in range(m)),
        transitions=tuple(transitions),
        final=frozenset(rng.sample(states, n_final)),
    )
