#!/usr/bin/env python3
"""Walkthrough: the three automaton flavours and the maps between them.

Starts from a 2-register automaton for { abc : a != c and b != c },
lowers it to a register automaton (single values, fresh/eq labels only),
lifts it to skip semantics, and decides emptiness with a verified
witness.  Ends with the reverse direction: compiling skip semantics away
from a sequence-labelled automaton.
"""

from topl import (
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
    accepts,
    emptiness,
    hl_accepts,
    hl_to_topl,
    topl_to_hl,
    topl_to_ra,
)
from topl.hl import HlAutomaton, HlTransition


def word(*names):
    return tuple((Atom(n),) for n in names)


three_letter = ToplAutomaton(
    arity=1,
    registers=2,
    states=frozenset({"1", "2", "3", "4"}),
    initial="1",
    store=(BOTTOM, BOTTOM),
    transitions=(
        Transition("1", TRUE, (Assign(1, 1),), "2"),   # remember a
        Transition("2", TRUE, (Assign(2, 1),), "3"),   # remember b
        Transition("3", And(Neq(1, 1), Neq(2, 1)), NOP, "4"),  # c differs from both
    ),
    final=frozenset({"4"}),
)

print("== a 2-register automaton over single values ==")
for w in (word("1", "2", "3"), word("1", "2", "1"), word("x", "x", "y")):
    print(f"  {[v[0].name for v in w]} -> {'accept' if accepts(three_letter, w) else 'reject'}")

print("\n== lowering to a register automaton ==")
ra = topl_to_ra(three_letter)
print(f"  registers: {three_letter.registers} -> {ra.registers} (always 2m+1)")
print(f"  states: {len(three_letter.states)} -> {len(ra.states)}, "
      f"transitions: {len(three_letter.transitions)} -> {len(ra.transitions)}")
print(f"  same words, flattened: {accepts(ra, word('1', '2', '3'))}, "
      f"{accepts(ra, word('1', '2', '1'))}")

print("\n== lifting to skip semantics without changing the language ==")
hl = topl_to_hl(three_letter)
print(f"  states gain one sink: {len(three_letter.states)} -> {len(hl.states)}")
print(f"  BAB-style noise can no longer be skipped over: "
      f"{hl_accepts(hl, word('1', '2', '3'))} vs {hl_accepts(hl, word('z', '1', '2', '3'))}")

print("\n== emptiness with a verified witness ==")
witness = emptiness(three_letter)
print(f"  witness: {[v[0].name for v in witness]} "
      f"(replayed through the source automaton before being returned)")

print("\n== the reverse direction: compiling skips away ==")
# Accepts words whose first A is not surrounded by two Bs.
ab = HlAutomaton(
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
low = hl_to_topl(ab)
print(f"  registers: {ab.registers} -> {low.registers} "
      f"(m + (d-1)n buffer space for lookahead)")
for w in (word("A",), word("A", "A", "B"), word("B", "A", "B")):
    a, b = hl_accepts(ab, w), accepts(low, w)
    name = "".join(v[0].name for v in w)
    print(f"  {name}: skip semantics {a}, compiled low-level {b}")
