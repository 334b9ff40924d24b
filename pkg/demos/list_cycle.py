#!/usr/bin/env python3
"""Walkthrough: detecting a cycle in a linked list with three registers.

Letters are (next, node, successor) observations of pointer traversal.
Register 1 pins the constant `next`, register 3 tracks the node being
visited, and register 2 is non-deterministically seeded with some node
whose revisit closes a cycle.  A fixed register bank handles lists of
any length: the specification variable is re-bound along the way.
"""

from topl import (
    NOP,
    TRUE,
    And,
    Assign,
    Atom,
    Configuration,
    Eq,
    ToplAutomaton,
    Transition,
    accepts,
    emptiness,
    step,
)

NEXT = Atom("next")
V0 = Atom("v0")

follow = And(Eq(1, 1), Eq(3, 2))  # letter is (next, current-node, _)

cycle_detector = ToplAutomaton(
    arity=3,
    registers=3,
    states=frozenset({"walk", "armed", "cycle"}),
    initial="walk",
    store=(NEXT, V0, V0),
    transitions=(
        Transition("walk", follow, (Assign(3, 3),), "walk"),
        Transition("walk", follow, (Assign(2, 2), Assign(3, 3)), "armed"),
        Transition("walk", And(follow, Eq(3, 3)), NOP, "cycle"),  # self-loop node
        Transition("armed", follow, (Assign(3, 3),), "armed"),
        Transition("armed", And(follow, Eq(2, 3)), NOP, "cycle"),  # back edge
        Transition("cycle", TRUE, NOP, "cycle"),
    ),
    final=frozenset({"cycle"}),
)


def traversal(*nodes):
    """(v0 -> v1 -> ... -> vk) as next-pointer observations."""
    out = []
    for src, dst in zip(nodes, nodes[1:]):
        out.append((NEXT, Atom(src), Atom(dst)))
    return tuple(out)


print("== walking lists from v0 ==")
examples = [
    ("straight line", traversal("v0", "v1", "v2", "v3")),
    ("closes back to v0", traversal("v0", "v1", "v2", "v0")),
    ("inner cycle v1->v2->v1", traversal("v0", "v1", "v2", "v1")),
    ("self-loop", traversal("v0", "v0")),
]
for name, w in examples:
    verdict = "cycle!" if accepts(cycle_detector, w) else "acyclic"
    arrows = " -> ".join([v[1].name for v in w] + [w[-1][2].name])
    print(f"  {arrows:28s} {verdict:8s} ({name})")

print("\n== the non-determinism at work ==")
config = Configuration("walk", (NEXT, V0, V0))
letter = (NEXT, V0, Atom("v1"))
successors = step(cycle_detector, config, letter)
print(f"  one observation, {len(successors)} active configurations:")
for c in sorted(successors, key=lambda c: c.state):
    stored = ", ".join(getattr(v, "name", "_") for v in c.store)
    print(f"    state {c.state}: registers ({stored})")

print("\n== is any cycle reachable at all? ==")
witness = emptiness(cycle_detector)
arrows = " -> ".join([v[1].name for v in witness] + [witness[-1][2].name])
print(f"  non-empty; shortest-path witness: {arrows}")
print(f"  witness replay: {accepts(cycle_detector, witness)}")
