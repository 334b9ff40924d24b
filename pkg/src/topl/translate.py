"""Register automata and translations between the automaton flavours.

Provides, over the core/hl modules:

* the register-automaton restriction (arity 1, labels limited to
  ``(fresh, set i)`` and ``(eq i, nop)``) and its validator;
* ``topl_to_ra``: tuple letters unpacked to single values, registers
  doubled plus one, language preserved up to component flattening;
* ``topl_to_hl``: one extra sink state and parallel negated transitions
  so that skips can never fire;
* ``hl_to_topl``: queue simulation; letters are buffered in spare
  registers, transition label sequences are replayed statically over a
  repartition map recorded in the state;
* emptiness with verified witnesses, and union / intersection /
  concatenation over shared-arity automata.

All constructions are deterministic: identical inputs give identical
outputs, byte for byte after serialization.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _cartesian

from .core import (
    NOP,
    And,
    Assign,
    Atom,
    Eq,
    Guard,
    MethodMatch,
    Neq,
    StructureError,
    ToplAutomaton,
    Transition,
    Word,
    accepts,
    conjoin,
    conjuncts,
    require_valid,
)
from .hl import HlAutomaton, HlTransition, hl_accepts, require_valid_hl

__all__ = [
    "RegisterAutomaton",
    "register_automaton_diagnostics",
    "flatten",
    "unflatten",
    "topl_to_ra",
    "topl_to_hl",
    "hl_to_topl",
    "ra_emptiness",
    "emptiness",
    "union",
    "intersection",
    "concat",
]


# ---------------------------------------------------------------------------
# Register automata
# ---------------------------------------------------------------------------

def _fresh_guard(m: int) -> Guard:
    """neq 1 and ... and neq m: the letter differs from every register."""
    return conjoin(Neq(i, 1) for i in range(1, m + 1))


def register_automaton_diagnostics(a: ToplAutomaton) -> list:
    """Why `a` is not a register automaton; empty list when it is one."""
    diags = []
    if a.arity != 1:
        diags.append(f"arity must be 1, got {a.arity}")
    m = a.registers
    fresh_atoms = frozenset(Neq(i, 1) for i in range(1, m + 1))
    for idx, t in enumerate(a.transitions):
        where = f"transition {idx} ({t.source}->{t.target})"
        atoms = conjuncts(t.guard)
        if any(isinstance(x, MethodMatch) for x in atoms):
            diags.append(f"{where}: method-pattern guards are not allowed")
            continue
        atom_set = frozenset(atoms)
        if atom_set == fresh_atoms and m > 0:
            if len(t.action) != 1 or t.action[0].pos != 1:
                diags.append(f"{where}: fresh label must store the letter into one register")
        elif len(atoms) == 1 and isinstance(atoms[0], Eq) and atoms[0].pos == 1:
            if t.action:
                diags.append(f"{where}: eq label must not write any register")
        else:
            diags.append(f"{where}: label is neither (fresh, set i) nor (eq i, nop)")
    return diags


@dataclass(frozen=True)
class RegisterAutomaton(ToplAutomaton):
    """A ToplAutomaton restricted to arity 1 and register-automaton labels."""

    def __post_init__(self) -> None:
        diags = register_automaton_diagnostics(self)
        if diags:
            raise StructureError("not a register automaton: " + "; ".join(diags))


# ---------------------------------------------------------------------------
# Word flattening
# ---------------------------------------------------------------------------

def flatten(w: Word) -> Word:
    """Concatenate tuple components: (a,b)(c,d) becomes a.b.c.d."""
    return tuple((v,) for letter in w for v in letter)


def unflatten(w: Word, arity: int) -> Word:
    """Inverse of `flatten` for words whose length is a multiple of arity."""
    values = [v for letter in w for v in letter]
    if len(values) % arity:
        raise StructureError(f"cannot regroup {len(values)} values into {arity}-tuples")
    return tuple(tuple(values[i:i + arity]) for i in range(0, len(values), arity))


# ---------------------------------------------------------------------------
# Guard helpers shared by the constructions
# ---------------------------------------------------------------------------

def _atoms_only(g: Guard, where: str) -> list:
    atoms = conjuncts(g)
    for a in atoms:
        if not isinstance(a, (Eq, Neq)):
            raise StructureError(f"{where}: only eq/neq/true conjunctions are translatable, got {a!r}")
    return atoms


def _negate_atom(atom):
    if isinstance(atom, Eq):
        return Neq(atom.reg, atom.pos)
    if isinstance(atom, Neq):
        return Eq(atom.reg, atom.pos)
    if isinstance(atom, MethodMatch):
        return MethodMatch(atom.pos, atom.kind, atom.patterns, not atom.negated)
    raise StructureError(f"cannot negate guard atom {atom!r}")


def _atom_key(atom):
    if isinstance(atom, Eq):
        return (0, atom.reg, atom.pos, "")
    if isinstance(atom, Neq):
        return (1, atom.reg, atom.pos, "")
    return (2, atom.pos, 0 if not atom.negated else 1, "|".join(atom.patterns) + atom.kind)


def _contradictory(atoms) -> bool:
    seen = set(atoms)
    for a in atoms:
        if seen & {_negate_atom(a)}:
            return True
    return False


def negation_dnf(guards) -> list:
    """Disjunctive normal form of NOT(g1) and ... and NOT(gd).

    Each disjunct is a tuple of atomic guards; the empty disjunct stands
    for `true`.  An always-true input guard makes the whole conjunction
    unsatisfiable, giving no disjuncts at all.
    """
    choices = []
    for g in guards:
        atoms = conjuncts(g)
        if not atoms:
            return []
        choices.append([_negate_atom(a) for a in atoms])
    disjuncts = []
    seen = set()
    for combo in _cartesian(*choices):
        atoms = tuple(sorted(set(combo), key=_atom_key))
        if _contradictory(atoms):
            continue
        if atoms in seen:
            continue
        seen.add(atoms)
        disjuncts.append(atoms)
    return disjuncts


# ---------------------------------------------------------------------------
# Low-level automaton -> register automaton
# ---------------------------------------------------------------------------

def _pad_atoms(count: int, taken: set) -> list:
    """Deterministic filler atoms distinct from each other and from `taken`."""
    out = []
    i = 1
    while len(out) < count:
        candidate = Atom(f"~pad{i}")
        i += 1
        if candidate in taken:
            continue
        out.append(candidate)
    return out


def _rvec_id(rvec) -> str:
    return ".".join(map(str, rvec)) if rvec else "-"


def topl_to_ra(a: ToplAutomaton) -> RegisterAutomaton:
    """Register automaton accepting exactly the flattened language of `a`.

    Tuples are consumed one component per step; each source state is
    refined with a repartition vector telling which of the 2m+1 output
    registers currently simulates each source register.  Source registers
    holding equal values share a simulating register, so output stores
    stay injective and equality tests reduce to index comparisons.
    Locally fresh values that the source ignores are parked in a spare
    register (register automata must store what they cannot match).
    """
    require_valid(a)
    m, n = a.registers, a.arity
    big_m = 2 * m + 1

    # Initial repartition: one output register per distinct initial value.
    value_home: dict = {}
    r0 = []
    for v in a.store:
        if v not in value_home:
            value_home[v] = len(value_home) + 1
        r0.append(value_home[v])
    r0 = tuple(r0)
    init_store = [None] * big_m
    for v, home in value_home.items():
        init_store[home - 1] = v
    pads = _pad_atoms(big_m - len(value_home), set(a.store))
    for slot in range(big_m):
        if init_store[slot] is None:
            init_store[slot] = pads.pop(0)

    for t in a.transitions:
        _atoms_only(t.guard, f"transition {t.source}->{t.target}")

    fresh = _fresh_guard(big_m)

    def main_id(q, rvec):
        return f"{q}|{_rvec_id(rvec)}"

    # Per transition and component: guard/action index sets.
    def guard_sets(t):
        eq_sets = {j: set() for j in range(1, n + 1)}
        neq_sets = {j: set() for j in range(1, n + 1)}
        for atom in conjuncts(t.guard):
            (eq_sets if isinstance(atom, Eq) else neq_sets)[atom.pos].add(atom.reg)
        return eq_sets, neq_sets

    def rebind_sets(t):
        # Component j rebinds register i iff the last assignment to i
        # among those reading components <= j reads component j itself.
        rebinds = {j: set() for j in range(1, n + 1)}
        for i in set(asg.reg for asg in t.action):
            for j in range(1, n + 1):
                last = None
                for asg in t.action:
                    if asg.reg == i and asg.pos <= j:
                        last = asg.pos
                if last == j:
                    rebinds[j].add(i)
        return rebinds

    per_transition = [(t, guard_sets(t), rebind_sets(t)) for t in a.transitions]

    transitions = []
    seen_transitions = set()
    states = set()
    final = set()
    start = main_id(a.initial, r0)
    queue = [(a.initial, r0)]
    visited = {(a.initial, r0)}
    while queue:
        q, rvec = queue.pop(0)
        sid = main_id(q, rvec)
        states.add(sid)
        if q in a.final:
            final.add(sid)
        r0_image = set(rvec)
        for ti, (t, (eq_sets, neq_sets), rebinds) in enumerate(per_transition):
            if t.source != q:
                continue
            # Walk component paths; each entry: (current state id, r_j vector).
            layer = [(sid, tuple(rvec))]
            for j in range(1, n + 1):
                c_eq = {rvec[i - 1] for i in eq_sets[j]}
                c_neq = {rvec[i - 1] for i in neq_sets[j]}
                if len(c_eq) >= 2 or (c_eq & c_neq):
                    layer = []
                    break
                rebind = sorted(rebinds[j])
                next_layer = {}
                for src_id, rj in layer:
                    branches = []
                    if c_eq:
                        c = next(iter(c_eq))
                        branches.append((Eq(c, 1), c, False))
                    else:
                        branches.append((fresh, None, True))
                        for i in sorted(set(range(1, big_m + 1)) - c_neq):
                            branches.append((Eq(i, 1), i, False))
                    for guard, hit, is_fresh in branches:
                        rj2 = list(rj)
                        if rebind:
                            if is_fresh:
                                keep = {rj[i - 1] for i in range(1, m + 1) if i not in rebinds[j]}
                                k = min(set(range(1, big_m + 1)) - r0_image - keep)
                                action = (Assign(k, 1),)
                            else:
                                k = hit
                                action = NOP
                            for i in rebind:
                                rj2[i - 1] = k
                        else:
                            if is_fresh:
                                junk = min(set(range(1, big_m + 1)) - r0_image - set(rj))
                                action = (Assign(junk, 1),)
                            else:
                                action = NOP
                        rj2 = tuple(rj2)
                        if j == n:
                            tgt_key = (t.target, rj2)
                            tgt_id = main_id(*tgt_key)
                            if tgt_key not in visited:
                                visited.add(tgt_key)
                                queue.append(tgt_key)
                        else:
                            tgt_id = f"{sid}>{t.target}#{ti}@{j}|{_rvec_id(rj2)}"
                            next_layer.setdefault((tgt_id, rj2), None)
                            states.add(tgt_id)
                        edge = (src_id, guard, action, tgt_id)
                        if edge not in seen_transitions:
                            seen_transitions.add(edge)
                            transitions.append(Transition(*edge))
                layer = [key for key in next_layer]

    return RegisterAutomaton(
        arity=1,
        registers=big_m,
        states=frozenset(states),
        initial=start,
        store=tuple(init_store),
        transitions=tuple(transitions),
        final=frozenset(final),
    )


# ---------------------------------------------------------------------------
# Low-level automaton -> high-level automaton
# ---------------------------------------------------------------------------

def topl_to_hl(a: ToplAutomaton) -> HlAutomaton:
    """High-level automaton with the same language and |Q|+1 states.

    Every low-level transition becomes a singleton-label transition; a
    sink state absorbs exactly the letters no original transition can
    take, so no configuration is ever left without a standard move and
    skips never fire.
    """
    require_valid(a)
    stuck = "stuck"
    while stuck in a.states:
        stuck += "'"
    transitions = [HlTransition(t.source, ((t.guard, t.action),), t.target) for t in a.transitions]
    for q in sorted(a.states):
        guards = [t.guard for t in a.outgoing(q)]
        for disjunct in negation_dnf(guards):
            transitions.append(HlTransition(q, ((conjoin(disjunct), NOP),), stuck))
    return HlAutomaton(
        arity=a.arity,
        registers=a.registers,
        states=a.states | {stuck},
        initial=a.initial,
        store=a.store,
        transitions=tuple(transitions),
        final=a.final,
    )


# ---------------------------------------------------------------------------
# High-level automaton -> low-level automaton
# ---------------------------------------------------------------------------

# Simulation state of the queue construction, frozen for use as a key:
#   q        hl state
#   h        number of buffered letters (0..d-1)
#   k        queue rotation offset (0..d-1)
#   rmap     tuple of (slot, register): slot ('r', i) is hl register i,
#            slot ('q', rot, j) is component j of the buffered letter at
#            rotation position rot
#   unknown  tuple of (a, b) register pairs (a < b) whose value equality
#            has never been observed by a guard
_SimState = tuple


def _freeze_rmap(rmap: dict) -> tuple:
    return tuple(sorted(rmap.items()))


def _freeze_unknown(unknown, image) -> tuple:
    keep = [p for p in unknown if p[0] in image and p[1] in image]
    return tuple(sorted(keep))


def _pair(a: int, b: int) -> tuple:
    return (a, b) if a < b else (b, a)


class _QueueSim:
    """Shared machinery for hl_to_topl: static replay of labels over the
    repartition map, letter saving with exact match-set guards, and
    finality by statically draining the queue."""

    def __init__(self, a: HlAutomaton):
        require_valid_hl(a)
        self.a = a
        self.n = a.arity
        self.m = a.registers
        self.d = a.max_label_length
        self.m_out = self.m + (self.d - 1) * self.n
        for t in a.transitions:
            for g, _ in t.labels:
                _atoms_only(g, f"transition {t.source}->{t.target}")
        self._final_cache: dict = {}

        # Initial repartition: distinct initial values share nothing.
        value_home: dict = {}
        rmap = {}
        for i, v in enumerate(a.store, start=1):
            if v not in value_home:
                value_home[v] = len(value_home) + 1
            rmap[("r", i)] = value_home[v]
        self.init_store = [None] * self.m_out
        for v, home in value_home.items():
            self.init_store[home - 1] = v
        from .core import BOTTOM

        for slot in range(self.m_out):
            if self.init_store[slot] is None:
                self.init_store[slot] = BOTTOM
        self.initial = (a.initial, 0, 0, _freeze_rmap(rmap), ())

    # -- state helpers ----------------------------------------------------

    def _slot_num(self, slot) -> int:
        if slot[0] == "r":
            return slot[1]
        return self.m + slot[1] * self.n + slot[2]

    def state_id(self, st: _SimState) -> str:
        q, h, k, rmap, unknown = st
        rpart = ",".join(f"{self._slot_num(s)}>{c}" for s, c in rmap)
        upart = ",".join(f"{a}-{b}" for a, b in unknown)
        return f"{q};h{h};k{k};r({rpart});u({upart})"

    # -- static replay of one transition over buffered letters -----------

    def static_run(self, st: _SimState, t: HlTransition):
        """Replay `t` over the queue; None when a guard statically fails.
        Only legal when len(t.labels) <= h."""
        q, h, k, rmap_t, unknown = st
        rmap = dict(rmap_t)
        uset = set(unknown)
        for step, (g, act) in enumerate(t.labels):
            rot = (k + step) % self.d
            for atom in conjuncts(g):
                reg_side = rmap[("r", atom.reg)]
                slot_side = rmap[("q", rot, atom.pos)]
                same = reg_side == slot_side
                if not same and _pair(reg_side, slot_side) in uset:
                    raise StructureError(
                        "internal: comparison of registers with unobserved equality"
                    )
                if isinstance(atom, Eq) and not same:
                    return None
                if isinstance(atom, Neq) and same:
                    return None
            for asg in act:
                rmap[("r", asg.reg)] = rmap[("q", rot, asg.pos)]
        d_lbl = len(t.labels)
        for step in range(d_lbl):
            rot = (k + step) % self.d
            for j in range(1, self.n + 1):
                rmap.pop(("q", rot, j), None)
        image = set(rmap.values())
        return (
            t.target,
            h - d_lbl,
            (k + d_lbl) % self.d,
            _freeze_rmap(rmap),
            _freeze_unknown(uset, image),
        )

    def skip_sim(self, st: _SimState) -> _SimState:
        q, h, k, rmap_t, unknown = st
        rmap = dict(rmap_t)
        for j in range(1, self.n + 1):
            rmap.pop(("q", k, j), None)
        image = set(rmap.values())
        return (q, h - 1, (k + 1) % self.d, _freeze_rmap(rmap), _freeze_unknown(unknown, image))

    def fireable(self, st: _SimState) -> list:
        out = []
        for t in self.a.outgoing(st[0]):
            if len(t.labels) <= st[1]:
                res = self.static_run(st, t)
                if res is not None:
                    out.append(res)
        return out

    def is_final(self, st: _SimState) -> bool:
        """Drain the queue with no further input; final iff some drain
        order reaches a final hl state with everything consumed."""
        cached = self._final_cache.get(st)
        if cached is not None:
            return cached
        q, h = st[0], st[1]
        if h == 0:
            result = q in self.a.final
        else:
            nexts = self.fireable(st)
            if not nexts:
                nexts = [self.skip_sim(st)]
            result = any(self.is_final(s) for s in nexts)
        self._final_cache[st] = result
        return result

    # -- saving the incoming letter ---------------------------------------

    def _cliques(self, image, uset):
        """All register sets that may simultaneously equal one value:
        the empty set, and every clique of the unobserved-equality graph."""
        verts = sorted(image)
        cliques = [()]
        def grow(base, candidates):
            for idx, v in enumerate(candidates):
                if all(_pair(v, b) in uset for b in base):
                    cur = base + (v,)
                    cliques.append(cur)
                    grow(cur, candidates[idx + 1:])
        grow((), verts)
        return cliques

    def save_branches(self, q, h, k, rmap_t, unknown):
        """All ways the incoming letter can relate to the referenced
        registers, as (guard atoms, action, successor state) triples.

        Exactly one branch fires for any store/letter: each component
        either matches a register set (a clique of the unobserved-
        equality graph) or none.  Inequalities that the certified
        distinctness of the store already implies are not re-tested.
        Fresh components go to spare registers, preferring the fixed
        bank of their queue slot so repartitions stay canonical;
        matched register sets are certified equal and merged.
        """
        rmap = dict(rmap_t)
        image = sorted(set(rmap.values()))
        uset = set(unknown)
        rot = (k + h) % self.d
        options = self._cliques(image, uset)
        out = []
        for combo in _cartesian(options, repeat=self.n):
            guard_atoms = []
            assigns = []
            parent = {c: c for c in image}

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            fresh_targets = []
            taken = set(image)
            slot_home = {}
            ok = True
            for j, match in enumerate(combo, start=1):
                mset = set(match)
                if mset:
                    canon = min(mset)
                    for c in image:
                        if c in mset:
                            guard_atoms.append(Eq(c, j))
                        elif any(_pair(c, x) in uset for x in mset):
                            # only registers that might equal the matched
                            # value need an explicit inequality
                            guard_atoms.append(Neq(c, j))
                    for c in mset:
                        ra, rb = find(canon), find(c)
                        if ra != rb:
                            parent[max(ra, rb)] = min(ra, rb)
                    slot_home[j] = canon
                else:
                    guard_atoms.extend(Neq(c, j) for c in image)
                    bank = self.m + (rot % max(1, self.d - 1)) * self.n + j
                    if bank in taken:
                        spare = [c for c in range(1, self.m_out + 1) if c not in taken]
                        if not spare:
                            ok = False
                            break
                        bank = spare[0]
                    taken.add(bank)
                    fresh_targets.append(bank)
                    assigns.append(Assign(bank, j))
                    slot_home[j] = bank
            if not ok:
                continue

            # Certified inequalities: a matched component separates its
            # match set from every other referenced register.
            uset2 = set(uset)
            for j, match in enumerate(combo, start=1):
                mset = set(match)
                if mset:
                    for x in mset:
                        for y in image:
                            if y not in mset:
                                uset2.discard(_pair(x, y))
            rmap2 = {}
            for slot, c in rmap.items():
                rmap2[slot] = find(c) if c in parent else c
            for j in range(1, self.n + 1):
                home = slot_home[j]
                rmap2[("q", rot, j)] = find(home) if home in parent else home
            uset3 = set()
            for x, y in uset2:
                fx = find(x) if x in parent else x
                fy = find(y) if y in parent else y
                if fx != fy:
                    uset3.add(_pair(fx, fy))
            # Components saved fresh together may or may not be equal.
            for i in range(len(fresh_targets)):
                for jdx in range(i + 1, len(fresh_targets)):
                    uset3.add(_pair(fresh_targets[i], fresh_targets[jdx]))
            image2 = set(rmap2.values())
            succ = (q, h + 1, k, _freeze_rmap(rmap2), _freeze_unknown(uset3, image2))
            out.append((tuple(guard_atoms), tuple(assigns), succ))
        return out

    # -- transitions of maximal length (last letter read dynamically) ----

    def long_branches(self, st: _SimState):
        """Transitions of length d: the first d-1 steps replay statically
        over the queue, the last guard/action read the incoming letter.
        Returns (concrete guard atoms, action, successor) triples plus the
        list of concrete final guards (for the skip complement)."""
        q, h, k, rmap_t, unknown = st
        branches = []
        final_guards = []
        for t in self.a.outgoing(q):
            if len(t.labels) != self.d:
                continue
            prefix = HlTransition(t.source, t.labels[:-1], t.target)
            if len(prefix.labels) != h:
                continue
            if prefix.labels:
                mid = self.static_run((q, h, k, rmap_t, unknown), prefix)
            else:
                mid = (t.target, 0, k, rmap_t, unknown)
            if mid is None:
                continue
            _, _, _, rmap_mid_t, unknown_mid = mid
            rmap_mid = dict(rmap_mid_t)
            uset = set(unknown_mid)
            g, act = t.labels[-1]
            atoms = []
            eq_on = {}
            neq_on = {}
            failed = False
            for atom in conjuncts(g):
                c = rmap_mid[("r", atom.reg)]
                if isinstance(atom, Eq):
                    atoms.append(Eq(c, atom.pos))
                    eq_on.setdefault(atom.pos, set()).add(c)
                else:
                    atoms.append(Neq(c, atom.pos))
                    neq_on.setdefault(atom.pos, set()).add(c)
            for pos, regs in eq_on.items():
                for x in regs:
                    for y in neq_on.get(pos, ()):
                        if x == y:
                            failed = True
            if failed:
                continue
            atoms = tuple(sorted(set(atoms), key=_atom_key))
            final_guards.append(atoms)

            # The guard certifies equalities (all regs eq'd to one
            # component are equal) and inequalities; apply both.
            parent = {}

            def find(x):
                parent.setdefault(x, x)
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for pos, regs in eq_on.items():
                regs = sorted(regs)
                for other in regs[1:]:
                    ra, rb = find(regs[0]), find(other)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
            for pos, regs in eq_on.items():
                for x in regs:
                    for y in neq_on.get(pos, ()):
                        uset.discard(_pair(x, y))

            image_mid = set(rmap_mid.values())
            # Homes that stay referenced after the action: every slot not
            # overwritten keeps its home, and eq-certified components
            # alias into existing homes.  Freed homes are reusable.
            overwritten = {("r", asg.reg) for asg in act}
            survivors = {c for slot, c in rmap_mid.items() if slot not in overwritten}
            for asg in act:
                hit = eq_on.get(asg.pos)
                if hit:
                    survivors.add(min(find(x) for x in hit))
            free = [c for c in range(1, self.m_out + 1) if c not in survivors]
            assigns = []
            comp_home = {}
            new_edges = []
            for asg in act:
                pos = asg.pos
                if pos not in comp_home:
                    hit = eq_on.get(pos)
                    if hit:
                        comp_home[pos] = min(find(x) for x in hit)
                    else:
                        target = free.pop(0)
                        comp_home[pos] = target
                        assigns.append(Assign(target, pos))
                        blocked = neq_on.get(pos, set())
                        for other in image_mid:
                            if other not in blocked and other != target:
                                new_edges.append(_pair(target, other))
                        for prev_pos, prev_home in comp_home.items():
                            if prev_pos != pos and prev_home not in image_mid and prev_home != target:
                                new_edges.append(_pair(target, prev_home))

            rmap_out = {}
            for slot, c in rmap_mid.items():
                rmap_out[slot] = find(c) if c in parent else c
            for asg in act:
                rmap_out[("r", asg.reg)] = comp_home[asg.pos]
            fresh_targets = {a.reg for a in assigns}
            uset2 = set()
            for x, y in uset:
                fx = find(x) if x in parent else x
                fy = find(y) if y in parent else y
                # Edges about a reused home's dead value do not apply to
                # the component just written there.
                if fx != fy and fx not in fresh_targets and fy not in fresh_targets:
                    uset2.add(_pair(fx, fy))
            uset2.update(new_edges)
            # All letters consumed: only hl registers stay referenced.
            rmap_final = {s: c for s, c in rmap_out.items() if s[0] == "r"}
            image2 = set(rmap_final.values())
            succ = (t.target, 0, 0, _freeze_rmap(rmap_final), _freeze_unknown(uset2, image2))
            branches.append((atoms, tuple(assigns), succ))
        return branches, final_guards


def hl_to_topl(a: HlAutomaton) -> ToplAutomaton:
    """Low-level automaton with the same language as the high-level `a`.

    Uses m + (d-1)*n registers: the original m plus buffer space for
    d-1 letters.  States record (hl state, buffered count, rotation,
    repartition); decisions between a standard transition and a skip are
    delayed until a full window of d letters is visible, which is exactly
    when they are determined.
    """
    sim = _QueueSim(a)
    d, n = sim.d, sim.n

    transitions = []
    seen_edges = set()
    states = {}
    final = set()

    def intern(st) -> str:
        sid = states.get(st)
        if sid is None:
            sid = sim.state_id(st)
            states[st] = sid
            pending.append(st)
            if sim.is_final(st):
                final.add(sid)
        return sid

    pending: list = []
    start_id_holder = []
    pending.append(sim.initial)
    states[sim.initial] = sim.state_id(sim.initial)
    if sim.is_final(sim.initial):
        final.add(states[sim.initial])
    start_id_holder.append(states[sim.initial])

    def add_edge(src_id, guard_atoms, action, succ):
        tgt_id = intern(succ)
        edge = (src_id, conjoin(guard_atoms), tuple(action), tgt_id)
        if edge not in seen_edges:
            seen_edges.add(edge)
            transitions.append(Transition(*edge))

    done = set()
    while pending:
        st = pending.pop(0)
        if st in done:
            continue
        done.add(st)
        sid = states[st]
        q, h, k, rmap_t, unknown = st
        if h < d - 1:
            for guard_atoms, action, succ in sim.save_branches(q, h, k, rmap_t, unknown):
                add_edge(sid, guard_atoms, action, succ)
            continue
        # Full window: h == d-1 buffered letters plus the incoming one.
        shorts = sim.fireable(st)
        for res in shorts:
            rq, rh, rk, rrmap, runknown = res
            for guard_atoms, action, succ in sim.save_branches(rq, rh, rk, rrmap, runknown):
                add_edge(sid, guard_atoms, action, succ)
        longs, final_guards = sim.long_branches(st)
        for guard_atoms, action, succ in longs:
            add_edge(sid, guard_atoms, action, succ)
        if not shorts:
            complement = negation_dnf([conjoin(g) for g in final_guards])
            if d == 1:
                for disjunct in complement:
                    add_edge(sid, disjunct, NOP, st)
            else:
                base = sim.skip_sim(st)
                bq, bh, bk, brmap, bunknown = base
                for guard_atoms, action, succ in sim.save_branches(bq, bh, bk, brmap, bunknown):
                    for disjunct in complement:
                        add_edge(sid, tuple(guard_atoms) + disjunct, action, succ)

    return ToplAutomaton(
        arity=n,
        registers=sim.m_out,
        states=frozenset(states.values()),
        initial=start_id_holder[0],
        store=tuple(sim.init_store),
        transitions=tuple(transitions),
        final=frozenset(final),
    )


# ---------------------------------------------------------------------------
# Emptiness
# ---------------------------------------------------------------------------

def ra_emptiness(a: ToplAutomaton):
    """None when the language is empty, else a witness word that replays.

    Every register-automaton label is satisfiable over the infinite value
    set (pick the register's value for eq, an unused value for fresh), so
    emptiness is plain state reachability; witnesses are built along a
    shortest path and verified by replay before being returned.
    """
    diags = register_automaton_diagnostics(a)
    if diags:
        raise StructureError(
            "not a register automaton (translate with topl_to_ra first): " + "; ".join(diags)
        )
    parent: dict = {a.initial: None}
    order = [a.initial]
    goal = None
    if a.initial in a.final:
        goal = a.initial
    idx = 0
    while idx < len(order) and goal is None:
        q = order[idx]
        idx += 1
        for t in a.outgoing(q):
            if t.target not in parent:
                parent[t.target] = (q, t)
                order.append(t.target)
                if t.target in a.final:
                    goal = t.target
                    break
    if goal is None:
        return None
    path = []
    cur = goal
    while parent[cur] is not None:
        prev, t = parent[cur]
        path.append(t)
        cur = prev
    path.reverse()

    store = list(a.store)
    used = set(store)
    witness = []
    counter = 1
    for t in path:
        atoms = conjuncts(t.guard)
        if len(atoms) == 1 and isinstance(atoms[0], Eq):
            v = store[atoms[0].reg - 1]
        else:
            while True:
                v = Atom(f"~w{counter}")
                counter += 1
                if v not in used:
                    break
        used.add(v)
        letter = (v,)
        witness.append(letter)
        for asg in t.action:
            store[asg.reg - 1] = v
    witness = tuple(witness)
    if not accepts(a, witness):
        raise StructureError("internal: constructed witness does not replay")
    return witness


def emptiness(a):
    """Emptiness for either automaton flavour; the witness (if any) is
    un-flattened back to the source arity and verified by replay."""
    if isinstance(a, HlAutomaton):
        low = hl_to_topl(a)
    elif isinstance(a, ToplAutomaton):
        low = a
    else:
        raise StructureError(f"unsupported automaton type {type(a).__name__}")
    ra = topl_to_ra(low)
    flat = ra_emptiness(ra)
    if flat is None:
        return None
    word = unflatten(flat, low.arity)
    if isinstance(a, HlAutomaton):
        if not hl_accepts(a, word):
            raise StructureError("internal: witness does not replay on the source automaton")
    else:
        if not accepts(a, word):
            raise StructureError("internal: witness does not replay on the source automaton")
    return word


# ---------------------------------------------------------------------------
# Closure constructions
# ---------------------------------------------------------------------------

def _shift_guard(g: Guard, dm: int) -> Guard:
    if isinstance(g, Eq):
        return Eq(g.reg + dm, g.pos)
    if isinstance(g, Neq):
        return Neq(g.reg + dm, g.pos)
    if isinstance(g, And):
        return And(_shift_guard(g.left, dm), _shift_guard(g.right, dm))
    return g


def _shift_action(act: tuple, dm: int) -> tuple:
    return tuple(Assign(asg.reg + dm, asg.pos) for asg in act)


def _check_same_arity(a: ToplAutomaton, b: ToplAutomaton) -> None:
    if a.arity != b.arity:
        raise StructureError(f"arity mismatch: {a.arity} vs {b.arity}")


def union(a: ToplAutomaton, b: ToplAutomaton) -> ToplAutomaton:
    """Accepts a word iff `a` or `b` does.

    Register banks sit side by side; a fresh initial state carries copies
    of both originals' initial transitions and is final iff either
    original accepts the empty word.
    """
    _check_same_arity(a, b)
    dm = a.registers
    transitions = [Transition(f"a:{t.source}", t.guard, t.action, f"a:{t.target}") for t in a.transitions]
    transitions += [
        Transition(f"b:{t.source}", _shift_guard(t.guard, dm), _shift_action(t.action, dm), f"b:{t.target}")
        for t in b.transitions
    ]
    for t in a.outgoing(a.initial):
        transitions.append(Transition("u", t.guard, t.action, f"a:{t.target}"))
    for t in b.outgoing(b.initial):
        transitions.append(Transition("u", _shift_guard(t.guard, dm), _shift_action(t.action, dm), f"b:{t.target}"))
    final = {f"a:{q}" for q in a.final} | {f"b:{q}" for q in b.final}
    if a.initial in a.final or b.initial in b.final:
        final.add("u")
    states = {f"a:{q}" for q in a.states} | {f"b:{q}" for q in b.states} | {"u"}
    return ToplAutomaton(
        arity=a.arity,
        registers=a.registers + b.registers,
        states=frozenset(states),
        initial="u",
        store=a.store + b.store,
        transitions=tuple(transitions),
        final=frozenset(final),
    )


def intersection(a: ToplAutomaton, b: ToplAutomaton) -> ToplAutomaton:
    """Accepts a word iff both `a` and `b` do (product construction)."""
    _check_same_arity(a, b)
    dm = a.registers
    states = {f"({qa}|{qb})" for qa in a.states for qb in b.states}
    transitions = []
    for ta in a.transitions:
        for tb in b.transitions:
            guard = conjoin(conjuncts(ta.guard) + conjuncts(_shift_guard(tb.guard, dm)))
            action = ta.action + _shift_action(tb.action, dm)
            transitions.append(
                Transition(f"({ta.source}|{tb.source})", guard, action, f"({ta.target}|{tb.target})")
            )
    return ToplAutomaton(
        arity=a.arity,
        registers=a.registers + b.registers,
        states=frozenset(states),
        initial=f"({a.initial}|{b.initial})",
        store=a.store + b.store,
        transitions=tuple(transitions),
        final=frozenset(f"({qa}|{qb})" for qa in a.final for qb in b.final),
    )


def concat(a: ToplAutomaton, b: ToplAutomaton) -> ToplAutomaton:
    """Accepts w iff w = uv with u accepted by `a` and v by `b`.

    Every final state of `a` additionally carries copies of the
    transitions leaving `b`'s initial state; `b`'s register bank is
    untouched while `a` runs, so the second phase starts pristine.
    """
    _check_same_arity(a, b)
    dm = a.registers
    transitions = [Transition(f"a:{t.source}", t.guard, t.action, f"a:{t.target}") for t in a.transitions]
    transitions += [
        Transition(f"b:{t.source}", _shift_guard(t.guard, dm), _shift_action(t.action, dm), f"b:{t.target}")
        for t in b.transitions
    ]
    for qf in sorted(a.final):
        for t in b.outgoing(b.initial):
            transitions.append(
                Transition(f"a:{qf}", _shift_guard(t.guard, dm), _shift_action(t.action, dm), f"b:{t.target}")
            )
    final = {f"b:{q}" for q in b.final}
    if b.initial in b.final:
        final |= {f"a:{q}" for q in a.final}
    states = {f"a:{q}" for q in a.states} | {f"b:{q}" for q in b.states}
    return ToplAutomaton(
        arity=a.arity,
        registers=a.registers + b.registers,
        states=frozenset(states),
        initial=f"a:{a.initial}",
        store=a.store + b.store,
        transitions=tuple(transitions),
        final=frozenset(final),
    )
