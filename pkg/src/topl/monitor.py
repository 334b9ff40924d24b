"""Online trace monitoring against a compiled high-level automaton.

The monitor keeps the set of configurations reachable over the events
seen so far, organised by how many letters each has consumed.  Because
choosing between a transition and a skip can depend on up to d upcoming
letters (d = longest transition label), commitment is delayed until a
full window of d letters is visible; acceptance at each event index is
decided eagerly on a copy, so verdicts carry the exact event index at
which the property was violated.

A reported violation is always a real one.  Bounding the number of
active configurations can only lose violations, never invent them.
"""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .core import BOTTOM, Atom, EventId, Letter, StructureError, Value
from .hl import HlAutomaton, match_prefix
from .properties import EventSchema


class TraceError(ValueError):
    """Malformed trace line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"trace line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Event:
    """One observed call or return.

    For calls, `values` holds the receiver followed by the arguments
    (static calls may supply a placeholder receiver).  For returns,
    `values` holds the single return value, the dummy value if void.
    """

    kind: str  # "call" | "ret"
    method: str
    values: tuple  # tuple[Value, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("call", "ret"):
            raise ValueError(f"event kind must be 'call' or 'ret', got {self.kind!r}")
        if any(isinstance(v, EventId) for v in self.values):
            raise ValueError("event values cannot contain event ids")


def encode_event(e: Event, schema: EventSchema) -> Letter:
    """Fixed-width letter for `e`: event id, return slot, padded values.

    Call values beyond the schema arity are a hard error; silently
    truncating could hide the very value a property tracks.
    """
    n = schema.arity
    if e.kind == "call":
        if len(e.values) > n:
            raise StructureError(
                f"event {e.method} carries {len(e.values)} values but the schema allows {n}"
            )
        tail = e.values + (BOTTOM,) * (n - len(e.values))
        return (EventId("call", e.method), BOTTOM) + tail
    if len(e.values) > 1:
        raise StructureError(f"return event {e.method} carries {len(e.values)} values")
    result = e.values[0] if e.values else BOTTOM
    return (EventId("ret", e.method), result) + (BOTTOM,) * n


@dataclass(frozen=True)
class MonitorOptions:
    max_configs: Optional[int] = None  # None = unbounded
    record_paths: bool = False
    stop_at_first: bool = False

    def __post_init__(self) -> None:
        if self.max_configs is not None and self.max_configs < 1:
            raise ValueError("max_configs must be >= 1 when finite")


@dataclass(frozen=True)
class Verdict:
    """A detected violation: the property automaton accepted the first
    `matched_at` events (0 means the empty trace)."""

    matched_at: int
    path: Optional[tuple] = None  # steps ("step", transition idx, from, to) | ("skip", at)


@dataclass(frozen=True)
class Report:
    verdicts: tuple
    events: int
    peak_active: int
    dropped: int
    wall_time: float
    warnings: tuple = ()


class Monitor:
    """Single-owner online monitor; feed one event at a time."""

    def __init__(self, automaton: HlAutomaton, schema: Optional[EventSchema] = None,
                 options: MonitorOptions = MonitorOptions()):
        self.automaton = automaton
        self.schema = schema
        self.options = options
        self.d = automaton.max_label_length
        # letters still needed for decisions: the stream from position
        # `_base` on; older letters are discarded as the front commits
        self._letters: list = []
        self._base = 0
        # position (letters consumed) -> ordered {(state, store): path or None}
        start_key = (automaton.initial, automaton.store)
        self._layers: dict = {0: {start_key: () if options.record_paths else None}}
        self.peak_active = 1
        self.dropped = 0
        self._reported: set = set()
        self._finished = False
        self._verdicts: list = []
        self._outgoing_cache: dict = {}
        # The empty prefix may already violate the property.
        self._initial_verdicts = self._emit(self._check_now())

    # -- internals ---------------------------------------------------------

    def _outgoing(self, state):
        cached = self._outgoing_cache.get(state)
        if cached is None:
            cached = tuple((t, len(t.labels), i) for i, t in enumerate(self.automaton.transitions)
                           if t.source == state)
            self._outgoing_cache[state] = cached
        return cached

    def _total_active(self) -> int:
        return sum(len(layer) for layer in self._layers.values())

    def _insert(self, pos: int, key, path) -> None:
        layer = self._layers.get(pos)
        if layer is None:
            layer = {}
            self._layers[pos] = layer
        if key in layer:
            return  # keep the first-discovered (shortest) path
        cap = self.options.max_configs
        if cap is not None and self._total_active() >= cap:
            self.dropped += 1
            return
        layer[key] = path
        total = self._total_active()
        if total > self.peak_active:
            self.peak_active = total

    def _successors(self, pos: int, key, path, horizon: int):
        """Standard successors of a configuration at `pos`, using letters
        up to `horizon`; the skip successor iff there are none."""
        state, store = key
        out = []
        for t, d_lbl, idx in self._outgoing(state):
            if pos + d_lbl > horizon:
                continue
            prefix = tuple(self._letters[pos - self._base:pos + d_lbl - self._base])
            for store2 in match_prefix(store, t.labels, prefix):
                step = None
                if path is not None:
                    step = path + (("step", idx, pos, pos + d_lbl),)
                out.append((pos + d_lbl, (t.target, store2), step))
        if not out and pos < horizon:
            step = None if path is None else path + (("skip", pos),)
            out.append((pos + 1, key, step))
        return out

    def _expand_committed(self) -> None:
        """Expand every configuration whose full decision window (d
        letters of lookahead) is available."""
        k = self._base + len(self._letters)
        while self._layers:
            p = min(self._layers)
            if p > k - self.d:
                break
            layer = self._layers.pop(p)
            for key, path in layer.items():
                for pos2, key2, path2 in self._successors(p, key, path, k):
                    self._insert(pos2, key2, path2)

    def _check_now(self) -> list:
        """Acceptance of the prefix consumed so far, on a scratch copy:
        end-of-input semantics over the still-buffered letters."""
        k = self._base + len(self._letters)
        final = self.automaton.final
        found = []
        seen = set()
        work = deque()
        for pos in sorted(self._layers):
            for key, path in self._layers[pos].items():
                work.append((pos, key, path))
                seen.add((pos, key))
        while work:
            pos, key, path = work.popleft()
            if pos == k:
                if key[0] in final:
                    found.append((k, path))
                    if not self.options.record_paths:
                        break
                continue
            for pos2, key2, path2 in self._successors(pos, key, path, k):
                if (pos2, key2) not in seen:
                    seen.add((pos2, key2))
                    work.append((pos2, key2, path2))
        return found

    def _emit(self, found) -> list:
        new = []
        for k, path in found:
            if k in self._reported:
                continue
            self._reported.add(k)
            v = Verdict(k, path)
            self._verdicts.append(v)
            new.append(v)
            if self.options.stop_at_first:
                self._finished = True
                break
        return new

    # -- public API ----------------------------------------------------------

    def feed(self, e: Event) -> list:
        """Consume one event; returns the verdicts detected at its index."""
        if self.schema is None:
            raise StructureError("monitor was built without an event schema; use feed_letter")
        return self.feed_letter(encode_event(e, self.schema))

    def feed_letter(self, letter: Letter) -> list:
        if self._finished:
            return []
        if len(letter) != self.automaton.arity:
            raise StructureError(
                f"letter has arity {len(letter)}, automaton expects {self.automaton.arity}"
            )
        self._letters.append(letter)
        self._expand_committed()
        self._prune_letters()
        return self._emit(self._check_now())

    def finish(self) -> list:
        """End of trace: report anything not already reported eagerly."""
        if self._finished:
            return []
        self._finished = True
        return self._emit(self._check_now())

    @property
    def verdicts(self) -> tuple:
        return tuple(self._verdicts)

    @property
    def events_fed(self) -> int:
        return self._base + len(self._letters)

    def _prune_letters(self) -> None:
        front = min(self._layers) if self._layers else self._base + len(self._letters)
        if front > self._base:
            del self._letters[: front - self._base]
            self._base = front


def replay_path(automaton: HlAutomaton, letters, path) -> bool:
    """Check that a reported path really drives the automaton from its
    initial configuration to a final state, consuming a prefix exactly."""
    state, store = automaton.initial, automaton.store
    pos = 0
    for step in path:
        if step[0] == "skip":
            if step[1] != pos:
                return False
            pos += 1
            continue
        _, idx, start, end = step
        if start != pos:
            return False
        t = automaton.transitions[idx]
        if t.source != state:
            return False
        stores = match_prefix(store, t.labels, tuple(letters[start:end]))
        if not stores:
            return False
        store = next(iter(stores))
        state = t.target
        pos = end
    return state in automaton.final


# ---------------------------------------------------------------------------
# Trace files
# ---------------------------------------------------------------------------

def _value_from_json(v, line: int) -> Value:
    if v is None:
        return BOTTOM
    if isinstance(v, str):
        return Atom(v)
    raise TraceError(f"values must be strings or null, got {v!r}", line)


def parse_trace_line(text: str, line: int) -> Event:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceError(f"invalid JSON ({exc.msg})", line) from None
    if not isinstance(obj, dict):
        raise TraceError("each line must be a JSON object", line)
    kind = obj.get("kind")
    method = obj.get("method")
    if kind not in ("call", "ret"):
        raise TraceError(f"kind must be 'call' or 'ret', got {kind!r}", line)
    if not isinstance(method, str):
        raise TraceError("method must be a string", line)
    if kind == "call":
        raw = obj.get("values", [])
        if not isinstance(raw, list):
            raise TraceError("values must be a list", line)
        values = tuple(_value_from_json(v, line) for v in raw)
    else:
        values = (_value_from_json(obj.get("value"), line),)
    return Event(kind, method, values)


def read_trace(lines: Iterable):
    """Yield (line number, text) for every non-empty JSON-lines entry."""
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        yield lineno, text


def run_trace(automaton: HlAutomaton, schema: Optional[EventSchema], lines: Iterable,
              options: MonitorOptions = MonitorOptions(), strict: bool = True) -> Report:
    """Stream a JSON-lines trace through a monitor and collect a report."""
    t0 = time.perf_counter()
    monitor = Monitor(automaton, schema, options)
    warnings = []
    events = 0
    for lineno, text in read_trace(lines):
        try:
            event = parse_trace_line(text, lineno)
        except TraceError as exc:
            if strict:
                raise
            warnings.append(str(exc))
            continue
        events += 1
        monitor.feed(event)
        if monitor._finished:
            break
    monitor.finish()
    return Report(
        verdicts=monitor.verdicts,
        events=events,
        peak_active=monitor.peak_active,
        dropped=monitor.dropped,
        wall_time=time.perf_counter() - t0,
        warnings=tuple(warnings),
    )
