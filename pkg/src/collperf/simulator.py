"""Discrete-event execution of collective schedules under pLogP timing.

Every node owns one outgoing link and runs a fixed program of sends.  A send
starts once the link is free and the data it forwards has arrived; it keeps
the link busy for ``g(payload)`` and lands ``L`` later:

    send_end = send_start + g(payload)
    arrival  = send_end + L

These rules reproduce the flat ``(P-1) g + L`` and chain ``(P-1)(g + L)``
forms at the same time, which pins them down.  No formula from :mod:`collperf.models`
is used here; the simulator is the independent check on the closed forms.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .models import ModelError
from .params import ParamTable, SegmentSpec

SEND_START = "send_start"
SEND_END = "send_end"
ARRIVAL = "arrival"
RECV_END = "recv_end"

_KIND_ORDER = {SEND_END: 0, SEND_START: 1, ARRIVAL: 2, RECV_END: 3}


class Event(NamedTuple):
    kind: str
    node: int
    peer: int
    payload: int
    time: float
    segment_index: int = 0


@dataclass
class Timeline:
    P: int
    events: list[Event]
    completion: float
    per_node_completion: dict[int, float]
    sources: frozenset[int] = field(default_factory=lambda: frozenset({0}))

    def to_lines(self) -> list[str]:
        return [f"{e.time:.9f} {e.node} {e.kind} {e.peer} {e.payload} {e.segment_index}"
                for e in self.events]

    def causality_violations(self) -> list[str]:
        """Sends of data the sender did not yet hold."""
        received: dict[tuple[int, int], float] = {}
        for e in self.events:
            if e.kind == ARRIVAL:
                key = (e.node, e.segment_index)
                received[key] = min(received.get(key, e.time), e.time)
        bad = []
        for e in self.events:
            if e.kind != SEND_START or e.node in self.sources:
                continue
            got = received.get((e.node, e.segment_index))
            if got is None or got > e.time:
                bad.append(f"node {e.node} sends segment {e.segment_index} at {e.time!r} "
                           f"before receiving it")
        return bad

    def link_violations(self) -> list[str]:
        """Sends that start before the same node's previous send released the link."""
        starts: dict[int, list[float]] = {}
        ends: dict[int, list[float]] = {}
        for e in self.events:
            if e.kind == SEND_START:
                starts.setdefault(e.node, []).append(e.time)
            elif e.kind == SEND_END:
                ends.setdefault(e.node, []).append(e.time)
        bad = []
        for node, ts in starts.items():
            # one link per node, so the i-th start pairs with the i-th end
            for nxt, prev_end in zip(ts[1:], ends[node]):
                if nxt < prev_end:
                    bad.append(f"node {node} starts a send at {nxt!r} while its link "
                               f"is busy until {prev_end!r}")
        return bad


class _Engine:
    """Runs per-node send programs; with ``record`` off only completion times are kept."""

    def __init__(self, P: int, latency: float, occupancy, record: bool = True):
        self.P = P
        self.L = latency
        self.record = record
        self._occupancy = occupancy
        self._occ_cache: dict[int, float] = {}
        self.programs = [deque() for _ in range(P)]
        self.link_free = [0.0] * P
        self.arrived: list[dict[int, float]] = [{} for _ in range(P)]
        self.last_arrival: list[float | None] = [None] * P
        self.events: list[Event] = []
        self._heap: list = []
        self._seq = 0

    def add(self, node: int, sends):
        """Queue ``(dest, payload, segment, needs)`` sends on ``node``.

        ``needs`` is the segment that must have arrived at ``node`` first, or
        None when the data is already local.
        """
        self.programs[node].extend(sends)

    def _issue(self, node: int):
        program = self.programs[node]
        if not program:
            return
        events, heap, push = self.events, self._heap, heapq.heappush
        got, cache, L, record = self.arrived[node], self._occ_cache, self.L, self.record
        free = self.link_free[node]
        while program:
            dest, payload, seg, needs = program[0]
            start = free
            if needs is not None:
                ready = got.get(needs)
                if ready is None:
                    break
                if ready > start:
                    start = ready
            program.popleft()
            occ = cache.get(payload)
            if occ is None:
                occ = cache[payload] = self._occupancy(payload)
            free = start + occ
            if record:
                events.append(Event(SEND_START, node, dest, payload, start, seg))
                events.append(Event(SEND_END, node, dest, payload, free, seg))
            push(heap, (free + L, dest, self._seq, node, payload, seg))
            self._seq += 1
        self.link_free[node] = free

    def run(self) -> "_Engine":
        for node in range(self.P):
            self._issue(node)
        heap, events, arrived, last = self._heap, self.events, self.arrived, self.last_arrival
        programs, record, issue, pop = self.programs, self.record, self._issue, heapq.heappop
        while heap:
            t, dest, _, src, payload, seg = pop(heap)
            if record:
                events.append(Event(ARRIVAL, dest, src, payload, t, seg))
            last[dest] = t  # heap order: arrivals come out non-decreasing
            got = arrived[dest]
            if seg not in got:
                got[seg] = t
                if programs[dest]:
                    issue(dest)
        stuck = [n for n in range(self.P) if self.programs[n]]
        if stuck:
            raise RuntimeError(f"schedule deadlock: nodes {stuck} wait for data that never arrives")
        return self

    def timeline(self, done=None, sources=frozenset({0})) -> Timeline:
        """Assemble the result; ``done`` overrides per-node finish times."""
        done = list(self.last_arrival) if done is None else done
        # nodes that never receive (the root) are done when their last send ends
        per_node = {n: (done[n] if done[n] is not None else self.link_free[n])
                    for n in range(self.P)}
        completion = max((t for t in done if t is not None), default=0.0)
        order = _KIND_ORDER
        self.events.sort(key=lambda e: (e.time, e.node, order[e.kind]))
        return Timeline(self.P, self.events, completion, per_node, frozenset(sources))


def _check(P, m):
    if not isinstance(P, int) or P < 2:
        raise ModelError(f"process count must be an integer >= 2, got {P!r}")
    if not isinstance(m, int) or m < 1:
        raise ModelError(f"message size must be an integer >= 1, got {m!r}")


def binomial_children(rank: int, P: int) -> list[int]:
    """Children of ``rank`` in the classic doubling tree rooted at 0, farthest first."""
    if rank == 0:
        mask = 1 << (P - 1).bit_length() if P > 1 else 1
    else:
        mask = rank & -rank
    children = []
    mask >>= 1
    while mask:
        if rank + mask < P:
            children.append(rank + mask)
        mask >>= 1
    return children


def simulate_broadcast(table: ParamTable, P: int, m: int, variant: str,
                       seg: SegmentSpec | None = None, *, record: bool = True) -> Timeline:
    """Broadcast from rank 0 along a flat, chain or binomial tree.

    With a segment spec each of the ``k`` segments is sent separately and
    charged ``g(s)``; a node forwards a segment as soon as it has arrived.
    """
    _check(P, m)
    if seg is not None and (seg.s > m or seg.k != -(-m // seg.s)):
        raise ModelError(f"segment {seg} is not valid for m={m}")
    size, k = (seg.s, seg.k) if seg is not None else (m, 1)
    eng = _Engine(P, table.L, table.gap, record)
    if variant == "flat":
        eng.add(0, ((dest, size, j, None) for dest in range(1, P) for j in range(k)))
    elif variant == "chain":
        eng.add(0, ((1, size, j, None) for j in range(k)))
        for node in range(1, P - 1):
            eng.add(node, ((node + 1, size, j, j) for j in range(k)))
    elif variant == "binomial":
        for node in range(P):
            eng.add(node, ((child, size, j, None if node == 0 else j)
                           for child in binomial_children(node, P) for j in range(k)))
    else:
        raise ModelError(f"unknown broadcast variant {variant!r}; expected flat, chain or binomial")
    return eng.run().timeline()


def scatter_tree(P: int) -> list[tuple[int, int, int]]:
    """Edges ``(parent, child, blocks)`` of the binomial scatter tree.

    A group of ``n`` ranks rooted at its lowest rank first hands the top
    ``2**(ceil(log2 n) - 1)`` ranks, a complete power-of-two subtree, to its
    first rank, then repeats on what is left.  Bulk sizes on the root's
    deepest path are then ``2**j`` blocks for every ``P``.  Edges come out in
    each parent's send order.
    """
    edges = []

    def split(lo, hi):
        while hi - lo > 1:
            half = 1 << ((hi - lo - 1).bit_length() - 1)
            edges.append((lo, hi - half, half))
            split(hi - half, hi)
            hi -= half

    split(0, P)
    edges.sort(key=lambda e: e[0])  # stable: keeps each parent's order
    return edges


def simulate_scatter(table: ParamTable, P: int, m: int, variant: str, *,
                     record: bool = True) -> Timeline:
    """Scatter of one ``m``-byte block per rank; inner nodes forward bulk data."""
    _check(P, m)
    eng = _Engine(P, table.L, table.gap, record)
    if variant == "flat":
        eng.add(0, ((dest, m, 0, None) for dest in range(1, P)))
    elif variant == "chain":
        eng.add(0, [(1, (P - 1) * m, 0, None)])
        for node in range(1, P - 1):
            eng.add(node, [(node + 1, (P - 1 - node) * m, 0, 0)])
    elif variant == "binomial":
        for parent, child, blocks in scatter_tree(P):
            eng.add(parent, [(child, blocks * m, 0, None if parent == 0 else 0)])
    else:
        raise ModelError(f"unknown scatter variant {variant!r}; expected flat, chain or binomial")
    return eng.run().timeline()


def simulate_alltoall(table: ParamTable, P: int, m: int, mode: str, *,
                      record: bool = True) -> Timeline:
    """Direct exchange with rotated peer order.

    ``serialized`` holds the link for ``g(m)`` per send; ``overlapped`` only
    for ``os(m)``, the time to hand the message to the interface.  Each node
    then processes its ``P - 1`` receives back to back, ``or(m)`` each,
    starting at its last arrival.
    """
    _check(P, m)
    if mode == "serialized":
        occupancy = table.gap
    elif mode == "overlapped":
        occupancy = table.send_overhead
    else:
        raise ModelError(f"unknown all-to-all mode {mode!r}; expected serialized or overlapped")
    eng = _Engine(P, table.L, occupancy, record)
    for node in range(P):
        eng.add(node, (((node + step) % P, m, 0, None) for step in range(1, P)))
    eng.run()
    recv = table.recv_overhead(m)
    senders: dict[int, list[int]] = {n: [] for n in range(P)}
    for e in eng.events:
        if e.kind == ARRIVAL:
            senders[e.node].append(e.peer)
    done = []
    for node in range(P):
        t = eng.last_arrival[node]
        for i in range(P - 1):
            t += recv
            if record:
                eng.events.append(Event(RECV_END, node, senders[node][i], m, t))
        done.append(t)
    return eng.timeline(done, sources=frozenset(range(P)))
