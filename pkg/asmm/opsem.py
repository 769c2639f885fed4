# -*- coding: utf-8 -*-
# Copyright 2024 Yelp Inc.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""
Pool-reduction semantics: the thread-pool machine that runs a program and
builds the execution graphs associated with it, plus the enumeration of
reads-from and modification-order extensions of those graphs.
"""
import collections
import itertools
import logging
from dataclasses import dataclass

from asmm import config
from asmm.lang import AsmMFence
from asmm.lang import AsmNTWrite
from asmm.lang import AsmRead
from asmm.lang import AsmRMW
from asmm.lang import AsmSFence
from asmm.lang import AsmWrite
from asmm.lang import Assign
from asmm.lang import Fence
from asmm.lang import If
from asmm.lang import Mode
from asmm.lang import Read
from asmm.lang import RMW
from asmm.lang import Seq
from asmm.lang import Skip
from asmm.lang import While
from asmm.lang import Write
from asmm.lang import eval_expr
from asmm.lang import locations_of
from asmm.relalg import InitEvent
from asmm.relalg import Relation
from asmm.relalg import ThreadEvent


log = logging.getLogger('asmm.opsem')


# Labels

@dataclass(frozen=True)
class ReadLabel(object):
    mode: Mode
    loc: int
    value: int

    def __str__(self):
        return 'R%s(%d,%d)' % (self.mode, self.loc, self.value)


@dataclass(frozen=True)
class WriteLabel(object):
    mode: Mode
    loc: int
    value: int

    def __str__(self):
        return 'W%s(%d,%d)' % (self.mode, self.loc, self.value)


@dataclass(frozen=True)
class FenceLabel(object):
    mode: Mode

    loc = None

    def __str__(self):
        return 'F%s' % self.mode


@dataclass(frozen=True)
class RMWLabel(object):
    """A read-modify-write; ``written`` is None for a failed one."""

    mode: Mode
    loc: int
    read: int
    written: int = None

    @property
    def succeeded(self):
        return self.written is not None

    def __str__(self):
        written = '_' if self.written is None else str(self.written)
        return 'RMW%s(%d,%d,%s)' % (self.mode, self.loc, self.read, written)


def is_read(label):
    return isinstance(label, (ReadLabel, RMWLabel))


def is_write(label):
    """Events that can be read from: writes and successful RMWs."""
    return isinstance(label, WriteLabel) or (
        isinstance(label, RMWLabel) and label.succeeded
    )


def read_value(label):
    return label.value if isinstance(label, ReadLabel) else label.read


def written_value(label):
    return label.value if isinstance(label, WriteLabel) else label.written


# Thread pool

def _freeze_regs(regs):
    return tuple(sorted(regs.items()))


@dataclass(frozen=True)
class Thread(object):
    """A thread's register state (sorted name/value pairs), the number of
    events it has emitted, and its remaining command."""

    regs: tuple
    ev_counter: int
    next_cmd: object

    @property
    def reg_st(self):
        return dict(self.regs)


@dataclass(frozen=True)
class Pool(object):
    threads: tuple = ()

    def __len__(self):
        return len(self.threads)

    def __iter__(self):
        return iter(self.threads)

    def get(self, tid):
        return dict(self.threads)[tid]

    def update(self, tid, thread):
        items = dict(self.threads)
        items[tid] = thread
        return Pool(tuple(sorted(items.items())))

    def remove(self, tid):
        return Pool(tuple(item for item in self.threads if item[0] != tid))


class ExecutionGraph(object):
    """A set of events with their labels.

    :param labels: mapping from :class:`asmm.relalg.EventId` to label
    """

    __slots__ = ('labels', '_items')

    def __init__(self, labels=None):
        self.labels = dict(labels or {})
        self._items = frozenset(self.labels.items())

    def __eq__(self, other):
        return isinstance(other, ExecutionGraph) and self._items == other._items

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self._items)

    def __repr__(self):
        return 'ExecutionGraph(%s)' % ', '.join(
            '%s:%s' % (e, self.labels[e]) for e in self.sorted_events()
        )

    def __len__(self):
        return len(self.labels)

    @property
    def events(self):
        return frozenset(self.labels)

    def lab(self, event):
        return self.labels[event]

    def add(self, event, label):
        labels = dict(self.labels)
        labels[event] = label
        return ExecutionGraph(labels)

    def sorted_events(self):
        return sorted(self.labels)

    def thread_events(self, tid):
        return sorted(e for e in self.labels if e.tid == tid)

    def tids(self):
        return sorted(set(e.tid for e in self.labels if e.tid is not None))

    def loc_of(self, event):
        return getattr(self.labels[event], 'loc', None)

    def mode_of(self, event):
        return self.labels[event].mode

    def select(self, predicate):
        return frozenset(e for e, label in self.labels.items() if predicate(label))

    def locations(self):
        return set(
            label.loc for label in self.labels.values() if label.loc is not None
        )


@dataclass(frozen=True)
class CandidateExecution(object):
    """An execution graph with reads-from, modification order, and the
    final register state of every thread (sorted ``(tid, regs)`` pairs)."""

    graph: ExecutionGraph
    rf: Relation
    mo: Relation
    trace_registers: tuple = ()

    @property
    def final_registers(self):
        registers = {}
        for _, regs in self.trace_registers:
            registers.update(regs)
        return registers


@dataclass(frozen=True)
class Transition(object):
    """One pool-reduction step. ``retired`` holds the register state of a
    thread removed by TerminateStep."""

    rule: str
    tid: int
    pool: Pool
    graph: ExecutionGraph
    retired: tuple = None


@dataclass(frozen=True)
class Run(object):
    """A complete graph with the final registers of every thread."""

    graph: ExecutionGraph
    trace_registers: tuple


@dataclass(frozen=True)
class Exploration(object):
    runs: frozenset
    prefixes: frozenset
    overflow: bool
    states: int

    @property
    def graphs(self):
        return frozenset(run.graph for run in self.runs)


def initial_pool(program):
    return Pool(tuple(
        (tid, Thread((), 0, Seq(cmd, Skip()))) for tid, cmd in program.threads
    ))


def initial_graph(program):
    return ExecutionGraph(dict(
        (InitEvent(loc), WriteLabel(Mode.NA, loc, 0))
        for loc in locations_of(program)
    ))


def _memory_step(tid, thread, cmd, rest, values):
    """Successors ``(rule, thread', label)`` of a thread whose next command is
    the memory access ``cmd``."""
    regs = thread.reg_st

    def emit(label, **updates):
        new_regs = dict(regs)
        new_regs.update(updates)
        return Thread(_freeze_regs(new_regs), thread.ev_counter + 1, rest), label

    if isinstance(cmd, (Read, AsmRead)):
        mode = Mode.TSO if isinstance(cmd, AsmRead) else cmd.mode
        loc = eval_expr(cmd.addr, regs)
        for n in values:
            yield ('ReadStep',) + emit(ReadLabel(mode, loc, n), **{cmd.reg: n})
    elif isinstance(cmd, (Write, AsmWrite, AsmNTWrite)):
        if isinstance(cmd, Write):
            mode = cmd.mode
        else:
            mode = Mode.NT if isinstance(cmd, AsmNTWrite) else Mode.TSO
        loc = eval_expr(cmd.addr, regs)
        yield ('WriteStep',) + emit(WriteLabel(mode, loc, eval_expr(cmd.value, regs)))
    elif isinstance(cmd, (RMW, AsmRMW)):
        mode = Mode.TSO if isinstance(cmd, AsmRMW) else cmd.mode
        loc = eval_expr(cmd.addr, regs)
        expected = eval_expr(cmd.expected, regs)
        new = eval_expr(cmd.new, regs)
        yield ('RMWSuccessStep',) + emit(
            RMWLabel(mode, loc, expected, new), **{cmd.reg: expected}
        )
        for m in values:
            if m != expected:
                yield ('RMWFailStep',) + emit(RMWLabel(mode, loc, m, None), **{cmd.reg: m})
    elif isinstance(cmd, (Fence, AsmMFence, AsmSFence)):
        if isinstance(cmd, Fence):
            mode = cmd.mode
        else:
            mode = Mode.SC if isinstance(cmd, AsmMFence) else Mode.SF
        yield ('FenceStep',) + emit(FenceLabel(mode))
    else:
        raise TypeError("not a memory command: %r" % (cmd,))


def thread_steps(tid, thread, values):
    """Every step thread ``tid`` can take on its own.

    Yields ``(rule, thread', label)``; ``thread'`` is None when the thread
    terminates and ``label`` is None for silent steps.
    """
    cmd = thread.next_cmd
    if isinstance(cmd, Skip):
        yield 'TerminateStep', None, None
        return
    if not isinstance(cmd, Seq):
        cmd = Seq(cmd, Skip())
    head, rest = cmd.first, cmd.second

    def silent(rule, next_cmd, regs=None):
        return rule, Thread(
            thread.regs if regs is None else regs, thread.ev_counter, next_cmd
        ), None

    if isinstance(head, Skip):
        yield silent('SkipStep', rest)
    elif isinstance(head, Seq):
        yield silent('SeqStep', Seq(head.first, Seq(head.second, rest)))
    elif isinstance(head, If):
        if eval_expr(head.cond, thread.reg_st) != 0:
            yield silent('IfStep', Seq(head.body, rest))
        else:
            yield silent('IfStep', rest)
    elif isinstance(head, While):
        unfolded = If(head.cond, Seq(head.body, head))
        yield silent('WhileStep', Seq(unfolded, rest))
    elif isinstance(head, Assign):
        regs = thread.reg_st
        regs[head.reg] = eval_expr(head.value, regs)
        yield silent('AssignStep', rest, _freeze_regs(regs))
    else:
        for step in _memory_step(tid, thread, head, rest, values):
            yield step


def _with_init(graph, loc):
    """``graph`` with an init write of 0 to ``loc``; computed addresses can
    reach locations the program text never names."""
    if loc is None or InitEvent(loc) in graph.labels:
        return graph
    log.debug('adding init event for computed location %s', loc)
    return graph.add(InitEvent(loc), WriteLabel(Mode.NA, loc, 0))


def pool_step(pool, graph, values):
    """All successors of a pool/graph configuration.

    :param pool: a :class:`Pool`
    :param graph: the :class:`ExecutionGraph` built so far
    :param values: the values a read may return
    :returns: a list of :class:`Transition`
    """
    transitions = []
    for tid, thread in pool:
        for rule, next_thread, label in thread_steps(tid, thread, values):
            if next_thread is None:
                transitions.append(Transition(
                    rule, tid, pool.remove(tid), graph, retired=thread.regs
                ))
                continue
            next_graph = graph
            if label is not None:
                next_graph = _with_init(graph, label.loc).add(
                    ThreadEvent(tid, thread.ev_counter), label
                )
            transitions.append(
                Transition(rule, tid, pool.update(tid, next_thread), next_graph)
            )
    return transitions


def enumerate_graphs(program, values, step_bound=None, strategy='dfs'):
    """Explore every pool-reduction sequence of ``program``.

    :param values: the read-value domain
    :param step_bound: maximum number of steps along any sequence
    :param strategy: ``'dfs'`` or ``'bfs'``
    :returns: an :class:`Exploration` with the complete runs, every
        reachable prefix graph, and whether some sequence was cut off
    """
    if step_bound is None:
        step_bound = config.step_bound.value
    if step_bound < 1:
        raise ValueError("step_bound must be positive")
    values = tuple(sorted(set(values)))
    start = (initial_pool(program), initial_graph(program), (), 0)
    frontier = collections.deque([start])
    seen = set([start])
    runs, prefixes = set(), set()
    overflow = False
    pop = frontier.pop if strategy == 'dfs' else frontier.popleft
    while frontier:
        pool, graph, retired, depth = pop()
        prefixes.add(graph)
        if not len(pool):
            runs.add(Run(graph, retired))
            continue
        if depth >= step_bound:
            overflow = True
            continue
        for transition in pool_step(pool, graph, values):
            done = retired
            if transition.retired is not None:
                done = tuple(sorted(retired + ((transition.tid, transition.retired),)))
            state = (transition.pool, transition.graph, done, depth + 1)
            if state not in seen:
                seen.add(state)
                frontier.append(state)
    if overflow:
        log.warning('exploration hit the step bound of %d', step_bound)
    log.debug('explored %d states: %d complete graphs, %d prefixes',
              len(seen), len(runs), len(prefixes))
    return Exploration(frozenset(runs), frozenset(prefixes), overflow, len(seen))


def program_order(graph):
    """Init events precede every thread event; thread events are ordered
    by index within their thread."""
    pairs = set()
    thread_events = [e for e in graph.events if not e.is_init]
    for e in graph.events:
        if e.is_init:
            pairs.update((e, t) for t in thread_events)
    for a in thread_events:
        for b in thread_events:
            if a.tid == b.tid and a.idx < b.idx:
                pairs.add((a, b))
    return Relation(pairs)


def enumerate_rf(graph):
    """Every reads-from relation of ``graph``. A read whose value no write
    provides leaves the list empty."""
    reads = graph.select(is_read)
    writes = graph.select(is_write)
    choices = []
    for r in sorted(reads):
        label = graph.lab(r)
        sources = [
            w for w in sorted(writes)
            if w != r and graph.lab(w).loc == label.loc and
            written_value(graph.lab(w)) == read_value(label)
        ]
        if not sources:
            return []
        choices.append([(w, r) for w in sources])
    return [Relation(pairs) for pairs in itertools.product(*choices)]


def _total_order(events):
    return set(
        (events[i], events[j])
        for i in range(len(events)) for j in range(i + 1, len(events))
    )


def enumerate_mo(graph):
    """Every modification order of ``graph``: all permutations of the writes
    to each location, with the location's init event first."""
    per_loc = []
    writes = graph.select(is_write)
    for loc in sorted(graph.locations()):
        at_loc = [w for w in writes if graph.lab(w).loc == loc]
        inits = [w for w in at_loc if w.is_init]
        others = sorted(w for w in at_loc if not w.is_init)
        per_loc.append([
            _total_order(inits + list(order))
            for order in itertools.permutations(others)
        ])
    orders = []
    for combination in itertools.product(*per_loc):
        pairs = set()
        for part in combination:
            pairs |= part
        orders.append(Relation(pairs))
    return orders


def candidates(graph, trace_registers=()):
    """Every candidate execution extending ``graph``."""
    rfs = enumerate_rf(graph)
    if not rfs:
        return
    mos = enumerate_mo(graph)
    for rf in rfs:
        for mo in mos:
            yield CandidateExecution(graph, rf, mo, trace_registers)


def run_candidates(run):
    return candidates(run.graph, run.trace_registers)
