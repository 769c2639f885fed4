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
Mixed execution graphs: the superposition of a source RC11^Ex86 execution
and the Ex86 execution of its compiled program.

Each :class:`MixedNode` holds one source event and the target events the
compilation scheme produced for it. Nodes are identified by their source
event. The node-level predicates classify nodes by their kind, not by the
labels of either projection.
:func:`build_simulation` constructs a mixed graph from a target execution
by replaying the source program in lockstep with it, and
:func:`transfer_check` compares consistency of the mixed graph with
consistency of its two projections.
"""
import enum
import logging
from dataclasses import dataclass

from asmm import config
from asmm.compile import Scheme
from asmm.compile import compile_program
from asmm.lang import Mode
from asmm.lang import ModelId
from asmm.lang import Seq
from asmm.lang import Skip
from asmm.lang import value_domain
from asmm.models import DerivedRelations
from asmm.models import Verdict
from asmm.models import ex86_consistent
from asmm.models import rc11ext_axioms
from asmm.models import rc11ext_consistent
from asmm.opsem import CandidateExecution
from asmm.opsem import ExecutionGraph
from asmm.opsem import FenceLabel
from asmm.opsem import ReadLabel
from asmm.opsem import RMWLabel
from asmm.opsem import Thread
from asmm.opsem import WriteLabel
from asmm.opsem import candidates
from asmm.opsem import enumerate_graphs
from asmm.opsem import is_read
from asmm.opsem import program_order
from asmm.opsem import read_value
from asmm.opsem import thread_steps
from asmm.relalg import Relation
from asmm.relalg import ThreadEvent
from asmm.relalg import compose
from asmm.relalg import identity_on
from asmm.relalg import union


log = logging.getLogger('asmm.mixed')


class MixedNodeKind(enum.Enum):
    W_WMF = 'W-WMF'
    W_W = 'W-W'
    W_NT = 'W-NT'
    RMW_RMW_S = 'RMW-RMW-S'
    RMW_RMW_F = 'RMW-RMW-F'
    F_MF = 'F-MF'
    F_SF = 'F-SF'
    F_BOT = 'F-⊥'
    R_R = 'R-R'
    W_SFWMF = 'W-SFWMF'
    W_SFW = 'W-SFW'
    W_NT_ALT = 'W-NT-alt'
    F_SF_ALT = 'F-SF-alt'
    INIT = 'Init'

    def __str__(self):
        return self.value


K = MixedNodeKind

STANDARD_KINDS = frozenset([
    K.W_WMF, K.W_W, K.W_NT, K.RMW_RMW_S, K.RMW_RMW_F,
    K.F_MF, K.F_SF, K.F_BOT, K.R_R, K.INIT,
])
ALTERNATIVE_KINDS = STANDARD_KINDS | frozenset([K.W_SFWMF, K.W_SFW, K.W_NT_ALT, K.F_SF_ALT])

WRITE_KINDS = frozenset([K.W_WMF, K.W_W, K.W_NT, K.W_SFWMF, K.W_SFW, K.W_NT_ALT, K.INIT])
NT_KINDS = frozenset([K.W_NT, K.W_NT_ALT])
RMW_KINDS = frozenset([K.RMW_RMW_S, K.RMW_RMW_F])
SF_KINDS = frozenset([K.F_SF, K.F_SF_ALT])
FENCE_KINDS = frozenset([K.F_MF, K.F_SF, K.F_BOT, K.F_SF_ALT])


def scheme_kinds(scheme):
    return STANDARD_KINDS if Scheme(scheme) == Scheme.STANDARD else ALTERNATIVE_KINDS


class MalformedTargetError(Exception):

    def __init__(self, tid, index, message):
        super(MalformedTargetError, self).__init__()
        self.tid = tid
        self.index = index
        self.message = message

    def __str__(self):
        return "thread %s, target event %s: %s" % (self.tid, self.index, self.message)

    def __repr__(self):
        return "<MalformedTargetError tid=%r index=%r message=%r>" % (
            self.tid, self.index, self.message)


def node_kind(label, scheme):
    """The kind of node a source event with ``label`` becomes."""
    alternative = Scheme(scheme) == Scheme.ALTERNATIVE
    if isinstance(label, WriteLabel):
        if label.mode == Mode.NT:
            return K.W_NT
        if label.mode == Mode.SC:
            return K.W_SFWMF if alternative else K.W_WMF
        if alternative and label.mode == Mode.RLX:
            return K.W_NT_ALT
        if alternative and label.mode == Mode.REL:
            return K.W_SFW
        return K.W_W
    if isinstance(label, ReadLabel):
        return K.R_R
    if isinstance(label, RMWLabel):
        return K.RMW_RMW_S if label.succeeded else K.RMW_RMW_F
    if label.mode == Mode.SC:
        return K.F_MF
    if label.mode == Mode.SF:
        return K.F_SF
    if alternative and label.mode in (Mode.REL, Mode.ACQREL):
        return K.F_SF_ALT
    return K.F_BOT


def target_labels(kind, label):
    """The target labels a node of ``kind`` holds for source ``label``."""
    mfence, sfence = FenceLabel(Mode.SC), FenceLabel(Mode.SF)
    if kind in (K.R_R,):
        return [ReadLabel(Mode.TSO, label.loc, label.value)]
    if kind in RMW_KINDS:
        return [RMWLabel(Mode.TSO, label.loc, label.read, label.written)]
    if kind == K.F_MF:
        return [mfence]
    if kind in SF_KINDS:
        return [sfence]
    if kind == K.F_BOT:
        return []
    if kind in NT_KINDS:
        return [WriteLabel(Mode.NT, label.loc, label.value)]
    write = WriteLabel(Mode.TSO, label.loc, label.value)
    return {
        K.W_W: [write],
        K.W_WMF: [write, mfence],
        K.W_SFW: [sfence, write],
        K.W_SFWMF: [sfence, write, mfence],
    }[kind]


@dataclass(frozen=True)
class MixedNode(object):
    """One source event with its target events (``(event, label)`` pairs
    in program order)."""

    kind: MixedNodeKind
    source: object
    source_label: object
    targets: tuple = ()

    @property
    def id(self):
        return self.source

    def memory_target(self):
        """The target event carrying the node's memory access, if any."""
        for event, label in self.targets:
            if label.loc is not None:
                return event
        return None


@dataclass(frozen=True)
class MixedGraph(object):
    """Mixed nodes with reads-from and modification order between them."""

    scheme: Scheme
    nodes: tuple
    rf: Relation
    mo: Relation
    source_registers: tuple = ()
    target_registers: tuple = ()

    def __post_init__(self):
        legal = scheme_kinds(self.scheme)
        for node in self.nodes:
            if node.kind not in legal:
                raise ValueError("node kind %s is not used by scheme %s" % (node.kind, self.scheme))

    def node(self, node_id):
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    @property
    def ids(self):
        return frozenset(node.id for node in self.nodes)

    def of_kind(self, kinds):
        return frozenset(node.id for node in self.nodes if node.kind in kinds)

    def source_graph(self):
        return ExecutionGraph(dict((n.source, n.source_label) for n in self.nodes))

    def target_graph(self):
        labels = {}
        for node in self.nodes:
            labels.update(node.targets)
        return ExecutionGraph(labels)

    def target_event_map(self):
        return dict(
            (event, node.id) for node in self.nodes for event, _ in node.targets
        )


def project_source(mixed):
    """The source execution: node ids are the source events."""
    return CandidateExecution(mixed.source_graph(), mixed.rf, mixed.mo, mixed.source_registers)


def project_target(mixed):
    """The target execution. Node-level rf and mo edges are carried by the
    memory-access event of each node."""
    def expand(relation):
        return Relation(
            (mixed.node(a).memory_target(), mixed.node(b).memory_target())
            for a, b in relation
        )
    return CandidateExecution(
        mixed.target_graph(), expand(mixed.rf), expand(mixed.mo), mixed.target_registers
    )


def canonical(execution):
    """Renumber each thread's events to 0, 1, ... keeping their order, so
    executions of differently compiled programs can be compared."""
    graph = execution.graph
    rename = {}
    for tid in graph.tids():
        for index, event in enumerate(graph.thread_events(tid)):
            rename[event] = ThreadEvent(tid, index)
    for event in graph.events:
        rename.setdefault(event, event)

    def relation(r):
        return frozenset((rename[a], rename[b]) for a, b in r)
    labels = frozenset((rename[e], graph.lab(e)) for e in graph.events)
    return labels, relation(execution.rf), relation(execution.mo), tuple(execution.trace_registers)


def same_execution(x, y):
    return canonical(x) == canonical(y)


def _replay_thread(tid, cmd, target_events, scheme, step_limit):
    """Replay source thread ``tid`` against its target events.

    :returns: ``(nodes, registers)``
    """
    thread = Thread((), 0, Seq(cmd, Skip()))
    position = 0
    nodes = []
    for _ in range(step_limit):
        upcoming = target_events[position][1] if position < len(target_events) else None
        values = (read_value(upcoming),) if upcoming is not None and is_read(upcoming) else (0,)
        chosen = None
        for rule, next_thread, label in thread_steps(tid, thread, values):
            if rule == 'TerminateStep':
                if position != len(target_events):
                    raise MalformedTargetError(
                        tid, position, "source thread ended with target events left over"
                    )
                return nodes, thread.regs
            if label is None:
                chosen = next_thread, None
                break
            kind = node_kind(label, scheme)
            expected = target_labels(kind, label)
            window = target_events[position:position + len(expected)]
            if [l for _, l in window] == expected:
                event = ThreadEvent(tid, thread.ev_counter)
                chosen = next_thread, MixedNode(kind, event, label, tuple(window))
                break
        if chosen is None:
            raise MalformedTargetError(
                tid, position, "no source step matches %s" % (upcoming,)
            )
        thread, node = chosen
        if node is not None:
            nodes.append(node)
            position += len(node.targets)
    raise MalformedTargetError(tid, position, "replay exceeded %d steps" % step_limit)


def build_simulation(program, scheme, target, step_limit=None):
    """Construct the source execution and the mixed graph that simulate
    ``target``.

    :param program: the source :class:`asmm.lang.Program`
    :param scheme: the :class:`asmm.compile.Scheme` ``target`` was compiled with
    :param target: a complete candidate execution of the compiled program
    :returns: ``(source, mixed)``
    :raises MalformedTargetError: if the target events cannot be grouped
        into nodes of the scheme
    """
    scheme = Scheme(scheme)
    if step_limit is None:
        step_limit = config.step_bound.value
    tgraph = target.graph
    nodes = []
    for event in sorted(e for e in tgraph.events if e.is_init):
        label = tgraph.lab(event)
        nodes.append(MixedNode(K.INIT, event, label, ((event, label),)))
    source_registers = []
    for tid, cmd in program.threads:
        events = [(e, tgraph.lab(e)) for e in tgraph.thread_events(tid)]
        thread_nodes, regs = _replay_thread(tid, cmd, events, scheme, step_limit)
        nodes.extend(thread_nodes)
        source_registers.append((tid, regs))
    to_node = {}
    for node in nodes:
        for event, _ in node.targets:
            to_node[event] = node.id

    def lift(relation):
        return Relation((to_node[a], to_node[b]) for a, b in relation)
    mixed = MixedGraph(
        scheme=scheme,
        nodes=tuple(nodes),
        rf=lift(target.rf),
        mo=lift(target.mo),
        source_registers=tuple(source_registers),
        target_registers=tuple(target.trace_registers),
    )
    return project_source(mixed), mixed


class MixedRelations(object):
    """Node-level relations of a mixed graph."""

    def __init__(self, mixed):
        self.mixed = mixed
        self.graph = mixed.source_graph()
        self.E = mixed.ids
        self.po = program_order(self.graph)
        self.rf = mixed.rf
        self.mo = mixed.mo
        self.rb = compose(self.rf.inverse(), self.mo) - identity_on(self.E)

    def kinds(self, kinds):
        return self.mixed.of_kind(kinds)

    def ppo(self):
        i = identity_on
        po = self.po
        f_bot = self.kinds([K.F_BOT])
        real = self.E - f_bot
        reads = self.kinds([K.R_R])
        rmw = self.kinds(RMW_KINDS)
        mf = self.kinds([K.F_MF])
        sf = self.kinds(SF_KINDS)
        writes = self.kinds(WRITE_KINDS)
        plain_writes = writes - self.kinds(NT_KINDS)
        common = [
            compose(i(sf), po, i(real - reads)),
            compose(i(plain_writes), po, i(plain_writes)),
            compose(i(writes), po.restrict_same_loc(self.graph.loc_of), i(writes)),
        ]
        if self.mixed.scheme == Scheme.STANDARD:
            wmf = self.kinds([K.W_WMF])
            return union(
                compose(i(real), po, i(rmw | mf | sf)),
                compose(i(reads | rmw | mf), po, i(real)),
                compose(i(real), po.reflexive_closure(self.E), i(wmf), po, i(real)),
                *common
            )
        sfwmf = self.kinds([K.W_SFWMF])
        sfw = self.kinds([K.W_SFW])
        return union(
            compose(i(real), po, i(rmw | mf | sf | sfwmf)),
            compose(i(reads | rmw | mf | sfwmf), po, i(real)),
            compose(i(real), po, i(sfw), po.reflexive_closure(self.E), i(real - reads)),
            *common
        )

    def ob(self):
        return union(self.ppo(), self.rf.external(), self.mo.external(), self.rb.external())

    def internal(self):
        return compose(self.po, union(self.rf.internal(), self.mo.internal(), self.rb.internal()))


def mixed_ex86_consistent(mixed):
    """Ex86 consistency evaluated on the nodes of ``mixed``."""
    d = MixedRelations(mixed)
    failures = []
    witness = d.internal().reflexive_witness()
    if witness is not None:
        failures.append(('Internal', tuple(witness)))
    cycle = d.ob().find_cycle()
    if cycle is not None:
        failures.append(('External', tuple(cycle)))
    return Verdict(
        consistent=not failures,
        violated_axioms=tuple(a for a, _ in failures),
        witnesses=tuple(failures),
    )


class MixedDerivedRelations(DerivedRelations):
    """RC11^Ex86 relations of a mixed graph. Event classes come from the
    node kinds; modes come from each node's source label."""

    def __init__(self, mixed):
        super(MixedDerivedRelations, self).__init__(project_source(mixed), ModelId.RC11EXT)
        self.mixed = mixed

    @property
    def W(self):
        return self.mixed.of_kind(WRITE_KINDS)

    @property
    def W_nt(self):
        return self.mixed.of_kind([K.W_NT])

    @property
    def R(self):
        return self.mixed.of_kind([K.R_R])

    @property
    def RMW(self):
        return self.mixed.of_kind(RMW_KINDS)

    @property
    def F(self):
        return self.mixed.of_kind(FENCE_KINDS)

    @property
    def sources(self):
        return self.W | self.mixed.of_kind([K.RMW_RMW_S])

    @property
    def rf(self):
        return self.mixed.rf

    @property
    def mo(self):
        return self.mixed.mo


def mixed_rc11ext_consistent(mixed):
    """RC11^Ex86 consistency evaluated on the nodes of ``mixed``."""
    return rc11ext_axioms(MixedDerivedRelations(mixed))


@dataclass(frozen=True)
class TransferReport(object):
    mixed_ex86: Verdict
    target_ex86: Verdict
    mixed_rc11ext: Verdict
    source_rc11ext: Verdict

    @property
    def discrepancies(self):
        found = []
        if self.mixed_ex86.consistent != self.target_ex86.consistent:
            found.append('%s: mixed graph %s, target %s' % (
                ModelId.EX86,
                self.mixed_ex86.violated_axioms or 'consistent',
                self.target_ex86.violated_axioms or 'consistent'))
        if self.mixed_rc11ext.consistent != self.source_rc11ext.consistent:
            found.append('%s: mixed graph %s, source %s' % (
                ModelId.RC11EXT,
                self.mixed_rc11ext.violated_axioms or 'consistent',
                self.source_rc11ext.violated_axioms or 'consistent'))
        return tuple(found)

    @property
    def weaker_than(self):
        """Ex86-consistent mixed graphs are RC11^Ex86-consistent."""
        return not self.mixed_ex86.consistent or self.mixed_rc11ext.consistent

    @property
    def holds(self):
        return not self.discrepancies and self.weaker_than


def transfer_check(mixed):
    """Check both projections against the mixed-graph predicates.

    :returns: a :class:`TransferReport`
    """
    report = TransferReport(
        mixed_ex86=mixed_ex86_consistent(mixed),
        target_ex86=ex86_consistent(project_target(mixed)),
        mixed_rc11ext=mixed_rc11ext_consistent(mixed),
        source_rc11ext=rc11ext_consistent(project_source(mixed)),
    )
    for line in report.discrepancies:
        log.warning('transfer discrepancy: %s', line)
    return report


def simulations(program, scheme, values=None, step_bound=None):
    """Yield ``(target, mixed)`` for every candidate execution of the
    compiled program."""
    scheme = Scheme(scheme)
    if values is None:
        values = config.value_domain(value_domain(program))
    target_program = compile_program(program, scheme)
    exploration = enumerate_graphs(target_program, values, step_bound)
    for run in sorted(exploration.runs, key=lambda r: repr(r.graph)):
        for target in candidates(run.graph, run.trace_registers):
            _, mixed = build_simulation(program, scheme, target, step_bound)
            yield target, mixed
