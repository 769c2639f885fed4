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
The consistency models: SC, RC11, Ex86 (x86 with non-temporal stores and
store fences) and RC11^Ex86, the extension of RC11 with inline x86
assembly. Each predicate takes a
:class:`asmm.opsem.CandidateExecution` and returns a :class:`Verdict`.

:func:`behaviors` combines enumeration and a model into the set of final
states of a program, with the catch-fire (UB) rule for data races on
non-atomic accesses.
"""
import logging
from dataclasses import dataclass
from dataclasses import field

from asmm import config
from asmm.lang import ModelId
from asmm.lang import Mode
from asmm.lang import has_updates
from asmm.lang import mode_leq
from asmm.lang import value_domain
from asmm.opsem import FenceLabel
from asmm.opsem import ReadLabel
from asmm.opsem import RMWLabel
from asmm.opsem import WriteLabel
from asmm.opsem import candidates
from asmm.opsem import enumerate_graphs
from asmm.opsem import is_write
from asmm.opsem import program_order
from asmm.opsem import written_value
from asmm.relalg import compose
from asmm.relalg import identity_on
from asmm.relalg import union


log = logging.getLogger('asmm.models')

RC11_MODES = frozenset([Mode.NA, Mode.RLX, Mode.REL, Mode.ACQ, Mode.ACQREL, Mode.SC])


class ModelPreconditionError(Exception):

    def __init__(self, model, event, label):
        super(ModelPreconditionError, self).__init__()
        self.model = model
        self.event = event
        self.label = label

    def __str__(self):
        return "%s does not apply to event %s labelled %s" % (self.model, self.event, self.label)

    def __repr__(self):
        return "<ModelPreconditionError model=%r event=%r label=%r>" % (
            self.model, self.event, self.label)


class DRFPreconditionError(Exception):
    pass


@dataclass(frozen=True)
class Verdict(object):
    """Outcome of a consistency check. ``witnesses`` pairs every violated
    axiom with a cycle (or a single reflexive event) of its relation."""

    consistent: bool
    violated_axioms: tuple = ()
    witnesses: tuple = ()

    @property
    def witness_cycle(self):
        return self.witnesses[0][1] if self.witnesses else None

    def witness(self, axiom):
        return dict(self.witnesses).get(axiom)


class DerivedRelations(object):
    """Relations derived from a candidate execution, computed on demand.

    :param execution: a :class:`asmm.opsem.CandidateExecution`
    :param model: selects the RC11 or the RC11^Ex86 flavour of ``hb`` and
        ``eco``
    """

    def __init__(self, execution, model=ModelId.RC11EXT):
        self.execution = execution
        self.graph = execution.graph
        self.model = model
        self._cache = {}

    def _cached(self, name, build):
        if name not in self._cache:
            self._cache[name] = build()
        return self._cache[name]

    # event sets

    @property
    def E(self):
        return self.graph.events

    def select(self, predicate):
        return self.graph.select(predicate)

    def ident(self, events):
        return identity_on(events)

    def opt(self, relation):
        return relation.reflexive_closure(self.E)

    def loc_of(self, event):
        return self.graph.loc_of(event)

    def at_least(self, mode, kinds=None):
        return self.select(lambda l: (kinds is None or isinstance(l, kinds)) and mode_leq(mode, l.mode))

    def with_mode(self, mode, kinds=None):
        return self.select(lambda l: (kinds is None or isinstance(l, kinds)) and l.mode == mode)

    @property
    def W(self):
        return self.select(lambda l: isinstance(l, WriteLabel))

    @property
    def R(self):
        return self.select(lambda l: isinstance(l, ReadLabel))

    @property
    def RMW(self):
        return self.select(lambda l: isinstance(l, RMWLabel))

    @property
    def F(self):
        return self.select(lambda l: isinstance(l, FenceLabel))

    @property
    def sources(self):
        """W ∪ RMW-s."""
        return self.select(is_write)

    @property
    def targets(self):
        """R ∪ RMW."""
        return self.R | self.RMW

    @property
    def W_nt(self):
        return self.with_mode(Mode.NT, WriteLabel)

    # base relations

    @property
    def po(self):
        return self._cached('po', lambda: program_order(self.graph))

    @property
    def rf(self):
        return self.execution.rf

    @property
    def mo(self):
        return self.execution.mo

    @property
    def rb(self):
        return self._cached('rb', lambda: compose(self.rf.inverse(), self.mo) - self.ident(self.E))

    @property
    def rf_e(self):
        return self.rf.external()

    @property
    def po_loc(self):
        return self.po.restrict_same_loc(self.loc_of)

    # RC11 and RC11^Ex86

    @property
    def po_rc(self):
        def build():
            if self.model != ModelId.RC11EXT:
                return self.po
            barriers = self.with_mode(Mode.TSO, RMWLabel) | self.at_least(Mode.SF, FenceLabel)
            return union(
                compose(self.ident(self.E - self.W_nt), self.po),
                compose(self.po, self.ident(barriers)),
                compose(self.po_loc, self.ident(self.W | self.RMW)),
            )
        return self._cached('po_rc', build)

    @property
    def sw(self):
        def build():
            fences = self.ident(self.F)
            return compose(
                self.ident(self.at_least(Mode.REL)),
                self.opt(compose(fences, self.po)),
                self.ident(self.sources & self.at_least(Mode.RLX)),
                self.rf.transitive_closure(),
                self.ident(self.targets & self.at_least(Mode.RLX)),
                self.opt(compose(self.po, fences)),
                self.ident(self.at_least(Mode.ACQ)),
            )
        return self._cached('sw', build)

    @property
    def hb(self):
        return self._cached('hb', lambda: (self.po_rc | self.sw).transitive_closure())

    @property
    def eco(self):
        def build():
            rf = self.rf_e if self.model == ModelId.RC11EXT else self.rf
            return union(rf, self.mo, self.rb).transitive_closure()
        return self._cached('eco', build)

    @property
    def scb(self):
        def build():
            po_diff = self.po.restrict_diff_loc(self.loc_of)
            return union(
                self.po,
                compose(po_diff, self.hb, po_diff),
                self.hb.restrict_same_loc(self.loc_of),
                self.mo,
                self.rb,
            )
        return self._cached('scb', build)

    @property
    def E_sc(self):
        return self.with_mode(Mode.SC)

    @property
    def F_sc(self):
        return self.with_mode(Mode.SC, FenceLabel)

    @property
    def psc_base(self):
        def build():
            hb_opt = self.opt(self.hb)
            left = self.ident(self.E_sc) | compose(self.ident(self.F_sc), hb_opt)
            right = self.ident(self.E_sc) | compose(hb_opt, self.ident(self.F_sc))
            return compose(left, self.scb, right)
        return self._cached('psc_base', build)

    @property
    def psc_fence(self):
        def build():
            fsc = self.ident(self.F_sc)
            inner = self.hb | compose(self.hb, self.eco, self.hb)
            return compose(fsc, inner, fsc)
        return self._cached('psc_fence', build)

    @property
    def psc(self):
        return self._cached('psc', lambda: self.psc_base | self.psc_fence)

    @property
    def ppo_asm(self):
        def build():
            tso = lambda kinds: self.with_mode(Mode.TSO, kinds)
            f_sf = self.at_least(Mode.SF, FenceLabel)
            not_r = self.E - self.R
            not_r_nt = not_r - self.W_nt
            return union(
                compose(self.po, self.ident(tso(RMWLabel) | f_sf)),
                compose(self.ident(tso(ReadLabel) | tso(RMWLabel) | self.F_sc), self.po),
                compose(self.ident(f_sf), self.po, self.ident(not_r)),
                compose(self.ident(tso(WriteLabel)), self.po, self.ident(not_r_nt)),
                compose(self.ident(not_r_nt), self.po, self.ident(tso(WriteLabel))),
            )
        return self._cached('ppo_asm', build)

    # Ex86

    @property
    def x86_sets(self):
        """The Ex86 event classes W, NT, R, RMW, MF and SF."""
        def build():
            nt = self.W_nt
            return dict(
                W=self.W - nt,
                NT=nt,
                R=self.R,
                RMW=self.RMW,
                MF=self.F_sc,
                SF=self.with_mode(Mode.SF, FenceLabel),
            )
        return self._cached('x86_sets', build)

    @property
    def ppo_x86(self):
        def build():
            s = self.x86_sets
            i = self.ident
            return union(
                compose(self.po, i(s['RMW'] | s['MF'] | s['SF'])),
                compose(i(s['R'] | s['RMW'] | s['MF']), self.po),
                compose(i(s['SF']), self.po, i(self.E - s['R'])),
                compose(i(s['W']), self.po, i(s['W'])),
                compose(i(s['W'] | s['NT']), self.po_loc, i(s['W'] | s['NT'])),
            )
        return self._cached('ppo_x86', build)

    @property
    def ob(self):
        return self._cached('ob', lambda: union(
            self.ppo_x86, self.rf_e, self.mo.external(), self.rb.external()
        ))

    @property
    def internal_coherence(self):
        return compose(self.po, union(self.rf.internal(), self.mo.internal(), self.rb.internal()))


def _irreflexive(axiom, relation):
    witness = relation.reflexive_witness()
    return None if witness is None else (axiom, tuple(witness))


def _acyclic(axiom, relation):
    cycle = relation.find_cycle()
    return None if cycle is None else (axiom, tuple(cycle))


def _verdict(failures):
    failures = [f for f in failures if f is not None]
    return Verdict(
        consistent=not failures,
        violated_axioms=tuple(axiom for axiom, _ in failures),
        witnesses=tuple(failures),
    )


def axiom_relation(derived, axiom):
    """The relation an axiom constrains; used to re-check witnesses."""
    d = derived
    relations = {
        'Coherence': lambda: compose(d.hb, d.opt(d.eco)),
        'Coherence-I': lambda: compose(d.hb, d.opt(d.eco)),
        'Coherence-II': lambda: d.ppo_asm | d.eco,
        'Coherence-III': lambda: compose(d.ident(d.W_nt), d.po, d.rb | d.mo),
        'Atomicity': lambda: compose(d.rb, d.mo),
        'SC': lambda: d.psc,
        'No-Thin-Air': lambda: d.po | d.rf,
        'Internal': lambda: d.internal_coherence,
        'External': lambda: d.ob,
        'SC-Coherence': lambda: union(d.po, d.rf, d.mo, d.rb),
    }
    return relations[axiom]()


def _check_labels(execution, model, allowed):
    for event, label in execution.graph.labels.items():
        if event.is_init:
            continue
        if not allowed(label):
            raise ModelPreconditionError(model, event, label)


def _is_rc11_label(label):
    return label.mode in RC11_MODES


def _is_x86_label(label):
    if isinstance(label, WriteLabel):
        return label.mode in (Mode.TSO, Mode.NT)
    if isinstance(label, FenceLabel):
        return label.mode in (Mode.SF, Mode.SC)
    return label.mode == Mode.TSO


def rc11_consistent(execution):
    """RC11 consistency: Coherence, SC, Atomicity and No-Thin-Air.

    :raises ModelPreconditionError: if some event is not an RC11 event
    """
    _check_labels(execution, ModelId.RC11, _is_rc11_label)
    d = DerivedRelations(execution, ModelId.RC11)
    return _verdict([
        _irreflexive('Coherence', axiom_relation(d, 'Coherence')),
        _acyclic('SC', d.psc),
        _irreflexive('Atomicity', axiom_relation(d, 'Atomicity')),
        _acyclic('No-Thin-Air', d.po | d.rf),
    ])


def rc11ext_axioms(derived):
    """The RC11^Ex86 axioms over the sets and relations of ``derived``."""
    d = derived
    return _verdict([
        _irreflexive('Coherence-I', axiom_relation(d, 'Coherence-I')),
        _acyclic('Coherence-II', d.ppo_asm | d.eco),
        _irreflexive('Coherence-III', axiom_relation(d, 'Coherence-III')),
        _irreflexive('Atomicity', axiom_relation(d, 'Atomicity')),
        _acyclic('SC', d.psc),
        _acyclic('No-Thin-Air', d.po | d.rf),
    ])


def rc11ext_consistent(execution):
    """RC11^Ex86 consistency, over any mix of C11 and assembly events."""
    return rc11ext_axioms(DerivedRelations(execution, ModelId.RC11EXT))


def ex86_consistent(execution):
    """Ex86 consistency: Internal and External.

    :raises ModelPreconditionError: if some event is not an x86 event
    """
    _check_labels(execution, ModelId.EX86, _is_x86_label)
    d = DerivedRelations(execution, ModelId.EX86)
    return _verdict([
        _irreflexive('Internal', d.internal_coherence),
        _acyclic('External', d.ob),
    ])


def sc_consistent(execution):
    d = DerivedRelations(execution, ModelId.SC)
    return _verdict([_acyclic('SC-Coherence', union(d.po, d.rf, d.mo, d.rb))])


_CHECKS = {
    ModelId.SC: sc_consistent,
    ModelId.RC11: rc11_consistent,
    ModelId.EX86: ex86_consistent,
    ModelId.RC11EXT: rc11ext_consistent,
}


def check(execution, model):
    return _CHECKS[ModelId(model)](execution)


def sw_relation(execution, model):
    if model not in (ModelId.RC11, ModelId.RC11EXT):
        raise ValueError("sw is defined for rc11 and rc11ext, not %s" % model)
    return DerivedRelations(execution, model).sw


def races(execution, hb):
    """Pairs of distinct same-location events, at least one a write, that
    ``hb`` leaves unordered. Each pair is returned once, smaller event first."""
    graph = execution.graph
    found = set()
    events = sorted(e for e in graph.events if graph.loc_of(e) is not None)
    for i, a in enumerate(events):
        for b in events[i + 1:]:
            if graph.loc_of(a) != graph.loc_of(b):
                continue
            if not (is_write(graph.lab(a)) or is_write(graph.lab(b))):
                continue
            if (a, b) in hb or (b, a) in hb:
                continue
            found.add((a, b))
    return found


def na_races(execution, hb):
    graph = execution.graph
    return set(
        (a, b) for a, b in races(execution, hb)
        if Mode.NA in (graph.mode_of(a), graph.mode_of(b))
    )


def final_state(execution):
    """Value of the mo-maximal write at every location written by some
    non-init event."""
    graph = execution.graph
    memory = {}
    writes = [w for w in graph.select(is_write)]
    later = execution.mo.domain
    for w in writes:
        if w in later:
            continue
        loc = graph.loc_of(w)
        if any(not v.is_init and graph.loc_of(v) == loc for v in writes):
            memory[loc] = written_value(graph.lab(w))
    return memory


@dataclass(frozen=True)
class Behavior(object):
    memory: tuple
    registers: tuple

    @property
    def register_map(self):
        return dict(self.registers)


@dataclass(frozen=True)
class BehaviorSet(object):
    """Final states of a program under a model. ``ub`` absorbs everything:
    a program with undefined behavior allows every outcome."""

    model: ModelId
    ub: bool = False
    behaviors: frozenset = frozenset()
    overflow: bool = False
    graphs: int = 0
    candidates: int = 0
    consistent: int = 0
    ub_witness: tuple = field(default=None, compare=False)

    def memories(self):
        return frozenset(b.memory for b in self.behaviors)

    def same_outcomes(self, other):
        return self.ub == other.ub and self.behaviors == other.behaviors


def outcome_allowed(behavior_set, outcome, program):
    """Whether some final state satisfies ``outcome``; everything is
    allowed under UB."""
    if behavior_set.ub:
        return True
    if outcome.ub:
        return False
    for b in behavior_set.behaviors:
        memory = dict(
            (program.loc_name(loc) or 'loc%d' % loc, value) for loc, value in b.memory
        )
        if outcome.satisfied_by(memory, b.register_map):
            return True
    return False


def _behavior(execution):
    return Behavior(
        memory=tuple(sorted(final_state(execution).items())),
        registers=tuple(sorted(execution.final_registers.items())),
    )


def _find_ub(exploration, model, check_fn):
    for graph in sorted(exploration.prefixes, key=len):
        if not any(not e.is_init and graph.mode_of(e) == Mode.NA for e in graph.events):
            continue
        for execution in candidates(graph):
            if not check_fn(execution).consistent:
                continue
            hb = DerivedRelations(execution, model).hb
            found = na_races(execution, hb)
            if found:
                return sorted(found)[0]
    return None


def behaviors(program, model, values=None, step_bound=None):
    """The final states of ``program`` under ``model``.

    Under RC11 and RC11^Ex86 a consistent execution of any reachable prefix
    with a race on a non-atomic access makes the whole program UB.

    :param values: read-value domain; defaults to the configured domain
    :param step_bound: bound on reduction steps
    :returns: a :class:`BehaviorSet`
    """
    model = ModelId(model)
    if values is None:
        values = config.value_domain(value_domain(program))
    exploration = enumerate_graphs(program, values, step_bound)
    check_fn = _CHECKS[model]
    if model in (ModelId.RC11, ModelId.RC11EXT):
        witness = _find_ub(exploration, model, check_fn)
        if witness is not None:
            log.info('%s: race on a non-atomic access between %s and %s', model, *witness)
            return BehaviorSet(
                model, ub=True, overflow=exploration.overflow,
                graphs=len(exploration.runs), ub_witness=witness,
            )
    found = set()
    total = consistent = 0
    for run in exploration.runs:
        for execution in candidates(run.graph, run.trace_registers):
            total += 1
            if check_fn(execution).consistent:
                consistent += 1
                found.add(_behavior(execution))
    log.debug('%s: %d graphs, %d candidates, %d consistent',
              model, len(exploration.runs), total, consistent)
    return BehaviorSet(
        model, behaviors=frozenset(found), overflow=exploration.overflow,
        graphs=len(exploration.runs), candidates=total, consistent=consistent,
    )


@dataclass(frozen=True)
class DRFReport(object):
    race_free: bool
    races: tuple = ()
    sc: BehaviorSet = None
    rc11ext: BehaviorSet = None

    @property
    def equal(self):
        if self.sc is None or self.rc11ext is None:
            return None
        return self.sc.same_outcomes(self.rc11ext)

    @property
    def holds(self):
        return not self.race_free or bool(self.equal)


def drf_check(program, values=None, step_bound=None):
    """Check data-race freedom under SC and, when it holds, that RC11^Ex86
    and SC give the same behaviors.

    Races are taken over SC-consistent executions of every reachable prefix,
    ordered by the RC11^Ex86 happens-before; only races between two sc
    accesses are tolerated.

    :raises DRFPreconditionError: if the program contains read-modify-writes
    """
    if has_updates(program):
        raise DRFPreconditionError("data-race freedom is only checked on programs without RMWs")
    if values is None:
        values = config.value_domain(value_domain(program))
    exploration = enumerate_graphs(program, values, step_bound)
    bad = set()
    for graph in exploration.prefixes:
        for execution in candidates(graph):
            if not sc_consistent(execution).consistent:
                continue
            hb = DerivedRelations(execution, ModelId.RC11EXT).hb
            for a, b in races(execution, hb):
                if graph.mode_of(a) != Mode.SC or graph.mode_of(b) != Mode.SC:
                    bad.add((a, b, graph.lab(a), graph.lab(b)))
    if bad:
        return DRFReport(race_free=False, races=tuple(sorted(bad, key=lambda r: (r[0], r[1]))))
    return DRFReport(
        race_free=True,
        sc=behaviors(program, ModelId.SC, values, step_bound),
        rc11ext=behaviors(program, ModelId.RC11EXT, values, step_bound),
    )


__all__ = [
    'Behavior', 'BehaviorSet', 'DRFPreconditionError', 'DRFReport',
    'DerivedRelations', 'ModelId', 'ModelPreconditionError', 'Verdict',
    'axiom_relation', 'behaviors', 'check', 'drf_check', 'ex86_consistent',
    'final_state', 'na_races', 'outcome_allowed', 'races', 'rc11_consistent',
    'rc11ext_axioms', 'rc11ext_consistent', 'sc_consistent', 'sw_relation',
]
