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
import pytest
from staticconf.testing import MockConfiguration

from asmm import config
from asmm import corpus
from asmm import models
from asmm.lang import ModelId
from asmm.lang import Outcome
from asmm.lang import ProgramClass
from asmm.lang import classify_program
from asmm.litmus import parse_program
from asmm.models import DerivedRelations
from asmm.opsem import candidates
from asmm.opsem import enumerate_graphs
from asmm.relalg import ThreadEvent
from testing.programs import programs
from testing.sc_simulator import sc_behaviors
from testing.util import outcome_pairs


VALUES = (0, 1)


def executions(program, values=VALUES):
    for graph in sorted(enumerate_graphs(program, values).graphs, key=repr):
        for execution in candidates(graph):
            yield execution


def find_execution(program, **reads):
    """The first candidate whose final registers match ``reads``."""
    for run in enumerate_graphs(program, VALUES).runs:
        for execution in candidates(run.graph, run.trace_registers):
            regs = execution.final_registers
            if all(regs.get(r) == v for r, v in reads.items()):
                return execution
    raise AssertionError("no execution with %r" % (reads,))


def assert_witness_valid(execution, model, verdict):
    d = DerivedRelations(execution, model)
    for axiom, witness in verdict.witnesses:
        relation = models.axiom_relation(d, axiom)
        cycle = list(witness)
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            assert (a, b) in relation, (axiom, witness)


class TestConsistency(object):

    @pytest.fixture(autouse=True)
    def setup_config(self):
        with MockConfiguration(namespace=config.namespace):
            yield

    def test_mp_weak_execution_is_incoherent(self):
        program = corpus.load('MP-rlx').program
        execution = find_execution(program, a=1, b=0)
        verdict = models.rc11_consistent(execution)
        assert not verdict.consistent
        assert 'Coherence' in verdict.violated_axioms
        assert_witness_valid(execution, ModelId.RC11, verdict)

    def test_mp_nt_weak_execution_is_consistent(self):
        execution = find_execution(corpus.load('MP-NT').program, a=1, b=0)
        verdict = models.rc11ext_consistent(execution)
        assert verdict.consistent
        assert verdict.witness_cycle is None

    def test_mp_nt_sf_weak_execution_is_inconsistent(self):
        execution = find_execution(corpus.load('MP-NT-SF').program, a=1, b=0)
        verdict = models.rc11ext_consistent(execution)
        assert not verdict.consistent
        assert_witness_valid(execution, ModelId.RC11EXT, verdict)

    def test_store_buffering_is_allowed_by_ex86(self):
        program = parse_program(
            'thread 0:\n  asm mov [x] 1;\n  a := asm mov [y]\n'
            'thread 1:\n  asm mov [y] 1;\n  b := asm mov [x]\n'
        )
        execution = find_execution(program, a=0, b=0)
        assert models.ex86_consistent(execution).consistent
        assert models.rc11ext_consistent(execution).consistent
        assert not models.sc_consistent(execution).consistent

    def test_mfence_forbids_store_buffering(self):
        program = parse_program(
            'thread 0:\n  asm mov [x] 1;\n  asm mfence;\n  a := asm mov [y]\n'
            'thread 1:\n  asm mov [y] 1;\n  asm mfence;\n  b := asm mov [x]\n'
        )
        execution = find_execution(program, a=0, b=0)
        verdict = models.ex86_consistent(execution)
        assert verdict.violated_axioms == ('External',)
        assert_witness_valid(execution, ModelId.EX86, verdict)

    def test_sw_from_release_to_acquire(self):
        execution = find_execution(corpus.load('MP-rlx').program, a=1, b=1)
        sw = models.sw_relation(execution, ModelId.RC11)
        assert (ThreadEvent(0, 1), ThreadEvent(1, 0)) in sw
        assert len(sw) == 1

    def test_sw_needs_an_rc11_model(self):
        execution = find_execution(corpus.load('MP-rlx').program, a=1, b=1)
        with pytest.raises(ValueError):
            models.sw_relation(execution, ModelId.EX86)

    def test_rc11_rejects_assembly_events(self):
        execution = find_execution(corpus.load('MP-NT').program, a=1, b=1)
        with pytest.raises(models.ModelPreconditionError) as excinfo:
            models.rc11_consistent(execution)
        assert excinfo.value.model == ModelId.RC11
        assert excinfo.value.event == ThreadEvent(0, 0)

    def test_ex86_rejects_c11_events(self):
        execution = find_execution(corpus.load('MP-rlx').program, a=1, b=1)
        with pytest.raises(models.ModelPreconditionError):
            models.ex86_consistent(execution)

    def test_check_dispatches_on_model(self):
        execution = find_execution(corpus.load('MP-rlx').program, a=1, b=1)
        assert models.check(execution, 'rc11').consistent
        assert models.check(execution, ModelId.SC).consistent


class TestBehaviors(object):

    @pytest.fixture(autouse=True)
    def setup_config(self):
        with MockConfiguration(namespace=config.namespace):
            yield

    def test_catch_fire_is_ub(self):
        program = corpus.load('catch-fire-na').program
        result = models.behaviors(program, ModelId.RC11EXT, VALUES)
        assert result.ub
        assert result.ub_witness is not None
        assert models.outcome_allowed(result, Outcome(ub=True), program)
        assert models.outcome_allowed(result, Outcome(registers=(('b', 1),)), program)

    def test_nt_race_is_not_ub(self):
        program = corpus.load('catch-fire-nt').program
        result = models.behaviors(program, ModelId.RC11EXT, VALUES)
        assert not result.ub
        assert not models.outcome_allowed(result, Outcome(ub=True), program)
        assert set(b.register_map.get('b') for b in result.behaviors) == set([0])

    def test_guarded_na_is_race_free(self):
        program = corpus.load('MP-guarded-na').program
        assert not models.behaviors(program, ModelId.RC11EXT, VALUES).ub

    def test_final_memory(self):
        program = corpus.load('MP-NT').program
        result = models.behaviors(program, ModelId.RC11EXT, VALUES)
        assert result.memories() == frozenset([((0, 1), (1, 1))])

    def test_unwritten_locations_are_left_out(self):
        program = corpus.load('catch-fire-nt').program
        result = models.behaviors(program, ModelId.RC11EXT, VALUES)
        assert result.memories() == frozenset([((0, 1),)])

    def test_mp_nt_rc11ext_is_weaker_than_sc(self):
        program = corpus.load('MP-NT').program
        rc11ext = models.behaviors(program, ModelId.RC11EXT, VALUES)
        sc = models.behaviors(program, ModelId.SC, VALUES)
        assert sc.behaviors < rc11ext.behaviors

    def test_counts(self):
        result = models.behaviors(corpus.load('MP-NT').program, ModelId.RC11EXT, VALUES)
        assert result.graphs == 4
        assert result.candidates >= result.consistent > 0
        assert not result.overflow

    def test_configured_values(self):
        config.configure(values=[0, 1, 2])
        result = models.behaviors(corpus.load('MP-NT').program, ModelId.SC)
        assert result.graphs == 9


class TestDRF(object):

    @pytest.mark.parametrize('name', ['DRF-MP', 'DRF-handoff', 'SB-sc'])
    def test_race_free_programs_agree_with_sc(self, name):
        test = corpus.load(name)
        report = models.drf_check(test.program, test.values())
        assert report.race_free
        assert report.equal
        assert report.holds
        assert outcome_pairs(report.sc) == outcome_pairs(report.rc11ext)

    def test_races_and_final_state(self):
        execution = find_execution(corpus.load('catch-fire-na').program, a=1)
        hb = DerivedRelations(execution, ModelId.RC11EXT).hb
        race = (ThreadEvent(0, 0), ThreadEvent(1, 0))
        assert models.races(execution, hb) == set([race])
        assert models.na_races(execution, hb) == set([race])
        assert models.final_state(execution) == {0: 1}

    def test_catch_fire_has_races(self):
        report = models.drf_check(corpus.load('catch-fire-na').program, VALUES)
        assert not report.race_free
        assert report.races
        assert report.equal is None
        assert report.holds

    def test_rmw_programs_are_rejected(self):
        with pytest.raises(models.DRFPreconditionError):
            models.drf_check(corpus.load('promote-rmw').program, VALUES)


@pytest.mark.acceptance_suite
class TestCorpusVerdicts(object):

    @pytest.mark.parametrize('name', corpus.names())
    def test_expectations(self, name):
        test = corpus.load(name)
        results = {}
        for expectation in test.expectations:
            if expectation.model not in results:
                results[expectation.model] = models.behaviors(
                    test.program, expectation.model, test.values())
            observed = models.outcome_allowed(
                results[expectation.model], expectation.outcome, test.program)
            assert observed == expectation.allowed, str(expectation)

    @pytest.mark.parametrize('test', corpus.loop_free(), ids=lambda t: t.name)
    def test_sc_matches_interleaving_simulator(self, test):
        result = models.behaviors(test.program, ModelId.SC, test.values())
        assert outcome_pairs(result) == sc_behaviors(test.program)

    @pytest.mark.parametrize('name', corpus.names())
    def test_witnesses_are_cycles(self, name):
        test = corpus.load(name)
        for execution in executions(test.program, test.values()):
            verdict = models.rc11ext_consistent(execution)
            assert verdict.consistent == (not verdict.witnesses)
            assert_witness_valid(execution, ModelId.RC11EXT, verdict)


@pytest.mark.acceptance_suite
class TestExtension(object):

    count = 1000

    def test_rc11ext_extends_rc11(self):
        for program in programs(self.count, 'rc11', seed=11):
            for execution in executions(program):
                rc11 = models.rc11_consistent(execution)
                rc11ext = models.rc11ext_consistent(execution)
                assert rc11.consistent == rc11ext.consistent, execution
                assert_witness_valid(execution, ModelId.RC11, rc11)

    def test_rc11ext_extends_ex86(self):
        for program in programs(self.count, 'asm', seed=13):
            for execution in executions(program):
                ex86 = models.ex86_consistent(execution)
                rc11ext = models.rc11ext_consistent(execution)
                assert ex86.consistent == rc11ext.consistent, execution
                assert_witness_valid(execution, ModelId.EX86, ex86)

    @pytest.mark.parametrize('name', [
        name for name in corpus.names()
        if classify_program(corpus.load(name).program) == ProgramClass.PURE_RC11
    ])
    def test_corpus_rc11_programs(self, name):
        test = corpus.load(name)
        for execution in executions(test.program, test.values()):
            assert models.rc11_consistent(execution).consistent == \
                models.rc11ext_consistent(execution).consistent

    def test_sc_oracle_on_random_programs(self):
        with MockConfiguration(namespace=config.namespace):
            config.configure(random_seed=17)
            generated = list(programs(300, 'mixed'))
        for program in generated:
            result = models.behaviors(program, ModelId.SC, VALUES)
            assert outcome_pairs(result) == sc_behaviors(program)
