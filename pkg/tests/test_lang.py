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
import itertools

import pytest

from asmm import lang
from asmm.lang import AsmNTWrite
from asmm.lang import AsmRead
from asmm.lang import Eq
from asmm.lang import Fence
from asmm.lang import Loc
from asmm.lang import Mode
from asmm.lang import Num
from asmm.lang import Plus
from asmm.lang import Program
from asmm.lang import Read
from asmm.lang import Reg
from asmm.lang import Sub
from asmm.lang import Times
from asmm.lang import While
from asmm.lang import Write


class TestExpressions(object):

    def test_eval(self):
        expr = Plus(Times(Reg('a'), Num(3)), Num(1))
        assert lang.eval_expr(expr, {'a': 2}) == 7

    def test_missing_register_reads_zero(self):
        assert lang.eval_expr(Reg('a'), {}) == 0

    def test_subtraction_saturates(self):
        assert lang.eval_expr(Sub(Num(1), Num(2)), {}) == 0

    def test_eq(self):
        assert lang.eval_expr(Eq(Num(2), Num(2)), {}) == 1
        assert lang.eval_expr(Eq(Num(2), Num(1)), {}) == 0

    def test_static_address(self):
        assert lang.static_address(Plus(Num(2), Num(3))) == 5
        assert lang.static_address(Plus(Reg('a'), Num(3))) is None

    @pytest.mark.parametrize('cond, expected', [(1, 4), (0, 9)])
    def test_if_then_else(self, cond, expected):
        expr = lang.if_then_else(Num(cond), Num(4), Num(9))
        assert lang.eval_expr(expr, {}) == expected


class TestModes(object):

    def test_order(self):
        assert lang.mode_leq(Mode.NA, Mode.SC)
        assert lang.mode_leq(Mode.NT, Mode.REL)
        assert lang.mode_leq(Mode.ACQREL, Mode.TSO)
        assert not lang.mode_leq(Mode.TSO, Mode.SC)
        assert not lang.mode_leq(Mode.SC, Mode.TSO)
        assert not lang.mode_leq(Mode.NA, Mode.NT)

    def test_join(self):
        assert lang.mode_join(Mode.REL, Mode.ACQ, lang.WRITE_MODES) == Mode.SC
        assert lang.mode_join(Mode.REL, Mode.ACQ, lang.FENCE_MODES) == Mode.ACQREL
        assert lang.mode_join(Mode.RLX, Mode.REL, lang.WRITE_MODES) == Mode.REL
        assert lang.mode_join(Mode.TSO, Mode.SC, lang.WRITE_MODES) is None

    def test_max_below(self):
        assert lang.mode_max_below(Mode.ACQREL, lang.WRITE_MODES) == Mode.REL
        assert lang.mode_max_below(Mode.SC, lang.WRITE_MODES) == Mode.SC
        assert lang.mode_max_below(Mode.ACQ, lang.WRITE_MODES) == Mode.RLX

    def test_order_laws(self):
        modes = list(Mode)
        for m in modes:
            assert lang.mode_leq(m, m)
        for m1, m2 in itertools.product(modes, modes):
            if lang.mode_leq(m1, m2) and lang.mode_leq(m2, m1):
                assert m1 == m2
        for m1, m2, m3 in itertools.product(modes, modes, modes):
            if lang.mode_leq(m1, m2) and lang.mode_leq(m2, m3):
                assert lang.mode_leq(m1, m3)

    def test_join_is_an_upper_bound(self):
        for legal in (lang.WRITE_MODES, lang.READ_MODES, lang.FENCE_MODES, lang.RMW_MODES):
            for m1, m2 in itertools.product(legal, legal):
                join = lang.mode_join(m1, m2, legal)
                assert join in legal
                assert lang.mode_leq(m1, join)
                assert lang.mode_leq(m2, join)


class TestCommands(object):

    @pytest.mark.parametrize('make', [
        lambda: Read(Mode.REL, 'a', Loc(0)),
        lambda: Write(Mode.ACQ, Loc(0), Num(1)),
        lambda: Fence(Mode.RLX),
        lambda: Write(Mode.NT, Loc(0), Num(1)),
    ])
    def test_illegal_modes(self, make):
        with pytest.raises(lang.ModeLegalityError):
            make()

    def test_sequence_and_flatten(self):
        cmds = [Write(Mode.RLX, Loc(0), Num(1)), Fence(Mode.SC), AsmRead('a', Loc(1))]
        assert lang.flatten(lang.sequence(cmds)) == cmds
        assert lang.sequence([]) == lang.Skip()

    def test_registers_of(self):
        cmd = lang.sequence([
            Read(Mode.RLX, 'a', Loc(0)),
            Write(Mode.RLX, Loc(1), Plus(Reg('a'), Reg('b'))),
        ])
        assert lang.registers_of(cmd) == set(['a', 'b'])


class TestProgram(object):

    def test_needs_a_thread(self):
        with pytest.raises(lang.ProgramError):
            Program(())

    def test_registers_are_thread_local(self):
        with pytest.raises(lang.ProgramError):
            Program.from_threads({
                0: Read(Mode.RLX, 'a', Loc(0)),
                1: Read(Mode.RLX, 'a', Loc(1)),
            })

    def test_threads_are_sorted(self):
        program = Program(((1, lang.Skip()), (0, lang.Skip())))
        assert program.tids == [0, 1]

    def test_locations_and_values(self):
        program = Program.from_threads({
            0: lang.sequence([AsmNTWrite(Loc(0), Num(1)), Write(Mode.REL, Plus(Num(2), Num(3)), Num(2))]),
            1: Read(Mode.ACQ, 'a', Loc(1)),
        }, [('x', 0), ('y', 1)])
        assert lang.locations_of(program) == set([0, 1, 5])
        assert lang.value_domain(program) == (0, 1, 2, 3)
        assert program.loc_name(1) == 'y'
        assert program.loc_number('x') == 0
        assert program.loc_name(5) is None

    def test_classify(self):
        rc11 = Program.from_threads({0: Write(Mode.RLX, Loc(0), Num(1))})
        asm = Program.from_threads({0: AsmNTWrite(Loc(0), Num(1))})
        mixed = Program.from_threads({0: lang.sequence([AsmNTWrite(Loc(0), Num(1)), Fence(Mode.SC)])})
        assert lang.classify_program(rc11) == lang.ProgramClass.PURE_RC11
        assert lang.classify_program(asm) == lang.ProgramClass.PURE_ASM
        assert lang.classify_program(mixed) == lang.ProgramClass.MIXED

    def test_has_loops(self):
        looping = Program.from_threads({0: While(Num(0), lang.Skip())})
        assert lang.has_loops(looping)


class TestOutcome(object):

    def test_satisfied_by(self):
        outcome = lang.Outcome(registers=(('a', 1), ('b', 0)), locations=(('x', 2),))
        assert outcome.satisfied_by({'x': 2}, {'a': 1})
        assert not outcome.satisfied_by({'x': 1}, {'a': 1})

    def test_ub_outcome_needs_ub(self):
        assert not lang.Outcome(ub=True).satisfied_by({}, {})

    def test_str(self):
        outcome = lang.Outcome(registers=(('a', 1),), locations=(('x', 0),))
        assert str(outcome) == 'a=1 /\\ x=0'
