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
Compilation of RC11^Ex86 programs into pure Ex86 assembly.

Two schemes are provided. :attr:`Scheme.STANDARD` is the mapping mainstream
compilers use; :attr:`Scheme.ALTERNATIVE` compiles relaxed writes to
non-temporal stores and makes every release start with a store fence.
Assembly commands are emitted unchanged by both.
"""
import enum
import logging
from dataclasses import dataclass

from asmm import config
from asmm.lang import AsmMFence
from asmm.lang import AsmNTWrite
from asmm.lang import AsmRead
from asmm.lang import AsmRMW
from asmm.lang import AsmSFence
from asmm.lang import AsmWrite
from asmm.lang import Fence
from asmm.lang import If
from asmm.lang import Mode
from asmm.lang import ModelId
from asmm.lang import Read
from asmm.lang import RMW
from asmm.lang import Seq
from asmm.lang import Skip
from asmm.lang import While
from asmm.lang import Write
from asmm.lang import sequence
from asmm.models import behaviors


log = logging.getLogger('asmm.compile')


class Scheme(enum.Enum):
    STANDARD = 'std'
    ALTERNATIVE = 'alt'

    def __str__(self):
        return self.value


def _compile_write(cmd, scheme):
    write = AsmWrite(cmd.addr, cmd.value)
    if cmd.mode == Mode.SC:
        if scheme == Scheme.ALTERNATIVE:
            return sequence([AsmSFence(), write, AsmMFence()])
        return Seq(write, AsmMFence())
    if scheme == Scheme.ALTERNATIVE:
        if cmd.mode == Mode.RLX:
            return AsmNTWrite(cmd.addr, cmd.value)
        if cmd.mode == Mode.REL:
            return Seq(AsmSFence(), write)
    return write


def _compile_fence(cmd, scheme):
    if cmd.mode == Mode.SC:
        return AsmMFence()
    if scheme == Scheme.ALTERNATIVE and cmd.mode in (Mode.REL, Mode.ACQREL):
        return AsmSFence()
    return Skip()


def compile_cmd(cmd, scheme=Scheme.STANDARD):
    """Compile one command; control flow and expressions are kept as is."""
    if isinstance(cmd, Write):
        return _compile_write(cmd, scheme)
    if isinstance(cmd, Read):
        return AsmRead(cmd.reg, cmd.addr)
    if isinstance(cmd, RMW):
        return AsmRMW(cmd.reg, cmd.addr, cmd.expected, cmd.new)
    if isinstance(cmd, Fence):
        return _compile_fence(cmd, scheme)
    if isinstance(cmd, Seq):
        return Seq(compile_cmd(cmd.first, scheme), compile_cmd(cmd.second, scheme))
    if isinstance(cmd, If):
        return If(cmd.cond, compile_cmd(cmd.body, scheme))
    if isinstance(cmd, While):
        return While(cmd.cond, compile_cmd(cmd.body, scheme))
    return cmd


def compile_program(program, scheme=Scheme.STANDARD):
    """Compile every thread of ``program`` with ``scheme``.

    :returns: a pure-assembly :class:`asmm.lang.Program`
    """
    scheme = Scheme(scheme)
    return program.replace(dict(
        (tid, compile_cmd(cmd, scheme)) for tid, cmd in program.threads
    ))


@dataclass(frozen=True)
class InclusionReport(object):
    """Whether the compiled program's final memories are among the
    source's. ``extra_behaviors`` holds the target-only ones."""

    holds: bool
    extra_behaviors: frozenset = frozenset()
    source_ub: bool = False
    bounds_used: tuple = ()
    inconclusive: bool = False
    source: object = None
    target: object = None


def check_compilation(test, scheme=Scheme.STANDARD, values=None, step_bound=None):
    """Compare Ex86 behaviors of the compiled program with RC11^Ex86
    behaviors of the source.

    :param test: a :class:`asmm.lang.LitmusTest`
    :returns: an :class:`InclusionReport`
    """
    scheme = Scheme(scheme)
    if values is None:
        values = config.value_domain(test.values())
    if step_bound is None:
        step_bound = config.step_bound.value
    target_program = compile_program(test.program, scheme)
    source = behaviors(test.program, ModelId.RC11EXT, values, step_bound)
    target = behaviors(target_program, ModelId.EX86, values, step_bound)
    extra = frozenset() if source.ub else target.memories() - source.memories()
    report = InclusionReport(
        holds=source.ub or not extra,
        extra_behaviors=extra,
        source_ub=source.ub,
        bounds_used=(step_bound, tuple(values)),
        inconclusive=source.overflow or target.overflow,
        source=source,
        target=target,
    )
    log.info('%s compiled with %s: %s', test.name, scheme,
             'holds' if report.holds else 'extra behaviors %s' % sorted(extra))
    return report
