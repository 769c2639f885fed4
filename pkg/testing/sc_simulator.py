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
"""Brute-force sequentially consistent interpreter.

Runs a program directly over a single shared memory, trying every
schedule, without building execution graphs. Used as an independent
oracle for SC behaviors.
"""
from asmm.lang import AsmMFence
from asmm.lang import AsmNTWrite
from asmm.lang import AsmRead
from asmm.lang import AsmRMW
from asmm.lang import AsmSFence
from asmm.lang import AsmWrite
from asmm.lang import Assign
from asmm.lang import Fence
from asmm.lang import If
from asmm.lang import Read
from asmm.lang import RMW
from asmm.lang import Seq
from asmm.lang import Skip
from asmm.lang import While
from asmm.lang import Write
from asmm.lang import eval_expr
from asmm.lang import flatten


def _step(cmds, regs, memory):
    """Run ``cmds`` up to and including its first memory access. Returns
    ``(rest, regs, memory)``."""
    cmds = list(cmds)
    regs = dict(regs)
    memory = dict(memory)
    while cmds:
        head = cmds.pop(0)
        if isinstance(head, Skip):
            continue
        if isinstance(head, Seq):
            cmds = flatten(head) + cmds
        elif isinstance(head, If):
            if eval_expr(head.cond, regs):
                cmds = flatten(head.body) + cmds
        elif isinstance(head, While):
            if eval_expr(head.cond, regs):
                cmds = flatten(head.body) + [head] + cmds
        elif isinstance(head, Assign):
            regs[head.reg] = eval_expr(head.value, regs)
        elif isinstance(head, (Read, AsmRead)):
            regs[head.reg] = memory.get(eval_expr(head.addr, regs), 0)
            break
        elif isinstance(head, (Write, AsmWrite, AsmNTWrite)):
            memory[eval_expr(head.addr, regs)] = eval_expr(head.value, regs)
            break
        elif isinstance(head, (RMW, AsmRMW)):
            loc = eval_expr(head.addr, regs)
            old = memory.get(loc, 0)
            if old == eval_expr(head.expected, regs):
                memory[loc] = eval_expr(head.new, regs)
            regs[head.reg] = old
            break
        elif isinstance(head, (Fence, AsmMFence, AsmSFence)):
            break
        else:
            raise TypeError("unknown command %r" % (head,))
    return tuple(cmds), regs, memory


def sc_behaviors(program, max_steps=1000):
    """Final ``(memory, registers)`` pairs, both as sorted item tuples.
    Memory covers only written locations.

    :raises RuntimeError: if some schedule runs longer than ``max_steps``
    """
    start = tuple((tid, tuple(flatten(cmd)), ()) for tid, cmd in program.threads)
    results = set()
    seen = set()
    stack = [(start, (), 0)]
    while stack:
        threads, memory, depth = stack.pop()
        if (threads, memory) in seen:
            continue
        seen.add((threads, memory))
        live = [i for i, (_, cmds, _) in enumerate(threads) if cmds]
        if not live:
            registers = {}
            for _, _, regs in threads:
                registers.update(regs)
            results.add((memory, tuple(sorted(registers.items()))))
            continue
        if depth >= max_steps:
            raise RuntimeError("schedule longer than %d steps" % max_steps)
        for i in live:
            tid, cmds, regs = threads[i]
            rest, new_regs, new_memory = _step(cmds, dict(regs), dict(memory))
            updated = list(threads)
            updated[i] = (tid, rest, tuple(sorted(new_regs.items())))
            stack.append((tuple(updated), tuple(sorted(new_memory.items())), depth + 1))
    return results
