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
Abstract syntax of the litmus language: C11-style accesses with access
modes, inline x86 assembly commands, the access-mode order, and expression
evaluation.

The concrete text format is handled by :mod:`asmm.litmus`.
"""
import enum
from dataclasses import dataclass
from dataclasses import field

from asmm.relalg import Relation


class Mode(enum.Enum):
    NA = 'na'
    RLX = 'rlx'
    REL = 'rel'
    ACQ = 'acq'
    ACQREL = 'acqrel'
    SC = 'sc'
    NT = 'nt'
    SF = 'sf'
    TSO = 'tso'

    def __str__(self):
        return self.value


_MODE_EDGES = (
    (Mode.NA, Mode.RLX),
    (Mode.NT, Mode.RLX),
    (Mode.RLX, Mode.REL),
    (Mode.RLX, Mode.ACQ),
    (Mode.REL, Mode.ACQREL),
    (Mode.ACQ, Mode.ACQREL),
    (Mode.ACQREL, Mode.SF),
    (Mode.SF, Mode.SC),
    (Mode.ACQREL, Mode.TSO),
)

_MODE_ORDER = Relation(_MODE_EDGES).refl_trans_closure(set(Mode))

WRITE_MODES = (Mode.NA, Mode.RLX, Mode.REL, Mode.SC)
READ_MODES = (Mode.NA, Mode.RLX, Mode.ACQ, Mode.SC)
FENCE_MODES = (Mode.ACQ, Mode.REL, Mode.ACQREL, Mode.SC)
RMW_MODES = (Mode.RLX, Mode.ACQ, Mode.REL, Mode.ACQREL, Mode.SC)


def mode_leq(m1, m2):
    """True iff ``m1`` is below or equal to ``m2`` in the access-mode order."""
    return (m1, m2) in _MODE_ORDER


def mode_join(m1, m2, legal):
    """Least mode of ``legal`` above both arguments, or None."""
    uppers = [m for m in legal if mode_leq(m1, m) and mode_leq(m2, m)]
    for m in uppers:
        if all(mode_leq(m, other) for other in uppers):
            return m
    return None


def mode_max_below(bound, legal, floor=Mode.RLX):
    """Greatest mode ``md`` of ``legal`` with ``floor ⊑ md ⊑ bound``."""
    between = [
        m for m in legal if mode_leq(floor, m) and mode_leq(m, bound)
    ]
    for m in between:
        if all(mode_leq(other, m) for other in between):
            return m
    return None


class ModelId(enum.Enum):
    SC = 'sc'
    RC11 = 'rc11'
    EX86 = 'ex86'
    RC11EXT = 'rc11ext'

    def __str__(self):
        return self.value


class ProgramClass(enum.Enum):
    PURE_RC11 = 'pure_rc11'
    PURE_ASM = 'pure_asm'
    MIXED = 'mixed'


class ModeLegalityError(Exception):

    def __init__(self, command, mode):
        super(ModeLegalityError, self).__init__()
        self.command = command
        self.mode = mode

    def __str__(self):
        return "mode %s is not legal for %s" % (self.mode, self.command)

    def __repr__(self):
        return "<ModeLegalityError command=%r mode=%r>" % (self.command, self.mode)


class ProgramError(Exception):
    pass


# Expressions

class Expr(object):
    __slots__ = ()

    def children(self):
        return ()

    def registers(self):
        regs = set()
        for child in self.children():
            regs |= child.registers()
        return regs


@dataclass(frozen=True)
class Num(Expr):
    value: int


@dataclass(frozen=True)
class Reg(Expr):
    name: str

    def registers(self):
        return {self.name}


@dataclass(frozen=True)
class Loc(Expr):
    loc: int


@dataclass(frozen=True)
class BinOp(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


class Plus(BinOp):
    symbol = '+'

    @staticmethod
    def apply(a, b):
        return a + b


class Sub(BinOp):
    symbol = '-'

    @staticmethod
    def apply(a, b):
        return max(a - b, 0)


class Times(BinOp):
    symbol = '*'

    @staticmethod
    def apply(a, b):
        return a * b


class Eq(BinOp):
    symbol = '=='

    @staticmethod
    def apply(a, b):
        return 1 if a == b else 0


def eval_expr(expr, regs):
    """Evaluate ``expr`` over naturals.

    :param expr: an :class:`Expr`
    :param regs: mapping from register name to value; missing registers read 0
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Loc):
        return expr.loc
    if isinstance(expr, Reg):
        return regs.get(expr.name, 0)
    return expr.apply(eval_expr(expr.left, regs), eval_expr(expr.right, regs))


def static_address(expr):
    """Value of a register-free expression, or None."""
    if expr.registers():
        return None
    return eval_expr(expr, {})


def if_then_else(cond, then, other):
    """Arithmetic encoding of ``cond ? then : other`` for 0/1 conditions."""
    return Plus(Times(cond, then), Times(Sub(Num(1), cond), other))


# Commands

class Cmd(object):
    __slots__ = ()

    is_memory = False
    is_asm = False

    def children(self):
        return ()

    def expressions(self):
        return ()

    def assigned(self):
        return ()

    def address(self):
        return None


@dataclass(frozen=True)
class Skip(Cmd):
    pass


@dataclass(frozen=True)
class Assign(Cmd):
    reg: str
    value: Expr

    def expressions(self):
        return (self.value,)

    def assigned(self):
        return (self.reg,)


def _check_mode(command, mode, legal):
    if mode not in legal:
        raise ModeLegalityError(command, mode)


@dataclass(frozen=True)
class Read(Cmd):
    mode: Mode
    reg: str
    addr: Expr

    is_memory = True

    def __post_init__(self):
        _check_mode('R', self.mode, READ_MODES)

    def expressions(self):
        return (self.addr,)

    def assigned(self):
        return (self.reg,)

    def address(self):
        return self.addr


@dataclass(frozen=True)
class Write(Cmd):
    mode: Mode
    addr: Expr
    value: Expr

    is_memory = True

    def __post_init__(self):
        _check_mode('W', self.mode, WRITE_MODES)

    def expressions(self):
        return (self.addr, self.value)

    def address(self):
        return self.addr


@dataclass(frozen=True)
class RMW(Cmd):
    mode: Mode
    reg: str
    addr: Expr
    expected: Expr
    new: Expr

    is_memory = True

    def __post_init__(self):
        _check_mode('RMW', self.mode, RMW_MODES)

    def expressions(self):
        return (self.addr, self.expected, self.new)

    def assigned(self):
        return (self.reg,)

    def address(self):
        return self.addr


@dataclass(frozen=True)
class Fence(Cmd):
    mode: Mode

    is_memory = True

    def __post_init__(self):
        _check_mode('F', self.mode, FENCE_MODES)


@dataclass(frozen=True)
class If(Cmd):
    cond: Expr
    body: Cmd

    def children(self):
        return (self.body,)

    def expressions(self):
        return (self.cond,)


@dataclass(frozen=True)
class While(Cmd):
    cond: Expr
    body: Cmd

    def children(self):
        return (self.body,)

    def expressions(self):
        return (self.cond,)


@dataclass(frozen=True)
class Seq(Cmd):
    first: Cmd
    second: Cmd

    def children(self):
        return (self.first, self.second)


@dataclass(frozen=True)
class AsmRead(Cmd):
    reg: str
    addr: Expr

    is_memory = True
    is_asm = True

    def expressions(self):
        return (self.addr,)

    def assigned(self):
        return (self.reg,)

    def address(self):
        return self.addr


@dataclass(frozen=True)
class AsmWrite(Cmd):
    addr: Expr
    value: Expr

    is_memory = True
    is_asm = True

    def expressions(self):
        return (self.addr, self.value)

    def address(self):
        return self.addr


@dataclass(frozen=True)
class AsmNTWrite(Cmd):
    addr: Expr
    value: Expr

    is_memory = True
    is_asm = True

    def expressions(self):
        return (self.addr, self.value)

    def address(self):
        return self.addr


@dataclass(frozen=True)
class AsmRMW(Cmd):
    reg: str
    addr: Expr
    expected: Expr
    new: Expr

    is_memory = True
    is_asm = True

    def expressions(self):
        return (self.addr, self.expected, self.new)

    def assigned(self):
        return (self.reg,)

    def address(self):
        return self.addr


@dataclass(frozen=True)
class AsmMFence(Cmd):
    is_memory = True
    is_asm = True


@dataclass(frozen=True)
class AsmSFence(Cmd):
    is_memory = True
    is_asm = True


READS = (Read, AsmRead)
WRITES = (Write, AsmWrite, AsmNTWrite)
UPDATES = (RMW, AsmRMW)


def walk(cmd):
    """Yield ``cmd`` and every command nested in it, in program order."""
    yield cmd
    for child in cmd.children():
        for sub in walk(child):
            yield sub


def walk_expr(expr):
    yield expr
    for child in expr.children():
        for sub in walk_expr(child):
            yield sub


def flatten(cmd):
    """The statement list of a (possibly nested) sequence."""
    if isinstance(cmd, Seq):
        return flatten(cmd.first) + flatten(cmd.second)
    return [cmd]


def sequence(cmds):
    """Right-nested sequence of ``cmds``; an empty list is ``skip``."""
    cmds = list(cmds)
    if not cmds:
        return Skip()
    result = cmds[-1]
    for cmd in reversed(cmds[:-1]):
        result = Seq(cmd, result)
    return result


def registers_of(cmd):
    regs = set()
    for sub in walk(cmd):
        regs.update(sub.assigned())
        for expr in sub.expressions():
            regs |= expr.registers()
    return regs


# Programs

@dataclass(frozen=True)
class Program(object):
    """A finite map from thread ids to commands.

    :param threads: tuple of ``(tid, cmd)`` pairs, sorted by tid
    :param loc_names: tuple of ``(name, location)`` pairs used for printing
    """

    threads: tuple
    loc_names: tuple = ()

    def __post_init__(self):
        if not self.threads:
            raise ProgramError("a program needs at least one thread")
        tids = [tid for tid, _ in self.threads]
        if len(set(tids)) != len(tids):
            raise ProgramError("duplicate thread ids: %s" % tids)
        if tids != sorted(tids):
            object.__setattr__(self, 'threads', tuple(sorted(self.threads)))
        owner = {}
        for tid, cmd in self.threads:
            for reg in registers_of(cmd):
                if owner.setdefault(reg, tid) != tid:
                    raise ProgramError(
                        "register %s is used by threads %d and %d" % (reg, owner[reg], tid)
                    )

    @classmethod
    def from_threads(cls, threads, loc_names=()):
        return cls(tuple(sorted(threads.items())), tuple(loc_names))

    @property
    def tids(self):
        return [tid for tid, _ in self.threads]

    def thread(self, tid):
        for t, cmd in self.threads:
            if t == tid:
                return cmd
        raise KeyError(tid)

    def replace(self, threads, loc_names=None):
        return Program.from_threads(
            threads, self.loc_names if loc_names is None else loc_names
        )

    def as_dict(self):
        return dict(self.threads)

    def loc_name(self, loc):
        for name, value in self.loc_names:
            if value == loc:
                return name
        return None

    def loc_number(self, name):
        for n, value in self.loc_names:
            if n == name:
                return value
        return None

    def commands(self):
        for tid, cmd in self.threads:
            for sub in walk(cmd):
                yield tid, sub

    def registers(self):
        regs = set()
        for _, cmd in self.threads:
            regs |= registers_of(cmd)
        return regs


def locations_of(program):
    """Locations named by the program: location literals plus the values of
    register-free address expressions."""
    locs = set()
    for _, cmd in program.commands():
        for expr in cmd.expressions():
            locs.update(e.loc for e in walk_expr(expr) if isinstance(e, Loc))
        addr = cmd.address()
        if addr is not None:
            static = static_address(addr)
            if static is not None:
                locs.add(static)
    return locs


def literals_of(program):
    lits = set()
    for _, cmd in program.commands():
        for expr in cmd.expressions():
            lits.update(e.value for e in walk_expr(expr) if isinstance(e, Num))
    return lits


def value_domain(program):
    """Default read-value domain: 0 plus every numeric literal."""
    return tuple(sorted({0} | literals_of(program)))


def classify_program(program):
    memory = [cmd for _, cmd in program.commands() if cmd.is_memory]
    if not any(cmd.is_asm for cmd in memory):
        return ProgramClass.PURE_RC11
    if all(cmd.is_asm for cmd in memory):
        return ProgramClass.PURE_ASM
    return ProgramClass.MIXED


def has_updates(program):
    return any(isinstance(cmd, UPDATES) for _, cmd in program.commands())


def has_loops(program):
    return any(isinstance(cmd, While) for _, cmd in program.commands())


# Litmus tests

@dataclass(frozen=True)
class Outcome(object):
    """A conjunction of ``reg=n``, ``loc=n`` and ``UB`` atoms."""

    registers: tuple = ()
    locations: tuple = ()
    ub: bool = False

    def satisfied_by(self, memory, registers):
        """Check one final state.

        :param memory: mapping from location name to value (missing reads 0)
        :param registers: mapping from register name to value (missing reads 0)
        """
        if self.ub:
            return False
        return (
            all(registers.get(r, 0) == v for r, v in self.registers) and
            all(memory.get(l, 0) == v for l, v in self.locations)
        )

    def __str__(self):
        atoms = ['%s=%d' % pair for pair in self.registers + self.locations]
        if self.ub:
            atoms.append('UB')
        return ' /\\ '.join(atoms)


@dataclass(frozen=True)
class Expectation(object):
    model: ModelId
    outcome: Outcome
    allowed: bool

    def __str__(self):
        return '%s %s: %s' % (
            self.model, 'allowed' if self.allowed else 'forbidden', self.outcome
        )


@dataclass(frozen=True)
class LitmusTest(object):
    name: str
    program: Program
    expectations: tuple = ()
    domain_hint: tuple = None
    note: str = field(default='', compare=False)

    def values(self):
        if self.domain_hint:
            return tuple(self.domain_hint)
        return value_domain(self.program)
