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
Program transformations and their empirical soundness check.

A transformation site is ``(tid, path)``: ``path`` indexes statements in
the flattened body of thread ``tid``, descending into ``if`` and ``while``
bodies. A pair site names a statement and its next sibling.
"""
import dataclasses
import logging
from dataclasses import dataclass

from asmm import config
from asmm.compile import InclusionReport
from asmm.lang import AsmNTWrite
from asmm.lang import AsmRead
from asmm.lang import AsmRMW
from asmm.lang import AsmWrite
from asmm.lang import Assign
from asmm.lang import Eq
from asmm.lang import FENCE_MODES
from asmm.lang import Fence
from asmm.lang import If
from asmm.lang import Mode
from asmm.lang import ModelId
from asmm.lang import Num
from asmm.lang import READ_MODES
from asmm.lang import RMW
from asmm.lang import RMW_MODES
from asmm.lang import Read
from asmm.lang import Reg
from asmm.lang import Seq
from asmm.lang import WRITE_MODES
from asmm.lang import While
from asmm.lang import Write
from asmm.lang import flatten
from asmm.lang import if_then_else
from asmm.lang import locations_of
from asmm.lang import mode_join
from asmm.lang import mode_leq
from asmm.lang import mode_max_below
from asmm.lang import registers_of
from asmm.lang import sequence
from asmm.lang import static_address
from asmm.lang import value_domain
from asmm.lang import walk
from asmm.models import behaviors


log = logging.getLogger('asmm.transform')

_LEGAL_MODES = {
    Read: READ_MODES,
    Write: WRITE_MODES,
    RMW: RMW_MODES,
    Fence: FENCE_MODES,
}
PLAIN_ACCESSES = (Read, Write, RMW, Fence)


class TransformError(Exception):

    def __init__(self, kind, reason):
        super(TransformError, self).__init__()
        self.kind = kind
        self.reason = reason

    def __str__(self):
        return "%s: %s" % (self.kind, self.reason)

    def __repr__(self):
        return "<TransformError kind=%r reason=%r>" % (self.kind, self.reason)


# Transformation kinds

@dataclass(frozen=True)
class Strengthen(object):
    site: tuple
    mode: Mode

    name = 'strengthen'


@dataclass(frozen=True)
class Deorder(object):
    site: tuple

    name = 'deorder'


@dataclass(frozen=True)
class Merge(object):
    site: tuple

    name = 'merge'


@dataclass(frozen=True)
class PromoteRegister(object):
    location: object
    tid: int

    name = 'promote'


@dataclass(frozen=True)
class SeqNITIA(object):
    t1: int
    t2: int
    interleaving: tuple = None

    name = 'seq-nitia'


@dataclass(frozen=True)
class SeqFence(object):
    t1: int
    t2: int

    name = 'seq-fence'


@dataclass(frozen=True)
class SeqPlain(object):
    t1: int
    t2: int
    interleaving: tuple = None

    name = 'seq-plain'


# Sites

def _block(cmd, path, kind):
    """The statement list that ``path`` points into, with the index."""
    stmts = flatten(cmd)
    for depth, index in enumerate(path):
        if not 0 <= index < len(stmts):
            raise TransformError(kind, "no statement at path %s" % (path,))
        if depth == len(path) - 1:
            return stmts, index
        stmt = stmts[index]
        if not isinstance(stmt, (If, While)):
            raise TransformError(kind, "statement at %s has no body" % (path[:depth + 1],))
        stmts = flatten(stmt.body)
    raise TransformError(kind, "empty path")


def statement_at(program, site, kind='site'):
    tid, path = site
    if tid not in program.tids:
        raise TransformError(kind, "no thread %s" % tid)
    stmts, index = _block(program.thread(tid), path, kind)
    return stmts[index]


def _rebuild(cmd, path, count, replacement):
    stmts = flatten(cmd)
    index = path[0]
    if len(path) == 1:
        return sequence(stmts[:index] + list(replacement) + stmts[index + count:])
    stmt = stmts[index]
    body = _rebuild(stmt.body, path[1:], count, replacement)
    stmts[index] = type(stmt)(stmt.cond, body)
    return sequence(stmts)


def replace_statements(program, site, count, replacement):
    """Replace ``count`` statements starting at ``site`` with ``replacement``."""
    tid, path = site
    threads = program.as_dict()
    threads[tid] = _rebuild(threads[tid], path, count, replacement)
    return program.replace(threads)


def pair_at(program, site, kind):
    tid, path = site
    if tid not in program.tids:
        raise TransformError(kind, "no thread %s" % tid)
    stmts, index = _block(program.thread(tid), path, kind)
    if index + 1 >= len(stmts):
        raise TransformError(kind, "statement at %s has no successor" % (path,))
    return stmts[index], stmts[index + 1]


def sites(program):
    """Every statement site of ``program``, in program order."""
    found = []

    def visit(tid, cmd, prefix):
        for index, stmt in enumerate(flatten(cmd)):
            path = prefix + (index,)
            found.append(((tid, path), stmt))
            if isinstance(stmt, (If, While)):
                visit(tid, stmt.body, path)
    for tid, cmd in program.threads:
        visit(tid, cmd, ())
    return found


# Strengthening

def strengthen(program, site, mode):
    """Raise the access mode at ``site`` to ``mode``."""
    mode = Mode(mode)
    cmd = statement_at(program, site, 'strengthen')
    legal = _LEGAL_MODES.get(type(cmd))
    if legal is None:
        raise TransformError('strengthen', "%s has no access mode" % type(cmd).__name__)
    if mode not in legal:
        raise TransformError('strengthen', "mode %s is not legal for %s" % (mode, type(cmd).__name__))
    if not mode_leq(cmd.mode, mode):
        raise TransformError('strengthen', "%s is not stronger than %s" % (mode, cmd.mode))
    return replace_statements(program, site, 1, [_with_mode(cmd, mode)])


def _with_mode(cmd, mode):
    return dataclasses.replace(cmd, mode=mode)


def strengthenings(program):
    """Every legal single-site strengthening, as :class:`Strengthen`."""
    found = []
    for site, cmd in sites(program):
        legal = _LEGAL_MODES.get(type(cmd), ())
        for mode in legal:
            if mode != cmd.mode and mode_leq(cmd.mode, mode):
                found.append(Strengthen(site, mode))
    return found


# Deordering

def _kind_letter(cmd):
    return {Read: 'R', Write: 'W', RMW: 'RMW', Fence: 'F'}.get(type(cmd))


def _le(m1, m2):
    return mode_leq(m1, m2)


_DEORDER_TABLE = {
    ('R', 'R'): lambda m1, m2: _le(m1, Mode.RLX),
    ('R', 'W'): lambda m1, m2: _le(m1, Mode.RLX) and _le(m2, Mode.RLX) and Mode.NA in (m1, m2),
    ('R', 'RMW'): lambda m1, m2: m1 == Mode.NA and _le(m2, Mode.ACQ),
    ('R', 'F'): lambda m1, m2: m1 != Mode.RLX and m2 == Mode.ACQ,
    ('W', 'R'): lambda m1, m2: m1 != Mode.SC and m2 != Mode.SC,
    ('W', 'W'): lambda m1, m2: _le(m2, Mode.RLX),
    ('W', 'RMW'): lambda m1, m2: _le(m2, Mode.ACQ),
    ('W', 'F'): lambda m1, m2: m2 == Mode.ACQ,
    ('RMW', 'R'): lambda m1, m2: _le(m1, Mode.REL),
    ('RMW', 'W'): lambda m1, m2: _le(m1, Mode.REL) and m2 == Mode.NA,
    ('RMW', 'F'): lambda m1, m2: _le(Mode.ACQ, m1) and m2 == Mode.ACQ,
    ('F', 'R'): lambda m1, m2: m1 == Mode.REL,
    ('F', 'W'): lambda m1, m2: m1 == Mode.REL and m2 != Mode.RLX,
    ('F', 'RMW'): lambda m1, m2: m1 == Mode.REL and _le(Mode.REL, m2),
    ('F', 'F'): lambda m1, m2: m1 == Mode.REL and m2 == Mode.ACQ,
}


def deorderable(cmd1, cmd2):
    """Whether ``cmd1; cmd2`` may run in parallel instead: plain accesses to
    distinct statically known locations whose modes fit the table."""
    if not (isinstance(cmd1, PLAIN_ACCESSES) and isinstance(cmd2, PLAIN_ACCESSES)):
        return False
    for cmd in (cmd1, cmd2):
        if cmd.address() is not None and static_address(cmd.address()) is None:
            return False
    locs = [static_address(c.address()) for c in (cmd1, cmd2) if c.address() is not None]
    if len(locs) == 2 and locs[0] == locs[1]:
        return False
    rule = _DEORDER_TABLE.get((_kind_letter(cmd1), _kind_letter(cmd2)))
    return rule is not None and rule(cmd1.mode, cmd2.mode)


def deorder(program, site):
    """Split a two-statement thread into two single-statement threads. The
    second statement moves to a fresh thread."""
    tid, path = site
    cmd1, cmd2 = pair_at(program, site, 'deorder')
    if path != (0,) or len(flatten(program.thread(tid))) != 2:
        raise TransformError('deorder', "thread %s must consist of exactly the pair" % tid)
    if not deorderable(cmd1, cmd2):
        raise TransformError('deorder', "pair is not deorderable")
    if registers_of(cmd1) & registers_of(cmd2):
        raise TransformError('deorder', "statements share registers")
    threads = program.as_dict()
    threads[tid] = cmd1
    threads[max(program.tids) + 1] = cmd2
    return program.replace(threads)


# Merging

def _same_location(cmd1, cmd2):
    a1, a2 = cmd1.address(), cmd2.address()
    if a1 is None or a2 is None:
        return False
    l1, l2 = static_address(a1), static_address(a2)
    return l1 is not None and l1 == l2


def _mentions(expr, reg):
    return reg in expr.registers()


def mergeable(cmd1, cmd2):
    """The statements ``cmd1; cmd2`` merge into, or None.

    Mode side conditions apply after strengthening: modes below a row's
    modes are raised to them.
    """
    if isinstance(cmd1, Fence) and isinstance(cmd2, Fence):
        return [Fence(mode_join(cmd1.mode, cmd2.mode, FENCE_MODES))]
    if not (isinstance(cmd1, PLAIN_ACCESSES) and isinstance(cmd2, PLAIN_ACCESSES)):
        return None
    if not _same_location(cmd1, cmd2):
        return None
    if isinstance(cmd1, Write) and isinstance(cmd2, Write):
        return [Write(mode_join(cmd1.mode, cmd2.mode, WRITE_MODES), cmd2.addr, cmd2.value)]
    if isinstance(cmd1, Read) and isinstance(cmd2, Read):
        mode = mode_join(cmd1.mode, cmd2.mode, READ_MODES)
        return [Read(mode, cmd1.reg, cmd1.addr), Assign(cmd2.reg, Reg(cmd1.reg))]
    if isinstance(cmd1, Write) and isinstance(cmd2, Read):
        mode = cmd1.mode if mode_leq(cmd2.mode, Mode.ACQ) else Mode.SC
        return [Write(mode, cmd1.addr, cmd1.value), Assign(cmd2.reg, cmd1.value)]
    if isinstance(cmd1, Write) and isinstance(cmd2, RMW):
        mode = mode_max_below(cmd2.mode, WRITE_MODES)
        if mode is None or not mode_leq(cmd1.mode, mode):
            return None
        written = if_then_else(Eq(cmd1.value, cmd2.expected), cmd2.new, cmd1.value)
        return [Write(mode, cmd1.addr, written), Assign(cmd2.reg, cmd1.value)]
    if isinstance(cmd1, RMW) and isinstance(cmd2, Read):
        bound = mode_max_below(cmd1.mode, READ_MODES)
        if bound is None or not mode_leq(cmd2.mode, bound):
            return None
        if _mentions(cmd1.expected, cmd1.reg) or _mentions(cmd1.new, cmd1.reg):
            return None
        left = if_then_else(Eq(Reg(cmd1.reg), cmd1.expected), cmd1.new, Reg(cmd1.reg))
        return [cmd1, Assign(cmd2.reg, left)]
    return None


def merge(program, site):
    cmd1, cmd2 = pair_at(program, site, 'merge')
    merged = mergeable(cmd1, cmd2)
    if merged is None:
        raise TransformError('merge', "pair is not mergeable")
    return replace_statements(program, site, 2, merged)


def pair_sites(program, predicate):
    """Sites whose statement and next sibling satisfy ``predicate``."""
    found = []
    for site, _ in sites(program):
        try:
            cmd1, cmd2 = pair_at(program, site, 'pair')
        except TransformError:
            continue
        if predicate(cmd1, cmd2):
            found.append(site)
    return found


# Register promotion

def _location_number(program, location):
    if isinstance(location, int):
        return location
    number = program.loc_number(location)
    if number is None:
        raise TransformError('promote', "unknown location %s" % location)
    return number


def _fresh(program, stem):
    taken = program.registers()
    name = stem
    n = 0
    while name in taken:
        n += 1
        name = '%s%d' % (stem, n)
    return name


def promote_register(program, location, tid):
    """Replace every access to ``location`` in thread ``tid`` by moves on a
    fresh register initialized to 0.

    :raises TransformError: if another thread touches the location, an
        address is not statically known, or an assembly RMW accesses it
    """
    loc = _location_number(program, location)
    for t, cmd in program.commands():
        addr = cmd.address()
        if addr is None:
            continue
        static = static_address(addr)
        if static is None:
            raise TransformError('promote', "thread %s uses a dynamic address" % t)
        if static != loc:
            continue
        if t != tid:
            raise TransformError('promote', "location is also accessed by thread %s" % t)
        if isinstance(cmd, AsmRMW):
            raise TransformError('promote', "location is accessed by an assembly RMW")
    name = program.loc_name(loc) or 'loc%d' % loc
    holder = _fresh(program, '%s_reg' % name)
    scratch = _fresh(program, '%s_old' % name)

    def rewrite(cmd):
        if isinstance(cmd, Seq):
            return Seq(rewrite(cmd.first), rewrite(cmd.second))
        if isinstance(cmd, (If, While)):
            return type(cmd)(cmd.cond, rewrite(cmd.body))
        addr = cmd.address()
        if addr is None or static_address(addr) != loc:
            return cmd
        if isinstance(cmd, (Read, AsmRead)):
            return Assign(cmd.reg, Reg(holder))
        if isinstance(cmd, (Write, AsmWrite, AsmNTWrite)):
            return Assign(holder, cmd.value)
        old = Reg(scratch)
        return sequence([
            Assign(scratch, Reg(holder)),
            Assign(holder, if_then_else(Eq(old, cmd.expected), cmd.new, old)),
            Assign(cmd.reg, old),
        ])
    threads = program.as_dict()
    threads[tid] = Seq(Assign(holder, Num(0)), rewrite(threads[tid]))
    return program.replace(threads)


# Sequentialization

def _accesses(cmd, kinds):
    return [c for c in walk(cmd) if isinstance(c, kinds)]


def _addresses(cmds, label, tid):
    """Static locations of ``cmds``, or None with a logged diagnostic."""
    locs = set()
    for cmd in cmds:
        static = static_address(cmd.address())
        if static is None:
            log.warning('NITIA: %s of thread %s has a dynamic address', label, tid)
            return None
        locs.add(static)
    return locs


def _no_interaction(program, a, b):
    cmd_a, cmd_b = program.thread(a), program.thread(b)
    conditions = (
        (_accesses(cmd_a, (Read,)), _accesses(cmd_b, (AsmWrite, AsmNTWrite)), 'plain read'),
        (_accesses(cmd_a, (AsmRead,)), _accesses(cmd_b, (Write, AsmWrite, AsmNTWrite)), 'assembly read'),
    )
    for reads, writes, label in conditions:
        if not reads or not writes:
            continue
        read_locs = _addresses(reads, label, a)
        write_locs = _addresses(writes, 'write', b)
        if read_locs is None or write_locs is None:
            return False
        shared = read_locs & write_locs
        if shared:
            log.info('NITIA: %s of thread %s and writes of thread %s share %s',
                     label, a, b, sorted(shared))
            return False
    return True


def nitia_check(program, t1, t2):
    """No interaction through inline assembly between threads ``t1`` and
    ``t2``. RMWs are ignored."""
    return _no_interaction(program, t1, t2) and _no_interaction(program, t2, t1)


def _interleave(program, t1, t2, interleaving):
    first, second = flatten(program.thread(t1)), flatten(program.thread(t2))
    if interleaving is None:
        interleaving = (t1,) * len(first) + (t2,) * len(second)
    interleaving = tuple(interleaving)
    if (interleaving.count(t1) != len(first) or interleaving.count(t2) != len(second) or
            len(interleaving) != len(first) + len(second)):
        raise TransformError('sequentialize', "interleaving %s does not match the threads" % (interleaving,))
    queues = {t1: list(first), t2: list(second)}
    return [queues[t].pop(0) for t in interleaving]


def sequentialize(program, kind):
    """Merge threads ``kind.t1`` and ``kind.t2`` into thread ``t1``."""
    t1, t2 = kind.t1, kind.t2
    for t in (t1, t2):
        if t not in program.tids:
            raise TransformError(kind.name, "no thread %s" % t)
    if t1 == t2:
        raise TransformError(kind.name, "cannot merge a thread with itself")
    if isinstance(kind, SeqFence):
        body = [program.thread(t1), Fence(Mode.SC), program.thread(t2)]
    else:
        if isinstance(kind, SeqNITIA) and not nitia_check(program, t1, t2):
            raise TransformError(kind.name, "threads %s and %s interact through inline assembly" % (t1, t2))
        if isinstance(kind, SeqPlain):
            log.warning('plain sequentialization of threads %s and %s is unsound', t1, t2)
        body = _interleave(program, t1, t2, kind.interleaving)
    threads = program.as_dict()
    threads[t1] = sequence(body)
    del threads[t2]
    return program.replace(threads)


def apply_transform(program, kind):
    if isinstance(kind, Strengthen):
        return strengthen(program, kind.site, kind.mode)
    if isinstance(kind, Deorder):
        return deorder(program, kind.site)
    if isinstance(kind, Merge):
        return merge(program, kind.site)
    if isinstance(kind, PromoteRegister):
        return promote_register(program, kind.location, kind.tid)
    if isinstance(kind, (SeqNITIA, SeqFence, SeqPlain)):
        return sequentialize(program, kind)
    raise TypeError("not a transformation: %r" % (kind,))


# Command-line form

def _site(text):
    try:
        tid, path = text.split(':', 1)
        return int(tid), tuple(int(i) for i in path.split('.'))
    except ValueError:
        raise TransformError('spec', "bad site %r, expected T:PATH" % text)


def _order(text):
    try:
        return tuple(int(t) for t in text.split(','))
    except ValueError:
        raise TransformError('spec', "bad interleaving %r" % text)


def parse_transform_spec(text):
    """Parse a transformation given on the command line, for example
    ``strengthen 1:0 acq`` or ``seq-nitia 1 2 1,2,1``."""
    words = text.split()
    if not words:
        raise TransformError('spec', "empty transformation")
    name, args = words[0], words[1:]
    try:
        if name == 'strengthen' and len(args) == 2:
            return Strengthen(_site(args[0]), Mode(args[1]))
        if name == 'deorder' and len(args) == 1:
            return Deorder(_site(args[0]))
        if name == 'merge' and len(args) == 1:
            return Merge(_site(args[0]))
        if name == 'promote' and len(args) == 2:
            loc = int(args[0]) if args[0].isdigit() else args[0]
            return PromoteRegister(loc, int(args[1]))
        if name in ('seq-nitia', 'seq-plain') and len(args) in (2, 3):
            order = _order(args[2]) if len(args) == 3 else None
            cls = SeqNITIA if name == 'seq-nitia' else SeqPlain
            return cls(int(args[0]), int(args[1]), order)
        if name == 'seq-fence' and len(args) == 2:
            return SeqFence(int(args[0]), int(args[1]))
    except ValueError as e:
        raise TransformError('spec', str(e))
    raise TransformError('spec', "cannot parse %r" % text)


# Soundness

def _restrict(behavior_set, locations, registers):
    return frozenset(
        (
            tuple((l, v) for l, v in b.memory if l in locations),
            tuple((r, v) for r, v in b.registers if r in registers),
        )
        for b in behavior_set.behaviors
    )


def check_transform_sound(test, kind, values=None, step_bound=None):
    """Behaviors of the transformed program must be behaviors of the
    original under RC11^Ex86. UB of the original allows everything.

    Final memory is compared on the locations both programs use, final
    registers on the original program's registers.

    :returns: a :class:`asmm.compile.InclusionReport`
    """
    original = test.program
    transformed = apply_transform(original, kind)
    if values is None:
        values = config.value_domain(
            sorted(set(test.values()) | set(value_domain(transformed)))
        )
    if step_bound is None:
        step_bound = config.step_bound.value
    source = behaviors(original, ModelId.RC11EXT, values, step_bound)
    target = behaviors(transformed, ModelId.RC11EXT, values, step_bound)
    locations = locations_of(original) & locations_of(transformed)
    registers = original.registers()
    if source.ub:
        extra = frozenset()
    elif target.ub:
        extra = frozenset(['UB'])
    else:
        extra = _restrict(target, locations, registers) - _restrict(source, locations, registers)
    report = InclusionReport(
        holds=not extra,
        extra_behaviors=extra,
        source_ub=source.ub,
        bounds_used=(step_bound, tuple(values)),
        inconclusive=source.overflow or target.overflow,
        source=source,
        target=target,
    )
    log.info('%s %s: %s', test.name, kind.name, 'sound' if report.holds else 'unsound')
    return report
