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
Reading and writing the litmus text format::

    test MP-NT
    thread 0:
      asm movnt [x] 1;
      W[rel] [y] 1
    thread 1:
      a := R[acq] [y];
      b := R[rlx] [x]
    expect rc11ext allowed: a=1 /\\ b=0

Identifiers assigned with ``:=`` are registers; every other identifier is a
location, bound to a natural in order of first appearance.
"""
import re

from asmm.lang import AsmMFence
from asmm.lang import AsmNTWrite
from asmm.lang import AsmRead
from asmm.lang import AsmRMW
from asmm.lang import AsmSFence
from asmm.lang import AsmWrite
from asmm.lang import Assign
from asmm.lang import BinOp
from asmm.lang import Eq
from asmm.lang import Expectation
from asmm.lang import Fence
from asmm.lang import If
from asmm.lang import LitmusTest
from asmm.lang import Loc
from asmm.lang import Mode
from asmm.lang import ModeLegalityError
from asmm.lang import ModelId
from asmm.lang import Num
from asmm.lang import Outcome
from asmm.lang import Plus
from asmm.lang import Program
from asmm.lang import Read
from asmm.lang import Reg
from asmm.lang import RMW
from asmm.lang import Seq
from asmm.lang import Skip
from asmm.lang import Sub
from asmm.lang import Times
from asmm.lang import While
from asmm.lang import Write
from asmm.lang import flatten


TOKEN_RE = re.compile(r'''
    (?P<space>[ \t\r]+)
  | (?P<comment>(\#|//)[^\n]*)
  | (?P<newline>\n)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|==|/\\|[=+\-*()\[\]{};:,])
''', re.VERBOSE)

ATOM_TOKENS = ('num', 'ident', '(')


class LitmusSyntaxError(Exception):

    def __init__(self, line, column, message):
        super(LitmusSyntaxError, self).__init__()
        self.line = line
        self.column = column
        self.message = message

    def __str__(self):
        return "line %d, column %d: %s" % (self.line, self.column, self.message)

    def __repr__(self):
        return "<LitmusSyntaxError line=%r column=%r message=%r>" % (
            self.line, self.column, self.message)


class Token(object):

    def __init__(self, kind, text, line, column):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column

    def __repr__(self):
        return 'Token(%r, %r)' % (self.kind, self.text)


TEST_HEADER_RE = re.compile(r'(?P<indent>[ \t]*)test[ \t]+(?P<name>[^\n#]*)')


def tokenize(text):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        if pos == line_start:
            header = TEST_HEADER_RE.match(text, pos)
            if header is not None:
                column = len(header.group('indent')) + 1
                tokens.append(Token('ident', 'test', line, column))
                tokens.append(Token('name', header.group('name').strip(), line, column + 5))
                pos = header.end()
                continue
        match = TOKEN_RE.match(text, pos)
        if match is None:
            raise LitmusSyntaxError(
                line, pos - line_start + 1, "unexpected character %r" % text[pos]
            )
        kind = match.lastgroup
        if kind == 'newline':
            line += 1
            line_start = match.end()
        elif kind not in ('space', 'comment'):
            tokens.append(Token(kind, match.group(), line, pos - line_start + 1))
        pos = match.end()
    tokens.append(Token('eof', '', line, pos - line_start + 1))
    return tokens


class _Name(object):
    """An identifier whose role (register or location) is decided once the
    whole test has been read."""

    __slots__ = ('name',)

    def __init__(self, name):
        self.name = name


class _Parser(object):

    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.registers = set()
        self.locations = {}

    @property
    def current(self):
        return self.tokens[self.pos]

    def error(self, message, token=None):
        token = token or self.current
        return LitmusSyntaxError(token.line, token.column, message)

    def peek(self, text, offset=0):
        token = self.tokens[min(self.pos + offset, len(self.tokens) - 1)]
        return token.text == text and token.kind in ('ident', 'op')

    def advance(self):
        token = self.current
        self.pos += 1
        return token

    def expect(self, text):
        if not self.peek(text):
            raise self.error("expected %r, found %r" % (text, self.current.text or 'end of input'))
        return self.advance()

    def expect_kind(self, kind):
        if self.current.kind != kind:
            raise self.error("expected %s, found %r" % (kind, self.current.text or 'end of input'))
        return self.advance()

    # header

    def parse_test(self):
        self.expect('test')
        name_token = self.current
        if name_token.kind != 'name' or not name_token.text:
            raise self.error("missing test name", name_token)
        name = self.advance().text
        values = None
        if self.peek('values'):
            self.advance()
            values = [int(self.expect_kind('num').text)]
            while self.peek(','):
                self.advance()
                values.append(int(self.expect_kind('num').text))
        threads = {}
        while self.peek('thread'):
            self.advance()
            tid_token = self.expect_kind('num')
            tid = int(tid_token.text)
            if tid in threads:
                raise self.error("duplicate thread %d" % tid, tid_token)
            self.expect(':')
            threads[tid] = self.parse_block(('thread', 'expect', 'eof'))
        if not threads:
            raise self.error("expected at least one thread")
        raw_expectations = []
        while self.peek('expect'):
            raw_expectations.append(self.parse_expectation())
        if self.current.kind != 'eof':
            raise self.error("unexpected %r" % self.current.text)

        resolved = dict((tid, self._resolve_cmd(cmd)) for tid, cmd in threads.items())
        loc_names = tuple(sorted(self.locations.items(), key=lambda item: item[1]))
        program = Program.from_threads(resolved, loc_names)
        expectations = tuple(
            self._resolve_expectation(item, program) for item in raw_expectations
        )
        return LitmusTest(
            name=name,
            program=program,
            expectations=expectations,
            domain_hint=tuple(values) if values else None,
        )

    # commands

    def _at_terminator(self, terminators):
        if self.current.kind == 'eof':
            return 'eof' in terminators
        return any(self.peek(t) for t in terminators)

    def parse_block(self, terminators):
        cmds = [self.parse_stmt()]
        while self.peek(';'):
            self.advance()
            cmds.append(self.parse_stmt())
        if not self._at_terminator(terminators):
            raise self.error("expected ';' or end of block, found %r" % self.current.text)
        result = cmds[-1]
        for cmd in reversed(cmds[:-1]):
            result = Seq(cmd, result)
        return result

    def parse_braced_block(self):
        self.expect('{')
        if self.peek('}'):
            self.advance()
            return Skip()
        body = self.parse_block(('}',))
        self.expect('}')
        return body

    def parse_mode(self, command):
        self.expect('[')
        parts = []
        while not self.peek(']'):
            if self.current.kind == 'eof':
                raise self.error("unterminated access mode")
            parts.append(self.advance().text)
        self.advance()
        text = ''.join(parts)
        try:
            return Mode(text)
        except ValueError:
            raise ModeLegalityError(command, text)

    def parse_address(self):
        self.expect('[')
        addr = self.parse_expr()
        self.expect(']')
        return addr

    def parse_stmt(self):
        token = self.current
        if token.kind == 'ident' and self.peek(':=', 1):
            reg = self.advance().text
            self.advance()
            self.registers.add(reg)
            return self.parse_assignment(reg)
        if self.peek('skip'):
            self.advance()
            return Skip()
        if self.peek('W'):
            self.advance()
            mode = self.parse_mode('W')
            addr = self.parse_address()
            return Write(mode, addr, self.parse_expr())
        if self.peek('F'):
            self.advance()
            return Fence(self.parse_mode('F'))
        if self.peek('if'):
            self.advance()
            cond = self.parse_expr()
            return If(cond, self.parse_braced_block())
        if self.peek('while'):
            self.advance()
            cond = self.parse_expr()
            return While(cond, self.parse_braced_block())
        if self.peek('asm'):
            self.advance()
            return self.parse_asm()
        raise self.error("expected a command, found %r" % (token.text or 'end of input'))

    def parse_assignment(self, reg):
        if self.peek('R') and self.peek('[', 1):
            self.advance()
            mode = self.parse_mode('R')
            return Read(mode, reg, self.parse_address())
        if self.peek('RMW'):
            self.advance()
            mode = self.parse_mode('RMW')
            addr = self.parse_address()
            expected = self.parse_atom()
            return RMW(mode, reg, addr, expected, self.parse_atom())
        if self.peek('asm'):
            self.advance()
            if self.peek('mov'):
                self.advance()
                return AsmRead(reg, self.parse_address())
            if self.peek('rmw'):
                self.advance()
                addr = self.parse_address()
                expected = self.parse_atom()
                return AsmRMW(reg, addr, expected, self.parse_atom())
            raise self.error("expected 'mov' or 'rmw' after 'asm'")
        return Assign(reg, self.parse_expr())

    def parse_asm(self):
        if self.peek('mov'):
            self.advance()
            addr = self.parse_address()
            return AsmWrite(addr, self.parse_expr())
        if self.peek('movnt'):
            self.advance()
            addr = self.parse_address()
            return AsmNTWrite(addr, self.parse_expr())
        if self.peek('mfence'):
            self.advance()
            return AsmMFence()
        if self.peek('sfence'):
            self.advance()
            return AsmSFence()
        raise self.error("unknown assembly instruction %r" % self.current.text)

    # expressions

    def parse_expr(self):
        left = self.parse_sum()
        while self.peek('=='):
            self.advance()
            left = Eq(left, self.parse_sum())
        return left

    def parse_sum(self):
        left = self.parse_product()
        while self.peek('+') or self.peek('-'):
            op = self.advance().text
            right = self.parse_product()
            left = Plus(left, right) if op == '+' else Sub(left, right)
        return left

    def parse_product(self):
        left = self.parse_atom()
        while self.peek('*'):
            self.advance()
            left = Times(left, self.parse_atom())
        return left

    def parse_atom(self):
        token = self.current
        if token.kind == 'num':
            self.advance()
            return Num(int(token.text))
        if token.kind == 'ident':
            self.advance()
            return _Name(token.text)
        if self.peek('('):
            self.advance()
            expr = self.parse_expr()
            self.expect(')')
            return expr
        raise self.error("expected an expression, found %r" % (token.text or 'end of input'))

    # expectations

    def parse_expectation(self):
        self.expect('expect')
        model_token = self.expect_kind('ident')
        try:
            model = ModelId(model_token.text)
        except ValueError:
            raise self.error("unknown model %r" % model_token.text, model_token)
        verdict = self.expect_kind('ident')
        if verdict.text not in ('allowed', 'forbidden'):
            raise self.error("expected 'allowed' or 'forbidden'", verdict)
        self.expect(':')
        atoms = [self.parse_outcome_atom()]
        while self.peek('/\\'):
            self.advance()
            atoms.append(self.parse_outcome_atom())
        return model, verdict.text == 'allowed', atoms

    def parse_outcome_atom(self):
        token = self.expect_kind('ident')
        if token.text == 'UB':
            return token, None
        self.expect('=')
        return token, int(self.expect_kind('num').text)

    # name resolution

    def _location(self, name):
        if name not in self.locations:
            self.locations[name] = len(self.locations)
        return Loc(self.locations[name])

    def _resolve_expr(self, expr):
        if isinstance(expr, _Name):
            if expr.name in self.registers:
                return Reg(expr.name)
            return self._location(expr.name)
        if isinstance(expr, BinOp):
            return type(expr)(self._resolve_expr(expr.left), self._resolve_expr(expr.right))
        return expr

    def _resolve_cmd(self, cmd):
        if isinstance(cmd, Seq):
            return Seq(self._resolve_cmd(cmd.first), self._resolve_cmd(cmd.second))
        if isinstance(cmd, (If, While)):
            return type(cmd)(self._resolve_expr(cmd.cond), self._resolve_cmd(cmd.body))
        if isinstance(cmd, Read):
            return Read(cmd.mode, cmd.reg, self._resolve_expr(cmd.addr))
        if isinstance(cmd, Write):
            return Write(cmd.mode, self._resolve_expr(cmd.addr), self._resolve_expr(cmd.value))
        if isinstance(cmd, RMW):
            return RMW(
                cmd.mode, cmd.reg, self._resolve_expr(cmd.addr),
                self._resolve_expr(cmd.expected), self._resolve_expr(cmd.new),
            )
        if isinstance(cmd, Assign):
            return Assign(cmd.reg, self._resolve_expr(cmd.value))
        if isinstance(cmd, AsmRead):
            return AsmRead(cmd.reg, self._resolve_expr(cmd.addr))
        if isinstance(cmd, (AsmWrite, AsmNTWrite)):
            return type(cmd)(self._resolve_expr(cmd.addr), self._resolve_expr(cmd.value))
        if isinstance(cmd, AsmRMW):
            return AsmRMW(
                cmd.reg, self._resolve_expr(cmd.addr),
                self._resolve_expr(cmd.expected), self._resolve_expr(cmd.new),
            )
        return cmd

    def _resolve_expectation(self, raw, program):
        model, allowed, atoms = raw
        registers = program.registers()
        regs, locs, ub = [], [], False
        for token, value in atoms:
            if value is None:
                ub = True
            elif token.text in registers:
                regs.append((token.text, value))
            elif token.text in self.locations:
                locs.append((token.text, value))
            else:
                raise self.error(
                    "%r is neither a register nor a location of the program" % token.text,
                    token,
                )
        return Expectation(model, Outcome(tuple(regs), tuple(locs), ub), allowed)


def parse_litmus(text):
    """Parse a litmus test.

    :param text: the test source
    :raises LitmusSyntaxError: on malformed input, with line and column
    :raises ModeLegalityError: when a command carries a mode it cannot have
    """
    return _Parser(text).parse_test()


def parse_program(text, name='anonymous'):
    """Parse thread declarations without a ``test`` header."""
    return parse_litmus('test %s\n%s' % (name, text)).program


# printing

_PRECEDENCE = {Eq: 0, Plus: 1, Sub: 1, Times: 2}


def format_expr(expr, program=None, level=0):
    if isinstance(expr, Num):
        return str(expr.value)
    if isinstance(expr, Reg):
        return expr.name
    if isinstance(expr, Loc):
        name = program.loc_name(expr.loc) if program is not None else None
        return name if name is not None else 'loc%d' % expr.loc
    prec = _PRECEDENCE[type(expr)]
    text = '%s %s %s' % (
        format_expr(expr.left, program, prec),
        expr.symbol,
        format_expr(expr.right, program, prec + 1),
    )
    return '(%s)' % text if prec < level else text


def _atom(expr, program):
    return format_expr(expr, program, 3)


def _addr(expr, program):
    return '[%s]' % format_expr(expr, program)


def format_cmd(cmd, program=None, indent=0):
    """Format a command as indented lines (without trailing newline)."""
    pad = '  ' * indent
    if isinstance(cmd, Seq):
        stmts = flatten(cmd)
        lines = [format_cmd(stmt, program, indent) for stmt in stmts]
        return ';\n'.join(lines)
    if isinstance(cmd, (If, While)):
        keyword = 'if' if isinstance(cmd, If) else 'while'
        return '%s%s %s {\n%s\n%s}' % (
            pad, keyword, format_expr(cmd.cond, program),
            format_cmd(cmd.body, program, indent + 1), pad,
        )
    return pad + _format_simple(cmd, program)


def _format_simple(cmd, program):
    if isinstance(cmd, Skip):
        return 'skip'
    if isinstance(cmd, Assign):
        return '%s := %s' % (cmd.reg, format_expr(cmd.value, program))
    if isinstance(cmd, Read):
        return '%s := R[%s] %s' % (cmd.reg, cmd.mode, _addr(cmd.addr, program))
    if isinstance(cmd, Write):
        return 'W[%s] %s %s' % (cmd.mode, _addr(cmd.addr, program), format_expr(cmd.value, program))
    if isinstance(cmd, RMW):
        return '%s := RMW[%s] %s %s %s' % (
            cmd.reg, cmd.mode, _addr(cmd.addr, program),
            _atom(cmd.expected, program), _atom(cmd.new, program),
        )
    if isinstance(cmd, Fence):
        return 'F[%s]' % cmd.mode
    if isinstance(cmd, AsmRead):
        return '%s := asm mov %s' % (cmd.reg, _addr(cmd.addr, program))
    if isinstance(cmd, AsmWrite):
        return 'asm mov %s %s' % (_addr(cmd.addr, program), format_expr(cmd.value, program))
    if isinstance(cmd, AsmNTWrite):
        return 'asm movnt %s %s' % (_addr(cmd.addr, program), format_expr(cmd.value, program))
    if isinstance(cmd, AsmRMW):
        return '%s := asm rmw %s %s %s' % (
            cmd.reg, _addr(cmd.addr, program),
            _atom(cmd.expected, program), _atom(cmd.new, program),
        )
    if isinstance(cmd, AsmMFence):
        return 'asm mfence'
    if isinstance(cmd, AsmSFence):
        return 'asm sfence'
    raise TypeError("cannot format %r" % (cmd,))


def format_program(program):
    chunks = []
    for tid, cmd in program.threads:
        chunks.append('thread %d:\n%s' % (tid, format_cmd(cmd, program, 1)))
    return '\n'.join(chunks)


def format_litmus(test):
    """Canonical text of a litmus test; :func:`parse_litmus` reads it back."""
    lines = ['test %s' % test.name]
    if test.domain_hint:
        lines.append('values %s' % ','.join(str(v) for v in test.domain_hint))
    lines.append(format_program(test.program))
    for expectation in test.expectations:
        lines.append('expect %s' % expectation)
    return '\n'.join(lines) + '\n'
