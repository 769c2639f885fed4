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
The built-in litmus corpus. Every entry is a litmus test in the text format
of :mod:`asmm.litmus` together with a short note on what it exercises.
"""
from dataclasses import dataclass

from asmm.lang import has_loops
from asmm.litmus import parse_litmus


@dataclass(frozen=True)
class CorpusEntry(object):
    name: str
    text: str
    note: str = ''
    drf: bool = False

    def load(self):
        return parse_litmus(self.text)


_ENTRIES = [
    CorpusEntry('MP-NT', """
test MP-NT
thread 0:
  asm movnt [x] 1;
  W[rel] [y] 1
thread 1:
  a := R[acq] [y];
  b := R[rlx] [x]
expect rc11ext allowed: a=1 /\\ b=0
""", "a non-temporal store does not synchronize with a release write"),

    CorpusEntry('MP-NT-SF', """
test MP-NT-SF
thread 0:
  asm movnt [x] 1;
  asm sfence;
  W[rel] [y] 1
thread 1:
  a := R[acq] [y];
  b := R[rlx] [x]
expect rc11ext forbidden: a=1 /\\ b=0
""", "a store fence orders the non-temporal store before the release"),

    CorpusEntry('MP-NT-read', """
test MP-NT-read
thread 0:
  asm movnt [x] 1;
  a := R[rlx] [x];
  W[rel] [y] 1
thread 1:
  b := R[acq] [y];
  c := R[rlx] [x]
expect rc11ext allowed: a=1 /\\ b=1 /\\ c=0
""", "an internal read of the non-temporal store does not order it"),

    CorpusEntry('IRIW', """
test IRIW
thread 0:
  W[rel] [x] 1
thread 1:
  a := R[acq] [x];
  b := R[rlx] [y]
thread 2:
  c := R[acq] [y];
  d := R[rlx] [x]
thread 3:
  W[rel] [y] 1
expect rc11 allowed: a=1 /\\ b=0 /\\ c=1 /\\ d=0
expect rc11ext allowed: a=1 /\\ b=0 /\\ c=1 /\\ d=0
""", "release/acquire is not multi-copy atomic"),

    CorpusEntry('IRIW-TSO', """
test IRIW-TSO
thread 0:
  W[rel] [x] 1
thread 1:
  a := asm mov [x];
  b := R[rlx] [y]
thread 2:
  c := asm mov [y];
  d := R[rlx] [x]
thread 3:
  W[rel] [y] 1
expect rc11ext forbidden: a=1 /\\ b=0 /\\ c=1 /\\ d=0
""", "assembly reads restore multi-copy atomicity"),

    CorpusEntry('IRIW-TSO-2', """
test IRIW-TSO-2
thread 0:
  W[rlx] [x] 1
thread 1:
  a := asm mov [x];
  b := R[rlx] [y]
thread 2:
  c := R[rlx] [y];
  d := R[rlx] [x]
thread 3:
  W[rlx] [y] 1
expect rc11ext allowed: a=1 /\\ b=0 /\\ c=1 /\\ d=0
""", "one assembly read is not enough; the relaxed thread may be reordered"),

    CorpusEntry('MP-F-rel', """
test MP-F-rel
thread 0:
  asm movnt [x] 1;
  F[rel];
  W[rlx] [y] 1
thread 1:
  a := R[acq] [y];
  b := R[rlx] [x]
expect rc11ext allowed: a=1 /\\ b=0
""", "a release fence does not order a preceding non-temporal store"),

    CorpusEntry('MP-F-sfence', """
test MP-F-sfence
thread 0:
  asm movnt [x] 1;
  asm sfence;
  W[rlx] [y] 1
thread 1:
  a := R[acq] [y];
  b := R[rlx] [x]
expect rc11ext forbidden: a=1 /\\ b=0
""", "a store fence can start a synchronization"),

    CorpusEntry('MP-rlx', """
test MP-rlx
thread 0:
  W[rlx] [x] 1;
  W[rel] [y] 1
thread 1:
  a := R[acq] [y];
  b := R[rlx] [x]
expect rc11 forbidden: a=1 /\\ b=0
expect rc11ext forbidden: a=1 /\\ b=0
""", "with a relaxed write instead of a non-temporal store the weak outcome goes away"),

    CorpusEntry('MP-guarded-na', """
test MP-guarded-na
thread 0:
  W[na] [x] 1;
  W[rel] [y] 1
thread 1:
  a := R[acq] [y];
  if a == 1 {
    b := R[rlx] [x]
  }
expect rc11 forbidden: a=1 /\\ b=0
expect rc11ext forbidden: a=1 /\\ b=0
expect rc11ext forbidden: UB
""", "the guard keeps the non-atomic write race free"),

    CorpusEntry('MP-guarded-nt', """
test MP-guarded-nt
thread 0:
  asm movnt [x] 1;
  W[rel] [y] 1
thread 1:
  a := R[acq] [y];
  if a == 1 {
    b := R[rlx] [x]
  }
expect rc11ext allowed: a=1 /\\ b=0
""", "non-temporal stores reorder with writes to other locations"),

    CorpusEntry('catch-fire-na', """
test catch-fire-na
thread 0:
  W[na] [x] 1
thread 1:
  a := R[rlx] [x];
  b := R[rlx] [y]
expect rc11ext allowed: UB
expect rc11ext allowed: b=1
""", "a race on a non-atomic write makes every outcome possible"),

    CorpusEntry('catch-fire-nt', """
test catch-fire-nt
thread 0:
  asm movnt [x] 1
thread 1:
  a := R[rlx] [x];
  b := R[rlx] [y]
expect rc11ext forbidden: UB
expect rc11ext forbidden: b=1
expect rc11ext allowed: b=0
""", "races on assembly accesses are not undefined"),

    CorpusEntry('Z6.U-tso', """
test Z6.U-tso
thread 0:
  asm mov [x] 1;
  W[rel] [y] 1
thread 1:
  a := asm mov [y];
  b := R[rlx] [z]
thread 2:
  W[sc] [z] 1;
  F[sc];
  c := R[rlx] [x]
expect rc11ext forbidden: a=1 /\\ b=0 /\\ c=0
""", "tso accesses give stronger guarantees than sc ones"),

    CorpusEntry('Z6.U-sc', """
test Z6.U-sc
thread 0:
  W[sc] [x] 1;
  W[rel] [y] 1
thread 1:
  a := R[sc] [y];
  b := R[rlx] [z]
thread 2:
  W[sc] [z] 1;
  F[sc];
  c := R[rlx] [x]
expect rc11 allowed: a=1 /\\ b=0 /\\ c=0
expect rc11ext allowed: a=1 /\\ b=0 /\\ c=0
""", "mixing sc and non-sc accesses to a location is weaker than tso"),

    CorpusEntry('SB-sc', """
test SB-sc
thread 0:
  W[sc] [x] 1;
  a := R[sc] [y]
thread 1:
  W[sc] [y] 1;
  b := R[sc] [x]
expect sc forbidden: a=0 /\\ b=0
expect rc11 forbidden: a=0 /\\ b=0
expect rc11ext forbidden: a=0 /\\ b=0
""", "store buffering with sc accesses", drf=True),

    CorpusEntry('SEQ-nt', """
test SEQ-nt
thread 0:
  asm movnt [x] 1
thread 1:
  a := R[rlx] [x];
  W[rel] [y] 1
thread 2:
  b := R[acq] [y];
  c := R[rlx] [x]
expect rc11ext forbidden: a=1 /\\ b=1 /\\ c=0
""", "merging the first two threads makes the weak outcome appear"),

    CorpusEntry('SEQ-nt-merged', """
test SEQ-nt-merged
thread 0:
  asm movnt [x] 1;
  a := R[rlx] [x];
  W[rel] [y] 1
thread 2:
  b := R[acq] [y];
  c := R[rlx] [x]
expect rc11ext allowed: a=1 /\\ b=1 /\\ c=0
""", "the first two threads of SEQ-nt, sequentialized"),

    CorpusEntry('SEQ-asm', """
test SEQ-asm
thread 0:
  asm mov [x] 1
thread 1:
  a := asm mov [x];
  b := asm mov [y]
thread 2:
  asm mov [y] 1;
  asm mfence;
  c := asm mov [x]
expect ex86 forbidden: a=1 /\\ b=0 /\\ c=0
expect rc11ext forbidden: a=1 /\\ b=0 /\\ c=0
""", "sequentialization is unsound for x86 too"),

    CorpusEntry('SEQ-asm-merged', """
test SEQ-asm-merged
thread 0:
  asm mov [x] 1;
  a := asm mov [x];
  b := asm mov [y]
thread 2:
  asm mov [y] 1;
  asm mfence;
  c := asm mov [x]
expect ex86 allowed: a=1 /\\ b=0 /\\ c=0
expect rc11ext allowed: a=1 /\\ b=0 /\\ c=0
""", "the first two threads of SEQ-asm, sequentialized"),

    CorpusEntry('promote-rmw', """
test promote-rmw
thread 0:
  asm movnt [x] 1;
  a := asm rmw [z] 0 1;
  W[rel] [y] 1
thread 1:
  b := R[acq] [y];
  c := R[rlx] [x]
expect rc11ext forbidden: b=1 /\\ c=0
""", "an assembly RMW orders the non-temporal store; it cannot be promoted"),

    CorpusEntry('promote-rmw-promoted', """
test promote-rmw-promoted
thread 0:
  asm movnt [x] 1;
  d := 0;
  a := d;
  d := 1;
  W[rel] [y] 1
thread 1:
  b := R[acq] [y];
  c := R[rlx] [x]
expect rc11ext allowed: b=1 /\\ c=0
""", "promote-rmw with z held in a register"),

    CorpusEntry('DRF-MP', """
test DRF-MP
thread 0:
  W[na] [x] 1;
  W[sc] [y] 1
thread 1:
  a := R[sc] [y];
  if a == 1 {
    b := R[na] [x]
  }
expect sc forbidden: a=1 /\\ b=0
expect rc11ext forbidden: a=1 /\\ b=0
""", "message passing guarded by sc accesses", drf=True),

    CorpusEntry('DRF-handoff', """
test DRF-handoff
thread 0:
  W[na] [x] 1;
  W[na] [z] 2;
  W[sc] [y] 1
thread 1:
  a := R[sc] [y];
  if a == 1 {
    b := R[na] [x];
    c := R[na] [z]
  }
expect rc11ext forbidden: a=1 /\\ b=0
expect rc11ext forbidden: a=1 /\\ c=0
""", "two locations handed over through one sc flag", drf=True),
]

_BY_NAME = dict((entry.name, entry) for entry in _ENTRIES)


def entries():
    return list(_ENTRIES)


def names():
    return [entry.name for entry in _ENTRIES]


def get(name):
    """The corpus entry called ``name``.

    :raises KeyError: if there is none
    """
    return _BY_NAME[name]


def load(name):
    return get(name).load()


def load_all():
    return [entry.load() for entry in _ENTRIES]


def loop_free():
    return [test for test in load_all() if not has_loops(test.program)]
