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
Finite relation algebra over execution-graph events.

Every derived relation of the memory models (``hb``, ``eco``, ``psc``,
``ppo``, ``ob``...) is built from :class:`Relation` values with the
operations below. Relations are immutable; carrier sets are passed
explicitly wherever a reflexive part is needed.
"""
from collections import defaultdict

from dataclasses import dataclass

import networkx


class EventId(object):
    """Base class of event identifiers. Orders init events first, then
    thread events by ``(tid, idx)``."""

    __slots__ = ()

    is_init = False

    @property
    def tid(self):
        return None

    @property
    def sort_key(self):
        raise NotImplementedError

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    def __le__(self, other):
        return self.sort_key <= other.sort_key


@dataclass(frozen=True)
class InitEvent(EventId):
    """The initialization event of a location."""

    loc: int

    is_init = True

    @property
    def sort_key(self):
        return (0, self.loc, 0)

    def __str__(self):
        return 'Init%d' % self.loc


@dataclass(frozen=True)
class ThreadEvent(EventId):
    """The ``idx``-th event emitted by thread ``thread``."""

    thread: int
    idx: int

    @property
    def tid(self):
        return self.thread

    @property
    def sort_key(self):
        return (1, self.thread, self.idx)

    def __str__(self):
        return '(%d,%d)' % (self.thread, self.idx)


def event_set(events=()):
    """Build an immutable event set."""
    return frozenset(events)


def _thread_of(event):
    return event.tid


class Relation(object):
    """A finite binary relation, stored as a frozen set of pairs.

    :param pairs: an iterable of ``(a, b)`` tuples
    """

    __slots__ = ('pairs',)

    def __init__(self, pairs=()):
        self.pairs = frozenset(pairs)

    def __repr__(self):
        return 'Relation(%s)' % sorted(self.pairs, key=_pair_key)

    def __eq__(self, other):
        return isinstance(other, Relation) and self.pairs == other.pairs

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __bool__(self):
        return bool(self.pairs)

    def __contains__(self, pair):
        return pair in self.pairs

    def __or__(self, other):
        return Relation(self.pairs | other.pairs)

    def __and__(self, other):
        return Relation(self.pairs & other.pairs)

    def __sub__(self, other):
        return Relation(self.pairs - other.pairs)

    @property
    def domain(self):
        return frozenset(a for a, _ in self.pairs)

    @property
    def range(self):
        return frozenset(b for _, b in self.pairs)

    @property
    def field(self):
        return self.domain | self.range

    def successors(self):
        succ = defaultdict(set)
        for a, b in self.pairs:
            succ[a].add(b)
        return succ

    def image(self, events):
        return frozenset(b for a, b in self.pairs if a in events)

    def compose(self, other):
        succ = other.successors()
        return Relation(
            (a, c) for a, b in self.pairs for c in succ.get(b, ())
        )

    def inverse(self):
        return Relation((b, a) for a, b in self.pairs)

    def restrict_domain(self, events):
        return Relation((a, b) for a, b in self.pairs if a in events)

    def restrict_range(self, events):
        return Relation((a, b) for a, b in self.pairs if b in events)

    def restrict(self, events):
        return Relation(
            (a, b) for a, b in self.pairs if a in events and b in events
        )

    def reflexive_closure(self, carrier):
        return Relation(self.pairs | identity_on(carrier).pairs)

    def transitive_closure(self):
        succ = self.successors()
        closure = set(self.pairs)
        delta = set(self.pairs)
        while delta:
            step = set(
                (a, c) for a, b in delta for c in succ.get(b, ())
            )
            delta = step - closure
            closure |= delta
        return Relation(closure)

    def refl_trans_closure(self, carrier):
        return self.transitive_closure().reflexive_closure(carrier)

    def split_internal_external(self, tid_of=_thread_of):
        internal = set()
        for a, b in self.pairs:
            tid = tid_of(a)
            if tid is not None and tid == tid_of(b):
                internal.add((a, b))
        return Relation(internal), Relation(self.pairs - internal)

    def internal(self, tid_of=_thread_of):
        return self.split_internal_external(tid_of)[0]

    def external(self, tid_of=_thread_of):
        return self.split_internal_external(tid_of)[1]

    def restrict_same_loc(self, loc_of):
        return Relation(
            (a, b) for a, b in self.pairs
            if loc_of(a) is not None and loc_of(a) == loc_of(b)
        )

    def restrict_diff_loc(self, loc_of):
        return Relation(
            (a, b) for a, b in self.pairs
            if loc_of(a) is None or loc_of(b) is None or loc_of(a) != loc_of(b)
        )

    def restrict_at_loc(self, loc, loc_of):
        return Relation(
            (a, b) for a, b in self.pairs
            if loc_of(a) == loc and loc_of(b) == loc
        )

    def is_irreflexive(self):
        return not any(a == b for a, b in self.pairs)

    def reflexive_witness(self):
        for a, b in sorted(self.pairs, key=_pair_key):
            if a == b:
                return [a]
        return None

    def to_digraph(self):
        graph = networkx.DiGraph()
        graph.add_edges_from(self.pairs)
        return graph

    def is_acyclic(self):
        return networkx.is_directed_acyclic_graph(self.to_digraph())

    def find_cycle(self):
        """Return the nodes of one cycle as a list, or None if acyclic."""
        graph = self.to_digraph()
        for start in sorted(graph.nodes, key=_key):
            try:
                edges = networkx.find_cycle(graph, source=start)
            except networkx.NetworkXNoCycle:
                continue
            return [a for a, _ in edges]
        return None


EMPTY = Relation()


def _key(item):
    return getattr(item, 'sort_key', (2, str(item), 0))


def _pair_key(pair):
    return (_key(pair[0]), _key(pair[1]))


def compose(r1, *rest):
    """Sequential composition ``r1 ; r2 ; ...``."""
    result = r1
    for r in rest:
        result = result.compose(r)
    return result


def union(*relations):
    pairs = set()
    for r in relations:
        pairs |= r.pairs
    return Relation(pairs)


def identity_on(events):
    return Relation((e, e) for e in events)


def inverse(r):
    return r.inverse()


def reflexive_closure(r, carrier):
    return r.reflexive_closure(carrier)


def transitive_closure(r):
    return r.transitive_closure()


def refl_trans_closure(r, carrier):
    return r.refl_trans_closure(carrier)


def split_internal_external(r, tid_of=_thread_of):
    return r.split_internal_external(tid_of)


def restrict_same_loc(r, loc_of):
    return r.restrict_same_loc(loc_of)


def restrict_diff_loc(r, loc_of):
    return r.restrict_diff_loc(loc_of)


def restrict_at_loc(r, loc, loc_of):
    return r.restrict_at_loc(loc, loc_of)


def is_irreflexive(r):
    return r.is_irreflexive()


def is_acyclic(r):
    return r.is_acyclic()


def cartesian(sources, targets):
    return Relation((a, b) for a in sources for b in targets)
