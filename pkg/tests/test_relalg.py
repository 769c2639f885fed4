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
import random

import pytest

from asmm import relalg
from asmm.relalg import InitEvent
from asmm.relalg import Relation
from asmm.relalg import ThreadEvent


a, b, c, d = (ThreadEvent(0, 0), ThreadEvent(0, 1), ThreadEvent(1, 0), ThreadEvent(1, 1))
init = InitEvent(0)


def random_relation(rng, carrier, density=0.2):
    return Relation(
        (x, y) for x in carrier for y in carrier if rng.random() < density
    )


def random_carrier(rng, size):
    return [ThreadEvent(rng.randint(0, 2), i) for i in range(size)]


class TestEvents(object):

    def test_init_events_sort_first(self):
        assert sorted([c, a, init, b]) == [init, a, b, c]

    def test_tid(self):
        assert init.tid is None
        assert c.tid == 1

    def test_str(self):
        assert str(init) == 'Init0'
        assert str(d) == '(1,1)'


class TestRelation(object):

    def test_compose(self):
        r = Relation([(a, b)])
        s = Relation([(b, c), (a, d)])
        assert relalg.compose(r, s) == Relation([(a, c)])

    def test_compose_chain(self):
        r = Relation([(a, b)])
        s = Relation([(b, c)])
        t = Relation([(c, d)])
        assert relalg.compose(r, s, t) == Relation([(a, d)])

    def test_union_and_difference(self):
        r = Relation([(a, b)])
        s = Relation([(b, c)])
        assert relalg.union(r, s) == r | s
        assert (r | s) - s == r
        assert not (r & s)

    def test_inverse(self):
        assert relalg.inverse(Relation([(a, b)])) == Relation([(b, a)])

    def test_transitive_closure(self):
        r = Relation([(a, b), (b, c), (c, d)])
        closure = relalg.transitive_closure(r)
        assert (a, d) in closure
        assert (d, a) not in closure
        assert len(closure) == 6

    def test_refl_trans_closure(self):
        r = Relation([(a, b)])
        closure = relalg.refl_trans_closure(r, [a, b, c])
        assert (c, c) in closure
        assert (a, b) in closure
        assert len(closure) == 4

    def test_split_internal_external(self):
        r = Relation([(a, b), (a, c), (init, a)])
        internal, external = relalg.split_internal_external(r)
        assert internal == Relation([(a, b)])
        assert external == Relation([(a, c), (init, a)])

    def test_init_pairs_are_external(self):
        r = Relation([(init, InitEvent(1))])
        assert r.external() == r

    def test_restrict_same_and_diff_loc(self):
        locs = {a: 0, b: 1, c: 0, d: None}
        r = Relation([(a, b), (a, c), (a, d)])
        assert relalg.restrict_same_loc(r, locs.get) == Relation([(a, c)])
        assert relalg.restrict_diff_loc(r, locs.get) == Relation([(a, b), (a, d)])
        assert relalg.restrict_at_loc(r, 0, locs.get) == Relation([(a, c)])

    def test_irreflexive(self):
        assert relalg.is_irreflexive(Relation([(a, b)]))
        r = Relation([(a, b), (c, c)])
        assert not relalg.is_irreflexive(r)
        assert r.reflexive_witness() == [c]

    def test_acyclic(self):
        assert relalg.is_acyclic(Relation([(a, b), (b, c)]))
        assert relalg.is_acyclic(relalg.EMPTY)
        assert not relalg.is_acyclic(Relation([(a, b), (b, a)]))

    def test_find_cycle(self):
        r = Relation([(a, b), (b, c), (c, a), (c, d)])
        cycle = r.find_cycle()
        assert sorted(cycle) == [a, b, c]
        assert Relation([(a, b)]).find_cycle() is None

    def test_find_cycle_self_loop(self):
        assert Relation([(b, b)]).find_cycle() == [b]

    def test_cartesian(self):
        assert relalg.cartesian([a], [b, c]) == Relation([(a, b), (a, c)])

    def test_domain_range_image(self):
        r = Relation([(a, b), (c, d)])
        assert r.domain == frozenset([a, c])
        assert r.range == frozenset([b, d])
        assert r.image([a]) == frozenset([b])

    def test_restrictions(self):
        r = Relation([(a, b), (b, c), (c, d)])
        events = relalg.event_set([b, c])
        assert r.restrict_domain(events) == Relation([(b, c), (c, d)])
        assert r.restrict_range(events) == Relation([(a, b), (b, c)])
        assert r.restrict(events) == Relation([(b, c)])

    def test_relations_are_hashable(self):
        assert len(set([Relation([(a, b)]), Relation([(a, b)])])) == 1


@pytest.mark.acceptance_suite
class TestRelationLaws(object):

    cases = 2000

    @pytest.fixture(autouse=True)
    def setup_rng(self):
        self.rng = random.Random(1)

    def test_compose_is_associative(self):
        for _ in range(self.cases):
            carrier = random_carrier(self.rng, self.rng.randint(1, 6))
            r, s, t = (random_relation(self.rng, carrier) for _ in range(3))
            assert relalg.compose(relalg.compose(r, s), t) == relalg.compose(r, relalg.compose(s, t))

    def test_identity_is_neutral(self):
        for _ in range(self.cases):
            carrier = random_carrier(self.rng, self.rng.randint(1, 6))
            r = random_relation(self.rng, carrier)
            ident = relalg.identity_on(carrier)
            assert relalg.compose(ident, r) == r
            assert relalg.compose(r, ident) == r

    def test_acyclic_iff_closure_irreflexive(self):
        for _ in range(self.cases):
            carrier = random_carrier(self.rng, self.rng.randint(1, 8))
            r = random_relation(self.rng, carrier, density=0.15)
            assert relalg.is_acyclic(r) == relalg.is_irreflexive(relalg.transitive_closure(r))

    def test_closure_is_transitive_and_idempotent(self):
        for _ in range(self.cases):
            carrier = random_carrier(self.rng, self.rng.randint(1, 6))
            closure = relalg.transitive_closure(random_relation(self.rng, carrier))
            assert relalg.compose(closure, closure).pairs <= closure.pairs
            assert relalg.transitive_closure(closure) == closure

    def test_cycle_witness_is_a_cycle(self):
        for _ in range(self.cases):
            carrier = random_carrier(self.rng, self.rng.randint(1, 8))
            r = random_relation(self.rng, carrier, density=0.15)
            cycle = r.find_cycle()
            if cycle is None:
                assert relalg.is_acyclic(r)
                continue
            for x, y in zip(cycle, cycle[1:] + cycle[:1]):
                assert (x, y) in r
