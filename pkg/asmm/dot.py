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
DOT rendering of candidate executions and mixed graphs, built as
:mod:`networkx` graphs and written through :mod:`networkx.drawing.nx_pydot`.
"""
import networkx
from networkx.drawing import nx_pydot

from asmm.lang import ModelId
from asmm.mixed import MixedRelations
from asmm.models import DerivedRelations


EDGE_STYLES = {
    'po': {'color': 'black'},
    'rf': {'color': 'green'},
    'mo': {'color': 'orange'},
    'rb': {'color': 'red', 'style': 'dashed'},
    'ppo_asm': {'color': 'blue'},
}


def node_name(event):
    if event.is_init:
        return 'init_%d' % event.loc
    return 'e_%d_%d' % (event.tid, event.idx)


def _immediate(relation):
    """Edges of ``relation`` not implied by two others."""
    return relation - relation.compose(relation)


def _add_edges(graph, relation, kind):
    for a, b in sorted(relation, key=lambda pair: (pair[0].sort_key, pair[1].sort_key)):
        graph.add_edge(node_name(a), node_name(b), key=kind, label=kind, **EDGE_STYLES[kind])


def _program_order_edges(derived):
    po = derived.po
    thread_po = po - po.restrict_domain(frozenset(e for e in po.domain if e.is_init))
    return _immediate(thread_po)


def execution_graph(execution, model=ModelId.RC11EXT, loc_name=None):
    """A :class:`networkx.MultiDiGraph` of ``execution``: one node per event,
    one edge per immediate po, rf, immediate mo, rb and ppo_asm pair."""
    derived = DerivedRelations(execution, model)
    graph = networkx.MultiDiGraph()
    for event in execution.graph.sorted_events():
        label = execution.graph.lab(event)
        graph.add_node(node_name(event), label='%s: %s' % (event, _label_text(label, loc_name)))
    _add_edges(graph, _program_order_edges(derived), 'po')
    _add_edges(graph, execution.rf, 'rf')
    _add_edges(graph, _immediate(execution.mo), 'mo')
    _add_edges(graph, derived.rb, 'rb')
    if model == ModelId.RC11EXT:
        _add_edges(graph, derived.ppo_asm - derived.po.compose(derived.ppo_asm), 'ppo_asm')
    return graph


def _label_text(label, loc_name=None):
    text = str(label)
    if loc_name is not None and label.loc is not None:
        text = text.replace('(%d,' % label.loc, '(%s,' % loc_name(label.loc), 1)
    return text


def mixed_graph(mixed, loc_name=None):
    """Mixed nodes are drawn as records holding the kind, the source event
    and the target events."""
    graph = networkx.MultiDiGraph()
    for node in mixed.nodes:
        targets = '\\n'.join(_label_text(l, loc_name) for _, l in node.targets) or '-'
        graph.add_node(
            node_name(node.id),
            shape='record',
            label='{%s|%s|%s}' % (node.kind, _label_text(node.source_label, loc_name), targets),
        )
    relations = MixedRelations(mixed)
    thread_po = relations.po - relations.po.restrict_domain(
        frozenset(e for e in relations.po.domain if e.is_init)
    )
    _add_edges(graph, _immediate(thread_po), 'po')
    _add_edges(graph, mixed.rf, 'rf')
    _add_edges(graph, _immediate(mixed.mo), 'mo')
    _add_edges(graph, relations.rb, 'rb')
    return graph


def to_dot(graph):
    return nx_pydot.to_pydot(graph).to_string()


def write_dot(graph, path):
    nx_pydot.write_dot(graph, path)
