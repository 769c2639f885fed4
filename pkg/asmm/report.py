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
JSON reports written by the command line tool. Every report is a mapping
with ``schema_version`` and ``command`` keys; the layout of each command's
report is documented in ``docs/source/report.rst``.
"""
import simplejson as json

from asmm import config
from asmm.models import outcome_allowed


SCHEMA_VERSION = 1


def loc_label(program, loc):
    return program.loc_name(loc) or 'loc%d' % loc


def memory_dict(program, memory):
    return dict((loc_label(program, loc), value) for loc, value in memory)


def behavior_set_dict(program, behavior_set):
    return {
        'model': str(behavior_set.model),
        'ub': behavior_set.ub,
        'overflow': behavior_set.overflow,
        'counts': {
            'graphs': behavior_set.graphs,
            'candidates': behavior_set.candidates,
            'consistent': behavior_set.consistent,
        },
        'behaviors': [
            {
                'memory': memory_dict(program, b.memory),
                'registers': dict(b.registers),
            }
            for b in sorted(behavior_set.behaviors, key=lambda b: (b.memory, b.registers))
        ],
    }


def expectation_results(test, behavior_sets):
    """Check each expectation of ``test`` against the behavior set of its
    model. Expectations for models not in ``behavior_sets`` are skipped.

    :param behavior_sets: mapping from :class:`asmm.lang.ModelId` to
        :class:`asmm.models.BehaviorSet`
    """
    results = []
    for expectation in test.expectations:
        behavior_set = behavior_sets.get(expectation.model)
        if behavior_set is None:
            continue
        observed = outcome_allowed(behavior_set, expectation.outcome, test.program)
        results.append({
            'model': str(expectation.model),
            'outcome': str(expectation.outcome),
            'expected': 'allowed' if expectation.allowed else 'forbidden',
            'observed': 'allowed' if observed else 'forbidden',
            'pass': observed == expectation.allowed,
        })
    return results


def run_report(test, behavior_sets, values, step_bound, command='run'):
    expectations = expectation_results(test, behavior_sets)
    return {
        'schema_version': SCHEMA_VERSION,
        'command': command,
        'test': test.name,
        'values': list(values),
        'step_bound': step_bound,
        'results': [
            behavior_set_dict(test.program, behavior_sets[model])
            for model in sorted(behavior_sets, key=str)
        ],
        'expectations': expectations,
        'pass': all(e['pass'] for e in expectations),
    }


def inclusion_report(test, report, command, with_registers=False, **extra):
    """Report of a compilation or transformation check. Extra behaviors of
    a transformation carry registers as well as memory."""
    program = test.program
    result = {
        'schema_version': SCHEMA_VERSION,
        'command': command,
        'test': test.name,
        'holds': report.holds,
        'source_ub': report.source_ub,
        'inconclusive': report.inconclusive,
        'step_bound': report.bounds_used[0],
        'values': list(report.bounds_used[1]),
        'extra_behaviors': sorted(
            (_extra(program, item, with_registers) for item in report.extra_behaviors),
            key=lambda e: json.dumps(e, sort_keys=True),
        ),
        'pass': report.holds,
    }
    result.update(extra)
    return result


def _extra(program, item, with_registers):
    if item == 'UB':
        return 'UB'
    if with_registers:
        memory, registers = item
        return {
            'memory': memory_dict(program, memory),
            'registers': dict(registers),
        }
    return {'memory': memory_dict(program, item)}


def drf_report(test, report):
    graph_races = [
        {'events': [str(a), str(b)], 'labels': [str(la), str(lb)]}
        for a, b, la, lb in report.races
    ]
    return {
        'schema_version': SCHEMA_VERSION,
        'command': 'check-drf',
        'test': test.name,
        'race_free': report.race_free,
        'races': graph_races,
        'equal': report.equal,
        'pass': report.holds,
    }


def transfer_report(test, scheme, reports):
    """:param reports: list of :class:`asmm.mixed.TransferReport`"""
    return {
        'schema_version': SCHEMA_VERSION,
        'command': 'check-transfer',
        'test': test.name,
        'scheme': str(scheme),
        'graphs': len(reports),
        'discrepancies': [line for r in reports for line in r.discrepancies],
        'weaker_than_violations': sum(1 for r in reports if not r.weaker_than),
        'pass': all(r.holds for r in reports),
    }


def dumps(report):
    return json.dumps(report, indent=config.json_indent.value, sort_keys=True)
