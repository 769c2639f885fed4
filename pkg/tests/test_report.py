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
import pytest
import simplejson as json
from staticconf.testing import MockConfiguration

from asmm import config
from asmm import corpus
from asmm import models
from asmm import report
from asmm.compile import InclusionReport
from asmm.compile import Scheme
from asmm.lang import ModelId
from asmm.mixed import TransferReport
from asmm.models import DRFReport
from asmm.models import Verdict


VALUES = (0, 1)


class TestReports(object):

    @pytest.fixture(autouse=True)
    def setup_config(self):
        with MockConfiguration(namespace=config.namespace):
            yield

    @pytest.fixture
    def mp_nt(self):
        return corpus.load('MP-NT')

    def test_loc_label(self, mp_nt):
        assert report.loc_label(mp_nt.program, 0) == 'x'
        assert report.loc_label(mp_nt.program, 7) == 'loc7'

    def test_run_report(self, mp_nt):
        behavior_set = models.behaviors(mp_nt.program, ModelId.RC11EXT, VALUES)
        result = report.run_report(mp_nt, {ModelId.RC11EXT: behavior_set}, VALUES, 10000)
        assert result['schema_version'] == report.SCHEMA_VERSION
        assert result['command'] == 'run'
        assert result['test'] == 'MP-NT'
        assert result['values'] == [0, 1]
        (model_result,) = result['results']
        assert model_result['model'] == 'rc11ext'
        assert model_result['ub'] is False
        assert model_result['counts']['graphs'] == 4
        assert {'memory': {'x': 1, 'y': 1}, 'registers': {'a': 1, 'b': 0}} in model_result['behaviors']
        assert result['expectations'] == [{
            'model': 'rc11ext',
            'outcome': 'a=1 /\\ b=0',
            'expected': 'allowed',
            'observed': 'allowed',
            'pass': True,
        }]
        assert result['pass'] is True

    def test_expectations_for_missing_models_are_skipped(self, mp_nt):
        behavior_set = models.behaviors(mp_nt.program, ModelId.SC, VALUES)
        result = report.run_report(mp_nt, {ModelId.SC: behavior_set}, VALUES, 10000)
        assert result['expectations'] == []
        assert result['pass'] is True

    def test_inclusion_report(self, mp_nt):
        inclusion = InclusionReport(
            holds=False,
            extra_behaviors=frozenset(['UB', ((0, 1), (1, 0))]),
            bounds_used=(50, (0, 1)),
        )
        result = report.inclusion_report(mp_nt, inclusion, 'check-compilation', scheme='std')
        assert result['holds'] is False
        assert result['pass'] is False
        assert result['scheme'] == 'std'
        assert result['step_bound'] == 50
        assert result['values'] == [0, 1]
        assert sorted(result['extra_behaviors'], key=str) == sorted(
            ['UB', {'memory': {'x': 1, 'y': 0}}], key=str,
        )

    def test_inclusion_report_with_registers(self, mp_nt):
        inclusion = InclusionReport(
            holds=False,
            extra_behaviors=frozenset([(((0, 1),), (('a', 1),))]),
            bounds_used=(50, (0, 1)),
        )
        result = report.inclusion_report(
            mp_nt, inclusion, 'check-transform', with_registers=True,
        )
        assert result['extra_behaviors'] == [{'memory': {'x': 1}, 'registers': {'a': 1}}]

    def test_drf_report(self, mp_nt):
        drf = DRFReport(race_free=True)
        result = report.drf_report(mp_nt, drf)
        assert result['races'] == []
        assert result['equal'] is None
        assert result['pass'] is False

    def test_transfer_report(self, mp_nt):
        good = Verdict(consistent=True, violated_axioms=(), witnesses=())
        bad = Verdict(consistent=False, violated_axioms=('External',), witnesses=())
        reports = [
            TransferReport(good, good, good, good),
            TransferReport(good, good, bad, bad),
        ]
        result = report.transfer_report(mp_nt, Scheme.ALTERNATIVE, reports)
        assert result['scheme'] == 'alt'
        assert result['graphs'] == 2
        assert result['discrepancies'] == []
        assert result['weaker_than_violations'] == 1
        assert result['pass'] is False

    def test_dumps_sorts_keys(self):
        text = report.dumps({'b': 1, 'a': [1, 2]})
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {'a': [1, 2], 'b': 1}

    def test_dumps_indent_is_configurable(self):
        config.configure(json_indent=0)
        assert report.dumps({'a': 1}) == '{\n"a": 1\n}'
