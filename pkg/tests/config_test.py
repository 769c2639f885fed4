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
import subprocess
import sys

import mock
import pytest
from staticconf.testing import MockConfiguration

from asmm import config


class BlankObject(object):
    pass


class TestConfigure(object):

    @pytest.fixture(autouse=True)
    def setup_config(self):
        with MockConfiguration(namespace=config.namespace) as self.mock_config:
            yield

    def test_defaults(self):
        assert config.values.value == []
        assert config.step_bound.value == 10000
        assert config.workers.value == 1
        assert not config.dot_include_inconsistent.value

    def test_configure_from_dict(self):
        config.configure_from_dict({'values': [0, 1, 2], 'step_bound': 50})
        assert config.values.value == [0, 1, 2]
        assert config.step_bound.value == 50
        assert config.json_indent.value == 2

    def test_configure_from_object(self):
        config_obj = BlankObject()
        config_obj.workers = 4
        config_obj.dot_include_inconsistent = True
        config.configure_from_object(config_obj)
        assert config.workers.value == 4
        assert config.dot_include_inconsistent.value

    def test_configure_from_file(self, tmpdir):
        path = tmpdir.join('asmm.yaml')
        path.write('step_bound: 200\nvalues: [0, 3]\nrandom_seed: 9\n')
        config.configure_from_file(str(path))
        assert config.step_bound.value == 200
        assert config.values.value == [0, 3]
        assert config.random_seed.value == 9

    def test_configure(self):
        config.configure(step_bound=7, workers=2)
        assert config.step_bound.value == 7
        assert config.workers.value == 2


class TestDerivedSettings(object):

    @pytest.fixture(autouse=True)
    def setup_config(self):
        with MockConfiguration(namespace=config.namespace):
            yield

    def test_worker_count_from_config(self):
        config.configure(workers=3)
        with mock.patch.dict('os.environ', clear=True):
            assert config.worker_count() == 3

    def test_worker_count_environment_wins(self):
        config.configure(workers=3)
        with mock.patch.dict('os.environ', {config.THREADS_ENV: '6'}):
            assert config.worker_count() == 6

    def test_worker_count_is_at_least_one(self):
        config.configure(workers=0)
        with mock.patch.dict('os.environ', {config.THREADS_ENV: '0'}):
            assert config.worker_count() == 1

    def test_value_domain_from_program(self):
        assert config.value_domain((0, 1)) == (0, 1)

    def test_value_domain_from_config(self):
        config.configure(values=[2, 0, 2])
        assert config.value_domain((0, 1)) == (0, 2)


def test_configure_from_object_changes_step_bound():
    proc = subprocess.Popen(
        (
            sys.executable, '-c',
            'import asmm.config\n'
            'print(asmm.config.step_bound.value)\n'
            'class C(object):\n'
            '    step_bound = 5\n'
            'asmm.config.configure_from_object(C)\n'
            'print(asmm.config.step_bound.value)\n'
        ),
        stdout=subprocess.PIPE,
    )
    out = proc.communicate()[0].decode('UTF-8')
    assert out == '10000\n5\n'
