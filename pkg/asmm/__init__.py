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
:mod:`asmm` checks litmus tests of C11 programs with inline x86 assembly
against RC11, Ex86 and their combination RC11^Ex86.


Running Litmus Tests
--------------------

:func:`asmm.models.behaviors` enumerates the final states a program may
reach under a model, and :func:`asmm.litmus.parse_litmus` reads the test
format. The ``asmm`` command (see :mod:`asmm.cli`) runs both on files and
on the built-in :mod:`asmm.corpus`.


Checking Compilation and Transformations
----------------------------------------

:func:`asmm.compile.check_compilation` compares a program with its x86
compilation under either mapping scheme.
:func:`asmm.transform.check_transform_sound` does the same for reordering,
merging, register promotion and sequentialization, and
:func:`asmm.mixed.transfer_check` relates compiled executions back to
their sources through mixed graphs.

"""
from asmm.litmus import parse_litmus
from asmm.models import behaviors
from asmm.models import check

_pyflakes_ignore = [
    behaviors,
    check,
    parse_litmus,
]

version_info = 0, 1, 0
__version__ = '.'.join(map(str, version_info))
