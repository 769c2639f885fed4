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
from setuptools import setup

setup(
    name='asmm',
    version='0.1.0',
    description='A litmus checker for C11 with inline x86 assembly.',
    author='Yelp Infra Team',
    author_email='infra@yelp.com',
    packages=['asmm'],
    install_requires=[
        'PyStaticConfiguration >= 0.8',
        'PyYAML',
        'simplejson',
        'networkx',
        'pydot',
    ],
    entry_points={
        'console_scripts': [
            'asmm = asmm.cli:main',
        ],
    },
)
