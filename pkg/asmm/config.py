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
Configuration for :mod:`asmm`. The following configuration settings are
supported:

    **values**
        (list of int) the values a read may return. When empty (the default)
        the domain is derived from the program: 0 plus every numeric literal

    **step_bound**
        (int) maximum number of pool-reduction steps along one execution.
        Longer executions are cut off and flagged as overflow (default 10000)

    **workers**
        (int) number of worker processes used to run several tests at once.
        The ``ASMM_THREADS`` environment variable takes precedence (default 1)

    **json_indent**
        (int) indentation of JSON reports (default 2)

    **dot_include_inconsistent**
        flag to also emit DOT files for inconsistent executions
        (default False)

    **random_seed**
        (int) seed of the random program generator used by the property
        suites (default 0)
"""
import os

import staticconf.config
from staticconf import loader

namespace = 'asmm'
asmm_namespace = staticconf.NamespaceGetters(namespace)
reloader = staticconf.config.ReloadCallbackChain(namespace)

THREADS_ENV = 'ASMM_THREADS'

values = asmm_namespace.get_list_of_int('values',
    default=[],
    help="Read-value domain; empty means derive it from the program.")

step_bound = asmm_namespace.get_int('step_bound',
    default=10000,
    help="Maximum number of reduction steps along one execution.")

workers = asmm_namespace.get_int('workers',
    default=1,
    help="Number of worker processes; overridden by $ASMM_THREADS.")

json_indent = asmm_namespace.get_int('json_indent',
    default=2,
    help="Indentation of JSON reports.")

dot_include_inconsistent = asmm_namespace.get_bool('dot_include_inconsistent',
    default=False,
    help="If True, also write DOT files for inconsistent executions.")

random_seed = asmm_namespace.get_int('random_seed',
    default=0,
    help="Seed of the random program generator.")


def worker_count():
    """Number of worker processes, honouring ``$ASMM_THREADS``."""
    from_env = os.environ.get(THREADS_ENV)
    if from_env:
        return max(int(from_env), 1)
    return max(workers.value, 1)


def value_domain(program_domain):
    """The configured read-value domain, or ``program_domain`` if unset."""
    configured = list(values.value)
    return tuple(sorted(set(configured))) if configured else tuple(program_domain)


def configure_from_dict(config_dict):
    """Configure the :mod:`asmm` package from a dictionary.

    :param config_dict: a dict of config data
    """
    staticconf.DictConfiguration(config_dict, namespace=namespace)
    reloader()


def configure_from_object(config_obj):
    """Configure the :mod:`asmm` package from an object (or module).

    :param config_obj: an object or module with config attributes
    """
    loader.ObjectConfiguration(config_obj, namespace=namespace)
    reloader()


def configure_from_file(path):
    """Configure the :mod:`asmm` package from a YAML file.

    :param path: path of the YAML file
    """
    staticconf.YamlConfiguration(path, namespace=namespace)
    reloader()


def configure(**kwargs):
    """Configure the :mod:`asmm` package from arguments.

    :param kwargs: configuration parameters
    """
    staticconf.DictConfiguration(kwargs, namespace=namespace)
    reloader()
