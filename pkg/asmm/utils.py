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
import bz2
import gzip
import io
import re

from asmm import corpus

DISALLOWED_FILENAME_CHARACTERS_RE = re.compile(r'[^-_a-zA-Z0-9]')

CORPUS_PREFIX = 'corpus:'


def slugify(name):
    """Convert a test name to something usable as a file name."""
    return DISALLOWED_FILENAME_CHARACTERS_RE.sub('_', name)


def open_compressed_file(filename, mode='rt'):
    """Open a file as raw, gzip, or bz2, based on the filename."""
    if filename.endswith('.bz2'):
        return bz2.open(filename, mode=mode, encoding='utf-8')
    elif filename.endswith('.gz'):
        return gzip.open(filename, mode=mode, encoding='utf-8')
    else:
        return io.open(filename, mode=mode, encoding='utf-8')


def read_source(ref):
    """Text of a litmus test given as a path or as ``corpus:NAME``.

    :raises KeyError: for an unknown corpus entry
    :raises IOError: for an unreadable file
    """
    if ref.startswith(CORPUS_PREFIX):
        return corpus.get(ref[len(CORPUS_PREFIX):]).text
    with open_compressed_file(ref) as f:
        return f.read()
