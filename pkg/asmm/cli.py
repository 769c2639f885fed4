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
The ``asmm`` command line tool.

Exit codes: 0 when every expectation and check passes, 1 when one fails,
2 on unreadable or malformed input, 3 when an enumeration hit the step
bound.
"""
import argparse
import logging
import multiprocessing
import os
import sys

from asmm import config
from asmm import corpus
from asmm import report
from asmm.compile import Scheme
from asmm.compile import check_compilation
from asmm.compile import compile_program
from asmm.dot import execution_graph
from asmm.dot import mixed_graph
from asmm.dot import write_dot
from asmm.lang import LitmusTest
from asmm.lang import ModelId
from asmm.lang import ModeLegalityError
from asmm.lang import ProgramError
from asmm.litmus import LitmusSyntaxError
from asmm.litmus import format_litmus
from asmm.litmus import parse_litmus
from asmm.mixed import MalformedTargetError
from asmm.mixed import simulations
from asmm.mixed import transfer_check
from asmm.models import DRFPreconditionError
from asmm.models import ModelPreconditionError
from asmm.models import behaviors
from asmm.models import check
from asmm.models import drf_check
from asmm.opsem import candidates
from asmm.opsem import enumerate_graphs
from asmm.transform import TransformError
from asmm.transform import check_transform_sound
from asmm.transform import parse_transform_spec
from asmm.utils import read_source
from asmm.utils import slugify


log = logging.getLogger('asmm.cli')

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_OVERFLOW = 3

INPUT_ERRORS = (
    LitmusSyntaxError, ModeLegalityError, ProgramError, ModelPreconditionError,
    DRFPreconditionError, TransformError, KeyError, IOError,
)


class InputError(Exception):
    pass


def load_test(ref):
    try:
        return parse_litmus(read_source(ref))
    except KeyError:
        raise InputError("no corpus entry %s" % ref)
    except IOError as e:
        raise InputError("cannot read %s: %s" % (ref, e))
    except (LitmusSyntaxError, ModeLegalityError, ProgramError) as e:
        raise InputError("%s: %s" % (ref, e))


def _values(args, test):
    if args.values:
        try:
            return tuple(sorted(set(int(v) for v in args.values.split(','))))
        except ValueError:
            raise InputError("--values expects comma-separated integers, got %r" % args.values)
    return config.value_domain(test.values())


def _bound(args):
    return args.bound if args.bound else config.step_bound.value


def _models(args, test):
    if args.model:
        return [ModelId(m) for m in args.model]
    named = sorted(set(e.model for e in test.expectations), key=str)
    return named or [ModelId.RC11EXT]


def exit_code(reports):
    if any(_overflowed(r) for r in reports):
        return EXIT_OVERFLOW
    if not all(r['pass'] for r in reports):
        return EXIT_FAIL
    return EXIT_PASS


def _overflowed(r):
    if r.get('inconclusive'):
        return True
    return any(result.get('overflow') for result in r.get('results', ()))


def _print_run(r):
    for result in r['results']:
        print('%s under %s: %d behaviors%s%s' % (
            r['test'], result['model'], len(result['behaviors']),
            ', UB' if result['ub'] else '',
            ', step bound reached' if result['overflow'] else ''))
        for b in result['behaviors']:
            print('  ' + _atoms(b))
    for e in r['expectations']:
        print('  %s %s: %s ... %s' % (
            e['model'], e['expected'], e['outcome'], 'ok' if e['pass'] else 'FAILED (%s)' % e['observed']))


def _emit(reports, args, printer):
    if args.json:
        payload = reports[0] if len(reports) == 1 else reports
        print(report.dumps(payload))
    else:
        for r in reports:
            printer(r)
    return exit_code(reports)


# Workers

def run_job(job):
    """Run one test; ``job`` is ``(text, models, values, bound)``. Top level
    so that it can be sent to a worker process."""
    text, models, values, bound = job
    test = parse_litmus(text)
    sets = dict((model, behaviors(test.program, model, values, bound)) for model in models)
    return report.run_report(test, sets, values, bound)


def map_jobs(function, jobs):
    workers = config.worker_count()
    if workers <= 1 or len(jobs) <= 1:
        return [function(job) for job in jobs]
    log.debug('dispatching %d jobs to %d workers', len(jobs), workers)
    pool = multiprocessing.Pool(workers)
    try:
        return pool.map(function, jobs)
    finally:
        pool.close()
        pool.join()


# Commands

def cmd_run(args):
    jobs = []
    tests = [load_test(ref) for ref in args.files]
    for test in tests:
        jobs.append((format_litmus(test), _models(args, test), _values(args, test), _bound(args)))
    reports = map_jobs(run_job, jobs)
    if args.dot:
        for test, job in zip(tests, jobs):
            _write_execution_dots(test, job[1], job[2], job[3], args.dot)
    return _emit(reports, args, _print_run)


def _write_execution_dots(test, models, values, bound, directory):
    if not os.path.isdir(directory):
        os.makedirs(directory)
    exploration = enumerate_graphs(test.program, values, bound)
    include_all = config.dot_include_inconsistent.value
    count = 0
    for model in models:
        for run in sorted(exploration.runs, key=lambda r: repr(r.graph)):
            for execution in candidates(run.graph, run.trace_registers):
                verdict = check(execution, model)
                if not (verdict.consistent or include_all):
                    continue
                path = os.path.join(directory, '%s-%s-%03d.dot' % (slugify(test.name), model, count))
                write_dot(execution_graph(execution, model, test.program.loc_name), path)
                count += 1
    log.info('wrote %d DOT files to %s', count, directory)


def _behavior_dicts(program, found):
    return [
        {'memory': report.memory_dict(program, b.memory), 'registers': dict(b.registers)}
        for b in sorted(found, key=lambda b: (b.memory, b.registers))
    ]


def _atoms(b):
    pairs = sorted(b['registers'].items()) + sorted(b['memory'].items())
    return ' /\\ '.join('%s=%s' % pair for pair in pairs)


def cmd_compare(args):
    test = load_test(args.file)
    values, bound = _values(args, test), _bound(args)
    model_a, model_b = ModelId(args.model_a), ModelId(args.model_b)
    first = behaviors(test.program, model_a, values, bound)
    second = behaviors(test.program, model_b, values, bound)
    program = test.program
    r = {
        'schema_version': report.SCHEMA_VERSION,
        'command': 'compare',
        'test': test.name,
        'models': [str(model_a), str(model_b)],
        'ub': [first.ub, second.ub],
        'only_first': _behavior_dicts(program, first.behaviors - second.behaviors),
        'only_second': _behavior_dicts(program, second.behaviors - first.behaviors),
        'equal': first.same_outcomes(second),
        'results': [report.behavior_set_dict(program, first), report.behavior_set_dict(program, second)],
        'pass': True,
    }

    def printer(r):
        print('%s: %s vs %s: %s' % (r['test'], model_a, model_b, 'equal' if r['equal'] else 'different'))
        for b in r['only_first']:
            print('  only %s: %s' % (model_a, _atoms(b)))
        for b in r['only_second']:
            print('  only %s: %s' % (model_b, _atoms(b)))
    return _emit([r], args, printer)


def cmd_compile(args):
    test = load_test(args.file)
    compiled = compile_program(test.program, Scheme(args.scheme))
    name = '%s-%s' % (test.name, args.scheme)
    print(format_litmus(LitmusTest(name=name, program=compiled)), end='')
    return EXIT_PASS


def _schemes(args):
    if args.scheme == 'both':
        return [Scheme.STANDARD, Scheme.ALTERNATIVE]
    return [Scheme(args.scheme)]


def _print_check(r):
    status = 'holds' if r['pass'] else 'FAILS'
    if r.get('inconclusive'):
        status += ' (step bound reached)'
    detail = r.get('scheme') or r.get('transform') or ''
    print('%s %s %s: %s' % (r['test'], r['command'], detail, status))
    for extra in r.get('extra_behaviors', ()):
        print('  extra behavior: %s' % (extra,))


def cmd_check_compilation(args):
    reports = []
    for ref in args.files:
        test = load_test(ref)
        for scheme in _schemes(args):
            result = check_compilation(test, scheme, _values(args, test), _bound(args))
            reports.append(report.inclusion_report(
                test, result, 'check-compilation', scheme=str(scheme)))
    return _emit(reports, args, _print_check)


def cmd_check_transform(args):
    test = load_test(args.file)
    kind = parse_transform_spec(args.transform)
    result = check_transform_sound(test, kind, _values(args, test), _bound(args))
    r = report.inclusion_report(
        test, result, 'check-transform', with_registers=True, transform=args.transform)
    return _emit([r], args, _print_check)


def cmd_check_drf(args):
    reports = []
    for ref in args.files:
        test = load_test(ref)
        result = drf_check(test.program, _values(args, test), _bound(args))
        reports.append(report.drf_report(test, result))

    def printer(r):
        if r['race_free']:
            print('%s: race free; rc11ext and sc behaviors %s' % (
                r['test'], 'agree' if r['equal'] else 'DIFFER'))
        else:
            print('%s: not race free' % r['test'])
            for race in r['races']:
                print('  race between %s and %s' % tuple(race['labels']))
    return _emit(reports, args, printer)


def cmd_check_transfer(args):
    reports = []
    for ref in args.files:
        test = load_test(ref)
        for scheme in _schemes(args):
            found = []
            for index, (_, mixed) in enumerate(
                    simulations(test.program, scheme, _values(args, test), _bound(args))):
                found.append(transfer_check(mixed))
                if args.dot:
                    if not os.path.isdir(args.dot):
                        os.makedirs(args.dot)
                    path = os.path.join(args.dot, '%s-%s-%03d.dot' % (slugify(test.name), scheme, index))
                    write_dot(mixed_graph(mixed, test.program.loc_name), path)
            reports.append(report.transfer_report(test, scheme, found))

    def printer(r):
        print('%s check-transfer %s: %d mixed graphs, %s' % (
            r['test'], r['scheme'], r['graphs'], 'holds' if r['pass'] else 'FAILS'))
        for line in r['discrepancies']:
            print('  ' + line)
    return _emit(reports, args, printer)


def corpus_reports(entry, bound=None):
    """Every check of one corpus entry, as report dicts."""
    test = entry.load()
    values = config.value_domain(test.values())
    bound = bound or config.step_bound.value
    models = sorted(set(e.model for e in test.expectations) | set([ModelId.RC11EXT]), key=str)
    reports = [run_job((entry.text, models, values, bound))]
    for scheme in (Scheme.STANDARD, Scheme.ALTERNATIVE):
        result = check_compilation(test, scheme, values, bound)
        reports.append(report.inclusion_report(
            test, result, 'check-compilation', scheme=str(scheme)))
        transfers = [transfer_check(m) for _, m in simulations(test.program, scheme, values, bound)]
        reports.append(report.transfer_report(test, scheme, transfers))
    if entry.drf:
        reports.append(report.drf_report(test, drf_check(test.program, values, bound)))
    return reports


def _corpus_job(job):
    name, bound = job
    return corpus_reports(corpus.get(name), bound)


def cmd_corpus(args):
    if args.list:
        for entry in corpus.entries():
            print('%-22s %s' % (entry.name, entry.note))
        return EXIT_PASS
    names = args.names or corpus.names()
    for name in names:
        corpus.get(name)
    grouped = map_jobs(_corpus_job, [(name, args.bound) for name in sorted(names)])
    reports = [r for group in grouped for r in group]

    def printer(r):
        if r['command'] == 'run':
            _print_run(r)
        elif r['command'] == 'check-drf':
            print('%s check-drf: %s' % (r['test'], 'holds' if r['pass'] else 'FAILS'))
        elif r['command'] == 'check-transfer':
            print('%s check-transfer %s: %s' % (r['test'], r['scheme'], 'holds' if r['pass'] else 'FAILS'))
        else:
            _print_check(r)
    return _emit(reports, args, printer)


# Argument parsing

def _add_bounds(parser):
    parser.add_argument('--values', help='comma-separated read-value domain')
    parser.add_argument('--bound', type=int, help='step bound of the enumeration')
    parser.add_argument('--json', action='store_true', help='print a JSON report')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='asmm', description='Litmus checker for C11 with inline x86 assembly.')
    parser.add_argument('--config', help='YAML configuration file')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    parser.add_argument('--workers', type=int, help='number of worker processes')
    sub = parser.add_subparsers(dest='command')
    sub.required = True
    models = [str(m) for m in ModelId]
    schemes = [str(s) for s in Scheme]

    p = sub.add_parser('run', help='enumerate the behaviors of litmus tests')
    p.add_argument('files', nargs='+')
    p.add_argument('--model', action='append', choices=models)
    p.add_argument('--dot', metavar='DIR', help='write one DOT file per execution')
    _add_bounds(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser('compare', help='compare the behaviors of two models')
    p.add_argument('file')
    p.add_argument('model_a', choices=models)
    p.add_argument('model_b', choices=models)
    _add_bounds(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('compile', help='print the compiled assembly program')
    p.add_argument('file')
    p.add_argument('--scheme', choices=schemes, default='std')
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser('check-compilation', help='check compilation correctness')
    p.add_argument('files', nargs='+')
    p.add_argument('--scheme', choices=schemes + ['both'], default='both')
    _add_bounds(p)
    p.set_defaults(func=cmd_check_compilation)

    p = sub.add_parser('check-transform', help='check a program transformation')
    p.add_argument('file')
    p.add_argument('--transform', required=True, help="for example 'merge 0:0'")
    _add_bounds(p)
    p.set_defaults(func=cmd_check_transform)

    p = sub.add_parser('check-drf', help='check data-race freedom')
    p.add_argument('files', nargs='+')
    _add_bounds(p)
    p.set_defaults(func=cmd_check_drf)

    p = sub.add_parser('check-transfer', help='check mixed graphs of compiled executions')
    p.add_argument('files', nargs='+')
    p.add_argument('--scheme', choices=schemes + ['both'], default='both')
    p.add_argument('--dot', metavar='DIR', help='write one DOT file per mixed graph')
    _add_bounds(p)
    p.set_defaults(func=cmd_check_transfer)

    p = sub.add_parser('corpus', help='run the built-in corpus')
    p.add_argument('names', nargs='*')
    p.add_argument('--list', action='store_true')
    p.add_argument('--json', action='store_true')
    p.add_argument('--bound', type=int)
    p.set_defaults(func=cmd_corpus)
    return parser


def setup_logging(verbosity):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        if args.config:
            config.configure_from_file(args.config)
        if args.workers:
            config.configure(workers=args.workers)
        return args.func(args)
    except InputError as e:
        log.error('%s', e)
        return EXIT_INPUT
    except INPUT_ERRORS as e:
        log.error('%s', e)
        return EXIT_INPUT
    except MalformedTargetError as e:
        log.error('malformed compiled execution: %s', e)
        return EXIT_FAIL


if __name__ == '__main__':
    sys.exit(main())
