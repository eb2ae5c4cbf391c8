"""
Command Line Module

This module is the command-line front end. It reads instance files, runs
kernelization, writes reduced instances with their reduction reports, runs
the verification suite and generates random instances.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 cap exceeded.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from typing import Optional

from src.config import load_settings, set_log_level
from src.equivalence import ClassSpec, check_sign_order
from src.errors import (
    CapExceededError,
    InfeasibleEnumerationError,
    InstanceFormatError,
    KernelsmithError,
)
from src.instance_generator import generate
from src.numeric import format_rational, parse_rational, to_rational
from src.oracle import verify_class, verify_kernel
from src.problems import PROBLEM_TYPES, build_goal_expr, instance_from_dict, instance_to_dict, kernelize
from src.weight_reduction import (
    rational_bound,
    rational_with_report,
    reduce_with_report,
    reduction_bound,
    threshold_bound,
    threshold_with_report,
)

# Setup logging
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_CAP_EXCEEDED = 3

REPORT_SCHEMA = '1'
RAW_VECTOR = 'raw-vector'


@dataclass
class RunConfig:
    """
    Parsed command-line options for one invocation.

    Attributes:
        command (str): kernelize, verify or generate
        problem (str): Problem tag (or raw-vector), when known up front
        input_path (str): Instance file to read
        output_path (str): File to write (stdout when None)
        threshold (Fraction): Optional decision threshold
        mode (str): Verification mode: signs, optima, bound or all
        cap (int): Override for the enumeration cap
        report_format (str): json or text
    """
    command: str
    problem: Optional[str] = None
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    threshold: Optional[object] = None
    mode: str = 'all'
    cap: Optional[int] = None
    report_format: str = 'json'
    reduced_path: Optional[str] = None
    N: Optional[int] = None
    r: Optional[int] = None
    domain: str = 'Z'
    size: Optional[int] = None
    bits: int = 64
    seed: int = 0
    metric: bool = False
    alternatives: Optional[int] = None
    vehicles: int = 2
    committee: int = 2


def read_document(path):
    """
    Load a JSON document.

    Raises:
        InstanceFormatError: With line and column for malformed JSON
    """
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"Invalid JSON in {path}: {e.msg}", e.lineno, e.colno)
    except OSError as e:
        raise InstanceFormatError(f"Cannot read {path}: {e.strerror}")


def write_document(document, path):
    text = json.dumps(document, indent=2)
    if path is None:
        print(text)
        return
    with open(path, 'w') as f:
        f.write(text + '\n')
    logger.info(f"Wrote {path}")


def _parse_value(value):
    return parse_rational(value) if isinstance(value, str) else to_rational(value)


def _document_threshold(config, document):
    if config.threshold is not None:
        return config.threshold
    if isinstance(document, dict) and document.get('threshold') is not None:
        return _parse_value(document['threshold'])
    return None


def _raw_weights(document, key='weights'):
    try:
        return tuple(_parse_value(v) for v in document['data'][key])
    except (KeyError, TypeError) as e:
        raise InstanceFormatError(f"raw-vector document needs data.{key}: {e!r}")


def build_report(report, problem):
    """Reduction report in the stable JSON layout (numbers as decimal strings)."""
    data = report.to_dict()
    result = {
        'schema': REPORT_SCHEMA,
        'problem': problem,
        'd': data['d'],
        'alpha': data['alpha'],
        'bound': data['bound'],
        'bits_in': data['max_abs_in_bits'],
        'bits_out': data['max_abs_out_bits'],
        'verified': data['verified'],
        'verification_level': data['verification_level'],
        'rounds': data['rounds'],
        'elapsed': data['elapsed'],
    }
    if data['r'] is not None:
        result['r'] = data['r']
    else:
        result['N'] = data['N']
    return result


def emit_report(report, report_format):
    if report_format == 'text':
        for key, value in report.items():
            print(f"{key}: {value}")
    else:
        print(json.dumps(report, indent=2))


def _kernelize_raw(config, document, settings):
    weights = _raw_weights(document)
    threshold = _document_threshold(config, document)
    if config.r is not None:
        reduced, report = rational_with_report(weights, config.r, settings)
        reduced_threshold = None
    elif config.N is None:
        raise InstanceFormatError("raw-vector kernelization needs --N or --r")
    elif threshold is not None:
        (reduced, reduced_threshold), report = threshold_with_report(weights, threshold, config.N, settings)
    else:
        reduced, report = reduce_with_report(weights, config.N, settings)
        reduced_threshold = None
    output = {'problem': RAW_VECTOR, 'data': {'weights': [str(x) for x in reduced]}}
    if reduced_threshold is not None:
        output['threshold'] = str(reduced_threshold)
    return output, report


def cmd_kernelize(config, settings):
    """Kernelize one instance file; writes the reduced instance and prints the report."""
    document = read_document(config.input_path)
    problem = document.get('problem') if isinstance(document, dict) else None
    if problem == RAW_VECTOR:
        output, report = _kernelize_raw(config, document, settings)
    else:
        instance = instance_from_dict(document)
        reduced, k_hat, report = kernelize(instance, _document_threshold(config, document), settings)
        output = instance_to_dict(reduced)
        if k_hat is not None:
            output['threshold'] = str(k_hat)
    summary = build_report(report, problem)
    output['report'] = summary
    write_document(output, config.output_path)
    if config.output_path is not None:
        emit_report(summary, config.report_format)
    return EXIT_OK


def _class_verdict(w, w_hat, spec, settings, results):
    try:
        ok = verify_class(w, w_hat, spec, settings=settings)
    except InfeasibleEnumerationError as e:
        results['class'] = f"skipped ({e})"
        return True
    results['class'] = 'pass' if ok else 'FAIL'
    return ok


def _verify_raw(config, document, reduced_document, settings, results):
    w = _raw_weights(document)
    if reduced_document is not None:
        w_hat = _raw_weights(reduced_document)
    else:
        w_hat = _raw_weights(document, key='reduced')
    radius = config.r if config.r is not None else config.N
    if radius is None:
        raise InstanceFormatError("raw-vector verification needs --N or --r")
    spec = ClassSpec(radius, config.domain, len(w))
    if len(w_hat) != len(w):
        raise InstanceFormatError("Original and reduced vectors differ in length")
    ok = True
    if config.mode in ('signs', 'all'):
        signs = check_sign_order(w, w_hat, min(radius, 2))
        results['signs'] = 'pass' if signs else f"FAIL {signs.entry_failures} {signs.pair_failures}"
        ok = ok and signs.ok
    if config.mode in ('optima', 'all'):
        same = verify_class(w, w_hat, spec, cap=config.cap, settings=settings)
        results['class'] = 'pass' if same else 'FAIL'
        ok = ok and same
    if config.mode in ('bound', 'all'):
        bound = rational_bound(len(w), radius) if config.r is not None else reduction_bound(len(w), radius)
        within = all(bound.admits(x) for x in w_hat)
        results['bound'] = 'pass' if within else 'FAIL'
        ok = ok and within
    return ok


def _verify_instance(config, document, reduced_document, settings, results):
    original = instance_from_dict(document)
    threshold = _document_threshold(config, document)
    if threshold is None:
        threshold = getattr(original, 'threshold', None)
    if reduced_document is not None:
        reduced = instance_from_dict(reduced_document)
        reduced_threshold = reduced_document.get('threshold')
        if reduced_threshold is not None:
            k_hat = _parse_value(reduced_threshold)
        else:
            k_hat = getattr(reduced, 'threshold', None)
    else:
        reduced, k_hat, _ = kernelize(original, threshold, settings)
    thresholds = (threshold, k_hat) if threshold is not None and k_hat is not None else None

    model = build_goal_expr(original)
    reduced_model = build_goal_expr(reduced)
    w, w_hat = model.weights, reduced_model.weights
    ok = True
    if config.mode in ('signs', 'all'):
        signs = check_sign_order(w, w_hat, 2)
        results['signs'] = 'pass' if signs else f"FAIL {signs.entry_failures} {signs.pair_failures}"
        ok = ok and signs.ok
    if config.mode in ('bound', 'all'):
        d = model.d
        # Knapsack always reduces its values together with the target.
        with_threshold = thresholds is not None or original.tag == 'knapsack'
        if model.r is not None:
            bound = rational_bound(d + with_threshold, model.r)
        elif with_threshold:
            bound = threshold_bound(d, model.N)
        else:
            bound = reduction_bound(d, model.N)
        within = all(bound.admits(x) for x in w_hat)
        results['bound'] = 'pass' if within else 'FAIL'
        ok = ok and within
    if config.mode == 'all' and model.N is not None:
        ok = _class_verdict(w, w_hat, ClassSpec(model.N, 'Z', model.d), settings, results) and ok
    if config.mode in ('optima', 'all'):
        verdict = verify_kernel(original, reduced, thresholds, settings)
        results['optima'] = 'pass' if verdict else f"FAIL: {verdict.reason}"
        if not verdict:
            results['witness'] = repr(verdict.witness)
        ok = ok and verdict.ok
    return ok


def cmd_verify(config, settings):
    """Verify a kernel (given with --reduced, or computed on the fly)."""
    document = read_document(config.input_path)
    reduced_document = read_document(config.reduced_path) if config.reduced_path else None
    problem = document.get('problem') if isinstance(document, dict) else None
    results = {'schema': REPORT_SCHEMA, 'problem': problem, 'mode': config.mode}
    if problem == RAW_VECTOR:
        ok = _verify_raw(config, document, reduced_document, settings, results)
    else:
        ok = _verify_instance(config, document, reduced_document, settings, results)
    results['verdict'] = 'pass' if ok else 'FAIL'
    emit_report(results, config.report_format)
    logger.info(f"Verification of {config.input_path}: {results['verdict']}")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_generate(config, settings):
    """Write a reproducible random instance."""
    if config.problem is None or config.size is None:
        raise InstanceFormatError("generate needs --problem and --size")
    instance = generate(
        config.problem,
        config.size,
        bits=config.bits,
        seed=config.seed,
        alternatives=config.alternatives,
        metric=config.metric,
        vehicles=config.vehicles,
        committee=config.committee,
    )
    document = instance_to_dict(instance)
    if config.threshold is not None:
        document['threshold'] = format_rational(config.threshold)
    write_document(document, config.output_path)
    return EXIT_OK


COMMANDS = {
    'kernelize': cmd_kernelize,
    'verify': cmd_verify,
    'generate': cmd_generate,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog='kernelsmith',
        description='Shrink the weights of combinatorial optimization instances without changing their optima.',
    )
    parser.add_argument('--verbose', action='store_true', help='Log engine details (DEBUG level)')
    subparsers = parser.add_subparsers(dest='command', required=True)

    def common(sub):
        sub.add_argument('--out', dest='output_path', help='Output file (default: stdout)')
        sub.add_argument('--threshold', type=parse_rational, help='Decision threshold as "p/q"')
        sub.add_argument('--cap', type=int, help='Enumeration cap override')
        sub.add_argument('--report', dest='report_format', choices=['json', 'text'], default='json')
        sub.add_argument('--verbose', action='store_true', default=argparse.SUPPRESS)

    def vector_flags(sub):
        sub.add_argument('--N', type=int, help='Norm radius for raw vectors')
        sub.add_argument('--r', type=int, help='Rational relation radius for raw vectors')
        sub.add_argument('--domain', choices=['Z', 'Q'], default='Z')

    kernelize_parser = subparsers.add_parser('kernelize', help='Reduce the weights of an instance file')
    kernelize_parser.add_argument('--in', dest='input_path', required=True)
    common(kernelize_parser)
    vector_flags(kernelize_parser)

    verify_parser = subparsers.add_parser('verify', help='Check a kernel against the original instance')
    verify_parser.add_argument('--in', dest='input_path', required=True)
    verify_parser.add_argument('--reduced', dest='reduced_path', help='Previously kernelized instance file')
    verify_parser.add_argument('--mode', choices=['signs', 'optima', 'bound', 'all'], default='all')
    common(verify_parser)
    vector_flags(verify_parser)

    generate_parser = subparsers.add_parser('generate', help='Generate a random instance file')
    generate_parser.add_argument('--problem', choices=sorted(PROBLEM_TYPES), required=True)
    generate_parser.add_argument('--size', type=int, required=True)
    generate_parser.add_argument('--bits', type=int, default=64)
    generate_parser.add_argument('--seed', type=int, default=0)
    generate_parser.add_argument('--metric', action='store_true')
    generate_parser.add_argument('--alternatives', type=int)
    generate_parser.add_argument('--vehicles', type=int, default=2)
    generate_parser.add_argument('--committee', type=int, default=2)
    common(generate_parser)
    return parser


def parse_config(argv=None):
    """Parse command-line arguments into a RunConfig."""
    args = vars(build_parser().parse_args(argv))
    verbose = args.pop('verbose', False)
    known = {name for name in RunConfig.__dataclass_fields__}
    config = RunConfig(**{key: value for key, value in args.items() if key in known})
    return config, verbose


def main(argv=None):
    """
    Run one command and return its exit code.

    Args:
        argv (list): Arguments (default: sys.argv[1:])

    Returns:
        int: 0 success, 1 verification failure, 2 input error, 3 cap exceeded
    """
    config, verbose = parse_config(argv)
    if verbose:
        set_log_level('DEBUG')
    try:
        settings = load_settings(enumeration_cap=config.cap)
        return COMMANDS[config.command](config, settings)
    except (CapExceededError, InfeasibleEnumerationError) as e:
        logger.error(f"{config.command} stopped at a cap: {e}")
        print(f"error: {e}. Try a smaller instance or raise the cap.", file=sys.stderr)
        return EXIT_CAP_EXCEEDED
    except KernelsmithError as e:
        logger.error(f"{config.command} failed on input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OSError as e:
        logger.error(f"{config.command} failed on a file: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
