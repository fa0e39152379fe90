"""
corners-lab - Command Line Entry Point

Subcommands:
    sample    multilevel Wishart / Jacobi draws to CSV or JSON
    density   log densities of a points file
    verify    run a verification suite and write its JSON report
    cauchy    one Cauchy identity, both sides
    limits    ε-trajectories of the limit checks

Exit codes: 0 all checks passed, 1 a check failed, 2 usage or configuration error.
"""

import argparse
import json
import sys
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

# Add src directory to Python path
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))

from core import densities
from core.cauchy import cauchy_ho, cauchy_mvb
from core.ensembles import SampleBatch
from core.limits import LIMIT_CHECKS
from core.suite import SUITES, SuiteRunner
from core.verify import check_limit
from integrations.exporter import Exporter
from integrations.readers import load_run_config, read_points
from models.params import JacobiParams
from models.run_config import RunConfig
from utils.config import Config
from utils.errors import ConfigError, CornersLabError, ParameterError, ValidationError
from utils.logger import log_configuration, log_exception, setup_application_logging

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

DENSITY_IDS = ('mvb-joint', 'mvb-marginal', 'wishart-kernel', 'jacobi', 'ho-joint', 'ho-marginal')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corners-lab", description="Corners processes of β-ensembles")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (flags override it)")
    common.add_argument("--seed", type=int, help="Global seed (default: CORNERS_LAB_SEED)")
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="Output path")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--order", type=int, help="Quadrature order")
    common.add_argument("--tolerance", type=float, help="Quadrature tolerance")
    common.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"))
    common.add_argument("--log-dir")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", choices=("wishart", "jacobi"))
    model.add_argument("--beta", type=int, choices=(1, 2))
    model.add_argument("--pi", help="Comma-separated π")
    model.add_argument("--pihat", dest="pi_hat", help="Comma-separated π̂")
    model.add_argument("--A", dest="A", type=int)
    model.add_argument("--n", type=int)
    model.add_argument("--levels", type=int,
                       help="Number of levels (density: level of the last row, inferred when omitted)")
    model.add_argument("--theta", type=float)

    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("sample", parents=[common, model], help="Draw multilevel samples")
    sp.add_argument("--count", type=int)

    dp = sub.add_parser("density", parents=[common, model], help="Evaluate log densities")
    dp.add_argument("--id", dest="density_id", choices=DENSITY_IDS, required=True)
    dp.add_argument("--points", required=True, help="Points file ('|' between levels, ',' between entries)")

    vp = sub.add_parser("verify", parents=[common], help="Run a verification suite")
    vp.add_argument("--suite", choices=SUITES)
    vp.add_argument("--tests", help="Comma-separated subset of test ids")

    cp = sub.add_parser("cauchy", parents=[common], help="Check one Cauchy identity")
    cp.add_argument("--id", dest="identity", choices=("cauchy-mvb", "cauchy-ho"), required=True)
    cp.add_argument("--n", type=int)
    cp.add_argument("--m", dest="levels", type=int)
    cp.add_argument("--theta", type=float)
    cp.add_argument("--s", help="Comma-separated s (length m)")
    cp.add_argument("--r", help="Comma-separated r (length n)")
    cp.add_argument("--max-error", type=float, default=1e-3, help="Exit 1 above this relative error")

    lp = sub.add_parser("limits", parents=[common], help="Run limit checks")
    lp.add_argument("--id", dest="check_id", help="Check id (default: all)")
    lp.add_argument("--eps", help="Comma-separated decreasing ε-sequence")
    return parser


_NOT_RUN_FLAGS = ('config', 'log_level', 'log_dir', 'command', 'points', 'tests', 'max_error')


def make_run_config(args: argparse.Namespace, config: Config) -> RunConfig:
    flags = {k: v for k, v in vars(args).items() if k not in _NOT_RUN_FLAGS}
    file_data = load_run_config(args.config) if args.config else None
    return RunConfig.merge(args.command, flags, file_data, config)


def _default_out(run: RunConfig, stem: str) -> str:
    return run.out or f"{stem}.{run.format}"


def cmd_sample(run: RunConfig, config: Config, logger) -> int:
    params = run.model_params()
    samples = SampleBatch(config).run(params, run.count, seed=run.seed, workers=run.workers, m_max=run.levels)
    path = Exporter(config, run.format).export_samples(samples, _default_out(run, "samples"), run.seed,
                                                       run.params_dict())
    print(f"{sum(s.depth for s in samples)} rows written to {path}")
    return EXIT_OK


def _format_point(levels: List[List[float]]) -> str:
    return " | ".join(",".join(repr(v) for v in lvl) for lvl in levels)


def _evaluate_group(run: RunConfig, density_id: str, group: List[List[List[float]]]) -> np.ndarray:
    """Log densities of configurations sharing the same level lengths."""
    depth = len(group[0])
    arrays = [np.array([cfg[l] for cfg in group], dtype=float).reshape(len(group), len(group[0][l]))
              for l in range(depth)]
    quad = run.quad
    if density_id == 'mvb-joint':
        return np.asarray(densities.logdens_mvb_joint(arrays, run.model_params(), quad))
    if density_id == 'mvb-marginal':
        return np.asarray(densities.logdens_mvb_marginal(arrays[-1], run.levels or depth, run.model_params(), quad))
    if density_id == 'wishart-kernel':
        if depth != 2:
            raise ValidationError("wishart-kernel points need two levels: previous | next")
        # smallest level the previous row allows, saturated rows included
        m = run.levels or arrays[0].shape[1] + 1
        return np.asarray(densities.log_kernel_wishart(arrays[0], arrays[1], m,
                                                       run.model_params(), quad))
    if density_id == 'jacobi':
        if run.A is None or run.n is None:
            raise ParameterError("jacobi densities need --A and --n")
        return np.asarray(densities.logdens_jacobi(arrays, JacobiParams(run.beta, run.A, run.n, depth)))
    theta = run.theta if run.theta is not None else run.beta / 2.0
    if density_id == 'ho-joint':
        return np.asarray(densities.logdens_ho_joint(arrays, run.pi, run.pi_hat, theta, quad))
    return np.asarray(densities.logdens_ho_marginal(arrays[-1], run.levels or depth, run.pi, run.pi_hat, theta, quad))


def cmd_density(run: RunConfig, points_file: str, config: Config, logger) -> int:
    points = read_points(points_file)
    groups: Dict[tuple, List[int]] = defaultdict(list)
    for index, cfg in enumerate(points):
        groups[tuple(len(lvl) for lvl in cfg)].append(index)
    values = np.full(len(points), -np.inf)
    for shape, indices in groups.items():
        logger.debug(f"Evaluating {len(indices)} points of shape {shape}")
        values[indices] = _evaluate_group(run, run.density_id, [points[i] for i in indices])
    path = Exporter(config, run.format).export_densities([_format_point(p) for p in points], run.density_id,
                                                         values, _default_out(run, "densities"),
                                                         run.params_dict(), run.seed)
    print(f"{len(points)} log densities written to {path}")
    return EXIT_OK


def cmd_verify(run: RunConfig, tests: Optional[str], config: Config, logger) -> int:
    runner = SuiteRunner(config)
    only = [t.strip() for t in tests.split(",") if t.strip()] if tests else None
    report = runner.run(run.suite, seed=run.seed, only=only)
    exporter = Exporter(config)
    path = exporter.export_report(report, run.out or f"report-{run.suite}.json")
    print(exporter.summary_table(report))
    print(f"\nSuite '{run.suite}': {report.summary()['verdict']} (report: {path})")
    for failure in report.failures():
        print(json.dumps(failure.to_dict(), indent=2, default=str))
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_cauchy(run: RunConfig, max_error: float, config: Config, logger) -> int:
    fn = cauchy_mvb if run.identity == 'cauchy-mvb' else cauchy_ho
    result = fn(run.n, run.levels, run.theta, run.s, run.r, run.quad)
    row = result.to_dict()
    if run.out:
        Exporter(config, run.format).export_table([row], run.out, run.params_dict())
    print(json.dumps(row, indent=2))
    return EXIT_OK if result.rel_error <= max_error else EXIT_FAILED


def cmd_limits(run: RunConfig, config: Config, logger) -> int:
    ids: Sequence[str] = [run.check_id] if run.check_id else list(LIMIT_CHECKS)
    if run.eps and len(ids) > 1:
        raise ConfigError("--eps needs a single --id")
    rows, ok = [], True
    for check_id in ids:
        report = check_limit(check_id, run.eps or None, quad=run.quad)
        ok &= report.passed
        for row in report.details['trajectory']:
            rows.append({'check': check_id, **row, 'verdict': report.verdict})
        print(f"{check_id}: {report.verdict} (final rel error {report.statistic:.3e}, "
              f"monotone={report.details['monotone']})")
    Exporter(config, run.format).export_table(rows, _default_out(run, "limits"), run.params_dict())
    return EXIT_OK if ok else EXIT_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    logger = None
    try:
        config = Config(log_level=args.log_level, log_dir=args.log_dir)
        logger = setup_application_logging(config.LOG_LEVEL, config.LOG_DIR)
        log_configuration(logger, config)
        run = make_run_config(args, config)
        logger.info(f"Running '{run.command}' (seed={run.seed})")

        if run.command == 'sample':
            return cmd_sample(run, config, logger)
        if run.command == 'density':
            return cmd_density(run, args.points, config, logger)
        if run.command == 'verify':
            return cmd_verify(run, args.tests, config, logger)
        if run.command == 'cauchy':
            return cmd_cauchy(run, args.max_error, config, logger)
        return cmd_limits(run, config, logger)

    except (ConfigError, ParameterError, ValidationError, FileNotFoundError) as e:
        if logger:
            log_exception(logger, e, args.command)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CornersLabError as e:
        if logger:
            log_exception(logger, e, args.command)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILED
    except KeyboardInterrupt:
        print("\nInterrupted")
        return EXIT_FAILED
    finally:
        if logger:
            logger.info("corners-lab finished")


if __name__ == "__main__":
    sys.exit(main())
