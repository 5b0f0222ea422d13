#!/usr/bin/env python3
"""
SCALEFLOW - CLI Runner (Experiment Orchestration)
Command-line front end: parses flags and config files, runs one experiment and writes its
table or report

Dependencies:
- config.py: RunConfig, load_config_file, build_config
- example_systems.py: Presets for flows, start points and measures
- periodization.py / embedding.py / dynamics_core.py: The experiments themselves
- artifacts.py: Atomic output files
- diagnostics.py: SCALEFLOW_LOG logging setup

Experiments:
- approximate: P,distance table of d(mu_P, mu)
- orbit-dist: P,distance table of the orbit set distances
- chain: JSON report {found, chain, ...}
- embed: JSON report {equivariance_defect, ...} or the cylinder measure as long CSV
- adpt: JSON report {defect, density_defect, ...} or the tau,distance profile as CSV

Exit codes: 0 success, 2 invalid input or configuration, 3 output not writable. Failures
print one sorted-key JSON object {"error", "detail"} on stderr.
"""

import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, Optional

from . import __version__
from .artifacts import dump_cylinder, dump_profile, dump_report, dump_table, write_text
from .config import EXPERIMENTS, RunConfig, build_config, load_config_file
from .diagnostics import configure_logging
from .dynamics_core import (
    FlowSpec,
    SampledCurve,
    SearchBudget,
    adpt_profile,
    density_defect,
    is_chain_recurrent_at,
)
from .embedding import (
    GaussianKernel,
    KellerMap,
    YGrid,
    build_nu,
    equivariance_defect,
    growth_integral,
    keller_embed,
)
from .errors import EXIT_OK, ConfigError, error_report, exit_code_for
from .example_systems import Preset, get_preset
from .measure_model import AtomicMeasure, FrechetFamily
from .periodization import convergence_experiment, orbit_distance_experiment

logger = logging.getLogger(__name__)

# Cover size for the density check of the adpt report
_DENSITY_COVER = 64


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that raises ConfigError instead of exiting"""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


def _add_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--preset", help="named system (see PRESETS)")
    parser.add_argument("-o", "--output", help="output file (stdout when omitted)")
    parser.add_argument("--format", choices=["csv", "json"])

    measure = parser.add_argument_group("measures")
    measure.add_argument("--rho", type=float)
    measure.add_argument("--sigma", type=float)
    measure.add_argument("--epsilon", type=float, help="two-mass margin or chain tolerance")
    measure.add_argument("--periods", help="a..b or a comma list")
    measure.add_argument("--t-window", dest="t_window", help="lo,hi (write --t-window=-8,8)")
    measure.add_argument("--dt", type=float)
    measure.add_argument("--family-size", dest="family_size", type=int)

    chain = parser.add_argument_group("chain search")
    chain.add_argument("--s", type=float, help="lower bound for jump times")
    chain.add_argument("--net-size", dest="net_size", type=int)
    chain.add_argument("--max-nodes", dest="max_nodes", type=int)

    embed = parser.add_argument_group("embedding")
    embed.add_argument("--t-cut", dest="t_cut", type=float)
    embed.add_argument("--kernel-dt", dest="kernel_dt", type=float)
    embed.add_argument("--anchors", type=int)
    embed.add_argument("--y-min", dest="y_min", type=float)
    embed.add_argument("--y-max", dest="y_max", type=float)
    embed.add_argument("--dy", type=float)
    embed.add_argument("--tau", type=float)

    adpt = parser.add_argument_group("pseudo-trajectories")
    adpt.add_argument("--curve", choices=["orbit", "constant"])
    adpt.add_argument("--adpt-t", dest="adpt_t", type=float)
    adpt.add_argument("--adpt-window", dest="adpt_window", help="a,b")
    adpt.add_argument("--tau-step", dest="tau_step", type=float)
    adpt.add_argument("--reading", choices=["corrected", "literal"])


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="scaleflow",
        description="Scaling flow on M[rho, sigma]: approximation, chains and embeddings",
    )
    parser.add_argument("--version", action="version", version=f"scaleflow {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_ArgumentParser)
    for name in EXPERIMENTS:
        _add_options(sub.add_parser(name))
    return parser


# ---------------------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------------------


def _measure(config: RunConfig, preset: Preset) -> AtomicMeasure:
    return preset.build_measure(config.epsilon, config.growth_class)


def _run_approximate(config: RunConfig, preset: Preset) -> str:
    rows = convergence_experiment(
        _measure(config, preset),
        config.resolved_periods,
        FrechetFamily.default(config.family_size),
        config.growth_class,
    )
    logger.info("approximate: %d rows", len(rows))
    return dump_table(rows, config.resolved_format)


def _run_orbit_dist(config: RunConfig, preset: Preset) -> str:
    rows = orbit_distance_experiment(
        _measure(config, preset),
        config.resolved_periods,
        FrechetFamily.default(config.family_size),
        config.growth_class,
        config.t_window,
        config.dt,
    )
    logger.info("orbit-dist: %d rows", len(rows))
    return dump_table(rows, config.resolved_format)


def _run_chain(config: RunConfig, preset: Preset) -> str:
    if config.resolved_format != "json":
        raise ConfigError("chain reports are JSON only")
    budget = SearchBudget(net_size=config.net_size, max_nodes=config.max_nodes)
    found, chain = is_chain_recurrent_at(
        preset.build_flow(), preset.start_point(), config.epsilon, config.s, budget
    )
    logger.info("chain: found=%s links=%d", found, len(chain.jump_times) if chain else 0)
    return dump_report(
        {
            "experiment": "chain",
            "preset": preset.name,
            "epsilon": config.epsilon,
            "s": config.s,
            "found": found,
            "chain": chain.to_dict() if chain is not None else None,
        }
    )


def _run_embed(config: RunConfig, preset: Preset) -> str:
    flow = preset.build_flow()
    start = preset.start_point()
    kmap = KellerMap.for_space(flow.space, config.anchors)
    kernel = GaussianKernel(config.t_cut, config.kernel_dt)
    grid = YGrid.from_bounds(config.y_min, config.y_max, config.dy)
    nu = build_nu(kmap, flow, kernel, start, grid, config.rho)
    if config.resolved_format == "csv":
        return dump_cylinder(nu, "csv")

    defect = equivariance_defect(kmap, flow, kernel, start, config.tau, grid, config.rho)
    logger.info("embed: tau=%g equivariance defect %.3g", config.tau, defect)
    return dump_report(
        {
            "experiment": "embed",
            "preset": preset.name,
            "anchors": kmap.size,
            "tau": config.tau,
            "equivariance_defect": defect,
            "growth_integral": growth_integral(nu),
            "keller_total_variation": keller_embed(kmap, start).total_variation,
            "kernel_mass": kernel.mass,
            "kernel_tail": kernel.tail,
        }
    )


def _adpt_curve(config: RunConfig, preset: Preset, flow: FlowSpec) -> SampledCurve:
    start = preset.start_point()
    a, b = config.adpt_window
    lo = min(0.0, config.adpt_t + a)
    # one extra step so t + b is covered after rounding
    hi = config.adpt_t + b + config.dt
    orbit = SampledCurve.from_orbit(flow, start, lo, hi, config.dt)
    if config.curve == "orbit":
        return orbit
    return SampledCurve(orbit.times, tuple(flow.space.validate_point(start) for _ in orbit.times))


def _run_adpt(config: RunConfig, preset: Preset) -> str:
    flow = preset.build_flow()
    curve = _adpt_curve(config, preset, flow)
    profile = adpt_profile(
        curve, flow, config.adpt_t, config.adpt_window, config.tau_step, config.reading
    )
    if config.resolved_format == "csv":
        return dump_profile(profile)

    cover = flow.space.sampler(_DENSITY_COVER)
    density = density_defect(curve, cover, config.adpt_t, metric=flow.space.metric)
    defect = max(d for _, d in profile)
    logger.info("adpt: %s reading, defect %.3g", config.reading, defect)
    return dump_report(
        {
            "experiment": "adpt",
            "preset": preset.name,
            "curve": config.curve,
            "reading": config.reading,
            "t": config.adpt_t,
            "window": list(config.adpt_window),
            "defect": defect,
            "density_defect": density,
            "profile": [[tau, d] for tau, d in profile],
        }
    )


_EXPERIMENTS: Dict[str, Callable[[RunConfig, Preset], str]] = {
    "approximate": _run_approximate,
    "orbit-dist": _run_orbit_dist,
    "chain": _run_chain,
    "embed": _run_embed,
    "adpt": _run_adpt,
}


def _report_failure(exc: BaseException) -> int:
    sys.stderr.write(json.dumps(error_report(exc), sort_keys=True) + "\n")
    return exit_code_for(exc)


def run(config: RunConfig) -> int:
    """
    Run one experiment and emit its output.

    Args:
        config: Validated run configuration

    Returns:
        Exit code (0 success, 2 invalid input, 3 output failure)
    """
    try:
        preset = get_preset(config.resolved_preset)
        logger.info("%s: preset %s", config.experiment, preset.name)
        text = _EXPERIMENTS[config.experiment](config, preset)
        if config.output:
            write_text(config.output, text)
        else:
            sys.stdout.write(text)
    except (ValueError, ArithmeticError, OSError) as exc:
        return _report_failure(exc)
    return EXIT_OK


def _flag_values(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"experiment", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point; returns the exit code"""
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        file_values = load_config_file(args.config) if args.config else {}
        config = build_config(args.experiment, file_values, _flag_values(args))
    except ValueError as exc:
        return _report_failure(exc)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
