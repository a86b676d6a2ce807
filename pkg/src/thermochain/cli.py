"""Command-line run orchestration.

Each subcommand wires one pipeline from a single flat config file and
writes deterministic artifacts into the output directory:
``<label>.csv`` (data), ``<label>.diag.csv`` (diagnostics, where the
pipeline produces them), and ``<label>.config`` (normalized config
echo).  ``compare`` reads two CSVs back and reports per-column maximum
and mean absolute deviation over the overlapping time range, optionally
gating with a tolerance through the exit status.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chainmap import (ChainCoefficients, DiscretizedMeasure, discretize,
                       recurrence_coefficients)
from .config import RunConfig, load_config
from .errors import ConfigError, ThermochainError
from .lattice import SystemSpec, build_anderson, build_spin_boson
from .mastereq import DensityMatrix, anderson_me, compute_kernels, integrate_me
from .reference import dephasing_series, exact_diagonalization
from .series import TimeSeries, compare_series, config_hash, read_csv, write_csv
from .spectral import (FERMIONIC, SpectralDensity, ThermalParameters,
                       thermofield_densities)
from .tensornet import EvolutionConfig, tebd_evolve, vacuum_state

logger = logging.getLogger(__name__)

#: quadrature nodes backing the continuum measure, if not configured
DEFAULT_NODE_FLOOR = 200
DEFAULT_NODE_FACTOR = 4


def build_bath(cfg: RunConfig) -> tuple[SpectralDensity, ThermalParameters]:
    family = cfg.get("bath.family")
    if family == "ohmic":
        cfg.require("bath.eta")
        kwargs = {}
        if cfg.get("bath.omega_max") is not None:
            kwargs["omega_max"] = cfg.get("bath.omega_max")
        if cfg.get("bath.tail_tol") is not None:
            kwargs["tail_tol"] = cfg.get("bath.tail_tol")
        density = SpectralDensity.ohmic(eta=cfg.get("bath.eta"), s=cfg.get("bath.s"),
                                        omega_c=cfg.get("bath.omega_c"), **kwargs)
    else:
        cfg.require("bath.table_path")
        table = np.loadtxt(cfg.get("bath.table_path"), dtype=float, ndmin=2)
        density = SpectralDensity.tabulated(table)
    cfg.require("bath.beta")
    thermal = ThermalParameters(beta=cfg.get("bath.beta"),
                                statistics=cfg.get("bath.statistics"))
    return density, thermal


def build_system(cfg: RunConfig) -> SystemSpec:
    kind = cfg.get("system.kind")
    if kind == "anderson_dot":
        return SystemSpec(kind=kind,
                          coulomb_u=cfg.get("anderson.U"),
                          level=cfg.get("anderson.V"),
                          t_hyb=cfg.get("anderson.t_hyb"),
                          initial_dot=cfg.get("anderson.initial_dot"))
    amp0 = complex(cfg.get("system.a_re"), cfg.get("system.a_im"))
    amp1 = complex(cfg.get("system.b_re"), cfg.get("system.b_im"))
    return SystemSpec(kind=kind, omega_s=cfg.get("system.omega_S"),
                      amp0=amp0, amp1=amp1,
                      coupling_op=cfg.get("system.coupling_op"))


#: support cutoff exponent for the auxiliary density: detailed balance
#: gives J2 = exp(-beta w) J1, so past w = log(1e18)/beta the auxiliary
#: weight is below 1e-18 of the primary and only starves the quadrature
_J2_TAIL_EXPONENT = math.log(1e18)


def default_grading(density: SpectralDensity) -> str:
    sub_ohmic = density.family == "ohmic_family" and density.s < 1.0
    return "log" if sub_ohmic else "linear"


def thermofield_measures(
    density: SpectralDensity, thermal: ThermalParameters, nodes: int, grading: str
) -> tuple[DiscretizedMeasure, DiscretizedMeasure | None]:
    """Discretized measures of the doubled pair; the second is None if J2 vanishes."""
    pair = thermofield_densities(density, thermal)
    measure1 = discretize(pair.j1, density.omega_max, nodes, grading)
    omega2 = density.omega_max
    if not thermal.zero_temperature:
        omega2 = min(omega2, _J2_TAIL_EXPONENT / thermal.beta)
    measure2 = discretize(pair.j2, omega2, nodes, grading)
    if measure2.count == 0:
        measure2 = None
    return measure1, measure2


def build_chains(
    cfg: RunConfig, density: SpectralDensity, thermal: ThermalParameters
) -> tuple[ChainCoefficients, ChainCoefficients]:
    """Thermofield split, discretization, and recurrence for both chains."""
    cfg.require("chain.M")
    m1 = cfg.get("chain.M")
    m2 = cfg.get("chain.M2", m1) or m1
    nodes = cfg.get("chain.nodes")
    if nodes is None:
        nodes = max(DEFAULT_NODE_FACTOR * max(m1, m2), DEFAULT_NODE_FLOOR)
    grading = cfg.get("chain.grading")
    if grading is None:
        grading = default_grading(density)
    measure1, measure2 = thermofield_measures(density, thermal, nodes, grading)
    chain1 = recurrence_coefficients(measure1, m1, reservoir_index=1)
    if measure2 is None:
        chain2 = ChainCoefficients.empty(reservoir_index=2)
    else:
        chain2 = recurrence_coefficients(measure2, m2, reservoir_index=2)
    return chain1, chain2


def measurement_grid(dt: float, t_final: float, stride: int) -> np.ndarray:
    """Times at which the evolution subcommands record observables."""
    n = int(round(t_final / dt))
    steps = sorted({0, n, *range(stride, n + 1, stride)})
    return np.array([k * dt for k in steps])


def _emit(series: TimeSeries, cfg: RunConfig, out_dir: Path, label: str) -> None:
    echo = cfg.echo()
    series = TimeSeries(times=series.times, columns=series.columns,
                        config_echo=echo, diagnostics=series.diagnostics,
                        warnings=series.warnings)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(series, out_dir / f"{label}.csv")
    if series.diagnostics is not None:
        diag = series.diagnostics
        diag = TimeSeries(times=diag.times, columns=diag.columns, config_echo=echo)
        write_csv(diag, out_dir / f"{label}.diag.csv")
    (out_dir / f"{label}.config").write_text(echo + "\n", encoding="utf-8")
    for message in series.warnings:
        print(f"warning: {message}", file=sys.stderr)


def cmd_chain_coeffs(cfg: RunConfig, out_dir: Path, label: str) -> None:
    density, thermal = build_bath(cfg)
    chain1, chain2 = build_chains(cfg, density, thermal)
    echo = cfg.echo()
    lines = [f"# thermochain {__version__}",
             f"# config-sha256: {config_hash(echo)}"]
    lines += [f"# cfg:{line}" for line in echo.splitlines()]
    lines.append("j,n,alpha,beta")
    for chain in (chain1, chain2):
        for n in range(chain.chain_length):
            lines.append(f"{chain.reservoir_index},{n},"
                         f"{format(chain.alphas[n], '.17g')},"
                         f"{format(chain.betas[n], '.17g')}")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{label}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out_dir / f"{label}.config").write_text(echo + "\n", encoding="utf-8")


def _evolution_config(cfg: RunConfig) -> EvolutionConfig:
    cfg.require("evolve.dt", "evolve.t_final", "mps.D_max")
    return EvolutionConfig(dt=cfg.get("evolve.dt"),
                           t_final=cfg.get("evolve.t_final"),
                           d_max=cfg.get("mps.D_max"),
                           svd_tol=cfg.get("mps.svd_tol"),
                           measure_stride=cfg.get("evolve.measure_stride"))


def cmd_evolve_mps(cfg: RunConfig, out_dir: Path, label: str) -> None:
    density, thermal = build_bath(cfg)
    system = build_system(cfg)
    chain1, chain2 = build_chains(cfg, density, thermal)
    cfg.require("mps.n_max")
    n_max = cfg.get("mps.n_max")
    n_max_first = cfg.get("mps.n_max_first", n_max) or n_max
    allow_unequal = cfg.get("chain.M2") is not None
    if system.kind == "anderson_dot":
        if thermal.statistics != FERMIONIC:
            raise ConfigError("anderson_dot needs bath.statistics = fermionic",
                              key="bath.statistics")
        model = build_anderson(system, chain1, chain2, allow_unequal=allow_unequal)
    else:
        model = build_spin_boson(system, chain1, chain2, n_max=n_max,
                                 n_max_first=n_max_first,
                                 allow_unequal=allow_unequal)
    state = vacuum_state(model)
    series = tebd_evolve(state, model, _evolution_config(cfg))
    _emit(series, cfg, out_dir, label)


def cmd_evolve_me(cfg: RunConfig, out_dir: Path, label: str) -> None:
    density, thermal = build_bath(cfg)
    system = build_system(cfg)
    cfg.require("evolve.dt", "evolve.t_final")
    dt = cfg.get("evolve.dt")
    t_final = cfg.get("evolve.t_final")
    stride = cfg.get("evolve.measure_stride")
    kernels = compute_kernels(density, thermal, t_final, 0.5 * dt)
    rho0 = DensityMatrix.from_state(system.initial_vector())
    if system.kind == "anderson_dot":
        series = anderson_me(system.coulomb_u, system.level, system.t_hyb,
                             kernels, rho0, dt, t_final, measure_stride=stride)
    else:
        series = integrate_me(system.hamiltonian(), system.bath_coupling(),
                              kernels, rho0, dt, t_final, measure_stride=stride)
    _emit(series, cfg, out_dir, label)


def cmd_exact_dephasing(cfg: RunConfig, out_dir: Path, label: str) -> None:
    density, thermal = build_bath(cfg)
    system = build_system(cfg)
    cfg.require("evolve.dt", "evolve.t_final")
    times = measurement_grid(cfg.get("evolve.dt"), cfg.get("evolve.t_final"),
                             cfg.get("evolve.measure_stride"))
    series = dephasing_series(system, density, thermal, times)
    _emit(series, cfg, out_dir, label)


def cmd_exact_ed(cfg: RunConfig, out_dir: Path, label: str) -> None:
    # star modes are given explicitly, so no continuum bath is built here
    cfg.require("bath.beta")
    thermal = ThermalParameters(beta=cfg.get("bath.beta"),
                                statistics=cfg.get("bath.statistics"))
    system = build_system(cfg)
    cfg.require("star.frequencies", "star.couplings", "evolve.dt", "evolve.t_final")
    times = measurement_grid(cfg.get("evolve.dt"), cfg.get("evolve.t_final"),
                             cfg.get("evolve.measure_stride"))
    series = exact_diagonalization(cfg.get("star.frequencies"),
                                   cfg.get("star.couplings"),
                                   thermal, system,
                                   n_max=cfg.get("mps.n_max"), t_grid=times)
    _emit(series, cfg, out_dir, label)


def cmd_compare(args) -> int:
    series_a = read_csv(args.a)
    series_b = read_csv(args.b)
    report = compare_series(series_a, series_b)
    worst = 0.0
    for name in sorted(report):
        max_dev, mean_dev = report[name]
        worst = max(worst, max_dev)
        print(f"{name}: max |delta| = {max_dev:.6e}  mean |delta| = {mean_dev:.6e}")
    if args.tolerance is not None and worst > args.tolerance:
        print(f"FAIL: max deviation {worst:.6e} exceeds tolerance "
              f"{args.tolerance:.6e}", file=sys.stderr)
        return 1
    return 0


_SUBCOMMANDS = {
    "chain-coeffs": cmd_chain_coeffs,
    "evolve-mps": cmd_evolve_mps,
    "evolve-me": cmd_evolve_me,
    "exact-dephasing": cmd_exact_dephasing,
    "exact-ed": cmd_exact_ed,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermochain",
        description="Finite-temperature open-system dynamics via doubled-bath "
                    "chain mapping",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--output", default=None, help="overrides run.output_dir")
        p.add_argument("--label", default=None, help="overrides run.label")
    comp = sub.add_parser("compare")
    comp.add_argument("--a", required=True)
    comp.add_argument("--b", required=True)
    comp.add_argument("--tolerance", type=float, default=None)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "compare":
            return cmd_compare(args)
        cfg = load_config(args.config)
        cfg = cfg.override(run__output_dir=args.output, run__label=args.label)
        out_dir = Path(cfg.get("run.output_dir"))
        label = cfg.get("run.label")
        _SUBCOMMANDS[args.subcommand](cfg, out_dir, label)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ThermochainError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
