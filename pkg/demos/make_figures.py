#!/usr/bin/env python3
"""Build every comparison figure from scratch.

Runs the simulation command line tool to fill ``plots/out/`` with CSV
time series, then renders each checked-in plot spec from
``plots/specs/`` into ``plots/out/figures/``.  The default profile uses
production-scale truncations and takes a few minutes; ``--fast`` drops
to smoke-test sizes and finishes in well under a minute.

Both tools must be on PATH (``pip install -e . -e plots``).
"""

from __future__ import annotations

import argparse
import subprocess
import sys
import time
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
OUT = REPO / "plots" / "out"
SPECS_DIR = REPO / "plots" / "specs"

AMP = 2.0 ** -0.5

#: per-profile truncation and horizon choices; full sizes match the
#: converged settings used by the whole-system acceptance checks
PROFILES = {
    "full": {
        "dephasing_t": 10.3,
        "dephasing_nmax": 3, "dephasing_d": 20,
        "weak_t": 20.0, "weak_m": 100, "weak_nmax": 4, "weak_d": 20,
        "strong_t": 15.0, "strong_m": 100,
        "strong_nmax": 6, "strong_nmax_first": 7, "strong_d": 40,
        "anderson_t": 10.0, "anderson_m": 40, "anderson_d": 64,
    },
    "fast": {
        "dephasing_t": 2.0,
        "dephasing_nmax": 3, "dephasing_d": 20,
        "weak_t": 2.0, "weak_m": 6, "weak_nmax": 2, "weak_d": 8,
        "strong_t": 2.0, "strong_m": 6,
        "strong_nmax": 2, "strong_nmax_first": 2, "strong_d": 8,
        "anderson_t": 2.0, "anderson_m": 4, "anderson_d": 16,
    },
}


def spin_lines(kind, eta, beta, t_final, omega_s=None):
    lines = [
        f"bath.eta = {eta!r}",
        f"bath.beta = {beta!r}",
        f"system.kind = {kind}",
        f"system.a_re = {AMP!r}",
        f"system.b_re = {AMP!r}",
    ]
    if omega_s is not None:
        lines.append(f"system.omega_S = {omega_s!r}")
    lines += ["evolve.dt = 0.05", f"evolve.t_final = {t_final!r}"]
    return lines


def mps_lines(m, n_max, d_max, n_max_first=None):
    lines = [f"chain.M = {m}", f"mps.n_max = {n_max}", f"mps.D_max = {d_max}"]
    if n_max_first is not None:
        lines.append(f"mps.n_max_first = {n_max_first}")
    return lines


def jobs(p):
    """(subcommand, label, config lines) for every CSV the specs reference."""
    out = []
    dephasing = spin_lines("spin_dephasing", 0.1, 5.0, p["dephasing_t"])
    out.append(("exact-dephasing", "dephasing_exact", dephasing))
    for m in (2, 10, 40):
        out.append(("evolve-mps", f"dephasing_m{m}",
                    dephasing + mps_lines(m, p["dephasing_nmax"],
                                          p["dephasing_d"])))
    for beta in (10.0, 50.0, 1000.0):
        weak = spin_lines("spin_transverse", 0.01, beta, p["weak_t"],
                          omega_s=0.1)
        out.append(("evolve-me", f"weak_b{beta:.0f}_me", weak))
        out.append(("evolve-mps", f"weak_b{beta:.0f}_mps",
                    weak + mps_lines(p["weak_m"], p["weak_nmax"],
                                     p["weak_d"])))
    strong = spin_lines("spin_transverse", 0.1, 10.0, p["strong_t"],
                        omega_s=0.1)
    out.append(("evolve-me", "strong_me", strong))
    out.append(("evolve-mps", "strong_mps",
                strong + mps_lines(p["strong_m"], p["strong_nmax"],
                                   p["strong_d"], p["strong_nmax_first"])))
    anderson = [
        "bath.eta = 0.1",
        "bath.beta = 1.0",
        "bath.statistics = fermionic",
        "system.kind = anderson_dot",
        "anderson.U = 0.3",
        "anderson.V = -0.15",
        "anderson.t_hyb = 0.2",
        "anderson.initial_dot = up",
        "evolve.dt = 0.05",
        f"evolve.t_final = {p['anderson_t']!r}",
    ]
    out.append(("evolve-me", "anderson_me", anderson))
    out.append(("evolve-mps", "anderson_mps",
                anderson + mps_lines(p["anderson_m"], 1, p["anderson_d"])))
    return out


def run(argv):
    start = time.monotonic()
    print("$", " ".join(argv), flush=True)
    subprocess.run(argv, check=True)
    print(f"  done in {time.monotonic() - start:.1f} s", flush=True)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--fast", action="store_true",
                        help="reduced truncations and horizons for a quick run")
    args = parser.parse_args(argv)
    profile = PROFILES["fast" if args.fast else "full"]

    OUT.mkdir(parents=True, exist_ok=True)
    for subcommand, label, lines in jobs(profile):
        config = OUT / f"{label}.cfg"
        config.write_text("\n".join(lines) + "\n")
        run(["thermochain", subcommand, "--config", str(config),
             "--output", str(OUT), "--label", label])

    for spec in sorted(SPECS_DIR.glob("*.json")):
        run(["thermochain-plot", "--spec", str(spec)])
    print(f"figures written under {OUT / 'figures'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
