"""Command-line front end; every command writes one CSV table.

Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from functools import partial

import numpy as np

from . import __version__
from .config import ConfigError, config_hash, derive_intensity_from_omega, read_config
from .envdec import GasSpec, lambda_blackbody, lambda_gas
from .greens import MethodError
from .materials import GOLD_DRUDE, PerfectConductor, Vacuum
from .potentials import TrapLostError, find_equilibrium, potential_breakdown
from .qbm import (MOMENT_COLUMNS, FockState, GaussianState, QBMParams, StabilityError,
                  TruncationError, compare_moments, evolve_fock, evolve_gaussian)
from .quad import QuadratureError
from .spectral import (KernelCutoffError, SpectralMode, coefficients_approx, kernel_coefficients,
                       lambda_metal_nearfield, spectral_density)

log = logging.getLogger("casqbm")

NUMERIC_ERRORS = (QuadratureError, TrapLostError, StabilityError, TruncationError,
                  KernelCutoffError, MethodError, ArithmeticError, RuntimeError, ValueError)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _map(fn, items, jobs):
    """Ordered map, in a process pool when jobs > 1."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- per-point workers (module level so they pickle) -------------------------

def _sweep_point(cfg, mode, z):
    jf = spectral_density(cfg, z, cfg.omega0, mode, part="free")
    js = spectral_density(cfg, z, cfg.omega0, mode, part="scattering")
    co = coefficients_approx(cfg, z, mode)
    return [z, float(cfg.z_tilde(z)), jf, js, jf + js, co.gamma, co.lam]


def _fig2_point(cfg, z):
    pc = replace(cfg, surface=PerfectConductor())
    metal = cfg if cfg.surface.finite and not isinstance(cfg.surface, Vacuum) else replace(cfg, surface=GOLD_DRUDE)
    c_pc = coefficients_approx(pc, z)
    c_m = coefficients_approx(metal, z)
    return c_pc, c_m, lambda_metal_nearfield(metal, z)


def _potential_point(cfg, z):
    b = potential_breakdown(cfg, z)
    return [b.z, float(cfg.z_tilde(z)), b.u_trap, b.u_cp, b.u_dcp, b.u_total]


def _surface_lambda(cfg, z):
    return coefficients_approx(cfg, z).lam


# -- commands ----------------------------------------------------------------

def cmd_spectral_sweep(cfg, args):
    mode = SpectralMode(args.mode)
    rows = _map(partial(_sweep_point, cfg, mode), cfg.distance_grid, args.jobs)
    return ["z", "z_tilde", "J_free", "J_scattering", "J_total", "Gamma", "Lambda"], rows, []


def cmd_fig2(cfg, args):
    free = coefficients_approx(replace(cfg, surface=Vacuum()), cfg.distance_grid[0])
    pts = _map(partial(_fig2_point, cfg), cfg.distance_grid, args.jobs)
    rows = []
    for z, (c_pc, c_m, lam_nf) in zip(cfg.distance_grid, pts):
        rows.append([float(cfg.z_tilde(z)), free.gamma, c_pc.gamma, c_m.gamma,
                     free.lam, c_pc.lam, c_m.lam, lam_nf])
    header = ["z_tilde", "Gamma_free", "Gamma_pc", "Gamma_gold", "Lambda_free", "Lambda_pc",
              "Lambda_gold", "Lambda_gold_nearfield_asymptote"]
    return header, rows, []


def cmd_potential_scan(cfg, args):
    rows = _map(partial(_potential_point, cfg), cfg.distance_grid, args.jobs)
    return ["z", "z_tilde", "u_trap", "u_cp", "u_dcp", "u_total"], rows, []


def cmd_equilibrium(cfg, args):
    s = find_equilibrium(cfg, bracket=tuple(args.bracket) if args.bracket else None,
                         include_cp=not args.no_cp, include_dcp=not args.no_dcp)
    header = ["z0", "omega_tr", "omega_cp", "omega_dcp", "omega_total", "omega_sq_total", "stable"]
    return header, [[s.z0, s.omega_tr, s.omega_cp, s.omega_dcp, s.omega_total,
                     s.omega_sq_total, s.stable]], []


def cmd_evolve(cfg, args):
    omega = args.omega or cfg.drive.trap_frequency
    gamma, lam = args.gamma, args.lam
    if gamma is None or lam is None:
        z = args.z if args.z is not None else (cfg.distance_grid[0] if cfg.distance_grid else None)
        if z is None:
            raise ConfigError("evolve needs --z (or a grid) when --gamma/--lambda are not given")
        co = coefficients_approx(cfg, z)
        gamma = co.gamma if gamma is None else gamma
        lam = co.lam if lam is None else lam
    params = QBMParams(cfg.mass, omega, gamma, lam)
    dt = args.dt if args.dt else 5e-3 / omega
    g = evolve_gaussian(GaussianState.coherent(args.alpha, params), params, dt, args.steps)
    header = ["t", *MOMENT_COLUMNS, "health"]
    rows = [[t, *m, h] for t, m, h in zip(g.t, g.moments, g.health)]
    footer = [f"gamma={_fmt(gamma)}", f"lambda={_fmt(lam)}", f"omega={_fmt(omega)}", f"dt={_fmt(dt)}"]
    if args.oracle:
        f = evolve_fock(FockState.coherent(args.alpha, args.dim), params, dt, args.steps)
        header += [f"fock_{c}" for c in MOMENT_COLUMNS]
        for r, fm in zip(rows, f.moments):
            r.extend(fm)
        dev = max(float(compare_moments(gm, fm, params).max()) for gm, fm in zip(g.moments, f.moments))
        footer.append(f"max_moment_deviation={_fmt(dev)}")
        footer.append(f"min_fock_eigenvalue={_fmt(float(np.nanmin(f.min_eigenvalue)))}")
    return header, rows, footer


def cmd_env_compare(cfg, args):
    zs = list(cfg.distance_grid)
    lam_s = _map(partial(_surface_lambda, cfg), zs, args.jobs)
    ps = list(cfg.gas_pressures)
    ts = list(cfg.blackbody_temperatures)
    lam_g = [lambda_gas(GasSpec(p, cfg.gas_molecule_mass, cfg.temperature), cfg.particle) for p in ps]
    lam_b = [lambda_blackbody(t, cfg.particle) for t in ts]
    rows = []
    for i in range(max(len(zs), len(ps), len(ts))):
        def col(seq, j=i):
            return seq[j] if j < len(seq) else None
        rows.append([col(zs), col([float(cfg.z_tilde(z)) for z in zs]), col(lam_s),
                     col(ps), col(lam_g), col(ts), col(lam_b)])
    header = ["z", "z_tilde", "Lambda_surface", "pressure_pa", "Lambda_gas", "temperature_k", "Lambda_bb"]
    return header, rows, []


def cmd_kernel_check(cfg, args):
    from .constants import HBAR, KB

    cfg = replace(cfg, temperature=args.kernel_temperature if args.kernel_temperature is not None
                  else 0.3 * HBAR * cfg.omega0 / KB)
    z = args.z if args.z is not None else 0.02 / cfg.k0
    mode = SpectralMode(args.spectrum)
    spectral = lambda w: spectral_density(cfg, z, w, mode)  # noqa: E731
    om = args.omega_ratio * cfg.omega0
    r = kernel_coefficients(cfg, z, om, spectral=spectral, periods=args.periods)
    rows = [["Gamma", r.from_kernels.gamma, r.from_sidebands.gamma,
             abs(r.from_kernels.gamma / r.from_sidebands.gamma - 1.0)],
            ["Lambda", r.from_kernels.lam, r.from_sidebands.lam,
             abs(r.from_kernels.lam / r.from_sidebands.lam - 1.0)]]
    footer = [f"omega_trap={_fmt(om)}", f"tau_max={_fmt(r.tau_max)}", f"temperature={_fmt(cfg.temperature)}",
              f"z={_fmt(z)}", f"spectrum={mode.value}"]
    return ["quantity", "from_kernels", "from_sidebands", "rel_diff"], rows, footer


COMMANDS = {
    "spectral-sweep": cmd_spectral_sweep,
    "fig2": cmd_fig2,
    "potential-scan": cmd_potential_scan,
    "equilibrium": cmd_equilibrium,
    "evolve": cmd_evolve,
    "env-compare": cmd_env_compare,
    "kernel-check": cmd_kernel_check,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="TOML config file, or 'default' for the bundled parameters")
    common.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    common.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted-key override, e.g. drive.intensity=5e8 (repeatable)")
    common.add_argument("--derive-intensity-from-omega", action="store_true",
                        help="back-solve the drive intensity from drive.trap_frequency")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for grid sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="casqbm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("spectral-sweep", parents=[common], help="J, Gamma, Lambda over the z grid")
    s.add_argument("--mode", default="approx", choices=["approx", "full"])
    sub.add_parser("fig2", parents=[common], help="dissipation/decoherence vs distance, free/PC/metal")
    sub.add_parser("potential-scan", parents=[common], help="trap, CP and DCP potentials over the grid")
    s = sub.add_parser("equilibrium", parents=[common], help="equilibrium position and trap frequencies")
    s.add_argument("--bracket", nargs=2, type=float, metavar=("LO", "HI"))
    s.add_argument("--no-cp", action="store_true")
    s.add_argument("--no-dcp", action="store_true")
    s = sub.add_parser("evolve", parents=[common], help="Gaussian-moment evolution")
    s.add_argument("--gamma", type=float, help="dissipation rate (1/s); default from config at --z")
    s.add_argument("--lambda", dest="lam", type=float, help="localization Lambda (Hz/m^2)")
    s.add_argument("--omega", type=float, help="trap frequency (rad/s); default drive.trap_frequency")
    s.add_argument("--z", type=float, help="distance (m) used to compute Gamma/Lambda")
    s.add_argument("--dt", type=float, help="time step (s); default 5e-3/omega")
    s.add_argument("--steps", type=int, default=2000)
    s.add_argument("--alpha", type=complex, default=1.0, help="initial coherent amplitude")
    s.add_argument("--oracle", action="store_true", help="also run the Fock-basis oracle")
    s.add_argument("--dim", type=int, default=60, help="Fock dimension for --oracle")
    sub.add_parser("env-compare", parents=[common], help="surface vs gas vs blackbody localization")
    s = sub.add_parser("kernel-check", parents=[common], help="kernel time integrals vs sideband coefficients")
    s.add_argument("--omega-ratio", type=float, default=0.25, help="test Omega as a fraction of omega0")
    s.add_argument("--kernel-temperature", type=float, help="bath temperature (K); default 0.3*hbar*omega0/kB")
    s.add_argument("--periods", type=float, default=1000.0, help="time window in units of 1/omega0")
    s.add_argument("--spectrum", default="closed_form_metal_nearfield",
                   choices=["closed_form_free", "closed_form_metal_nearfield"])
    s.add_argument("--z", type=float, help="distance (m) for the metal spectrum; default z~ = 0.02")
    return p


def _write(out, cmd, cfg, header, rows, footer):
    buf = io.StringIO()
    buf.write(f"# casqbm {__version__} command={cmd} config_hash={config_hash(cfg)}\r\n")
    w = csv.writer(buf)
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    for line in footer:
        buf.write(f"# {line}\r\n")
    text = buf.getvalue()
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.captureWarnings(True)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = read_config(args.config, args.override)
        if args.derive_intensity_from_omega:
            cfg = derive_intensity_from_omega(cfg)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
    except (ConfigError, FileNotFoundError) as exc:
        print(f"casqbm: usage error: {exc}", file=sys.stderr)
        return 2
    try:
        header, rows, footer = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"casqbm: usage error: {exc}", file=sys.stderr)
        return 2
    except NUMERIC_ERRORS as exc:
        print(f"casqbm [{type(exc).__module__}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _write(args.out, args.command, cfg, header, rows, footer)
    return 0


if __name__ == "__main__":
    sys.exit(main())
