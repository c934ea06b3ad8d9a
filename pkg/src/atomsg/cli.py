"""Command-line entry point.

Exit codes: 0 success, 2 usage, 3 numerical convergence / tolerance failure,
4 stability guard.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from atomsg import __version__
from atomsg.composite import (
    ParticleSet,
    decompose,
    kappa_params,
    nucleus_masses,
    recompose,
    reduced_masses,
)
from atomsg.core import AtomSpec, closed_shell_Z, shells_for
from atomsg.errors import AtomsgError, ConvergenceError, DomainError
from atomsg.interaction import beta, closed_form_profile, linear_fit
from atomsg.io import RunManifest, dumps_json, write_csv, write_json, write_state
from atomsg.oracle import (
    DEFAULT_DIRECTION,
    McConfig,
    QuadratureConfig,
    cross_validate,
    mc_oracle,
    radial_oracle_detailed,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_STABILITY = 0, 2, 3, 4


class UsageError(AtomsgError):
    exit_code = EXIT_USAGE


def parse_range(text: str) -> np.ndarray:
    """``min:max:count`` with inclusive endpoints."""
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected min:max:count") from None
    if count < 2:
        raise UsageError("a range needs at least 2 points")
    if hi <= lo or lo < 0:
        raise UsageError("range must satisfy 0 <= min < max")
    return np.linspace(lo, hi, count)


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}") from None


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- beta ---------------------------------------------------------------------------


def cmd_beta(args) -> int:
    if args.z_list is not None:
        zs = parse_int_list(args.z_list)
    else:
        zs = [closed_shell_Z(n) for n in range(2, args.closed_shells + 1)]
    if not zs:
        raise UsageError("empty Z list")
    try:
        results = [beta(z, spin_doubling=args.spin_doubling) for z in zs]
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    out = _outdir(args)
    man = RunManifest("beta", {"Z": zs, "spin_doubling": args.spin_doubling}, __version__)
    rows = [(r.Z, r.beta_over_k, r.beta_exact.numerator, r.beta_exact.denominator) for r in results]
    man.add(write_csv(out / "beta.csv", ("Z", "beta_over_k", "numerator", "denominator"), rows))
    vals = [r.beta_over_k for r in results]
    if len(zs) >= 2:
        fit = linear_fit(zs, vals)
        fit_rec = {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared}
    else:
        fit_rec = {"slope": None, "intercept": None, "r_squared": None}
    man.add(write_json(out / "beta_fit.json", {"Z": zs, "beta_over_k": vals, **fit_rec}))
    if len(zs) >= 2:
        from atomsg.plotting import plot_beta

        man.add(plot_beta(zs, vals, fit_rec["slope"], fit_rec["intercept"], out / "fig1.svg"))
    man.write(out)
    print(dumps_json(fit_rec), end="")
    return EXIT_OK


# -- potential ----------------------------------------------------------------------

SOURCE_ALIASES = {"closed": "closed-form", "quad": "radial-quadrature", "mc": "monte-carlo"}


def cmd_potential(args) -> int:
    omega = parse_range(args.omega)
    sources = [s.strip() for s in args.sources.split(",") if s.strip()]
    bad = [s for s in sources if s not in SOURCE_ALIASES]
    if not sources or bad:
        raise UsageError(f"sources must be drawn from {sorted(SOURCE_ALIASES)}")
    try:
        shells = shells_for(args.Z)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    out = _outdir(args)
    man = RunManifest("potential", {"Z": args.Z, "omega": args.omega, "sources": sources,
                                    "samples": args.samples, "seed": args.seed}, __version__,
                      seeds=[args.seed] if "mc" in sources else [])
    columns = {}
    stderr = None
    failed = False
    if "closed" in sources:
        columns["closed"] = closed_form_profile(args.Z, omega, shells).values
    if "quad" in sources:
        vals, flags = [], []
        for w in omega:
            try:
                vals.append(radial_oracle_detailed(args.Z, shells, w).value)
                flags.append(False)
            except ConvergenceError as exc:
                vals.append(exc.estimate if exc.estimate is not None else math.nan)
                flags.append(True)
                failed = True
        columns["quad"] = np.array(vals)
        columns["quad_unconverged"] = flags
    if "mc" in sources:
        mc = McConfig(sample_count=args.samples, seed=args.seed)
        ests = [mc_oracle(args.Z, shells, w * DEFAULT_DIRECTION, mc) for w in omega]
        columns["mc"] = np.array([e.value for e in ests])
        stderr = np.array([e.stderr for e in ests])

    for src in sources:
        header = ["omega", "value", "source"] + (["stderr"] if src == "mc" else [])
        rows = []
        for i, w in enumerate(omega):
            row = [w, columns[src][i], SOURCE_ALIASES[src]]
            if src == "mc":
                row.append(stderr[i])
            if src == "quad" and columns["quad_unconverged"][i]:
                row[2] += " (unconverged)"
            rows.append(row)
        man.add(write_csv(out / f"potential_{src}.csv", header, rows))

    summary = {"Z": args.Z, "points": len(omega), "sources": sources, "unconverged": failed}
    present = [s for s in ("closed", "quad", "mc") if s in sources]
    if len(present) >= 2:
        ref = present[0]
        header = ["omega"] + present + [f"rel_dev_{s}" for s in present[1:]]
        rows = []
        for i, w in enumerate(omega):
            r = [w] + [columns[s][i] for s in present]
            r += [abs(columns[s][i] - columns[ref][i]) / abs(columns[ref][i]) for s in present[1:]]
            rows.append(r)
        man.add(write_csv(out / "potential_compare.csv", header, rows))
        for s in present[1:]:
            dev = np.abs(columns[s] - columns[ref]) / np.abs(columns[ref])
            summary[f"max_rel_dev_{s}"] = float(np.nanmax(dev))
    man.add(write_json(out / "potential_summary.json", summary))
    from atomsg.plotting import plot_profiles

    man.add(plot_profiles(omega, {SOURCE_ALIASES[s]: columns[s] for s in present}, out / "potential.svg", args.Z))
    man.write(out)
    print(dumps_json(summary), end="")
    if failed:
        print("error: radial quadrature did not converge at some points (flagged)", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# -- oracle -------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    omega = parse_range(args.omega)
    try:
        shells = shells_for(args.Z)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    mc = McConfig(sample_count=args.samples, seed=args.seed) if args.mc_points > 0 else None
    idx = None
    if mc is not None:
        k = min(args.mc_points, len(omega))
        idx = sorted({round(i * (len(omega) - 1) / max(k - 1, 1)) for i in range(k)})
    qc = QuadratureConfig(method=args.method)
    rep = cross_validate(args.Z, shells, omega, qc=qc, mc=mc, mc_indices=idx, tolerance=args.tolerance)
    out = _outdir(args)
    man = RunManifest("oracle", {"Z": args.Z, "omega": args.omega, "mc_points": args.mc_points,
                                 "samples": args.samples, "seed": args.seed, "method": args.method,
                                 "tolerance": rep.tolerance}, __version__, seeds=[args.seed])
    man.add(write_csv(out / "oracle.csv", ("omega", "closed", "quad", "mc", "mc_stderr", "rel_dev"), rep.rows))
    summary = {"Z": args.Z, "max_rel_dev": rep.max_rel_dev, "tolerance": rep.tolerance,
               "mc_max_abs_z": rep.mc_max_z, "passed": rep.passed}
    man.add(write_json(out / "oracle_summary.json", summary))
    from atomsg.plotting import plot_deviation

    man.add(plot_deviation(omega, np.array([r.rel_dev for r in rep.rows]), out / "oracle.svg"))
    man.write(out)
    print(dumps_json(summary), end="")
    return EXIT_OK if rep.passed else EXIT_NUMERIC


# -- kappa / masses -----------------------------------------------------------------


def _atom(args) -> AtomSpec:
    if args.A < args.Z:
        raise UsageError(f"A must be >= Z (got Z={args.Z}, A={args.A})")
    try:
        return AtomSpec(args.Z, args.A)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def cmd_kappa(args) -> int:
    atom = _atom(args)
    rec = {"Z": atom.Z, "A": atom.A}
    code = EXIT_OK
    try:
        rec.update(kappa_params(atom).as_dict())
    except DomainError:
        rec["error"] = "no relative system: A < 2"
        code = EXIT_USAGE
    text = dumps_json(rec)
    if args.out:
        write_json(Path(args.out), rec)
    print(text, end="")
    return code


def cmd_masses(args) -> int:
    atom = _atom(args)
    m = nucleus_masses(atom)
    rec = {"Z": atom.Z, "A": atom.A, "M_nucleus": m.M_nucleus, "mu_reduced": m.mu_reduced,
           "M_atom": m.M_atom, "degenerate": m.degenerate}
    print(dumps_json(rec), end="")
    return EXIT_OK


# -- simulate -----------------------------------------------------------------------


def cmd_simulate(args) -> int:
    from atomsg.plotting import plot_metrics
    from atomsg.simconfig import config_to_mapping, load_config
    from atomsg.simulator import METRIC_COLUMNS, decoherence_metrics, evolve, recurrence_probe

    cfg = load_config(args.config)
    out = _outdir(args)
    man = RunManifest("simulate", {"config": str(args.config), **config_to_mapping(cfg)}, __version__)
    traj = evolve(cfg)
    series = decoherence_metrics(traj)
    man.add(write_csv(out / "metrics.csv", METRIC_COLUMNS, series.rows()))
    rec = recurrence_probe(series, threshold=args.revival_threshold)
    summary = {
        "steps": cfg.n_steps,
        "snapshots": len(traj.snapshots),
        "final_purity": float(series.purity[-1]),
        "final_branch_overlap": float(series.branch_overlap[-1]),
        "min_branch_overlap": float(series.branch_overlap.min()),
        "max_norm_drift": float(np.max(np.abs(series.norm - 1.0))),
        "final_separation": float(series.separation[-1]),
        "recurrence": {"revived": rec.revived, "revival_time": rec.revival_time,
                       "revival_amplitude": rec.revival_amplitude, "threshold": rec.threshold},
    }
    man.add(write_json(out / "summary.json", summary))
    if cfg.dump_states:
        for i, snap in enumerate(traj.snapshots):
            man.add(write_state(out / "states" / f"state_{i:05d}.atsg", snap.amplitudes))
    man.add(plot_metrics(series, out / "metrics.svg"))
    man.write(out)
    print(dumps_json(summary), end="")
    return EXIT_OK


# -- transforms self-test -----------------------------------------------------------


def cmd_transforms_selftest(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst_round, worst_shift, worst_mu = 0.0, 0.0, 0.0
    for trial in range(args.trials):
        n = int(rng.integers(2, 21))
        ps = ParticleSet(rng.normal(size=(n, 3)), rng.uniform(0.5, 5.0, size=n))
        for scheme in ("star", "chain"):
            d = decompose(ps, scheme)
            worst_round = max(worst_round, float(np.max(np.abs(recompose(d) - ps.positions))))
            shift = rng.normal(size=3)
            d2 = decompose(ParticleSet(ps.positions + shift, ps.masses), scheme)
            worst_shift = max(worst_shift, float(np.max(np.abs(d2.R_cm - d.R_cm - shift))),
                              float(np.max(np.abs(d2.rel_coords - d.rel_coords))))
        mu = reduced_masses(ps.masses)
        M = ps.masses.sum()
        inv = 1 / ps.masses[1:] + 1 / (M - ps.masses[1:])
        worst_mu = max(worst_mu, float(np.max(np.abs(1 / mu - inv) * mu)))
    tol = 1e-12
    rec = {"trials": args.trials, "seed": args.seed, "max_roundtrip_error": worst_round,
           "max_translation_error": worst_shift, "max_reduced_mass_rel_error": worst_mu,
           "tolerance": tol, "passed": max(worst_round, worst_shift, worst_mu) <= tol}
    print(dumps_json(rec), end="")
    return EXIT_OK if rec["passed"] else EXIT_NUMERIC


# -- parser -------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="atomsg", description="Electron-mediated CM-R coupling of closed-shell atoms and a reduced Stern-Gerlach simulator.")
    p.add_argument("--version", action="version", version=f"atomsg {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("beta", help="large-separation coefficient beta(Z) for closed shells")
    g = b.add_mutually_exclusive_group(required=True)
    g.add_argument("--closed-shells", type=int, metavar="NMAX", help="use n_max = 2..NMAX")
    g.add_argument("--z-list", metavar="Z1,Z2,...")
    b.add_argument("--spin-doubling", action="store_true")
    b.add_argument("--out", default="out/beta")
    b.set_defaults(func=cmd_beta)

    pot = sub.add_parser("potential", help="tabulate V(Omega) from one or more sources")
    pot.add_argument("--Z", type=int, required=True)
    pot.add_argument("--omega", default="0:20:200", metavar="MIN:MAX:COUNT")
    pot.add_argument("--sources", default="closed", help="comma list of closed,quad,mc")
    pot.add_argument("--samples", type=int, default=100_000)
    pot.add_argument("--seed", type=int, default=20080101)
    pot.add_argument("--out", default="out/potential")
    pot.set_defaults(func=cmd_potential)

    o = sub.add_parser("oracle", help="cross-validate closed form against quadrature and Monte Carlo")
    o.add_argument("--Z", type=int, required=True)
    o.add_argument("--omega", default="0:50:20", metavar="MIN:MAX:COUNT")
    o.add_argument("--mc-points", type=int, default=0)
    o.add_argument("--samples", type=int, default=1_000_000)
    o.add_argument("--seed", type=int, default=20080101)
    o.add_argument("--method", choices=("adaptive", "gauss"), default="adaptive")
    o.add_argument("--tolerance", type=float, default=None)
    o.add_argument("--out", default="out/oracle")
    o.set_defaults(func=cmd_oracle)

    for name, func, helptext in (("kappa", cmd_kappa, "adiabaticity mass ratios"),
                                 ("masses", cmd_masses, "nuclear and atomic masses")):
        k = sub.add_parser(name, help=helptext)
        k.add_argument("--Z", type=int, required=True)
        k.add_argument("--A", type=int, required=True)
        if name == "kappa":
            k.add_argument("--out", default=None, help="also write the record to this JSON file")
        k.set_defaults(func=func)

    s = sub.add_parser("simulate", help="run the reduced Stern-Gerlach simulator")
    s.add_argument("config", type=Path)
    s.add_argument("--out", default="out/simulate")
    s.add_argument("--revival-threshold", type=float, default=1e-3)
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("transforms-selftest", help="round-trip checks of the CM/relative transforms")
    t.add_argument("--trials", type=int, default=200)
    t.add_argument("--seed", type=int, default=7)
    t.set_defaults(func=cmd_transforms_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AtomsgError as exc:
        key = getattr(exc, "key", None)
        where = f" [{key}]" if key else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
