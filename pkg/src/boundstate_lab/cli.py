"""Command-line driver: ``boundstate-lab <subcommand> [options]``.

Every subcommand prints a JSON report (stable key order) to stdout or to
``--out``; array data goes to CSV sidecars.  Exit codes: 0 success,
2 validation error, 3 numerical tolerance failure.
"""

import argparse
import csv
import json
import logging
import sys
import warnings

import numpy as np

from . import __version__
from .errors import BoundstateLabError, ToleranceFailure, ValidationError

log = logging.getLogger("boundstate_lab")

EXIT_OK, EXIT_VALIDATION, EXIT_TOLERANCE = 0, 2, 3

# key -> (type, lower, upper, default); flat ``key = value`` config files
CONFIG_SCHEMA = {
    "model.m1": (float, 1e-6, 1e12, 1.0),
    "model.m2": (float, 1e-6, float("inf"), float("inf")),
    "grid.r_min": (float, 1e-12, 1.0, 1e-5),
    "grid.r_max": (float, 1.0, 1e5, 200.0),
    "grid.n_points": (int, 10, 200000, 4000),
    "basis.e_max": (float, 1.0, 1e6, 100.0),
    "lattice.sites": (int, 4, 16, 12),
    "lattice.depth": (float, 0.1, 1e4, 8.0),
    "lattice.separation": (int, 1, 16, 4),
    "lattice.repulsion": (float, 0.0, 1e4, 1.0),
    "wick.products": (int, 1, 100000, 200),
    "wick.sites": (int, 2, 6, 4),
    "levels.tolerance": (float, 0.0, 1.0, 1e-4),
}


def parse_config(text):
    """Parse flat ``key = value`` lines (``#`` comments); validate against the schema."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = _coerce(key, value)
    return out


def _coerce(key, value):
    if key not in CONFIG_SCHEMA:
        known = ", ".join(sorted(CONFIG_SCHEMA))
        raise ValidationError(f"unknown config key {key!r}; known keys: {known}")
    typ, lo, hi, _ = CONFIG_SCHEMA[key]
    try:
        v = float(value)
    except ValueError:
        raise ValidationError(f"{key}: cannot read {value!r} as a number") from None
    if typ is int:
        if not v.is_integer():
            raise ValidationError(f"{key} must be an integer, got {value!r}")
        v = int(v)
    if not lo <= v <= hi:
        raise ValidationError(f"{key} = {v} outside the allowed range [{lo}, {hi}]")
    return v


class RunConfig(dict):
    """Schema defaults, then the config file, then ``--set`` overrides."""

    @classmethod
    def load(cls, path=None, overrides=()):
        cfg = cls({k: spec[3] for k, spec in CONFIG_SCHEMA.items()})
        if path:
            with open(path) as fh:
                cfg.update(parse_config(fh.read()))
        for item in overrides:
            if "=" not in item:
                raise ValidationError(f"--set expects key=value, got {item!r}")
            k, v = item.split("=", 1)
            cfg[k.strip()] = _coerce(k.strip(), v.strip())
        return cfg

    def model(self):
        from .atoms import AtomModel

        return AtomModel(m1=self["model.m1"], m2=self["model.m2"])

    def grid(self):
        from .atoms import RadialGrid

        return RadialGrid(self["grid.r_min"], self["grid.r_max"], self["grid.n_points"])


# --------------------------------------------------------------------------
# output helpers


def _json_default(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _emit(report, args):
    text = json.dumps(report, sort_keys=True, indent=2, default=_json_default)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def _cplx(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _vector(text, name):
    try:
        v = [float(s) for s in text.split(",")]
    except ValueError:
        raise ValidationError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if len(v) != 3:
        raise ValidationError(f"{name}: expected three components")
    return np.array(v)


_POLS = {"x": [1, 0, 0], "y": [0, 1, 0], "z": [0, 0, 1]}


def _polarization(text):
    if text in _POLS:
        return np.array(_POLS[text], dtype=complex)
    return _vector(text, "polarization").astype(complex)


def _state(cfg, label, m=0):
    from .atoms import hydrogenic_state

    return hydrogenic_state(cfg.model(), label, m)


# --------------------------------------------------------------------------
# subcommands


def cmd_levels(args, cfg):
    from .atoms import solve_hydrogenic
    from .units import hartree_to_ev

    model = cfg.model()
    states = solve_hydrogenic(model, args.nmax, args.lmax, mode=args.mode, grid=cfg.grid(),
                              tolerance=cfg["levels.tolerance"])
    rows, out = [], []
    for s in states:
        rows.append((s.n, s.l, s.m, s.energy))
        if s.m == 0:
            exact = model.energy(s.n)
            out.append({"n": s.n, "l": s.l, "energy_Ha": s.energy, "energy_eV": hartree_to_ev(s.energy),
                        "relative_deviation": abs(s.energy - exact) / abs(exact)})
    if args.csv:
        _write_csv(args.csv, ["n", "l", "m", "energy_Ha"], rows)
    return {"subcommand": "levels", "mode": args.mode, "states": out,
            "reference": "bound-state energies of the relative Coulomb problem"}


def cmd_dipole(args, cfg):
    from .atoms import dipole_matrix, solve_hydrogenic

    model = cfg.model()
    states = solve_hydrogenic(model, args.nmax)
    rows, out = [], []
    for a in states:
        for b in states:
            d = dipole_matrix(a, b, model)
            if not np.any(d):
                continue
            rows.append((a.label, b.label, *d.real, *d.imag))
            out.append({"a": a.label, "b": b.label, "d": [_cplx(x) for x in d]})
    if args.csv:
        _write_csv(args.csv, ["a", "b", "dx", "dy", "dz", "dx_im", "dy_im", "dz_im"], rows)
    return {"subcommand": "dipole", "elements": out, "reference": "dipole matrix elements between bound states"}


def cmd_emit(args, cfg):
    from .processes import emission_rate, sphere_rule

    model = cfg.model()
    ini, fin = _state(cfg, args.initial, args.m), _state(cfg, args.final)
    res = emission_rate(ini, fin, model, mass_mode=args.mass_mode, form=args.form)
    if args.csv:
        dirs, _ = sphere_rule(8, 16)
        rows = []
        for n in dirs:
            theta, phi = np.arccos(np.clip(n[2], -1, 1)), np.arctan2(n[1], n[0])
            rows.append((theta, phi, res.differential(n)))
        _write_csv(args.csv, ["theta", "phi", "dw_dOmega_au"], rows)
    return {"subcommand": "emit", "initial": res.initial, "final": res.final, "form": res.form,
            "omega_au": res.omega, "rate_au": res.total_rate, "rate_per_s": res.rate_per_s,
            "reference": "one-photon spontaneous emission rate"}


def cmd_photon_scatter(args, cfg):
    from .processes import photon_scattering, pseudo_spectrum, total_cross_section
    from .units import area_au_to_m2

    model = cfg.model()
    ini, fin = _state(cfg, args.initial), _state(cfg, args.final)
    basis = pseudo_spectrum(model, (0, 1, 2), cfg.grid(), cfg["basis.e_max"])
    e_in, e_out = _polarization(args.pol_in), _polarization(args.pol_out)
    k = photon_scattering(ini, fin, args.omega, (e_in, e_out), model, basis, i_epsilon=args.i_epsilon)
    out = {"subcommand": "photon-scatter", "initial": ini.label, "final": fin.label,
           "omega_au": k.omega, "omega_prime_au": k.omega_prime, "R": _cplx(k.R),
           "R_dipole": _cplx(k.R_dipole), "Rprime": _cplx(k.Rprime), "Q": _cplx(k.Q), "Q_sum": _cplx(k.Q_sum),
           "cross_section_au": k.cross_section, "regularized": k.regularized,
           "reference": "second-order photon scattering amplitude"}
    if ini.label == fin.label and args.total:
        sig = total_cross_section(ini, args.omega, e_in, model, basis)
        out["total_cross_section_au"] = sig
        out["total_cross_section_m2"] = area_au_to_m2(sig)
    return out


def cmd_escatter(args, cfg):
    from .processes import electron_atom_amplitude, electron_atom_amplitude_exact

    model = cfg.model()
    ini, fin = _state(cfg, args.initial), _state(cfg, args.final, args.m)
    q = _vector(args.q, "--q")
    out = {"subcommand": "escatter", "initial": ini.label, "final": fin.label, "q": q.tolist(),
           "amplitude": _cplx(electron_atom_amplitude(ini, fin, q, model)),
           "reference": "first Born amplitude for electron-composite scattering"}
    if args.exact:
        out["amplitude_exact"] = _cplx(electron_atom_amplitude_exact(ini, fin, q, model))
    return out


def cmd_vdw(args, cfg):
    from .atoms import solve_hydrogenic
    from .processes import pseudo_spectrum
    from .vdw import effective_potential, second_order_energy

    model = cfg.model()
    labels = [s.strip() for s in args.pair.split(",")]
    if len(labels) != 2 or labels[0] != labels[1]:
        raise ValidationError("--pair expects two equal labels such as 1s,1s")
    alpha = _state(cfg, labels[0])
    if args.nmax:
        basis = solve_hydrogenic(model, args.nmax, min(args.nmax - 1, 2))
    else:
        basis = pseudo_spectrum(model, (0, 1, 2) if args.order == 2 else (0, 1), cfg.grid(), cfg["basis.e_max"])
    r_lo, r_hi, n_r = args.r_min, args.r_max, args.n_r
    pot = effective_potential(alpha, basis, model, np.geomspace(r_lo, r_hi, n_r), order=args.order)
    ref = second_order_energy(alpha, alpha, pot.R[0], model, basis, args.order, check=False)
    if args.csv:
        _write_csv(args.csv, ["R_bohr", "V_Ha", "R6V"], zip(pot.R, pot.V, pot.R6V))
    return {"subcommand": "vdw", "pair": labels, "basis": f"n<={args.nmax}" if args.nmax else "pseudo-spectrum",
            "order": args.order, "R_grid": pot.R, "E2": pot.V, "C6": pot.C6,
            "channels": ref.channel_contributions[:10], "channel_R": float(pot.R[0]),
            "reference": "second-order atom-atom interaction, dispersion coefficient"}


def cmd_fock_verify(args, cfg):
    from .acceptance import _lattice
    from .fockspace import (
        AuxiliarySpace,
        effective_vs_exact,
        enumerate_basis,
        exact_space_for,
        galilean_boost_check,
        tilde_anticommutators,
        verify_orthonormality,
    )

    L, a = cfg["lattice.sites"], cfg["lattice.separation"]
    config, sp = _lattice(L, cfg["lattice.depth"], a, cfg["lattice.repulsion"])
    checks = []
    space = enumerate_basis(config, 2, 2)
    rep = verify_orthonormality(space, sp, [("psi1", 0, None), ("phi", a, 0)])
    checks.append({k: rep[k] for k in ("check_name", "max_deviation", "bound", "pass")})
    for kind, sector in (("composite", {"kind": "composite"}), ("fermion1", {"kind": "fermion1", "X": 0}),
                         ("fermion2", {"kind": "fermion2", "X": 0}),
                         ("composite_pair", {"kind": "composite_pair", "X": 0, "Z": L // 2}),
                         ("decay", {"kind": "decay"})):
        rep = effective_vs_exact(exact_space_for(config, kind), sp, sector)
        checks.append({k: rep[k] for k in ("check_name", "max_deviation", "bound", "pass")})
    aux = AuxiliarySpace(config, sp, tuple(s.label for s in sp.bound), 1, 1, 1)
    dev = float(tilde_anticommutators(aux))
    checks.append({"check_name": "tilde_anticommutators", "max_deviation": dev, "bound": 1e-12, "pass": dev <= 1e-12})
    v = 2 * np.pi / L
    rep = galilean_boost_check(aux, v)
    checks.append({"check_name": "galilean_boost", "max_deviation": rep["max_deviation"], "bound": 1e-10,
                   "pass": rep["max_deviation"] <= 1e-10})
    return {"subcommand": "fock-verify", "sites": L, "depth": cfg["lattice.depth"], "separation_a": a,
            "r0": sp.r0, "bound_energies": sp.energies.tolist() if hasattr(sp.energies, "tolist") else sp.energies,
            "checks": checks, "pass": all(c["pass"] for c in checks),
            "reference": "composite operators, tilde mapping and the effective Hamiltonian"}


def _bindings(text, name):
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise ValidationError(f"{name}: expected var=value pairs, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = int(v)
    return out


def cmd_wick_check(args, cfg):
    from .acceptance import _lattice
    from .wick import enumerate_contractions, evaluate_vev, parse_product

    product = parse_product(args.product)
    diagrams = enumerate_contractions(product)
    out = {"subcommand": "wick-check", "product": " ".join(str(o) for o in product),
           "diagrams": len(diagrams),
           "list": [{"pairings": [list(p) for p in d.pairings], "sign": d.sign, "kernel": d.kernel,
                     "suppressed": d.suppressed} for d in diagrams],
           "reference": "Wick expansion of mixed elementary and composite products"}
    if args.positions:
        config, sp = _lattice(cfg["wick.sites"], cfg["lattice.depth"], 2, cfg["lattice.repulsion"])
        val = evaluate_vev(product, _bindings(args.positions, "--positions"), sp, config,
                           _bindings(args.labels, "--labels"), diagrams=diagrams)
        out["vev"] = _cplx(val.value)
    return out


def cmd_verify_all(args, cfg):
    from .acceptance import run_all

    only = None if not args.only else [int(s) for s in args.only.split(",")]
    overrides = {1: {"n_points": cfg["grid.n_points"], "r_max": cfg["grid.r_max"]},
                 8: {"n_products": cfg["wick.products"]}}
    results = run_all(only, overrides)
    for r in results:
        print(r.line, file=sys.stderr)
    return {"subcommand": "verify-all", "checks": [r.to_dict() for r in results],
            "pass": all(r.passed for r in results)}


# --------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="boundstate-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value configuration file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("levels", parents=[common], help="bound-state energies")
    s.add_argument("--nmax", type=int, default=5)
    s.add_argument("--lmax", type=int, default=2)
    s.add_argument("--mode", choices=("grid", "analytic"), default="grid")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_levels)

    s = sub.add_parser("dipole", parents=[common], help="dipole matrix elements")
    s.add_argument("--nmax", type=int, default=3)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_dipole)

    s = sub.add_parser("emit", parents=[common], help="spontaneous emission rate")
    s.add_argument("--from", dest="initial", required=True)
    s.add_argument("--to", dest="final", required=True)
    s.add_argument("--m", type=int, default=0, help="magnetic quantum number of the initial state")
    s.add_argument("--form", choices=("dipole", "full"), default="dipole")
    s.add_argument("--mass-mode", choices=("infinite", "finite"), default="infinite")
    s.add_argument("--csv", help="per-angle differential rate")
    s.set_defaults(func=cmd_emit)

    s = sub.add_parser("photon-scatter", parents=[common], help="photon-atom scattering amplitude")
    s.add_argument("--initial", default="1s")
    s.add_argument("--final", default="1s")
    s.add_argument("--omega", type=float, required=True)
    s.add_argument("--pol-in", default="x")
    s.add_argument("--pol-out", default="x")
    s.add_argument("--i-epsilon", type=float, default=None)
    s.add_argument("--total", action="store_true", help="also integrate the elastic cross section")
    s.set_defaults(func=cmd_photon_scatter)

    s = sub.add_parser("escatter", parents=[common], help="electron-atom Born amplitude")
    s.add_argument("--initial", default="1s")
    s.add_argument("--final", default="2p")
    s.add_argument("--m", type=int, default=0)
    s.add_argument("--q", required=True, help="momentum transfer qx,qy,qz")
    s.add_argument("--exact", action="store_true", help="also evaluate the full form-factor amplitude")
    s.set_defaults(func=cmd_escatter)

    s = sub.add_parser("vdw", parents=[common], help="van der Waals interaction")
    s.add_argument("--pair", default="1s,1s")
    s.add_argument("--nmax", type=int, default=0, help="discrete basis n <= nmax (default: pseudo-spectrum)")
    s.add_argument("--order", type=int, choices=(1, 2), default=1)
    s.add_argument("--r-min", type=float, default=10.0)
    s.add_argument("--r-max", type=float, default=100.0)
    s.add_argument("--n-r", type=int, default=25)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_vdw)

    s = sub.add_parser("fock-verify", parents=[common], help="lattice Fock-space checks")
    s.set_defaults(func=cmd_fock_verify)

    s = sub.add_parser("wick-check", parents=[common], help="Wick contractions of a product")
    s.add_argument("product", help="e.g. 'psi1(x) psi2+(y) phi[a](z)'")
    s.add_argument("--positions", help="x=0,y=1,...")
    s.add_argument("--labels", help="a=0,...")
    s.set_defaults(func=cmd_wick_check)

    s = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.add_argument("--json", action="store_true", help="JSON report (the default output format)")
    s.set_defaults(func=cmd_verify_all)
    return p


def run(argv=None):
    """Parse ``argv``, run the subcommand, return (exit code, report)."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = RunConfig.load(args.config, args.set)
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore")
            report = args.func(args, cfg)
    except ToleranceFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE, None
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION, None
    except BoundstateLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE, None
    _emit(report, args)
    code = EXIT_OK
    if report.get("pass") is False:
        code = EXIT_TOLERANCE
    return code, report


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
