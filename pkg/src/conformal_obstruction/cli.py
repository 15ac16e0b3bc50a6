"""Command-line entry point.

Exit codes: 0 pass, 1 identity violated (or certificate found by ``certify``),
2 input or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import report as rp
from .certify import DEFAULT_TOL, N_DIRECTIONS, Certificate, certify_search, verify_certificate
from .dirac1d import (
    DiracError,
    Domain1D,
    SpinStructure,
    green_residual,
    random_bandlimited,
    verify_identity,
)
from .immersions import DegenerateImmersionError, ImmersionFamily, InadmissibleProfileError
from .mesh.cmcf import FlowDegenerationError, FlowNotConvergedError, conformal_spherical_map
from .mesh.ddg import ZeroAreaError, discrete_mean_curvature
from .mesh.residual import FlippedTriangleError, mesh_obstruction_residual, sample_family_mesh
from .mesh.trimesh import MeshError, load_obj
from .pohozaev import (
    BlowUpError,
    InconsistentIdentityError,
    RadialError,
    RadialProblem,
    StepUnderflowError,
    shoot,
    verify_pohozaev,
)
from .profiles import ProfileError
from .sphere import (
    FIELD_NAMES,
    NonPositiveWeightError,
    QuadratureBudgetError,
    build_quadrature,
    named_field,
    obstruction_residual,
    parse_scalar_field,
)

log = logging.getLogger("conformal_obstruction")

PASS, VIOLATION, INPUT_ERROR, NUMERICAL_FAILURE = 0, 1, 2, 3

DEFAULT_TOLERANCES = {
    "verify-sphere": 1e-7,
    "verify-mesh": 5e-2,
    "verify-dirac1d": 1e-10,
    "verify-pohozaev": 1e-6,
    "certify": DEFAULT_TOL,
}

NUMERICAL_ERRORS = (
    FlowNotConvergedError,
    FlowDegenerationError,
    FlippedTriangleError,
    ZeroAreaError,
    StepUnderflowError,
    BlowUpError,
    InconsistentIdentityError,
    QuadratureBudgetError,
    NonPositiveWeightError,
    DegenerateImmersionError,
    FloatingPointError,
)
INPUT_ERRORS = (MeshError, ProfileError, DiracError, RadialError, InadmissibleProfileError, KeyError, ValueError)

_OUTPUT_KEYS = {"json", "csv", "config", "vertex_csv", "command", "verbose"}


class ConfigError(ValueError):
    pass


# parameters ----------------------------------------------------------------


def _fields(spec: str) -> list[str]:
    names = FIELD_NAMES if spec == "all" else [s.strip() for s in spec.split(",")]
    for n in names:
        named_field(n)
    return names


def _params(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _OUTPUT_KEYS and v is not None}


def _tolerance(args) -> float:
    return args.tol if args.tol is not None else DEFAULT_TOLERANCES.get(args.command, 1e-8)


# checks --------------------------------------------------------------------


def run_sphere(args) -> dict:
    fam = ImmersionFamily.parse(args.family, args.mobius)
    q = build_quadrature(2, args.degree)
    H, w = fam.H_field(), fam.w_field()
    tol = _tolerance(args)
    terms = {}
    for name in _fields(args.field):
        terms[name] = obstruction_residual(H, w, named_field(name), q).to_dict()
    worst = max(terms.values(), key=lambda t: abs(t["relative"]))
    return rp.make_report(
        "verify-sphere", _params(args), terms,
        max(abs(t["value"]) for t in terms.values()), abs(worst["relative"]), tol,
        all(abs(t["relative"]) <= tol for t in terms.values()),
        {"quadrature_degree": args.degree, "nodes": len(q)},
        {"immersion": fam.descriptor()},
    )


def _mesh_and_param(args):
    if args.input:
        mesh = load_obj(args.input)
        param = conformal_spherical_map(mesh, steps=args.steps, dt=args.dt)
        return mesh, param, {"parametrization": "cmcf", "flow_steps": param.steps, "qc_distortion": param.distortion}
    fam = ImmersionFamily.parse(args.family, args.mobius)
    mesh, param = sample_family_mesh(fam, args.subdivision)
    info = {"parametrization": args.param, "subdivision": args.subdivision}
    if args.param == "cmcf":
        param = conformal_spherical_map(mesh, steps=args.steps, dt=args.dt)
        info.update(flow_steps=param.steps, qc_distortion=param.distortion)
    return mesh, param, info


def run_mesh(args) -> tuple[dict, str | None]:
    mesh, param, info = _mesh_and_param(args)
    H = discrete_mean_curvature(mesh)
    tol = _tolerance(args)
    terms = {name: mesh_obstruction_residual(mesh, param, named_field(name), H).to_dict() for name in _fields(args.field)}
    worst = max(terms.values(), key=lambda t: abs(t["relative"]))
    info.update(vertices=mesh.n_vertices, faces=mesh.n_faces, area=float(mesh.face_areas().sum()))
    rep = rp.make_report(
        "verify-mesh", _params(args), terms,
        max(abs(t["value"]) for t in terms.values()), abs(worst["relative"]), tol,
        all(abs(t["relative"]) <= tol for t in terms.values()),
        info,
        {"H_min": float(H.min()), "H_max": float(H.max())},
    )
    return rep, rp.vertex_csv(mesh.vertices, H)


def _spin(args):
    return SpinStructure(args.spin) if args.domain.startswith("circle") else None


def run_dirac(args) -> dict:
    dom = Domain1D.parse(args.domain, args.N)
    ident = verify_identity(dom, args.H, args.p, args.X, spin=_spin(args), rho=args.rho, k=args.k)
    tol = _tolerance(args)
    terms = dict(ident.terms)
    passed = ident.relative <= tol
    if args.green_pairs:
        rng = np.random.default_rng(args.seed)
        g = max(
            abs(green_residual(random_bandlimited(dom, rng, spin=_spin(args)), random_bandlimited(dom, rng, spin=_spin(args))))
            for _ in range(args.green_pairs)
        )
        terms["green_max"] = g
        passed = passed and g <= tol
    return rp.make_report(
        "verify-dirac1d", _params(args), terms, ident.residual, ident.relative, tol, passed,
        ident.discretization, ident.extra,
    )


def run_pohozaev(args) -> dict:
    prob = RadialProblem(args.n, args.p, args.alpha)
    sol = shoot(prob, r_max=args.rmax, step=args.step)
    tol = _tolerance(args)
    disc = {"mode": sol.mode, "step": sol.step, "nodes": len(sol.r), "backend": sol.backend, "rmax": args.rmax}
    checks = {"energy_monotone": sol.energy_monotone(), "decreasing": sol.decreasing()}
    if sol.first_zero is None:
        supercritical = prob.p >= prob.critical_exponent
        if not supercritical:
            raise StepUnderflowError(
                f"no first zero up to r = {args.rmax:g} although p < 2n/(n-2); increase --rmax"
            )
        terms = {"first_zero": None, "u_at_rmax": float(sol.u[-1]), "coefficient": prob.coefficient, **checks}
        return rp.make_report(
            "verify-pohozaev", _params(args), terms, None, None, tol, all(checks.values()), disc,
            {"note": f"no first zero found up to r = {args.rmax:g}; consistent with nonexistence for p >= 2n/(n-2) (evidence, not proof)"},
        )
    ident = verify_pohozaev(sol)
    terms = {**ident.terms, **checks}
    return rp.make_report(
        "verify-pohozaev", _params(args), terms, ident.residual, ident.relative, tol,
        ident.relative <= tol and all(checks.values()), disc, ident.extra,
    )


def run_certify(args) -> dict:
    H = parse_scalar_field(args.H)
    q = build_quadrature(2, args.degree)
    tol = _tolerance(args)
    out = certify_search(H, q, tol=tol, n_directions=args.directions)
    terms = out.to_dict()
    valid = False
    if isinstance(out, Certificate):
        lo, integral = verify_certificate(H, out)
        terms["recheck"] = {"degree": 2 * args.degree, "min_value": lo, "integral": integral}
        valid = lo >= -tol and integral > 0
    return rp.make_report(
        "certify", _params(args), terms, None, None, tol, valid,
        {"quadrature_degree": args.degree, "nodes": len(q)},
    )


# sweeps --------------------------------------------------------------------

SWEEP_DEFAULTS = {
    "dirac": [256, 512, 1024, 2048],
    "mesh": [3, 4, 5, 6],
    "sphere": [16, 32, 64, 128, 256],
    "pohozaev": [0.1, 0.05, 0.025, 0.0125],
}


def run_sweep(args) -> dict:
    values = [float(v) for v in args.values.split(",")] if args.values else SWEEP_DEFAULTS[args.kind]
    tol = args.tol
    cells = []
    summary = {}
    if args.kind == "dirac":
        dom = Domain1D.parse(args.domain, 16)
        tol = 1e-10 if tol is None else tol
        for N in values:
            ident = verify_identity(dom.with_N(int(N)), args.H, args.p, args.X, spin=_spin(args))
            cells.append({"N": int(N), "residual": ident.residual, "relative_residual": ident.relative,
                          "pass": ident.relative <= tol})
        r0, r1 = cells[0]["relative_residual"], cells[-1]["relative_residual"]
        summary["decay_ok"] = r1 <= max(r0 * (values[0] / values[-1]) ** 4, 1e-13)
    elif args.kind == "mesh":
        fam = ImmersionFamily.parse(args.family, args.mobius)
        tol = 5e-2 if tol is None else tol
        X = named_field(args.field)
        for level in values:
            mesh, param = sample_family_mesh(fam, int(level))
            r = mesh_obstruction_residual(mesh, param, X)
            cells.append({"subdivision": int(level), "residual": r.value, "relative_residual": r.relative,
                          "pass": abs(r.relative) <= tol})
        ratios = [
            abs(b["residual"]) / abs(a["residual"]) for a, b in zip(cells, cells[1:]) if a["residual"] != 0
        ]
        for c, ratio in zip(cells[1:], ratios):
            c["contraction"] = ratio
        summary["mean_contraction"] = float(np.mean(ratios)) if ratios else 0.0
        summary["contraction_ok"] = summary["mean_contraction"] <= 0.7
    elif args.kind == "sphere":
        fam = ImmersionFamily.parse(args.family, args.mobius)
        tol = 1e-7 if tol is None else tol
        H, w, X = fam.H_field(), fam.w_field(), named_field(args.field)
        for deg in values:
            r = obstruction_residual(H, w, X, build_quadrature(2, int(deg)))
            cells.append({"degree": int(deg), "residual": r.value, "relative_residual": r.relative,
                          "pass": abs(r.relative) <= tol})
    else:
        prob = RadialProblem(args.n, args.p, args.alpha)
        tol = 1e-6 if tol is None else tol
        for h in values:
            ident = verify_pohozaev(shoot(prob, r_max=args.rmax, step=h))
            cells.append({"step": h, "residual": ident.residual, "relative_residual": ident.relative,
                          "R": ident.terms["R"], "pass": ident.relative <= tol})
    passed = all(c["pass"] for c in cells) and all(v for k, v in summary.items() if k.endswith("_ok"))
    worst = max(abs(c["relative_residual"]) for c in cells)
    return rp.make_report(
        "sweep", _params(args), {"cells": cells, **summary},
        max(abs(c["residual"]) for c in cells), worst, tol, passed, {"kind": args.kind, "values": values},
    )


# argument parsing ----------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", metavar="PATH", help="write the JSON report here (default: stdout)")
    p.add_argument("--csv", metavar="PATH", help="write the flat CSV projection here")
    p.add_argument("--tol", type=float, help="tolerance override")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    p.add_argument("--config", metavar="TOML", help="TOML file of defaults; flags win")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="conformal-obstruction", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify-sphere", parents=[common], help="analytic obstruction integral on S^2")
    s.add_argument("--family", default="round:1", help="round:R | revolution:EPS | ellipsoid:a,b,c")
    s.add_argument("--mobius", help="Mobius translation z -> z + b given as RE,IM")
    s.add_argument("--field", default="all", help=f"comma list from {FIELD_NAMES} or 'all'")
    s.add_argument("--degree", type=int, default=128)

    m = sub.add_parser("verify-mesh", parents=[common], help="discrete obstruction integral on a mesh")
    src = m.add_mutually_exclusive_group()
    src.add_argument("--input", help="genus-0 OBJ mesh")
    src.add_argument("--family", help="sample an analytic family on an icosphere")
    m.add_argument("--mobius")
    m.add_argument("--subdivision", type=int, default=5)
    m.add_argument("--param", choices=["exact", "cmcf"], default="exact")
    m.add_argument("--field", default="grad-x3")
    m.add_argument("--steps", type=int, default=1000)
    m.add_argument("--dt", type=float, default=1e-2)
    m.add_argument("--vertex-csv", metavar="PATH", help="per-vertex H dump")

    d = sub.add_parser("verify-dirac1d", parents=[common], help="four-term identity in dimension one")
    d.add_argument("--domain", default="circle:6.283185307179586")
    d.add_argument("--spin", choices=[s.value for s in SpinStructure], default="periodic")
    d.add_argument("--H", default="1+0.5*sin")
    d.add_argument("--X", default="1+0.3*cos")
    d.add_argument("--p", type=float, default=3.0)
    d.add_argument("--N", type=int, default=2048)
    d.add_argument("--rho", type=float)
    d.add_argument("--k", type=int)
    d.add_argument("--green-pairs", type=int, default=0, help="also test integration by parts on random pairs")

    pz = sub.add_parser("verify-pohozaev", parents=[common], help="radial Pohozaev identity")
    pz.add_argument("--n", type=int, default=3)
    pz.add_argument("--p", type=float, default=4.0)
    pz.add_argument("--alpha", type=float, default=1.0)
    pz.add_argument("--rmax", type=float, default=1e3)
    pz.add_argument("--step", type=float, help="fixed step (default adaptive)")

    c = sub.add_parser("certify", parents=[common], help="search for an obstruction certificate")
    c.add_argument("--H", required=False, default="x3-plus-c:0")
    c.add_argument("--degree", type=int, default=64)
    c.add_argument("--directions", type=int, default=N_DIRECTIONS)

    sw = sub.add_parser("sweep", parents=[common], help="convergence sweep, one CSV row per cell")
    sw.add_argument("--kind", choices=sorted(SWEEP_DEFAULTS), required=False, default="sphere")
    sw.add_argument("--values", help="comma-separated grid (N, subdivision, degree or step)")
    sw.add_argument("--family", default="revolution:0.3")
    sw.add_argument("--mobius")
    sw.add_argument("--field", default="grad-x3")
    sw.add_argument("--domain", default="circle:6.283185307179586")
    sw.add_argument("--spin", choices=[s.value for s in SpinStructure], default="periodic")
    sw.add_argument("--H", default="1+0.5*sin")
    sw.add_argument("--X", default="1+0.3*cos")
    sw.add_argument("--p", type=float, default=3.0)
    sw.add_argument("--n", type=int, default=3)
    sw.add_argument("--alpha", type=float, default=1.0)
    sw.add_argument("--rmax", type=float, default=1e3)
    return parser


def _load_config(path: str, command: str) -> dict:
    try:
        import tomllib  # type: ignore[import-not-found]
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        data = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    flat = {k: v for k, v in data.items() if not isinstance(v, dict)}
    flat.update(data.get(command, {}))
    return {k.replace("-", "_"): v for k, v in flat.items()}


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        cfg = _load_config(args.config, args.command)
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {unknown}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    if args.command == "verify-mesh" and not (args.input or args.family):
        raise ConfigError("verify-mesh needs --input or --family")
    return args


RUNNERS = {
    "verify-sphere": run_sphere,
    "verify-dirac1d": run_dirac,
    "verify-pohozaev": run_pohozaev,
    "certify": run_certify,
    "sweep": run_sweep,
}


def run(args) -> tuple[int, dict]:
    vertex_dump = None
    if args.command == "verify-mesh":
        rep, vertex_dump = run_mesh(args)
    else:
        rep = RUNNERS[args.command](args)
    text = rp.dumps(rep)
    if args.json:
        rp.write_text(args.json, text)
    else:
        sys.stdout.write(text)
    if args.csv:
        rows = rep["terms"]["cells"] if args.command == "sweep" else [rep]
        rp.write_text(args.csv, rp.to_csv(rows))
    if vertex_dump is not None and getattr(args, "vertex_csv", None):
        rp.write_text(args.vertex_csv, vertex_dump)
    if args.command == "certify":
        return (VIOLATION if rep["pass"] else PASS), rep
    return (PASS if rep["pass"] else VIOLATION), rep


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return INPUT_ERROR if exc.code else PASS
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        return INPUT_ERROR
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        code, rep = run(args)
    except NUMERICAL_ERRORS as exc:
        log.error("numerical failure: %s", exc)
        return NUMERICAL_FAILURE
    except INPUT_ERRORS as exc:
        log.error("input error: %s", exc)
        return INPUT_ERROR
    status = "PASS" if rep["pass"] else "FAIL"
    if args.command == "certify":
        status = "CERTIFICATE" if rep["pass"] else "NONE-FOUND"
    print(f"{args.command}: {status} (relative residual {rep['relative_residual']})", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
