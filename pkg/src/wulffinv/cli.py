"""Command-line front end.

Subcommands:

    spectrum    curve -> moment coefficients + positivity diagnostics
    solve       curve -> optimal anisotropy (sigma.json, result.json)
    geometry    sigma.json -> wulff.csv / frank.csv / sigma.csv for plotting
    sweep       curve -> sweep.csv + orders.json over a mode-count list
    relax-demo  tiny instances showing why the augmentation is needed

Outputs are deterministic: identical inputs and flags produce byte-identical
files (floats are written in shortest round-trip form, no timestamps).
Exit codes: 0 success, 2 input error, 3 geometry error, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import (
    convergence_sweep,
    experimental_order,
    sobolev_growth_report,
    write_sweep_csv,
)
from .anisotropy import (
    AnisotropyFn,
    OutOfConeError,
    anisotropy_strength,
    evaluate,
    evaluate_stiffness,
    frank_boundary,
    wulff_boundary,
)
from .curve import (
    BUILTIN_NAMES,
    CurveError,
    GeometryError,
    builtin_curve,
    length_spectrum,
    read_curve_file,
    series_estimate_gap,
    toeplitz_min_eigenvalue,
)
from .relaxation import (
    ExtractionError,
    QcqpProblem,
    assemble_wulff_qcqp,
    enhance,
    solve_inverse_wulff,
)
from .sdp import IpmOptions, SolverFailureError, solve as sdp_solve

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GEOMETRY = 3
EXIT_SOLVER = 4

GEOMETRY_SAMPLES = 1024


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation: one input source, mode counts, solver knobs."""

    command: str
    input_path: str | None
    builtin: str | None
    params: tuple
    samples: int
    modes: int
    modes_list: tuple
    augmentation: str
    tolerance: float
    max_iterations: int
    out_dir: Path
    log_iterations: bool
    sigma_path: str | None

    def ipm_options(self) -> IpmOptions:
        return IpmOptions(
            max_iterations=self.max_iterations,
            gap_tolerance=self.tolerance,
            residual_tolerance=self.tolerance,
        )


def _float(x) -> float:
    return float(x)


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _load_curve(config: RunConfig):
    if config.input_path is not None:
        return read_curve_file(config.input_path)
    return builtin_curve(config.builtin, config.params, config.samples)


def _provenance(config: RunConfig) -> dict:
    return {
        "input": config.input_path,
        "builtin": config.builtin,
        "params": [_float(p) for p in config.params],
        "samples": config.samples,
    }


def cmd_spectrum(config: RunConfig) -> int:
    curve = _load_curve(config)
    spec = length_spectrum(curve, config.modes)
    _write_json(config.out_dir / "spectrum.json", {
        **_provenance(config),
        "c_re": [_float(v) for v in spec.coeffs.real],
        "c_im": [_float(v) for v in spec.coeffs.imag],
        "length": _float(spec.length),
        "area": _float(spec.enclosed_area),
        "K": spec.sample_count,
    })
    toe_ns = list(range(2, config.modes + 1))
    gap_ns = list(range(3, config.modes + 1))
    _write_json(config.out_dir / "diagnostics.json", {
        "toeplitz_Ns": toe_ns,
        "toeplitz_min_eig": [_float(toeplitz_min_eigenvalue(spec, n)) for n in toe_ns],
        "series_gap_Ns": gap_ns,
        "series_gap": [_float(series_estimate_gap(spec, n)) for n in gap_ns],
        "c1_residual": _float(abs(spec.coeffs[1]) / spec.length),
    })
    return EXIT_OK


def cmd_solve(config: RunConfig) -> int:
    curve = _load_curve(config)
    log = sys.stderr if config.log_iterations else None
    try:
        result = solve_inverse_wulff(
            curve, config.modes, options=config.ipm_options(),
            augmentation=config.augmentation, log=log)
    except SolverFailureError as exc:
        failure = {
            **_provenance(config),
            "modes": config.modes,
            "augmentation": config.augmentation,
            "error": str(exc),
        }
        sol = exc.solution
        if sol is not None:
            failure["solver"] = {
                "status": sol.status,
                "iterations": sol.iterations,
                "gap": _float(sol.gap),
                "primal_residual": _float(sol.primal_residual),
                "dual_residual": _float(sol.dual_residual),
            }
        _write_json(config.out_dir / "result.json", failure)
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    d = result.diagnostics
    _write_json(config.out_dir / "sigma.json", result.sigma.to_json_dict())
    _write_json(config.out_dir / "result.json", {
        **_provenance(config),
        "modes": config.modes,
        "augmentation": config.augmentation,
        "ratio": _float(result.ratio),
        "wulff_area": _float(result.wulff_area),
        "strength": _float(anisotropy_strength(result.sigma)),
        "objective": _float(result.objective),
        "length": _float(result.spectrum.length),
        "area": _float(result.spectrum.enclosed_area),
        "diagnostics": {
            "tightness_gap": _float(d.tightness_gap),
            "min_eig_lift": _float(d.min_eig_lift),
            "equality_residual": _float(d.equality_residual),
            "augmentation_residual": _float(d.augmentation_residual),
            "cone_margin": _float(d.cone_margin),
            "renormalization": _float(d.renormalization),
            "constraint_count": d.constraint_count,
            "variable_count": d.variable_count,
        },
        "solver": {
            "status": d.solver_status,
            "iterations": d.iterations,
            "gap": _float(d.gap),
            "primal_residual": _float(d.primal_residual),
            "dual_residual": _float(d.dual_residual),
        },
    })
    return EXIT_OK


def _write_points_csv(path: Path, points: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y\n")
        for x, y in points:
            fh.write(f"{_float(x)!r},{_float(y)!r}\n")


def cmd_geometry(config: RunConfig) -> int:
    try:
        with open(config.sigma_path, "r", encoding="utf-8") as fh:
            sigma = AnisotropyFn.from_json_dict(json.load(fh))
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise CurveError(f"cannot read anisotropy file {config.sigma_path}: {exc}") from None

    _write_points_csv(config.out_dir / "wulff.csv",
                      wulff_boundary(sigma, GEOMETRY_SAMPLES))
    _write_points_csv(config.out_dir / "frank.csv",
                      frank_boundary(sigma, GEOMETRY_SAMPLES))
    nu = 2.0 * np.pi * np.arange(GEOMETRY_SAMPLES) / GEOMETRY_SAMPLES
    vals = evaluate(sigma, nu)
    stiff = evaluate_stiffness(sigma, nu)
    with open(config.out_dir / "sigma.csv", "w", encoding="utf-8") as fh:
        fh.write("nu,sigma,stiffness\n")
        for a, b, c in zip(nu, vals, stiff):
            fh.write(f"{_float(a)!r},{_float(b)!r},{_float(c)!r}\n")
    return EXIT_OK


def cmd_sweep(config: RunConfig) -> int:
    curve = _load_curve(config)
    rows = convergence_sweep(curve, config.modes_list,
                             options=config.ipm_options(),
                             augmentation=config.augmentation)
    with open(config.out_dir / "sweep.csv", "w", encoding="utf-8") as fh:
        write_sweep_csv(rows, fh)

    good = [r for r in rows if r.ok]
    orders: dict = {"failed_rows": [r.modes for r in rows if not r.ok]}
    if len(good) < 2:
        orders["note"] = "need at least 2 successful rows to compute orders"
    else:
        ns = [r.modes for r in good]
        orders["eotc"] = [
            _float(v) for v in experimental_order(
                [max(r.elapsed_seconds, 1e-9) for r in good], ns)
        ]
        excess = [r.ratio - 1.0 for r in good]
        if min(excess) > 1e-5:
            orders["eoc_ratio_excess"] = [_float(v) for v in experimental_order(excess, ns)]
        else:
            orders["eoc_ratio_excess"] = None
            orders["note"] = "ratio already at unity; decay order not applicable"
        orders["eoc_norm2"] = [
            _float(v) for v in experimental_order([r.norms[2] for r in good], ns)
        ]
    _write_json(config.out_dir / "orders.json", orders)
    if len(good) >= 2 or len(good) == len(rows):
        return EXIT_OK
    return EXIT_SOLVER


def cmd_relax_demo(config: RunConfig) -> int:
    """Contrast the augmented relaxation with the plain one.

    The one-variable instance  min -x^2  s.t.  x = 1  relaxes exactly under
    either augmentation; without the extra coupling the relaxation is
    unbounded below and the iteration diverges.
    """
    problem = QcqpProblem(P0=np.array([[-1.0]]), q0=np.zeros(1), r0=0.0,
                          A=np.array([[1.0]]), b=np.array([1.0]))
    report: dict = {"instance": "min -x^2 s.t. x = 1", "expected_objective": -1.0}
    for mode in ("trace", "full"):
        sol = sdp_solve(enhance(problem, mode).form, config.ipm_options())
        report[mode] = {"status": sol.status, "objective": _float(sol.objective),
                        "iterations": sol.iterations}
    plain = enhance(problem, "none")
    try:
        sol = sdp_solve(plain.form, IpmOptions(
            max_iterations=min(config.max_iterations, 60),
            gap_tolerance=config.tolerance,
            residual_tolerance=config.tolerance))
        plain_report = {"status": sol.status, "objective": _float(sol.objective),
                        "iterations": sol.iterations}
    except SolverFailureError as exc:
        sol = exc.solution
        plain_report = {"status": "numerical_failure",
                        "objective": _float(sol.objective) if sol else None,
                        "error": str(exc)}
    plain_report["unbounded_suspected"] = bool(
        plain_report["objective"] is not None and plain_report["objective"] < -1e3)
    report["none"] = plain_report
    _write_json(config.out_dir / "demo.json", report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wulffinv",
        description="Optimal anisotropy functions for planar curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p, required=True):
        grp = p.add_mutually_exclusive_group(required=required)
        grp.add_argument("--input", help="curve file ('x y' lines or JSON [[x,y],...])")
        grp.add_argument("--builtin", choices=BUILTIN_NAMES, help="built-in curve family")
        p.add_argument("--params", default="",
                       help="comma-separated builtin parameters, e.g. 4,1")
        p.add_argument("--samples", type=int, default=1000,
                       help="vertex count for builtin curves")

    def add_common(p):
        p.add_argument("--augmentation", choices=("full", "trace"), default="trace")
        p.add_argument("--tol", type=float, default=1e-8, dest="tolerance")
        p.add_argument("--max-iter", type=int, default=100, dest="max_iterations")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--log-iterations", action="store_true")

    p = sub.add_parser("spectrum", help="moment coefficients and diagnostics")
    add_input(p)
    p.add_argument("--modes", type=int, default=16)
    add_common(p)

    p = sub.add_parser("solve", help="optimal anisotropy for a curve")
    add_input(p)
    p.add_argument("--modes", type=int, default=25)
    add_common(p)

    p = sub.add_parser("geometry", help="boundary traces from a sigma.json")
    p.add_argument("--sigma", required=True, dest="sigma_path",
                   help="anisotropy JSON produced by 'solve'")
    add_common(p)

    p = sub.add_parser("sweep", help="convergence sweep over mode counts")
    add_input(p)
    p.add_argument("--modes-list", required=True,
                   help="comma-separated increasing mode counts, e.g. 10,25,50")
    add_common(p)

    p = sub.add_parser("relax-demo", help="augmented vs plain relaxation demo")
    add_common(p)
    return parser


def _config_from_args(args) -> RunConfig:
    params: tuple = ()
    if getattr(args, "params", ""):
        try:
            params = tuple(float(tok) for tok in args.params.split(",") if tok != "")
        except ValueError:
            raise CurveError(f"cannot parse --params {args.params!r}") from None
    modes_list: tuple = ()
    if getattr(args, "modes_list", None):
        try:
            modes_list = tuple(int(tok) for tok in args.modes_list.split(",") if tok != "")
        except ValueError:
            raise CurveError(f"cannot parse --modes-list {args.modes_list!r}") from None
    modes = int(getattr(args, "modes", 2) or 2)
    if modes < 2:
        raise CurveError("--modes must be at least 2")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return RunConfig(
        command=args.command,
        input_path=getattr(args, "input", None),
        builtin=getattr(args, "builtin", None),
        params=params,
        samples=int(getattr(args, "samples", 1000) or 1000),
        modes=modes,
        modes_list=modes_list,
        augmentation=args.augmentation,
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
        out_dir=out_dir,
        log_iterations=args.log_iterations,
        sigma_path=getattr(args, "sigma_path", None),
    )


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "geometry": cmd_geometry,
    "sweep": cmd_sweep,
    "relax-demo": cmd_relax_demo,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        return _COMMANDS[args.command](config)
    except CurveError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GeometryError, OutOfConeError) as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (SolverFailureError, ExtractionError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
