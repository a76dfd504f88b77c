"""Batch command-line front-end: JSON in, JSON/CSV/SVG out.

Every run writes its outputs plus a manifest (input hash, parameters,
versions, wall time) into the output directory.  With --reproducible and a
fixed --seed, JSON/CSV outputs are byte-identical across runs; figure
timestamps are suppressed.  Exit codes: 0 success (or Accept / found),
1 Reject / not found, 2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, serialize
from .cert import search_certificate, verify_certificate
from .errors import ConfigError, ShearcaseError
from .knot_reps import (
    KnotSpec,
    find_splice_rep,
    knot_group,
    sample_image_curve,
    solve_rep_on_slice,
)
from .pillowcase import CylinderCurve, PillowcasePoint, separates
from .torus_dynamics import (
    build_shearing_program,
    grid_points,
    moser_correct,
    reference_flow,
    torus_distance,
)
from .torus_dynamics.moser import _det_jacobian

TOLERANCE_KEYS = {
    "div_tol": 1e-8,
    "poisson_tol": 1e-9,
    "area_tol": 1e-3,
    "form_floor": 0.1,
    "rep_tol": 1e-9,
    "bump_width": 0.5,
}


def _extract_tol_overrides(argv):
    """Pull --tol.KEY=VAL flags out of argv before argparse sees them."""
    rest, overrides = [], {}
    for arg in argv:
        if arg.startswith("--tol."):
            body = arg[len("--tol."):]
            if "=" not in body:
                raise ConfigError(f"malformed tolerance flag {arg!r}; use --tol.KEY=VAL")
            key, val = body.split("=", 1)
            if key not in TOLERANCE_KEYS:
                raise ConfigError(f"unknown tolerance key {key!r}")
            overrides[key] = float(val)
        else:
            rest.append(arg)
    return rest, overrides


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="shearcase",
        description="certified shearing-map dynamics and knot representation varieties",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, needs_out=True):
        p.add_argument("--input", required=True, help="input JSON document")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--reproducible", action="store_true")

    p = sub.add_parser("approx-isotopy", help="build a certified shearing program")
    common(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--resolution", type=int, default=64, help="working grid size")
    p.add_argument("--samples", type=int, default=21, help="verification time samples")

    p = sub.add_parser("pillowcase-image", help="trace a knot's pillowcase image")
    common(p)
    p.add_argument("--samples", type=int, default=0, help="meridian-angle samples (0 = auto)")
    p.add_argument("--resolution", type=int, default=512, help="separation raster")

    p = sub.add_parser("slice-reps", help="representations on a boundary slice")
    common(p)
    p.add_argument("--samples", type=int, default=0)

    p = sub.add_parser("splice-rep", help="irreducible representation of a splice")
    common(p)

    p = sub.add_parser("verify-cert", help="verify an SL(2,Z/p) certificate")
    common(p)

    p = sub.add_parser("search-cert", help="search for an SL(2,Z/p) certificate")
    common(p)
    p.add_argument("--primes", type=int, nargs="+", required=True)
    p.add_argument("--mode", choices=["auto", "exhaustive", "randomized"], default="auto")
    p.add_argument("--cap", type=int, default=10**7)

    p = sub.add_parser("moser", help="area-correct an isotopy")
    common(p)
    p.add_argument("--resolution", type=int, default=128)
    p.add_argument("--samples", type=int, default=11)

    return parser


# ---------------------------------------------------------------------------
# named analytic isotopies for the moser subcommand

ISOTOPY_SCHEMA = {
    "type": "object",
    "properties": {
        "type": {"enum": ["translation", "shear_flow", "vertical_bump"]},
        "velocity": {"type": "array", "items": {"type": "number"},
                     "minItems": 2, "maxItems": 2},
        "harmonic": {"type": "integer", "minimum": 1},
        "amplitude": {"type": "number"},
        "equivariant": {"type": "boolean"},
    },
    "required": ["type"],
    "additionalProperties": False,
}


def _isotopy_from_json(doc):
    serialize.validate(doc, ISOTOPY_SCHEMA, "isotopy spec")
    kind = doc["type"]
    if kind == "translation":
        vx, vy = doc.get("velocity", (1.0, 0.0))

        def iso(t, pts):
            pts = np.asarray(pts, dtype=float)
            return np.stack([pts[..., 0] + t * vx, pts[..., 1] + t * vy], axis=-1)

        return iso, bool(doc.get("equivariant", False))
    if kind == "shear_flow":
        amp = doc.get("amplitude", 1.0)
        m = doc.get("harmonic", 1)

        def iso(t, pts):
            pts = np.asarray(pts, dtype=float)
            return np.stack([pts[..., 0] + t * amp * np.sin(m * pts[..., 1]),
                             pts[..., 1]], axis=-1)

        return iso, bool(doc.get("equivariant", False))
    amp = doc.get("amplitude", 0.3)

    def iso(t, pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        return np.stack([x, y + amp * t * np.exp(-2 * np.cos(x) ** 2)
                         * (1 + 0.3 * np.sin(y))], axis=-1)

    return iso, bool(doc.get("equivariant", False))


# ---------------------------------------------------------------------------
# subcommand bodies

def _run_approx_isotopy(args, tols, outdir):
    doc = serialize.read_json(args.input)
    field = serialize.time_field_from_json(doc, grid_n=args.resolution)
    program, certificate = build_shearing_program(field, args.eps)

    times = np.linspace(0.0, 1.0, args.samples)
    grid = grid_points(args.resolution).reshape(-1, 2)
    reference = reference_flow(field, times, grid)
    realized = program.evaluate_at_times(times, grid)
    deviations = [float(np.max(torus_distance(reference[i], realized[i])))
                  for i in range(len(times))]

    serialize.write_json(outdir / "program.json", serialize.program_to_json(program))
    serialize.write_json(outdir / "certificate.json", certificate.to_dict())
    serialize.write_csv(outdir / "deviation.csv", ["t", "sup_deviation"],
                        list(zip(times, deviations)))
    from .render import draw_deviation_curve
    draw_deviation_curve(times, deviations, certificate.total,
                         outdir / "deviation.svg", args.reproducible)
    ok = max(deviations) <= certificate.total
    return 0 if ok else 1, {
        "certificate_total": certificate.total,
        "max_deviation": max(deviations),
        "steps": len(program),
        "deviation_within_certificate": ok,
    }


def _run_pillowcase_image(args, tols, outdir):
    doc = serialize.read_json(args.input)
    spec = serialize.knot_spec_from_json(doc)
    rng = np.random.default_rng(args.seed)
    image = sample_image_curve(spec, n_samples=args.samples or None, rng=rng,
                               rep_tol=tols["rep_tol"])

    rows = []
    for idx, arc in enumerate(image.arcs):
        for alpha, beta in arc.vertices:
            rows.append((idx, alpha, beta))
    serialize.write_csv(outdir / "arcs.csv", ["arc", "alpha", "beta"], rows)
    serialize.write_csv(outdir / "reducible.csv", ["alpha", "beta"],
                        [tuple(v) for v in image.reducible_line.vertices])

    graph = image.graph()
    from .render import draw_pillowcase_graph
    draw_pillowcase_graph(graph, outdir / "image.svg", title=spec.name(),
                          reproducible=args.reproducible)

    p_pt = PillowcasePoint(0.0, math.pi)
    q_pt = PillowcasePoint(math.pi, math.pi)
    info = {
        "arcs": len(image.arcs),
        "gaps": list(image.gaps),
        "separates_at_resolution": separates(graph, p_pt, q_pt, args.resolution),
        "separates_at_double": separates(graph, p_pt, q_pt, 2 * args.resolution),
    }
    return 0, info


def _run_slice_reps(args, tols, outdir):
    doc = serialize.read_json(args.input)
    spec = serialize.knot_spec_from_json(doc["knot"])
    beta = float(doc.get("slice_beta", math.pi))
    alphas = np.linspace(0.0, math.pi, 64)
    slice_curve = CylinderCurve(np.stack([alphas, np.full_like(alphas, beta)], axis=-1))
    rng = np.random.default_rng(args.seed)
    witnesses = solve_rep_on_slice(spec, slice_curve, rep_tol=tols["rep_tol"], rng=rng)
    serialize.write_json(outdir / "witnesses.json", {
        "knot": spec.name(),
        "slice_beta": beta,
        "count": len(witnesses),
        "witnesses": [serialize.rep_assignment_to_json(w) for w in witnesses],
    })
    return 0, {"count": len(witnesses)}


def _run_splice_rep(args, tols, outdir):
    doc = serialize.read_json(args.input)
    spec_a = serialize.knot_spec_from_json(doc["first"])
    spec_b = serialize.knot_spec_from_json(doc["second"])
    rng = np.random.default_rng(args.seed)
    assignment, pres = find_splice_rep(spec_a, spec_b, rng=rng, rep_tol=tols["rep_tol"])
    serialize.write_json(outdir / "assignment.json", {
        "first": spec_a.name(),
        "second": spec_b.name(),
        "presentation": {"generators": pres.generators,
                         "relators": [list(r) for r in pres.relators]},
        "assignment": serialize.rep_assignment_to_json(assignment),
    })
    return 0, {"residual": assignment.residual,
               "irreducible": assignment.is_irreducible()}


def _run_verify_cert(args, tols, outdir):
    doc = serialize.read_json(args.input)
    pres = serialize.presentation_from_json(doc["presentation"])
    cert = serialize.certificate_from_json(doc["certificate"])
    result = verify_certificate(pres, cert)
    payload = {
        "accepted": result.accepted,
        "reason": result.reason,
        "relator_length": result.relator_length,
    }
    if not args.reproducible:
        payload["runtime_seconds"] = result.runtime_seconds
    serialize.write_json(outdir / "verdict.json", payload)
    return (0 if result.accepted else 1), payload


def _run_search_cert(args, tols, outdir):
    doc = serialize.read_json(args.input)
    pres = serialize.presentation_from_json(doc["presentation"])
    rng = np.random.default_rng(args.seed)
    report = search_certificate(pres, args.primes, mode=args.mode, rng=rng,
                                exhaustive_cap=args.cap, randomized_cap=args.cap)
    payload = {
        "found": report.certificate is not None,
        "mode": report.mode,
        "assignments_tried": report.assignments_tried,
        "primes": list(report.primes_tried),
    }
    if report.certificate is not None:
        serialize.write_json(outdir / "certificate.json",
                             serialize.certificate_to_json(report.certificate))
        check = verify_certificate(pres, report.certificate)
        payload["verified"] = check.accepted
    serialize.write_json(outdir / "search.json", payload)
    return (0 if report.certificate is not None else 1), payload


def _run_moser(args, tols, outdir):
    doc = serialize.read_json(args.input)
    isotopy, equivariant = _isotopy_from_json(doc)
    result = moser_correct(isotopy, grid_m=args.resolution, time_samples=args.samples,
                           bump_width=tols["bump_width"],
                           form_floor=tols["form_floor"],
                           poisson_tol=tols["poisson_tol"],
                           equivariant=equivariant)
    serialize.write_json(outdir / "metrics.json", {
        "grid_m": result.grid_m,
        "times": list(result.times),
        "max_area_defect": result.metrics["max_area_defect"],
        "max_curve_hausdorff": result.metrics["max_curve_hausdorff"],
        "poisson_residuals": [s.poisson_residual for s in result.states],
    })
    grid = grid_points(min(args.resolution, 96))
    defect = np.abs(_det_jacobian(lambda pts: result.psi(1.0, pts), grid, h=1e-4) - 1.0)
    from .render import draw_area_defect
    draw_area_defect(defect, outdir / "area_defect.svg", reproducible=args.reproducible)
    ok = result.metrics["max_area_defect"] <= tols["area_tol"]
    return 0 if ok else 1, dict(result.metrics)


_RUNNERS = {
    "approx-isotopy": _run_approx_isotopy,
    "pillowcase-image": _run_pillowcase_image,
    "slice-reps": _run_slice_reps,
    "splice-rep": _run_splice_rep,
    "verify-cert": _run_verify_cert,
    "search-cert": _run_search_cert,
    "moser": _run_moser,
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv, tol_overrides = _extract_tol_overrides(argv)
        parser = _build_parser()
        args = parser.parse_args(argv)
        tols = {**TOLERANCE_KEYS, **tol_overrides}

        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)

        start = time.perf_counter()
        code, summary = _RUNNERS[args.subcommand](args, tols, outdir)
        wall = time.perf_counter() - start

        manifest = {
            "subcommand": args.subcommand,
            "input": str(args.input),
            "input_sha256": serialize.sha256_of_file(args.input),
            "parameters": {
                k: v for k, v in sorted(vars(args).items())
                if k not in ("subcommand",) and v is not None
            },
            "tolerances": dict(sorted(tols.items())),
            "versions": {
                "shearcase": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
            },
            "summary": summary,
            "exit_code": code,
        }
        if not args.reproducible:
            manifest["wall_time_seconds"] = wall
        serialize.write_json(outdir / "manifest.json", manifest)
        print(f"{args.subcommand}: exit {code}; outputs in {outdir}")
        return code
    except (ConfigError, ShearcaseError, OSError, KeyError, ValueError) as exc:
        sys.stderr.write(serialize.dumps({
            "error": type(exc).__name__,
            "message": str(exc),
        }))
        return 2


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
