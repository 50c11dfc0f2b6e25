"""Scenario-driven command line front end.

Subcommands dispatch to the library: ``evolve`` integrates the evolution
problem on a grid, ``check`` verifies the semicocycle axioms, ``linearize``
runs the series pipeline, ``spectrum`` reports the resonance condition,
``growth`` produces a logarithmic-norm growth report (JSON + CSV),
``extract`` recovers the generator from sampled evolution data, and
``demo`` reproduces a packaged worked example against its expectations.

Scenario files are JSON; complex numbers are ``[re, im]`` pairs and
matrices are row-major nested arrays.  Exit status: 0 on success, 1 when a
verification check fails, 2 on input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .algebra import operator_norm
from .cocycle import (
    CocycleGenerator,
    boundedness_classify,
    check_axioms,
    evolve_grid,
    extract_generator_auto,
    growth_report,
    make_evolve_oracle,
)
from .demos import demo_by_name, demo_catalog
from .dynamics import RationalMap, build_boundary_model, build_model
from .errors import CocycleLabError, NoInteriorFixedPointError, ScenarioParseError
from .linearize import (
    commutative_linearize_nofix,
    condition_check,
    linearize as run_linearize,
    reconstruct_error,
)


def _as_complex(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ScenarioParseError(f"expected a number or [re, im] pair, got {value!r}")


def _complex_list(values) -> np.ndarray:
    return np.asarray([_as_complex(v) for v in values], dtype=complex)


def _as_matrix(rows, n: int) -> np.ndarray:
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ScenarioParseError(f"matrix rows do not form an {n}x{n} array")
    return np.asarray([[_as_complex(x) for x in row] for row in rows], dtype=complex)


class Scenario:
    """Parsed problem description: semigroup, generator, grid, tolerances."""

    def __init__(self, data: dict):
        try:
            sg = data["semigroup"]
            self.f = RationalMap(
                _complex_list(sg["f_num"]), _complex_list(sg.get("f_den", [1.0]))
            )
            self.hint = _as_complex(sg.get("fixed_point_hint", 0.0))
            self.boundary = bool(sg.get("boundary", False))

            gen = data["generator"]
            self.dim = int(gen["dim"])
            num = np.stack(
                [_as_matrix(rows, self.dim) for rows in gen["num_coeffs"]]
            )
            den = _complex_list(gen.get("den_coeffs", [1.0]))
            if abs(den[0]) == 0.0 or abs(self.f.den[0]) == 0.0:
                raise ScenarioParseError("a denominator vanishes at z = 0")
            self.generator = CocycleGenerator(num, den)

            self.order = int(data.get("truncation_order", 24))
            grid = data.get("grid", {})
            self.t_values = [float(t) for t in grid.get("t_values", [0.5, 1.0, 2.0])]
            if "z_values" in grid:
                self.z_values = _complex_list(grid["z_values"])
            else:
                radius = float(grid.get("disk_radius", 0.4))
                nodes = int(grid.get("nodes", 8))
                angles = 2.0 * np.pi * np.arange(nodes) / nodes
                self.z_values = radius * np.exp(1j * angles)
            tols = data.get("tolerances", {})
            self.ode_tol = float(tols.get("ode", 1e-11))
            self.sylvester_tol = float(tols.get("sylvester", 1e-10))
            self.resonance_tol = float(tols.get("resonance", 1e-8))
        except ScenarioParseError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioParseError(f"bad scenario field: {exc}") from exc

    def model(self, order=None):
        if self.boundary:
            return build_boundary_model(self.f)
        try:
            return build_model(self.f, hint=self.hint, order=order or self.order)
        except NoInteriorFixedPointError:
            return build_boundary_model(self.f)


def _load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioParseError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioParseError("scenario root must be a JSON object")
    return Scenario(data)


def _emit(report: dict, out_path) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _matrix_nested(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m)]


def _cmd_evolve(scn: Scenario, args) -> tuple[dict, int]:
    model = scn.model()
    ts = sorted(scn.t_values)
    vals = evolve_grid(model, scn.generator, ts, scn.z_values, tol=scn.ode_tol)
    samples = []
    for i, t in enumerate(ts):
        for j, z in enumerate(scn.z_values):
            samples.append(
                {
                    "t": t,
                    "z": [z.real, z.imag],
                    "gamma": _matrix_nested(vals[i, j]),
                    "gamma_norm": operator_norm(vals[i, j]),
                }
            )
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "z_re", "z_im", "gamma_norm"])
            for s in samples:
                writer.writerow([s["t"], s["z"][0], s["z"][1], s["gamma_norm"]])
    return {"command": "evolve", "samples": samples}, 0


def _cmd_check(scn: Scenario, args) -> tuple[dict, int]:
    model = scn.model()
    gamma = make_evolve_oracle(model, scn.generator, tol=scn.ode_tol)
    report = check_axioms(
        model, gamma, scn.t_values, scn.z_values, tol=args.tol or 1e-7
    )
    return {"command": "check", **report.as_dict()}, 0 if report.passed else 1


def _cmd_linearize(scn: Scenario, args) -> tuple[dict, int]:
    model = scn.model(order=args.order or scn.order)
    outcome = run_linearize(
        model,
        scn.generator,
        order=args.order or scn.order,
        sylvester_tol=scn.sylvester_tol,
        resonance_rtol=scn.resonance_tol,
    )
    return {"command": "linearize", **outcome.as_dict()}, 0


def _cmd_spectrum(scn: Scenario, args) -> tuple[dict, int]:
    model = scn.model()
    if not model.is_interior:
        raise ScenarioParseError("spectrum needs an interior fixed point")
    b0 = scn.generator(model.z0)
    report = condition_check(
        b0, model.rate, resonance_rtol=scn.resonance_tol
    )
    return {"command": "spectrum", **report.as_dict()}, 0


def _cmd_growth(scn: Scenario, args) -> tuple[dict, int]:
    model = scn.model()
    radius = args.radius if args.radius is not None else 0.5
    tmax = args.tmax if args.tmax is not None else 3.0
    ts = [t for t in (0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0) if t <= tmax] or [tmax]
    report = growth_report(
        model, scn.generator, radius, t_values=ts, ode_tol=scn.ode_tol
    )
    if args.csv:
        report.write_csv(args.csv)
    tol = args.tol or 1e-9
    status = 0 if report.max_violation <= tol else 1
    return {"command": "growth", **report.as_dict()}, status


def _cmd_extract(scn: Scenario, args) -> tuple[dict, int]:
    model = scn.model()
    gamma = make_evolve_oracle(model, scn.generator, tol=scn.ode_tol)
    tol = args.tol or 1e-6
    rows = []
    worst = 0.0
    for z in scn.z_values:
        recovered = extract_generator_auto(gamma, scn.f, complex(z))
        reference = scn.generator(complex(z))
        err = operator_norm(recovered - reference)
        worst = max(worst, err)
        rows.append(
            {
                "z": [z.real, z.imag],
                "generator": _matrix_nested(recovered),
                "error_vs_scenario": err,
            }
        )
    status = 0 if worst <= tol else 1
    return {"command": "extract", "points": rows, "max_error": worst}, status


def run_demo(name: str, *, order: int = 24, ode_tol: float = 1e-11) -> tuple[dict, bool]:
    """Run one packaged demo end-to-end against its expectations.

    Returns the report dict and an overall pass flag.  Shared checks: the
    evolution solver must match the closed-form oracle, and the chain rule
    must hold on a sample grid.  Entry-specific expectations (growth rate,
    linearization status, obstruction order, transfer maps) follow.
    """
    entry = demo_by_name(name)
    model = entry.model(order=order)
    checks = []

    def record(label, passed, detail):
        checks.append({"check": label, "passed": bool(passed), "detail": detail})

    ts = list(entry.sample_t)
    zs = np.asarray(entry.sample_z, dtype=complex)
    if entry.oracle is not None:
        vals = evolve_grid(model, entry.generator, ts, zs, tol=ode_tol)
        err = max(
            operator_norm(vals[i, j] - entry.oracle(t, complex(z)))
            for i, t in enumerate(ts)
            for j, z in enumerate(zs)
        )
        record("evolve_matches_oracle", err <= 2e-8, f"max deviation {err:.3e}")

        axioms = check_axioms(model, entry.oracle, [0.4, 0.9], zs, tol=1e-7)
        record("axioms", axioms.passed, axioms.as_dict())

    exp = entry.expected
    if "k_mu" in exp:
        rep = growth_report(
            model,
            entry.generator,
            exp["k_mu"]["radius"],
            gamma=entry.oracle,
            ode_tol=ode_tol,
        )
        ok = (
            abs(rep.k_mu - exp["k_mu"]["value"]) <= 1e-6
            and rep.max_violation <= 1e-9
        )
        record(
            "growth_rate",
            ok,
            {"k_mu": rep.k_mu, "max_violation": rep.max_violation},
        )
    if "k_mu_divergent_radius" in exp:
        r = exp["k_mu_divergent_radius"]
        rep = growth_report(
            model,
            entry.generator,
            r,
            t_values=(0.5, 1.0),
            gamma=entry.oracle,
            ode_tol=ode_tol,
        )
        record(
            "k_mu_divergence",
            rep.k_mu > exp["k_mu_exceeds"],
            {"radius": r, "k_mu": rep.k_mu},
        )
        for disk in (0.5, 0.9):
            ring = disk * np.exp(2j * np.pi * np.arange(64) / 64)
            fit = boundedness_classify(entry.oracle, [0.5, 1.0, 2.0, 3.0], ring)
            record(
                f"bounded_on_disk_{disk}",
                fit.kind == "bounded",
                fit.as_dict(),
            )
    if "boundedness_on_trajectory" in exp:
        traj = [complex(model.flow(s, 0.0)) for s in (0.0, 1.0, 2.0, 3.0)]
        fit = boundedness_classify(entry.oracle, [0.5, 1.0, 2.0, 3.0], traj)
        record(
            "unbounded_on_trajectory",
            fit.kind == exp["boundedness_on_trajectory"],
            fit.as_dict(),
        )
    if exp.get("coboundary"):
        m_closed = lambda z: np.exp(1.0 - 1.0 / (1.0 - z))  # noqa: E731
        worst = 0.0
        for z in (0.0, 0.3, 0.2 + 0.1j):
            mz = commutative_linearize_nofix(entry.f, entry.generator, z)
            worst = max(worst, abs(mz - m_closed(z)))
        record("coboundary_transfer_map", worst <= 1e-8, f"max deviation {worst:.3e}")
    if "status" in exp:
        outcome = run_linearize(model, entry.generator, order=order)
        record(
            "linearization_status",
            outcome.status == exp["status"]
            and outcome.obstructed_at == exp.get("obstructed_at"),
            {"status": outcome.status, "obstructed_at": outcome.obstructed_at},
        )
        if "violated_k" in exp:
            record(
                "violated_orders",
                outcome.violated_k == exp["violated_k"],
                {"violated_k": outcome.violated_k},
            )
        if "m1" in exp:
            err = operator_norm(outcome.m.coeffs[1] - np.asarray(exp["m1"]))
            record("first_transfer_coefficient", err <= 1e-9, f"deviation {err:.3e}")
        if "m1_entry_11" in exp:
            err = abs(outcome.m.coeffs[1][0, 0] - exp["m1_entry_11"])
            record("first_transfer_coefficient", err <= 1e-9, f"deviation {err:.3e}")
        if "b0" in exp:
            err = operator_norm(outcome.b0 - np.atleast_2d(exp["b0"]))
            record("b0_value", err <= 1e-12, f"deviation {err:.3e}")
        if "m_coeffs" in exp:
            ref = np.zeros(order + 1, dtype=complex)
            ref[: len(exp["m_coeffs"])] = exp["m_coeffs"]
            err = float(np.max(np.abs(outcome.m.coeffs[:, 0, 0] - ref)))
            record("transfer_map_series", err <= 1e-9, f"deviation {err:.3e}")
        if outcome.status in ("linearizable", "coboundary") and entry.oracle is not None:
            samples = [(t, z) for t in (0.5, 1.5) for z in (0.2, 0.1 + 0.1j)]
            err = reconstruct_error(
                model,
                entry.generator,
                outcome,
                samples,
                guard_radius=min(outcome.radius_estimate, 0.6),
            )
            record("reconstruction", err <= 1e-6, f"max deviation {err:.3e}")

    passed = all(c["passed"] for c in checks)
    report = {
        "command": "demo",
        "demo": entry.name,
        "description": entry.description,
        "passed": passed,
        "checks": checks,
    }
    return report, passed


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cocycle-lab",
        description="Construct, verify, and linearize matrix-valued "
        "holomorphic semicocycles over unit-disk semigroups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenario_required=True):
        if scenario_required:
            p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--out", default=None, help="write the JSON report here")
        p.add_argument("--csv", default=None, help="write CSV samples here")
        p.add_argument("--order", type=int, default=None, help="truncation order")
        p.add_argument("--tol", type=float, default=None, help="verification tolerance")
        p.add_argument("--radius", type=float, default=None, help="disk radius")
        p.add_argument("--tmax", type=float, default=None, help="largest sample time")

    for name, help_text in (
        ("evolve", "integrate the evolution problem on the scenario grid"),
        ("check", "verify the semicocycle axioms on the scenario grid"),
        ("linearize", "run the series linearization pipeline"),
        ("spectrum", "report the resonance condition for B(z0)"),
        ("growth", "logarithmic-norm growth report on a disk"),
        ("extract", "recover the generator from evolution samples"),
    ):
        add_common(sub.add_parser(name, help=help_text))

    demo = sub.add_parser("demo", help="reproduce a packaged worked example")
    demo.add_argument("name", nargs="?", default=None, help="demo name")
    demo.add_argument("--list", action="store_true", help="list demo names")
    add_common(demo, scenario_required=False)
    return parser


_COMMANDS = {
    "evolve": _cmd_evolve,
    "check": _cmd_check,
    "linearize": _cmd_linearize,
    "spectrum": _cmd_spectrum,
    "growth": _cmd_growth,
    "extract": _cmd_extract,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "demo":
            if args.list or args.name is None:
                report = {
                    "command": "demo",
                    "available": [
                        {"name": e.name, "description": e.description}
                        for e in demo_catalog()
                    ],
                }
                _emit(report, args.out)
                return 0
            try:
                report, passed = run_demo(
                    args.name, order=args.order or 24
                )
            except KeyError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 2
            _emit(report, args.out)
            return 0 if passed else 1
        scn = _load_scenario(args.scenario)
        report, status = _COMMANDS[args.command](scn, args)
        _emit(report, args.out)
        return status
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CocycleLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
