"""Command-line front end: ``mixedqsl {bounds,evolve,geodesic,verify}``.

Exit codes: 0 success, 1 internal error or failed invariant, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import logging
import sys

import numpy as np

from . import bounds, dynamics, geometry, states, uhlmann
from .errors import QSLError
from .io import matrix_to_pairs, read_density, read_hermitian, read_schedule

log = logging.getLogger("mixedqsl")

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID = 0, 1, 2


class UsageError(QSLError):
    pass


def _schedule(args):
    if args.schedule and args.hamiltonian:
        raise UsageError("give either --hamiltonian or --schedule, not both")
    if args.schedule:
        return read_schedule(args.schedule)
    if args.hamiltonian:
        return dynamics.HamiltonianSchedule.constant(read_hermitian(args.hamiltonian))
    return None


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _rows_to_csv(header, rows) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _applicable_metrics(rho: states.DensityOperator, requested):
    if requested:
        return requested
    out = ["grassmann", "bures", "gp"]
    if rho.is_pure:
        out.insert(0, "fs")
    if rho.is_faithful:
        out.append("wy")
    return out


def _parse_metrics(text):
    if not text:
        return None
    ms = [m.strip() for m in text.split(",") if m.strip()]
    for m in ms:
        if m not in dynamics.METRICS:
            raise UsageError(f"unknown metric {m!r}; choose from {', '.join(dynamics.METRICS)}")
    return ms


def cmd_bounds(args) -> int:
    rho0 = read_density(args.rho0)
    schedule = _schedule(args)
    sqrt_qfi = None
    measured = {}
    if schedule is not None:
        traj = dynamics.evolve(rho0, schedule, args.t0, args.t1, args.steps)
        delta_e = dynamics.average_energy_uncertainty(traj)
        sqrt_qfi = dynamics.average_sqrt_qfi(traj) or None
        rho1 = read_density(args.rho1) if args.rho1 else traj.final
        measured = {"transit_time": args.t1 - args.t0, "delta_e": delta_e, "sqrt_qfi_avg": sqrt_qfi}
        if args.delta_e is not None:
            raise UsageError("--delta-e conflicts with a Hamiltonian: the uncertainty is measured")
    else:
        if args.rho1 is None or args.delta_e is None:
            raise UsageError("bounds needs --rho1 and --delta-e, or a --hamiltonian/--schedule to evolve")
        rho1 = read_density(args.rho1)
        delta_e = args.delta_e
    rep = bounds.compare_bounds(rho0, rho1, delta_e, sqrt_qfi_avg=sqrt_qfi, shoot=args.shoot, seed=args.seed)
    out = rep.to_dict()
    out["measured"] = measured
    if args.format == "csv":
        rows = []
        for key, val in out.items():
            if isinstance(val, dict):
                rows += [[f"{key}.{k}", v] for k, v in val.items()]
            elif isinstance(val, list):
                rows += [[key, v] for v in val]
            else:
                rows.append([key, val])
        _emit(args, _rows_to_csv(["quantity", "value"], rows))
    else:
        _emit(args, _dump_json(out))
    return EXIT_OK


def cmd_evolve(args) -> int:
    rho0 = read_density(args.rho0)
    schedule = _schedule(args)
    if schedule is None:
        raise UsageError("evolve needs --hamiltonian or --schedule")
    metrics = _applicable_metrics(rho0, _parse_metrics(args.metric))
    traj = dynamics.evolve(rho0, schedule, args.t0, args.t1, args.steps)
    N = rho0.dim
    header = ["t"]
    for i in range(N):
        for j in range(N):
            header += [f"rho_{i}{j}_re", f"rho_{i}{j}_im"]
    header += ["delta_e"] + [f"speed_{m}" for m in metrics]
    rows = []
    for t, rho, H in zip(traj.times, traj.states, traj.hamiltonians):
        flat = rho.matrix.reshape(-1)
        row = [repr(float(t))]
        for z in flat:
            row += [repr(float(z.real)), repr(float(z.imag))]
        row.append(repr(states.uncertainty(H, rho)))
        row += [repr(dynamics.metric_speed(rho, H, m)) for m in metrics]
        rows.append(row)
    if args.format == "json":
        summary = {
            "average_delta_e": dynamics.average_energy_uncertainty(traj),
            "lengths": {m: dynamics.curve_length(traj, m) for m in metrics},
            "final_state": matrix_to_pairs(traj.final.matrix),
            "columns": header,
            "rows": [[float(x) for x in r] for r in rows],
        }
        _emit(args, _dump_json(summary))
    else:
        _emit(args, _rows_to_csv(header, rows))
    return EXIT_OK


def cmd_geodesic(args) -> int:
    rho0 = read_density(args.rho0)
    if args.rho1 is None:
        raise UsageError("geodesic needs --rho1")
    rho1 = read_density(args.rho1)
    res = dynamics.gp_distance_numeric(rho0, rho1, seed=args.seed, endpoint_tol=args.tol)
    exact = bounds.gp_exact_distance(rho0, rho1)
    dump = []
    if res.trajectory is not None:
        traj = res.trajectory
        stride = max(1, (len(traj) - 1) // 100)
        for k in range(0, len(traj), stride):
            dump.append({"t": float(traj.times[k]), "hamiltonian": matrix_to_pairs(traj.hamiltonians[k])})
    out = {
        "lower": res.lower,
        "upper": res.upper,
        "exact": exact,
        "best_T": res.best_T,
        "converged": res.converged,
        "endpoint_defect": res.defect,
        "schedule": dump,
    }
    if args.format == "csv":
        rows = [[k, out[k]] for k in ("lower", "upper", "exact", "best_T", "converged", "endpoint_defect")]
        _emit(args, _rows_to_csv(["quantity", "value"], rows))
    else:
        _emit(args, _dump_json(out))
    return EXIT_OK


def _invariant_checks(rho0, rho1, H, tol: float) -> dict:
    checks = {}

    def record(name, slack):
        checks[name] = {"ok": bool(slack >= -tol), "slack": float(slack)}

    if H is not None:
        I = states.skew_information(H, rho0)
        J = states.j_functional(H, rho0)
        V = states.variance(H, rho0)
        F = states.quantum_fisher_information(H, rho0)
        record("skew<=J", J - I)
        record("J<=variance", V - J)
        record("J>=QFI/4", J - F / 4)
        split = uhlmann.dispersion_decomposition(H, rho0)
        record("dispersion-split", -abs(split.variance - split.bures_speed_sq - split.vertical_excess_sq))
        record("vertical-excess>=0", split.vertical_excess_sq)
    if rho1 is not None:
        record("affinity<=sqrt-fidelity", geometry.fidelity_sqrt(rho0, rho1) - geometry.affinity(rho0, rho1))
        record("wy>=bures", geometry.wy_distance(rho0, rho1) - geometry.bures_angle(rho0, rho1))
        W0 = uhlmann.amplitude_of(rho0).matrix
        W1 = uhlmann.amplitude_of(rho1).matrix
        amp = float(np.sum(np.linalg.svd(W0.conj().T @ W1, compute_uv=False)))
        record("amplitude-fidelity", -abs(amp - geometry.fidelity_sqrt(rho0, rho1)))
        if geometry.is_isospectral(rho0, rho1):
            record(
                "plucker<=grassmann",
                geometry.product_grassmann_distance(rho0, rho1) - geometry.product_plucker_distance(rho0, rho1),
            )
    return checks


def cmd_verify(args) -> int:
    rho0 = read_density(args.rho0)
    rho1 = read_density(args.rho1) if args.rho1 else None
    H = read_hermitian(args.hamiltonian) if args.hamiltonian else None
    if rho1 is None and H is None:
        raise UsageError("verify needs --rho1 and/or --hamiltonian")
    checks = _invariant_checks(rho0, rho1, H, args.tol)
    ok = all(c["ok"] for c in checks.values())
    if args.format == "csv":
        rows = [[k, c["ok"], c["slack"]] for k, c in checks.items()]
        _emit(args, _rows_to_csv(["check", "ok", "slack"], rows))
    else:
        _emit(args, _dump_json({"ok": ok, "checks": checks}))
    return EXIT_OK if ok else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rho0", required=True, help="initial state (matrix file, kind density)")
    common.add_argument("--rho1", help="final state (matrix file, kind density)")
    common.add_argument("--hamiltonian", help="time-independent Hamiltonian (matrix file)")
    common.add_argument("--schedule", help="schedule file (constant or piecewise)")
    common.add_argument("--t0", type=float, default=0.0)
    common.add_argument("--t1", type=float, default=1.0)
    common.add_argument("--steps", type=int, default=4096)
    common.add_argument("--delta-e", type=float, help="average energy uncertainty")
    common.add_argument("--metric", help="comma-separated subset of " + ",".join(dynamics.METRICS))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--shoot", action="store_true", help="bracket tau_p by geodesic shooting")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mixedqsl", description="Quantum speed limits for mixed states.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, func, fmt, text in (
        ("bounds", cmd_bounds, "json", "evaluate every speed limit for a pair of states"),
        ("evolve", cmd_evolve, "csv", "evolve a state and tabulate speeds"),
        ("geodesic", cmd_geodesic, "json", "bracket the isospectral-metric distance by shooting"),
        ("verify", cmd_verify, "json", "run the invariant checks on the given inputs"),
    ):
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.set_defaults(func=func, default_format=fmt)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.steps < 1:
        print("error: --steps must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (QSLError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - report anything else as an internal failure
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
