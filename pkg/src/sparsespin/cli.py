"""Command-line interface reproducing the figure data at desk scale.

Subcommands: evolve | scaling | gap | strobe | schedule | fidelity.  All
sweeps write CSV (default) or JSON lines with fixed column order and
17-significant-digit floats, so identical configurations produce
byte-identical files.  There is no randomness anywhere in the core
(--seedless is accepted and always true).  ``--plot PATH`` renders a
matplotlib figure alongside the delimited output.

Exit codes: 0 success, 2 usage error, 1 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import plotting
from .core import MAX_SPINS, EvolutionError
from .graphs import Boundary, GraphKind, build_graph
from .metrology import fmt, metrics_to_csv, metrics_to_jsonl
from .spectral import gap_rows_to_csv, gap_sweep
from .strobe import (FidelityModel, StrobeParams, build_strobe_circuit,
                     fidelity_estimate, gate_counts, schedule_to_json,
                     write_schedule_json)
from .trajectories import (find_max_qfi, norm_time_grid, qfi_scaling_fit,
                           scan_evolution, sqrt_n_time, strobe_m_sweep)

_KIND_BOUNDARY_DEFAULT = {
    # the PWR2 edge formula counts an open chain; the NN dispersion uses the
    # ring, so dynamics reproductions default accordingly
    GraphKind.A2A: Boundary.OPEN,
    GraphKind.NN: Boundary.PERIODIC,
    GraphKind.PWR2: Boundary.OPEN,
    GraphKind.HYPERCUBE: Boundary.OPEN,
    GraphKind.POWER_LAW: Boundary.PERIODIC,
}


class UsageError(Exception):
    pass


def _parse_kinds(text: str) -> list:
    out = []
    for token in text.split(","):
        token = token.strip().lower()
        try:
            out.append(GraphKind(token))
        except ValueError:
            raise UsageError(f"unknown graph kind {token!r} (choose from "
                             f"{', '.join(k.value for k in GraphKind)})")
    if not out:
        raise UsageError("no graph kind given")
    return out


def _parse_int_list(text: str) -> list:
    """Comma-separated integers and A:B or A:B:STEP inclusive ranges."""
    out = []
    for token in text.split(","):
        token = token.strip()
        if ":" in token:
            parts = [int(x) for x in token.split(":")]
            a, b = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            out.extend(range(a, b + 1, step))
        elif token:
            out.append(int(token))
    if not out:
        raise UsageError("empty integer list")
    return out


def _parse_partition(text: str) -> tuple:
    """Three site groups separated by '|'; each group is a comma list of
    sites or A-B inclusive ranges, e.g. '0-3|4-7|8-11'."""
    groups = []
    for part in text.split("|"):
        sites = []
        for token in part.split(","):
            token = token.strip()
            if "-" in token:
                a, b = (int(x) for x in token.split("-"))
                sites.extend(range(a, b + 1))
            elif token:
                sites.append(int(token))
        groups.append(tuple(sites))
    if len(groups) != 3:
        raise UsageError("TMI partition needs exactly three groups, "
                         "e.g. 0-3|4-7|8-11")
    return tuple(groups)


def _parse_fidelity(text: str) -> FidelityModel:
    try:
        f2, f1 = (float(x) for x in text.split(","))
        return FidelityModel(f_2q=f2, f_1q=f1)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"--fidelity expects 'f2q,f1q', got {text!r}: {exc}")


def _check_desk_scale(n: int) -> None:
    if n > MAX_SPINS:
        raise UsageError(
            f"N={n} exceeds the exact-statevector cap of {MAX_SPINS} spins; "
            "larger sizes need matrix-product-state methods, which are out "
            "of scope here")


def _graph_for(kind: GraphKind, n: int, chi0: float, boundary, alpha):
    bnd = Boundary(boundary) if boundary else _KIND_BOUNDARY_DEFAULT[kind]
    a = alpha if kind is GraphKind.POWER_LAW else None
    if kind is GraphKind.POWER_LAW and a is None:
        raise UsageError("powerlaw kind requires --alpha")
    return build_graph(kind, n, chi0, bnd, alpha=a)


def _write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _rows_to_delimited(header, rows, fmt_mask, out_format: str) -> str:
    if out_format == "jsonl":
        lines = []
        for row in rows:
            lines.append(json.dumps({h: (v if not m else
                                         (None if v is None else float(v)))
                                     for h, v, m in zip(header, row, fmt_mask)}))
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if m else ("" if v is None else v)
                         for v, m in zip(row, fmt_mask)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands

def cmd_evolve(args) -> int:
    kinds = _parse_kinds(args.kind)
    _check_desk_scale(args.n)
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if args.tmax_norm <= 0:
        raise UsageError("--tmax-norm must be positive")
    partition = _parse_partition(args.tmi_partition) if args.tmi_partition else None

    curves = {}
    all_rows = []
    for kind in kinds:
        g = _graph_for(kind, args.n, args.chi0, args.boundary, args.alpha)
        if args.physical_time:
            grid = list(np.linspace(0.0, args.tmax_norm, args.samples))
        else:
            grid = norm_time_grid(g, args.tmax_norm, args.samples)
        subsets = (tuple(range(args.n // 2)),) if args.with_entropy else ()
        records = scan_evolution(g, grid, tol=args.tol, with_i3=args.with_i3,
                                 tmi_partition=partition,
                                 entropy_subsets=subsets)
        label = kind.value if kind is not GraphKind.POWER_LAW else \
            f"powerlaw(alpha={args.alpha:g})"
        curves[label] = records
        all_rows.extend((label, r) for r in records)

    render = metrics_to_csv if args.format == "csv" else metrics_to_jsonl
    _write_text(args.out, render(all_rows, extra_columns=("kind",)))
    if args.plot:
        plotting.plot_evolve(curves, args.n, args.plot)
    return 0


def cmd_scaling(args) -> int:
    kinds = _parse_kinds(args.kind)
    n_values = _parse_int_list(args.n_list)
    for n in n_values:
        _check_desk_scale(n)
    if len(n_values) < 2:
        raise UsageError("scaling fit needs at least two system sizes")

    def one(kind):
        graphs = [_graph_for(kind, n, args.chi0, args.boundary, args.alpha)
                  for n in n_values]
        return qfi_scaling_fit(graphs, t_norm_max=args.tmax_norm,
                               coarse_samples=args.samples, tol=args.tol)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        fits = list(pool.map(one, kinds))

    header = ("kind", "N", "max_qfi", "t_star", "t_star_pred", "beta_fit")
    rows = []
    for fit in fits:
        for n, q, ts, tp in zip(fit.n_values, fit.max_qfi, fit.t_star,
                                fit.t_star_pred):
            rows.append((fit.kind_label, n, q, ts, tp, fit.beta))
    text = _rows_to_delimited(header, rows,
                              (False, False, True, True, True, True),
                              args.format)
    _write_text(args.out, text)
    if args.plot:
        plotting.plot_scaling(fits, args.plot)
    return 0


def cmd_gap(args) -> int:
    kinds = _parse_kinds(args.kind)
    n_values = _parse_int_list(args.n_list)
    alphas = ([float(x) for x in args.alpha.split(",")]
              if isinstance(args.alpha, str) else
              [args.alpha] if args.alpha is not None else [])
    specs = []
    for kind in kinds:
        if kind is GraphKind.POWER_LAW:
            if not alphas:
                raise UsageError("powerlaw kind requires --alpha")
            if any(a < 0 for a in alphas):
                raise UsageError("powerlaw exponent must be >= 0")
            specs.extend((kind, a) for a in alphas)
        else:
            specs.append(kind)

    def one(spec):
        return gap_sweep([spec], n_values, chi0=args.chi0)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        rows = [r for chunk in pool.map(one, specs) for r in chunk]

    if args.format == "jsonl":
        text = "\n".join(json.dumps({
            "kind": r.label, "N": r.n_spins, "gap_numeric": r.gap_numeric,
            "gap_closed": r.gap_closed, "q_min": r.q_min,
            "gamma_fit": r.gamma_fit}) for r in rows) + "\n"
    else:
        text = gap_rows_to_csv(rows)
    _write_text(args.out, text)
    if args.plot:
        plotting.plot_gap(rows, args.plot)
    return 0


def _resolve_tstar(args, n: int) -> float:
    if args.tstar == "auto":
        kind = GraphKind.HYPERCUBE if args.target == "hypercube" else GraphKind.PWR2
        g = _graph_for(kind, n, args.chi0, None, None)
        return find_max_qfi(g, tol=max(args.tol, 1e-10)).t_star
    if args.tstar == "sqrtn":
        return sqrt_n_time(n, args.chi0)
    try:
        t = float(args.tstar)
    except ValueError:
        raise UsageError("--tstar must be 'auto', 'sqrtn', or a number")
    if t <= 0:
        raise UsageError("--tstar must be positive")
    return t


def cmd_strobe(args) -> int:
    _check_desk_scale(args.n)
    m_values = _parse_int_list(args.m_list)
    if any(m < 1 for m in m_values):
        raise UsageError("iteration counts must be >= 1")
    partition = _parse_partition(args.tmi_partition) if args.tmi_partition else None
    model = _parse_fidelity(args.fidelity) if args.fidelity else None
    try:
        t_star = _resolve_tstar(args, args.n)
        sweep = strobe_m_sweep(args.n, m_values, t_star, target=args.target,
                               chi0=args.chi0, tmi_partition=partition,
                               fidelity_model=model)
    except ValueError as exc:
        raise UsageError(str(exc))

    if args.schedule_out:
        params = StrobeParams(n_spins=args.n, m_iterations=m_values[0],
                              t_star=t_star, target=args.target,
                              chi0=args.chi0)
        write_schedule_json(build_strobe_circuit(params), args.schedule_out)

    header = ["n", "m", "t_star", "qfi_opt", "qfi_per_n2", "j2", "j2_norm", "i3"]
    mask = [False, False, True, True, True, True, True, True]
    if model is not None:
        header.append("fidelity")
        mask.append(True)
    rows = []
    for m, rec, fid in sweep:
        row = [args.n, m, t_star, rec.qfi_opt, rec.qfi_opt / args.n ** 2,
               rec.j2, rec.j2_norm, rec.i3]
        if model is not None:
            row.append(fid)
        rows.append(tuple(row))
    _write_text(args.out, _rows_to_delimited(tuple(header), rows, tuple(mask),
                                             args.format))
    if args.plot:
        continuous = None
        if args.tstar == "auto":
            kind = (GraphKind.HYPERCUBE if args.target == "hypercube"
                    else GraphKind.PWR2)
            g = _graph_for(kind, args.n, args.chi0, None, None)
            continuous = find_max_qfi(g).qfi_max
        plotting.plot_strobe(sweep, args.n, args.plot,
                             continuous_qfi=continuous)
    return 0


def cmd_schedule(args) -> int:
    try:
        t_star = _resolve_tstar(args, args.n)
        params = StrobeParams(n_spins=args.n, m_iterations=args.m,
                              t_star=t_star, target=args.target,
                              chi0=args.chi0)
    except ValueError as exc:
        raise UsageError(str(exc))
    sched = build_strobe_circuit(params)
    if args.out in (None, "-"):
        doc = {"meta": sched.meta, "items": schedule_to_json(sched)}
        sys.stdout.write(json.dumps(doc, indent=1) + "\n")
    else:
        write_schedule_json(sched, args.out)
    return 0


def cmd_fidelity(args) -> int:
    try:
        params = StrobeParams(n_spins=args.n, m_iterations=args.m,
                              t_star=1.0, target=args.target)
        model = FidelityModel(f_2q=args.f2q, f_1q=args.f1q)
    except ValueError as exc:
        raise UsageError(str(exc))
    n2, n1 = gate_counts(params)
    fid = fidelity_estimate((n2, n1), model)
    text = _rows_to_delimited(("n", "m", "n_2q", "n_1q", "fidelity"),
                              [(args.n, args.m, n2, n1, fid)],
                              (False, False, False, False, True), args.format)
    _write_text(args.out, text)
    return 0


# ---------------------------------------------------------------------------
# parser plumbing

def _add_common(sp, tol=True):
    sp.add_argument("--chi0", type=float, default=1.0,
                    help="coupling strength (default 1.0)")
    sp.add_argument("--out", default=None, metavar="PATH",
                    help="output file (default stdout)")
    sp.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    sp.add_argument("--plot", default=None, metavar="PATH",
                    help="also render a figure to PATH")
    sp.add_argument("--config", default=None, metavar="PATH",
                    help="key=value defaults, overridden by flags")
    sp.add_argument("--seedless", action="store_true",
                    help="assert seed-free operation (always true: the core "
                         "uses no randomness)")
    if tol:
        sp.add_argument("--tol", type=float, default=1e-10,
                        help="propagator accuracy (default 1e-10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsespin",
        description="Spin-1/2 XY dynamics and metrology on sparse coupling "
                    "graphs (exact statevector, N <= 20).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="metrics along continuous XY evolution")
    p.add_argument("--kind", required=True,
                   help="comma list of a2a,nn,pwr2,hypercube,powerlaw")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tmax-norm", type=float, default=float(np.pi),
                   help="time-grid end (normalized time unless "
                        "--physical-time; default pi)")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--physical-time", action="store_true",
                   help="interpret the grid as physical time")
    p.add_argument("--boundary", choices=("open", "periodic"), default=None,
                   help="default: periodic for nn/powerlaw, open otherwise")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--with-i3", action="store_true")
    p.add_argument("--with-entropy", action="store_true",
                   help="include the half-chain entropy column")
    p.add_argument("--tmi-partition", default=None,
                   help="e.g. 0-3|4-7|8-11 (default: contiguous quarters)")
    _add_common(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("scaling", help="max-QFI scaling fit over system size")
    p.add_argument("--kind", required=True)
    p.add_argument("--n-list", required=True, help="e.g. 4,8,16")
    p.add_argument("--tmax-norm", type=float, default=3.5)
    p.add_argument("--samples", type=int, default=160)
    p.add_argument("--boundary", choices=("open", "periodic"), default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("gap", help="spectral-gap sweep (numeric + closed form)")
    p.add_argument("--kind", required=True)
    p.add_argument("--n-list", required=True)
    p.add_argument("--alpha", default=None,
                   help="comma list of powerlaw exponents")
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p, tol=False)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("strobe", help="stroboscopic protocol over iteration counts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m-list", required=True, help="e.g. 1:40 or 1,2,5,10")
    p.add_argument("--target", choices=("hypercube", "pwr2"),
                   default="hypercube")
    p.add_argument("--tstar", default="auto",
                   help="'auto' (continuous max-QFI time), 'sqrtn' "
                        "(1/sqrt(N)), or a number")
    p.add_argument("--fidelity", default=None, metavar="F2Q,F1Q",
                   help="append the analytic fidelity column")
    p.add_argument("--schedule-out", default=None, metavar="PATH",
                   help="dump the gate schedule JSON for the first M")
    p.add_argument("--tmi-partition", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_strobe)

    p = sub.add_parser("schedule", help="dump a strobe gate schedule as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--target", choices=("hypercube", "pwr2"),
                   default="hypercube")
    p.add_argument("--tstar", default="auto")
    _add_common(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("fidelity", help="analytic many-body fidelity estimate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--f2q", type=float, required=True)
    p.add_argument("--f1q", type=float, required=True)
    p.add_argument("--target", choices=("hypercube", "pwr2"),
                   default="hypercube")
    _add_common(p, tol=False)
    p.set_defaults(func=cmd_fidelity)

    return parser


def _inject_config(argv: list) -> list:
    """Insert key=value pairs from --config as flags ahead of the user's,
    so explicit flags win."""
    if "--config" not in argv:
        return argv
    k = argv.index("--config")
    if k + 1 >= len(argv):
        return argv
    path = argv[k + 1]
    injected = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"malformed config line: {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if value.lower() == "true":
                injected.append(flag)
            else:
                injected.extend([flag, value])
    return argv[:1] + injected + argv[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _inject_config(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EvolutionError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
