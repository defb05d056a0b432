"""Command-line frontend.

    circlemix <describe|norms|spectrum|hilbert|simulate|grid>
              --spec FILE [--window N] [--grid N] [--nmax K] [--p LIST]
              [--seed U64] [--out DIR] [--format csv|json] [--f COEFFS]
              [--x0 T] [--m M] [--n K] [--no-plot]

One subcommand per diagnostic theme; outputs are file-first (delimited data
plus a JSON record and a rendered figure) with a terse console summary.
Exit codes: 0 success, 2 config or schema error, 3 analytic precondition
failure (a divergent series), 4 capability limit (unsamplable measure).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import plotting
from .diagnostics import build_mixing_report, conze_scan, rho_sup
from .errors import (
    CircleMixError,
    ConstructionError,
    ConzeUndefinedError,
    DivergentSeriesError,
    GridBuildError,
    MemoryGuardError,
    SamplingError,
    SpecError,
)
from .fourier import fourier_coefficient, fourier_table
from .measures import CircleMeasure
from .operators import (
    NormCurve,
    TrigPolynomial,
    grid_build,
    grid_power_norms,
    hilbert_closed_form,
    hilbert_partial,
    l2_norm_curve,
    lp_norm_bounds,
    tv_exact,
    window_certifies_sup,
)
from .specio import (
    fmt,
    load_measure,
    write_rows,
    write_chain_snapshot,
    write_conze_scan,
    write_fourier_table,
    write_json,
    write_norm_curve,
    write_spectrum_points,
)
from .walks import estimate_pnf, sampling_notes

# Hard guards on run configuration sizes.
MAX_WINDOW = 10**7
MAX_GRID = 2**24
MAX_TRAJECTORIES = 10**8

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ANALYTIC = 3
EXIT_CAPABILITY = 4


@dataclass
class RunConfig:
    spec_path: Path
    command: str
    window: int
    grid: int
    n_max: int
    p_list: list[float]
    seed: int
    out_dir: Path
    fmt_mode: str
    plot: bool

    def validate(self) -> None:
        if not (1 <= self.window <= MAX_WINDOW):
            raise SpecError("window", f"must lie in [1, {MAX_WINDOW}]")
        if not (2 <= self.grid <= MAX_GRID):
            raise SpecError("grid", f"must lie in [2, {MAX_GRID}]")
        if self.n_max < 1:
            raise SpecError("nmax", "must be at least 1")
        if self.fmt_mode not in ("csv", "json"):
            raise SpecError("format", "must be csv or json")


def _parse_p_list(text: str) -> list[float]:
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if piece in ("inf", "oo"):
            out.append(math.inf)
            continue
        try:
            p = float(piece)
        except ValueError:
            raise SpecError("p", f"cannot parse exponent {piece!r}")
        if p < 1:
            raise SpecError("p", f"exponent {piece!r} below 1")
        out.append(p)
    if not out:
        raise SpecError("p", "empty exponent list")
    return out


def _parse_poly(text: str) -> TrigPolynomial:
    """Parse 'j=c,j=c' into a trigonometric polynomial; c may be complex."""
    coeffs: dict[int, complex] = {}
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" not in piece:
            raise SpecError("f", f"expected j=value, got {piece!r}")
        jtext, ctext = piece.split("=", 1)
        try:
            j = int(jtext)
            c = complex(ctext)
        except ValueError as exc:
            raise SpecError("f", f"cannot parse {piece!r}: {exc}")
        coeffs[j] = coeffs.get(j, 0) + c
    if not coeffs:
        raise SpecError("f", "empty coefficient list")
    return TrigPolynomial.from_dict(coeffs)


def _p_label(p: float) -> str:
    if math.isinf(p):
        return "inf"
    if float(p).is_integer():
        return str(int(p))
    return fmt(p)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_describe(mu: CircleMeasure, cfg: RunConfig) -> int:
    table = fourier_table(mu, cfg.window)
    report = build_mixing_report(mu, table)
    payload = {"measure": mu.to_spec(), "report": report.to_dict()}
    write_json(payload, cfg.out_dir / "describe_report.json")
    write_fourier_table(table, cfg.out_dir / f"describe_table.{cfg.fmt_mode}", cfg.fmt_mode)
    scan = conze_scan(table, (1, 2))
    write_conze_scan(scan, cfg.out_dir / f"describe_conze.{cfg.fmt_mode}", cfg.fmt_mode)
    if cfg.plot:
        plotting.plot_coefficients(table, cfg.out_dir / "describe_coefficients.png")
        plotting.plot_conze_scan(scan, cfg.out_dir / "describe_conze.png")
    r = report
    print(f"adapted: {r.adapted.verdict} [rule: {r.adapted.rule}]")
    print(f"strictly_aperiodic: {r.strictly_aperiodic.verdict} [rule: {r.strictly_aperiodic.rule}]")
    print(f"rho_sup: {fmt(r.rho.value)} at n={r.rho.frequency} (window {r.rho.window}, lower bound)")
    print(f"doeblin: {r.doeblin.verdict} [rule: {r.doeblin.rule}]")
    for j, entry in r.conze.items():
        if entry is None:
            print(f"conze j={j}: undefined ({r.conze_error})")
        else:
            print(f"conze j={j}: {fmt(entry[0])} at n={entry[1]}")
    return EXIT_OK


def cmd_norms(mu: CircleMeasure, cfg: RunConfig) -> int:
    table = fourier_table(mu, cfg.window)
    chain = grid_build(mu, cfg.grid)
    chain2 = grid_build(mu, 2 * cfg.grid)
    curves: list[NormCurve] = []
    for p in cfg.p_list:
        label = _p_label(p)
        if p == 2:
            curve = l2_norm_curve(table, cfg.n_max, exact=window_certifies_sup(mu, cfg.window))
        else:
            ns = np.arange(1, cfg.n_max + 1)
            values, kinds = [], []
            for n in ns:
                closed = tv_exact(mu, int(n))
                if p in (1, math.inf) and closed is not None:
                    values.append(closed)
                    kinds.append("exact")
                else:
                    bounds = lp_norm_bounds(chain, table, p, int(n))
                    values.append(bounds.upper)
                    kinds.append(bounds.upper_kind)
            curve = NormCurve(label, ns, np.array(values), tuple(kinds))
        curves.append(curve)
        write_norm_curve(curve, cfg.out_dir / f"norms_p{label}.{cfg.fmt_mode}", cfg.fmt_mode)
    tv1 = grid_power_norms(chain, cfg.n_max)
    tv2 = grid_power_norms(chain2, cfg.n_max)
    rows = [
        (str(int(n)), fmt(v1), fmt(v2), fmt(v2 - v1))
        for n, v1, v2 in zip(tv1.ns, tv1.values, tv2.values)
    ]
    write_rows(
        cfg.out_dir / f"norms_grid.{cfg.fmt_mode}",
        [
            "n",
            f"tv_grid_{chain.n_cells}",
            f"tv_grid_{chain2.n_cells}",
            "refinement_delta",
        ],
        rows,
        cfg.fmt_mode,
    )
    if cfg.plot:
        plotting.plot_norm_curves(curves + [tv1], cfg.out_dir / "norms_curves.png")
    print(f"norm curves for p in {{{', '.join(_p_label(p) for p in cfg.p_list)}}}, "
          f"n <= {cfg.n_max}; grid {chain.n_cells} and {chain2.n_cells}")
    print(f"rho_sup window {cfg.window}: {fmt(rho_sup(table).value)}")
    return EXIT_OK


def cmd_spectrum(mu: CircleMeasure, cfg: RunConfig) -> int:
    table = fourier_table(mu, cfg.window)
    report = build_mixing_report(mu, table)
    write_spectrum_points(table, cfg.out_dir / f"spectrum_points.{cfg.fmt_mode}", cfg.fmt_mode)
    write_json(
        {"measure": mu.to_spec(), "spectrum": report.spectrum.to_dict()},
        cfg.out_dir / "spectrum_flags.json",
    )
    if cfg.plot:
        plotting.plot_spectrum(table, cfg.out_dir / "spectrum_cloud.png")
    cloud = report.spectrum
    print(f"points: {2 * cfg.window + 1}; real_only: {cloud.real_only}; "
          f"max modulus off 0: {fmt(cloud.max_modulus.value)}; "
          f"rajchman_consistent: {cloud.rajchman_consistent}")
    return EXIT_OK


def cmd_hilbert(mu: CircleMeasure, cfg: RunConfig, f: TrigPolynomial, order: int) -> int:
    if not f.is_centered:
        raise SpecError("f", "coefficient at 0 must vanish (centered input)")
    table = fourier_table(mu, max(cfg.window, f.degree))
    partial = hilbert_partial(table, f, order)
    closed, residual = hilbert_closed_form(table, f, check_order=order)
    support = f.support()
    rows = []
    for j in support:
        w = table.value(-j)
        rows.append(
            (
                str(j),
                fmt(partial.coefficient(j).real),
                fmt(partial.coefficient(j).imag),
                fmt(closed.coefficient(j).real),
                fmt(closed.coefficient(j).imag),
                fmt(abs(partial.coefficient(j) - closed.coefficient(j))),
                fmt(abs(w)),
            )
        )
    write_rows(
        cfg.out_dir / f"hilbert_transform.{cfg.fmt_mode}",
        ["j", "partial_re", "partial_im", "closed_re", "closed_im", "gap", "coeff_abs"],
        rows,
        cfg.fmt_mode,
    )
    write_json(
        {
            "measure": mu.to_spec(),
            "order": order,
            "residual": residual.residual,
            "tail_bound": residual.tail_bound,
        },
        cfg.out_dir / "hilbert_record.json",
    )
    if cfg.plot:
        plotting.plot_hilbert(
            support,
            [partial.coefficient(j) for j in support],
            [closed.coefficient(j) for j in support],
            cfg.out_dir / "hilbert_transform.png",
        )
    print(f"series order {order}: max grid residual {fmt(residual.residual)} "
          f"(tail bound {fmt(residual.tail_bound)})")
    return EXIT_OK


def cmd_simulate(
    mu: CircleMeasure, cfg: RunConfig, f: TrigPolynomial, x0: float, n: int, m: int
) -> int:
    if not (100 <= m <= MAX_TRAJECTORIES):
        raise SpecError("m", f"trajectory count must lie in [100, {MAX_TRAJECTORIES}]")
    est = estimate_pnf(mu, f, x0, n, m, cfg.seed)
    record = {
        "measure": mu.to_spec(),
        "f": {str(j): {"re": f.coefficient(j).real, "im": f.coefficient(j).imag}
              for j in f.support()},
        "x0": x0,
        "sampling": sampling_notes(mu),
        **est.to_dict(),
    }
    write_json(record, cfg.out_dir / "simulate_record.json")
    if cfg.plot:
        plotting.plot_simulation(est.to_dict(), cfg.out_dir / "simulate_estimate.png")
    sigma = "inf" if est.sigma_distance is None else fmt(est.sigma_distance)
    print(f"estimate {fmt(est.estimate.real)} + {fmt(est.estimate.imag)}i "
          f"(stderr {fmt(est.stderr)}), exact gap {sigma} sigma")
    return EXIT_OK


def cmd_grid(mu: CircleMeasure, cfg: RunConfig) -> int:
    chain = grid_build(mu, cfg.grid)
    write_chain_snapshot(chain, cfg.out_dir / "grid_chain.cmx")
    k_max = min(64, cfg.grid // 2 - 1)
    rows = []
    worst = 0.0
    for k in range(-k_max, k_max + 1):
        eig = chain.eigenvalue(-k)               # kernel_hat at k
        coeff = fourier_coefficient(mu, k)
        err = abs(eig - coeff)
        worst = max(worst, err)
        rows.append(
            (str(k), fmt(eig.real), fmt(eig.imag), fmt(coeff.real), fmt(coeff.imag), fmt(err))
        )
    write_rows(
        cfg.out_dir / f"grid_circulant.{cfg.fmt_mode}",
        ["k", "kernel_re", "kernel_im", "coeff_re", "coeff_im", "abs_err"],
        rows,
        cfg.fmt_mode,
    )
    curve = grid_power_norms(chain, cfg.n_max)
    write_norm_curve(curve, cfg.out_dir / f"grid_norms.{cfg.fmt_mode}", cfg.fmt_mode)
    if cfg.plot:
        plotting.plot_grid_chain(chain, cfg.out_dir / "grid_chain.png")
    print(f"grid {chain.n_cells}: kernel transform matches coefficients to "
          f"{fmt(worst)} over |k| <= {k_max}; notes {chain.notes.get('method')}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circlemix",
        description="Fourier-side mixing diagnostics for convolution walks on the circle",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("describe", "classification report (adapted, aperiodic, rho-sup, Doeblin, ratios)"),
        ("norms", "norm decay curves and grid total variation"),
        ("spectrum", "coefficient point cloud with closure annotations"),
        ("hilbert", "one-sided ergodic Hilbert transform of a centered polynomial"),
        ("simulate", "Monte-Carlo estimate of P^n f"),
        ("grid", "discretized chain: snapshot, circulant check, norms"),
    ):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--spec", required=True, help="measure spec file (JSON)")
        p.add_argument("--window", type=int, default=100_000,
                       help="frequency scan half-width (default 1e5)")
        p.add_argument("--grid", type=int, default=4096, help="grid size (default 4096)")
        p.add_argument("--nmax", type=int, default=10, help="largest power (default 10)")
        p.add_argument("--p", default="1,2,inf", help="comma list of exponents")
        p.add_argument("--seed", type=int, default=0, help="experiment seed")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--format", default="csv", choices=("csv", "json"),
                       help="tabular output format")
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
        if name in ("hilbert", "simulate"):
            p.add_argument("--f", default="1=1",
                           help="trig polynomial as 'j=c,j=c' (default e_1)")
            p.add_argument("--n", type=int, default=1000 if name == "hilbert" else 10,
                           help="series order / step count")
        if name == "simulate":
            p.add_argument("--x0", type=float, default=0.0, help="start angle in turns")
            p.add_argument("--m", type=int, default=100_000, help="trajectory count")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            spec_path=Path(args.spec),
            command=args.command,
            window=args.window,
            grid=args.grid,
            n_max=args.nmax,
            p_list=_parse_p_list(args.p),
            seed=args.seed,
            out_dir=Path(args.out),
            fmt_mode=args.format,
            plot=not args.no_plot,
        )
        cfg.validate()
        mu = load_measure(cfg.spec_path)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "describe":
            return cmd_describe(mu, cfg)
        if args.command == "norms":
            return cmd_norms(mu, cfg)
        if args.command == "spectrum":
            return cmd_spectrum(mu, cfg)
        if args.command == "hilbert":
            return cmd_hilbert(mu, cfg, _parse_poly(args.f), args.n)
        if args.command == "simulate":
            return cmd_simulate(mu, cfg, _parse_poly(args.f), args.x0, args.n, args.m)
        if args.command == "grid":
            return cmd_grid(mu, cfg)
        raise SpecError("command", f"unknown command {args.command!r}")
    except (DivergentSeriesError, ConzeUndefinedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYTIC
    except SamplingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (SpecError, MemoryGuardError, ConstructionError, GridBuildError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CircleMixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
