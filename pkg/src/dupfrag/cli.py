"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 input error, 3 numerical failure.
Errors go to standard error as ``dupfrag:error:<kind>: <message>``.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .binning import log_bin
from .errors import InputError, NumericalError
from .io import (MaskPolicy, RunManifest, join_records, parse_fasta, read_histogram_csv,
                 write_histogram_csv)
from .model import LengthHistogram, ModelParams, Monoscale, SourceDistribution
from .repeats import Sequence, repeat_length_histogram
from .simulator import SimConfig, run_ensemble
from .theory import (build_transition_system, continuum_stationary, estimate_rates,
                     fit_power_law_tail, matrix_limit, monodisperse_source,
                     random_peak_stats, solve_by_iteration, stationary_exact_monoscale,
                     stationary_monoscale, stationary_powerlaw, tail_estimate,
                     uniform_density_source)
from .theory.discrete import StationarySolution

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

logger = logging.getLogger("dupfrag")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _fail(kind: str, message: str) -> None:
    print(f"dupfrag:error:{kind}: {message}", file=sys.stderr)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args) -> dict:
    if not getattr(args, "config", None):
        return {}
    return RunManifest.read(args.config).config


def _merge(cfg: dict, args, names) -> dict:
    """Command-line flags override manifest fields when given."""
    for name in names:
        val = getattr(args, name, None)
        if val is not None:
            cfg[name] = val
    return cfg


def _source_from_args(cfg: dict, args) -> SourceDistribution:
    if getattr(args, "source", None):
        try:
            return SourceDistribution.from_dict(json.loads(args.source))
        except json.JSONDecodeError as exc:
            raise InputError(f"--source is not valid JSON: {exc}") from exc
    if getattr(args, "D", None) is not None:
        return Monoscale(args.D)
    if "source" in cfg:
        return SourceDistribution.from_dict(cfg["source"])
    raise InputError("no duplication source given (use --D, --source or --config)")


def _params(cfg: dict, args) -> ModelParams:
    base = dict(cfg.get("params", cfg))
    for name in ("L", "beta", "mu", "a"):
        val = getattr(args, name, None)
        if val is not None:
            base[name] = val
    missing = [k for k in ("L", "beta", "mu") if k not in base]
    if missing:
        raise InputError(f"missing model parameters: {', '.join(missing)}")
    src = _source_from_args(base, args)
    return ModelParams(L=int(base["L"]), beta=float(base["beta"]), mu=float(base["mu"]),
                       source=src, a=int(base.get("a", 1)))


def _emit_solution(sol, args, manifest: RunManifest, name: str):
    if args.out:
        out = _out_dir(args)
        path = out / f"{name}.csv"
        write_histogram_csv(sol, path)
        manifest.outputs.append(path.name)
        manifest.write(out / "manifest.json")
    else:
        tmp = sys.stdout
        w = csv.writer(tmp, lineterminator="\n")
        w.writerow(["m", "count", "realizations", "counting_mode"])
        for m, c in zip(sol.lengths.tolist(), sol.f.tolist()):
            w.writerow([m, repr(float(c)), 1, "occurrences"])


# -- subcommands -----------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    sim = dict(cfg) if "steps" in cfg else {}
    params = _params(sim.get("params", cfg), args)
    sim = _merge(sim, args, ["steps", "burn_in", "sample_interval", "realizations",
                             "seed", "topology", "counting_mode", "sigma",
                             "duplication_mode"])
    sim["params"] = params.to_dict()
    sim.setdefault("seed", 0)
    if "steps" not in sim:
        raise InputError("--steps is required")
    config = SimConfig.from_dict(sim)
    result = run_ensemble(config, workers=args.workers)
    out = _out_dir(args)
    manifest = RunManifest("simulate", config.to_dict(), seed=config.seed)
    write_histogram_csv(result.mean, out / "histogram.csv")
    with open(out / "stderr.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "stderr"])
        for m, se in result.stderr.items():
            w.writerow([m, repr(float(se))])
    with open(out / "series.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["realization", "t", "m", "count"])
        for idx, rr in result.series.items():
            for t, h in zip(rr.times, rr.histograms):
                for m, c in h.counts.items():
                    w.writerow([idx, t, m, repr(float(c))])
    manifest.outputs += ["histogram.csv", "stderr.csv", "series.csv"]
    manifest.write(out / "manifest.json")
    return EXIT_OK


def cmd_solve_monoscale(args) -> int:
    cfg = _load_config(args)
    params = _params(cfg, args)
    if not isinstance(params.source, Monoscale):
        raise InputError("solve-monoscale needs a monoscale source (--D)")
    system = build_transition_system(params)
    for note in system.diagnostics:
        print(f"dupfrag:warning:spectral: {note}", file=sys.stderr)
    if args.method == "backward":
        sol = stationary_monoscale(params)
    elif args.method == "iteration":
        sol = StationarySolution(solve_by_iteration(system).f, params, "iteration")
    elif args.method == "matrix":
        sol = StationarySolution(matrix_limit(system), params, "matrix_limit")
    else:
        D = params.source.D
        f = np.append(stationary_exact_monoscale(np.arange(1, D), D, params.L, params.beta,
                                                 params.mu, params.a),
                      stationary_monoscale(params).f[-1])
        sol = StationarySolution(f, params, "closed_form")
    manifest = RunManifest("solve-monoscale", {"params": params.to_dict(),
                                               "method": args.method})
    _emit_solution(sol, args, manifest, "stationary")
    return EXIT_OK


def cmd_solve_powerlaw(args) -> int:
    cfg = _load_config(args)
    params = _params(cfg, args)
    sol = stationary_powerlaw(params)
    manifest = RunManifest("solve-powerlaw", {"params": params.to_dict()})
    _emit_solution(sol, args, manifest, "stationary")
    return EXIT_OK


def cmd_continuum(args) -> int:
    if args.source == "monodisperse":
        src = monodisperse_source()
    else:
        src = uniform_density_source(args.lo, args.hi)
    x = np.logspace(np.log10(args.x_min), np.log10(args.x_max), args.points)
    dens, atoms = continuum_stationary(x, src, args.mu_bar)
    rows = [["x", "density"]] + [[repr(float(a)), repr(float(b))] for a, b in zip(x, dens)]
    tail_rows = None
    if args.M1 is not None:
        est = tail_estimate(args.M1, args.beta, args.mu)
        m = np.unique(np.logspace(0, np.log10(args.M1), args.points).astype(int))
        tail_rows = [["m", "S", "heuristic_S"]] + [
            [int(v), repr(float(est.S(v))), repr(float(est.heuristic_S(v)))] for v in m]
    for x0, mass in atoms:
        print(f"dupfrag:info:atom: x={x0!r} mass={mass!r}", file=sys.stderr)
    if args.out:
        out = _out_dir(args)
        _write_rows(out / "continuum.csv", rows)
        outputs = ["continuum.csv"]
        if tail_rows:
            _write_rows(out / "tail.csv", tail_rows)
            outputs.append("tail.csv")
        cfg = {k: getattr(args, k) for k in ("source", "lo", "hi", "mu_bar", "x_min",
                                             "x_max", "points", "M1", "beta", "mu")}
        RunManifest("continuum", cfg, outputs=outputs).write(out / "manifest.json")
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerows(rows)
        if tail_rows:
            w.writerows(tail_rows)
    return EXIT_OK


def _write_rows(path, rows):
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def cmd_analyze_fasta(args) -> int:
    seqs = parse_fasta(args.fasta, MaskPolicy(args.mask_policy))
    seq = join_records(seqs)
    hist = repeat_length_histogram(seq, args.counting_mode)
    manifest = RunManifest("analyze-fasta", {"mask_policy": args.mask_policy,
                                             "counting_mode": args.counting_mode})
    manifest.record_input(args.fasta)
    if args.out:
        out = _out_dir(args)
        write_histogram_csv(hist, out / "histogram.csv")
        manifest.outputs.append("histogram.csv")
        manifest.write(out / "manifest.json")
    else:
        _print_hist(hist)
    return EXIT_OK


def _print_hist(hist: LengthHistogram):
    w = csv.writer(sys.stdout, lineterminator="\n")
    header = ["m", "count", "realizations", "counting_mode"]
    if hist.sigma is not None:
        header.append("sigma")
    w.writerow(header)
    for m, c in hist.counts.items():
        row = [m, repr(float(c)), hist.realizations, hist.counting_mode]
        if hist.sigma is not None:
            row.append(hist.sigma)
        w.writerow(row)


def cmd_fit_tail(args) -> int:
    hist = read_histogram_csv(args.csv)
    fit = fit_power_law_tail(hist, args.m_lo, args.m_hi, args.bins_per_decade)
    print(f"slope\t{fit.slope:.6f}")
    print(f"log10_amplitude\t{fit.log_amplitude:.6f}")
    print(f"amplitude\t{fit.amplitude:.6g}")
    print(f"r2\t{fit.r2:.6f}")
    print(f"bins\t{fit.n_bins}")
    if args.export_plot:
        pts = log_bin(hist, args.bins_per_decade)
        with open(args.export_plot, "w") as fh:
            fh.write("# center density\n")
            for c, d in pts:
                fh.write(f"{c!r} {d!r}\n")
    return EXIT_OK


def cmd_estimate_rates(args) -> int:
    est = estimate_rates(args.gene_rate, args.genes, args.coding_fraction,
                         args.genome_length, args.M1, args.tail_bases,
                         target_length=args.target_length)
    for key in ("beta0", "L0", "lambda0", "beta", "time_unit", "dup_bases_per_My", "age_My"):
        print(f"{key}\t{getattr(est, key):.6g}")
    return EXIT_OK


def cmd_random_baseline(args) -> int:
    rng = np.random.default_rng(args.seed)
    hist = None
    for _ in range(args.realizations):
        h = repeat_length_histogram(Sequence.random(args.L, args.sigma, rng), args.counting_mode)
        hist = h if hist is None else hist.merge(h)
    peak, max_len = random_peak_stats(args.L, args.sigma)
    print(f"dupfrag:info:peak: expected_mode={peak:.4f} observed_mode={hist.mode} "
          f"expected_max={max_len:.4f} observed_max={hist.max_length}", file=sys.stderr)
    if args.out:
        out = _out_dir(args)
        write_histogram_csv(hist, out / "histogram.csv")
        cfg = {"L": args.L, "sigma": args.sigma, "realizations": args.realizations,
               "counting_mode": args.counting_mode}
        RunManifest("random-baseline", cfg, seed=args.seed,
                    outputs=["histogram.csv"]).write(out / "manifest.json")
    else:
        _print_hist(hist)
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def _model_flags(p, need_D=False):
    p.add_argument("--L", type=int, help="chromosome length in bases")
    p.add_argument("--beta", type=float, help="duplications per time unit")
    p.add_argument("--mu", type=float, help="substitutions per base per time unit")
    p.add_argument("--a", type=int, help="base length (default 1)")
    p.add_argument("--D", type=int, help="monoscale duplication length")
    p.add_argument("--source", help='source as JSON, e.g. \'{"type":"powerlaw","gamma":2.4,"N":1000}\'')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dupfrag", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, seed=False):
        p.add_argument("--out", help="output directory")
        p.add_argument("--config", help="JSON manifest or config file")
        if seed:
            p.add_argument("--seed", type=int)

    p = sub.add_parser("simulate", help="run a simulation ensemble")
    common(p, seed=True)
    _model_flags(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--sample-interval", dest="sample_interval", type=int)
    p.add_argument("--realizations", type=int)
    p.add_argument("--topology", choices=["circular", "linear"])
    p.add_argument("--counting-mode", dest="counting_mode", choices=["occurrences", "classes"])
    p.add_argument("--sigma", type=int)
    p.add_argument("--duplication-mode", dest="duplication_mode", choices=["poisson", "single"])
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("solve-monoscale", help="stationary counts for a single duplication length")
    common(p)
    _model_flags(p)
    p.add_argument("--method", choices=["backward", "iteration", "matrix", "closed-form"],
                   default="backward")
    p.set_defaults(func=cmd_solve_monoscale)

    p = sub.add_parser("solve-powerlaw", help="stationary counts for a general source")
    common(p)
    _model_flags(p)
    p.set_defaults(func=cmd_solve_powerlaw)

    p = sub.add_parser("continuum", help="continuum stationary density and tail law")
    common(p)
    p.add_argument("--source", choices=["monodisperse", "uniform"], default="monodisperse")
    p.add_argument("--lo", type=float, default=0.5)
    p.add_argument("--hi", type=float, default=1.5)
    p.add_argument("--mu-bar", dest="mu_bar", type=float, default=1.0)
    p.add_argument("--x-min", dest="x_min", type=float, default=1e-3)
    p.add_argument("--x-max", dest="x_max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--M1", type=float, help="also write S(m) = 2 M1 beta / (mu m^3)")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1e-4)
    p.set_defaults(func=cmd_continuum)

    p = sub.add_parser("analyze-fasta", help="repeat-length histogram of a FASTA file")
    common(p)
    p.add_argument("fasta")
    p.add_argument("--mask-policy", dest="mask_policy", default="skip_masked",
                   choices=[m.value for m in MaskPolicy])
    p.add_argument("--counting-mode", dest="counting_mode", default="occurrences",
                   choices=["occurrences", "classes"])
    p.set_defaults(func=cmd_analyze_fasta)

    p = sub.add_parser("fit-tail", help="power-law fit of a histogram CSV")
    p.add_argument("csv")
    p.add_argument("--m-lo", dest="m_lo", type=int, required=True)
    p.add_argument("--m-hi", dest="m_hi", type=int, required=True)
    p.add_argument("--bins-per-decade", dest="bins_per_decade", type=int, default=10)
    p.add_argument("--export-plot", dest="export_plot",
                   help="write log-binned 'center density' columns for gnuplot")
    p.set_defaults(func=cmd_fit_tail)

    p = sub.add_parser("estimate-rates", help="biological rate arithmetic")
    p.add_argument("--gene-rate", dest="gene_rate", type=float, default=1e-2,
                   help="duplications per gene per My")
    p.add_argument("--genes", type=float, default=1e4)
    p.add_argument("--coding-fraction", dest="coding_fraction", type=float, default=0.02)
    p.add_argument("--genome-length", dest="genome_length", type=float, default=3e9)
    p.add_argument("--target-length", dest="target_length", type=float)
    p.add_argument("--M1", type=float, default=300.0)
    p.add_argument("--tail-bases", dest="tail_bases", type=float, default=1e6)
    p.set_defaults(func=cmd_estimate_rates)

    p = sub.add_parser("random-baseline", help="repeat histogram of uniform random sequences")
    p.add_argument("--out")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--sigma", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--realizations", type=int, default=1)
    p.add_argument("--counting-mode", dest="counting_mode", default="occurrences",
                   choices=["occurrences", "classes"])
    p.set_defaults(func=cmd_random_baseline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _fail("usage", str(exc))
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        _fail("usage", "a subcommand is required")
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="dupfrag:log:%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        _fail("input", str(exc))
        return EXIT_INPUT
    except NumericalError as exc:
        _fail("numerical", str(exc))
        return EXIT_NUMERIC
    except OSError as exc:
        _fail("input", str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
