"""Command line entry point: ``kicktops <subcommand> [flags]``.

Every subcommand writes one CSV document made of '#'-prefixed metadata
lines followed by one or more blocks. Each block starts with a
``# block: <name>`` line and its own column header. Numbers are written
with 17 significant digits. Wall time is reported on stderr only, so the
CSV bytes depend on nothing but the configuration.
"""
from __future__ import annotations

import argparse
import io
import sys
import time
from contextlib import nullcontext

import numpy as np

from . import __version__, analysis, experiments, kernels
from .config import ConfigError, ExperimentConfig, PRESETS, build_config, load_config_file, parse_values

COMMANDS = ("quantum", "classical", "compare", "lyapunov", "scaling", "microcanonical")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x != x:
        return "nan"
    return f"{x:.17g}"


class CsvDocument:
    def __init__(self, command: str, cfg: ExperimentConfig):
        self.buf = io.StringIO()
        self.command = command
        self.cfg = cfg
        self._line(f"# kicktops {__version__}")
        self._line(f"# command: {command}")
        self._line(f"# backend: {kernels.BACKEND}")
        for k, v in cfg.items():
            self._line(f"# config {k}={v}")
        for w in cfg.warnings:
            self._line(f"# warning: {w}")

    def _line(self, text: str):
        self.buf.write(text + "\n")

    def comment(self, text: str):
        self._line(f"# {text}")

    def block(self, name: str, columns, rows):
        self._line(f"# block: {name}")
        self._line(",".join(columns))
        for row in rows:
            self._line(",".join(r if isinstance(r, str) else fmt(r) for r in row))

    def checks(self, checks: experiments.Checks):
        for line in checks.lines():
            self._line(f"# check {line}")

    def text(self) -> str:
        return self.buf.getvalue()


def _labels_text(d) -> list[str]:
    # doubled labels back to exact decimal text
    return [str(int(t) // 2) if t % 2 == 0 else f"{int(t) / 2:.1f}" for t in d.two_labels]


def cmd_quantum(cfg: ExperimentConfig, doc: CsvDocument) -> bool:
    run = experiments.run_quantum(cfg)
    for n, dists in sorted(run.snapshots.items()):
        for o, d in dists.items():
            doc.block(f"distribution observable={o} step={n}", ("m", "probability"),
                      zip(_labels_text(d), d.probs))
    doc.block("moments", ("step", "observable", "mean", "variance", "entropy"), run.moments)
    doc.checks(run.checks)
    return run.checks.ok


def cmd_classical(cfg: ExperimentConfig, doc: CsvDocument) -> bool:
    run = experiments.run_classical(cfg)
    doc.comment(f"ensemble_size={run.ensemble_size}")
    for n, dists in sorted(run.snapshots.items()):
        for o, d in dists.items():
            rows = [(m, p, d.overflow) for m, p in zip(_labels_text(d), d.probs)]
            doc.block(f"distribution observable={o} step={n}", ("m", "probability", "overflow"), rows)
    doc.block("moments", ("step", "observable", "mean", "variance", "entropy", "overflow"), run.moments)
    doc.checks(run.checks)
    return run.checks.ok


def cmd_compare(cfg: ExperimentConfig, doc: CsvDocument) -> bool:
    run = experiments.run_compare(cfg)
    doc.comment(f"ensemble_size={run.ensemble_size}")
    cols = ["step"]
    for o in cfg.observables:
        cols += [f"h_q_{o}", f"h_c_{o}", f"sigma_qc_{o}", f"sigma_rel_{o}",
                 f"var_q_{o}", f"var_c_{o}", f"overflow_{o}"]
    cols.append("purity_l")
    rows = []
    for n in run.steps:
        row = [int(n)]
        for o in cfg.observables:
            d = run.diffs[o][n]
            row += [run.h_q[o][n], run.h_c[o][n], d.sigma_qc, d.sigma_rel,
                    run.var_q[o][n], run.var_c[o][n], run.overflow[o][n]]
        row.append(run.purity_l[n])
        rows.append(row)
    doc.block("series", cols, rows)
    for n, per_obs in sorted(run.bins.items()):
        for o, (pq, pc) in per_obs.items():
            doc.block(f"bins observable={o} step={n}", ("m", "p_q", "p_c", "difference"),
                      zip(_labels_text(pq), pq.probs, pc.probs, pq.probs - pc.probs))
    doc.checks(run.checks)
    return run.checks.ok


def cmd_lyapunov(cfg: ExperimentConfig, doc: CsvDocument) -> bool:
    run = experiments.run_lyapunov(cfg)
    doc.comment(f"chaotic_fraction={fmt(run.chaotic_fraction)} threshold={experiments.CHAOS_THRESHOLD}")
    doc.comment(f"chaotic_mean_exponent={fmt(run.chaotic_mean())}")
    rows = [tuple(a) + (lam,) for a, lam in zip(run.angles_deg, run.exponents)]
    doc.block("exponents", ("theta_s", "phi_s", "theta_l", "phi_l", "lambda"), rows)
    return bool(np.all(np.isfinite(run.exponents)))


def cmd_scaling(cfg: ExperimentConfig, doc: CsvDocument) -> bool:
    if len(cfg.sizes) < 3:
        raise ConfigError("scaling needs at least 3 sizes")
    run = experiments.run_scaling(cfg)
    if cfg.synthetic_exponent is not None:
        doc.comment("synthetic mode: sigma = l**synthetic_exponent, no simulation")
    rows = []
    for (s, l), n_e, p, r in zip(run.spins, run.ensembles, run.pure, run.reduced):
        warning = p.warning.replace(",", ";")
        rows.append((s, l, n_e, p.window[0], p.window[1], p.sigma_qc, p.sigma_rel,
                     r.sigma_qc, r.sigma_rel, warning))
    doc.block("records", ("s", "l", "ensemble", "window_n1", "window_n2", "sigma_qc_pure",
                          "sigma_rel_pure", "sigma_qc_reduced", "sigma_rel_reduced", "warning"), rows)
    fits = [("pure", run.fit_pure), ("reduced", run.fit_reduced)]
    doc.block("fit", ("column", "measure", "slope", "intercept"),
              [(name, f.measure, f.slope, f.intercept) for name, f in fits])
    doc.checks(run.checks)
    return run.checks.ok


def cmd_microcanonical(cfg: ExperimentConfig, doc: CsvDocument) -> bool:
    table = experiments.microcanonical_table(cfg)
    for o, d in table.items():
        doc.block(f"microcanonical observable={o}", ("m", "probability"), zip(_labels_text(d), d.probs))
    doc.block("entropy", ("observable", "entropy", "log_bins"),
              [(o, analysis.shannon_entropy(d), float(np.log(len(d)))) for o, d in table.items()])
    return True


HANDLERS = {
    "quantum": cmd_quantum,
    "classical": cmd_classical,
    "compare": cmd_compare,
    "lyapunov": cmd_lyapunov,
    "scaling": cmd_scaling,
    "microcanonical": cmd_microcanonical,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration (angles in degrees)")
    for flag in ("s", "l", "a", "r", "gamma", "theta-s", "phi-s", "theta-l", "phi-l", "steps",
                 "ensemble", "seed", "snapshots", "window", "sizes", "uniform", "grid",
                 "lyap-steps", "transient"):
        g.add_argument(f"--{flag}", metavar=flag.upper().replace("-", "_"))
    g.add_argument("--observable", help="comma list from lz,jz,lx")
    g.add_argument("--synthetic-exponent", help=argparse.SUPPRESS)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--out", help="output path (default: stdout)")
    parser = argparse.ArgumentParser(prog="kicktops", description="Kicked coupled tops: quantum and classical runs.")
    parser.add_argument("--version", action="version", version=f"kicktops {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    raw = {}
    for key, value in vars(args).items():
        if key in ("command", "config", "preset", "out") or value is None:
            continue
        raw[key] = value
    overrides = parse_values(raw)
    file_values = load_config_file(args.config) if args.config else None
    return build_config(args.preset, file_values, overrides)


def _thread_limit():
    # Threaded BLAS reorders sums and moves the last digit; the OpenMP map
    # kernels work per point, so only they use KICKTOPS_NUM_THREADS.
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        return nullcontext()
    return threadpool_limits(1)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = config_from_args(args)
        doc = CsvDocument(args.command, cfg)
        with _thread_limit():
            ok = HANDLERS[args.command](cfg, doc)
    except (ConfigError, analysis.AnalysisError, ValueError) as exc:
        print(f"kicktops: error: {exc}", file=sys.stderr)
        return 2
    text = doc.text()
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for w in cfg.warnings:
        print(f"kicktops: warning: {w}", file=sys.stderr)
    status = "ok" if ok else "invariant check FAILED"
    print(f"# wall_time_s={time.perf_counter() - t0:.3f} status={status}", file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
