"""Command-line front end: experiment orchestration and structured output.

Config format: plain text, one `key = value` per line, `#` comments.  CLI
flags override file values; the merged effective config is echoed as comment
lines into every CSV, so any output names the inputs that produced it.  The
thread count is excluded from the echo (results are thread-count-invariant by
the chunking contract) and recorded in the manifest instead.

Exit codes: 0 success, 2 preconditions unmet, 3 inconclusive-only results,
1 internal error, 64 usage errors.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .mc import default_threads
from .reports import (
    CENSUS_HEADER,
    INCONCLUSIVE,
    LEMMA_HEADER,
    PRECONDITIONS_UNMET,
    RANK_HEADER,
    SINGULARITY_HEADER,
    format_value,
)
from .rng import SeedSpec

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_PRECONDITION = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; contract says 64
        raise UsageError(message)


@dataclass
class LabConfig:
    master_seed: int = 2024
    stream_label: str = "lab"
    threads: int = 0  # 0: use default_threads()
    out_dir: str = "siglab-out"
    budget: int = 100_000
    level: float = 0.99
    kappa0: float = 0.5
    kappa1: float = 2.0
    c0: float = 0.25
    L: float = 2.0
    mu: float = 0.25
    extra: dict = field(default_factory=dict)

    def seed(self) -> SeedSpec:
        return SeedSpec(self.master_seed, self.stream_label)

    def thread_count(self) -> int:
        return self.threads if self.threads > 0 else default_threads()

    def echo_lines(self) -> list[str]:
        """Deterministic key=value lines (thread count deliberately omitted)."""
        pairs = {
            "master_seed": self.master_seed,
            "stream_label": self.stream_label,
            "budget": self.budget,
            "level": self.level,
            "kappa0": self.kappa0,
            "kappa1": self.kappa1,
            "c0": self.c0,
            "L": self.L,
            "mu": self.mu,
        }
        pairs.update(self.extra)
        return [f"# {k} = {pairs[k]}" for k in sorted(pairs)]

    def config_hash(self) -> str:
        return hashlib.sha256("\n".join(self.echo_lines()).encode()).hexdigest()


_CONFIG_FIELDS = {
    "master_seed": int,
    "stream_label": str,
    "threads": int,
    "out_dir": str,
    "budget": int,
    "level": float,
    "kappa0": float,
    "kappa1": float,
    "c0": float,
    "L": float,
    "mu": float,
}


def load_config(path: str | None) -> LabConfig:
    cfg = LabConfig()
    if path is None:
        return cfg
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in _CONFIG_FIELDS:
                setattr(cfg, key, _CONFIG_FIELDS[key](value))
            else:
                cfg.extra[key] = value
    return cfg


def _apply_overrides(cfg: LabConfig, args) -> LabConfig:
    for key in _CONFIG_FIELDS:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            setattr(cfg, key, cli_val)
    return cfg


def write_csv(path: str, header: list[str], rows, cfg: LabConfig) -> None:
    lines = cfg.echo_lines()
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_value(x) for x in row))
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


@dataclass
class RunManifest:
    tool_version: str
    config_hash: str
    started: str
    finished: str = ""
    outputs: list = field(default_factory=list)
    exit_status: int = 0
    threads: int = 1

    def write(self, path: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(self.__dict__, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",") if x.strip() != ""])
    except ValueError as exc:
        raise UsageError(f"bad vector {text!r}: {exc}") from exc


def _parse_nrange(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def _exit_from_verdicts(verdicts: list[str]) -> int:
    if verdicts and all(v == INCONCLUSIVE for v in verdicts):
        return EXIT_INCONCLUSIVE
    if any(v == PRECONDITIONS_UNMET for v in verdicts):
        return EXIT_PRECONDITION
    return EXIT_OK


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_rho(args, cfg: LabConfig, outputs: list) -> int:
    from .concentration import rho_eps_exact, rho_exact

    v = _parse_vector(args.vector)
    if args.eps is not None:
        print(format_value(rho_eps_exact(v, args.eps)))
    else:
        print(format_value(rho_exact(v)))
    return EXIT_OK


def cmd_singularity_curve(args, cfg: LabConfig, outputs: list) -> int:
    from .experiments import fit_exponential, singularity_exhaustive, singularity_mc

    ns = _parse_nrange(args.n)
    rows = []
    for n in ns:
        if args.method == "exhaustive":
            row = singularity_exhaustive(n)
        else:
            row = singularity_mc(
                n, cfg.budget, cfg.seed().child(f"sing{n}"),
                threads=cfg.thread_count(), level=cfg.level,
            )
        rows.append(row)
        print(f"n={n} method={row.method} p_hat={row.p_hat:.6g} "
              f"[{row.ci_low:.6g}, {row.ci_high:.6g}]")
    path = os.path.join(cfg.out_dir, "singularity.csv")
    write_csv(
        path,
        SINGULARITY_HEADER,
        [
            [r.n, r.method, r.count, r.total, r.p_hat, r.ci_low, r.ci_high,
             str(r.seed) if r.seed else "", r.samples]
            for r in rows
        ],
        cfg,
    )
    outputs.append(path)
    if args.fit and len(rows) >= 4:
        fit = fit_exponential(rows, (min(ns), max(ns)), level=cfg.level)
        print(f"fit: slope={fit.slope:.4f} +- {fit.slope_se:.4f} "
              f"ci=({fit.slope_ci[0]:.4f}, {fit.slope_ci[1]:.4f})")
    return EXIT_OK


def cmd_rank_evolution(args, cfg: LabConfig, outputs: list) -> int:
    from .experiments import rank_evolution

    res = rank_evolution(
        args.n_base,
        args.method,
        cfg.budget,
        cfg.seed().child("rank-evo"),
        gamma=args.gamma,
        threads=cfg.thread_count(),
        level=cfg.level,
    )
    rows = []
    for rec in res.records:
        for (rm, rm1), count in sorted(rec.joint_counts.items()):
            rows.append([rec.m, rm, rm1, count, rec.total])
    path = os.path.join(cfg.out_dir, "rank_evolution.csv")
    write_csv(path, RANK_HEADER, rows, cfg)
    outputs.append(path)
    print(f"master inequality: lhs={res.lhs:.6g} rhs={res.rhs:.6g} "
          f"verdict={res.master_verdict} interlacing_violations={res.interlacing_violations}")
    for rep in res.surrogate_reports:
        print(f"{rep.lemma_id} (surrogate): {rep.verdict} "
              f"lhs={rep.lhs_hat:.6g} rhs={rep.rhs_hat:.6g}")
    return _exit_from_verdicts([res.master_verdict])


def cmd_lemma_suite(args, cfg: LabConfig, outputs: list) -> int:
    from .suites import LEMMA_SUITE, run_suite

    only = args.only or None
    if only:
        unknown = [x for x in only if x not in LEMMA_SUITE]
        if unknown:
            raise UsageError(f"unknown lemma ids: {', '.join(unknown)}")
    reports = run_suite(
        only=only,
        seed=cfg.seed().child("lemma-suite"),
        scale=args.scale,
        threads=cfg.thread_count(),
    )
    path = os.path.join(cfg.out_dir, "lemma_suite.csv")
    write_csv(path, LEMMA_HEADER, [r.to_row() for r in reports], cfg)
    outputs.append(path)
    for r in reports:
        print(f"{r.lemma_id:22s} {r.verdict:14s} lhs={r.lhs_hat:.6g} rhs={r.rhs_hat:.6g}")
    return _exit_from_verdicts([r.verdict for r in reports])


def cmd_lcd_stats(args, cfg: LabConfig, outputs: list) -> int:
    from .lcd import lcd, lcd_rarity_experiment

    if args.rarity:
        rep = lcd_rarity_experiment(
            d=args.d, N=args.N, kappa=args.kappa, alpha=args.alpha,
            budget=cfg.budget, seed=cfg.seed().child("lcd-rare"),
            c0=cfg.c0, threads=cfg.thread_count(), level=cfg.level,
        )
        path = os.path.join(cfg.out_dir, "lcd_rarity.csv")
        write_csv(path, LEMMA_HEADER, [rep.to_row()], cfg)
        outputs.append(path)
        print(f"lcd-rare verdict={rep.verdict} freq={rep.lhs_hat:.6g} bound={rep.rhs_hat:.6g}")
        return _exit_from_verdicts([rep.verdict])
    if not args.vector:
        raise UsageError("lcd-stats needs --vector unless --rarity is given")
    v = _parse_vector(args.vector)
    res = lcd(
        v, args.alpha, phi_max=args.phi_max,
        grid_resolution=args.resolution, mode=args.mode,
        collect_certificate=args.certificate is not None,
    )
    print(f"status={res.status} bracket=[{format_value(res.bracket_low)}, "
          f"{format_value(res.bracket_high)}] witness={res.witness_phi}")
    if args.certificate:
        with open(args.certificate, "w") as fh:
            fh.write("# phi torus_norm margin\n")
            for phi, tn, mg in res.evaluations:
                fh.write(f"{format_value(phi)} {format_value(tn)} {format_value(mg)}\n")
        outputs.append(args.certificate)
    return EXIT_OK


def cmd_net_census(args, cfg: LabConfig, outputs: list) -> int:
    from .nets import build_box_cover, net_census_tiny

    rep = net_census_tiny(
        n=args.n, d=args.d, eps=args.eps, L=cfg.L,
        budget=cfg.budget, seed=cfg.seed().child("census"),
        kappa0=cfg.kappa0, kappa1=cfg.kappa1, mu=cfg.mu,
        n_points=args.points, threads=cfg.thread_count(), level=cfg.level,
    )
    try:
        cover = build_box_cover(
            n=args.n, d=args.d, eps=args.eps, kappa0=cfg.kappa0, kappa1=cfg.kappa1
        )
        print(f"cover: enumerated family size {cover.family_size()} "
              f"<= kappa^n = {cover.kappa**args.n:.4g}")
    except ValueError as exc:
        print(f"cover: not defined at this scale ({exc})")
    rows = []
    for h, est, verdict in rep.rows:
        if est is None:
            rows.append([h, math.nan, math.nan, math.nan, verdict])
        else:
            rows.append([h, est.p_hat, est.ci_low, est.ci_high, verdict])
    path = os.path.join(cfg.out_dir, "census.csv")
    write_csv(path, CENSUS_HEADER, rows, cfg)
    outputs.append(path)
    print(f"|Lambda_eps|={rep.lambda_size} classified={rep.classified} "
          f"member_fraction={rep.member_fraction:.4f} "
          f"ci=({rep.fraction_ci[0]:.4f}, {rep.fraction_ci[1]:.4f})")
    verdicts = [row[2] for row in rep.rows]
    if verdicts and all(v == "inconclusive" for v in verdicts):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_threshold(args, cfg: LabConfig, outputs: list) -> int:
    from .concentration import threshold_estimate

    v = _parse_vector(args.vector)
    v = v / np.linalg.norm(v)
    res = threshold_estimate(
        v, cfg.L, args.n, args.d, cfg.budget, cfg.seed().child("threshold"),
        mu=cfg.mu, resolution=args.resolution,
        max_budget=args.max_budget or cfg.budget * 100,
        threads=cfg.thread_count(), level=cfg.level,
    )
    header = ["t_low", "t_high", "L", "inconclusive", "samples", "seed"]
    path = os.path.join(cfg.out_dir, "threshold.csv")
    write_csv(
        path, header,
        [[res.t_low, res.t_high, res.L, res.inconclusive, res.samples, str(res.seed)]],
        cfg,
    )
    outputs.append(path)
    print(f"T_L bracket [{format_value(res.t_low)}, {format_value(res.t_high)}] "
          f"inconclusive={res.inconclusive}")
    return EXIT_INCONCLUSIVE if res.inconclusive else EXIT_OK


def _read_csv(path: str):
    header = None
    rows = []
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path}: no header found")
    return header, rows


def cmd_plot(args, cfg: LabConfig, outputs: list) -> int:
    import matplotlib

    matplotlib.use("svg")
    matplotlib.rcParams["svg.hashsalt"] = "siglab"
    import matplotlib.pyplot as plt

    header, rows = _read_csv(args.csv)
    if not rows:
        raise ValueError(f"{args.csv}: no data rows")
    out = args.out or (os.path.splitext(args.csv)[0] + ".svg")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if args.kind == "singularity":
        if header != SINGULARITY_HEADER:
            raise ValueError("csv schema does not match the singularity curve")
        ns = np.array([int(r[0]) for r in rows])
        ps = np.array([float(r[4]) for r in rows])
        los = np.array([float(r[5]) for r in rows])
        his = np.array([float(r[6]) for r in rows])
        ax.errorbar(ns, ps, yerr=[ps - los, his - ps], fmt="o", capsize=3)
        ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("P(det A = 0)")
        if len(ns) >= 4 and np.all(ps > 0):
            coef = np.polyfit(ns, np.log(ps), 1)
            xs = np.linspace(ns.min(), ns.max(), 64)
            ax.plot(xs, np.exp(coef[1] + coef[0] * xs), "--")
            ax.set_title(f"singularity probability (fit slope {coef[0]:.3f})")
        else:
            ax.set_title("singularity probability")
    elif args.kind == "lemma":
        if header != LEMMA_HEADER:
            raise ValueError("csv schema does not match lemma reports")
        labels = [f"{r[0]}#{i}" for i, r in enumerate(rows)]
        margins = []
        for r in rows:
            lhs, rhs = float(r[3]), float(r[6])
            if lhs > 0 and rhs > 0 and math.isfinite(rhs):
                margins.append(math.log10(rhs / lhs))
            else:
                margins.append(0.0)
        ax.barh(range(len(rows)), margins)
        ax.set_yticks(range(len(rows)))
        ax.set_yticklabels(labels, fontsize=5)
        ax.set_xlabel("log10(bound / estimate)")
        ax.set_title("lemma margins")
    else:
        raise UsageError(f"unknown plot kind {args.kind!r}")
    fig.tight_layout()
    fig.savefig(out, metadata={"Date": None})
    plt.close(fig)
    outputs.append(out)
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    p = _Parser(prog="siglab", description=__doc__)
    p.add_argument("--config", help="key = value config file")
    for key, typ in _CONFIG_FIELDS.items():
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ, default=None)
    # the same flags are accepted after the subcommand; SUPPRESS keeps a
    # subparser from clobbering a value given before it
    common = _Parser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS)
    for key, typ in _CONFIG_FIELDS.items():
        p_key = f"--{key.replace('_', '-')}"
        common.add_argument(p_key, dest=key, type=typ, default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("rho", parents=[common],
                        help="exact atom / window concentration of a walk")
    sp.add_argument("--vector", required=True)
    sp.add_argument("--eps", type=float, default=None)

    sp = sub.add_parser("singularity-curve", parents=[common],
                        help="exact or MC singularity curve")
    sp.add_argument("--n", required=True, help="range like 2..5 or list 8,10,12")
    sp.add_argument("--method", choices=["exhaustive", "monte-carlo"], required=True)
    sp.add_argument("--fit", action="store_true")

    sp = sub.add_parser("rank-evolution", parents=[common],
                        help="coupled-minor rank statistics")
    sp.add_argument("--n-base", type=int, required=True)
    sp.add_argument("--method", choices=["exhaustive", "monte-carlo"], required=True)
    sp.add_argument("--gamma", type=float, default=None)

    sp = sub.add_parser("lemma-suite", parents=[common],
                        help="run the inequality batteries")
    sp.add_argument("--only", nargs="*", default=None)
    sp.add_argument("--scale", type=float, default=1.0)

    sp = sub.add_parser("lcd-stats", parents=[common],
                        help="least-common-denominator brackets")
    sp.add_argument("--vector")
    sp.add_argument("--alpha", type=float, default=0.1)
    sp.add_argument("--phi-max", dest="phi_max", type=float, default=32.0)
    sp.add_argument("--resolution", type=float, default=1e-3)
    sp.add_argument("--mode", choices=["working", "intro"], default="working")
    sp.add_argument("--certificate", default=None)
    sp.add_argument("--rarity", action="store_true")
    sp.add_argument("--d", type=int, default=32)
    sp.add_argument("--N", type=int, default=8)
    sp.add_argument("--kappa", type=float, default=2.0)

    sp = sub.add_parser("net-census", parents=[common],
                        help="census of the trivial net at tiny n")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--points", type=int, default=200)

    sp = sub.add_parser("threshold", parents=[common],
                        help="bracket the small-ball threshold")
    sp.add_argument("--vector", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--resolution", type=float, default=1e-3)
    sp.add_argument("--max-budget", dest="max_budget", type=int, default=None)

    sp = sub.add_parser("plot", parents=[common],
                        help="deterministic SVG from a result CSV")
    sp.add_argument("csv")
    sp.add_argument("--kind", choices=["singularity", "lemma"], required=True)
    sp.add_argument("--out", default=None)

    return p


_COMMANDS = {
    "rho": cmd_rho,
    "singularity-curve": cmd_singularity_curve,
    "rank-evolution": cmd_rank_evolution,
    "lemma-suite": cmd_lemma_suite,
    "lcd-stats": cmd_lcd_stats,
    "net-census": cmd_net_census,
    "threshold": cmd_threshold,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    os.makedirs(cfg.out_dir, exist_ok=True)
    manifest = RunManifest(
        tool_version=__version__,
        config_hash=cfg.config_hash(),
        started=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        threads=cfg.thread_count(),
    )
    outputs: list = []
    try:
        code = _COMMANDS[args.command](args, cfg, outputs)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - the contract maps these to 1
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_INTERNAL
    manifest.finished = datetime.datetime.now(datetime.timezone.utc).isoformat()
    manifest.outputs = outputs
    manifest.exit_status = code
    manifest.write(os.path.join(cfg.out_dir, "manifest.json"))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
