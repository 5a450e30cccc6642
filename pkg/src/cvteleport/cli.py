"""Command-line front end: figure data as CSV and single-point computations.

    cvteleport fig fig3 --eta-steps 11 --r-steps 20 --out fig3.csv
    cvteleport compute fidelity --scheme pa --eta 0.7 --R 3 --input coherent --alpha 3+3j
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .channel_model import SchemeParams, make_channel
from .entanglement_metrics import teleported_epr_inseparability
from .errors import ConvergenceFailure, CVTeleportError
from .fidelity_engine import entanglement_fidelity
from .gaussian_core import InputSpec, prepare_state
from .protocol_sim import run_ensemble

__all__ = ["FigureJob", "run_figure", "figure_table", "build_parser", "main"]

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")
EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 1

FIG3_ALPHA = 3 + 3j
FIG4_ETA = 0.7
FIG5_N = 5
FIG6_S_IN = -1.0
FIG7_NBAR = 1.3811
GAINS = (1.0, 2.0, 3.0)


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError("grid step count must be >= 2")
        if not self.hi > self.lo:
            raise ValueError("grid upper bound must exceed the lower bound")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)

    def __str__(self):
        return f"{self.lo:g}:{self.hi:g}:{self.steps}"


@dataclass(frozen=True)
class FigureJob:
    figure_id: str
    eta: Axis = Axis(0.5, 1.0, 51)
    R: Axis = Axis(0.05, 4.0, 80)
    s_channel: float = math.inf
    symmetric: bool = False
    seed: int = 0
    output_path: str | None = None

    def __post_init__(self):
        if self.figure_id not in FIGURES:
            raise ValueError(f"unknown figure {self.figure_id!r}")

    def echo(self) -> str:
        parts = [f"figure={self.figure_id}"]
        if self.figure_id != "fig4":
            parts.append(f"eta={self.eta}")
        if self.figure_id in ("fig3", "fig4"):
            parts.append(f"R={self.R}")
        parts += [
            f"s_channel={_fmt_s(self.s_channel)}",
            f"noise={'symmetric' if self.symmetric else 'exact'}",
            f"seed={self.seed}",
        ]
        return " ".join(parts)


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float | str | None]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _fmt_s(s: float) -> str:
    return "inf" if math.isinf(s) else f"{s:g}"


def _fmt(v: float | str | None) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    out = f"{v:.6f}"
    return "0.000000" if out == "-0.000000" else out


def _cell(table: Table, where: str, fn: Callable[[], float]) -> float | None:
    try:
        return fn()
    except ConvergenceFailure as exc:
        table.warnings.append(f"# warning: {where}: {exc}")
        return None


def _bs(eta: float, s: float) -> SchemeParams:
    return SchemeParams("BS", eta, s)


def _pa(eta: float, R: float, s: float) -> SchemeParams:
    return SchemeParams("PA", eta, s, R)


def _fe(p: SchemeParams, spec: InputSpec, sym: bool) -> float:
    return entanglement_fidelity(p, spec, symmetric=sym).value


def figure_table(job: FigureJob) -> Table:
    s, sym = job.s_channel, job.symmetric
    fid = job.figure_id
    if fid == "fig2":
        specs = [InputSpec.coherent(FIG3_ALPHA)] + [InputSpec.fock(n) for n in (1, 3, 5)]
        t = Table(["eta", "Fe_coherent", "Fe_N1", "Fe_N3", "Fe_N5"])
        for eta in job.eta.values():
            row = [eta]
            for spec in specs:
                row.append(_cell(t, f"eta={eta:g} {spec.describe()}", lambda: _fe(_bs(eta, s), spec, sym)))
            t.rows.append(row)
        return t
    if fid == "fig3":
        spec = InputSpec.coherent(FIG3_ALPHA)
        t = Table(["eta", "R", "Fe", "Fe_BS"])
        for eta in job.eta.values():
            bs = _cell(t, f"eta={eta:g} BS", lambda: _fe(_bs(eta, s), spec, sym))
            for R in job.R.values():
                fe = _cell(t, f"eta={eta:g} R={R:g}", lambda: _fe(_pa(eta, R, s), spec, sym))
                t.rows.append([eta, R, fe, bs])
        return t
    if fid == "fig4":
        ns = (1, 5, 10)
        t = Table(["R"] + [f"Fe_N{n}" for n in ns] + [f"Fe_BS_N{n}" for n in ns])
        bs = [
            _cell(t, f"BS N={n}", lambda: _fe(_bs(FIG4_ETA, s), InputSpec.fock(n), sym))
            for n in ns
        ]
        for R in job.R.values():
            row = [R]
            for n in ns:
                row.append(_cell(t, f"R={R:g} N={n}", lambda: _fe(_pa(FIG4_ETA, R, s), InputSpec.fock(n), sym)))
            t.rows.append(row + bs)
        return t
    if fid in ("fig5", "fig7"):
        spec = InputSpec.fock(FIG5_N) if fid == "fig5" else InputSpec.thermal(FIG7_NBAR)
        t = Table(["eta"] + [f"Fe_R{R:g}" for R in GAINS] + ["Fe_BS"])
        for eta in job.eta.values():
            row = [eta]
            for R in GAINS:
                row.append(_cell(t, f"eta={eta:g} R={R:g}", lambda: _fe(_pa(eta, R, s), spec, sym)))
            row.append(_cell(t, f"eta={eta:g} BS", lambda: _fe(_bs(eta, s), spec, sym)))
            t.rows.append(row)
        return t
    # fig6
    labels = ["BS"] + [f"R{R:g}" for R in GAINS]
    t = Table(["eta"] + [f"Is_{x}" for x in labels] + [f"dB_{x}" for x in labels])
    for eta in job.eta.values():
        schemes = [_bs(eta, s)] + [_pa(eta, R, s) for R in GAINS]
        res = [teleported_epr_inseparability(p, FIG6_S_IN, symmetric=sym) for p in schemes]
        t.rows.append([eta] + [r.normalized for r in res] + [r.dB for r in res])
    return t


def render_csv(header: str, table: Table) -> str:
    buf = io.StringIO(newline="")
    buf.write(f"# cvteleport {__version__} {header}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    for w in table.warnings:
        buf.write(w + "\n")
    return buf.getvalue()


def run_figure(job: FigureJob) -> tuple[str, Table]:
    """Compute a figure's table; write it to ``job.output_path`` when set. Returns (csv, table)."""
    table = figure_table(job)
    text = render_csv(job.echo(), table)
    if job.output_path:
        with open(job.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text, table


# -- argument parsing -------------------------------------------------------


def _s_value(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("channel squeezing must be > 0 or 'inf'")
    return v


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cvteleport", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"cvteleport {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--s-channel", type=_s_value, default=math.inf, metavar="VALUE|inf")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument(
        "--symmetric-noise",
        action="store_true",
        help="PA: use sigma_x^2 for both quadratures (large-gain approximation)",
    )

    fig = sub.add_parser("fig", parents=[common], help="tabulate the data behind a figure")
    fig.add_argument("figure", choices=FIGURES)
    fig.add_argument("--out", metavar="PATH", help="CSV output file (default: stdout)")
    fig.add_argument("--eta-min", type=float, default=0.5)
    fig.add_argument("--eta-max", type=float, default=1.0)
    fig.add_argument("--eta-steps", type=int, default=51)
    fig.add_argument("--r-min", type=float, default=0.05)
    fig.add_argument("--r-max", type=float, default=4.0)
    fig.add_argument("--r-steps", type=int, default=80)

    comp = sub.add_parser("compute", parents=[common], help="single-point computations")
    comp.add_argument("what", choices=("fidelity", "insep", "simulate", "channel"))
    comp.add_argument("--scheme", type=str.upper, choices=("BS", "PA"), required=True)
    comp.add_argument("--eta", type=float, required=True)
    comp.add_argument("--R", type=float, default=None)
    comp.add_argument("--input", choices=("coherent", "fock", "thermal"), default="coherent")
    comp.add_argument("--alpha", type=_complex, default=FIG3_ALPHA, metavar="a+bj")
    comp.add_argument("--n", type=int, default=1)
    comp.add_argument("--nbar", type=float, default=FIG7_NBAR)
    comp.add_argument("--s-in", type=float, default=FIG6_S_IN)
    comp.add_argument("--runs", type=int, default=100_000)
    return ap


def _scheme_from(args, ap) -> SchemeParams:
    if args.scheme == "PA":
        if args.R is None:
            ap.error("--R is required with --scheme pa")
        return SchemeParams("PA", args.eta, args.s_channel, args.R)
    if args.R is not None:
        ap.error("--R only applies to --scheme pa")
    return SchemeParams("BS", args.eta, args.s_channel)


def _input_from(args) -> InputSpec:
    if args.input == "coherent":
        return InputSpec.coherent(args.alpha)
    if args.input == "fock":
        return InputSpec.fock(args.n)
    return InputSpec.thermal(args.nbar)


def _compute(args, ap, out) -> int:
    p = _scheme_from(args, ap)
    header = p.describe() + f" noise={'symmetric' if args.symmetric_noise else 'exact'}"
    sym = args.symmetric_noise
    if args.what == "channel":
        ch = make_channel(p, symmetric=sym)
        t = Table(["k", "sigma_sq", "sigma_sq_y", "epsilon"], [[ch.k, ch.sigma_sq, ch.sigma_sq_y, ch.epsilon]])
    elif args.what == "insep":
        header += f" s_in={args.s_in:g}"
        r = teleported_epr_inseparability(p, args.s_in, symmetric=sym)
        t = Table(["i_s", "normalized", "dB", "entangled"], [[r.i_s, r.normalized, r.dB, str(r.entangled).lower()]])
    elif args.what == "fidelity":
        spec = _input_from(args)
        header += f" input={spec.describe()}"
        r = entanglement_fidelity(p, spec, symmetric=sym)
        t = Table(["fidelity", "err_estimate"], [[r.value, r.err_estimate]])
        header += f" method={r.method}"
    else:
        spec = _input_from(args)
        header += f" input={spec.describe()} runs={args.runs} seed={args.seed}"
        st = run_ensemble(p, prepare_state(spec), args.runs, args.seed, symmetric=sym)
        names = ["mean_x", "mean_y", "cov_xx", "cov_xy", "cov_yy"]
        est = [*st.mean_est, st.cov_est[0, 0], st.cov_est[0, 1], st.cov_est[1, 1]]
        se = [*st.mean_se, st.cov_se[0, 0], st.cov_se[0, 1], st.cov_se[1, 1]]
        pm, pc = st.predicted.mean, st.predicted.cov
        pred = [*pm, pc[0, 0], pc[0, 1], pc[1, 1]]
        t = Table(["quantity", "estimate", "std_err", "predicted", "z"])
        for i, name in enumerate(names):
            t.rows.append([name, est[i], se[i], pred[i], (est[i] - pred[i]) / max(se[i], 1e-12)])
    out.write(render_csv(header, t))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "compute":
            return _compute(args, ap, out)
        job = FigureJob(
            args.figure,
            Axis(args.eta_min, args.eta_max, args.eta_steps),
            Axis(args.r_min, args.r_max, args.r_steps),
            args.s_channel,
            args.symmetric_noise,
            args.seed,
            args.out,
        )
        text, table = run_figure(job)
        if not args.out:
            out.write(text)
        if table.warnings:
            for w in table.warnings:
                print(w.lstrip("# "), file=sys.stderr)
            return EXIT_CONVERGENCE
        return EXIT_OK
    except ConvergenceFailure as exc:
        print(f"cvteleport: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (CVTeleportError, ValueError) as exc:
        print(f"cvteleport: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cvteleport: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
