"""Sweep mean photon number and write receiver error curves as CSV.

Example::

    cpn-lab --signal mppm --M 4 --L 2 --receivers dd,cpn,srm -o ppm24.csv
    cpn-lab --signal ppm --M 4 --nbar 1 --receivers cpn --strategy-out tree.json
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import dd_ml_error, hd_ml_error, holevo_bound, srm_error
from .detection import DetectionModel
from .ensembles import (
    Amplitude,
    Family,
    SignalEnsemble,
    hamming_7_4_codewords,
    make_coded,
    make_mppm,
    read_codeword_file,
)
from .linalg import NumericError
from .montecarlo import McConfig, simulate
from .strategy import direct_detection_tree, evaluate_strategy, export_strategy, optimize

__all__ = ["SweepSpec", "build_ensemble", "nbar_grid", "run_sweep", "write_csv", "main"]

SIGNALS = ("ppm", "mppm", "hamming-ook", "hamming-bpsk", "custom")
RECEIVERS = ("dd", "hd", "cpn", "srm", "holevo")
CSV_HEADER = ("nbar", "receiver", "pe", "detail")
THREADS_ENV = "CPN_LAB_THREADS"


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    signal: str
    receivers: tuple[str, ...]
    m_slots: int | None = None
    l_pulses: int | None = None
    nbar_min: float = 0.1
    nbar_max: float = 10.0
    points: int = 25
    grid: str = "log"
    nbar: float | None = None
    codeword_file: str | None = None
    family: str = "ook"
    mc_trials: int | None = None
    seed: int = 0
    efficiency: float = 1.0
    dark_click: float = 0.0
    output: str = "-"
    strategy_out: str | None = None


def build_ensemble(spec: SweepSpec) -> SignalEnsemble:
    """Codeword ensemble for the spec, at unit amplitude (rescaled per grid point)."""
    unit = Amplitude(1.0)
    if spec.signal == "ppm":
        return make_mppm(spec.m_slots or 4, 1, unit)
    if spec.signal == "mppm":
        return make_mppm(spec.m_slots or 4, spec.l_pulses or 2, unit)
    if spec.signal in ("hamming-ook", "hamming-bpsk"):
        if spec.m_slots not in (None, 7):
            raise UsageError("Hamming(7,4) signals have M = 7")
        family = Family.OOK if spec.signal == "hamming-ook" else Family.BPSK
        return make_coded(hamming_7_4_codewords(), family, unit)
    if spec.signal == "custom":
        if not spec.codeword_file:
            raise UsageError("--signal custom requires --codewords FILE")
        words = read_codeword_file(spec.codeword_file)
        ens = make_coded(words, spec.family, unit)
        if spec.m_slots not in (None, ens.m_slots):
            raise UsageError(f"--M {spec.m_slots} disagrees with codeword length {ens.m_slots}")
        return ens
    raise UsageError(f"unknown signal {spec.signal!r}")


def nbar_grid(spec: SweepSpec) -> list[float]:
    if spec.nbar is not None:
        return [float(spec.nbar)]
    if spec.grid == "log":
        pts = np.geomspace(spec.nbar_min, spec.nbar_max, spec.points)
    else:
        pts = np.linspace(spec.nbar_min, spec.nbar_max, spec.points)
    return [float(x) for x in pts]


def validate(spec: SweepSpec, family: Family) -> None:
    if not spec.receivers:
        raise UsageError("receiver set is empty")
    unknown = set(spec.receivers) - set(RECEIVERS)
    if unknown:
        raise UsageError(f"unknown receivers: {', '.join(sorted(unknown))}")
    if "hd" in spec.receivers and family is not Family.BPSK:
        raise UsageError("hd receiver needs a BPSK signal")
    if "dd" in spec.receivers and family is not Family.OOK:
        raise UsageError("dd receiver needs an OOK-like signal")
    if spec.nbar is None:
        if not (spec.nbar_min > 0 and spec.nbar_max > 0):
            raise UsageError("nbar bounds must be positive")
        if not spec.nbar_min < spec.nbar_max:
            raise UsageError("--nbar-min must be smaller than --nbar-max")
        if spec.points < 2:
            raise UsageError("--points must be >= 2")
        if spec.grid not in ("log", "linear"):
            raise UsageError(f"unknown grid {spec.grid!r}")
    elif spec.nbar < 0:
        raise UsageError("--nbar must be >= 0")
    if spec.strategy_out is not None:
        if "cpn" not in spec.receivers:
            raise UsageError("--strategy-out needs the cpn receiver")
        if spec.nbar is None:
            raise UsageError("--strategy-out needs a single grid point (--nbar)")
    if spec.mc_trials is not None and spec.mc_trials < 1:
        raise UsageError("--mc-trials must be >= 1")


def _num(x: float) -> str:
    return repr(float(x))


def _point_rows(base: SignalEnsemble, spec: SweepSpec, n_bar: float):
    """All CSV rows for one grid point, plus the optimal tree if cpn ran."""
    ens = base.with_n_bar(n_bar)
    model = DetectionModel(spec.efficiency, spec.dark_click)
    mc = McConfig(spec.mc_trials, spec.seed) if spec.mc_trials else None
    rows, tree = [], None

    for rx in spec.receivers:
        if rx == "cpn":
            tree, _ = optimize(ens, model)
            rows.append((n_bar, "cpn", tree.p_error(), ""))
            if mc:
                res = simulate(ens, model, tree, mc)
                rows.append((n_bar, "cpn-mc", 1.0 - res.p_correct_hat, _num(res.std_error)))
        elif rx == "dd":
            rows.append((n_bar, "dd", dd_ml_error(ens, model).p_error, ""))
            if mc:
                dd_tree = direct_detection_tree(ens)
                evaluate_strategy(dd_tree, ens, model)
                res = simulate(ens, model, dd_tree, mc)
                rows.append((n_bar, "dd-mc", 1.0 - res.p_correct_hat, _num(res.std_error)))
        elif rx == "hd":
            rows.append((n_bar, "hd", hd_ml_error(ens).p_error, ""))
        elif rx == "srm":
            rows.append((n_bar, "srm", srm_error(ens).p_error, ""))
        elif rx == "holevo":
            rows.append((n_bar, "holevo", holevo_bound(ens), ""))
    return rows, tree


def _workers() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError(f"{THREADS_ENV} must be >= 0")
    return n or (os.cpu_count() or 1)


def run_sweep(spec: SweepSpec):
    """Evaluate every receiver at every grid point.

    Returns rows sorted by (receiver, nbar) and the last optimal strategy
    tree (``None`` unless cpn ran).
    """
    base = build_ensemble(spec)
    validate(spec, base.family)
    grid = nbar_grid(spec)
    workers = min(_workers(), len(grid))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_rows, [base] * len(grid), [spec] * len(grid), grid))
    else:
        results = [_point_rows(base, spec, n) for n in grid]

    rows = [row for point_rows, _ in results for row in point_rows]
    rows.sort(key=lambda r: (r[1], r[0]))
    return rows, results[-1][1]


def write_csv(rows, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for n_bar, rx, pe, detail in rows:
        writer.writerow((_num(n_bar), rx, _num(pe), detail))


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cpn-lab",
        description=(
            "Error probability versus mean photon number per pulse (n_bar = alpha^2) "
            "for conditional pulse nulling (cpn), direct detection (dd), homodyne (hd) "
            "and square-root-measurement (srm) receivers. Output is CSV with columns "
            "nbar,receiver,pe,detail. Rows tagged 'holevo' report the Holevo quantity in "
            "BITS in the pe column, not a probability. Rows tagged '<rx>-mc' are Monte "
            "Carlo estimates with the standard error in the detail column."
        ),
        epilog=f"Environment: {THREADS_ENV} caps worker processes (0 = one per CPU).",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--signal", choices=SIGNALS, required=True)
    p.add_argument("--M", dest="m_slots", type=int, help="number of slots (ppm/mppm, default 4)")
    p.add_argument("--L", dest="l_pulses", type=int, help="pulses per word for mppm (default 2)")
    p.add_argument("--codewords", dest="codeword_file", help="codeword file for --signal custom")
    p.add_argument("--family", choices=("ook", "bpsk"), default="ook",
                   help="modulation of custom codewords (default ook)")
    p.add_argument("--nbar-min", type=float, default=0.1)
    p.add_argument("--nbar-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--grid", choices=("log", "linear"), default="log")
    p.add_argument("--nbar", type=float, help="evaluate a single n_bar instead of a sweep")
    p.add_argument("--receivers", help="comma-separated subset of dd,hd,cpn,srm,holevo "
                   "(default: dd,cpn,srm for OOK signals, hd,cpn,srm for BPSK)")
    p.add_argument("--mc-trials", type=int, help="also run Monte Carlo with this many trials")
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo seed (default 0)")
    p.add_argument("--efficiency", type=float, default=1.0, help="detector efficiency in (0, 1]")
    p.add_argument("--dark-click", type=float, default=0.0, help="dark click probability per slot")
    p.add_argument("-o", "--output", default="-", help="CSV path (default stdout)")
    p.add_argument("--strategy-out", help="write the optimal strategy tree as JSON (needs --nbar)")
    return p


def _spec_from_args(args) -> SweepSpec:
    if args.receivers:
        receivers = tuple(r.strip() for r in args.receivers.split(",") if r.strip())
    else:
        bpsk = args.signal == "hamming-bpsk" or (args.signal == "custom" and args.family == "bpsk")
        receivers = ("hd", "cpn", "srm") if bpsk else ("dd", "cpn", "srm")
    return SweepSpec(
        signal=args.signal,
        receivers=receivers,
        m_slots=args.m_slots,
        l_pulses=args.l_pulses,
        nbar_min=args.nbar_min,
        nbar_max=args.nbar_max,
        points=args.points,
        grid=args.grid,
        nbar=args.nbar,
        codeword_file=args.codeword_file,
        family=args.family,
        mc_trials=args.mc_trials,
        seed=args.seed,
        efficiency=args.efficiency,
        dark_click=args.dark_click,
        output=args.output,
        strategy_out=args.strategy_out,
    )


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        spec = _spec_from_args(args)
        DetectionModel(spec.efficiency, spec.dark_click)
        rows, tree = run_sweep(spec)
    except (UsageError, ValueError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"{parser.prog}: numeric failure: {exc}", file=sys.stderr)
        return 3

    if spec.output == "-":
        write_csv(rows, sys.stdout)
    else:
        with open(spec.output, "w", newline="") as fh:
            write_csv(rows, fh)
    if spec.strategy_out:
        Path(spec.strategy_out).write_text(export_strategy(tree))
    return 0


if __name__ == "__main__":
    sys.exit(main())
