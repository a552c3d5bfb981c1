"""Command-line front end: simulate, diff, analyze, recover, check."""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from typing import Sequence

from . import bounds as bd
from .errors import (
    CommingleError,
    IdenticalSequencesError,
    InconsistentSequencesError,
    InvalidSignalError,
    RegimeViolation,
    UnsupportedCaseError,
)
from .forward import (
    FragileRoundingWarning,
    difference_matrix,
    difference_sequence,
    measurement_matrix,
    sample,
)
from .harness import ScenarioSpec, run_checks
from .io import (
    dump_json,
    observation_to_dict,
    read_observation,
    read_signal,
    write_json,
    write_observation,
)
from .labeling import label_from_truth
from .recovery import RecoveryResult, recover
from .regime import (
    check_corollary2,
    check_prop3,
    check_prop4,
    check_prop5,
    check_prop6,
    check_theorem7,
    effective_nu,
    regime_profile,
    segmentation,
)
from .signal import BlurMixture, SamplingGrid, difference_vector, validate_signal

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_IDENTICAL = 2
EXIT_INCONSISTENT = 3
EXIT_UNSUPPORTED = 4


def _component(text: str) -> tuple[float, float]:
    try:
        w, s = text.split(":")
        return float(w), float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WEIGHT:SIGMA, got {text!r}") from None


def _blur_from_args(args, fallback: BlurMixture | None = None) -> BlurMixture | None:
    if args.blur:
        return BlurMixture(tuple(args.blur))
    if args.sigma is not None:
        return BlurMixture.gaussian(args.sigma)
    return fallback


def _add_blur_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma", type=float, help="Gaussian blur sigma, in units of T")
    p.add_argument("--blur", type=_component, action="append", metavar="W:SIGMA",
                   help="mixture component (repeatable); overrides --sigma")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    signal = read_signal(args.signal)
    blur = _blur_from_args(args)
    if blur is None:
        raise InvalidSignalError("simulate needs --sigma or --blur")
    grid = SamplingGrid(args.t0, args.n, args.T)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FragileRoundingWarning)
        obs = sample(signal, blur, grid)
    for i in obs.fragile:
        print(f"warning: sample {i} is within 1e-9 counts of a rounding tie", file=sys.stderr)
    if args.out:
        write_observation(args.out, obs, blur)
    else:
        sys.stdout.write(dump_json(observation_to_dict(obs, blur)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# diff


def _truth_labels(signal_path: str, blur: BlurMixture, obs) -> list[str]:
    signal = read_signal(signal_path)
    M = measurement_matrix(signal, blur, obs.grid, obs)
    return [str(t) for t in label_from_truth(difference_matrix(M), segmentation(signal, obs.grid))]


def cmd_diff(args) -> int:
    f = read_observation(args.observation)
    delta = difference_sequence(f.observation)
    labels = None
    if args.label:
        if args.signal:
            blur = _blur_from_args(args, f.blur)
            if blur is None:
                raise InvalidSignalError("labeling from a signal needs the blur (--sigma/--blur or in the file)")
            labels = _truth_labels(args.signal, blur, f.observation)
        elif args.other:
            other = difference_sequence(read_observation(args.other).observation)
            labels = [str(t) for t in recover(delta, other).labels0]
        else:
            raise UnsupportedCaseError("--label needs --signal or a second observation")
    if args.format == "json":
        data: dict = {"delta": list(delta)}
        if labels is not None:
            data["labels"] = labels
        sys.stdout.write(dump_json(data))
    else:
        for i, d in enumerate(delta):
            tail = f"  {labels[i]}" if labels is not None else ""
            print(f"{i:4d} {d:8d}{tail}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze


def analyze_report(signal, blur: BlurMixture, obs) -> dict:
    gd = difference_vector(signal)
    profile = regime_profile(gd)
    seg = segmentation(signal, obs.grid)
    delta = difference_sequence(obs)
    report: dict = {
        "validation": list(validate_signal(signal, obs.grid).violations),
        "gd": list(gd),
        "nu": [round(x, 12) for x in profile.nus],
        "sigma_max": blur.sigma_max,
        # None when every step is a single count (no bound applies)
        "sigma_bound": None if profile.sigma_bound == float("inf") else profile.sigma_bound,
        "iota": list(seg.iotas),
        "eta": list(seg.etas),
        "delta": list(delta),
    }
    M = measurement_matrix(signal, blur, obs.grid, obs)
    MD = difference_matrix(M)
    mg = signal.min_gap
    checks = [
        check_corollary2(M, seg),
        check_prop3(M, gd, MD, mg),
        check_prop4(seg, 2, mg),
        check_prop5(MD, mg),
        check_prop6(MD, mg),
        check_theorem7(delta, seg, M),
    ]
    report["checks"] = [c.as_dict() for c in checks]
    try:
        report["labels"] = [str(t) for t in label_from_truth(MD, seg)]
    except RegimeViolation as exc:
        report["labels"] = None
        report["checks"].append({"name": "labeling", "applicable": True, "ok": False,
                                 "violations": [str(exc)], "notes": []})
    report["ok"] = all(c["ok"] for c in report["checks"]) and not report["validation"]
    return report


def _analyze_text(rep: dict) -> str:
    lines = [
        f"gd       {rep['gd']}",
        f"nu       {rep['nu']}",
        f"sigma    {rep['sigma_max']:.6g} (bound {rep['sigma_bound'] or float('inf'):.6g})",
        f"iota     {rep['iota']}",
        f"delta    {rep['delta']}",
        f"labels   {' '.join(rep['labels']) if rep['labels'] else '-'}",
    ]
    for v in rep["validation"]:
        lines.append(f"invalid  {v}")
    for c in rep["checks"]:
        status = "PASS" if c["ok"] else "FAIL"
        if not c["applicable"]:
            status = "SKIP"
        lines.append(f"{status:4s}     {c['name']}")
        lines.extend(f"         - {v}" for v in c["violations"])
        lines.extend(f"         note: {n}" for n in c["notes"])
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    signal = read_signal(args.signal)
    f = read_observation(args.observation)
    blur = _blur_from_args(args, f.blur)
    if blur is None:
        raise InvalidSignalError("analyze needs the blur (--sigma/--blur or in the observation file)")
    rep = analyze_report(signal, blur, f.observation)
    _emit(dump_json(rep) if args.format == "json" else _analyze_text(rep), args.out)
    return EXIT_OK if rep["ok"] else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# recover


def recovery_bounds(result: RecoveryResult, files) -> list[dict]:
    """Location and neighbour-distance bounds per observation, when the steps are exact."""
    if not result.exact:
        return []
    gd = [x.value for x in result.gd]
    out = []
    for labels, f in zip((result.labels0, result.labels1), files):
        if f.blur is None:
            continue
        marks = bd.segmentation_labels(labels)
        if len(marks) != len(gd):
            continue
        sm = f.blur.sigma_max
        nus = [effective_nu(f.blur, d) for d in gd]
        t0 = f.observation.grid.t0
        entry: dict = {"t0": t0, "sigma_max": sm, "locations": [], "distances": []}
        for j, (cls, io) in enumerate(marks):
            try:
                iv = bd.locate(cls, io, t0, nus[j], sm).to_json()
            except bd.EmptyIntervalError:
                iv = None
            entry["locations"].append({"j": j, "label": cls.value, "iota": io, "interval": iv})
        for j in range(len(marks) - 1):
            (x, a), (y, b) = marks[j], marks[j + 1]
            try:
                iv = bd.distance_bounds(x, y, a, b, nus[j], nus[j + 1], sm).to_json()
            except (bd.EmptyIntervalError, ValueError):
                iv = None
            entry["distances"].append({"j": j, "k": 1, "interval": iv})
        out.append(entry)
    return out


def cmd_recover(args) -> int:
    files = [read_observation(p) for p in (args.obs0, args.obs1)]
    deltas = [difference_sequence(f.observation) for f in files]
    result = recover(*deltas)
    data = result.to_json()
    data["delta0"], data["delta1"] = list(deltas[0]), list(deltas[1])
    data["exact"] = result.exact
    data["bounds"] = recovery_bounds(result, files)
    if args.out:
        write_json(args.out, data)
    if args.format == "json" and not args.out:
        sys.stdout.write(dump_json(data))
    else:
        print("labels0  " + " ".join(data["labels0"]))
        print("labels1  " + " ".join(data["labels1"]))
        print(f"gd       {data['gd']}")
        print(f"amps     {data['amplitudes']}")
        print("rules    " + ", ".join(data["rules"]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# check


def _check_text(rep: dict, elapsed: float) -> str:
    lines = [f"seed {rep['seed']}, {rep['trials']} trials, {elapsed:.1f}s"]
    for name, n in rep["violations"].items():
        lines.append(f"{'PASS' if n == 0 else 'FAIL'}  {name:20s} {n} violations")
        lines.extend(f"      - {e}" for e in rep["examples"].get(name, []))
    c = rep["counts"]
    if c.get("recovery:trials"):
        lines.append(f"fully exact recoveries: {c.get('recovery:fully_exact', 0)}/{c['recovery:trials']}")
    for k, v in rep["rejections"].items():
        lines.append(f"resampled ({k}): {v}")
    if c.get("trials:rejected"):
        lines.append(f"rejected trials: {c['trials:rejected']}")
    return "\n".join(lines) + "\n"


def cmd_check(args) -> int:
    if not 0 < args.min_gap_lo < args.min_gap_hi:
        raise InvalidSignalError("need 0 < --min-gap-lo < --min-gap-hi")
    spec = ScenarioSpec(
        seed=args.seed,
        trials=args.trials,
        min_gap_lo=args.min_gap_lo,
        min_gap_hi=args.min_gap_hi,
        sigma_fraction=(args.sigma_lo, args.sigma_hi),
        workers=args.workers,
    )
    start = time.perf_counter()
    report = run_checks(spec)
    rep = report.to_json()
    text = dump_json(rep) if args.format == "json" else _check_text(rep, time.perf_counter() - start)
    _emit(text, args.out)
    if rep["counts"].get("trials:rejected"):
        return EXIT_UNSUPPORTED
    return EXIT_OK if report.ok else EXIT_VIOLATION


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="commingle", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="blur, sample and quantize a signal file")
    p.add_argument("signal")
    _add_blur_flags(p)
    p.add_argument("--t0", type=float, required=True, help="first sample time (units of T, < 0)")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--T", type=float, default=1.0, help="sampling interval (metadata only)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("diff", help="print the difference sequence of an observation")
    p.add_argument("observation")
    p.add_argument("other", nargs="?", help="second observation, used by --label")
    p.add_argument("--label", action="store_true", help="annotate every entry with its token")
    p.add_argument("--signal", help="label from this ground-truth signal instead of joint parsing")
    _add_blur_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("analyze", help="run the structural checks on one signal/observation pair")
    p.add_argument("signal")
    p.add_argument("observation")
    _add_blur_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("recover", help="jointly parse two observations and recover the amplitudes")
    p.add_argument("obs0")
    p.add_argument("obs1")
    p.add_argument("--out", help="write the JSON result here")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("check", help="seeded Monte Carlo property suite")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--min-gap-lo", type=float, default=1.5)
    p.add_argument("--min-gap-hi", type=float, default=2.0)
    p.add_argument("--sigma-lo", type=float, default=0.2, help="sigma_max as a fraction of the regime bound")
    p.add_argument("--sigma-hi", type=float, default=0.99)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IdenticalSequencesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IDENTICAL
    except (InconsistentSequencesError, InvalidSignalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (RegimeViolation, UnsupportedCaseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except CommingleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
