"""Seeded Monte Carlo generator and the property checks run over its instances."""

from __future__ import annotations

import math
import random
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import bounds as bd
from .errors import CommingleError, RegimeViolation
from .forward import (
    FragileRoundingWarning,
    Observation,
    deformation_matrix,
    difference_matrix,
    difference_sequence,
    measurement_matrix,
    sample,
)
from .labeling import (
    BoundaryCoincidence,
    GapGeometry,
    Token,
    classify_gap,
    label_from_truth,
    pairing_violations,
    predict_parse,
    table_endpoints,
)
from .recovery import recover
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
from .signal import BlurMixture, PiecewiseSignal, SamplingGrid, difference_vector, validate_signal

ENDPOINT_MARGIN = 1e-6
STEP_UNITS = (1, 2, 3, 4)
MAX_RESAMPLE = 1000


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 1
    trials: int = 100
    min_gap_lo: float = 1.5
    min_gap_hi: float = 2.0
    regions: tuple[int, int] = (2, 6)
    # sigma_max as a fraction of the 0.5T/nu_max bound; a range at or above 1 is rejected
    sigma_fraction: tuple[float, float] = (0.2, 0.99)
    mixture_probability: float = 0.5
    workers: int = 1


@dataclass
class Instance:
    signal: PiecewiseSignal
    blurs: tuple[BlurMixture, BlurMixture]
    grids: tuple[SamplingGrid, SamplingGrid]
    observations: tuple[Observation, Observation]
    rejections: Counter = field(default_factory=Counter)


def _draw_signal(rng: random.Random, spec: ScenarioSpec, rej: Counter) -> PiecewiseSignal:
    while True:
        m = rng.randint(*spec.regions)
        steps = [rng.choice((-1, 1)) * rng.choice(STEP_UNITS) * 256 for _ in range(m)]
        amps, acc = [], 0
        for s in steps:
            acc += s
            amps.append(acc)
        if amps[-1] == 0:
            continue
        breaks = [0.0]
        for _ in range(m):
            breaks.append(breaks[-1] + rng.uniform(spec.min_gap_lo, spec.min_gap_hi))
        sig = PiecewiseSignal(tuple(breaks), tuple(amps))
        if not validate_signal(sig, commingling=True).ok:
            rej["invalid_signal"] += 1
            continue
        return sig


def _draw_blur(rng: random.Random, spec: ScenarioSpec, bound: float) -> BlurMixture:
    s = bound * rng.uniform(*spec.sigma_fraction)
    if rng.random() < spec.mixture_probability:
        w = rng.uniform(0.2, 0.8)
        return BlurMixture(((w, s), (1.0 - w, s * rng.uniform(0.3, 0.95))))
    return BlurMixture.gaussian(s)


def _near_table_endpoint(signal: PiecewiseSignal, blur: BlurMixture, grid: SamplingGrid) -> bool:
    gd = difference_vector(signal)
    nus = [effective_nu(blur, d) for d in gd]
    seg = segmentation(signal, grid)
    sm = blur.sigma_max
    for j in range(1, signal.m + 1):
        gap = signal.breaks[j] - signal.breaks[j - 1]
        geom = GapGeometry.from_gap(gap, grid.time(seg.iotas[j - 1]) - signal.breaks[j - 1])
        if geom.n != 2 or not 0 < geom.f < 0.5:
            continue
        a, b, f = sm * nus[j - 1], sm * nus[j], geom.f
        for lhs, rhs in (((1 - f) - b, a), (a, f), (b, f), (a, f + b)):
            if abs(lhs - rhs) < ENDPOINT_MARGIN:
                return True
        cat = classify_gap(nus[j - 1], nus[j], sm, geom)
        if any(abs(geom.delta - e) < ENDPOINT_MARGIN
               for e in table_endpoints(cat, nus[j - 1], nus[j], sm, geom.f)):
            return True
    return False


def _midpoint_tie(M) -> bool:
    half = Fraction(1, 2)
    return any(M.entries[i][j] == half for i, j in M.critical)


class GenerationRejected(RegimeViolation):
    """The scenario cannot produce an instance inside the analysed regime."""

    def __init__(self, msg: str, rejections: Counter):
        super().__init__(msg)
        self.rejections = rejections


def generate_instance(rng: random.Random, spec: ScenarioSpec) -> Instance:
    """One signal observed through two independently drawn blurs and grids."""
    rej: Counter = Counter()
    for _ in range(MAX_RESAMPLE):
        sig = _draw_signal(rng, spec, rej)
        gd = difference_vector(sig)
        bound = regime_profile(gd).sigma_bound
        blurs, grids, obs = [], [], []
        for _ in range(MAX_RESAMPLE):
            blur = _draw_blur(rng, spec, bound)
            if blur.sigma_max >= bound:
                rej["prop1_bound"] += 1
                if spec.sigma_fraction[0] >= 1.0:
                    raise GenerationRejected("blur range lies at or above the 0.5T/nu_max bound", rej)
                continue
            t0 = -rng.uniform(1.0, 2.0)
            grid = SamplingGrid(t0, int(math.floor(sig.breaks[-1] - t0)) + 3)
            if not validate_signal(sig, grid).ok:
                rej["sample_at_discontinuity"] += 1
                continue
            if _near_table_endpoint(sig, blur, grid):
                rej["table_endpoint"] += 1
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", FragileRoundingWarning)
                o = sample(sig, blur, grid)
            if o.fragile:
                rej["fragile_rounding"] += 1
                continue
            try:
                M = measurement_matrix(sig, blur, grid, o)
            except RegimeViolation:
                rej["measurement_matrix"] += 1
                continue
            if _midpoint_tie(M):
                rej["midpoint_tie"] += 1
                continue
            if obs and difference_sequence(o) == difference_sequence(obs[0]):
                rej["identical_delta"] += 1
                continue
            blurs.append(blur)
            grids.append(grid)
            obs.append(o)
            if len(obs) == 2:
                return Instance(sig, tuple(blurs), tuple(grids), tuple(obs), rej)
    raise GenerationRejected("could not generate an admissible instance", rej)


# ---------------------------------------------------------------------------
# Checks


CHECKS = (
    "round_trip",
    "corollary2",
    "prop3",
    "prop4_l2",
    "prop5",
    "prop6",
    "theorem7",
    "token_pairing",
    "sum_rules",
    "table_agreement",
    "recovery_soundness",
    "recovery_symmetry",
    "bounds_containment",
)


@dataclass
class TrialResult:
    index: int
    violations: dict[str, list[str]] = field(default_factory=dict)
    counts: Counter = field(default_factory=Counter)
    rejections: Counter = field(default_factory=Counter)

    def fail(self, check: str, msg: str) -> None:
        self.violations.setdefault(check, []).append(msg)


def _sum_rules(tokens, delta, gd, res: TrialResult) -> None:
    j = 0
    i = 0
    n = len(tokens)
    while i < n:
        t = tokens[i]
        if t is Token.Z:
            i += 1
            continue
        if t is Token.A:
            got, want, i, j = delta[i], gd[j], i + 1, j + 1
        elif t in (Token.F1, Token.S1):
            got, want, i, j = delta[i] + delta[i + 1], gd[j], i + 2, j + 1
        elif t is Token.P1:
            got, want, i, j = sum(delta[i:i + 3]), gd[j] + gd[j + 1], i + 3, j + 2
        else:
            res.fail("sum_rules", f"unexpected {t} at {i}")
            return
        if got != want:
            res.fail("sum_rules", f"cluster ending at {i - 1} sums to {got}, expected {want}")


def run_trial(spec: ScenarioSpec, index: int) -> TrialResult:
    rng = random.Random(spec.seed * 1_000_003 + index)
    res = TrialResult(index)
    try:
        inst = generate_instance(rng, spec)
    except GenerationRejected as exc:
        res.rejections.update(exc.rejections)
        res.counts["trials:rejected"] += 1
        return res
    res.rejections.update(inst.rejections)
    res.counts["trials:generated"] += 1
    sig = inst.signal
    gd = difference_vector(sig)
    mg = sig.min_gap
    deltas, tokens_all = [], []
    for blur, grid, obs in zip(inst.blurs, inst.grids, inst.observations):
        delta = difference_sequence(obs)
        deltas.append(delta)
        Mt = deformation_matrix(sig, blur, grid)
        M = measurement_matrix(sig, blur, grid, obs)
        MD = difference_matrix(M)
        seg = segmentation(sig, grid)
        unrounded = Mt @ [d / 256 for d in gd]
        if tuple(round(x * 256) for x in unrounded) != obs.samples:
            res.fail("round_trip", "quantized deformation product differs from gamma")
        if M.apply(gd) != tuple(Fraction(s) for s in obs.samples):
            res.fail("round_trip", "M g_D differs from gamma")
        if MD.apply(gd) != tuple(Fraction(x) for x in delta):
            res.fail("round_trip", "M_D g_D differs from delta")
        for name, rep in (
            ("corollary2", check_corollary2(M, seg)),
            ("prop3", check_prop3(M, gd, MD, mg)),
            ("prop4_l2", check_prop4(seg, 2, mg)),
            ("prop5", check_prop5(MD, mg)),
            ("prop6", check_prop6(MD, mg)),
            ("theorem7", check_theorem7(delta, seg, M)),
        ):
            res.counts[f"{name}:checked"] += 1
            for v in rep.violations:
                res.fail(name, v)
            if rep.notes and name == "theorem7":
                res.counts["theorem7:plus2_notes"] += len(rep.notes)
        try:
            tokens = label_from_truth(MD, seg)
        except RegimeViolation as exc:
            res.fail("token_pairing", str(exc))
            continue
        tokens_all.append(tokens)
        for v in pairing_violations(tokens):
            res.fail("token_pairing", v)
        _sum_rules(tokens, delta, gd, res)
        nus = [effective_nu(blur, d) for d in gd]
        sm = blur.sigma_max
        # closed-form tables
        for j in range(1, sig.m + 1):
            gap = sig.breaks[j] - sig.breaks[j - 1]
            geom = GapGeometry.from_gap(gap, grid.time(seg.iotas[j - 1]) - sig.breaks[j - 1])
            try:
                cat = classify_gap(nus[j - 1], nus[j], sm, geom)
            except (ValueError, BoundaryCoincidence):
                continue
            res.counts[f"category:{cat.case or cat.category}"] += 1
            if cat.case is None:
                continue
            pred = predict_parse(cat, geom, nus[j - 1], nus[j], sm)
            seg_tokens = tokens[seg.iotas[j - 1]:seg.iotas[j]]
            opening = tokens[seg.iotas[j]]
            res.counts["table_agreement:checked"] += 1
            if not pred.admits(seg_tokens, opening):
                res.fail("table_agreement",
                         f"case {cat.case}, gap {j}: truth {[str(t) for t in seg_tokens]} / {opening}")
        # location and distance bounds
        labels = bd.segmentation_labels(tokens)
        if [i for _, i in labels] != list(seg.iotas):
            res.fail("bounds_containment", "label positions do not match segmentation points")
            continue
        for j, (cls, io) in enumerate(labels):
            res.counts["bounds:locate"] += 1
            try:
                iv = bd.locate(cls, io, grid.t0, nus[j], sm)
            except bd.EmptyIntervalError as exc:
                res.fail("bounds_containment", f"locate D_{j}: {exc}")
                continue
            if sig.breaks[j] not in iv:
                res.fail("bounds_containment", f"D_{j}={sig.breaks[j]:.6f} not in {iv}")
        for j in range(len(labels)):
            for k in range(j + 1, len(labels)):
                (x, ij), (y, ik) = labels[j], labels[k]
                true = sig.breaks[k] - sig.breaks[j]
                res.counts["bounds:distance"] += 1
                try:
                    iv = bd.distance_bounds(x, y, ij, ik, nus[j], nus[k], sm)
                except bd.EmptyIntervalError as exc:
                    res.fail("bounds_containment", f"D_{k}-D_{j}: {exc}")
                    continue
                if true not in iv:
                    res.fail("bounds_containment", f"D_{k}-D_{j}={true:.6f} not in {iv} ({x},{y})")
                if (x, y) == (bd.LabelClass.LATE, bd.LabelClass.A):
                    res.counts["bounds:literal_checked"] += 1
                    try:
                        lit = bd.distance_bounds(x, y, ij, ik, nus[j], nus[k], sm, literal=True)
                        ok = true in lit
                    except bd.EmptyIntervalError:
                        ok = False
                    if not ok:
                        res.counts["bounds:literal_violations"] += 1
    # recovery
    res.counts["recovery:trials"] += 1
    try:
        rec = recover(*deltas)
        swapped = recover(deltas[1], deltas[0])
    except CommingleError as exc:
        res.fail("recovery_soundness", f"recover raised {type(exc).__name__}: {exc}")
        return res
    if not rec.gd:
        res.counts["recovery:uncertified"] += 1
    else:
        if len(rec.gd) != len(gd):
            res.fail("recovery_soundness", f"recovered {len(rec.gd)} steps, truth has {len(gd)}")
        else:
            for k, (iv, truth) in enumerate(zip(rec.gd, gd)):
                res.counts["recovery:entries"] += 1
                if iv.exact:
                    res.counts["recovery:exact_entries"] += 1
                if truth not in iv:
                    res.fail("recovery_soundness", f"gd[{k}]={truth} not in {iv}")
            for k, (iv, truth) in enumerate(zip(rec.amplitudes, sig.amps)):
                if truth not in iv:
                    res.fail("recovery_soundness", f"g_{k + 1}={truth} not in {iv}")
            if rec.exact:
                res.counts["recovery:fully_exact"] += 1
            if len(tokens_all) == 2 and (rec.labels0, rec.labels1) == tuple(tokens_all):
                res.counts["recovery:labels_match_truth"] += 1
    if (swapped.gd, swapped.amplitudes) != (rec.gd, rec.amplitudes) or \
            (swapped.labels0, swapped.labels1) != (rec.labels1, rec.labels0):
        res.fail("recovery_symmetry", "swapping the inputs changed the result")
    return res


def _run_chunk(args) -> list[TrialResult]:
    spec, indices = args
    return [run_trial(spec, i) for i in indices]


@dataclass
class Report:
    spec: ScenarioSpec
    trials: int
    violations: dict[str, int]
    examples: dict[str, list[str]]
    counts: dict[str, int]
    rejections: dict[str, int]

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def to_json(self) -> dict:
        return {
            "seed": self.spec.seed,
            "trials": self.trials,
            "ok": self.ok,
            "violations": dict(sorted(self.violations.items())),
            "examples": dict(sorted(self.examples.items())),
            "counts": dict(sorted(self.counts.items())),
            "rejections": dict(sorted(self.rejections.items())),
        }


def run_checks(spec: ScenarioSpec) -> Report:
    indices = list(range(spec.trials))
    if spec.workers > 1 and spec.trials > 1:
        size = max(1, math.ceil(spec.trials / (spec.workers * 4)))
        chunks = [(spec, indices[i:i + size]) for i in range(0, len(indices), size)]
        with ProcessPoolExecutor(spec.workers) as ex:
            results = [r for chunk in ex.map(_run_chunk, chunks) for r in chunk]
    else:
        results = _run_chunk((spec, indices))
    results.sort(key=lambda r: r.index)
    violations = {c: 0 for c in CHECKS}
    examples: dict[str, list[str]] = {}
    counts: Counter = Counter()
    rejections: Counter = Counter()
    for r in results:
        counts.update(r.counts)
        rejections.update(r.rejections)
        for c, msgs in r.violations.items():
            violations[c] = violations.get(c, 0) + len(msgs)
            ex_list = examples.setdefault(c, [])
            if len(ex_list) < 5:
                ex_list.append(f"trial {r.index}: {msgs[0]}")
    return Report(spec, len(results), violations, examples, dict(counts), dict(rejections))
