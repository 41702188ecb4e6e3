"""Design-space exploration for oscillator cores.

Candidates are enumerated over the parallelism level P: the P = 0 core
time-multiplexes a single multiply-accumulate pair, and each increment of
P doubles the MAC bank (2^P * I multipliers and adders for P >= 1, with I
the input/output width).  Per-iteration latency and LUT cost come from two
fitted estimators:

    latency(I, H, P) = (I * H) * (b3 P^3 + b2 P^2 + b1 P + b0)
    luts(I, H, P)    = c1 * I * H + c2 * I + c3 * H + beta   (per-P c/beta)

with separate coefficient sets for DSP-mapped and LUT-only arithmetic.
The shipped defaults are fitted to the bundled calibration records; refit
from your own post-synthesis measurement CSV to match a real toolchain.
"""

import csv
import json
import math
import warnings
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import (
    MissingCoefficientsError,
    OutOfDomainError,
    RankDeficientError,
    UnderdeterminedError,
)

__all__ = [
    "MODES",
    "CandidateDesign",
    "LatencyCoeffs",
    "LutCoeffs",
    "MeasurementRecord",
    "CoefficientTable",
    "mac_count",
    "p_max_for",
    "estimate_latency",
    "estimate_lut",
    "fit_latency",
    "fit_lut",
    "fit_lut_reduced",
    "enumerate_designs",
    "pareto_filter",
    "load_measurements",
    "save_measurements",
    "load_coefficients",
    "save_coefficients",
    "default_coefficients",
    "fit_default_tables",
]

MODES = ("with_dsp", "no_dsp")
SELECTIONS = ("min_latency", "min_cost", "pareto")

COND_WARN_THRESHOLD = 1e8


@dataclass(frozen=True)
class LatencyCoeffs:
    b3: float
    b2: float
    b1: float
    b0: float
    mode: str = "with_dsp"

    def poly(self, p):
        return ((self.b3 * p + self.b2) * p + self.b1) * p + self.b0


@dataclass(frozen=True)
class LutCoeffs:
    """Per-P (c1, c2, c3, beta) quadruples for one resource mode."""

    entries: Dict[int, Tuple[float, float, float, float]]
    mode: str = "with_dsp"

    def for_p(self, p):
        try:
            return self.entries[p]
        except KeyError:
            raise MissingCoefficientsError(
                f"no LUT coefficients for P={p} (mode={self.mode}); "
                f"available P: {sorted(self.entries)}"
            ) from None


@dataclass(frozen=True)
class MeasurementRecord:
    i_size: int
    h_size: int
    p: int
    mode: str
    latency_cycles: float
    luts: float

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.i_size < 1 or self.h_size < 1 or self.p < 0:
            raise ValueError("I, H must be >= 1 and P >= 0")
        if self.latency_cycles <= 0 or self.luts <= 0:
            raise ValueError("latency and luts must be positive")


@dataclass
class CandidateDesign:
    p: int
    use_dsp: bool
    multipliers: int
    adders: int
    est_latency_cycles: float
    est_lut: float
    est_dsp: int


@dataclass
class CoefficientTable:
    latency: Dict[str, LatencyCoeffs]
    lut: Dict[str, LutCoeffs]
    version: int = 1
    provenance: str = ""


def mac_count(p, i_size):
    """(multipliers, adders) for parallelism level p and I/O width i_size."""
    if p < 0 or i_size < 1:
        raise ValueError("need p >= 0 and i_size >= 1")
    if p == 0:
        return (1, 1)
    n = (1 << p) * i_size
    return (n, n)


def p_max_for(h_size):
    return int(math.log2(h_size)) if h_size >= 1 else 0


def estimate_latency(i_size, h_size, p, coeffs):
    """Estimated iteration latency in clock cycles."""
    if p < 0 or p > p_max_for(h_size):
        raise OutOfDomainError(
            f"P={p} outside [0, {p_max_for(h_size)}] for H={h_size}"
        )
    return (i_size * h_size) * coeffs.poly(p)


def estimate_lut(i_size, h_size, p, coeffs):
    """Estimated LUT usage with the P-specific linear model."""
    c1, c2, c3, beta = coeffs.for_p(p)
    return c1 * i_size * h_size + c2 * i_size + c3 * h_size + beta


def _solve_normal_equations(a, y, context):
    """Least squares via A^T A x = A^T y with a conditioning warning."""
    g = a.T @ a
    cond = np.linalg.cond(g)
    if cond > COND_WARN_THRESHOLD:
        warnings.warn(
            f"{context}: normal equations condition number {cond:.3e}",
            RuntimeWarning,
            stacklevel=3,
        )
    try:
        return np.linalg.solve(g, a.T @ y)
    except np.linalg.LinAlgError:
        raise RankDeficientError(f"{context}: singular normal equations") from None


def fit_latency(records, mode="with_dsp"):
    """Fit the degree-3 normalized-latency polynomial for one mode.

    Latencies are normalized by I*H, averaged per parallelism level, and
    the averages are fitted by least squares.  Needs >= 4 distinct P.
    """
    by_p = {}
    for rec in records:
        if rec.mode != mode:
            continue
        by_p.setdefault(rec.p, []).append(
            rec.latency_cycles / (rec.i_size * rec.h_size)
        )
    if len(by_p) < 4:
        raise UnderdeterminedError(
            f"latency fit ({mode}) needs >= 4 distinct P values, "
            f"got {sorted(by_p)}"
        )
    ps = np.array(sorted(by_p), dtype=np.float64)
    avg = np.array([np.mean(by_p[int(p)]) for p in ps])
    a = np.stack([ps**3, ps**2, ps, np.ones_like(ps)], axis=1)
    b3, b2, b1, b0 = _solve_normal_equations(a, avg, f"fit_latency[{mode}]")
    return LatencyCoeffs(b3=b3, b2=b2, b1=b1, b0=b0, mode=mode)


def fit_lut(records, mode="with_dsp"):
    """Fit per-P LUT coefficients for one mode.

    Each parallelism level needs at least 4 records spanning at least two
    distinct I and two distinct H values; otherwise the level is reported
    as underdetermined.
    """
    by_p = {}
    for rec in records:
        if rec.mode != mode:
            continue
        by_p.setdefault(rec.p, []).append(rec)
    if not by_p:
        raise UnderdeterminedError(f"no records for mode {mode!r}")
    entries = {}
    for p in sorted(by_p):
        recs = by_p[p]
        i_vals = {r.i_size for r in recs}
        h_vals = {r.h_size for r in recs}
        if len(recs) < 4 or len(i_vals) < 2 or len(h_vals) < 2:
            raise UnderdeterminedError(
                f"LUT fit ({mode}) underdetermined for P={p}: need >= 4 "
                f"records spanning >= 2 distinct I and H, got {len(recs)} "
                f"records, I={sorted(i_vals)}, H={sorted(h_vals)}"
            )
        a = np.array(
            [[r.i_size * r.h_size, r.i_size, r.h_size, 1.0] for r in recs]
        )
        if np.linalg.matrix_rank(a) < 4:
            raise RankDeficientError(
                f"LUT fit ({mode}) rank-deficient for P={p}"
            )
        y = np.array([r.luts for r in recs])
        c1, c2, c3, beta = _solve_normal_equations(a, y, f"fit_lut[{mode}] P={p}")
        entries[p] = (float(c1), float(c2), float(c3), float(beta))
    return LutCoeffs(entries=entries, mode=mode)


def fit_lut_reduced(records, mode="with_dsp"):
    """Reduced per-P LUT fit for measurement sets with a single I value.

    With I fixed the full model is unidentifiable (I*H and H regressors are
    collinear), so each level is fitted as alpha*H + gamma and published as
    c1 = alpha / I, c2 = c3 = 0, beta = gamma.  Levels with a single record
    borrow alpha from the highest multi-record level.  Used to produce the
    bundled default table; prefer :func:`fit_lut` for real measurement sets.
    """
    recs = [r for r in records if r.mode == mode]
    if not recs:
        raise UnderdeterminedError(f"no records for mode {mode!r}")
    i_vals = {r.i_size for r in recs}
    if len(i_vals) != 1:
        raise ValueError(
            f"reduced fit expects one I value, got {sorted(i_vals)}; "
            "use fit_lut instead"
        )
    i_fixed = i_vals.pop()
    by_p = {}
    for rec in recs:
        by_p.setdefault(rec.p, []).append(rec)
    slopes = {}
    entries = {}
    multi = [p for p in by_p if len(by_p[p]) >= 2]
    if not multi:
        raise UnderdeterminedError(
            f"reduced LUT fit ({mode}): no level has >= 2 records"
        )
    for p in multi:
        h = np.array([r.h_size for r in by_p[p]], dtype=np.float64)
        y = np.array([r.luts for r in by_p[p]])
        a = np.stack([h, np.ones_like(h)], axis=1)
        alpha, gamma = _solve_normal_equations(
            a, y, f"fit_lut_reduced[{mode}] P={p}"
        )
        slopes[p] = float(alpha)
        entries[p] = (float(alpha) / i_fixed, 0.0, 0.0, float(gamma))
    borrowed = slopes[max(multi)]
    for p, recs_p in by_p.items():
        if p in entries:
            continue
        rec = recs_p[0]
        gamma = rec.luts - borrowed * rec.h_size
        entries[p] = (borrowed / i_fixed, 0.0, 0.0, float(gamma))
    return LutCoeffs(entries=entries, mode=mode)


def enumerate_designs(i_size, h_size, mode, table, selection="pareto"):
    """Candidate designs for P in {0 .. log2(H)} under a selection rule."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if selection not in SELECTIONS:
        raise ValueError(f"selection must be one of {SELECTIONS}")
    if h_size < 1 or (h_size & (h_size - 1)) != 0:
        raise ValueError(f"H must be a power of two, got {h_size}")
    lat_coeffs = table.latency[mode]
    lut_coeffs = table.lut[mode]
    candidates = []
    for p in range(p_max_for(h_size) + 1):
        muls, adds = mac_count(p, i_size)
        candidates.append(
            CandidateDesign(
                p=p,
                use_dsp=(mode == "with_dsp"),
                multipliers=muls,
                adders=adds,
                est_latency_cycles=estimate_latency(i_size, h_size, p, lat_coeffs),
                est_lut=estimate_lut(i_size, h_size, p, lut_coeffs),
                est_dsp=muls if mode == "with_dsp" else 0,
            )
        )
    if selection == "min_latency":
        return [min(candidates, key=lambda c: c.est_latency_cycles)]
    if selection == "min_cost":
        return [min(candidates, key=lambda c: c.est_lut)]
    keep = pareto_filter([(c.est_lut, c.est_latency_cycles) for c in candidates])
    kept_points = list(keep)
    selected = []
    pool = list(candidates)
    for point in kept_points:
        for idx, cand in enumerate(pool):
            if (cand.est_lut, cand.est_latency_cycles) == point:
                selected.append(pool.pop(idx))
                break
    return selected


def pareto_filter(points):
    """Non-dominated subset of (cost, latency) pairs, cost ascending.

    A point is dominated when another point is <= in both coordinates and
    strictly < in at least one; exact duplicates are all retained.
    """
    pts = [(float(c), float(l)) for c, l in points]
    for c, l in pts:
        if not (math.isfinite(c) and math.isfinite(l)):
            raise ValueError("pareto_filter requires finite points")
    order = sorted(range(len(pts)), key=lambda k: (pts[k][0], pts[k][1]))
    result = []
    best_prev = math.inf  # min latency over strictly cheaper points
    i = 0
    while i < len(order):
        j = i
        cost = pts[order[i]][0]
        while j < len(order) and pts[order[j]][0] == cost:
            j += 1
        group = [pts[order[k]] for k in range(i, j)]
        group_min = min(l for _, l in group)
        if group_min < best_prev:
            result.extend(p for p in group if p[1] == group_min)
        best_prev = min(best_prev, group_min)
        i = j
    return result


# ---------------------------------------------------------------------------
# persistence

CSV_HEADER = ["I", "H", "P", "mode", "latency_cycles", "luts"]


def load_measurements(path):
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing CSV columns {sorted(missing)}")
        for row in reader:
            records.append(
                MeasurementRecord(
                    i_size=int(row["I"]),
                    h_size=int(row["H"]),
                    p=int(row["P"]),
                    mode=row["mode"].strip(),
                    latency_cycles=float(row["latency_cycles"]),
                    luts=float(row["luts"]),
                )
            )
    return records


def save_measurements(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(
                [r.i_size, r.h_size, r.p, r.mode, r.latency_cycles, r.luts]
            )


def save_coefficients(table, path):
    doc = {
        "format": "chaosforge-coeffs-v1",
        "version": table.version,
        "provenance": table.provenance,
        "latency": {
            mode: [c.b3, c.b2, c.b1, c.b0] for mode, c in table.latency.items()
        },
        "lut": {
            mode: {str(p): list(q) for p, q in c.entries.items()}
            for mode, c in table.lut.items()
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_coefficients(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "chaosforge-coeffs-v1":
        raise ValueError(f"{path}: unknown coefficient format")
    latency = {
        mode: LatencyCoeffs(*vals, mode=mode)
        for mode, vals in doc["latency"].items()
    }
    lut = {
        mode: LutCoeffs(
            entries={int(p): tuple(q) for p, q in entries.items()}, mode=mode
        )
        for mode, entries in doc["lut"].items()
    }
    return CoefficientTable(
        latency=latency,
        lut=lut,
        version=doc.get("version", 1),
        provenance=doc.get("provenance", ""),
    )


def fit_default_tables(records):
    """Build the default table from the bundled calibration records."""
    latency = {mode: fit_latency(records, mode) for mode in MODES}
    lut = {mode: fit_lut_reduced(records, mode) for mode in MODES}
    return CoefficientTable(
        latency=latency,
        lut=lut,
        version=1,
        provenance=(
            "fitted from data/calibration_records.csv (vendor-published "
            "estimator outputs for 3-{4,8,16}-3 cores); LUT entries use the "
            "reduced I=3 fit, see fit_lut_reduced"
        ),
    )


def default_coefficients():
    """The coefficient table bundled with the package."""
    from importlib.resources import files

    path = files("chaosforge").joinpath("data/default_coeffs.json")
    with path.open() as fh:
        doc = json.load(fh)
    latency = {
        mode: LatencyCoeffs(*vals, mode=mode)
        for mode, vals in doc["latency"].items()
    }
    lut = {
        mode: LutCoeffs(
            entries={int(p): tuple(q) for p, q in entries.items()}, mode=mode
        )
        for mode, entries in doc["lut"].items()
    }
    return CoefficientTable(
        latency=latency,
        lut=lut,
        version=doc.get("version", 1),
        provenance=doc.get("provenance", ""),
    )


def bundled_calibration_records():
    """The measurement records used to fit the default table."""
    from importlib.resources import as_file, files

    resource = files("chaosforge").joinpath("data/calibration_records.csv")
    with as_file(resource) as path:
        return load_measurements(path)
