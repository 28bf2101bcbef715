"""Model comparison: average log-likelihood, BIC, bootstrap ensembles,
Welch tests, winner tallies and intraday parameter profiles.

The selection procedure mirrors how the fitting is meant to be used on
stationary stretches of a trading day: draw a random-start contiguous
subsample, bootstrap it, fit every candidate shape on every replica,
and ask whether any alternative's BIC distribution significantly beats
the baseline mixture of one exponential and one Weibull.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .components import dof as dof_fn
from .em_core import EmConfig, FitResult, InitSpec, fit
from .errors import DomainError
from .sample_data import (
    BucketSpec,
    CensoringInterval,
    TimestampSeries,
    bootstrap_resample,
    bucket_by_time,
    build_sample,
    diff_and_round,
    subsample,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class ModelShape:
    """p exponential + r Weibull components."""

    p: int
    r: int

    def __post_init__(self):
        if self.p < 0 or self.r < 0 or self.p + self.r < 1:
            raise DomainError(f"invalid shape ({self.p}, {self.r})")

    @property
    def dof(self) -> int:
        return dof_fn(self.p, self.r)

    @property
    def key(self) -> str:
        return f"{self.p},{self.r}"

    @classmethod
    def parse(cls, text: str) -> "ModelShape":
        try:
            p_str, r_str = text.split(",")
            return cls(int(p_str), int(r_str))
        except (ValueError, TypeError) as exc:
            raise DomainError(f"cannot parse shape {text!r}; expected 'p,r'") from exc


def avg_loglik(loglik: float, n_obs: int) -> float:
    """Log-likelihood per event (the negative entropy per arrival)."""
    if n_obs < 1:
        raise DomainError("average log-likelihood needs N >= 1")
    return loglik / n_obs


def bic(loglik: float, d: int, n_obs: int) -> float:
    """Bayesian information criterion: -2 log L + d ln N (natural log)."""
    if d < 1:
        raise DomainError("BIC needs d >= 1")
    if n_obs < 1:
        raise DomainError("BIC needs N >= 1")
    return -2.0 * loglik + d * math.log(n_obs)


class WelchResult(NamedTuple):
    t: float
    dof: float
    significant: bool
    p_value: float
    degenerate: bool


def welch_t(
    samples_a,
    samples_b,
    alpha_level: float = 0.05,
    two_sided: bool = False,
) -> WelchResult:
    """Welch's unequal-variance t-test of mean(a) against mean(b).

    One-sided by default: significant means a's mean is credibly LOWER
    than b's at alpha_level (the direction that matters when a and b
    are BIC samples).  Degenerate (both variances zero) is flagged; the
    test then reduces to comparing the two constants.
    """
    a = np.asarray(samples_a, dtype=float)
    b = np.asarray(samples_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise DomainError("welch_t needs at least two observations per sample")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DomainError("welch_t requires finite samples")
    ma, mb = float(a.mean()), float(b.mean())
    va, vb = float(a.var(ddof=1)), float(b.var(ddof=1))
    qa, qb = va / a.size, vb / b.size
    se2 = qa + qb
    if se2 == 0.0:
        t_stat = 0.0 if ma == mb else math.copysign(math.inf, ma - mb)
        d = float(a.size + b.size - 2)
        if two_sided:
            significant = math.isinf(t_stat)
        else:
            significant = t_stat == -math.inf
        return WelchResult(t_stat, d, significant, 0.0 if significant else 1.0, True)
    t_stat = (ma - mb) / math.sqrt(se2)
    d = se2 * se2 / (qa * qa / (a.size - 1) + qb * qb / (b.size - 1))
    if two_sided:
        p = 2.0 * float(_scipy_stats.t.sf(abs(t_stat), d))
    else:
        p = float(_scipy_stats.t.cdf(t_stat, d))
    return WelchResult(t_stat, d, p < alpha_level, p, False)


@dataclass
class BicStats:
    shape: ModelShape
    samples: np.ndarray
    skipped: int

    @property
    def mean(self) -> float:
        return float(self.samples.mean()) if self.samples.size else math.nan

    @property
    def sd(self) -> float:
        return float(self.samples.std(ddof=1)) if self.samples.size > 1 else math.nan


@dataclass
class WelchTest:
    shape_a: ModelShape
    shape_b: ModelShape
    t: float
    dof: float
    significant: bool


@dataclass
class EnsembleResult:
    index: int
    start_index: int
    stats: dict[ModelShape, BicStats]
    tests: list[WelchTest]
    winner: ModelShape


@dataclass
class SelectionReport:
    shapes: list[ModelShape]
    baseline: ModelShape
    n_boot: int
    subsample_size: int
    ensembles: list[EnsembleResult]
    winner_tally: dict[ModelShape, float]
    dropped_ensembles: int = 0

    def pooled_samples(self, shape: ModelShape) -> np.ndarray:
        parts = [e.stats[shape].samples for e in self.ensembles if shape in e.stats]
        return np.concatenate(parts) if parts else np.empty(0)

    def tests_flat(self) -> list[tuple[int, WelchTest]]:
        return [(e.index, t) for e in self.ensembles for t in e.tests]


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _fit_bic(sample, shape: ModelShape, config: EmConfig) -> tuple[float | None, FitResult | None]:
    try:
        res = fit(sample, (shape.p, shape.r), config)
    except DomainError:
        return None, None
    if res.degenerate or not math.isfinite(res.loglik):
        return None, res
    return bic(res.loglik, shape.dof, sample.total), res


def _warm_config(base: EmConfig, res: FitResult) -> EmConfig:
    m = res.model
    init = InitSpec(
        weights=tuple(float(w) for w in m.weights),
        alphas=tuple(c.alpha for c in m.components),
        betas=tuple(c.beta for c in m.components),
    )
    return EmConfig(
        epsilon=base.epsilon,
        max_iter=base.max_iter,
        m_step_variant=base.m_step_variant,
        weight_floor=base.weight_floor,
        beta_bracket=base.beta_bracket,
        root_tol=base.root_tol,
        init=init,
        direct_sweeps=base.direct_sweeps,
        direct_xtol=base.direct_xtol,
    )


def run_selection(
    diffs,
    shapes: Sequence[ModelShape],
    n_boot: int,
    subsample_size: int,
    days: int,
    rng_seed: int,
    censor_spec: list[CensoringInterval] | None = None,
    config: EmConfig | None = None,
    alpha_level: float = 0.05,
    two_sided: bool = False,
    baseline: ModelShape | None = None,
) -> SelectionReport:
    """Bootstrap BIC tournament over candidate shapes.

    For each of `days` ensembles: draw a seeded random-start contiguous
    subsample of the differences, build the censored sample, fit every
    shape on it and on n_boot bootstrap replicas (warm-started from the
    original fit), collect the n_boot+1 BIC values per shape, Welch-test
    each alternative against the baseline, and record the ensemble
    winner.  The baseline wins unless some alternative significantly
    beats it; among significant beaters the lowest mean BIC wins.

    Deterministic in rng_seed: every replica derives its seed from
    (rng_seed, ensemble, replica).
    """
    diffs = np.asarray(diffs)
    shapes = list(shapes)
    if not shapes:
        raise DomainError("run_selection needs at least one candidate shape")
    base_shape = baseline or ModelShape(1, 1)
    if base_shape not in shapes:
        base_shape = shapes[0]
    cfg = config or EmConfig()
    if diffs.size < subsample_size:
        raise DomainError(
            f"{diffs.size} differences cannot supply subsamples of {subsample_size}"
        )
    if days < 1 or n_boot < 0:
        raise DomainError("need days >= 1 and n_boot >= 0")

    ensembles: list[EnsembleResult] = []
    dropped = 0
    for e in range(days):
        rng = np.random.default_rng(_derived_seed(rng_seed, e))
        start = int(rng.integers(0, diffs.size - subsample_size + 1))
        original = build_sample(subsample(diffs, start, subsample_size), censor_spec)

        stats: dict[ModelShape, BicStats] = {}
        for shape in shapes:
            values = []
            skipped = 0
            b0, res0 = _fit_bic(original, shape, cfg)
            if b0 is None:
                skipped += 1
                warm = cfg
            else:
                values.append(b0)
                warm = _warm_config(cfg, res0)
            for b in range(1, n_boot + 1):
                replica = bootstrap_resample(original, _derived_seed(rng_seed, e, b))
                bb, _ = _fit_bic(replica, shape, warm)
                if bb is None:
                    skipped += 1
                else:
                    values.append(bb)
            stats[shape] = BicStats(shape, np.asarray(values, dtype=float), skipped)

        if stats[base_shape].samples.size < 2:
            dropped += 1
            log.warning("ensemble %d dropped: baseline produced <2 usable fits", e)
            continue
        tests = []
        beaters = []
        for shape in shapes:
            if shape == base_shape:
                continue
            st = stats[shape]
            if st.samples.size < 2:
                continue
            w = welch_t(st.samples, stats[base_shape].samples, alpha_level, two_sided)
            tests.append(WelchTest(shape, base_shape, w.t, w.dof, w.significant))
            if w.significant and st.mean < stats[base_shape].mean:
                beaters.append(shape)
        if beaters:
            winner = min(beaters, key=lambda sh: stats[sh].mean)
        else:
            winner = base_shape
        ensembles.append(EnsembleResult(e, start, stats, tests, winner))

    if not ensembles:
        raise DomainError("all ensembles degenerate; nothing to report")
    tally = {shape: 0.0 for shape in shapes}
    for ens in ensembles:
        tally[ens.winner] += 1.0
    for shape in tally:
        tally[shape] /= len(ensembles)
    return SelectionReport(
        shapes=shapes,
        baseline=base_shape,
        n_boot=n_boot,
        subsample_size=subsample_size,
        ensembles=ensembles,
        winner_tally=tally,
        dropped_ensembles=dropped,
    )


@dataclass(frozen=True)
class BucketProfile:
    bucket_id: int
    start_ms: int
    alpha_wbl: float | None
    alpha_exp: float | None
    beta: float | None
    weight_exp: float | None
    day_count: int
    sample_count: int


@dataclass
class IntradayProfile:
    spec: BucketSpec
    shape: ModelShape
    buckets: list[BucketProfile]
    skipped: list[tuple[int, int, str]]  # (day, bucket_id, reason)


def _fit_summary(res: FitResult) -> dict[str, float]:
    """Family-level parameter summary robust to label switching: scales
    and shapes are averaged within a family weighted by component
    weight."""
    m = res.model
    w = np.asarray(m.weights)
    exp_idx = [i for i, c in enumerate(m.components) if c.kind.value == "exp"]
    wbl_idx = [i for i, c in enumerate(m.components) if c.kind.value == "wbl"]
    out: dict[str, float] = {}
    if exp_idx:
        we = w[exp_idx]
        out["weight_exp"] = float(we.sum())
        if we.sum() > 0:
            out["alpha_exp"] = float(
                sum(w[i] * m.components[i].alpha for i in exp_idx) / we.sum()
            )
        else:
            out["alpha_exp"] = float(np.mean([m.components[i].alpha for i in exp_idx]))
    if wbl_idx:
        ww = w[wbl_idx]
        denom = float(ww.sum())
        if denom > 0:
            out["alpha_wbl"] = float(
                sum(w[i] * m.components[i].alpha for i in wbl_idx) / denom
            )
            out["beta"] = float(
                sum(w[i] * m.components[i].beta for i in wbl_idx) / denom
            )
        else:
            out["alpha_wbl"] = float(np.mean([m.components[i].alpha for i in wbl_idx]))
            out["beta"] = float(np.mean([m.components[i].beta for i in wbl_idx]))
    return out


def profile_intraday(
    days_ts: Sequence[TimestampSeries],
    spec: BucketSpec,
    shape: ModelShape,
    config: EmConfig | None = None,
    censor_spec: list[CensoringInterval] | None = None,
    min_bucket_size: int = 10,
) -> IntradayProfile:
    """Fit the shape per (day, bucket) and average parameters per bucket
    across days.

    Buckets whose censored sample is smaller than min_bucket_size (or
    the shape's parameter count) are skipped and listed.  Differences
    are always taken within a bucket, never across bucket boundaries.
    """
    cfg = config or EmConfig()
    acc: dict[int, list[dict[str, float]]] = {}
    sizes: dict[int, int] = {}
    skipped: list[tuple[int, int, str]] = []
    for day, ts in enumerate(days_ts):
        for bucket_id, series in bucket_by_time(ts, spec):
            if len(series) < 2:
                if len(series):
                    skipped.append((day, bucket_id, "fewer than two timestamps"))
                continue
            sample = build_sample(diff_and_round(series), censor_spec)
            if sample.total < max(min_bucket_size, shape.dof + 1):
                skipped.append((day, bucket_id, f"sample too small (N={sample.total})"))
                continue
            try:
                res = fit(sample, (shape.p, shape.r), cfg)
            except DomainError as exc:
                skipped.append((day, bucket_id, str(exc)))
                continue
            if res.degenerate or not math.isfinite(res.loglik):
                skipped.append((day, bucket_id, res.error or "degenerate fit"))
                continue
            acc.setdefault(bucket_id, []).append(_fit_summary(res))
            sizes[bucket_id] = sizes.get(bucket_id, 0) + sample.total
    buckets = []
    for bucket_id in sorted(acc):
        rows = acc[bucket_id]

        def mean_of(key: str) -> float | None:
            vals = [r[key] for r in rows if key in r]
            return float(np.mean(vals)) if vals else None

        buckets.append(
            BucketProfile(
                bucket_id=bucket_id,
                start_ms=spec.bucket_start_ms(bucket_id),
                alpha_wbl=mean_of("alpha_wbl"),
                alpha_exp=mean_of("alpha_exp"),
                beta=mean_of("beta"),
                weight_exp=mean_of("weight_exp"),
                day_count=len(rows),
                sample_count=sizes[bucket_id],
            )
        )
    return IntradayProfile(spec=spec, shape=shape, buckets=buckets, skipped=skipped)
