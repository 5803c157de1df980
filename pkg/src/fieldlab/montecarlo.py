"""Monte Carlo verification engine for the detection pipeline.

The closed-form probabilities factor the Bayes combination through the
ensemble covariance; this module re-derives them by simulation using the
importance identity

    p = E_mu[pi(I, phi)] / E_mu[pi_total(phi)]

(ratio-of-means estimator), with batch-means standard errors and a
jackknife bias estimate over the batches.  A rejection-sampling
estimator with an adaptive envelope is provided as an independent second
route.

Sampling uses counter-based (Philox) streams: sample k of stream
(seed, stream_id) is a pure function of (seed, stream_id, k), so results
are reproducible for any worker partitioning that respects the stream
layout.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .detection import DetectorSpec, detect_power24_region, detect_quadratic_region
from .deviation import delta_closed_form
from .ensembles import EnsembleSpec, field_stream, sample_coefficients
from .errors import DegenerateDomainError
from .grid import Region

_CHUNK = 8192


@dataclass(frozen=True)
class RunConfig:
    n_samples: int
    seed: int
    n_streams: int = 1
    batch_count: int = 32

    def __post_init__(self):
        if self.batch_count < 2:
            raise ValueError("need at least 2 batches for a standard error")
        if self.n_samples < self.batch_count:
            raise ValueError("need at least one sample per batch")
        if self.n_streams < 1:
            raise ValueError("need at least one stream")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    n: int
    seed: int
    rejected: int
    bias: float = 0.0

    def __post_init__(self):
        if self.stderr < 0 or self.n < 1:
            raise ValueError("estimate needs stderr >= 0 and n >= 1")

    def to_json_line(self, config: RunConfig | None = None, **extra) -> str:
        obj = asdict(self)
        if config is not None:
            obj["config"] = config.to_json()
        obj.update(extra)
        return json.dumps(obj, sort_keys=True)


def _stream_sizes(n_samples: int, n_streams: int) -> list[int]:
    base, rem = divmod(n_samples, n_streams)
    return [base + (1 if s < rem else 0) for s in range(n_streams)]


def _sample_weights(ens: EnsembleSpec, det: DetectorSpec, region: Region, cfg: RunConfig):
    """Per-sample (numerator power, selection weight) over all streams, in global order."""
    grid = ens.grid
    mat = np.ascontiguousarray(ens.state_matrix())
    idx_region = region.indices(grid)
    idx_domain = det.locality.indices(grid) if det.locality is not None else None
    num = np.empty(cfg.n_samples)
    den = np.empty(cfg.n_samples)
    pos = 0
    for stream_id, size in enumerate(_stream_sizes(cfg.n_samples, cfg.n_streams)):
        rng = field_stream(cfg.seed, stream_id)
        done = 0
        while done < size:
            take = min(_CHUNK, size - done)
            z = sample_coefficients(ens, take, rng)
            p2r, p2f, p4r, p4f = kernels.mixture_power_sums(z, mat, grid.h, idx_region)
            if det.power_law == "quadratic":
                chunk_num = p2r
            else:
                chunk_num = p2r + p4r
            if idx_domain is None:
                chunk_den = p2f if det.power_law == "quadratic" else p2f + p4f
            else:
                d2r, _, d4r, _ = kernels.mixture_power_sums(z, mat, grid.h, idx_domain)
                chunk_den = d2r if det.power_law == "quadratic" else d2r + d4r
            num[pos : pos + take] = chunk_num
            den[pos : pos + take] = chunk_den
            pos += take
            done += take
    return num, den


def _ratio_estimate(num: np.ndarray, den: np.ndarray, cfg: RunConfig) -> MCEstimate:
    n = num.size
    total_den = den.sum()
    if total_den <= 0.0:
        raise DegenerateDomainError("all sampled fields have zero selection weight")
    mean = num.sum() / total_den

    # fixed contiguous batch layout: batch of sample g is g * B // n
    edges = (np.arange(cfg.batch_count + 1) * n) // cfg.batch_count
    batch_num = np.add.reduceat(num, edges[:-1])
    batch_den = np.add.reduceat(den, edges[:-1])
    ratios = batch_num / batch_den
    stderr = float(np.std(ratios, ddof=1) / np.sqrt(cfg.batch_count))

    jack = (num.sum() - batch_num) / (total_den - batch_den)
    bias = float((cfg.batch_count - 1) * (jack.mean() - mean))

    rejected = int(np.count_nonzero(den == 0.0))
    return MCEstimate(float(mean), stderr, n, cfg.seed, rejected, bias)


def estimate_detection(ens: EnsembleSpec, det: DetectorSpec, region: Region, cfg: RunConfig) -> MCEstimate:
    """Ratio-of-means Monte Carlo estimate of the detection probability."""
    num, den = _sample_weights(ens, det, region, cfg)
    return _ratio_estimate(num, den, cfg)


def estimate_detection_rejection(
    ens: EnsembleSpec,
    det: DetectorSpec,
    region: Region,
    cfg: RunConfig,
    envelope_factor: float = 2.0,
) -> MCEstimate:
    """Independent second estimator: rejection-sampled field selection.

    Fields are accepted with probability weight / M under an adaptive
    envelope M (grown and replayed deterministically if exceeded); the
    estimate is the plain mean of the conditional outcome probability
    over the accepted fields.
    """
    num, den = _sample_weights(ens, det, region, cfg)
    if den.max() <= 0.0:
        raise DegenerateDomainError("all sampled fields have zero selection weight")
    pilot = max(cfg.n_samples // 16, min(cfg.n_samples, 256))
    envelope = den[:pilot].max() * envelope_factor
    if envelope <= 0.0:
        envelope = den.max() * envelope_factor
    while den.max() > envelope:
        envelope *= envelope_factor
    u = field_stream(cfg.seed, cfg.n_streams).uniform(size=cfg.n_samples)
    accept = (u * envelope < den) & (den > 0.0)
    n_acc = int(np.count_nonzero(accept))
    if n_acc < 2:
        raise DegenerateDomainError("rejection sampler accepted fewer than 2 fields")
    vals = num[accept] / den[accept]
    mean = float(vals.mean())
    stderr = float(np.std(vals, ddof=1) / np.sqrt(n_acc))
    return MCEstimate(mean, stderr, n_acc, cfg.seed, cfg.n_samples - n_acc, 0.0)


def estimate_selected_power(ens: EnsembleSpec, cfg: RunConfig) -> MCEstimate:
    """Mean total power of the selected field: E||phi||^4 / E||phi||^2."""
    grid = ens.grid
    mat = np.ascontiguousarray(ens.state_matrix())
    idx = np.empty(0, dtype=np.int64)
    num = np.empty(cfg.n_samples)
    den = np.empty(cfg.n_samples)
    pos = 0
    for stream_id, size in enumerate(_stream_sizes(cfg.n_samples, cfg.n_streams)):
        rng = field_stream(cfg.seed, stream_id)
        done = 0
        while done < size:
            take = min(_CHUNK, size - done)
            z = sample_coefficients(ens, take, rng)
            _, p2f, _, _ = kernels.mixture_power_sums(z, mat, grid.h, idx)
            num[pos : pos + take] = p2f * p2f
            den[pos : pos + take] = p2f
            pos += take
            done += take
    return _ratio_estimate(num, den, cfg)


@dataclass(frozen=True)
class SweepRow:
    kappa: float
    estimate: float
    stderr: float
    closed_form: float
    born: float
    delta: float
    delta_first_order: float | None


def kappa_sweep(ens: EnsembleSpec, det: DetectorSpec, region: Region, kappas, cfg: RunConfig) -> list[SweepRow]:
    """MC estimate vs closed form across dispersions; delta is estimate minus the Born value."""
    rows = []
    born = detect_quadratic_region(ens, region)
    pure = len(ens.components) == 1
    for kv in kappas:
        ens_k = EnsembleSpec(ens.components, float(kv), ens.modulus_model)
        est = estimate_detection(ens_k, det, region, cfg)
        if det.power_law == "quadratic":
            closed = born
        else:
            closed = detect_power24_region(ens_k, region)
        first = None
        if pure:
            first = delta_closed_form(ens.components[0][1], region, float(kv), ens.modulus_model)
        rows.append(SweepRow(float(kv), est.mean, est.stderr, closed, born, est.mean - born, first))
    return rows
