"""Click-level Monte Carlo of the attenuated-laser source and coincidence counting.

Generation is split into fixed lab-time chunks.  Chunk ``k`` draws from its
own ``SeedSequence(seed, spawn_key=(k,))`` substream, so the stream depends on
the seed alone and never on how many workers produced it.
"""
from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .correlators import SINGLES_LEVEL, CorrelationCurve, intensity_port1, intensity_port2
from .errors import EstimateError, ParameterError, StreamError
from .optics import OpticsParams

CHUNK_EVENTS = 1 << 16  # expected source events per generation chunk

D1, D2 = 1, 2
SINGLE, PAIR_MEMBER = 0, 1

TAG_DTYPE = np.dtype(
    [("time", "<f8"), ("detector", "i1"), ("origin", "i1"), ("pair_id", "<i8")]
)


@dataclass(frozen=True)
class SourceConfig:
    singles_rate: float = 1.0
    pair_fraction: float = 0.01
    duration: float = 1.0e5
    seed: int = 0
    sigma: float = 5.0
    mean_photon_number: Optional[float] = None
    laser_linewidth: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.singles_rate) and self.singles_rate > 0):
            raise ParameterError("singles_rate must be > 0")
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ParameterError("duration must be >= 0")
        if not 0.0 <= self.pair_fraction <= 1.0:
            raise ParameterError("pair_fraction must lie in [0, 1]")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ParameterError("sigma must be > 0")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ParameterError("seed must be an unsigned 64-bit integer")
        if self.mean_photon_number is not None and not 0 < self.mean_photon_number < 1:
            raise ParameterError("mean_photon_number must satisfy 0 < <n> < 1")
        if self.laser_linewidth is not None:
            if not self.laser_linewidth > 0:
                raise ParameterError("laser_linewidth must be > 0")
            if self.sigma / self.laser_linewidth <= 100:
                raise ParameterError("ensemble width must exceed laser_linewidth by > 1e2")


@dataclass(frozen=True, eq=False)
class TagStream:
    """Time-ordered detector clicks plus source-side bookkeeping."""

    tags: np.ndarray
    duration: float
    n_events: int
    n_pairs: int
    n_photons: int
    seed: int

    def __len__(self):
        return len(self.tags)

    @property
    def times(self) -> np.ndarray:
        return self.tags["time"]

    @property
    def detectors(self) -> np.ndarray:
        return self.tags["detector"]

    def summary(self) -> dict:
        return {
            "duration": self.duration,
            "events": self.n_events,
            "pairs": self.n_pairs,
            "photons": self.n_photons,
            "clicks_D1": int(np.count_nonzero(self.detectors == D1)),
            "clicks_D2": int(np.count_nonzero(self.detectors == D2)),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class CoincidenceHistogram:
    window: float
    coincidences: int
    singles: tuple[int, int]
    duration: float
    n_pairs: int = 0

    def __post_init__(self):
        if not self.window > 0:
            raise ParameterError("window must be > 0")
        if self.coincidences < 0:
            raise ParameterError("coincidence count must be >= 0")


@dataclass(frozen=True)
class G2Estimate:
    value: float
    stderr: float


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def _click(rng: np.random.Generator, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    """Detector index per photon: D1 w.p. p1, D2 w.p. p2, otherwise 0 (absorbed)."""
    u = rng.random(p1.shape)
    return np.where(u < p1, D1, np.where(u < p1 + p2, D2, 0)).astype("i1")


def _arrivals(rng: np.random.Generator, rate: float, start: float, stop: float) -> np.ndarray:
    """Poisson arrival times in [start, stop) from cumulative exponential gaps."""
    times = []
    t = start
    batch = max(16, int(1.2 * rate * (stop - start)) + 16)
    while True:
        gaps = rng.exponential(1.0 / rate, batch)
        cum = t + np.cumsum(gaps)
        times.append(cum[cum < stop])
        if cum[-1] >= stop:
            break
        t = cum[-1]
    return np.concatenate(times)


def _generate_chunk(cfg: SourceConfig, params: OpticsParams, k: int, span: float):
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(k,)))
    start = k * span
    stop = min((k + 1) * span, cfg.duration)
    t = _arrivals(rng, cfg.singles_rate, start, stop)
    n = len(t)
    is_pair = rng.random(n) < cfg.pair_fraction
    df = rng.normal(0.0, cfg.sigma, n)

    # Each source event carries one photon; pair events add a second photon
    # with the same detuning and arrival time.
    times = np.concatenate([t, t[is_pair]])
    dfs = np.concatenate([df, df[is_pair]])
    origin = np.concatenate([np.where(is_pair, PAIR_MEMBER, SINGLE), np.full(is_pair.sum(), PAIR_MEMBER)])
    local_ids = np.cumsum(is_pair) - 1
    pair_id = np.concatenate([np.where(is_pair, local_ids, -1), local_ids[is_pair]])

    p1 = intensity_port1(params.xi, dfs, params.tau, params.phi)
    p2 = intensity_port2(params.theta, dfs, params.tau, params.phi)
    det = _click(rng, p1, p2)

    keep = det > 0
    tags = np.empty(int(keep.sum()), dtype=TAG_DTYPE)
    tags["time"] = times[keep]
    tags["detector"] = det[keep]
    tags["origin"] = origin[keep]
    tags["pair_id"] = pair_id[keep]
    return tags, n, int(is_pair.sum()), len(times)


def generate_events(cfg: SourceConfig, params: OpticsParams, workers: int = 1) -> TagStream:
    """Simulate the click stream of both detectors for one delay setting.

    Events arrive as a Poisson process at ``singles_rate``; each is a pair with
    probability ``pair_fraction``.  Every photon (both pair members share one
    detuning) clicks D1 or D2 with probability given by the projected port
    intensities, else is lost at the polarizer.
    """
    if workers < 1:
        raise ParameterError("workers must be >= 1")
    span = CHUNK_EVENTS / cfg.singles_rate
    n_chunks = math.ceil(cfg.duration / span) if cfg.duration > 0 else 0

    def job(k):
        return _generate_chunk(cfg, params, k, span)

    if workers == 1 or n_chunks <= 1:
        parts = [job(k) for k in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(n_chunks)))

    offset = 0
    chunks = []
    for tags, _, n_pairs, _ in parts:
        tags = tags.copy()
        tags["pair_id"][tags["pair_id"] >= 0] += offset
        offset += n_pairs
        chunks.append(tags)
    tags = np.concatenate(chunks) if chunks else np.empty(0, dtype=TAG_DTYPE)
    # ties in time resolve toward D1, then by pair id
    order = np.lexsort((tags["pair_id"], tags["detector"], tags["time"]))
    return TagStream(
        tags=tags[order],
        duration=cfg.duration,
        n_events=sum(p[1] for p in parts),
        n_pairs=offset,
        n_photons=sum(p[3] for p in parts),
        seed=int(cfg.seed),
    )


def independent_stream(rate1: float, rate2: float, duration: float, seed: int) -> TagStream:
    """Two uncorrelated Poisson click trains, one per detector."""
    rng = np.random.default_rng(seed)
    t1 = _arrivals(rng, rate1, 0.0, duration)
    t2 = _arrivals(rng, rate2, 0.0, duration)
    tags = np.empty(len(t1) + len(t2), dtype=TAG_DTYPE)
    tags["time"] = np.concatenate([t1, t2])
    tags["detector"] = np.concatenate([np.full(len(t1), D1), np.full(len(t2), D2)])
    tags["origin"] = SINGLE
    tags["pair_id"] = -1
    order = np.lexsort((tags["detector"], tags["time"]))
    return TagStream(tags[order], duration, len(tags), 0, len(tags), seed)


# ---------------------------------------------------------------------------
# Counting and estimation
# ---------------------------------------------------------------------------

def count_coincidences(stream: TagStream, window: float) -> CoincidenceHistogram:
    """Count D1/D2 click pairs with ``|t1 - t2| <= window``.

    Single pass over the sorted stream.  A click is matched to the earliest
    still-unmatched click of the other detector inside the window; every click
    is used at most once.
    """
    if not window > 0:
        raise ParameterError("window must be > 0")
    times = stream.times
    dets = stream.detectors
    if len(times) > 1 and np.any(np.diff(times) < 0):
        raise StreamError("tag stream is not time-ordered")

    pending = {D1: deque(), D2: deque()}
    count = 0
    for t, d in zip(times.tolist(), dets.tolist()):
        other = pending[D2 if d == D1 else D1]
        while other and t - other[0] > window:
            other.popleft()
        if other:
            other.popleft()
            count += 1
        else:
            pending[d].append(t)
    n1 = int(np.count_nonzero(dets == D1))
    n2 = int(np.count_nonzero(dets == D2))
    return CoincidenceHistogram(
        window=window, coincidences=count, singles=(n1, n2), duration=stream.duration, n_pairs=stream.n_pairs
    )


def accidental_expectation(h: CoincidenceHistogram) -> float:
    """Coincidences expected from uncorrelated trains: ``2 N1 N2 w / T``."""
    n1, n2 = h.singles
    return 2.0 * n1 * n2 * h.window / h.duration


def estimate_g2(h: CoincidenceHistogram) -> G2Estimate:
    """Accidental-normalized ratio ``C T / (2 N1 N2 w)``; 1 for uncorrelated trains."""
    n1, n2 = h.singles
    if n1 == 0 or n2 == 0 or h.duration <= 0:
        raise EstimateError("g2 undefined: a detector recorded no singles")
    acc = accidental_expectation(h)
    return G2Estimate(h.coincidences / acc, math.sqrt(h.coincidences) / acc)


def estimate_pair_g2(h: CoincidenceHistogram) -> G2Estimate:
    """Per-pair coincidence probability in units of the phi-averaged singles product.

    Accidentals are subtracted, then the pair coincidence probability
    ``2 p1 p2`` is divided by ``2 (1/4)^2``; this is the estimator that tracks
    ``classical_coincidence`` with ``singles_normalized``.
    """
    if h.n_pairs <= 0:
        raise EstimateError("pair-normalized g2 undefined: no pairs were emitted")
    acc = accidental_expectation(h) if h.duration > 0 else 0.0
    scale = 1.0 / (2 * SINGLES_LEVEL**2 * h.n_pairs)
    return G2Estimate((h.coincidences - acc) * scale, math.sqrt(h.coincidences) * scale)


@dataclass
class ScanPoint:
    tau: float
    seed: int
    histogram: CoincidenceHistogram
    estimate: G2Estimate
    summary: dict = field(default_factory=dict)


def point_seeds(seed: int, n: int) -> list[int]:
    """Independent 64-bit seeds for ``n`` scan points derived from a master seed."""
    return [
        int(np.random.SeedSequence(seed, spawn_key=(2**31 + i,)).generate_state(1, np.uint64)[0])
        for i in range(n)
    ]


def scan_tau(
    cfg: SourceConfig,
    params: OpticsParams,
    tau_list: Sequence[float],
    window: float,
    workers: int = 1,
) -> tuple[CorrelationCurve, list[ScanPoint]]:
    """Repeat generate -> count -> estimate at each delay; returns the curve and per-point detail."""
    taus = [float(t) for t in tau_list]
    if not taus:
        raise ParameterError("tau_list must be non-empty")
    points = []
    for tau, seed in zip(taus, point_seeds(cfg.seed, len(taus))):
        sub = SourceConfig(**{**cfg.__dict__, "seed": seed})
        p = OpticsParams(xi=params.xi, theta=params.theta, phi=params.phi, tau=tau, delta_f=0.0)
        stream = generate_events(sub, p, workers=workers)
        h = count_coincidences(stream, window)
        points.append(ScanPoint(tau, seed, h, estimate_pair_g2(h), stream.summary()))
    curve = CorrelationCurve(
        mode="classical_product",
        tau=taus,
        values=[pt.estimate.value for pt in points],
        stderr=[pt.estimate.stderr for pt in points],
        params={"xi": params.xi, "theta": params.theta, "phi": params.phi},
        metadata={"seeds": [pt.seed for pt in points], "master_seed": cfg.seed, "window": window, "stochastic": True},
    )
    return curve, points
