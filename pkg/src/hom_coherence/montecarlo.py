"""Event-level Monte Carlo of an attenuated coherent source.

Each detection window draws a Poisson photon number. A window with two or
more photons yields one pair event whose detuning is uniform over the band
(the fast, synchronized frequency sweep). Higher counts are truncated to a
single pair.

Windows are grouped into fixed-size blocks. Block ``k`` draws from a Philox
stream keyed by the seed with the block index in the high counter word, so
each block's events depend only on ``(seed, k)`` and any split of blocks
across workers merges to the same result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .optics import Branch, branch_intensities

BLOCK_SIZE = 1 << 20
RNG_ALGORITHM = "numpy.random.Philox(4x64-10); key=seed, counter=[0, 0, block, 0]"
_SEED_LIMIT = 1 << 64


class SourceConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SourceConfig:
    mean_photon_number: float
    n_windows: int
    seed: int

    def __post_init__(self):
        if not (0 < self.mean_photon_number < 1):
            raise SourceConfigError(
                f"mean photon number must lie in (0, 1), got {self.mean_photon_number!r}"
            )
        if self.n_windows <= 0:
            raise SourceConfigError(f"n_windows must be positive, got {self.n_windows!r}")
        if not (0 <= self.seed < _SEED_LIMIT):
            raise SourceConfigError("seed must be an unsigned 64-bit integer")

    @property
    def n_blocks(self) -> int:
        return -(-self.n_windows // BLOCK_SIZE)


@dataclass(frozen=True)
class PairEvent:
    delta_f: float
    branch: Branch
    window_index: int


@dataclass
class PairEvents:
    """Column store of pair events; iterating yields ``PairEvent`` records."""

    delta_f: np.ndarray
    window_index: np.ndarray
    n_windows: int = 0
    n_nonempty: int = 0

    def __len__(self) -> int:
        return len(self.delta_f)

    def __iter__(self) -> Iterator[PairEvent]:
        for df, w in zip(self.delta_f.tolist(), self.window_index.tolist()):
            yield PairEvent(df, branch_of(df), w)

    @property
    def first_branch(self) -> np.ndarray:
        return self.delta_f >= 0

    def head(self, n: int) -> "PairEvents":
        return PairEvents(
            self.delta_f[:n], self.window_index[:n], self.n_windows, self.n_nonempty
        )

    @classmethod
    def concat(cls, parts: list["PairEvents"]) -> "PairEvents":
        if not parts:
            return cls(np.empty(0), np.empty(0, dtype=np.int64))
        return cls(
            np.concatenate([p.delta_f for p in parts]),
            np.concatenate([p.window_index for p in parts]),
            sum(p.n_windows for p in parts),
            sum(p.n_nonempty for p in parts),
        )


@dataclass(frozen=True)
class McEstimate:
    tau: float
    g2_hat: float
    std_err: float
    n_pairs: int

    @property
    def usable(self) -> bool:
        return self.n_pairs > 0


def branch_of(delta_f: float) -> Branch:
    return Branch.FIRST if delta_f >= 0 else Branch.SECOND


def pair_probability(mean_photon_number: float) -> float:
    """P(N >= 2) for a Poisson photon number."""
    n = mean_photon_number
    return -math.expm1(-n) - n * math.exp(-n)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, block, 0]))


def sample_block(src: SourceConfig, bandwidth: float, block: int) -> PairEvents:
    start = block * BLOCK_SIZE
    size = min(BLOCK_SIZE, src.n_windows - start)
    if size <= 0:
        raise IndexError(f"block {block} is past the last window")
    rng = block_rng(src.seed, block)
    counts = rng.poisson(src.mean_photon_number, size)
    hits = np.flatnonzero(counts >= 2)
    delta_f = rng.uniform(-bandwidth, bandwidth, len(hits))
    n_nonempty = int(np.count_nonzero(counts))
    return PairEvents(delta_f, hits.astype(np.int64) + start, size, n_nonempty)


def sample_blocks(src: SourceConfig, bandwidth: float, blocks: range) -> PairEvents:
    """Events for a contiguous range of blocks, i.e. one worker's partition."""
    return PairEvents.concat([sample_block(src, bandwidth, b) for b in blocks])


def partition_blocks(n_blocks: int, n_parts: int) -> list[range]:
    n_parts = max(1, min(n_parts, n_blocks))
    edges = np.linspace(0, n_blocks, n_parts + 1).round().astype(int)
    return [range(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]


def sample_pair_events(src: SourceConfig, bandwidth: float, workers: int = 1) -> PairEvents:
    """Draw pair events for every window of the source.

    The output does not depend on ``workers``.
    """
    if not bandwidth > 0:
        raise SourceConfigError(f"bandwidth must be positive, got {bandwidth!r}")
    parts = partition_blocks(src.n_blocks, workers)
    if len(parts) == 1:
        return sample_blocks(src, bandwidth, parts[0])
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        results = list(pool.map(lambda r: sample_blocks(src, bandwidth, r), parts))
    return PairEvents.concat(results)


def event_products(events: PairEvents, eta: float, tau: float) -> np.ndarray:
    """Coincidence product I_c * I_d of each event, using that event's branch."""
    df = events.delta_f
    first = events.first_branch
    out = np.empty(len(df))
    for branch, mask in ((Branch.FIRST, first), (Branch.SECOND, ~first)):
        i_c, i_d = branch_intensities(1.0, eta, df[mask], tau, branch)
        out[mask] = i_c * i_d
    return out


def mc_correlation(events: PairEvents, eta: float, tau: float) -> McEstimate:
    """Sample-mean estimate of g2(tau) with its standard error."""
    n = len(events)
    if n == 0:
        return McEstimate(tau, math.nan, 0.0, 0)
    samples = event_products(events, eta, tau)
    mean = math.fsum(samples) / n
    if n > 1:
        var = math.fsum((samples - mean) ** 2) / (n - 1)
        std_err = math.sqrt(var / n)
    else:
        std_err = 0.0
    return McEstimate(tau, mean, std_err, n)


def pair_rates(events: PairEvents, src: SourceConfig) -> dict:
    """Measured pair rates, per window and per non-empty window, with Poisson expectations."""
    p_pair = pair_probability(src.mean_photon_number)
    p_nonempty = -math.expm1(-src.mean_photon_number)
    return {
        "n_pairs": len(events),
        "n_windows": events.n_windows,
        "n_nonempty_windows": events.n_nonempty,
        "pairs_per_window": len(events) / events.n_windows if events.n_windows else 0.0,
        "pairs_per_nonempty_window": (
            len(events) / events.n_nonempty if events.n_nonempty else 0.0
        ),
        "expected_pairs_per_window": p_pair,
        "expected_pairs_per_nonempty_window": p_pair / p_nonempty,
    }
