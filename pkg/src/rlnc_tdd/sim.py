"""Monte Carlo replay of the stop-and-listen broadcast protocol with real RLNC."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .galois import DecoderState, FieldSpec
from .model import SystemParams, config_text, round_duration
from .policy import Policy

DEFAULT_ROUND_CAP = 10**6
GENERATOR = "numpy.PCG64 via SeedSequence(entropy=seed, spawn_key=(run,)); coefficients from jumped()"


class RoundCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    params: SystemParams
    policy: Policy
    field: FieldSpec | None = None
    runs: int = 1000
    seed: int = 0
    ideal_field: bool = True
    round_cap: int = DEFAULT_ROUND_CAP

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.policy.M != self.params.M:
            raise ValueError(f"policy is for M={self.policy.M}, params have M={self.params.M}")
        if self.field is None:
            object.__setattr__(self, "field", FieldSpec.default(self.params.g))

    def digest(self) -> str:
        """Short hash of everything that determines the outcome distribution."""
        blob = "\n".join([config_text(self.params), self.policy.to_text(),
                          f"g={self.field.g} poly={self.field.poly:#x}",
                          f"ideal={self.ideal_field}"])
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class SimOutcome:
    completion_time: float
    rounds: int
    packets_sent: int
    non_innovative_received: int
    # receptions at a receiver that still lacked dofs; the denominator of the field gap
    useful_receptions: int
    burst_lengths: tuple[int, ...] = ()


def run_stream(seed: int, run: int) -> np.random.Generator:
    """Per-run substream; independent of how many runs precede it."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(run,))))


class Broadcast:
    """Mutable state of one block in flight.

    The transmitter only knows each receiver's last heard dof count.  A lost
    ACK leaves that belief unchanged even if the receiver progressed; every
    receiver ACKs every round with a fresh erasure draw.
    """

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        p = cfg.params
        self.pe = np.array(p.pe)
        self.pe_ack = np.array(p.pe_ack)
        self.belief = [p.M] * p.N
        self.rank = [0] * p.N
        self.decoders = None if cfg.ideal_field else [DecoderState(p.M, cfg.field) for _ in range(p.N)]
        self.elapsed = 0.0
        self.rounds = self.sent = self.wasted = self.useful = 0
        self.bursts: list[int] = []

    @property
    def done(self) -> bool:
        return max(self.belief) == 0

    def step(self, rng: np.random.Generator,
             coeff_rng: np.random.Generator | None = None) -> None:
        """One burst plus ACK window.  Coefficients come from ``coeff_rng`` (default ``rng``)."""
        cfg, p = self.cfg, self.cfg.params
        M, N = p.M, p.N
        n_i = cfg.policy.burst(max(self.belief))
        received = rng.random((N, n_i)) >= self.pe[:, None]
        if self.decoders is not None:
            coeffs = (coeff_rng or rng).integers(0, cfg.field.order, size=(n_i, M)).tolist()
        for j in range(N):
            for k in np.flatnonzero(received[j]):
                if self.rank[j] == M:
                    break
                self.useful += 1
                if self.decoders is None or self.decoders[j].absorb(coeffs[k]):
                    self.rank[j] += 1
                else:
                    self.wasted += 1
        heard = rng.random(N) >= self.pe_ack
        for j in range(N):
            if heard[j]:
                self.belief[j] = M - self.rank[j]
        self.elapsed += round_duration(p, n_i)
        self.sent += n_i
        self.rounds += 1
        self.bursts.append(n_i)


def run_once(cfg: SimConfig, rng: np.random.Generator) -> SimOutcome:
    """Play one block until the transmitter has heard every receiver report zero.

    Coding coefficients are drawn from a jumped copy of ``rng`` so that the
    erasure and ACK draws are identical with and without ideal_field.
    """
    coeff_rng = np.random.Generator(rng.bit_generator.jumped())
    b = Broadcast(cfg)
    while not b.done:
        if b.rounds >= cfg.round_cap:
            raise RoundCapExceeded(f"no completion after {cfg.round_cap} rounds")
        b.step(rng, coeff_rng)
    return SimOutcome(b.elapsed, b.rounds, b.sent, b.wasted, b.useful, tuple(b.bursts))


@dataclass(frozen=True)
class FieldSummary:
    mean: float
    stderr: float
    p5: float
    p50: float
    p95: float


@dataclass(frozen=True)
class BatchSummary:
    config_hash: str
    seed: int
    runs: int
    completion_time: FieldSummary
    rounds: FieldSummary
    packets_sent: FieldSummary
    non_innovative_received: int
    useful_receptions: int
    generator: str = GENERATOR
    outcomes: tuple[SimOutcome, ...] = field(default=(), repr=False)

    @property
    def non_innovative_rate(self) -> float:
        return self.non_innovative_received / self.useful_receptions if self.useful_receptions else 0.0

    def csv_row(self) -> dict[str, str]:
        return {
            "config_hash": self.config_hash,
            "seed": str(self.seed),
            "mean_time": f"{self.completion_time.mean:.9g}",
            "stderr_time": f"{self.completion_time.stderr:.9g}",
            "mean_rounds": f"{self.rounds.mean:.9g}",
            "mean_packets": f"{self.packets_sent.mean:.9g}",
            "non_innovative_rate": f"{self.non_innovative_rate:.9g}",
        }


CSV_COLUMNS = ("config_hash", "seed", "mean_time", "stderr_time", "mean_rounds",
               "mean_packets", "non_innovative_rate")


def _summarize(values: Sequence[float]) -> FieldSummary:
    x = np.asarray(values, dtype=float)
    se = float(x.std(ddof=1) / np.sqrt(len(x))) if len(x) > 1 else float("nan")
    p5, p50, p95 = np.percentile(x, [5, 50, 95])
    return FieldSummary(float(x.mean()), se, float(p5), float(p50), float(p95))


def run_batch(cfg: SimConfig, keep_outcomes: bool = False) -> BatchSummary:
    """Replicate ``cfg.runs`` independent blocks; run r always uses substream r."""
    outs = [run_once(cfg, run_stream(cfg.seed, r)) for r in range(cfg.runs)]
    return BatchSummary(
        config_hash=cfg.digest(),
        seed=cfg.seed,
        runs=cfg.runs,
        completion_time=_summarize([o.completion_time for o in outs]),
        rounds=_summarize([o.rounds for o in outs]),
        packets_sent=_summarize([o.packets_sent for o in outs]),
        non_innovative_received=sum(o.non_innovative_received for o in outs),
        useful_receptions=sum(o.useful_receptions for o in outs),
        outcomes=tuple(outs) if keep_outcomes else (),
    )


def first_round_counts(cfg: SimConfig, samples: int) -> dict[tuple[int, ...], int]:
    """Belief state after one round from (M, ..., M), tallied over ``samples`` runs."""
    counts: dict[tuple[int, ...], int] = {}
    for r in range(samples):
        b = Broadcast(cfg)
        b.step(run_stream(cfg.seed, r))
        state = tuple(b.belief)
        counts[state] = counts.get(state, 0) + 1
    return counts
