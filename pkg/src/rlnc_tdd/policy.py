"""Burst-length tables N_1..N_M and the searches that produce them."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .markov import (NonAbsorbingChainError, mean_completion_time,
                     receiver_transition)
from .model import ChannelParams, SystemParams, round_duration

log = logging.getLogger(__name__)

PATIENCE = 5
SLACK = 5
CAP_FACTOR = 50
TIE_RTOL = 1e-12


class Provenance(enum.Enum):
    OPTIMAL = "Optimal"
    WORST_LINK = "WorstLink"
    COMBINED_ERASURE = "CombinedErasure"
    MANUAL = "Manual"


@dataclass(frozen=True)
class Policy:
    """``bursts[i - 1]`` is N_i, the burst sent when the neediest receiver lacks i dofs."""

    bursts: tuple[int, ...]
    provenance: Provenance = Provenance.MANUAL
    cap: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "bursts", tuple(int(b) for b in self.bursts))
        if not self.bursts:
            raise ValueError("a policy needs at least one entry")
        cap = self.cap if self.cap is not None else CAP_FACTOR * self.M
        for i, n_i in enumerate(self.bursts, 1):
            if n_i < i:
                raise ValueError(f"N_{i} = {n_i} cannot deliver {i} dofs")
            if n_i > cap:
                raise ValueError(f"N_{i} = {n_i} exceeds the cap {cap}")

    @property
    def M(self) -> int:
        return len(self.bursts)

    def burst(self, i: int) -> int:
        return self.bursts[i - 1]

    def with_burst(self, i: int, n_i: int) -> "Policy":
        b = list(self.bursts)
        b[i - 1] = n_i
        return replace(self, bursts=tuple(b))

    @classmethod
    def minimal(cls, M: int) -> "Policy":
        """N_i = i: the right table for a lossless channel."""
        return cls(tuple(range(1, M + 1)))

    # ------------------------------------------------------------ table file

    def to_text(self) -> str:
        lines = [f"# M={self.M} provenance={self.provenance.value}"]
        lines += [f"{i} {n}" for i, n in enumerate(self.bursts, 1)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Policy":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("#"):
            raise ValueError("policy file must start with '# M=<M> provenance=<tag>'")
        header = dict(tok.split("=", 1) for tok in lines[0][1:].split() if "=" in tok)
        try:
            M = int(header["M"])
            prov = Provenance(header.get("provenance", "Manual"))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"bad policy header {lines[0]!r}") from exc
        table = {}
        for ln in lines[1:]:
            i, n = ln.split()
            table[int(i)] = int(n)
        if sorted(table) != list(range(1, M + 1)):
            raise ValueError(f"policy file must list i = 1..{M} exactly once")
        return cls(tuple(table[i] for i in range(1, M + 1)), prov)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> "Policy":
        return cls.from_text(Path(path).read_text())


# ---------------------------------------------------------------- link case

@dataclass(frozen=True)
class LinkParams:
    """A single equivalent link: one erasure pair plus the broadcast timing."""

    pe: float
    pe_ack: float
    system: SystemParams

    def __post_init__(self):
        # validates the probabilities
        ChannelParams(self.pe, self.pe_ack)


def link_state_time(s: int, n_s: int, lower: Sequence[float], lp: LinkParams) -> float:
    """Mean completion time from state s when N_s = n_s; ``lower[k]`` is T_k for k < s."""
    ch = ChannelParams(lp.pe, lp.pe_ack)
    gate = lp.system.strict_f_gate
    stay = receiver_transition(s, s, n_s, ch, gate)
    if 1.0 - stay <= 1e-15:
        return float("inf")
    acc = round_duration(lp.system, n_s)
    for k in range(1, s):
        acc += receiver_transition(s, k, n_s, ch, gate) * lower[k]
    return acc / (1.0 - stay)


def optimize_link(lp: LinkParams, provenance: Provenance = Provenance.OPTIMAL,
                  patience: int = PATIENCE) -> Policy:
    """Exact per-state recursion for a point-to-point link.

    State s only transitions to states below it, so minimising each T_s in
    increasing s minimises T_M.  Each scan stops after ``patience``
    consecutive candidates fail to beat the best so far.
    """
    if lp.pe >= 1.0:
        raise NonAbsorbingChainError("link with pe = 1 never completes")
    M = lp.system.M
    cap = CAP_FACTOR * M
    T = [0.0]
    bursts = []
    for s in range(1, M + 1):
        best_k, best_t = s, link_state_time(s, s, T, lp)
        misses = 0
        k = s + 1
        while k <= cap and misses < patience:
            t = link_state_time(s, k, T, lp)
            if t < best_t:
                best_k, best_t, misses = k, t, 0
            else:
                misses += 1
            k += 1
        if best_t == float("inf"):
            raise NonAbsorbingChainError(f"link state {s} cannot complete")
        bursts.append(best_k)
        T.append(best_t)
    return Policy(tuple(bursts), provenance)


def link_time(lp: LinkParams, policy: Policy) -> float:
    """T_M of a link under a given table."""
    T = [0.0]
    for s in range(1, lp.system.M + 1):
        T.append(link_state_time(s, policy.burst(s), T, lp))
    return T[-1]


def worst_link_params(p: SystemParams) -> LinkParams:
    return LinkParams(max(p.pe), max(p.pe_ack), p)


def combined_params(p: SystemParams) -> LinkParams:
    keep = keep_ack = 1.0
    for c in p.channels:
        keep *= 1.0 - c.pe
        keep_ack *= 1.0 - c.pe_ack
    return LinkParams(1.0 - keep, 1.0 - keep_ack, p)


def heuristic_worst_link(p: SystemParams) -> Policy:
    """Treat the broadcast as a link to the worst receiver."""
    return optimize_link(worst_link_params(p), Provenance.WORST_LINK)


def heuristic_combined(p: SystemParams) -> Policy:
    """Treat a packet as lost when any receiver loses it."""
    return optimize_link(combined_params(p), Provenance.COMBINED_ERASURE)


# ----------------------------------------------------------- broadcast case

@dataclass(frozen=True)
class SearchResult:
    policy: Policy
    objective: float
    evaluations: int
    windows: tuple[tuple[int, int], ...]


def search_windows(p: SystemParams, slack: int = SLACK,
                   heuristics: tuple[Policy, Policy] | None = None) -> tuple[tuple[int, int], ...]:
    """Per-level integer range spanned by the two heuristics, widened by ``slack``."""
    wl, ce = heuristics or (heuristic_worst_link(p), heuristic_combined(p))
    cap = CAP_FACTOR * p.M
    out = []
    for i in range(1, p.M + 1):
        lo = min(wl.burst(i), ce.burst(i)) - slack
        hi = max(wl.burst(i), ce.burst(i)) + slack
        out.append((max(lo, i), min(hi, cap)))
    return tuple(out)


def _better(t: float, k: int, best_t: float, best_k: int) -> bool:
    tol = TIE_RTOL * max(abs(best_t), 1.0)
    if t < best_t - tol:
        return True
    return abs(t - best_t) <= tol and k < best_k


def _descend(start: Policy, p: SystemParams, windows, max_sweeps: int):
    policy = start
    best = mean_completion_time(policy, p).mean_time
    evals = 1
    for _ in range(max_sweeps):
        changed = False
        for i in range(1, p.M + 1):
            lo, hi = windows[i - 1]
            cur_k, cur_t = policy.burst(i), best
            for k in range(lo, hi + 1):
                if k == policy.burst(i):
                    continue
                t = mean_completion_time(policy.with_burst(i, k), p).mean_time
                evals += 1
                if _better(t, k, cur_t, cur_k):
                    cur_k, cur_t = k, t
            if cur_k != policy.burst(i):
                policy, best, changed = policy.with_burst(i, cur_k), cur_t, True
        if not changed:
            break
    return policy, best, evals


def optimize_exact(p: SystemParams, slack: int = SLACK, max_sweeps: int = 100) -> SearchResult:
    """Coordinate descent on T_(M,...,M) over the heuristic sandwich.

    Starts from the worst-link table.  If the combined-erasure table turns
    out better than where that descent settles, a second descent is run from
    it, so the result never loses to either heuristic.
    """
    if any(pe >= 1.0 for pe in p.pe):
        raise NonAbsorbingChainError("a receiver with pe = 1 never completes")
    wl, ce = heuristic_worst_link(p), heuristic_combined(p)
    windows = search_windows(p, slack, (wl, ce))
    policy, best, evals = _descend(wl, p, windows, max_sweeps)
    ce_t = mean_completion_time(ce, p).mean_time
    evals += 1
    if ce_t < best:
        log.info("combined-erasure start beats worst-link descent; restarting")
        pol2, best2, ev2 = _descend(ce, p, windows, max_sweeps)
        evals += ev2
        if best2 < best:
            policy, best = pol2, best2
    return SearchResult(replace(policy, provenance=Provenance.OPTIMAL), best, evals, windows)


def exhaustive_search(p: SystemParams, windows) -> tuple[Policy, float]:
    """Brute force over the product of windows. Only for tiny instances."""
    import itertools

    best_pol, best_t = None, float("inf")
    for combo in itertools.product(*(range(lo, hi + 1) for lo, hi in windows)):
        pol = Policy(combo)
        t = mean_completion_time(pol, p).mean_time
        if best_pol is None or t < best_t - TIE_RTOL * best_t:
            best_pol, best_t = pol, t
    return best_pol, best_t
