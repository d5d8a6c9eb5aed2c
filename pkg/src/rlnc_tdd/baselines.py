"""Uncoded Round-Robin broadcast baselines over symmetric, ACK-lossless channels."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .model import SystemParams, packet_duration, wait_time

DEFAULT_TOL = 1e-9


class GammaMode(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"
    BOTH = "both"


GAMMA = {GammaMode.LOWER: 0.5, GammaMode.UPPER: 1.0}


@dataclass(frozen=True)
class RRParams:
    system: SystemParams
    gamma_mode: GammaMode = GammaMode.BOTH

    def __post_init__(self):
        pes = set(self.system.pe)
        if len(pes) != 1:
            raise ValueError("Round-Robin analysis needs symmetric channels (equal pe_j)")
        if any(a != 0.0 for a in self.system.pe_ack):
            raise ValueError("Round-Robin analysis assumes no ACK erasures (pe_ack = 0)")

    @property
    def pe(self) -> float:
        return self.system.pe[0]


def expected_max_retx(pe: float, M: int, N: int, tol: float = DEFAULT_TOL) -> float:
    """E[max over MN packet/receiver pairs of the extra transmissions needed].

    Sums 1 - (1 - pe^t)^(MN) over t >= 1 and stops once the geometric tail
    bound MN pe^(t+1) / (1 - pe) drops below ``tol``.
    """
    if not 0.0 <= pe < 1.0:
        raise ValueError("series diverges unless 0 <= pe < 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if pe == 0.0:
        return 0.0
    k = M * N
    total = 0.0
    t = 1
    while True:
        total += -math.expm1(k * math.log1p(-pe ** t))
        if k * pe ** (t + 1) / (1.0 - pe) < tol:
            return total
        t += 1


def rr_full_duplex(rp: RRParams, tol: float = DEFAULT_TOL) -> float | tuple[float, float]:
    """Full-duplex RR mean completion time; ``BOTH`` gives the (gamma=1/2, gamma=1) pair."""
    p = rp.system
    tp, tw = packet_duration(p), wait_time(p)
    ex = expected_max_retx(rp.pe, p.M, p.N, tol)

    def at(gamma):
        return tw + tp * p.M * (gamma + ex)

    if rp.gamma_mode is GammaMode.BOTH:
        return at(GAMMA[GammaMode.LOWER]), at(GAMMA[GammaMode.UPPER])
    return at(GAMMA[rp.gamma_mode])


def rr_tdd(rp: RRParams, tol: float = DEFAULT_TOL, literal: bool = False) -> float:
    """TDD Round-Robin: whole-block passes until every receiver has every packet.

    Each pass costs T_w + M T_p and 1 + max X passes are needed, X counting
    the extra transmissions.  ``literal=True`` drops the leading pass,
    except at pe = 0 where one pass is returned instead of zero.
    """
    p = rp.system
    one_pass = wait_time(p) + packet_duration(p) * p.M
    ex = expected_max_retx(rp.pe, p.M, p.N, tol)
    if literal:
        return one_pass if rp.pe == 0.0 else one_pass * ex
    return one_pass * (1.0 + ex)
