"""System parameters and the deterministic timing of one transmit/listen round."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence


class AckMode(enum.Enum):
    NON_INTERFERING = "NonInterfering"
    INTERFERING = "Interfering"

    @classmethod
    def parse(cls, text: str) -> "AckMode":
        key = text.strip().lower().replace("-", "").replace("_", "")
        for mode in cls:
            if mode.value.lower() == key:
                return mode
        raise ValueError(f"unknown ack_mode {text!r}")


@dataclass(frozen=True)
class ChannelParams:
    pe: float
    pe_ack: float = 0.0
    t_rt: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.pe <= 1.0:
            raise ValueError(f"pe must lie in [0, 1], got {self.pe}")
        if not 0.0 <= self.pe_ack <= 1.0:
            raise ValueError(f"pe_ack must lie in [0, 1], got {self.pe_ack}")
        if self.t_rt < 0:
            raise ValueError(f"t_rt must be non-negative, got {self.t_rt}")


@dataclass(frozen=True)
class SystemParams:
    """Block/broadcast parameters.

    ``channels`` must be ordered by round-trip time, nearest receiver first.
    Sizes are in bits, ``R`` in bits per second.
    """

    M: int
    N: int
    R: float
    n: float
    h: float
    g: int
    n_ack: float
    channels: tuple[ChannelParams, ...]
    ack_mode: AckMode = AckMode.NON_INTERFERING
    strict_f_gate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be at least 1")
        if self.R <= 0 or self.n <= 0:
            raise ValueError("R and n must be positive")
        if self.g < 0 or self.h < 0 or self.n_ack < 0:
            raise ValueError("g, h and n_ack must be non-negative")
        if len(self.channels) != self.N:
            raise ValueError(f"expected {self.N} channels, got {len(self.channels)}")
        rts = [c.t_rt for c in self.channels]
        if any(a > b for a, b in zip(rts, rts[1:])):
            raise ValueError("channels must be sorted by t_rt ascending")

    @classmethod
    def symmetric(cls, M: int, N: int, pe: float, pe_ack: float = 0.0,
                  t_rt: float = 0.0, **kw) -> "SystemParams":
        """All receivers share one channel description."""
        ch = ChannelParams(pe=pe, pe_ack=pe_ack, t_rt=t_rt)
        return cls(M=M, N=N, channels=(ch,) * N, **kw)

    def with_pe(self, pe: float) -> "SystemParams":
        """Copy with every receiver's data erasure probability set to ``pe``."""
        return replace(self, channels=tuple(replace(c, pe=pe) for c in self.channels))

    @property
    def pe(self) -> tuple[float, ...]:
        return tuple(c.pe for c in self.channels)

    @property
    def pe_ack(self) -> tuple[float, ...]:
        return tuple(c.pe_ack for c in self.channels)


def fig4_params(pe: float = 0.0, **overrides) -> SystemParams:
    """Two equidistant GEO receivers, M = 5, 10 kbit packets at 1.5 Mbps."""
    kw = dict(M=5, N=2, R=1.5e6, n=10000, h=80, g=20, n_ack=50, t_rt=0.25)
    kw.update(overrides)
    return SystemParams.symmetric(pe=pe, **kw)


def ack_duration(p: SystemParams) -> float:
    return p.n_ack / p.R


def packet_duration(p: SystemParams) -> float:
    """Air time of one coded packet: header, payload and M coefficients."""
    return (p.h + p.n + p.g * p.M) / p.R


def ack_wait_offsets(p: SystemParams) -> list[float]:
    """Per-receiver delay between the last coded packet and its ACK transmission."""
    t_ack = ack_duration(p)
    rts = [c.t_rt for c in p.channels]
    if p.ack_mode is AckMode.INTERFERING:
        first = (rts[-1] - rts[0]) / 2
    else:
        first = 0.0
    offsets = [first]
    for i in range(1, p.N):
        offsets.append(max(offsets[-1] + t_ack - rts[i] + rts[i - 1], 0.0))
    return offsets


def wait_time(p: SystemParams) -> float:
    return p.channels[-1].t_rt + ack_wait_offsets(p)[-1] + ack_duration(p)


def round_duration(p: SystemParams, n_i: int) -> float:
    """Cost of one round: ``n_i`` back-to-back packets plus the ACK window."""
    if n_i < 1:
        raise ValueError(f"a round sends at least one packet, got n_i={n_i}")
    return n_i * packet_duration(p) + wait_time(p)


def rt_from_distance(d: float, c: float = 3e8) -> float:
    if c <= 0:
        raise ValueError("propagation speed must be positive")
    if d < 0:
        raise ValueError("distance must be non-negative")
    return 2.0 * d / c


# ---------------------------------------------------------------- config files

_INDEXED = re.compile(r"^(pe|pe_ack|t_rt)\[(\d+)\]$")
_SCALARS = {"M": int, "N": int, "R": float, "n": float, "h": float, "g": int,
            "n_ack": float}


def parse_config_text(text: str) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def params_from_mapping(kv: Mapping[str, str]) -> SystemParams:
    """Build SystemParams from flat keys.

    Per-receiver keys are ``pe[j]``, ``pe_ack[j]``, ``t_rt[j]`` with j
    starting at 1; an unindexed ``pe``/``pe_ack``/``t_rt`` sets every receiver.
    Channels are sorted by round-trip time after assembly.
    """
    missing = [k for k in _SCALARS if k not in kv]
    if missing:
        raise ValueError(f"config is missing keys: {', '.join(missing)}")
    scalars = {k: conv(kv[k]) for k, conv in _SCALARS.items()}
    N = scalars["N"]
    per = {name: [None] * N for name in ("pe", "pe_ack", "t_rt")}
    for key, value in kv.items():
        if key in per:
            per[key] = [float(value)] * N
    for key, value in kv.items():
        m = _INDEXED.match(key)
        if m:
            j = int(m.group(2))
            if not 1 <= j <= N:
                raise ValueError(f"receiver index out of range in {key!r} (N={N})")
            per[m.group(1)][j - 1] = float(value)
        elif key not in _SCALARS and key not in per and key not in ("ack_mode", "strict_f_gate"):
            raise ValueError(f"unknown config key {key!r}")
    if any(v is None for v in per["pe"]):
        raise ValueError("pe must be given for every receiver")
    channels = sorted(
        (ChannelParams(pe=per["pe"][j],
                       pe_ack=per["pe_ack"][j] if per["pe_ack"][j] is not None else 0.0,
                       t_rt=per["t_rt"][j] if per["t_rt"][j] is not None else 0.0)
         for j in range(N)),
        key=lambda c: c.t_rt,
    )
    ack_mode = AckMode.parse(kv["ack_mode"]) if "ack_mode" in kv else AckMode.NON_INTERFERING
    strict = kv.get("strict_f_gate", "true").strip().lower() in ("1", "true", "yes", "on")
    return SystemParams(channels=tuple(channels), ack_mode=ack_mode,
                        strict_f_gate=strict, **scalars)


def load_config(path: str | Path, overrides: Sequence[str] = ()) -> SystemParams:
    """Load a config file and apply ``key=value`` overrides in order."""
    kv = parse_config_text(Path(path).read_text())
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override must look like key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        if key in ("pe", "pe_ack", "t_rt"):
            # an unindexed override beats earlier indexed entries
            for k in [k for k in kv if k.startswith(key + "[")]:
                del kv[k]
        kv[key] = value
    return params_from_mapping(kv)


def config_text(p: SystemParams) -> str:
    """Serialize to the flat key-value format read by ``load_config``."""
    lines = [f"M = {p.M}", f"N = {p.N}", f"R = {p.R!r}", f"n = {p.n!r}",
             f"h = {p.h!r}", f"g = {p.g}", f"n_ack = {p.n_ack!r}",
             f"ack_mode = {p.ack_mode.value}",
             f"strict_f_gate = {str(p.strict_f_gate).lower()}"]
    for j, c in enumerate(p.channels, 1):
        lines += [f"pe[{j}] = {c.pe!r}", f"pe_ack[{j}] = {c.pe_ack!r}",
                  f"t_rt[{j}] = {c.t_rt!r}"]
    return "\n".join(lines) + "\n"
