"""Random linear network coding broadcast over time-division-duplex erasure channels."""

from .model import AckMode, ChannelParams, SystemParams, fig4_params
from .policy import Policy, Provenance

__all__ = ["AckMode", "ChannelParams", "SystemParams", "fig4_params", "Policy", "Provenance"]
