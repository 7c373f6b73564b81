"""Reliable transport with pluggable congestion control."""
from .bbr import Bbr, pacing_gap
from .congestion import CongestionControl, Reno
from .cubic import Cubic, cubic_k, cubic_window
from .tcp import RttEstimator, TcpReceiver, TcpSender

CONTROLLERS = {"reno": Reno, "cubic": Cubic, "bbr": Bbr}


def make_controller(name, **kwargs):
    """Instantiate a congestion controller by name ("reno", "cubic" or "bbr")."""
    try:
        cls = CONTROLLERS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown congestion control {name!r}") from None
    return cls(**kwargs)


__all__ = ["Bbr", "CongestionControl", "Cubic", "Reno", "RttEstimator", "TcpReceiver", "TcpSender",
           "CONTROLLERS", "cubic_k", "cubic_window", "make_controller", "pacing_gap"]
