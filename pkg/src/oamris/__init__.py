"""Joint precoder and RIS reflection design for multi-user OAM downlinks."""

from .channel import ChannelSet, ReflectionPattern, assemble_links, effective_channel
from .config import SystemConfig
from .geometry import ScenarioGeometry, UserPose, sample_geometry
from .metrics import RateReport, rate_report
from .precoder import PrecoderStack, three_layer_precoder
from .ris_opt import ConvergenceTrace, alternate
from .schemes import SCHEMES, get_scheme, run_scheme

__all__ = [
    "ChannelSet", "ReflectionPattern", "assemble_links", "effective_channel",
    "SystemConfig", "ScenarioGeometry", "UserPose", "sample_geometry",
    "RateReport", "rate_report", "PrecoderStack", "three_layer_precoder",
    "ConvergenceTrace", "alternate", "SCHEMES", "get_scheme", "run_scheme",
]
