"""Transmission schemes compared by the harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, ReflectionPattern, antenna_channel, effective_channel
from .config import SystemConfig
from .metrics import RateReport, rate_report
from .precoder import three_layer_precoder
from .ris_opt import ConvergenceTrace, alternate


@dataclass(frozen=True)
class SchemeDescriptor:
    name: str
    ris_mode: str       # "optimized" | "random-fixed"
    precoder_mode: str  # "three-layer" | "mrt" | "zf" | "mmse"


SCHEMES = {
    "proposed": SchemeDescriptor("proposed", "optimized", "three-layer"),
    "uca-mimo-mrt": SchemeDescriptor("uca-mimo-mrt", "optimized", "mrt"),
    "uca-mimo-zf": SchemeDescriptor("uca-mimo-zf", "optimized", "zf"),
    "uca-mimo-mmse": SchemeDescriptor("uca-mimo-mmse", "optimized", "mmse"),
    "random-phase-oam": SchemeDescriptor("random-phase-oam", "random-fixed", "three-layer"),
}


def get_scheme(name: str) -> SchemeDescriptor:
    try:
        return SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; choose from {sorted(SCHEMES)}") from None


@dataclass(frozen=True)
class SchemeResult:
    report: RateReport
    trace: ConvergenceTrace
    pattern: ReflectionPattern
    w: np.ndarray
    channel: np.ndarray   # the matrix W was designed for (rows = streams)


def scheme_channel(config: SystemConfig, channels: ChannelSet,
                   descriptor: SchemeDescriptor, pattern: ReflectionPattern) -> np.ndarray:
    if descriptor.precoder_mode != "three-layer" and config.baseline_domain == "antenna":
        return antenna_channel(channels, pattern)
    return effective_channel(channels, pattern)


def run_scheme(descriptor: SchemeDescriptor, config: SystemConfig, channels: ChannelSet,
               rng: np.random.Generator) -> SchemeResult:
    """Run one scheme on one channel realization.

    ``rng`` seeds the initial (or, for ``random-fixed``, the only) RIS
    pattern.  Every scheme yields the same report shape.
    """
    initial = ReflectionPattern.random(channels.m_elements, rng)
    if descriptor.ris_mode == "random-fixed":
        gamma = effective_channel(channels, initial)
        stack = three_layer_precoder(gamma, channels.n_users, channels.n_streams,
                                     config.sigma2, config.p_t)
        report = rate_report(gamma, stack.w, config.sigma2, channels.n_users)
        trace = ConvergenceTrace(values=[report.sum_rate], status="converged",
                                 initial_value=report.sum_rate)
        return SchemeResult(report, trace, initial, stack.w, gamma)
    design, pattern, trace = alternate(config, channels, initial, descriptor.precoder_mode)
    h = scheme_channel(config, channels, descriptor, pattern)
    report = rate_report(h, design.w, config.sigma2, channels.n_users)
    return SchemeResult(report, trace, pattern, design.w, h)
