"""Configuration loading, seeded Monte Carlo sweeps and CSV output.

Config files are flat ``key = value`` text, one entry per line, ``#``
starts a comment.  Points are written as ``x, y, z``.  Besides every
:class:`SystemConfig` field the loader accepts ``p_t_db`` (transmit
power in dB relative to 1 W), ``m_elements`` (RIS size; ``m_z`` is
inferred from ``m_y``) and the sweep keys ``sweep``, ``values``,
``schemes`` and ``trials``.

Seeding: scenario ``t`` of a sweep uses ``mix_seed(master, t)`` for the
user drop, shared by every scheme and every swept value, so schemes are
compared on identical geometries.  A scheme's own randomness (initial RIS
pattern) comes from ``mix_seed(scenario_seed, crc32(scheme_name))``, so
adding a scheme never perturbs the others.  A degenerate draw is retried
with ``mix_seed(scenario_seed, attempt)``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import os
import sys
import time
import warnings
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channel import assemble_links
from .config import ConfigError, SystemConfig, db_to_watts
from .geometry import sample_geometry
from .precoder import DegenerateScenarioError, InsufficientNullSpaceError, RankDeficientWarning
from .schemes import SCHEMES, get_scheme, run_scheme

log = logging.getLogger(__name__)

SWEEP_VARIABLES = ("p_t_db", "m_elements", "n_tx", "k_users")
MAX_RESAMPLES = 10
SEED_ENV = "OAM_SIM_SEED"
MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SweepSpec:
    variable: str = "p_t_db"
    values: Tuple[float, ...] = (10.0,)
    schemes: Tuple[str, ...] = ("proposed",)
    trials: int = 1

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError("sweep", f"must be one of {SWEEP_VARIABLES}")
        if not self.values:
            raise ConfigError("values", "must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("values", "must be strictly increasing")
        if not self.schemes:
            raise ConfigError("schemes", "must be non-empty")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError("schemes", f"unknown scheme {s!r}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError("trials", "must be an integer >= 1")


@dataclass
class ResultRecord:
    scheme: str
    seed: int
    variable: str
    value: float
    sum_rate: float
    per_user_rates: Tuple[float, ...]
    iterations: int
    converged: bool
    wall_time: float = 0.0
    trace: List[float] = field(default_factory=list, repr=False)
    resamples: int = 0
    failed: bool = False


# -- seeding ---------------------------------------------------------------

def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed with the splitmix64 finalizer."""
    h = 0
    for p in parts:
        h = _splitmix64(h ^ (int(p) & MASK64))
    return h


def scheme_seed(scenario_seed: int, scheme: str) -> int:
    return mix_seed(scenario_seed, zlib.crc32(scheme.encode()))


# -- configuration ---------------------------------------------------------

_FIELDS = {f.name: f for f in dataclasses.fields(SystemConfig)}
_INT_FIELDS = {"n_tx", "n_users", "n_rx", "streams_per_user", "m_y", "m_z", "seed",
               "max_iters"}
_POINT_FIELDS = {"ris_center", "user_region_center"}


def _parse_int(key: str, text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}") from None
    if v != int(v):
        raise ConfigError(key, f"expected an integer, got {text!r}")
    return int(v)


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}") from None


def parse_config_text(text: str) -> Tuple[SystemConfig, SweepSpec]:
    raw: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise ConfigError(key, f"duplicate key (line {lineno})")
        raw[key] = value

    kw = {}
    sweep_kw = {}
    m_elements = None
    p_t_db = None
    for key, value in raw.items():
        if key in _POINT_FIELDS:
            parts = [p for p in value.replace("(", "").replace(")", "").split(",")]
            if len(parts) != 3:
                raise ConfigError(key, "must be a 3D point 'x, y, z'")
            kw[key] = tuple(_parse_float(key, p) for p in parts)
        elif key in _INT_FIELDS:
            kw[key] = _parse_int(key, value)
        elif key == "baseline_domain":
            kw[key] = value
        elif key in _FIELDS:
            kw[key] = _parse_float(key, value)
        elif key == "p_t_db":
            p_t_db = _parse_float(key, value)
        elif key == "m_elements":
            m_elements = _parse_int(key, value)
        elif key == "sweep":
            sweep_kw["variable"] = value
        elif key == "values":
            sweep_kw["values"] = parse_values(value)
        elif key == "schemes":
            sweep_kw["schemes"] = parse_list(value)
        elif key == "trials":
            sweep_kw["trials"] = _parse_int(key, value)
        else:
            raise ConfigError(key, "unknown configuration key")

    if p_t_db is not None:
        if "p_t" in kw:
            raise ConfigError("p_t_db", "give either p_t or p_t_db, not both")
        kw["p_t"] = db_to_watts(p_t_db)
    if m_elements is not None:
        m_y = kw.get("m_y", _FIELDS["m_y"].default)
        if m_elements % m_y:
            raise ConfigError("m_elements", f"must be divisible by m_y = {m_y}")
        if "m_z" in kw and kw["m_z"] * m_y != m_elements:
            raise ConfigError("m_elements", "inconsistent with m_y * m_z")
        kw["m_z"] = m_elements // m_y
    return SystemConfig(**kw), SweepSpec(**sweep_kw)


def load_config(path: Optional[os.PathLike]) -> Tuple[SystemConfig, SweepSpec]:
    """Read a config file; ``None`` gives the default configuration."""
    if path is None:
        return parse_config_text("")
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def parse_values(text: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in parse_list(text))


def parse_list(text: str) -> Tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def apply_sweep_value(config: SystemConfig, variable: str, value: float) -> SystemConfig:
    if variable == "p_t_db":
        return config.replace(p_t=db_to_watts(value))
    iv = int(round(value))
    if iv != value:
        raise ConfigError(variable, f"value {value} must be an integer")
    if variable == "m_elements":
        if iv % config.m_y:
            raise ConfigError("m_elements", f"{iv} not divisible by m_y = {config.m_y}")
        return config.replace(m_z=iv // config.m_y)
    if variable == "n_tx":
        if iv % config.n_users:
            raise ConfigError("n_tx", f"{iv} not divisible by n_users = {config.n_users}")
        return config.replace(n_tx=iv, n_rx=iv // config.n_users)
    if variable == "k_users":
        return config.replace(n_users=iv, n_tx=iv * config.n_rx)
    raise ConfigError("sweep", f"unknown variable {variable!r}")


# -- sweeps ----------------------------------------------------------------

def run_cell(config: SystemConfig, variable: str, value: float, scheme: str,
             trial: int, record_timing: bool = False) -> ResultRecord:
    """One (value, scheme, trial) cell, resampling degenerate geometries."""
    descriptor = get_scheme(scheme)
    cfg = apply_sweep_value(config, variable, value)
    base = mix_seed(config.seed, trial)
    for attempt in range(MAX_RESAMPLES + 1):
        seed = base if attempt == 0 else mix_seed(base, attempt)
        t0 = time.perf_counter()
        geometry = sample_geometry(cfg, np.random.default_rng(seed))
        channels = assemble_links(geometry, cfg)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RankDeficientWarning)
                result = run_scheme(descriptor, cfg, channels,
                                    np.random.default_rng(scheme_seed(seed, scheme)))
        except (DegenerateScenarioError, InsufficientNullSpaceError) as exc:
            log.info("%s %s=%s trial %d: degenerate draw (%s), resampling",
                     scheme, variable, value, trial, exc)
            continue
        if attempt:
            log.info("%s %s=%s trial %d: %d resample(s)", scheme, variable, value,
                     trial, attempt)
        wall = time.perf_counter() - t0 if record_timing else 0.0
        trace = result.trace
        return ResultRecord(scheme=scheme, seed=seed, variable=variable, value=value,
                            sum_rate=result.report.sum_rate,
                            per_user_rates=tuple(float(r) for r in result.report.per_user_rate),
                            iterations=trace.iterations, converged=trace.converged,
                            wall_time=wall, trace=[trace.initial_value, *trace.values],
                            resamples=attempt)
    log.warning("%s %s=%s trial %d: still degenerate after %d resamples; marked failed",
                scheme, variable, value, trial, MAX_RESAMPLES)
    return ResultRecord(scheme=scheme, seed=base, variable=variable, value=value,
                        sum_rate=math.nan, per_user_rates=(), iterations=0,
                        converged=False, resamples=MAX_RESAMPLES, failed=True)


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(config: SystemConfig, spec: SweepSpec, workers: int = 1,
              record_timing: bool = False) -> List[ResultRecord]:
    cells = [(config, spec.variable, v, s, t, record_timing)
             for v in spec.values for s in spec.schemes for t in range(spec.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_cell_args, cells, chunksize=4))
    else:
        records = [_run_cell_args(c) for c in cells]
    return sort_records(records)


def sort_records(records: Sequence[ResultRecord]) -> List[ResultRecord]:
    return sorted(records, key=lambda r: (r.value, r.scheme, r.seed))


# -- CSV -------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.9g}"


def csv_header(n_users: int) -> List[str]:
    return (["scheme", "seed", "variable", "value", "sum_rate"]
            + [f"rate_user_{k + 1}" for k in range(n_users)]
            + ["iterations", "converged", "wall_ms"])


def write_csv(records: Sequence[ResultRecord], path: os.PathLike,
              n_users: Optional[int] = None) -> None:
    """Write records sorted by (value, scheme, seed).

    ``rate_user_*`` columns cover the largest user count present; rows
    with fewer users leave the extra cells empty.
    """
    if n_users is None:
        n_users = max((len(r.per_user_rates) for r in records), default=0)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(csv_header(n_users))
            for r in sort_records(records):
                rates = [_fmt(x) for x in r.per_user_rates]
                rates += [""] * (n_users - len(rates))
                w.writerow([r.scheme, r.seed, r.variable, _fmt(r.value), _fmt(r.sum_rate),
                            *rates, r.iterations, int(r.converged),
                            _fmt(r.wall_time * 1e3)])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_csv(path: os.PathLike) -> List[ResultRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rates = tuple(float(row[k]) for k in row
                          if k.startswith("rate_user_") and row[k] != "")
            out.append(ResultRecord(
                scheme=row["scheme"], seed=int(row["seed"]), variable=row["variable"],
                value=float(row["value"]), sum_rate=float(row["sum_rate"]),
                per_user_rates=rates, iterations=int(row["iterations"]),
                converged=row["converged"] == "1", wall_time=float(row["wall_ms"]) / 1e3))
    return out


def write_traces(records: Sequence[ResultRecord], trace_dir: os.PathLike) -> None:
    trace_dir = Path(trace_dir)
    trace_dir.mkdir(parents=True, exist_ok=True)
    for r in records:
        if r.failed:
            continue
        name = f"{r.scheme}__{r.variable}={_fmt(r.value)}__seed={r.seed}.csv"
        with open(trace_dir / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "sum_rate"])
            for i, v in enumerate(r.trace):
                w.writerow([i, _fmt(v)])


# -- CLI -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Monte Carlo sweeps of RIS-assisted multi-user OAM downlinks.")
    p.add_argument("--config", help="flat key = value config file (defaults if omitted)")
    p.add_argument("--sweep", choices=SWEEP_VARIABLES, help="variable to sweep")
    p.add_argument("--values", help="comma-separated, strictly increasing values")
    p.add_argument("--schemes", help=f"comma-separated subset of {','.join(SCHEMES)}")
    p.add_argument("--trials", type=int, help="seeds per sweep point")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--trace-dir", help="write one convergence trace per cell here")
    p.add_argument("--seed", type=int, help=f"master seed (overrides ${SEED_ENV})")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--timing", action="store_true",
                   help="record wall_ms (makes the CSV run-dependent)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config, spec = load_config(args.config)
        overrides = {}
        if args.sweep is not None:
            overrides["variable"] = args.sweep
        if args.values is not None:
            overrides["values"] = parse_values(args.values)
        if args.schemes is not None:
            overrides["schemes"] = parse_list(args.schemes)
        if args.trials is not None:
            overrides["trials"] = args.trials
        spec = dataclasses.replace(spec, **overrides)
        if args.seed is not None:
            config = config.replace(seed=args.seed)
        elif os.environ.get(SEED_ENV):
            config = config.replace(seed=_parse_int(SEED_ENV, os.environ[SEED_ENV]))
    except (ConfigError, OSError) as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return 2
    records = run_sweep(config, spec, workers=args.workers, record_timing=args.timing)
    try:
        write_csv(records, args.out)
        if args.trace_dir:
            write_traces(records, args.trace_dir)
    except OSError as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return 1
    failed = sum(r.failed for r in records)
    if failed:
        log.warning("%d of %d cells failed after resampling", failed, len(records))
    print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
