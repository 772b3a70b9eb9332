"""Reproducible run configurations, sweep drivers, and CSV/JSON emission.

Every run resolves to a flat configuration (file keys and CLI flags mirror
each other), executes deterministically from its seed, and emits a CSV plus
a metadata JSON holding the fully resolved configuration; re-running from
that metadata reproduces the CSV byte for byte.
"""

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, _kernels
from .analysis import OtocSeries
from .classical_otoc import GaussianEnsembleSpec, otoc_classical
from .dynamics import return_time_stats
from .lyapunov import estimate_all
from .params import DEFAULT_ALPHA, MapParams
from .quantum import FloquetSpec, dim_for_hbar_exponent, set_fft_workers
from .quantum_otoc import QuantumOtocJob, otoc_quantum
from .rng import uniform_points


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps this to exit code 2."""


DEFAULT_MAX_DIM = 2 ** 21


@dataclass
class RunConfig:
    """Resolved settings for one subcommand invocation."""

    seed: int = 12345
    threads: int = 0  # 0 = library default
    out: str = "runs"
    alpha: float = DEFAULT_ALPHA
    beta: float = 0.0
    r: List[float] = field(default_factory=list)
    hbar_exp: List[int] = field(default_factory=list)
    dim: List[int] = field(default_factory=list)
    steps: Optional[int] = None
    centers: int = 100
    samples: int = 1000
    scheme: Optional[str] = None  # None = all three for classical runs
    prefactor: bool = True
    fit_window: Optional[Tuple[int, int]] = None
    t0: List[int] = field(default_factory=lambda: [6, 10])
    companion_r: Optional[float] = None
    seam_margin: float = 0.0
    max_dim: int = DEFAULT_MAX_DIM

    def map_params(self, r: float) -> MapParams:
        try:
            return MapParams(alpha=self.alpha, beta=self.beta, r=r)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def dims(self) -> List[int]:
        """Hilbert dimensions from either --dim or --hbar-exp."""
        if self.dim and self.hbar_exp:
            raise ConfigError("give either dim or hbar-exp, not both")
        if self.dim:
            dims = list(self.dim)
        else:
            dims = [dim_for_hbar_exponent(n) for n in self.hbar_exp]
        for d in dims:
            if d <= 0 or d % 2 != 0:
                raise ConfigError(f"Hilbert dimension must be a positive even integer, got {d}")
            if d > self.max_dim:
                raise ConfigError(
                    f"dimension {d} exceeds the memory-guard cap max_dim={self.max_dim}; "
                    f"raise max_dim explicitly if the machine can take it")
        return dims


_BOOL_WORDS = {"on": True, "true": True, "1": True, "yes": True,
               "off": False, "false": False, "0": False, "no": False}

_LIST_FLOAT_KEYS = ("r",)
_LIST_INT_KEYS = ("hbar_exp", "dim", "t0")
_INT_KEYS = ("seed", "threads", "steps", "centers", "samples", "max_dim")
_FLOAT_KEYS = ("alpha", "beta", "companion_r", "seam_margin")
_STR_KEYS = ("out", "scheme")


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _LIST_FLOAT_KEYS:
            return [float(tok) for tok in raw.split(",") if tok.strip()]
        if key in _LIST_INT_KEYS:
            return [int(tok) for tok in raw.split(",") if tok.strip()]
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "prefactor":
            if raw.lower() not in _BOOL_WORDS:
                raise ValueError(f"expected on/off, got {raw!r}")
            return _BOOL_WORDS[raw.lower()]
        if key == "fit_window":
            lo, hi = raw.split(":")
            return (int(lo), int(hi))
        if key in _STR_KEYS:
            return raw
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc
    raise ConfigError(f"unknown configuration key {key!r}")


def load_config_file(path) -> dict:
    """Flat key = value file, # comments; returns a key->parsed-value dict."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip().replace("-", "_")
        try:
            values[key] = _parse_value(key, raw)
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return values


def build_config(file_values: Optional[dict] = None,
                 overrides: Optional[dict] = None) -> RunConfig:
    """Defaults, then config file, then CLI overrides."""
    cfg = RunConfig()
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown configuration key {key!r}")
            setattr(cfg, key, value)
    if cfg.threads:
        _kernels.set_threads(cfg.threads)
        set_fft_workers(cfg.threads)
    return cfg


# ---------------------------------------------------------------------------
# dataset builders
# ---------------------------------------------------------------------------

@dataclass
class Dataset:
    name: str
    header: List[str]
    rows: List[list]
    extra_meta: dict = field(default_factory=dict)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_dataset(dataset: Dataset, config: RunConfig, out_dir,
                  wall_clock_s: float) -> Tuple[Path, Path]:
    """CSV (LF, UTF-8, 17 significant digits) plus metadata JSON."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{dataset.name}.csv"
    lines = [",".join(dataset.header)]
    lines += [",".join(_fmt(v) for v in row) for row in dataset.rows]
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    meta = {
        "subcommand": dataset.name,
        "version": __version__,
        "backend": _kernels.BACKEND,
        "seed": config.seed,
        "wall_clock_s": wall_clock_s,
        "config": dataclasses.asdict(config),
    }
    meta.update(dataset.extra_meta)
    meta_path = out / f"{dataset.name}.meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8", newline="\n")
    return csv_path, meta_path


def run_from_metadata(meta_path) -> Dataset:
    """Rebuild the dataset recorded in a metadata file (same CSV bytes)."""
    meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    raw = dict(meta["config"])
    raw["fit_window"] = tuple(raw["fit_window"]) if raw.get("fit_window") else None
    cfg = build_config(overrides=raw)
    runner = RUNNERS[meta["subcommand"]]
    return runner(cfg)


def run_lyapunov(config: RunConfig) -> Dataset:
    """Per-r rows of all five Lyapunov estimates."""
    if not config.r:
        raise ConfigError("lyapunov requires a nonempty r list")
    n_steps = config.steps if config.steps is not None else 200_000
    rows = []
    for rv in config.r:
        params = config.map_params(rv)
        if rv <= 0.0:
            raise ConfigError("lyapunov sweep requires r > 0 entries")
        est = estimate_all(params, n_steps=n_steps, n_orbits=config.centers,
                           seed=config.seed)
        rows.append([rv, est.numerical, est.series, est.simple,
                     est.local_max, est.star])
    return Dataset(
        name="lyapunov",
        header=["r", "lambda_numerical", "lambda_series", "lambda_simple",
                "lambda_max", "lambda_star"],
        rows=rows,
        extra_meta={"n_steps": n_steps, "n_orbits": config.centers},
    )


def _single_r(config: RunConfig, what: str) -> float:
    if len(config.r) != 1:
        raise ConfigError(f"{what} requires exactly one r value")
    return config.r[0]


def run_classical_otoc(config: RunConfig) -> Dataset:
    """(scheme, hbar_c, t, value) rows over an hbar_c sweep."""
    rv = _single_r(config, "classical-otoc")
    params = config.map_params(rv)
    if not config.hbar_exp:
        raise ConfigError("classical-otoc requires an hbar-exp list")
    schemes = [config.scheme.upper()] if config.scheme else ["AL", "LA", "LL"]
    n_steps = config.steps if config.steps is not None else 10
    rows = []
    for n_exp in config.hbar_exp:
        hbar_c = 2.0 ** (-n_exp) / math.pi
        centers = uniform_points(config.centers, config.seed)
        spec = GaussianEnsembleSpec(centers=centers, hbar_c=hbar_c,
                                    samples_per_center=config.samples,
                                    seed=config.seed,
                                    include_hbar_prefactor=config.prefactor)
        for scheme in schemes:
            series = otoc_classical(spec, scheme, params, n_steps)
            for t, v in zip(series.times, series.values):
                rows.append([scheme, hbar_c, int(t), float(v)])
    return Dataset(
        name="classical_otoc",
        header=["scheme", "hbar_c", "t", "value"],
        rows=rows,
        extra_meta={"r": rv, "n_steps": n_steps},
    )


def _quantum_series(config: RunConfig, dim: int, r: float,
                    centers: np.ndarray, n_steps: int) -> OtocSeries:
    spec = FloquetSpec(dim, config.map_params(r))
    job = QuantumOtocJob(spec=spec, centers=centers, n_steps=n_steps,
                         seed=config.seed)
    return otoc_quantum(job)


def run_quantum_otoc(config: RunConfig) -> Dataset:
    """(hbar, r, t, value) rows; optional companion run at a second r."""
    rv = _single_r(config, "quantum-otoc")
    dims = config.dims()
    if not dims:
        raise ConfigError("quantum-otoc requires hbar-exp or dim")
    n_steps = config.steps if config.steps is not None else 10
    centers = uniform_points(config.centers, config.seed,
                             seam_margin=config.seam_margin)
    r_values = [rv] if config.companion_r is None else [rv, config.companion_r]
    rows = []
    for dim in dims:
        for r_run in r_values:
            series = _quantum_series(config, dim, r_run, centers, n_steps)
            hbar = series.meta["hbar"]
            for t, v in zip(series.times, series.values):
                rows.append([hbar, r_run, int(t), float(v)])
    return Dataset(
        name="quantum_otoc",
        header=["hbar", "r", "t", "value"],
        rows=rows,
        extra_meta={"n_steps": n_steps},
    )


def _compare_cell(config: RunConfig, dim: int, r_quantum: float,
                  r_classical: float, centers: np.ndarray, n_steps: int):
    """Matched quantum/classical series sharing centers and seed."""
    sq = _quantum_series(config, dim, r_quantum, centers, n_steps)
    hbar = sq.meta["hbar"]
    cspec = GaussianEnsembleSpec(centers=centers, hbar_c=hbar,
                                 samples_per_center=config.samples,
                                 seed=config.seed,
                                 include_hbar_prefactor=config.prefactor)
    sc = otoc_classical(cspec, "AL", config.map_params(r_classical), n_steps)
    return sq, sc


def _delta_rows(sq: OtocSeries, sc: OtocSeries):
    """Per-step |q-c| / |q+c| (magnitude reading of the normalized gap)."""
    out = []
    for t, q, c in zip(sq.times, sq.values, sc.values):
        denom = abs(q + c)
        out.append(abs(q - c) / denom if denom > 0 else math.inf)
    return out


def run_compare(config: RunConfig) -> Dataset:
    """Quantum at r=0 against classical at r = 1/sqrt(D), per hbar."""
    dims = config.dims()
    if not dims:
        raise ConfigError("compare requires hbar-exp or dim")
    n_steps = config.steps if config.steps is not None else 10
    for t0 in config.t0:
        if not 0 <= t0 <= n_steps:
            raise ConfigError(f"t0={t0} outside the computed range 0..{n_steps}")
    centers = uniform_points(config.centers, config.seed,
                             seam_margin=config.seam_margin)
    rows = []
    for dim in dims:
        r_classical = 1.0 / math.sqrt(dim)
        sq, sc = _compare_cell(config, dim, 0.0, r_classical, centers, n_steps)
        deltas = _delta_rows(sq, sc)
        hbar = sq.meta["hbar"]
        for t, q, c, d in zip(sq.times, sq.values, sc.values, deltas):
            rows.append([hbar, dim, int(t), float(q), float(c), float(d)])
    return Dataset(
        name="compare",
        header=["hbar", "dim", "t", "al_q", "al_c", "delta_qc"],
        rows=rows,
        extra_meta={"n_steps": n_steps, "t0": list(config.t0)},
    )


def run_return_times(config: RunConfig) -> Dataset:
    """Empirical return-time histogram against the geometric law."""
    rv = _single_r(config, "return-times")
    if rv <= 0.0:
        raise ConfigError("return-times requires r > 0")
    params = config.map_params(rv)
    n_steps = config.steps if config.steps is not None else 20_000
    stats = return_time_stats(params, n_traj=config.centers, n_steps=n_steps,
                              seed=config.seed)
    pmf = stats.empirical_pmf()
    model = stats.model
    rows = []
    for i, count in enumerate(stats.histogram):
        tau = i + 1
        rows.append([tau, int(count), float(pmf[i]), float(model.pmf(tau))])
    return Dataset(
        name="return_times",
        header=["tau", "count", "pmf_empirical", "pmf_geometric"],
        rows=rows,
        extra_meta={"r": rv, "mean": stats.mean, "tau_bar": model.tau_bar,
                    "n_gaps": stats.n_gaps, "n_overflow": stats.n_overflow},
    )


def run_sweep(config: RunConfig) -> Dataset:
    """Cartesian product over r and hbar lists, quantum and classical at the
    same r (the direct-correspondence layout)."""
    if not config.r:
        raise ConfigError("sweep requires a nonempty r list")
    dims = config.dims()
    if not dims:
        raise ConfigError("sweep requires hbar-exp or dim")
    n_steps = config.steps if config.steps is not None else 10
    centers = uniform_points(config.centers, config.seed,
                             seam_margin=config.seam_margin)
    rows = []
    for rv in config.r:
        for dim in dims:
            sq, sc = _compare_cell(config, dim, rv, rv, centers, n_steps)
            deltas = _delta_rows(sq, sc)
            hbar = sq.meta["hbar"]
            for t, q, c, d in zip(sq.times, sq.values, sc.values, deltas):
                rows.append([rv, hbar, int(t), float(q), float(c), float(d)])
    return Dataset(
        name="sweep",
        header=["r", "hbar", "t", "al_q", "al_c", "delta_qc"],
        rows=rows,
        extra_meta={"n_steps": n_steps},
    )


RUNNERS = {
    "lyapunov": run_lyapunov,
    "classical_otoc": run_classical_otoc,
    "quantum_otoc": run_quantum_otoc,
    "compare": run_compare,
    "return_times": run_return_times,
    "sweep": run_sweep,
}


def execute(subcommand: str, config: RunConfig):
    """Run a subcommand and write its outputs; returns the file paths."""
    runner = RUNNERS[subcommand.replace("-", "_")]
    start = time.perf_counter()
    dataset = runner(config)
    wall = time.perf_counter() - start
    return write_dataset(dataset, config, config.out, wall)
