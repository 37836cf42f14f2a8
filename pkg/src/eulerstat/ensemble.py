"""Monte Carlo ensemble driver: sample, evolve, persist.

An ensemble run draws M independent initial fields, evolves each with the
finite volume scheme, and records the fields at the requested output times.
The collection of samples at a fixed time is the empirical measure that all
statistical diagnostics operate on.

Runs are a pure function of (config, seed): per-sample generators are keyed
by (seed, sample_index) only, samples never share state, and results are
assembled in sample order, so the output is bitwise independent of the
worker count.

On-disk layout of a run directory:

    manifest                 key = value header plus a [fields] table
    fields/s{m}_t{k}.fld     binary field, sample m at output time index k
    diagnostics/s{m}.csv     rows step,time,dt,energy,picard_iters

Round trips through save/load are bitwise lossless, and an interrupted run
directory can be completed with :func:`resume` to a result identical to an
uninterrupted run.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, FieldFormatError, NumericsError
from .fieldio import read_field, write_field
from .grid import GridSpec, VectorField
from .initial_data import FbmSpec, SeededRng, ShearLayerSpec, sample_initial
from .leray import LerayProjector
from .scheme import SchemeParams, Trajectory, evolve

MANIFEST_NAME = "manifest"
MANIFEST_VERSION = 1


@dataclass(frozen=True)
class EnsembleConfig:
    """Everything needed to reproduce one ensemble run."""

    grid: GridSpec
    data_spec: ShearLayerSpec | FbmSpec
    scheme: SchemeParams
    num_samples: int
    t_end: float
    output_times: tuple[float, ...]
    seed: int
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "output_times", tuple(float(t) for t in self.output_times))
        if self.num_samples < 1:
            raise ConfigError("num_samples must be >= 1")
        if self.t_end < 0:
            raise ConfigError("t_end must be nonnegative")
        if not self.output_times:
            raise ConfigError("at least one output time is required")
        if any(b <= a for a, b in zip(self.output_times, self.output_times[1:])):
            raise ConfigError("output times must be strictly increasing")
        if self.output_times[0] < 0 or self.output_times[-1] > self.t_end:
            raise ConfigError("output times must lie within [0, t_end]")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def default_num_samples(grid: GridSpec) -> int:
    """Default sample count: match the linear resolution (M = N)."""
    return grid.n1


@dataclass(frozen=True)
class SampleDiagnostics:
    """Per-sample step series recorded during evolution."""

    times: np.ndarray
    dts: np.ndarray
    energies: np.ndarray
    picard_iters: np.ndarray

    def check_energy_monotone(self, slack: float = 1e-12) -> None:
        e = self.energies
        worst = float(np.max(e[1:] - e[:-1])) if len(e) > 1 else 0.0
        if worst > slack:
            raise NumericsError(f"energy increased by {worst:.3e} along a sample trajectory")


class EnsembleResult:
    """Per-sample fields at the output times, in memory or file backed."""

    def __init__(self, config: EnsembleConfig, diagnostics: list[SampleDiagnostics], fields=None, run_dir=None):
        if (fields is None) == (run_dir is None):
            raise ValueError("exactly one of fields/run_dir must be given")
        self.config = config
        self.diagnostics = diagnostics
        self._fields = fields
        self.run_dir = Path(run_dir) if run_dir is not None else None

    @property
    def num_samples(self) -> int:
        return self.config.num_samples

    @property
    def output_times(self) -> tuple[float, ...]:
        return self.config.output_times

    def field(self, m: int, time_index: int) -> VectorField:
        if self._fields is not None:
            return self._fields[m][time_index]
        f, _ = read_field(self.run_dir / field_relpath(m, time_index))
        return f

    def fields_at(self, time_index: int) -> list[VectorField]:
        return [self.field(m, time_index) for m in range(self.num_samples)]

    def time_index(self, t: float) -> int:
        for k, tk in enumerate(self.config.output_times):
            if abs(tk - t) <= 1e-12 * max(1.0, abs(t)):
                return k
        raise KeyError(f"time {t} is not an output time of this run")


def field_relpath(m: int, k: int) -> str:
    return f"fields/s{m}_t{k}.fld"


def diagnostics_relpath(m: int) -> str:
    return f"diagnostics/s{m}.csv"


def _spec_mapping(spec) -> dict[str, str]:
    if isinstance(spec, ShearLayerSpec):
        return {
            "data.kind": "shear_layer",
            "data.rho": repr(spec.rho),
            "data.gamma": repr(spec.gamma),
            "data.modes": str(spec.modes),
        }
    if isinstance(spec, FbmSpec):
        return {
            "data.kind": "fbm",
            "data.hurst": repr(spec.hurst),
            "data.amplitude": repr(spec.amplitude),
        }
    raise ConfigError(f"unsupported data spec type {type(spec).__name__}")


def _spec_from_mapping(kv: dict[str, str]):
    kind = kv.get("data.kind")
    if kind == "shear_layer":
        return ShearLayerSpec(
            rho=float(kv["data.rho"]),
            gamma=float(kv["data.gamma"]),
            modes=int(kv["data.modes"]),
        )
    if kind == "fbm":
        return FbmSpec(hurst=float(kv["data.hurst"]), amplitude=float(kv["data.amplitude"]))
    raise ConfigError(f"unknown data.kind {kind!r}")


def config_mapping(config: EnsembleConfig) -> dict[str, str]:
    """Flat key = value view of the config (defaults materialized)."""
    kv = {
        "grid.n1": str(config.grid.n1),
        "grid.n2": str(config.grid.n2),
    }
    kv.update(_spec_mapping(config.data_spec))
    kv.update(
        {
            "scheme.theta": repr(config.scheme.theta),
            "scheme.epsilon": repr(config.scheme.epsilon),
            "scheme.cfl": repr(config.scheme.cfl),
            "scheme.picard_tol": repr(config.scheme.picard_tol),
            "scheme.picard_max_iters": str(config.scheme.picard_max_iters),
            "scheme.dt_floor": repr(config.scheme.dt_floor),
            "run.samples": str(config.num_samples),
            "run.t_end": repr(config.t_end),
            "run.output_times": ", ".join(repr(t) for t in config.output_times),
            "run.seed": str(config.seed),
            "run.workers": str(config.workers),
        }
    )
    return kv


def config_from_mapping(kv: dict[str, str]) -> EnsembleConfig:
    grid = GridSpec(int(kv["grid.n1"]), int(kv["grid.n2"]))
    try:
        scheme = SchemeParams(
            theta=float(kv["scheme.theta"]),
            epsilon=float(kv["scheme.epsilon"]),
            cfl=float(kv["scheme.cfl"]),
            picard_tol=float(kv["scheme.picard_tol"]),
            picard_max_iters=int(kv["scheme.picard_max_iters"]),
            dt_floor=float(kv["scheme.dt_floor"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return EnsembleConfig(
        grid=grid,
        data_spec=_spec_from_mapping(kv),
        scheme=scheme,
        num_samples=int(kv["run.samples"]),
        t_end=float(kv["run.t_end"]),
        output_times=tuple(float(t) for t in kv["run.output_times"].split(",")),
        seed=int(kv["run.seed"]),
        workers=int(kv["run.workers"]),
    )


def _evolve_sample(config: EnsembleConfig, m: int) -> tuple[int, list[VectorField], SampleDiagnostics]:
    projector = LerayProjector(config.grid)
    init = sample_initial(config.data_spec, config.seed, m, config.grid, projector=projector)
    try:
        traj: Trajectory = evolve(init, config.t_end, config.output_times, config.scheme, projector)
    except NumericsError as exc:
        raise NumericsError(f"sample {m} failed: {exc}") from exc
    fields = [s.field for s in traj.states]
    diag = SampleDiagnostics(
        times=traj.times,
        dts=traj.dts,
        energies=traj.energies,
        picard_iters=traj.picard_iters,
    )
    return m, fields, diag


def _evolve_sample_args(args):
    return _evolve_sample(*args)


def _write_sample(run_dir: Path, config: EnsembleConfig, m: int, fields, diag: SampleDiagnostics) -> None:
    for k, f in enumerate(fields):
        write_field(run_dir / field_relpath(m, k), f, config.output_times[k])
    lines = ["step,time,dt,energy,picard_iters"]
    lines.append(f"-1,0.0,0.0,{diag.energies[0]!r},0")
    for n in range(len(diag.dts)):
        lines.append(f"{n},{diag.times[n + 1]!r},{diag.dts[n]!r},{diag.energies[n + 1]!r},{diag.picard_iters[n]}")
    (run_dir / diagnostics_relpath(m)).write_text("\n".join(lines) + "\n")


def _read_diagnostics(path: Path) -> SampleDiagnostics:
    rows = path.read_text().strip().splitlines()[1:]
    times, dts, energies, iters = [], [], [], []
    for row in rows:
        step_s, t_s, dt_s, e_s, it_s = row.split(",")
        energies.append(float(e_s))
        if int(step_s) >= 0:
            times.append(float(t_s))
            dts.append(float(dt_s))
            iters.append(int(it_s))
    return SampleDiagnostics(
        times=np.asarray([0.0] + times),
        dts=np.asarray(dts),
        energies=np.asarray(energies),
        picard_iters=np.asarray(iters, dtype=np.int64),
    )


def write_manifest(run_dir: Path, config: EnsembleConfig) -> None:
    lines = ["# eulerstat run manifest"]
    lines.append(f"manifest_version = {MANIFEST_VERSION}")
    for key, value in config_mapping(config).items():
        lines.append(f"{key} = {value}")
    lines.append("[fields]")
    for m in range(config.num_samples):
        for k in range(len(config.output_times)):
            lines.append(f"{m} {k} {field_relpath(m, k)}")
    (run_dir / MANIFEST_NAME).write_text("\n".join(lines) + "\n")


def read_manifest(run_dir: Path) -> tuple[EnsembleConfig, list[tuple[int, int, str]]]:
    path = Path(run_dir) / MANIFEST_NAME
    if not path.exists():
        raise FieldFormatError(f"no manifest in {run_dir}")
    kv: dict[str, str] = {}
    table: list[tuple[int, int, str]] = []
    in_table = False
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[fields]":
            in_table = True
            continue
        if in_table:
            m_s, k_s, rel = line.split()
            table.append((int(m_s), int(k_s), rel))
        else:
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
    if kv.pop("manifest_version", None) != str(MANIFEST_VERSION):
        raise FieldFormatError(f"unsupported manifest version in {path}")
    config = config_from_mapping(kv)
    expected = config.num_samples * len(config.output_times)
    if len(table) != expected:
        raise FieldFormatError(f"manifest lists {len(table)} fields, expected {expected}")
    return config, table


def _run_samples(config: EnsembleConfig, indices, out_dir: Path | None):
    """Evolve the given sample indices; returns {m: (fields, diag)}."""
    results = {}
    if config.workers > 1 and len(indices) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for m, fields, diag in pool.map(_evolve_sample_args, [(config, m) for m in indices]):
                results[m] = (fields, diag)
    else:
        for m in indices:
            _, fields, diag = _evolve_sample(config, m)
            results[m] = (fields, diag)
    if out_dir is not None:
        for m in sorted(results):
            fields, diag = results[m]
            _write_sample(out_dir, config, m, fields, diag)
    return results


def run_ensemble(config: EnsembleConfig, out_dir=None) -> EnsembleResult:
    """Run the full ensemble; optionally persist it to ``out_dir``.

    With ``out_dir`` the result is file backed (fields load on demand),
    which keeps the memory footprint flat for large runs.
    """
    if out_dir is not None:
        out_dir = Path(out_dir)
        (out_dir / "fields").mkdir(parents=True, exist_ok=True)
        (out_dir / "diagnostics").mkdir(parents=True, exist_ok=True)
        write_manifest(out_dir, config)
    results = _run_samples(config, range(config.num_samples), out_dir)
    diagnostics = [results[m][1] for m in range(config.num_samples)]
    if out_dir is not None:
        return EnsembleResult(config, diagnostics, run_dir=out_dir)
    fields = [results[m][0] for m in range(config.num_samples)]
    return EnsembleResult(config, diagnostics, fields=fields)


def save_ensemble(result: EnsembleResult, path) -> None:
    """Persist an in-memory result as a run directory."""
    out = Path(path)
    (out / "fields").mkdir(parents=True, exist_ok=True)
    (out / "diagnostics").mkdir(parents=True, exist_ok=True)
    write_manifest(out, result.config)
    for m in range(result.num_samples):
        fields = [result.field(m, k) for k in range(len(result.output_times))]
        _write_sample(out, result.config, m, fields, result.diagnostics[m])


def _missing_samples(run_dir: Path, config: EnsembleConfig, table) -> list[int]:
    missing = set()
    for m, k, rel in table:
        if not (run_dir / rel).exists():
            missing.add(m)
    for m in range(config.num_samples):
        if not (run_dir / diagnostics_relpath(m)).exists():
            missing.add(m)
    return sorted(missing)


def load_ensemble(path) -> EnsembleResult:
    """Load a run directory; verifies completeness and energy monotonicity."""
    run_dir = Path(path)
    config, table = read_manifest(run_dir)
    missing = _missing_samples(run_dir, config, table)
    if missing:
        raise FieldFormatError(f"run {run_dir} is incomplete; missing samples {missing}")
    diagnostics = [_read_diagnostics(run_dir / diagnostics_relpath(m)) for m in range(config.num_samples)]
    for diag in diagnostics:
        diag.check_energy_monotone()
    return EnsembleResult(config, diagnostics, run_dir=run_dir)


def resume(path, config: EnsembleConfig) -> EnsembleResult:
    """Complete the missing samples of an interrupted run.

    The given config must match the manifest (workers excluded: parallelism
    does not affect results).  Finished samples are reused as is, so the
    completed run is identical to an uninterrupted one.
    """
    run_dir = Path(path)
    stored_config, table = read_manifest(run_dir)
    want = config_mapping(config)
    have = config_mapping(stored_config)
    want.pop("run.workers")
    have.pop("run.workers")
    if want != have:
        diffs = [k for k in want if want[k] != have.get(k)]
        raise ConfigError(f"config does not match run manifest (differs in: {', '.join(diffs)})")
    missing = _missing_samples(run_dir, stored_config, table)
    if missing:
        _run_samples(replace(stored_config, workers=config.workers), missing, run_dir)
    return load_ensemble(run_dir)
