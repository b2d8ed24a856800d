"""Parameter sweeps, run configurations and the figure presets.

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Recognised keys::

    swept              chi | eta | zeta_dc | distance
    grid               v1, v2, ...   or   linear|log MIN MAX STEPS
    chi, eta, zeta_dc  direct model parameters
    base_efficiency, attenuation, distance, dark_count_rate, coincidence_window
                       channel description (replaces eta / zeta_dc)
    inputs             subset of H, V, plus, minus
    accepted           readouts such as 1001, 0110
    max_photons, tail_tolerance
    series             free-form label copied to every CSV row
    output             CSV path
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .bayes import TruncationPolicy
from .detectors import ChannelParams, DetectorParams, Readout, dark_count_probability
from .errors import ConfigError, NoAcceptedEvidence, NotConverged, ZeroEvidence
from .fidelity import DEFAULT_ACCEPTED, DEFAULT_INPUTS, average_fidelity
from .source import PumpParameter

SWEEPABLE = ("chi", "eta", "zeta_dc", "distance")
INPUT_NAMES = tuple(DEFAULT_INPUTS)
CSV_COLUMNS = (
    "swept_param", "value", "f_H", "f_V", "f_plus", "f_minus",
    "f_avg", "p_accept", "trunc_residual", "series", "status",
)

EXPERIMENT_FIDELITY = 0.8135
REFERENCE_MODEL_FIDELITY = 0.798


def _fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.12g}"


@dataclass(frozen=True)
class SweepConfig:
    swept_parameter: str
    grid: tuple[float, ...]
    chi: Optional[float] = None
    eta: Optional[float] = None
    zeta_dc: Optional[float] = None
    base_efficiency: Optional[float] = None
    attenuation: float = 0.45
    distance: Optional[float] = None
    dark_count_rate: Optional[float] = None
    coincidence_window: float = 5e-9
    inputs: tuple[str, ...] = INPUT_NAMES
    accepted: tuple[Readout, ...] = DEFAULT_ACCEPTED
    trunc: TruncationPolicy = field(default_factory=TruncationPolicy)
    series: str = ""
    output_path: Optional[str] = None

    def __post_init__(self):
        self.validate()

    @property
    def channel_mode(self) -> bool:
        return self.base_efficiency is not None

    def validate(self):
        if self.swept_parameter not in SWEEPABLE:
            raise ConfigError(f"must be one of {', '.join(SWEEPABLE)}", field="swept")
        grid = self.grid
        if len(grid) == 0:
            raise ConfigError("grid is empty", field="grid")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("grid must be strictly increasing", field="grid")
        if self.eta is not None and self.base_efficiency is not None:
            raise ConfigError("give either eta or base_efficiency, not both", field="eta")
        if self.zeta_dc is not None and self.dark_count_rate is not None:
            raise ConfigError("give either zeta_dc or dark_count_rate, not both", field="zeta_dc")
        swept = self.swept_parameter
        if swept == "distance" and not self.channel_mode:
            raise ConfigError("distance sweeps need base_efficiency", field="base_efficiency")
        if swept == "eta" and self.channel_mode:
            raise ConfigError("cannot sweep eta while it is derived from a channel", field="swept")
        if swept == "zeta_dc" and self.dark_count_rate is not None:
            raise ConfigError("cannot sweep zeta_dc while it is derived from a rate", field="swept")
        if swept != "chi" and self.chi is None:
            raise ConfigError("chi is required", field="chi")
        if swept not in ("eta", "distance") and self.eta is None and not self.channel_mode:
            raise ConfigError("one of eta or base_efficiency is required", field="eta")
        unknown = set(self.inputs) - set(INPUT_NAMES)
        if unknown or not self.inputs:
            raise ConfigError(f"inputs must be drawn from {', '.join(INPUT_NAMES)}", field="inputs")
        if not self.accepted:
            raise ConfigError("accepted readout set is empty", field="accepted")
        for name, lo, hi_open in (("eta", 0.0, False), ("zeta_dc", 0.0, True), ("base_efficiency", 0.0, False)):
            v = getattr(self, name)
            if v is not None and name != swept and not (lo <= v < 1.0 if hi_open else lo <= v <= 1.0):
                raise ConfigError(f"out of range: {v!r}", field=name)
        if self.chi is not None and swept != "chi" and not self.chi > 0:
            raise ConfigError(f"chi must be > 0 (a vacuum source cannot teleport), got {self.chi!r}", field="chi")
        # every grid point must yield valid model parameters before any work starts
        for value in grid:
            try:
                self.point(value)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"at {swept}={value!r}: {exc}", field=swept) from None

    def point(self, value: float) -> tuple[PumpParameter, DetectorParams]:
        params = {
            "chi": self.chi, "eta": self.eta, "zeta_dc": self.zeta_dc, "distance": self.distance,
        }
        params[self.swept_parameter] = value
        chi = params["chi"]
        if chi is None or not chi > 0:
            raise ConfigError(
                f"chi must be > 0 (a vacuum source cannot teleport), got {chi!r}", field="chi"
            )
        pump = PumpParameter(chi)
        if self.channel_mode:
            channel = ChannelParams(
                base_efficiency=self.base_efficiency,
                attenuation=self.attenuation,
                distance=params["distance"] or 0.0,
                dark_count_rate=self.dark_count_rate or 0.0,
                coincidence_window=self.coincidence_window,
            )
            eta = channel.detector().eta
        else:
            eta = params["eta"]
        if params["zeta_dc"] is not None:
            zeta = params["zeta_dc"]
        elif self.dark_count_rate is not None:
            zeta = dark_count_probability(self.dark_count_rate, self.coincidence_window)
        else:
            zeta = 0.0
        return pump, DetectorParams(eta=eta, zeta_dc=zeta)


@dataclass
class SweepRow:
    swept_param: str
    value: float
    fidelities: dict[str, float]
    f_avg: float
    p_accept: float
    trunc_residual: float
    series: str = ""
    status: str = "ok"

    def csv_fields(self) -> list[str]:
        return [
            self.swept_param,
            _fmt(self.value),
            *(_fmt(self.fidelities.get(name)) for name in INPUT_NAMES),
            _fmt(self.f_avg),
            _fmt(self.p_accept),
            _fmt(self.trunc_residual),
            self.series,
            self.status,
        ]


def evaluate_point(config: SweepConfig, value: float) -> SweepRow:
    pump, dets = config.point(value)
    inputs = {name: DEFAULT_INPUTS[name] for name in config.inputs}
    nan = float("nan")
    try:
        report = average_fidelity(pump, dets, inputs, config.accepted, config.trunc)
    except (ZeroEvidence, NoAcceptedEvidence):
        status, residual = "zero_evidence", nan
    except NotConverged as exc:
        status, residual = "not_converged", exc.tail_estimate
    else:
        p_accept = float(np.mean([report.accepted_probability(n) for n in inputs]))
        return SweepRow(
            config.swept_parameter, value, dict(report.per_input), report.average_fidelity,
            p_accept, report.tail_estimate, config.series,
        )
    return SweepRow(
        config.swept_parameter, value, {n: nan for n in inputs}, nan, nan, residual,
        config.series, status,
    )


def _evaluate_task(task):
    return evaluate_point(*task)


def run_sweeps(configs: Sequence[SweepConfig], jobs: int = 1) -> list[SweepRow]:
    """Evaluate every grid point; rows come back in config then grid order."""
    tasks = [(cfg, v) for cfg in configs for v in cfg.grid]
    if jobs <= 1 or len(tasks) <= 1:
        return [_evaluate_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def run_sweep(config: SweepConfig, jobs: int = 1) -> list[SweepRow]:
    rows = run_sweeps([config], jobs)
    if config.output_path:
        write_csv(rows, config.output_path)
    return rows


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def write_csv(rows: Iterable[SweepRow], path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def gnuplot_script(csv_path: str, rows: Sequence[SweepRow]) -> str:
    series = list(dict.fromkeys(r.series for r in rows))
    swept = rows[0].swept_param if rows else "value"
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{swept}'",
        "set ylabel 'average fidelity'",
        "set yrange [0:1]",
    ]
    if swept in ("chi", "zeta_dc"):
        lines.append("set logscale x")
    plots = [
        f"'{csv_path}' using (strcol(10) eq '{s}' ? $2 : 1/0):7 with linespoints title '{s or 'f_avg'}'"
        for s in series
    ]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


# ---- config files ---------------------------------------------------------

_FLOAT_KEYS = {
    "chi", "eta", "zeta_dc", "base_efficiency", "attenuation", "distance",
    "dark_count_rate", "coincidence_window",
}


def parse_grid(text: str) -> tuple[float, ...]:
    parts = text.replace(",", " ").split()
    if parts and parts[0] in ("linear", "log"):
        if len(parts) != 4:
            raise ValueError("range grids are written 'linear|log MIN MAX STEPS'")
        lo, hi, steps = float(parts[1]), float(parts[2]), int(parts[3])
        if steps < 1:
            raise ValueError("STEPS must be >= 1")
        if parts[0] == "log":
            if lo <= 0 or hi <= 0:
                raise ValueError("log grids need positive bounds")
            return tuple(float(v) for v in np.geomspace(lo, hi, steps))
        return tuple(float(v) for v in np.linspace(lo, hi, steps))
    return tuple(float(p) for p in parts)


def parse_config(text: str, source: str = "<config>") -> SweepConfig:
    kwargs: dict = {}
    lines: dict[str, int] = {}
    trunc_kwargs: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in lines:
            raise ConfigError("duplicate key", line=lineno, field=key)
        lines[key] = lineno
        try:
            if key == "swept":
                kwargs["swept_parameter"] = value
            elif key == "grid":
                kwargs["grid"] = parse_grid(value)
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(value)
            elif key == "inputs":
                kwargs["inputs"] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "accepted":
                kwargs["accepted"] = tuple(
                    Readout.from_string(v) for v in value.split(",") if v.strip()
                )
            elif key == "max_photons":
                trunc_kwargs["max_photons_per_index"] = int(value)
            elif key == "tail_tolerance":
                trunc_kwargs["tail_tolerance"] = float(value)
            elif key == "series":
                kwargs["series"] = value
            elif key == "output":
                kwargs["output_path"] = value
            else:
                raise ConfigError("unknown key", line=lineno, field=key)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc), line=lineno, field=key) from None
    for required in ("swept", "grid"):
        if required not in lines:
            raise ConfigError(f"missing required key in {source}", field=required)
    try:
        if trunc_kwargs:
            kwargs["trunc"] = TruncationPolicy(**trunc_kwargs)
        return SweepConfig(**kwargs)
    except ConfigError as exc:
        where = exc.field if exc.field in lines else None
        if where is None and exc.field == kwargs.get("swept_parameter"):
            where = "grid"  # the offending value came from the grid
        if where is not None and exc.line is None:
            raise ConfigError(str(exc).split(": ", 1)[-1], line=lines[where], field=exc.field) from None
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> SweepConfig:
    return parse_config(Path(path).read_text(), source=str(path))


# ---- presets --------------------------------------------------------------

FIG_ETAS = (0.025, 0.05, 0.1, 0.2, 0.3)
FIG_ZETAS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
CHI_LOG_GRID = parse_grid("log 0.005 0.5 41")
DISTANCE_GRID = tuple(float(d) for d in range(0, 201, 5))
FIG4_CHI_GRID = tuple(sorted(set(np.round(np.linspace(0.02, 0.6, 30), 6)) | {0.316}))

EXPERIMENT = dict(
    chi=0.316, base_efficiency=0.236, attenuation=0.45, distance=100.0,
    dark_count_rate=200.0, coincidence_window=5e-9,
)


def _fig2():
    return [
        SweepConfig("chi", CHI_LOG_GRID, eta=eta, zeta_dc=1e-5, series=f"eta={eta:g}")
        for eta in FIG_ETAS
    ]


def _fig3():
    return [
        SweepConfig("chi", CHI_LOG_GRID, eta=0.1, zeta_dc=z, series=f"zeta_dc={z:g}")
        for z in FIG_ZETAS
    ]


def _fig4():
    return [SweepConfig("chi", FIG4_CHI_GRID, eta=7.463e-6, zeta_dc=1e-6, series="fig4")]


def _fig5():
    return [
        SweepConfig(
            "distance", DISTANCE_GRID, chi=0.316, base_efficiency=eta, attenuation=0.45,
            zeta_dc=1e-5, series=f"eta={eta:g}",
        )
        for eta in FIG_ETAS
    ]


def _fig6():
    return [
        SweepConfig(
            "distance", DISTANCE_GRID, chi=0.315, base_efficiency=0.236, attenuation=0.45,
            zeta_dc=1e-6, series="fig6",
        )
    ]


def _experiment():
    params = dict(EXPERIMENT)
    distance = params.pop("distance")
    return [SweepConfig("distance", (distance,), series="experiment", **params)]


PRESETS = {
    "fig2": (_fig2, "fidelity vs chi, zeta_dc=1e-5, one curve per eta"),
    "fig3": (_fig3, "fidelity vs chi, eta=0.1, one curve per zeta_dc"),
    "fig4": (_fig4, "fidelity vs chi at the 100 km experiment (eta=7.463e-6, zeta_dc=1e-6)"),
    "fig5": (_fig5, "fidelity vs distance, chi=0.316, zeta_dc=1e-5, one curve per base eta"),
    "fig6": (_fig6, "fidelity vs distance, chi=0.315, eta=0.236, zeta_dc=1e-6"),
    "experiment": (_experiment, "single point: 100 km, 45 dB, 200 dark counts/s, 5 ns window"),
}


def preset(name: str) -> list[SweepConfig]:
    try:
        factory, _ = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
    return factory()


# ---- experiment comparison and oracle verification ----------------------------


@dataclass
class ExperimentComparison:
    model: float
    experiment: float = EXPERIMENT_FIDELITY
    reference_model: float = REFERENCE_MODEL_FIDELITY
    distance: float = EXPERIMENT["distance"]

    @property
    def deviation(self) -> float:
        return self.model - self.experiment

    def summary(self) -> str:
        return "\n".join([
            f"distance                     {self.distance:g} km",
            f"model average fidelity       {self.model:.6f}",
            f"experimental reference       {self.experiment:.4f}",
            f"reference model value        {self.reference_model:.3f}",
            f"model - experiment           {self.deviation:+.6f}",
            f"model - reference model      {self.model - self.reference_model:+.6f}",
        ])


def compare_experiment(config: Optional[SweepConfig] = None, distance: Optional[float] = None) -> ExperimentComparison:
    config = config or preset("experiment")[0]
    if distance is not None:
        if config.swept_parameter == "distance":
            config = replace(config, grid=(float(distance),))
        else:
            config = replace(config, distance=float(distance))
    value = config.grid[0]
    row = evaluate_point(config, value)
    if row.status != "ok":
        raise ZeroEvidence(f"experiment point failed: {row.status}")
    at = value if config.swept_parameter == "distance" else (config.distance or 0.0)
    return ExperimentComparison(model=row.f_avg, distance=at)
