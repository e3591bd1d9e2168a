"""Kinetic-energy sweeps, peak refinement and table output."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import models
from .engine import ScatteringModel, solve_scattering
from .entanglement import p2_bar as _p2_bar
from .entanglement import success_probability
from .exceptions import ClosedChannelError

SCHEMA_VERSION = 1
THREADS_ENV = "SPINSCATTER_THREADS"
DEFAULT_GRID = {"scale": "log", "min": 1e-7, "max": 1e-1, "count": 400, "relative": True}
BASE_QUANTITIES = {"T_i", "T_plus", "T_minus", "p2_bar", "phi_plus", "p2", "flux"}
ROLE_ALIASES = {"i": "incoming", "plus": "partner"}


# --------------------------------------------------------------------------- config


@dataclass
class GridSpec:
    scale: str = "log"
    min: float = 1e-7
    max: float = 1e-1
    count: int = 400
    relative: bool = True  # bounds in units of t

    def __post_init__(self):
        if self.scale not in ("log", "linear"):
            raise ValueError(f"grid scale must be 'log' or 'linear', got {self.scale!r}")
        if not self.min > 0:
            raise ValueError("grid min must be positive")
        if not self.max > self.min:
            raise ValueError("grid max must exceed min")
        if int(self.count) < 2:
            raise ValueError("grid count must be at least 2")
        self.count = int(self.count)

    def energies(self, t: float) -> np.ndarray:
        scale = t if self.relative else 1.0
        lo, hi = self.min * scale, self.max * scale
        if self.scale == "log":
            return np.geomspace(lo, hi, self.count)
        return np.linspace(lo, hi, self.count)


@dataclass
class SweepConfig:
    model: Any
    N: int = 2
    t: float = 100.0
    a: float = 1.0
    grid: GridSpec = field(default_factory=GridSpec)
    outputs: list[str] = field(default_factory=lambda: ["T_i", "T_plus", "T_minus", "p2_bar"])
    theta_tilde: list[float] = field(default_factory=lambda: [0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4, np.pi])
    refine_peaks: bool = False
    output: str | None = None
    format: str = "csv"
    threads: int | None = None

    def __post_init__(self):
        if isinstance(self.grid, dict):
            self.grid = GridSpec(**self.grid)
        if int(self.N) < 1:
            raise ValueError("N must be at least 1")
        self.N = int(self.N)
        if not self.t > 0:
            raise ValueError("t must be positive")
        if not self.a > 0:
            raise ValueError("lattice spacing a must be positive")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        for q in self.outputs:
            if not _known_quantity(q):
                raise ValueError(f"unrecognized quantity {q!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        data = dict(data)
        version = data.pop("schema_version", SCHEMA_VERSION)
        if int(version) != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | os.PathLike) -> "SweepConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schema_version"] = SCHEMA_VERSION
        return out


def _known_quantity(q: str) -> bool:
    if q in BASE_QUANTITIES:
        return True
    return q.startswith(("T_", "R_")) and len(q) > 2


# --------------------------------------------------------------------------- models


def resolve_model(spec, N: int, t: float) -> ScatteringModel:
    """Build a model from a preset name or a JSON-style family description."""
    if isinstance(spec, ScatteringModel):
        return spec
    if isinstance(spec, str):
        spec = {"family": "molecular", "preset": spec}
    spec = dict(spec)
    family = spec.pop("family", "molecular")
    if family == "kondo":
        s = spec.pop("s", 0.5)
        J = spec.pop("J", -0.5)
        contact = spec.pop("contact", "spread")
        _no_extra(spec, family)
        if contact == "spread":
            return models.kondo_contact_spread(s, J, N, t)
        if contact == "combined":
            return models.kondo_combined_model(s, J, N, t)
        raise ValueError(f"unknown kondo contact {contact!r}")
    if family == "molecular":
        return models.molecular_block(_molecular_params(spec), N, t)
    if family == "zeeman":
        J, Delta = spec.pop("J"), spec.pop("Delta")
        _no_extra(spec, family)
        return models.zeeman_impurity(J, Delta, t)
    if family == "impurity":
        J = spec.pop("J")
        _no_extra(spec, family)
        return models.single_impurity(J, t)
    if family in ("anderson", "schrieffer_wolff"):
        p = models.AndersonParams(spec.pop("t_h"), spec.pop("U1"), spec.pop("U2"), spec.pop("eps"))
        _no_extra(spec, family)
        if family == "anderson":
            return models.anderson_model(p, t)
        return models.schrieffer_wolff_model(p, t)
    raise ValueError(f"unknown model family {family!r}")


def _molecular_params(spec: dict) -> models.MolecularParams:
    spec = dict(spec)
    if "preset" in spec:
        name = spec.pop("preset")
        J = spec.pop("J", None)
        _no_extra(spec, "molecular preset")
        return models.get_preset(name, J)
    s = spec.pop("s")
    J = spec.pop("J", -0.5)
    J12x = spec.pop("J12x", 1.0)
    J12z = spec.pop("J12z", 1.0)
    if "delta_E" in spec:
        D = models.d_for_splitting(s, spec.pop("delta_E"), J12x, J12z)
        D1 = D2 = D
    elif "D" in spec:
        D1 = D2 = spec.pop("D")
    else:
        D1, D2 = spec.pop("D1", 0.0), spec.pop("D2", 0.0)
    _no_extra(spec, "molecular")
    return models.MolecularParams(s, D1, D2, J12x, J12z, J)


def _no_extra(spec: dict, family: str):
    if spec:
        raise ValueError(f"unexpected keys for {family} model: {sorted(spec)}")


# --------------------------------------------------------------------------- tables


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([r[k] for r in self.rows])

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]


@dataclass(frozen=True)
class PeakRecord:
    quantity: str
    K_i: float
    value: float
    tolerance: float
    at_boundary: bool = False


@dataclass
class SweepResult:
    table: Table
    peaks: list[PeakRecord] = field(default_factory=list)


def _channel_index(model: ScatteringModel, name: str) -> int:
    role = ROLE_ALIASES.get(name)
    if role is not None:
        return getattr(model, role)
    return model.channel(name)


def _p2_column(theta: float) -> str:
    return f"p2@{theta:.6g}"


def output_columns(cfg_outputs: Sequence[str], theta_tilde: Sequence[float]) -> list[str]:
    cols = ["K_i", "K_over_t", "open_i", "open_plus"]
    for q in cfg_outputs:
        if q == "p2":
            cols.extend(_p2_column(th) for th in theta_tilde)
        else:
            cols.append(q)
    return cols


def evaluate_point(
    model: ScatteringModel, K_i: float, outputs: Sequence[str], theta_tilde: Sequence[float] = ()
) -> list:
    """One sweep row; closed channels report 0 and are flagged in the open columns."""
    i, p = model.incoming, model.partner
    row: list = [float(K_i), float(K_i) / model.t]
    try:
        out = solve_scattering(model, K_i)
    except ClosedChannelError:
        row.extend([False, False])
        for q in outputs:
            row.extend([0.0] * (len(theta_tilde) if q == "p2" else 1))
        return row
    row.extend([bool(out.channels.open[i]), bool(out.channels.open[p])])
    T_i, T_p = float(out.T[i]), float(out.T[p])
    for q in outputs:
        if q == "p2":
            for th in theta_tilde:
                row.append(success_probability(T_i, T_p, th) if T_i > 0 and T_p > 0 else 0.0)
        elif q == "p2_bar":
            row.append(_p2_bar(T_i, T_p))
        elif q == "phi_plus":
            phase = out.phi_plus
            row.append(0.0 if phase is None else phase)
        elif q == "flux":
            row.append(out.flux)
        else:
            kind, name = q[0], q[2:]
            idx = _channel_index(model, name)
            row.append(float((out.T if kind == "T" else out.R)[idx]))
    return row


def _worker_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return 1


def _parallel_map(fn: Callable, items: Sequence, threads: int | None) -> list:
    n = _worker_count(threads)
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def run_sweep(cfg: SweepConfig, threads: int | None = None) -> SweepResult:
    """Evaluate the requested quantities on the configured kinetic-energy grid."""
    model = resolve_model(cfg.model, cfg.N, cfg.t)
    energies = cfg.grid.energies(cfg.t)
    outputs = list(cfg.outputs)
    rows = _parallel_map(
        lambda K: evaluate_point(model, K, outputs, cfg.theta_tilde),
        energies,
        threads if threads is not None else cfg.threads,
    )
    table = Table(output_columns(outputs, cfg.theta_tilde), rows)
    result = SweepResult(table)
    if cfg.refine_peaks:
        for q in outputs:
            if q in ("p2", "phi_plus", "flux"):
                continue
            result.peaks.append(refine_from_grid(q, model, energies, table.column(q)))
    return result


# --------------------------------------------------------------------------- peaks


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-6, max_iter: int = 500
) -> tuple[float, float, float]:
    """Maximize a unimodal ``f`` on [lo, hi] in log space.

    Returns (argmax, max, achieved relative bracket width).
    """
    if not 0 < lo < hi:
        raise ValueError("golden-section bracket must satisfy 0 < lo < hi")
    invphi = (math.sqrt(5) - 1) / 2
    a, b = math.log(lo), math.log(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    for _ in range(max_iter):
        if math.expm1(b - a) <= rtol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(math.exp(d))
    x, fx = (c, fc) if fc >= fd else (d, fd)
    return math.exp(x), fx, math.expm1(b - a)


def quantity_function(model: ScatteringModel, quantity: str) -> Callable[[float], float]:
    def f(K: float) -> float:
        row = evaluate_point(model, K, [quantity])
        return float(row[-1])

    return f


def open_threshold(model: ScatteringModel) -> float:
    """Kinetic energy below which the partner channel is closed."""
    eps0 = model.lead.eps0_diag
    return max(0.0, eps0[model.partner] - eps0[model.incoming])


def refine_peak(
    quantity: str,
    model: ScatteringModel,
    bracket: tuple[float, float],
    tol: float = 1e-6,
) -> PeakRecord:
    """Golden-section refinement of a maximum inside ``bracket`` (meV)."""
    lo, hi = map(float, bracket)
    if quantity not in ("T_i", "R_i"):
        thr = open_threshold(model)
        if thr > 0:
            lo = max(lo, thr * (1 + 1e-9))
    if not lo < hi:
        raise ValueError(f"bracket {bracket} lies entirely in the closed region")
    f = quantity_function(model, quantity)
    x, fx, width = golden_section_max(f, lo, hi, rtol=tol)
    edge = math.log1p(2 * tol)
    at_boundary = abs(math.log(x / lo)) <= edge or abs(math.log(hi / x)) <= edge
    return PeakRecord(quantity, x, fx, width, at_boundary)


def refine_from_grid(
    quantity: str, model: ScatteringModel, energies: np.ndarray, values: np.ndarray, tol: float = 1e-6
) -> PeakRecord:
    """Bracket the grid maximum by its neighbours and refine it."""
    k = int(np.argmax(values))
    best = PeakRecord(quantity, float(energies[k]), float(values[k]), float("nan"), True)
    if k == 0 or k == len(energies) - 1:
        return best
    rec = refine_peak(quantity, model, (energies[k - 1], energies[k + 1]), tol)
    if rec.value < best.value:
        return PeakRecord(quantity, best.K_i, best.value, rec.tolerance, rec.at_boundary)
    return rec


PEAK_COLUMNS = [
    "label", "s", "delta_E", "D", "J12x", "J12z",
    "max_T_plus", "K_at_max_T_plus", "max_p2_bar", "K_at_max_p2_bar",
]


def _scan_entries(entries: Iterable[dict], J: float, J12x: float, J12z: float):
    for entry in entries:
        entry = {"preset": entry} if isinstance(entry, str) else dict(entry)
        if "preset" in entry:
            name = entry["preset"]
            p = models.get_preset(name, entry.get("J", J))
            yield name, p
            continue
        s = entry["s"]
        jx, jz = entry.get("J12x", J12x), entry.get("J12z", J12z)
        dEs = entry.get("delta_E", 0.0)
        for dE in np.atleast_1d(dEs):
            D = models.d_for_splitting(s, float(dE), jx, jz)
            yield f"s={s},dE={float(dE):g}", models.MolecularParams.symmetric(s, D, jx, jz, entry.get("J", J))


def peak_scan(
    entries: Sequence,
    N: int = 2,
    t: float = 100.0,
    J: float = -0.5,
    J12x: float = 1.0,
    J12z: float = 1.0,
    grid: GridSpec | dict | None = None,
    refine: bool = True,
    threads: int | None = None,
) -> Table:
    """Maxima of T_plus and p2_bar over K_i for each molecule or (s, delta_E) entry."""
    if grid is None:
        grid = GridSpec()
    elif isinstance(grid, dict):
        grid = GridSpec(**grid)
    table = Table(list(PEAK_COLUMNS))
    energies = grid.energies(t)
    for label, p in _scan_entries(entries, J, J12x, J12z):
        model = models.molecular_block(p, N, t)
        rows = _parallel_map(lambda K: evaluate_point(model, K, ["T_plus", "p2_bar"]), energies, threads)
        tp = np.array([r[-2] for r in rows])
        pb = np.array([r[-1] for r in rows])
        if refine:
            rt = refine_from_grid("T_plus", model, energies, tp)
            rp = refine_from_grid("p2_bar", model, energies, pb)
            peaks = (rt.value, rt.K_i, rp.value, rp.K_i)
        else:
            kt, kp = int(np.argmax(tp)), int(np.argmax(pb))
            peaks = (tp[kt], energies[kt], pb[kp], energies[kp])
        table.rows.append(
            [label, float(p.s), models.energy_splitting(p), p.D, p.J12x, p.J12z, *map(float, peaks)]
        )
    return table


def s_trend_non_increasing(table: Table, column: str = "max_p2_bar", delta_E: float = 0.0) -> bool:
    """True when ``column`` does not grow with s among rows at the given splitting."""
    pts = sorted(
        (r["s"], r[column]) for r in table.records() if abs(r["delta_E"] - delta_E) < 1e-12
    )
    vals = [v for _, v in pts]
    return all(b <= a for a, b in zip(vals, vals[1:]))


# --------------------------------------------------------------------------- output


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _jsonable(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def emit(table: Table, path: str | os.PathLike, fmt: str = "csv", config: dict | None = None) -> Path:
    """Write ``table`` as CSV or JSON and echo the config to ``<path>.config.json``."""
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([_fmt(v) for v in row])
    elif fmt == "json":
        records = [{k: _jsonable(v) for k, v in rec.items()} for rec in table.records()]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(records, fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    echo = {"schema_version": SCHEMA_VERSION, "columns": table.columns, "config": config}
    with open(f"{path}.config.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(echo, fh, indent=1, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return path


def _parse_cell(text: str):
    if text in ("true", "false"):
        return text == "true"
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path: str | os.PathLike) -> Table:
    """Load a table written by :func:`emit` (format chosen by extension)."""
    path = Path(path)
    if path.suffix == ".json":
        with open(path, encoding="utf-8") as fh:
            records = json.load(fh)
        cols = list(records[0]) if records else []
        return Table(cols, [[r[c] for c in cols] for r in records])
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        cols = next(reader)
        return Table(cols, [[_parse_cell(c) for c in row] for row in reader])
