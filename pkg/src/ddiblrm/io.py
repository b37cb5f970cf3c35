"""Run configuration, cohort files and result tables.

Configuration is YAML. Every key is checked: unknown keys, missing required
fields and invalid values raise :class:`ConfigError` naming the field and the
line it sits on. The shipped defaults are the weakly informative priors
(``log_alpha ~ N(logit 0.1, 2^2)``, ``log_beta ~ N(0, 1)``); interaction prior
widths have no default and must always be written out.

Example::

    model:
      variant: saturating
      drugs:
        - {name: A, ref_dose: 200}
        - {name: B, ref_dose: 200}
    priors:
      eta: {sd: 0.5}

Result tables are comma-separated with a fixed column order, probabilities
printed with 6 decimals and booleans as ``true``/``false``, so repeated runs
produce identical bytes.
"""
from __future__ import annotations

import contextlib
import csv
import io
import json
import math
import re
import os
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .decision import DEFAULT_GRID_DOSES, IntervalSpec, SurfaceRow, default_grid
from .inference import LOGIT_010, PosteriorDraws, PriorSpec, SamplerConfig
from .model import CohortRecord, DrugSpec, InvalidInputError, ModelSpec, Variant

PROB_DIGITS = 6


class ConfigError(InvalidInputError):
    """Invalid run configuration; ``field`` is a dotted path, ``line`` 1-based."""

    def __init__(self, message: str, field: str = "", line: int | None = None):
        self.field, self.line = field, line
        where = f"{field}" + (f" (line {line})" if line is not None else "")
        super().__init__(f"{where}: {message}" if where else message)


class DataFileError(InvalidInputError):
    """Invalid cohort file; ``row`` counts data rows from 1, after the header."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


def data_path(name: str) -> Path:
    """Path of a file shipped in the package ``data`` directory."""
    return Path(str(resources.files("ddiblrm") / "data" / name))


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs besides the cohort data.

    ``grid`` is ``None`` for the default factorial grid or one tuple of
    doses per drug, combined factorially with the first drug varying slowest.
    """

    model: ModelSpec
    priors: PriorSpec
    intervals: IntervalSpec = IntervalSpec()
    sampler: SamplerConfig = SamplerConfig()
    grid: tuple[tuple[float, ...], ...] | None = None

    def grid_points(self) -> np.ndarray:
        if self.grid is None:
            return default_grid(self.model.n_drugs, DEFAULT_GRID_DOSES)
        mesh = np.meshgrid(*[np.asarray(g, dtype=float) for g in self.grid], indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])


_SECTIONS = {"model", "priors", "intervals", "sampler", "grid"}
_MODEL_KEYS = {"variant", "drugs", "terms"}
_DRUG_KEYS = {"name", "ref_dose"}
_PRIOR_KEYS = {"log_alpha", "log_beta", "eta", "log_alpha3", "log_beta3"}
_NORMAL_KEYS = {"mean", "sd"}
_INTERVAL_KEYS = {f.name for f in fields(IntervalSpec)}
_SAMPLER_KEYS = {f.name for f in fields(SamplerConfig)}


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-05`` (no dot) as a float, as YAML 1.2 does."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)


def _line_map(text: str) -> dict[str, int]:
    """Map dotted paths (``model.drugs[0].ref_dose``) to 1-based line numbers."""
    lines: dict[str, int] = {}

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            seen = set()
            for k, v in node.value:
                key = str(k.value)
                sub = f"{path}.{key}" if path else key
                if key in seen:
                    raise ConfigError(f"duplicate key {key!r}", sub, k.start_mark.line + 1)
                seen.add(key)
                lines[sub] = k.start_mark.line + 1
                walk(v, sub)
                lines[sub] = k.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, f"{path}[{i}]")

    root = yaml.compose(text, Loader=_Loader)
    if root is not None:
        walk(root, "")
    return lines


class _Ctx:
    """Attach field paths and line numbers to validation errors."""

    def __init__(self, lines: dict[str, int]):
        self.lines = lines

    def line(self, path: str) -> int | None:
        while path:
            if path in self.lines:
                return self.lines[path]
            cut = max(path.rfind("."), path.rfind("["))
            path = path[:cut] if cut > 0 else ""
        return self.lines.get("")

    def error(self, path: str, message: str) -> ConfigError:
        return ConfigError(message, path, self.line(path))

    @contextlib.contextmanager
    def field(self, path: str):
        try:
            yield
        except ConfigError:
            raise
        except (InvalidInputError, TypeError, ValueError) as exc:
            raise self.error(path, str(exc)) from None

    def mapping(self, value, path: str, allowed: set[str], required: Sequence[str] = ()) -> dict:
        if not isinstance(value, dict):
            raise self.error(path, f"expected a mapping, got {type(value).__name__}")
        for k in value:
            if k not in allowed:
                raise self.error(f"{path}.{k}" if path else str(k), f"unknown key {k!r}")
        for k in required:
            if k not in value:
                raise self.error(path, f"missing required field {(path + '.' if path else '') + k!r}")
        return value

    def number(self, value, path: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(path, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise self.error(path, f"expected a finite number, got {value!r}")
        return float(value)

    def integer(self, value, path: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(path, f"expected an integer, got {value!r}")
        return value

    def normal(self, value, path: str, default_mean: float | None = None) -> tuple[float, float]:
        required = ("sd",) if default_mean is not None else ("mean", "sd")
        value = self.mapping(value, path, _NORMAL_KEYS, required)
        mean = self.number(value["mean"], f"{path}.mean") if "mean" in value else default_mean
        sd = self.number(value["sd"], f"{path}.sd")
        if sd <= 0:
            raise self.error(f"{path}.sd", f"sd must be positive, got {sd}")
        return mean, sd


def _parse_model(ctx: _Ctx, raw) -> ModelSpec:
    raw = ctx.mapping(raw, "model", _MODEL_KEYS, ("variant", "drugs"))
    with ctx.field("model.variant"):
        if not isinstance(raw["variant"], str):
            raise InvalidInputError(f"expected a variant name, got {raw['variant']!r}")
        try:
            variant = Variant(raw["variant"])
        except ValueError:
            names = ", ".join(v.value for v in Variant)
            raise InvalidInputError(f"unknown variant {raw['variant']!r} (choose from {names})") from None
    if not isinstance(raw["drugs"], list) or not raw["drugs"]:
        raise ctx.error("model.drugs", "expected a non-empty list of drugs")
    drugs = []
    for i, d in enumerate(raw["drugs"]):
        path = f"model.drugs[{i}]"
        d = ctx.mapping(d, path, _DRUG_KEYS, ("name", "ref_dose"))
        if not isinstance(d["name"], str) or not d["name"]:
            raise ctx.error(f"{path}.name", "drug name must be a non-empty string")
        if not d["name"].replace("_", "").replace("-", "").isalnum():
            raise ctx.error(f"{path}.name", f"drug name {d['name']!r} may only contain letters, digits, '_' and '-'")
        ref = ctx.number(d["ref_dose"], f"{path}.ref_dose")
        with ctx.field(f"{path}.ref_dose"):
            drugs.append(DrugSpec(d["name"], ref))
    names = [d.name for d in drugs]
    terms = None
    if "terms" in raw:
        if not isinstance(raw["terms"], list):
            raise ctx.error("model.terms", "expected a list of drug-name lists")
        terms = []
        for k, t in enumerate(raw["terms"]):
            if not isinstance(t, list) or not all(isinstance(x, str) for x in t):
                raise ctx.error(f"model.terms[{k}]", "expected a list of drug names")
            unknown = [x for x in t if x not in names]
            if unknown:
                raise ctx.error(f"model.terms[{k}]", f"unknown drug {unknown[0]!r}")
            terms.append(tuple(names.index(x) for x in t))
    with ctx.field("model"):
        return ModelSpec(tuple(drugs), variant, None if terms is None else tuple(terms))


def _per_drug(ctx: _Ctx, raw, path: str, n: int, default) -> list[tuple[float, float]]:
    if raw is None:
        return [default] * n
    if isinstance(raw, list):
        if len(raw) != n:
            raise ctx.error(path, f"expected {n} entries, one per drug, got {len(raw)}")
        return [ctx.normal(v, f"{path}[{i}]") for i, v in enumerate(raw)]
    return [ctx.normal(raw, path)] * n


def _parse_priors(ctx: _Ctx, raw, spec: ModelSpec) -> PriorSpec:
    raw = ctx.mapping({} if raw is None else raw, "priors", _PRIOR_KEYS)
    n = spec.n_drugs
    kwargs = dict(
        log_alpha=_per_drug(ctx, raw.get("log_alpha"), "priors.log_alpha", n, (LOGIT_010, 2.0)),
        log_beta=_per_drug(ctx, raw.get("log_beta"), "priors.log_beta", n, (0.0, 1.0)),
    )
    if spec.variant is Variant.THALL:
        for key, mean in (("log_alpha3", 2 * LOGIT_010), ("log_beta3", 0.0)):
            if key not in raw:
                raise ctx.error("priors", f"the thall variant requires priors.{key} (no default width)")
            kwargs[key] = ctx.normal(raw[key], f"priors.{key}", default_mean=mean)
        if "eta" in raw:
            raise ctx.error("priors.eta", "the thall variant has no eta parameters")
    elif spec.terms:
        if "eta" not in raw:
            raise ctx.error("priors", "interaction models require priors.eta (sigma_inter has no default)")
        eta = raw["eta"]
        k = len(spec.terms)
        if isinstance(eta, list):
            if len(eta) != k:
                raise ctx.error("priors.eta", f"expected {k} entries, one per interaction term, got {len(eta)}")
            kwargs["eta"] = [ctx.normal(v, f"priors.eta[{i}]", default_mean=0.0) for i, v in enumerate(eta)]
        else:
            kwargs["eta"] = [ctx.normal(eta, "priors.eta", default_mean=0.0)] * k
    else:
        for key in ("eta", "log_alpha3", "log_beta3"):
            if key in raw:
                raise ctx.error(f"priors.{key}", f"the {spec.variant.value} variant has no {key} parameters")
    with ctx.field("priors"):
        return PriorSpec(**kwargs)


def _parse_intervals(ctx: _Ctx, raw) -> IntervalSpec:
    raw = ctx.mapping({} if raw is None else raw, "intervals", _INTERVAL_KEYS)
    values = {k: ctx.number(v, f"intervals.{k}") for k, v in raw.items()}
    with ctx.field("intervals"):
        return IntervalSpec(**values)


def _parse_sampler(ctx: _Ctx, raw) -> SamplerConfig:
    raw = ctx.mapping({} if raw is None else raw, "sampler", _SAMPLER_KEYS)
    values = {}
    for k, v in raw.items():
        path = f"sampler.{k}"
        if k == "target_acceptance":
            values[k] = ctx.number(v, path)
        elif k == "metric":
            if not isinstance(v, str):
                raise ctx.error(path, f"expected 'dense' or 'diag', got {v!r}")
            values[k] = v
        else:
            values[k] = ctx.integer(v, path)
    for k, v in values.items():
        with ctx.field(f"sampler.{k}"):
            SamplerConfig(**{k: v})
    return SamplerConfig(**values)


def _parse_grid(ctx: _Ctx, raw, spec: ModelSpec):
    if raw is None or raw == "default":
        return None
    raw = ctx.mapping(raw, "grid", set(spec.drug_names), spec.drug_names)
    grid = []
    for name in spec.drug_names:
        path = f"grid.{name}"
        if not isinstance(raw[name], list) or not raw[name]:
            raise ctx.error(path, "expected a non-empty list of doses")
        doses = tuple(ctx.number(v, f"{path}[{i}]") for i, v in enumerate(raw[name]))
        if any(d < 0 for d in doses):
            raise ctx.error(path, "doses must be non-negative")
        grid.append(doses)
    return tuple(grid)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML run configuration.

    Raises
    ------
    ConfigError
        With the dotted field path and 1-based line of the offending entry.
    """
    try:
        lines = _line_map(text)
        raw = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {getattr(exc, 'problem', exc)}", "",
                          None if mark is None else mark.line + 1) from None
    ctx = _Ctx(lines)
    raw = ctx.mapping({} if raw is None else raw, "", _SECTIONS, ("model",))
    spec = _parse_model(ctx, raw["model"])
    return RunConfig(
        model=spec,
        priors=_parse_priors(ctx, raw.get("priors"), spec),
        intervals=_parse_intervals(ctx, raw.get("intervals")),
        sampler=_parse_sampler(ctx, raw.get("sampler")),
        grid=_parse_grid(ctx, raw.get("grid"), spec),
    )


def load_config(path: str | os.PathLike) -> RunConfig:
    return parse_config(Path(path).read_text())


def _normal_dict(v: tuple[float, float]) -> dict:
    return {"mean": float(v[0]), "sd": float(v[1])}


def config_to_dict(cfg: RunConfig) -> dict:
    """Fully explicit plain-data form of ``cfg``; no field is left to defaults."""
    spec = cfg.model
    model = {
        "variant": spec.variant.value,
        "drugs": [{"name": d.name, "ref_dose": float(d.ref_dose)} for d in spec.drugs],
    }
    if spec.variant.is_logit_additive:
        model["terms"] = [[spec.drugs[i].name for i in t] for t in spec.terms]
    p = cfg.priors
    priors = {
        "log_alpha": [_normal_dict(v) for v in p.log_alpha],
        "log_beta": [_normal_dict(v) for v in p.log_beta],
    }
    if spec.variant is Variant.THALL:
        priors["log_alpha3"] = _normal_dict(p.log_alpha3)
        priors["log_beta3"] = _normal_dict(p.log_beta3)
    elif spec.terms:
        priors["eta"] = [_normal_dict(v) for v in p.eta]
    s = cfg.sampler
    out = {
        "model": model,
        "priors": priors,
        "intervals": {f.name: float(getattr(cfg.intervals, f.name)) for f in fields(IntervalSpec)},
        "sampler": {f.name: getattr(s, f.name) for f in fields(SamplerConfig)},
        "grid": "default" if cfg.grid is None else {
            d.name: [float(x) for x in g] for d, g in zip(spec.drugs, cfg.grid)
        },
    }
    out["sampler"]["target_acceptance"] = float(s.target_acceptance)
    return out


def serialize_config(cfg: RunConfig) -> str:
    """YAML text that :func:`parse_config` maps back to an equal config."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=None)


# --------------------------------------------------------------------------
# cohort data

_COUNT_COLUMNS = ("n_patients", "n_dlt")


def _open_text(source):
    if hasattr(source, "read"):
        return contextlib.nullcontext(source)
    return open(source, newline="")


def read_cohorts(source, spec: ModelSpec) -> list[CohortRecord]:
    """Read cohorts from a CSV file with a header row.

    Columns: ``dose_<drug>`` for each drug of ``spec`` (any order),
    ``n_patients``, ``n_dlt`` and an optional ``label``. A missing dose
    column means that drug was not given (dose 0). Records keep file order.

    Raises
    ------
    DataFileError
        For unknown or duplicate columns, or for a bad row, naming the data
        row (1 = first row after the header).
    """
    with _open_text(source) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataFileError("file is empty, expected a header row")
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DataFileError(f"duplicate column in header {header}")
        names = spec.drug_names
        dose_col = {}
        for j, h in enumerate(header):
            if h.startswith("dose_"):
                name = h[len("dose_"):]
                if name not in names:
                    raise DataFileError(f"unknown drug column {h!r}; model drugs are {names}")
                dose_col[name] = j
            elif h not in _COUNT_COLUMNS + ("label",):
                raise DataFileError(f"unknown column {h!r}")
        for c in _COUNT_COLUMNS:
            if c not in header:
                raise DataFileError(f"missing required column {c!r}")
        if not dose_col:
            raise DataFileError("no dose_<drug> column")
        jn, jr = header.index("n_patients"), header.index("n_dlt")
        jl = header.index("label") if "label" in header else None

        out = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataFileError(f"expected {len(header)} fields, got {len(row)}", row_no)
            try:
                doses = tuple(
                    float(row[dose_col[n]]) if n in dose_col else 0.0 for n in names
                )
                n_pat, n_dlt = (_parse_count(row[j], c) for j, c in ((jn, "n_patients"), (jr, "n_dlt")))
                if n_dlt > n_pat:
                    raise InvalidInputError(f"n_dlt ({n_dlt}) exceeds n_patients ({n_pat})")
                label = row[jl].strip() if jl is not None else ""
                out.append(CohortRecord(doses, n_pat, n_dlt, label))
            except (InvalidInputError, ValueError) as exc:
                raise DataFileError(str(exc), row_no) from None
    return out


def _parse_count(text: str, name: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise InvalidInputError(f"{name} must be an integer, got {text.strip()!r}") from None


def write_cohorts(records: Sequence[CohortRecord], dest, spec: ModelSpec):
    header = [f"dose_{n}" for n in spec.drug_names] + ["n_patients", "n_dlt", "label"]
    rows = [[_fmt_dose(d) for d in r.doses] + [str(r.n_patients), str(r.n_dlt), r.label] for r in records]
    write_table(dest, header, rows)


# --------------------------------------------------------------------------
# result tables

SURFACE_COLUMNS = ("p_under", "p_target", "p_over", "mean_pi", "q025", "q50", "q975", "ewoc_ok")


def _fmt_prob(x: float) -> str:
    s = f"{x:.{PROB_DIGITS}f}"
    return "0.000000" if s == "-0.000000" else s


def _fmt_dose(d: float) -> str:
    d = float(d)
    return str(int(d)) if d.is_integer() else repr(d)


def _fmt_bool(b) -> str:
    return "true" if b else "false"


def _fmt_float(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return _fmt_bool(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return repr(x) if not math.isfinite(x) else _fmt_prob(x)


def write_table(dest, header: Sequence[str], rows: Sequence[Sequence[str]]):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text)


def write_surface(rows: Sequence[SurfaceRow], dest, drug_names: Sequence[str]):
    """Write a surface table; dose columns follow ``drug_names`` order.

    Raises
    ------
    InvalidInputError
        If ``rows`` is empty or a row has the wrong number of doses.
    OSError
        If ``dest`` cannot be written.
    """
    if not rows:
        raise InvalidInputError("surface table has no rows")
    header = [f"dose_{n}" for n in drug_names] + list(SURFACE_COLUMNS)
    out = []
    for r in rows:
        if len(r.doses) != len(drug_names):
            raise InvalidInputError(f"row has {len(r.doses)} doses, expected {len(drug_names)}")
        out.append(
            [_fmt_dose(d) for d in r.doses]
            + [_fmt_prob(getattr(r, c)) for c in SURFACE_COLUMNS[:-1]]
            + [_fmt_bool(r.ewoc_ok)]
        )
    write_table(dest, header, out)


def read_surface(source) -> tuple[list[str], list[SurfaceRow]]:
    """Read a table written by :func:`write_surface`; returns drug names and rows."""
    with _open_text(source) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = sum(h.startswith("dose_") for h in header)
        if tuple(header[n:]) != SURFACE_COLUMNS:
            raise InvalidInputError(f"unexpected surface columns {header}")
        rows = []
        for row in reader:
            vals = [float(x) for x in row[n:-1]]
            if row[-1] not in ("true", "false"):
                raise InvalidInputError(f"ewoc_ok must be true or false, got {row[-1]!r}")
            rows.append(SurfaceRow(tuple(float(x) for x in row[:n]), *vals, ewoc_ok=row[-1] == "true"))
    return [h[len("dose_"):] for h in header[:n]], rows


def write_summary(draws: PosteriorDraws, dest):
    """Per-parameter posterior summary with convergence diagnostics."""
    keys = ("mean", "sd", "q025", "q50", "q975", "rhat", "ess")
    rows = [[r["param"]] + [_fmt_float(r[k]) for k in keys] for r in draws.summary()]
    write_table(dest, ("param",) + keys, rows)


def diagnostics_dict(draws: PosteriorDraws, sampler: SamplerConfig | None = None) -> dict:
    def num(x):
        x = float(x)
        return round(x, PROB_DIGITS) if math.isfinite(x) else repr(x)

    out = {
        "converged": draws.converged,
        "divergences": int(draws.divergences),
        "n_chains": int(draws.n_chains),
        "n_draws": int(draws.draws.shape[0]),
        "rhat": {n: num(r) for n, r in zip(draws.param_names, draws.rhat)},
        "ess": {n: num(e) for n, e in zip(draws.param_names, draws.ess)},
        "step_sizes": [num(s) for s in draws.step_sizes],
    }
    if sampler is not None:
        out["sampler"] = {f.name: getattr(sampler, f.name) for f in fields(SamplerConfig)}
    return out


def write_json(obj, dest):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text)


FLAG_COLUMNS = (
    "converged", "max_rhat", "min_ess", "divergences", "n_ewoc_ok",
    "ewoc_at_combo", "p_over_at_combo", "marginal_max_diff", "marginal_preserved",
)


def write_flags(results, dest):
    """One row per scenario and model setting; empty cells for flags that do not apply."""
    rows = []
    for res in results:
        for label, o in res.outcomes.items():
            rows.append([res.scenario.id, label] + [_fmt_float(o.flags[c]) for c in FLAG_COLUMNS])
    write_table(dest, ("scenario", "setting") + FLAG_COLUMNS, rows)


def read_flags(source) -> list[dict]:
    """Read a flags table back into dicts of typed values (``None`` for empty cells)."""
    def value(text):
        if text == "":
            return None
        if text in ("true", "false"):
            return text == "true"
        return float(text)

    with _open_text(source) as fh:
        return [
            {k: (v if k in ("scenario", "setting") else value(v)) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]


def write_scenario_tree(results, out_dir, sampler: SamplerConfig | None = None):
    """Write every scenario result below ``out_dir``.

    Layout::

        flags.csv
        <scenario>/<setting>/surface.csv
        <scenario>/<setting>/marginal_<drug>.csv
        <scenario>/<setting>/summary.csv
        <scenario>/<setting>/diagnostics.json
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for res in results:
        for label, o in res.outcomes.items():
            d = out_dir / res.scenario.slug / label
            d.mkdir(parents=True, exist_ok=True)
            names = o.spec.drug_names
            write_surface(o.surface, d / "surface.csv", names)
            for name, rows in o.marginals.items():
                write_surface(rows, d / f"marginal_{name}.csv", names)
            write_summary(o.draws, d / "summary.csv")
            write_json(diagnostics_dict(o.draws, sampler), d / "diagnostics.json")
    write_flags(results, out_dir / "flags.csv")
