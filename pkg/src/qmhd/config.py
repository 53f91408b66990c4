"""Run configuration: flat ``key = value`` files and the benchmark preset registry."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .boundary import CaseKind
from .fields import STEADY_MEASURES, SURFACE_SHEAR_MODES, FieldVariant, Geometry, Grid, PhysParams, make_grid


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Preset:
    name: str
    geometry: Geometry
    n1: int
    n2: int
    ha: float
    variant: FieldVariant
    psi_min_ref: float
    steps_ref: int
    source: str


# Cylinder: Ma=1000, Pr=0.018, Gr=0, tau0=2e-7, dt=1e-7, eps=1e-4.
# Square:   Ma=1000, Pr=0.018, Gr=0, tau0=2e-5, dt=1e-7, eps=1e-3.
_CYL = Geometry.CYLINDRICAL
_SQ = Geometry.PLANAR
_A = FieldVariant.VERTICAL
_B = FieldVariant.HORIZONTAL
PRESETS: dict[str, Preset] = {p.name: p for p in [
    Preset("table1-ha0", _CYL, 82, 162, 0.0, _A, -249.6, 569477, "cylinder, Ha=0, 82x162"),
    Preset("table1-ha50", _CYL, 82, 162, 50.0, _A, -52.2, 84326, "cylinder, Ha=50, 82x162"),
    Preset("table1-ha100", _CYL, 82, 162, 100.0, _A, -37.1, 45400, "cylinder, Ha=100, 82x162"),
    Preset("table1-ha100-fine", _CYL, 162, 322, 100.0, _A, -37.0, 45574, "cylinder, Ha=100, 162x322"),
    Preset("table2-ha50-A-22", _SQ, 22, 22, 50.0, _A, -23.83, 437210, "square, Ha=50 field A, 22x22"),
    Preset("table2-ha0", _SQ, 42, 42, 0.0, FieldVariant.NONE, -134.3, 1500000, "square, Ha=0, 42x42"),
    Preset("table2-ha50-A", _SQ, 42, 42, 50.0, _A, -22.18, 440130, "square, Ha=50 field A, 42x42"),
    Preset("table2-ha100-A", _SQ, 42, 42, 100.0, _A, -5.224, 353705, "square, Ha=100 field A, 42x42"),
    Preset("table2-ha50-B", _SQ, 42, 42, 50.0, _B, -47.785, 441100, "square, Ha=50 field B, 42x42"),
    Preset("table2-ha100-B", _SQ, 42, 42, 100.0, _B, -41.124, 375754, "square, Ha=100 field B, 42x42"),
    Preset("table2-ha50-A-82", _SQ, 82, 82, 50.0, _A, -21.88, 439553, "square, Ha=50 field A, 82x82"),
]}

# The stopping measure and Poisson tolerance differ per geometry so that the
# reference step counts are reproduced; see the README section on stopping.
GEOMETRY_DEFAULTS = {
    Geometry.CYLINDRICAL: {"tau0": 2.0e-7, "eps_steady": 1.0e-4, "steady_measure": "per-step",
                           "poisson_tol": 1.0e-8},
    Geometry.PLANAR: {"tau0": 2.0e-5, "eps_steady": 1.0e-3, "steady_measure": "rate",
                      "poisson_tol": 1.0e-11},
}
REQUIRED_KEYS = ("geometry", "n1", "n2", "ha", "ma", "pr")


def list_presets() -> list[Preset]:
    return list(PRESETS.values())


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}", key="preset") from None


@dataclass(frozen=True)
class CaseConfig:
    geometry: Geometry
    n1: int
    n2: int
    params: PhysParams
    field_variant: FieldVariant = FieldVariant.NONE
    preset: str | None = None
    output_dir: str | None = None
    snapshot_every: int = 1000
    max_steps: int = 5_000_000
    history_every: int | None = None
    nodes_include_boundary: bool = True
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.geometry is Geometry.CYLINDRICAL and self.field_variant is FieldVariant.HORIZONTAL:
            raise ConfigError("field_variant: the cylindrical cavity only supports an axial field", key="field_variant")
        if self.field_variant is FieldVariant.NONE and self.params.ha != 0:
            raise ConfigError("field_variant: Ha > 0 requires A/axial or B", key="field_variant")
        for name in ("snapshot_every", "max_steps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1", key=name)
        if self.history_every is not None and self.history_every < 1:
            raise ConfigError("history_every must be >= 1", key="history_every")

    @property
    def grid(self) -> Grid:
        return make_grid(self.geometry, self.n1, self.n2,
                         nodes_include_boundary=self.nodes_include_boundary)

    @property
    def case(self) -> CaseKind:
        return CaseKind(self.geometry, self.field_variant)

    @property
    def history_stride(self) -> int:
        if self.history_every is not None:
            return self.history_every
        return max(1, self.max_steps // 100_000)

    @property
    def reference(self) -> Preset | None:
        return PRESETS.get(self.preset) if self.preset else None

    def as_items(self) -> list[tuple[str, str]]:
        p = self.params
        items = [
            ("geometry", self.geometry.value),
            ("n1", str(self.n1)),
            ("n2", str(self.n2)),
            ("nodes_include_boundary", "true" if self.nodes_include_boundary else "false"),
            ("field_variant", self.field_variant.value),
        ]
        for f in fields(PhysParams):
            v = getattr(p, f.name)
            items.append((f.name, "auto" if v is None else v if isinstance(v, str) else repr(v)))
        items += [
            ("snapshot_every", str(self.snapshot_every)),
            ("max_steps", str(self.max_steps)),
            ("history_every", "auto" if self.history_every is None else str(self.history_every)),
            ("seed", str(self.seed)),
        ]
        if self.threads is not None:
            items.append(("threads", str(self.threads)))
        if self.output_dir is not None:
            items.append(("output_dir", self.output_dir))
        if self.preset is not None:
            items.insert(0, ("preset", self.preset))
        return items

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.as_items())

    def with_(self, **changes) -> "CaseConfig":
        return replace(self, **changes)


def _as_int(key: str, text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {text!r}", key=key) from None
    if not v.is_integer():
        raise ConfigError(f"{key} must be an integer, got {text!r}", key=key)
    return int(v)


def _as_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {text!r}", key=key) from None


def _as_bool(key: str, text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be true/false, got {text!r}", key=key)


def _optional(conv):
    def parse(key, text):
        return None if text.strip().lower() in ("auto", "none", "") else conv(key, text)
    return parse


def _geometry(key, text):
    try:
        return Geometry(text.strip().lower())
    except ValueError:
        raise ConfigError(f"geometry must be 'cylindrical' or 'planar', got {text!r}", key=key) from None


def _variant(key, text):
    try:
        return FieldVariant.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc), key=key) from None


# key -> (converter, validation predicate or None, rule text)
_KEYS = {
    "preset": (lambda k, t: t.strip(), None, ""),
    "geometry": (_geometry, None, ""),
    "n1": (_as_int, lambda v: v >= 3, "n1 >= 3"),
    "n2": (_as_int, lambda v: v >= 3, "n2 >= 3"),
    "nodes_include_boundary": (_as_bool, None, ""),
    "field_variant": (_variant, None, ""),
    "gr": (_as_float, None, ""),
    "ha": (_as_float, lambda v: v >= 0, "Ha >= 0"),
    "pr": (_as_float, lambda v: v > 0, "Pr > 0"),
    "ma": (_as_float, None, ""),
    "re_s": (_as_float, lambda v: v > 0, "Re_s > 0"),
    "tau0": (_as_float, lambda v: v >= 0, "tau0 >= 0"),
    "dt": (_as_float, lambda v: v > 0, "dt > 0"),
    "eps_steady": (_as_float, lambda v: v > 0, "eps_steady > 0"),
    "poisson_tol": (_as_float, lambda v: v > 0, "poisson_tol > 0"),
    "poisson_max_iter": (_optional(_as_int), lambda v: v is None or v >= 1, "poisson_max_iter >= 1"),
    "poisson_omega": (_optional(_as_float), lambda v: v is None or 0 < v < 2, "0 < poisson_omega < 2"),
    "surface_shear": (lambda k, t: t.strip().lower(), lambda v: v in SURFACE_SHEAR_MODES,
                      "surface_shear in {flux, one-sided}"),
    "steady_measure": (lambda k, t: t.strip().lower(), lambda v: v in STEADY_MEASURES,
                       "steady_measure in {rate, per-step}"),
    "output_dir": (lambda k, t: t.strip(), None, ""),
    "snapshot_every": (_as_int, lambda v: v >= 1, "snapshot_every >= 1"),
    "history_every": (_optional(_as_int), lambda v: v is None or v >= 1, "history_every >= 1"),
    "max_steps": (_as_int, lambda v: v >= 1, "max_steps >= 1"),
    "seed": (_as_int, None, ""),
    "threads": (_optional(_as_int), lambda v: v is None or v >= 1, "threads >= 1"),
}


def _convert(key: str, raw, line: int | None):
    conv, check, rule = _KEYS[key]
    try:
        value = conv(key, raw) if isinstance(raw, str) else raw
    except ConfigError as exc:
        raise ConfigError(str(exc), line=line, key=key) from None
    if check is not None and not check(value):
        raise ConfigError(f"invalid {key} = {raw!r}: requires {rule}", line=line, key=key)
    return value


def _tokenize(text: str) -> list[tuple[int, str, str]]:
    entries = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if not key:
            raise ConfigError("missing key before '='", line=lineno)
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line {seen[key]})", line=lineno, key=key)
        seen[key] = lineno
        entries.append((lineno, key, value))
    return entries


def preset_values(name: str) -> dict:
    p = get_preset(name)
    values = {
        "preset": p.name,
        "geometry": p.geometry,
        "n1": p.n1,
        "n2": p.n2,
        "ha": p.ha,
        "field_variant": p.variant,
        "ma": 1000.0,
        "pr": 0.018,
        "gr": 0.0,
        "re_s": 1.0e7,
        "dt": 1.0e-7,
    }
    values.update(GEOMETRY_DEFAULTS[p.geometry])
    return values


def parse_config(text: str = "", overrides: dict | None = None) -> CaseConfig:
    """Build a validated :class:`CaseConfig`.

    Precedence: ``overrides`` (command-line flags) over keys in ``text``
    over the named preset over built-in defaults.
    """
    values: dict = {}
    for lineno, key, raw in _tokenize(text):
        values[key] = _convert(key, raw, lineno)
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key)
        values[key] = _convert(key, raw, None)

    preset = values.get("preset")
    merged = preset_values(preset) if preset else {}
    merged.update(values)

    missing = [k for k in REQUIRED_KEYS if k not in merged]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing)
                          + " (or name a preset with 'preset = ...')")

    geometry = merged["geometry"]
    for key, default in GEOMETRY_DEFAULTS[geometry].items():
        merged.setdefault(key, default)
    if "field_variant" not in merged:
        if geometry is Geometry.CYLINDRICAL or merged["ha"] > 0:
            merged["field_variant"] = FieldVariant.VERTICAL
        else:
            merged["field_variant"] = FieldVariant.NONE

    param_names = {f.name for f in fields(PhysParams)}
    try:
        params = PhysParams(**{k: v for k, v in merged.items() if k in param_names})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rest = {k: v for k, v in merged.items() if k not in param_names}
    try:
        return CaseConfig(params=params, **rest)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> CaseConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


__all__ = ["ConfigError", "Preset", "PRESETS", "CaseConfig", "list_presets", "get_preset",
           "parse_config", "load_config", "preset_values"]
