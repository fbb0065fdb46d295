"""Run configuration: defaults, a plain-text key=value file, command-line overrides."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from aistrip.geo import BoundingBox, PolygonRing, baltic_aoi
from aistrip.ingest import CleaningRules
from aistrip.ml.models import FAMILIES, SMOTE_MODES
from aistrip.ml.search import DEFAULT_GRIDS
from aistrip.segmentation import SegmentationParams


class ConfigError(ValueError):
    """Invalid configuration value or key (exit code 2)."""


def parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_scalar(text: str) -> Any:
    """Best-effort typing for grid values: none, int, float, else string."""
    t = text.strip()
    if t.lower() in ("none", "null"):
        return None
    for cast in (int, float):
        try:
            return cast(t)
        except ValueError:
            pass
    return t


def parse_bbox(text: str) -> BoundingBox:
    try:
        parts = [float(p) for p in str(text).split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad bbox {text!r}") from exc
    if len(parts) != 4:
        raise ConfigError("bbox needs minLon,minLat,maxLon,maxLat")
    try:
        return BoundingBox.from_lonlat(*parts)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class RunConfig:
    # cleaning
    aoi: str = ""  # polygon file; empty means the bundled ring, "none" disables the check
    bbox: str = "4.25,53.61,19.54,61.89"
    max_sog: float = 80.0
    drop_zero_sog: bool = True
    # segmentation
    stop_radius_m: float = 100.0
    stop_min_s: float = 3600.0
    min_trip_km: float = 0.2
    min_trip_points: int = 10
    # dataset
    test_frac: float = 0.2
    seed: int = 42
    folds: int = 5
    smote: str = "fold"
    smote_k: int = 5
    # modelling
    model: str = "rf"
    n_repeats: int = 10
    grids: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_GRIDS))
    # runtime
    threads: int = 1
    log_level: str = "INFO"

    def validate(self) -> "RunConfig":
        parse_bbox(self.bbox)
        if self.max_sog <= 0:
            raise ConfigError("max_sog must be positive")
        try:
            self.segmentation()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not 0 < self.test_frac < 1:
            raise ConfigError("test_frac must lie in (0, 1)")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.smote not in SMOTE_MODES:
            raise ConfigError(f"smote must be one of {SMOTE_MODES}")
        if self.smote_k < 1:
            raise ConfigError("smote_k must be at least 1")
        if self.model not in FAMILIES:
            raise ConfigError(f"model must be one of {FAMILIES}")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.n_repeats < 1:
            raise ConfigError("n_repeats must be at least 1")
        if self.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR"):
            raise ConfigError(f"unknown log level {self.log_level!r}")
        return self

    def cleaning_rules(self) -> CleaningRules:
        aoi: Optional[PolygonRing]
        if self.aoi == "":
            aoi = baltic_aoi()
        elif self.aoi.lower() == "none":
            aoi = None
        else:
            try:
                aoi = PolygonRing.from_file(self.aoi)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"cannot read AOI polygon {self.aoi!r}: {exc}") from exc
        return CleaningRules(bbox=parse_bbox(self.bbox), aoi=aoi, max_sog=self.max_sog,
                             drop_zero_sog=self.drop_zero_sog)

    def segmentation(self) -> SegmentationParams:
        return SegmentationParams(self.stop_radius_m, self.stop_min_s, self.min_trip_km, self.min_trip_points)

    def section(self, *names: str) -> dict:
        """Subset of settings that determines one stage's output (for hashing)."""
        return {n: getattr(self, n) for n in names}


_SCALARS = {f.name: f for f in fields(RunConfig) if f.name != "grids"}


def _coerce(name: str, text: Any) -> Any:
    kind = _SCALARS[name].type
    try:
        if kind == "bool":
            return parse_bool(text)
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {text!r}") from exc
    return str(text)


def apply(cfg: RunConfig, key: str, value: Any) -> None:
    key = key.strip().replace("-", "_")
    if key.startswith("grid."):
        parts = key.split(".")
        if len(parts) != 3 or parts[1] not in cfg.grids:
            raise ConfigError(f"grid keys look like grid.<family>.<param>, got {key!r}")
        values = [parse_scalar(v) for v in str(value).split(",") if v.strip()]
        cfg.grids[parts[1]][parts[2]] = values
        return
    if key not in _SCALARS:
        raise ConfigError(f"unknown configuration key {key!r}")
    setattr(cfg, key, _coerce(key, value))


def read_config_file(path: str | Path, cfg: Optional[RunConfig] = None) -> RunConfig:
    cfg = cfg or RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        apply(cfg, key, value.strip())
    return cfg


def build_config(config_path: Optional[str], overrides: dict[str, Any]) -> RunConfig:
    """Defaults, then the config file, then non-None command-line values."""
    cfg = read_config_file(config_path) if config_path else RunConfig()
    for key, value in overrides.items():
        if value is not None:
            apply(cfg, key, value)
    return cfg.validate()
