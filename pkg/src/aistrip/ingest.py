"""Streaming ingestion of decoded AIS CSV dumps, validation, cleaning and static fill.

Input files follow the Danish Maritime Authority column layout. Header names
are matched case-insensitively and column order is free; only timestamp,
MMSI, latitude and longitude are mandatory.
"""
from __future__ import annotations

import calendar
import csv
import io
import logging
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator, Optional

import numpy as np

from aistrip.geo import DENMARK_BBOX, BoundingBox, GeoPoint, PolygonRing, baltic_aoi
from aistrip.records import (
    STATIC_FIELDS,
    AisRecord,
    MobileType,
    NavStatus,
    StaticInfo,
    VesselDims,
)
from aistrip.stageio import META_PREFIX, parse_meta_line

log = logging.getLogger(__name__)

COLUMNS = (
    "timestamp", "mobile_type", "mmsi", "latitude", "longitude", "nav_status",
    "rot", "sog", "cog", "heading", "imo", "callsign", "name", "ship_type",
    "cargo_type", "width", "length", "pos_fix_device", "draught", "destination",
    "eta", "data_source", "a", "b", "c", "d",
)
REQUIRED = ("timestamp", "mmsi", "latitude", "longitude")

_ALIASES = {
    "type_of_mobile": "mobile_type",
    "mobiletype": "mobile_type",
    "navigational_status": "nav_status",
    "navstatus": "nav_status",
    "lat": "latitude",
    "lon": "longitude",
    "type_of_position_fixing_device": "pos_fix_device",
    "data_source_type": "data_source",
    "datasource": "data_source",
}


class CsvSchemaError(Exception):
    """Header lacks a mandatory column."""


class RowParseError(ValueError):
    """A single row could not be converted to an AisRecord."""


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str


@dataclass(frozen=True)
class RawRecord:
    line: int
    values: dict[str, str]

    def get(self, column: str) -> str:
        return self.values.get(column, "")


def normalize_column(name: str) -> str:
    key = name.strip().lstrip("#").strip().lower().replace(" ", "_").replace("-", "_")
    return _ALIASES.get(key, key)


class CsvStream:
    """Iterator of RawRecords over one CSV source.

    ``errors`` fills as rows are consumed; ``meta`` holds ``## key=value``
    lines found above the header.
    """

    def __init__(self, stream: IO):
        if isinstance(stream, (io.RawIOBase, io.BufferedIOBase)) or "b" in getattr(stream, "mode", ""):
            stream = io.TextIOWrapper(stream, encoding="utf-8-sig", newline="")
        self.meta: dict[str, str] = {}
        self.errors: list[RowError] = []
        line_no = 0
        header_line = ""
        while True:
            header_line = stream.readline()
            line_no += 1
            if not header_line:
                raise CsvSchemaError("empty input: no header row")
            kv = parse_meta_line(header_line)
            if kv is None:
                break
            self.meta[kv[0]] = kv[1]
        self._header_line = line_no
        self.header = [normalize_column(c) for c in next(csv.reader([header_line]))]
        missing = [c for c in REQUIRED if c not in self.header]
        if missing:
            raise CsvSchemaError(f"header is missing required columns: {', '.join(missing)}")
        self._stream = stream

    @property
    def schema(self) -> Optional[str]:
        return self.meta.get("schema")

    def __iter__(self) -> Iterator[RawRecord]:
        reader = csv.reader(self._stream)
        width = len(self.header)
        header = self.header
        offset = self._header_line
        for row in reader:
            line = offset + reader.line_num
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != width:
                self.errors.append(RowError(line, f"expected {width} fields, got {len(row)}"))
                continue
            yield RawRecord(line, dict(zip(header, row)))


def parse_csv(stream: IO) -> CsvStream:
    """Open a CSV source for streaming; raises CsvSchemaError on a bad header."""
    return CsvStream(stream)


def _opt_float(text: str, column: str) -> Optional[float]:
    text = text.strip()
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        raise RowParseError(f"bad {column} value {text!r}") from None
    if value != value:  # NaN
        return None
    return value


def _opt_text(text: str) -> Optional[str]:
    text = text.strip()
    return text or None


def parse_timestamp(text: str) -> int:
    """UTC epoch seconds from ``dd/mm/yyyy HH:MM:SS`` or ``YYYY-MM-DD HH:MM:SS``."""
    text = text.strip()
    for fmt in ("%d/%m/%Y %H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S"):
        try:
            dt = datetime.strptime(text, fmt)
        except ValueError:
            continue
        return calendar.timegm(dt.timetuple())
    raise RowParseError(f"unparseable timestamp {text!r}")


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d %H:%M:%S")


def _static_from(raw: RawRecord) -> Optional[StaticInfo]:
    g = raw.get
    dims_vals = [_opt_float(g(k), k) for k in ("a", "b", "c", "d")]
    dims = None
    if all(v is not None for v in dims_vals):
        try:
            dims = VesselDims(*dims_vals)
        except ValueError as exc:
            raise RowParseError(str(exc)) from None
    ship_type = _opt_text(g("ship_type"))
    cargo_type = _opt_text(g("cargo_type"))
    info = StaticInfo(
        imo=_opt_text(g("imo")),
        callsign=_opt_text(g("callsign")),
        name=_opt_text(g("name")),
        ship_type=None if ship_type == "Undefined" else ship_type,
        cargo_type=cargo_type,
        width_m=_opt_float(g("width"), "width"),
        length_m=_opt_float(g("length"), "length"),
        draught_m=_opt_float(g("draught"), "draught"),
        destination=_opt_text(g("destination")),
        eta=_opt_text(g("eta")),
        pos_fix_device=_opt_text(g("pos_fix_device")),
        data_source=_opt_text(g("data_source")),
        dims=dims,
    )
    return None if info.is_empty() else info


def typify(raw: RawRecord) -> AisRecord:
    """Convert a RawRecord; raises RowParseError for unusable identity/time/position."""
    g = raw.get
    ts = parse_timestamp(g("timestamp"))
    if ts <= 0:
        raise RowParseError(f"non-positive timestamp {g('timestamp')!r}")
    try:
        mmsi = int(g("mmsi").strip())
    except ValueError:
        raise RowParseError(f"bad mmsi {g('mmsi')!r}") from None
    if mmsi <= 0:
        raise RowParseError(f"bad mmsi {mmsi}")
    lat = _opt_float(g("latitude"), "latitude")
    lon = _opt_float(g("longitude"), "longitude")
    if lat is None or lon is None:
        raise RowParseError("missing position")
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        raise RowParseError(f"position out of range ({lat}, {lon})")
    sog = _opt_float(g("sog"), "sog")
    if sog is not None and sog < 0:
        raise RowParseError(f"negative sog {sog}")
    cog = _opt_float(g("cog"), "cog")
    if cog is not None and not 0.0 <= cog < 360.0:
        cog = None
    heading = _opt_float(g("heading"), "heading")
    if heading is not None and not 0.0 <= heading < 360.0:
        heading = None
    return AisRecord(
        timestamp=ts,
        mmsi=mmsi,
        position=GeoPoint(lat, lon),
        nav_status=NavStatus.parse(g("nav_status")),
        sog_knots=sog,
        cog_deg=cog,
        heading_deg=heading,
        rot=_opt_float(g("rot"), "rot"),
        mobile_type=MobileType.parse(g("mobile_type")) if "mobile_type" in raw.values else MobileType.CLASS_A,
        static=_static_from(raw),
    )


DEFAULT_DROPPED_NAV = frozenset(
    {NavStatus.MOORED, NavStatus.AT_ANCHOR, NavStatus.CONSTRAINED_BY_DRAUGHT}
)
DEFAULT_MOBILE_TYPES = frozenset({MobileType.CLASS_A, MobileType.CLASS_B})


@dataclass
class CleaningRules:
    bbox: BoundingBox = DENMARK_BBOX
    aoi: Optional[PolygonRing] = field(default_factory=baltic_aoi)
    max_sog: float = 80.0
    drop_zero_sog: bool = True
    mobile_types: frozenset = DEFAULT_MOBILE_TYPES
    dropped_nav_status: frozenset = DEFAULT_DROPPED_NAV


@dataclass
class CleaningReport:
    rows_in: int = 0
    rows_out: int = 0
    parse_errors: int = 0
    duplicates: int = 0
    bad_bbox: int = 0
    outside_aoi: int = 0
    mobile_type_filtered: int = 0
    nav_status_filtered: int = 0
    sog_over_max: int = 0
    sog_zero: int = 0

    DROP_FIELDS = (
        "parse_errors", "duplicates", "bad_bbox", "outside_aoi",
        "mobile_type_filtered", "nav_status_filtered", "sog_over_max", "sog_zero",
    )

    @property
    def dropped(self) -> int:
        return sum(getattr(self, k) for k in self.DROP_FIELDS)

    def as_dict(self) -> dict:
        return asdict(self)


class Cleaner:
    """Stateful record filter; the only state is the (mmsi, timestamp) dedup set.

    Records are buffered in chunks so the polygon test runs vectorized.
    """

    def __init__(self, rules: CleaningRules, report: Optional[CleaningReport] = None, chunk: int = 50_000):
        self.rules = rules
        self.report = report or CleaningReport()
        self.chunk = chunk
        self._seen: set[tuple[int, int]] = set()

    def _filter_chunk(self, batch: list[AisRecord]) -> list[AisRecord]:
        rules, rep = self.rules, self.report
        fresh = []
        for r in batch:
            key = (r.mmsi, r.timestamp)
            if key in self._seen:
                rep.duplicates += 1
            else:
                self._seen.add(key)
                fresh.append(r)
        if not fresh:
            return []
        lat = np.fromiter((r.position.lat_deg for r in fresh), float, len(fresh))
        lon = np.fromiter((r.position.lon_deg for r in fresh), float, len(fresh))
        b = rules.bbox
        in_box = (lat >= b.min_lat) & (lat <= b.max_lat) & (lon >= b.min_lon) & (lon <= b.max_lon)
        in_aoi = in_box.copy()
        if rules.aoi is not None:
            e = rules.aoi.extent
            cand = in_box & (lat >= e.min_lat) & (lat <= e.max_lat) & (lon >= e.min_lon) & (lon <= e.max_lon)
            in_aoi[:] = False
            if cand.any():
                in_aoi[cand] = rules.aoi.contains(lat[cand], lon[cand])
        out = []
        for r, ok_box, ok_aoi in zip(fresh, in_box, in_aoi):
            if not ok_box:
                rep.bad_bbox += 1
            elif not ok_aoi:
                rep.outside_aoi += 1
            elif r.mobile_type not in rules.mobile_types:
                rep.mobile_type_filtered += 1
            elif r.nav_status in rules.dropped_nav_status:
                rep.nav_status_filtered += 1
            elif r.sog_knots is not None and r.sog_knots > rules.max_sog:
                rep.sog_over_max += 1
            elif rules.drop_zero_sog and r.sog_knots == 0:
                rep.sog_zero += 1
            else:
                out.append(r)
        return out

    def filter(self, records: Iterable[AisRecord]) -> Iterator[AisRecord]:
        batch: list[AisRecord] = []
        for r in records:
            self.report.rows_in += 1
            batch.append(r)
            if len(batch) >= self.chunk:
                kept = self._filter_chunk(batch)
                self.report.rows_out += len(kept)
                yield from kept
                batch = []
        if batch:
            kept = self._filter_chunk(batch)
            self.report.rows_out += len(kept)
            yield from kept


def clean(records: Iterable[AisRecord], rules: Optional[CleaningRules] = None) -> tuple[list[AisRecord], CleaningReport]:
    cleaner = Cleaner(rules or CleaningRules())
    kept = list(cleaner.filter(records))
    return kept, cleaner.report


def typify_stream(raws: Iterable[RawRecord], report: CleaningReport, errors: Optional[list] = None) -> Iterator[AisRecord]:
    """Typify rows, counting failures as parse errors (they still count as rows in)."""
    for raw in raws:
        try:
            yield typify(raw)
        except RowParseError as exc:
            report.rows_in += 1
            report.parse_errors += 1
            if errors is not None:
                errors.append(RowError(raw.line, str(exc)))


def fill_static(track: list[AisRecord]) -> list[AisRecord]:
    """Forward-fill, then back-fill, each static field within one MMSI's track.

    Fields are filled independently so a partial static message only
    contributes what it carries.
    """
    if not track:
        return []
    per_field = {name: [None if r.static is None else getattr(r.static, name) for r in track] for name in STATIC_FIELDS}
    for values in per_field.values():
        last = None
        for i, v in enumerate(values):
            if v is None:
                values[i] = last
            else:
                last = v
        nxt = None
        for i in range(len(values) - 1, -1, -1):
            if values[i] is None:
                values[i] = nxt
            else:
                nxt = values[i]
    out = []
    for i, r in enumerate(track):
        info = StaticInfo(**{name: per_field[name][i] for name in STATIC_FIELDS})
        out.append(replace(r, static=None if info.is_empty() else info))
    return out


def group_tracks(records: Iterable[AisRecord]) -> dict[int, list[AisRecord]]:
    """Group by MMSI, each track sorted by timestamp; MMSIs in ascending order."""
    tracks: dict[int, list[AisRecord]] = {}
    for r in records:
        tracks.setdefault(r.mmsi, []).append(r)
    return {m: sorted(tracks[m], key=lambda r: r.timestamp) for m in sorted(tracks)}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def record_row(r: AisRecord) -> list[str]:
    """Serialize a record in COLUMNS order."""
    s = r.static or StaticInfo()
    d = s.dims
    return [
        format_timestamp(r.timestamp), r.mobile_type.value, str(r.mmsi),
        repr(r.position.lat_deg), repr(r.position.lon_deg), r.nav_status.value,
        _fmt(r.rot), _fmt(r.sog_knots), _fmt(r.cog_deg), _fmt(r.heading_deg),
        _fmt(s.imo), _fmt(s.callsign), _fmt(s.name), _fmt(s.ship_type),
        _fmt(s.cargo_type), _fmt(s.width_m), _fmt(s.length_m), _fmt(s.pos_fix_device),
        _fmt(s.draught_m), _fmt(s.destination), _fmt(s.eta), _fmt(s.data_source),
        _fmt(d.a_m if d else None), _fmt(d.b_m if d else None),
        _fmt(d.c_m if d else None), _fmt(d.d_m if d else None),
    ]


def write_records(fh: IO[str], records: Iterable[AisRecord], extra: Optional[dict[str, list]] = None) -> int:
    """Write records as CSV rows under a COLUMNS header; ``extra`` adds trailing columns."""
    writer = csv.writer(fh, lineterminator="\n")
    extra = extra or {}
    writer.writerow(list(COLUMNS) + list(extra))
    n = 0
    for i, r in enumerate(records):
        writer.writerow(record_row(r) + [_fmt(col[i]) for col in extra.values()])
        n += 1
    return n
