"""Typed AIS records shared by ingest, segmentation and features."""
from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from typing import Optional

from aistrip.geo import GeoPoint


class NavStatus(str, enum.Enum):
    UNDER_WAY_USING_ENGINE = "Under way using engine"
    AT_ANCHOR = "At anchor"
    NOT_UNDER_COMMAND = "Not under command"
    RESTRICTED_MANEUVERABILITY = "Restricted maneuverability"
    CONSTRAINED_BY_DRAUGHT = "Constrained by her draught"
    MOORED = "Moored"
    AGROUND = "Aground"
    ENGAGED_IN_FISHING = "Engaged in fishing"
    UNDER_WAY_SAILING = "Under way sailing"
    RESERVED_HSC = "Reserved for future amendment [HSC]"
    RESERVED_WIG = "Reserved for future amendment [WIG]"
    TOWING_ASTERN = "Power-driven vessel towing astern"
    PUSHING_AHEAD = "Power-driven vessel pushing ahead or towing alongside"
    RESERVED = "Reserved for future use"
    AIS_SART = "AIS-SART"
    UNKNOWN = "Unknown value"

    @classmethod
    def parse(cls, text: str) -> "NavStatus":
        return _NAV_LOOKUP.get(text.strip().lower(), cls.UNKNOWN)


class MobileType(str, enum.Enum):
    CLASS_A = "Class A"
    CLASS_B = "Class B"
    BASE_STATION = "Base Station"
    SAR_AIRBORNE = "SAR airborne"
    ATON = "AtoN"
    SART = "Search and Rescue Transponder"
    MOB = "Man Overboard Device"
    EPIRB = "EPIRB"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, text: str) -> "MobileType":
        return _MOBILE_LOOKUP.get(text.strip().lower(), cls.UNKNOWN)


_NAV_LOOKUP = {s.value.lower(): s for s in NavStatus}
_NAV_LOOKUP["anchored"] = NavStatus.AT_ANCHOR
_NAV_LOOKUP["unknown"] = NavStatus.UNKNOWN
_MOBILE_LOOKUP = {m.value.lower(): m for m in MobileType}


@dataclass(frozen=True)
class VesselDims:
    """Antenna offsets in metres: bow (a), stern (b), port (c), starboard (d)."""

    a_m: float
    b_m: float
    c_m: float
    d_m: float

    def __post_init__(self):
        if min(self.a_m, self.b_m, self.c_m, self.d_m) < 0:
            raise ValueError(f"negative vessel dimension in {self}")


@dataclass(frozen=True)
class StaticInfo:
    imo: Optional[str] = None
    callsign: Optional[str] = None
    name: Optional[str] = None
    ship_type: Optional[str] = None
    cargo_type: Optional[str] = None
    width_m: Optional[float] = None
    length_m: Optional[float] = None
    draught_m: Optional[float] = None
    destination: Optional[str] = None
    eta: Optional[str] = None
    pos_fix_device: Optional[str] = None
    data_source: Optional[str] = None
    dims: Optional[VesselDims] = None

    def is_empty(self) -> bool:
        return all(getattr(self, f.name) is None for f in fields(self))


STATIC_FIELDS = tuple(f.name for f in fields(StaticInfo))


@dataclass(frozen=True, slots=True)
class AisRecord:
    timestamp: int
    mmsi: int
    position: GeoPoint
    nav_status: NavStatus = NavStatus.UNKNOWN
    sog_knots: Optional[float] = None
    cog_deg: Optional[float] = None
    heading_deg: Optional[float] = None
    rot: Optional[float] = None
    mobile_type: MobileType = MobileType.CLASS_A
    static: Optional[StaticInfo] = None

    @property
    def lat(self) -> float:
        return self.position.lat_deg

    @property
    def lon(self) -> float:
        return self.position.lon_deg
