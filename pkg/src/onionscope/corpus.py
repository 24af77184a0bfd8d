"""Domain types shared across the toolkit, URL normalization and snapshot I/O."""
from __future__ import annotations

import base64
import calendar
import enum
import json
import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator

__all__ = [
    "OnionVersion", "OnionAddress", "Surface", "LinkClass", "CrawlState", "CrawlStatus",
    "PageRecord", "EmptyInput", "SchemaError", "normalize_url", "format_timestamp",
    "parse_timestamp", "save_snapshot", "load_snapshot", "iter_snapshot",
    "SNAPSHOT_FORMAT_VERSION", "MAX_HTML_BYTES", "MAX_ATTEMPTS",
]

SNAPSHOT_FORMAT_VERSION = 1
MAX_HTML_BYTES = 4 * 1024 * 1024
MAX_ATTEMPTS = 5
TIMESTAMP_FORMAT = "%d-%m-%y %H:%M:%S"

_SCHEME_RE = re.compile(r"^[a-zA-Z][a-zA-Z0-9+.-]*://")


class EmptyInput(ValueError):
    """Raised when a URL is empty or only whitespace."""


class SchemaError(ValueError):
    """A snapshot line does not match the record schema."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class OnionVersion(str, enum.Enum):
    V2 = "v2"
    V3 = "v3"
    MALFORMED = "malformed"


@dataclass(frozen=True)
class OnionAddress:
    host: str
    version: OnionVersion

    @property
    def label(self) -> str:
        return self.host[: -len(".onion")]

    def __str__(self) -> str:
        return self.host


@dataclass(frozen=True)
class Surface:
    """Marker returned by :func:`normalize_url` for non-onion hosts."""

    host: str

    def __str__(self) -> str:
        return self.host


class LinkClass(str, enum.Enum):
    OWN = "own"
    EXTERNAL_ONION = "external_onion"
    SURFACE = "surface"


class CrawlState(str, enum.Enum):
    PENDING = "pending"
    FETCHED = "fetched"
    UNREACHABLE = "unreachable"


@dataclass
class CrawlStatus:
    state: CrawlState = CrawlState.PENDING
    attempts: int = 0
    last_code: int | None = None  # HTTP status of the last attempt, None on timeout/transport error


@dataclass
class PageRecord:
    """One crawled (or attempted) landing page."""

    url: str
    metadata: dict[str, str] = field(default_factory=dict)
    link_list: list[tuple[str, LinkClass]] = field(default_factory=list)
    referenced_by: set[str] = field(default_factory=set)
    html: bytes = b""
    timestamps: list[str] = field(default_factory=list)
    languages: list[str] = field(default_factory=list)
    depth: int = 0
    status: CrawlStatus = field(default_factory=CrawlStatus)
    truncated: bool = False

    @property
    def address(self) -> OnionAddress | Surface:
        return normalize_url(self.url)

    @property
    def is_seed(self) -> bool:
        return self.depth == 0

    @property
    def fetched(self) -> bool:
        return self.status.state is CrawlState.FETCHED

    @property
    def first_seen(self) -> float:
        """Epoch seconds of the first timestamp, ``inf`` if never attempted."""
        return parse_timestamp(self.timestamps[0]) if self.timestamps else float("inf")

    def add_timestamp(self, epoch: float) -> None:
        stamp = format_timestamp(epoch)
        if self.timestamps and parse_timestamp(self.timestamps[-1]) > parse_timestamp(stamp):
            raise ValueError("timestamps must be non-decreasing")
        self.timestamps.append(stamp)

    def set_html(self, body: bytes, limit: int = MAX_HTML_BYTES) -> None:
        self.truncated = len(body) > limit
        self.html = body[:limit]


def format_timestamp(epoch: float) -> str:
    return time.strftime(TIMESTAMP_FORMAT, time.gmtime(epoch))


def parse_timestamp(stamp: str) -> float:
    return float(calendar.timegm(time.strptime(stamp, TIMESTAMP_FORMAT)))


def classify_onion_label(label: str) -> OnionVersion:
    if len(label) == 16:
        return OnionVersion.V2
    if len(label) == 56:
        return OnionVersion.V3
    return OnionVersion.MALFORMED


def normalize_url(raw: str) -> OnionAddress | Surface:
    """Reduce ``raw`` to its host.

    Scheme, userinfo, port, path, query and fragment are stripped and the host
    is lowercased. Subdomain labels in front of an onion label are dropped.
    """
    if raw is None or not raw.strip():
        raise EmptyInput("empty url")
    s = raw.strip()
    s = _SCHEME_RE.sub("", s)
    s = re.split(r"[/?#\s]", s, maxsplit=1)[0]
    if "@" in s:
        s = s.rsplit("@", 1)[1]
    if s.startswith("["):  # bracketed IPv6 literal
        s = s.split("]", 1)[0] + "]"
    else:
        s = s.split(":", 1)[0]
    host = s.lower().rstrip(".")
    if not host:
        raise EmptyInput(f"no host in {raw!r}")
    labels = host.split(".")
    if len(labels) >= 2 and labels[-1] == "onion":
        label = labels[-2]
        return OnionAddress(f"{label}.onion", classify_onion_label(label))
    return Surface(host)


# -- snapshot persistence ---------------------------------------------------

def _record_to_obj(rec: PageRecord) -> dict:
    return {
        "url": rec.url,
        "metadata": dict(rec.metadata),
        "link_list": [[u, c.value] for u, c in rec.link_list],
        "referenced_by": sorted(rec.referenced_by),
        "html": base64.b64encode(rec.html).decode("ascii"),
        "timestamps": list(rec.timestamps),
        "languages": list(rec.languages),
        "depth": rec.depth,
        "status": {
            "state": rec.status.state.value,
            "attempts": rec.status.attempts,
            "last_code": rec.status.last_code,
        },
        "truncated": rec.truncated,
    }


def _obj_to_record(obj: dict, lineno: int) -> PageRecord:
    try:
        st = obj["status"]
        status = CrawlStatus(CrawlState(st["state"]), int(st["attempts"]), st["last_code"])
        rec = PageRecord(
            url=str(obj["url"]),
            metadata={str(k): str(v) for k, v in obj["metadata"].items()},
            link_list=[(str(u), LinkClass(c)) for u, c in obj["link_list"]],
            referenced_by=set(obj["referenced_by"]),
            html=base64.b64decode(obj["html"].encode("ascii"), validate=True),
            timestamps=list(obj["timestamps"]),
            languages=list(obj["languages"]),
            depth=int(obj["depth"]),
            status=status,
            truncated=bool(obj.get("truncated", False)),
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(lineno, f"bad record: {exc}") from exc
    if rec.depth < 0 or not 0 <= status.attempts <= MAX_ATTEMPTS:
        raise SchemaError(lineno, "depth or attempts out of range")
    return rec


def dumps_record(rec: PageRecord) -> str:
    return json.dumps(_record_to_obj(rec), ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def save_snapshot(records: Iterable[PageRecord], path) -> None:
    """Write records as line-delimited JSON behind a format-version header."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"format_version": SNAPSHOT_FORMAT_VERSION}) + "\n")
        for rec in records:
            fh.write(dumps_record(rec) + "\n")


def iter_snapshot(path) -> Iterator[PageRecord]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            return
        try:
            version = json.loads(header)["format_version"]
        except (ValueError, KeyError, TypeError) as exc:
            raise SchemaError(1, "missing snapshot header") from exc
        if version != SNAPSHOT_FORMAT_VERSION:
            raise SchemaError(1, f"unsupported format version {version}")
        for lineno, line in enumerate(fh, start=2):
            if not line.endswith("\n"):
                raise SchemaError(lineno, "truncated line")
            try:
                obj = json.loads(line)
            except ValueError as exc:
                raise SchemaError(lineno, f"invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise SchemaError(lineno, "record is not an object")
            yield _obj_to_record(obj, lineno)


def load_snapshot(path) -> list[PageRecord]:
    return list(iter_snapshot(path))
