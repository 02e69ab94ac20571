"""Assessment-page ingestion: vehicles, classes, ratings, pages, protocols.

Ingestion is fixture-first: the crawler boundary is a ``url -> bytes``
callable, tests and the CLI feed local HTML files, and a live fetcher
would be a thin adapter on top. Result pages follow the fixture structure
documented in docs/formats.md (rating table with the four subdiscipline
rows, specification table, media links).
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from datetime import date
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable, Iterable
from urllib.parse import urljoin, urlsplit

from .graph import Node, PropertyGraph
from .schema import EL, NL, SPEC_ALIASES, SUBDISCIPLINES

log = logging.getLogger(__name__)

MIN_TEST_YEAR = 1997

_SUBDISCIPLINE_TOKENS = {
    "VRU": ("vru", "vulnerable", "pedestrian"),
    "AOP": ("aop", "adult"),
    "COP": ("cop", "child"),
    "SA": ("sa", "assist"),
}


class NcapParseError(Exception):
    """Raised with a selector-style path naming the offending element."""


@dataclass
class NcapRecord:
    vehicle_name: str
    class_name: str
    test_year: int
    stars: int
    percentages: dict[str, float]  # VRU / AOP / COP / SA -> [0, 100]
    spec: dict[str, str] = field(default_factory=dict)
    media: list[str] = field(default_factory=list)
    url: str = ""

    def validate(self) -> None:
        if not MIN_TEST_YEAR <= self.test_year <= date.today().year:
            raise NcapParseError(f"test year {self.test_year} out of range")
        if not 0 <= self.stars <= 5:
            raise NcapParseError(f"star rating {self.stars} out of range")
        missing = [s for s in SUBDISCIPLINES if s not in self.percentages]
        if missing:
            raise NcapParseError(f"missing subdiscipline ratings: {missing}")
        for name, value in self.percentages.items():
            if not 0.0 <= value <= 100.0:
                raise NcapParseError(f"{name} percentage {value} out of range")


class _PageCollector(HTMLParser):
    """Single-pass extraction of the fixture result-page structure."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.title = ""
        self.klass = ""
        self.year = ""
        self.stars: str | None = None
        self.rating_rows: list[tuple[str, str]] = []
        self.spec_rows: list[tuple[str, str]] = []
        self.media: list[str] = []
        self.hrefs: list[str] = []
        self._table: str | None = None
        self._cells: list[str] = []
        self._buffer: list[str] = []
        self._capture: str | None = None  # "title" | "class" | "year" | "cell"

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        attr = dict(attrs)
        classes = (attr.get("class") or "").split()
        if tag == "a":
            href = attr.get("href")
            if href:
                self.hrefs.append(href)
                if "media-link" in classes:
                    self.media.append(href)
        elif tag == "h1" and "vehicle-title" in classes:
            self._begin("title")
        elif tag == "span" and "vehicle-class" in classes:
            self._begin("class")
        elif tag == "span" and "test-year" in classes:
            self._begin("year")
        elif tag == "span" and "stars" in classes:
            self.stars = attr.get("data-stars")
        elif tag == "table":
            if "rating-table" in classes:
                self._table = "rating"
            elif "spec-table" in classes:
                self._table = "spec"
        elif tag == "tr" and self._table:
            self._cells = []
        elif tag in ("th", "td") and self._table:
            self._begin("cell")

    def _begin(self, capture: str) -> None:
        self._capture = capture
        self._buffer = []

    def _finish(self) -> str:
        text = "".join(self._buffer).strip()
        self._capture = None
        self._buffer = []
        return text

    def handle_endtag(self, tag: str) -> None:
        if tag == "h1" and self._capture == "title":
            self.title = self._finish()
        elif tag == "span" and self._capture == "class":
            self.klass = self._finish()
        elif tag == "span" and self._capture == "year":
            self.year = self._finish()
        elif tag in ("th", "td") and self._capture == "cell":
            self._cells.append(self._finish())
        elif tag == "tr" and self._table and len(self._cells) >= 2:
            row = (self._cells[0], self._cells[1])
            if self._table == "rating":
                self.rating_rows.append(row)
            else:
                self.spec_rows.append(row)
            self._cells = []
        elif tag == "table":
            self._table = None

    def handle_data(self, data: str) -> None:
        if self._capture is not None:
            self._buffer.append(data)


def _subdiscipline_for(text: str) -> str | None:
    tokens = re.split(r"[^a-z0-9]+", text.lower())
    for name, keys in _SUBDISCIPLINE_TOKENS.items():
        if any(key in tokens for key in keys):
            return name
    return None


def parse_result_page(html: bytes | str, url: str) -> tuple[NcapRecord, list[str]]:
    """Extract the assessment record plus all same-site links of a page."""
    text = html.decode("utf-8") if isinstance(html, bytes) else html
    collector = _PageCollector()
    collector.feed(text)

    if not collector.title:
        raise NcapParseError("h1.vehicle-title: missing")
    if not collector.rating_rows:
        raise NcapParseError("table.rating-table: missing")

    percentages: dict[str, float] = {}
    for header, cell in collector.rating_rows:
        subdiscipline = _subdiscipline_for(header)
        if subdiscipline is None:
            continue
        raw = cell.strip().rstrip("%").strip()
        try:
            percentages[subdiscipline] = float(raw)
        except ValueError:
            raise NcapParseError(
                f"table.rating-table > tr[{header}] > td.percentage: "
                f"unparsable percentage {cell!r}"
            ) from None

    spec = {key: value for key, value in collector.spec_rows}
    if not spec:
        log.warning("%s: table.spec-table missing or empty", url)

    try:
        year = int(collector.year)
    except ValueError:
        raise NcapParseError("span.test-year: missing or not a year") from None
    try:
        stars = int(collector.stars) if collector.stars is not None else 0
    except ValueError:
        raise NcapParseError("span.stars: data-stars not an integer") from None

    record = NcapRecord(
        vehicle_name=collector.title,
        class_name=collector.klass,
        test_year=year,
        stars=stars,
        percentages=percentages,
        spec=spec,
        media=[urljoin(url, href) for href in collector.media],
        url=url,
    )
    record.validate()

    site = urlsplit(url).netloc
    links: list[str] = []
    for href in collector.hrefs:
        absolute = urljoin(url, href)
        if urlsplit(absolute).netloc == site and absolute != url and absolute not in links:
            links.append(absolute)
    return record, links


# ---------------------------------------------------------------------------
# Protocol URLs
# ---------------------------------------------------------------------------

def parse_protocol_url(url: str) -> tuple[int, str, str]:
    """``.../protocols/<subdiscipline-slug>/<year>/<name>.pdf`` -> parsed triple."""
    path = urlsplit(url).path
    segments = [s for s in path.split("/") if s]
    if not segments or not segments[-1].endswith(".pdf"):
        raise NcapParseError(f"protocol url must end in .pdf: {url!r}")
    name = segments[-1][: -len(".pdf")]

    year: int | None = None
    subdiscipline: str | None = None
    for segment in segments[:-1]:
        if re.fullmatch(r"(19|20)\d\d", segment):
            year = int(segment)
        else:
            found = _subdiscipline_for(segment)
            if found is not None:
                subdiscipline = found
    if year is None:
        raise NcapParseError(f"protocol url lacks a year segment: {url!r}")
    if subdiscipline is None:
        raise NcapParseError(f"protocol url lacks a subdiscipline segment: {url!r}")
    return year, subdiscipline, name


# ---------------------------------------------------------------------------
# Graph loading (assessment segment)
# ---------------------------------------------------------------------------

def slugify(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")


def _spec_value_number(raw: str) -> float | None:
    match = re.match(r"\s*(-?\d+(?:\.\d+)?)", raw)
    return float(match.group(1)) if match else None


def _ensure_year(g: PropertyGraph, year: int) -> str:
    node_id = f"year:{year}"
    if not g.has_node(node_id):
        g.add_node(NL.YEAR, node_id, {"year": year})
    return node_id


def _ensure_subdiscipline(g: PropertyGraph, name: str) -> str:
    node_id = name.lower()
    if not g.has_node(node_id):
        g.add_node(name, node_id, {"name": name})
    return node_id


def _ensure_page(g: PropertyGraph, url: str) -> str:
    node_id = f"page:{url}"
    if not g.has_node(node_id):
        g.add_node(NL.PAGE, node_id, {"url": url})
    return node_id


def load_ncap(g: PropertyGraph, record: NcapRecord, links: Iterable[str] = ()) -> Node:
    """Load one assessment record; shared nodes are created on demand."""
    record.validate()

    props: dict[str, object] = {
        "name": record.vehicle_name,
        "on_market": True,
        "stars": record.stars,
        "test_year": record.test_year,
        "spec": json.dumps(record.spec, sort_keys=True),
        "media": list(record.media),
        "source_url": record.url,
    }
    for raw_key, alias in SPEC_ALIASES.items():
        if raw_key in record.spec:
            number = _spec_value_number(record.spec[raw_key])
            if number is not None:
                props[alias] = number

    veh_id = f"veh:{slugify(record.vehicle_name)}-{record.test_year}"
    veh = g.set_node_props(veh_id, props) if g.has_node(veh_id) else g.add_node(NL.VEH, veh_id, props)

    if record.class_name:
        class_id = f"class:{slugify(record.class_name)}"
        if not g.has_node(class_id):
            g.add_node(NL.CLASS, class_id, {"name": record.class_name})
        if g.find_edge(EL.IN_CLASS, veh_id, class_id) is None:
            g.add_edge(EL.IN_CLASS, veh_id, class_id)

    year_id = _ensure_year(g, record.test_year)
    if g.find_edge(EL.TESTED_YEAR, veh_id, year_id) is None:
        g.add_edge(EL.TESTED_YEAR, veh_id, year_id)

    for name in SUBDISCIPLINES:
        target = _ensure_subdiscipline(g, name)
        weight = record.percentages[name]
        existing = g.find_edge(EL.RATING, veh_id, target)
        if existing is None:
            g.add_edge(EL.RATING, veh_id, target, weight)
        else:
            existing.weight = weight

    if record.url:
        page_id = _ensure_page(g, record.url)
        if g.find_edge(EL.ON_PAGE, veh_id, page_id) is None:
            g.add_edge(EL.ON_PAGE, veh_id, page_id)
        for link in links:
            if link == record.url:
                continue
            target_page = _ensure_page(g, link)
            if g.find_edge(EL.LINKED_TO, page_id, target_page) is None:
                g.add_edge(EL.LINKED_TO, page_id, target_page)

    return veh


def load_protocols(g: PropertyGraph, urls: Iterable[str]) -> list[Node]:
    """One Prtcl node per protocol URL, linked to its year and subdiscipline."""
    created: list[Node] = []
    for url in urls:
        year, subdiscipline, name = parse_protocol_url(url)
        node_id = f"prtcl:{name}"
        props = {"name": name, "year": year, "subdiscipline": subdiscipline, "url": url}
        if g.has_node(node_id):
            node = g.set_node_props(node_id, props)
        else:
            node = g.add_node(NL.PRTCL, node_id, props)
        year_id = _ensure_year(g, year)
        if g.find_edge(EL.DEFINED_AS, node_id, year_id) is None:
            g.add_edge(EL.DEFINED_AS, node_id, year_id)
        subd_id = _ensure_subdiscipline(g, subdiscipline)
        if g.find_edge(EL.DEFINED_AS, node_id, subd_id) is None:
            g.add_edge(EL.DEFINED_AS, node_id, subd_id)
        created.append(node)
    return created


# ---------------------------------------------------------------------------
# Directory ingestion (the CLI surface)
# ---------------------------------------------------------------------------

FIXTURE_SITE = "https://fixtures.local"

Fetcher = Callable[[str], bytes]


def directory_fetcher(directory: Path) -> tuple[Fetcher, list[str]]:
    """Serve ``<dir>/*.html`` under fixture URLs, as a crawler stand-in."""
    pages = sorted(directory.glob("*.html"))
    by_url = {f"{FIXTURE_SITE}/ratings/{page.name}": page for page in pages}

    def fetch(url: str) -> bytes:
        return by_url[url].read_bytes()

    return fetch, sorted(by_url)


def ingest_ncap_dir(g: PropertyGraph, directory: Path) -> dict[str, int]:
    """Ingest every result page in a directory plus ``protocol_urls.txt``."""
    fetch, urls = directory_fetcher(directory)
    vehicles = 0
    for url in urls:
        record, links = parse_result_page(fetch(url), url)
        load_ncap(g, record, links)
        vehicles += 1

    protocols = 0
    protocol_file = directory / "protocol_urls.txt"
    if protocol_file.exists():
        lines = [
            line.strip()
            for line in protocol_file.read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        ]
        protocols = len(load_protocols(g, lines))
    return {"vehicles": vehicles, "protocols": protocols}
