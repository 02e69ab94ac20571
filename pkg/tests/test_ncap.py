"""Result-page parsing, protocol URLs, and assessment graph loading."""

from __future__ import annotations

import pytest

from cargraph.demo import NCAP_FIXTURES, PROTOCOL_URLS, render_ncap_page, write_ncap_fixtures
from cargraph.ncap import (
    NcapParseError,
    ingest_ncap_dir,
    load_ncap,
    load_protocols,
    parse_protocol_url,
    parse_result_page,
)
from cargraph.schema import EL, NL, SUBDISCIPLINES

PAGE_URL = "https://fixtures.local/ratings/aldora-estate-2022.html"


def aldora_html() -> str:
    return render_ncap_page("aldora-estate-2022")


def test_parse_fixture_page():
    record, links = parse_result_page(aldora_html(), PAGE_URL)
    assert record.vehicle_name == "Aldora Estate"
    assert record.class_name == "Large Family Car"
    assert record.test_year == 2022
    assert record.stars == 5
    assert set(record.percentages) == set(SUBDISCIPLINES)
    assert record.percentages == {"AOP": 94.0, "COP": 87.0, "VRU": 70.0, "SA": 71.0}
    assert record.spec["Kerb weight"] == "1503 kg"
    assert len(record.media) == 1 and record.media[0].endswith(".mp4")
    # same-site links only, resolved absolute
    assert links == [
        "https://fixtures.local/ratings/brennix-liftback-2021.html",
        "https://fixtures.local/ratings/corvento-city-2022.html",
    ]


def test_parse_page_without_spec_table():
    html = aldora_html()
    start = html.index('<table class="spec-table">')
    end = html.index("</table>", start) + len("</table>")
    record, _ = parse_result_page(html[:start] + html[end:], PAGE_URL)
    assert record.spec == {}


def test_parse_page_missing_rating_table():
    html = aldora_html().replace('class="rating-table"', 'class="other"')
    with pytest.raises(NcapParseError, match="rating-table"):
        parse_result_page(html, PAGE_URL)


def test_parse_malformed_percentage_names_cell():
    html = aldora_html().replace('<td class="percentage">70%</td>', '<td class="percentage">n/a</td>')
    with pytest.raises(NcapParseError) as err:
        parse_result_page(html, PAGE_URL)
    assert "Vulnerable Road Users" in str(err.value)
    assert "td.percentage" in str(err.value)


def test_parse_determinism():
    first = parse_result_page(aldora_html(), PAGE_URL)
    second = parse_result_page(aldora_html(), PAGE_URL)
    assert first == second


# ---------------------------------------------------------------------------
# protocol URLs
# ---------------------------------------------------------------------------

def test_protocol_url_example():
    url = "/for-engineers/protocols/vulnerable-road-user-vru-protection/2020/tb-024.pdf"
    assert parse_protocol_url(url) == (2020, "VRU", "tb-024")


def test_protocol_url_missing_year():
    with pytest.raises(NcapParseError, match="year"):
        parse_protocol_url("/protocols/vulnerable-road-user-vru-protection/tb-024.pdf")


def test_protocol_url_missing_subdiscipline():
    with pytest.raises(NcapParseError, match="subdiscipline"):
        parse_protocol_url("/protocols/something-else/2020/tb-024.pdf")


def test_protocol_url_not_pdf():
    with pytest.raises(NcapParseError, match="pdf"):
        parse_protocol_url("/protocols/safety-assist/2020/tb-024.html")


def test_protocol_url_deterministic():
    url = PROTOCOL_URLS[0]
    assert parse_protocol_url(url) == parse_protocol_url(url)


@pytest.mark.parametrize(
    "url,expected",
    [
        (PROTOCOL_URLS[0], (2020, "VRU", "tb-024")),
        (PROTOCOL_URLS[1], (2021, "AOP", "tb-021")),
        (PROTOCOL_URLS[2], (2021, "COP", "tb-023")),
        (PROTOCOL_URLS[3], (2022, "SA", "tb-029")),
    ],
)
def test_protocol_url_fixture_list(url, expected):
    assert parse_protocol_url(url) == expected


# ---------------------------------------------------------------------------
# graph loading
# ---------------------------------------------------------------------------

def test_load_record_creates_four_ratings(car_graph):
    record, links = parse_result_page(aldora_html(), PAGE_URL)
    veh = load_ncap(car_graph, record, links)
    assert car_graph.degree(veh.id, EL.RATING, "out") == 4
    assert car_graph.node(veh.id).props["on_market"] is True
    assert car_graph.node(veh.id).props["kerb_weight_kg"] == 1503.0
    assert car_graph.node(veh.id).props["ride_height_mm"] == 158.0


def test_two_vehicles_share_class_node(car_graph):
    for slug in ("aldora-estate-2022", "brennix-liftback-2021"):
        url = f"https://fixtures.local/ratings/{slug}.html"
        record, links = parse_result_page(render_ncap_page(slug), url)
        load_ncap(car_graph, record, links)
    classes = [n for n in car_graph.nodes(NL.CLASS) if n.props["name"] == "Large Family Car"]
    assert len(classes) == 1
    assert car_graph.degree(classes[0].id, EL.IN_CLASS, "in") == 2


def test_subdiscipline_singletons(car_graph):
    for slug in NCAP_FIXTURES:
        url = f"https://fixtures.local/ratings/{slug}.html"
        record, links = parse_result_page(render_ncap_page(slug), url)
        load_ncap(car_graph, record, links)
    for label in SUBDISCIPLINES:
        assert len(car_graph.nodes(label)) == 1
    for veh in car_graph.nodes(NL.VEH):
        assert car_graph.degree(veh.id, EL.RATING, "out") in (0, 4)


def test_load_protocols(car_graph):
    nodes = load_protocols(car_graph, PROTOCOL_URLS[:1])
    assert len(nodes) == 1
    prtcl = nodes[0]
    assert prtcl.id == "prtcl:tb-024"
    targets = {e.dst for e in car_graph.incident_edges(prtcl.id, EL.DEFINED_AS, "out")}
    assert targets == {"year:2020", "vru"}


def test_linked_to_multiplicity(car_graph, tmp_path):
    directory = tmp_path / "ncap"
    write_ncap_fixtures(directory)
    ingest_ncap_dir(car_graph, directory)
    ingest_ncap_dir(car_graph, directory)  # idempotent re-ingestion
    seen = set()
    for edge in car_graph.edges(EL.LINKED_TO):
        assert (edge.src, edge.dst) not in seen
        seen.add((edge.src, edge.dst))
    assert len(car_graph.nodes(NL.VEH)) == 3


def test_ingest_dir_summary(car_graph, tmp_path):
    directory = tmp_path / "ncap"
    write_ncap_fixtures(directory)
    summary = ingest_ncap_dir(car_graph, directory)
    assert summary == {"vehicles": 3, "protocols": 4}
