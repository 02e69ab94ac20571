from __future__ import annotations

import pytest

from cargraph.demo import DemoBundle, build_demo_graph
from cargraph.graph import PropertyGraph, create_graph
from cargraph.schema import car_schema


@pytest.fixture()
def car_graph() -> PropertyGraph:
    return create_graph(car_schema())


@pytest.fixture(scope="session")
def demo_bundle(tmp_path_factory: pytest.TempPathFactory) -> DemoBundle:
    """Full fixture corpus, ingested once per test session."""
    workdir = tmp_path_factory.mktemp("demo")
    return build_demo_graph(workdir)


@pytest.fixture()
def demo_graph(demo_bundle: DemoBundle) -> PropertyGraph:
    # tests may mutate; hand out an isolated snapshot
    return demo_bundle.graph.snapshot()
