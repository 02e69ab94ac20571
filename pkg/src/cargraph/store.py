"""On-disk store: one JSON-lines graph file plus the blob tree.

The graph file is rewritten atomically (tmp + rename); its content hash is
the snapshot id, so readers can detect that ingestion swapped the data.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

from .blobstore import BlobStore
from .graph import PropertyGraph, create_graph
from .schema import car_schema
from .serialize import export_jsonlines, import_jsonlines

GRAPH_FILE = "graph.jsonl"
EMPTY_SNAPSHOT = "empty"


@dataclass
class Snapshot:
    graph: PropertyGraph
    snapshot_id: str


class GraphStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.graph_path = self.root / GRAPH_FILE
        self.blobs = BlobStore(self.root / "blobs")

    def stamp(self) -> tuple[int, int] | None:
        """Cheap change indicator (mtime_ns, size) of the graph file."""
        try:
            stat = self.graph_path.stat()
        except FileNotFoundError:
            return None
        return (stat.st_mtime_ns, stat.st_size)

    def load(self) -> Snapshot:
        if not self.graph_path.exists():
            return Snapshot(graph=create_graph(car_schema()), snapshot_id=EMPTY_SNAPSHOT)
        data = self.graph_path.read_bytes()
        graph = import_jsonlines(data, car_schema())
        return Snapshot(graph=graph, snapshot_id=hashlib.sha256(data).hexdigest()[:12])

    def save(self, graph: PropertyGraph) -> str:
        data = export_jsonlines(graph)
        tmp = self.graph_path.with_suffix(".jsonl.tmp")
        tmp.write_bytes(data)
        os.replace(tmp, self.graph_path)
        return hashlib.sha256(data).hexdigest()[:12]
