"""Record live query-service responses as JSON fixtures for the UI tests.

Run from the repository root: python3 frontend/scripts/record_fixtures.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from cargraph.demo import build_demo_store
from cargraph.service import create_app

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        store = build_demo_store(Path(tmp))
        with TestClient(create_app(store.root)) as client:

            def dump(name: str, path: str, **params: str) -> None:
                response = client.get(path, params=params)
                response.raise_for_status()
                (OUT / f"{name}.json").write_text(
                    json.dumps(response.json(), indent=1, sort_keys=True)
                )
                print(f"{name} <- {path} {params or ''}")

            dump("vehicles", "/vehicles")
            dump(
                "benchmark",
                "/vehicles",
                **{
                    "class": "Large Family Car",
                    "subdiscipline": "VRU",
                    "spec_key": "kerb_weight_kg",
                    "spec_op": "le",
                    "spec_value": "1600",
                },
            )
            dump("devtree", "/vehicles/veh:dev-aldora/devtree")
            dump("sims", "/sims")
            dump("sims_filtered", "/sims", model="model:m1")
            for sim in ("front_v1", "front_v2", "front_v3", "pedestrian_v1"):
                dump(f"sim_{sim}", f"/sims/sim:{sim}")


if __name__ == "__main__":
    main()
