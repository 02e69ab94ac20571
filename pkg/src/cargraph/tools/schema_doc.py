"""Render the schema as the markdown reference committed at docs/schema.md."""

from __future__ import annotations

from ..schema import car_schema


def render() -> str:
    schema = car_schema()
    lines: list[str] = [
        "# Car-graph schema reference",
        "",
        "Generated from `cargraph.schema.car_schema()`; regenerate with",
        "`python3 -m cargraph.tools.schema_doc` if the schema changes.",
        "",
        "## Node labels",
        "",
    ]
    for spec in schema.node_labels:
        lines += [f"### {spec.label}", ""]
        if spec.properties:
            lines += ["| property | kind | required |", "|---|---|---|"]
            for p in spec.properties:
                lines.append(f"| `{p.name}` | {p.kind} | {'yes' if p.required else ''} |")
        else:
            lines.append("_No properties._")
        lines.append("")
    lines += ["## Edge labels", ""]
    for espec in schema.edge_labels:
        lines += [f"### {espec.label}", "", "| src | dst |", "|---|---|"]
        for a, b in espec.endpoints:
            lines.append(f"| {a} | {b} |")
        bits = []
        if espec.weighted:
            if espec.weight_range:
                lo, hi = espec.weight_range
                lo_s = "-inf" if lo is None else f"{lo:g}"
                hi_s = "inf" if hi is None else f"{hi:g}"
                bits.append(f"weighted, weight in [{lo_s}, {hi_s}]")
            else:
                bits.append("weighted")
        else:
            bits.append("unweighted")
        if espec.properties:
            bits.append(
                "properties: " + ", ".join(f"`{p.name}` ({p.kind})" for p in espec.properties)
            )
        lines += ["", "; ".join(bits) + ".", ""]
    return "\n".join(lines)


if __name__ == "__main__":
    print(render(), end="")
