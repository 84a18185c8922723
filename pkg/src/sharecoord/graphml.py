"""GraphML export of the scored neighbor graph for external layout tools.

Node attributes carry the user token, cluster label, candidate flag, the
maximum incident defined phi, and degree; edges carry cosine and phi.  All
attribute keys are declared with types in the header so generic GraphML
readers (Gephi, networkx, igraph) recover them.  Edges with undefined phi
simply omit that data element.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from .cluster import ClusterAssignment
from .errors import DataError
from .matrix import NeighborGraph
from .network import CandidateSet

_GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"

_NODE_KEYS = [
    ("user", "string"),
    ("cluster", "int"),
    ("is_candidate", "boolean"),
    ("max_phi", "double"),
    ("degree", "int"),
]
_EDGE_KEYS = [
    ("cosine", "double"),
    ("phi", "double"),
]


def max_incident_phi(g: NeighborGraph) -> np.ndarray:
    """Per-node maximum of defined incident phi values; 0.0 when none exist."""
    out = np.zeros(g.n_nodes)
    mask = g.defined_phi_mask()
    for a, b, p in zip(g.u[mask], g.v[mask], g.phi[mask]):
        if p > out[a]:
            out[a] = p
        if p > out[b]:
            out[b] = p
    return out


def export_graphml(
    g: NeighborGraph,
    users: tuple[str, ...],
    path,
    labels: ClusterAssignment | None = None,
    candidates: CandidateSet | None = None,
) -> None:
    """Write the scored graph with node/edge attributes as GraphML."""
    if len(users) != g.n_nodes:
        raise DataError(f"{len(users)} user tokens for a {g.n_nodes}-node graph")
    if labels is not None and len(labels.labels) != g.n_nodes:
        raise DataError("cluster assignment does not match the graph's node set")
    if g.phi is None:
        raise DataError("graph must be phi-scored before export")

    root = ET.Element("graphml", xmlns=_GRAPHML_NS)
    for i, (name, typ) in enumerate(_NODE_KEYS):
        ET.SubElement(
            root, "key", id=f"n{i}", attrib={"for": "node", "attr.name": name, "attr.type": typ}
        )
    for i, (name, typ) in enumerate(_EDGE_KEYS):
        ET.SubElement(
            root, "key", id=f"e{i}", attrib={"for": "edge", "attr.name": name, "attr.type": typ}
        )
    graph = ET.SubElement(root, "graph", id="G", edgedefault="undirected")

    degrees = g.degrees()
    max_phi = max_incident_phi(g)
    member_set = candidates.members if candidates is not None else frozenset()
    for i in range(g.n_nodes):
        node = ET.SubElement(graph, "node", id=users[i])
        values = [
            users[i],
            int(labels.labels[i]) if labels is not None else -1,
            "true" if i in member_set else "false",
            repr(float(max_phi[i])),
            int(degrees[i]),
        ]
        for k, value in enumerate(values):
            data = ET.SubElement(node, "data", key=f"n{k}")
            data.text = str(value)

    for idx in range(g.n_edges):
        a, b = int(g.u[idx]), int(g.v[idx])
        edge = ET.SubElement(graph, "edge", source=users[a], target=users[b])
        cos = ET.SubElement(edge, "data", key="e0")
        cos.text = repr(float(g.cosine[idx]))
        p = g.phi[idx]
        if not np.isnan(p):
            phi_el = ET.SubElement(edge, "data", key="e1")
            phi_el.text = repr(float(p))

    tree = ET.ElementTree(root)
    ET.indent(tree)
    try:
        tree.write(path, encoding="utf-8", xml_declaration=True)
    except OSError as exc:
        raise DataError(f"cannot write GraphML to {path}: {exc}") from exc
