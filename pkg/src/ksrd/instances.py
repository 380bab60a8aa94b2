"""Instance generation and file formats.

Three sources of graphs are supported:

* unit-disc random geometric graphs (points uniform in the unit square,
  edge iff Euclidean distance <= radius),
* a plain ``n m`` edge-list text format,
* Queen-adjacency graphs extracted from GeoJSON polygon layers.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy.spatial import cKDTree
from shapely import STRtree
from shapely.geometry import MultiPolygon, Polygon

from .graph import Graph, GraphError


class InstanceError(ValueError):
    pass


# ---------------------------------------------------------------------------
# unit-disc graphs


@dataclass(frozen=True)
class UnitDiscParams:
    n: int
    radius: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("n must be >= 1")
        if not 0.0 < self.radius < 1.0:
            raise InstanceError(f"radius must lie in (0, 1), got {self.radius}")


def unit_square_points(n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. uniform points in ``[0, 1)^2``.

    Uses numpy's Philox4x64 counter-based generator so that a given seed
    yields the same instance on every platform and numpy release that
    ships Philox.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.random((n, 2))


def unit_disc_from_points(points: Sequence[Sequence[float]], radius: float) -> Graph:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise InstanceError("need at least one point")
    pairs = cKDTree(pts).query_pairs(radius, output_type="ndarray")
    return Graph.from_edges(len(pts), map(tuple, pairs.tolist()))


def gen_unit_disc(p: UnitDiscParams) -> Graph:
    return unit_disc_from_points(unit_square_points(p.n, p.seed), p.radius)


# ---------------------------------------------------------------------------
# edge-list format


def write_edge_list(g: Graph) -> bytes:
    edges = g.edges()
    lines = [f"{g.n} {len(edges)}"]
    lines += [f"{u} {v}" for u, v in edges]
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_edge_list(text: bytes | str) -> Graph:
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InstanceError("empty edge list")
    header = lines[0].split()
    try:
        n, m = (int(x) for x in header)
    except ValueError:
        raise InstanceError(f"malformed header {lines[0]!r}; expected 'n m'") from None
    if n < 1 or m < 0:
        raise InstanceError(f"malformed header {lines[0]!r}")
    body = lines[1:]
    if len(body) != m:
        raise InstanceError(f"header announces {m} edges, found {len(body)}")
    edges = []
    for ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise InstanceError(f"malformed edge line {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise InstanceError(f"malformed edge line {ln!r}") from None
    try:
        return Graph.from_edges(n, edges)
    except GraphError as e:
        raise InstanceError(str(e)) from None


def load_edge_list(path: str | os.PathLike) -> Graph:
    with open(path, "rb") as fh:
        return parse_edge_list(fh.read())


def save_edge_list(g: Graph, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(write_edge_list(g))


# ---------------------------------------------------------------------------
# GeoJSON / Queen adjacency

Ring = Sequence[Sequence[float]]
# one polygon = exterior ring followed by optional hole rings
PolygonRings = Sequence[Ring]


def _validate_ring(ring: Ring, region_id: Any) -> None:
    pts = [tuple(map(float, p[:2])) for p in ring]
    if len(pts) < 4 or pts[0] != pts[-1]:
        raise InstanceError(f"region {region_id!r}: ring is not closed")
    if len(set(pts)) < 3:
        raise InstanceError(f"region {region_id!r}: ring has fewer than 3 distinct vertices")


def _region_geometry(region_id: Any, polygons: Sequence[PolygonRings]) -> MultiPolygon:
    parts = []
    for rings in polygons:
        if not rings:
            raise InstanceError(f"region {region_id!r}: polygon without rings")
        for ring in rings:
            _validate_ring(ring, region_id)
        shell = [tuple(p[:2]) for p in rings[0]]
        holes = [[tuple(p[:2]) for p in r] for r in rings[1:]]
        poly = Polygon(shell, holes)
        if poly.area <= 0.0:
            raise InstanceError(f"region {region_id!r}: degenerate polygon with zero area")
        parts.append(poly)
    if not parts:
        raise InstanceError(f"region {region_id!r}: no polygons")
    return MultiPolygon(parts)


@dataclass(frozen=True)
class RegionSet:
    """Named regions, each a list of polygons given as coordinate rings."""

    regions: tuple[tuple[Any, tuple[PolygonRings, ...]], ...]

    def __post_init__(self):
        if not self.regions:
            raise InstanceError("need at least one region")
        geoms = tuple(_region_geometry(rid, polys) for rid, polys in self.regions)
        object.__setattr__(self, "_geoms", geoms)

    @property
    def ids(self) -> list[Any]:
        return [rid for rid, _ in self.regions]

    @property
    def geometries(self) -> tuple[MultiPolygon, ...]:
        return self._geoms

    @property
    def centroids(self) -> np.ndarray:
        # area-weighted over all parts of a multipolygon
        return np.array([[g.centroid.x, g.centroid.y] for g in self._geoms])

    @classmethod
    def from_geojson(cls, data: dict | str | os.PathLike, id_property: str | None = None) -> "RegionSet":
        """Read a FeatureCollection of Polygon / MultiPolygon features.

        ``data`` may be a parsed dict, a JSON string or a file path. The
        region id is ``properties[id_property]`` when present, otherwise the
        feature index.
        """
        if not isinstance(data, dict):
            if isinstance(data, str) and data.lstrip().startswith("{"):
                data = json.loads(data)
            else:
                with open(data, encoding="utf-8") as fh:
                    data = json.load(fh)
        if data.get("type") != "FeatureCollection":
            raise InstanceError("expected a GeoJSON FeatureCollection")
        regions = []
        for idx, feat in enumerate(data.get("features", [])):
            geom = feat.get("geometry") or {}
            props = feat.get("properties") or {}
            rid = props.get(id_property, idx) if id_property else idx
            kind, coords = geom.get("type"), geom.get("coordinates")
            if kind == "Polygon":
                polys = (coords,)
            elif kind == "MultiPolygon":
                polys = tuple(coords)
            else:
                raise InstanceError(f"feature {idx}: unsupported geometry type {kind!r}")
            if not isinstance(coords, list):
                raise InstanceError(f"feature {idx}: unparsable coordinates")
            regions.append((rid, polys))
        return cls(tuple(regions))


def geojson_to_graph(regions: RegionSet, tol: float = 1e-9) -> tuple[Graph, list[Any]]:
    """Queen adjacency: two regions are linked when their geometries come
    within ``tol`` of each other (a single shared corner is enough).

    Node ``i`` corresponds to ``regions.regions[i]``; the returned list maps
    nodes to region ids.
    """
    if tol < 0 or math.isnan(tol):
        raise InstanceError("tol must be non-negative")
    geoms = list(regions.geometries)
    tree = STRtree(geoms)
    left, right = tree.query(geoms, predicate="dwithin", distance=tol)
    edges = {(int(a), int(b)) for a, b in zip(left, right) if a < b}
    return Graph.from_edges(len(geoms), sorted(edges)), regions.ids
