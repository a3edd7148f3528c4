"""Triangle meshes: OBJ / ascii-PLY I/O, vertex normals, spatial queries.

Scene coordinates are meters in a left-handed Y-up frame.  Meshes are
indexed (shared vertices): every downstream field — density, visibility,
saliency — is per-vertex.  Vertex order is preserved from file so that
exported per-vertex CSV rows stay aligned with the source.
"""
from __future__ import annotations

import os
import tempfile

import numpy as np
from scipy.spatial import cKDTree


class MeshError(Exception):
    """Malformed mesh file or invalid mesh structure."""


class Mesh:
    """Indexed triangle mesh with lazily derived normals and indexes."""

    __slots__ = ("vertices", "triangles", "_normals", "_normal_flags",
                 "_kdtree", "_bvh")

    def __init__(self, vertices, triangles):
        vertices = np.asarray(vertices, dtype=np.float64)
        triangles = np.asarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshError("vertices must be (n, 3)")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise MeshError("triangles must be (m, 3)")
        if len(vertices) < 1 or len(triangles) < 1:
            raise MeshError("mesh must have at least one vertex and one triangle")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise MeshError("triangle index out of range")
        if not np.all(np.isfinite(vertices)):
            raise MeshError("non-finite vertex coordinate")
        self.vertices = vertices
        self.triangles = triangles
        self._normals = None
        self._normal_flags = None
        self._kdtree = None
        self._bvh = None

    def __len__(self):
        return len(self.vertices)

    @property
    def normals(self):
        if self._normals is None:
            self._normals, self._normal_flags = compute_vertex_normals(
                self.vertices, self.triangles)
        return self._normals

    @property
    def normal_flags(self):
        """True where no usable incident triangle area exists (zero normal)."""
        if self._normal_flags is None:
            _ = self.normals
        return self._normal_flags

    @property
    def kdtree(self) -> cKDTree:
        if self._kdtree is None:
            self._kdtree = cKDTree(self.vertices)
        return self._kdtree

    @property
    def bvh(self):
        if self._bvh is None:
            from .bvh import TriangleBVH
            self._bvh = TriangleBVH(self.vertices, self.triangles)
        return self._bvh

    def transformed(self, scale: float = 1.0, translate=(0.0, 0.0, 0.0)) -> "Mesh":
        if scale <= 0:
            raise MeshError("scale must be positive")
        v = self.vertices * float(scale) + np.asarray(translate, dtype=np.float64)
        return Mesh(v, self.triangles.copy())


def compute_vertex_normals(vertices, triangles):
    """Area-weighted vertex normals.

    Each triangle contributes its geometric normal scaled by area (the
    cross product does both at once).  Zero-area triangles contribute
    nothing.  Vertices with no usable incident area get a zero normal and
    a True entry in the returned flag array.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    triangles = np.asarray(triangles, dtype=np.int64)
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    cross = np.cross(b - a, c - a)  # |cross| = 2 * area
    acc = np.zeros_like(vertices)
    for col in range(3):
        np.add.at(acc, triangles[:, col], cross)
    norms = np.linalg.norm(acc, axis=1)
    flags = norms < 1e-300
    out = np.zeros_like(acc)
    good = ~flags
    out[good] = acc[good] / norms[good, None]
    return out, flags


def bounding_box_diagonal(mesh_or_vertices) -> float:
    vertices = getattr(mesh_or_vertices, "vertices", mesh_or_vertices)
    vertices = np.asarray(vertices, dtype=np.float64)
    if len(vertices) == 0:
        raise MeshError("empty vertex set")
    return float(np.linalg.norm(vertices.max(axis=0) - vertices.min(axis=0)))


class SpatialIndex:
    """k-d organization over mesh vertices; queries match brute force exactly."""

    __slots__ = ("positions", "tree")

    def __init__(self, positions):
        self.positions = np.asarray(positions, dtype=np.float64)
        self.tree = cKDTree(self.positions)


def build_spatial_index(mesh_or_vertices) -> SpatialIndex:
    vertices = getattr(mesh_or_vertices, "vertices", mesh_or_vertices)
    return SpatialIndex(vertices)


def radius_query(index: SpatialIndex, center, r: float):
    """Ids of all vertices within Euclidean distance r of center (sorted)."""
    if r < 0:
        raise MeshError("radius must be nonnegative")
    ids = index.tree.query_ball_point(np.asarray(center, dtype=np.float64), r)
    return np.sort(np.asarray(ids, dtype=np.int64))


def nearest_vertex(index: SpatialIndex, point) -> int:
    _, idx = index.tree.query(np.asarray(point, dtype=np.float64))
    return int(idx)


# ---------------------------------------------------------------------------
# file I/O

def load_mesh(path, fmt: str | None = None, scale: float = 1.0,
              translate=(0.0, 0.0, 0.0)) -> Mesh:
    """Load an OBJ or ascii-PLY mesh, applying the configured rigid placement.

    fmt is inferred from the extension when omitted.  Vertex order is
    preserved; polygonal faces are fan-triangulated.
    """
    path = os.fspath(path)
    if fmt is None:
        ext = os.path.splitext(path)[1].lower()
        if ext == ".obj":
            fmt = "obj"
        elif ext == ".ply":
            fmt = "ply"
        else:
            raise MeshError(f"cannot infer mesh format from {path!r}")
    fmt = fmt.lower()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MeshError(f"cannot read mesh file {path!r}: {exc}") from exc
    if fmt == "obj":
        mesh = _parse_obj(text)
    elif fmt in ("ply", "ply-ascii"):
        mesh = _parse_ply(text)
    else:
        raise MeshError(f"unsupported mesh format {fmt!r}")
    if scale != 1.0 or any(t != 0.0 for t in translate):
        mesh = mesh.transformed(scale, translate)
    return mesh


def _fan(indices):
    for i in range(1, len(indices) - 1):
        yield (indices[0], indices[i], indices[i + 1])


def _parse_obj(text: str) -> Mesh:
    vertices = []
    faces = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise MeshError(f"line {lineno}: malformed vertex line")
            try:
                vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError as exc:
                raise MeshError(f"line {lineno}: malformed vertex line") from exc
        elif tag == "f":
            idx = []
            for token in parts[1:]:
                head = token.split("/")[0]
                try:
                    i = int(head)
                except ValueError as exc:
                    raise MeshError(f"line {lineno}: malformed face line") from exc
                if i < 1:
                    raise MeshError(f"line {lineno}: face index must be >= 1")
                idx.append(i - 1)
            if len(idx) < 3:
                raise MeshError(f"line {lineno}: face needs >= 3 indices")
            faces.extend(_fan(idx))
        # all other line types (vn, vt, usemtl, ...) are ignored
    if not vertices:
        raise MeshError("OBJ file has no vertices")
    if not faces:
        raise MeshError("OBJ file has no faces")
    tri = np.asarray(faces, dtype=np.int64)
    if tri.max() >= len(vertices):
        raise MeshError("face references out-of-range vertex index")
    return Mesh(np.asarray(vertices), tri)


def _parse_ply(text: str) -> Mesh:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MeshError("not a PLY file")
    n_vertex = n_face = None
    vertex_props: list[str] = []
    in_vertex_element = False
    body_start = None
    ascii_fmt = False
    for i, line in enumerate(lines[1:], start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format":
            ascii_fmt = len(parts) >= 2 and parts[1] == "ascii"
        elif parts[0] == "comment":
            continue
        elif parts[0] == "element":
            if parts[1] == "vertex":
                n_vertex = int(parts[2])
                in_vertex_element = True
            else:
                if parts[1] == "face":
                    n_face = int(parts[2])
                in_vertex_element = False
        elif parts[0] == "property":
            if in_vertex_element and parts[1] != "list":
                vertex_props.append(parts[-1])
        elif parts[0] == "end_header":
            body_start = i + 1
            break
    if not ascii_fmt:
        raise MeshError("only ascii PLY is supported")
    if body_start is None or n_vertex is None or n_face is None:
        raise MeshError("incomplete PLY header")
    try:
        ix, iy, iz = (vertex_props.index(k) for k in ("x", "y", "z"))
    except ValueError as exc:
        raise MeshError("PLY vertex element lacks x/y/z properties") from exc
    body = [ln for ln in lines[body_start:] if ln.strip()]
    if len(body) < n_vertex + n_face:
        raise MeshError("PLY body shorter than declared element counts")
    vertices = np.empty((n_vertex, 3), dtype=np.float64)
    for k in range(n_vertex):
        parts = body[k].split()
        if len(parts) < len(vertex_props):
            raise MeshError(f"PLY vertex row {k} too short")
        vertices[k] = (float(parts[ix]), float(parts[iy]), float(parts[iz]))
    faces = []
    for k in range(n_face):
        parts = body[n_vertex + k].split()
        cnt = int(parts[0])
        if len(parts) < 1 + cnt:
            raise MeshError(f"PLY face row {k} too short")
        idx = [int(p) for p in parts[1:1 + cnt]]
        if cnt < 3:
            raise MeshError(f"PLY face row {k} has fewer than 3 indices")
        faces.extend(_fan(idx))
    tri = np.asarray(faces, dtype=np.int64)
    if tri.min() < 0 or tri.max() >= n_vertex:
        raise MeshError("PLY face references out-of-range vertex index")
    return Mesh(vertices, tri)


def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_ply(mesh: Mesh, path, colors=None) -> None:
    """Write ascii PLY; %.17g formatting round-trips float64 exactly.

    colors: optional (n, 3) uint8 array written as red/green/blue.
    """
    n, m = len(mesh.vertices), len(mesh.triangles)
    out = ["ply", "format ascii 1.0",
           f"element vertex {n}",
           "property float64 x", "property float64 y", "property float64 z"]
    if colors is not None:
        colors = np.asarray(colors)
        if colors.shape != (n, 3):
            raise MeshError("colors must be (n, 3)")
        out += ["property uchar red", "property uchar green", "property uchar blue"]
    out += [f"element face {m}", "property list uchar int vertex_indices",
            "end_header"]
    for i in range(n):
        x, y, z = mesh.vertices[i]
        row = f"{x:.17g} {y:.17g} {z:.17g}"
        if colors is not None:
            r, g, b = colors[i]
            row += f" {int(r)} {int(g)} {int(b)}"
        out.append(row)
    for t in mesh.triangles:
        out.append(f"3 {t[0]} {t[1]} {t[2]}")
    _atomic_write(path, "\n".join(out) + "\n")
