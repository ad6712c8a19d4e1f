"""Linear blendshape face model with a deterministic software rasterizer.

The synthetic model is a half-ellipsoid head with a nose bump, a mouth vertex
region, and 30 orthonormal smooth displacement fields as expression basis.
Rendering is orthographic with a z-buffer and flat Lambertian shading; no
anti-aliasing, so identical inputs give bit-identical frames.

Model file layout (little-endian):
    magic "DFM3" | u32 version=1 | u32 N
    f32 mean (3N) | f32 basis (3N x 30, row-major)
    u32 n_triangles | u32 indices (3 per triangle)
    u32 n_mouth | u32 mouth vertex indices

Frames are written as binary PPM (P6); masks as PGM (P5) with background=0,
face=128, mouth=255.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .dataset import EXPR_DIM

_MAGIC = b"DFM3"
_VERSION = 1

CLEAR_COLOR = (0, 0, 0)
_BASE_COLOR = np.array([230.0, 180.0, 160.0])
_LIGHT_DIR = np.array([0.3, 0.4, 1.0]) / np.linalg.norm([0.3, 0.4, 1.0])
_AMBIENT = 0.25

FACE_BIT = 1
MOUTH_BIT = 2


class Face3dError(ValueError):
    pass


@dataclass
class BlendshapeModel:
    mean: np.ndarray  # (3N,)
    basis: np.ndarray  # (3N, 30)
    triangles: np.ndarray  # (T, 3) int
    mouth_vertices: np.ndarray  # sorted int indices
    n_vertices: int


@dataclass
class Frame:
    width: int
    height: int
    rgb: np.ndarray  # (h, w, 3) uint8


@dataclass
class MaskFrame:
    width: int
    height: int
    bits: np.ndarray  # (h, w) uint8, FACE_BIT | MOUTH_BIT

    @property
    def face(self) -> np.ndarray:
        return (self.bits & FACE_BIT) != 0

    @property
    def mouth(self) -> np.ndarray:
        return (self.bits & MOUTH_BIT) != 0


def make_synthetic_model(seed: int, n_vertices: int = 2500) -> BlendshapeModel:
    """Deterministic half-ellipsoid face mesh with an orthonormal basis.

    Basis columns are random low-frequency displacement fields, weighted
    toward the mouth region (expressions deform the mouth most) and
    Gram-Schmidt orthonormalized as 3N-vectors.
    """
    if n_vertices < 100:
        raise Face3dError("need at least 100 vertices")
    cols = int(round(np.sqrt(n_vertices)))
    rows = int(np.ceil(n_vertices / cols))
    n = rows * cols
    u = np.repeat(np.linspace(0.0, 1.0, rows), cols)  # top -> bottom
    v = np.tile(np.linspace(0.0, 1.0, cols), rows)  # left -> right
    theta = (0.15 + 0.70 * u) * np.pi  # polar angle from +y
    phi = (v - 0.5) * 0.90 * np.pi  # azimuth, 0 = straight ahead
    ax, ay, az = 0.75, 0.95, 0.70
    x = ax * np.sin(theta) * np.sin(phi)
    y = ay * np.cos(theta)
    z = az * np.sin(theta) * np.cos(phi)
    # nose bump
    z += 0.18 * np.exp(-(((u - 0.52) / 0.08) ** 2 + ((v - 0.5) / 0.06) ** 2))
    mean = np.stack([x, y, z], axis=1).reshape(-1)

    mouth = np.where((np.abs(u - 0.72) < 0.06) & (np.abs(v - 0.5) < 0.16))[0]

    tris = []
    for r in range(rows - 1):
        for c in range(cols - 1):
            i0 = r * cols + c
            i1 = i0 + 1
            i2 = i0 + cols
            i3 = i2 + 1
            tris.append((i0, i2, i1))
            tris.append((i1, i2, i3))
    triangles = np.array(tris, dtype=np.uint32)

    rng = np.random.default_rng(seed)
    # mouth-weighted smooth fields: 2 sinusoids per xyz component
    weight = 1.0 + 3.0 * np.exp(-(((u - 0.72) / 0.12) ** 2 + ((v - 0.5) / 0.22) ** 2))
    fields = np.empty((3 * n, EXPR_DIM))
    for j in range(EXPR_DIM):
        comp = np.zeros((n, 3))
        for axis in range(3):
            for _ in range(2):
                fu, fv = rng.uniform(0.5, 3.0, 2)
                pu, pv = rng.uniform(0.0, 2.0 * np.pi, 2)
                amp = rng.uniform(0.3, 1.0)
                comp[:, axis] += amp * np.sin(fu * np.pi * u + pu) * np.sin(
                    fv * np.pi * v + pv
                )
        fields[:, j] = (comp * weight[:, None]).reshape(-1)
    # Gram-Schmidt (twice, for numerical orthogonality)
    for j in range(EXPR_DIM):
        for _ in range(2):
            for i in range(j):
                fields[:, j] -= (fields[:, i] @ fields[:, j]) * fields[:, i]
        fields[:, j] /= np.linalg.norm(fields[:, j])
    return BlendshapeModel(
        mean=mean,
        basis=fields,
        triangles=triangles,
        mouth_vertices=np.sort(mouth).astype(np.uint32),
        n_vertices=n,
    )


def eval_mesh(m: BlendshapeModel, e: np.ndarray) -> np.ndarray:
    """vertices = mean + basis @ e, returned as (N, 3)."""
    e = np.asarray(e, dtype=np.float64)
    if e.shape != (EXPR_DIM,):
        raise Face3dError(f"expected {EXPR_DIM} coefficients, got {e.shape}")
    return (m.mean + m.basis @ e).reshape(-1, 3)


def _project(vertices: np.ndarray, w: int, h: int) -> np.ndarray:
    """Orthographic map of model [-1,1]^2 to pixel coords; returns (N, 3) sx, sy, z."""
    sx = (vertices[:, 0] + 1.0) * 0.5 * (w - 1)
    sy = (1.0 - vertices[:, 1]) * 0.5 * (h - 1)
    return np.stack([sx, sy, vertices[:, 2]], axis=1)


def _fragments(pts: np.ndarray, triangles: np.ndarray, w: int, h: int):
    """Candidate pixels under every triangle, vectorized over triangles.

    A pixel belongs to a triangle iff its center lies inside (inclusive
    edges).  Returns (tri_idx, ys, xs, z) flat arrays, possibly empty.
    """
    tri = triangles.astype(np.int64)
    p0, p1, p2 = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    area = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (
        p1[:, 1] - p0[:, 1]
    ) * (p2[:, 0] - p0[:, 0])
    xs_min = np.minimum(np.minimum(p0[:, 0], p1[:, 0]), p2[:, 0])
    xs_max = np.maximum(np.maximum(p0[:, 0], p1[:, 0]), p2[:, 0])
    ys_min = np.minimum(np.minimum(p0[:, 1], p1[:, 1]), p2[:, 1])
    ys_max = np.maximum(np.maximum(p0[:, 1], p1[:, 1]), p2[:, 1])
    x_lo = np.maximum(np.ceil(xs_min), 0).astype(np.int64)
    x_hi = np.minimum(np.floor(xs_max), w - 1).astype(np.int64)
    y_lo = np.maximum(np.ceil(ys_min), 0).astype(np.int64)
    y_hi = np.minimum(np.floor(ys_max), h - 1).astype(np.int64)
    valid = (area != 0.0) & (x_lo <= x_hi) & (y_lo <= y_hi)
    if not valid.any():
        empty = np.zeros(0, np.int64)
        return empty, empty, empty, np.zeros(0)
    idx = np.nonzero(valid)[0]
    bw = int((x_hi[idx] - x_lo[idx]).max()) + 1
    bh = int((y_hi[idx] - y_lo[idx]).max()) + 1
    xs = x_lo[idx, None, None] + np.arange(bw)[None, None, :]
    ys = y_lo[idx, None, None] + np.arange(bh)[None, :, None]
    in_bbox = (xs <= x_hi[idx, None, None]) & (ys <= y_hi[idx, None, None])
    xf = xs.astype(np.float64)
    yf = ys.astype(np.float64)
    a0 = p0[idx, None, None, :]
    a1 = p1[idx, None, None, :]
    a2 = p2[idx, None, None, :]
    w0 = (a1[..., 0] - a0[..., 0]) * (yf - a0[..., 1]) - (
        a1[..., 1] - a0[..., 1]
    ) * (xf - a0[..., 0])
    w1 = (a2[..., 0] - a1[..., 0]) * (yf - a1[..., 1]) - (
        a2[..., 1] - a1[..., 1]
    ) * (xf - a1[..., 0])
    w2 = (a0[..., 0] - a2[..., 0]) * (yf - a2[..., 1]) - (
        a0[..., 1] - a2[..., 1]
    ) * (xf - a2[..., 0])
    ar = area[idx, None, None]
    pos = ar > 0
    inside = in_bbox & np.where(
        pos, (w0 >= 0) & (w1 >= 0) & (w2 >= 0), (w0 <= 0) & (w1 <= 0) & (w2 <= 0)
    )
    ti, iy, ix = np.nonzero(inside)
    b1 = w2[ti, iy, ix] / area[idx[ti]]
    b2 = w0[ti, iy, ix] / area[idx[ti]]
    b0 = 1.0 - b1 - b2
    z = (
        b0 * p0[idx[ti], 2] + b1 * p1[idx[ti], 2] + b2 * p2[idx[ti], 2]
    )
    return idx[ti], y_lo[idx[ti]] + iy, x_lo[idx[ti]] + ix, z


def render_preview(
    m: BlendshapeModel, vertices: np.ndarray, w: int = 256, h: int = 256
) -> Frame:
    """Z-buffered flat-shaded orthographic render; all-background frames allowed."""
    if w < 16 or h < 16:
        raise Face3dError("frame must be at least 16x16")
    pts = _project(vertices, w, h)
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[:, :] = CLEAR_COLOR
    tri_idx, ys, xs, z = _fragments(pts, m.triangles, w, h)
    if len(tri_idx) == 0:
        return Frame(w, h, rgb)
    tri_v = vertices[m.triangles.astype(np.int64)]
    normals = np.cross(tri_v[:, 1] - tri_v[:, 0], tri_v[:, 2] - tri_v[:, 0])
    norms = np.linalg.norm(normals, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    normals = normals / safe[:, None]
    # shade both sides with the viewer-facing normal
    normals[normals[:, 2] < 0] *= -1.0
    shade = _AMBIENT + (1.0 - _AMBIENT) * np.maximum(0.0, normals @ _LIGHT_DIR)
    colors = np.clip(_BASE_COLOR[None, :] * shade[:, None], 0, 255).astype(np.uint8)
    # depth resolve: sort fragments by z ascending (stable), later writes win;
    # ties resolve to the later triangle index, deterministically
    order = np.argsort(z, kind="stable")
    ys, xs, tri_idx = ys[order], xs[order], tri_idx[order]
    rgb[ys, xs] = colors[tri_idx]
    return Frame(w, h, rgb)


def rasterize_masks(
    m: BlendshapeModel, vertices: np.ndarray, w: int = 256, h: int = 256
) -> MaskFrame:
    """Face mask = silhouette of all triangles; mouth mask = triangles whose
    three vertices are mouth vertices.  Mouth is a subset of face by
    construction."""
    if w < 16 or h < 16:
        raise Face3dError("frame must be at least 16x16")
    pts = _project(vertices, w, h)
    bits = np.zeros((h, w), dtype=np.uint8)
    tri_idx, ys, xs, _ = _fragments(pts, m.triangles, w, h)
    if len(tri_idx) == 0:
        return MaskFrame(w, h, bits)
    mouth_mask = np.zeros(m.n_vertices, dtype=bool)
    mouth_mask[m.mouth_vertices.astype(np.int64)] = True
    tri = m.triangles.astype(np.int64)
    tri_is_mouth = mouth_mask[tri].all(axis=1)
    np.bitwise_or.at(bits, (ys, xs), FACE_BIT)
    sel = tri_is_mouth[tri_idx]
    np.bitwise_or.at(bits, (ys[sel], xs[sel]), MOUTH_BIT)
    return MaskFrame(w, h, bits)


# ---------------------------------------------------------------------------
# File I/O


def save_model(m: BlendshapeModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, m.n_vertices))
        fh.write(m.mean.astype("<f4").tobytes())
        fh.write(m.basis.astype("<f4").tobytes())
        fh.write(struct.pack("<I", len(m.triangles)))
        fh.write(m.triangles.astype("<u4").tobytes())
        fh.write(struct.pack("<I", len(m.mouth_vertices)))
        fh.write(m.mouth_vertices.astype("<u4").tobytes())


def load_model(path) -> BlendshapeModel:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise Face3dError("bad magic bytes: not a blendshape model file")
    off = 4
    version, n = struct.unpack_from("<II", data, off)
    off += 8
    if version != _VERSION:
        raise Face3dError(f"unsupported model version {version}")
    mean = np.frombuffer(data, "<f4", 3 * n, off).astype(np.float64)
    off += 12 * n
    basis = (
        np.frombuffer(data, "<f4", 3 * n * EXPR_DIM, off)
        .reshape(3 * n, EXPR_DIM)
        .astype(np.float64)
    )
    off += 4 * 3 * n * EXPR_DIM
    (nt,) = struct.unpack_from("<I", data, off)
    off += 4
    triangles = np.frombuffer(data, "<u4", 3 * nt, off).reshape(nt, 3).copy()
    off += 12 * nt
    (nm,) = struct.unpack_from("<I", data, off)
    off += 4
    mouth = np.frombuffer(data, "<u4", nm, off).copy()
    if np.any(triangles >= n) or np.any(mouth >= n):
        raise Face3dError("vertex index out of range in model file")
    return BlendshapeModel(mean, basis, triangles, mouth, n)


def write_ppm(frame: Frame, path) -> None:
    with open(path, "wb") as fh:
        fh.write(ppm_bytes(frame))


def ppm_bytes(frame: Frame) -> bytes:
    header = f"P6\n{frame.width} {frame.height}\n255\n".encode()
    return header + frame.rgb.tobytes()


def read_ppm(path) -> Frame:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_ppm(data)


def parse_ppm(data: bytes) -> Frame:
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise Face3dError("not a binary PPM (P6) file")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise Face3dError("only 8-bit PPM supported")
    pixels = parts[4][: 3 * w * h]
    if len(pixels) != 3 * w * h:
        raise Face3dError("truncated PPM pixel data")
    rgb = np.frombuffer(pixels, np.uint8).reshape(h, w, 3).copy()
    return Frame(w, h, rgb)


def write_pgm_mask(mask: MaskFrame, path) -> None:
    gray = np.zeros((mask.height, mask.width), dtype=np.uint8)
    gray[mask.face] = 128
    gray[mask.mouth] = 255
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode()
    with open(path, "wb") as fh:
        fh.write(header + gray.tobytes())
