"""Point cloud file ingestion and serialization.

Supported formats:
  * PLY, ascii or binary_little_endian, float32/float64 positions, an
    optional scalar ``intensity`` property and/or uchar ``red,green,blue``
    (mapped to [0, 1]; intensity defaults to the channel mean). Unknown
    vertex properties are skipped.
  * Whitespace-separated ``x y z intensity`` text (.xyz/.xyzi/.txt), with
    '#' comment lines.

Integer intensity/colour properties are divided by their type maximum; float
intensity outside [0, 1] is min-max normalised so the cloud invariant holds
for raw reflectivity scales.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .cloud import PointCloud

_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}
_INT_MAX = {"u1": 255.0, "u2": 65535.0, "u4": 4294967295.0,
            "i1": 127.0, "i2": 32767.0, "i4": 2147483647.0}


class PointCloudFormatError(ValueError):
    """Malformed or unsupported point-cloud file."""


def read_point_cloud(path) -> PointCloud:
    """Load a cloud, inferring the format from the file extension."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    suffix = path.suffix.lower()
    if suffix == ".ply":
        return _read_ply(path)
    if suffix in (".xyz", ".xyzi", ".txt"):
        return _read_xyzi(path)
    raise PointCloudFormatError(f"unsupported extension {suffix!r} for {path}")


def write_point_cloud(cloud: PointCloud, path, format: str = "auto") -> None:
    """Write a cloud; ``format`` is one of auto, ply-binary, ply-ascii, xyzi.

    PLY output stores little-endian float32 positions and intensity, plus
    uchar colour channels when present. Output bytes are deterministic.
    """
    path = Path(path)
    if format == "auto":
        suffix = path.suffix.lower()
        if suffix == ".ply":
            format = "ply-binary"
        elif suffix in (".xyz", ".xyzi", ".txt"):
            format = "xyzi"
        else:
            raise PointCloudFormatError(f"cannot infer format for {path}")
    try:
        if format == "ply-binary":
            _write_ply(cloud, path, binary=True)
        elif format == "ply-ascii":
            _write_ply(cloud, path, binary=False)
        elif format == "xyzi":
            _write_xyzi(cloud, path)
        else:
            raise PointCloudFormatError(f"unknown format {format!r}")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


# --- PLY ---------------------------------------------------------------


def _read_ply(path: Path) -> PointCloud:
    raw = path.read_bytes()
    end = raw.find(b"end_header")
    if not raw.startswith(b"ply") or end < 0:
        raise PointCloudFormatError(f"{path}: malformed PLY header")
    end = raw.index(b"\n", end) + 1
    header_lines = raw[:end].decode("ascii", errors="replace").splitlines()

    fmt = None
    elements = []  # (name, count, [(prop_name, dtype_code)])
    for line in header_lines[1:]:
        tokens = line.split()
        if not tokens or tokens[0] in ("comment", "obj_info"):
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] not in ("ascii", "binary_little_endian"):
                raise PointCloudFormatError(f"{path}: unsupported PLY format {line!r}")
            fmt = tokens[1]
        elif tokens[0] == "element":
            if len(tokens) != 3 or not tokens[2].isdigit():
                raise PointCloudFormatError(f"{path}: malformed element line {line!r}")
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise PointCloudFormatError(f"{path}: property before any element")
            if tokens[1] == "list":
                elements[-1][2].append((tokens[-1], "list"))
            else:
                if len(tokens) != 3 or tokens[1] not in _PLY_TYPES:
                    raise PointCloudFormatError(f"{path}: unsupported property {line!r}")
                elements[-1][2].append((tokens[2], _PLY_TYPES[tokens[1]]))
        elif tokens[0] == "end_header":
            break
    if fmt is None:
        raise PointCloudFormatError(f"{path}: missing format line")

    vertex_index = next((i for i, e in enumerate(elements) if e[0] == "vertex"), None)
    if vertex_index is None:
        raise PointCloudFormatError(f"{path}: no vertex element")
    for name, _, props in elements[:vertex_index]:
        if any(code == "list" for _, code in props):
            raise PointCloudFormatError(
                f"{path}: cannot skip list-typed element {name!r} before vertices"
            )
    _, count, props = elements[vertex_index]
    if any(code == "list" for _, code in props):
        raise PointCloudFormatError(f"{path}: list properties on vertices are unsupported")
    names = [name for name, _ in props]
    for needed in ("x", "y", "z"):
        if needed not in names:
            raise PointCloudFormatError(f"{path}: vertex element lacks property {needed!r}")

    if fmt == "binary_little_endian":
        table = _read_ply_binary(path, raw, end, elements, vertex_index, count, props)
    else:
        table = _read_ply_ascii(path, raw, end, len(header_lines), elements, vertex_index, count, props)
    return _cloud_from_table(table, dict(props))


def _read_ply_binary(path, raw, offset, elements, vertex_index, count, props):
    for _, n, pre_props in elements[:vertex_index]:
        offset += n * sum(np.dtype("<" + code).itemsize for _, code in pre_props)
    dtype = np.dtype([(name, "<" + code) for name, code in props])
    need = count * dtype.itemsize
    available = len(raw) - offset
    if available < need:
        raise PointCloudFormatError(
            f"{path}: truncated binary payload at byte offset {len(raw)} "
            f"(expected {need} payload bytes from offset {offset}, found {available})"
        )
    rows = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
    return {name: rows[name] for name, _ in props}


def _read_ply_ascii(path, raw, offset, header_line_count, elements, vertex_index, count, props):
    body = raw[offset:].decode("ascii", errors="replace").splitlines()
    skip = sum(n for _, n, _ in elements[:vertex_index])
    lines = body[skip:]
    if len(lines) < count:
        raise PointCloudFormatError(
            f"{path}: truncated ascii payload: expected {count} vertex lines, found {len(lines)}"
        )
    columns = {name: np.empty(count) for name, _ in props}
    for i in range(count):
        file_line = header_line_count + skip + i + 1
        tokens = lines[i].split()
        if len(tokens) != len(props):
            raise PointCloudFormatError(
                f"{path}: line {file_line}: expected {len(props)} fields, found {len(tokens)}"
            )
        for token, (name, _) in zip(tokens, props):
            try:
                columns[name][i] = float(token)
            except ValueError:
                raise PointCloudFormatError(
                    f"{path}: line {file_line}: non-numeric field {token!r}"
                ) from None
    return columns


def _normalize_scalar(values, code):
    values = np.asarray(values, dtype=np.float64)
    if code in _INT_MAX:
        return np.clip(values / _INT_MAX[code], 0.0, 1.0)
    if len(values) and (values.min() < 0.0 or values.max() > 1.0):
        lo, hi = float(values.min()), float(values.max())
        return (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
    return values


def _cloud_from_table(table, codes) -> PointCloud:
    points = np.column_stack([
        np.asarray(table["x"], dtype=np.float64),
        np.asarray(table["y"], dtype=np.float64),
        np.asarray(table["z"], dtype=np.float64),
    ])
    intensity = None
    colour = None
    if "intensity" in table:
        intensity = _normalize_scalar(table["intensity"], codes.get("intensity", ""))
    if all(c in table for c in ("red", "green", "blue")):
        colour = np.column_stack([
            _normalize_scalar(table[c], codes.get(c, "u1")) for c in ("red", "green", "blue")
        ])
        if intensity is None:
            intensity = colour.mean(axis=1)
    return PointCloud(points=points, intensity=intensity, colour=colour)


def _write_ply(cloud: PointCloud, path: Path, binary: bool) -> None:
    fields = [("x", "f4"), ("y", "f4"), ("z", "f4")]
    if cloud.intensity is not None:
        fields.append(("intensity", "f4"))
    if cloud.colour is not None:
        fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]

    header = ["ply"]
    header.append("format binary_little_endian 1.0" if binary else "format ascii 1.0")
    header.append(f"element vertex {len(cloud)}")
    type_names = {"f4": "float", "u1": "uchar"}
    header += [f"property {type_names[code]} {name}" for name, code in fields]
    header.append("end_header")

    rows = np.zeros(len(cloud), dtype=[(name, "<" + code) for name, code in fields])
    rows["x"] = cloud.points[:, 0].astype(np.float32)
    rows["y"] = cloud.points[:, 1].astype(np.float32)
    rows["z"] = cloud.points[:, 2].astype(np.float32)
    if cloud.intensity is not None:
        rows["intensity"] = cloud.intensity.astype(np.float32)
    if cloud.colour is not None:
        rgb = np.rint(cloud.colour * 255.0).astype(np.uint8)
        rows["red"], rows["green"], rows["blue"] = rgb[:, 0], rgb[:, 1], rgb[:, 2]

    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fh.write(rows.tobytes())
        else:
            for row in rows:
                cells = []
                for name, code in fields:
                    value = row[name]
                    cells.append(str(int(value)) if code == "u1" else format(float(value), ".9g"))
                fh.write((" ".join(cells) + "\n").encode("ascii"))


# --- XYZI text ---------------------------------------------------------


def _read_xyzi(path: Path) -> PointCloud:
    points = []
    intensity = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            tokens = stripped.split()
            if len(tokens) != 4:
                raise PointCloudFormatError(
                    f"{path}: line {line_no}: expected 'x y z intensity', found {len(tokens)} fields"
                )
            try:
                values = [float(t) for t in tokens]
            except ValueError:
                bad = next(t for t in tokens if not _is_number(t))
                raise PointCloudFormatError(
                    f"{path}: line {line_no}: non-numeric field {bad!r}"
                ) from None
            points.append(values[:3])
            intensity.append(values[3])
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    intensity = _normalize_scalar(np.asarray(intensity, dtype=np.float64), "")
    colour = np.repeat(intensity[:, None], 3, axis=1) if len(intensity) else None
    return PointCloud(points=points, intensity=intensity if len(intensity) else None, colour=colour)


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _write_xyzi(cloud: PointCloud, path: Path) -> None:
    if cloud.intensity is None:
        raise PointCloudFormatError("XYZI output requires intensity")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for p, i in zip(cloud.points.astype(np.float32), cloud.intensity.astype(np.float32)):
            fh.write(
                f"{format(float(p[0]), '.9g')} {format(float(p[1]), '.9g')} "
                f"{format(float(p[2]), '.9g')} {format(float(i), '.9g')}\n"
            )
