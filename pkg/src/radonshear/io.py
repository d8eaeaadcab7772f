"""Binary and text formats.

RSIM1 (images)
    ``b"RSIM1"``, u32 nx, u32 ny, f64 dx, then ``ny * nx`` f64 values row by
    row (x fastest).  All little endian.

RSSG1 (sinograms)
    ``b"RSSG1"``, u32 n_v, u32 n_t, f64 Vmax, f64 t_range, u8 stage, then the
    values one v-column (projection) after another, each column holding its
    ``n_t`` samples contiguously.  ``t_range`` is ``-t_grid[0]``; slopes are
    ``linspace(-Vmax, Vmax, n_v)`` and offsets ``(k - n_t/2) * 2 t_range / n_t``.
    Stage byte: 0 raw, 1 riesz-applied; bit 0x80 marks interleaved complex
    values (re, im) instead of f64.

RSVC1 (coefficient volumes)
    ``b"RSVC1"``, u32 nb_x, nb_y, n_s, n_a, f64 arrays b_x[nb_x], b_y[nb_y],
    a[n_a], s[n_a * n_s], weights[n_a * n_s], then interleaved complex values
    in (a, s, y, x) order.  ``n_s`` is the largest shear count over scales;
    missing shears are NaN in ``s`` and ``weights`` and zero in the values.
    A JSON sidecar ``<path>.json`` records the mother id, gamma, lattice and
    C_psi.

PGM
    Binary P5 with maxval 255, mapped to [0, 1] and zero padded (centered) to
    power-of-two dimensions.
"""

from __future__ import annotations

import csv
import json
import re
import struct
from pathlib import Path

import numpy as np

from .errors import ParseError, UnsupportedFormatError
from .radon2d import RAW, RIESZ, Image2D, Sinogram
from .shearlet2d import CoefficientVolume, Lattice
from .signal1d import centered_grid

RSIM_MAGIC = b"RSIM1"
RSSG_MAGIC = b"RSSG1"
RSVC_MAGIC = b"RSVC1"
_STAGE_CODES = {RAW: 0, RIESZ: 1}
_COMPLEX_BIT = 0x80


class _Reader:
    """Sequential little-endian reader that reports byte offsets on failure."""

    def __init__(self, data: bytes, what: str):
        self.data = data
        self.pos = 0
        self.what = what

    def take(self, n: int, label: str) -> bytes:
        if self.pos + n > len(self.data):
            raise ParseError(f"{self.what}: truncated while reading {label}", offset=len(self.data))
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def magic(self, expected: bytes) -> None:
        got = self.data[: len(expected)]
        if got != expected:
            raise ParseError(f"{self.what}: bad magic {got!r}, expected {expected!r}", offset=0)
        self.pos = len(expected)

    def u32(self, label: str) -> int:
        return struct.unpack("<I", self.take(4, label))[0]

    def u8(self, label: str) -> int:
        return self.take(1, label)[0]

    def f64(self, label: str) -> float:
        return struct.unpack("<d", self.take(8, label))[0]

    def f64_array(self, count: int, label: str) -> np.ndarray:
        return np.frombuffer(self.take(8 * count, label), dtype="<f8").astype(float)

    def finish(self) -> None:
        if self.pos != len(self.data):
            raise ParseError(f"{self.what}: {len(self.data) - self.pos} trailing bytes", offset=self.pos)


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


# -- images ------------------------------------------------------------------------


def write_rsim(img: Image2D, path) -> None:
    if np.iscomplexobj(img.values):
        raise UnsupportedFormatError("RSIM1 stores real images only", module="cli")
    head = RSIM_MAGIC + struct.pack("<IId", img.nx, img.ny, img.dx)
    Path(path).write_bytes(head + np.ascontiguousarray(img.values, dtype="<f8").tobytes())


def read_rsim(path) -> Image2D:
    r = _Reader(_read_bytes(path), "RSIM1")
    r.magic(RSIM_MAGIC)
    nx, ny = r.u32("nx"), r.u32("ny")
    dx = r.f64("dx")
    vals = r.f64_array(nx * ny, "values").reshape(ny, nx)
    r.finish()
    return pad_to_pow2(vals, dx)


_PGM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def read_pgm(path, dx: float = 1.0 / 64.0) -> Image2D:
    data = _read_bytes(path)
    if not data:
        raise ParseError("PGM: empty file", offset=0)
    if data[:2] != b"P5":
        raise ParseError(f"PGM: bad magic {data[:2]!r}, expected b'P5'", offset=0)
    pos = 2
    fields = []
    for label in ("width", "height", "maxval"):
        m = _PGM_TOKEN.match(data, pos)
        if not m:
            raise ParseError(f"PGM: missing {label}", offset=pos)
        try:
            fields.append(int(m.group(1)))
        except ValueError:
            raise ParseError(f"PGM: {label} is not an integer", offset=m.start(1)) from None
        pos = m.end(1)
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedFormatError(f"PGM maxval {maxval} unsupported (only 255)", module="cli")
    if width < 1 or height < 1:
        raise ParseError("PGM: empty raster", offset=pos)
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ParseError("PGM: expected a single whitespace after maxval", offset=pos)
    pos += 1
    need = width * height
    if len(data) - pos < need:
        raise ParseError(f"PGM: raster truncated ({len(data) - pos} of {need} bytes)", offset=len(data))
    raster = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos).reshape(height, width)
    return pad_to_pow2(raster.astype(float) / 255.0, dx)


def write_pgm(values: np.ndarray, path) -> None:
    vals = np.clip(np.rint(np.asarray(values) * 255.0), 0, 255).astype(np.uint8)
    h, w = vals.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + vals.tobytes())


def pad_to_pow2(values: np.ndarray, dx: float) -> Image2D:
    """Zero pad to power-of-two dims keeping the original centered."""
    ny, nx = values.shape
    ty = 1 << (ny - 1).bit_length()
    tx = 1 << (nx - 1).bit_length()
    if (ty, tx) == (ny, nx):
        return Image2D(values, dx)
    out = np.zeros((ty, tx), dtype=values.dtype)
    y0, x0 = (ty - ny) // 2, (tx - nx) // 2
    out[y0 : y0 + ny, x0 : x0 + nx] = values
    return Image2D(out, dx)


def sniff_format(path) -> str:
    """Guess a format from the file's leading bytes (falls back to the suffix)."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(5)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    if head.startswith(RSIM_MAGIC):
        return "f64raw"
    if head.startswith(RSSG_MAGIC):
        return "rssg"
    if head.startswith(b"P5"):
        return "pgm"
    suffix = Path(path).suffix.lower()
    return {".pgm": "pgm", ".rsim": "f64raw", ".rssg": "rssg"}.get(suffix, "unknown")


def ingest_image(path, fmt: str = "auto", dx: float = 1.0 / 64.0) -> Image2D:
    fmt = sniff_format(path) if fmt == "auto" else fmt
    if fmt == "pgm":
        return read_pgm(path, dx)
    if fmt == "f64raw":
        return read_rsim(path)
    if fmt == "unknown":
        data = _read_bytes(path)
        raise ParseError("unrecognized image file" + (" (empty)" if not data else ""), offset=0)
    raise UnsupportedFormatError(f"image format {fmt!r} unsupported (pgm, f64raw)", module="cli")


# -- sinograms --------------------------------------------------------------------------


def write_rssg(sino: Sinogram, path) -> None:
    is_complex = np.iscomplexobj(sino.values)
    stage = _STAGE_CODES[sino.stage] | (_COMPLEX_BIT if is_complex else 0)
    head = RSSG_MAGIC + struct.pack("<IIddB", sino.n_v, sino.n_t, sino.vmax, -float(sino.t_grid[0]), stage)
    vals = np.ascontiguousarray(sino.values, dtype="<c16" if is_complex else "<f8")
    Path(path).write_bytes(head + vals.tobytes())


def read_rssg(path) -> Sinogram:
    r = _Reader(_read_bytes(path), "RSSG1")
    r.magic(RSSG_MAGIC)
    n_v, n_t = r.u32("n_v"), r.u32("n_t")
    vmax, t_range = r.f64("Vmax"), r.f64("t_range")
    stage_pos = r.pos
    code = r.u8("stage")
    is_complex = bool(code & _COMPLEX_BIT)
    stages = {v: k for k, v in _STAGE_CODES.items()}
    if code & ~_COMPLEX_BIT not in stages:
        raise ParseError(f"RSSG1: unknown stage code {code}", offset=stage_pos)
    if n_v < 2 or n_t < 2 or n_t % 2:
        raise ParseError(f"RSSG1: invalid dims n_v={n_v}, n_t={n_t}", offset=len(RSSG_MAGIC))
    count = n_v * n_t * (2 if is_complex else 1)
    raw = r.f64_array(count, "values")
    r.finish()
    vals = raw.view(complex) if is_complex else raw
    v = np.linspace(-vmax, vmax, n_v)
    t = centered_grid(n_t, 2.0 * t_range / n_t)
    return Sinogram(v, t, vals.reshape(n_v, n_t), stages[code & ~_COMPLEX_BIT])


def write_sinogram_csv(sino: Sinogram, path, stride: int = 1) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["v", "t", "value"] if not np.iscomplexobj(sino.values) else ["v", "t", "re", "im"])
        for i in range(0, sino.n_v, stride):
            for j in range(0, sino.n_t, stride):
                z = sino.values[i, j]
                if np.iscomplexobj(sino.values):
                    w.writerow([repr(float(sino.v_grid[i])), repr(float(sino.t_grid[j])), repr(float(z.real)), repr(float(z.imag))])
                else:
                    w.writerow([repr(float(sino.v_grid[i])), repr(float(sino.t_grid[j])), repr(float(z))])


# -- coefficient volumes ------------------------------------------------------------------


def _by_scale(vol: CoefficientVolume) -> tuple[list[float], list[list[int]]]:
    scales: list[float] = []
    groups: list[list[int]] = []
    for i, a in enumerate(vol.a):
        if not scales or scales[-1] != a:
            scales.append(float(a))
            groups.append([])
        groups[-1].append(i)
    return scales, groups


def write_rsvc(vol: CoefficientVolume, path) -> None:
    lat = vol.lattice
    scales, groups = _by_scale(vol)
    n_a, n_s = len(scales), max(len(g) for g in groups)
    s_tab = np.full((n_a, n_s), np.nan)
    w_tab = np.full((n_a, n_s), np.nan)
    data = np.zeros((n_a, n_s, lat.ny, lat.nx), dtype="<c16")
    for ia, g in enumerate(groups):
        for k, i in enumerate(g):
            s_tab[ia, k] = vol.s[i]
            w_tab[ia, k] = vol.weights[i]
            data[ia, k] = vol.values[i]
    parts = [
        RSVC_MAGIC,
        struct.pack("<IIII", lat.nx, lat.ny, n_s, n_a),
        np.asarray(lat.b_x, "<f8").tobytes(),
        np.asarray(lat.b_y, "<f8").tobytes(),
        np.asarray(scales, "<f8").tobytes(),
        s_tab.astype("<f8").tobytes(),
        w_tab.astype("<f8").tobytes(),
        data.tobytes(),
    ]
    Path(path).write_bytes(b"".join(parts))
    meta = {"mother": vol.mother_id, "gamma": lat.gamma, "lattice": lat.as_dict(), "c_psi": vol.c_psi}
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_rsvc(path) -> CoefficientVolume:
    r = _Reader(_read_bytes(path), "RSVC1")
    r.magic(RSVC_MAGIC)
    nx, ny, n_s, n_a = (r.u32(k) for k in ("nb_x", "nb_y", "n_s", "n_a"))
    bx = r.f64_array(nx, "b_x")
    r.f64_array(ny, "b_y")
    scales = r.f64_array(n_a, "a")
    s_tab = r.f64_array(n_a * n_s, "s").reshape(n_a, n_s)
    w_tab = r.f64_array(n_a * n_s, "weights").reshape(n_a, n_s)
    data = r.f64_array(2 * n_a * n_s * nx * ny, "values").view(complex).reshape(n_a, n_s, ny, nx)
    r.finish()
    side = Path(str(path) + ".json")
    meta = json.loads(side.read_text()) if side.exists() else {}
    lat_d = meta.get("lattice")
    if lat_d:
        lat_d = dict(lat_d)
        lat_d["signs"] = tuple(lat_d["signs"])
        lattice = Lattice(**lat_d)
    else:
        dx = float(bx[1] - bx[0]) if nx > 1 else 1.0
        lattice = Lattice(nx, ny, dx)
    s, a, w, vals = [], [], [], []
    for ia in range(n_a):
        for k in range(n_s):
            if np.isnan(s_tab[ia, k]):
                continue
            s.append(s_tab[ia, k])
            a.append(scales[ia])
            w.append(w_tab[ia, k])
            vals.append(np.array(data[ia, k]))
    return CoefficientVolume(
        lattice, np.array(s), np.array(a), np.array(w), tuple(vals), meta.get("mother", ""), float(meta.get("c_psi", "nan"))
    )


# -- reports --------------------------------------------------------------------------------


def write_report(rows, path) -> None:
    """CSV with columns metric, value, tolerance, pass."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "value", "tolerance", "pass"])
        for metric, value, tol, ok in rows:
            w.writerow([metric, repr(float(value)), "" if tol is None else repr(float(tol)), "true" if ok else "false"])


def read_report(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
