from __future__ import annotations

import json
import struct

import numpy as np
import pytest

from radonshear.errors import ParseError, UnsupportedFormatError
from radonshear.io import (
    ingest_image,
    read_pgm,
    read_report,
    read_rsim,
    read_rssg,
    read_rsvc,
    sniff_format,
    write_pgm,
    write_report,
    write_rsim,
    write_rssg,
    write_rsvc,
    write_sinogram_csv,
)
from radonshear.radon2d import RIESZ, Image2D, Sinogram, affine_radon, apply_riesz
from radonshear.shearlet2d import Lattice, direct_transform, make_mother
from radonshear.signal1d import centered_grid


def p5(width, height, raster: bytes, maxval=255, comment=b"") -> bytes:
    return b"P5\n" + comment + f"{width} {height}\n{maxval}\n".encode() + raster


# -- images ------------------------------------------------------------------------------


def test_rsim_roundtrip_bit_identical(tmp_path):
    rng = np.random.default_rng(0)
    img = Image2D(rng.normal(size=(16, 32)), 0.037)
    path = tmp_path / "a.rsim"
    write_rsim(img, path)
    back = read_rsim(path)
    assert back.dx == img.dx
    assert back.values.tobytes() == img.values.tobytes()
    write_rsim(back, tmp_path / "b.rsim")
    assert (tmp_path / "b.rsim").read_bytes() == path.read_bytes()


def test_rsim_header_layout(tmp_path):
    img = Image2D(np.arange(64.0).reshape(8, 8), 0.5)
    path = tmp_path / "a.rsim"
    write_rsim(img, path)
    data = path.read_bytes()
    assert data[:5] == b"RSIM1"
    assert struct.unpack("<IId", data[5:21]) == (8, 8, 0.5)
    assert np.frombuffer(data[21:], "<f8")[9] == 9.0  # row 1, column 1
    assert len(data) == 21 + 64 * 8


def test_pgm_two_by_two(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(p5(2, 2, bytes([0, 255, 255, 0])))
    img = read_pgm(path)
    np.testing.assert_array_equal(img.values, [[0.0, 1.0], [1.0, 0.0]])


def test_pgm_comments_and_writer(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(p5(4, 2, bytes(range(0, 240, 30)), comment=b"# made by hand\n"))
    img = read_pgm(path)
    assert img.values.shape == (2, 4)
    write_pgm(img.values, tmp_path / "d.pgm")
    np.testing.assert_array_equal(read_pgm(tmp_path / "d.pgm").values, img.values)


def test_pgm_padding_keeps_energy(tmp_path):
    rng = np.random.default_rng(1)
    raster = rng.integers(0, 256, size=(200, 300), dtype=np.uint8)
    path = tmp_path / "big.pgm"
    path.write_bytes(p5(300, 200, raster.tobytes()))
    img = read_pgm(path, dx=0.01)
    assert img.values.shape == (256, 512)
    orig = raster.astype(float) / 255.0
    np.testing.assert_array_equal(img.values[28:228, 106:406], orig)
    assert np.sum(img.values**2) == pytest.approx(np.sum(orig**2), rel=1e-15)
    assert img.dx == 0.01


def test_pgm_errors(tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P2\n2 2\n255\n0 0 0 0")
    with pytest.raises(ParseError, match="byte offset 0"):
        read_pgm(bad)
    trunc = tmp_path / "trunc.pgm"
    trunc.write_bytes(p5(4, 4, bytes(10)))
    with pytest.raises(ParseError, match="truncated") as exc:
        read_pgm(trunc)
    assert exc.value.offset == len(trunc.read_bytes())
    deep = tmp_path / "deep.pgm"
    deep.write_bytes(p5(2, 2, bytes(8), maxval=65535))
    with pytest.raises(UnsupportedFormatError):
        read_pgm(deep)
    empty = tmp_path / "empty.pgm"
    empty.write_bytes(b"")
    with pytest.raises(ParseError):
        read_pgm(empty)


def test_rsim_errors(tmp_path):
    path = tmp_path / "x.rsim"
    path.write_bytes(b"RSIMX" + bytes(20))
    with pytest.raises(ParseError, match="bad magic"):
        read_rsim(path)
    img = Image2D(np.ones((8, 8)), 0.1)
    write_rsim(img, path)
    data = path.read_bytes()
    path.write_bytes(data[:-3])
    with pytest.raises(ParseError) as exc:
        read_rsim(path)
    assert exc.value.offset == len(data) - 3
    path.write_bytes(data + b"\x00")
    with pytest.raises(ParseError, match="trailing"):
        read_rsim(path)


def test_sniff_and_ingest(tmp_path):
    img = Image2D(np.ones((8, 8)), 0.1)
    write_rsim(img, tmp_path / "a.bin")
    assert sniff_format(tmp_path / "a.bin") == "f64raw"
    assert ingest_image(tmp_path / "a.bin").dx == 0.1
    (tmp_path / "e.dat").write_bytes(b"")
    with pytest.raises(ParseError):
        ingest_image(tmp_path / "e.dat")
    with pytest.raises(UnsupportedFormatError):
        ingest_image(tmp_path / "a.bin", fmt="tiff")


# -- sinograms -------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def sino():
    img = Image2D(np.random.default_rng(2).normal(size=(16, 16)), 0.125)
    return affine_radon(img, np.linspace(-3, 3, 9))


def test_rssg_roundtrip_real(tmp_path, sino):
    write_rssg(sino, tmp_path / "s.rssg")
    back = read_rssg(tmp_path / "s.rssg")
    assert back.stage == sino.stage
    np.testing.assert_array_equal(back.values, sino.values)
    np.testing.assert_allclose(back.v_grid, sino.v_grid, rtol=0, atol=1e-15)
    np.testing.assert_allclose(back.t_grid, sino.t_grid, rtol=0, atol=1e-12)


def test_rssg_roundtrip_complex_riesz(tmp_path, sino):
    q = apply_riesz(sino.with_values(sino.values * (1 + 0.5j)))
    write_rssg(q, tmp_path / "q.rssg")
    data = (tmp_path / "q.rssg").read_bytes()
    assert data[5 + 8 + 16] == 0x81
    back = read_rssg(tmp_path / "q.rssg")
    assert back.stage == RIESZ
    np.testing.assert_array_equal(back.values, q.values)


def test_rssg_column_layout(tmp_path):
    vals = np.arange(12.0).reshape(3, 4)
    s = Sinogram(np.linspace(-1, 1, 3), centered_grid(4, 0.5), vals)
    write_rssg(s, tmp_path / "l.rssg")
    payload = np.frombuffer((tmp_path / "l.rssg").read_bytes()[30:], "<f8")
    # first the n_t samples of the v = -1 projection
    np.testing.assert_array_equal(payload[:4], vals[0])


def test_rssg_bad_stage(tmp_path, sino):
    write_rssg(sino, tmp_path / "s.rssg")
    data = bytearray((tmp_path / "s.rssg").read_bytes())
    data[29] = 7
    (tmp_path / "s.rssg").write_bytes(bytes(data))
    with pytest.raises(ParseError) as exc:
        read_rssg(tmp_path / "s.rssg")
    assert exc.value.offset == 29


def test_sinogram_csv(tmp_path, sino):
    write_sinogram_csv(sino, tmp_path / "s.csv", stride=2)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "v,t,value"
    assert len(lines) == 1 + 5 * (sino.n_t // 2)


# -- volumes and reports ----------------------------------------------------------------------


def test_rsvc_roundtrip(tmp_path):
    m = make_mother()
    img = Image2D(np.random.default_rng(3).normal(size=(64, 64)), 1 / 32)
    lat = Lattice.for_image(img, J=2)
    vol = direct_transform(img, m, lat)
    path = tmp_path / "v.rsvc"
    write_rsvc(vol, path)
    meta = json.loads((tmp_path / "v.rsvc.json").read_text())
    assert meta["mother"] == m.id and meta["c_psi"] == m.c_psi and meta["gamma"] == 0.5
    back = read_rsvc(path)
    assert back.lattice == lat
    np.testing.assert_array_equal(back.s, vol.s)
    np.testing.assert_array_equal(back.a, vol.a)
    np.testing.assert_array_equal(back.weights, vol.weights)
    for x, y in zip(back.values, vol.values):
        np.testing.assert_array_equal(x, y)


def test_report_csv(tmp_path):
    rows = [("residual", 1e-3, 1e-2, True), ("norm", 2.5, None, True), ("bad", 1.0, 0.5, False)]
    write_report(rows, tmp_path / "r.csv")
    back = read_report(tmp_path / "r.csv")
    assert list(back[0]) == ["metric", "value", "tolerance", "pass"]
    assert [r["pass"] for r in back] == ["true", "true", "false"]
    assert float(back[0]["value"]) == 1e-3 and back[1]["tolerance"] == ""
