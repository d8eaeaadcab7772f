"""Command-line front end.

Every command accepts its options as flags or through ``--config FILE``, a
flat ``key=value`` file whose keys are the long flag names (``tol-slice``
or ``tol_slice`` both work).  Flags override the file, the file overrides
the defaults below.

Exit codes: 0 success, 2 a tolerance check failed, 1 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as rio
from .errors import ParseError, RadonShearError, UnsupportedFormatError
from .groups import DilationFamily, verify_family
from .phantoms import phantom
from .radon2d import (
    DEFAULT_NV,
    DEFAULT_VMAX,
    Image2D,
    Sinogram,
    affine_radon,
    apply_riesz,
    default_v_grid,
    fourier_slice_residual,
    near_horizontal_fraction,
)
from .shearlet2d import Lattice, direct_transform, mother_from_id, pipeline_transform, reconstruct
from .signal1d import admissibility as wavelet_admissibility
from .signal1d import hilbert_derivative_residual

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE = 0, 1, 2

DEFAULT_TOLERANCES = {
    "axiom": 1e-10,
    "slice": 1e-2,
    "parseval": 2e-2,
    "compare": 1e-2,
    "recon": 5e-2,
    "recon-radon": 7e-2,
    "cpsi": 1e-3,
    "hilbert": 1e-10,
}

DEFAULTS = {
    "input": None,
    "format": "auto",
    "dx": 1.0 / 64.0,
    "family": "standard:d=2,gamma=0.5",
    "samples": 100,
    "mother": "default",
    "gamma": None,
    "levels": 3,
    "smax": 1.5,
    "vmax": DEFAULT_VMAX,
    "nv": DEFAULT_NV,
    "size": None,
    "method": None,
    "riesz": False,
    "out": None,
    "report": None,
    "plot": None,
    "seed": 0,
    "threads": 1,
}

COMMANDS = ("group-check", "radon", "slice-check", "shear", "compare", "reconstruct", "admissibility")


class UsageError(RadonShearError):
    def __init__(self, message: str):
        super().__init__(message, module="cli")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default; usage errors are 1 here
        raise UsageError(message)


@dataclass
class JobConfig:
    command: str
    values: dict
    tolerances: dict

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def tol(self, name: str) -> float:
        return self.tolerances[name]


def read_config(path) -> dict:
    """Parse a flat key=value file; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc.strerror}") from exc
    offset = 0
    for line in text.splitlines(keepends=True):
        body = line.split("#", 1)[0].strip()
        if body:
            if "=" not in body:
                raise ParseError(f"config line {body!r} is not key=value", offset=offset)
            k, v = body.split("=", 1)
            out[k.strip().replace("_", "-")] = v.strip()
        offset += len(line.encode())
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="radonshear", description="Shearlet transforms through the affine Radon transform.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat key=value file with defaults for any flag")
    p.add_argument("--input", help="file path or phantom:gauss | phantom:cone-noise[:N]")
    p.add_argument("--format", choices=("auto", "pgm", "f64raw", "rssg", "rsvc"))
    p.add_argument("--dx", type=float, help="pixel size for PGM input")
    p.add_argument("--family", help="dilation family id for group-check")
    p.add_argument("--samples", type=int, help="random samples for group-check")
    p.add_argument("--mother", help="psi1=<preset>;psi2=<preset>;gamma=<g> or 'default'")
    p.add_argument("--gamma", type=float)
    p.add_argument("--levels", type=int, help="number of dyadic levels J")
    p.add_argument("--smax", type=float, help="largest shear on the lattice")
    p.add_argument("--vmax", type=float)
    p.add_argument("--nv", type=int, help="number of slopes")
    p.add_argument("--size", type=int, help="image size for sinogram-only reconstruction")
    p.add_argument("--method", choices=("direct", "radon", "both"))
    p.add_argument("--riesz", action="store_const", const=True, help="radon: write Q f instead of R f")
    p.add_argument("--out", help="binary artifact path")
    p.add_argument("--report", help="CSV report path (metric, value, tolerance, pass)")
    p.add_argument("--plot", help="CSV plot-data path")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="accepted for interface compatibility; transforms run single-threaded")
    for name in DEFAULT_TOLERANCES:
        p.add_argument(f"--tol-{name}", type=float, dest=f"tol_{name.replace('-', '_')}")
    return p


_CASTS = {
    "dx": float, "samples": int, "gamma": float, "levels": int, "smax": float, "vmax": float,
    "nv": int, "size": int, "seed": int, "threads": int,
}


def parse_job(argv) -> JobConfig:
    args = build_parser().parse_args(argv)
    cfg = read_config(args.config) if args.config else {}
    values = dict(DEFAULTS)
    tolerances = dict(DEFAULT_TOLERANCES)
    for key, raw in cfg.items():
        if key.startswith("tol-"):
            name = key[4:]
            if name not in tolerances:
                raise UsageError(f"unknown tolerance {key!r} in config")
            tolerances[name] = _cast(float, raw, key)
        elif key == "riesz":
            values["riesz"] = raw.lower() in ("1", "true", "yes")
        elif key in values:
            values[key] = _cast(_CASTS.get(key, str), raw, key)
        else:
            raise UsageError(f"unknown config key {key!r}")
    for key in values:
        got = getattr(args, key, None)
        if got is not None:
            values[key] = got
    for name in DEFAULT_TOLERANCES:
        got = getattr(args, f"tol_{name.replace('-', '_')}")
        if got is not None:
            tolerances[name] = got
    job = JobConfig(args.command, values, tolerances)
    validate(job)
    return job


def _cast(fn, raw: str, key: str):
    try:
        return fn(raw)
    except ValueError:
        raise UsageError(f"config value {key}={raw!r} is not a valid {fn.__name__}") from None


def validate(job: JobConfig) -> None:
    v = job.values
    if v["threads"] < 1:
        raise UsageError("--threads must be >= 1")
    if v["levels"] < 0 or v["levels"] > 8:
        raise UsageError("--levels must lie in 0..8")
    if v["vmax"] <= 0 or v["nv"] < 3 or v["nv"] % 2 == 0:
        raise UsageError("--vmax must be positive and --nv odd and >= 3")
    if v["dx"] <= 0:
        raise UsageError("--dx must be positive")
    if v["gamma"] is not None and not 0 < v["gamma"] < 1:
        raise UsageError("--gamma must lie in (0, 1)")
    for name, tol in job.tolerances.items():
        if not tol > 0:
            raise UsageError(f"tolerance {name} must be positive")
    needs_input = job.command in ("radon", "slice-check", "shear", "compare", "reconstruct")
    if needs_input and not v["input"]:
        raise UsageError(f"{job.command} needs --input")
    src = v["input"]
    if src and not src.startswith("phantom:") and not Path(src).exists():
        raise UsageError(f"input {src} does not exist")
    for key in ("out", "report", "plot"):
        if v[key] and not Path(v[key]).resolve().parent.is_dir():
            raise UsageError(f"directory for --{key} {v[key]} does not exist")
    if job.command == "radon" and not v["out"]:
        raise UsageError("radon needs --out")


# -- helpers ------------------------------------------------------------------------------


def load_input(job: JobConfig):
    """Image2D, Sinogram or CoefficientVolume from --input."""
    src = job.input
    if src.startswith("phantom:"):
        parts = src.split(":")
        n = int(parts[2]) if len(parts) > 2 and parts[2] else None
        return phantom(parts[1], seed=job.seed, n=n)
    fmt = job.format
    if fmt == "auto":
        data = Path(src).read_bytes()[:5]
        fmt = "rsvc" if data.startswith(rio.RSVC_MAGIC) else rio.sniff_format(src)
    if fmt == "rssg":
        return rio.read_rssg(src)
    if fmt == "rsvc":
        return rio.read_rsvc(src)
    return rio.ingest_image(src, fmt, job.dx)


def _mother(job: JobConfig):
    text = job.mother
    m = mother_from_id(text)
    if job.gamma is not None and abs(job.gamma - m.gamma) > 0:
        m = mother_from_id(("" if text == "default" else text + ";") + f"gamma={job.gamma}")
    return m


def _lattice(job: JobConfig, nx: int, ny: int, dx: float, gamma: float) -> Lattice:
    return Lattice(nx, ny, dx, J=job.levels, s_max=job.smax, gamma=gamma)


def _grids(job: JobConfig):
    return default_v_grid(job.vmax, job.nv)


class Report:
    def __init__(self):
        self.rows = []

    def add(self, metric: str, value: float, tol: float | None = None) -> bool:
        ok = True if tol is None else bool(value <= tol)
        self.rows.append((metric, value, tol, ok))
        return ok

    def require(self, metric: str, ok: bool) -> bool:
        """Boolean check, recorded as value 1 (holds) or 0 (fails)."""
        self.rows.append((metric, 1.0 if ok else 0.0, None, bool(ok)))
        return bool(ok)

    @property
    def passed(self) -> bool:
        return all(r[3] for r in self.rows)

    def emit(self, job: JobConfig, out=None) -> None:
        out = out or sys.stdout
        for metric, value, tol, ok in self.rows:
            tail = f" (tol {tol:.3g}) {'PASS' if ok else 'FAIL'}" if tol is not None else ("" if ok else " FAIL")
            print(f"{metric} = {value:.6g}{tail}", file=out)
        if job.report:
            rio.write_report(self.rows, job.report)


def _need_image(obj, command: str) -> Image2D:
    if not isinstance(obj, Image2D):
        raise UnsupportedFormatError(f"{command} needs an image input", module="cli")
    return obj


# -- commands ---------------------------------------------------------------------------------


def cmd_group_check(job: JobConfig, rep: Report) -> None:
    fam = DilationFamily.from_id(job.family)
    res = verify_family(fam, job.samples, job.seed)
    for name, val in res.residuals.items():
        rep.add(f"{fam.label}:{name}", val, job.tol("axiom"))


def cmd_radon(job: JobConfig, rep: Report) -> None:
    img = _need_image(load_input(job), "radon")
    sino = affine_radon(img, _grids(job))
    if job.riesz:
        sino = apply_riesz(sino)
    rio.write_rssg(sino, job.out)
    if job.plot:
        rio.write_sinogram_csv(sino, job.plot, stride=max(1, sino.n_t // 256))
    rep.add("image_norm", img.norm)
    rep.add("sinogram_norm", sino.norm)
    rep.add("near_horizontal_fraction", near_horizontal_fraction(img))


def cmd_slice_check(job: JobConfig, rep: Report) -> None:
    img = _need_image(load_input(job), "slice-check")
    sino = affine_radon(img, _grids(job))
    rep.add("fourier_slice_residual", fourier_slice_residual(img, sino), job.tol("slice"))
    q = apply_riesz(sino)
    rep.add("fourier_slice_residual_Q", fourier_slice_residual(img, q), job.tol("slice"))
    if img.norm > 0:
        # unitarity is only expected when little energy sits near xi1 = 0
        frac = near_horizontal_fraction(img)
        rep.add("near_horizontal_fraction", frac)
        rep.add("parseval_deviation", abs(q.norm / img.norm - 1.0), job.tol("parseval") if frac < 0.1 else None)


def _volume(job: JobConfig, obj, method: str, m):
    if isinstance(obj, Image2D):
        lat = _lattice(job, obj.nx, obj.ny, obj.dx, m.gamma)
        if method == "direct":
            return direct_transform(obj, m, lat)
        return pipeline_transform(affine_radon(obj, _grids(job)), m, lat)
    if isinstance(obj, Sinogram):
        if method == "direct":
            raise UnsupportedFormatError("the direct method needs an image, not a sinogram", module="cli")
        n = job.size or 128
        lat = _lattice(job, n, n, job.dx, m.gamma)
        return pipeline_transform(obj, m, lat)
    raise UnsupportedFormatError("input must be an image or a sinogram", module="cli")


def cmd_shear(job: JobConfig, rep: Report) -> None:
    m = _mother(job)
    obj = load_input(job)
    method = job.method or "direct"
    if method == "both":
        raise UsageError("shear takes --method direct or radon")
    vol = _volume(job, obj, method, m)
    if job.out:
        rio.write_rsvc(vol, job.out)
    rep.add("slices", vol.n_slices)
    rep.add("c_psi", m.c_psi)
    if isinstance(obj, Image2D) and obj.norm > 0:
        rep.add("energy_ratio", vol.energy() / (m.c_psi * obj.norm**2))


def cmd_compare(job: JobConfig, rep: Report) -> None:
    m = _mother(job)
    img = _need_image(load_input(job), "compare")
    lat = _lattice(job, img.nx, img.ny, img.dx, m.gamma)
    t0 = time.perf_counter()
    direct = direct_transform(img, m, lat)
    sino = affine_radon(img, _grids(job))
    pipe = pipeline_transform(sino, m, lat)
    rep.add("direct_vs_pipeline", pipe.relative_distance(direct), job.tol("compare"))
    if (job.method or "both") == "both":
        qpath = pipeline_transform(apply_riesz(sino), m, lat)
        rep.add("direct_vs_riesz_pipeline", qpath.relative_distance(direct), job.tol("compare"))
        rep.add("pipeline_vs_riesz_pipeline", qpath.relative_distance(pipe), job.tol("compare"))
    # wall time goes to stderr so reports stay bit-identical between runs
    print(f"compare took {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    if job.out:
        rio.write_rsvc(pipe, job.out)


def cmd_reconstruct(job: JobConfig, rep: Report) -> None:
    m = _mother(job)
    obj = load_input(job)
    method = job.method or "direct"
    if method == "both":
        raise UsageError("reconstruct takes --method direct or radon")
    if obj.__class__.__name__ == "CoefficientVolume":
        vol = obj
    else:
        vol = _volume(job, obj, method, m)
    rec = reconstruct(vol, m)
    real = Image2D(rec.values.real, rec.dx)
    if job.out:
        rio.write_rsim(real, job.out)
    if isinstance(obj, Image2D):
        err = np.linalg.norm(rec.values - obj.values) / np.linalg.norm(obj.values)
        rep.add("relative_l2_error", err, job.tol("recon" if method == "direct" else "recon-radon"))
    rep.add("reconstruction_norm", real.norm)


def cmd_admissibility(job: JobConfig, rep: Report) -> None:
    m = _mother(job)
    w = m.psi1
    rep.add("c_psi", m.c_psi)
    fine = w.resampled(2 * w.n, w.dx)  # half the tau step over the same band
    rep.add("c_psi_refinement_change", abs(fine.calderon_constant - w.calderon_constant) * m.psi2_norm_sq, job.tol("cpsi"))
    rep.require("c_psi_positive_finite", m.c_psi > 0 and np.isfinite(m.c_psi))
    rep.add("chi1_calderon", m.chi1.calderon_constant)
    rep.add("hilbert_residual", hilbert_derivative_residual(w, m.chi1), job.tol("hilbert"))
    rep.require("phi1_admissible", wavelet_admissibility(m.phi1).admissible)


HANDLERS = {
    "group-check": cmd_group_check,
    "radon": cmd_radon,
    "slice-check": cmd_slice_check,
    "shear": cmd_shear,
    "compare": cmd_compare,
    "reconstruct": cmd_reconstruct,
    "admissibility": cmd_admissibility,
}


def run(job: JobConfig, out=None) -> int:
    rep = Report()
    HANDLERS[job.command](job, rep)
    rep.emit(job, out)
    return EXIT_OK if rep.passed else EXIT_TOLERANCE


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        job = parse_job(argv)
        return run(job)
    except RadonShearError as exc:
        print(f"radonshear: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"radonshear: error: [cli] {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
