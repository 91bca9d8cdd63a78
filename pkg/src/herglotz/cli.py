"""Command-line experiment runner.

`run` executes a full pipeline from a JSON config: build the target,
transform it, derive a sphere density by the configured method, evaluate
slices, and export level sets, metrics, and rasters plus a manifest of
output hashes.  Every stage is also exposed as a subcommand operating on
files, and `run` itself goes through these same file-based stages so a
chained invocation reproduces it exactly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import analysis, ballapprox, fieldeval, planeapprox, spheremesh, targets
from .grid import (
    Field,
    Grid,
    dft_forward,
    pad_field,
    read_field,
    read_spectrum,
    write_field,
    write_slice_csv,
    write_spectrum,
)

METHODS = ("ball-asymptotic", "ball-modal", "plane-projection", "plane-time-reversal")
_VOLUMETRIC = ("ball-asymptotic", "ball-modal")

_DESK_SAMPLES = {"2d": 256, "3d": 128}
_PAPER_SAMPLES = {"2d": 512, "3d": 256}
_DEFAULT_HEATMAP = {
    "ball-asymptotic": (-0.01, 0.01),
    "ball-modal": (-0.01, 0.01),
    "plane-projection": (-2.0, 1.5),
    "plane-time-reversal": (-2.0, 1.5),
}


@dataclass
class ExperimentConfig:
    wavelength: float = 1.0
    method: str = "plane-projection"
    target: dict = dc_field(default_factory=lambda: {"kind": "ulogo"})
    grid_half_extent_wavelengths: float = 5.0
    grid_samples: int | None = None
    mesh_triangles: int = 7292
    modal_degree: int = 8
    modal_radius_wavelengths: float = 20.0
    tr_clamp: float = planeapprox.DEFAULT_TR_CLAMP
    spectrum_refine: int | None = None
    slice_offsets_wavelengths: tuple = (-1.0, 0.0, 1.0)
    slice_samples: int = 100
    heatmap_range: tuple | None = None
    mollweide_range: tuple = (-20.0, 20.0)
    out_dir: str = "out"
    paper_scale: bool = False

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if self.grid_samples is None:
            table = _PAPER_SAMPLES if self.paper_scale else _DESK_SAMPLES
            self.grid_samples = table["3d" if self.is_volumetric else "2d"]
        n = self.grid_samples
        if n & (n - 1):
            raise ValueError("grid_samples must be a power of two")
        if self.spectrum_refine is None:
            self.spectrum_refine = 1 if self.is_volumetric else planeapprox.DEFAULT_SPECTRUM_REFINE
        if self.heatmap_range is None:
            self.heatmap_range = _DEFAULT_HEATMAP[self.method]

    @property
    def is_volumetric(self) -> bool:
        return self.method in _VOLUMETRIC

    @property
    def context(self) -> planeapprox.WaveContext:
        return planeapprox.WaveContext.from_wavelength(self.wavelength)

    def spatial_grid(self) -> Grid:
        return Grid(
            half_extent=self.grid_half_extent_wavelengths * self.wavelength,
            samples_per_axis=self.grid_samples,
            d=3 if self.is_volumetric else 2,
        )

    @classmethod
    def from_json(cls, path, paper_scale: bool = False, out_dir: str | None = None) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        data.setdefault("paper_scale", paper_scale)
        if paper_scale:
            data["paper_scale"] = True
        if out_dir is not None:
            data["out_dir"] = out_dir
        for key in ("slice_offsets_wavelengths", "heatmap_range", "mollweide_range"):
            if key in data and data[key] is not None:
                data[key] = tuple(data[key])
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "wavelength": self.wavelength,
            "method": self.method,
            "target": self.target,
            "grid_half_extent_wavelengths": self.grid_half_extent_wavelengths,
            "grid_samples": self.grid_samples,
            "mesh_triangles": self.mesh_triangles,
            "modal_degree": self.modal_degree,
            "modal_radius_wavelengths": self.modal_radius_wavelengths,
            "tr_clamp": self.tr_clamp,
            "spectrum_refine": self.spectrum_refine,
            "slice_offsets_wavelengths": list(self.slice_offsets_wavelengths),
            "slice_samples": self.slice_samples,
            "heatmap_range": list(self.heatmap_range),
            "mollweide_range": list(self.mollweide_range),
            "out_dir": self.out_dir,
            "paper_scale": self.paper_scale,
        }


class StageError(RuntimeError):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


def _stage(name: str):
    def deco(fn):
        def wrapper(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc
        wrapper.__name__ = fn.__name__
        wrapper.__doc__ = fn.__doc__
        return wrapper
    return deco


# ---------------------------------------------------------------------------
# Pipeline stages (file to file)
# ---------------------------------------------------------------------------

@_stage("target-gen")
def stage_target(config: ExperimentConfig, out_path) -> None:
    grid = config.spatial_grid()
    lam = config.wavelength
    spec = config.target
    kind = spec.get("kind")
    if kind == "tetra":
        r = spec.get("circumradius_wavelengths", 5.0) * lam
        f = targets.tetra_target(targets.TetraSpec(circumradius=r), grid)
    elif kind == "ulogo":
        raster = targets.u_logo_raster(spec.get("raster_size", 300))
        f = targets.bitmap_target(raster, spec.get("width_wavelengths", 6.0) * lam, grid)
    elif kind == "bitmap":
        raster = targets.read_raster(spec["path"])
        if spec.get("invert", False):
            raster = raster.max() - raster
        f = targets.bitmap_target(raster, spec.get("width_wavelengths", 6.0) * lam, grid)
    elif kind == "gaussian":
        center = spec.get("center", [0.0] * grid.d)
        f = targets.gaussian_target(spec.get("sigma_wavelengths", 1.0) * lam, center, grid)
    else:
        raise ValueError(f"unknown target kind {kind!r}")
    write_field(out_path, f)


@_stage("dft")
def stage_dft(in_path, out_path) -> None:
    f = read_field(in_path)
    write_spectrum(out_path, dft_forward(f))


@_stage("density")
def stage_density(config: ExperimentConfig, in_path, out_csv, mesh_off=None, coeffs_csv=None) -> None:
    ctx = config.context
    mesh = spheremesh.build_sphere_mesh(ctx.k, config.mesh_triangles)
    method = config.method
    if method in ("plane-projection", "plane-time-reversal"):
        f = _read_plane_field(in_path, ctx)
        if method == "plane-projection":
            dens = planeapprox.plane_density(f, mesh, spectrum_refine=config.spectrum_refine)
        else:
            dens = planeapprox.tr_density(f, mesh, spectrum_refine=config.spectrum_refine)
    elif method == "ball-asymptotic":
        F = _read_volume_spectrum(in_path, config)
        dens = ballapprox.asymptotic_density(F, mesh)
    else:  # ball-modal
        F = _read_volume_spectrum(in_path, config)
        moments = ballapprox.spherical_harmonic_moments(F, mesh, config.modal_degree)
        coeffs = ballapprox.modal_inner_products(
            moments, config.modal_degree, ctx.k, config.modal_radius_wavelengths * config.wavelength
        )
        if coeffs_csv is not None:
            ballapprox.write_modal_csv(coeffs_csv, coeffs)
        dens = ballapprox.density_from_modal(coeffs, mesh)
    fieldeval.write_density_csv(out_csv, dens)
    if mesh_off is not None:
        spheremesh.write_off(mesh, mesh_off)


def _read_plane_field(path, ctx) -> planeapprox.PlaneField:
    # Accept either a field or a spectrum file; a spectrum is inverted first
    # (exact round trip), so `dft` then `density` chains cleanly.
    try:
        f = read_field(path)
    except ValueError:
        from .grid import dft_inverse

        f = dft_inverse(read_spectrum(path))
    return planeapprox.PlaneField(field=f, context=ctx)


def _read_volume_spectrum(path, config: ExperimentConfig):
    try:
        F = read_spectrum(path)
    except ValueError:
        F = dft_forward(pad_field(read_field(path), config.spectrum_refine))
    return F


@_stage("eval")
def stage_eval(density_csv, x3: float, half_extent: float, samples: int, out_path) -> None:
    dens = fieldeval.read_density_csv(density_csv)
    grid = Grid(half_extent=half_extent, samples_per_axis=samples, d=2)
    f = fieldeval.eval_herglotz_grid(dens, grid, x3=x3)
    write_field(out_path, f)


@_stage("levelset")
def stage_levelset(in_path, out_path) -> None:
    f = read_field(in_path)
    analysis.write_level_set(out_path, analysis.zero_level_set(f))


@_stage("render")
def stage_render_heatmap(in_path, vmin: float, vmax: float, out_path) -> None:
    f = read_field(in_path)
    analysis.render_heatmap(f, vmin, vmax, path=out_path)


@_stage("render")
def stage_render_mollweide(density_csv, vmin: float, vmax: float, part: str, out_path) -> None:
    dens = fieldeval.read_density_csv(density_csv)
    analysis.render_mollweide(dens, vmin, vmax, part=part, path=out_path)


@_stage("excite")
def stage_excite(density_csv, samples_csv, out_path) -> None:
    dens = fieldeval.read_density_csv(density_csv)
    rows = np.loadtxt(samples_csv, delimiter=",", skiprows=1, ndmin=2)
    samples = [
        fieldeval.BoundarySample(
            position=row[0:3], normal=row[3:6], impedance=complex(row[6], row[7])
        )
        for row in rows
    ]
    phi = fieldeval.boundary_excitation(dens, samples)
    with open(out_path, "w") as fh:
        fh.write("re_phi,im_phi\n")
        for v in phi:
            fh.write(f"{v.real:.17g},{v.imag:.17g}\n")


# ---------------------------------------------------------------------------
# Full experiment
# ---------------------------------------------------------------------------

def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _offset_tag(x3: float) -> str:
    return f"{x3:+.3f}".replace("+", "p").replace("-", "m").replace(".", "_")


def run(config: ExperimentConfig) -> dict:
    """Execute the configured pipeline; returns the written manifest."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = config.context
    lam = config.wavelength
    artifacts: list[Path] = []

    def art(name: str) -> Path:
        p = out / name
        artifacts.append(p)
        return p

    target_path = art("target.hwf")
    stage_target(config, target_path)

    spectrum_path = art("spectrum.hwf")
    stage_dft(target_path, spectrum_path)

    density_csv = art("density.csv")
    mesh_off = art("mesh.off")
    coeffs_csv = art("coeffs.csv") if config.method == "ball-modal" else None
    density_in = target_path if not config.is_volumetric else spectrum_path
    if config.is_volumetric and config.spectrum_refine > 1:
        density_in = target_path  # re-transform with refinement
    stage_density(config, density_in, density_csv, mesh_off=mesh_off, coeffs_csv=coeffs_csv)

    for part in ("real", "imag"):
        stage_render_mollweide(
            density_csv, config.mollweide_range[0], config.mollweide_range[1],
            part, art(f"mollweide_{part}.png"),
        )

    # Slice evaluation: planar methods reuse the target grid resolution,
    # volumetric ones use the configured slice sampling.
    half = config.grid_half_extent_wavelengths * lam
    slice_samples = config.grid_samples if not config.is_volumetric else config.slice_samples
    vmin, vmax = config.heatmap_range
    slice_paths: dict[float, Path] = {}
    for x3 in config.slice_offsets_wavelengths:
        tag = _offset_tag(x3)
        sp = art(f"slice_{tag}.hwf")
        stage_eval(density_csv, x3 * lam, half, slice_samples, sp)
        slice_paths[x3] = sp
        write_slice_csv(art(f"slice_{tag}.csv"), read_field(sp))
        stage_levelset(sp, art(f"levelset_{tag}.txt"))
        stage_render_heatmap(sp, vmin, vmax, art(f"heatmap_{tag}.png"))

    # Reference objects and metrics.
    metrics: dict = {"method": config.method}
    try:
        if config.is_volumetric:
            _volumetric_reference(config, out, art, metrics, slice_paths)
        else:
            _planar_reference(config, ctx, out, art, metrics, slice_paths, target_path)
    except StageError:
        raise
    except Exception as exc:
        raise StageError("metrics", exc) from exc

    metrics_path = art("metrics.json")
    with open(metrics_path, "w") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")

    manifest = {
        "config": config.to_dict(),
        "artifacts": {p.name: _sha256(p) for p in sorted(artifacts)},
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _volumetric_reference(config, out, art, metrics, slice_paths) -> None:
    # Tetrahedron cross-section contour versus the approximation's contour.
    if config.target.get("kind") != "tetra":
        return
    lam = config.wavelength
    r = config.target.get("circumradius_wavelengths", 5.0) * lam
    spec = targets.TetraSpec(circumradius=r)
    for x3 in config.slice_offsets_wavelengths:
        section = analysis.zero_level_set(targets.tetra_section(spec, x3 * lam))
        tag = _offset_tag(x3)
        analysis.write_level_set(art(f"target_section_{tag}.txt"), section)
        approx = analysis.zero_level_set(read_field(slice_paths[x3]))
        key = f"nodal_distance_x3_{tag}"
        if section.is_empty or approx.is_empty:
            metrics[key] = None
        else:
            metrics[key] = analysis.nodal_distance(section, approx)


def _planar_reference(config, ctx, out, art, metrics, slice_paths, target_path) -> None:
    f = planeapprox.PlaneField(field=read_field(target_path), context=ctx)
    target_ls = analysis.zero_level_set(f.field)
    analysis.write_level_set(art("target_levelset.txt"), target_ls)

    if config.method == "plane-projection":
        ref = planeapprox.bandlimit_project(f)
        ref_path = art("projection.hwf")
    else:
        ref = planeapprox.time_reversal_filter(f, clamp=config.tr_clamp)
        ref_path = art("time_reversal.hwf")
        metrics["clamp_annulus_energy_fraction"] = planeapprox.clamp_annulus_energy_fraction(
            f, clamp=config.tr_clamp
        )
    write_field(ref_path, ref.field)
    vmin, vmax = config.heatmap_range
    analysis.render_heatmap(ref.field, vmin, vmax, path=art("reference_heatmap.png"))
    analysis.write_level_set(art("reference_levelset.txt"), analysis.zero_level_set(ref.field))

    # Diagnostics against the reference and between mirror slices.
    if 0.0 in slice_paths:
        u0 = read_field(slice_paths[0.0])
        metrics["rel_l2_eval0_vs_reference"] = analysis.rel_l2_error(u0, read_field(ref_path))
    offs = set(config.slice_offsets_wavelengths)
    for x3 in sorted(o for o in offs if o > 0 and -o in offs):
        up = read_field(slice_paths[x3])
        um = read_field(slice_paths[-x3])
        metrics[f"rel_l2_slices_pm_{x3:g}"] = analysis.rel_l2_error(up, um)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="herglotz", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="execute a full experiment from a config file")
    pr.add_argument("--config", required=True)
    pr.add_argument("--paper-scale", action="store_true")
    pr.add_argument("--out", default=None)
    pr.add_argument("--seed", type=int, default=None, help="reserved; no numerical effect")

    pt = sub.add_parser("target-gen", help="write the configured target field")
    pt.add_argument("--config", required=True)
    pt.add_argument("--paper-scale", action="store_true")
    pt.add_argument("--out", required=True)

    pd = sub.add_parser("dft", help="forward transform of a field file")
    pd.add_argument("--in", dest="inp", required=True)
    pd.add_argument("--out", required=True)

    pg = sub.add_parser("density", help="derive the sphere density for a method")
    pg.add_argument("--config", required=True)
    pg.add_argument("--paper-scale", action="store_true")
    pg.add_argument("--in", dest="inp", required=True, help="target field or spectrum file")
    pg.add_argument("--out", required=True, help="density CSV path")
    pg.add_argument("--mesh-off", default=None)
    pg.add_argument("--coeffs", default=None)

    pe = sub.add_parser("eval", help="evaluate a density on a plane grid")
    pe.add_argument("--density", required=True)
    pe.add_argument("--plane", type=float, default=0.0, help="x3 offset")
    pe.add_argument("--half-extent", type=float, required=True)
    pe.add_argument("--samples", type=int, required=True)
    pe.add_argument("--out", required=True)

    pl = sub.add_parser("levelset", help="zero level set of a 2D field file")
    pl.add_argument("--in", dest="inp", required=True)
    pl.add_argument("--out", required=True)

    pm = sub.add_parser("metrics", help="field/contour comparison metrics")
    pm.add_argument("--rel-l2", nargs=2, metavar=("A", "B"), default=None)
    pm.add_argument("--nodal", nargs=2, metavar=("A", "B"), default=None)

    pn = sub.add_parser("render", help="render a heatmap or Mollweide raster")
    pn.add_argument("--in", dest="inp", default=None, help="2D field file")
    pn.add_argument("--mollweide", default=None, help="density CSV")
    pn.add_argument("--part", choices=("real", "imag"), default="real")
    pn.add_argument("--vmin", type=float, required=True)
    pn.add_argument("--vmax", type=float, required=True)
    pn.add_argument("--out", required=True)

    px = sub.add_parser("excite", help="boundary excitation from a density")
    px.add_argument("--density", required=True)
    px.add_argument("--samples", required=True, help="CSV x,y,z,nx,ny,nz,re_alpha,im_alpha")
    px.add_argument("--out", required=True)

    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = ExperimentConfig.from_json(args.config, args.paper_scale, args.out)
            manifest = run(config)
            print(json.dumps(manifest["artifacts"], indent=2, sort_keys=True))
        elif args.command == "target-gen":
            config = ExperimentConfig.from_json(args.config, args.paper_scale)
            stage_target(config, args.out)
        elif args.command == "dft":
            stage_dft(args.inp, args.out)
        elif args.command == "density":
            config = ExperimentConfig.from_json(args.config, args.paper_scale)
            stage_density(config, args.inp, args.out, mesh_off=args.mesh_off, coeffs_csv=args.coeffs)
        elif args.command == "eval":
            stage_eval(args.density, args.plane, args.half_extent, args.samples, args.out)
        elif args.command == "levelset":
            stage_levelset(args.inp, args.out)
        elif args.command == "metrics":
            if args.rel_l2:
                a, b = (read_field(p) for p in args.rel_l2)
                print(f"{analysis.rel_l2_error(a, b):.17g}")
            if args.nodal:
                a, b = (analysis.read_level_set(p) for p in args.nodal)
                print(f"{analysis.nodal_distance(a, b):.17g}")
        elif args.command == "render":
            if args.mollweide:
                stage_render_mollweide(args.mollweide, args.vmin, args.vmax, args.part, args.out)
            elif args.inp:
                stage_render_heatmap(args.inp, args.vmin, args.vmax, args.out)
            else:
                raise ValueError("render needs --in or --mollweide")
        elif args.command == "excite":
            stage_excite(args.density, args.samples, args.out)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
