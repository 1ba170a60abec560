"""Command-line front end.

Usage::

    curvescope <command> <input> [--out DIR] [--scales J] [--angles N] ...

Exit status is 0 on success, 2 on a validation error and 3 on an I/O error.
Failures also print a one-line JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import coeffio, sift
from ._kernels import BACKEND
from .contributions import enhance, scale_contribution
from .edgelab import ImproveConfig, run_improve, upsample_factor
from .fdct import FINEST_MODES, angle_counts, forward, max_scales, plan
from .grid import UnsupportedFormatError, load_image, save_image

COMMANDS = ("transform", "contributions", "sift-scales", "improve", "info")
EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 2, 3
IMPROVE_DEFAULT_J = 5


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str
    out: str = "."
    scales: int | None = None
    angles: int = 16
    finest: str = "curvelets"
    canny_sigma: float = 1.0
    canny_low: float | None = None
    canny_high: float | str = "auto"
    ratio: float = 0.8
    replace_depth: int = 1
    raw: bool = False
    enhance: bool = True
    debug_dir: str | None = None

    def validate(self, shape: tuple[int, int] | None = None) -> None:
        """Check every numeric field; ``shape`` enables the image-dependent checks."""
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.angles < 8 or self.angles & (self.angles - 1):
            raise ValidationError(f"--angles must be a power of two >= 8, got {self.angles}")
        if self.finest not in FINEST_MODES:
            raise ValidationError(f"--finest must be one of {FINEST_MODES}, got {self.finest!r}")
        if not self.canny_sigma > 0:
            raise ValidationError(f"--canny-sigma must be positive, got {self.canny_sigma}")
        high = self.canny_high
        if high != "auto" and not (isinstance(high, float) and 0 < high <= 1):
            raise ValidationError(f"--canny-high must be 'auto' or in (0, 1], got {high!r}")
        if self.canny_low is not None:
            if high == "auto":
                if not 0 < self.canny_low < 1:
                    raise ValidationError(f"--canny-low must be in (0, 1), got {self.canny_low}")
            elif not 0 < self.canny_low < high:
                raise ValidationError(f"need 0 < --canny-low < --canny-high, got {self.canny_low} and {high}")
        if not 0 < self.ratio <= 1:
            raise ValidationError(f"--ratio must be in (0, 1], got {self.ratio}")
        if self.scales is not None and self.scales < 2:
            raise ValidationError(f"--scales must be >= 2, got {self.scales}")
        if shape is None:
            return
        rows, cols = shape
        if min(rows, cols) < 16:
            raise ValidationError(f"image too small: {rows}x{cols}, need both dimensions >= 16")
        J = self.resolved_scales(shape)
        if self.command == "improve":
            if not 1 <= self.replace_depth < J:
                raise ValidationError(f"--replace-depth must satisfy 1 <= D < J, got {self.replace_depth} for J={J}")
            try:
                upsample_factor(rows, cols, J)
            except ValueError as exc:
                raise ValidationError(str(exc)) from None
        elif J > max_scales(rows, cols):
            raise ValidationError(f"--scales {J} exceeds the maximum {max_scales(rows, cols)} for a {rows}x{cols} image")

    def resolved_scales(self, shape: tuple[int, int]) -> int:
        if self.scales is not None:
            return self.scales
        if self.command == "improve":
            return IMPROVE_DEFAULT_J
        return max_scales(*shape)


# -- configuration -----------------------------------------------------------------

_FIELD_NAMES = {f.name for f in fields(RunConfig)} - {"command", "input"}


def _coerce(key: str, raw: str):
    text = raw.strip().strip('"').strip("'")
    try:
        if key in ("scales", "angles", "replace_depth"):
            return int(text)
        if key in ("canny_sigma", "ratio", "canny_low"):
            return None if text.lower() == "none" and key == "canny_low" else float(text)
        if key == "canny_high":
            return "auto" if text.lower() == "auto" else float(text)
        if key in ("raw", "enhance"):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
    except ValueError:
        raise ValidationError(f"bad value for {key}: {raw.strip()!r}") from None
    return text


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes in keys are allowed."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if key == "scale":
            key = "scales"
        if key not in _FIELD_NAMES:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _high_arg(text: str):
    return "auto" if text.lower() == "auto" else float(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="curvescope", description="Curvelet decomposition, SIFT stability and edge improvement.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("input", help="PGM (P5) or PNG image")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--scales", "--scale", dest="scales", type=int, help="number of scales J")
    p.add_argument("--angles", type=int, help="angles at the second-coarsest scale (default 16)")
    p.add_argument("--finest", choices=FINEST_MODES)
    p.add_argument("--canny-sigma", type=float)
    p.add_argument("--canny-low", type=float)
    p.add_argument("--canny-high", type=_high_arg, help="high threshold in (0, 1] or 'auto'")
    p.add_argument("--ratio", type=float, help="descriptor ratio test threshold")
    p.add_argument("--replace-depth", type=int, help="finest scales copied from the image")
    p.add_argument("--raw", action="store_const", const=True, help="do not contrast-stretch contributions")
    p.add_argument("--no-enhance", dest="enhance", action="store_const", const=False,
                   help="run SIFT on raw contributions")
    p.add_argument("--debug-dir", help="dump intermediate arrays here")
    p.add_argument("--config", help="key = value file; flags override it")
    return p


def resolve_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    merged = {}
    if ns.config:
        try:
            merged.update(parse_config_text(Path(ns.config).read_text()))
        except OSError as exc:
            raise OSError(f"cannot read config {ns.config}: {exc.strerror or exc}") from None
    for name in _FIELD_NAMES:
        value = getattr(ns, name, None)
        if value is not None:
            merged[name] = value
    return RunConfig(command=ns.command, input=ns.input, **merged)


# -- commands ------------------------------------------------------------------------


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_transform(cfg: RunConfig, image: np.ndarray, out: Path) -> dict:
    J = cfg.resolved_scales(image.shape)
    system = plan(*image.shape, J, cfg.angles, cfg.finest)
    coeffs = forward(system, image)
    target = out / f"{Path(cfg.input).stem}.cvl"
    coeffio.save_coeffs(coeffs, target)
    energies = [coeffs.scale_energy(j) for j in range(1, J + 1)]
    total = float(sum(energies))
    return {
        "command": "transform",
        "file": target.name,
        "shape": list(image.shape),
        "J": J,
        "n_theta": cfg.angles,
        "finest": cfg.finest,
        "angles": angle_counts(J, cfg.angles, cfg.finest),
        "energy": total,
        "energy_fractions": [float(e) / total if total > 0 else 0.0 for e in energies],
    }


def cmd_contributions(cfg: RunConfig, image: np.ndarray, out: Path) -> dict:
    J = cfg.resolved_scales(image.shape)
    system = plan(*image.shape, J, cfg.angles, cfg.finest)
    coeffs = forward(system, image)
    energies = [coeffs.scale_energy(j) for j in range(1, J + 1)]
    stem = Path(cfg.input).stem
    entries = []
    for j in range(1, J + 1):
        contrib = scale_contribution(system, coeffs, j)
        name = f"{stem}_scale{j}.png"
        entry = {"scale": j, "file": name, "coefficient_energy": float(energies[j - 1])}
        if cfg.raw:
            save_image(contrib, out / name)
            npy = f"{stem}_scale{j}.npy"
            np.save(out / npy, contrib)
            entry.update(raw_file=npy, min=float(contrib.min()), max=float(contrib.max()))
        else:
            save_image(enhance(contrib), out / name)
        entries.append(entry)
    manifest = {
        "command": "contributions",
        "shape": list(image.shape),
        "J": J,
        "n_theta": cfg.angles,
        "finest": cfg.finest,
        "raw": cfg.raw,
        "scales": entries,
        "reconstruction_energy": float(coeffs.energy()),
    }
    _write_text(out / "manifest.json", _dumps(manifest))
    return {"command": "contributions", "manifest": "manifest.json", "files": [e["file"] for e in entries]}


def cmd_sift_scales(cfg: RunConfig, image: np.ndarray, out: Path) -> dict:
    J = cfg.resolved_scales(image.shape)
    system = plan(*image.shape, J, cfg.angles, cfg.finest)
    report = sift.stability_report(image, system, ratio=cfg.ratio, enhance=cfg.enhance)
    stem = Path(cfg.input).stem
    names = {"json": f"{stem}_stability.json", "csv": f"{stem}_stability.csv", "keypoints": f"{stem}_keypoints.json"}
    _write_text(out / names["json"], report.to_json() + "\n")
    _write_text(out / names["csv"], report.to_csv())
    kps = {src: [k.to_dict() for k in found] for src, found in report.keypoints.items()}
    _write_text(out / names["keypoints"], _dumps(kps))
    return {"command": "sift-scales", "J": J, "files": names, "rows": report.to_dict()["rows"]}


def _side_by_side(left: np.ndarray, right: np.ndarray, gap: int = 4) -> np.ndarray:
    sep = np.full((left.shape[0], gap), 0.5)
    return np.hstack([left.astype(np.float64), sep, right.astype(np.float64)])


def cmd_improve(cfg: RunConfig, image: np.ndarray, out: Path) -> dict:
    J = cfg.resolved_scales(image.shape)
    icfg = ImproveConfig(
        scale=J,
        replace_depth=cfg.replace_depth,
        n_theta=cfg.angles,
        finest=cfg.finest,
        canny_sigma=cfg.canny_sigma,
        canny_low=cfg.canny_low,
        canny_high=cfg.canny_high,
    )
    res = run_improve(image, icfg)
    names = {"canny": "canny.png", "improved": f"improved_J{J}.png", "comparison": f"comparison_J{J}.png"}
    save_image(res.canny, out / names["canny"])
    save_image(res.edges, out / names["improved"])
    save_image(_side_by_side(res.canny, res.edges), out / names["comparison"])
    summary = {
        "command": "improve",
        "J": J,
        "upsample_factor": res.factor,
        "shape": list(res.edges.shape),
        "canny_pixels": int(res.canny.sum()),
        "improved_pixels": int(res.edges.sum()),
        "files": names,
    }
    if cfg.debug_dir:
        dbg = Path(cfg.debug_dir)
        dbg.mkdir(parents=True, exist_ok=True)
        np.save(dbg / f"reconstruction_J{J}.npy", res.reconstruction)
        save_image(enhance(np.abs(res.reconstruction)), dbg / f"reconstruction_J{J}.png")
        summary["debug_dir"] = str(dbg)
    return summary


def cmd_info(cfg: RunConfig, image: np.ndarray, out: Path) -> dict:
    jmax = max_scales(*image.shape)
    J = cfg.resolved_scales(image.shape)
    return {
        "command": "info",
        "shape": list(image.shape),
        "max_scales": jmax,
        "J": J,
        "angles": angle_counts(J, cfg.angles, cfg.finest),
        "min": float(image.min()),
        "max": float(image.max()),
        "mean": float(image.mean()),
        "backend": BACKEND,
    }


_HANDLERS = {
    "transform": cmd_transform,
    "contributions": cmd_contributions,
    "sift-scales": cmd_sift_scales,
    "improve": cmd_improve,
    "info": cmd_info,
}


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def run(cfg: RunConfig) -> dict:
    cfg.validate()
    image = load_image(cfg.input)
    cfg.validate(image.shape)
    out = Path(cfg.out)
    if cfg.command != "info":
        out.mkdir(parents=True, exist_ok=True)
    return _HANDLERS[cfg.command](cfg, image, out)


def main(argv=None) -> int:
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else list(argv))
        summary = run(cfg)
    except UnsupportedFormatError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except ValueError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    sys.stdout.write(_dumps(summary))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
