"""Command-line entry point: ``verify``, ``converge``, ``enumerate`` and ``export-mesh``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration
error, 3 input/output error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bump import BUMPS, get_bump
from .checks import CUTOFF_EPS, Tolerances, cancellation_ratios, cutoff_rows, sheet_boundary_table, sheet_errors, verify_all
from .decomposition import ClassificationFailure, classification_report
from .model import export_obj

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    command: str = "verify"
    level: int = 4
    tol: float = 1e-3
    bump: str = "quintic-plateau"
    out: str = "report"
    seed: int = 0
    window: float = 2.0
    mesh_n: int = 16
    levels: tuple[int, ...] = field(default=(2, 3, 4))

    def tolerances(self) -> Tolerances:
        return Tolerances(residual=self.tol, flux=self.tol)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["levels"] = list(self.levels)
        return d


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_verify(cfg: RunConfig) -> int:
    results = []
    for res in verify_all(cfg.bump, cfg.level, cfg.tolerances(), cfg.seed):
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: {res.message} ({res.seconds:.2f}s)")
        results.append(res)
    failed = next((r for r in results if not r.passed), None)
    report = {
        "version": __version__,
        "config": cfg.as_dict(),
        "suites": [{"name": r.name, "passed": r.passed, "message": r.message, "details": r.details} for r in results],
        "passed": failed is None,
        "first_failure": None if failed is None else failed.name,
    }
    path = Path(cfg.out) / "verify.json"
    _write(path, json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n")
    print(f"report: {path}")
    if failed is not None:
        print(f"first failing check: {failed.name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


CONVERGE_COLUMNS = ("level", "residual_max", "cancellation_max", "eps", "cutoff_B", "cutoff_bound", "A_mass_eps")


def converge_rows(cfg: RunConfig) -> list[dict]:
    """One row per level; the cutoff radius halves from one row to the next."""
    bump = get_bump(cfg.bump)
    rows = []
    for k, level in enumerate(cfg.levels):
        eps = CUTOFF_EPS[0] * 0.5**k
        cut = cutoff_rows(bump, level, [eps])[0]
        rows.append(
            {
                "level": level,
                "residual_max": max(sheet_errors(sheet_boundary_table(cfg.bump, level)).values()),
                "cancellation_max": max(cancellation_ratios(cfg.bump, level).values()),
                "eps": eps,
                "cutoff_B": cut["B_norm"],
                "cutoff_bound": cut["bound"],
                "A_mass_eps": cut["A_mass_eps"],
            }
        )
    return rows


def cmd_converge(cfg: RunConfig) -> int:
    rows = converge_rows(cfg)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, CONVERGE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    path = Path(cfg.out) / "converge.csv"
    _write(path, buf.getvalue())
    print(buf.getvalue(), end="")
    print(f"table: {path}")
    prev, last = rows[-2], rows[-1]
    if not last["residual_max"] < prev["residual_max"]:
        print("residual did not decrease on the final two levels", file=sys.stderr)
        return EXIT_FAIL
    if not last["cutoff_B"] < prev["cutoff_B"]:
        print("cutoff contribution did not decrease on the final two levels", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_enumerate(cfg: RunConfig) -> int:
    try:
        rep = classification_report()
    except ClassificationFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    print("boundary-free unions of half-sheets:")
    for s in rep["sets"]:
        flags = []
        if s["component"]:
            flags.append("component")
        flags.append("curvature without boundary" if s["curvature_without_boundary"] else f"{len(s['boundary_class'])} boundary atoms on L")
        print(f"  {s['name']:<6} mask={s['mask']:#05x}  {', '.join(flags)}")
    unique = "unique decomposition" if len(rep["decompositions"]) == 1 else f"{len(rep['decompositions'])} decompositions"
    print(f"components: {', '.join(rep['components'])}; {unique}")
    print(rep["verdict"])
    return EXIT_OK


def cmd_export_mesh(cfg: RunConfig) -> int:
    path = Path(cfg.out) / "sheets.obj"
    path.parent.mkdir(parents=True, exist_ok=True)
    verts = export_obj(path, cfg.window, cfg.mesh_n, get_bump(cfg.bump))
    print(f"wrote {len(verts)} sheets, {sum(len(v) for v in verts.values())} vertices to {path}")
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "converge": cmd_converge, "enumerate": cmd_enumerate, "export-mesh": cmd_export_mesh}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--level", type=int, default=RunConfig.level, help="quadrature grid level (>= 1)")
    common.add_argument("--tol", type=float, default=RunConfig.tol, help="relative tolerance for quadrature checks")
    common.add_argument("--bump", choices=sorted(BUMPS), default=RunConfig.bump)
    common.add_argument("--out", default=RunConfig.out, help="output directory")
    common.add_argument("--seed", type=int, default=RunConfig.seed, help="seed for derivative sample points")
    common.add_argument("--window", type=float, default=RunConfig.window, help="mesh export half-width")
    common.add_argument("--mesh-n", type=int, default=RunConfig.mesh_n, help="mesh cells per axis")

    parser = argparse.ArgumentParser(prog="curvdecomp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run every check and write verify.json")
    conv = sub.add_parser("converge", parents=[common], help="refinement study, writes converge.csv")
    conv.add_argument("--levels", type=int, nargs="+", default=list(RunConfig.levels))
    sub.add_parser("enumerate", parents=[common], help="exact enumeration and classification")
    sub.add_parser("export-mesh", parents=[common], help="write OBJ meshes of the six sheets")
    return parser


def parse_config(argv=None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.level < 1:
        parser.error("--level must be >= 1")
    if not ns.tol >= 0:
        parser.error("--tol must be >= 0")
    if not ns.window > 0:
        parser.error("--window must be positive (empty window)")
    if ns.mesh_n < 1:
        parser.error("--mesh-n must be >= 1")
    levels = tuple(getattr(ns, "levels", RunConfig.levels))
    if ns.command == "converge":
        if len(levels) < 2:
            parser.error("converge needs at least two levels")
        if any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 1:
            parser.error("--levels must be increasing and >= 1")
    return RunConfig(ns.command, ns.level, ns.tol, ns.bump, ns.out, ns.seed, ns.window, ns.mesh_n, levels)


def main(argv=None) -> int:
    cfg = parse_config(argv)
    try:
        return COMMANDS[cfg.command](cfg)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
