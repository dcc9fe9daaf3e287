"""
Ecriture des artefacts d'une exécution: CSV à 17 chiffres significatifs, snapshots npz,
manifeste JSON. Toutes les écritures passent par un fichier temporaire puis un renommage.
"""

import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np

from app.schemas.run import RunManifest
from app.services.cloak_simulator import DiagnosticRow, FieldSnapshot

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_NAME = "run-manifest.json"
DIAGNOSTICS_NAME = "diagnostics.csv"
SNAPSHOT_DIR = "snapshots"


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.17g}"


def _atomic_write(path: PathLike, write) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            write(handle)
        os.replace(tmp_name, path)
    except Exception:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return _atomic_write(path, lambda handle: handle.write(text.encode("utf-8")))


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = atomic_write_text(path, csv_text(header, rows))
    logger.debug(f"CSV écrit: {path}")
    return path


def snapshot_name(time: float) -> str:
    return f"t_{float(time):g}"


def snapshot_rows(snapshot: FieldSnapshot, full: bool = False) -> List[tuple]:
    D = snapshot.D.real
    if full:
        return [
            (x, y, dx, dy, dz, int(region))
            for x, y, (dx, dy, dz), region in zip(snapshot.x, snapshot.y, D, snapshot.regions)
        ]
    return [(x, y, dz) for x, y, dz in zip(snapshot.x, snapshot.y, D[:, 2])]


def snapshot_header(full: bool = False) -> List[str]:
    return ["x", "y", "ReDx", "ReDy", "ReDz", "region"] if full else ["x", "y", "ReDz"]


def write_snapshot_csv(path: PathLike, snapshot: FieldSnapshot, full: bool = False) -> Path:
    return write_csv(path, snapshot_header(full), snapshot_rows(snapshot, full))


def write_snapshot(run_dir: PathLike, snapshot: FieldSnapshot, full: bool = False) -> Path:
    """snapshots/t_<time>.csv et snapshots/t_<time>.npz"""
    directory = Path(run_dir) / SNAPSHOT_DIR
    name = snapshot_name(snapshot.time)
    _atomic_write(
        directory / f"{name}.npz",
        lambda handle: np.savez(
            handle, time=snapshot.time, x=snapshot.x, y=snapshot.y, D=snapshot.D, regions=snapshot.regions
        ),
    )
    path = write_snapshot_csv(directory / f"{name}.csv", snapshot, full)
    logger.info(f"Snapshot t={snapshot.time:g} écrit ({len(snapshot.x)} points)")
    return path


def load_snapshot(run_dir: PathLike, time: float) -> FieldSnapshot:
    path = Path(run_dir) / SNAPSHOT_DIR / f"{snapshot_name(time)}.npz"
    if not path.is_file():
        raise FileNotFoundError(f"Snapshot introuvable: {path}")
    with np.load(path) as data:
        return FieldSnapshot(
            time=float(data["time"]), x=data["x"], y=data["y"], D=data["D"], regions=data["regions"]
        )


def write_diagnostics(run_dir: PathLike, rows: Sequence[DiagnosticRow]) -> Path:
    return write_csv(
        Path(run_dir) / DIAGNOSTICS_NAME,
        ["t", "interior_energy", "exterior_energy", "shielding"],
        [(r.time, r.interior_energy, r.exterior_energy, r.shielding) for r in rows],
    )


def write_manifest(run_dir: PathLike, manifest: RunManifest) -> Path:
    path = atomic_write_text(Path(run_dir) / MANIFEST_NAME, manifest.model_dump_json(indent=2) + "\n")
    logger.info(f"Manifeste écrit: {path} (statut {manifest.status})")
    return path
