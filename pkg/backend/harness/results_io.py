"""Plot-ready CSV output and mesh snapshots."""
import logging
from pathlib import Path
from typing import Iterable, Union

import pandas as pd

from harness.studies import CSV_COLUMNS, RunRecord
from modules.Mesh_Module.mesh import Mesh, export_mesh_text
from utils.errors import ResultsIOError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def records_frame(records: Iterable[RunRecord]) -> pd.DataFrame:
    rows = [r.to_dict() for r in records]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def emit_results(records: Iterable[RunRecord], path: Union[str, Path]) -> Path:
    """Write records as CSV; missing values (h, error, eoc, eff_index) are blank."""
    path = Path(path)
    frame = records_frame(records)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="")
    except OSError as e:
        raise ResultsIOError(f"Could not write results: {e}", path=str(path)) from e
    logger.info(f"Wrote {len(frame)} records to {path}")
    return path


def read_results(path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    try:
        return pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as e:
        raise ResultsIOError(f"Could not read results: {e}", path=str(path)) from e


class MeshSnapshotWriter:
    """Mesh sink writing <directory>/<run>_level<k>.mesh files."""

    def __init__(self, directory: Union[str, Path], run: str):
        self.directory = Path(directory)
        self.run = run
        self.written = []

    def __call__(self, level: int, mesh: Mesh):
        path = self.directory / f"{self.run}_level{level:03d}.mesh"
        try:
            export_mesh_text(mesh, path)
        except OSError as e:
            raise ResultsIOError(f"Could not write mesh snapshot: {e}", path=str(path)) from e
        self.written.append(path)
        logger.debug(f"Mesh snapshot {path}")
