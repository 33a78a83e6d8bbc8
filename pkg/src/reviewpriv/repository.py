# src/reviewpriv/repository.py

import io
import re
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .engine.instance import Assignment, PublicWeights
from .engine.simulation import ExperimentConfig
from .exceptions import InstanceError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_HEADER = re.compile(r'^#\s*n=(\d+)\s+loads=([\d,\s]+)$')

class InstanceRepository:
    """
    File-backed data access layer for reviewpriv.

    Public weights and score tables are ragged CSVs (one line per paper) under a
    `# n=<n> loads=<l1,l2,...>` header; a single load stands for every reviewer.
    Assignments are CSVs with columns paper, reviewer, weight. Vectors, bounds and
    experiment configurations are JSON. Relative paths resolve against `root`.
    """
    def __init__(self, root: Optional[PathLike] = None):
        """
        Args:
            root (Optional[PathLike]): Base directory for relative paths. Defaults to
                the working directory.
        """
        self._root = Path(root) if root is not None else Path.cwd()
        logger.info(f"InstanceRepository initialized at {self._root}")

    def resolve(self, path: PathLike) -> Path:
        """
        Args:
            path (PathLike): Absolute, or relative to the repository root.

        Returns:
            Path: The path to read or write.
        """
        path = Path(path)
        return path if path.is_absolute() else self._root / path

    # --- Ragged matrices ---

    def _read_ragged(self, path: PathLike) -> Tuple[Tuple[Tuple[float, ...], ...], Tuple[int, ...]]:
        resolved = self.resolve(path)
        try:
            text = resolved.read_text()
        except OSError as e:
            logger.error(f"Could not read {resolved}: {e}", exc_info=True)
            raise

        lines = text.splitlines()
        header = lines[0].strip() if lines else ''
        match = _HEADER.match(header)
        if not match:
            raise InstanceError(f"{resolved}: first line must read '# n=<n> loads=<loads>', got '{header}'.")
        n = int(match.group(1))
        loads = [int(x) for x in match.group(2).replace(' ', '').split(',') if x]
        if len(loads) == 1:
            loads = loads * n
        elif len(loads) != n:
            raise InstanceError(f"{resolved}: header lists {len(loads)} loads for n={n} reviewers.")

        body = [line for line in lines[1:] if line.strip() and not line.lstrip().startswith('#')]
        if not body:
            raise InstanceError(f"{resolved}: no paper rows found.")
        field_counts = [line.count(',') + 1 for line in body]
        try:
            frame = pd.read_csv(io.StringIO('\n'.join(body)), header=None, names=range(max(field_counts)), dtype=float)
        except ValueError as e:
            raise InstanceError(f"{resolved}: malformed row ({e}).") from e

        rows = []
        for line, count, values in zip(body, field_counts, frame.to_numpy()):
            fields = values[:count]
            # shorter lines are padded with NaN past their own field count
            if not np.isfinite(fields).all():
                logger.error(f"{resolved}: rejected row '{line}'")
                raise InstanceError(f"{resolved}: row '{line}' has an empty or non-finite field.")
            rows.append(tuple(fields.tolist()))
        return tuple(rows), tuple(loads)

    def _write_ragged(self, path: PathLike, rows: Sequence[Sequence[float]], loads: Sequence[int]) -> Path:
        resolved = self.resolve(path)
        loads = list(loads)
        header_loads = str(loads[0]) if len(set(loads)) == 1 else ','.join(str(l) for l in loads)
        body = '\n'.join(','.join(repr(float(x)) for x in row) for row in rows)
        resolved.write_text(f"# n={len(loads)} loads={header_loads}\n{body}\n")
        logger.info(f"Wrote {len(rows)} rows to {resolved}")
        return resolved

    def load_public_weights(self, path: PathLike) -> PublicWeights:
        """
        Reads a public weights file.

        Args:
            path (PathLike): Ragged CSV under a `# n=... loads=...` header.

        Returns:
            PublicWeights: One row per paper, with the header's reviewer loads.

        Raises:
            InstanceError: If the header or any row is malformed.
        """
        rows, loads = self._read_ragged(path)
        return PublicWeights(rows=rows, reviewer_loads=loads)

    def save_public_weights(self, pw: PublicWeights, path: PathLike) -> Path:
        """
        Writes public weights in the format load_public_weights reads.

        Args:
            pw (PublicWeights): The per-paper weights and reviewer loads.
            path (PathLike): Destination file.

        Returns:
            Path: The file written.
        """
        return self._write_ragged(path, pw.rows, pw.reviewer_loads)

    def load_score_table(self, path: PathLike) -> Tuple[List[List[float]], Tuple[int, ...]]:
        """
        Reads per-paper scores in review order (same format as public weights).

        Args:
            path (PathLike): Ragged CSV under a `# n=... loads=...` header.

        Returns:
            Tuple: The score rows and the header's reviewer loads.
        """
        rows, loads = self._read_ragged(path)
        return [list(r) for r in rows], loads

    # --- Assignments ---

    def load_assignment(self, path: PathLike, n: Optional[int] = None) -> Assignment:
        """
        Reads an assignment CSV with columns paper, reviewer, weight.

        Args:
            path (PathLike): The CSV file.
            n (Optional[int]): Reviewer count; defaults to the largest reviewer id plus one.

        Returns:
            Assignment: The validated assignment.
        """
        frame = pd.read_csv(self.resolve(path))
        missing = {'paper', 'reviewer', 'weight'} - set(frame.columns)
        if missing:
            raise InstanceError(f"Assignment file is missing columns: {sorted(missing)}")
        edges = tuple(zip(frame['paper'].astype(int), frame['reviewer'].astype(int), frame['weight'].astype(float)))
        n = n if n is not None else int(frame['reviewer'].max()) + 1
        return Assignment(n=n, m=int(frame['paper'].max()) + 1, edges=edges)

    def save_assignment(self, assignment: Assignment, path: PathLike) -> Path:
        """Writes the assignment's edges as a paper, reviewer, weight CSV."""
        resolved = self.resolve(path)
        pd.DataFrame(list(assignment.edges), columns=['paper', 'reviewer', 'weight']).to_csv(resolved, index=False)
        return resolved

    # --- JSON documents ---

    def read_json(self, path: PathLike) -> Any:
        """
        Args:
            path (PathLike): A JSON file.

        Returns:
            Any: The decoded document.

        Raises:
            InstanceError: If the file is not valid JSON.
        """
        resolved = self.resolve(path)
        try:
            return json.loads(resolved.read_text())
        except json.JSONDecodeError as e:
            logger.error(f"{resolved} is not valid JSON: {e}")
            raise InstanceError(f"{resolved} is not valid JSON: {e}") from e

    def write_json(self, payload: Any, path: PathLike) -> Path:
        """Writes `payload` as indented JSON and returns the path written."""
        resolved = self.resolve(path)
        resolved.write_text(json.dumps(payload, indent=2) + '\n')
        return resolved

    def load_vector(self, path: PathLike, key: str = 'r') -> np.ndarray:
        """A vector stored as a bare JSON list or under `key` in a JSON object."""
        payload = self.read_json(path)
        if isinstance(payload, dict):
            if key not in payload:
                raise InstanceError(f"{self.resolve(path)}: expected a '{key}' field.")
            payload = payload[key]
        try:
            vector = np.asarray(payload, dtype=float)
        except (TypeError, ValueError) as e:
            raise InstanceError(f"{self.resolve(path)}: vector entries must be numbers.") from e
        if vector.ndim != 1:
            raise InstanceError(f"{self.resolve(path)}: expected a flat list of numbers.")
        return vector

    def load_experiment_config(self, path: PathLike) -> ExperimentConfig:
        """
        Reads an experiment config; every key is optional.

        Args:
            path (PathLike): A JSON object file.

        Returns:
            ExperimentConfig: The validated configuration.
        """
        raw: Dict[str, Any] = self.read_json(path)
        if not isinstance(raw, dict):
            raise InstanceError(f"{self.resolve(path)}: an experiment config must be a JSON object.")
        return ExperimentConfig.from_dict(raw)
