"""Dataset ingestion (gas-sensor batch files) and synthetic regression problems."""

from __future__ import annotations

import logging
import re
import warnings
from pathlib import Path

import numpy as np

from ..objective import Dataset

log = logging.getLogger(__name__)

N_FEATURES = 128
ETHANOL_ID = 1
ETHANOL_ROWS = 2565


class ParseError(ValueError):
    def __init__(self, message: str, source: str = "<input>", line: int | None = None):
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.source = source
        self.line = line


def parse_lines(lines, n_features: int = N_FEATURES, source: str = "<input>"):
    """Parse ``gas;conc 1:v1 ... n:vn`` records into ``(gas_ids, conc, features)``."""
    gas, conc, rows = [], [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != n_features + 1:
            raise ParseError(
                f"expected {n_features + 1} tokens, found {len(tokens)}", source, lineno
            )
        label = tokens[0].split(";")
        if len(label) != 2:
            raise ParseError(f"label {tokens[0]!r} is not of the form gas;concentration", source, lineno)
        try:
            g, c = int(label[0]), float(label[1])
        except ValueError:
            raise ParseError(f"bad label {tokens[0]!r}", source, lineno) from None
        values = np.empty(n_features)
        for j, tok in enumerate(tokens[1:], start=1):
            idx, sep, val = tok.partition(":")
            if not sep or idx != str(j):
                raise ParseError(f"feature token {tok!r} breaks the 1..{n_features} index order", source, lineno)
            try:
                values[j - 1] = float(val)
            except ValueError:
                raise ParseError(f"bad feature value {val!r}", source, lineno) from None
        gas.append(g)
        conc.append(c)
        rows.append(values)
    if not rows:
        raise ParseError("no data rows", source)
    return np.array(gas), np.array(conc), np.vstack(rows)


def _batch_key(path: Path):
    # batch2 before batch10
    m = re.search(r"(\d+)", path.stem)
    return (int(m.group(1)) if m else -1, path.name)


def batch_files(path) -> list[Path]:
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("batch*.dat"), key=_batch_key)
        if not files:
            raise FileNotFoundError(f"no batch*.dat files under {path}")
        return files
    if not path.exists():
        raise FileNotFoundError(path)
    return [path]


def standardize(x) -> np.ndarray:
    """Per-column zero mean and unit variance; constant columns are only centered."""
    x = np.asarray(x, dtype=np.float64)
    sd = x.std(axis=0)
    return (x - x.mean(axis=0)) / np.where(sd > 0, sd, 1.0)


def load_ethanol(path, standardize_features: bool = True, gas_id: int = ETHANOL_ID,
                 expected_rows: int | None = ETHANOL_ROWS, n_features: int = N_FEATURES) -> Dataset:
    """Load the Ethanol rows of a batch file or a directory of ``batch*.dat`` files.

    Targets stay raw concentrations.  A row count other than ``expected_rows``
    only warns, since archive versions differ.
    """
    xs, ys = [], []
    for f in batch_files(path):
        with open(f, encoding="utf-8") as fh:
            gas, conc, feats = parse_lines(fh, n_features, str(f))
        keep = gas == gas_id
        xs.append(feats[keep])
        ys.append(conc[keep])
    x = np.vstack(xs)
    y = np.concatenate(ys)
    if expected_rows is not None and x.shape[0] != expected_rows:
        warnings.warn(
            f"expected {expected_rows} rows after filtering, got {x.shape[0]}", RuntimeWarning, stacklevel=2
        )
    if x.shape[0] == 0:
        raise ParseError(f"no rows with gas id {gas_id}", str(path))
    log.info("loaded %d x %d rows with gas id %d", *x.shape, gas_id)
    return Dataset(standardize(x) if standardize_features else x, y)


def write_batch(path, dataset: Dataset, gas_id: int = ETHANOL_ID) -> None:
    """Write a scalar-target dataset in the batch-file format (round-trip exact)."""
    if dataset.k != 1:
        raise ValueError("the batch format holds scalar targets only")
    with open(path, "w", encoding="utf-8") as fh:
        for xi, yi in zip(dataset.x, dataset.y[:, 0]):
            feats = " ".join(f"{j}:{v!r}" for j, v in enumerate(xi.tolist(), start=1))
            fh.write(f"{gas_id};{float(yi)!r} {feats}\n")


def synth_gaussian(d: int, m: int, seed: int, scale: float = 1.0, noise: float = 0.1) -> Dataset:
    """``X ~ N(0, 1)``, ``w* ~ N(0, scale^2 / d)``, ``y = X w* + noise * scale * N(0, 1)``."""
    if d < 1 or m < 1:
        raise ValueError("d and m must be positive")
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(m, d))
    w_true = rng.normal(size=d) * scale / np.sqrt(d)
    y = x @ w_true + noise * scale * rng.normal(size=m)
    return Dataset(x, y)


def synth_illcond(y1: float, y2: float) -> Dataset:
    """Two instances ``e_1 -> y1`` and ``e_2 -> y2``."""
    return Dataset(np.eye(2), np.array([y1, y2], dtype=np.float64))
