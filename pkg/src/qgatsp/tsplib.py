"""TSPLIB instance parsing, distance matrices and tour lengths.

Only the symmetric ``TYPE: TSP`` subset is handled: node coordinates
(``NODE_COORD_SECTION``), display coordinates (``DISPLAY_DATA_SECTION``) and
explicit weights in ``FULL_MATRIX``, ``UPPER_ROW``, ``LOWER_DIAG_ROW`` or
``UPPER_DIAG_ROW`` layout.

Cities are indexed from 0 internally. Files use 1-based node ids.

>>> inst = parse_instance('''NAME: tri
... DIMENSION: 3
... EDGE_WEIGHT_TYPE: EUC_2D
... NODE_COORD_SECTION
... 1 0 0
... 2 3 0
... 3 0 4
... EOF''')
>>> tour_length([0, 1, 2], distance_matrix(inst))
12.0
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "DistanceMetric",
    "TsplibError",
    "TspInstance",
    "BUNDLED_INSTANCES",
    "parse_instance",
    "format_instance",
    "load_instance",
    "resolve_metric",
    "distance_matrix",
    "tour_length",
    "validate_tour",
]

BUNDLED_INSTANCES = ("burma14", "ulysses16", "bayg29", "att48")

_KNOWN_TYPES = ("GEO", "ATT", "EUC_2D", "EXPLICIT")
_WEIGHT_FORMATS = ("FULL_MATRIX", "UPPER_ROW", "UPPER_DIAG_ROW", "LOWER_DIAG_ROW")


class TsplibError(ValueError):
    """Malformed or unsupported TSPLIB input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DistanceMetric(str, enum.Enum):
    """How pairwise distances are computed from an instance.

    ``EUCLID_RAW`` is plain real-valued Euclidean distance on the coordinate
    pairs of the file and is the default throughout the package. The other
    members are the canonical TSPLIB functions with their integer rounding.
    """

    EUCLID_RAW = "euclid"
    GEO = "geo"
    ATT = "att"
    EUC_2D = "euc_2d"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class TspInstance:
    name: str
    dimension: int
    declared_metric: str
    coords: np.ndarray | None = None
    explicit_weights: np.ndarray | None = None
    comment: str = ""
    coord_source: str = field(default="NODE_COORD_SECTION")

    def __post_init__(self):
        if self.dimension < 1:
            raise TsplibError(f"DIMENSION must be positive, got {self.dimension}")
        if self.declared_metric not in _KNOWN_TYPES:
            raise TsplibError(f"unknown EDGE_WEIGHT_TYPE {self.declared_metric!r}")
        if self.coords is None and self.explicit_weights is None:
            raise TsplibError("instance has neither coordinates nor explicit weights")
        if self.coords is not None:
            coords = np.array(self.coords, dtype=float)
            if coords.shape != (self.dimension, 2):
                raise TsplibError(
                    f"node count mismatch: expected {self.dimension} coordinate "
                    f"pairs, got {coords.shape[0] if coords.ndim else 0}"
                )
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)
        if self.explicit_weights is not None:
            w = np.array(self.explicit_weights, dtype=float)
            if w.shape != (self.dimension, self.dimension):
                raise TsplibError(f"explicit weights must be {self.dimension}x{self.dimension}")
            if not np.array_equal(w, w.T) or np.any(np.diag(w) != 0) or np.any(w < 0):
                raise TsplibError("explicit weights must be symmetric, nonnegative, zero diagonal")
            w.setflags(write=False)
            object.__setattr__(self, "explicit_weights", w)


def _to_number(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise TsplibError(f"malformed numeric token {token!r}", lineno) from None
    if not math.isfinite(value):
        raise TsplibError(f"non-finite numeric token {token!r}", lineno)
    return value


def _read_coord_section(lines, start, dimension, section):
    """Consume ``id x y`` rows until a non-numeric line; return (coords, next index)."""
    seen: dict[int, tuple[float, float]] = {}
    i = start
    while i < len(lines):
        lineno, text = lines[i]
        parts = text.split()
        if not parts or not _looks_numeric(parts[0]):
            break
        if len(parts) != 3:
            raise TsplibError(f"{section} row needs 'id x y', got {text!r}", lineno)
        node = _to_number(parts[0], lineno)
        if node != int(node):
            raise TsplibError(f"node id {parts[0]!r} is not an integer", lineno)
        node = int(node)
        if node in seen:
            raise TsplibError(f"duplicate node id {node}", lineno)
        seen[node] = (_to_number(parts[1], lineno), _to_number(parts[2], lineno))
        i += 1
    end_line = lines[i - 1][0] if i > start else lines[start - 1][0]
    if len(seen) != dimension:
        raise TsplibError(
            f"node count mismatch: {section} lists {len(seen)} nodes, DIMENSION is {dimension}",
            end_line,
        )
    if set(seen) != set(range(1, dimension + 1)):
        raise TsplibError(f"{section} node ids must be 1..{dimension}", end_line)
    return np.array([seen[k] for k in range(1, dimension + 1)], dtype=float), i


def _read_weight_section(lines, start, dimension, fmt):
    values: list[float] = []
    i = start
    while i < len(lines):
        lineno, text = lines[i]
        parts = text.split()
        if not parts or not _looks_numeric(parts[0]):
            break
        values.extend(_to_number(p, lineno) for p in parts)
        i += 1
    n = dimension
    w = np.zeros((n, n))
    expected = {
        "FULL_MATRIX": n * n,
        "UPPER_ROW": n * (n - 1) // 2,
        "UPPER_DIAG_ROW": n * (n + 1) // 2,
        "LOWER_DIAG_ROW": n * (n + 1) // 2,
    }[fmt]
    last_line = lines[i - 1][0] if i > start else lines[start - 1][0]
    if len(values) != expected:
        raise TsplibError(
            f"EDGE_WEIGHT_SECTION ({fmt}) needs {expected} values, got {len(values)}",
            last_line,
        )
    if fmt == "FULL_MATRIX":
        w = np.array(values).reshape(n, n)
    elif fmt == "UPPER_ROW":
        w[np.triu_indices(n, 1)] = values
        w = w + w.T
    elif fmt == "UPPER_DIAG_ROW":
        w[np.triu_indices(n)] = values
        w = w + np.triu(w, 1).T
    else:
        w[np.tril_indices(n)] = values
        w = w + np.tril(w, -1).T
    if not np.array_equal(w, w.T):
        raise TsplibError("EDGE_WEIGHT_SECTION is not symmetric", last_line)
    return w, i


def _looks_numeric(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def parse_instance(text: str) -> TspInstance:
    """Parse the contents of a symmetric TSPLIB ``.tsp`` file."""
    lines = [(k + 1, raw.strip()) for k, raw in enumerate(text.splitlines())]
    lines = [(k, s) for k, s in lines if s]
    header: dict[str, tuple[str, int]] = {}
    sections: dict[str, tuple[int, int]] = {}  # name -> (first data index, header line)

    i = 0
    while i < len(lines):
        lineno, s = lines[i]
        key = s.split(":", 1)[0].strip().upper()
        if key == "EOF":
            break
        if ":" in s and not key.endswith("_SECTION"):
            header[key] = (s.split(":", 1)[1].strip(), lineno)
            i += 1
            continue
        if key.endswith("_SECTION"):
            sections[key] = (i + 1, lineno)
            # skip section body; it is read once the header is complete
            i += 1
            while i < len(lines) and lines[i][1].split() and _looks_numeric(lines[i][1].split()[0]):
                i += 1
            continue
        raise TsplibError(f"unexpected line {s!r}", lineno)

    if "DIMENSION" not in header:
        raise TsplibError("missing DIMENSION", lines[-1][0] if lines else 1)
    dim_text, dim_line = header["DIMENSION"]
    dimension = _to_number(dim_text, dim_line)
    if dimension != int(dimension) or dimension < 1:
        raise TsplibError(f"DIMENSION must be a positive integer, got {dim_text!r}", dim_line)
    dimension = int(dimension)

    ptype = header.get("TYPE", ("TSP", 0))
    if ptype[0].upper() != "TSP":
        raise TsplibError(f"unsupported problem TYPE {ptype[0]!r}", ptype[1])
    if "EDGE_WEIGHT_TYPE" not in header:
        raise TsplibError("missing EDGE_WEIGHT_TYPE", dim_line)
    wtype, wline = header["EDGE_WEIGHT_TYPE"]
    wtype = wtype.upper()
    if wtype not in _KNOWN_TYPES:
        raise TsplibError(f"unknown EDGE_WEIGHT_TYPE {wtype!r}", wline)

    coords = None
    coord_source = "NODE_COORD_SECTION"
    for sec in ("NODE_COORD_SECTION", "DISPLAY_DATA_SECTION"):
        if sec in sections:
            coords, _ = _read_coord_section(lines, sections[sec][0], dimension, sec)
            coord_source = sec
            break

    weights = None
    if "EDGE_WEIGHT_SECTION" in sections:
        fmt, fline = header.get("EDGE_WEIGHT_FORMAT", ("FULL_MATRIX", dim_line))
        fmt = fmt.upper()
        if fmt not in _WEIGHT_FORMATS:
            raise TsplibError(f"unsupported EDGE_WEIGHT_FORMAT {fmt!r}", fline)
        weights, _ = _read_weight_section(lines, sections["EDGE_WEIGHT_SECTION"][0], dimension, fmt)
    elif wtype == "EXPLICIT":
        raise TsplibError("EXPLICIT instance without EDGE_WEIGHT_SECTION", wline)

    if coords is None and weights is None:
        raise TsplibError("no coordinate or weight section", lines[-1][0])

    return TspInstance(
        name=header.get("NAME", ("unnamed", 0))[0],
        dimension=dimension,
        declared_metric=wtype,
        coords=coords,
        explicit_weights=weights,
        comment=header.get("COMMENT", ("", 0))[0],
        coord_source=coord_source,
    )


def format_instance(inst: TspInstance) -> str:
    """Serialize an instance back to TSPLIB text (FULL_MATRIX for weights)."""
    out = [
        f"NAME: {inst.name}",
        "TYPE: TSP",
        f"DIMENSION: {inst.dimension}",
        f"EDGE_WEIGHT_TYPE: {inst.declared_metric}",
    ]
    if inst.comment:
        out.insert(1, f"COMMENT: {inst.comment}")
    if inst.explicit_weights is not None:
        out.append("EDGE_WEIGHT_FORMAT: FULL_MATRIX")
        out.append("EDGE_WEIGHT_SECTION")
        for row in inst.explicit_weights:
            out.append(" ".join(repr(float(v)) for v in row))
    if inst.coords is not None:
        section = inst.coord_source
        if inst.explicit_weights is None:
            section = "NODE_COORD_SECTION"
        out.append(section)
        for k, (x, y) in enumerate(inst.coords, start=1):
            out.append(f"{k} {float(x)!r} {float(y)!r}")
    out.append("EOF")
    return "\n".join(out) + "\n"


def load_instance(source: str | Path) -> TspInstance:
    """Load a ``.tsp`` file, or one of the bundled instances by bare name."""
    path = Path(source)
    if path.is_file():
        return parse_instance(path.read_text())
    stem = path.name.removesuffix(".tsp")
    if stem in BUNDLED_INSTANCES and not path.exists():
        ref = resources.files("qgatsp").joinpath("data").joinpath(f"{stem}.tsp")
        return parse_instance(ref.read_text())
    raise FileNotFoundError(f"cannot read instance {str(source)!r}")


def resolve_metric(inst: TspInstance, metric: DistanceMetric | str) -> DistanceMetric:
    """Map a CLI-style metric name to a concrete metric for ``inst``.

    ``"tsplib"`` selects the metric the file declares.
    """
    if isinstance(metric, str) and metric.lower() == "tsplib":
        return DistanceMetric(inst.declared_metric.lower())
    return DistanceMetric(metric)


def _nint(x):
    return np.floor(x + 0.5)


def _geo_radians(values: np.ndarray) -> np.ndarray:
    # TSPLIB's truncated PI is part of the reference definition
    pi = 3.141592
    deg = np.trunc(values)
    minutes = values - deg
    return pi * (deg + 5.0 * minutes / 3.0) / 180.0


def distance_matrix(inst: TspInstance, metric: DistanceMetric | str = DistanceMetric.EUCLID_RAW) -> np.ndarray:
    """Return the read-only N x N distance matrix of ``inst`` under ``metric``."""
    metric = resolve_metric(inst, metric)
    if metric is DistanceMetric.EXPLICIT:
        if inst.explicit_weights is None:
            raise TsplibError(f"{inst.name}: EXPLICIT metric needs an EDGE_WEIGHT_SECTION")
        return inst.explicit_weights
    if inst.coords is None:
        raise TsplibError(f"{inst.name}: metric {metric.value} needs coordinates")

    x = inst.coords[:, 0]
    y = inst.coords[:, 1]
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    if metric is DistanceMetric.EUCLID_RAW:
        d = np.sqrt(dx * dx + dy * dy)
    elif metric is DistanceMetric.EUC_2D:
        d = _nint(np.sqrt(dx * dx + dy * dy))
    elif metric is DistanceMetric.ATT:
        r = np.sqrt((dx * dx + dy * dy) / 10.0)
        t = _nint(r)
        d = np.where(t < r, t + 1.0, t)
    else:
        lat = _geo_radians(x)
        lon = _geo_radians(y)
        q1 = np.cos(lon[:, None] - lon[None, :])
        q2 = np.cos(lat[:, None] - lat[None, :])
        q3 = np.cos(lat[:, None] + lat[None, :])
        inner = np.clip(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3), -1.0, 1.0)
        d = np.trunc(6378.388 * np.arccos(inner) + 1.0)
    np.fill_diagonal(d, 0.0)
    d = np.maximum(d, d.T)  # guard tiny float asymmetries
    d.setflags(write=False)
    return d


def validate_tour(tour: Sequence[int], n: int) -> None:
    if len(tour) != n:
        raise ValueError(f"tour has {len(tour)} cities, expected {n}")
    if sorted(int(c) for c in tour) != list(range(n)):
        raise ValueError("tour is not a permutation of 0..N-1 (repeated or missing city)")


def tour_length(tour: Sequence[int], dmat: np.ndarray) -> float:
    """Length of the closed tour, including the edge back to the start."""
    validate_tour(tour, dmat.shape[0])
    t = np.asarray(tour, dtype=np.intp)
    return float(dmat[t, np.roll(t, -1)].sum())
