"""Quadratic integer program instances over the structured families.

An instance is min c.x + x'Qx subject to Ax = b, l <= x <= u with A given
by a :class:`~graveropt.graver.ConstraintKind`.  Q is stored as-is (it is
not assumed symmetric, let alone PSD).  Arithmetic follows the dtype of the
data: integer or Fraction entries evaluate exactly, float entries in double
precision; descent comparisons elsewhere always use a strict ``<`` with no
tolerance in either mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .graver import (
    Assignment,
    BrickCardinality,
    Cardinality,
    ConstraintKind,
    CoordinateCardinality,
    Explicit,
    SparseIntVector,
    realize_matrix,
)

PROBLEM_CLASSES = ("CBQP", "QSAP1", "QSAP2", "QAP")


class InfeasibleError(ValueError):
    """No lattice point satisfies the requested constraints."""


def kind_for_class(klass: str, n: int, k: Optional[int] = None) -> ConstraintKind:
    if klass == "CBQP":
        return Cardinality(n)
    if klass == "QSAP1":
        return BrickCardinality(n, k)
    if klass == "QSAP2":
        return CoordinateCardinality(n, k)
    if klass == "QAP":
        return Assignment(n, k)
    raise ValueError(f"unknown problem class {klass!r}")


def class_for_kind(kind: ConstraintKind) -> str:
    if isinstance(kind, Cardinality):
        return "CBQP"
    if isinstance(kind, BrickCardinality):
        return "QSAP1"
    if isinstance(kind, CoordinateCardinality):
        return "QSAP2"
    if isinstance(kind, Assignment):
        return "QAP"
    return "explicit"


@dataclass
class QuadraticInstance:
    """Immutable problem data; the realized constraint matrix is cached."""

    c: np.ndarray
    Q: np.ndarray
    kind: ConstraintKind
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    name: str = ""
    _A: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _mag: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c)
        self.Q = np.asarray(self.Q)
        self.b = np.asarray(self.b, dtype=np.int64)
        self.lower = np.asarray(self.lower, dtype=np.int64)
        self.upper = np.asarray(self.upper, dtype=np.int64)
        size = self.kind.dim
        if self.c.shape != (size,):
            raise ValueError(f"c must have shape ({size},), got {self.c.shape}")
        if self.Q.shape != (size, size):
            raise ValueError(f"Q must have shape ({size}, {size}), got {self.Q.shape}")
        if self.lower.shape != (size,) or self.upper.shape != (size,):
            raise ValueError("bounds must match the instance size")
        if np.any(self.lower > self.upper):
            raise ValueError("need l <= u componentwise")
        rows = realize_matrix(self.kind).shape[0]
        if self.b.shape != (rows,):
            raise ValueError(f"b must have shape ({rows},), got {self.b.shape}")

    @property
    def size(self) -> int:
        return self.kind.dim

    @property
    def matrix(self) -> np.ndarray:
        if self._A is None:
            self._A = realize_matrix(self.kind)
        return self._A


def _objective_scalar(inst: QuadraticInstance, x: np.ndarray):
    """Python-scalar evaluation: exact for ints and Fractions of any size."""
    xs = x.tolist()
    lin = sum(ci * xi for ci, xi in zip(inst.c.tolist(), xs))
    quad = 0
    for i, xi in enumerate(xs):
        if xi:
            row = inst.Q[i]
            quad += xi * sum(qij * xj for qij, xj in zip(row.tolist(), xs))
    return lin + quad


def _int64_safe(inst: QuadraticInstance, abs_sum: int) -> bool:
    """True when c.x + x'Qx provably fits int64 for any x with that 1-norm."""
    if not (np.issubdtype(inst.c.dtype, np.integer) and np.issubdtype(inst.Q.dtype, np.integer)):
        return True  # floats saturate rather than wrap; no exactness promised
    if inst._mag is None:
        inst._mag = (int(np.abs(inst.c).max(initial=0)), int(np.abs(inst.Q).max(initial=0)))
    maxc, maxq = inst._mag
    return maxq * abs_sum * abs_sum + maxc * abs_sum < 2**62


def objective(inst: QuadraticInstance, x) -> object:
    """c.x + x'Qx as a plain scalar (int, Fraction or float per the data)."""
    x = np.asarray(x)
    if x.shape != (inst.size,):
        raise ValueError(f"x must have shape ({inst.size},), got {x.shape}")
    if inst.Q.dtype == object or inst.c.dtype == object:
        return _objective_scalar(inst, x)
    if not _int64_safe(inst, int(np.abs(x).sum())):
        return _objective_scalar(inst, x)
    value = inst.c @ x + x @ inst.Q @ x
    return value.item() if isinstance(value, np.generic) else value


def batch_objective(inst: QuadraticInstance, points: np.ndarray) -> list:
    """Objective of every row of ``points`` (one scalar per row)."""
    points = np.asarray(points)
    if inst.Q.dtype == object or inst.c.dtype == object:
        return [objective(inst, row) for row in points]
    if points.shape[0] and not _int64_safe(inst, int(np.abs(points).sum(axis=1).max())):
        return [_objective_scalar(inst, row) for row in points]
    values = points @ inst.c + np.einsum("ij,jk,ik->i", points, inst.Q, points)
    return [v.item() for v in values]


def objective_delta(inst: QuadraticInstance, x, g: SparseIntVector) -> object:
    """f(x+g) - f(x) touching only g's support rows/columns of Q.

    Expands to c.g + x'(Q+Q')g + g'Qg, exact whenever the data are exact;
    no symmetry of Q is assumed.
    """
    x = np.asarray(x)
    if x.shape != (inst.size,) or g.dim != inst.size:
        raise ValueError("dimension mismatch between instance, x and g")
    xs = x.tolist()
    cl = inst.c.tolist()
    delta = sum(cl[i] * v for i, v in g.entries)
    for i, v in g.entries:
        row = inst.Q[i, :].tolist()
        col = inst.Q[:, i].tolist()
        delta += v * sum(xj * (row[j] + col[j]) for j, xj in enumerate(xs) if xj)
        delta += v * sum(vj * row[j] for j, vj in g.entries)
    return delta


def check_feasible(inst: QuadraticInstance, x) -> bool:
    """Ax = b and l <= x <= u, checked exactly."""
    x = np.asarray(x)
    if x.shape != (inst.size,):
        raise ValueError(f"x must have shape ({inst.size},), got {x.shape}")
    if np.any(x < inst.lower) or np.any(x > inst.upper):
        return False
    return bool(np.all(inst.matrix @ x == inst.b))


# ---------------------------------------------------------------------------
# k x n assignment matrices and vectorization
# ---------------------------------------------------------------------------

@dataclass
class Assignment2D:
    """Binary k x n matrix whose columns are the bricks of the flat vector."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=np.int64)
        if self.matrix.ndim != 2:
            raise ValueError("need a 2-d matrix")
        if np.any((self.matrix != 0) & (self.matrix != 1)):
            raise ValueError("entries must be 0/1")

    def vec(self) -> np.ndarray:
        """Column-stacked flat vector: column j lands in brick j."""
        return self.matrix.T.reshape(-1).copy()

    @classmethod
    def from_vec(cls, x, n: int, k: int) -> "Assignment2D":
        x = np.asarray(x, dtype=np.int64)
        if x.shape != (n * k,):
            raise ValueError(f"x must have shape ({n * k},), got {x.shape}")
        return cls(x.reshape(n, k).T)

    @property
    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)


# ---------------------------------------------------------------------------
# random instance generation
# ---------------------------------------------------------------------------

def generate_instance(
    rng: np.random.Generator,
    klass: str,
    n: int,
    k: Optional[int] = None,
    density: float = 1.0,
    value_range: tuple[int, int] = (-10, 10),
    convex: bool = False,
    name: Optional[str] = None,
) -> QuadraticInstance:
    """Random 0/1-bounded instance of one of the four problem classes.

    Q is a dense random integer matrix (not symmetrized, not PSD) with the
    given nonzero density; ``convex=True`` replaces it with M'M for a random
    integer M, which is PSD and keeps all arithmetic exact.  The right-hand
    side is always feasible: scalar b in [1, n-1] for CBQP, per-brick counts
    in [1, k] for QSAP1, per-slot counts in [1, n] for QSAP2, and for QAP
    the row/column sums of a random binary matrix (so the two halves agree).
    """
    if klass not in PROBLEM_CLASSES:
        raise ValueError(f"unknown problem class {klass!r}")
    if klass != "CBQP" and (k is None or k < 1):
        raise ValueError(f"class {klass} needs k >= 1")
    kind = kind_for_class(klass, n, k)
    size = kind.dim
    lo, hi = value_range

    c = rng.integers(lo, hi + 1, size=size).astype(np.int64)
    if convex:
        m = rng.integers(-3, 4, size=(size, size)).astype(np.int64)
        Q = m.T @ m
    else:
        Q = rng.integers(lo, hi + 1, size=(size, size)).astype(np.int64)
        if density < 1.0:
            Q = Q * (rng.random((size, size)) < density)

    if klass == "CBQP":
        b = np.array([rng.integers(1, n)], dtype=np.int64) if n > 1 else np.array([1])
    elif klass == "QSAP1":
        b = rng.integers(1, k + 1, size=n).astype(np.int64)
    elif klass == "QSAP2":
        b = rng.integers(1, n + 1, size=k).astype(np.int64)
    else:  # QAP: margins of a random binary matrix guarantee feasibility
        witness = (rng.random((k, n)) < 0.5).astype(np.int64)
        b = np.concatenate([witness.sum(axis=1), witness.sum(axis=0)])

    if name is None:
        shape = f"{n}" if klass == "CBQP" else f"{k}x{n}"
        name = f"{klass}-{shape}"
    return QuadraticInstance(
        c=c,
        Q=Q,
        kind=kind,
        b=b,
        lower=np.zeros(size, dtype=np.int64),
        upper=np.ones(size, dtype=np.int64),
        name=name,
    )


# ---------------------------------------------------------------------------
# instance file format
# ---------------------------------------------------------------------------

def _encode_number(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, np.generic):
        return v.item()
    return v


def _decode_number(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def _decode_array(data, shape):
    flat = [_decode_number(v) for row in data for v in row] if shape == 2 else [
        _decode_number(v) for v in data
    ]
    if any(isinstance(v, Fraction) for v in flat):
        arr = np.array(flat, dtype=object)
    elif any(isinstance(v, float) for v in flat):
        arr = np.array(flat, dtype=np.float64)
    else:
        arr = np.array(flat, dtype=np.int64)
    if shape == 2:
        rows = len(data)
        return arr.reshape(rows, -1)
    return arr


def serialize_instance(inst: QuadraticInstance) -> str:
    klass = class_for_kind(inst.kind)
    doc = {
        "name": inst.name,
        "class": klass,
        "n": getattr(inst.kind, "n", None),
        "k": getattr(inst.kind, "k", None),
        "c": [_encode_number(v) for v in inst.c.tolist()],
        "Q": [[_encode_number(v) for v in row] for row in inst.Q.tolist()],
        "b": inst.b.tolist(),
        "l": inst.lower.tolist(),
        "u": inst.upper.tolist(),
    }
    if isinstance(inst.kind, Explicit):
        doc["A"] = [list(row) for row in inst.kind.rows]
    return json.dumps(doc, indent=1)


def parse_instance(text: str) -> QuadraticInstance:
    doc = json.loads(text)
    klass = doc["class"]
    if klass == "explicit":
        kind: ConstraintKind = Explicit.from_matrix(doc["A"])
    else:
        kind = kind_for_class(klass, int(doc["n"]), doc.get("k") and int(doc["k"]))
    return QuadraticInstance(
        c=_decode_array(doc["c"], 1),
        Q=_decode_array(doc["Q"], 2),
        kind=kind,
        b=np.array(doc["b"], dtype=np.int64),
        lower=np.array(doc["l"], dtype=np.int64),
        upper=np.array(doc["u"], dtype=np.int64),
        name=doc.get("name", ""),
    )


def save_instance(inst: QuadraticInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_instance(inst) + "\n")


def load_instance(path) -> QuadraticInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())
