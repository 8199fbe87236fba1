"""Multi-seeded Graver augmentation.

Each seed is improved by walking along signed basis elements: a move is
taken when it stays inside the bounds and strictly lowers the objective
(ties never accepted, so descent is strict and termination finite).  The
default policy is first-improvement over a cyclic sweep that resumes just
past the last accepted move; best-improvement rescans the whole basis per
step.  Terminal points from all seeds are collected, the best kept, and
the spread of terminal values classifies how rugged the landscape is.

Seeds are augmented independently: workers share the immutable basis and
instance, own their scratch state and random source, and results are merged
by seed index, so reports are identical at any parallelism degree.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graver import (
    Assignment,
    BrickCardinality,
    Cardinality,
    ConstraintKind,
    CoordinateCardinality,
    Explicit,
    GraverBasis,
    build_basis,
)
from .problems import InfeasibleError, QuadraticInstance, check_feasible, objective
from .seeds import seeds_cbqp, seeds_qap, seeds_qsap1, seeds_qsap2

POLICIES = ("first", "best")


@dataclass
class AugmentationResult:
    """Terminal point of one seed's descent, with a path-length audit trail."""

    seed_index: int
    terminal_x: np.ndarray
    terminal_f: object
    steps: int
    moves_scanned: int
    sampler_assisted: bool = False


@dataclass
class SolveReport:
    name: str
    best: AugmentationResult
    results: list[AugmentationResult]
    terminal_value_counts: dict
    best_points: list[np.ndarray]
    landscape: str
    policy: str
    rng_seed: int
    sampler_assisted: bool = False
    seeds: list = field(default_factory=list)

    @property
    def seed_count(self) -> int:
        return len(self.results)

    @property
    def distinct_terminal_values(self) -> int:
        return len(self.terminal_value_counts)

    @property
    def best_share(self) -> float:
        return self.terminal_value_counts[self.best.terminal_f] / len(self.results)


@dataclass
class MovePrep:
    """State-independent per-element data shared by every seed of a run.

    ``pairs`` holds (c.g, g'Qg) per canonical element; both are reused
    across signs ((-g)'Q(-g) = g'Qg, and c.(-g) just flips in the delta
    formula).  For numeric instances the padded (index, value) matrices and
    array views used by the vectorized scanner are carried along too.
    """

    pairs: list
    idxm: Optional[np.ndarray] = None
    valm: Optional[np.ndarray] = None
    cg_arr: Optional[np.ndarray] = None
    qgg_arr: Optional[np.ndarray] = None
    max_weight: int = 1

    @property
    def dense(self) -> bool:
        return self.idxm is not None


def prepare_moves(inst: QuadraticInstance, basis: GraverBasis) -> MovePrep:
    """One pass over the basis serving a whole multi-seed run.

    Numeric dtypes are batched through numpy (provided every int64
    intermediate provably fits); Fraction data and oversized integers fall
    back to exact scalar loops and never get the vectorized arrays.
    """
    supports = basis.support_lists()
    if not supports:
        return MovePrep(pairs=[])
    numeric = inst.Q.dtype != object and inst.c.dtype != object
    max_weight = 1
    if numeric:
        max_weight = max(sum(abs(v) for v in val) for _, val in supports)
        numeric = _int64_headroom_ok(inst, max_weight)
    if not numeric:
        c = inst.c.tolist()
        out = []
        for idx, val in supports:
            cg = sum(c[i] * v for i, v in zip(idx, val))
            qgg = 0
            for i, vi in zip(idx, val):
                row = inst.Q[i, :].tolist()
                qgg += vi * sum(row[j] * vj for j, vj in zip(idx, val))
            out.append((cg, qgg))
        return MovePrep(pairs=out)
    width = max(len(idx) for idx, _ in supports)
    count = len(supports)
    idxm = np.zeros((count, width), dtype=np.int64)
    valm = np.zeros((count, width), dtype=np.int64)
    for e, (idx, val) in enumerate(supports):
        idxm[e, : len(idx)] = idx
        valm[e, : len(val)] = val  # padded zeros contribute nothing
    cg = (inst.c[idxm] * valm).sum(axis=1)
    qgg = np.empty(count, dtype=np.result_type(inst.Q.dtype, np.int64))
    block = max(1, 4_000_000 // (width * width))
    for start in range(0, count, block):
        stop = min(count, start + block)
        gathered = inst.Q[idxm[start:stop, :, None], idxm[start:stop, None, :]]
        qgg[start:stop] = np.einsum(
            "ea,eab,eb->e", valm[start:stop], gathered, valm[start:stop]
        )
    return MovePrep(
        pairs=list(zip(cg.tolist(), qgg.tolist())),
        idxm=idxm,
        valm=valm,
        cg_arr=cg,
        qgg_arr=qgg,
        max_weight=max_weight,
    )


class _ScalarScanner:
    """Move evaluation in plain Python scalars: exact for int and Fraction
    data, and the only backend usable with object-dtype instances.

    Signed move j covers basis element j // 2, with +g on even j and -g on
    odd j.  x and w = (Q+Q')x are kept as lists; deltas read only a move's
    support, and w is updated sparsely on accepted moves.
    """

    def __init__(self, inst: QuadraticInstance, x: np.ndarray, supports, prepared):
        self.n = inst.size
        self.supports = supports
        self.prepared = prepared
        self.n_moves = 2 * len(supports)
        self.c = inst.c.tolist()
        self.qrows = [inst.Q[i, :].tolist() for i in range(self.n)]
        self.qcols = [inst.Q[:, i].tolist() for i in range(self.n)]
        self.lower = inst.lower.tolist()
        self.upper = inst.upper.tolist()
        self.x = [int(v) for v in x.tolist()]
        if inst.Q.dtype == object or np.issubdtype(inst.Q.dtype, np.integer):
            # python ints cannot overflow; this backend is the exact one
            self.w = [
                sum(
                    self.qrows[j][i] * xi + self.qcols[j][i] * xi
                    for i, xi in enumerate(self.x)
                    if xi
                )
                for j in range(self.n)
            ]
        else:
            self.w = ((inst.Q + inst.Q.T) @ np.asarray(x, dtype=inst.Q.dtype)).tolist()

    def prepare_support(self, idx, val):
        """(c.g, g'Qg) for one support, e.g. a fresh sampler draw."""
        cg = sum(self.c[i] * v for i, v in zip(idx, val))
        qgg = 0
        for i, vi in zip(idx, val):
            row = self.qrows[i]
            qgg += vi * sum(row[j] * vj for j, vj in zip(idx, val))
        return cg, qgg

    def delta_support(self, idx, val, sign, cg, qgg):
        x, lower, upper = self.x, self.lower, self.upper
        for i, v in zip(idx, val):  # bounds first: cheaper than the dot product
            nv = x[i] + sign * v
            if nv < lower[i] or nv > upper[i]:
                return None
        wg = sum(self.w[i] * v for i, v in zip(idx, val))
        return sign * (cg + wg) + qgg

    def apply_support(self, idx, val, sign):
        for i, v in zip(idx, val):
            self.x[i] += sign * v
        for i, v in zip(idx, val):
            sv = sign * v
            row = self.qrows[i]
            col = self.qcols[i]
            w = self.w
            for j in range(self.n):
                inc = row[j] + col[j]
                if inc:
                    w[j] += sv * inc

    def _move(self, j):
        e, odd = divmod(j, 2)
        idx, val = self.supports[e]
        return idx, val, 1 - 2 * odd, self.prepared[e]

    def try_from(self, pointer):
        """First feasible strictly improving move in one cyclic pass from
        ``pointer``: (signed index, moves examined), or (-1, n_moves)."""
        for off in range(self.n_moves):
            j = (pointer + off) % self.n_moves
            idx, val, sign, (cg, qgg) = self._move(j)
            d = self.delta_support(idx, val, sign, cg, qgg)
            if d is not None and d < 0:
                return j, off + 1
        return -1, self.n_moves

    def scan_best(self):
        """Most improving feasible move over all of them (first wins ties)."""
        best_d = None
        best_j = -1
        for j in range(self.n_moves):
            idx, val, sign, (cg, qgg) = self._move(j)
            d = self.delta_support(idx, val, sign, cg, qgg)
            if d is not None and d < 0 and (best_d is None or d < best_d):
                best_d = d
                best_j = j
        return best_j, self.n_moves

    def apply_move(self, j):
        idx, val, sign, _ = self._move(j)
        self.apply_support(idx, val, sign)

    def terminal(self):
        return np.array(self.x, dtype=np.int64)


class _BlockScanner:
    """Vectorized twin of :class:`_ScalarScanner` for numeric instances.

    Moves are evaluated in blocks of a few thousand through padded
    (index, value) matrices; on integer data the arithmetic is identical to
    the scalar backend (int64 everywhere, headroom checked by the caller),
    so both backends produce the same move sequence.
    """

    BLOCK = 4096

    def __init__(self, inst: QuadraticInstance, x: np.ndarray, supports, prep: MovePrep):
        self.n = inst.size
        self.supports = supports
        self.n_moves = 2 * len(supports)
        self.c = inst.c
        self.Q = inst.Q
        self.lower = inst.lower
        self.upper = inst.upper
        self.x = np.asarray(x, dtype=np.int64).copy()
        dtype = np.result_type(inst.Q.dtype, np.int64)
        self.w = ((inst.Q + inst.Q.T) @ self.x).astype(dtype)
        self.idxm = prep.idxm
        self.valm = prep.valm
        self.cg = prep.cg_arr
        self.qgg = prep.qgg_arr

    def prepare_support(self, idx, val):
        idx = np.asarray(idx, dtype=np.int64)
        val = np.asarray(val, dtype=np.int64)
        cg = self.c[idx] @ val
        qgg = val @ self.Q[np.ix_(idx, idx)] @ val
        return cg, qgg

    def delta_support(self, idx, val, sign, cg, qgg):
        idx = np.asarray(idx, dtype=np.int64)
        val = np.asarray(val, dtype=np.int64)
        moved = self.x[idx] + sign * val
        if np.any(moved < self.lower[idx]) or np.any(moved > self.upper[idx]):
            return None
        return sign * (cg + self.w[idx] @ val) + qgg

    def apply_support(self, idx, val, sign):
        idx = np.asarray(idx, dtype=np.int64)
        val = np.asarray(val, dtype=np.int64)
        self.x[idx] += sign * val
        self.w += sign * (self.Q[:, idx] @ val + val @ self.Q[idx, :])

    def _scan_block(self, start, count):
        """Improving signed moves among the ``count`` moves from ``start``
        (cyclic): (absolute indices in scan order, their deltas)."""
        seq = (start + np.arange(count, dtype=np.int64)) % self.n_moves
        e = seq >> 1
        sign = 1 - 2 * (seq & 1)
        idx = self.idxm[e]
        val = self.valm[e]
        moved = self.x[idx] + sign[:, None] * val
        feasible = np.all((moved >= self.lower[idx]) & (moved <= self.upper[idx]), axis=1)
        wg = (self.w[idx] * val).sum(axis=1)
        delta = sign * (self.cg[e] + wg) + self.qgg[e]
        improving = feasible & (delta < 0)
        return seq[improving], delta[improving]

    def try_from(self, pointer):
        remaining = self.n_moves
        examined = 0
        at = pointer
        while remaining > 0:
            count = min(self.BLOCK, remaining)
            hits, _ = self._scan_block(at, count)
            if hits.size:
                j = int(hits[0])
                return j, examined + int((j - at) % self.n_moves) + 1
            examined += count
            at = (at + count) % self.n_moves
            remaining -= count
        return -1, examined

    def scan_best(self):
        best_d = None
        best_j = -1
        for at in range(0, self.n_moves, self.BLOCK):
            count = min(self.BLOCK, self.n_moves - at)
            hits, deltas = self._scan_block(at, count)
            for j, d in zip(hits.tolist(), deltas.tolist()):
                if best_d is None or d < best_d:
                    best_d = d
                    best_j = j
        return best_j, self.n_moves

    def apply_move(self, j):
        e, odd = divmod(j, 2)
        idx, val = self.supports[e]
        self.apply_support(idx, val, 1 - 2 * odd)

    def terminal(self):
        return self.x.copy()


def _int64_headroom_ok(inst: QuadraticInstance, max_weight: int) -> bool:
    """Conservative bound that every int64 intermediate in the block scanner
    stays far from overflow; anything larger falls back to exact scalars."""
    maxq = int(np.abs(inst.Q).max(initial=0))
    maxc = int(np.abs(inst.c).max(initial=0))
    maxb = int(max(np.abs(inst.lower).max(initial=0), np.abs(inst.upper).max(initial=0), 1))
    bound = max_weight * (maxc + 2 * maxq * inst.size * maxb) + max_weight**2 * maxq
    return bound < 2**62


def _pick_scanner(inst, x0, supports, prep: MovePrep):
    if prep.dense and len(supports) >= 256:
        return _BlockScanner(inst, x0, supports, prep)
    return _ScalarScanner(inst, x0, supports, prep.pairs)


def augment(
    inst: QuadraticInstance,
    basis: GraverBasis,
    x0,
    policy: str = "first",
    sampler_budget: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    seed_index: int = 0,
    prep: Optional[MovePrep] = None,
) -> AugmentationResult:
    """Descend from a feasible point until no signed basis move improves.

    The returned point carries a local-optimality certificate relative to
    the enumerated elements: no feasible signed move strictly improves it.
    When the basis is sampler-backed, each stall additionally tries
    ``sampler_budget`` random high-length liftings (default 10 * dim) before
    termination; accepted sampler moves mark the result sampler-assisted and
    restrict the certificate to the enumerated part.

    ``prep`` is the output of :func:`prepare_moves` for this (instance,
    basis) pair; multi-seed callers pass it in so it is computed once.
    """
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}")
    x0 = np.asarray(x0, dtype=np.int64)
    if not check_feasible(inst, x0):
        raise InfeasibleError(f"starting point infeasible for {inst.name!r}")

    supports = basis.support_lists()
    if prep is None:
        prep = prepare_moves(inst, basis)
    scanner = _pick_scanner(inst, x0, supports, prep)
    if basis.sampler is not None and sampler_budget is None:
        sampler_budget = 10 * inst.size
    if basis.sampler is not None and rng is None:
        rng = np.random.default_rng(0)

    steps = 0
    scanned = 0
    sampler_assisted = False

    def descend():
        nonlocal steps, scanned
        pointer = 0
        while scanner.n_moves:
            if policy == "first":
                j, examined = scanner.try_from(pointer)
            else:
                j, examined = scanner.scan_best()
            scanned += examined
            if j < 0:
                return
            scanner.apply_move(j)
            steps += 1
            pointer = (j + 1) % scanner.n_moves

    while True:
        descend()
        if basis.sampler is None or not sampler_budget:
            break
        accepted = False
        for _ in range(sampler_budget):
            g = basis.sampler.draw(rng)
            idx = [i for i, _ in g.entries]
            val = [v for _, v in g.entries]
            cg, qgg = scanner.prepare_support(idx, val)
            scanned += 1
            d = scanner.delta_support(idx, val, 1, cg, qgg)
            if d is not None and d < 0:
                scanner.apply_support(idx, val, 1)
                steps += 1
                accepted = True
                sampler_assisted = True
        if not accepted:
            break

    terminal = scanner.terminal()
    return AugmentationResult(
        seed_index=seed_index,
        terminal_x=terminal,
        terminal_f=objective(inst, terminal),
        steps=steps,
        moves_scanned=scanned,
        sampler_assisted=sampler_assisted,
    )


def verify_local_optimality(
    inst: QuadraticInstance, basis: GraverBasis, x
) -> list[tuple[int, int]]:
    """Independent post-pass: list of (element index, sign) moves that are
    feasible and strictly improving at x.  Empty means certified terminal.

    Uses direct objective evaluation, not the incremental delta path.
    """
    x = np.asarray(x, dtype=np.int64)
    fx = objective(inst, x)
    violations = []
    for e, g in enumerate(basis.elements):
        for sign in (1, -1):
            y = x.copy()
            for i, v in g.entries:
                y[i] += sign * v
            if np.any(y < inst.lower) or np.any(y > inst.upper):
                continue
            if objective(inst, y) < fx:
                violations.append((e, sign))
    return violations


def generate_seeds(
    inst: QuadraticInstance,
    basis: GraverBasis,
    count: int,
    rng: np.random.Generator,
    walk_len_range: Optional[tuple[int, int]] = None,
) -> list[np.ndarray]:
    """Class-appropriate feasible starting points for an instance."""
    kind = inst.kind
    if isinstance(kind, Cardinality):
        return seeds_cbqp(rng, kind.n, int(inst.b[0]), count)
    if isinstance(kind, BrickCardinality):
        return seeds_qsap1(rng, kind.n, kind.k, inst.b, count)
    if isinstance(kind, CoordinateCardinality):
        return seeds_qsap2(rng, kind.n, kind.k, inst.b, count)
    if isinstance(kind, Assignment):
        return seeds_qap(rng, kind.n, kind.k, inst.b, count, basis, walk_len_range)
    raise ValueError(f"no seed sampler for constraint kind {kind!r}")


def default_seed_count(kind: ConstraintKind) -> int:
    """50 seeds for plain cardinality problems, k*n for the block families."""
    if isinstance(kind, (BrickCardinality, CoordinateCardinality, Assignment)):
        return kind.n * kind.k
    return 50


def classify_landscape(
    report_or_counts,
    best_f=None,
    max_easy_values: int = 5,
    min_best_share: float = 0.5,
) -> str:
    """Bucket a terminal-value histogram into one of three regimes.

    One distinct terminal value looks convex; a handful of values with the
    best one reached from at least half the seeds is an easy non-convex
    landscape; anything more scattered is hard.
    """
    if isinstance(report_or_counts, SolveReport):
        counts = report_or_counts.terminal_value_counts
        best_f = report_or_counts.best.terminal_f
    else:
        counts = dict(report_or_counts)
        if best_f is None:
            best_f = min(counts)
    total = sum(counts.values())
    if total == 0:
        raise ValueError("empty report")
    distinct = len(counts)
    if distinct == 1:
        return "convex-like"
    share = counts[best_f] / total
    if distinct <= max_easy_values and share >= min_best_share:
        return "easy-nonconvex"
    return "hard-nonconvex"


def solve(
    inst: QuadraticInstance,
    seed_count: Optional[int] = None,
    policy: str = "first",
    parallelism: int = 1,
    rng_seed: int = 0,
    max_cycle_len: Optional[int] = None,
    enumeration_cap: int = 10**6,
    sampler_budget: Optional[int] = None,
    walk_len_range: Optional[tuple[int, int]] = None,
    seeds: Optional[Sequence] = None,
    basis: Optional[GraverBasis] = None,
) -> SolveReport:
    """Build the basis, seed, augment every seed, and report.

    Deterministic for a fixed ``rng_seed`` and policy regardless of the
    parallelism degree: worker random streams are spawned per seed index
    and results are merged by index, never by completion order.
    """
    if basis is None:
        if isinstance(inst.kind, Explicit):
            from .oracle import pottier_graver

            basis = pottier_graver(inst.kind.rows)
        else:
            basis = build_basis(inst.kind, max_cycle_len, enumeration_cap)

    master = np.random.SeedSequence(rng_seed)
    if seeds is None:
        if seed_count is None:
            seed_count = default_seed_count(inst.kind)
        seed_rng = np.random.default_rng(master.spawn(1)[0])
        seeds = generate_seeds(inst, basis, seed_count, seed_rng, walk_len_range)
    seeds = [np.asarray(s, dtype=np.int64) for s in seeds]
    if not seeds:
        raise InfeasibleError("no seeds to augment")
    worker_streams = master.spawn(len(seeds) + 1)[1:]
    prep = prepare_moves(inst, basis)

    def run(i: int) -> AugmentationResult:
        rng = np.random.default_rng(worker_streams[i])
        return augment(
            inst,
            basis,
            seeds[i],
            policy=policy,
            sampler_budget=sampler_budget,
            rng=rng,
            seed_index=i,
            prep=prep,
        )

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(run, range(len(seeds))))
    else:
        results = [run(i) for i in range(len(seeds))]

    best = min(results, key=lambda r: (r.terminal_f, r.seed_index))
    counts = dict(Counter(r.terminal_f for r in results))
    unique_best: dict[bytes, np.ndarray] = {}
    for r in results:
        if r.terminal_f == best.terminal_f:
            unique_best.setdefault(r.terminal_x.tobytes(), r.terminal_x)
    report = SolveReport(
        name=inst.name,
        best=best,
        results=results,
        terminal_value_counts=counts,
        best_points=list(unique_best.values()),
        landscape="",
        policy=policy,
        rng_seed=rng_seed,
        sampler_assisted=any(r.sampler_assisted for r in results),
        seeds=seeds,
    )
    report.landscape = classify_landscape(report)
    return report
