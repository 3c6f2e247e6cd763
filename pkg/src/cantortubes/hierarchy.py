"""Nested rectangle generations over the solved arcs.

Level 1 is the unit square; every next level places children along the
level's circular arc by rotating the parent's bottom-left corner about the
arc center in equal angle steps.  Shallow levels are materialized outright;
deep levels (populations run into the billions) are reached lazily through
closed-form anchors indexed by child paths.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .arcs import ArcSolution, solve_table_arcs
from .dyadic import ceil_frac
from .errors import ConstructionError, PopulationCapError
from .numerics import arith_error, default_precision, frac_to_mpf, workprec
from .reports import VerificationReport
from .sequences import SequenceTable

DEFAULT_MATERIALIZATION_CAP = 2_000_000


@dataclass(frozen=True, eq=False)
class RectNode:
    """Axis-parallel rectangle: exact width, bottom-left anchor, and the
    height inherited from the next sibling anchor."""

    level: int
    path: tuple
    anchor: object  # complex point (mpc)
    width: Fraction
    height: object  # mpf

    @property
    def x(self):
        return self.anchor.real

    @property
    def y(self):
        return self.anchor.imag

    def contain_slack(self, z):
        """Smallest signed distance of z to the four sides; >= 0 iff z lies
        in the closed rectangle.  Evaluate under a working precision."""
        w = frac_to_mpf(self.width)
        return min(
            z.real - self.anchor.real,
            self.anchor.real + w - z.real,
            z.imag - self.anchor.imag,
            self.anchor.imag + self.height - z.imag,
        )

    def corners_float(self) -> tuple:
        x0, y0 = float(self.anchor.real), float(self.anchor.imag)
        return (x0, y0, x0 + float(self.width), y0 + float(self.height))


@dataclass
class LevelSet:
    """One full generation: rectangles in anchor-x order (which equals the
    distance-from-origin order here), plus the child-count bookkeeping used
    to build it."""

    level: int
    rects: list
    N_prev: int | None = None
    counts_prev: tuple | None = None

    def __len__(self):
        return len(self.rects)

    def anchors_float(self):
        import numpy as np

        return np.array([[float(r.anchor.real), float(r.anchor.imag)]
                         for r in self.rects])


def unit_level(prec: int) -> LevelSet:
    with workprec(prec):
        root = RectNode(level=1, path=(), anchor=mpmath.mpc(0, 0),
                        width=Fraction(1), height=mpmath.mpf(1))
    return LevelSet(level=1, rects=[root])


def child_anchor(parent_anchor, sol: ArcSolution, k: int, prec: int | None = None):
    """Anchor of the k-th child: rotate the parent anchor clockwise by
    (k-1) angle steps about the arc center.  k = 1 returns the parent."""
    if k < 1:
        raise ValueError(f"child index must be >= 1, got {k}")
    if k == 1:
        return parent_anchor
    with workprec(prec or sol.prec):
        rot = mpmath.expj(-frac_to_mpf((k - 1) * sol.sub_angle))
        return sol.center_c * (1 - rot) + rot * parent_anchor


def child_rect(a_k, a_k1, delta_next: Fraction, level: int, path: tuple) -> RectNode:
    """Child rectangle spanning delta_next in x from a_k and reaching up to
    the next anchor's height.  The next anchor must lie strictly up-right."""
    if not (a_k1.real > a_k.real and a_k1.imag > a_k.imag):
        raise ConstructionError(
            f"next anchor {a_k1} is not strictly above and to the right of "
            f"{a_k}; spacing assumption violated at level {level}, path {path}")
    return RectNode(level=level, path=path, anchor=a_k,
                    width=Fraction(delta_next), height=a_k1.imag - a_k.imag)


def count_children(parent: RectNode, sol: ArcSolution, hi: int,
                   prec: int | None = None) -> int:
    """Largest m such that children 1..m stay inside the parent, via binary
    search on the monotone criterion "anchor k+1 lies in the parent".

    `hi` must be a known strict upper bound for the count; use
    `count_search_bound` (the sandwich bound, valid at every level, unlike
    the angle-step ratio which is attained at level 1).  The predicate is
    verified false there before the search is trusted.
    Containment decisions re-evaluate at doubled precision when the slack is
    suspiciously close to zero.
    """
    prec = prec or sol.prec

    def slack(k: int, p: int):
        with workprec(p):
            a = child_anchor(parent.anchor, sol, k + 1, prec=p)
            return parent.contain_slack(a)

    def pred(k: int) -> bool:
        s = slack(k, prec)
        guard = mpmath.mpf(2) ** (-(prec // 2))
        if abs(s) < guard:
            s = slack(k, prec * 2)
        return s >= 0

    if not pred(1):
        return 0
    if pred(hi):
        raise ConstructionError(
            f"containment did not terminate below the angle-ratio bound {hi}; "
            "monotone-exit assumption violated")
    lo = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def count_search_bound(table: SequenceTable, n: int) -> int:
    """Strict upper bound for per-parent child counts at level n, from the
    two-sided count sandwich (valid at every level; the angle-step ratio is
    *attained* at level 1, so it cannot serve as a strict bracket there)."""
    ratio = table.Delta_(n) / table.Delta_(n + 1)
    return ceil_frac(ratio * (1 + table.c2 * table.delta_(n - 1))) + 1


def build_level(prev: LevelSet, sol: ArcSolution, table: SequenceTable,
                cap: int = DEFAULT_MATERIALIZATION_CAP,
                prec: int | None = None, counts: tuple | None = None) -> LevelSet:
    """Materialize the next generation: uniform child count N = min over
    parents, exactly N children per parent, globally ordered by anchor x."""
    prec = prec or sol.prec
    n = prev.level
    if counts is None:
        hi = count_search_bound(table, n)
        counts = tuple(count_children(r, sol, hi, prec) for r in prev.rects)
    N = min(counts)
    if N == 0:
        raise ConstructionError(f"a level-{n} parent admits no children")
    population = len(prev.rects) * N
    if population > cap:
        raise PopulationCapError(level=n + 1, population=population, cap=cap)

    delta_next = table.delta_(n + 1)
    rects = []
    with workprec(prec):
        for parent in prev.rects:
            anchors = [child_anchor(parent.anchor, sol, k, prec=prec)
                       for k in range(1, N + 2)]
            for k in range(1, N + 1):
                rects.append(child_rect(
                    anchors[k - 1], anchors[k], delta_next,
                    level=n + 1, path=parent.path + (k,),
                ))
    out = LevelSet(level=n + 1, rects=rects, N_prev=N, counts_prev=counts)
    xs = [float(r.anchor.real) for r in rects]
    if any(a >= b for a, b in zip(xs, xs[1:])):
        raise ConstructionError("materialized level is not in anchor-x order")
    return out


class Construction:
    """A sequence table, its solved arcs, and cached access to materialized
    levels, exact child counts, and lazy path-indexed anchors."""

    def __init__(self, table: SequenceTable, prec: int | None = None,
                 cap: int = DEFAULT_MATERIALIZATION_CAP,
                 sols: tuple | None = None, angle_tol_log2: int = -60):
        self.table = table
        self.prec = prec or default_precision(table)
        self.sols = sols if sols is not None else solve_table_arcs(
            table, self.prec, rel_tol_log2=angle_tol_log2)
        self.cap = cap
        self._levels = {1: unit_level(self.prec)}
        self._counts: dict[int, tuple] = {}
        self._lazy_counts: dict[tuple, int] = {}

    def cache_key(self) -> str:
        """Hash identifying the table and working precision; level caches
        are only valid under the same key."""
        import hashlib
        import json

        blob = json.dumps({"table": self.table.to_json(), "prec": self.prec},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def save_levels(self, path):
        """Binary cache of the materialized levels (full precision)."""
        import pickle
        from pathlib import Path

        payload = {"key": self.cache_key(), "levels": {}, "counts": self._counts}
        for n, level in self._levels.items():
            payload["levels"][n] = {
                "N_prev": level.N_prev,
                "counts_prev": level.counts_prev,
                "rects": [(r.path, r.anchor.real._mpf_, r.anchor.imag._mpf_,
                           r.width, r.height._mpf_) for r in level.rects],
            }
        Path(path).write_bytes(pickle.dumps(payload))

    def load_levels(self, path) -> bool:
        """Restore a level cache; returns False (and loads nothing) when the
        cache was written for a different table or precision."""
        import pickle
        from pathlib import Path

        payload = pickle.loads(Path(path).read_bytes())
        if payload["key"] != self.cache_key():
            return False
        with workprec(self.prec):
            for n, blob in payload["levels"].items():
                rects = [
                    RectNode(level=n, path=tuple(p),
                             anchor=mpmath.mpc(mpmath.mpf(xr), mpmath.mpf(xi)),
                             width=Fraction(w), height=mpmath.mpf(h))
                    for p, xr, xi, w, h in blob["rects"]]
                self._levels[n] = LevelSet(level=n, rects=rects,
                                           N_prev=blob["N_prev"],
                                           counts_prev=blob["counts_prev"])
        self._counts.update(payload["counts"])
        return True

    # -- materialized levels -------------------------------------------------

    def sol(self, n: int) -> ArcSolution:
        """Arc solution used to subdivide level n (1-based)."""
        return self.sols[n - 1]

    def level(self, n: int) -> LevelSet:
        if not 1 <= n <= self.table.depth:
            raise ValueError(f"level {n} outside table depth {self.table.depth}")
        if n not in self._levels:
            prev = self.level(n - 1)
            self._levels[n] = build_level(prev, self.sol(n - 1), self.table,
                                          cap=self.cap, prec=self.prec,
                                          counts=self.counts(n - 1))
        return self._levels[n]

    def materializable_depth(self) -> int:
        """Deepest level that fits the materialization cap."""
        n = max(self._levels)
        while n < self.table.depth:
            try:
                self.level(n + 1)
            except PopulationCapError:
                return n
            n += 1
        return n

    def counts(self, n: int) -> tuple:
        """Per-parent child counts at level n; needs only level n itself."""
        if n not in self._counts:
            level = self.level(n)
            hi = count_search_bound(self.table, n)
            self._counts[n] = tuple(
                count_children(r, self.sol(n), hi, self.prec)
                for r in level.rects)
        return self._counts[n]

    def N(self, n: int) -> int:
        """Uniform child count at level n (min over the level's parents).
        Exact while level n itself is materializable."""
        return min(self.counts(n))

    def population(self, n: int) -> int:
        """Exact rectangle count of level n (a product of uniform counts,
        no enumeration)."""
        pop = 1
        for q in range(1, n):
            pop *= self.N(q)
        return pop

    # -- lazy access by path -------------------------------------------------

    def anchor_by_path(self, path) -> object:
        """Anchor of the level-(len(path)+1) rectangle addressed by child
        indices; composes the child-anchor map level by level."""
        path = tuple(path)
        if len(path) > len(self.sols):
            raise ValueError(
                f"path of length {len(path)} exceeds table depth {self.table.depth}")
        with workprec(self.prec):
            p = mpmath.mpc(0, 0)
            for i, k in enumerate(path):
                if k < 1:
                    raise ValueError(f"path index {k} out of range at level {i + 1}")
                p = child_anchor(p, self.sols[i], k, prec=self.prec)
            return p

    def rect_by_path(self, path) -> RectNode:
        path = tuple(path)
        if not path:
            return self.level(1).rects[0]
        parent = self.anchor_by_path(path[:-1])
        sol = self.sols[len(path) - 1]
        k = path[-1]
        with workprec(self.prec):
            a = child_anchor(parent, sol, k, prec=self.prec)
            a2 = child_anchor(parent, sol, k + 1, prec=self.prec)
            return child_rect(a, a2, self.table.delta_(len(path) + 1),
                              level=len(path) + 1, path=path)

    def count_children_by_path(self, path) -> int:
        """Per-parent child count for a lazily addressed parent."""
        path = tuple(path)
        if path not in self._lazy_counts:
            parent = self.rect_by_path(path)
            hi = count_search_bound(self.table, parent.level)
            self._lazy_counts[path] = count_children(
                parent, self.sol(parent.level), hi, self.prec)
        return self._lazy_counts[path]

    def sample_parent_paths(self, parent_level: int, n_samples: int,
                            rng: random.Random) -> list:
        """Uniformly sampled paths addressing level-`parent_level` parents.
        Uses exact uniform counts while available, per-parent counts beyond."""
        exact = []
        lvl = 1
        while lvl < parent_level:
            try:
                exact.append(self.N(lvl))
            except PopulationCapError:
                break
            lvl += 1
        paths = []
        for _ in range(n_samples):
            path = []
            for i in range(parent_level - 1):
                if i < len(exact):
                    bound = exact[i]
                else:
                    bound = self.count_children_by_path(tuple(path))
                path.append(rng.randint(1, bound))
            paths.append(tuple(path))
        return paths


def verify_spacing(cons: Construction, child_level: int,
                   n_samples: int | None = None,
                   rng: random.Random | None = None) -> VerificationReport:
    """Check the spacing bounds for consecutive same-parent child anchors at
    `child_level`: height increments within c1*theta of the height scale,
    x-advances within 3*c1*theta of the expected stride, and x-gaps of at
    least three widths.

    With `n_samples` unset, every consecutive pair of the materialized level
    is checked; otherwise pairs are sampled through lazy anchors.
    """
    table = cons.table
    n = child_level - 1  # parent level
    if n < 1:
        raise ValueError("child_level must be >= 2")
    theta = table.theta_(child_level)
    Delta = table.Delta_(child_level)
    delta = table.delta_(child_level)
    stride = table.delta_(n) / table.Delta_(n) * Delta
    c1 = table.c1
    sol = cons.sol(n)

    rep = VerificationReport(
        title=f"spacing of level-{child_level} children "
              f"({'all pairs' if n_samples is None else f'{n_samples} sampled pairs'})")
    err = arith_error(cons.prec, scale=1.0, ops=64)

    pairs = []
    with workprec(cons.prec):
        if n_samples is None:
            level = cons.level(child_level)
            for a, b in zip(level.rects, level.rects[1:]):
                if a.path[:-1] == b.path[:-1]:
                    pairs.append((b.anchor - a.anchor))
        else:
            rng = rng or random.Random(0)
            parents = cons.sample_parent_paths(n, n_samples, rng)
            for ppath in parents:
                cnt = cons.count_children_by_path(ppath)
                if cnt < 1:
                    continue
                k = rng.randint(1, cnt)
                pa = cons.anchor_by_path(ppath)
                a = child_anchor(pa, sol, k, prec=cons.prec)
                b = child_anchor(pa, sol, k + 1, prec=cons.prec)
                pairs.append(b - a)

        if not pairs:
            raise ConstructionError("no consecutive child pairs to verify")
        bound_y = float(c1 * theta)
        bound_x = float(3 * c1 * theta)
        gap = float(3 * delta)
        worst_y = worst_x = worst_gap = None
        Dm, Sm = frac_to_mpf(Delta), frac_to_mpf(stride)
        for d in pairs:
            my = bound_y - abs(float(Dm - d.imag))
            mx = bound_x - abs(float(Sm - d.real))
            mg = float(d.real) - gap
            worst_y = my if worst_y is None else min(worst_y, my)
            worst_x = mx if worst_x is None else min(worst_x, mx)
            worst_gap = mg if worst_gap is None else min(worst_gap, mg)

    rep.stats = {
        "pairs": len(pairs),
        "child_level": child_level,
        "bound_y": bound_y,
        "bound_x": bound_x,
        "min_gap_required": gap,
    }
    rep.add_inequality(
        "height increment within c1*theta of the height scale", worst_y, err,
        detail=f"worst over {len(pairs)} pairs")
    rep.add_inequality(
        "x-advance within 3*c1*theta of the expected stride", worst_x, err,
        detail=f"worst over {len(pairs)} pairs")
    rep.add_inequality(
        "anchor x-gap at least 3x the child width", worst_gap, err,
        detail=f"worst over {len(pairs)} pairs")
    return rep


def verify_level_invariants(cons: Construction, n: int) -> VerificationReport:
    """Structural invariants of a materialized level: ordering, projection
    disjointness, height control, and the exact first rectangle."""
    table = cons.table
    level = cons.level(n)
    rep = VerificationReport(title=f"level-{n} structure ({len(level)} rects)")
    err = arith_error(cons.prec, scale=1.0, ops=64)

    with workprec(cons.prec):
        first = level.rects[0]
        rep.add("first rectangle anchored at the origin",
                "pass" if first.anchor == 0 else "fail")
        rep.add("widths equal the level width scale exactly",
                "pass" if all(r.width == table.delta_(n) for r in level.rects)
                else "fail")
        if n >= 2:
            sol_res = float(cons.sol(n - 1).residual) * float(cons.sol(n - 1).radius)
            rep.add_equality("first rectangle height equals the height scale",
                             float(first.height - frac_to_mpf(table.Delta_(n))),
                             err + 4 * sol_res)

        xs = [r.anchor.real for r in level.rects]
        ys = [r.anchor.imag for r in level.rects]
        mono = all(a < b for a, b in zip(xs, xs[1:])) and \
            all(a < b for a, b in zip(ys, ys[1:]))
        rep.add("anchors strictly increasing in x and y",
                "pass" if mono else "fail")

        w = frac_to_mpf(table.delta_(n))
        min_gap = None
        for a, b in zip(level.rects, level.rects[1:]):
            g = float(b.anchor.real - (a.anchor.real + w))
            min_gap = g if min_gap is None else min(min_gap, g)
        if min_gap is not None:
            rep.add_inequality(
                "x-projections disjoint with gaps of 2x the width",
                min_gap - 2 * float(table.delta_(n)), err)

        min_y_gap = None
        for a, b in zip(level.rects, level.rects[1:]):
            g = float(b.anchor.imag - (a.anchor.imag + a.height))
            min_y_gap = g if min_y_gap is None else min(min_y_gap, g)
        if min_y_gap is not None:
            rep.add_inequality("y-projections non-overlapping",
                               min_y_gap + 10 * err, err,
                               detail="shared endpoints allowed")

        if n >= 2:
            hb = float(table.c1 * table.theta_(n))
            worst = min(hb - abs(float(r.height - frac_to_mpf(table.Delta_(n))))
                        for r in level.rects)
            rep.add_inequality(
                "heights within c1*theta of the height scale", worst, err)

        inside = all(
            float(r.anchor.real) >= 0 and float(r.anchor.imag) >= 0
            and float(r.anchor.real + frac_to_mpf(r.width)) <= 1 + 10 * err
            and float(r.anchor.imag + r.height) <= 1 + 10 * err
            for r in level.rects)
        rep.add("rectangles contained in the unit square",
                "pass" if inside else "fail")

    rep.stats = {"level": n, "rects": len(level)}
    return rep


def verify_counts(cons: Construction, max_parent_level: int) -> VerificationReport:
    """Exact rational checks on the child counts: the two-sided sandwich
    around the height-scale ratio (with width scale delta_0 := 1 at the first
    level) and the strict angle-ratio upper bound."""
    table = cons.table
    rep = VerificationReport(title="child count bounds")
    rep.stats = {"N": {}}
    for n in range(1, max_parent_level + 1):
        N = cons.N(n)
        rep.stats["N"][n] = N
        ratio = table.Delta_(n) / table.Delta_(n + 1)
        lo = ratio * (1 - table.c2 * table.delta_(n - 1))
        hi = ratio * (1 + table.c2 * table.delta_(n - 1))
        rep.add(f"N_{n} sandwich lower bound", "pass" if N >= lo else "fail",
                margin=float(N - lo), detail=f"N={N}, bound={float(lo):.6g}")
        rep.add(f"N_{n} sandwich upper bound", "pass" if N <= hi else "fail",
                margin=float(hi - N), detail=f"N={N}, bound={float(hi):.6g}")
        # The strict angle-ratio bound genuinely fails at n = 1, where the
        # first level's unit width removes all headroom and the count equals
        # the ratio exactly; it holds with huge margin from n = 2 on.
        angle_ratio = table.theta_(n) / table.theta_(n + 1)
        rep.add(f"N_{n} below the angle-step ratio",
                "pass" if N < angle_ratio else "fail",
                margin=float(angle_ratio - N),
                detail=f"N={N}, ratio={float(angle_ratio):.6g}")
        per_parent = cons.counts(n)
        rep.add(f"level-{n} per-parent counts within the same sandwich",
                "pass" if all(lo <= m <= hi for m in per_parent) else "fail",
                detail=f"min={min(per_parent)}, max={max(per_parent)}")
    return rep
