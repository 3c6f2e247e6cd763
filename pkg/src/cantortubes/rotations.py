"""Rotated copies of the construction and their tube coverings.

A clockwise rotation by theta is paired with a translation vector v(theta)
chosen so that consecutive rotated copies overlap heavily.  On the dyadic
angle grid (multiples of the per-level angle steps) v is defined by a
three-case recursion; elsewhere it is the left limit along the grid, with a
certified Cauchy tail bound.  Tube families inflate a level's rectangles,
rotate them, and translate them by v; their union over one level's grid is
the level's stage of the covering set.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .arcs import arc_point
from .dyadic import floor_frac
from .errors import OffGridError, PopulationCapError
from .hierarchy import Construction
from .numerics import frac_to_mpf, workprec
from .reports import VerificationReport

CASE_ROTATION_ONLY = "rotation-only"      # multiples of the coarsest step
CASE_ANCHOR = "anchor"                    # v = first-parent child anchor
CASE_ROTATED_ANCHOR = "rotated-anchor"    # anchor rotated by a block angle
CASE_COMPOSED = "composed"                # coarse part + rotated remainder


@dataclass(frozen=True)
class VLimitResult:
    """Left-limit evaluation of v at an arbitrary angle."""

    theta: Fraction
    point: object            # mpc
    error_bound: float
    grid_level: int
    converged: bool
    evaluations: tuple       # ((m, point), ...) partial values per grid level

    @property
    def xy(self) -> tuple:
        return (float(self.point.real), float(self.point.imag))


@dataclass(frozen=True)
class TranslationEntry:
    index: int
    theta: Fraction
    x: float
    y: float
    case: str


@dataclass
class TranslationTable:
    level: int
    grid_step: Fraction
    entries: list

    def __len__(self):
        return len(self.entries)


@dataclass
class TubeFamily:
    """All tubes of one rotation angle: congruent rotated boxes sharing one
    rotation and one translation, so only the centers vary."""

    level: int
    angle_index: int
    angle: Fraction
    variant: str              # "T" (inflated level boxes) or "T_prime" (doubled)
    C: Fraction
    half_width: float
    half_height: float
    rotation: float           # box axes rotated by this signed angle
    centers: np.ndarray       # (m, 2) world coordinates
    v: tuple

    def __len__(self):
        return len(self.centers)

    def local_coords(self, points: np.ndarray) -> np.ndarray:
        """World points (k, 2) -> coordinates in each box frame, (k, m, 2)."""
        ca, sa = np.cos(-self.rotation), np.sin(-self.rotation)
        d = points[:, None, :] - self.centers[None, :, :]
        return np.stack([ca * d[..., 0] - sa * d[..., 1],
                         sa * d[..., 0] + ca * d[..., 1]], axis=-1)

    def corners(self) -> np.ndarray:
        """Polygon corners of every box, (m, 4, 2), for rendering/raster."""
        hw, hh = self.half_width, self.half_height
        local = np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])
        ca, sa = np.cos(self.rotation), np.sin(self.rotation)
        rot = np.array([[ca, -sa], [sa, ca]])
        return self.centers[:, None, :] + local @ rot.T


@dataclass(frozen=True)
class ContainmentReport:
    theta: float
    level: int
    C: float
    C_min: float
    C_min_single_family: float
    contained: bool
    family_index: int
    n_anchors: int
    sampled: bool
    worst_x_ratio: float
    worst_y_ratio: float
    v_error_bound: float
    scanned_all_families: bool

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


class RotationFamily:
    """Translation vectors, rotated copies, and tube families over one
    construction."""

    def __init__(self, cons: Construction):
        self.cons = cons
        self._memo: dict[Fraction, tuple] = {}
        self._grid_depth: int | None = None

    # -- angle grid ----------------------------------------------------------

    def grid_depth(self) -> int:
        """Finest grid level usable by the recursion: needs exact uniform
        counts at every coarser level."""
        if self._grid_depth is None:
            n = 1
            while n < self.cons.table.depth:
                try:
                    self.cons.N(n)
                except PopulationCapError:
                    break
                n += 1
            self._grid_depth = n
        return self._grid_depth

    def grid_level_of(self, theta: Fraction) -> int:
        """Coarsest level whose step divides theta."""
        theta = Fraction(theta)
        if not 0 <= theta <= 1:
            raise ValueError(f"angle must lie in [0, 1], got {theta}")
        for m in range(1, self.grid_depth() + 1):
            if (theta / self.cons.table.theta_(m)).denominator == 1:
                return m
        raise OffGridError(
            f"{theta} is not a multiple of any usable grid step "
            f"(finest: level {self.grid_depth()}); use translation_vector_limit")

    # -- translation vectors ---------------------------------------------------

    def v(self, theta: Fraction):
        """Translation vector on the dyadic angle grid (exact recursion)."""
        return self._v_tagged(Fraction(theta))[0]

    def v_case(self, theta: Fraction) -> str:
        return self._v_tagged(Fraction(theta))[1]

    def _v_tagged(self, theta: Fraction) -> tuple:
        if theta in self._memo:
            return self._memo[theta]
        table = self.cons.table
        if theta == 0:
            res = (mpmath.mpc(0, 0), CASE_ROTATION_ONLY)
            self._memo[theta] = res
            return res
        m = self.grid_level_of(theta)
        if m == 1:
            res = (mpmath.mpc(0, 0), CASE_ROTATION_ONLY)
            self._memo[theta] = res
            return res
        n = m - 1
        theta_n = table.theta_(n)
        theta_m = table.theta_(m)
        j = floor_frac(theta / theta_n)
        rem = theta - j * theta_n
        K = rem / theta_m
        assert K.denominator == 1
        N_n = self.cons.N(n)
        q, k = divmod(int(K), N_n)
        sol = self.cons.sol(n)
        with workprec(self.cons.prec):
            base = arc_point(sol, k + 1)
            case = CASE_ANCHOR
            if q:
                base = mpmath.expj(-frac_to_mpf(q * N_n * theta_m)) * base
                case = CASE_ROTATED_ANCHOR
            if j:
                coarse, _ = self._v_tagged(j * theta_n)
                base = mpmath.expj(-frac_to_mpf(j * theta_n)) * base + coarse
                case = CASE_COMPOSED
        res = (base, case)
        self._memo[theta] = res
        return res

    def tail_bound(self, m: int) -> Fraction:
        """Certified bound on ||v(theta) - v(Theta_m)||: the increment chain
        2*Delta_j from level m through the table depth, plus the geometric
        tail beyond the table (next height scale is at most c*delta_D^e and
        the scales at least halve)."""
        table = self.cons.table
        D = table.depth
        tail = sum((2 * table.Delta_(j) for j in range(m, D + 1)), Fraction(0))
        beyond = table.c * table.delta_(D) ** table.p2_exponent(D)
        return tail + 4 * beyond

    def v_limit(self, theta, tol: float | None = None) -> VLimitResult:
        """Left-limit evaluation at an arbitrary angle in [0, 1]: evaluate at
        the grid points below theta on finer and finer grids until the
        remaining tail bound drops under tol (or the grid is exhausted, in
        which case the best value ships with its certified bound)."""
        theta = Fraction(theta)
        if not 0 <= theta <= 1:
            raise ValueError(f"angle must lie in [0, 1], got {theta}")
        if tol is not None and tol <= 0:
            raise ValueError("tol must be positive")
        table = self.cons.table
        evals = []
        converged = False
        level = 0
        for m in range(1, self.grid_depth() + 1):
            gm = floor_frac(theta / table.theta_(m)) * table.theta_(m)
            point = self.v(gm)
            evals.append((m, point))
            level = m
            if tol is not None and float(self.tail_bound(m)) < tol:
                converged = True
                break
        bound = float(self.tail_bound(level))
        if tol is not None and bound < tol:
            converged = True
        return VLimitResult(
            theta=theta, point=evals[-1][1], error_bound=bound,
            grid_level=level, converged=converged, evaluations=tuple(evals))

    def v_any(self, theta) -> tuple:
        """(point, error_bound) for exact-grid or arbitrary angles alike."""
        theta = Fraction(theta)
        try:
            return self.v(theta), 0.0
        except OffGridError:
            res = self.v_limit(theta)
            return res.point, res.error_bound

    def translation_table(self, level: int, cap: int = 200_000) -> TranslationTable:
        """Materialized v table on a level's full angle grid."""
        step = self.cons.table.theta_(level)
        count = floor_frac(1 / step) + 1
        if count > cap:
            raise PopulationCapError(level=level, population=count, cap=cap)
        entries = []
        for idx in range(count):
            th = idx * step
            point, case = self._v_tagged(th)
            entries.append(TranslationEntry(
                index=idx, theta=th,
                x=float(point.real), y=float(point.imag), case=case))
        return TranslationTable(level=level, grid_step=step, entries=entries)

    # -- rotated copies --------------------------------------------------------

    def gamma_anchors(self, theta, level: int, n_samples: int | None = None,
                      rng: random.Random | None = None) -> tuple:
        """Anchors of the level approximant rotated by -theta and translated
        by v(theta): ((m, 2) float array, v point, v error bound, sampled?).

        Uses the materialized level when it fits the cap, sampled lazy paths
        otherwise (`n_samples` required then).
        """
        theta = Fraction(theta)
        v, bound = self.v_any(theta)
        try:
            pts = self.cons.level(level).anchors_float()
            sampled = False
        except PopulationCapError:
            if n_samples is None:
                raise
            rng = rng or random.Random(0)
            paths = self.cons.sample_parent_paths(level, n_samples, rng)
            with workprec(self.cons.prec):
                pts = np.array([
                    [float(a.real), float(a.imag)]
                    for a in (self.cons.anchor_by_path(p) for p in paths)])
            sampled = True
        z = (pts[:, 0] + 1j * pts[:, 1]) * np.exp(-1j * float(theta)) \
            + complex(float(v.real), float(v.imag))
        return np.stack([z.real, z.imag], axis=1), v, bound, sampled

    # -- tube families -----------------------------------------------------------

    def tube_family(self, level: int, l: int, C=None, variant: str = "T") -> TubeFamily:
        """Rotated-box family at one grid angle: every level rectangle's
        anchor gets a centered box of half-extents C*theta x C*Delta ("T") or
        twice that ("T_prime"), all rotated by -l*theta_level and translated
        by v(l*theta_level)."""
        table = self.cons.table
        C = Fraction(C if C is not None else table.C_tube)
        if variant not in ("T", "T_prime"):
            raise ValueError(f"unknown variant {variant!r}")
        mult = 1 if variant == "T" else 2
        step = table.theta_(level)
        if l < 0 or l > floor_frac(1 / step):
            raise ValueError(f"angle index {l} outside 0..{floor_frac(1 / step)}")
        angle = l * step
        v, _ = self.v_any(angle)
        pts = self.cons.level(level).anchors_float()
        rot = -float(angle)
        z = (pts[:, 0] + 1j * pts[:, 1]) * np.exp(1j * rot) \
            + complex(float(v.real), float(v.imag))
        return TubeFamily(
            level=level, angle_index=l, angle=angle, variant=variant, C=C,
            half_width=mult * float(C * step),
            half_height=mult * float(C * table.Delta_(level)),
            rotation=rot,
            centers=np.stack([z.real, z.imag], axis=1),
            v=(float(v.real), float(v.imag)),
        )

    def besicovitch_stage(self, level: int, C=None, variant: str = "T",
                          cap: int = 5_000_000) -> list:
        """All tube families of one level: angle indices 0..floor(1/theta).
        The intersection of these unions over successive levels is the
        covering set; one level is one finite stage."""
        table = self.cons.table
        step = table.theta_(level)
        n_fam = floor_frac(1 / step) + 1
        pop = n_fam * len(self.cons.level(level).rects)
        if pop > cap:
            raise PopulationCapError(level=level, population=pop, cap=cap)
        return [self.tube_family(level, l, C, variant) for l in range(n_fam)]

    # -- containment -----------------------------------------------------------

    def check_containment(self, theta, n: int, C=None,
                          n_samples: int = 1000,
                          rng: random.Random | None = None) -> ContainmentReport:
        """Is the rotated level-(n+1) approximant inside the level-n tube
        union?  Reports the minimal sufficient C: each anchor is matched with
        the cheapest tube of the angle's own family, and the scan widens to
        every family only when that family cannot cover the anchor within C.
        """
        table = self.cons.table
        C = Fraction(C if C is not None else table.C_tube)
        theta = Fraction(theta)
        pts, _v, v_bound, sampled = self.gamma_anchors(
            theta, n + 1, n_samples=n_samples, rng=rng)
        theta_n = table.theta_(n)
        i0 = min(floor_frac(theta / theta_n), floor_frac(1 / theta_n))

        def needed_C(family: TubeFamily) -> np.ndarray:
            local = family.local_coords(pts)  # (k, m, 2)
            ratios = np.maximum(np.abs(local[..., 0]) / float(theta_n),
                                np.abs(local[..., 1]) / float(table.Delta_(n)))
            return ratios.min(axis=1)  # best tube per anchor

        fam = self.tube_family(n, i0, C, "T")
        local = fam.local_coords(pts)
        per_anchor_single = needed_C(fam)
        best = per_anchor_single.copy()
        scanned_all = False
        if best.max() > float(C):
            scanned_all = True
            for l in range(floor_frac(1 / theta_n) + 1):
                if l == i0:
                    continue
                best = np.minimum(best, needed_C(self.tube_family(n, l, C, "T")))

        worst = int(np.argmax(per_anchor_single))
        j_best = int(np.argmin(np.maximum(
            np.abs(local[worst, :, 0]) / float(theta_n),
            np.abs(local[worst, :, 1]) / float(table.Delta_(n)))))
        return ContainmentReport(
            theta=float(theta), level=n, C=float(C),
            C_min=float(best.max()),
            C_min_single_family=float(per_anchor_single.max()),
            contained=bool(best.max() <= float(C)),
            family_index=i0,
            n_anchors=len(pts),
            sampled=sampled,
            worst_x_ratio=float(np.abs(local[worst, j_best, 0]) / float(theta_n)),
            worst_y_ratio=float(np.abs(local[worst, j_best, 1]) / float(table.Delta_(n))),
            v_error_bound=float(v_bound),
            scanned_all_families=scanned_all,
        )


# -- module-level wrappers matching the operation surface ---------------------

def translation_vector(rf: RotationFamily, theta):
    """Translation vector for an on-grid angle; raises OffGridError off-grid."""
    return rf.v(theta)


def translation_vector_limit(rf: RotationFamily, theta, tol=None) -> VLimitResult:
    return rf.v_limit(theta, tol)


def gamma_theta(rf: RotationFamily, theta, level: int, **kw):
    return rf.gamma_anchors(theta, level, **kw)


def tube_family(rf: RotationFamily, level: int, l: int, C=None, variant="T"):
    return rf.tube_family(level, l, C, variant)


def besicovitch_stage(rf: RotationFamily, level: int, C=None, **kw):
    return rf.besicovitch_stage(level, C, **kw)


def check_containment(rf: RotationFamily, theta, n: int, C=None, **kw):
    return rf.check_containment(theta, n, C, **kw)


def empirical_v_bounds(rf: RotationFamily, n: int, n_samples: int = 400,
                       rng: random.Random | None = None) -> dict:
    """Measured constants K_x, K_y with |P_x(v)| <= K_x*theta_n and
    |P_y(v)| <= K_y*Delta_n over sampled on-grid angles below theta_n."""
    rng = rng or random.Random(0)
    table = rf.cons.table
    theta_n = table.theta_(n)
    finest = rf.grid_depth()
    K_x = K_y = 0.0
    count = 0
    for m in range(n + 1, finest + 1):
        step = table.theta_(m)
        max_idx = int(theta_n / step) - 1
        if max_idx < 1:
            continue
        idxs = {rng.randint(1, max_idx) for _ in range(n_samples // 2)}
        idxs.update(range(1, min(max_idx, 16) + 1))
        for idx in sorted(idxs):
            v = rf.v(idx * step)
            K_x = max(K_x, abs(float(v.real)) / float(theta_n))
            K_y = max(K_y, abs(float(v.imag)) / float(table.Delta_(n)))
            count += 1
    return {"level": n, "K_x": K_x, "K_y": K_y, "samples": count}


def verify_translation_invariants(rf: RotationFamily,
                                  rng: random.Random | None = None,
                                  n_thetas: int = 100) -> VerificationReport:
    """The limit-evaluation invariants: per-level increments within twice the
    height scale, on-grid stationarity, and honesty of the returned bound."""
    rng = rng or random.Random(0)
    cons = rf.cons
    table = cons.table
    rep = VerificationReport(title="translation-vector limit behaviour")
    depth = rf.grid_depth()

    worst_inc = None
    worst_honesty = None
    with workprec(cons.prec):
        for _ in range(n_thetas):
            theta = Fraction(rng.random()).limit_denominator(10**12)
            res = rf.v_limit(theta)
            evals = dict(res.evaluations)
            for m in range(1, depth):
                if m + 1 not in evals:
                    continue
                inc = abs(evals[m + 1] - evals[m])
                slack = float(2 * table.Delta_(m)) - float(inc)
                worst_inc = slack if worst_inc is None else min(worst_inc, slack)
                # Refining by one level moves the value by at most the bound
                # certified after evaluating at level m.
                honesty = float(rf.tail_bound(m)) - float(inc)
                worst_honesty = honesty if worst_honesty is None \
                    else min(worst_honesty, honesty)
    err = 1e-12
    rep.add_inequality("grid-refinement increments within 2*Delta_m",
                       worst_inc, err, detail=f"{n_thetas} random angles")
    rep.add_inequality("certified bound dominates the observed refinement",
                       worst_honesty, err)

    with workprec(cons.prec):
        stationary = True
        for m in range(1, depth + 1):
            step = table.theta_(m)
            idx = rng.randint(0, int(1 / step) - 1) if step < 1 else 0
            g = idx * step
            lim = rf.v_limit(g).point
            if abs(lim - rf.v(g)) > 1e-30:
                stationary = False
        rep.add("on-grid limit equals the recursion value",
                "pass" if stationary else "fail")
    return rep
