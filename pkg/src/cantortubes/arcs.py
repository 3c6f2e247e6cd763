"""Per-level circular-arc solving.

Each level n needs the circle through (0, 0) and (delta_n, Delta_n) whose
center sits on the perpendicular bisector of those points, below the x-axis,
such that the sub-arc from the origin to the intersection with the line
y = Delta_{n+1} subtends exactly theta_{n+1}.  Moving the center outward
along the bisector shrinks that angle monotonically to zero, so the solve is
a bracketed bisection in the signed center offset.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .dyadic import pow2
from .errors import BracketError, FeasibilityError
from .numerics import arith_error, frac_to_mpf, workprec
from .reports import VerificationReport

#: Default solve tolerance, relative to the target sub-arc angle.
REL_ANGLE_TOL = Fraction(1, 2**60)

_MONOTONE_GRID = 33
_MAX_DOUBLINGS = 600


@dataclass(frozen=True)
class ArcSolution:
    """Solved circle for one level: center below the x-axis, radius,
    the line intersection q, and the achieved sub-arc angle."""

    level: int
    center: tuple
    radius: object
    sub_angle: Fraction
    achieved: object
    q: tuple
    residual: object
    prec: int
    corner: tuple
    line_height: Fraction

    @property
    def center_c(self):
        return mpmath.mpc(self.center[0], self.center[1])

    def check(self) -> VerificationReport:
        """Verify the solution invariants with tracked error margins."""
        rep = VerificationReport(title=f"arc solution, level {self.level}")
        with workprec(self.prec):
            ax, ay = self.center
            err = arith_error(self.prec, scale=max(1.0, abs(float(self.radius))))
            d_origin = mpmath.hypot(ax, ay)
            cx, cy = frac_to_mpf(self.corner[0]), frac_to_mpf(self.corner[1])
            d_corner = mpmath.hypot(ax - cx, ay - cy)
            rep.add_equality(
                "center equidistant from both arc endpoints",
                float(d_origin - d_corner), err,
                detail="bisector membership")
            rep.add_inequality("center strictly below the x-axis",
                               float(-ay), err)
            qx, qy = self.q
            rep.add_equality(
                "q lies on the circle",
                float(mpmath.hypot(qx - ax, qy - ay) - self.radius), err)
            rep.add("q on the height line",
                    "pass" if qy == frac_to_mpf(self.line_height) else "fail",
                    detail="exact by construction")
            rep.add_inequality("q in the first quadrant", float(qx), err)
            tol = float(self.sub_angle * REL_ANGLE_TOL)
            rep.add_inequality("achieved angle within tolerance",
                               tol - float(self.residual),
                               arith_error(self.prec, scale=float(self.sub_angle)))
        return rep

    def to_json(self, dps: int = 40) -> dict:
        with workprec(self.prec):
            return {
                "level": self.level,
                "precision_bits": self.prec,
                "decimal_digits": dps,
                "center": [mpmath.nstr(v, dps) for v in self.center],
                "radius": mpmath.nstr(self.radius, dps),
                "sub_angle": str(self.sub_angle),
                "achieved": mpmath.nstr(self.achieved, dps),
                "q": [mpmath.nstr(v, dps) for v in self.q],
                "residual": mpmath.nstr(self.residual, dps),
            }


def perp_bisector_axis_crossing(delta_n, Delta_n) -> tuple[Fraction, Fraction]:
    """Where the perpendicular bisector of (0,0)-(delta, Delta) meets the
    x-axis: ((delta^2 + Delta^2) / (2 delta), 0), exactly."""
    d, D = Fraction(delta_n), Fraction(Delta_n)
    return ((d * d + D * D) / (2 * d), Fraction(0))


def _angle_at_center(ax, ay, h):
    """Sub-arc angle from the origin to the line y = h for center (ax, ay).

    Uses the cancellation-free chord form: the intersection abscissa is
    x_q = ax * u / (1 + sqrt(1 - u)) with u = h*(h - 2*ay)/ax^2, and the
    angle is 2*asin(chord / (2r)).  Returns (angle, (x_q, h), radius).
    """
    r = mpmath.hypot(ax, ay)
    u = h * (h - 2 * ay) / (ax * ax)
    if u >= 1:
        raise BracketError("circle does not reach the height line")
    xq = ax * u / (1 + mpmath.sqrt(1 - u))
    chord = mpmath.hypot(xq, h)
    return 2 * mpmath.asin(chord / (2 * r)), (xq, h), r


def angle_profile(delta_n, Delta_n, Delta_next, ts: np.ndarray) -> np.ndarray:
    """Float64 sweep of the achieved angle over center offsets `ts`.

    Independent, vectorized view of the same geometry used to confirm the
    bracketing behaviour of the solver; `ts` are offsets along the bisector
    measured from its x-axis crossing.
    """
    d = float(delta_n)
    D = float(Delta_n)
    h = float(Delta_next)
    L = np.hypot(d, D)
    mx, my = d / 2.0, D / 2.0
    ux, uy = D / L, -d / L
    t_axis = D * L / (2.0 * d)
    ax = mx + (t_axis + ts) * ux
    ay = my + (t_axis + ts) * uy
    r = np.hypot(ax, ay)
    u = h * (h - 2.0 * ay) / (ax * ax)
    xq = ax * u / (1.0 + np.sqrt(1.0 - u))
    chord = np.hypot(xq, h)
    return 2.0 * np.arcsin(chord / (2.0 * r))


def solve_arc(
    delta_n,
    Delta_n,
    Delta_next,
    theta_next,
    angle_tol: Fraction | None = None,
    prec: int = 160,
    level: int = 0,
) -> ArcSolution:
    """Bisection solve for the arc center achieving the target sub-arc angle.

    Feasibility (exact, rational): 0 < theta_next <= Delta_next*delta_n/Delta_n^2,
    the achieved angle when the center sits on the x-axis.  The far bracket end
    is found by doubling the offset until the angle drops below the target;
    monotonicity of angle vs offset is spot-verified on the bracket before the
    bisection is trusted.
    """
    d = Fraction(delta_n)
    D = Fraction(Delta_n)
    h = Fraction(Delta_next)
    target = Fraction(theta_next)
    if not 0 < d <= D <= 1:
        raise FeasibilityError(f"need 0 < delta <= Delta <= 1, got {d}, {D}")
    if not 0 < h < D:
        raise FeasibilityError(f"need 0 < Delta_next < Delta_n, got {h}, {D}")
    if not 0 < target <= h * d / (D * D):
        raise FeasibilityError(
            f"target angle {target} exceeds the feasibility bound "
            f"{h * d / (D * D)} attained with the center on the x-axis")
    if angle_tol is None:
        angle_tol = target * REL_ANGLE_TOL

    with workprec(prec):
        dm, Dm, hm = frac_to_mpf(d), frac_to_mpf(D), frac_to_mpf(h)
        tm = frac_to_mpf(target)
        tol = frac_to_mpf(Fraction(angle_tol))
        L = mpmath.hypot(dm, Dm)
        mx, my = dm / 2, Dm / 2
        ux, uy = Dm / L, -dm / L
        t_axis = Dm * L / (2 * dm)

        def angle(t):
            return _angle_at_center(mx + t * ux, my + t * uy, hm)[0]

        lo = t_axis
        f_lo = angle(lo)
        if not f_lo > tm:
            raise BracketError(
                f"angle at the x-axis crossing ({f_lo}) does not exceed the "
                f"target ({tm}); degenerate input")
        step = L
        hi = lo + step
        for _ in range(_MAX_DOUBLINGS):
            f_hi = angle(hi)
            if f_hi < tm:
                break
            step *= 2
            hi = lo + step
        else:
            raise BracketError(
                f"no far bracket end within {_MAX_DOUBLINGS} doublings; "
                f"last angle {f_hi} vs target {tm}")

        probe = [lo + (hi - lo) * k / (_MONOTONE_GRID - 1)
                 for k in range(_MONOTONE_GRID)]
        vals = [angle(t) for t in probe]
        if any(a <= b for a, b in zip(vals, vals[1:])):
            raise BracketError(
                "angle vs center offset is not strictly decreasing on the "
                f"bracket [{lo}, {hi}]; refusing to bisect")

        max_iter = prec + 256
        for _ in range(max_iter):
            if f_lo - f_hi <= tol:
                break
            mid = (lo + hi) / 2
            f_mid = angle(mid)
            if f_mid >= tm:
                lo, f_lo = mid, f_mid
            else:
                hi, f_hi = mid, f_mid
        else:
            raise BracketError(
                f"bisection failed to reach tolerance {tol} in {max_iter} "
                f"iterations; spread {f_lo - f_hi}")

        t = (lo + hi) / 2
        ax, ay = mx + t * ux, my + t * uy
        achieved, q, r = _angle_at_center(ax, ay, hm)
        return ArcSolution(
            level=level,
            center=(ax, ay),
            radius=r,
            sub_angle=target,
            achieved=achieved,
            q=q,
            residual=abs(achieved - tm),
            prec=prec,
            corner=(d, D),
            line_height=h,
        )


def solve_table_arcs(table, prec: int | None = None,
                     rel_tol_log2: int = -60) -> tuple[ArcSolution, ...]:
    """Solve the arc for every level of a sequence table (levels 1..depth-1);
    each solve targets a residual of 2**rel_tol_log2 times its angle."""
    from .numerics import default_precision

    if prec is None:
        prec = default_precision(table)
    sols = []
    for n in range(1, table.depth):
        theta_next = table.theta_(n + 1)
        sols.append(solve_arc(
            table.delta_(n), table.Delta_(n),
            table.Delta_(n + 1), theta_next,
            angle_tol=theta_next * pow2(rel_tol_log2),
            prec=prec, level=n,
        ))
    return tuple(sols)


def arc_point(sol: ArcSolution, k: int):
    """k-th equidistant point on the solved circle, 1-based: the image of the
    origin under clockwise rotation by (k-1) sub-arc angles about the center.

    Returns a complex point; k = 1 is the origin and k = 2 is q.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    phi = (k - 1) * sol.sub_angle
    if float(phi) > 6.283185307179587:
        raise ValueError(f"k = {k} winds beyond a full turn")
    with workprec(sol.prec):
        alpha = sol.center_c
        return alpha * (1 - mpmath.expj(-frac_to_mpf(phi)))
