"""Exact planar geometry for turning triples and their blocking sets.

A turning triple (c_c, c_m, c_g) of non-colinear points induces a region G:
the triangle spanned by the three points, united with the half of the
ellipse that has foci c_c and c_g, major-axis length |c_c c_m| + |c_m c_g|,
and lies on the far side of line c_c-c_g from c_m.  Every obstacle set that
pins the two-leg route c_c -> c_m -> c_g as the shortest path lives inside
G.  The representative such set is the segment from c_m to its mirror image
across line c_c-c_g; ``construct_min_member`` builds one member through any
requested point of G.

All predicates treat G as closed and use an absolute tolerance in metres
(workspace coordinates are O(1 m)).  Everything here is pure and
thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EPS = 1e-9
COLINEAR_EPS = 1e-12


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def dist(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Segment2:
    a: Point2
    b: Point2

    def __post_init__(self) -> None:
        if self.a.dist(self.b) == 0.0:
            raise ValueError("degenerate segment")

    def length(self) -> float:
        return self.a.dist(self.b)

    def point_at(self, t: float) -> Point2:
        """Point at parameter t in [0, 1] from a to b."""
        return Point2(self.a.x + t * (self.b.x - self.a.x),
                      self.a.y + t * (self.b.y - self.a.y))


def _cross(o: Point2, a: Point2, b: Point2) -> float:
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


@dataclass(frozen=True)
class TurnTriple:
    c_c: Point2
    c_m: Point2
    c_g: Point2

    def __post_init__(self) -> None:
        if abs(_cross(self.c_c, self.c_m, self.c_g)) <= COLINEAR_EPS:
            raise ValueError("colinear turning triple")


def ellipse_sum(p: Point2, triple: TurnTriple) -> float:
    """Sum of distances from p to the two foci c_c and c_g."""
    return p.dist(triple.c_c) + p.dist(triple.c_g)


def major_axis_length(triple: TurnTriple) -> float:
    """|c_c c_m| + |c_m c_g|: the two-leg route length, and by construction
    the major-axis length of the ellipse bounding G on the far side."""
    return triple.c_c.dist(triple.c_m) + triple.c_m.dist(triple.c_g)


def reflect_across_line(p: Point2, a: Point2, b: Point2) -> Point2:
    """Mirror image of p across the infinite line through a and b."""
    abx, aby = b.x - a.x, b.y - a.y
    d2 = abx * abx + aby * aby
    t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / d2
    fx, fy = a.x + t * abx, a.y + t * aby
    return Point2(2.0 * fx - p.x, 2.0 * fy - p.y)


def mirror_turn_point(triple: TurnTriple) -> Point2:
    """Reflection of c_m across the line through c_c and c_g."""
    return reflect_across_line(triple.c_m, triple.c_c, triple.c_g)


def _signed_line_dist(p: Point2, a: Point2, b: Point2) -> float:
    """Signed distance of p to line a-b, positive on the left of a->b."""
    return _cross(a, b, p) / a.dist(b)


def point_in_triangle(p: Point2, a: Point2, b: Point2, c: Point2,
                      tol: float = EPS) -> bool:
    """Closed-triangle membership; tol > 0 grows every edge outward by tol metres."""
    orient = 1.0 if _cross(a, b, c) > 0.0 else -1.0
    for u, v in ((a, b), (b, c), (c, a)):
        if orient * _signed_line_dist(p, u, v) < -tol:
            return False
    return True


def in_region_g(p: Point2, triple: TurnTriple, tol: float = EPS) -> bool:
    """True iff p lies in the closed region G, with tol metres of slack.

    Triangle membership uses edge distances directly.  For the half-ellipse,
    a point within tol of the ellipse exceeds the focal-distance sum by at
    most 2*tol, so the sum test is slackened accordingly.
    """
    if point_in_triangle(p, triple.c_c, triple.c_m, triple.c_g, tol):
        return True
    side_m = _signed_line_dist(triple.c_m, triple.c_c, triple.c_g)
    side_p = _signed_line_dist(p, triple.c_c, triple.c_g)
    if side_p * math.copysign(1.0, side_m) > tol:
        return False
    return ellipse_sum(p, triple) <= major_axis_length(triple) + 2.0 * tol


def representative_min_set(triple: TurnTriple) -> Segment2:
    """The representative blocking set: the segment from c_m to its mirror
    image across line c_c-c_g.  Both endpoints lie on the ellipse boundary."""
    return Segment2(triple.c_m, mirror_turn_point(triple))


def _ray_ellipse_exit(ox: float, oy: float, dx: float, dy: float,
                      triple: TurnTriple) -> Point2:
    """Far intersection of the ray (o, d) with the ellipse of foci c_c, c_g
    and major-axis length |c_c c_m| + |c_m c_g|.  The origin must be inside
    or on the ellipse, which makes the far quadratic root the exit point."""
    a = major_axis_length(triple) / 2.0
    cx = (triple.c_c.x + triple.c_g.x) / 2.0
    cy = (triple.c_c.y + triple.c_g.y) / 2.0
    fx, fy = triple.c_g.x - cx, triple.c_g.y - cy
    c_f = math.hypot(fx, fy)
    b2 = a * a - c_f * c_f  # > 0 for a non-colinear triple
    ex, ey = fx / c_f, fy / c_f
    rx, ry = ox - cx, oy - cy
    ux, uy = rx * ex + ry * ey, -rx * ey + ry * ex
    vx, vy = dx * ex + dy * ey, -dx * ey + dy * ex
    a2 = a * a
    qa = vx * vx / a2 + vy * vy / b2
    qb = 2.0 * (ux * vx / a2 + uy * vy / b2)
    qc = ux * ux / a2 + uy * uy / b2 - 1.0
    disc = max(qb * qb - 4.0 * qa * qc, 0.0)
    t = (-qb + math.sqrt(disc)) / (2.0 * qa)
    return Point2(ox + t * dx, oy + t * dy)


def construct_min_member(c: Point2, triple: TurnTriple) -> list[Segment2]:
    """Build one blocking set that contains both c_m and the requested point c.

    If the ray from c_m through c crosses the base segment c_c-c_g, it stays
    inside G all the way to the far ellipse boundary and the member is the
    single segment from c_m to that exit point.  Otherwise the member detours
    through whichever of c_g or c_c the ray passes, then out through the
    ellipse boundary along the ray from that vertex through c.

    Raises ValueError for points outside G.  For c == c_m the representative
    segment is returned.
    """
    if not in_region_g(c, triple, EPS):
        raise ValueError("point outside region G")
    cm = triple.c_m
    if c.dist(cm) <= EPS:
        return [representative_min_set(triple)]
    dx, dy = c.x - cm.x, c.y - cm.y
    bx, by = triple.c_g.x - triple.c_c.x, triple.c_g.y - triple.c_c.y
    wx, wy = cm.x - triple.c_c.x, cm.y - triple.c_c.y
    denom = bx * dy - by * dx
    if abs(denom) > 1e-15:
        t_line = -(bx * wy - by * wx) / denom
    else:
        t_line = math.inf
    if 0.0 < t_line < math.inf:
        qx = cm.x + t_line * dx
        qy = cm.y + t_line * dy
        s = ((qx - triple.c_c.x) * bx + (qy - triple.c_c.y) * by) / (bx * bx + by * by)
    else:
        s = math.inf if (dx * bx + dy * by) > 0.0 else -math.inf
    if -EPS <= s <= 1.0 + EPS:
        c_e = _ray_ellipse_exit(cm.x, cm.y, dx, dy, triple)
        return [Segment2(cm, c_e)]
    vertex = triple.c_g if s > 1.0 else triple.c_c
    dvx, dvy = c.x - vertex.x, c.y - vertex.y
    c_e = _ray_ellipse_exit(vertex.x, vertex.y, dvx, dvy, triple)
    return [Segment2(cm, vertex), Segment2(vertex, c_e)]
