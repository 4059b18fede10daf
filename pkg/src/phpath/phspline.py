"""C1 spatial Pythagorean-hodograph quintic spline paths.

A path segment on the knot interval ``[u_a, u_b]`` (width ``h``) is a quintic
Bezier curve whose hodograph factors through a quadratic quaternion
polynomial ``A(xi) = A0 b0(xi) + A1 b1(xi) + A2 b2(xi)`` in the local
parameter ``xi = (u - u_a)/h``:

    eta'(u) = A(xi) * w * A(xi)^*          with fixed unit axis w = (1,0,0).

This guarantees |eta'(u)|^2 is the square of the quartic polynomial
``sigma(xi) = |A(xi)|^2`` (the parametric speed), so arc length is obtained
exactly from the Bernstein coefficients of sigma, with no quadrature.

Construction from first-order Hermite data (endpoints plus end tangents)
solves three quadratic quaternion subproblems of the form ``A w A^* = c``.
Each has a one-parameter solution family

    A(phi) = sqrt(|c|/(2(1+cx))) * (0, 1+cx, cy, cz) * (cos phi + i sin phi),

where (cx, cy, cz) = c/|c|; the pure "bisector" solution carries label
phi = 0 and the canonical half-rotation solution carries phi = -pi/2.
The end-tangent angles (phi0, phi2) are the free shape parameters; the
default selection phi0 = phi2 = -pi/2 gives the well-behaved interpolant
(it reproduces straight lines from collinear data) and is what
``cc_criterion`` returns for every segment.

The formula above is singular when c is anti-parallel to the axis w; in
that case the whole segment problem is rotated by a fixed generic rotation,
solved, and rotated back (the free-angle labels then refer to the rotated
frame).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateInput, InvalidSpline
from .quat import Quaternion, rotate

__all__ = [
    "HermiteData",
    "PHQuinticSegment",
    "PHSpline",
    "chord_knots",
    "uniform_knots",
    "cubic_spline_tangents",
    "hermite_segment",
    "build_spline",
    "canonical_criterion",
    "aligned_criterion",
    "CC_ANGLES",
]

W_AXIS = np.array([1.0, 0.0, 0.0])
CC_ANGLES = (-0.5 * math.pi, -0.5 * math.pi)

# Generic fallback rotations applied when a subproblem hits the w-axis
# singularity.  The first maps x -> y -> z cyclically, so -x lands on -y.
_FALLBACK_ROTATIONS = (
    Quaternion(0.5, 0.5, 0.5, 0.5),
    Quaternion(math.cos(0.61), *(math.sin(0.61) * np.array([1.0, -2.0, 3.0])
                                 / math.sqrt(14.0))),
)


class _NearAntiparallel(Exception):
    """Internal: c/|c| is within tolerance of -w, solution formula singular."""


# ---------------------------------------------------------------------------
# Bernstein helpers
# ---------------------------------------------------------------------------

def _de_casteljau(coeffs: np.ndarray, t: float) -> np.ndarray:
    """Evaluate a Bernstein-form polynomial (coefficients along axis 0)."""
    b = np.array(coeffs, dtype=float)
    n = b.shape[0] - 1
    for _ in range(n):
        b = b[:-1] + t * (b[1:] - b[:-1])
    return b[0]


def _bernstein_product(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Bernstein coefficients of the product of two Bernstein-form polynomials."""
    m, n = len(f) - 1, len(g) - 1
    out = np.zeros(m + n + 1)
    for i in range(m + 1):
        for j in range(n + 1):
            out[i + j] += (math.comb(m, i) * math.comb(n, j)
                           / math.comb(m + n, i + j)) * f[i] * g[j]
    return out


# ---------------------------------------------------------------------------
# Quadratic quaternion subproblem  A w A* = c
# ---------------------------------------------------------------------------

def _quat_sandwich(a: Quaternion, b: Quaternion) -> np.ndarray:
    """Vector part of a * w * b^* for the fixed axis w = (1,0,0)."""
    p = a * Quaternion(0.0, 1.0, 0.0, 0.0) * b.conj()
    return np.array([p.x, p.y, p.z])


def _solve_preimage(c: np.ndarray, phi: float) -> Quaternion:
    """One member of the solution family of A w A* = c, labelled by phi."""
    lam = float(np.linalg.norm(c))
    if lam < 1e-300:
        return Quaternion(0.0, 0.0, 0.0, 0.0)
    cx, cy, cz = c / lam
    if 1.0 + cx < 1e-6:
        raise _NearAntiparallel
    bisector = Quaternion(0.0, 1.0 + cx, cy, cz).scaled(
        math.sqrt(lam / (2.0 * (1.0 + cx))))
    return bisector * Quaternion(math.cos(phi), math.sin(phi), 0.0, 0.0)


# ---------------------------------------------------------------------------
# Data containers
# ---------------------------------------------------------------------------

@dataclass
class HermiteData:
    """First-order Hermite interpolation data: points, end tangents, knots.

    ``points[k]`` and ``tangents[k]`` are attached to parameter ``knots[k]``;
    tangents are derivatives with respect to the spline parameter u.
    """

    points: np.ndarray
    tangents: np.ndarray
    knots: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.tangents = np.asarray(self.tangents, dtype=float)
        self.knots = np.asarray(self.knots, dtype=float)
        n = len(self.points)
        if n < 2:
            raise DegenerateInput("need at least two points")
        if self.tangents.shape != self.points.shape or len(self.knots) != n:
            raise DegenerateInput("points/tangents/knots size mismatch")
        if np.any(np.diff(self.knots) <= 0.0):
            raise DegenerateInput("knots must be strictly increasing")
        if np.any(np.linalg.norm(self.tangents, axis=1) <= 1e-9):
            raise DegenerateInput("tangents must be nonzero")

    @property
    def num_segments(self) -> int:
        return len(self.points) - 1


@dataclass
class PHQuinticSegment:
    """One PH quintic span: preimage coefficients, control points, speed.

    ``sigma`` holds the five Bernstein coefficients of the quartic
    parametric speed |eta'(u)| expressed in the local parameter.
    """

    preimage: tuple[Quaternion, Quaternion, Quaternion]
    control_points: np.ndarray          # (6, 3)
    u_lo: float
    u_hi: float
    sigma: np.ndarray                   # (5,)
    w_axis: np.ndarray = field(default_factory=lambda: W_AXIS.copy())

    @property
    def h(self) -> float:
        return self.u_hi - self.u_lo

    def _xi(self, u: float) -> float:
        return (u - self.u_lo) / self.h

    def point(self, u: float) -> np.ndarray:
        return _de_casteljau(self.control_points, self._xi(u))

    def hodograph_coefficients(self) -> np.ndarray:
        """Bernstein-4 coefficients of eta'(u), from control point differences."""
        return (5.0 / self.h) * np.diff(self.control_points, axis=0)

    def hodograph(self, u: float) -> np.ndarray:
        return _de_casteljau(self.hodograph_coefficients(), self._xi(u))

    def speed(self, u: float) -> float:
        return float(_de_casteljau(self.sigma, self._xi(u)))

    def hodograph_from_preimage(self, u: float) -> np.ndarray:
        """eta'(u) evaluated as A(xi) w A(xi)^* (cross-check route)."""
        xi = self._xi(u)
        a0, a1, a2 = self.preimage
        b = (1.0 - xi) ** 2
        m = 2.0 * xi * (1.0 - xi)
        e = xi ** 2
        a = a0.scaled(b) + a1.scaled(m) + a2.scaled(e)
        return _quat_sandwich(a, a)

    def _length_coefficients(self) -> np.ndarray:
        # Quintic Bernstein coefficients of the arc-length antiderivative.
        return np.concatenate(([0.0], np.cumsum(self.sigma))) * (self.h / 5.0)

    def arc_length_from_start(self, u: float) -> float:
        """Exact arc length from u_lo to u (u inside this segment)."""
        return float(_de_casteljau(self._length_coefficients(), self._xi(u)))

    @property
    def length(self) -> float:
        return float(self.sigma.sum() * self.h / 5.0)

    def ph_residual(self) -> float:
        """Relative Bernstein-coefficient residual of |eta'|^2 - sigma^2.

        Exact polynomial identity check (degree 8 in Bernstein form), not a
        sampling test.  Zero up to roundoff for a true PH segment.
        """
        hod = self.hodograph_coefficients()
        lhs = np.zeros(9)
        for comp in range(3):
            lhs += _bernstein_product(hod[:, comp], hod[:, comp])
        rhs = _bernstein_product(self.sigma, self.sigma)
        scale = max(np.abs(rhs).max(), 1e-300)
        return float(np.abs(lhs - rhs).max() / scale)


# ---------------------------------------------------------------------------
# Knots and tangents
# ---------------------------------------------------------------------------

def chord_knots(points) -> np.ndarray:
    """Cumulative chord-length knot sequence, starting at 0."""
    pts = np.asarray(points, dtype=float)
    chords = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if np.any(chords <= 1e-9):
        raise DegenerateInput("coincident consecutive points")
    return np.concatenate(([0.0], np.cumsum(chords)))


def uniform_knots(points) -> np.ndarray:
    """Integer knots 0..N (unit spacing)."""
    pts = np.asarray(points, dtype=float)
    if np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) <= 1e-9):
        raise DegenerateInput("coincident consecutive points")
    return np.arange(len(pts), dtype=float)


def cubic_spline_tangents(points, knots) -> np.ndarray:
    """End-point derivatives of the C2 interpolating cubic spline.

    Uses the not-a-knot end condition, which reproduces polynomials up to
    the spline degree and matches the common default of numerical packages.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        raise DegenerateInput("cubic spline tangents need at least three points")
    cs = CubicSpline(np.asarray(knots, dtype=float), pts,
                     axis=0, bc_type="not-a-knot")
    return cs(np.asarray(knots, dtype=float), 1)


# ---------------------------------------------------------------------------
# Hermite segment construction
# ---------------------------------------------------------------------------

def _build_segment_base(p_a, p_b, d_a, d_b, u_lo, u_hi, angles, phi_mid):
    """Solve the Hermite problem with w = (1,0,0); may raise _NearAntiparallel."""
    h = u_hi - u_lo
    dp = p_b - p_a
    a0 = _solve_preimage(d_a, angles[0])
    a2 = _solve_preimage(d_b, angles[1])
    s = a0 + a2

    # Displacement condition reduced to B w B* = c with B = 2*A1 + 1.5*(A0+A2).
    t02 = _quat_sandwich(a0, a2) + _quat_sandwich(a2, a0)
    tss = _quat_sandwich(s, s)
    c = (30.0 / h) * dp - 6.0 * (d_a + d_b) - t02 + 2.25 * tss
    if phi_mid is None:
        b = _solve_preimage(c, -0.5 * math.pi)
        if b.dot(s) < 0.0:
            # Branch minimizing |A1 - (A0+A2)/2|: keeps preimage continuity.
            b = -b
    else:
        b = _solve_preimage(c, phi_mid)
    a1 = (b.scaled(2.0) - s.scaled(3.0)).scaled(0.25)
    return a0, a1, a2


def _control_points(p_a, a0, a1, a2, h) -> np.ndarray:
    q = np.empty((6, 3))
    q[0] = p_a
    q[1] = q[0] + (h / 5.0) * _quat_sandwich(a0, a0)
    q[2] = q[1] + (h / 10.0) * (_quat_sandwich(a0, a1) + _quat_sandwich(a1, a0))
    q[3] = q[2] + (h / 30.0) * (_quat_sandwich(a0, a2)
                                + 4.0 * _quat_sandwich(a1, a1)
                                + _quat_sandwich(a2, a0))
    q[4] = q[3] + (h / 10.0) * (_quat_sandwich(a1, a2) + _quat_sandwich(a2, a1))
    q[5] = q[4] + (h / 5.0) * _quat_sandwich(a2, a2)
    return q


def _sigma_coefficients(a0, a1, a2) -> np.ndarray:
    return np.array([
        a0.norm_sq(),
        a0.dot(a1),
        (a0.dot(a2) + 2.0 * a1.norm_sq()) / 3.0,
        a1.dot(a2),
        a2.norm_sq(),
    ])


def hermite_segment(p_a, p_b, d_a, d_b, u_lo=0.0, u_hi=1.0,
                    angles=CC_ANGLES, phi_mid=None) -> PHQuinticSegment:
    """PH quintic segment interpolating endpoints and end tangents.

    ``angles = (phi0, phi2)`` select one member of the two-parameter family
    of interpolants; the default is the standard well-behaved choice.  The
    middle coefficient's free label ``phi_mid`` defaults to the canonical
    half-rotation solution with the sign branch that minimizes
    ``|A1 - (A0+A2)/2|``; passing an explicit value uses it verbatim.
    Raises DegenerateInput for zero tangents or zero displacement.
    """
    p_a = np.asarray(p_a, dtype=float)
    p_b = np.asarray(p_b, dtype=float)
    d_a = np.asarray(d_a, dtype=float)
    d_b = np.asarray(d_b, dtype=float)
    h = u_hi - u_lo
    if h <= 0.0:
        raise DegenerateInput("segment interval must have positive width")
    if np.linalg.norm(d_a) <= 1e-9 or np.linalg.norm(d_b) <= 1e-9:
        raise DegenerateInput("end tangents must be nonzero")
    if np.linalg.norm(p_b - p_a) <= 1e-9:
        raise DegenerateInput("zero-length displacement")

    frames = (None,) + _FALLBACK_ROTATIONS
    last = None
    for rot in frames:
        if rot is None:
            pa, pb, da, db = p_a, p_b, d_a, d_b
        else:
            pa, pb = rotate(rot, p_a), rotate(rot, p_b)
            da, db = rotate(rot, d_a), rotate(rot, d_b)
        try:
            a0, a1, a2 = _build_segment_base(pa, pb, da, db, u_lo, u_hi,
                                             angles, phi_mid)
        except _NearAntiparallel as exc:
            last = exc
            continue
        if rot is not None:
            inv = rot.conj()
            a0, a1, a2 = inv * a0, inv * a1, inv * a2
        ctrl = _control_points(p_a, a0, a1, a2, h)
        sigma = _sigma_coefficients(a0, a1, a2)
        seg = PHQuinticSegment((a0, a1, a2), ctrl, u_lo, u_hi, sigma)
        _check_segment(seg, p_b)
        return seg
    raise InvalidSpline("preimage subproblem singular in all frames") from last


def _check_segment(seg: PHQuinticSegment, p_b: np.ndarray) -> None:
    scale = max(1.0, float(np.abs(seg.control_points).max()))
    if np.linalg.norm(seg.control_points[5] - p_b) > 1e-6 * scale:
        raise InvalidSpline("endpoint not reproduced; construction failed")
    # Regularity: sigma > 0 on the span.  Positive Bernstein coefficients
    # are sufficient; otherwise fall back to dense sampling.
    if seg.sigma.min() <= 0.0:
        xs = np.linspace(0.0, 1.0, 65)
        vals = [_de_casteljau(seg.sigma, x) for x in xs]
        if min(vals) <= 0.0:
            raise InvalidSpline("parametric speed not positive on segment")


# ---------------------------------------------------------------------------
# Spline
# ---------------------------------------------------------------------------

def canonical_criterion(p_a, p_b, d_a, d_b, h) -> tuple[float, float]:
    """Default free-angle selection: (-pi/2, -pi/2) for every segment.

    Picks the canonical half-rotation solution of each end equation; on
    collinear data this reproduces the straight chord.
    """
    return CC_ANGLES


def _alignment_angle(base: Quaternion, ref: Quaternion) -> float:
    """Angle maximizing <base * (cos t + i sin t), ref> over the free circle."""
    c = base.dot(ref)
    s = (base * Quaternion(0.0, 1.0, 0.0, 0.0)).dot(ref)
    return math.atan2(s, c)


def aligned_criterion(p_a, p_b, d_a, d_b, h) -> tuple[float, float, float]:
    """Closed-form data-dependent selection of all three free labels.

    Rotates each preimage solution circle to the member nearest (in the
    quaternion metric) to the canonical solution for the segment's
    displacement direction.  Keeping the three coefficients clustered around
    a common reference avoids antipodal flips and yields interpolants close
    to the minimal-preimage-energy member of the family.
    """
    dp = np.asarray(p_b, dtype=float) - np.asarray(p_a, dtype=float)
    n = np.linalg.norm(dp)
    if n <= 1e-9:
        raise DegenerateInput("zero-length displacement")
    try:
        ref = _solve_preimage(dp / n, -0.5 * math.pi)
        phi0 = _alignment_angle(_solve_preimage(np.asarray(d_a, float), 0.0), ref)
        phi2 = _alignment_angle(_solve_preimage(np.asarray(d_b, float), 0.0), ref)
    except _NearAntiparallel:
        # Singular frame; fall back to the canonical labels and let
        # hermite_segment handle the rotation trick.
        return CC_ANGLES
    return phi0, phi2, ref


def _aligned_phi_mid(c: np.ndarray, ref) -> float:
    return _alignment_angle(_solve_preimage(c, 0.0), ref)


class PHSpline:
    """Ordered PH quintic segments sharing knots; immutable once built."""

    def __init__(self, segments: list[PHQuinticSegment]):
        if not segments:
            raise InvalidSpline("empty spline")
        self.segments = list(segments)
        self.knots = np.array([s.u_lo for s in self.segments]
                              + [self.segments[-1].u_hi])
        if np.any(np.diff(self.knots) <= 0.0):
            raise InvalidSpline("segment intervals must be increasing and adjacent")
        lengths = np.array([s.length for s in self.segments])
        self.cumulative_lengths = np.concatenate(([0.0], np.cumsum(lengths)))
        self.total_length = float(self.cumulative_lengths[-1])

    # -- parameter domain ---------------------------------------------------

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def contains(self, u: float) -> bool:
        return self.knots[0] <= u <= self.knots[-1]

    def _clamp(self, u: float) -> float:
        return float(min(max(u, self.knots[0]), self.knots[-1]))

    def segment_index(self, u: float) -> int:
        i = int(np.searchsorted(self.knots, u, side="right")) - 1
        return min(max(i, 0), len(self.segments) - 1)

    # -- evaluation ----------------------------------------------------------

    def eval(self, u: float) -> np.ndarray:
        """Position on the path; u clamped to the knot range."""
        u = self._clamp(u)
        return self.segments[self.segment_index(u)].point(u)

    def hodograph(self, u: float) -> np.ndarray:
        u = self._clamp(u)
        return self.segments[self.segment_index(u)].hodograph(u)

    def speed(self, u: float) -> float:
        u = self._clamp(u)
        return self.segments[self.segment_index(u)].speed(u)

    # -- arc length ----------------------------------------------------------

    def arc_length(self, u_lo: float, u_hi: float) -> float:
        """Exact arc length between two parameter values (no quadrature)."""
        if u_hi < u_lo:
            raise DegenerateInput("arc_length requires u_lo <= u_hi")
        u_lo, u_hi = self._clamp(u_lo), self._clamp(u_hi)
        i, j = self.segment_index(u_lo), self.segment_index(u_hi)
        if i == j:
            seg = self.segments[i]
            return seg.arc_length_from_start(u_hi) - seg.arc_length_from_start(u_lo)
        head = self.segments[i].length - self.segments[i].arc_length_from_start(u_lo)
        middle = self.cumulative_lengths[j] - self.cumulative_lengths[i + 1]
        tail = self.segments[j].arc_length_from_start(u_hi)
        return float(head + middle + tail)

    def arc_length_from_start(self, u: float) -> float:
        return self.arc_length(self.knots[0], u)

    def toa_estimate(self, u: float, cruise_speed: float) -> float:
        """Remaining arc length divided by the steady cruise speed, seconds."""
        if cruise_speed <= 0.0:
            raise DegenerateInput("cruise speed must be positive")
        return (self.total_length - self.arc_length_from_start(u)) / cruise_speed

    # -- diagnostics ----------------------------------------------------------

    def c1_mismatch(self) -> float:
        """Max relative hodograph jump across interior knots (diagnostic)."""
        worst = 0.0
        for left, right in zip(self.segments[:-1], self.segments[1:]):
            u = left.u_hi
            a, b = left.hodograph(u), right.hodograph(u)
            scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
            worst = max(worst, float(np.linalg.norm(a - b) / scale))
        return worst

    def max_ph_residual(self) -> float:
        return max(s.ph_residual() for s in self.segments)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        """JSON document with quaternion coefficients in (w,x,y,z) order."""
        return {
            "format": "ph-quintic-spline",
            "version": 1,
            "w_axis": list(W_AXIS),
            "knots": self.knots.tolist(),
            "total_length": self.total_length,
            "cumulative_lengths": self.cumulative_lengths.tolist(),
            "segments": [
                {
                    "interval": [seg.u_lo, seg.u_hi],
                    "preimage": [[q.w, q.x, q.y, q.z] for q in seg.preimage],
                    "control_points": seg.control_points.tolist(),
                    "sigma": seg.sigma.tolist(),
                    "length": seg.length,
                }
                for seg in self.segments
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PHSpline":
        if doc.get("format") != "ph-quintic-spline":
            raise InvalidSpline("not a spline document")
        segments = []
        for sd in doc["segments"]:
            pre = tuple(Quaternion(*c) for c in sd["preimage"])
            segments.append(PHQuinticSegment(
                pre,
                np.asarray(sd["control_points"], dtype=float),
                float(sd["interval"][0]),
                float(sd["interval"][1]),
                np.asarray(sd["sigma"], dtype=float),
            ))
        return cls(segments)

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=1)

    @classmethod
    def load(cls, path) -> "PHSpline":
        with open(path) as f:
            return cls.from_json(json.load(f))


def build_spline(data: HermiteData, criterion=cc_criterion) -> PHSpline:
    """Interpolate the Hermite data segment by segment.

    ``criterion(p_a, p_b, d_a, d_b, h) -> (phi0, phi2)`` selects the free
    angles per segment.  C1 continuity follows from adjacent segments
    sharing point and tangent data.
    """
    segs = []
    for k in range(data.num_segments):
        u_lo, u_hi = data.knots[k], data.knots[k + 1]
        angles = criterion(data.points[k], data.points[k + 1],
                           data.tangents[k], data.tangents[k + 1], u_hi - u_lo)
        segs.append(hermite_segment(data.points[k], data.points[k + 1],
                                    data.tangents[k], data.tangents[k + 1],
                                    u_lo, u_hi, angles=angles))
    return PHSpline(segs)
