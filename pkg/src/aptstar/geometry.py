"""Core state-space types, sampling, hypervolume, and collision predicates.

States are plain 1-D float64 numpy arrays. Worlds are axis-aligned
hyperrectangle bounds plus axis-aligned hyperrectangle obstacles; obstacles
are closed sets, so a point on an obstacle boundary is invalid.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

State = np.ndarray


def as_state(coords) -> State:
    """Coerce a coordinate sequence into a validated state array."""
    x = np.asarray(coords, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("state must be a 1-D sequence with at least one coordinate")
    if not np.all(np.isfinite(x)):
        raise ValueError("state coordinates must be finite")
    return x


@dataclass(frozen=True)
class HyperRectangle:
    min_corner: State
    max_corner: State

    def __post_init__(self):
        object.__setattr__(self, "min_corner", as_state(self.min_corner))
        object.__setattr__(self, "max_corner", as_state(self.max_corner))
        if self.min_corner.size != self.max_corner.size:
            raise ValueError("corner dimensionality mismatch")
        if np.any(self.min_corner > self.max_corner):
            raise ValueError("min_corner must not exceed max_corner on any axis")

    @property
    def dimension(self) -> int:
        return self.min_corner.size

    @property
    def widths(self) -> np.ndarray:
        return self.max_corner - self.min_corner

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.widths))

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, x: State) -> bool:
        """Closed-set membership: boundary points count as inside."""
        return bool(np.all(x >= self.min_corner) and np.all(x <= self.max_corner))

    def intersects(self, other: "HyperRectangle") -> bool:
        return bool(
            np.all(self.min_corner <= other.max_corner)
            and np.all(other.min_corner <= self.max_corner)
        )


@dataclass(frozen=True)
class WorldModel:
    bounds: HyperRectangle
    obstacles: tuple[HyperRectangle, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        for obs in self.obstacles:
            if obs.dimension != self.bounds.dimension:
                raise ValueError("obstacle dimensionality mismatch")
            if not obs.intersects(self.bounds):
                raise ValueError("obstacle does not intersect bounds")

    @property
    def dimension(self) -> int:
        return self.bounds.dimension

    @property
    def obstacle_corners(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked (mins, maxs) obstacle corner matrices, built lazily."""
        cached = getattr(self, "_corners", None)
        if cached is None:
            if self.obstacles:
                mins = np.array([o.min_corner for o in self.obstacles])
                maxs = np.array([o.max_corner for o in self.obstacles])
            else:
                mins = np.empty((0, self.dimension))
                maxs = np.empty((0, self.dimension))
            cached = (mins, maxs)
            object.__setattr__(self, "_corners", cached)
        return cached


@dataclass(frozen=True)
class ProblemInstance:
    world: WorldModel
    start: State
    goals: tuple[State, ...]

    def __post_init__(self):
        object.__setattr__(self, "start", as_state(self.start))
        object.__setattr__(self, "goals", tuple(as_state(g) for g in self.goals))
        if not self.goals:
            raise ValueError("at least one goal is required")
        if not is_state_valid(self.world, self.start):
            raise ValueError("start state is invalid")
        for g in self.goals:
            if not is_state_valid(self.world, g):
                raise ValueError("goal state is invalid")
        if self.c_min <= 0.0:
            raise ValueError("start must be distinct from every goal")

    @property
    def c_min(self) -> float:
        """Straight-line lower bound: distance from start to the nearest goal."""
        return min(distance(self.start, g) for g in self.goals)


@dataclass(frozen=True)
class InformedSet:
    """Two-focus ellipsoid of states that could improve on the current cost."""

    focus_a: State
    focus_b: State
    c_current: float
    c_min: float

    def __post_init__(self):
        object.__setattr__(self, "focus_a", as_state(self.focus_a))
        object.__setattr__(self, "focus_b", as_state(self.focus_b))
        if math.isfinite(self.c_current) and self.c_current < self.c_min:
            raise ValueError("c_current below the focal distance")

    def contains(self, x: State) -> bool:
        return distance(x, self.focus_a) + distance(x, self.focus_b) < self.c_current


def distance(a: State, b: State) -> float:
    """Euclidean distance between two states of equal dimensionality."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("dimensionality mismatch")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def unit_ball_volume(n: int) -> float:
    """Lebesgue measure of the unit ball in n dimensions."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def lebesgue_measure(c_i: float, c_min: float, n: int) -> float:
    """Hypervolume of the two-focus hyperellipsoid with transverse diameter c_i.

    c_i is the diameter along the focal axis, c_min the focal distance.
    Evaluates to the interval length c_i at n = 1.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if c_min <= 0.0:
        raise ValueError("c_min must be positive")
    if c_i == math.inf:
        return math.inf
    if c_i < c_min:
        raise ValueError("c_i must not be below c_min")
    return (
        math.pi ** (n / 2.0)
        * c_i
        * (c_i * c_i - c_min * c_min) ** ((n - 1) / 2.0)
        / (2.0**n * math.gamma(n / 2.0 + 1.0))
    )


def orthonormal_basis(v: State) -> np.ndarray:
    """Orthonormal matrix whose first column is v normalized.

    The remaining columns come from Gram-Schmidt over the standard basis,
    skipping the axis most parallel to v. A zero vector yields the identity.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    norm = float(np.sqrt(np.sum(v * v)))
    if norm == 0.0:
        return np.eye(n)
    if n == 2:
        # closed 2D form, operation-for-operation identical to the loop below
        u0 = v[0] / norm
        u1 = v[1] / norm
        if abs(u0) >= abs(u1):
            e0, e1 = 0.0 - u1 * u0, 1.0 - u1 * u1
        else:
            e0, e1 = 1.0 - u0 * u0, 0.0 - u0 * u1
        enorm = math.sqrt(e0 * e0 + e1 * e1)
        return np.array([[u0, e0 / enorm], [u1, e1 / enorm]])
    if n <= 8:
        # scalar path: same Gram-Schmidt recipe without per-call numpy
        # overhead, which dominates at these sizes
        u0 = [float(vi) / norm for vi in v]
        cols = [u0]
        skip = max(range(n), key=lambda i: abs(u0[i]))
        for j in range(n):
            if j == skip or len(cols) == n:
                continue
            e = [0.0] * n
            e[j] = 1.0
            for u in cols:
                d = 0.0
                for k in range(n):
                    d += u[k] * e[k]
                e = [e[k] - d * u[k] for k in range(n)]
            enorm = math.sqrt(sum(ek * ek for ek in e))
            if enorm < 1e-12:
                continue
            cols.append([ek / enorm for ek in e])
        if len(cols) != n:
            raise RuntimeError("failed to complete orthonormal basis")
        return np.array(cols).T
    cols = [v / norm]
    skip = int(np.argmax(np.abs(cols[0])))
    for j in range(n):
        if j == skip or len(cols) == n:
            continue
        e = np.zeros(n)
        e[j] = 1.0
        for u in cols:
            e = e - np.dot(u, e) * u
        enorm = float(np.sqrt(np.sum(e * e)))
        if enorm < 1e-12:
            continue
        cols.append(e / enorm)
    if len(cols) != n:
        raise RuntimeError("failed to complete orthonormal basis")
    return np.column_stack(cols)


def sample_uniform(bounds: HyperRectangle, rng: np.random.Generator) -> State:
    """Uniform sample inside the box (degenerate axes collapse to the corner)."""
    return bounds.min_corner + rng.random(bounds.dimension) * bounds.widths


@lru_cache(maxsize=64)
def _informed_rotation(focus_a: bytes, focus_b: bytes) -> np.ndarray:
    a = np.frombuffer(focus_a)
    b = np.frombuffer(focus_b)
    return orthonormal_basis(b - a)


def sample_informed(
    informed: InformedSet, bounds: HyperRectangle, rng: np.random.Generator
) -> State:
    """Uniform sample from the informed set intersected with the bounds.

    Before a first solution (c_current infinite) this is uniform over the
    bounds. Otherwise a uniform point in the unit ball is scaled by the
    ellipse semi-axes, rotated so the major axis follows goal - start, and
    translated to the ellipse center; draws landing outside the bounds are
    rejected and retried.
    """
    if not math.isfinite(informed.c_current):
        return sample_uniform(bounds, rng)
    if informed.c_current <= informed.c_min:
        raise ValueError("informed set has no interior")
    n = informed.focus_a.size
    c = informed.c_current
    axes = np.full(n, math.sqrt(c * c - informed.c_min**2) / 2.0)
    axes[0] = c / 2.0
    rot = _informed_rotation(informed.focus_a.tobytes(), informed.focus_b.tobytes())
    center = (informed.focus_a + informed.focus_b) / 2.0
    for _ in range(100_000):
        raw = rng.standard_normal(n)
        norm = float(np.linalg.norm(raw))
        if norm == 0.0:
            continue
        ball = raw / norm * rng.random() ** (1.0 / n)
        x = center + rot @ (axes * ball)
        if bounds.contains(x):
            return x
    raise RuntimeError("informed sampling failed to hit the bounds")


def is_state_valid(world: WorldModel, x: State) -> bool:
    """True iff x lies inside the bounds and inside no (closed) obstacle."""
    if not world.bounds.contains(x):
        return False
    if not world.obstacles:
        return True
    mins, maxs = world.obstacle_corners
    return not bool(np.any(np.all((x >= mins) & (x <= maxs), axis=1)))


def default_motion_resolution(world: WorldModel) -> float:
    """Sub-feature collision-check spacing: 1e-3 of the bounds diagonal."""
    return 1e-3 * world.bounds.diagonal


def is_motion_valid(world: WorldModel, a: State, b: State, resolution: float) -> bool:
    """Check the straight segment a-b at spacing <= resolution, endpoints included."""
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    av = a.tolist()
    bv = b.tolist()
    n = len(av)
    # the bounds box is convex, so endpoint containment covers the segment
    blo = world.bounds.min_corner.tolist()
    bhi = world.bounds.max_corner.tolist()
    for k in range(n):
        if not (blo[k] <= av[k] <= bhi[k] and blo[k] <= bv[k] <= bhi[k]):
            return False
    if not world.obstacles:
        return True
    dv = [bv[k] - av[k] for k in range(n)]
    length = math.sqrt(sum(d * d for d in dv))
    steps = max(1, int(math.ceil(length / resolution)))
    for obs in world.obstacles:
        lo = obs.min_corner.tolist()
        hi = obs.max_corner.tolist()
        # slab-clip the segment's parameter interval against the box, then
        # test the discretized indices that can fall inside it
        t0, t1 = 0.0, 1.0
        overlap = True
        for k in range(n):
            d = dv[k]
            if d == 0.0:
                if av[k] < lo[k] or av[k] > hi[k]:
                    overlap = False
                    break
            else:
                ta = (lo[k] - av[k]) / d
                tb = (hi[k] - av[k]) / d
                if ta > tb:
                    ta, tb = tb, ta
                if ta > t0:
                    t0 = ta
                if tb < t1:
                    t1 = tb
                if t0 > t1:
                    overlap = False
                    break
        if not overlap:
            continue
        i_lo = max(0, int(math.floor(t0 * steps)) - 1)
        i_hi = min(steps, int(math.ceil(t1 * steps)) + 1)
        for i in range(i_lo, i_hi + 1):
            t = i / steps
            inside = True
            for k in range(n):
                p = av[k] + t * dv[k]
                if p < lo[k] or p > hi[k]:
                    inside = False
                    break
            if inside:
                return False
    return True


def world_to_dict(world: WorldModel) -> dict:
    return {
        "dimension": world.dimension,
        "bounds": {
            "min": world.bounds.min_corner.tolist(),
            "max": world.bounds.max_corner.tolist(),
        },
        "obstacles": [
            {"min": obs.min_corner.tolist(), "max": obs.max_corner.tolist()}
            for obs in world.obstacles
        ],
    }


def world_from_dict(data: dict) -> WorldModel:
    bounds = HyperRectangle(data["bounds"]["min"], data["bounds"]["max"])
    if bounds.dimension != data["dimension"]:
        raise ValueError("declared dimension does not match bounds")
    obstacles = tuple(
        HyperRectangle(o["min"], o["max"]) for o in data.get("obstacles", [])
    )
    return WorldModel(bounds, obstacles)


def save_world(world: WorldModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(world_to_dict(world), fh, indent=2)
        fh.write("\n")


def load_world(path) -> WorldModel:
    with open(path) as fh:
        return world_from_dict(json.load(fh))
