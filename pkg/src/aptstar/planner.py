"""Anytime planners: the adaptive prolated batch planner and three baselines.

All planners share the PlannerConfig / PlannerRun contract. Runs are
single-threaded and fully deterministic under an iteration budget: event
timestamps are then the batch (or sample-iteration) index, so identical
seeds reproduce bit-identical event logs. Under a wall-clock budget,
timestamps come from a monotonic clock.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .adaptive import (
    BatchConfig,
    BatchState,
    ChargeConfig,
    adapt_batch_size,
    vertex_charge,
)
from .geometry import (
    HyperRectangle,
    InformedSet,
    ProblemInstance,
    State,
    default_motion_resolution,
    distance,
    is_motion_valid,
    is_state_valid,
    lebesgue_measure,
    sample_informed,
    sample_uniform,
)
from .neighbors import NeighborConfig, elliptical_nn_query

_EPS = 1e-12


def _dist(a: np.ndarray, b: np.ndarray) -> float:
    d = a - b
    return math.sqrt(float(d @ d))


def default_edge_length(n: int) -> float:
    """Max edge length for RRT-family planners, by dimension band."""
    if n <= 4:
        return 0.5
    if n <= 8:
        return 1.25
    return 3.0


@dataclass(frozen=True)
class PlannerConfig:
    max_time: float | None = None
    max_iterations: int | None = None
    goal_bias: float = 0.05
    eta: float = 1.001
    rewire_factor: float = 1.2
    motion_resolution: float | None = None
    max_edge_length: float | None = None
    neighbor: NeighborConfig = field(default_factory=NeighborConfig)
    batch: BatchConfig | None = None
    charge: ChargeConfig = field(default_factory=ChargeConfig)
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_time is None and self.max_iterations is None:
            raise ValueError("set max_time, max_iterations, or both")
        if not 0.0 <= self.goal_bias < 1.0:
            raise ValueError("goal_bias must be in [0, 1)")


@dataclass
class PlannerRun:
    planner: str
    events: list[tuple[float, float]] = field(default_factory=list)
    success: bool = False
    path: list[State] | None = None
    counters: dict[str, int] = field(default_factory=dict)

    @property
    def initial(self) -> tuple[float, float] | None:
        return self.events[0] if self.events else None

    @property
    def final(self) -> tuple[float, float] | None:
        return self.events[-1] if self.events else None

    @property
    def t_init(self) -> float:
        return self.events[0][0] if self.events else math.inf

    @property
    def c_init(self) -> float:
        return self.events[0][1] if self.events else math.inf

    @property
    def t_final(self) -> float:
        return self.events[-1][0] if self.events else math.inf

    @property
    def c_final(self) -> float:
        return self.events[-1][1] if self.events else math.inf


class _Clock:
    """Monotonic wall clock, or a deterministic iteration counter."""

    def __init__(self, wall: bool):
        self.wall = wall
        self._t0 = time.perf_counter()
        self._iteration = 0.0

    def tick(self, iteration: int) -> None:
        self._iteration = float(iteration)

    def now(self) -> float:
        if self.wall:
            return time.perf_counter() - self._t0
        return self._iteration


class SearchTree:
    """Rooted tree over states with cost-to-come bookkeeping."""

    def __init__(self, root: State):
        self.states: list[State] = [np.asarray(root, dtype=float)]
        self.parent: list[int] = [-1]
        self.g: list[float] = [0.0]
        self.children: list[list[int]] = [[]]

    def __len__(self) -> int:
        return len(self.states)

    def add(self, state: State, parent: int, edge_cost: float) -> int:
        idx = len(self.states)
        self.states.append(np.asarray(state, dtype=float))
        self.parent.append(parent)
        self.g.append(self.g[parent] + edge_cost)
        self.children.append([])
        self.children[parent].append(idx)
        return idx

    def is_ancestor(self, candidate: int, of: int) -> bool:
        v = of
        while v != -1:
            if v == candidate:
                return True
            v = self.parent[v]
        return False

    def reparent(self, v: int, new_parent: int, edge_cost: float) -> list[int]:
        """Re-hang v under new_parent and propagate g through the subtree.

        Returns the vertices whose g changed.
        """
        old = self.parent[v]
        if old != -1:
            self.children[old].remove(v)
        self.parent[v] = new_parent
        self.children[new_parent].append(v)
        delta = self.g[new_parent] + edge_cost - self.g[v]
        touched = []
        stack = [v]
        while stack:
            w = stack.pop()
            self.g[w] += delta
            touched.append(w)
            stack.extend(self.children[w])
        return touched

    def path_to(self, v: int) -> list[State]:
        out = []
        while v != -1:
            out.append(self.states[v])
            v = self.parent[v]
        out.reverse()
        return out


def extract_path(tree: SearchTree, goal_vertex: int) -> list[State]:
    """Root-to-goal state sequence for a connected goal vertex."""
    if not 0 <= goal_vertex < len(tree):
        raise ValueError("goal vertex not in tree")
    path = tree.path_to(goal_vertex)
    total = sum(distance(a, b) for a, b in zip(path, path[1:]))
    if abs(total - tree.g[goal_vertex]) > 1e-9:
        raise RuntimeError("stored cost-to-come disagrees with the path")
    return path


def _resolve_batch_config(config: PlannerConfig, n: int) -> BatchConfig:
    if config.batch is not None:
        return config.batch if config.batch.n_dim == n else replace(config.batch, n_dim=n)
    return BatchConfig(n_dim=n)


def plan_apt(
    problem: ProblemInstance,
    config: PlannerConfig,
    *,
    adaptive_batch: bool = True,
    use_charge: bool = True,
    fixed_batch: int | None = None,
    planner_name: str = "apt",
) -> PlannerRun:
    """Batch-wise informed planner with adaptive batches and prolated neighbors.

    Each batch: pick a batch size (adaptive after the first solution), draw
    that many informed samples into the pool (invalid draws are kept as
    repulsive charges), then grow and rewire the tree best-first where the
    candidate connections come from the force-prolated elliptical neighbor
    region. Goal connections are attempted directly from every vertex whose
    cost-to-come plus goal distance could still improve the solution, and
    improvements trigger informed pruning of samples and vertices.

    The two adaptive modules can be disabled to obtain the fixed-batch
    isotropic ablation used as a baseline.
    """
    world = problem.world
    n = world.dimension
    rng = np.random.default_rng(config.rng_seed)
    clock = _Clock(wall=config.max_time is not None)
    resolution = config.motion_resolution or default_motion_resolution(world)
    batch_cfg = _resolve_batch_config(config, n)
    batch_state = BatchState()
    bounds_measure = world.bounds.volume
    c_min = problem.c_min
    goals = list(problem.goals)

    run = PlannerRun(planner=planner_name)
    counters = {
        "samples": 0,
        "collision_checks": 0,
        "neighbor_queries": 0,
        "shrink_rounds": 0,
        "batches": 0,
    }
    nn_stats: dict[str, int] = {}

    tree = SearchTree(problem.start)
    goal_vertex: dict[int, int] = {}
    pool_states: list[State] = []
    pool_valid: list[bool] = []
    c_best = math.inf
    best_goal: int | None = None

    def h(x: State) -> float:
        return min(_dist(x, g) for g in goals)

    # Edge validity is immutable for a static world, and rewiring retries the
    # same candidate edges across batches; memoize per (a, b) pair.
    motion_memo: dict[tuple[bytes, bytes], bool] = {}

    def motion_ok(a: State, b: State) -> bool:
        key = (a.tobytes(), b.tobytes())
        cached = motion_memo.get(key)
        if cached is not None:
            return cached
        counters["collision_checks"] += 1
        ok = is_motion_valid(world, a, b, resolution)
        motion_memo[key] = ok
        return ok

    def record_improvement() -> None:
        nonlocal c_best, best_goal
        for gi, v in goal_vertex.items():
            if tree.g[v] < c_best - _EPS:
                c_best = tree.g[v]
                best_goal = gi
                run.events.append((clock.now(), c_best))

    def try_goal(v: int) -> None:
        for gi, gstate in enumerate(goals):
            d = _dist(tree.states[v], gstate)
            if d <= 0.0:
                continue
            g_new = tree.g[v] + d
            existing = goal_vertex.get(gi)
            bound = c_best if existing is None else min(c_best, tree.g[existing])
            if g_new >= bound - _EPS:
                continue
            if not motion_ok(tree.states[v], gstate):
                continue
            if existing is None:
                goal_vertex[gi] = tree.add(gstate, v, d)
            else:
                tree.reparent(existing, v, d)
            record_improvement()

    def prune() -> None:
        nonlocal pool_states, pool_valid, best_goal
        if not math.isfinite(c_best):
            return
        # Invalid samples are pruned by the same informed-set rule as valid ones.
        if pool_states:
            arr = np.array(pool_states, dtype=float)
            d_start = np.sqrt(np.einsum("ij,ij->i", arr - problem.start, arr - problem.start))
            h_arr = np.min(
                np.stack(
                    [np.sqrt(np.einsum("ij,ij->i", arr - g, arr - g)) for g in goals]
                ),
                axis=0,
            )
            keep_pool = np.nonzero(d_start + h_arr < c_best)[0]
            pool_states = [pool_states[i] for i in keep_pool]
            pool_valid = [pool_valid[i] for i in keep_pool]

        protected = set()
        if best_goal is not None:
            v = goal_vertex[best_goal]
            while v != -1:
                protected.add(v)
                v = tree.parent[v]
        keep = [False] * len(tree)
        order = [0]
        keep[0] = True
        recycled: list[State] = []
        idx_map = {0: 0}
        new_tree = SearchTree(tree.states[0])
        goal_states = {tuple(g): gi for gi, g in enumerate(goals)}
        new_goal_vertex: dict[int, int] = {}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in tree.children[v]:
                fhat = _dist(problem.start, tree.states[w]) + h(tree.states[w])
                if keep[v] and (w in protected or fhat < c_best):
                    keep[w] = True
                    idx_map[w] = new_tree.add(
                        tree.states[w], idx_map[v], tree.g[w] - tree.g[v]
                    )
                elif fhat < c_best and tuple(tree.states[w]) not in goal_states:
                    recycled.append(tree.states[w])
                stack.append(w)
        for gi, v in goal_vertex.items():
            if keep[v]:
                new_goal_vertex[gi] = idx_map[v]
        pool_states.extend(recycled)
        pool_valid.extend([True] * len(recycled))
        tree.states = new_tree.states
        tree.parent = new_tree.parent
        tree.g = new_tree.g
        tree.children = new_tree.children
        goal_vertex.clear()
        goal_vertex.update(new_goal_vertex)

    max_batches = config.max_iterations if config.max_iterations is not None else 10**9
    counter = itertools.count()
    first_batch = fixed_batch if fixed_batch is not None else batch_cfg.m_default

    try_goal(0)

    for batch_index in range(max_batches):
        clock.tick(batch_index)
        if config.max_time is not None and clock.now() >= config.max_time:
            break
        if c_best <= c_min + _EPS:
            break

        if math.isfinite(c_best) and adaptive_batch:
            batch = adapt_batch_size(
                batch_state.c_last, c_best, c_min, n, batch_cfg, batch_state
            )
        else:
            batch = first_batch
        charge = (
            vertex_charge(batch, config.charge, batch_cfg) if use_charge else 0.0
        )
        counters["batches"] += 1

        focus = goals[best_goal] if best_goal is not None else min(
            goals, key=lambda g: distance(problem.start, g)
        )
        informed = InformedSet(problem.start, focus, c_best, distance(problem.start, focus))
        for _ in range(batch):
            x = sample_informed(informed, world.bounds, rng)
            counters["samples"] += 1
            pool_states.append(x)
            pool_valid.append(is_state_valid(world, x))

        n_pool = len(pool_states)
        pool_pos = np.array(pool_states, dtype=float).reshape(n_pool, n)
        tree_pos = np.array(tree.states, dtype=float).reshape(len(tree), n)
        positions = np.vstack([pool_pos, tree_pos])
        valid_all = np.concatenate(
            [np.array(pool_valid, dtype=bool), np.ones(len(tree), dtype=bool)]
        )
        kdtree = cKDTree(positions)
        tree_kd = cKDTree(tree_pos)
        if n_pool:
            h_pool = np.min(
                np.stack(
                    [
                        np.sqrt(
                            np.einsum(
                                "ij,ij->i",
                                positions[:n_pool] - g,
                                positions[:n_pool] - g,
                            )
                        )
                        for g in goals
                    ]
                ),
                axis=0,
            )
        else:
            h_pool = np.zeros(0)
        informed_measure = (
            lebesgue_measure(c_best, c_min, n) if math.isfinite(c_best) else math.inf
        )
        connected_pool: set[int] = set()

        heap: list[tuple[float, int, int]] = []
        for v in range(len(tree)):
            heapq.heappush(heap, (tree.g[v] + h(tree.states[v]), next(counter), v))

        budget_hit = False
        processed: dict[int, float] = {}
        while heap:
            if config.max_time is not None and clock.now() >= config.max_time:
                budget_hit = True
                break
            key, _, v = heapq.heappop(heap)
            if key >= c_best - _EPS:
                continue
            if key > tree.g[v] + h(tree.states[v]) + _EPS:
                continue  # stale entry; vertex was rewired to a better cost
            if v in processed and processed[v] <= tree.g[v] + _EPS:
                continue
            processed[v] = tree.g[v]
            xv = tree.states[v]

            counters["neighbor_queries"] += 1
            nbrs, region, _ = elliptical_nn_query(
                xv,
                None,
                batch,
                n,
                config.neighbor,
                lambda _b: charge,
                informed_measure=informed_measure,
                bounds_measure=bounds_measure,
                eta=config.eta,
                kdtree=kdtree,
                positions=positions,
                valid=valid_all,
                stats=nn_stats,
            )
            cand_ids = [i for i in nbrs if i < n_pool and i not in connected_pool]
            if cand_ids:
                arr = positions[cand_ids]
                dvec = np.sqrt(np.einsum("ij,ij->i", arr - xv, arr - xv))
                order = np.lexsort((cand_ids, dvec))
            else:
                order = ()
            for oi in order:
                i = cand_ids[oi]
                d = float(dvec[oi])
                if d <= 0.0:
                    continue
                g_new = tree.g[v] + d
                if g_new + h_pool[i] >= c_best - _EPS:
                    continue
                if not motion_ok(xv, pool_states[i]):
                    continue
                w = tree.add(pool_states[i], v, d)
                connected_pool.add(i)
                heapq.heappush(
                    heap, (tree.g[w] + h(tree.states[w]), next(counter), w)
                )
                try_goal(w)

            # Rewiring candidates come from the same prolate region with every
            # semi-axis scaled by rewire_factor, restricted to tree vertices.
            if region is not None and tree_kd is not None:
                scaled_axes = region.semi_axes * config.rewire_factor
                reach = float(np.max(scaled_axes))
                cand = np.array(
                    sorted(tree_kd.query_ball_point(xv, reach)), dtype=int
                )
                if cand.size:
                    rel = positions[cand + n_pool] - xv
                    local = rel @ region.frame
                    inside = (
                        np.einsum(
                            "ij,ij->i", local / scaled_axes, local / scaled_axes
                        )
                        < 1.0
                    )
                    cand = cand[inside]
                    rel = rel[inside]
                    rewire_d = np.sqrt(np.einsum("ij,ij->i", rel, rel))
                else:
                    rewire_d = np.zeros(0)
                gv = tree.g[v]
                for w, d in zip(cand, rewire_d):
                    w = int(w)
                    d = float(d)
                    if w == v or w == 0 or d <= 0.0:
                        continue
                    if gv + d >= tree.g[w] - _EPS:
                        continue
                    if tree.is_ancestor(w, v):
                        continue
                    if not motion_ok(xv, tree.states[w]):
                        continue
                    for t in tree.reparent(w, v, d):
                        heapq.heappush(
                            heap, (tree.g[t] + h(tree.states[t]), next(counter), t)
                        )
                    record_improvement()

        if connected_pool:
            pool_states = [
                s for i, s in enumerate(pool_states) if i not in connected_pool
            ]
            pool_valid = [
                v for i, v in enumerate(pool_valid) if i not in connected_pool
            ]
        counters["shrink_rounds"] = nn_stats.get("shrink_rounds", 0)
        prune()
        if budget_hit:
            break

    counters["shrink_rounds"] = nn_stats.get("shrink_rounds", 0)
    run.counters = counters
    if best_goal is not None:
        run.success = True
        run.path = extract_path(tree, goal_vertex[best_goal])
    return run


def plan_batch_informed_trees(
    problem: ProblemInstance, config: PlannerConfig
) -> PlannerRun:
    """Fixed-batch isotropic ablation: the same skeleton with both adaptive
    modules disabled (constant batch size, zero charge, spherical regions)."""
    batch_cfg = _resolve_batch_config(config, problem.world.dimension)
    return plan_apt(
        problem,
        config,
        adaptive_batch=False,
        use_charge=False,
        fixed_batch=batch_cfg.m_default,
        planner_name="bit",
    )


def _steer(a: State, b: State, max_edge: float) -> State:
    d = distance(a, b)
    if d <= max_edge:
        return b
    return a + (b - a) * (max_edge / d)


def plan_rrt_connect(problem: ProblemInstance, config: PlannerConfig) -> PlannerRun:
    """Bidirectional feasible planner; the first solution is final."""
    world = problem.world
    n = world.dimension
    rng = np.random.default_rng(config.rng_seed)
    clock = _Clock(wall=config.max_time is not None)
    resolution = config.motion_resolution or default_motion_resolution(world)
    max_edge = config.max_edge_length or default_edge_length(n)
    run = PlannerRun(planner="rrt_connect")
    counters = {"samples": 0, "collision_checks": 0}

    goal = min(problem.goals, key=lambda g: distance(problem.start, g))
    # nodes as (states list, parent list); tree_a grows from the start side
    trees = [
        ([problem.start], [-1]),
        ([goal], [-1]),
    ]
    a_is_start = True

    def nearest(tree, x):
        pts = np.array(tree[0], dtype=float)
        d = np.sqrt(np.sum((pts - x) ** 2, axis=1))
        return int(np.argmin(d))

    def motion_ok(a, b):
        counters["collision_checks"] += 1
        return is_motion_valid(world, a, b, resolution)

    def path_of(tree, idx):
        out = []
        while idx != -1:
            out.append(tree[0][idx])
            idx = tree[1][idx]
        out.reverse()
        return out

    max_iters = config.max_iterations if config.max_iterations is not None else 10**9
    for it in range(max_iters):
        clock.tick(it)
        if config.max_time is not None and clock.now() >= config.max_time:
            break
        x_rand = sample_uniform(world.bounds, rng)
        counters["samples"] += 1

        ta, tb = trees
        ia = nearest(ta, x_rand)
        x_new = _steer(ta[0][ia], x_rand, max_edge)
        if is_state_valid(world, x_new) and motion_ok(ta[0][ia], x_new):
            ta[0].append(x_new)
            ta[1].append(ia)
            # greedily connect the other tree toward x_new
            ib = nearest(tb, x_new)
            reached = False
            current = ib
            while True:
                x_step = _steer(tb[0][current], x_new, max_edge)
                if not (is_state_valid(world, x_step) and motion_ok(tb[0][current], x_step)):
                    break
                tb[0].append(x_step)
                tb[1].append(current)
                current = len(tb[0]) - 1
                if distance(x_step, x_new) <= _EPS:
                    reached = True
                    break
            if reached:
                pa = path_of(ta, len(ta[0]) - 1)
                pb = path_of(tb, current)
                if a_is_start:
                    path = pa + pb[::-1][1:]
                else:
                    path = pb + pa[::-1][1:]
                cost = sum(distance(p, q) for p, q in zip(path, path[1:]))
                run.events.append((clock.now(), cost))
                run.success = True
                run.path = path
                break
        trees = [tb, ta]
        a_is_start = not a_is_start

    run.counters = counters
    return run


def plan_informed_rrt_star(problem: ProblemInstance, config: PlannerConfig) -> PlannerRun:
    """RRT* with isotropic RGG-radius neighbors and informed sampling after
    the first solution; records anytime improvement events."""
    world = problem.world
    n = world.dimension
    rng = np.random.default_rng(config.rng_seed)
    clock = _Clock(wall=config.max_time is not None)
    resolution = config.motion_resolution or default_motion_resolution(world)
    max_edge = config.max_edge_length or default_edge_length(n)
    bounds_measure = world.bounds.volume
    goals = list(problem.goals)
    c_min = problem.c_min
    run = PlannerRun(planner="informed_rrt_star")
    counters = {"samples": 0, "collision_checks": 0, "neighbor_queries": 0}

    tree = SearchTree(problem.start)
    goal_vertex: dict[int, int] = {}
    c_best = math.inf
    best_goal: int | None = None

    def motion_ok(a, b):
        counters["collision_checks"] += 1
        return is_motion_valid(world, a, b, resolution)

    def record_improvement():
        nonlocal c_best, best_goal
        for gi, v in goal_vertex.items():
            if tree.g[v] < c_best - _EPS:
                c_best = tree.g[v]
                best_goal = gi
                run.events.append((clock.now(), c_best))

    from .neighbors import rnn_radius

    max_iters = config.max_iterations if config.max_iterations is not None else 10**9
    for it in range(max_iters):
        clock.tick(it)
        if config.max_time is not None and clock.now() >= config.max_time:
            break
        if c_best <= c_min + _EPS:
            break

        counters["samples"] += 1
        if not math.isfinite(c_best) and rng.random() < config.goal_bias:
            x_rand = goals[int(rng.integers(len(goals)))]
        elif math.isfinite(c_best):
            focus = goals[best_goal]
            informed = InformedSet(
                problem.start, focus, c_best, distance(problem.start, focus)
            )
            x_rand = sample_informed(informed, world.bounds, rng)
        else:
            x_rand = sample_uniform(world.bounds, rng)

        pts = np.array(tree.states, dtype=float)
        dists = np.sqrt(np.sum((pts - x_rand) ** 2, axis=1))
        iv = int(np.argmin(dists))
        x_new = _steer(tree.states[iv], x_rand, max_edge)
        if not is_state_valid(world, x_new):
            continue
        d_new = np.sqrt(np.sum((pts - x_new) ** 2, axis=1))
        if float(np.min(d_new)) <= _EPS:
            continue

        counters["neighbor_queries"] += 1
        informed_measure = (
            lebesgue_measure(c_best, c_min, n) if math.isfinite(c_best) else math.inf
        )
        radius = min(
            config.rewire_factor
            * rnn_radius(len(tree) + 1, n, informed_measure, bounds_measure, config.eta),
            max_edge,
        )
        nbr_idx = [int(i) for i in np.nonzero(d_new <= radius)[0]]
        if iv not in nbr_idx:
            nbr_idx.append(iv)

        parent = -1
        best_g = math.inf
        for i in sorted(nbr_idx, key=lambda i: (tree.g[i] + float(d_new[i]), i)):
            cand = tree.g[i] + float(d_new[i])
            if cand >= best_g:
                break
            if motion_ok(tree.states[i], x_new):
                parent = i
                best_g = cand
                break
        if parent == -1:
            continue
        w = tree.add(x_new, parent, float(d_new[parent]))

        for i in nbr_idx:
            if i == parent or i == 0:
                continue
            d = float(d_new[i])
            if tree.g[w] + d >= tree.g[i] - _EPS:
                continue
            if tree.is_ancestor(i, w):
                continue
            if motion_ok(x_new, tree.states[i]):
                tree.reparent(i, w, d)
        record_improvement()

        for gi, gstate in enumerate(goals):
            d = distance(x_new, gstate)
            if d <= 0.0 or d > max_edge:
                continue
            g_new = tree.g[w] + d
            existing = goal_vertex.get(gi)
            bound = c_best if existing is None else min(c_best, tree.g[existing])
            if g_new >= bound - _EPS:
                continue
            if motion_ok(x_new, gstate):
                if existing is None:
                    goal_vertex[gi] = tree.add(gstate, w, d)
                else:
                    tree.reparent(existing, w, d)
        record_improvement()

    run.counters = counters
    if best_goal is not None:
        run.success = True
        run.path = extract_path(tree, goal_vertex[best_goal])
    return run


PLANNERS = {
    "apt": plan_apt,
    "bit": plan_batch_informed_trees,
    "rrt_connect": plan_rrt_connect,
    "informed_rrt_star": plan_informed_rrt_star,
}
