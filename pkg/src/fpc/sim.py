"""Seeded kinematic pick-and-place world with a chunk-emitting scripted expert.

The world is deliberately contact-free: grasping succeeds iff the gripper
closes within positional and yaw tolerance of an object, and a held object
rides the gripper until released. That isolates exactly the failure mode the
keyframe supervisor corrects. Disturbances are injected into the expert's
predicted chunks, not the physics.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .actions import ActionVector, PredictionBuffer, PredictionChunk
from .backends import BackendConfig, OracleTruth, build_backend
from .fusion import FusionParams, fuse
from .language import CorrectionDelta, GripperEvent, Thresholds
from .runtime import LoopState, LoopStats, binarize_gripper, supervise_step

TAU = 2.0 * math.pi

_ARRIVE_EPS = 1e-9


def wrap_angle(a: float) -> float:
    """Map an angle into (-pi, pi]."""
    a = math.fmod(a, TAU)
    if a <= -math.pi:
        a += TAU
    elif a > math.pi:
        a -= TAU
    return a


def _dist3(ax, ay, az, bx, by, bz) -> float:
    return math.sqrt((ax - bx) ** 2 + (ay - by) ** 2 + (az - bz) ** 2)


# ---------------------------------------------------------------------------
# World state and configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GripperPose:
    x: float
    y: float
    z: float
    rz: float


@dataclass(frozen=True)
class SimObject:
    id: str
    x: float
    y: float
    z: float
    yaw: float
    held: bool = False


@dataclass(frozen=True)
class TargetRegion:
    id: str
    x: float
    y: float
    z: float
    radius: float


@dataclass(frozen=True)
class SimState:
    gripper: GripperPose
    gripper_closed: bool
    objects: tuple[SimObject, ...]
    targets: tuple[TargetRegion, ...]
    tick: int = 0

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "targets", tuple(self.targets))
        if sum(1 for o in self.objects if o.held) > 1:
            raise ValueError("at most one object may be held")

    def held_object(self) -> SimObject | None:
        return next((o for o in self.objects if o.held), None)

    def object_by_id(self, object_id: str) -> SimObject | None:
        return next((o for o in self.objects if o.id == object_id), None)

    def target_by_id(self, target_id: str) -> TargetRegion | None:
        return next((t for t in self.targets if t.id == target_id), None)

    def digest(self) -> tuple:
        g = self.gripper
        return (g.x, g.y, g.z, g.rz, self.gripper_closed, self.held_object() is not None)


@dataclass(frozen=True)
class Workspace:
    x_min: float = -0.5
    x_max: float = 0.5
    y_min: float = -0.5
    y_max: float = 0.5
    z_min: float = 0.0
    z_max: float = 0.4

    def clamp(self, x: float, y: float, z: float) -> tuple[float, float, float]:
        return (
            min(max(x, self.x_min), self.x_max),
            min(max(y, self.y_min), self.y_max),
            min(max(z, self.z_min), self.z_max),
        )

    def contains_range(self, lo: float, hi: float, axis: str) -> bool:
        bounds = {
            "x": (self.x_min, self.x_max),
            "y": (self.y_min, self.y_max),
            "z": (self.z_min, self.z_max),
        }[axis]
        return bounds[0] <= lo <= hi <= bounds[1]


DISTURBANCE_MODES = ("none", "keyframe", "perstep")


@dataclass(frozen=True)
class Disturbance:
    """Chunk-level corruption of the expert's predictions.

    keyframe: one offset vector per episode (uniform magnitude in [low, high],
    random axis-aligned direction) added to every planned step within `span`
    steps at or before a gripper transition. perstep: zero-mean Gaussian noise
    on every step's translation, sigma drawn once per episode from the range.
    """

    mode: str = "none"
    low: float = 0.01
    high: float = 0.1
    span: int = 1

    def __post_init__(self):
        if self.mode not in DISTURBANCE_MODES:
            raise ValueError(f"mode must be one of {DISTURBANCE_MODES}, got {self.mode!r}")
        if not 0.0 <= self.low <= self.high <= 0.2:
            raise ValueError(
                f"amplitude range must satisfy 0 <= low <= high <= 0.2, "
                f"got [{self.low!r}, {self.high!r}]"
            )
        if self.span < 0:
            raise ValueError(f"span must be >= 0, got {self.span!r}")


@dataclass(frozen=True)
class Scenario:
    """Everything that determines one episode, including its seed."""

    seed: int = 0
    instruction: str = "pick up the block and place it on the target"
    object_id: str = "obj0"
    target_id: str = "bin0"
    spawn_x: tuple[float, float] = (-0.2, 0.2)
    spawn_y: tuple[float, float] = (-0.2, 0.2)
    spawn_yaw: tuple[float, float] = (-0.5, 0.5)
    object_z: float = 0.02
    target_center: tuple[float, float, float] = (0.3, -0.3, 0.02)
    target_radius: float = 0.05
    grasp_tolerance: float = 0.02
    yaw_tolerance: float = 0.1
    hover_z: float = 0.15
    max_step: float = 0.05
    max_yaw_step: float = 0.2
    horizon: int = 15
    step_cap: int = 200
    delta_g: float = 0.5
    binary_gripper: bool = True
    disturbance: Disturbance = field(default_factory=Disturbance)
    thresholds: Thresholds = field(default_factory=Thresholds)
    workspace: Workspace = field(default_factory=Workspace)

    def __post_init__(self):
        if self.grasp_tolerance <= 0 or self.yaw_tolerance <= 0 or self.target_radius <= 0:
            raise ValueError("tolerances and target radius must be > 0")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.step_cap < 1:
            raise ValueError(f"step_cap must be >= 1, got {self.step_cap}")
        if self.max_step <= 0 or self.max_yaw_step <= 0:
            raise ValueError("step bounds must be > 0")
        for name, (lo, hi) in (("spawn_x", self.spawn_x), ("spawn_y", self.spawn_y)):
            if lo > hi:
                raise ValueError(f"{name} range is inverted: {lo!r} > {hi!r}")
            if not self.workspace.contains_range(lo, hi, name[-1]):
                raise ValueError(f"{name} range [{lo}, {hi}] leaves the workspace")
        if self.spawn_yaw[0] > self.spawn_yaw[1]:
            raise ValueError("spawn_yaw range is inverted")
        tx, ty, tz = self.target_center
        cx, cy, cz = self.workspace.clamp(tx, ty, tz)
        if (cx, cy, cz) != (tx, ty, tz):
            raise ValueError(f"target_center {self.target_center} leaves the workspace")


def reset(scenario: Scenario, rng: np.random.Generator | None = None) -> SimState:
    """Deterministic initial state: gripper open at the home pose, object
    spawned uniformly in the configured ranges. Same seed, same state."""
    if rng is None:
        rng = np.random.default_rng(scenario.seed)
    ox = float(rng.uniform(scenario.spawn_x[0], scenario.spawn_x[1]))
    oy = float(rng.uniform(scenario.spawn_y[0], scenario.spawn_y[1]))
    oyaw = float(rng.uniform(scenario.spawn_yaw[0], scenario.spawn_yaw[1]))
    obj = SimObject(scenario.object_id, ox, oy, scenario.object_z, oyaw)
    tx, ty, tz = scenario.target_center
    region = TargetRegion(scenario.target_id, tx, ty, tz, scenario.target_radius)
    home = GripperPose(0.0, 0.0, scenario.hover_z, 0.0)
    return SimState(home, False, (obj,), (region,), tick=0)


def step(state: SimState, action: ActionVector, scenario: Scenario) -> tuple[SimState, list[str]]:
    """Integrate one command: move (clamped to the workspace), then apply the
    gripper transition at the arrived pose.

    Closing within grasp tolerance (position and yaw) of a free object grasps
    it; opening while holding releases the object in place, a "place" event if
    it landed inside its target region. Held objects ride the gripper.
    """
    ws = scenario.workspace
    g = state.gripper
    nx, ny, nz = ws.clamp(g.x + action.dx, g.y + action.dy, g.z + action.dz)
    nrz = wrap_angle(g.rz + action.drz)
    pose = GripperPose(nx, ny, nz, nrz)

    want_closed = action.g >= 0.5
    events: list[str] = []
    objects = list(state.objects)

    held_idx = next((i for i, o in enumerate(objects) if o.held), None)
    if held_idx is not None:
        held = objects[held_idx]
        objects[held_idx] = replace(held, x=nx, y=ny, z=nz, yaw=nrz)

    if want_closed and not state.gripper_closed:
        grabbed = False
        if held_idx is None and objects:
            best = min(
                range(len(objects)),
                key=lambda i: _dist3(nx, ny, nz, objects[i].x, objects[i].y, objects[i].z),
            )
            obj = objects[best]
            close_enough = (
                _dist3(nx, ny, nz, obj.x, obj.y, obj.z) <= scenario.grasp_tolerance
                and abs(wrap_angle(nrz - obj.yaw)) <= scenario.yaw_tolerance
            )
            if close_enough:
                objects[best] = replace(obj, x=nx, y=ny, z=nz, yaw=nrz, held=True)
                events.append("grasp")
                grabbed = True
        if not grabbed:
            events.append("grasp_miss")
    elif not want_closed and state.gripper_closed:
        if held_idx is not None:
            dropped = replace(objects[held_idx], held=False)
            objects[held_idx] = dropped
            events.append("release")
            region = state.target_by_id(scenario.target_id)
            if region is not None and _dist3(
                dropped.x, dropped.y, dropped.z, region.x, region.y, region.z
            ) <= region.radius:
                events.append("place")
            else:
                events.append("place_miss")

    next_state = SimState(
        gripper=pose,
        gripper_closed=want_closed,
        objects=tuple(objects),
        targets=state.targets,
        tick=state.tick + 1,
    )
    return next_state, events


# ---------------------------------------------------------------------------
# Scripted expert
# ---------------------------------------------------------------------------


def _clip(v: float, bound: float) -> float:
    return min(max(v, -bound), bound)


@dataclass
class _PlanCursor:
    x: float
    y: float
    z: float
    rz: float
    closed: bool
    holding: bool
    obj: SimObject
    done: bool


def _step_toward(cur: "_PlanCursor", tx, ty, tz, tyaw, scenario: Scenario):
    """Bounded 3-D step toward a pose, yaw aligned concurrently.

    Transit happens at hover height while far in xy; near the target the step
    aims directly at the final pose. Keeping the near-field direct (no
    lift-first detour) means a disturbed hand recovers in one or two steps,
    so successive plans stay aligned in time.
    """
    near = math.hypot(tx - cur.x, ty - cur.y) <= 2.0 * scenario.max_step
    wz = tz if near else scenario.hover_z
    dx, dy, dz = tx - cur.x, ty - cur.y, wz - cur.z
    norm = math.sqrt(dx * dx + dy * dy + dz * dz)
    if norm > scenario.max_step:
        scale = scenario.max_step / norm
        dx, dy, dz = dx * scale, dy * scale, dz * scale
    drz = _clip(wrap_angle(tyaw - cur.rz), scenario.max_yaw_step)
    return dx, dy, dz, drz


def _arrived(cur: "_PlanCursor", tx, ty, tz, tyaw=None) -> bool:
    if _dist3(cur.x, cur.y, cur.z, tx, ty, tz) > _ARRIVE_EPS:
        return False
    return tyaw is None or abs(wrap_angle(tyaw - cur.rz)) <= _ARRIVE_EPS


def _plan_step(cur: _PlanCursor, scenario: Scenario) -> ActionVector:
    """One step of the nominal phase plan; advances the cursor in place.

    Phases: reopen after an empty close, approach the object while aligning
    yaw, close; then carry to the target and open. Translations are bounded
    by max_step, yaw by max_yaw_step.
    """
    if cur.done:
        action = ActionVector(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        cur.closed = False
        return action

    dx = dy = dz = drz = 0.0
    g = 1.0 if cur.holding else 0.0

    if cur.holding:
        tx, ty, tz = scenario.target_center
        if _arrived(cur, tx, ty, tz):
            g = 0.0  # release over the target
            cur.holding = False
            cur.done = True
        else:
            dx, dy, dz, _ = _step_toward(cur, tx, ty, tz, cur.rz, scenario)
    else:
        obj = cur.obj
        if cur.closed:
            g = 0.0  # empty close: reopen before retrying
        elif _arrived(cur, obj.x, obj.y, obj.z, obj.yaw):
            g = 1.0  # close on the object
            cur.holding = True
        else:
            dx, dy, dz, drz = _step_toward(cur, obj.x, obj.y, obj.z, obj.yaw, scenario)

    cur.x += dx
    cur.y += dy
    cur.z += dz
    cur.rz = wrap_angle(cur.rz + drz)
    cur.closed = g >= 0.5
    if cur.holding:
        cur.obj = replace(cur.obj, x=cur.x, y=cur.y, z=cur.z, yaw=cur.rz)
    return ActionVector(dx, dy, dz, 0.0, 0.0, drz, g)


def _object_placed(state: SimState, scenario: Scenario) -> bool:
    obj = state.object_by_id(scenario.object_id)
    region = state.target_by_id(scenario.target_id)
    if obj is None or region is None or obj.held:
        return False
    return _dist3(obj.x, obj.y, obj.z, region.x, region.y, region.z) <= region.radius


def expert_policy(
    state: SimState,
    scenario: Scenario,
    rng: np.random.Generator,
    keyframe_offset: tuple[float, float, float] | None = None,
    perstep_sigma: float | None = None,
) -> PredictionChunk:
    """Emit a full-horizon chunk planned from the live state.

    The nominal plan is correct by construction; disturbances configured on
    the scenario corrupt the emitted chunk. In keyframe mode the per-episode
    offset is added to every planned step within `span` steps at or before a
    gripper transition; in perstep mode Gaussian noise lands on every step.
    """
    obj = state.object_by_id(scenario.object_id)
    if obj is None:
        raise ValueError(f"scenario task object {scenario.object_id!r} is absent")
    cur = _PlanCursor(
        x=state.gripper.x,
        y=state.gripper.y,
        z=state.gripper.z,
        rz=state.gripper.rz,
        closed=state.gripper_closed,
        holding=obj.held,
        obj=obj,
        done=_object_placed(state, scenario) and not state.gripper_closed,
    )
    actions = [_plan_step(cur, scenario) for _ in range(scenario.horizon)]

    mode = scenario.disturbance.mode
    if mode == "keyframe" and keyframe_offset is not None:
        g_prev = 1.0 if state.gripper_closed else 0.0
        transitions = []
        for j, a in enumerate(actions):
            if abs(a.g - g_prev) > scenario.delta_g:
                transitions.append(j)
            g_prev = a.g
        disturbed: set[int] = set()
        for jt in transitions:
            lo = max(0, jt - scenario.disturbance.span)
            disturbed.update(range(lo, jt + 1))
        vx, vy, vz = keyframe_offset
        actions = [
            replace(a, dx=a.dx + vx, dy=a.dy + vy, dz=a.dz + vz) if j in disturbed else a
            for j, a in enumerate(actions)
        ]
    elif mode == "perstep" and perstep_sigma is not None and perstep_sigma > 0.0:
        noise = rng.normal(0.0, perstep_sigma, size=(len(actions), 3))
        actions = [
            replace(a, dx=a.dx + float(noise[j, 0]), dy=a.dy + float(noise[j, 1]),
                    dz=a.dz + float(noise[j, 2]))
            for j, a in enumerate(actions)
        ]

    return PredictionChunk(issued_at=state.tick, actions=tuple(actions))


# ---------------------------------------------------------------------------
# Episode loop
# ---------------------------------------------------------------------------


class Env:
    """Owns one episode: the live state, the per-episode RNG, and the
    disturbance draw. The oracle backend reads ground truth through
    correction_truth()."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.rng = np.random.default_rng(scenario.seed)
        self.state = reset(scenario, self.rng)
        self.keyframe_offset: tuple[float, float, float] | None = None
        self.perstep_sigma: float | None = None
        dist = scenario.disturbance
        if dist.mode == "keyframe":
            axis = int(self.rng.integers(0, 3))
            sign = 1.0 if int(self.rng.integers(0, 2)) else -1.0
            magnitude = float(self.rng.uniform(dist.low, dist.high))
            vec = [0.0, 0.0, 0.0]
            vec[axis] = sign * magnitude
            self.keyframe_offset = tuple(vec)
        elif dist.mode == "perstep":
            self.perstep_sigma = float(self.rng.uniform(dist.low, dist.high))

    def emit_chunk(self) -> PredictionChunk:
        return expert_policy(
            self.state,
            self.scenario,
            self.rng,
            keyframe_offset=self.keyframe_offset,
            perstep_sigma=self.perstep_sigma,
        )

    def step(self, action: ActionVector) -> list[str]:
        self.state, events = step(self.state, action, self.scenario)
        return events

    def correction_truth(self, event: GripperEvent, proposed: ActionVector) -> OracleTruth | None:
        """Ground truth for the oracle: would `proposed` satisfy the event,
        and if not, what residual would. None when the event has no target
        (closing with no free object, opening with nothing held)."""
        scenario = self.scenario
        g = self.state.gripper
        px, py, pz = scenario.workspace.clamp(g.x + proposed.dx, g.y + proposed.dy, g.z + proposed.dz)
        prz = wrap_angle(g.rz + proposed.drz)
        if event is GripperEvent.CLOSE:
            obj = self.state.object_by_id(scenario.object_id)
            if obj is None or obj.held:
                return None
            satisfied = (
                _dist3(px, py, pz, obj.x, obj.y, obj.z) <= scenario.grasp_tolerance
                and abs(wrap_angle(prz - obj.yaw)) <= scenario.yaw_tolerance
            )
            delta = CorrectionDelta(
                obj.x - px, obj.y - py, obj.z - pz, wrap_angle(obj.yaw - prz)
            )
            return OracleTruth(satisfied, delta)
        region = self.state.target_by_id(scenario.target_id)
        if region is None or self.state.held_object() is None:
            return None
        satisfied = _dist3(px, py, pz, region.x, region.y, region.z) <= region.radius
        delta = CorrectionDelta(region.x - px, region.y - py, region.z - pz, 0.0)
        return OracleTruth(satisfied, delta)


@dataclass(frozen=True)
class TraceEntry:
    action: ActionVector
    state: tuple
    events: tuple[str, ...]


@dataclass(frozen=True)
class EpisodeResult:
    grasp_success: bool
    task_success: bool
    steps: int
    supervisor_calls: int
    corrections_applied: int
    executed_trace: tuple[TraceEntry, ...]
    stats: LoopStats
    seed: int

    def __post_init__(self):
        if self.task_success and not self.grasp_success:
            raise ValueError("task success implies grasp success")


def run_episode(
    scenario: Scenario,
    fusion: FusionParams = FusionParams(),
    backend: BackendConfig = BackendConfig(kind="none"),
) -> EpisodeResult:
    """Closed loop: emit chunk, fuse aligned history, supervise at keyframes,
    step the world. Terminates on task success or the step cap."""
    if fusion.n > scenario.horizon:
        raise ValueError(
            f"history depth n={fusion.n} exceeds prediction horizon {scenario.horizon}"
        )
    env = Env(scenario)
    client = build_backend(backend, truth=env.correction_truth, thresholds=scenario.thresholds)
    buffer = PredictionBuffer(capacity=fusion.n)
    loop = LoopState(g_prev=0.0, delta_g=scenario.delta_g)
    trace: list[TraceEntry] = []
    grasp = False
    task = False
    for tick in range(scenario.step_cap):
        chunk = env.emit_chunk()
        buffer.push(chunk)
        aligned = buffer.aligned_predictions(tick, fusion.n)
        proposed = fuse(aligned.actions, fusion).fused
        if scenario.binary_gripper:
            proposed = binarize_gripper(proposed)
        executed = supervise_step(
            proposed,
            None,
            scenario.instruction,
            loop,
            client,
            thresholds=scenario.thresholds,
            timestep=tick,
        )
        events = env.step(executed)
        trace.append(TraceEntry(executed, env.state.digest(), tuple(events)))
        if "grasp" in events:
            grasp = True
        if "place" in events:
            task = True
            break
    return EpisodeResult(
        grasp_success=grasp,
        task_success=task,
        steps=len(trace),
        supervisor_calls=loop.stats.client_calls,
        corrections_applied=loop.stats.corrections,
        executed_trace=tuple(trace),
        stats=loop.stats,
        seed=scenario.seed,
    )


# ---------------------------------------------------------------------------
# Evaluation over seed sets
# ---------------------------------------------------------------------------


def derive_seeds(master_seed: int, n: int) -> list[int]:
    """Deterministic per-episode seeds from one master seed."""
    if n < 1:
        raise ValueError(f"need at least one episode, got {n}")
    return [int(s) for s in np.random.SeedSequence(master_seed).generate_state(n)]


@dataclass(frozen=True)
class VariantMetrics:
    name: str
    episodes: int
    grasp_rate: float
    task_rate: float
    mean_supervisor_calls: float
    mean_corrections: float
    mean_steps: float
    fail_open_incidents: int

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "episodes": self.episodes,
            "grasp_rate": self.grasp_rate,
            "task_rate": self.task_rate,
            "mean_supervisor_calls": self.mean_supervisor_calls,
            "mean_corrections": self.mean_corrections,
            "mean_steps": self.mean_steps,
            "fail_open_incidents": self.fail_open_incidents,
        }


@dataclass(frozen=True)
class EvaluationReport:
    seeds: tuple[int, ...]
    variants: tuple[VariantMetrics, ...]
    per_episode: dict

    def as_dict(self) -> dict:
        return {
            "seeds": list(self.seeds),
            "variants": [v.as_dict() for v in self.variants],
            "per_episode": self.per_episode,
        }

    def format_table(self) -> str:
        header = (
            f"{'variant':<12} {'episodes':>8} {'grasp%':>8} {'task%':>8} "
            f"{'calls':>8} {'corr':>8} {'steps':>8}"
        )
        lines = [header, "-" * len(header)]
        for v in self.variants:
            lines.append(
                f"{v.name:<12} {v.episodes:>8d} {100.0 * v.grasp_rate:>8.1f} "
                f"{100.0 * v.task_rate:>8.1f} {v.mean_supervisor_calls:>8.2f} "
                f"{v.mean_corrections:>8.2f} {v.mean_steps:>8.1f}"
            )
        return "\n".join(lines)


def _run_episode_task(args) -> EpisodeResult:
    scenario, fusion, backend = args
    return run_episode(scenario, fusion, backend)


def evaluate(
    scenario: Scenario,
    seeds: Sequence[int],
    variants: Sequence[tuple[str, BackendConfig]],
    fusion: FusionParams = FusionParams(),
    jobs: int = 1,
) -> EvaluationReport:
    """Run every variant over the same seed list (paired comparison).

    Results are merged in (variant, seed) order regardless of job count, so
    reports are deterministic given (scenario, seeds, variants, fusion).
    """
    if not seeds:
        raise ValueError("need at least one seed")
    names = [name for name, _ in variants]
    if len(set(names)) != len(names):
        raise ValueError(f"variant names must be unique, got {names}")

    tasks = [
        (replace(scenario, seed=seed), fusion, backend)
        for _, backend in variants
        for seed in seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_episode_task, tasks, chunksize=8))
    else:
        results = [_run_episode_task(t) for t in tasks]

    metrics = []
    per_episode: dict = {}
    n = len(seeds)
    for i, (name, _) in enumerate(variants):
        chunk = results[i * n : (i + 1) * n]
        per_episode[name] = {
            "grasp": [r.grasp_success for r in chunk],
            "task": [r.task_success for r in chunk],
            "supervisor_calls": [r.supervisor_calls for r in chunk],
            "corrections": [r.corrections_applied for r in chunk],
        }
        metrics.append(
            VariantMetrics(
                name=name,
                episodes=n,
                grasp_rate=sum(r.grasp_success for r in chunk) / n,
                task_rate=sum(r.task_success for r in chunk) / n,
                mean_supervisor_calls=sum(r.supervisor_calls for r in chunk) / n,
                mean_corrections=sum(r.corrections_applied for r in chunk) / n,
                mean_steps=sum(r.steps for r in chunk) / n,
                fail_open_incidents=sum(r.stats.malformed for r in chunk),
            )
        )
    return EvaluationReport(tuple(int(s) for s in seeds), tuple(metrics), per_episode)


def result_to_episode(result: EpisodeResult, episode_id: str, instruction: str):
    """Export an executed trace in the training-episode schema, so simulated
    runs can feed the dataset generator."""
    from .dataset import Episode, Step

    steps = [
        Step(index=i + 1, image_ref=f"sim://{episode_id}/{i + 1}", action=entry.action)
        for i, entry in enumerate(result.executed_trace)
    ]
    return Episode(id=episode_id, instruction=instruction, steps=tuple(steps))
