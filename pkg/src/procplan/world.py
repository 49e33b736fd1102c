"""Deterministic synthetic task-grammar world.

Stands in for instructional-video corpora: each task owns a pool of actions
arranged in a forward-only transition graph (successors always have larger
in-task index, optionally skipping one position). World state is a binary
attribute vector; action k of a task flips attribute k, and the state always
carries a task-indicator block, so (start, goal) observations determine the
executed plan exactly when observation noise is zero. That gives every
downstream component an analytic inverse oracle, which real video lacks.

Observations are images of states under one fixed random orthonormal map,
plus Gaussian noise. Unannotated "videos" are frame sequences whose on-action
frames mix the action's language embedding with the current state encoding,
so frame-action cosine costs are informative for grounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import (
    END_NAME,
    START_NAME,
    ActionVocabulary,
    Observation,
    Plan,
    Sample,
)
from .seeding import seeded_rng


@dataclass(frozen=True)
class TaskGrammar:
    """One task: its action pool, legal successor sets, and horizon range."""

    task_id: int
    action_pool: tuple[int, ...]  # global action ids, in-task order
    successors: dict  # global id -> tuple of global ids
    horizon_range: tuple[int, int]

    def __post_init__(self):
        t_min, t_max = self.horizon_range
        if t_min < 1 or t_max < t_min:
            raise ValueError(f"invalid horizon range {self.horizon_range}")
        last = self.action_pool[-1]
        for a in self.action_pool[:-1]:
            if len(self.successors[a]) < 1:
                raise ValueError(f"action {a} has no successor and cannot terminate")
        if self.successors[last] != ():
            raise ValueError("terminal action must have empty successor set")

    def local_index(self, action_id: int) -> int:
        return self.action_pool.index(action_id)


@dataclass(frozen=True)
class World:
    num_tasks: int
    actions_per_task: int
    d_model: int
    seed: int
    grammars: tuple[TaskGrammar, ...]
    vocab: ActionVocabulary
    task_embeddings: np.ndarray  # (num_tasks, d_model)
    state_map: np.ndarray  # (d_model, state_dim), orthonormal columns

    @property
    def state_dim(self) -> int:
        return self.num_tasks + self.actions_per_task

    def attribute_column(self, action_id: int) -> int:
        """Index of the state attribute flipped by this action."""
        task_id, local = divmod(action_id, self.actions_per_task)
        del task_id
        return self.num_tasks + local

    def initial_state(self, task_id: int, rng: np.random.Generator) -> np.ndarray:
        state = np.zeros(self.state_dim)
        state[task_id] = 1.0
        state[self.num_tasks :] = rng.integers(0, 2, size=self.actions_per_task)
        return state

    def apply_action(self, state: np.ndarray, action_id: int) -> np.ndarray:
        nxt = state.copy()
        col = self.attribute_column(action_id)
        nxt[col] = 1.0 - nxt[col]
        return nxt

    def encode_state(self, state: np.ndarray, noise: float = 0.0,
                     rng: np.random.Generator | None = None) -> np.ndarray:
        v = self.state_map @ state
        if noise > 0.0:
            if rng is None:
                raise ValueError("noise > 0 requires an rng")
            v = v + noise * rng.normal(size=self.d_model)
        return v

    def decode_state(self, v: np.ndarray) -> np.ndarray:
        """Round-trip inverse of encode_state; exact at zero noise."""
        raw = self.state_map.T @ v
        return np.clip(np.round(raw), 0.0, 1.0)

    def decode_task(self, v: np.ndarray) -> int:
        return int(np.argmax((self.state_map.T @ v)[: self.num_tasks]))


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def generate_world(num_tasks: int, actions_per_task: int, seed: int,
                   d_model: int = 32, skip_edge_prob: float = 0.5) -> World:
    """Build a reproducible world; identical arguments give identical worlds.

    Action language embeddings are drawn once per action name from a seeded
    unit Gaussian and normalized. Task pools are disjoint across tasks.
    """
    if num_tasks < 1:
        raise ValueError("num_tasks must be >= 1")
    if actions_per_task < 2:
        raise ValueError("actions_per_task must be >= 2")
    state_dim = num_tasks + actions_per_task
    if state_dim > d_model:
        raise ValueError(
            f"state dimension {state_dim} exceeds d_model {d_model}; "
            "observations would not determine plans"
        )

    names: list[str] = []
    for t in range(num_tasks):
        for k in range(actions_per_task):
            names.append(f"task{t:02d}/step{k:02d}")
    names.append(END_NAME)
    names.append(START_NAME)

    embeddings = np.stack([
        _unit(seeded_rng(seed, "embed", name).normal(size=d_model)) for name in names
    ])
    vocab = ActionVocabulary(names=tuple(names), embeddings=embeddings)

    task_embeddings = np.stack([
        _unit(seeded_rng(seed, "task-embed", f"task{t:02d}").normal(size=d_model))
        for t in range(num_tasks)
    ])

    grammars = []
    for t in range(num_tasks):
        pool = tuple(range(t * actions_per_task, (t + 1) * actions_per_task))
        edge_rng = seeded_rng(seed, "edges", t)
        successors: dict[int, tuple[int, ...]] = {}
        for k, a in enumerate(pool):
            succ = []
            if k + 1 < len(pool):
                succ.append(pool[k + 1])
            if k + 2 < len(pool) and edge_rng.random() < skip_edge_prob:
                succ.append(pool[k + 2])
            successors[a] = tuple(succ)
        grammars.append(
            TaskGrammar(
                task_id=t,
                action_pool=pool,
                successors=successors,
                horizon_range=(1, actions_per_task),
            )
        )

    gauss = seeded_rng(seed, "statemap").normal(size=(d_model, state_dim))
    q, r = np.linalg.qr(gauss)
    q = q * np.sign(np.diag(r))  # fix QR sign convention for reproducibility

    return World(
        num_tasks=num_tasks,
        actions_per_task=actions_per_task,
        d_model=d_model,
        seed=seed,
        grammars=tuple(grammars),
        vocab=vocab,
        task_embeddings=task_embeddings,
        state_map=q,
    )


# -- walk machinery --------------------------------------------------------


def _walk_counts(grammar: TaskGrammar, max_len: int) -> dict[int, list[int]]:
    """counts[a][t] = number of legal walks of length t starting at action a."""
    counts = {a: [0] * (max_len + 1) for a in grammar.action_pool}
    for a in grammar.action_pool:
        counts[a][1] = 1
    for t in range(2, max_len + 1):
        for a in grammar.action_pool:
            counts[a][t] = sum(counts[b][t - 1] for b in grammar.successors[a])
    return counts


def achievable_horizons(grammar: TaskGrammar) -> list[int]:
    t_min, t_max = grammar.horizon_range
    counts = _walk_counts(grammar, t_max)
    return [t for t in range(t_min, t_max + 1)
            if sum(c[t] for c in counts.values()) > 0]


def sample_walk(grammar: TaskGrammar, length: int, rng: np.random.Generator) -> list[int]:
    """Uniform draw over all legal walks of exactly `length` actions."""
    t_min, t_max = grammar.horizon_range
    if not t_min <= length <= t_max:
        raise ValueError(f"horizon {length} outside range {grammar.horizon_range}")
    counts = _walk_counts(grammar, length)
    starts = [a for a in grammar.action_pool if counts[a][length] > 0]
    if not starts:
        raise ValueError(f"no legal walk of length {length} in task {grammar.task_id}")
    weights = np.array([counts[a][length] for a in starts], dtype=np.float64)
    current = starts[rng.choice(len(starts), p=weights / weights.sum())]
    walk = [current]
    remaining = length - 1
    while remaining > 0:
        succ = [b for b in grammar.successors[current] if counts[b][remaining] > 0]
        weights = np.array([counts[b][remaining] for b in succ], dtype=np.float64)
        current = succ[rng.choice(len(succ), p=weights / weights.sum())]
        walk.append(current)
        remaining -= 1
    return walk


@dataclass(frozen=True)
class SourceSequence:
    """A full sampled procedure with its intermediate states; the raw unit
    from which moving-window sub-plans are extracted."""

    source_id: int
    task_id: int
    actions: tuple[int, ...]
    states: np.ndarray  # (len+1, state_dim)


def sample_source(world: World, grammar: TaskGrammar, length: int,
                  source_id: int, rng: np.random.Generator) -> SourceSequence:
    walk = sample_walk(grammar, length, rng)
    states = [world.initial_state(grammar.task_id, rng)]
    for a in walk:
        states.append(world.apply_action(states[-1], a))
    return SourceSequence(
        source_id=source_id,
        task_id=grammar.task_id,
        actions=tuple(walk),
        states=np.stack(states),
    )


def sample_procedure(world: World, grammar: TaskGrammar, horizon,
                     noise: float, seed: int) -> Sample:
    """Draw one (Observation, Plan) pair. `horizon` is an int or "variable"."""
    rng = seeded_rng(world.seed, "procedure", grammar.task_id, horizon, noise, seed)
    if horizon == "variable":
        options = achievable_horizons(grammar)
        length = int(options[rng.integers(len(options))])
    else:
        length = int(horizon)
    source = sample_source(world, grammar, length, source_id=-1, rng=rng)
    obs = Observation(
        start_embedding=world.encode_state(source.states[0], noise, rng),
        goal_embedding=world.encode_state(source.states[-1], noise, rng),
        task_id=grammar.task_id,
    )
    return Sample(observation=obs, plan=Plan(grammar.task_id, source.actions))


def exhaustive_plan_search(world: World, grammar: TaskGrammar, v_s: np.ndarray,
                           v_g: np.ndarray, max_horizon: int | None = None) -> list[list[int]]:
    """Brute-force inverse: every legal walk whose attribute flips transform
    the decoded start state into the decoded goal state."""
    start = world.decode_state(v_s)
    goal = world.decode_state(v_g)
    delta = np.abs(goal - start)[world.num_tasks :]
    t_max = max_horizon if max_horizon is not None else grammar.horizon_range[1]

    matches: list[list[int]] = []

    def extend(walk: list[int], flipped: np.ndarray) -> None:
        if walk and np.array_equal(flipped, delta):
            matches.append(list(walk))
        if len(walk) >= t_max:
            return
        options = grammar.successors[walk[-1]] if walk else grammar.action_pool
        for nxt in options:
            col = grammar.local_index(nxt)
            flipped[col] = 1.0 - flipped[col]
            walk.append(nxt)
            extend(walk, flipped)
            walk.pop()
            flipped[col] = 1.0 - flipped[col]

    extend([], np.zeros(world.actions_per_task))
    return matches


# -- moving-window dataset extraction ---------------------------------------


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[Sample, ...]
    test: tuple[Sample, ...]


def encode_frame_window(frames) -> np.ndarray:
    """State embedding from exactly three consecutive frames: their mean."""
    if len(frames) != 3:
        raise ValueError(f"frame window must contain exactly 3 frames, got {len(frames)}")
    stacked = np.stack([np.asarray(f, dtype=np.float64) for f in frames])
    return stacked.mean(axis=0)


def extract_windows(world: World, source: SourceSequence, horizons,
                    noise: float, rng: np.random.Generator) -> list[Sample]:
    """All contiguous sub-plans of each horizon, with fresh observation noise
    per window."""
    samples = []
    length = len(source.actions)
    for t in sorted(set(int(h) for h in horizons)):
        if t < 1:
            raise ValueError("horizons must be >= 1")
        for start in range(0, length - t + 1):
            obs = Observation(
                start_embedding=world.encode_state(source.states[start], noise, rng),
                goal_embedding=world.encode_state(source.states[start + t], noise, rng),
                task_id=source.task_id,
            )
            plan = Plan(source.task_id, source.actions[start : start + t])
            samples.append(Sample(observation=obs, plan=plan, source_id=source.source_id))
    return samples


def make_splits(world: World, sources, horizons, ratio: float,
                noise: float, seed: int) -> DatasetSplit:
    """Moving-window extraction followed by a source-level train/test split,
    so no sub-plan of a test sequence leaks into training."""
    if not sources:
        raise ValueError("no source sequences given")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    rng = seeded_rng(world.seed, "split", seed)
    order = list(rng.permutation(len(sources)))
    n_train = int(round(ratio * len(sources)))
    train_idx = set(order[:n_train])
    train: list[Sample] = []
    test: list[Sample] = []
    for i, source in enumerate(sources):
        window_rng = seeded_rng(world.seed, "windows", seed, source.source_id)
        bucket = train if i in train_idx else test
        bucket.extend(extract_windows(world, source, horizons, noise, window_rng))
    return DatasetSplit(train=tuple(train), test=tuple(test))


# -- unannotated videos ------------------------------------------------------


@dataclass(frozen=True)
class DiscrepancyConfig:
    """Which plan/video mismatches to inject, plus the distractor-frame rate."""

    missing_step: bool = False
    order_swap: bool = False
    extra_step: bool = False
    distractor_rate: float = 0.0


@dataclass(frozen=True)
class SyntheticVideo:
    video_id: int
    task_id: int
    frames: np.ndarray  # (num_frames, d_model)
    nominal_plan: Plan
    hidden_segments: tuple[tuple[int, int, int], ...]  # (t_start, t_end, action)
    discrepancies: tuple[str, ...]

    def __post_init__(self):
        prev_end = -1
        for t_start, t_end, _ in self.hidden_segments:
            if not (prev_end < t_start <= t_end):
                raise ValueError("hidden segments must be increasing and disjoint")
            prev_end = t_end


def synthesize_unannotated_video(world: World, grammar: TaskGrammar,
                                 config: DiscrepancyConfig, seed: int,
                                 video_id: int = 0,
                                 frame_noise: float = 0.05,
                                 state_mix: float = 0.25) -> SyntheticVideo:
    """A frame sequence loosely paired with a nominal plan.

    On-action frames mix the action's language embedding with the encoded
    world state; distractor frames encode unrelated random states only, so
    they match no plan action. Injected discrepancies make the nominal plan
    and the hidden segments disagree in exactly the configured ways.
    """
    rng = seeded_rng(world.seed, "video", grammar.task_id, seed, video_id)
    options = [t for t in achievable_horizons(grammar) if t >= 2]
    length = int(options[rng.integers(len(options))]) if options else 1
    walk = sample_walk(grammar, length, rng)
    nominal = Plan(grammar.task_id, tuple(walk))

    video_actions = list(walk)
    flags: list[str] = []
    if config.missing_step and len(video_actions) >= 2:
        drop = int(rng.integers(len(video_actions)))
        del video_actions[drop]
        flags.append("missing_step")
    if config.order_swap and len(video_actions) >= 2:
        i = int(rng.integers(len(video_actions) - 1))
        video_actions[i], video_actions[i + 1] = video_actions[i + 1], video_actions[i]
        flags.append("order_swap")
    if config.extra_step:
        unused = [a for a in grammar.action_pool if a not in video_actions]
        if unused:
            insert_at = int(rng.integers(len(video_actions) + 1))
            video_actions.insert(insert_at, unused[int(rng.integers(len(unused)))])
            flags.append("extra_step")

    def distractor_frame() -> np.ndarray:
        state = world.initial_state(int(rng.integers(world.num_tasks)), rng)
        base = _unit(world.encode_state(state))
        return _unit(base + frame_noise * rng.normal(size=world.d_model))

    frames: list[np.ndarray] = []
    segments: list[tuple[int, int, int]] = []
    state = world.initial_state(grammar.task_id, rng)

    def maybe_distractors() -> None:
        while config.distractor_rate > 0 and rng.random() < config.distractor_rate:
            frames.append(distractor_frame())

    maybe_distractors()
    for action in video_actions:
        start = len(frames)
        span = int(rng.integers(2, 5))
        for _ in range(span):
            core = world.vocab.embedding_of(action) + state_mix * _unit(
                world.encode_state(state)
            )
            frames.append(_unit(core + frame_noise * rng.normal(size=world.d_model)))
        segments.append((start, len(frames) - 1, action))
        state = world.apply_action(state, action)
        maybe_distractors()

    return SyntheticVideo(
        video_id=video_id,
        task_id=grammar.task_id,
        frames=np.stack(frames),
        nominal_plan=nominal,
        hidden_segments=tuple(segments),
        discrepancies=tuple(flags),
    )
