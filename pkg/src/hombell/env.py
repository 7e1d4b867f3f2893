"""Circuit-construction environment, exploration strategies and random search."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chsh import BellMeasurement
from .circuit import ENV_FAILURE_THRESHOLD, Circuit, CompiledCircuit
from .gaussian import KIND_ORDER, Gate, GateKind
from .herald import HeraldScheme, HeraldSpec, LcgState, vacuum_lcg
from .optimize import OptimizationInfeasible, OptimizeConfig, maximize_chsh

ALL_KINDS = KIND_ORDER
PASSIVE_KINDS = (GateKind.R, GateKind.B)
SLOT_WIDTH = 11


@dataclass(frozen=True)
class Strategy:
    id: int
    description: str
    kinds: tuple[GateKind, ...]

    def initial_gates(self, n_modes: int, squeeze: float) -> tuple[Gate, ...]:
        if self.id == 1:
            return ()
        if self.id == 2:
            return (Gate(GateKind.S2, (1, 2), squeeze),)
        if self.id == 3:
            if n_modes % 2:
                raise ValueError("strategy 3 pairs up modes and needs an even mode count")
            return tuple(Gate(GateKind.S2, (i, i + 1), squeeze) for i in range(1, n_modes, 2))
        if self.id == 4:
            return (Gate(GateKind.S1, (1,), squeeze), Gate(GateKind.S1, (2,), squeeze))
        return tuple(Gate(GateKind.S1, (i,), squeeze) for i in range(1, n_modes + 1))


STRATEGIES = {
    1: Strategy(1, "vacuum; all gates", ALL_KINDS),
    2: Strategy(2, "S2 on modes 1,2; passive gates", PASSIVE_KINDS),
    3: Strategy(3, "S2 on every pair of modes; passive gates", PASSIVE_KINDS),
    4: Strategy(4, "S1 on modes 1 and 2; passive gates", PASSIVE_KINDS),
    5: Strategy(5, "S1 on every mode; passive gates", PASSIVE_KINDS),
}


def get_strategy(strategy) -> Strategy:
    if isinstance(strategy, Strategy):
        return strategy
    try:
        return STRATEGIES[int(strategy)]
    except (KeyError, ValueError):
        raise ValueError(f"unknown strategy {strategy!r}; expected 1..5") from None


@dataclass(frozen=True)
class EnvConfig:
    """``n_circuit`` counts every gate of the finished circuit, initial ones included."""

    n_modes: int = 4
    n_circuit: int = 5
    strategy: int = 3
    herald_scheme: HeraldScheme = HeraldScheme.CLICK
    eta: float = 1.0
    default_angle: float = math.pi / 4
    default_squeeze: float = 0.45
    herald_failure_threshold: float = ENV_FAILURE_THRESHOLD
    measurement: BellMeasurement = field(default_factory=BellMeasurement)
    optimize: OptimizeConfig = field(default_factory=lambda: OptimizeConfig(simplex_tolerance=1e-4))

    def __post_init__(self):
        object.__setattr__(self, "herald_scheme", HeraldScheme(self.herald_scheme))
        get_strategy(self.strategy)
        if self.n_modes < 2:
            raise ValueError("need at least 2 modes")
        if self.n_circuit < 1:
            raise ValueError("n_circuit must be >= 1")
        if self.n_actions < 1:
            raise ValueError(f"n_circuit={self.n_circuit} leaves no room after the "
                             f"{len(self.initial_gates())} initial gates")

    def initial_gates(self) -> tuple[Gate, ...]:
        return get_strategy(self.strategy).initial_gates(self.n_modes, self.default_squeeze)

    @property
    def n_actions(self) -> int:
        """Actions per episode."""
        return self.n_circuit - len(self.initial_gates())

    @property
    def herald(self) -> HeraldSpec:
        return HeraldSpec.uniform(self.n_modes, self.herald_scheme, self.eta)

    @property
    def observation_size(self) -> int:
        return 2 ** (self.n_modes - 2) * SLOT_WIDTH


def action_space(strategy, n_modes: int) -> list[tuple[GateKind, tuple[int, ...]]]:
    """Every allowed (kind, modes) pair: kinds in R, S1, B, S2 order, modes lexicographic."""
    if n_modes < 2:
        raise ValueError("need at least 2 modes")
    strategy = get_strategy(strategy)
    out = []
    for kind in KIND_ORDER:
        if kind not in strategy.kinds:
            continue
        if kind.n_modes == 1:
            out += [(kind, (i,)) for i in range(1, n_modes + 1)]
        else:
            out += [(kind, pair) for pair in itertools.combinations(range(1, n_modes + 1), 2)]
    return out


def init_circuit(strategy, config: EnvConfig) -> Circuit:
    gates = get_strategy(strategy).initial_gates(config.n_modes, config.default_squeeze)
    return Circuit(config.n_modes, gates, config.herald)


def encode_state(state: LcgState | None, n_modes: int) -> np.ndarray:
    """Flatten up to 2^(N-2) components: 10 upper-triangle covariance entries + weight each."""
    slots = 2 ** (n_modes - 2)
    if state is None:
        state = vacuum_lcg(2)
    if state.n_modes != 2:
        raise ValueError("encode_state expects a heralded 2-mode state")
    if state.n_components > slots:
        raise ValueError(f"{state.n_components} components exceed the {slots} slots")
    iu = np.triu_indices(4)
    out = np.zeros(slots * SLOT_WIDTH)
    for k in range(state.n_components):
        out[k * SLOT_WIDTH:k * SLOT_WIDTH + 10] = state.covs[k][iu]
        out[k * SLOT_WIDTH + 10] = state.weights[k]
    return out


def reward_fn(chsh: float) -> float:
    if chsh < 2.0:
        return chsh / 4.0 - 1.0
    return math.exp(10.0 * math.log(2.0) * (chsh - 2.0)) - 1.0


@dataclass(frozen=True)
class EpisodeRecord:
    actions: tuple[int, ...]
    circuit: Circuit
    chsh: float
    herald_probability: float
    reward: float


class FinalScorer:
    """Optimizes finished circuits; results are memoized per action sequence.

    The optimization is deterministic, so sharing one scorer between searches
    with different seeds changes nothing but the runtime.
    """

    def __init__(self, config: EnvConfig):
        self.config = config
        self.cache: dict[tuple[int, ...], tuple[Circuit, float, float]] = {}

    def __call__(self, actions: tuple[int, ...], circuit: Circuit) -> tuple[Circuit, float, float]:
        key = tuple(actions)
        if key not in self.cache:
            self.cache[key] = score_circuit(circuit, self.config)
        return self.cache[key]


def score_circuit(circuit: Circuit, config: EnvConfig) -> tuple[Circuit, float, float]:
    """Maximize CHSH over the parameters; returns (circuit, chsh, herald probability)."""
    try:
        best, chsh = maximize_chsh(circuit, config.measurement, config.optimize)
    except OptimizationInfeasible:
        return circuit, 0.0, 0.0
    res = CompiledCircuit(best, config.measurement,
                          threshold=config.herald_failure_threshold)(best.params)
    return best, chsh, res.herald_probability


class BellEnv:
    """One circuit-building episode at a time; single-threaded."""

    def __init__(self, config: EnvConfig | None = None, scorer: FinalScorer | None = None):
        self.config = config or EnvConfig()
        self.strategy = get_strategy(self.config.strategy)
        self.actions = action_space(self.strategy, self.config.n_modes)
        self.scorer = scorer or FinalScorer(self.config)
        self.circuit: Circuit | None = None
        self.history: list[int] = []
        self.done = True
        self.last_record: EpisodeRecord | None = None

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def observation_size(self) -> int:
        return self.config.observation_size

    def reset(self) -> np.ndarray:
        self.circuit = init_circuit(self.strategy, self.config)
        self.history = []
        self.done = False
        self.last_record = None
        return self.observe()

    def observe(self) -> np.ndarray:
        state = None
        if self.circuit.gates:
            compiled = CompiledCircuit(self.circuit, self.config.measurement,
                                       threshold=self.config.herald_failure_threshold)
            try:
                state, _ = compiled.heralded(self.circuit.params)
            except FloatingPointError:
                state = None
        return encode_state(state, self.config.n_modes)

    def default_param(self, kind: GateKind) -> float:
        return self.config.default_squeeze if kind.active else self.config.default_angle

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if self.done:
            raise RuntimeError("episode finished; call reset()")
        if not 0 <= action < self.n_actions:
            raise IndexError(f"action {action} outside 0..{self.n_actions - 1}")
        kind, modes = self.actions[action]
        self.circuit = self.circuit.append(Gate(kind, modes, self.default_param(kind)))
        self.history.append(int(action))
        if len(self.history) < self.config.n_actions:
            return self.observe(), 0.0, False
        self.done = True
        best, chsh, prob = self.scorer(tuple(self.history), self.circuit)
        reward = reward_fn(chsh)
        self.last_record = EpisodeRecord(tuple(self.history), best, chsh, prob, reward)
        self.circuit = best
        return self.observe(), reward, True


def episode_rng(seed: int, episode: int) -> np.random.Generator:
    """Independent stream per (seed, episode) by counter-based seed splitting."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(episode,)))


def _sample_actions(seed: int, episode: int, n_actions: int, steps: int) -> tuple[int, ...]:
    rng = episode_rng(seed, episode)
    return tuple(int(a) for a in rng.integers(0, n_actions, size=steps))


def _score_sequence(args):
    config, actions = args
    env = BellEnv(config)
    env.reset()
    for a in actions:
        env.step(a)
    return env.last_record


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("HPL_THREADS", "1")))
    except ValueError:
        return 1


def random_search(strategy, config: EnvConfig | None = None, episodes: int = 100, seed: int = 0,
                  scorer: FinalScorer | None = None,
                  workers: int | None = None) -> list[EpisodeRecord]:
    """Uniformly random circuits, each scored by CHSH maximization; best first."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    config = config or EnvConfig()
    if int(get_strategy(strategy).id) != int(config.strategy):
        config = EnvConfig(**{**config.__dict__, "strategy": get_strategy(strategy).id})
    n_act = len(action_space(config.strategy, config.n_modes))
    seqs = [_sample_actions(seed, e, n_act, config.n_actions) for e in range(episodes)]
    scorer = scorer if scorer is not None and scorer.config == config else FinalScorer(config)
    workers = worker_count() if workers is None else workers
    todo = sorted({s for s in seqs if s not in scorer.cache})
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for seq, rec in zip(todo, pool.map(_score_sequence, [(config, s) for s in todo],
                                                chunksize=8)):
                scorer.cache[seq] = (rec.circuit, rec.chsh, rec.herald_probability)
    env = BellEnv(config, scorer)
    records = []
    for seq in seqs:
        env.reset()
        for a in seq:
            env.step(a)
        records.append(env.last_record)
    order = sorted(range(episodes), key=lambda i: (-records[i].chsh, i))
    return [records[i] for i in order]
