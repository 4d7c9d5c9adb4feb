"""Scripted strategies.

All decisions are deterministic given (state, rng stream): units are
scanned row-major, targets break ties by (distance, row, col), and the only
randomness comes from the per-player SplitMix64 stream handed to plan().
Strategy objects carry no mutable state, so one instance can serve any
number of concurrent matches.
"""

from __future__ import annotations

from ..rng import SplitMix64
from .engine import Action
from .rules import (
    COMBAT_KINDS,
    DEFAULT_RULES,
    Rules,
    TRAINABLE_AT_BARRACKS,
    UnitKind,
)
from .state import GameState, Position, Unit, manhattan

# canonical neighbor order: up, left, right, down
_DIRS = ((-1, 0), (0, -1), (0, 1), (1, 0))


def _neighbors(state: GameState, pos: Position) -> list[Position]:
    out = []
    for dr, dc in _DIRS:
        q = (pos[0] + dr, pos[1] + dc)
        if state.in_bounds(q):
            out.append(q)
    return out


def _free_neighbors(state: GameState, pos: Position) -> list[Position]:
    return [q for q in _neighbors(state, pos) if q not in state.units]


def _nearest(state: GameState, pos: Position, pred) -> tuple[Position, Unit] | None:
    best = None
    best_key = None
    for q, u in state.units.items():
        if not pred(q, u):
            continue
        key = (manhattan(pos, q), q[0], q[1])
        if best_key is None or key < best_key:
            best, best_key = (q, u), key
    return best


def _step_toward(state: GameState, src: Position, dst: Position) -> Action | None:
    """Greedy move: the free neighbor closest to dst, if it improves at all."""
    options = _free_neighbors(state, src)
    if not options:
        return None
    best = min(options, key=lambda q: (manhattan(q, dst), q[0], q[1]))
    if manhattan(best, dst) >= manhattan(src, dst):
        return None
    return Action("move", src, best)


def _attack_or_advance(state: GameState, player: int, pos: Position, unit: Unit,
                       rules: Rules) -> Action | None:
    rng_range = rules.attack_range.get(unit.kind, 0)
    enemy = 3 - player
    in_range = _nearest(
        state, pos, lambda q, u: u.owner == enemy and manhattan(pos, q) <= rng_range
    )
    if in_range is not None:
        return Action("attack", pos, in_range[0])
    target = _nearest(state, pos, lambda q, u: u.owner == enemy)
    if target is None:
        return None
    return _step_toward(state, pos, target[0])


def _harvest_cycle(state: GameState, player: int, pos: Position, unit: Unit) -> Action | None:
    if unit.carried > 0:
        base = _nearest(
            state, pos, lambda q, u: u.owner == player and u.kind == UnitKind.BASE
        )
        if base is None:
            return None
        if manhattan(pos, base[0]) == 1:
            return Action("deposit", pos, base[0])
        return _step_toward(state, pos, base[0])
    node = _nearest(
        state, pos, lambda q, u: u.kind == UnitKind.RESOURCE and u.carried > 0
    )
    if node is None:
        return None
    if manhattan(pos, node[0]) == 1:
        return Action("harvest", pos, node[0])
    return _step_toward(state, pos, node[0])


def _train_action(state: GameState, pos: Position, produce: UnitKind) -> Action | None:
    free = _free_neighbors(state, pos)
    if not free:
        return None
    return Action("train", pos, free[0], produce)


def _resources_left(state: GameState) -> bool:
    return any(u.kind == UnitKind.RESOURCE and u.carried > 0 for u in state.units.values())


class Strategy:
    name = "Strategy"

    def __init__(self, rules: Rules = DEFAULT_RULES):
        self.rules = rules

    def plan(self, state: GameState, player: int, rng: SplitMix64) -> list[Action]:
        raise NotImplementedError

    def __repr__(self):
        return self.name


class PassiveLite(Strategy):
    """Does nothing; the sparring dummy."""

    name = "PassiveLite"

    def plan(self, state, player, rng):
        return []


class WorkerRushLite(Strategy):
    """Pump workers nonstop; one harvests, the rest swarm the enemy."""

    name = "WorkerRushLite"

    def plan(self, state, player, rng):
        acts: list[Action] = []
        workers = [
            (p, u) for p, u in state.units_of(player) if u.kind == UnitKind.WORKER
        ]
        harvester: Position | None = None
        if workers and _resources_left(state):
            harvester = min(
                workers,
                key=lambda item: (
                    _nearest_dist(state, item[0], UnitKind.RESOURCE),
                    item[0],
                ),
            )[0]
        for pos, u in state.units_of(player):
            act: Action | None = None
            if u.kind == UnitKind.BASE:
                if state.store[player] >= self.rules.cost[UnitKind.WORKER]:
                    act = _train_action(state, pos, UnitKind.WORKER)
            elif u.kind == UnitKind.WORKER:
                if pos == harvester:
                    act = _harvest_cycle(state, player, pos, u)
                if act is None:
                    act = _attack_or_advance(state, player, pos, u, self.rules)
            if act is not None:
                acts.append(act)
        return acts


def _nearest_dist(state: GameState, pos: Position, kind: UnitKind) -> int:
    found = _nearest(state, pos, lambda q, u: u.kind == kind and u.carried > 0)
    return manhattan(pos, found[0]) if found else 10**6


class _BarracksRush(Strategy):
    """Two harvesters feed a barracks that streams one combat unit type."""

    produce: UnitKind = UnitKind.LIGHT
    worker_target = 2

    def plan(self, state, player, rng):
        acts: list[Action] = []
        mine = state.units_of(player)
        workers = [(p, u) for p, u in mine if u.kind == UnitKind.WORKER]
        barracks = [(p, u) for p, u in mine if u.kind == UnitKind.BARRACKS]
        need_barracks = (
            not barracks and state.store[player] >= self.rules.cost[UnitKind.BARRACKS]
        )
        builder = workers[-1][0] if (need_barracks and workers) else None
        for pos, u in mine:
            act: Action | None = None
            if u.kind == UnitKind.BASE:
                if (
                    len(workers) < self.worker_target
                    and state.store[player] >= self.rules.cost[UnitKind.WORKER]
                ):
                    act = _train_action(state, pos, UnitKind.WORKER)
            elif u.kind == UnitKind.BARRACKS:
                if state.store[player] >= self.rules.cost[self.produce]:
                    act = _train_action(state, pos, self.produce)
            elif u.kind == UnitKind.WORKER:
                if pos == builder:
                    free = _free_neighbors(state, pos)
                    if free:
                        act = Action("build", pos, free[0], UnitKind.BARRACKS)
                if act is None:
                    act = _harvest_cycle(state, player, pos, u)
                if act is None:  # mined out: join the fight
                    act = _attack_or_advance(state, player, pos, u, self.rules)
            else:
                act = _attack_or_advance(state, player, pos, u, self.rules)
            if act is not None:
                acts.append(act)
        return acts


class LightRushLite(_BarracksRush):
    """Fast, cheap melee pressure."""

    name = "LightRushLite"
    produce = UnitKind.LIGHT


class HeavyRushLite(_BarracksRush):
    """Slow buildup into high-damage units; weak to early harassment."""

    name = "HeavyRushLite"
    produce = UnitKind.HEAVY


class RangedRushLite(_BarracksRush):
    """Stand-off attackers that strike from range 3."""

    name = "RangedRushLite"
    produce = UnitKind.RANGED


class EconomyRushLite(Strategy):
    """Maximize harvest throughput; workers only fight in self-defense."""

    name = "EconomyRushLite"
    worker_target = 5
    defense_radius = 3

    def plan(self, state, player, rng):
        acts: list[Action] = []
        enemy = 3 - player
        mine = state.units_of(player)
        workers = [(p, u) for p, u in mine if u.kind == UnitKind.WORKER]
        for pos, u in mine:
            act: Action | None = None
            if u.kind == UnitKind.BASE:
                if (
                    len(workers) < self.worker_target
                    and state.store[player] >= self.rules.cost[UnitKind.WORKER]
                ):
                    act = _train_action(state, pos, UnitKind.WORKER)
            elif u.kind == UnitKind.WORKER:
                threat = _nearest(
                    state,
                    pos,
                    lambda q, v: v.owner == enemy
                    and manhattan(pos, q) <= self.defense_radius,
                )
                if threat is not None:
                    act = _attack_or_advance(state, player, pos, u, self.rules)
                else:
                    act = _harvest_cycle(state, player, pos, u)
            if act is not None:
                acts.append(act)
        return acts


class RandomBiasedLite(Strategy):
    """Random actions with a bias toward obviously useful ones."""

    name = "RandomBiasedLite"

    def plan(self, state, player, rng):
        acts: list[Action] = []
        for pos, u in state.units_of(player):
            if u.kind in (UnitKind.BASE, UnitKind.BARRACKS):
                if rng.uniform() < 0.5:
                    choices = (
                        [UnitKind.WORKER]
                        if u.kind == UnitKind.BASE
                        else [
                            k
                            for k in TRAINABLE_AT_BARRACKS
                            if state.store[player] >= self.rules.cost[k]
                        ]
                    )
                    if choices and state.store[player] >= min(
                        self.rules.cost[k] for k in choices
                    ):
                        act = _train_action(state, pos, rng.choice(choices))
                        if act is not None:
                            acts.append(act)
                continue
            weighted: list[tuple[Action, int]] = []
            attack = _attack_or_advance(state, player, pos, u, self.rules)
            if attack is not None and attack.kind == "attack":
                weighted.append((attack, 5))
            if u.kind == UnitKind.WORKER:
                cycle = _harvest_cycle(state, player, pos, u)
                if cycle is not None:
                    weighted.append((cycle, 3))
            free = _free_neighbors(state, pos)
            if free:
                weighted.append((Action("move", pos, rng.choice(free)), 2))
            weighted.append((None, 1))  # type: ignore[arg-type]
            total = sum(w for _, w in weighted)
            pick = rng.randrange(total)
            for option, w in weighted:
                if pick < w:
                    if option is not None:
                        acts.append(option)
                    break
                pick -= w
        return acts


REGISTRY: dict[str, type[Strategy]] = {
    cls.name: cls
    for cls in (
        PassiveLite,
        RandomBiasedLite,
        WorkerRushLite,
        LightRushLite,
        HeavyRushLite,
        RangedRushLite,
        EconomyRushLite,
    )
}

DEFAULT_ROSTER = tuple(REGISTRY)


def make_strategy(name: str, rules: Rules = DEFAULT_RULES) -> Strategy:
    if name not in REGISTRY:
        known = ", ".join(sorted(REGISTRY))
        raise ValueError(f"unknown strategy {name!r}; registered: {known}")
    return REGISTRY[name](rules)
