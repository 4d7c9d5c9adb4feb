"""Grid-war game state: units on a square map plus per-player stores."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .rules import DEFAULT_RULES, MAX_HP, NEUTRAL, P1, P2, Rules, UnitKind

Position = tuple[int, int]  # (row, col)


@dataclass(frozen=True)
class Unit:
    """One occupant of a cell.

    `carried` is the unit's held resources: cargo for a worker, remaining
    stock for a resource node. Resource nodes are always neutral.
    """

    kind: UnitKind
    hp: int
    owner: int  # NEUTRAL, P1 or P2
    carried: int = 0

    def __post_init__(self):
        if not 0 <= self.hp <= MAX_HP[self.kind]:
            raise ValueError(f"{self.kind.name} hp {self.hp} outside 0..{MAX_HP[self.kind]}")
        if self.kind == UnitKind.RESOURCE and self.owner != NEUTRAL:
            raise ValueError("resource nodes must be neutral")
        if self.kind != UnitKind.RESOURCE and self.owner not in (P1, P2):
            raise ValueError(f"{self.kind.name} must belong to a player")
        if not 0 <= self.carried <= 25:
            raise ValueError(f"carried {self.carried} outside 0..25")


@dataclass
class GameState:
    """Sparse map of occupied cells; at most one unit per cell by construction."""

    height: int
    width: int
    units: dict[Position, Unit]
    store: dict[int, int]
    step: int = 0

    def clone(self) -> "GameState":
        return GameState(
            height=self.height,
            width=self.width,
            units=dict(self.units),  # Units are frozen; sharing them is safe
            store=dict(self.store),
            step=self.step,
        )

    def in_bounds(self, pos: Position) -> bool:
        return 0 <= pos[0] < self.height and 0 <= pos[1] < self.width

    def units_of(self, player: int) -> list[tuple[Position, Unit]]:
        """Player's units in row-major order (the canonical iteration order)."""
        return sorted(
            ((p, u) for p, u in self.units.items() if u.owner == player),
            key=lambda item: item[0],
        )

    def count_of(self, player: int) -> int:
        return sum(1 for u in self.units.values() if u.owner == player)

    def bases_of(self, player: int) -> int:
        return sum(
            1 for u in self.units.values() if u.owner == player and u.kind == UnitKind.BASE
        )


def standard_start(rules: Rules = DEFAULT_RULES, size: int = 16) -> GameState:
    """Mirror-symmetric opening: one base and worker per side, corner resources."""
    h = w = size
    units: dict[Position, Unit] = {}

    def place(pos: Position, kind: UnitKind, owner: int, carried: int = 0):
        units[pos] = Unit(kind=kind, hp=MAX_HP[kind], owner=owner, carried=carried)

    def mirror(pos: Position) -> Position:
        return (h - 1 - pos[0], w - 1 - pos[1])

    for pos in ((0, 0), (0, 1)):
        place(pos, UnitKind.RESOURCE, NEUTRAL, carried=rules.resource_stock)
        place(mirror(pos), UnitKind.RESOURCE, NEUTRAL, carried=rules.resource_stock)
    place((2, 2), UnitKind.BASE, P1)
    place(mirror((2, 2)), UnitKind.BASE, P2)
    place((3, 3), UnitKind.WORKER, P1)
    place(mirror((3, 3)), UnitKind.WORKER, P2)

    return GameState(
        height=h,
        width=w,
        units=units,
        store={P1: rules.starting_store, P2: rules.starting_store},
    )


def with_unit(state: GameState, pos: Position, unit: Unit) -> GameState:
    """Copy of `state` with `unit` placed at `pos` (test/setup helper)."""
    s = state.clone()
    s.units[pos] = unit
    return s


def empty_state(size: int = 16, store: int = 0) -> GameState:
    return GameState(height=size, width=size, units={}, store={P1: store, P2: store})


def manhattan(a: Position, b: Position) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])
