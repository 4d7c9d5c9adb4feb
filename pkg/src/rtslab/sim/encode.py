"""Feature-plane encoding of game states.

A state maps to 5 planes of H x W values:

    plane 0  unit type        raw 0..7   normalized /7
    plane 1  health           raw 0..10  normalized /10
    plane 2  faction          raw 0..2   normalized /2
    plane 3  neutral resources raw 0..25 normalized /25
             (node stock, and cargo in worker transport counts as neutral)
    plane 4  faction resources raw 0..25 normalized /25
             (owner's accumulated store, painted on every owned cell)

Empty cells are 0 in every plane. Planes hold one scalar per cell rather
than per-value one-hot layers: the model's feature attention needs exactly
C=5 channel groups, so the compact integer encoding is the one used
throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rules import NEUTRAL, P1, P2, UnitKind
from .state import GameState, Unit

PLANE_TYPE = 0
PLANE_HEALTH = 1
PLANE_FACTION = 2
PLANE_NEUTRAL_RES = 3
PLANE_FACTION_RES = 4
CHANNELS = 5

SCALES = np.array([7.0, 10.0, 2.0, 25.0, 25.0]).reshape(CHANNELS, 1, 1)


@dataclass(frozen=True)
class StateTensor:
    """Normalized model-input frame; all values in [0, 1]."""

    planes: np.ndarray  # (5, H, W) float64

    def __post_init__(self):
        if self.planes.shape[0] != CHANNELS:
            raise ValueError(f"expected {CHANNELS} planes, got {self.planes.shape}")


def raw_planes(state: GameState) -> np.ndarray:
    """Integer-valued planes, the serialization form of a frame."""
    planes = np.zeros((CHANNELS, state.height, state.width), dtype=np.int64)
    for (r, c), u in state.units.items():
        planes[PLANE_TYPE, r, c] = int(u.kind)
        planes[PLANE_HEALTH, r, c] = u.hp
        planes[PLANE_FACTION, r, c] = u.owner
        if u.kind in (UnitKind.RESOURCE, UnitKind.WORKER):
            planes[PLANE_NEUTRAL_RES, r, c] = u.carried
        if u.owner in (P1, P2):
            planes[PLANE_FACTION_RES, r, c] = state.store[u.owner]
    return planes


def normalize_planes(raw: np.ndarray) -> np.ndarray:
    return raw.astype(np.float64) / SCALES


def encode_state(state: GameState) -> StateTensor:
    return StateTensor(planes=normalize_planes(raw_planes(state)))


def decode_planes(raw: np.ndarray) -> GameState:
    """Rebuild a GameState from integer planes.

    Exact inverse for kind/hp/owner/carried of every occupied cell. Player
    stores are recovered from any owned cell (0 if a player has no units);
    the step counter is not part of the encoding and comes back as 0.
    """
    _, h, w = raw.shape
    units: dict[tuple[int, int], Unit] = {}
    store = {P1: 0, P2: 0}
    for r in range(h):
        for c in range(w):
            kind_val = int(raw[PLANE_TYPE, r, c])
            if kind_val == 0:
                continue
            kind = UnitKind(kind_val)
            owner = int(raw[PLANE_FACTION, r, c])
            carried = 0
            if kind in (UnitKind.RESOURCE, UnitKind.WORKER):
                carried = int(raw[PLANE_NEUTRAL_RES, r, c])
            units[(r, c)] = Unit(
                kind=kind,
                hp=int(raw[PLANE_HEALTH, r, c]),
                owner=owner if kind != UnitKind.RESOURCE else NEUTRAL,
                carried=carried,
            )
            if owner in (P1, P2):
                store[owner] = int(raw[PLANE_FACTION_RES, r, c])
    return GameState(height=h, width=w, units=units, store=store, step=0)


def decode_state(tensor: StateTensor) -> GameState:
    """Inverse of encode_state, up to the integer quantization of the planes."""
    raw = np.rint(tensor.planes * SCALES).astype(np.int64)
    return decode_planes(raw)
