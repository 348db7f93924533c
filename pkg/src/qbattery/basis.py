"""State spaces for the lattice and collective cavity-QED battery models.

Two basis constructions are provided:

* a fixed-excitation sector for a chain of cavities, each holding one
  two-level system, where a basis state records the photon occupation of
  every cavity together with every two-level occupation; and
* a photon-number-truncated collective basis ``(n, q)`` for N identical
  two-level systems coupled to a single mode, where ``n`` counts photons
  and ``q`` counts systems left in their ground state.

Both enumerations are deterministic: building the same basis twice yields
states in the same order, so matrix and vector indices are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "JchState",
    "DickeState",
    "BasisIndex",
    "CapacityError",
    "DEFAULT_MAX_DIM",
    "total_excitations",
    "jch_sector_dim",
    "build_jch_sector",
    "dicke_dim",
    "build_dicke_basis",
]

# Guard against accidentally enumerating sectors far beyond what a dense or
# even sparse treatment can handle.  Generous on purpose; memory pressure is
# handled separately by the engine dispatch.
DEFAULT_MAX_DIM = 200_000


class CapacityError(Exception):
    """Requested basis exceeds the configured state-count cap."""


@dataclass(frozen=True)
class JchState:
    """One basis state of the cavity chain: per-cavity photons and two-level occupations."""

    photons: tuple[int, ...]
    spins: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.photons) != len(self.spins):
            raise ValueError("photons and spins must have one entry per cavity")


@dataclass(frozen=True)
class DickeState:
    """Collective basis state: ``n`` photons, ``q`` two-level systems in the ground state."""

    n: int
    q: int


@dataclass(frozen=True)
class BasisIndex:
    """Ordered basis with a reverse lookup from state to row/column index."""

    states: tuple
    index_of: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, state) -> int:
        try:
            return self.index_of[state]
        except KeyError:
            raise KeyError(f"state {state} is not in this basis") from None


def total_excitations(state: JchState) -> int:
    """Conserved excitation number: photons plus excited two-level systems."""
    return sum(state.photons) + sum(state.spins)


def jch_sector_dim(n_cavities: int, m: int) -> int:
    """Closed-form sector size: sum over k excited spins of C(N,k) photon placements.

    With M = N*m total excitations, k of them stored in two-level systems
    leaves M - k photons distributed over N cavities (stars and bars).
    """
    total = n_cavities * m
    return sum(
        math.comb(n_cavities, k)
        * math.comb(total - k + n_cavities - 1, n_cavities - 1)
        for k in range(min(n_cavities, total) + 1)
    )


def _compositions(total: int, parts: int):
    """Yield tuples of ``parts`` nonnegative ints summing to ``total``, ascending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def build_jch_sector(n_cavities: int, m: int, max_dim: int = DEFAULT_MAX_DIM) -> BasisIndex:
    """Enumerate the excitation sector reached by quenching m photons into each cavity.

    The sector holds every configuration with ``sum(photons) + sum(spins)
    == n_cavities * m``.  States are ordered by the spin pattern read as a
    little-endian bit integer (cavity 0 is the least significant bit), then
    by the photon tuple in lexicographic order.
    """
    if n_cavities < 1:
        raise ValueError(f"need at least one cavity, got {n_cavities}")
    if m < 1:
        raise ValueError(f"photons per cavity must be positive, got {m}")
    dim = jch_sector_dim(n_cavities, m)
    if dim > max_dim:
        raise CapacityError(
            f"sector for N={n_cavities}, m={m} holds {dim} states, over the cap of {max_dim}"
        )
    total = n_cavities * m
    states = []
    for spin_bits in range(2**n_cavities):
        spins = tuple((spin_bits >> c) & 1 for c in range(n_cavities))
        left = total - sum(spins)
        if left < 0:
            continue
        for photons in _compositions(left, n_cavities):
            states.append(JchState(photons=photons, spins=spins))
    if len(states) != dim:
        raise AssertionError("enumerated sector size disagrees with the closed form")
    return BasisIndex(states=tuple(states), index_of={s: i for i, s in enumerate(states)})


def dicke_dim(n_systems: int, n_max: int) -> int:
    return (n_max + 1) * (n_systems + 1)


def build_dicke_basis(n_systems: int, n_max: int, max_dim: int = DEFAULT_MAX_DIM) -> BasisIndex:
    """Enumerate collective states ``(n, q)`` with n <= n_max photons, q of N systems in the ground state.

    Ordered by ``(n, q)`` ascending, so ``index = n * (N + 1) + q``.
    """
    if n_systems < 1:
        raise ValueError(f"need at least one two-level system, got {n_systems}")
    if n_max < 0:
        raise ValueError(f"photon cutoff must be nonnegative, got {n_max}")
    dim = dicke_dim(n_systems, n_max)
    if dim > max_dim:
        raise CapacityError(
            f"basis for N={n_systems}, n_max={n_max} holds {dim} states, over the cap of {max_dim}"
        )
    states = tuple(
        DickeState(n=n, q=q) for n in range(n_max + 1) for q in range(n_systems + 1)
    )
    return BasisIndex(states=states, index_of={s: i for i, s in enumerate(states)})
