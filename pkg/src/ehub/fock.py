"""Bit-encoded fermionic occupation configurations and sector bases.

A chain of L sites carries 2L fermionic modes, ordered site-major with
spin-up before spin-down: mode(j, s) = 2*j + s, where s=0 is up and s=1
is down.  A configuration is a single integer whose bit m is set iff
mode m is occupied.  Creation/annihilation operators acting on such a
configuration pick up the Jordan-Wigner sign
(-1)**(number of occupied modes with index below the target mode),
which is the parity cost of commuting the operator past the occupied
modes that precede it in the chosen ordering.

With this ordering a contiguous block of the first l sites occupies the
lowest 2l bits, so splitting a configuration into (block, environment)
for that block never produces a sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

import numpy as np

UP = 0
DOWN = 1

MAX_SITES = 14  # configurations must fit comfortably in an int64 word

_WORD = np.int64


def mode_index(site: int, spin: int) -> int:
    """Global mode index of (site, spin); spin 0 is up, 1 is down."""
    return 2 * site + spin


def popcount(bits: int) -> int:
    return int(bits).bit_count()


def popcount_array(bits: np.ndarray) -> np.ndarray:
    """Per-element popcount of a nonnegative integer array."""
    return np.bitwise_count(bits)


@dataclass(frozen=True)
class Sector:
    """A fixed (N_up, N_down) particle-number subspace of an L-site chain."""

    L: int
    nup: int
    ndn: int

    def __post_init__(self) -> None:
        if self.L % 2 != 0:
            raise ValueError(f"site count must be even, got L={self.L}")
        if not 2 <= self.L <= MAX_SITES:
            raise ValueError(f"L={self.L} outside supported range [2, {MAX_SITES}]")
        for name, n in (("nup", self.nup), ("ndn", self.ndn)):
            if not 0 <= n <= self.L:
                raise ValueError(f"{name}={n} outside [0, {self.L}]")

    @classmethod
    def half_filled(cls, L: int) -> "Sector":
        return cls(L, L // 2, L // 2)

    @property
    def nmodes(self) -> int:
        return 2 * self.L

    @property
    def dimension(self) -> int:
        return comb(self.L, self.nup) * comb(self.L, self.ndn)


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """All configurations of a sector, sorted by increasing bit value.

    The position of a configuration in ``configs`` is its basis index;
    lookup is by binary search, so enumeration and lookup are exact
    inverses of each other.
    """

    sector: Sector
    configs: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.configs.size

    @property
    def nmodes(self) -> int:
        return self.sector.nmodes

    def index_of(self, bits: int) -> int:
        i = int(np.searchsorted(self.configs, bits))
        if i >= self.configs.size or int(self.configs[i]) != bits:
            raise KeyError(f"configuration {bits:#x} not in sector {self.sector}")
        return i

    def index_many(self, bits: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.configs, bits)
        if not np.array_equal(self.configs[idx], bits):
            raise KeyError("configuration(s) not in sector basis")
        return idx


def _spin_words(L: int, n: int, spin: int) -> np.ndarray:
    """All placements of n electrons of one spin species, as bit words."""
    from itertools import combinations

    words = np.fromiter(
        (sum(1 << mode_index(j, spin) for j in sites) for sites in combinations(range(L), n)),
        dtype=_WORD,
        count=comb(L, n),
    )
    return words


@lru_cache(maxsize=8)
def enumerate_sector(sector: Sector) -> SectorBasis:
    """Enumerate every configuration with the sector's particle numbers.

    Returns C(L, nup) * C(L, ndn) configurations in strictly increasing
    order.  The result is cached and must be treated as immutable.
    """
    up = _spin_words(sector.L, sector.nup, UP)
    dn = _spin_words(sector.L, sector.ndn, DOWN)
    configs = np.sort((up[:, None] | dn[None, :]).ravel())
    configs.flags.writeable = False
    return SectorBasis(sector=sector, configs=configs)


def apply_mode_op(config: int, mode: int, kind: str) -> tuple[int, int] | None:
    """Apply a single creation or annihilation operator to a configuration.

    Returns (new_config, sign) with sign = (-1)**(occupied modes below
    ``mode``), or None when the operator annihilates the state (create on
    an occupied mode, annihilate on an empty one).
    """
    bit = 1 << mode
    occupied = bool(config & bit)
    if kind == "create":
        if occupied:
            return None
    elif kind == "annihilate":
        if not occupied:
            return None
    else:
        raise ValueError(f"kind must be 'create' or 'annihilate', got {kind!r}")
    sign = -1 if popcount(config & (bit - 1)) & 1 else 1
    return config ^ bit, sign


def apply_operator_string(
    basis: SectorBasis, steps: Sequence[tuple[int, str]]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Apply a product of mode operators to every basis configuration at once.

    ``steps`` lists (mode, kind) pairs in application order, i.e. the
    rightmost operator of the product comes first.  Returns
    (target_indices, source_indices, signs) for the configurations that
    survive all steps.  The string must conserve the sector's particle
    numbers per spin, otherwise the target lookup fails.
    """
    bits = basis.configs
    source = np.arange(bits.size)
    sign = np.ones(bits.size, dtype=np.int8)
    for mode, kind in steps:
        bit = _WORD(1 << mode)
        occupied = (bits & bit) != 0
        keep = occupied if kind == "annihilate" else ~occupied
        if not keep.all():
            bits = bits[keep]
            source = source[keep]
            sign = sign[keep]
        if bits.size == 0:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty, np.empty(0, dtype=np.int8)
        parity = (popcount_array(bits & (bit - _WORD(1))) & 1).astype(np.int8)
        sign = sign * (1 - 2 * parity)
        bits = bits ^ bit
    target = basis.index_many(bits)
    return target, source, sign


@dataclass(frozen=True)
class BlockSpec:
    """An ordered subset of modes over which a state is reduced.

    ``modes`` are distinct global mode indices in increasing order;
    ``descriptor`` is a human-readable tag used in outputs.
    """

    modes: tuple[int, ...]
    descriptor: str = "explicit"

    def __post_init__(self) -> None:
        if len(self.modes) == 0:
            raise ValueError("block needs at least one mode")
        if any(m < 0 for m in self.modes):
            raise ValueError("mode indices must be nonnegative")
        if list(self.modes) != sorted(set(self.modes)):
            raise ValueError("modes must be distinct and sorted ascending")

    def __len__(self) -> int:
        return len(self.modes)

    @classmethod
    def contiguous_sites(cls, l: int, start: int = 0, L: int | None = None) -> "BlockSpec":
        """Block of l successive sites starting at ``start`` (wraps if L given)."""
        if l < 1:
            raise ValueError("block needs at least one site")
        if L is None:
            sites = range(start, start + l)
        else:
            sites = ((start + i) % L for i in range(l))
        modes = tuple(sorted(mode_index(j, s) for j in sites for s in (UP, DOWN)))
        return cls(modes=modes, descriptor=f"sites[{start}:{start + l})")

    @classmethod
    def explicit(cls, modes: Iterable[int]) -> "BlockSpec":
        return cls(modes=tuple(sorted(modes)))

    def env_modes(self, nmodes: int) -> tuple[int, ...]:
        block = set(self.modes)
        if self.modes[-1] >= nmodes:
            raise ValueError(f"block mode {self.modes[-1]} exceeds mode count {nmodes}")
        return tuple(m for m in range(nmodes) if m not in block)

    def mask(self) -> int:
        word = 0
        for m in self.modes:
            word |= 1 << m
        return word

    def is_prefix(self) -> bool:
        """True when the block is exactly the lowest len(modes) modes."""
        return self.modes == tuple(range(len(self.modes)))


def split_config(config: int, block: BlockSpec, nmodes: int) -> tuple[int, int, int]:
    """Split a configuration into (block_config, env_config, sign).

    Block and environment occupations are re-indexed 0..k-1 preserving
    global order.  The sign is (-1)**inv where inv counts pairs of an
    occupied block mode preceded by an occupied environment mode; it is
    the parity of the permutation that moves all block-mode operators in
    front of the environment-mode operators.
    """
    b, e, s = split_configs(np.asarray([config], dtype=_WORD), block, nmodes)
    return int(b[0]), int(e[0]), int(s[0])


def split_configs(
    configs: np.ndarray, block: BlockSpec, nmodes: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized split of many configurations for one block."""
    env = block.env_modes(nmodes)
    bits = configs.astype(_WORD, copy=False)
    if block.is_prefix():
        nb = len(block.modes)
        bmask = _WORD((1 << nb) - 1)
        bvals = bits & bmask
        evals = bits >> _WORD(nb)
        signs = np.ones(bits.size, dtype=np.int8)
        return bvals, evals, signs
    bvals = np.zeros(bits.size, dtype=_WORD)
    for i, m in enumerate(block.modes):
        bvals |= ((bits >> _WORD(m)) & _WORD(1)) << _WORD(i)
    evals = np.zeros(bits.size, dtype=_WORD)
    for i, m in enumerate(env):
        evals |= ((bits >> _WORD(m)) & _WORD(1)) << _WORD(i)
    env_mask = _WORD(sum(1 << m for m in env))
    inversions = np.zeros(bits.size, dtype=np.int64)
    for m in block.modes:
        occupied = (bits >> _WORD(m)) & _WORD(1)
        below = popcount_array(bits & env_mask & _WORD((1 << m) - 1))
        inversions += occupied.astype(np.int64) * below
    signs = (1 - 2 * (inversions & 1)).astype(np.int8)
    return bvals, evals, signs


def block_quantum_numbers(block_config: int, block: BlockSpec) -> tuple[int, int]:
    """(particle count, twice the z-spin) of a block-local configuration."""
    n = 0
    sz2 = 0
    for i, m in enumerate(block.modes):
        if block_config >> i & 1:
            n += 1
            sz2 += 1 if m % 2 == UP else -1
    return n, sz2


def block_quantum_numbers_arrays(
    block_configs: np.ndarray, block: BlockSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (N, 2*Sz) of block-local configurations."""
    n = np.zeros(block_configs.size, dtype=np.int64)
    sz2 = np.zeros(block_configs.size, dtype=np.int64)
    for i, m in enumerate(block.modes):
        occ = (block_configs >> _WORD(i)) & _WORD(1)
        n += occ
        sz2 += occ if m % 2 == UP else -occ
    return n, sz2
