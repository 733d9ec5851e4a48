"""Closed-form reference states and energies used as independent checks.

The ideal ordered-phase states are translation superpositions of a
single occupation pattern:

  CDW    doublons on every other site (two distinct translations),
  PS(a)  L/2 adjacent doublons, the rest empty,
  PS(b)  L/2 - 1 adjacent doublons followed by a single up and a single down,
  PS(c)  L/2 - 1 adjacent doublons, one empty site, one detached doublon,
  PS(d)  a lone down spin, L/2 - 1 adjacent doublons, a lone up spin.

They are t = 0 constructs with uniform zero-phase amplitudes; only
which configurations appear matters for the rank and entropy checks
built on them.  The strong-coupling second-order energies and the
crossover coupling are specific to the 10-site chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import cos, log2

import numpy as np

from .fock import DOWN, UP, Sector, SectorBasis, enumerate_sector, mode_index
from .momentum import allowed_momenta

PS_LABELS = ("PS(a)", "PS(b)", "PS(c)", "PS(d)")
LABELS = PS_LABELS + ("CDW",)

EMPTY, SPIN_UP, SPIN_DOWN, DOUBLE = "0", "u", "d", "D"


def _pattern_bits(pattern: str) -> int:
    bits = 0
    for j, symbol in enumerate(pattern):
        if symbol in (SPIN_UP, DOUBLE):
            bits |= 1 << mode_index(j, UP)
        if symbol in (SPIN_DOWN, DOUBLE):
            bits |= 1 << mode_index(j, DOWN)
    return bits


def _translate(bits: int, L: int) -> int:
    mask = (1 << (2 * L)) - 1
    return ((bits << 2) | (bits >> (2 * L - 2))) & mask


def _pattern(label: str, L: int) -> str:
    half = L // 2
    if label == "CDW":
        return (DOUBLE + EMPTY) * half
    if label == "PS(a)":
        return DOUBLE * half + EMPTY * half
    if label == "PS(b)":
        return DOUBLE * (half - 1) + SPIN_UP + SPIN_DOWN + EMPTY * (half - 1)
    if label == "PS(c)":
        return DOUBLE * (half - 1) + EMPTY + DOUBLE + EMPTY * (half - 1)
    if label == "PS(d)":
        return SPIN_DOWN + DOUBLE * (half - 1) + SPIN_UP + EMPTY * (half - 1)
    raise ValueError(f"unknown reference label {label!r}; choose from {LABELS}")


def _orbit(bits: int, L: int) -> list[int]:
    seen = []
    current = bits
    for _ in range(L):
        if current not in seen:
            seen.append(current)
        current = _translate(current, L)
    return seen


@dataclass(frozen=True, eq=False)
class ReferenceState:
    """Equal-amplitude superposition of all translations of one pattern."""

    label: str
    L: int
    amplitudes: np.ndarray = field(repr=False)
    basis: SectorBasis = field(repr=False)

    @property
    def configs(self) -> np.ndarray:
        return self.basis.configs[np.flatnonzero(self.amplitudes)]


def reference_state(label: str, L: int) -> ReferenceState:
    """Build the normalized translation superposition over the half-filled basis."""
    if L % 2 != 0:
        raise ValueError(f"site count must be even, got L={L}")
    if label in PS_LABELS and L < 6:
        raise ValueError(f"{label} needs L >= 6, got L={L}")
    members = _orbit(_pattern_bits(_pattern(label, L)), L)
    basis = enumerate_sector(Sector.half_filled(L))
    amps = np.zeros(len(basis))
    amp = 1.0 / np.sqrt(len(members))
    for bits in members:
        amps[basis.index_of(bits)] = amp
    amps.flags.writeable = False
    return ReferenceState(label=label, L=L, amplitudes=amps, basis=basis)


@lru_cache(maxsize=8)
def _label_table(L: int) -> dict[int, str]:
    table: dict[int, str] = {}
    for label in LABELS:
        if label in PS_LABELS and L < 6:
            continue
        variants = [_pattern(label, L)]
        mirrored = _pattern(label, L).translate(str.maketrans({SPIN_UP: SPIN_DOWN, SPIN_DOWN: SPIN_UP}))
        if mirrored not in variants:
            variants.append(mirrored)
        for pattern in variants:
            for bits in _orbit(_pattern_bits(pattern), L):
                table.setdefault(bits, label)
    return table


def classify_config(bits: int, L: int) -> str:
    """Label a configuration as a translation (or spin mirror) of a reference pattern."""
    return _label_table(L).get(bits, "other")


def ps_rank(l: int) -> int:
    """Counting rule (l*l + l + 2) / 2 for the phase-separated reduced matrix."""
    if l < 1:
        raise ValueError(f"block size must be >= 1, got {l}")
    return (l * l + l + 2) // 2


def psd_local_entropy(L: int) -> float:
    """Single-site entropy of the ideal PS(d) superposition at finite L, in bits.

    (2/L) log2 L - (1 - 2/L) log2 (1/2 - 1/L); tends to 1 as L grows.
    """
    if L < 6 or L % 2 != 0:
        raise ValueError(f"need even L >= 6, got L={L}")
    return (2.0 / L) * log2(L) - (1.0 - 2.0 / L) * log2(0.5 - 1.0 / L)


def perturbation_energies(U: float, V: float, t: float = 1.0) -> tuple[float, float]:
    """Second-order strong-coupling energies (E_PSd, E_PSa) for the 10-site chain."""
    if V >= 0:
        raise ValueError(f"the strong-coupling formulas need V < 0, got V={V}")
    e_psd = 5.0 * U + 16.0 * V + 4.0 * t * t / V
    e_psa = 4.0 * U + 16.0 * V + 1.5 * t * t / V
    return e_psd, e_psa


def ps_crossover_U(V: float, t: float = 1.0) -> float:
    """On-site coupling where the two second-order energies cross: -2.5 t^2 / V."""
    if V >= 0:
        raise ValueError(f"the crossover formula needs V < 0, got V={V}")
    return -2.5 * t * t / V


def free_fermion_ground_energy(
    L: int, bc: str, nup: int, ndn: int, t: float = 1.0
) -> float:
    """Filled-band energy at U = V = 0: the nup (ndn) lowest values of -2t cos k.

    Raises when a filling cuts through a degenerate level, since the
    occupation is then ambiguous.
    """
    grid = allowed_momenta(L, bc)
    eps = np.sort(np.asarray([-2.0 * t * cos(k) for k in grid.momenta]))
    total = 0.0
    for n in (nup, ndn):
        if not 0 <= n <= L:
            raise ValueError(f"filling {n} outside [0, {L}]")
        if 0 < n < L and eps[n] - eps[n - 1] < 1e-9:
            raise ValueError(
                f"filling {n} splits a degenerate level at energy {eps[n]:.6f}; "
                "the noninteracting ground state is ambiguous"
            )
        total += float(eps[:n].sum())
    return total
