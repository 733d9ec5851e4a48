"""Partial trace of a pure sector state onto a mode subset, and entropies.

Because the Hamiltonian conserves charge and the z spin component, the
reduced density matrix of any mode subset never connects block
configurations of different (N, Sz).  The matrix is therefore assembled
sub-block by sub-block: amplitudes are gathered into one rectangular
tensor psi[block, environment] per (N, 2Sz) class, each class matrix is
psi psi^dag, and the von Neumann entropy is the sum over class
eigenvalues.  All splitting signs come from fock.split_configs, so a
block anchored at site 0 costs nothing while arbitrary mode subsets
(momentum pairs, shifted windows) stay exact.

A single-site block has the closed form rho_1 = diag(z, u+, u-, w) with
w = <n_up n_dn>, u+- = <n_up/dn> - w and z = 1 - u+ - u- - w, which is
the fast path used by the sweep drivers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fock import (
    DOWN,
    UP,
    BlockSpec,
    SectorBasis,
    block_quantum_numbers_arrays,
    mode_index,
    split_configs,
)

EIG_FLOOR = 1e-12
RANK_TOL = 1e-10
TRACE_TOL = 1e-6


def _amplitudes_of(state) -> np.ndarray:
    amps = getattr(state, "amplitudes", state)
    return np.asarray(amps)


@dataclass(frozen=True, eq=False)
class ReducedDensityMatrix:
    """Block-diagonal density matrix keyed by block (N, 2Sz).

    Each class is held in factored form psi[block, environment] with
    class matrix psi psi^dag; the factor keeps near-full blocks
    tractable (their class matrices would be enormous while the
    nonzero spectrum, the squared singular values of psi, stays tiny).
    """

    block: BlockSpec
    factors: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = field(repr=False)
    trace: float
    ill_defined: bool = False

    def class_keys(self) -> list[tuple[int, int]]:
        return list(self.factors.keys())

    def block_configs(self, key: tuple[int, int]) -> np.ndarray:
        return self.factors[key][0]

    def class_matrix(self, key: tuple[int, int]) -> np.ndarray:
        """Materialized Hermitian sub-block over its block configurations."""
        psi = self.factors[key][1]
        return psi @ psi.conj().T

    def eigenvalues(self) -> np.ndarray:
        """All sub-block eigenvalues, ascending (zeros included)."""
        parts = []
        for _, psi in self.factors.values():
            nb, ne = psi.shape
            if nb <= ne:
                gram = psi @ psi.conj().T
            else:
                gram = psi.conj().T @ psi
            w = np.linalg.eigvalsh(gram)
            if w.size < nb:
                parts.append(np.zeros(nb - w.size))
            parts.append(w)
        return np.sort(np.concatenate(parts))

    @property
    def total_dimension(self) -> int:
        return sum(psi.shape[0] for _, psi in self.factors.values())


def reduced_density_matrix(
    state, basis: SectorBasis, block: BlockSpec
) -> ReducedDensityMatrix:
    """Trace a pure state over everything outside ``block``.

    ``state`` is a GroundStateResult, a ReferenceState, or a bare
    amplitude vector over ``basis``.  A degenerate-flagged state still
    gets its matrix computed, but the result carries ill_defined=True.
    """
    amps = _amplitudes_of(state)
    if amps.shape != (len(basis),):
        raise ValueError(
            f"state has {amps.shape} amplitudes for a basis of size {len(basis)}"
        )
    nmodes = basis.nmodes
    bvals, evals, signs = split_configs(basis.configs, block, nmodes)
    nvals, szvals = block_quantum_numbers_arrays(bvals, block)

    signed = signs * amps
    keys = nvals * (4 * nmodes) + (szvals + 2 * nmodes)
    order = np.argsort(keys, kind="stable")
    keys_sorted = keys[order]
    boundaries = np.flatnonzero(np.diff(keys_sorted)) + 1
    starts = np.concatenate(([0], boundaries))
    stops = np.concatenate((boundaries, [keys_sorted.size]))

    factors: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
    trace = 0.0
    for s, e in zip(starts, stops):
        sel = order[s:e]
        b_sel = bvals[sel]
        e_sel = evals[sel]
        a_sel = signed[sel]
        ub, b_inv = np.unique(b_sel, return_inverse=True)
        ue, e_inv = np.unique(e_sel, return_inverse=True)
        psi = np.zeros((ub.size, ue.size), dtype=a_sel.dtype)
        psi[b_inv, e_inv] = a_sel
        key = (int(nvals[sel[0]]), int(szvals[sel[0]]))
        factors[key] = (ub, psi)
        trace += float(np.real((psi.conj() * psi).sum()))

    return ReducedDensityMatrix(
        block=block,
        factors=factors,
        trace=trace,
        ill_defined=bool(getattr(state, "degenerate", False)),
    )


def von_neumann_entropy(rdm: ReducedDensityMatrix, eig_floor: float = EIG_FLOOR) -> float:
    """Entropy -sum lambda log2 lambda over eigenvalues above ``eig_floor``, in bits."""
    if abs(rdm.trace - 1.0) > TRACE_TOL:
        raise ValueError(
            f"density matrix trace {rdm.trace:.12g} deviates from 1 beyond {TRACE_TOL}; "
            "the input state is not normalized or the split signs are inconsistent"
        )
    lam = rdm.eigenvalues()
    if lam.size and lam[0] < -1e-10:
        raise ValueError(f"density matrix has negative eigenvalue {lam[0]:.3e}")
    if abs(float(lam.sum()) - 1.0) > TRACE_TOL:
        raise ValueError("eigenvalue sum deviates from the recorded trace")
    lam = lam[lam > eig_floor]
    return max(0.0, float(-(lam * np.log2(lam)).sum()))


def rdm_rank(rdm: ReducedDensityMatrix, tol: float = RANK_TOL) -> int:
    """Number of eigenvalues above ``tol`` across all sub-blocks."""
    return int((rdm.eigenvalues() > tol).sum())


@dataclass(frozen=True)
class LocalWeights:
    """Single-site occupation weights: empty, up only, down only, double."""

    z: float
    u_plus: float
    u_minus: float
    w: float

    def __post_init__(self) -> None:
        for name, p in self.as_dict().items():
            if not -1e-10 <= p <= 1.0 + 1e-10:
                raise ValueError(f"weight {name}={p} outside [0, 1]")
        total = self.z + self.u_plus + self.u_minus + self.w
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"weights sum to {total}, expected 1")

    def as_dict(self) -> dict[str, float]:
        return {"z": self.z, "u_plus": self.u_plus, "u_minus": self.u_minus, "w": self.w}


def local_weights(state, basis: SectorBasis, site: int = 0) -> LocalWeights:
    """Diagonal expectations of the four local states at one site."""
    amps = _amplitudes_of(state)
    prob = np.abs(amps) ** 2
    up = ((basis.configs >> np.int64(mode_index(site, UP))) & np.int64(1)).astype(bool)
    dn = ((basis.configs >> np.int64(mode_index(site, DOWN))) & np.int64(1)).astype(bool)
    w = float(prob[up & dn].sum())
    n_up = float(prob[up].sum())
    n_dn = float(prob[dn].sum())
    u_plus = n_up - w
    u_minus = n_dn - w
    z = 1.0 - u_plus - u_minus - w
    return LocalWeights(z=z, u_plus=u_plus, u_minus=u_minus, w=w)


def local_entanglement(weights: LocalWeights) -> float:
    """Shannon entropy in bits of (z, u+, u-, w), with 0 log 0 = 0."""
    total = 0.0
    for p in (weights.z, weights.u_plus, weights.u_minus, weights.w):
        if p > 0.0:
            total -= p * np.log2(p)
    return float(total)


def dominant_config(state, basis: SectorBasis) -> int:
    """Configuration with the largest |amplitude|; ties resolve to lowest bits."""
    amps = np.abs(_amplitudes_of(state))
    peak = amps.max()
    candidates = np.flatnonzero(amps == peak)
    return int(basis.configs[candidates].min())
