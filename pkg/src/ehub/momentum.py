"""Momentum-mode occupation basis and the Hamiltonian expressed in it.

Momenta are bookkept as integers m with k = pi*m/L, folded into (-L, L]
so that momentum algebra is exact: the antiperiodic grid uses odd m,
the periodic grid even m.  Momentum modes are ordered like sites,
mode(n, s) = 2*n + s over the grid index n, so the same configuration
encoding, sector enumeration, and splitting machinery apply unchanged.

The interaction terms are generated by enumerating quartic operator
strings over grid-resolved momentum triples and applying each string to
the whole basis; the kinetic term is diagonal with dispersion
-2 t cos k.  Diagonalizing this construction directly (rather than
rotating a real-space eigenvector) gives an independent cross-check of
the real-space build through spectrum equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import cos, pi

import numpy as np
import scipy.sparse as sparse

from .fock import (
    DOWN,
    UP,
    BlockSpec,
    Sector,
    SectorBasis,
    apply_operator_string,
    enumerate_sector,
    mode_index,
)
from .hamiltonian import ModelParams, SparseHamiltonian, boundary_for


def _fold(m: int, L: int) -> int:
    """Reduce an integer momentum label to the window (-L, L]."""
    m = m % (2 * L)
    return m - 2 * L if m > L else m


@dataclass(frozen=True)
class MomentumGrid:
    """Allowed single-particle momenta of an L-site ring for a boundary rule."""

    L: int
    bc: str
    mints: tuple[int, ...]  # k_n = pi * mints[n] / L

    @property
    def momenta(self) -> tuple[float, ...]:
        return tuple(pi * m / self.L for m in self.mints)

    @property
    def nmodes(self) -> int:
        return 2 * self.L

    def mode(self, n: int, spin: int) -> int:
        return mode_index(n, spin)

    def index_of(self, m: int) -> int:
        return self.mints.index(_fold(m, self.L))

    def fold(self, m: int) -> int:
        return _fold(m, self.L)

    def dispersion(self, t: float = 1.0) -> np.ndarray:
        return np.asarray([-2.0 * t * cos(k) for k in self.momenta])


def allowed_momenta(L: int, bc: str) -> MomentumGrid:
    """Momentum grid k_n = 2*pi*(n + 1/2)/L (antiperiodic) or 2*pi*n/L (periodic)."""
    if L % 2 != 0:
        raise ValueError(f"site count must be even, got L={L}")
    if bc == "auto":
        bc = boundary_for(L)
    if bc == "antiperiodic":
        raw = [2 * n + 1 for n in range(L)]
    elif bc == "periodic":
        raw = [2 * n for n in range(L)]
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    return MomentumGrid(L=L, bc=bc, mints=tuple(_fold(m, L) for m in raw))


def total_momentum(config: int, grid: MomentumGrid) -> float:
    """Sum of occupied-mode momenta, reduced to (-pi, pi]."""
    return pi * total_momentum_int(config, grid) / grid.L


def total_momentum_int(config: int, grid: MomentumGrid) -> int:
    m_tot = 0
    for n, m in enumerate(grid.mints):
        for spin in (UP, DOWN):
            if config >> grid.mode(n, spin) & 1:
                m_tot += m
    return _fold(m_tot, grid.L)


def momentum_pair_block(grid: MomentumGrid, k: float, snap_tol: float = 1e-6) -> BlockSpec:
    """Block of the four modes {(+k, up), (-k, up), (+k, dn), (-k, dn)}.

    ``k`` is snapped to the nearest grid momentum; deviations beyond
    ``snap_tol`` are rejected.
    """
    diffs = [abs(_fold_angle(k) - kk) for kk in grid.momenta]
    n_plus = int(np.argmin(diffs))
    if diffs[n_plus] > snap_tol:
        raise ValueError(
            f"momentum {k:.10f} is {diffs[n_plus]:.3e} away from the nearest "
            f"grid point; allowed momenta are {[round(x, 10) for x in grid.momenta]}"
        )
    m_plus = grid.mints[n_plus]
    n_minus = grid.index_of(-m_plus)
    if n_minus == n_plus:
        raise ValueError(f"momentum {k} is its own reflection; the block needs +-k distinct")
    modes = sorted(
        grid.mode(n, spin) for n in (n_plus, n_minus) for spin in (UP, DOWN)
    )
    return BlockSpec(modes=tuple(modes), descriptor=f"momenta +-{abs(grid.momenta[n_plus]):.6f}")


def _fold_angle(k: float) -> float:
    out = (k + pi) % (2 * pi) - pi
    return pi if out == -pi else out


@dataclass(frozen=True, eq=False)
class MomentumTerms:
    """Coupling-independent factors: H = t*diag(kinetic) + U*onsite + V*neighbor."""

    kinetic: np.ndarray  # dispersion sums at t = 1
    onsite: sparse.csr_matrix  # coefficient of U
    neighbor: sparse.csr_matrix  # coefficient of V


def _kinetic_diagonal(basis: SectorBasis, grid: MomentumGrid) -> np.ndarray:
    eps = grid.dispersion(t=1.0)
    diag = np.zeros(len(basis), dtype=np.float64)
    for n in range(grid.L):
        for spin in (UP, DOWN):
            occ = (basis.configs >> np.int64(grid.mode(n, spin))) & np.int64(1)
            diag += eps[n] * occ
    return diag


def _accumulate(
    basis: SectorBasis,
    steps: list[tuple[int, str]],
    coeff: complex,
    rows: list[np.ndarray],
    cols: list[np.ndarray],
    vals: list[np.ndarray],
) -> None:
    tgt, src, sgn = apply_operator_string(basis, steps)
    if tgt.size == 0:
        return
    rows.append(tgt)
    cols.append(src)
    vals.append(coeff * sgn.astype(np.complex128))


def _onsite_matrix(basis: SectorBasis, grid: MomentumGrid) -> sparse.csr_matrix:
    """(1/L) sum over k, k', q of c^dag_{k+q,up} c^dag_{k'-q,dn} c_{k',dn} c_{k,up}."""
    L = grid.L
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for n2 in range(L):  # annihilated up momentum k
        m2 = grid.mints[n2]
        for n4 in range(L):  # annihilated down momentum k'
            m4 = grid.mints[n4]
            for n1 in range(L):  # created up momentum k + q
                m1 = grid.mints[n1]
                n3 = grid.index_of(m2 + m4 - m1)  # created down momentum k' - q
                steps = [
                    (grid.mode(n2, UP), "annihilate"),
                    (grid.mode(n4, DOWN), "annihilate"),
                    (grid.mode(n3, DOWN), "create"),
                    (grid.mode(n1, UP), "create"),
                ]
                _accumulate(basis, steps, 1.0 / L, rows, cols, vals)
    return _to_csr(rows, cols, vals, len(basis))


def _neighbor_matrix(basis: SectorBasis, grid: MomentumGrid) -> sparse.csr_matrix:
    """(1/L) sum_q e^{iq} rho_q rho_{-q} with rho_q = sum c^dag_{k+q} c_k."""
    L = grid.L
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    transfers = sorted({_fold(ma - mb, L) for ma in grid.mints for mb in grid.mints})
    for qm in transfers:
        phase = np.exp(1j * pi * qm / L) / L
        for na in range(L):  # rho_{-q}: c^dag_{k-q} c_k
            n_ka = grid.index_of(grid.mints[na] - qm)
            for sa in (UP, DOWN):
                for nb in range(L):  # rho_q: c^dag_{k'+q} c_{k'}
                    n_kb = grid.index_of(grid.mints[nb] + qm)
                    for sb in (UP, DOWN):
                        steps = [
                            (grid.mode(na, sa), "annihilate"),
                            (grid.mode(n_ka, sa), "create"),
                            (grid.mode(nb, sb), "annihilate"),
                            (grid.mode(n_kb, sb), "create"),
                        ]
                        _accumulate(basis, steps, phase, rows, cols, vals)
    return _to_csr(rows, cols, vals, len(basis))


def _to_csr(rows, cols, vals, dim: int) -> sparse.csr_matrix:
    if not rows:
        return sparse.csr_matrix((dim, dim), dtype=np.complex128)
    mat = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
        dtype=np.complex128,
    ).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    # drop entries that cancelled exactly so conservation laws are structural
    mat.data[np.abs(mat.data) < 1e-15] = 0.0
    mat.eliminate_zeros()
    return mat


@lru_cache(maxsize=4)
def _cached_momentum_terms(sector: Sector, bc: str) -> MomentumTerms:
    grid = allowed_momenta(sector.L, bc)
    basis = enumerate_sector(sector)
    kin = _kinetic_diagonal(basis, grid)
    kin.flags.writeable = False
    return MomentumTerms(
        kinetic=kin,
        onsite=_onsite_matrix(basis, grid),
        neighbor=_neighbor_matrix(basis, grid),
    )


def momentum_terms(basis: SectorBasis, bc: str) -> MomentumTerms:
    if bc not in ("periodic", "antiperiodic"):
        raise ValueError(f"bc must be resolved, got {bc!r}")
    return _cached_momentum_terms(basis.sector, bc)


def build_momentum_hamiltonian(
    params: ModelParams, basis: SectorBasis, grid: MomentumGrid | None = None
) -> SparseHamiltonian:
    """Assemble the Hamiltonian in the momentum occupation basis (complex Hermitian)."""
    if params.L != basis.sector.L:
        raise ValueError(
            f"parameter L={params.L} does not match basis L={basis.sector.L}"
        )
    bc = params.resolved_bc()
    if grid is not None and (grid.bc != bc or grid.L != params.L):
        raise ValueError(f"grid {grid.bc}/L={grid.L} inconsistent with params {bc}/L={params.L}")
    terms = momentum_terms(basis, bc)
    mat = (
        sparse.diags(params.t * terms.kinetic).astype(np.complex128)
        + params.U * terms.onsite
        + params.V * terms.neighbor
    ).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return SparseHamiltonian(matrix=mat)
