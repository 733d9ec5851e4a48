"""Lowest eigenpairs of sector Hamiltonians, with convergence diagnostics.

Small problems (dimension <= 4096) go through a dense Hermitian
eigendecomposition.  Larger ones use Lanczos with full
reorthogonalization against all stored basis vectors; desk-scale
dimensions afford the memory, and keeping the basis orthogonal removes
ghost copies and lets the iteration genuinely resolve the near
degenerate multiplets that appear deep in the ordered phases (the
residual-based stopping rule refuses to stop on an unresolved
cluster).  The start vector comes from a seeded linear congruential
stream so runs are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np
from scipy.linalg import eigh_tridiagonal

from .fock import Sector, enumerate_sector
from .hamiltonian import ModelParams, SparseHamiltonian, build_real_hamiltonian

DENSE_LIMIT = 4096
DEGENERACY_GAP = 1e-8
_LANCZOS_MEMORY_BUDGET = 3_000_000_000  # bytes of stored basis vectors


class ConvergenceError(RuntimeError):
    """Lanczos failed to converge; carries the best estimate found."""

    def __init__(self, message: str, best_energy: float, residual: float, iterations: int):
        super().__init__(message)
        self.best_energy = best_energy
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class GroundStateResult:
    """Lowest eigenvalues and the ground eigenvector of one sector."""

    energies: np.ndarray  # ascending, length n_low
    amplitudes: np.ndarray  # eigenvector of energies[0], unit norm
    residual: float
    gap: float
    degenerate: bool
    method: str
    iterations: int

    @property
    def energy(self) -> float:
        return float(self.energies[0])


def _result(tracked, n_low, vector, residual, method, iterations) -> GroundStateResult:
    tracked = np.asarray(tracked, dtype=np.float64)
    gap = float(tracked[1] - tracked[0]) if tracked.size > 1 else np.inf
    return GroundStateResult(
        energies=tracked[: max(n_low, 1)],
        amplitudes=vector,
        residual=float(residual),
        gap=gap,
        degenerate=bool(gap < DEGENERACY_GAP),
        method=method,
        iterations=iterations,
    )


def dense_ground(H: SparseHamiltonian, n_low: int = 1) -> GroundStateResult:
    """Full Hermitian eigendecomposition; lowest n_low eigenpairs."""
    dim = H.dimension
    if dim > DENSE_LIMIT:
        raise ValueError(f"dimension {dim} exceeds dense solver limit {DENSE_LIMIT}")
    w, v = np.linalg.eigh(H.toarray())
    n_keep = min(max(n_low, 2), dim)
    x = np.ascontiguousarray(v[:, 0])
    residual = float(np.linalg.norm(H.matvec(x) - w[0] * x))
    return _result(w[:n_keep], n_low, x, residual, "dense", iterations=1)


def _lcg_start_vector(n: int, seed: int, dtype: np.dtype) -> np.ndarray:
    """Deterministic pseudo-random start vector from a 64-bit LCG stream."""
    a = np.uint64(6364136223846793005)
    c = np.uint64(1442695040888963407)
    x0 = np.uint64(seed if seed else 0x9E3779B97F4A7C15)
    with np.errstate(over="ignore"):
        powers = np.multiply.accumulate(np.full(n, a, dtype=np.uint64))
        geom = np.cumsum(np.concatenate(([np.uint64(1)], powers[:-1])), dtype=np.uint64)
        states = powers * x0 + c * geom
    v = (states >> np.uint64(11)).astype(np.float64) * 2.0**-53 - 0.5
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        v = np.zeros(n)
        v[0] = 1.0
        nrm = 1.0
    return np.asarray(v / nrm, dtype=dtype)


class _VectorStore:
    """Stored Lanczos basis, allocated in chunks; rows are basis vectors."""

    def __init__(self, dim: int, dtype: np.dtype, chunk: int = 64):
        self.dim = dim
        self.dtype = dtype
        self.chunk = chunk
        self.blocks: list[np.ndarray] = []
        self.count = 0

    def append(self, v: np.ndarray) -> None:
        pos = self.count % self.chunk
        if pos == 0:
            self.blocks.append(np.empty((self.chunk, self.dim), dtype=self.dtype))
        self.blocks[-1][pos] = v
        self.count += 1

    def orthogonalize(self, w: np.ndarray) -> None:
        """Project out every stored vector: w <- w - sum_i q_i <q_i, w>."""
        for bi, block in enumerate(self.blocks):
            rows = self.chunk if (bi + 1) * self.chunk <= self.count else self.count - bi * self.chunk
            q = block[:rows]
            coeff = np.conj(q @ np.conj(w))
            w -= coeff @ q

    def combine(self, coeffs: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim, dtype=self.dtype)
        for bi, block in enumerate(self.blocks):
            rows = min(self.chunk, self.count - bi * self.chunk)
            sl = coeffs[bi * self.chunk : bi * self.chunk + rows]
            out += sl @ block[:rows]
        return out


def lanczos_ground(
    H: SparseHamiltonian,
    n_low: int = 1,
    tol: float = 1e-10,
    max_iter: int = 2000,
    seed: int = 1,
) -> GroundStateResult:
    """Lanczos with full reorthogonalization against all stored vectors.

    Converged when the change of the lowest Ritz value between
    successive iterations drops below ``tol`` and the residual estimate
    is below ``10 * tol``.  Raises ConvergenceError (carrying the best
    estimate and residual) if ``max_iter`` steps do not get there.
    """
    dim = H.dimension
    if dim < 2:
        raise ValueError("Lanczos needs dimension >= 2")
    dtype = np.complex128 if np.iscomplexobj(H.matrix.data) else np.float64
    budget = max(int(_LANCZOS_MEMORY_BUDGET // (dim * np.dtype(dtype).itemsize)), 16)
    n_iter = min(max_iter, dim, budget)
    n_track = min(max(n_low, 2), dim)

    store = _VectorStore(dim, dtype)
    alphas: list[float] = []
    betas: list[float] = []
    v = _lcg_start_vector(dim, seed, dtype)
    scale = 1.0
    prev_low = None
    converged = False
    exhausted = False

    w = H.matvec(v)
    for k in range(n_iter):
        a = float(np.real(np.vdot(v, w)))
        w -= a * v
        store.append(v)
        alphas.append(a)
        pre_norm = float(np.linalg.norm(w))
        store.orthogonalize(w)
        b = float(np.linalg.norm(w))
        if b < 0.7 * pre_norm:  # heavy cancellation: orthogonalize once more
            store.orthogonalize(w)
            b = float(np.linalg.norm(w))
        scale = max(scale, abs(a), b)

        ritz = _lowest_ritz_values(alphas, betas, n_track)
        low = ritz[0]
        if prev_low is not None and abs(low - prev_low) < tol:
            resid_est = _ritz_residual_estimate(alphas, betas, b)
            if resid_est < 10.0 * tol:
                converged = True
        prev_low = low
        if b <= 1e-13 * max(1.0, scale):
            exhausted = True  # Krylov space is an exact invariant subspace
        if converged or exhausted:
            break
        betas.append(b)
        v_next = w / b
        w = H.matvec(v_next)
        v = v_next

    iterations = len(alphas)
    theta, y = _ritz_pairs(alphas, betas, n_track)
    x = store.combine(y[:, 0].astype(dtype))
    nrm = np.linalg.norm(x)
    if nrm > 0:
        x = x / nrm
    residual = float(np.linalg.norm(H.matvec(x) - theta[0] * x))
    if not (converged or exhausted):
        raise ConvergenceError(
            f"Lanczos did not converge in {iterations} iterations "
            f"(best E0={theta[0]:.12g}, residual={residual:.3e})",
            best_energy=float(theta[0]),
            residual=residual,
            iterations=iterations,
        )
    return _result(theta, n_low, x, residual, "lanczos", iterations)


def _lowest_ritz_values(alphas, betas, n_track) -> np.ndarray:
    k = len(alphas)
    if k == 1:
        return np.asarray([alphas[0]])
    hi = min(n_track, k) - 1
    w = eigh_tridiagonal(
        np.asarray(alphas), np.asarray(betas[: k - 1]),
        eigvals_only=True, select="i", select_range=(0, hi),
    )
    return w


def _ritz_pairs(alphas, betas, n_track):
    k = len(alphas)
    if k == 1:
        return np.asarray([alphas[0]]), np.ones((1, 1))
    hi = min(n_track, k) - 1
    w, y = eigh_tridiagonal(
        np.asarray(alphas), np.asarray(betas[: k - 1]), select="i", select_range=(0, hi)
    )
    return w, y


def _ritz_residual_estimate(alphas, betas, b_next: float) -> float:
    _, y = _ritz_pairs(alphas, betas, 1)
    return b_next * abs(float(y[-1, 0]))


def ground_state(
    params: ModelParams,
    sector: Sector | None = None,
    space: str = "real",
    method: str = "auto",
    n_low: int = 2,
    tol: float = 1e-10,
    max_iter: int = 2000,
    seed: int = 1,
) -> GroundStateResult:
    """Build the sector basis and Hamiltonian, then solve for the ground state.

    Dispatches to the dense solver for dimensions up to 4096 and to
    Lanczos above that; n_low defaults to 2 so the gap and the
    degeneracy flag are always populated.  A degenerate result is still
    returned, only flagged (block entropies of a degenerate ground
    state are not well defined).
    """
    if sector is None:
        sector = Sector.half_filled(params.L)
    if params.L != sector.L:
        raise ValueError(f"parameter L={params.L} does not match sector L={sector.L}")
    dim = sector.dimension
    if method == "auto":
        method = "dense" if dim <= DENSE_LIMIT else "lanczos"
    if method == "dense" and dim > DENSE_LIMIT:
        raise ValueError(f"dimension {dim} exceeds dense solver limit {DENSE_LIMIT}")
    if method not in ("dense", "lanczos"):
        raise ValueError(f"unknown method {method!r}")

    basis = enumerate_sector(sector)
    if space == "real":
        H = build_real_hamiltonian(params, basis)
    elif space == "momentum":
        from .momentum import build_momentum_hamiltonian

        H = build_momentum_hamiltonian(params, basis)
    else:
        raise ValueError(f"space must be 'real' or 'momentum', got {space!r}")

    if method == "dense":
        return dense_ground(H, n_low=n_low)
    return lanczos_ground(H, n_low=n_low, tol=tol, max_iter=max_iter, seed=seed)

