"""Drivers for grids of ground-state runs and their post-processing.

Every driver returns plain row records and leaves rendering to the CSV
and matrix writers, so outputs are deterministic: grid points are
assembled in row-major (U outer, V inner) order regardless of how many
workers computed them, per-point failures become error rows instead of
aborting the grid, and floats are printed with 12 significant digits.
"""

from __future__ import annotations

import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from math import nan

import numpy as np

from .eigen import ground_state
from .fock import BlockSpec, Sector, enumerate_sector
from .hamiltonian import ModelParams
from .momentum import allowed_momenta, momentum_pair_block, total_momentum
from .rdm import dominant_config, reduced_density_matrix, von_neumann_entropy
from .reference import classify_config

CSV_HEADER = "L,l,U,V,bc,energy,gap,entropy_bits,degenerate,dominant"


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 2000
    seed: int = 1

    def kwargs(self) -> dict:
        return {"tol": self.tol, "max_iter": self.max_iter, "seed": self.seed}


@dataclass(frozen=True)
class SweepRow:
    L: int
    l: int
    U: float
    V: float
    bc: str
    energy: float
    gap: float
    entropy_bits: float
    degenerate: bool
    dominant: str


@dataclass(frozen=True)
class SweepSpec:
    """A rectangular (U, V) grid at fixed L and a list of block sizes."""

    L: int
    block_sizes: tuple[int, ...]
    u_values: tuple[float, ...]
    v_values: tuple[float, ...]
    bc: str = "auto"
    t: float = 1.0
    solver: SolverOptions = field(default_factory=SolverOptions)
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.block_sizes:
            raise ValueError("at least one block size is required")
        for l in self.block_sizes:
            if not 1 <= l <= self.L - 1:
                raise ValueError(f"block size {l} outside [1, {self.L - 1}]")
        if self.workers < 1:
            raise ValueError("worker count must be >= 1")


def parse_range(spec: str) -> tuple[float, ...]:
    """Parse 'min:max:step' into an inclusive grid of values."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must look like min:max:step, got {spec!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if hi < lo:
        raise ValueError(f"range must have min <= max, got {spec!r}")
    count = int(round((hi - lo) / step)) + 1
    values = tuple(lo + i * step for i in range(count))
    return values


def _log(verbose: bool, message: str) -> None:
    if verbose:
        print(message, file=sys.stderr, flush=True)


def run_point(
    params: ModelParams,
    block_sizes,
    solver: SolverOptions = SolverOptions(),
    verbose: bool = False,
) -> list[SweepRow]:
    """One half-filled ground-state solve, one entropy row per block size."""
    block_sizes = sorted(set(int(l) for l in block_sizes))
    for l in block_sizes:
        if not 1 <= l <= params.L - 1:
            raise ValueError(f"block size {l} outside [1, {params.L - 1}]")
    result = ground_state(params, space="real", **solver.kwargs())
    basis = enumerate_sector(Sector.half_filled(params.L))
    dominant = classify_config(dominant_config(result, basis), params.L)
    bc = params.resolved_bc()
    rows = []
    for l in block_sizes:
        rdm = reduced_density_matrix(result, basis, BlockSpec.contiguous_sites(l))
        entropy = von_neumann_entropy(rdm)
        rows.append(
            SweepRow(
                L=params.L, l=l, U=params.U, V=params.V, bc=bc,
                energy=result.energy, gap=result.gap, entropy_bits=entropy,
                degenerate=result.degenerate, dominant=dominant,
            )
        )
    _log(
        verbose,
        f"[point] L={params.L} U={params.U:g} V={params.V:g} bc={bc} "
        f"E0={result.energy:.10g} gap={result.gap:.3e} iters={result.iterations}",
    )
    return rows


def _error_rows(params: ModelParams, block_sizes, exc: Exception) -> list[SweepRow]:
    return [
        SweepRow(
            L=params.L, l=l, U=params.U, V=params.V, bc=params.resolved_bc(),
            energy=nan, gap=nan, entropy_bits=nan, degenerate=False,
            dominant=f"error:{type(exc).__name__}",
        )
        for l in sorted(set(block_sizes))
    ]


def run_grid(spec: SweepSpec, verbose: bool = True) -> list[SweepRow]:
    """Rows for every grid point, U outer and V inner, in deterministic order."""
    points = [
        ModelParams(L=spec.L, U=u, V=v, t=spec.t, bc=spec.bc)
        for u in spec.u_values
        for v in spec.v_values
    ]

    def solve(params: ModelParams) -> list[SweepRow]:
        try:
            return run_point(params, spec.block_sizes, spec.solver, verbose=verbose)
        except Exception as exc:  # error rows keep the grid going
            _log(verbose, f"[point] U={params.U:g} V={params.V:g} failed: {exc}")
            return _error_rows(params, spec.block_sizes, exc)

    if spec.workers == 1:
        chunks = [solve(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(solve, points))
    return [row for chunk in chunks for row in chunk]


def derivative_scan(
    L: int,
    l: int,
    U: float,
    v_values,
    h: float = 0.05,
    bc: str = "auto",
    t: float = 1.0,
    solver: SolverOptions = SolverOptions(),
    entropy_fn=None,
    verbose: bool = False,
) -> list[tuple[float, float]]:
    """Central-difference d(entropy)/dV on a grid of V values.

    ``entropy_fn(V)`` may be injected (mainly for testing); the default
    evaluates the block entropy through run_point.  Evaluations are
    memoized so overlapping stencils cost one solve each.
    """
    if h <= 0:
        raise ValueError(f"stencil width must be positive, got h={h}")
    cache: dict[float, float] = {}

    def default_entropy(v: float) -> float:
        params = ModelParams(L=L, U=U, V=v, t=t, bc=bc)
        return run_point(params, [l], solver, verbose=verbose)[0].entropy_bits

    fn = entropy_fn or default_entropy

    def at(v: float) -> float:
        key = round(v, 9)
        if key not in cache:
            cache[key] = fn(v)
        return cache[key]

    return [(v, (at(v + h) - at(v - h)) / (2.0 * h)) for v in v_values]


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit entropy ~ slope * log2(l) + intercept."""

    slope: float
    intercept: float
    r_squared: float


def scaling_fit(block_sizes, entropies) -> ScalingFit:
    ls = np.asarray(block_sizes, dtype=float)
    es = np.asarray(entropies, dtype=float)
    if ls.size != es.size or ls.size < 3:
        raise ValueError("need at least 3 (block size, entropy) points")
    x = np.log2(ls)
    design = np.column_stack([x, np.ones_like(x)])
    coeff, *_ = np.linalg.lstsq(design, es, rcond=None)
    fitted = design @ coeff
    ss_res = float(((es - fitted) ** 2).sum())
    ss_tot = float(((es - es.mean()) ** 2).sum())
    if ss_tot < 1e-30:
        r2 = 1.0 if ss_res < 1e-30 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return ScalingFit(slope=float(coeff[0]), intercept=float(coeff[1]), r_squared=max(r2, 0.0))


def size_scan(
    l: int,
    L_values,
    axis: str,
    values,
    fixed: float,
    bc: str = "auto",
    t: float = 1.0,
    solver: SolverOptions = SolverOptions(),
    verbose: bool = True,
) -> list[SweepRow]:
    """Per-L curves along one coupling axis, with dominant-config labels."""
    if axis not in ("U", "V"):
        raise ValueError(f"axis must be 'U' or 'V', got {axis!r}")
    for L in L_values:
        if l >= L:
            raise ValueError(f"block size {l} must be below every system size, got L={L}")
    rows = []
    for L in L_values:
        for value in values:
            u, v = (value, fixed) if axis == "U" else (fixed, value)
            params = ModelParams(L=L, U=u, V=v, t=t, bc=bc)
            try:
                rows.extend(run_point(params, [l], solver, verbose=verbose))
            except Exception as exc:
                _log(verbose, f"[point] L={L} U={u:g} V={v:g} failed: {exc}")
                rows.extend(_error_rows(params, [l], exc))
    return rows


def momentum_scan(
    L: int,
    k: float,
    U: float,
    v_values,
    bc: str = "auto",
    t: float = 1.0,
    solver: SolverOptions = SolverOptions(),
    verbose: bool = True,
) -> list[SweepRow]:
    """Momentum-space ground state and entropy of the {+-k, both spins} block."""
    probe = ModelParams(L=L, U=U, V=0.0, t=t, bc=bc)
    grid = allowed_momenta(L, probe.resolved_bc())
    block = momentum_pair_block(grid, k)
    basis = enumerate_sector(Sector.half_filled(L))
    rows = []
    for v in v_values:
        params = replace(probe, V=v)
        result = ground_state(params, space="momentum", **solver.kwargs())
        rdm = reduced_density_matrix(result, basis, block)
        entropy = von_neumann_entropy(rdm)
        q = total_momentum(dominant_config(result, basis), grid)
        rows.append(
            SweepRow(
                L=L, l=len(block.modes), U=U, V=v, bc=grid.bc,
                energy=result.energy, gap=result.gap, entropy_bits=entropy,
                degenerate=result.degenerate, dominant=f"q={q:+.6f}",
            )
        )
        _log(
            verbose,
            f"[point] L={L} U={U:g} V={v:g} momentum block {block.descriptor} "
            f"E0={result.energy:.10g} S={entropy:.6f}",
        )
    return rows


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r.L), str(r.l), _fmt(r.U), _fmt(r.V), r.bc,
                    _fmt(r.energy), _fmt(r.gap), _fmt(r.entropy_bits),
                    "1" if r.degenerate else "0", r.dominant,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def rows_to_matrix(rows, u_values, v_values) -> str:
    """Contour-style table: first row the V grid, first column the U grid."""
    table = {(round(r.U, 9), round(r.V, 9)): r.entropy_bits for r in rows}
    lines = [",".join([""] + [_fmt(v) for v in v_values])]
    for u in u_values:
        cells = [table.get((round(u, 9), round(v, 9)), nan) for v in v_values]
        lines.append(",".join([_fmt(u)] + [_fmt(c) for c in cells]))
    return "\n".join(lines) + "\n"


def write_text(path: str, content: str) -> None:
    with open(path, "w", encoding="ascii") as handle:
        handle.write(content)


def gnuplot_script(data_path: str, fmt: str = "csv") -> str:
    """A minimal gnuplot command file for the emitted tables."""
    if fmt == "matrix":
        return (
            "set datafile separator ','\n"
            "set pm3d map\n"
            f"splot '{data_path}' matrix nonuniform notitle\n"
        )
    return (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        f"plot '{data_path}' using 4:8 with linespoints title 'entropy vs V'\n"
    )
