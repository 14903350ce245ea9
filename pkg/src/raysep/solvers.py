"""Sparse-recovery engines for angle spectra.

Three programs share one inner machine:

* ``bpdn``: minimum l1 norm of a complex angle spectrum subject to a
  residual bound on the snapshot fit.
* ``reweighted_cs``: iteratively reweighted variant; the weight of each
  grid angle is the reciprocal of its current aggregated magnitude, so
  surviving support sharpens across passes. Handles one or many snapshots.
* ``subspace_cs``: nonnegative l1 recovery of path powers from the
  row-stacked signal-subspace vector against the lifted dictionary.

The inner machine solves the penalized form by working-set cyclic
coordinate descent: coordinates enter the working set only when they
violate the stationarity conditions, every coordinate update is an exact
one-dimensional minimization (so the objective never increases and
off-support entries are exactly zero), and a full stationarity sweep
certifies the solution. The penalty level is then bisected until the data
residual lands just under the requested bound, which makes the returned
point a stationary pair for the residual-constrained program. The contract
is the achieved feasibility and stationarity tolerance, not the particular
iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arrays import AngleGrid, SteeringDictionary
from .simulate import SnapshotMatrix
from .spectral import SpectralMatrix
from .subspace import LiftedSystem, SubspaceDecomposition

__all__ = [
    "SolverConfig",
    "SparseSpectrum",
    "SolverInfeasibleError",
    "bpdn",
    "reweighted_cs",
    "subspace_cs",
    "choose_delta",
]

# Residual bounds below this fraction of the data norm are treated as the
# exact-interpolation limit.
_BOUND_FLOOR_REL = 1e-9
# Bisection drives the residual into [(1 - _BISECT_BAND) * bound, bound].
_BISECT_BAND = 0.1
_FEASIBILITY_SLACK = 1e-6
_MAX_WORKING_SET_ROUNDS = 200
_NEW_COORDS_PER_ROUND = 25
_SWEEPS_PER_ROUND = 25
_TINY = np.finfo(float).tiny


class SolverInfeasibleError(RuntimeError):
    """Residual bound below the minimum achievable residual.

    Attributes:
        min_residual: Smallest residual the solver could reach.
    """

    def __init__(self, message: str, min_residual: float):
        super().__init__(message)
        self.min_residual = min_residual


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances shared by all solvers.

    Args:
        residual_bound: Upper bound on the data-fit residual norm (same
            units as the data). ``None`` or 0 selects the exact-fit limit,
            floored at 1e-9 of the data norm.
        reweight_xi: Stabilizer added to magnitudes in the reweighting
            update; ``None`` picks 1e-3 of the first pass's peak magnitude.
        max_reweight_iters: Cap on reweighting passes.
        inner_tol: Stationarity tolerance of the inner solver, relative to
            the active penalty level; also the between-pass change
            tolerance for reweighting.
        inner_max_iters: Coordinate-sweep budget per inner solve.
    """

    residual_bound: float | None = None
    reweight_xi: float | None = None
    max_reweight_iters: int = 10
    inner_tol: float = 1e-6
    inner_max_iters: int = 2000

    def __post_init__(self):
        if self.residual_bound is not None and self.residual_bound < 0:
            raise ValueError("residual_bound must be nonnegative")
        if self.reweight_xi is not None and self.reweight_xi <= 0:
            raise ValueError("reweight_xi must be positive")
        if self.inner_tol <= 0 or self.inner_max_iters < 1 or self.max_reweight_iters < 1:
            raise ValueError("tolerances and iteration caps must be positive")


@dataclass(frozen=True)
class SparseSpectrum:
    """Recovered angle spectrum plus solver diagnostics."""

    grid: AngleGrid
    values: np.ndarray
    method: str
    iterations: int
    residual: float
    residual_bound: float
    objective: float
    converged: bool
    # Objective trajectory of the final inner run; non-increasing by
    # construction of the inner solver.
    objective_history: np.ndarray = field(repr=False, default=None)

    def diagnostics(self) -> dict:
        """JSON-ready summary of the solve."""
        return {
            "method": self.method,
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "residual_bound": float(self.residual_bound),
            "objective": float(self.objective),
            "converged": bool(self.converged),
        }


@dataclass
class _InnerResult:
    x: np.ndarray
    residual: float
    kkt: float
    iterations: int
    objective_history: list


def _soft_threshold(v: np.ndarray, threshold: float) -> np.ndarray:
    mag = np.abs(v)
    keep = np.maximum(mag - threshold, 0.0)
    return v * (keep / np.maximum(mag, _TINY))


def _solve_psd(h: np.ndarray, c: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(h, c)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(h, c, rcond=None)[0]


def _polish_column_complex(
    a_sub: np.ndarray, b_col: np.ndarray, lam_sub: np.ndarray, x_col: np.ndarray
) -> np.ndarray | None:
    """Active-set solve of the support-restricted problem for one snapshot.

    Alternates a dense solve of a_subᴴ a_sub z = a_subᴴ b - lam * phase(x)
    (phases re-linearized each pass) with single-entry prunes of
    coefficients pushed through zero and re-admission of dropped entries
    whose stationarity is violated. Near-parallel active columns are
    resolved by the dense solve, which coordinate updates cannot do in
    reasonable time.
    """
    size = x_col.size
    mag = np.abs(x_col)
    alive = mag > 0
    if not np.any(alive):
        return None
    if int(np.count_nonzero(alive)) == 1:
        return None  # a lone coordinate is already solved exactly by its update
    phases = np.zeros(size, dtype=complex)
    phases[alive] = x_col[alive] / mag[alive]
    out = np.zeros(size, dtype=complex)
    for _ in range(6):
        idx = np.flatnonzero(alive)
        asub = a_sub[:, idx]
        h = asub.conj().T @ asub
        c = asub.conj().T @ b_col - lam_sub[idx] * phases[idx]
        z = _solve_psd(h, c)
        while True:
            crossing = (z.conj() * phases[idx]).real
            if not np.any(crossing <= 0):
                break
            alive[idx[int(np.argmin(crossing))]] = False
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                return np.zeros(size, dtype=complex)
            asub = a_sub[:, idx]
            h = asub.conj().T @ asub
            c = asub.conj().T @ b_col - lam_sub[idx] * phases[idx]
            z = _solve_psd(h, c)
        new_phases = z / np.maximum(np.abs(z), _TINY)
        moved = float(np.max(np.abs(new_phases - phases[idx])))
        phases[idx] = new_phases
        out[:] = 0
        out[idx] = z
        # re-admit any dropped entry whose stationarity is violated
        corr = a_sub.conj().T @ (b_col - asub @ z)
        dropped = ~alive
        if np.any(dropped):
            viol = np.abs(corr[dropped]) - lam_sub[dropped]
            worst_local = int(np.argmax(viol))
            if viol[worst_local] > 1e-7 * max(float(np.max(lam_sub)), _TINY):
                worst = np.flatnonzero(dropped)[worst_local]
                alive[worst] = True
                phases[worst] = corr[worst] / max(abs(corr[worst]), _TINY)
                continue
        if moved < 1e-13:
            break
    return out


def _polish_nonneg(
    a_sub: np.ndarray, b: np.ndarray, lam: float, x_sub: np.ndarray
) -> np.ndarray | None:
    """Active-set solve of the support-restricted nonnegative lasso."""
    size = x_sub.size
    alive = x_sub > 0
    if not np.any(alive):
        return None
    out = np.zeros(size)
    for _ in range(2 * size + 10):
        idx = np.flatnonzero(alive)
        asub = a_sub[:, idx]
        h = (asub.conj().T @ asub).real
        c = (asub.conj().T @ b).real - lam
        z = _solve_psd(h, c)
        while np.any(z <= 0):
            alive[idx[int(np.argmin(z))]] = False
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                return np.zeros(size)
            asub = a_sub[:, idx]
            h = (asub.conj().T @ asub).real
            c = (asub.conj().T @ b).real - lam
            z = _solve_psd(h, c)
        out[:] = 0
        out[idx] = z
        dropped = ~alive
        if np.any(dropped):
            corr = (a_sub.conj().T @ (b - asub @ z)).real
            viol = corr[dropped] - lam
            worst_local = int(np.argmax(viol))
            if viol[worst_local] > 1e-7 * max(lam, _TINY):
                alive[np.flatnonzero(dropped)[worst_local]] = True
                continue
        break
    return out


def _cd_lasso_complex(
    a: np.ndarray,
    b: np.ndarray,
    lam_rows: np.ndarray,
    x0: np.ndarray,
    tol: float,
    max_sweeps: int,
    col_norms_sq: np.ndarray,
) -> _InnerResult:
    """Working-set coordinate descent for the complex weighted lasso.

    Minimizes 0.5 * ||a x - b||_F^2 + sum_q lam_rows[q] * sum_l |x[q, l]|.
    Stationarity is measured relative to each coordinate's own threshold.
    """
    x = x0.copy()
    r = b - a @ x

    def objective():
        return 0.5 * float(np.linalg.norm(r) ** 2) + float(
            np.sum(lam_rows * np.sum(np.abs(x), axis=1))
        )

    history = [objective()]
    active = set(int(q) for q in np.flatnonzero(np.any(x != 0, axis=1)))
    tiny = _TINY
    sweeps = 0
    kkt = np.inf
    for _ in range(_MAX_WORKING_SET_ROUNDS):
        # Exact solve on the working set.
        order = sorted(active)
        for _ in range(max(1, min(_SWEEPS_PER_ROUND, max_sweeps - sweeps))):
            sweeps += 1
            max_step = 0.0
            for q in order:
                aq = a[:, q]
                u = aq.conj() @ r + col_norms_sq[q] * x[q]
                xq_new = _soft_threshold(u, lam_rows[q]) / col_norms_sq[q]
                delta = xq_new - x[q]
                step = float(np.max(np.abs(delta)))
                if step > 0.0:
                    r -= np.outer(aq, delta)
                    x[q] = xq_new
                    max_step = max(
                        max_step, step * col_norms_sq[q] / max(lam_rows[q], tiny)
                    )
            history.append(objective())
            if max_step <= 0.1 * tol or sweeps >= max_sweeps:
                break
        # Dense polish on the working set; adopt only on objective decrease.
        idx = sorted(int(q) for q in np.flatnonzero(np.any(x != 0, axis=1)))
        if idx:
            sweeps += 1
            a_sub = a[:, idx]
            x_cand = x[idx].copy()
            for col in range(b.shape[1]):
                polished = _polish_column_complex(
                    a_sub, b[:, col], lam_rows[idx], x_cand[:, col]
                )
                if polished is not None:
                    x_cand[:, col] = polished
            r_cand = b - a_sub @ x_cand
            f_cand = 0.5 * float(np.linalg.norm(r_cand) ** 2) + float(
                np.sum(lam_rows[idx] * np.sum(np.abs(x_cand), axis=1))
            )
            if f_cand <= history[-1]:
                x[:] = 0
                x[idx] = x_cand
                r = r_cand
                history.append(f_cand)
        active = set(int(q) for q in np.flatnonzero(np.any(x != 0, axis=1)))
        # Full stationarity pass; admit violating coordinates.
        corr = a.conj().T @ r
        viol = np.maximum(np.abs(corr) - lam_rows[:, None], 0.0)
        nz = np.abs(x) > 0
        line = corr - lam_rows[:, None] * _phases(x)
        viol[nz] = np.abs(line[nz])
        rel = viol / np.maximum(lam_rows[:, None], tiny)
        kkt = float(np.max(rel))
        if kkt <= tol or sweeps >= max_sweeps:
            break
        row_rel = np.max(rel, axis=1)
        newcomers = np.flatnonzero(row_rel > tol)
        newcomers = newcomers[np.argsort(-row_rel[newcomers], kind="stable")]
        before = len(active)
        active.update(int(q) for q in newcomers[:_NEW_COORDS_PER_ROUND])
        if len(active) == before:
            break
    return _InnerResult(x, float(np.linalg.norm(r)), kkt, sweeps, history)


def _phases(v: np.ndarray) -> np.ndarray:
    return v / np.maximum(np.abs(v), _TINY)


def _cd_lasso_nonneg(
    a: np.ndarray,
    b: np.ndarray,
    lam: float,
    x0: np.ndarray,
    tol: float,
    max_sweeps: int,
    col_norms_sq: np.ndarray,
    nuisance_mask: np.ndarray | None = None,
    nuisance_radius: float = 0.0,
) -> _InnerResult:
    """Working-set coordinate descent for the nonnegative lasso.

    Minimizes 0.5 * ||a x (+ d) - b||^2 + lam * sum(x) over real x >= 0.
    When ``nuisance_mask`` is given, a complex nuisance vector supported on
    the masked entries and confined to an l2 ball of radius
    ``nuisance_radius`` is re-fit exactly between coordinate sweeps; the
    reported residual includes the nuisance fit.
    """
    x = x0.copy()
    d = np.zeros_like(b)
    r = b - a @ x

    def refit_nuisance():
        nonlocal d, r
        free = r + d
        d_new = np.where(nuisance_mask, free, 0.0)
        norm = float(np.linalg.norm(d_new))
        if norm > nuisance_radius:
            d_new *= nuisance_radius / norm
        r = free - d_new
        d = d_new

    def objective():
        return 0.5 * float(np.linalg.norm(r) ** 2) + lam * float(np.sum(x))

    if nuisance_mask is not None:
        refit_nuisance()
    history = [objective()]
    active = set(int(q) for q in np.flatnonzero(x > 0))
    tiny = _TINY
    sweeps = 0
    kkt = np.inf
    for _ in range(_MAX_WORKING_SET_ROUNDS):
        order = sorted(active)
        for _ in range(max(1, min(_SWEEPS_PER_ROUND, max_sweeps - sweeps))):
            sweeps += 1
            max_step = 0.0
            for q in order:
                aq = a[:, q]
                u = (aq.conj() @ r).real + col_norms_sq[q] * x[q]
                xq_new = max(u - lam, 0.0) / col_norms_sq[q]
                delta = xq_new - x[q]
                if delta != 0.0:
                    r -= aq * delta
                    x[q] = xq_new
                    max_step = max(
                        max_step, abs(delta) * col_norms_sq[q] / max(lam, tiny)
                    )
            if nuisance_mask is not None:
                refit_nuisance()
            history.append(objective())
            if max_step <= 0.1 * tol or sweeps >= max_sweeps:
                break
        # Dense polish on the working set; adopt only on objective decrease.
        idx = sorted(int(q) for q in np.flatnonzero(x > 0))
        if idx:
            sweeps += 1
            a_sub = a[:, idx]
            polished = _polish_nonneg(a_sub, b - d, lam, x[idx])
            if polished is not None:
                r_cand = b - d - a_sub @ polished
                f_cand = 0.5 * float(np.linalg.norm(r_cand) ** 2) + lam * float(
                    np.sum(polished)
                )
                if f_cand <= history[-1]:
                    x[:] = 0
                    x[idx] = polished
                    r = r_cand
                    if nuisance_mask is not None:
                        refit_nuisance()
                    history.append(objective())
        active = set(int(q) for q in np.flatnonzero(x > 0))
        corr = (a.conj().T @ r).real
        grad_plus = lam - corr  # gradient of the penalized objective
        rel = np.where(x > 0, np.abs(grad_plus), np.maximum(-grad_plus, 0.0)) / max(
            lam, tiny
        )
        kkt = float(np.max(rel))
        if kkt <= tol or sweeps >= max_sweeps:
            break
        newcomers = np.flatnonzero(rel > tol)
        newcomers = newcomers[np.argsort(-rel[newcomers], kind="stable")]
        before = len(active)
        active.update(int(q) for q in newcomers[:_NEW_COORDS_PER_ROUND])
        if len(active) == before:
            break
    return _InnerResult(x, float(np.linalg.norm(r)), kkt, sweeps, history)


def _effective_bound(bound: float | None, data_norm: float) -> float:
    if bound is None:
        bound = 0.0
    return max(float(bound), _BOUND_FLOOR_REL * data_norm)


def _bisect_penalty(solve_at, lam_max: float, bound: float, zero_x: np.ndarray):
    """Walk the penalty down to feasibility, then bisect toward the bound.

    ``solve_at(lam, x0)`` returns an _InnerResult. Returns the feasible
    result with the largest penalty whose residual is at most ``bound``,
    aiming for a residual within (1 - _BISECT_BAND) of it. The returned
    result keeps the objective history of its own (final) inner run.

    Raises:
        SolverInfeasibleError: If no penalty reaches the bound.
    """
    total_iters = 0
    lam_hi = lam_max
    lam = lam_max
    x_warm = zero_x
    feasible = None
    res = None
    for _ in range(18):
        lam /= 10.0
        res = solve_at(lam, x_warm)
        total_iters += res.iterations
        x_warm = res.x
        if res.residual <= bound:
            feasible = (lam, res)
            break
        lam_hi = lam
    if feasible is None:
        raise SolverInfeasibleError(
            f"residual bound {bound:.6e} unreachable; minimum achieved "
            f"residual {res.residual:.6e}",
            min_residual=res.residual,
        )

    lam_lo, best = feasible
    for _ in range(40):
        if best.residual >= (1.0 - _BISECT_BAND) * bound or lam_hi / lam_lo < 1.05:
            break
        lam_mid = np.sqrt(lam_lo * lam_hi)
        res = solve_at(lam_mid, best.x)
        total_iters += res.iterations
        if res.residual <= bound:
            lam_lo, best = lam_mid, res
        else:
            lam_hi = lam_mid
    return best, total_iters, best.objective_history


def _spectrum_from_result(
    grid, values, method, result, total_iters, bound, history, l1_objective, tol
) -> SparseSpectrum:
    feasible = result.residual <= bound * (1.0 + _FEASIBILITY_SLACK)
    stationary = result.kkt <= tol
    return SparseSpectrum(
        grid=grid,
        values=values,
        method=method,
        iterations=total_iters,
        residual=result.residual,
        residual_bound=bound,
        objective=l1_objective,
        converged=bool(feasible and stationary),
        objective_history=np.asarray(history),
    )


def _snapshot_array(snapshots) -> np.ndarray:
    if isinstance(snapshots, SnapshotMatrix):
        return snapshots.data
    arr = np.asarray(snapshots, dtype=complex)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("snapshots must be a vector or 2-D array")
    return arr


def _zero_spectrum(grid, method, bound, dtype=float) -> SparseSpectrum:
    return SparseSpectrum(
        grid=grid,
        values=np.zeros(len(grid), dtype=dtype),
        method=method,
        iterations=0,
        residual=0.0,
        residual_bound=bound,
        objective=0.0,
        converged=True,
        objective_history=np.zeros(1),
    )


def bpdn(
    dictionary: SteeringDictionary, snapshot, config: SolverConfig | None = None
) -> SparseSpectrum:
    """Basis-pursuit denoising: min ||s||_1 s.t. ||G s - y||_2 <= bound.

    Args:
        dictionary: Over-complete steering dictionary.
        snapshot: Complex observation vector (length num_sensors).
        config: Solver tolerances; ``residual_bound`` is the noise-norm
            bound. ``None`` or 0 requests the exact-fit limit.

    Returns:
        SparseSpectrum with complex values over the grid.
    """
    config = config or SolverConfig()
    a = dictionary.matrix
    y = _snapshot_array(snapshot)
    if y.shape[1] != 1:
        raise ValueError("bpdn takes a single snapshot; use reweighted_cs for several")
    if y.shape[0] != a.shape[0]:
        raise ValueError(
            f"snapshot length {y.shape[0]} does not match {a.shape[0]} sensors"
        )
    data_norm = float(np.linalg.norm(y))
    bound = _effective_bound(config.residual_bound, data_norm)
    grid = dictionary.grid
    if data_norm <= bound:
        return _zero_spectrum(grid, "bpdn", bound, dtype=complex)

    lam_max = float(np.max(np.abs(a.conj().T @ y)))
    norms = np.sum(np.abs(a) ** 2, axis=0)
    ones = np.ones(a.shape[1])

    def solve_at(lam, x0):
        return _cd_lasso_complex(
            a, y, lam * ones, x0, config.inner_tol, config.inner_max_iters, norms
        )

    best, iters, history = _bisect_penalty(
        solve_at, lam_max, bound, np.zeros((a.shape[1], 1), dtype=complex)
    )
    values = best.x[:, 0]
    return _spectrum_from_result(
        grid, values, "bpdn", best, iters, bound, history,
        float(np.sum(np.abs(values))), config.inner_tol,
    )


def reweighted_cs(
    dictionary: SteeringDictionary, snapshots, config: SolverConfig | None = None
) -> SparseSpectrum:
    """Iteratively reweighted l1 recovery over one or more snapshots.

    The first pass runs with unit weights. After each pass the magnitude of
    every grid angle is aggregated across snapshots (sum of absolute
    values) and the next pass weights each angle by
    ``1 / (aggregate + xi)``, so angles with persistent energy get cheap
    and the rest are driven to zero. Iteration stops when consecutive
    aggregates agree to ``inner_tol`` in max norm or after
    ``max_reweight_iters`` passes.

    Returns:
        SparseSpectrum; complex values for a single snapshot, nonnegative
        per-angle aggregates when several snapshots are supplied.
    """
    config = config or SolverConfig()
    a = dictionary.matrix
    y = _snapshot_array(snapshots)
    if y.shape[0] != a.shape[0]:
        raise ValueError(
            f"snapshot rows {y.shape[0]} do not match {a.shape[0]} sensors"
        )
    num_l = y.shape[1]
    grid = dictionary.grid
    data_norm = float(np.linalg.norm(y))
    bound = _effective_bound(config.residual_bound, data_norm)
    if data_norm <= bound:
        return _zero_spectrum(
            grid, "reweighted_cs", bound, dtype=complex if num_l == 1 else float
        )

    norms = np.sum(np.abs(a) ** 2, axis=0)
    corr0 = np.abs(a.conj().T @ y)
    weights = np.ones(a.shape[1])
    xi = config.reweight_xi
    x_warm = np.zeros((a.shape[1], num_l), dtype=complex)
    prev_agg = None
    total_iters = 0
    history: list = []
    best = None
    for _ in range(config.max_reweight_iters):
        lam_max = float(np.max(corr0 / weights[:, None]))

        def solve_at(lam, x0, w=weights):
            return _cd_lasso_complex(
                a, y, lam * w, x0, config.inner_tol, config.inner_max_iters, norms
            )

        best, iters, hist = _bisect_penalty(solve_at, lam_max, bound, x_warm)
        total_iters += iters
        history = hist
        x_warm = best.x
        agg = np.sum(np.abs(best.x), axis=1)
        if xi is None:
            peak = float(np.max(agg))
            if peak == 0.0:
                break
            xi = 1e-3 * peak
        if prev_agg is not None and float(np.max(np.abs(agg - prev_agg))) < config.inner_tol:
            break
        prev_agg = agg
        weights = 1.0 / (agg + xi)

    values = best.x[:, 0] if num_l == 1 else np.sum(np.abs(best.x), axis=1)
    objective = float(np.sum(np.abs(best.x)))
    return _spectrum_from_result(
        grid, values, "reweighted_cs", best, total_iters, bound, history, objective,
        config.inner_tol,
    )


def subspace_cs(
    lifted: LiftedSystem,
    config: SolverConfig | None = None,
    cross_term_mode: str = "fold",
    cross_term_bound: float | None = None,
) -> SparseSpectrum:
    """Nonnegative l1 recovery of path powers from the lifted system.

    Solves min ||p||_1 over p >= 0 subject to
    ``||vector - matrix @ p|| <= bound``. Peak positions of the returned
    values are the arrival-angle estimates.

    Args:
        lifted: Vectorized signal subspace and lifted dictionary.
        config: Tolerances; ``residual_bound`` is the covariance-domain
            residual allowance (see ``choose_delta``).
        cross_term_mode: ``"fold"`` absorbs path cross terms into the
            residual bound; ``"joint"`` additionally estimates a nuisance
            vector confined to unequal-sensor-pair rows with norm at most
            ``cross_term_bound``.
        cross_term_bound: Nuisance-vector norm cap for joint mode; defaults
            to half the energy of the unequal-pair rows of the data vector.

    Raises:
        SolverInfeasibleError: If the bound is below the best achievable
            residual (the error carries the achievable value).
    """
    config = config or SolverConfig()
    a = lifted.matrix
    b = lifted.vector
    grid = lifted.grid
    data_norm = float(np.linalg.norm(b))
    bound = _effective_bound(config.residual_bound, data_norm)
    if data_norm <= bound:
        return _zero_spectrum(grid, "subspace_cs", bound)
    if cross_term_mode not in ("fold", "joint"):
        raise ValueError(f"unknown cross_term_mode {cross_term_mode!r}")

    norms = np.sum(np.abs(a) ** 2, axis=0)
    corr = (a.conj().T @ b).real
    lam_max = max(float(np.max(corr)), np.finfo(float).tiny)

    mask = None
    radius = 0.0
    if cross_term_mode == "joint":
        m = int(round(np.sqrt(a.shape[0])))
        mask = ~np.eye(m, dtype=bool).reshape(-1)
        if cross_term_bound is None:
            cross_term_bound = 0.5 * float(np.linalg.norm(b[mask]))
        radius = float(cross_term_bound)

    def solve_at(lam, x0):
        return _cd_lasso_nonneg(
            a, b, lam, x0, config.inner_tol, config.inner_max_iters, norms,
            nuisance_mask=mask, nuisance_radius=radius,
        )

    best, iters, history = _bisect_penalty(solve_at, lam_max, bound, np.zeros(a.shape[1]))
    values = best.x
    return _spectrum_from_result(
        grid, values, "subspace_cs", best, iters, bound, history,
        float(np.sum(values)), config.inner_tol,
    )


def choose_delta(spectral, num_paths: int, factor: float = 1.5) -> float:
    """Residual allowance for ``subspace_cs`` from the noise eigenvalues.

    Takes the root-sum-square of the eigenvalues outside the signal
    subspace, scaled by ``factor``, plus a floor of 1e-9 times the
    signal-subspace energy so the result is always positive. ``factor=0``
    selects strict interpolation of the signal subspace.

    Args:
        spectral: SpectralMatrix, SubspaceDecomposition, or a 1-D array of
            eigenvalues (any order).
        num_paths: Signal-subspace dimension.
        factor: Scale on the noise-floor estimate.
    """
    if isinstance(spectral, SubspaceDecomposition):
        lam = spectral.eigenvalues
    elif isinstance(spectral, SpectralMatrix):
        lam = np.linalg.eigvalsh(spectral.matrix)[::-1]
    else:
        lam = np.sort(np.asarray(spectral, dtype=float))[::-1]
    if not 1 <= num_paths <= lam.size:
        raise ValueError(f"num_paths must lie in [1, {lam.size}]")
    if factor < 0:
        raise ValueError("factor must be nonnegative")
    noise = float(np.sqrt(np.sum(lam[num_paths:] ** 2)))
    signal = float(np.sqrt(np.sum(lam[:num_paths] ** 2)))
    return factor * noise + _BOUND_FLOOR_REL * signal
