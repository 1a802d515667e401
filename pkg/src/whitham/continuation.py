"""Branch tracing from the bifurcation point through the turning point.

The trace starts at a small-amplitude wave obtained from the second-order
expansion, steps the speed down while the branch is steep in ``mu``, then
switches to the waveheight as parameter.  Every accepted point can be checked
by re-solving it on a refined grid; failures there double the grid.
"""
from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import asymptotics
from .spectral import DispersionModel, collocation_grid, symbol
from .steady import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    SingularJacobianError,
    SolverReport,
    WaveProfile,
    newton_fixed_height,
    newton_fixed_speed,
)

logger = logging.getLogger(__name__)

# speed offset mu_k - c eps**2 used for the linear guess when no quadratic expansion is known
LINEAR_GUESS_CURVATURE = 0.5


class BranchStartError(RuntimeError):
    """The first Newton solve of a branch failed or fell onto the trivial solution."""


class TargetNotReachedError(RuntimeError):
    """A requested speed or height is not attained on the traced arm."""


class NoNontrivialWaveError(TargetNotReachedError):
    """The requested speed lies outside the branch; only the trivial wave exists there."""


class NonPhysicalSpeedWarning(UserWarning):
    pass


class ParamMode(str, enum.Enum):
    SPEED = "speed"
    HEIGHT = "height"


class Termination(str, enum.Enum):
    HEIGHT_LIMIT = "height_limit"
    REFINEMENT_FAILURE = "refinement_failure"
    STEP_FAILURE = "step_failure"
    MAX_POINTS = "max_points"
    TARGET_REACHED = "target_reached"


@dataclass(frozen=True)
class BranchPoint:
    mu: float
    height: float
    profile: WaveProfile
    param_mode: ParamMode
    report: SolverReport

    @property
    def n_points(self) -> int:
        return self.profile.n_points


@dataclass
class Branch:
    model: DispersionModel
    k: int
    points: list[BranchPoint] = field(default_factory=list)
    turning_point_index: int | None = None
    termination: Termination | None = None

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def mus(self) -> np.ndarray:
        return np.array([p.mu for p in self.points])

    @property
    def heights(self) -> np.ndarray:
        return np.array([p.height for p in self.points])


@dataclass(frozen=True)
class ContinuationConfig:
    k: int = 1
    n_initial: int = 64
    eps0: float = 0.01
    mu_step: float = 2e-3
    height_step: float = 1e-2
    height_max: float = 0.6
    switch_threshold: float = 0.5
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    refine_factor: int = 2
    n_max: int = 1024
    verify: bool = True
    verify_tol: float = 1e-6
    max_points: int = 2000

    def __post_init__(self):
        for name in ("eps0", "mu_step", "height_step", "height_max", "switch_threshold", "tol", "verify_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.n_initial < 2 or self.n_max < self.n_initial:
            raise ValueError("need 2 <= n_initial <= n_max")
        if self.refine_factor < 2 or self.max_iter < 1 or self.max_points < 1:
            raise ValueError("refine_factor >= 2, max_iter >= 1 and max_points >= 1 required")


def bifurcation_speed(model, k: int) -> float:
    """Speed at which the k-th nontrivial branch leaves the zero solution.

    For KdV and ``k >= 3`` the value is not positive; it is returned anyway
    together with a :class:`NonPhysicalSpeedWarning`.
    """
    model = DispersionModel.coerce(model)
    if k < 1 or int(k) != k:
        raise ValueError(f"k must be a positive integer, got {k}")
    if model is DispersionModel.WHITHAM:
        return float(symbol(model, k))
    mu = 1.0 - k**2 / 6.0
    if mu <= 0:
        warnings.warn(f"KdV bifurcation speed for k={k} is {mu:.4f} <= 0 (non-physical)",
                      NonPhysicalSpeedWarning, stacklevel=2)
    return mu


def small_amplitude_guess(model, k: int, eps: float, n: int = 64):
    """Initial wave ``(values, mu)`` of amplitude ``eps`` on the ``n``-point grid."""
    model = DispersionModel.coerce(model)
    x = collocation_grid(n)
    if k == 1 and model is DispersionModel.WHITHAM:
        return asymptotics.whitham_expansion(eps, x)
    if k == 1:
        return asymptotics.kdv_expansion(eps, x), asymptotics.kdv_speed(eps)
    mu_k = bifurcation_speed(model, k)
    return eps * np.cos(k * x), mu_k - LINEAR_GUESS_CURVATURE * eps**2


def verify_branch_point(point: BranchPoint, refine_factor: int = 2, tol: float = DEFAULT_TOL,
                        max_iter: int = DEFAULT_MAX_ITER, agreement: float = 1e-6) -> bool:
    """Re-solve ``point`` at fixed height on a grid ``refine_factor`` times finer.

    True when Newton converges there and speed and height agree with the
    coarse solution to within ``agreement``.
    """
    if refine_factor < 2 or int(refine_factor) != refine_factor:
        raise ValueError("refine_factor must be an integer >= 2")
    prof = point.profile
    fine = prof.resampled(prof.n_points * int(refine_factor))
    try:
        sol, report = newton_fixed_height(fine.values, prof.mu, point.height, prof.model,
                                          tol=tol, max_iter=max_iter, k=prof.k)
    except SingularJacobianError:
        return False
    if not report.converged:
        return False
    if abs(sol.mu - prof.mu) > agreement or abs(sol.height - point.height) > agreement:
        return False
    return _in_solution_set(sol)


def _in_solution_set(profile: WaveProfile) -> bool:
    # Whitham waves on the branch satisfy max phi < mu/2; KdV has no such bound
    if profile.model is not DispersionModel.WHITHAM:
        return True
    return float(np.max(profile.values)) < profile.mu / 2


class _Tracer:
    def __init__(self, model, config: ContinuationConfig):
        self.model = model
        self.cfg = config
        self.n = config.n_initial
        self.mu_k = bifurcation_speed(model, config.k)
        self.branch = Branch(model, config.k)

    # -- solving ---------------------------------------------------------
    def _solve(self, mode, seed_values, seed_mu, target):
        cfg = self.cfg
        try:
            if mode is ParamMode.SPEED:
                prof, rep = newton_fixed_speed(seed_values, target, self.model, cfg.tol, cfg.max_iter, cfg.k)
            else:
                prof, rep = newton_fixed_height(seed_values, seed_mu, target, self.model,
                                                cfg.tol, cfg.max_iter, cfg.k)
        except (SingularJacobianError, ValueError):
            return None
        if not rep.converged or not np.isfinite(prof.mu) or prof.mu <= 0:
            return None
        return BranchPoint(prof.mu, prof.height, prof, mode, rep)

    def _acceptable(self, point: BranchPoint) -> bool:
        pts = self.branch.points
        if pts and not point.height > pts[-1].height:
            return False
        if not _in_solution_set(point.profile):
            return False
        if point.report.iterations > 2 * self.cfg.max_iter / 3:
            return False
        if self.cfg.verify:
            return verify_branch_point(point, self.cfg.refine_factor, self.cfg.tol,
                                       self.cfg.max_iter, self.cfg.verify_tol)
        return True

    def _seed(self, mode, target):
        pts = self.branch.points
        last = pts[-1]
        last_vals = last.profile.resampled(self.n).values
        if len(pts) == 1:
            # amplitude grows like sqrt(mu_k - mu) near the bifurcation point
            if mode is ParamMode.SPEED:
                scale = math.sqrt(max(self.mu_k - target, 0.0) / max(self.mu_k - last.mu, 1e-300))
                return last_vals * scale, target
            return last_vals * target / last.height, last.mu
        prev = pts[-2]
        prev_vals = prev.profile.resampled(self.n).values
        if mode is ParamMode.SPEED:
            t = (target - last.mu) / (last.mu - prev.mu)
        else:
            t = (target - last.height) / (last.height - prev.height)
        return last_vals + t * (last_vals - prev_vals), last.mu + t * (last.mu - prev.mu)

    def _step(self, mode, target):
        """Solve one continuation step, refining the grid as needed."""
        seed_vals, seed_mu = self._seed(mode, target)
        point = self._solve(mode, seed_vals, seed_mu, target)
        if point is None and mode is ParamMode.SPEED:
            return None, Termination.STEP_FAILURE
        while point is None or not self._acceptable(point):
            if self.n * 2 > self.cfg.n_max:
                return None, Termination.STEP_FAILURE if point is None else Termination.REFINEMENT_FAILURE
            self.n *= 2
            logger.info("refining grid to N=%d at %s=%.6g", self.n, mode.value, target)
            if point is not None:
                seed_vals, seed_mu = point.profile.resampled(self.n).values, point.mu
            else:
                seed_vals, seed_mu = self._seed(mode, target)
            point = self._solve(mode, seed_vals, seed_mu, target)
            if point is None:
                return None, Termination.REFINEMENT_FAILURE
        return point, None

    # -- driver ----------------------------------------------------------
    def start(self):
        cfg = self.cfg
        values, mu = small_amplitude_guess(self.model, cfg.k, cfg.eps0, self.n)
        first = self._solve(ParamMode.SPEED, values, mu, mu)
        if first is None or first.height < 0.1 * cfg.eps0:
            # fixed-speed start failed or collapsed onto zero: pin the height instead
            first = self._solve(ParamMode.HEIGHT, values, mu, 2.0 * cfg.eps0)
        if first is None:
            raise BranchStartError(f"first Newton solve failed for {self.model.value} k={cfg.k}")
        self.branch.points.append(first)

    def run(self, until: Callable[[Branch], bool] | None = None) -> Branch:
        cfg = self.cfg
        br = self.branch
        self.start()
        mode = ParamMode.SPEED
        direction = -1.0 if br.points[0].mu <= self.mu_k else 1.0
        while True:
            if until is not None and until(br):
                br.termination = Termination.TARGET_REACHED
                break
            if len(br.points) >= cfg.max_points:
                br.termination = Termination.MAX_POINTS
                break
            if mode is ParamMode.SPEED and len(br.points) >= 2:
                a, b = br.points[-2], br.points[-1]
                if abs((b.mu - a.mu) / (b.height - a.height)) < cfg.switch_threshold:
                    mode = ParamMode.HEIGHT
            if mode is ParamMode.SPEED:
                target = br.points[-1].mu + direction * cfg.mu_step
                point, _ = self._step(mode, target)
                if point is None:
                    mode = ParamMode.HEIGHT
                    continue
            else:
                target = br.points[-1].height + cfg.height_step
                if target > cfg.height_max * (1 + 1e-12):
                    br.termination = Termination.HEIGHT_LIMIT
                    break
                point, failure = self._step(mode, target)
                if point is None:
                    br.termination = failure
                    break
            if point.height > cfg.height_max * (1 + 1e-12):
                br.termination = Termination.HEIGHT_LIMIT
                break
            br.points.append(point)
            self._check_turning()
        logger.info("branch %s k=%d: %d points, termination %s, turning point %s",
                    br.model.value, br.k, len(br), br.termination.value, br.turning_point_index)
        return br

    def _check_turning(self):
        br = self.branch
        if br.turning_point_index is not None or len(br.points) < 3:
            return
        m0, m1, m2 = (p.mu for p in br.points[-3:])
        if (m1 - m0) * (m2 - m1) < 0:
            br.turning_point_index = len(br.points) - 2


def trace_branch(model, config: ContinuationConfig | None = None,
                 until: Callable[[Branch], bool] | None = None) -> Branch:
    """Trace the ``config.k`` branch of ``model`` from small amplitude.

    ``until`` is an optional predicate on the partial branch; the trace stops
    with ``Termination.TARGET_REACHED`` once it returns True.
    """
    model = DispersionModel.coerce(model)
    return _Tracer(model, config or ContinuationConfig()).run(until)


def _fixed_grid(config: ContinuationConfig | None, n: int, k: int) -> ContinuationConfig:
    base = config or ContinuationConfig()
    return replace(base, k=k, n_initial=n, n_max=n, verify=False)


def solve_at_height(model, target_height: float, n: int = 64, k: int = 1,
                    config: ContinuationConfig | None = None):
    """Wave of the given height on the arm continued from small amplitude.

    Traces on a fixed ``n``-point grid up to the last step below the target,
    then solves with the height pinned to ``target_height``.
    Returns ``(profile, report)``.
    """
    model = DispersionModel.coerce(model)
    cfg = _fixed_grid(config, n, k)
    cfg = replace(cfg, height_max=target_height, eps0=min(cfg.eps0, target_height / 4))
    branch = trace_branch(model, cfg)
    pts = branch.points
    # HEIGHT_LIMIT means the next step would overshoot, so the target lies just ahead
    if branch.termination is not Termination.HEIGHT_LIMIT:
        raise TargetNotReachedError(
            f"{model.value} branch stopped at height {pts[-1].height:.4f} ({branch.termination.value}) "
            f"before reaching {target_height}")
    if len(pts) >= 2:
        a, b = pts[-2], pts[-1]
        t = (target_height - b.height) / (b.height - a.height)
        seed_vals = b.profile.values + t * (b.profile.values - a.profile.values)
        seed_mu = b.mu + t * (b.mu - a.mu)
    else:
        seed_vals, seed_mu = pts[-1].profile.values * target_height / pts[-1].height, pts[-1].mu
    prof, rep = newton_fixed_height(seed_vals, seed_mu, target_height, model, cfg.tol, cfg.max_iter, k)
    if not rep.converged:
        raise TargetNotReachedError(f"Newton did not converge at height {target_height}")
    return prof, rep


def solve_at_speed(model, target_mu: float, n: int = 64, k: int = 1,
                   config: ContinuationConfig | None = None):
    """Wave of speed ``target_mu`` on the arm before the turning point.

    Raises :class:`NoNontrivialWaveError` when ``target_mu`` is not below the
    bifurcation speed, and :class:`TargetNotReachedError` when the arm turns
    or terminates before the speed is bracketed.
    """
    model = DispersionModel.coerce(model)
    mu_k = bifurcation_speed(model, k)
    if target_mu >= mu_k:
        raise NoNontrivialWaveError(
            f"mu={target_mu} is not below the bifurcation speed {mu_k:.6f}; only the trivial wave is bracketed")
    cfg = _fixed_grid(config, n, k)

    def bracketed(br: Branch) -> bool:
        return br.points[-1].mu <= target_mu or br.turning_point_index is not None

    branch = trace_branch(model, cfg, until=bracketed)
    pts = branch.points
    stop = branch.turning_point_index if branch.turning_point_index is not None else len(pts) - 1
    idx = next((i for i in range(stop + 1) if pts[i].mu <= target_mu), None)
    if idx is None:
        raise TargetNotReachedError(
            f"{model.value} arm turned or stopped ({branch.termination.value}) at mu={pts[stop].mu:.6f} "
            f"before reaching mu={target_mu}")
    b = pts[idx]
    if idx == 0:
        scale = math.sqrt((mu_k - target_mu) / (mu_k - b.mu))
        seed = b.profile.values * scale
    else:
        a = pts[idx - 1]
        t = (target_mu - a.mu) / (b.mu - a.mu)
        seed = a.profile.values + t * (b.profile.values - a.profile.values)
    prof, rep = newton_fixed_speed(seed, target_mu, model, cfg.tol, cfg.max_iter, k)
    if not rep.converged:
        raise TargetNotReachedError(f"Newton did not converge at mu={target_mu}")
    return prof, rep
