"""Certified measures of balls, annuli, strips, and inverse radius problems.

All quantities are returned as two-sided brackets: a cylinder-tree pruner
classifies cylinder hulls as certainly inside / certainly outside / straddling
an open region, accumulates certain mass, and bounds the truth by the
straddling mass at the depth budget.  Backends with a closed-form distribution
function (interval densities, middle-third weighted Cantor measures) take
exact-CDF fast paths with near-zero bracket width; those fast paths are
cross-checked against the pruner in the test-suite.

``t_n_radius`` inverts r |-> mu(B(x, r)) by bisection and terminates only when
the measure bracket at the returned radius certifies the target value within
the requested measure tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .gibbs import BernoulliBackend, DensityBackend, MeasureBackend, SpectralBackend
from .ifs import Affine1D, IfsSystem, Moebius1D, Similarity2D
from .symbolic import PointRd, as_point

__all__ = [
    "MeasureBracket",
    "CertificationError",
    "ConstantRadius",
    "PowerLogRadius",
    "PowerRadius",
    "BallRegion",
    "AnnulusRegion",
    "StripRegion",
    "IntersectRegion",
    "region_measure",
    "ball_measure",
    "annulus_measure",
    "t_n_radius",
    "density_ratio_series",
    "hyperplane_decay_probe",
    "doubling_ratio",
    "cantor_cdf_bracket",
]


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureBracket:
    """Two-sided enclosure [lower, upper] of a measure value."""

    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper + 1e-15:
            raise ValueError(f"bracket lower {self.lower} above upper {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, value: float) -> bool:
        return self.lower - 1e-15 <= value <= self.upper + 1e-15


class CertificationError(RuntimeError):
    """Raised when a bracket cannot certify the requested tolerance."""

    def __init__(self, message: str, bracket: Optional[MeasureBracket] = None):
        super().__init__(message)
        self.bracket = bracket


# ---------------------------------------------------------------------------
# radius schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantRadius:
    c: float

    def value(self, n: int) -> float:
        return self.c

    def values(self, ns: np.ndarray) -> np.ndarray:
        return np.full(np.asarray(ns).shape, self.c, dtype=float)


@dataclass(frozen=True)
class PowerLogRadius:
    """psi(n) = 3^(-floor(alpha * ln n)): a staircase of Cantor scales."""

    alpha: float

    def value(self, n: int) -> float:
        return 3.0 ** (-math.floor(self.alpha * math.log(n)))

    def values(self, ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns, dtype=float)
        return 3.0 ** (-np.floor(self.alpha * np.log(ns)))


@dataclass(frozen=True)
class PowerRadius:
    """psi(n) = c * n^(-beta)."""

    c: float
    beta: float

    def value(self, n: int) -> float:
        return self.c * float(n) ** (-self.beta)

    def values(self, ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns, dtype=float)
        return self.c * ns ** (-self.beta)


RadiusFunction = Union[ConstantRadius, PowerLogRadius, PowerRadius]


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

INSIDE, STRADDLE, OUTSIDE = 1, 0, -1


class BallRegion:
    """Open ball; classification errs toward 'straddle'."""

    def __init__(self, center: PointRd, r: float):
        if r <= 0:
            raise ValueError("radius must be positive")
        self.center = center
        self.r = r

    def classify(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center.coords)
        gap = np.maximum(np.maximum(lo - c, c - hi), 0.0)
        min_d = np.sqrt((gap ** 2).sum(axis=1))
        max_d = np.sqrt((np.maximum(c - lo, hi - c) ** 2).sum(axis=1))
        out = np.zeros(lo.shape[0], dtype=np.int8)
        out[max_d < self.r] = INSIDE
        out[min_d >= self.r] = OUTSIDE
        return out


class AnnulusRegion:
    """Open annulus r - rho < |y - x| < r + rho."""

    def __init__(self, center: PointRd, r: float, rho: float):
        if r <= 0 or rho <= 0:
            raise ValueError("r and rho must be positive")
        self.center = center
        self.r = r
        self.rho = rho

    def classify(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center.coords)
        gap = np.maximum(np.maximum(lo - c, c - hi), 0.0)
        min_d = np.sqrt((gap ** 2).sum(axis=1))
        max_d = np.sqrt((np.maximum(c - lo, hi - c) ** 2).sum(axis=1))
        inner, outer = self.r - self.rho, self.r + self.rho
        out = np.zeros(lo.shape[0], dtype=np.int8)
        out[(min_d > inner) & (max_d < outer)] = INSIDE
        out[(max_d <= inner) | (min_d >= outer)] = OUTSIDE
        return out


class StripRegion:
    """Open strip |<y, normal> - offset| < rho (a hyperplane neighborhood)."""

    def __init__(self, normal: Sequence[float], offset: float, rho: float):
        v = np.asarray(normal, dtype=float)
        n = np.linalg.norm(v)
        if n == 0 or rho <= 0:
            raise ValueError("need a nonzero normal and positive rho")
        self.normal = v / n
        self.offset = float(offset) / n
        self.rho = rho

    def classify(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        n = self.normal
        # extremes of <y, n> over the box
        lo_dot = lo @ np.maximum(n, 0.0) + hi @ np.minimum(n, 0.0)
        hi_dot = hi @ np.maximum(n, 0.0) + lo @ np.minimum(n, 0.0)
        a, b = self.offset - self.rho, self.offset + self.rho
        out = np.zeros(lo.shape[0], dtype=np.int8)
        out[(lo_dot > a) & (hi_dot < b)] = INSIDE
        out[(hi_dot <= a) | (lo_dot >= b)] = OUTSIDE
        return out


class IntersectRegion:
    """Intersection of regions; conservative classification."""

    def __init__(self, regions: Sequence):
        if not regions:
            raise ValueError("need at least one region")
        self.regions = list(regions)

    def classify(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        votes = np.stack([reg.classify(lo, hi) for reg in self.regions])
        out = np.zeros(lo.shape[0], dtype=np.int8)
        out[(votes == INSIDE).all(axis=0)] = INSIDE
        out[(votes == OUTSIDE).any(axis=0)] = OUTSIDE
        return out


# ---------------------------------------------------------------------------
# cylinder-tree pruner
# ---------------------------------------------------------------------------

_NODE_CAP = 5_000_000


def _initial_state(system: IfsSystem):
    if system.dim == 1:
        mats = np.array([[1.0, 0.0, 0.0, 1.0]])
        return {"mats": mats}
    lin = np.array([[1.0, 0.0, 0.0, 1.0]])
    t = np.array([[0.0, 0.0]])
    return {"lin": lin, "t": t}


def _child_state(system: IfsSystem, state, j: int):
    if system.dim == 1:
        p, q, r, s = system.maps[j - 1].matrix
        P, Q, R, S = state["mats"].T
        return {
            "mats": np.stack(
                [P * p + Q * r, P * q + Q * s, R * p + S * r, R * q + S * s], axis=1
            )
        }
    m = system.maps[j - 1]
    A = m.linear
    tj = np.asarray(m.translation)
    lin = state["lin"]
    t = state["t"]
    a11, a12, a21, a22 = lin.T
    b11, b12, b21, b22 = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    new_lin = np.stack(
        [
            a11 * b11 + a12 * b21,
            a11 * b12 + a12 * b22,
            a21 * b11 + a22 * b21,
            a21 * b12 + a22 * b22,
        ],
        axis=1,
    )
    new_t = np.stack(
        [
            a11 * tj[0] + a12 * tj[1] + t[:, 0],
            a21 * tj[0] + a22 * tj[1] + t[:, 1],
        ],
        axis=1,
    )
    return {"lin": new_lin, "t": new_t}


def _state_boxes(system: IfsSystem, state):
    box = system.attractor_box
    if system.dim == 1:
        P, Q, R, S = state["mats"].T
        a = (P * box.lo[0] + Q) / (R * box.lo[0] + S)
        b = (P * box.hi[0] + Q) / (R * box.hi[0] + S)
        return np.minimum(a, b)[:, None], np.maximum(a, b)[:, None]
    corners = np.array(
        [
            [box.lo[0], box.lo[1]],
            [box.lo[0], box.hi[1]],
            [box.hi[0], box.lo[1]],
            [box.hi[0], box.hi[1]],
        ]
    )
    lin = state["lin"]
    t = state["t"]
    xs = np.stack(
        [lin[:, 0][:, None] * corners[:, 0] + lin[:, 1][:, None] * corners[:, 1] + t[:, 0][:, None]],
        axis=0,
    )[0]
    ys = np.stack(
        [lin[:, 2][:, None] * corners[:, 0] + lin[:, 3][:, None] * corners[:, 1] + t[:, 1][:, None]],
        axis=0,
    )[0]
    lo = np.stack([xs.min(axis=1), ys.min(axis=1)], axis=1)
    hi = np.stack([xs.max(axis=1), ys.max(axis=1)], axis=1)
    return lo, hi


def _select_state(state, mask):
    return {k: v[mask] for k, v in state.items()}


def _child_masses(backend: MeasureBackend, system: IfsSystem, masses, idx, level, j, child_state):
    if isinstance(backend, BernoulliBackend):
        return masses * backend.probs[j - 1]
    if isinstance(backend, DensityBackend):
        lo, hi = _state_boxes(system, child_state)
        return backend.cdf(hi[:, 0]) - backend.cdf(lo[:, 0])
    if isinstance(backend, SpectralBackend):
        table = backend.level_table(level)
        return table[idx]
    raise TypeError(f"unsupported backend {type(backend).__name__}")


def _unit_bracket(lower: float, upper: float) -> MeasureBracket:
    """Clip a bracket to [0, 1], absorbing float summation rounding."""
    lower = min(max(lower, 0.0), 1.0)
    upper = min(max(upper, 0.0), 1.0)
    return MeasureBracket(min(lower, upper), upper)


def region_measure(
    backend: MeasureBackend,
    region,
    depth_budget: int,
) -> MeasureBracket:
    """Bracket the measure of an open region by pruning the cylinder tree."""
    system = backend.system
    if depth_budget < 1:
        raise ValueError("depth_budget must be >= 1")
    if isinstance(backend, SpectralBackend) and depth_budget > backend.max_depth:
        raise ValueError("depth_budget beyond the spectral table depth")
    state = _initial_state(system)
    masses = np.array([1.0])
    idx = np.array([0], dtype=np.int64)
    lo, hi = _state_boxes(system, state)
    cls = region.classify(lo, hi)
    if cls[0] == INSIDE:
        return MeasureBracket(1.0, 1.0)
    if cls[0] == OUTSIDE:
        return MeasureBracket(0.0, 0.0)
    inside_mass = 0.0
    for level in range(1, depth_budget + 1):
        new_states, new_masses, new_idx = [], [], []
        for j in range(1, system.m + 1):
            cs = _child_state(system, state, j)
            ci = idx * system.m + (j - 1)
            cm = _child_masses(backend, system, masses, ci, level, j, cs)
            lo, hi = _state_boxes(system, cs)
            cls = region.classify(lo, hi)
            inside_mass += float(cm[cls == INSIDE].sum())
            keep = cls == STRADDLE
            if np.any(keep):
                new_states.append(_select_state(cs, keep))
                new_masses.append(cm[keep])
                new_idx.append(ci[keep])
        if not new_states:
            return _unit_bracket(inside_mass, inside_mass)
        state = {k: np.concatenate([s[k] for s in new_states]) for k in new_states[0]}
        masses = np.concatenate(new_masses)
        idx = np.concatenate(new_idx)
        if masses.size > _NODE_CAP:
            raise CertificationError(
                f"straddle frontier exceeded {_NODE_CAP} nodes at depth {level}",
                _unit_bracket(inside_mass, inside_mass + float(masses.sum())),
            )
        if float(masses.sum()) < 1e-18:
            return _unit_bracket(inside_mass, inside_mass + float(masses.sum()))
    return _unit_bracket(inside_mass, inside_mass + float(masses.sum()))


# ---------------------------------------------------------------------------
# exact CDF fast paths
# ---------------------------------------------------------------------------

_CDF_WALK_LEVELS = 60


def _is_middle_third_cantor(system: IfsSystem) -> bool:
    if system.dim != 1 or system.m != 2:
        return False
    m1, m2 = system.maps
    return (
        isinstance(m1, Affine1D)
        and isinstance(m2, Affine1D)
        and abs(m1.a - 1.0 / 3.0) < 1e-15
        and abs(m1.b) < 1e-15
        and abs(m2.a - 1.0 / 3.0) < 1e-15
        and abs(m2.b - 2.0 / 3.0) < 1e-15
    )


def cantor_cdf_bracket(probs: Sequence[float], y) -> Tuple[np.ndarray, np.ndarray]:
    """Bracket F(y) = mu([0, y]) for the (p1, p2) middle-third Cantor measure.

    Vectorized digit walk; terminates exactly when y falls in a removed gap,
    otherwise the residual cell mass p_max^60 bounds the error.
    """
    p1, p2 = float(probs[0]), float(probs[1])
    y = np.atleast_1d(np.asarray(y, dtype=float))
    acc = np.zeros(y.shape)
    a = np.zeros(y.shape)
    s = np.ones(y.shape)
    w = np.ones(y.shape)
    active = np.ones(y.shape, dtype=bool)
    # y outside [0, 1]
    below = y <= 0.0
    above = y >= 1.0
    active &= ~(below | above)
    acc[above] = 1.0
    w[~active] = 0.0
    for _ in range(_CDF_WALK_LEVELS):
        if not active.any():
            break
        rel = np.zeros(y.shape)
        rel[active] = (y[active] - a[active]) / s[active]
        right = active & (rel >= 2.0 / 3.0)
        gap = active & (rel >= 1.0 / 3.0) & (rel < 2.0 / 3.0)
        left = active & (rel < 1.0 / 3.0)
        acc[right] += w[right] * p1
        a[right] += 2.0 / 3.0 * s[right]
        w[right] *= p2
        acc[gap] += w[gap] * p1
        w[gap] = 0.0
        active &= ~gap
        w[left] *= p1
        s[active] /= 3.0
    return acc, acc + w


def _exact_ball_fast_path(backend: MeasureBackend, x: PointRd, r: float):
    """Closed-form mu(B(x, r)) where available; None when not applicable."""
    system = backend.system
    if isinstance(backend, DensityBackend):
        lo, hi = system.attractor_box.lo[0], system.attractor_box.hi[0]
        a = min(max(x.x - r, lo), hi)
        b = min(max(x.x + r, lo), hi)
        v = float(backend.cdf(b) - backend.cdf(a))
        return MeasureBracket(v, v)
    if isinstance(backend, BernoulliBackend) and _is_middle_third_cantor(system):
        flo, fhi = cantor_cdf_bracket(backend.probs, np.array([x.x - r, x.x + r]))
        return MeasureBracket(max(0.0, float(flo[1] - fhi[0])), float(fhi[1] - flo[0]))
    return None


def ball_measure(
    backend: MeasureBackend,
    x,
    r: float,
    depth_budget: int = 40,
    method: str = "auto",
) -> MeasureBracket:
    """Bracket mu(B(x, r)) (open ball); exact CDF fast paths when available."""
    if r <= 0:
        raise ValueError("radius must be positive")
    x = as_point(x, backend.system.dim)
    if method not in ("auto", "prune"):
        raise ValueError("method must be 'auto' or 'prune'")
    if method == "auto":
        fast = _exact_ball_fast_path(backend, x, r)
        if fast is not None:
            return fast
    return region_measure(backend, BallRegion(x, r), depth_budget)


def annulus_measure(
    backend: MeasureBackend,
    x,
    r: float,
    rho: float,
    depth_budget: int = 40,
    method: str = "auto",
) -> MeasureBracket:
    """Bracket mu{y : r - rho < |y - x| < r + rho}."""
    if r <= 0 or rho <= 0:
        raise ValueError("r and rho must be positive")
    x = as_point(x, backend.system.dim)
    if method == "auto":
        outer = _exact_ball_fast_path(backend, x, r + rho)
        if outer is not None:
            if rho >= r:
                return outer
            inner = _exact_ball_fast_path(backend, x, r - rho)
            # annulus = open outer ball minus closed inner ball; atomless
            # measures make the closed/open distinction null
            return MeasureBracket(
                max(0.0, outer.lower - inner.upper), max(0.0, outer.upper - inner.lower)
            )
    return region_measure(backend, AnnulusRegion(x, r, rho), depth_budget)


# ---------------------------------------------------------------------------
# inverse radius
# ---------------------------------------------------------------------------

_RADIUS_PIN = 1e-12


def t_n_radius(
    backend: MeasureBackend,
    x,
    target: float,
    tol: float,
    depth_budget: int = 45,
    max_steps: int = 200,
) -> float:
    """The smallest radius with mu(B(x, r)) >= target, certified within tol.

    Bisection pins inf{r : mu(B(x, r)) >= target} to absolute radius
    precision 1e-12; that infimum is exactly 1-Lipschitz as a function of the
    center, so nearby centers receive radii within |x - x'| + 2e-12 of each
    other.  The measure bracket at the returned radius must certify the
    target within +-tol (measure units) or a ``CertificationError`` carrying
    the offending bracket is raised.  Targets at or above the total mass
    return the attractor diameter.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if target <= 0:
        raise ValueError("target must be positive")
    x = as_point(x, backend.system.dim)
    diam = backend.system.attractor_diameter[1]
    if target >= 1.0:
        return diam
    lo_r, hi_r = 0.0, diam * (1.0 + 1e-9)
    eta = _RADIUS_PIN * max(1.0, diam)
    steps = 0
    while hi_r - lo_r > eta:
        steps += 1
        if steps > max_steps:
            raise CertificationError("bisection exceeded max_steps")
        mid = 0.5 * (lo_r + hi_r)
        br = ball_measure(backend, x, mid, depth_budget)
        if br.upper < target:
            lo_r = mid
        elif br.lower >= target:
            hi_r = mid
        else:
            raise CertificationError(
                f"bracket width {br.width:.3e} cannot order the measure "
                "against the target; raise depth_budget",
                br,
            )
    final = ball_measure(backend, x, hi_r, depth_budget)
    if final.lower >= target - tol and final.upper <= target + tol:
        return hi_r
    raise CertificationError(
        f"measure at the pinned radius is [{final.lower:.6e}, {final.upper:.6e}], "
        f"outside target {target:.6e} +- {tol:.1e}",
        final,
    )


# ---------------------------------------------------------------------------
# derived series
# ---------------------------------------------------------------------------

def density_ratio_series(
    backend: MeasureBackend,
    x,
    psi: RadiusFunction,
    tau: float,
    N: int,
    depth_budget: int = 45,
) -> dict:
    """mu(B(x, psi(n))) / psi(n)^tau for n = 1..N with wide-bracket flags."""
    x = as_point(x, backend.system.dim)
    ns = np.arange(1, N + 1)
    radii = psi.values(ns)
    values = np.empty(N)
    flagged = np.zeros(N, dtype=bool)
    cache = {}
    for i, r in enumerate(radii):
        if r not in cache:
            cache[r] = ball_measure(backend, x, float(r), depth_budget)
        br = cache[r]
        values[i] = br.midpoint / r ** tau
        flagged[i] = br.width > 0.1 * max(br.midpoint, 1e-300)
    return {"n": ns, "values": values, "flagged": flagged}


def hyperplane_decay_probe(
    backend: MeasureBackend,
    x,
    r: float,
    rho: float,
    normal: Sequence[float],
    offset: float,
    depth_budget: int = 30,
) -> dict:
    """Ratio mu(strip(H, rho) and B(x, r)) / mu(B(x, r)) as bracket data."""
    x = as_point(x, backend.system.dim)
    strip = StripRegion(normal, offset, rho)
    num = region_measure(backend, IntersectRegion([strip, BallRegion(x, r)]), depth_budget)
    den = ball_measure(backend, x, r, depth_budget)
    if den.lower <= 0.0:
        raise CertificationError("denominator bracket touches zero", den)
    return {
        "numerator": num,
        "denominator": den,
        "ratio_low": num.lower / den.upper,
        "ratio_high": num.upper / den.lower,
        "ratio_mid": num.midpoint / den.midpoint,
    }


def doubling_ratio(
    backend: MeasureBackend,
    x,
    r: float,
    depth_budget: int = 40,
) -> float:
    """Bracket-midpoint ratio mu(B(x, 2r)) / mu(B(x, r))."""
    x = as_point(x, backend.system.dim)
    num = ball_measure(backend, x, 2.0 * r, depth_budget)
    den = ball_measure(backend, x, r, depth_budget)
    if den.midpoint <= 0.0:
        raise CertificationError("ball measure midpoint is zero", den)
    return num.midpoint / den.midpoint
