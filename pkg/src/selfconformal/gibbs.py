"""Gibbs measures for conformal systems via Ruelle transfer operators.

Three measure backends share one interface (cylinder masses by word, level
tables, next-symbol conditionals):

* ``BernoulliBackend``   -- exact product measures;
* ``DensityBackend``     -- measures with a closed-form distribution function
                            (catalog: ``reciprocal_log2``, the invariant
                            density 1/(log2 * (1+x)) on [0,1]);
* ``SpectralBackend``    -- piecewise-constant eigendata of the transfer
                            operator at a chosen cylinder depth.

``eigen_solve`` discretizes the operator L f = sum_j |phi_j'|^tau (f o phi_j)
on depth-k cells with exact Lebesgue cell averages of the weight, so for
tau = 1 in one dimension the cell-length vector is an exact fixed point of the
adjoint and the leading eigenvalue is 1 to machine precision.

``mixing_coeff_cylinders`` measures the uniform dependence coefficient between
a leading block and the remaining symbols at a fixed table depth; product
measures give exactly zero for every positive separation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .ifs import Affine1D, IfsSystem, Moebius1D, Similarity2D, _moebius_apply
from .symbolic import FiniteWord

__all__ = [
    "BernoulliPotential",
    "ConformalPowerPotential",
    "ClosedFormDensityPotential",
    "BernoulliBackend",
    "DensityBackend",
    "SpectralBackend",
    "EigenReport",
    "eigen_solve",
    "cylinder_measure",
    "conditional_next",
    "verify_gibbs_property",
    "mixing_coeff_cylinders",
    "DENSITY_CATALOG",
]

_LEVEL_TABLE_CAP = 25_000_000  # max cells in any requested level table


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BernoulliPotential:
    """Constant branch weights (a probability vector)."""

    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if any(p <= 0 for p in self.probs):
            raise ValueError("weights must be positive")
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")


@dataclass(frozen=True)
class ConformalPowerPotential:
    """Weight |phi_j'(x)|^tau."""

    tau: float


@dataclass(frozen=True)
class ClosedFormDensityPotential:
    """Names a catalog entry with an explicit invariant distribution."""

    name: str

    def __post_init__(self):
        if self.name not in DENSITY_CATALOG:
            raise ValueError(f"unknown density catalog entry {self.name!r}")


PotentialSpec = Union[BernoulliPotential, ConformalPowerPotential, ClosedFormDensityPotential]


# ---------------------------------------------------------------------------
# density catalog
# ---------------------------------------------------------------------------

_LOG2 = math.log(2.0)


def _H_reciprocal_log2(x):
    """Distribution function of the density 1/(log2 * (1+x)) on [0,1]."""
    return np.log1p(x) / _LOG2


def _h_reciprocal_log2(x):
    return 1.0 / (_LOG2 * (1.0 + np.asarray(x, dtype=float)))


DENSITY_CATALOG = {
    "reciprocal_log2": {
        "cdf": _H_reciprocal_log2,
        "density": _h_reciprocal_log2,
        "eigenvalue": 1.0,
        "tau": 1.0,
    }
}


# ---------------------------------------------------------------------------
# word indexing helpers
# ---------------------------------------------------------------------------

def word_index(word: FiniteWord) -> int:
    """Lexicographic index of a word among all words of its length."""
    idx = 0
    for s in word:
        idx = idx * word.m + (s - 1)
    return idx


def _check_level_size(m: int, k: int):
    if m ** k > _LEVEL_TABLE_CAP:
        raise ValueError(f"level table of size {m}^{k} exceeds the cap")


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------

class BernoulliBackend:
    """Product measure: mass of a word is the product of its symbol weights."""

    max_depth: Optional[int] = None

    def __init__(self, system: IfsSystem, probs: Sequence[float]):
        if len(probs) != system.m:
            raise ValueError("need one weight per map")
        self.system = system
        self.potential = BernoulliPotential(tuple(probs))
        self.probs = np.asarray(self.potential.probs)
        self._tables = {0: np.array([1.0])}

    def cylinder_measure(self, word: FiniteWord) -> float:
        out = 1.0
        for s in word:
            out *= self.probs[s - 1]
        return float(out)

    def level_table(self, k: int) -> np.ndarray:
        if k not in self._tables:
            _check_level_size(self.system.m, k)
            prev = self.level_table(k - 1)
            self._tables[k] = (prev[:, None] * self.probs[None, :]).ravel()
        return self._tables[k]

    def conditional_next(self, word: FiniteWord) -> np.ndarray:
        return self.probs.copy()

    def gibbs_data(self):
        probs = self.probs

        def h(x):
            return 1.0

        gs = [(lambda x, p=p: p) for p in probs]
        return 1.0, h, gs


class DensityBackend:
    """Closed-form measure: mu([a,b]) = H(b) - H(a) for a catalog CDF.

    Cylinder intervals come from exact monotone endpoint composition, so
    masses are exact up to floating-point rounding.
    """

    max_depth: Optional[int] = None

    def __init__(self, system: IfsSystem, name: str):
        if system.dim != 1:
            raise ValueError("density backends require a 1-D system")
        self.system = system
        self.potential = ClosedFormDensityPotential(name)
        self.name = name
        cat = DENSITY_CATALOG[name]
        self.cdf = cat["cdf"]
        self.density = cat["density"]
        self.eigenvalue = cat["eigenvalue"]
        self.tau = cat["tau"]
        lo, hi = system.attractor_box.lo[0], system.attractor_box.hi[0]
        self._root = (lo, hi)
        self._levels = {0: (np.array([lo]), np.array([hi]))}

    def word_interval(self, word: FiniteWord) -> Tuple[float, float]:
        mat = self.system.word_map(word)
        a = _moebius_apply(mat, self._root[0])
        b = _moebius_apply(mat, self._root[1])
        return (a, b) if a <= b else (b, a)

    def cylinder_measure(self, word: FiniteWord) -> float:
        a, b = self.word_interval(word)
        return float(self.cdf(b) - self.cdf(a))

    def _level_endpoints(self, k: int):
        if k not in self._levels:
            _check_level_size(self.system.m, k)
            lo_prev, hi_prev = self._level_endpoints(k - 1)
            blocks_lo, blocks_hi = [], []
            for m in self.system.maps:
                mat = m.matrix
                a = _moebius_apply(mat, lo_prev)
                b = _moebius_apply(mat, hi_prev)
                blocks_lo.append(np.minimum(a, b))
                blocks_hi.append(np.maximum(a, b))
            self._levels[k] = (np.concatenate(blocks_lo), np.concatenate(blocks_hi))
        return self._levels[k]

    def level_table(self, k: int) -> np.ndarray:
        lo, hi = self._level_endpoints(k)
        return self.cdf(hi) - self.cdf(lo)

    def conditional_next(self, word: FiniteWord) -> np.ndarray:
        mat = self.system.word_map(word)
        child_masses = []
        for m in self.system.maps:
            from .ifs import _moebius_compose

            cm = _moebius_compose(mat, m.matrix)
            a = _moebius_apply(cm, self._root[0])
            b = _moebius_apply(cm, self._root[1])
            a, b = (a, b) if a <= b else (b, a)
            child_masses.append(self.cdf(b) - self.cdf(a))
        child = np.asarray(child_masses)
        total = child.sum()
        if total <= 0:
            raise ValueError("zero-mass word")
        return child / total

    def gibbs_data(self):
        dens = self.density
        tau = self.tau
        system = self.system

        def h(x):
            return float(dens(x))

        gs = []
        for m in system.maps:
            if isinstance(m, (Affine1D, Moebius1D)):
                p, q, r, s = m.matrix
                det = abs(p * s - q * r)
                gs.append(lambda x, det=det, r=r, s=s, tau=tau: (det / (r * x + s) ** 2) ** tau)
            else:
                gs.append(lambda x, sc=m.scale, tau=tau: sc ** tau)
        return self.eigenvalue, h, gs


# ---------------------------------------------------------------------------
# eigen-solver
# ---------------------------------------------------------------------------

@dataclass
class EigenReport:
    """Discretized eigendata of the transfer operator at a cylinder depth."""

    eigenvalue: float
    depth: int
    h_values: np.ndarray
    nu_weights: np.ndarray
    mu_table: np.ndarray
    residual: float
    adjoint_residual: float
    iterations: int
    converged: bool
    cell_lo: np.ndarray
    cell_hi: np.ndarray
    cell_anchor: np.ndarray


def _cell_arrays(system: IfsSystem, depth: int):
    """Endpoint and anchor arrays for all depth-k cells (1-D systems)."""
    lo = np.array([system.attractor_box.lo[0]])
    hi = np.array([system.attractor_box.hi[0]])
    anchor = np.array([system.base_point().x])
    for _ in range(depth):
        blocks = []
        for m in system.maps:
            mat = m.matrix
            a = _moebius_apply(mat, lo)
            b = _moebius_apply(mat, hi)
            anc = _moebius_apply(mat, anchor)
            blocks.append((np.minimum(a, b), np.maximum(a, b), anc))
        lo = np.concatenate([b[0] for b in blocks])
        hi = np.concatenate([b[1] for b in blocks])
        anchor = np.concatenate([b[2] for b in blocks])
    return lo, hi, anchor


def _avg_weight(m, tau: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact Lebesgue cell average of |phi'|^tau over [a, b] per cell."""
    if isinstance(m, Similarity2D):
        return np.full(a.shape, m.scale ** tau)
    p, q, r, s = m.matrix
    det = abs(p * s - q * r)
    if r == 0.0:
        return np.full(a.shape, (det / s ** 2) ** tau)
    ua, ub = r * a + s, r * b + s
    if np.any(ua * ub <= 0):
        raise ValueError("Moebius pole inside a cell")
    sign = np.sign(ua)
    ua, ub = np.abs(ua), np.abs(ub)
    if abs(tau - 0.5) < 1e-15:
        anti = np.log(ub) - np.log(ua)
        integral = det ** tau * sign * anti / r
    else:
        e = 1.0 - 2.0 * tau
        anti = (ub ** e - ua ** e) / e
        integral = det ** tau * sign * anti / r
    return integral / (b - a)


def eigen_solve(
    system: IfsSystem,
    potential: PotentialSpec,
    depth: int,
    tol: float = 1e-13,
    max_iter: int = 500,
) -> EigenReport:
    """Leading eigendata of the transfer operator on depth-k cells.

    Piecewise-constant Galerkin scheme: the weight of branch j is averaged
    exactly (Lebesgue) over each cell, the forward operator updates the
    density values h and the adjoint updates the cell weights nu.  Output is
    normalized so sum(nu) = 1 and sum(h * nu) = 1; ``mu_table`` = h * nu is
    the induced cylinder-mass table at the chosen depth.
    """
    if system.dim != 1:
        raise ValueError("the eigensolver operates on 1-D systems")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    _check_level_size(system.m, depth)
    mm = system.m
    n_cells = mm ** depth
    lo, hi, anchor = _cell_arrays(system, depth)
    lengths = hi - lo
    if np.any(lengths <= 0):
        raise ValueError("degenerate cells; system cylinders must have length")

    if isinstance(potential, BernoulliPotential):
        g_bar = np.repeat(np.asarray(potential.probs)[:, None], n_cells, axis=1)
    elif isinstance(potential, ConformalPowerPotential):
        g_bar = np.stack([_avg_weight(m, potential.tau, lo, hi) for m in system.maps])
    elif isinstance(potential, ClosedFormDensityPotential):
        tau = DENSITY_CATALOG[potential.name]["tau"]
        g_bar = np.stack([_avg_weight(m, tau, lo, hi) for m in system.maps])
    else:
        raise TypeError(f"unsupported potential {potential!r}")

    n_prefix = n_cells // mm
    prefix_idx = np.arange(n_cells) // mm

    def forward(f):
        out = np.zeros(n_cells)
        for j in range(mm):
            out += g_bar[j] * f[j * n_prefix + prefix_idx]
        return out

    def adjoint(w):
        out = np.empty(n_cells)
        for j in range(mm):
            out[j * n_prefix : (j + 1) * n_prefix] = (g_bar[j] * w).reshape(n_prefix, mm).sum(axis=1)
        return out

    h = np.ones(n_cells)
    nu = lengths / lengths.sum()
    lam = 1.0
    iterations = 0
    converged = False
    for it in range(1, max_iter + 1):
        iterations = it
        h_new = forward(h)
        lam_h = np.max(np.abs(h_new))
        h_new = h_new / lam_h
        nu_new = adjoint(nu)
        lam_nu = nu_new.sum()
        nu_new = nu_new / lam_nu
        delta = max(np.max(np.abs(h_new - h)), np.max(np.abs(nu_new - nu)))
        h, nu = h_new, nu_new
        lam = lam_nu
        if delta < tol:
            converged = True
            break

    # Rayleigh eigenvalue and normalization
    denom = float(h @ nu)
    lam = float((forward(h) @ nu) / denom)
    nu = nu / nu.sum()
    h = h / float(h @ nu)
    residual = float(np.max(np.abs(forward(h) - lam * h)))
    adj = adjoint(nu)
    adjoint_residual = float(np.max(np.abs(adj - lam * nu)))
    mu_table = h * nu
    mu_table = mu_table / mu_table.sum()
    return EigenReport(
        eigenvalue=lam,
        depth=depth,
        h_values=h,
        nu_weights=nu,
        mu_table=mu_table,
        residual=residual,
        adjoint_residual=adjoint_residual,
        iterations=iterations,
        converged=converged,
        cell_lo=lo,
        cell_hi=hi,
        cell_anchor=anchor,
    )


class SpectralBackend:
    """Measure backend backed by an ``EigenReport`` cylinder-mass table.

    Words at most ``depth`` long are read off the table exactly (by
    marginalization).  Longer words are extended multiplicatively with the
    deepest tabled next-symbol conditionals (a sliding context of depth-1
    symbols); that extension is an approximation intended for samplers and
    orbit machinery, not for exact mixing computations, which are restricted
    to the table depth.
    """

    def __init__(self, system: IfsSystem, report: EigenReport, potential: PotentialSpec = None):
        self.system = system
        self.report = report
        self.potential = potential
        self.max_depth = report.depth
        self._tables = {report.depth: report.mu_table}

    def level_table(self, k: int) -> np.ndarray:
        if k > self.max_depth:
            raise ValueError(f"level {k} beyond table depth {self.max_depth}")
        if k not in self._tables:
            mm = self.system.m
            deep = self._tables[self.max_depth]
            self._tables[k] = deep.reshape(mm ** k, -1).sum(axis=1)
        return self._tables[k]

    def _conditional_table(self) -> np.ndarray:
        if not hasattr(self, "_cond"):
            mm = self.system.m
            deep = self.level_table(self.max_depth)
            ctx = self.level_table(self.max_depth - 1)
            self._cond = deep.reshape(-1, mm) / ctx[:, None]
        return self._cond

    def cylinder_measure(self, word: FiniteWord) -> float:
        k = len(word)
        if k <= self.max_depth:
            return float(self.level_table(k)[word_index(word)])
        head = FiniteWord(word.symbols[: self.max_depth], word.m)
        mass = self.cylinder_measure(head)
        cond = self._conditional_table()
        mm = self.system.m
        ctx_mod = mm ** (self.max_depth - 1)
        ctx = word_index(head) % ctx_mod
        for s in word.symbols[self.max_depth :]:
            mass *= cond[ctx, s - 1]
            ctx = (ctx % (ctx_mod // mm)) * mm + (s - 1) if ctx_mod > 1 else 0
        return float(mass)

    def conditional_next(self, word: FiniteWord) -> np.ndarray:
        k = len(word)
        mm = self.system.m
        if k < self.max_depth:
            child = self.level_table(k + 1)
            parent = self.level_table(k)
            i = word_index(word)
            return child[i * mm : (i + 1) * mm] / parent[i]
        cond = self._conditional_table()
        ctx = 0
        for s in word.symbols[-(self.max_depth - 1) :] if self.max_depth > 1 else ():
            ctx = ctx * mm + (s - 1)
        return cond[ctx].copy()

    def h_at(self, x: float) -> float:
        """Piecewise-constant density value at a point (cell lookup)."""
        idx = np.searchsorted(self.report.cell_lo, x, side="right") - 1
        idx = int(np.clip(idx, 0, len(self.report.h_values) - 1))
        return float(self.report.h_values[idx])

    def gibbs_data(self):
        pot = self.potential
        if isinstance(pot, BernoulliPotential):
            probs = np.asarray(pot.probs)
            return self.report.eigenvalue, (lambda x: 1.0), [
                (lambda x, p=p: p) for p in probs
            ]
        tau = pot.tau if isinstance(pot, ConformalPowerPotential) else DENSITY_CATALOG[pot.name]["tau"]
        gs = []
        for m in self.system.maps:
            if isinstance(m, Similarity2D):
                gs.append(lambda x, sc=m.scale, tau=tau: sc ** tau)
            else:
                p, q, r, s = m.matrix
                det = abs(p * s - q * r)
                gs.append(lambda x, det=det, r=r, s=s, tau=tau: (det / (r * x + s) ** 2) ** tau)
        return self.report.eigenvalue, self.h_at, gs


MeasureBackend = Union[BernoulliBackend, DensityBackend, SpectralBackend]


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def cylinder_measure(backend: MeasureBackend, word: FiniteWord) -> float:
    """Mass of the cylinder of a finite word under the backend's measure.

    ``word`` may be a :class:`FiniteWord` or a bare symbol tuple.
    """
    if not isinstance(word, FiniteWord):
        word = FiniteWord(tuple(word), backend.system.m)
    return backend.cylinder_measure(word)


def conditional_next(backend: MeasureBackend, word: FiniteWord) -> np.ndarray:
    """Next-symbol conditional distribution given a prefix word."""
    return backend.conditional_next(word)


def verify_gibbs_property(backend: MeasureBackend, depth: int, tail_symbol: int = 1) -> dict:
    """Compare cylinder masses against normalized weight products.

    The normalized branch weight is gtilde_j(x) = g_j(x) h(phi_j x)/(R h(x));
    the product along a word, evaluated at nested anchor points with tail
    ``tail_symbol``^infinity, approximates the cylinder mass up to bounded
    distortion.  Returns the extreme mass/weight ratios over all words of
    length <= depth.
    """
    system = backend.system
    R, h, gs = backend.gibbs_data()
    base = system.apply_word(FiniteWord((tail_symbol,) * 40, system.m), system.base_point()).x \
        if system.dim == 1 else None
    if system.dim != 1:
        raise ValueError("the verification walk is implemented for 1-D systems")

    def gtilde(j, x):
        fx = _moebius_apply(system.maps[j - 1].matrix, x)
        return gs[j - 1](x) * h(fx) / (R * h(x))

    ratios = []
    level = [(0, base, 1.0)]  # (word index, anchor point of the word's tail, weight)
    for ell in range(1, depth + 1):
        table = backend.level_table(ell)
        block = system.m ** (ell - 1)
        nxt = []
        for idx, pt, w in level:
            for j in range(1, system.m + 1):
                w2 = w * gtilde(j, pt)
                pt2 = _moebius_apply(system.maps[j - 1].matrix, pt)
                idx2 = (j - 1) * block + idx
                ratios.append(float(table[idx2]) / w2)
                nxt.append((idx2, pt2, w2))
        level = nxt
    ratios = np.asarray(ratios)
    return {
        "max_ratio": float(ratios.max()),
        "min_ratio": float(ratios.min()),
        "depth": depth,
        "count": int(ratios.size),
    }


def mixing_coeff_cylinders(backend: MeasureBackend, depth_k: int, n: int) -> float:
    """Uniform dependence coefficient between a depth-n block and the rest.

    For 1 <= n <= depth_k this is
        max_{|I| = n, |J| = depth_k - n} | mu([I.J]) / mu([J']) - mu([I]) |
    where J' ranges with J as the trailing block; for n = 0 it degenerates to
    1 - min_{|I| = depth_k} mu([I]) (total dependence on the full block).
    Product measures give exactly 0 for every n >= 1.
    """
    if depth_k < 1:
        raise ValueError("depth_k must be >= 1")
    if n < 0 or n > depth_k:
        raise ValueError("need 0 <= n <= depth_k")
    if getattr(backend, "max_depth", None) is not None and depth_k > backend.max_depth:
        raise ValueError("depth_k beyond the backend's exact table depth")
    mm = backend.system.m
    _check_level_size(mm, depth_k)
    table = backend.level_table(depth_k)
    if n == 0:
        return float(1.0 - table.min())
    if n == depth_k:
        return 0.0
    rows = mm ** n
    T = table.reshape(rows, -1)
    marg_head = backend.level_table(n)
    marg_tail = backend.level_table(depth_k - n)
    return float(np.max(np.abs(T / marg_tail[None, :] - marg_head[:, None])))
