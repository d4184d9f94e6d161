"""Conformal iterated function systems on the line and the plane.

A system is a finite list of uniformly contracting conformal maps on a box
domain.  Supported map families:

* ``Affine1D``  -- x |-> a*x + b with 0 < |a| < 1;
* ``Moebius1D`` -- x |-> (p*x + q)/(r*x + s), pole outside the domain;
* ``Similarity2D`` -- rotation/reflection + scaling + translation.

Every 1-D map is carried internally as a 2x2 coefficient matrix, so finite
compositions are again single maps and quantities such as cylinder-interval
endpoints and sup-derivatives over an interval are evaluated in closed form
(monotone analysis of (r*x+s)^2), not by sampling.

The module also provides cylinder geometry (attractor pieces K_I indexed by
finite words), empirical contraction constants, open-set-condition checking,
adaptive stopping families, and a JSON round-trip for system specifications.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .symbolic import FiniteWord, PointRd, as_point

__all__ = [
    "Affine1D",
    "Moebius1D",
    "Similarity2D",
    "Box",
    "IfsSystem",
    "CylinderGeometry",
    "apply_word",
    "contraction_constants",
    "lambda_rho",
    "check_osc",
    "system_to_json",
    "system_from_json",
    "middle_third_cantor",
    "moebius_interval_quartet",
    "moebius_interval_pair",
    "sierpinski_triangle",
    "two_line_cantor",
    "builtin_system",
    "BUILTIN_SYSTEMS",
]


# ---------------------------------------------------------------------------
# map variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Affine1D:
    """x |-> a*x + b with 0 < |a| < 1."""

    a: float
    b: float

    def __post_init__(self):
        if not 0.0 < abs(self.a) < 1.0:
            raise ValueError(f"affine coefficient must satisfy 0 < |a| < 1, got {self.a}")

    @property
    def matrix(self) -> tuple:
        return (self.a, self.b, 0.0, 1.0)


@dataclass(frozen=True)
class Moebius1D:
    """x |-> (p*x + q)/(r*x + s) with p*s - q*r != 0."""

    p: float
    q: float
    r: float
    s: float

    def __post_init__(self):
        if self.p * self.s - self.q * self.r == 0.0:
            raise ValueError("degenerate Moebius map: p*s - q*r = 0")

    @property
    def matrix(self) -> tuple:
        return (self.p, self.q, self.r, self.s)


@dataclass(frozen=True)
class Similarity2D:
    """Plane similarity: scale * R(rotation) * (reflect?) + translation."""

    scale: float
    rotation: float
    reflect: bool
    translation: tuple

    def __post_init__(self):
        if not 0.0 < self.scale < 1.0:
            raise ValueError(f"similarity scale must be in (0,1), got {self.scale}")
        object.__setattr__(self, "translation", tuple(float(t) for t in self.translation))
        if len(self.translation) != 2:
            raise ValueError("translation must have 2 components")

    @property
    def linear(self) -> np.ndarray:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        rot = np.array([[c, -s], [s, c]])
        if self.reflect:
            rot = rot @ np.array([[1.0, 0.0], [0.0, -1.0]])
        return self.scale * rot


ConformalMap = Union[Affine1D, Moebius1D, Similarity2D]


# -- evaluation helpers ------------------------------------------------------

def _moebius_apply(mat, x):
    p, q, r, s = mat
    return (p * x + q) / (r * x + s)


def _moebius_compose(m1, m2):
    """Coefficient matrix of map1 composed after map2 (apply m2 first)."""
    p1, q1, r1, s1 = m1
    p2, q2, r2, s2 = m2
    return (
        p1 * p2 + q1 * r2,
        p1 * q2 + q1 * s2,
        r1 * p2 + s1 * r2,
        r1 * q2 + s1 * s2,
    )


_MOEBIUS_ID = (1.0, 0.0, 0.0, 1.0)


def _moebius_det(mat):
    p, q, r, s = mat
    return p * s - q * r


def _moebius_deriv_abs(mat, x):
    p, q, r, s = mat
    return abs(_moebius_det(mat)) / (r * x + s) ** 2


def _moebius_sup_inf_deriv(mat, lo, hi):
    """Exact (sup, inf) of |map'| on [lo, hi] (pole outside the interval)."""
    p, q, r, s = mat
    d = abs(_moebius_det(mat))
    if r == 0.0:
        v = d / s ** 2
        return v, v
    va, vb = (r * lo + s) ** 2, (r * hi + s) ** 2
    if (r * lo + s) * (r * hi + s) <= 0:
        raise ValueError("Moebius pole inside evaluation interval")
    return d / min(va, vb), d / max(va, vb)


def map_apply(m: ConformalMap, x):
    """Apply a map to a point (PointRd / scalar / ndarray of coordinates)."""
    if isinstance(m, (Affine1D, Moebius1D)):
        if isinstance(x, PointRd):
            return PointRd((_moebius_apply(m.matrix, x.coords[0]),))
        return _moebius_apply(m.matrix, x)
    # similarity
    lin = m.linear
    t = np.asarray(m.translation)
    if isinstance(x, PointRd):
        v = lin @ np.asarray(x.coords) + t
        return PointRd(tuple(v))
    xs = np.asarray(x, dtype=float)
    return xs @ lin.T + t


def map_sup_derivative(m: ConformalMap, box: "Box") -> float:
    if isinstance(m, Similarity2D):
        return m.scale
    sup, _ = _moebius_sup_inf_deriv(m.matrix, box.lo[0], box.hi[0])
    return sup


def map_fixed_point(m: ConformalMap, box: "Box") -> PointRd:
    """The fixed point of a single map (contracting on the box, or solvable)."""
    if isinstance(m, Affine1D):
        return PointRd((m.b / (1.0 - m.a),))
    if isinstance(m, Moebius1D):
        p, q, r, s = m.matrix
        # r x^2 + (s - p) x - q = 0
        if r == 0.0:
            return PointRd((q / (s - p),))
        disc = (s - p) ** 2 + 4.0 * r * q
        if disc < 0:
            raise ValueError("Moebius map has no real fixed point")
        roots = [(-(s - p) + sig * math.sqrt(disc)) / (2.0 * r) for sig in (+1.0, -1.0)]
        inside = [x for x in roots if box.lo[0] - 1e-12 <= x <= box.hi[0] + 1e-12]
        if not inside:
            raise ValueError("no fixed point inside the domain")
        return PointRd((inside[0],))
    lin = m.linear
    t = np.asarray(m.translation)
    v = np.linalg.solve(np.eye(2) - lin, t)
    return PointRd(tuple(v))


# ---------------------------------------------------------------------------
# boxes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    """Axis-aligned box, closed; lo/hi are coordinate tuples."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError("box lo/hi dimension mismatch")
        for a, b in zip(self.lo, self.hi):
            if a > b:
                raise ValueError("box with lo > hi")

    @property
    def d(self) -> int:
        return len(self.lo)

    def contains(self, pt: PointRd, slack: float = 0.0) -> bool:
        return all(a - slack <= c <= b + slack for a, b, c in zip(self.lo, self.hi, pt.coords))

    def diameter(self) -> float:
        return math.dist(self.lo, self.hi)

    def overlap_measure(self, other: "Box") -> float:
        """Lebesgue measure of the intersection (length in 1-D, area in 2-D)."""
        out = 1.0
        for a1, b1, a2, b2 in zip(self.lo, self.hi, other.lo, other.hi):
            w = min(b1, b2) - max(a1, a2)
            if w <= 0:
                return 0.0
            out *= w
        return out


def map_box_image(m: ConformalMap, box: Box) -> Box:
    """Image of a box: exact interval for monotone 1-D maps, bounding box of
    the corner images for similarities (exact when rotation is axis-aligned)."""
    if isinstance(m, (Affine1D, Moebius1D)):
        a = _moebius_apply(m.matrix, box.lo[0])
        b = _moebius_apply(m.matrix, box.hi[0])
        return Box((min(a, b),), (max(a, b),))
    corners = np.array(
        [
            [box.lo[0], box.lo[1]],
            [box.lo[0], box.hi[1]],
            [box.hi[0], box.lo[1]],
            [box.hi[0], box.hi[1]],
        ]
    )
    imgs = map_apply(m, corners)
    return Box(tuple(imgs.min(axis=0)), tuple(imgs.max(axis=0)))


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

@dataclass
class IfsSystem:
    """A conformal IFS with domain, optional open-set witness, and metadata.

    ``iterate_power`` is the smallest n0 such that every depth-n0 composition
    has sup-derivative < 1; individual maps may have sup-derivative equal to 1
    as long as some fixed power contracts uniformly.
    ``attractor_diameter`` is a certified [lo, hi] bracket for diam(K); the
    shipped constructors set it exactly.
    """

    maps: List[ConformalMap]
    dim: int
    domain: Box
    attractor_box: Box
    osc_witness: Optional[Box] = None
    iterate_power: int = 1
    attractor_diameter: Tuple[float, float] = None
    name: str = ""

    def __post_init__(self):
        if len(self.maps) < 2:
            raise ValueError("need at least two maps")
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        for m in self.maps:
            if self.dim == 1 and isinstance(m, Similarity2D):
                raise ValueError("2-D map in a 1-D system")
            if self.dim == 2 and not isinstance(m, Similarity2D):
                raise ValueError("1-D map in a 2-D system")
        if self.attractor_diameter is None:
            self.attractor_diameter = (0.0, self.attractor_box.diameter())
        self._validate_contraction()

    # -- basic structure -------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.maps)

    def base_point(self) -> PointRd:
        """Fixed point of the first map: the deterministic projection anchor."""
        return map_fixed_point(self.maps[0], self.domain)

    def _validate_contraction(self):
        """Find/verify the smallest contracting composition power (<= 8)."""
        if self.dim == 2:
            self._kappa = max(m.scale for m in self.maps)
            self._kappa_eff = self._kappa
            if self.iterate_power != 1:
                raise ValueError("2-D similarities contract at power 1")
            return
        lo, hi = self.domain.lo[0], self.domain.hi[0]
        sups = [map_sup_derivative(m, self.domain) for m in self.maps]
        self._kappa = max(sups)
        mats = [m.matrix for m in self.maps]
        level = [_MOEBIUS_ID]
        for n0 in range(1, 9):
            level = [_moebius_compose(a, b) for a in mats for b in level]
            worst = max(_moebius_sup_inf_deriv(mat, lo, hi)[0] for mat in level)
            if worst < 1.0:
                self.iterate_power = n0
                self._kappa_eff = worst ** (1.0 / n0)
                return
        raise ValueError("no composition power up to 8 contracts uniformly")

    @property
    def kappa(self) -> float:
        """max over maps of sup |phi'| on the domain (exact)."""
        return self._kappa

    @property
    def kappa_eff(self) -> float:
        """Per-step contraction rate certified at ``iterate_power`` blocks."""
        return self._kappa_eff

    def depth_for_diameter(self, tol: float) -> int:
        """Smallest depth guaranteeing every cylinder diameter < tol.

        Uses the certified bound |K_I| <= diam(K) * kappa_eff^(|I| - n0),
        rounded up to whole iterate-power blocks.
        """
        if tol <= 0:
            raise ValueError("tol must be positive")
        diam = max(self.attractor_diameter[1], 1e-300)
        if diam < tol:
            return 1
        n0 = self.iterate_power
        block = self._kappa_eff ** n0
        partial = max(1.0, self.kappa) ** (n0 - 1)
        a = math.ceil(math.log(tol / (diam * partial)) / math.log(block))
        return max(1, a) * n0

    # -- words and cylinders ---------------------------------------------
    def apply_word(self, I: FiniteWord, x) -> PointRd:
        return apply_word(self, I, x)

    def word_map(self, I: FiniteWord):
        """The composed map of a word (1-D: single coefficient matrix)."""
        if self.dim == 1:
            mat = _MOEBIUS_ID
            for sym in I:
                mat = _moebius_compose(mat, self.maps[sym - 1].matrix)
            return mat
        lin = np.eye(2)
        t = np.zeros(2)
        for sym in reversed(I.symbols):
            m = self.maps[sym - 1]
            lin2, t2 = m.linear, np.asarray(m.translation)
            t = lin2 @ t + t2
            lin = lin2 @ lin
        return lin, t

    def word_box(self, I: FiniteWord) -> Box:
        """Image of the attractor box under the word's composition."""
        box = self.attractor_box
        for sym in reversed(I.symbols):
            box = map_box_image(self.maps[sym - 1], box)
        return box

    def cylinder_geometry(self, I: FiniteWord) -> "CylinderGeometry":
        anchor = apply_word(self, I, self.base_point())
        if self.dim == 1:
            mat = self.word_map(I)
            klo = self.attractor_box.lo[0]
            khi = self.attractor_box.hi[0]
            a, b = _moebius_apply(mat, klo), _moebius_apply(mat, khi)
            d = abs(b - a)
            scale = 1.0
            dd = (d, d)
        else:
            scale = 1.0
            for sym in I:
                scale *= self.maps[sym - 1].scale
            dd = (scale * self.attractor_diameter[0], scale * self.attractor_diameter[1])
        return CylinderGeometry(word=I, anchor=anchor, diameter=dd)


@dataclass(frozen=True)
class CylinderGeometry:
    """A word, a point of its attractor piece, and a diameter bracket."""

    word: FiniteWord
    anchor: PointRd
    diameter: Tuple[float, float]

    def __post_init__(self):
        lo, hi = self.diameter
        if lo > hi + 1e-15:
            raise ValueError("diameter bracket with lo > hi")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def apply_word(system: IfsSystem, I: FiniteWord, x) -> PointRd:
    """Apply the composition phi_{i1} o ... o phi_{in} (rightmost map first)."""
    pt = as_point(x, system.dim)
    if not system.domain.contains(pt, slack=1e-9):
        raise ValueError(f"point {pt} outside system domain")
    for sym in reversed(I.symbols):
        pt = map_apply(system.maps[sym - 1], pt)
    return pt


def contraction_constants(system: IfsSystem, probe_depth: int) -> dict:
    """kappa (exact) and empirical distortion/geometry constants.

    C1: max distortion sup|phi_I'| / inf|phi_I'| over probed words.
    C2: max of sup|phi_I'| * diam(K) / |K_I| and its reciprocal counterpart
        (comparability of cylinder size with the derivative).
    C3: max |K_I| / (diam(K) * kappa^{|I|}), so |K_I| <= C3' kappa^{|I|} with
        C3' = C3 * diam(K).
    C4: max two-sided defect of |K_{IJ}| vs |K_I| |K_J| / diam(K) over word
        pairs with |I| + |J| <= probe_depth.

    These are lower bounds for the true (existential) constants, valid at the
    probe depth; they are reported together with the depth and must not be
    treated as global suprema.
    """
    if probe_depth < 1:
        raise ValueError("probe_depth must be >= 1")
    if system.dim == 2:
        # Constant-derivative similarities: distortion-free.
        diam = system.attractor_diameter[1]
        scales = {(): 1.0}
        c3 = 0.0
        per_word = {(): diam}
        level = [((), 1.0)]
        for depth in range(1, probe_depth + 1):
            nxt = []
            for word, sc in level:
                for j, mp in enumerate(system.maps, start=1):
                    sc2 = sc * mp.scale
                    nxt.append((word + (j,), sc2))
                    per_word[word + (j,)] = sc2 * diam
                    c3 = max(c3, sc2 * diam / (diam * system.kappa ** depth))
            level = nxt
        c4 = 0.0
        words = list(per_word.items())
        for wi, di in words:
            for wj, dj in words:
                if not wi or not wj or len(wi) + len(wj) > probe_depth:
                    continue
                dij = per_word.get(wi + wj)
                if dij is None:
                    continue
                prod = di * dj / diam
                c4 = max(c4, dij / prod, prod / dij)
        return {
            "kappa": system.kappa,
            "C1": 1.0,
            "C2": 1.0,
            "C3": max(c3, 1e-300),
            "C4": max(c4, 1.0),
            "probe_depth": probe_depth,
        }

    lo, hi = system.attractor_box.lo[0], system.attractor_box.hi[0]
    diam = hi - lo
    c1 = c2 = c3 = 0.0
    lengths = {(): diam}
    # Build all words up to probe_depth with their composed matrices,
    # composing right-to-left: word (i1,...,in) maps x to phi_{i1}(...phi_{in}(x)).
    frontier = [((), _MOEBIUS_ID)]
    all_words = {}
    for depth in range(1, probe_depth + 1):
        nxt = []
        for word, mat in frontier:
            for j, mp in enumerate(system.maps, start=1):
                w2 = word + (j,)
                mat2 = _moebius_compose(mat, mp.matrix) if word else mp.matrix
                nxt.append((w2, mat2))
                all_words[w2] = mat2
        frontier = nxt
    for w2, mat2 in all_words.items():
        depth = len(w2)
        sup_d, inf_d = _moebius_sup_inf_deriv(mat2, lo, hi)
        a, b = _moebius_apply(mat2, lo), _moebius_apply(mat2, hi)
        length = abs(b - a)
        lengths[w2] = length
        c1 = max(c1, sup_d / inf_d)
        c2 = max(c2, sup_d * diam / length, length / (inf_d * diam))
        c3 = max(c3, length / (diam * system.kappa ** depth))
    c4 = 1.0
    items = [(w, l) for w, l in lengths.items() if w]
    for wi, li in items:
        for wj, lj in items:
            if len(wi) + len(wj) > probe_depth:
                continue
            lij = lengths.get(wi + wj)
            if lij is None:
                continue
            prod = li * lj / diam
            c4 = max(c4, lij / prod, prod / lij)
    return {
        "kappa": system.kappa,
        "C1": c1,
        "C2": c2,
        "C3": c3,
        "C4": c4,
        "probe_depth": probe_depth,
    }


def lambda_rho(system: IfsSystem, rho: float) -> List[FiniteWord]:
    """Adaptive stopping family: words whose cylinder diameter first drops
    below ``rho`` (diameter upper bounds drive the test).

    Returns the root word alone when rho is at least the attractor diameter.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    diam_hi = system.attractor_diameter[1]
    if rho >= diam_hi:
        return [FiniteWord((), system.m)]
    out: List[FiniteWord] = []
    stack = [((), diam_hi)]
    guard = 0
    while stack:
        word, _ = stack.pop()
        for j in range(1, system.m + 1):
            w2 = word + (j,)
            geo = system.cylinder_geometry(FiniteWord(w2, system.m))
            hi = geo.diameter[1]
            if hi < rho:
                out.append(FiniteWord(w2, system.m))
            else:
                stack.append((w2, hi))
            guard += 1
            if guard > 5_000_000:
                raise RuntimeError("stopping family enumeration too large")
    out.sort(key=lambda w: w.symbols)
    return out


def check_osc(system: IfsSystem) -> dict:
    """Verify the open-set condition on the declared witness box.

    Image boxes are exact for monotone 1-D maps and axis-aligned similarities;
    'holds' requires every pairwise image overlap below 1e-12 (in length/area).
    """
    if system.osc_witness is None:
        raise ValueError("system has no open-set witness")
    v = system.osc_witness
    images = [map_box_image(m, v) for m in system.maps]
    # containment phi_i(V) within V (closed-box check with tiny slack)
    for img in images:
        for a, b, a0, b0 in zip(img.lo, img.hi, v.lo, v.hi):
            if a < a0 - 1e-12 or b > b0 + 1e-12:
                return {"holds": False, "max_overlap": float("inf")}
    max_overlap = 0.0
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            max_overlap = max(max_overlap, images[i].overlap_measure(images[j]))
    return {"holds": max_overlap < 1e-12, "max_overlap": max_overlap}


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------

def _map_to_json(m: ConformalMap) -> dict:
    if isinstance(m, Affine1D):
        return {"type": "affine1d", "a": m.a, "b": m.b}
    if isinstance(m, Moebius1D):
        return {"type": "moebius1d", "p": m.p, "q": m.q, "r": m.r, "s": m.s}
    return {
        "type": "sim2d",
        "scale": m.scale,
        "rotation": m.rotation,
        "reflect": m.reflect,
        "translation": list(m.translation),
    }


def _map_from_json(d: dict) -> ConformalMap:
    t = d["type"]
    if t == "affine1d":
        return Affine1D(d["a"], d["b"])
    if t == "moebius1d":
        return Moebius1D(d["p"], d["q"], d["r"], d["s"])
    if t == "sim2d":
        return Similarity2D(d["scale"], d["rotation"], bool(d["reflect"]), tuple(d["translation"]))
    raise ValueError(f"unknown map type {t!r}")


def system_to_json(system: IfsSystem) -> dict:
    out = {
        "dim": system.dim,
        "maps": [_map_to_json(m) for m in system.maps],
        "domain": [list(system.domain.lo), list(system.domain.hi)],
        "attractor_box": [list(system.attractor_box.lo), list(system.attractor_box.hi)],
        "iterate_power": system.iterate_power,
        "attractor_diameter": list(system.attractor_diameter),
        "name": system.name,
    }
    if system.osc_witness is not None:
        out["osc_witness"] = [list(system.osc_witness.lo), list(system.osc_witness.hi)]
    return out


def system_from_json(d: dict) -> IfsSystem:
    witness = None
    if "osc_witness" in d and d["osc_witness"] is not None:
        witness = Box(tuple(d["osc_witness"][0]), tuple(d["osc_witness"][1]))
    if "domain" in d:
        domain = Box(tuple(d["domain"][0]), tuple(d["domain"][1]))
    elif witness is not None:
        domain = witness
    else:
        raise ValueError("system specification needs a domain or an osc_witness")
    if "attractor_box" in d:
        abox = Box(tuple(d["attractor_box"][0]), tuple(d["attractor_box"][1]))
    else:
        abox = domain
    diam = tuple(d["attractor_diameter"]) if "attractor_diameter" in d else None
    sys_ = IfsSystem(
        maps=[_map_from_json(md) for md in d["maps"]],
        dim=int(d["dim"]),
        domain=domain,
        attractor_box=abox,
        osc_witness=witness,
        iterate_power=int(d.get("iterate_power", 1)),
        attractor_diameter=diam,
        name=d.get("name", ""),
    )
    return sys_


# ---------------------------------------------------------------------------
# built-in systems
# ---------------------------------------------------------------------------

def middle_third_cantor() -> IfsSystem:
    """{x/3, x/3 + 2/3} on [0,1]: the middle-third Cantor set."""
    return IfsSystem(
        maps=[Affine1D(1.0 / 3.0, 0.0), Affine1D(1.0 / 3.0, 2.0 / 3.0)],
        dim=1,
        domain=Box((0.0,), (1.0,)),
        attractor_box=Box((0.0,), (1.0,)),
        osc_witness=Box((0.0,), (1.0,)),
        attractor_diameter=(1.0, 1.0),
        name="middle_third_cantor",
    )


def moebius_interval_quartet() -> IfsSystem:
    """Four branches x/4, 1/(2(1+x)), (1+x)/(2+x), 2/(2+x) tiling [0,1].

    The attractor is the whole interval; the invariant density for the
    derivative potential (exponent 1) is 1/(log2 * (1+x)).
    """
    return IfsSystem(
        maps=[
            Affine1D(0.25, 0.0),
            Moebius1D(0.0, 1.0, 2.0, 2.0),
            Moebius1D(1.0, 1.0, 1.0, 2.0),
            Moebius1D(0.0, 2.0, 1.0, 2.0),
        ],
        dim=1,
        domain=Box((0.0,), (1.0,)),
        attractor_box=Box((0.0,), (1.0,)),
        osc_witness=Box((0.0,), (1.0,)),
        attractor_diameter=(1.0, 1.0),
        name="moebius_interval_quartet",
    )


def moebius_interval_pair() -> IfsSystem:
    """Two branches x/2 and 1/(1+x); the second has |phi'(0)| = 1, so the
    system contracts only at composition power 2 (same invariant density as
    the four-branch variant, which is its square)."""
    return IfsSystem(
        maps=[Affine1D(0.5, 0.0), Moebius1D(0.0, 1.0, 1.0, 1.0)],
        dim=1,
        domain=Box((0.0,), (1.0,)),
        attractor_box=Box((0.0,), (1.0,)),
        osc_witness=Box((0.0,), (1.0,)),
        attractor_diameter=(1.0, 1.0),
        name="moebius_interval_pair",
    )


_SQRT3 = math.sqrt(3.0)


def sierpinski_triangle() -> IfsSystem:
    """(x + q_i)/2 for the vertices of a unit-side equilateral triangle."""
    verts = [(0.0, 0.0), (1.0, 0.0), (0.5, _SQRT3 / 2.0)]
    return IfsSystem(
        maps=[
            Similarity2D(0.5, 0.0, False, (vx / 2.0, vy / 2.0)) for vx, vy in verts
        ],
        dim=2,
        domain=Box((0.0, 0.0), (1.0, _SQRT3 / 2.0)),
        attractor_box=Box((0.0, 0.0), (1.0, _SQRT3 / 2.0)),
        osc_witness=Box((0.0, 0.0), (1.0, _SQRT3 / 2.0)),
        attractor_diameter=(1.0, 1.0),
        name="sierpinski_triangle",
    )


def two_line_cantor() -> IfsSystem:
    """z/3 - 2i/3 and z/3 + 2i/3 as plane similarities; the attractor is a
    Cantor set contained in the vertical coordinate axis."""
    return IfsSystem(
        maps=[
            Similarity2D(1.0 / 3.0, 0.0, False, (0.0, -2.0 / 3.0)),
            Similarity2D(1.0 / 3.0, 0.0, False, (0.0, 2.0 / 3.0)),
        ],
        dim=2,
        domain=Box((-1.0, -1.0), (1.0, 1.0)),
        attractor_box=Box((0.0, -1.0), (0.0, 1.0)),
        osc_witness=Box((-0.1, -1.05), (0.1, 1.05)),
        attractor_diameter=(2.0, 2.0),
        name="two_line_cantor",
    )


BUILTIN_SYSTEMS = {
    "middle_third_cantor": middle_third_cantor,
    "moebius_interval_quartet": moebius_interval_quartet,
    "moebius_interval_pair": moebius_interval_pair,
    "sierpinski_triangle": sierpinski_triangle,
    "two_line_cantor": two_line_cantor,
}


def builtin_system(name: str) -> IfsSystem:
    """Construct a shipped system by name (see BUILTIN_SYSTEMS)."""
    try:
        return BUILTIN_SYSTEMS[name]()
    except KeyError:
        raise ValueError(f"unknown builtin system {name!r}") from None
