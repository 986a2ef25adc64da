"""Franklin systems on the torus: classical {f_n}, periodic, and the folded
reconstruction {u_n}, together with kernels and exponential-decay diagnostics.

Each f_n is the unique (up to sign) normalized element of L_n orthogonal to
L_{n-1}; it is obtained by projecting the newly inserted nodal hat onto the
coarser space through the banded Gram system of the hat basis and subtracting.
The sign is fixed by f_n(t_n) > 0 at the new node t_n.
"""

from __future__ import annotations

import math
import threading
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import solveh_banded

from .dyadic import build_nodes, mod1, to_fraction, torus_distance
from .pwl import PiecewiseLinear, TorusFunction, inner_product

SQRT3 = math.sqrt(3.0)

VARIANTS = ("classical", "periodic", "reconstructed")


class ConstructionError(RuntimeError):
    """Signals a singular Gram solve or a non-1D orthogonal complement."""


# -- mass matrices of the hat bases ------------------------------------------

def _path_mass(spacings: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal mass matrix of the nodal basis on an open chain.

    m arcs join m+1 coordinates (the node-0 value is split into the 0+ and 0-
    coordinates, which breaks the cycle).  Returns (diag, superdiag).
    """
    m = len(spacings)
    diag = np.zeros(m + 1)
    diag[:-1] += spacings / 3.0
    diag[1:] += spacings / 3.0
    return diag, spacings / 6.0


def _cyclic_mass(spacings: np.ndarray) -> sp.csc_matrix:
    """Mass matrix of the continuous nodal basis on a cyclic mesh of m nodes."""
    m = len(spacings)
    i = np.arange(m)
    j = (i + 1) % m
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([i, j, j, i])
    vals = np.concatenate([spacings / 3.0, spacings / 3.0, spacings / 6.0, spacings / 6.0])
    return sp.coo_matrix((vals, (rows, cols)), shape=(m, m)).tocsc()


def _quad_form_tridiag(diag: np.ndarray, off: np.ndarray, c: np.ndarray) -> float:
    return float(np.dot(diag, c * c) + 2.0 * np.dot(off, c[:-1] * c[1:]))


def _classical_spacings(nodes: tuple[Fraction, ...]) -> np.ndarray:
    pts = [float(t) for t in nodes] + [1.0]
    return np.diff(np.array(pts))


# -- basis construction --------------------------------------------------------

@dataclass
class FranklinBasis:
    """Append-only, memoized family of Franklin functions for one variant."""

    variant: str = "classical"
    functions: list = field(default_factory=list)
    gram_defect_seen: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        self._lock = threading.Lock()
        self._classical = None
        if self.variant == "reconstructed":
            self._classical = FranklinBasis("classical")

    @property
    def min_index(self) -> int:
        return 1 if self.variant == "periodic" else 0

    def function(self, n: int) -> PiecewiseLinear:
        if n < self.min_index:
            raise ValueError(f"{self.variant} system starts at index {self.min_index}")
        with self._lock:
            while len(self.functions) <= n - self.min_index:
                self.functions.append(self._construct(len(self.functions) + self.min_index))
        return self.functions[n - self.min_index]

    def extend(self, n_max: int) -> None:
        self.function(n_max)

    def _construct(self, n: int) -> PiecewiseLinear:
        if self.variant == "classical":
            return self._construct_classical(n)
        if self.variant == "periodic":
            return self._construct_periodic(n)
        return reconstruct_u(n, self._classical)

    def _construct_classical(self, n: int) -> PiecewiseLinear:
        if n == 0:
            return PiecewiseLinear((Fraction(0),), (1.0,))
        if n == 1:
            # f_1(x) = sqrt(3)(2x - 1)
            return PiecewiseLinear((Fraction(0),), (-SQRT3,), SQRT3)
        prev = build_nodes(n - 1)
        cur = build_nodes(n)
        t_new = cur.new_node
        ell_prev = _classical_spacings(prev.nodes)
        diag, off = _path_mass(ell_prev)

        # the refined arc: t_new bisects [s_i0, s_{i0+1}] (coords i0, i0+1)
        i0 = bisect_right(prev.nodes, t_new) - 1
        arc = ell_prev[i0]
        r = np.zeros(n)
        r[i0] += arc / 4.0
        r[i0 + 1] += arc / 4.0

        ab = np.zeros((2, n))
        ab[0, 1:] = off
        ab[1, :] = diag
        try:
            a = solveh_banded(ab, r)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise ConstructionError(f"singular Gram system at n={n}") from exc

        # nodal coordinates on Pi_n: old node i keeps value -a_i, the new node
        # gets 1 minus the midpoint value of the projection, 0- keeps -a_last
        c = np.zeros(n + 1)
        pos = i0 + 1
        for i in range(n - 1):
            c[i if i <= i0 else i + 1] = -a[i]
        c[n] = -a[n - 1]
        c[pos] = 1.0 - 0.5 * (a[i0] + a[i0 + 1])

        dn, on = _path_mass(_classical_spacings(cur.nodes))
        nrm2 = _quad_form_tridiag(dn, on, c)
        if nrm2 <= 0:
            raise ConstructionError(f"degenerate complement at n={n}")
        c /= math.sqrt(nrm2)
        if c[pos] < 0:
            c = -c
        return PiecewiseLinear(cur.nodes, c[:n], c[n])

    def _construct_periodic(self, n: int) -> PiecewiseLinear:
        if n == 1:
            return PiecewiseLinear((Fraction(0),), (1.0,))
        prev = build_nodes(n - 1)
        cur = build_nodes(n)
        t_new = cur.new_node
        m = n - 1  # coordinates of the continuous space on Pi_{n-1}
        ell_prev = np.empty(m)
        pts = [float(t) for t in prev.nodes] + [1.0]
        ell_prev[:] = np.diff(np.array(pts))

        i0 = bisect_right(prev.nodes, t_new) - 1
        arc = ell_prev[i0]
        r = np.zeros(m)
        r[i0 % m] += arc / 4.0
        r[(i0 + 1) % m] += arc / 4.0

        gram = _cyclic_mass(ell_prev)
        if m == 1:
            a = np.array([r[0] / gram[0, 0]])
        else:
            a = spla.spsolve(gram, r)
        if not np.all(np.isfinite(a)):
            raise ConstructionError(f"singular periodic Gram system at n={n}")

        c = np.zeros(n)
        pos = i0 + 1
        for i in range(m):
            c[i if i <= i0 else i + 1] = -a[i]
        c[pos] = 1.0 - 0.5 * (a[i0 % m] + a[(i0 + 1) % m])

        pts_cur = [float(t) for t in cur.nodes] + [1.0]
        mass = _cyclic_mass(np.diff(np.array(pts_cur)))
        nrm2 = float(c @ (mass @ c))
        if nrm2 <= 0:
            raise ConstructionError(f"degenerate periodic complement at n={n}")
        c /= math.sqrt(nrm2)
        if c[pos] < 0:
            c = -c
        return PiecewiseLinear(cur.nodes, c)


_BASES: dict[str, FranklinBasis] = {}
_BASES_LOCK = threading.Lock()


def get_basis(variant: str = "classical") -> FranklinBasis:
    with _BASES_LOCK:
        if variant not in _BASES:
            _BASES[variant] = FranklinBasis(variant)
        return _BASES[variant]


def franklin_function(n: int, variant: str = "classical") -> PiecewiseLinear:
    return get_basis(variant).function(n)


def reconstruct_u(n: int, basis: FranklinBasis | None = None) -> PiecewiseLinear:
    """u_n(x) = f_n(2x) on [0,1/2), f_n(2-2x) on (1/2,1), u_n(1/2) = f_n(0-).

    Continuous on the torus; even in the symmetric coordinates x <-> -x.
    """
    f = (basis or get_basis("classical")).function(n)
    half = Fraction(1, 2)
    bps: list[Fraction] = []
    vals: list[float] = []
    for t in f.breakpoints:
        bps.append(t / 2)
        vals.append(f(t))
    bps.append(half)
    vals.append(f.wrap_value)
    for t in f.breakpoints:
        if t > 0:
            bps.append(1 - t / 2)
            vals.append(f(t))
    return PiecewiseLinear(bps, vals)


def u_function(n: int) -> PiecewiseLinear:
    return get_basis("reconstructed").function(n)


# -- kernels -------------------------------------------------------------------

def _kernel_range(level: int, variant: str) -> range:
    if variant == "periodic":
        return range(1, (1 << level) + 1)
    return range(0, (1 << level) + 1)


def kernel(level: int, x, t, variant: str = "classical") -> float:
    """K_level(x, t) = sum of f_k(x) f_k(t) over the dyadic block of the level."""
    basis = get_basis(variant)
    return math.fsum(basis.function(k)(x) * basis.function(k)(t) for k in _kernel_range(level, variant))


def kernel_row(level: int, x, variant: str = "classical") -> PiecewiseLinear:
    """t -> K_level(x, t) as a function on the torus."""
    basis = get_basis(variant)
    ks = list(_kernel_range(level, variant))
    funcs = [basis.function(k) for k in ks]
    weights = [fn(x) for fn in funcs]
    mesh = sorted(set().union(*[fn.breakpoints for fn in funcs]))
    vals = [math.fsum(w * fn(p) for w, fn in zip(weights, funcs)) for p in mesh]
    wrap = math.fsum(w * fn.wrap_value for w, fn in zip(weights, funcs))
    return PiecewiseLinear(mesh, vals, wrap)


# -- Gram diagnostics ------------------------------------------------------------

def gram_matrix(variant: str, n_max: int) -> np.ndarray:
    """Exact pairwise inner products of the first functions via the common mesh."""
    basis = get_basis(variant)
    basis.extend(n_max)
    funcs = [basis.function(k) for k in range(basis.min_index, n_max + 1)]
    mesh = sorted(set().union(*[fn.breakpoints for fn in funcs]))
    m = len(mesh)
    nodes = np.array([float(t) for t in mesh])
    split = variant == "classical"  # jump coordinate at 0

    ncoord = m + 1 if split else m
    V = np.zeros((len(funcs), ncoord))
    for i, fn in enumerate(funcs):
        V[i, :m] = [fn(t) for t in mesh]
        if split:
            V[i, m] = fn.wrap_value
    spacings = np.diff(np.concatenate([nodes, [1.0]]))
    if split:
        diag, off = _path_mass(spacings)
        MV = diag * V
        MV[:, :-1] += off * V[:, 1:]
        MV[:, 1:] += off * V[:, :-1]
    else:
        MV = np.asarray((_cyclic_mass(spacings) @ V.T).T)
    return V @ MV.T


def gram_defect(variant: str, n_max: int) -> float:
    g = gram_matrix(variant, n_max)
    return float(np.max(np.abs(g - np.eye(len(g)))))


# -- exponential decay fits ------------------------------------------------------

@dataclass
class DecayFit:
    """Measured geometric envelope of |f_n| (and optionally a kernel row)."""

    n: int
    max_node_ratio: float | None
    ratios: tuple[float, ...]
    c: float | None
    q: float | None
    kernel_c: float | None = None
    kernel_q: float | None = None
    note: str = ""


def _decay_samples(f: PiecewiseLinear, n: int, variant: str):
    """(distance, |f|) node samples for the decay fit of f_n.

    The classical estimate is in line distance on [0, 1] (the system jumps at
    0), so the f(0-) value enters as a sample at x = 1; the periodic variant
    is continuous and uses the torus distance.
    """
    nodes = list(build_nodes(n).nodes)
    t_n = build_nodes(n).new_node
    if variant == "periodic":
        d = [float(torus_distance(t, t_n)) for t in nodes]
        v = [abs(f(t)) for t in nodes]
    else:
        d = [abs(float(t - t_n)) for t in nodes] + [float(1 - t_n)]
        v = [abs(f(t)) for t in nodes] + [abs(f.wrap_value)]
    return np.asarray(d), np.asarray(v)


def fit_decay(n: int, variant: str = "classical", noise_floor: float = 1e-12) -> DecayFit:
    """Per-node geometric decay of |f_n| away from the new node t_n.

    Ratios are successive quotients of the distance-ordered sample envelope
    (max of the at-most-two samples per distance ring), starting one ring away
    from t_n: the sqrt(n) prefactor of the envelope absorbs the peak cell, and
    the geometric rate is what stabilizes across n.  Samples below noise_floor
    times the peak are dropped.  (C, q) is the least-squares fit of log|f_n|
    against n * d over the kept samples.
    """
    if n < 2:
        raise ValueError("decay fit requires n >= 2")
    f = franklin_function(n, variant)
    if n < 4:
        return DecayFit(n, None, (), None, None, note="insufficient nodes")
    d, v = _decay_samples(f, n, variant)
    peak = float(v.max())
    floor = noise_floor * peak

    rings: dict[float, float] = {}
    for di, vi in zip(d, v):
        rings[di] = max(rings.get(di, 0.0), vi)
    dist_sorted = sorted(rings)
    env = [rings[di] for di in dist_sorted]
    ratios: list[float] = []
    for k in range(1, len(env) - 1):  # skip the step adjacent to the peak
        if env[k] <= floor or env[k + 1] <= floor:
            break
        ratios.append(env[k + 1] / env[k])
    max_ratio = max(ratios) if ratios else None
    note = "envelope not decreasing" if any(r >= 1.0 for r in ratios) else ""

    keep = v > floor
    if keep.sum() >= 3:
        slope, intercept = np.polyfit(n * d[keep], np.log(v[keep]), 1)
        c_fit, q_fit = math.exp(intercept) / math.sqrt(n), math.exp(slope)
    else:
        c_fit = q_fit = None
    return DecayFit(n, max_ratio, tuple(ratios), c_fit, q_fit, note=note)


def fit_kernel_decay(level: int, x, variant: str = "classical",
                     noise_floor: float = 1e-12) -> DecayFit:
    """(C', q') fit of |K_level(x, .)| against 2^level * d(t, x)."""
    row = kernel_row(level, x, variant)
    nlev = 1 << level
    center = mod1(to_fraction(x))
    d = np.array([float(torus_distance(t, center)) for t in row.breakpoints])
    v = np.abs(np.array([row(t) for t in row.breakpoints]))
    floor = noise_floor * float(v.max())
    keep = v > floor
    if keep.sum() < 3:
        return DecayFit(nlev, None, (), None, None, note="insufficient kernel samples")
    xx = nlev * d[keep]
    yy = np.log(v[keep])
    slope, intercept = np.polyfit(xx, yy, 1)
    return DecayFit(nlev, None, (), None, None,
                    kernel_c=math.exp(intercept) / nlev, kernel_q=math.exp(slope))
