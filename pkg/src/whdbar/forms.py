"""(0,q)-forms with multi-index bookkeeping, pullbacks, and induced norms.

A form is stored as a map from ascending multi-indexes J to coefficient
functions f_J on C^n, together with a declared compact-support radius.
Coefficients may be parsed expressions (`whdbar.expr.CoeffExpr`), in which
case the antiholomorphic differential is available symbolically; arbitrary
callables fall back to the finite-difference differential `dbar_fd`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import expr as _expr
from .errors import DegreeOverflow, DuplicateIndex, StencilOutOfDomain
from .expr import CoeffExpr
from .variety import Chart, WeightVector

__all__ = [
    "MultiIndex",
    "AntiForm",
    "ascending_indices",
    "sign_perm",
    "beta_sum",
    "aleph_multiplier",
    "pullback",
    "pullback_coeffs_at",
    "pullback_covector",
    "dbar_expr",
    "dbar_fd",
    "covector_norm",
    "pointwise_norm",
    "lp_norm",
]


class MultiIndex(tuple):
    """Strictly ascending tuple of 1-based coordinate indices."""

    def __new__(cls, entries=()):
        entries = tuple(int(e) for e in entries)
        if any(e < 1 for e in entries):
            raise ValueError(f"indices are 1-based, got {entries}")
        if any(a >= b for a, b in zip(entries, entries[1:])):
            raise ValueError(f"multi-index must be strictly ascending: {entries}")
        return super().__new__(cls, entries)

    @property
    def degree(self) -> int:
        return len(self)

    def remove(self, j: int) -> "MultiIndex":
        if j not in self:
            raise ValueError(f"{j} not in {self}")
        return MultiIndex(e for e in self if e != j)


def ascending_indices(n: int, q: int):
    """All ascending multi-indexes of length q over 1..n."""
    return (MultiIndex(c) for c in itertools.combinations(range(1, n + 1), q))


def sign_perm(j: int, K) -> int:
    """Sign of the permutation sorting the tuple (j, K) ascending."""
    if j in K:
        raise DuplicateIndex(f"index {j} already in {tuple(K)}")
    return -1 if sum(1 for k in K if k < j) % 2 else 1


def insert_index(j: int, K) -> tuple[int, "MultiIndex"]:
    """(sign, sorted union) for wedging dz_j into dz_K."""
    s = sign_perm(j, K)
    return s, MultiIndex(sorted((j, *K)))


def beta_sum(J, beta) -> int:
    """Sum of the weights over the multi-index."""
    b = beta.beta if isinstance(beta, WeightVector) else tuple(beta)
    if len(J) == 0:
        raise ValueError("beta_sum needs a nonempty multi-index")
    return int(sum(b[j - 1] for j in J))


Coefficient = Callable[[np.ndarray], complex]


def _zero_coeff(z):
    z = np.asarray(z)
    if z.ndim <= 1:
        return 0j
    return np.zeros(z.shape[:-1], dtype=complex)


def _combine_coeffs(parts):
    """Linear combination of coefficient callables; stays symbolic when it can."""
    parts = [(complex(c), f) for c, f in parts if c != 0]
    if not parts:
        return _expr.const_expr(0)
    if all(isinstance(f, CoeffExpr) for _, f in parts):
        return _expr.combine(parts)

    def combined(z, _parts=tuple(parts)):
        out = None
        for c, f in _parts:
            v = np.asarray(f(z), dtype=complex) * c
            out = v if out is None else out + v
        return out if out.shape else complex(out)

    return combined


@dataclass(frozen=True, eq=False)
class AntiForm:
    """A (0,q)-form sum_J f_J dz[J]-bar with compactly supported coefficients."""

    n: int
    degree: int
    coeffs: Mapping[MultiIndex, Coefficient]
    support_radius: float

    def __post_init__(self):
        clean = {}
        for J, f in self.coeffs.items():
            J = MultiIndex(J)
            if J.degree != self.degree:
                raise ValueError(f"key {J} has degree {J.degree}, expected {self.degree}")
            if J and J[-1] > self.n:
                raise ValueError(f"key {J} exceeds ambient dimension {self.n}")
            if isinstance(f, CoeffExpr) and f.is_zero():
                continue
            clean[J] = f
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def zero(cls, n: int, q: int, support_radius: float = np.inf) -> "AntiForm":
        return cls(n, q, {}, support_radius)

    @classmethod
    def from_expressions(cls, n: int, q: int, coeffs: Mapping, support_radius: float) -> "AntiForm":
        parsed = {}
        for key, text in coeffs.items():
            if isinstance(key, str):
                key = MultiIndex(int(p) for p in key.split(",") if p.strip())
            parsed[MultiIndex(key)] = (
                text if isinstance(text, CoeffExpr) else CoeffExpr.parse(text)
            )
        return cls(n, q, parsed, support_radius)

    def coefficient(self, J) -> Coefficient:
        return self.coeffs.get(MultiIndex(J), _zero_coeff)

    def evaluate(self, J, z):
        return self.coefficient(J)(np.asarray(z, dtype=complex))

    def components_at(self, z) -> dict[MultiIndex, complex]:
        z = np.asarray(z, dtype=complex)
        return {J: complex(f(z)) for J, f in self.coeffs.items()}

    def is_expression_form(self) -> bool:
        return all(isinstance(f, CoeffExpr) for f in self.coeffs.values())

    def __add__(self, other: "AntiForm") -> "AntiForm":
        if (self.n, self.degree) != (other.n, other.degree):
            raise ValueError("cannot add forms of different shape")
        keys = set(self.coeffs) | set(other.coeffs)
        coeffs = {}
        for J in keys:
            parts = []
            if J in self.coeffs:
                parts.append((1.0, self.coeffs[J]))
            if J in other.coeffs:
                parts.append((1.0, other.coeffs[J]))
            coeffs[J] = _combine_coeffs(parts)
        R = max(self.support_radius, other.support_radius)
        return AntiForm(self.n, self.degree, coeffs, R)

    def scaled(self, c: complex) -> "AntiForm":
        coeffs = {J: _combine_coeffs([(c, f)]) for J, f in self.coeffs.items()}
        return AntiForm(self.n, self.degree, coeffs, self.support_radius)

    def __rmul__(self, c) -> "AntiForm":
        return self.scaled(complex(c))


# ---------------------------------------------------------------------------
# the multiplier of the solution operators
# ---------------------------------------------------------------------------

def aleph_multiplier(J, z, beta, mode: str = "weighted") -> dict[MultiIndex, complex]:
    """Coefficients of the multiplier covector, keyed by K = J minus {j}.

    Weighted mode emits beta_j * conj(z_j) / sign(j, K) for each j in J.
    Cone mode is the literal homogeneous-case transcription where the factor
    beta_j is replaced by q = |J|; see the decisions ledger, the solvers use
    the weighted multiplier throughout.
    """
    J = MultiIndex(J)
    if J.degree < 1:
        raise ValueError("multiplier needs degree q >= 1")
    z = np.asarray(z, dtype=complex)
    b = beta.beta if isinstance(beta, WeightVector) else tuple(beta)
    out: dict[MultiIndex, complex] = {}
    for j in J:
        K = J.remove(j)
        factor = len(J) if mode == "cone" else b[j - 1]
        out[K] = factor * np.conjugate(z[j - 1]) / sign_perm(j, K)
    return out


# ---------------------------------------------------------------------------
# differentials
# ---------------------------------------------------------------------------

def dbar_expr(form: AntiForm) -> AntiForm:
    """Exact antiholomorphic differential of an expression-coefficient form."""
    if not form.is_expression_form():
        raise TypeError("dbar_expr needs CoeffExpr coefficients; use dbar_fd")
    q = form.degree
    out: dict[MultiIndex, list] = {}
    for K, f in form.coeffs.items():
        for j in range(1, form.n + 1):
            if j in K:
                continue
            s, L = insert_index(j, K)
            out.setdefault(L, []).append((s, f.dbar(j)))
    coeffs = {L: _expr.combine(parts) for L, parts in out.items()}
    return AntiForm(form.n, q + 1, coeffs, form.support_radius)


def _fd_dbar(f: Coefficient, j: int, z: np.ndarray, h: float) -> complex:
    """4th-order central-difference d f / d conj(z_j) at a point."""
    z = np.asarray(z, dtype=complex)
    e = np.zeros(z.shape[-1], dtype=complex)
    e[j - 1] = 1.0
    shifts = np.array([-2.0, -1.0, 1.0, 2.0])
    weights = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * h)
    try:
        fx = sum(w * f(z + (c * h) * e) for c, w in zip(shifts, weights))
        fy = sum(w * f(z + (c * h) * (1j * e)) for c, w in zip(shifts, weights))
    except (ValueError, IndexError) as ex:
        raise StencilOutOfDomain(str(ex)) from ex
    return 0.5 * (np.asarray(fx) + 1j * np.asarray(fy))


def dbar_fd(form: AntiForm, h: float = 1e-2) -> AntiForm:
    """Finite-difference antiholomorphic differential (O(h^4) stencils)."""
    if h <= 0:
        raise ValueError("step must be positive")
    q = form.degree
    plans: dict[MultiIndex, list] = {}
    for K, f in form.coeffs.items():
        for j in range(1, form.n + 1):
            if j in K:
                continue
            s, L = insert_index(j, K)
            plans.setdefault(L, []).append((s, j, f))

    def make_coeff(parts):
        def coeff(z, _parts=tuple(parts)):
            return sum(s * _fd_dbar(f, j, z, h) for s, j, f in _parts)

        return coeff

    coeffs = {L: make_coeff(parts) for L, parts in plans.items()}
    return AntiForm(form.n, q + 1, coeffs, form.support_radius)


# ---------------------------------------------------------------------------
# pullback under a chart
# ---------------------------------------------------------------------------

def _minors(Jmat: np.ndarray, rows, cols) -> np.ndarray:
    """det of the (rows, cols) submatrices of a stack (N, n, d) of Jacobians."""
    sub = Jmat[:, rows][:, :, cols]
    k = sub.shape[-1]
    if k == 0:
        return np.ones(Jmat.shape[0], dtype=complex)
    if k == 1:
        return sub[:, 0, 0]
    if k == 2:
        return sub[:, 0, 0] * sub[:, 1, 1] - sub[:, 0, 1] * sub[:, 1, 0]
    return np.linalg.det(sub)


def pullback_coeffs_at(omega: AntiForm, chart: Chart, s_arr, x=None):
    """Coefficients of the chart pullback at (s, x), vectorized over s.

    Returns a dict keyed by ascending multi-indexes over the d chart
    coordinates (1 = the scaling coordinate), each value an array over s.
    """
    s_arr = np.atleast_1d(np.asarray(s_arr, dtype=complex))
    pts = chart.point(s_arr, x)
    Jb = chart.jacobian_batch(s_arr, x)
    d = chart.d
    q = omega.degree
    if q > d:
        raise DegreeOverflow(f"(0,{q})-form on a {d}-dimensional chart")
    out = {A: np.zeros(s_arr.shape, dtype=complex) for A in ascending_indices(d, q)}
    for J, f in omega.coeffs.items():
        vals = np.asarray(f(pts), dtype=complex)
        rows = [j - 1 for j in J]
        for A in out:
            cols = [a - 1 for a in A]
            out[A] += vals * np.conjugate(_minors(Jb, rows, cols))
    return out


def pullback(omega: AntiForm, chart: Chart) -> AntiForm:
    """Pull a form on the variety back to the chart domain in C^d.

    The result's points are chart parameters w = (s, x_1, .., x_{d-1}).
    """
    d = chart.d
    if omega.degree > d:
        raise DegreeOverflow(f"(0,{omega.degree})-form on a {d}-dimensional chart")

    def make_coeff(A):
        def coeff(w):
            w = np.asarray(w, dtype=complex)
            single = w.ndim == 1
            W = w.reshape(1, -1) if single else w
            vals = np.empty(W.shape[0], dtype=complex)
            for i, row in enumerate(W):
                got = pullback_coeffs_at(omega, chart, row[0], row[1:])
                vals[i] = got[A][0]
            return complex(vals[0]) if single else vals

        return coeff

    coeffs = {A: make_coeff(A) for A in ascending_indices(d, omega.degree)}
    return AntiForm(d, omega.degree, coeffs, np.inf)


def pullback_covector(comps: Mapping, chart: Chart, s, x=None) -> dict[MultiIndex, complex]:
    """Pull back a single covector (given by ambient components) at (s, x)."""
    comps = {MultiIndex(J): complex(v) for J, v in comps.items()}
    q = next(iter(comps)).degree if comps else 0
    if q == 0:
        val = sum(comps.values()) if comps else 0j
        return {MultiIndex(()): complex(val)}
    Jb = chart.jacobian_batch(np.asarray([s], dtype=complex), x)
    out = {}
    for A in ascending_indices(chart.d, q):
        cols = [a - 1 for a in A]
        total = 0j
        for J, v in comps.items():
            rows = [j - 1 for j in J]
            total += v * np.conjugate(_minors(Jb, rows, cols)[0])
        out[A] = total
    return out


# ---------------------------------------------------------------------------
# induced norms
# ---------------------------------------------------------------------------

def covector_norm(comps: Mapping, G: np.ndarray) -> float:
    """Pointwise norm of a (0,q)-covector from chart components and Gram matrix.

    Uses the q-th compound of the conjugated inverse metric; for q = 0 this
    is the modulus of the single component.
    """
    comps = {MultiIndex(J): complex(v) for J, v in comps.items()}
    if not comps:
        return 0.0
    q = next(iter(comps)).degree
    if q == 0:
        return abs(comps[MultiIndex(())])
    M = np.conjugate(np.linalg.inv(G))
    total = 0j
    for A, ga in comps.items():
        rows = [a - 1 for a in A]
        for B, gb in comps.items():
            cols = [b - 1 for b in B]
            sub = M[np.ix_(rows, cols)]
            total += ga * np.conjugate(gb) * np.linalg.det(sub)
    return float(np.sqrt(max(total.real, 0.0)))


def pointwise_norm(omega: AntiForm, z, chart: Chart, params=None) -> float:
    """Norm of the restriction of omega to the tangent space at z = Pi(s, x).

    `params` may carry the chart parameters; otherwise the chart is inverted
    numerically at z.
    """
    if params is None:
        s, x = chart.invert(np.asarray(z, dtype=complex))
    else:
        s, x = params
    comps = pullback_coeffs_at(omega, chart, s, x)
    comps = {A: complex(v[0]) for A, v in comps.items()}
    G = chart.gram(s, x)
    return covector_norm(comps, G)


def lp_norm(omega, V, R: float, p, sampler=None, **kw):
    """L^p norm of a form over the variety within the ball of radius R.

    Thin wrapper over `whdbar.measure.lp_norm`; see there for sampler
    semantics and the returned estimate object.
    """
    from . import measure

    return measure.lp_norm(omega, V, R, p, sampler=sampler, **kw)
