"""Weighted homogeneous subvarieties of C^n and their generalized-cone charts.

A variety is the common zero locus of polynomials Q_k satisfying
Q(s^beta * z) = s^d Q(z) for a fixed positive integer weight vector beta,
where s^beta * z scales the k-th coordinate by s^{beta_k}.  Charts around
regular points are built numerically: the slice variety { Q_k(xi_1, y) = 0 }
is parametrized as a Newton-corrected graph over d-1 of its coordinates and
extended by the scaling action, Pi(s, x) = s^beta * (xi_1, pi(x)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionUnknown,
    MixedDegree,
    NewtonDivergence,
    RankDeficient,
    SingularSlice,
    ZeroCoordinate,
    ZeroPolynomial,
)

__all__ = [
    "WeightVector",
    "WPolynomial",
    "WeightedVariety",
    "SliceVariety",
    "Chart",
    "scale_action",
    "check_weighted_homogeneous",
    "membership",
    "is_regular_point",
    "slice_variety",
    "cone_chart",
    "chart_volume_density",
]

_REGULARITY_RTOL = 1e-8  # singular-value cutoff relative to the largest


@dataclass(frozen=True)
class WeightVector:
    """Integer weights beta_k >= 1 defining the scaling action."""

    beta: tuple[int, ...]

    def __post_init__(self):
        if len(self.beta) < 2:
            raise ValueError("weight vector needs length n >= 2")
        if any((not float(b).is_integer()) or b < 1 for b in self.beta):
            raise ValueError(f"weights must be integers >= 1, got {self.beta}")
        object.__setattr__(self, "beta", tuple(int(b) for b in self.beta))

    @property
    def n(self) -> int:
        return len(self.beta)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.beta, dtype=int)

    def is_cone(self) -> bool:
        return all(b == 1 for b in self.beta)


def scale_action(s, z, beta) -> np.ndarray:
    """The weighted action s^beta * z, componentwise s^{beta_k} z_k.

    `s` may be a scalar or an array; the result broadcasts to
    shape (*s.shape, n).
    """
    b = beta.as_array() if isinstance(beta, WeightVector) else np.asarray(beta, dtype=int)
    z = np.asarray(z, dtype=complex)
    s = np.asarray(s, dtype=complex)
    return s[..., None] ** b * z


class SparsePoly:
    """Sparse polynomial sum_a c_a z^a over C^nvars (no weight bookkeeping)."""

    __slots__ = ("terms", "nvars")

    def __init__(self, terms, nvars: int):
        cleaned = []
        for exps, coeff in terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError("exponent vector length mismatch")
            if any(e < 0 for e in exps):
                raise ValueError("exponents must be nonnegative")
            coeff = complex(coeff)
            if coeff != 0:
                cleaned.append((exps, coeff))
        self.terms = tuple(cleaned)
        self.nvars = nvars

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        batch = z.shape[:-1]
        out = np.zeros(batch, dtype=complex)
        for exps, coeff in self.terms:
            term = np.full(batch, coeff, dtype=complex)
            for k, e in enumerate(exps):
                if e:
                    term = term * z[..., k] ** e
            out += term
        return out if batch else complex(out)

    def partial(self, k: int) -> "SparsePoly":
        """d/dz_k as a new sparse polynomial (0-based k)."""
        terms = []
        for exps, coeff in self.terms:
            e = exps[k]
            if e:
                new = list(exps)
                new[k] = e - 1
                terms.append((tuple(new), coeff * e))
        return SparsePoly(terms, self.nvars)


class WPolynomial(SparsePoly):
    """Weighted homogeneous polynomial with its declared weighted degree."""

    __slots__ = ("declared_degree",)

    def __init__(self, terms, nvars: int, declared_degree: int):
        super().__init__(terms, nvars)
        if declared_degree < 1:
            raise ValueError("declared degree must be >= 1")
        self.declared_degree = int(declared_degree)

    @classmethod
    def from_terms(cls, terms, nvars: int, beta) -> "WPolynomial":
        """Build with the degree inferred from the first term (validated later)."""
        b = beta.as_array() if isinstance(beta, WeightVector) else np.asarray(beta)
        terms = list(terms)
        if not terms:
            raise ZeroPolynomial("polynomial has no terms")
        degree = int(np.dot(terms[0][0], b))
        return cls(terms, nvars, degree)


def check_weighted_homogeneous(Q: WPolynomial, beta: WeightVector, samples: int = 8) -> int:
    """Return the weighted degree d of Q, or raise MixedDegree/ZeroPolynomial.

    Besides the exact per-term exponent check, the scaling identity
    Q(s^beta * z) = s^d Q(z) is spot-checked at random (s, z) pairs to
    1e-10 relative.
    """
    if not Q.terms:
        raise ZeroPolynomial("polynomial has no terms")
    b = beta.as_array()
    degrees = {int(np.dot(exps, b)) for exps, _ in Q.terms}
    if len(degrees) > 1:
        raise MixedDegree(f"terms have weighted degrees {sorted(degrees)}")
    d = degrees.pop()
    if d != Q.declared_degree:
        raise MixedDegree(
            f"declared degree {Q.declared_degree} but terms have degree {d}")
    rng = np.random.default_rng(20240711)
    for _ in range(samples):
        z = rng.standard_normal(beta.n) + 1j * rng.standard_normal(beta.n)
        s = complex(rng.standard_normal() + 1j * rng.standard_normal())
        lhs = Q(scale_action(s, z, beta))
        rhs = s**d * Q(z)
        if abs(lhs - rhs) > 1e-10 * (1.0 + abs(rhs)):
            raise MixedDegree(
                f"scaling identity violated: |{lhs} - {rhs}| at s={s}")
    return d


@dataclass(frozen=True)
class WeightedVariety:
    """Zero locus of weighted homogeneous polynomials w.r.t. shared weights."""

    weights: WeightVector
    generators: tuple[WPolynomial, ...]
    ambient_dim: int
    pure_dim_hint: int | None = None

    def __post_init__(self):
        if self.ambient_dim != self.weights.n:
            raise ValueError("ambient dimension does not match weight vector")
        gens = tuple(self.generators)
        if not gens:
            raise ZeroPolynomial("variety needs at least one generator")
        for Q in gens:
            if Q.nvars != self.ambient_dim:
                raise ValueError("generator variable count mismatch")
            check_weighted_homogeneous(Q, self.weights)
        object.__setattr__(self, "generators", gens)
        grads = tuple(
            tuple(Q.partial(k) for k in range(self.ambient_dim)) for Q in gens
        )
        object.__setattr__(self, "_grads", grads)

    @property
    def n(self) -> int:
        return self.ambient_dim

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(Q.declared_degree for Q in self.generators)

    def is_cone(self) -> bool:
        return self.weights.is_cone()

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.stack([np.asarray(Q(z), dtype=complex) for Q in self.generators], axis=-1)

    def jacobian(self, z) -> np.ndarray:
        """(m, n) matrix of holomorphic partials dQ_k/dz_j at z."""
        z = np.asarray(z, dtype=complex)
        m = len(self.generators)
        J = np.empty((m, self.ambient_dim), dtype=complex)
        for i, row in enumerate(self._grads):
            for j, P in enumerate(row):
                J[i, j] = P(z)
        return J


def membership(V: WeightedVariety, z, tol: float = 1e-9) -> bool:
    """Numeric zero-locus test with magnitude-aware scaling."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = np.asarray(z, dtype=complex)
    norm = float(np.linalg.norm(z))
    bmin = min(V.weights.beta)
    vals = V.evaluate(z)
    for Q, val in zip(V.generators, np.atleast_1d(vals)):
        scale = 1.0 + norm ** (Q.declared_degree / bmin)
        if abs(val) > tol * scale:
            return False
    return True


def is_regular_point(V: WeightedVariety, z, tol: float = 1e-9) -> bool:
    """True iff the generator Jacobian at z has rank n - d.

    Rank is judged by singular values above 1e-8 times the largest one.
    Requires membership(V, z); raises DimensionUnknown when no dimension
    hint is available and the singular values sit in the ambiguous band.
    """
    J = V.jacobian(np.asarray(z, dtype=complex))
    sv = np.linalg.svd(J, compute_uv=False)
    smax = sv[0] if len(sv) else 0.0
    if smax == 0.0:
        rank = 0
    else:
        rank = int(np.sum(sv > _REGULARITY_RTOL * smax))
    if V.pure_dim_hint is None:
        if smax > 0 and np.any((sv > 1e-10 * smax) & (sv < 1e-6 * smax)):
            raise DimensionUnknown(
                "singular values near the rank threshold and no pure_dim_hint")
        raise DimensionUnknown("pure_dim_hint required to classify regularity")
    return rank == V.ambient_dim - V.pure_dim_hint


@dataclass(frozen=True, eq=False)
class SliceVariety:
    """The slice { y in C^{n-1} : Q_k(xi_1, y) = 0 } in relabeled coordinates.

    `order` lists ambient coordinate indices (0-based); order[0] is the
    designated nonzero coordinate, the rest are the slice variables.
    """

    variety: WeightedVariety
    order: tuple[int, ...]
    xi: np.ndarray
    polys: tuple[SparsePoly, ...]
    base_yhat: np.ndarray

    @property
    def xi1(self) -> complex:
        return complex(self.xi[self.order[0]])

    @property
    def beta_perm(self) -> np.ndarray:
        return self.variety.weights.as_array()[list(self.order)]

    def evaluate(self, yhat) -> np.ndarray:
        yhat = np.asarray(yhat, dtype=complex)
        return np.array([P(yhat) for P in self.polys], dtype=complex)

    def jacobian(self, yhat) -> np.ndarray:
        yhat = np.asarray(yhat, dtype=complex)
        m = len(self.polys)
        nv = self.variety.ambient_dim - 1
        J = np.empty((m, nv), dtype=complex)
        for i, P in enumerate(self.polys):
            for j in range(nv):
                J[i, j] = P.partial(j)(yhat)
        return J

    def eta(self, s, yhat) -> np.ndarray:
        """The map (s, yhat) -> (s/xi_1)^beta * (xi_1, yhat) in ambient order."""
        yhat = np.asarray(yhat, dtype=complex)
        w = np.empty(self.variety.ambient_dim, dtype=complex)
        w[0] = self.xi1
        w[1:] = yhat
        scaled = scale_action(np.asarray(s, dtype=complex) / self.xi1, w, self.beta_perm)
        out = np.empty(scaled.shape, dtype=complex)
        out[..., list(self.order)] = scaled
        return out


def slice_variety(V: WeightedVariety, xi, coord: int | None = None) -> SliceVariety:
    """Substitute the designated coordinate of xi into the generators.

    The designated coordinate defaults to the one of largest modulus; the
    coordinates are relabeled so it comes first.
    """
    xi = np.asarray(xi, dtype=complex)
    if coord is None:
        coord = int(np.argmax(np.abs(xi)))
    if xi[coord] == 0:
        raise ZeroCoordinate("designated coordinate of the base point vanishes")
    n = V.ambient_dim
    order = (coord,) + tuple(k for k in range(n) if k != coord)
    xi1 = complex(xi[coord])
    polys = []
    for Q in V.generators:
        terms: dict[tuple[int, ...], complex] = {}
        for exps, coeff in Q.terms:
            c = coeff * xi1 ** exps[coord]
            new = tuple(exps[k] for k in order[1:])
            terms[new] = terms.get(new, 0.0) + c
        polys.append(SparsePoly(list(terms.items()), n - 1))
    base_yhat = xi[list(order[1:])]
    return SliceVariety(V, order, xi.copy(), tuple(polys), base_yhat)


def _newton_dependent(sl: SliceVariety, dep_cols, graph_cols, x, dep0,
                      maxiter: int = 50) -> np.ndarray:
    """Solve Q(xi_1, yhat) = 0 for the dependent slice coordinates."""
    nv = sl.variety.ambient_dim - 1
    yhat = np.empty(nv, dtype=complex)
    yhat[list(graph_cols)] = x
    dep = np.array(dep0, dtype=complex)
    scale = 1.0 + float(np.linalg.norm(sl.base_yhat)) + float(np.linalg.norm(x))
    for _ in range(maxiter):
        yhat[list(dep_cols)] = dep
        r = sl.evaluate(yhat)
        if np.max(np.abs(r)) < 1e-13 * (1.0 + scale ** 4):
            return yhat
        Jd = sl.jacobian(yhat)[:, list(dep_cols)]
        step, *_ = np.linalg.lstsq(Jd, -r, rcond=None)
        dep = dep + step
        if not np.all(np.isfinite(dep)) or np.linalg.norm(dep) > 1e8:
            raise NewtonDivergence("dependent coordinates diverged")
    raise NewtonDivergence("Newton corrector did not converge")


@dataclass(frozen=True, eq=False)
class Chart:
    """Generalized-cone chart Pi(s, x) = s^beta * (xi_1, pi(x)) at a regular point.

    `x` runs over a ball of the given radius around `base_graph` in C^{d-1};
    for d = 1 the parameter domain is just the s-plane.
    """

    slice: SliceVariety
    graph_cols: tuple[int, ...]
    dep_cols: tuple[int, ...]
    base_graph: np.ndarray
    base_dep: np.ndarray
    radius: float
    d: int
    _pi_cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def variety(self) -> WeightedVariety:
        return self.slice.variety

    @property
    def center(self) -> np.ndarray:
        return self.slice.xi

    @property
    def base_params(self) -> tuple[complex, np.ndarray]:
        """(s, x) with Pi(s, x) = center."""
        return 1.0 + 0.0j, self.base_graph.copy()

    def pi(self, x) -> np.ndarray:
        """Newton-corrected slice parametrization, yhat(x) on Y."""
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        key = tuple(np.round(x, 14).tolist())
        hit = self._pi_cache.get(key)
        if hit is not None:
            return hit.copy()
        yhat = _newton_dependent(self.slice, self.dep_cols, self.graph_cols,
                                 x, self.base_dep)
        if len(self._pi_cache) > 4096:
            self._pi_cache.clear()
        self._pi_cache[key] = yhat.copy()
        return yhat

    def _w(self, x) -> np.ndarray:
        """The unscaled profile (xi_1, pi(x)) in relabeled coordinates."""
        w = np.empty(self.variety.ambient_dim, dtype=complex)
        w[0] = self.slice.xi1
        w[1:] = self.pi(x)
        return w

    def point(self, s, x=None) -> np.ndarray:
        """Pi(s, x) in ambient coordinates; s may be an array."""
        x = np.empty(0) if x is None else x
        w = self._w(x)
        scaled = scale_action(np.asarray(s, dtype=complex), w, self.slice.beta_perm)
        out = np.empty(scaled.shape, dtype=complex)
        out[..., list(self.slice.order)] = scaled
        return out

    def pi_jacobian(self, x) -> np.ndarray:
        """(n-1, d-1) implicit derivative d yhat / d x."""
        yhat = self.pi(x)
        J = self.slice.jacobian(yhat)
        nv = self.variety.ambient_dim - 1
        D = np.zeros((nv, self.d - 1), dtype=complex)
        for j, g in enumerate(self.graph_cols):
            D[g, j] = 1.0
        if self.dep_cols:
            Jd = J[:, list(self.dep_cols)]
            Jg = J[:, list(self.graph_cols)] if self.graph_cols else \
                np.zeros((J.shape[0], 0), dtype=complex)
            dep_D, *_ = np.linalg.lstsq(Jd, -Jg, rcond=None)
            for i, c in enumerate(self.dep_cols):
                D[c, :] = dep_D[i, :]
        return D

    def jacobian(self, s, x=None) -> np.ndarray:
        """Holomorphic differential of Pi, shape (n, d), ambient row order."""
        return self.jacobian_batch(np.asarray([s]), x)[0]

    def jacobian_batch(self, s_arr, x=None) -> np.ndarray:
        """Vectorized over s: shape (len(s), n, d)."""
        x = np.empty(0) if x is None else x
        s_arr = np.asarray(s_arr, dtype=complex)
        n = self.variety.ambient_dim
        beta = self.slice.beta_perm
        w = self._w(x)
        N = s_arr.shape[0]
        J_re = np.zeros((N, n, self.d), dtype=complex)
        s_col = np.where(beta == 1, 1.0 + 0j, s_arr[:, None] ** (beta - 1))
        J_re[:, :, 0] = beta * s_col * w
        if self.d > 1:
            Dy = self.pi_jacobian(x)
            dw = np.zeros((n, self.d - 1), dtype=complex)
            dw[1:, :] = Dy
            J_re[:, :, 1:] = (s_arr[:, None] ** beta)[:, :, None] * dw[None, :, :]
        out = np.empty_like(J_re)
        out[:, list(self.slice.order), :] = J_re
        return out

    def gram(self, s, x=None) -> np.ndarray:
        J = self.jacobian(s, x)
        return J.conj().T @ J

    def volume_density(self, s, x=None) -> float:
        """Density of the pulled-back volume form against Lebesgue on C^d."""
        G = self.gram(s, x)
        det = np.linalg.det(G)
        val = float(det.real)
        if not np.isfinite(val) or val <= 1e-300 or abs(det.imag) > 1e-6 * max(val, 1e-300):
            raise RankDeficient(f"chart Gram matrix numerically singular (det={det})")
        return val

    def volume_density_batch(self, s_arr, x=None) -> np.ndarray:
        J = self.jacobian_batch(s_arr, x)
        G = np.einsum("nij,nik->njk", J.conj(), J)
        det = np.linalg.det(G)
        return det.real

    def invert(self, z, tol: float = 1e-8) -> tuple[complex, np.ndarray]:
        """Find (s, x) with Pi(s, x) = z, trying all scaling-root branches."""
        z = np.asarray(z, dtype=complex)
        z_re = z[list(self.slice.order)]
        beta = self.slice.beta_perm
        b1 = int(beta[0])
        ratio = z_re[0] / self.slice.xi1
        if ratio == 0:
            raise RankDeficient("cannot invert the chart at s = 0")
        s0 = ratio ** (1.0 / b1)
        best = None
        for k in range(b1):
            s = s0 * np.exp(2j * np.pi * k / b1)
            yhat_guess = z_re[1:] / s ** beta[1:]
            x = yhat_guess[list(self.graph_cols)]
            try:
                p = self.point(s, x)
            except NewtonDivergence:
                continue
            err = float(np.linalg.norm(p - z))
            if best is None or err < best[0]:
                best = (err, s, x)
        if best is None or best[0] > tol * (1.0 + float(np.linalg.norm(z))):
            raise RankDeficient(f"chart inversion failed for {z}")
        return best[1], best[2]


def chart_volume_density(C: Chart, s, x=None) -> float:
    """det of the Gram matrix of dPi at (s, x); raises RankDeficient at s=0."""
    if s == 0:
        raise RankDeficient("volume density undefined at s = 0")
    return C.volume_density(s, x)


def cone_chart(V: WeightedVariety, xi, radius: float = 0.4,
               coord: int | None = None, auto_shrink: bool = True) -> Chart:
    """Build the generalized-cone chart at a regular point xi.

    Graph coordinates on the slice variety are chosen by pivoted QR of its
    Jacobian (largest minors first).  On Newton divergence during domain
    validation the radius is halved, down to 1e-3.
    """
    xi = np.asarray(xi, dtype=complex)
    if V.pure_dim_hint is None:
        raise DimensionUnknown("chart construction needs pure_dim_hint")
    d = V.pure_dim_hint
    if not membership(V, xi, 1e-8):
        raise ValueError("base point is not on the variety")
    if not is_regular_point(V, xi):
        raise ValueError("base point is not a regular point")
    sl = slice_variety(V, xi, coord=coord)
    n = V.ambient_dim
    ndep = n - d
    J = sl.jacobian(sl.base_yhat)
    sv = np.linalg.svd(J, compute_uv=False)
    if len(sv) == 0 or (ndep > 0 and (len(sv) < ndep or sv[min(ndep, len(sv)) - 1] <= 1e-10 * sv[0])):
        raise SingularSlice("base point projects onto a singular slice point")
    if ndep > 0:
        _, _, piv = scipy.linalg.qr(J, pivoting=True)
        dep_cols = tuple(sorted(int(p) for p in piv[:ndep]))
        graph_cols = tuple(sorted(int(p) for p in piv[ndep:]))
    else:
        dep_cols = ()
        graph_cols = tuple(range(n - 1))
    base_graph = sl.base_yhat[list(graph_cols)]
    base_dep = sl.base_yhat[list(dep_cols)]

    r = float(radius)
    while True:
        chart = Chart(sl, graph_cols, dep_cols, base_graph, base_dep, r, d)
        try:
            _validate_chart(chart)
            return chart
        except NewtonDivergence:
            if not auto_shrink or r <= 1e-3:
                raise
            r *= 0.5


def _validate_chart(chart: Chart, samples: int = 6) -> None:
    """Base-point condition, membership along the chart, immersion rank."""
    base = chart.point(1.0, chart.base_graph)
    if not np.allclose(base, chart.center, rtol=0, atol=1e-9 * (1 + np.linalg.norm(chart.center))):
        raise NewtonDivergence("chart does not reproduce its base point")
    rng = np.random.default_rng(7)
    V = chart.variety
    densities = []
    for _ in range(samples):
        s = 0.3 + rng.random() * 1.2 + 1j * (rng.random() - 0.5)
        if chart.d > 1:
            x = chart.base_graph + chart.radius * (
                rng.standard_normal(chart.d - 1) + 1j * rng.standard_normal(chart.d - 1)
            ) / np.sqrt(2 * (chart.d - 1))
        else:
            x = np.empty(0)
        p = chart.point(s, x)
        if not membership(V, p, 1e-7):
            raise NewtonDivergence("chart point leaves the variety")
        J = chart.jacobian(s, x)
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            raise NewtonDivergence("chart is not an immersion on its domain")
        if V.is_cone() and chart.d > 1:
            densities.append(chart.volume_density(1.0, x))
    # measured stand-in for the lower bound on the cone profile density:
    # shrink the domain when it degenerates across U
    if densities and min(densities) < 1e-6 * max(densities):
        raise NewtonDivergence("profile density degenerates on the domain")
