"""Singular planar quadrature and the kernel integrals of the solvers.

All area integrals use the orientation convention

    d conj(t) ^ dt  =  +2i dx ^ dy,

so the displayed prefactor 1/(2 pi i) turns into 1/pi against Lebesgue
measure.  Under this convention the audited inverse property of the solid
Cauchy transform is  dbar(I f) = ORIENTATION_SIGN * f  with a single global
sign, frozen below and asserted by the test suite; the solution operators
multiply by it so that they solve dbar(lambda) = omega as stated.

Quadrature: each singular center gets a smooth radial cutoff (exp(-1/t)
gluing) and tensor polar panels with geometric radial grading down to 1e-8;
the smooth remainder is integrated on polar panels about the origin with a
denser angular grid.  Refinement doubles both resolutions and stops when two
successive levels agree to the target relative error (Richardson stopping).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DeltaOutOfRange,
    NonIntegrableAtZero,
    QuadratureNonConvergent,
    SupportOverflow,
)
from .expr import bump_value

__all__ = [
    "ORIENTATION_SIGN",
    "QuadratureSpec",
    "PlaneNodes",
    "plane_nodes",
    "integrate_plane",
    "cauchy_transform",
    "weighted_cauchy",
    "solution_kernel_integral",
    "action_support_radius",
]

# Audited once via the Cauchy-Pompeiu identity (see test_kernel /
# test_acceptance): dbar of the solid Cauchy transform returns the negative
# of the input under the +2i orientation.  Never adjusted per operator.
ORIENTATION_SIGN = -1.0

_INNER_FLOOR = 1e-8  # graded radial panels stop here; see module docstring


@dataclass(frozen=True)
class QuadratureSpec:
    """Desingularized integration plan for kernels with point singularities.

    outer_radius must cover the integrand support; every kernel operation
    certifies the integrand vanishes outside it.  Refinement halts when two
    successive levels differ by less than target_rel_err.
    """

    outer_radius: float
    singular_centers: tuple[complex, ...] = ()
    rings_per_decade: int = 4
    angular_nodes: int = 32
    target_rel_err: float = 1e-6
    max_depth: int = 3
    radial_order: int = 8
    radial_breakpoints: tuple[float, ...] = ()  # known jump radii about 0

    def __post_init__(self):
        if self.outer_radius <= 0:
            raise ValueError("outer_radius must be positive")
        object.__setattr__(self, "singular_centers",
                           tuple(complex(c) for c in self.singular_centers))
        object.__setattr__(self, "radial_breakpoints",
                           tuple(float(r) for r in self.radial_breakpoints))

    def with_centers(self, centers) -> "QuadratureSpec":
        return replace(self, singular_centers=tuple(complex(c) for c in centers))


@dataclass(frozen=True, eq=False)
class PlaneNodes:
    """Flattened node/weight arrays; integral = sum(weights * F(nodes))."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return self.nodes.size


def _gauss_panel(a: float, b: float, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def _center_radii(centers: tuple[complex, ...], outer: float,
                  breakpoints: tuple[float, ...] = ()) -> dict[complex, float]:
    """Cutoff radius per kept center: clear of other centers, the boundary,
    and any declared jump circles."""
    radii: dict[complex, float] = {}
    for c in centers:
        if abs(c) >= outer:
            continue
        dist = min((abs(c - o) for o in centers if o != c), default=np.inf)
        rho = min(0.35 * dist, 0.9 * (outer - abs(c)), 0.5 * outer)
        for rb in breakpoints:
            gap = abs(rb - abs(c))
            if gap > 0:
                rho = min(rho, 0.9 * gap)
        if rho > 20 * _INNER_FLOOR:
            radii[c] = rho
    return radii


def _radial_breaks(rho: float, rings_per_decade: int) -> np.ndarray:
    """Descending panel breakpoints: linear across the cutoff transition
    [rho/2, rho], geometric below, down to the inner floor."""
    n_t = max(3, rings_per_decade)
    breaks = list(np.linspace(rho, rho / 2, n_t + 1))
    ratio = 10.0 ** (-1.0 / rings_per_decade)
    r = rho / 2
    while r > _INNER_FLOOR:
        r = max(r * ratio, _INNER_FLOOR)
        breaks.append(r)
    return np.asarray(breaks)


def _build(outer: float, centers: tuple[complex, ...], rings_per_decade: int,
           angular_nodes: int, radial_order: int,
           breakpoints: tuple[float, ...] = ()) -> PlaneNodes:
    radii = _center_radii(centers, outer, breakpoints)
    us: list[np.ndarray] = []
    ws: list[np.ndarray] = []

    for c, rho in radii.items():
        M = angular_nodes
        theta = 2 * np.pi * (np.arange(M) + 0.31) / M
        eith = np.exp(1j * theta)
        breaks = _radial_breaks(rho, rings_per_decade)
        for hi, lo in zip(breaks[:-1], breaks[1:]):
            r, wr = _gauss_panel(lo, hi, radial_order)
            cut = bump_value(rho / 2, rho, r)  # 1 near the center, 0 at rho
            u = c + r[:, None] * eith[None, :]
            w = (wr * r * cut)[:, None] * np.full(M, 2 * np.pi / M)[None, :]
            us.append(u.ravel())
            ws.append(w.ravel())

    # smooth remainder, polar about the origin
    zero_rho = next((rho for c, rho in radii.items() if c == 0), None)
    r_lo = zero_rho / 2 if zero_rho is not None else 0.0
    points = {r_lo, outer}
    for rb in breakpoints:
        if r_lo < rb < outer:
            points.add(rb)
    for c, rho in radii.items():
        if c == 0:
            points.add(rho)
            continue
        for r in (abs(c) - rho, abs(c) - rho / 2, abs(c), abs(c) + rho / 2, abs(c) + rho):
            if r_lo < r < outer:
                points.add(r)
    breaks = sorted(points)
    # radial subdivision scales with the ring density so refinement levels
    # actually sharpen the smooth remainder as well
    density = max(1, rings_per_decade // 4)
    max_width = outer / (8.0 * density)
    panels: list[tuple[float, float]] = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        splits = max(1, int(np.ceil((b - a) / max_width)))
        if a > 0:
            splits = max(splits, int(np.ceil(np.log(b / a) / np.log(2.5))))
        edges = np.linspace(a, b, splits + 1)
        panels.extend(zip(edges[:-1], edges[1:]))

    M = 4 * angular_nodes
    theta = 2 * np.pi * (np.arange(M) + 0.31) / M
    eith = np.exp(1j * theta)
    off_centers = [(c, rho) for c, rho in radii.items() if c != 0]
    for a, b in panels:
        r, wr = _gauss_panel(a, b, radial_order)
        u = r[:, None] * eith[None, :]
        w = np.broadcast_to((wr * r)[:, None] * (2 * np.pi / M), u.shape).copy()
        if zero_rho is not None:
            w *= 1.0 - bump_value(zero_rho / 2, zero_rho, r)[:, None]
        for c, rho in off_centers:
            w *= 1.0 - bump_value(rho / 2, rho, np.abs(u - c))
        us.append(u.ravel())
        ws.append(w.ravel())

    return PlaneNodes(np.concatenate(us), np.concatenate(ws))


_NODE_CACHE: dict[tuple, PlaneNodes] = {}


def plane_nodes(spec: QuadratureSpec, level: int = 0) -> PlaneNodes:
    """Node set for the spec at the given refinement level (cached)."""
    key = (
        round(spec.outer_radius, 12),
        tuple(complex(np.round(c.real, 12) + 1j * np.round(c.imag, 12))
              for c in spec.singular_centers),
        spec.rings_per_decade << level,
        spec.angular_nodes << level,
        spec.radial_order,
        tuple(round(r, 12) for r in spec.radial_breakpoints),
    )
    hit = _NODE_CACHE.get(key)
    if hit is None:
        if len(_NODE_CACHE) > 128:
            _NODE_CACHE.clear()
        hit = _build(spec.outer_radius, spec.singular_centers,
                     spec.rings_per_decade << level, spec.angular_nodes << level,
                     spec.radial_order, spec.radial_breakpoints)
        _NODE_CACHE[key] = hit
    return hit


def integrate_plane(F, spec: QuadratureSpec, level: int | None = None):
    """Integrate a vectorized integrand over the plane per the spec.

    With `level` given, evaluates that single refinement level (used to keep
    quadrature error correlated across stencil evaluations).  Otherwise runs
    the refinement ladder and returns the first converged value.
    """
    if level is not None:
        nodes = plane_nodes(spec, level)
        return complex(np.sum(nodes.weights * np.asarray(F(nodes.nodes))))
    prev = None
    prev_mass = 0.0
    for lvl in range(spec.max_depth + 1):
        nodes = plane_nodes(spec, lvl)
        vals = np.asarray(F(nodes.nodes))
        cur = complex(np.sum(nodes.weights * vals))
        mass = float(np.sum(np.abs(nodes.weights * vals)))
        if prev is not None:
            tol = spec.target_rel_err * (abs(cur) + 1e-9 * (mass + prev_mass))
            if abs(cur - prev) <= max(tol, 5e-16 * mass):
                return cur
        prev, prev_mass = cur, mass
    raise QuadratureNonConvergent(
        f"no convergence to {spec.target_rel_err} within {spec.max_depth} refinements")


def calibrate_level(F, spec: QuadratureSpec) -> int:
    """Smallest refinement level at which the ladder for F has converged."""
    prev = None
    for lvl in range(spec.max_depth + 1):
        nodes = plane_nodes(spec, lvl)
        vals = np.asarray(F(nodes.nodes))
        cur = complex(np.sum(nodes.weights * vals))
        mass = float(np.sum(np.abs(nodes.weights * vals)))
        if prev is not None and abs(cur - prev) <= max(
                spec.target_rel_err * (abs(cur) + 1e-9 * mass), 5e-16 * mass):
            return lvl
        prev = cur
    raise QuadratureNonConvergent(
        f"no convergence to {spec.target_rel_err} within {spec.max_depth} refinements")


def certify_support(f, spec: QuadratureSpec, scale_hint: float = 1.0) -> None:
    """Raise SupportOverflow unless f vanishes at the truncation circle."""
    ring = spec.outer_radius * np.exp(1j * 2 * np.pi * (np.arange(16) + 0.17) / 16)
    vals = np.abs(np.asarray(f(ring)))
    if np.max(vals) > 1e-9 * (1.0 + scale_hint):
        raise SupportOverflow(
            f"integrand magnitude {np.max(vals):.3g} at radius {spec.outer_radius}")


# ---------------------------------------------------------------------------
# kernel operations
# ---------------------------------------------------------------------------

def cauchy_transform(f, z: complex, spec: QuadratureSpec, level: int | None = None) -> complex:
    """Solid Cauchy transform (1/2 pi i) int f(t) dtbar^dt / (t - z).

    Equals (1/pi) times the area integral of f(t)/(t-z).  Satisfies
    dbar(I f) = ORIENTATION_SIGN * f at interior smooth points.
    """
    z = complex(z)
    certify_support(f, spec)
    centers = (z,) if abs(z) < spec.outer_radius else ()
    local = spec.with_centers(centers)

    def F(t):
        return np.asarray(f(t), dtype=complex) / (t - z)

    return integrate_plane(F, local, level=level) / np.pi


def weighted_cauchy(h, t: complex, delta: float, R: float,
                    spec: QuadratureSpec | None = None) -> complex:
    """The weighted kernel integral int_{|w|<R} h(w) dw^dwbar / ((w-t) |t|^delta).

    dw^dwbar = -2i dA under the fixed orientation.  delta must lie in [0, 1).
    """
    if not 0.0 <= delta < 1.0:
        raise DeltaOutOfRange(f"delta={delta} outside [0, 1)")
    t = complex(t)
    if spec is None:
        spec = QuadratureSpec(outer_radius=R)
    else:
        spec = replace(spec, outer_radius=R)
    centers = (t,) if abs(t) < R else ()
    local = spec.with_centers(centers)

    def F(w):
        return np.asarray(h(w), dtype=complex) / (w - t)

    raw = integrate_plane(F, local)
    return -2j * raw / abs(t) ** delta


def solution_kernel_integral(g, sigma: int, betaJ: int, spec: QuadratureSpec,
                             level: int | None = None) -> complex:
    """(1/2 pi i) int g(u) u^sigma conj(u)^{betaJ-1} dubar^du / (u - 1).

    This is the scalar integral of the solution operators; g is the orbit
    trace u -> f_J(u^beta * z).  Integrable at 0 iff sigma >= -betaJ.
    """
    sigma = int(sigma)
    betaJ = int(betaJ)
    if sigma < -betaJ:
        raise NonIntegrableAtZero(f"sigma={sigma} < -betaJ={-betaJ}")
    certify_support(g, spec)
    centers: list[complex] = []
    if sigma < 0:
        centers.append(0j)
    if 1.0 < spec.outer_radius:
        centers.append(1.0 + 0j)
    local = spec.with_centers(centers)

    def F(u):
        return (np.asarray(g(u), dtype=complex)
                * u ** sigma * np.conjugate(u) ** (betaJ - 1) / (u - 1.0))

    return integrate_plane(F, local, level=level) / np.pi


def action_support_radius(z, beta, R: float, margin: float = 0.05) -> float:
    """Radius U with  scale_action(u, z) outside B_R  for all |u| > U.

    min over nonzero coordinates of (R / |z_k|)^(1/beta_k), plus a margin.
    """
    z = np.asarray(z, dtype=complex)
    b = np.asarray(beta.beta if hasattr(beta, "beta") else beta, dtype=float)
    mags = np.abs(z)
    mask = mags > 0
    if not np.any(mask):
        raise ValueError("support radius undefined at the origin")
    radii = (R / mags[mask]) ** (1.0 / b[mask])
    return float(np.min(radii)) * (1.0 + margin)
