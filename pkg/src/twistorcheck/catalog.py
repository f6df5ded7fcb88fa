"""Benchmark patches: flat, conformal Hermitian, round six-sphere, perturbed torus.

Each entry packages a ``ManifoldPatch`` with attribute flags and the handful
of quantities known in closed form (used by tests as frozen expectations).
The six-sphere entry carries the canonical almost complex structure built
from the seven-dimensional cross product; the patch invariants J^2 = -Id and
metric compatibility double as a certificate that the multiplication table
is a genuine octonion table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ChartOverflow
from .geometry import ManifoldPatch, j0_matrix

S6_CHART_RADIUS = 0.9
# Axis bound chosen so every corner of the box satisfies |u| <= 0.35 sqrt(6) < 0.9,
# leaving finite-difference stencils strictly inside the chart.
S6_BOX_BOUND = 0.35

# Oriented multiplication triples e_a e_b = e_c: the quaternion line (1,2,3)
# doubled by e_4 so that e_1 e_4 = e_5, e_2 e_4 = e_6, e_3 e_4 = e_7; the
# remaining lines follow from the doubling construction.
_OCTONION_TRIPLES = ((1, 2, 3), (1, 4, 5), (2, 4, 6), (3, 4, 7), (1, 7, 6), (2, 5, 7), (3, 6, 5))


def _cross_structure_constants() -> np.ndarray:
    f = np.zeros((7, 7, 7))
    for a, b, c in _OCTONION_TRIPLES:
        a, b, c = a - 1, b - 1, c - 1
        for (i, j, k), s in (
            ((a, b, c), 1.0),
            ((b, c, a), 1.0),
            ((c, a, b), 1.0),
            ((b, a, c), -1.0),
            ((a, c, b), -1.0),
            ((c, b, a), -1.0),
        ):
            f[i, j, k] = s
    return f


_CROSS_F = _cross_structure_constants()


def cross7(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Seven-dimensional cross product of imaginary octonions."""
    return np.einsum("ijk,i,j->k", _CROSS_F, x, y)


def _cross_operator(p: np.ndarray) -> np.ndarray:
    """Matrix of X -> p x X."""
    return np.einsum("ijk,i->kj", _CROSS_F, p)


def stereographic_point(u: np.ndarray) -> np.ndarray:
    """Inverse stereographic map of the unit six-sphere, chart origin at a pole."""
    u = np.asarray(u, dtype=float)
    s = 1.0 + u @ u
    return np.concatenate([2.0 * u / s, [(u @ u - 1.0) / s]])


def stereographic_jacobian(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    s = 1.0 + u @ u
    D = np.zeros((7, 6))
    D[:6, :] = (2.0 / s) * (np.eye(6) - 2.0 * np.outer(u, u) / s)
    D[6, :] = 4.0 * u / s**2
    return D


@dataclass(frozen=True)
class CatalogEntry:
    """A benchmark patch plus its attribute flags and known quantities."""

    id: str
    patch: ManifoldPatch
    attributes: frozenset = frozenset()
    expected: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "attributes", frozenset(self.attributes))


def _box(bound_per_axis, dim: int) -> np.ndarray:
    return np.array([bound_per_axis] * dim, dtype=float)


def flat_kahler(n: int) -> CatalogEntry:
    """Euclidean metric with the constant reference complex structure."""
    if n < 2:
        raise ValueError("n must be at least 2")
    dim = 2 * n
    eye = np.eye(dim)
    J0 = j0_matrix(n)
    zero_jet = np.zeros((dim, dim, dim))
    attrs = frozenset({"integrable", "flat"})
    patch = ManifoldPatch(
        n=n,
        domain=_box((-1.0, 1.0), dim),
        metric_field=lambda u, _g=eye: _g,
        j_field=lambda u, _j=J0: _j,
        metric_jet=lambda u, _z=zero_jet: _z,
        j_jet=lambda u, _z=zero_jet: _z,
        label=f"flat:{n}",
        attributes=attrs,
    )
    return CatalogEntry(
        id=f"flat:{n}",
        patch=patch,
        attributes=attrs,
        expected={"normN2": 0.0, "margin": 1.0},
    )


def conformal_hermitian() -> CatalogEntry:
    """Integrable non-Kahler regime: g = |u|^{-2} Id on a box away from the origin.

    J is the constant reference structure, so the Nijenhuis tensor vanishes,
    but the conformal factor makes the connection forms (hence alpha, beta)
    nonzero at generic points.
    """
    n = 2
    dim = 4
    J0 = j0_matrix(n)
    zero_jet = np.zeros((dim, dim, dim))

    def metric(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.eye(dim) / (u @ u)

    def metric_jet(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        r2 = u @ u
        return np.einsum("c,ab->cab", -2.0 * u / r2**2, np.eye(dim))

    attrs = frozenset({"integrable"})
    patch = ManifoldPatch(
        n=n,
        domain=_box((0.5, 2.5), dim),
        metric_field=metric,
        j_field=lambda u, _j=J0: _j,
        metric_jet=metric_jet,
        j_jet=lambda u, _z=zero_jet: _z,
        label="conformal4",
        attributes=attrs,
    )
    return CatalogEntry(
        id="conformal4", patch=patch, attributes=attrs, expected={"normN2": 0.0}
    )


def _s6_metric(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    s = 1.0 + u @ u
    return (4.0 / s**2) * np.eye(6)


def _s6_metric_jet(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    s = 1.0 + u @ u
    return np.einsum("c,ab->cab", -16.0 * u / s**3, np.eye(6))


def _s6_j(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u @ u >= S6_CHART_RADIUS**2:
        raise ChartOverflow(
            f"|u| = {np.sqrt(u @ u):.4f} >= {S6_CHART_RADIUS}; point left the chart"
        )
    s = 1.0 + u @ u
    D = stereographic_jacobian(u)
    L = _cross_operator(stereographic_point(u))
    # pinv(D) = (s^2/4) D^T because D^T D = (4/s^2) Id
    return (s**2 / 4.0) * D.T @ L @ D


def nearly_kahler_s6() -> CatalogEntry:
    """Unit round six-sphere with the cross-product almost complex structure.

    The chart is the stereographic one; tangent vectors are pushed to the
    sphere in R^7, rotated by X -> p x X at the base point p, and pulled back.
    """
    attrs = frozenset({"unit_round_sphere", "nearly_kahler"})
    patch = ManifoldPatch(
        n=3,
        domain=_box((-S6_BOX_BOUND, S6_BOX_BOUND), 6),
        metric_field=_s6_metric,
        j_field=_s6_j,
        metric_jet=_s6_metric_jet,
        j_jet=None,
        label="nk-s6",
        attributes=attrs,
    )
    return CatalogEntry(
        id="nk-s6",
        patch=patch,
        attributes=attrs,
        expected={"normN2_at_least": 64.0 / 5.0, "normN2_constant_rel": 1e-4},
    )


def perturbed_torus(eps: float = 0.05, freq: int = 1) -> CatalogEntry:
    """Flat metric with J rotated out of the constant orbit along the first axis.

    J(u) = R(u) J0 R(u)^T with R(u) = exp(t G), t = eps sin(freq u_1), for the
    fixed skew generator G = e_1 e_3^T - e_3 e_1^T, which does not commute
    with J0; the squared Nijenhuis norm grows like eps^2.
    """
    if not 0.0 <= eps <= 0.5:
        raise ValueError("eps must lie in [0, 0.5]")
    if freq < 1 or int(freq) != freq:
        raise ValueError("freq must be a positive integer")
    n = 3
    dim = 6
    eye = np.eye(dim)
    J0 = j0_matrix(n)
    G = np.zeros((dim, dim))
    G[0, 2] = 1.0
    G[2, 0] = -1.0
    P = np.zeros((dim, dim))
    P[0, 0] = P[2, 2] = 1.0  # G^2 = -P, so exp(tG) has a closed form

    def rotation(t: float) -> np.ndarray:
        return eye - (1.0 - np.cos(t)) * P + np.sin(t) * G

    def j_field(u: np.ndarray) -> np.ndarray:
        R = rotation(eps * np.sin(freq * u[0]))
        return R @ J0 @ R.T

    zero_jet = np.zeros((dim, dim, dim))
    attrs = frozenset()
    patch = ManifoldPatch(
        n=n,
        domain=_box((-np.pi, np.pi), dim),
        metric_field=lambda u, _g=eye: _g,
        j_field=j_field,
        metric_jet=lambda u, _z=zero_jet: _z,
        j_jet=None,
        label=f"torus:eps={eps:g},freq={freq}",
        attributes=attrs,
    )
    return CatalogEntry(
        id=f"torus:eps={eps:g},freq={freq}",
        patch=patch,
        attributes=attrs,
        expected={"generator": "e1 e3^T - e3 e1^T", "eps": eps, "freq": freq},
    )


def default_entries() -> list:
    """The benchmark suite exercised by scans and acceptance checks."""
    return [
        flat_kahler(2),
        flat_kahler(3),
        flat_kahler(4),
        conformal_hermitian(),
        nearly_kahler_s6(),
        perturbed_torus(eps=0.05, freq=1),
    ]


_TORUS_RE = re.compile(r"^torus:eps=([0-9.eE+-]+),freq=([0-9]+)$")


def resolve(manifold_id: str) -> CatalogEntry:
    """Look up a catalog entry by its CLI identifier.

    Recognized forms: ``flat:<n>``, ``conformal4``, ``nk-s6``,
    ``torus:eps=<r>,freq=<k>``.
    """
    if manifold_id == "conformal4":
        return conformal_hermitian()
    if manifold_id == "nk-s6":
        return nearly_kahler_s6()
    if manifold_id.startswith("flat:"):
        try:
            n = int(manifold_id.split(":", 1)[1])
        except ValueError:
            raise KeyError(f"bad flat manifold id {manifold_id!r}") from None
        return flat_kahler(n)
    m = _TORUS_RE.match(manifold_id)
    if m:
        return perturbed_torus(eps=float(m.group(1)), freq=int(m.group(2)))
    raise KeyError(f"unknown manifold id {manifold_id!r}")


def grid_points(patch: ManifoldPatch, per_axis: int, inset: float = 0.05) -> np.ndarray:
    """Deterministic grid of interior points, row-major over axes.

    Each axis is sampled at ``per_axis`` equally spaced values inset from the
    boundary by ``inset`` times the axis length (a single point sits at the
    center), keeping finite-difference stencils inside the domain.
    """
    if per_axis < 1:
        raise ValueError("per_axis must be >= 1")
    axes = []
    for lo, hi in patch.domain:
        pad = inset * (hi - lo)
        if per_axis == 1:
            axes.append(np.array([0.5 * (lo + hi)]))
        else:
            axes.append(np.linspace(lo + pad, hi - pad, per_axis))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def sample_points(
    patch: ManifoldPatch, count: int, rng: np.random.Generator, inset: float = 0.1
) -> np.ndarray:
    """Seeded uniform interior points, inset from the boundary like grid_points."""
    lo = patch.domain[:, 0]
    hi = patch.domain[:, 1]
    pad = inset * (hi - lo)
    return rng.uniform(lo + pad, hi - pad, size=(count, patch.dim))
