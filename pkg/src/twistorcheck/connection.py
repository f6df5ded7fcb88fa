"""Levi-Civita connection 1-forms in an adapted frame, and their validation.

Convention: nabla_X e_B = sum_A omega_{BA}(X) e_A, i.e.
omega_{BA}(X) = g(nabla_X e_B, e_A).  With the wedge
(eta ^ zeta)(X, Y) = eta(X) zeta(Y) - eta(Y) zeta(X) this makes the coframe
satisfy d theta_A = sum_B theta_B ^ omega_{BA}, which is checked numerically
by ``structure_equation_residual``; the check fails loudly if the sign
convention drifts.  Curvature is read off the second structure equation as
R = omega ^ omega - d omega, so the round unit sphere comes out with
R_{AB} = theta_A ^ theta_B.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    DEFAULT_FD_STEP,
    AdaptedFrame,
    ManifoldPatch,
    adapt_frame,
    christoffel,
    evaluate_frame_field,
    require_interior,
)

# Nested differences amplify rounding as eps/h^2, so the outer step for
# derivatives of the connection field is larger than the first-order step.
DEFAULT_SECOND_ORDER_STEP = 1e-4


@dataclass(frozen=True)
class ConnectionTable:
    """Frame components omega[A, B, C] = omega_{AB}(e_C), skew in (A, B)."""

    omega: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        om.flags.writeable = False
        object.__setattr__(self, "omega", om)

    @property
    def n(self) -> int:
        return self.omega.shape[0] // 2

    def antisymmetry_residual(self) -> float:
        return float(np.abs(self.omega + self.omega.transpose(1, 0, 2)).max())


@dataclass(frozen=True)
class CurvatureTable:
    """Frame components R[A, B, C, D] = R_{AB}(e_C, e_D)."""

    R: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        R.flags.writeable = False
        object.__setattr__(self, "R", R)

    def antisymmetry_residuals(self) -> tuple:
        r1 = float(np.abs(self.R + self.R.transpose(1, 0, 2, 3)).max())
        r2 = float(np.abs(self.R + self.R.transpose(0, 1, 3, 2)).max())
        return r1, r2


def coordinate_connection(
    patch: ManifoldPatch,
    frame: AdaptedFrame,
    point: np.ndarray | None = None,
    step: float = DEFAULT_FD_STEP,
) -> np.ndarray:
    """Coordinate slices w[A, B, a] = omega_{AB}(d/du^a) of the connection forms.

    Differentiates the adapted frame field determined by ``frame`` (same seed,
    same pivot sequence, same trailing rotation) at ``point``, defaulting to
    the frame's own base point.
    """
    u = frame.point if point is None else np.asarray(point, dtype=float)
    u = require_interior(patch, u, margin=step)
    g = np.asarray(patch.metric_field(u), dtype=float)
    E0 = evaluate_frame_field(patch, frame, u)
    Gamma = christoffel(patch, u, step=step)
    dim = patch.dim
    dE = np.empty((dim, dim, dim))
    for c in range(dim):
        up = u.copy()
        dn = u.copy()
        up[c] += step
        dn[c] -= step
        dE[c] = (
            evaluate_frame_field(patch, frame, up) - evaluate_frame_field(patch, frame, dn)
        ) / (2.0 * step)
    # (nabla_{d_a} e_B)^c = d_a E^c_B + Gamma^c_{ab} E^b_B
    cov = dE + np.einsum("cab,bB->acB", Gamma, E0)
    # w[B, A, a] = g(nabla_{d_a} e_B, e_A)
    w = np.einsum("acB,cd,dA->BAa", cov, g, E0)
    return w


def connection_coefficients(
    patch: ManifoldPatch, frame: AdaptedFrame, step: float = DEFAULT_FD_STEP
) -> ConnectionTable:
    """Connection table omega_{AB}(e_C) for the given adapted frame."""
    w = coordinate_connection(patch, frame, step=step)
    E0 = frame.E
    omega = np.einsum("ABa,aC->ABC", w, E0)
    return ConnectionTable(omega=omega)


def structure_equation_residual(
    patch: ManifoldPatch,
    point: np.ndarray,
    step: float = DEFAULT_FD_STEP,
    seed: np.ndarray | None = None,
    omega_sign: float = 1.0,
) -> float:
    """Max residual of d theta_A = sum_B theta_B ^ omega_{BA} on coordinate pairs.

    ``omega_sign`` exists as a deliberate tripwire: passing -1 must drive the
    residual far from zero on any patch with a nonzero connection, which is
    how tests pin the sign convention.
    """
    u = require_interior(patch, point, margin=2.0 * step)
    frame = adapt_frame(patch, u, seed=seed)
    w = omega_sign * coordinate_connection(patch, frame, step=step)
    dim = patch.dim

    def coframe(v: np.ndarray) -> np.ndarray:
        # theta_A(d_a) = g(d_a, e_A) = (g E)_{aA}
        return np.asarray(patch.metric_field(v), dtype=float) @ evaluate_frame_field(
            patch, frame, v
        )

    T0 = coframe(u)
    dT = np.empty((dim, dim, dim))
    for c in range(dim):
        up = u.copy()
        dn = u.copy()
        up[c] += step
        dn[c] -= step
        dT[c] = (coframe(up) - coframe(dn)) / (2.0 * step)
    # dtheta[A, a, b] = d_a theta_A(d_b) - d_b theta_A(d_a)
    dtheta = np.einsum("abA->Aab", dT) - np.einsum("baA->Aab", dT)
    rhs = np.einsum("aB,BAb->Aab", T0, w) - np.einsum("bB,BAa->Aab", T0, w)
    return float(np.abs(dtheta - rhs).max())


def curvature_forms(
    patch: ManifoldPatch,
    point: np.ndarray,
    step: float = DEFAULT_SECOND_ORDER_STEP,
    inner_step: float = DEFAULT_FD_STEP,
    frame: AdaptedFrame | None = None,
) -> CurvatureTable:
    """Curvature table R_{AB}(e_C, e_D) from R = omega ^ omega - d omega."""
    margin = step + 2.0 * inner_step
    u = require_interior(patch, point, margin=margin)
    if frame is None:
        frame = adapt_frame(patch, u)
    dim = patch.dim
    w0 = coordinate_connection(patch, frame, u, step=inner_step)
    dw = np.empty((dim, dim, dim, dim))
    for c in range(dim):
        up = u.copy()
        dn = u.copy()
        up[c] += step
        dn[c] -= step
        dw[c] = (
            coordinate_connection(patch, frame, up, step=inner_step)
            - coordinate_connection(patch, frame, dn, step=inner_step)
        ) / (2.0 * step)
    # domega[A, B, a, b] = d_a omega_{AB}(d_b) - d_b omega_{AB}(d_a)
    domega = np.einsum("aABb->ABab", dw) - np.einsum("bABa->ABab", dw)
    wedge = np.einsum("ACa,CBb->ABab", w0, w0) - np.einsum("ACb,CBa->ABab", w0, w0)
    r_coord = wedge - domega
    E0 = frame.E
    R = np.einsum("ABab,aC,bD->ABCD", r_coord, E0, E0)
    return CurvatureTable(R=R)


def round_sphere_curvature_residual(table: CurvatureTable) -> float:
    """Distance of a curvature table from R_{AB}(e_C, e_D) = theta_A ^ theta_B."""
    dim = table.R.shape[0]
    eye = np.eye(dim)
    expected = np.einsum("AC,BD->ABCD", eye, eye) - np.einsum("AD,BC->ABCD", eye, eye)
    return float(np.abs(table.R - expected).max())


def first_bianchi_residual(table: CurvatureTable) -> float:
    """Max over indices of the cyclic sum R_{AB}(e_C,e_D) + R_{AC}(e_D,e_B) + R_{AD}(e_B,e_C)."""
    R = table.R
    cyc = R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)
    return float(np.abs(cyc).max())
