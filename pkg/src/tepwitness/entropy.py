"""Entropy exchange, correlations and total entropy production.

Quantities live on a bipartite system-apparatus state: quantum mutual
information, classical correlation extractable by projective measurement on
the apparatus, quantum discord as their gap, the entropy acquired by an
initially pure environment (computed from the Kraus overlap matrix), and the
total entropy production of the joint evolution. Everything is in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from . import qmat
from .channels import KrausFamily, apply
from .errors import NumericalError

DISCORD_NEG_TOL = 1e-6

_THETA_POINTS = 64
_PHI_POINTS = 128
_PROB_FLOOR = 1e-14

_BASIS_GRID: tuple[np.ndarray, ...] | None = None


@dataclass(frozen=True)
class MeasurementBasis:
    """Bloch direction (theta, phi) of a rank-1 projective qubit basis."""

    theta: float
    phi: float

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        b0, b1 = _basis_pair(np.array([self.theta]), np.array([self.phi]))
        return b0[0], b1[0]

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        b0, b1 = self.vectors()
        return qmat.projector(b0), qmat.projector(b1)


@dataclass(frozen=True)
class InfoQuantities:
    """Bundle of the per-time information quantities, all in bits."""

    mutual: float
    classical: float
    discord: float
    entropy_exchange: float
    tep: float


class CorrelationResult(NamedTuple):
    mutual: float
    classical: float
    discord: float
    basis: MeasurementBasis


# ---------------------------------------------------------------------------
# Entropy exchange via the Kraus overlap matrix
# ---------------------------------------------------------------------------

def w_matrix(rho: np.ndarray, k: KrausFamily) -> np.ndarray:
    """Normalized overlap matrix W_ij = Tr(K_i rho K_j^dag) / Tr(channel[rho]).

    W is a density matrix on the effective environment; its entropy is the
    entropy exchange. The normalization is computed explicitly even though it
    is 1 for trace-preserving families, to absorb accumulated roundoff.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (k.dim, k.dim):
        raise ValueError(f"state shape {rho.shape} does not match channel dim {k.dim}")
    ops = k.stack()
    w = np.einsum("iab,bc,jac->ij", ops, rho, ops.conj())
    norm = float(np.trace(w).real)
    if norm <= 0:
        raise NumericalError("channel output has non-positive trace")
    w = w / norm
    return 0.5 * (w + w.conj().T)


def entropy_exchange(rho: np.ndarray, k: KrausFamily) -> float:
    """Entropy (bits) acquired by an initially pure environment."""
    qmat.check_density(rho)
    w = w_matrix(rho, k)
    return float(qmat.entropy_from_eigs(qmat.eigvalsh_stack(w)))


# ---------------------------------------------------------------------------
# Mutual information
# ---------------------------------------------------------------------------

def mutual_information(rho_xy: np.ndarray, dims: tuple[int, int]) -> float:
    """I(X:Y) = S(X) + S(Y) - S(XY) in bits."""
    rho_xy = np.asarray(rho_xy, dtype=complex)
    rho_x = qmat.partial_trace(rho_xy, dims, "first")
    rho_y = qmat.partial_trace(rho_xy, dims, "second")
    mi = (
        qmat.vn_entropy(rho_x, check=False)
        + qmat.vn_entropy(rho_y, check=False)
        - qmat.vn_entropy(rho_xy, check=False)
    )
    if mi < -1e-9:
        raise NumericalError(f"mutual information {mi:.3e} is negative")
    return max(mi, 0.0)


# ---------------------------------------------------------------------------
# Projective-measurement minimization on the second (apparatus) factor
# ---------------------------------------------------------------------------

def _basis_pair(theta: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal qubit pair along the Bloch direction (theta, phi).

    Returns arrays of shape (..., 2): b0 = (cos t/2, e^{i phi} sin t/2),
    b1 = (-e^{-i phi} sin t/2, cos t/2).
    """
    ct = np.cos(0.5 * theta)
    st = np.sin(0.5 * theta)
    ph = np.exp(1j * phi)
    b0 = np.stack([ct + 0j, ph * st], axis=-1)
    b1 = np.stack([-st / ph, ct + 0j], axis=-1)
    return b0, b1


def _grid() -> tuple[np.ndarray, ...]:
    """Cached Bloch-sphere grid with basis vectors and their outer products."""
    global _BASIS_GRID
    if _BASIS_GRID is None:
        thetas = np.linspace(0.0, np.pi, _THETA_POINTS)
        phis = np.linspace(0.0, 2.0 * np.pi, _PHI_POINTS, endpoint=False)
        tt, pp = np.meshgrid(thetas, phis, indexing="ij")
        tflat, pflat = tt.ravel(), pp.ravel()
        b0, b1 = _basis_pair(tflat, pflat)
        # ob[n, 2a+b] = conj(b[n,a]) b[n,b], laid out to contract with a
        # (su, ab)-reshaped state in one matmul
        ob0 = (b0.conj()[:, :, None] * b0[:, None, :]).reshape(-1, 4)
        ob1 = (b1.conj()[:, :, None] * b1[:, None, :]).reshape(-1, 4)
        _BASIS_GRID = (tflat, pflat, b0, b1, ob0.T.copy(), ob1.T.copy())
    return _BASIS_GRID


def _avg_conditional_entropy_qubit(r_perm: np.ndarray, ob0t: np.ndarray,
                                   ob1t: np.ndarray) -> np.ndarray:
    """Grid sweep of sum_i p_i S(rho^{X|i}) for a qubit X, via one matmul.

    r_perm is the state reshaped to (su, ab); ob*t are (4, B) transposed
    outer-product tables from _grid().
    """
    total = 0.0
    for obt in (ob0t, ob1t):
        cond = r_perm @ obt                     # (4, B), rows are su = 00,01,10,11
        w = cond[0].real
        x = cond[1]
        z = cond[3].real
        p = w + z
        pm = np.where(p > _PROB_FLOOR, p, 1.0)
        mean = 0.5 * (w + z)
        disc = np.sqrt(np.maximum(0.25 * (w - z) ** 2 + x.real ** 2 + x.imag ** 2, 0.0))
        l1 = np.clip((mean - disc) / pm, 0.0, 1.0)
        l2 = np.clip((mean + disc) / pm, 0.0, 1.0)
        ent = -(l1 * np.log2(np.where(l1 > 0.0, l1, 1.0))
                + l2 * np.log2(np.where(l2 > 0.0, l2, 1.0)))
        total = total + np.where(p > _PROB_FLOOR, p * ent, 0.0)
    return total


def _avg_conditional_entropy(r4: np.ndarray, b0: np.ndarray, b1: np.ndarray) -> np.ndarray:
    """sum_i p_i S(rho^{X|i}) for measurement bases given as (B, 2) pairs."""
    total = 0.0
    for b in (b0, b1):
        cond = np.einsum("na,saub,nb->nsu", b.conj(), r4, b)
        p = np.einsum("nss->n", cond).real
        vals = qmat.eigvalsh_stack(cond).real
        pm = np.where(p > _PROB_FLOOR, p, 1.0)
        lam = np.clip(vals / pm[:, None], 0.0, 1.0)
        ent = -np.sum(lam * np.log2(np.where(lam > 0.0, lam, 1.0)), axis=-1)
        total = total + np.where(p > _PROB_FLOOR, p * ent, 0.0)
    return total


def _scalar_objective(r4: np.ndarray, dx: int):
    """Per-basis objective f([theta, phi]) for the Nelder-Mead refinements.

    Refinement evaluates one basis at a time, where array-call overhead
    dominates; for a qubit X factor the 2x2 conditional states have
    closed-form eigenvalues, so the contraction runs in plain Python.
    """
    if dx != 2:
        def generic(x) -> float:
            bb0, bb1 = _basis_pair(np.asarray([x[0]]), np.asarray([x[1]]))
            return float(_avg_conditional_entropy(r4, bb0, bb1)[0])

        return generic

    def block(s: int, u: int):
        return tuple(tuple(complex(r4[s, a, u, b]) for b in range(2)) for a in range(2))

    m00, m01, m11 = block(0, 0), block(0, 1), block(1, 1)
    log2, sqrt, cos, sin = math.log2, math.sqrt, math.cos, math.sin

    def contract(m, u0, u1, cu0, cu1) -> complex:
        return cu0 * (m[0][0] * u0 + m[0][1] * u1) + cu1 * (m[1][0] * u0 + m[1][1] * u1)

    def fast(x) -> float:
        theta, phi = float(x[0]), float(x[1])
        ct, st = cos(0.5 * theta), sin(0.5 * theta)
        ph = complex(cos(phi), sin(phi))
        total = 0.0
        for u0, u1 in ((complex(ct), ph * st), (-st * ph.conjugate(), complex(ct))):
            cu0, cu1 = u0.conjugate(), u1.conjugate()
            w = contract(m00, u0, u1, cu0, cu1).real
            z = contract(m11, u0, u1, cu0, cu1).real
            xod = contract(m01, u0, u1, cu0, cu1)
            p = w + z
            if p <= _PROB_FLOOR:
                continue
            mean = 0.5 * (w + z)
            disc = sqrt(max(0.25 * (w - z) ** 2 + xod.real ** 2 + xod.imag ** 2, 0.0))
            ent = 0.0
            for lam in ((mean - disc) / p, (mean + disc) / p):
                lam = min(max(lam, 0.0), 1.0)
                if lam > 0.0:
                    ent -= lam * log2(lam)
            total += p * ent
        return total

    return fast


def _canonical_angles(theta: float, phi: float) -> tuple[float, float]:
    nx = np.sin(theta) * np.cos(phi)
    ny = np.sin(theta) * np.sin(phi)
    nz = np.cos(theta)
    theta_c = float(np.arccos(np.clip(nz, -1.0, 1.0)))
    if min(theta_c, np.pi - theta_c) < 1e-12:
        return theta_c, 0.0
    return theta_c, float(np.arctan2(ny, nx) % (2.0 * np.pi))


def classical_correlation(
    rho_xy: np.ndarray, dims: tuple[int, int] = (2, 2)
) -> tuple[float, MeasurementBasis]:
    """Classical correlation J and its minimizing apparatus basis.

    J = S(X) - min over projective bases of sum_i p_i S(rho^{X|i}), the
    measurement acting on the second factor (a qubit). A 64 x 128 grid over
    the Bloch sphere seeds Nelder-Mead refinements from the best three cells;
    ties are broken toward smaller theta, then smaller phi.
    """
    rho_xy = np.asarray(rho_xy, dtype=complex)
    dx, dy = dims
    if dy != 2:
        raise ValueError("measured factor must be a qubit")
    if rho_xy.shape != (dx * dy, dx * dy):
        raise ValueError(f"state shape {rho_xy.shape} does not match dims {dims}")
    r4 = rho_xy.reshape(dx, 2, dx, 2)

    tflat, pflat, b0, b1 = _grid()
    vals = _avg_conditional_entropy(r4, b0, b1)
    order = np.lexsort((pflat, tflat, vals))

    objective = _scalar_objective(r4, dx)

    candidates: list[tuple[float, float, float]] = []
    for idx in order[:3]:
        x0 = np.array([tflat[idx], pflat[idx]])
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-12, "maxfev": 400},
        )
        th, ph = _canonical_angles(float(res.x[0]), float(res.x[1]))
        candidates.append((float(res.fun), th, ph))
        candidates.append((float(vals[idx]), *_canonical_angles(tflat[idx], pflat[idx])))

    best = min(candidates)
    s_x = qmat.vn_entropy(qmat.partial_trace(rho_xy, dims, "first"), check=False)
    j = max(s_x - best[0], 0.0)
    return j, MeasurementBasis(theta=best[1], phi=best[2])


def correlations(rho_xy: np.ndarray, dims: tuple[int, int] = (2, 2)) -> CorrelationResult:
    """Mutual information, classical correlation and discord in one pass."""
    mi = mutual_information(rho_xy, dims)
    j, basis = classical_correlation(rho_xy, dims)
    d = mi - j
    if d < -DISCORD_NEG_TOL:
        raise NumericalError(f"discord {d:.3e} below -{DISCORD_NEG_TOL:g}")
    return CorrelationResult(mi, j, max(d, 0.0), basis)


def discord(rho_xy: np.ndarray, dims: tuple[int, int] = (2, 2)) -> float:
    """Quantum discord D = I - J with measurement on the second factor."""
    return correlations(rho_xy, dims).discord


# ---------------------------------------------------------------------------
# Total entropy production
# ---------------------------------------------------------------------------

def tep(initial: np.ndarray, evolved: np.ndarray, env_entropy: float) -> float:
    """Total entropy production S(evolved SA) + S(environment), in bits.

    Both initial entropies vanish (the initial SA state and the environment
    are pure), so the production is the sum of the final entropies. With a
    pure global state this also equals twice either term.
    """
    qmat.check_pure_state(np.asarray(initial, dtype=complex))
    return qmat.vn_entropy(evolved, check=False) + float(env_entropy)


def channel_info(psi_sa: np.ndarray, family_sa: KrausFamily) -> InfoQuantities:
    """All single-time quantities for a pure SA state through an SA channel."""
    qmat.check_pure_state(psi_sa)
    rho0 = qmat.projector(psi_sa)
    evolved = apply(family_sa, rho0)
    s_e = entropy_exchange(rho0, family_sa)
    production = tep(psi_sa, evolved, s_e)
    corr = correlations(evolved, (2, 2))
    return InfoQuantities(
        mutual=corr.mutual,
        classical=corr.classical,
        discord=corr.discord,
        entropy_exchange=s_e,
        tep=production,
    )
