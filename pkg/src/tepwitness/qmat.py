"""Dense complex linear algebra for small Hilbert spaces.

Everything here operates on plain numpy arrays: states are unit vectors,
operators and density matrices are square complex arrays. Dimensions stay
small (products of qubit factors and a few-level effective environment), so
the Hermitian eigensolver is a hand-rolled cyclic Jacobi iteration that is
also usable in batched form over a whole time grid.

All entropies are in bits (base-2 logarithms).
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIG_NEG_TOL = 1e-10

_JACOBI_MAX_SWEEPS = 100
_JACOBI_OFF_TOL = 1e-14


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; entry ((i,k),(j,l)) = a[i,j] * b[k,l]."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def projector(psi: np.ndarray) -> np.ndarray:
    """Rank-1 projector |psi><psi|."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: str) -> np.ndarray:
    """Reduce a bipartite operator to one factor.

    Args:
        rho: square array on a space of dimension dims[0] * dims[1].
        dims: dimensions (d1, d2) of the two factors.
        keep: "first" or "second", the factor whose state is returned.
    """
    rho = np.asarray(rho, dtype=complex)
    d1, d2 = dims
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] != d1 * d2:
        raise ValueError(
            f"dimension mismatch: operator is {rho.shape}, factors are {dims}"
        )
    r4 = rho.reshape(d1, d2, d1, d2)
    if keep == "first":
        return np.trace(r4, axis1=1, axis2=3)
    if keep == "second":
        return np.trace(r4, axis1=0, axis2=2)
    raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")


def partial_trace_stack(rhos: np.ndarray, dims: tuple[int, int], keep: str) -> np.ndarray:
    """partial_trace over the trailing two axes of a (..., d, d) stack."""
    d1, d2 = dims
    r = np.asarray(rhos, dtype=complex)
    r6 = r.reshape(r.shape[:-2] + (d1, d2, d1, d2))
    if keep == "first":
        return np.trace(r6, axis1=-3, axis2=-1)
    if keep == "second":
        return np.trace(r6, axis1=-4, axis2=-2)
    raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")


# ---------------------------------------------------------------------------
# Hermitian eigensolver: cyclic Jacobi with complex Givens rotations.
# ---------------------------------------------------------------------------

def _offdiag_norm(a: np.ndarray) -> np.ndarray:
    # summing |a|^2 and subtracting the diagonal would cancel catastrophically
    n = a.shape[-1]
    sq = np.abs(a) ** 2
    sq[..., np.arange(n), np.arange(n)] = 0.0
    return np.sqrt(sq.sum(axis=(-2, -1)))


def _jacobi_eigh(mats: np.ndarray, want_vectors: bool):
    """Diagonalize a (B, n, n) Hermitian stack by cyclic Jacobi sweeps.

    Returns (vals, vecs) with vals ascending along the last axis; vecs is None
    unless requested. Convergence: off-diagonal Frobenius norm below
    _JACOBI_OFF_TOL relative to the matrix scale, at most _JACOBI_MAX_SWEEPS
    sweeps.
    """
    a = np.array(mats, dtype=complex)
    batch, n = a.shape[0], a.shape[-1]
    v = None
    if want_vectors:
        v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()

    if n == 1:
        vals = a[:, 0, 0].real.copy().reshape(batch, 1)
        return vals, v

    scale = np.maximum(1.0, np.sqrt((np.abs(a) ** 2).sum(axis=(-2, -1))))
    tol = _JACOBI_OFF_TOL * scale

    for _ in range(_JACOBI_MAX_SWEEPS):
        if np.all(_offdiag_norm(a) <= tol):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                r = np.abs(apq)
                if np.all(r <= 1e-300):
                    continue
                active = r > 1e-300
                r_safe = np.where(active, r, 1.0)
                phase = np.where(active, apq / r_safe, 1.0)
                app = a[:, p, p].real
                aqq = a[:, q, q].real
                with np.errstate(over="ignore"):
                    # tau may overflow to inf for denormal pivots; that path
                    # resolves to the identity rotation, which is what we want
                    tau = (app - aqq) / (2.0 * r_safe)
                    sgn = np.where(tau >= 0.0, 1.0, -1.0)
                    t = sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                c = np.where(active, c, 1.0)
                s = np.where(active, s, 0.0)
                u = s * phase          # s * e^{i phi}
                uc = u.conj()

                ap = a[:, :, p].copy()
                aq = a[:, :, q].copy()
                a[:, :, p] = c[:, None] * ap + uc[:, None] * aq
                a[:, :, q] = -u[:, None] * ap + c[:, None] * aq
                bp = a[:, p, :].copy()
                bq = a[:, q, :].copy()
                a[:, p, :] = c[:, None] * bp + u[:, None] * bq
                a[:, q, :] = -uc[:, None] * bp + c[:, None] * bq
                # kill roundoff on the zeroed pair
                a[:, p, q] = np.where(active, 0.0, a[:, p, q])
                a[:, q, p] = np.where(active, 0.0, a[:, q, p])

                if v is not None:
                    vp = v[:, :, p].copy()
                    vq = v[:, :, q].copy()
                    v[:, :, p] = c[:, None] * vp + uc[:, None] * vq
                    v[:, :, q] = -u[:, None] * vp + c[:, None] * vq
    else:
        raise NumericalError(
            f"Jacobi eigensolver did not converge in {_JACOBI_MAX_SWEEPS} sweeps"
        )

    vals = np.einsum("bii->bi", a).real.copy()
    order = np.argsort(vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    if v is not None:
        v = np.take_along_axis(v, order[:, None, :], axis=2)
    return vals, v


def _eigvals2_hermitian(stack: np.ndarray) -> np.ndarray:
    """Closed-form ascending eigenvalues of a (..., 2, 2) Hermitian stack."""
    a = stack[..., 0, 0].real
    d = stack[..., 1, 1].real
    b = stack[..., 0, 1]
    mean = 0.5 * (a + d)
    disc = np.sqrt(np.maximum(0.25 * (a - d) ** 2 + (b * b.conj()).real, 0.0))
    return np.stack([mean - disc, mean + disc], axis=-1)


def eigvalsh_stack(stack: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues for a (..., n, n) Hermitian stack.

    n == 2 uses the exact closed form (a single Jacobi rotation does the
    same); larger n runs batched Jacobi sweeps.
    """
    stack = np.asarray(stack, dtype=complex)
    n = stack.shape[-1]
    if n == 1:
        return stack[..., 0, 0].real[..., None].copy()
    if n == 2:
        return _eigvals2_hermitian(stack)
    lead = stack.shape[:-2]
    vals, _ = _jacobi_eigh(stack.reshape((-1, n, n)), want_vectors=False)
    return vals.reshape(lead + (n,))


def hermitian_eig(h: np.ndarray, vectors: bool = False, herm_tol: float = 1e-10):
    """Eigenvalues (ascending) of a Hermitian matrix via cyclic Jacobi.

    Args:
        h: square Hermitian array (checked entrywise against herm_tol).
        vectors: also return the unitary of eigenvectors as columns.

    Returns:
        eigenvalues (n,), or (eigenvalues, eigenvectors) if requested.

    Raises:
        ValueError: non-square or non-Hermitian input.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    defect = np.max(np.abs(h - h.conj().T))
    if defect > herm_tol:
        raise ValueError(f"matrix is not Hermitian: max |H - H^dag| = {defect:.3e}")
    hs = 0.5 * (h + h.conj().T)
    vals, vecs = _jacobi_eigh(hs[None, :, :], want_vectors=vectors)
    if vectors:
        return vals[0], vecs[0]
    return vals[0]


# ---------------------------------------------------------------------------
# Entropies and state validation.
# ---------------------------------------------------------------------------

def entropy_from_eigs(vals: np.ndarray, neg_tol: float = EIG_NEG_TOL) -> np.ndarray:
    """Shannon entropy in bits of eigenvalue arrays along the last axis.

    Values in [-neg_tol, 0) are treated as roundoff and clamped to 0; values
    below -neg_tol indicate a genuinely non-positive matrix and raise.
    Values are clipped to [0, 1] before the logarithm and 0*log0 := 0.
    """
    vals = np.asarray(vals, dtype=float)
    if np.any(vals < -neg_tol):
        raise NumericalError(
            f"eigenvalue {vals.min():.3e} below -{neg_tol:g}; state is not PSD"
        )
    lam = np.clip(vals, 0.0, 1.0)
    safe = np.where(lam > 0.0, lam, 1.0)
    return -np.sum(lam * np.log2(safe), axis=-1)


def vn_entropy(rho: np.ndarray, check: bool = True) -> float:
    """Von Neumann entropy S(rho) = -Tr(rho log2 rho) in bits."""
    rho = np.asarray(rho, dtype=complex)
    if check:
        check_density(rho)
    vals = eigvalsh_stack(0.5 * (rho + rho.conj().T))
    return float(entropy_from_eigs(vals))


def check_density(
    rho: np.ndarray,
    herm_tol: float = HERMITICITY_TOL,
    trace_tol: float = TRACE_TOL,
    eig_tol: float = EIG_NEG_TOL,
) -> None:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    defect = np.max(np.abs(rho - rho.conj().T))
    if defect > herm_tol:
        raise ValueError(f"density matrix not Hermitian: defect {defect:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} differs from 1")
    vals = eigvalsh_stack(0.5 * (rho + rho.conj().T))
    if float(vals.min()) < -eig_tol:
        raise ValueError(f"density matrix has eigenvalue {vals.min():.3e} < -{eig_tol:g}")


def check_pure_state(psi: np.ndarray, tol: float = 1e-12) -> None:
    """Validate that a state vector is normalized."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"state vector must be 1-D, got shape {psi.shape}")
    norm2 = float(np.sum(np.abs(psi) ** 2))
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"state vector norm^2 = {norm2} differs from 1")


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2)."""
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ rho)))
