"""Time-parameterized Kraus families for three exactly solvable qubit channels.

Three models act on the apparatus qubit:

* pure dephasing against a bath with spectral exponent s and cutoff omega_c
  (off-diagonals shrink by a factor gamma(t)),
* amplitude damping with a Lorentzian coupling spectrum of width lam and
  resonant rate gamma0 (populations relax through the memory kernel G(t)),
* generalized amplitude damping with mixing weight P(t) = cos^2(omega t) and
  residual coherence q(t) = exp(-t).

Times are in units of 1/omega_c for dephasing, 1/gamma0 for amplitude
damping, and dimensionless for the generalized model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import NumericalError
from .quad import adaptive_simpson, cumulative_integral

COMPLETENESS_TOL = 1e-10

# |d| * t below this uses the degenerate-rate series for G(t) and the decay rate
_SMALL_DT = 1e-6


@dataclass(frozen=True)
class KrausFamily:
    """Ordered operator-sum representation {K_i} of a channel.

    Completeness (sum K^dag K = I) is not enforced at construction so that
    deliberately broken families can be built for negative tests; apply() and
    the dilation routines reject families whose defect exceeds
    COMPLETENESS_TOL.
    """

    ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.ops)
        if not ops:
            raise ValueError("a Kraus family needs at least one operator")
        d = ops[0].shape
        if len(d) != 2 or d[0] != d[1]:
            raise ValueError(f"Kraus operators must be square, got shape {d}")
        if any(k.shape != d for k in ops):
            raise ValueError("all Kraus operators must share one dimension")
        object.__setattr__(self, "ops", ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def __len__(self) -> int:
        return len(self.ops)

    def stack(self) -> np.ndarray:
        return np.stack(self.ops)

    def completeness_defect(self) -> float:
        """max entrywise |sum_i K_i^dag K_i - I|."""
        acc = sum(k.conj().T @ k for k in self.ops)
        return float(np.max(np.abs(acc - np.eye(self.dim))))


@dataclass(frozen=True)
class Dephasing:
    s: float
    omega_c: float

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError(f"spectral exponent s must be > 0, got {self.s}")
        if self.omega_c <= 0:
            raise ValueError(f"cutoff omega_c must be > 0, got {self.omega_c}")


@dataclass(frozen=True)
class AmplitudeDamping:
    lam: float
    gamma0: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"spectral width lam must be > 0, got {self.lam}")
        if self.gamma0 <= 0:
            raise ValueError(f"rate gamma0 must be > 0, got {self.gamma0}")


@dataclass(frozen=True)
class GeneralizedAmplitudeDamping:
    omega: float


ChannelModel = Dephasing | AmplitudeDamping | GeneralizedAmplitudeDamping


# ---------------------------------------------------------------------------
# Pure dephasing
# ---------------------------------------------------------------------------

def dephasing_rate(tau, s: float, omega_c: float):
    """Instantaneous dephasing rate eta(tau).

    eta(tau) = omega_c [1 + (omega_c tau)^2]^(-s/2) Gamma(s)
               sin[s arctan(omega_c tau)]

    Negative values (possible for s > 2 once s*arctan(omega_c tau) passes pi)
    signal recoherence.
    """
    tau = np.asarray(tau, dtype=float)
    x = omega_c * tau
    out = (
        omega_c
        * np.power(1.0 + x * x, -0.5 * s)
        * math.gamma(s)
        * np.sin(s * np.arctan(x))
    )
    return float(out) if out.ndim == 0 else out


def dephasing_factor(t: float, s: float, omega_c: float, tol: float = 1e-10) -> float:
    """Coherence factor gamma(t) = exp(-integral_0^t eta(tau) dtau)."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if t == 0:
        return 1.0
    integral = adaptive_simpson(lambda u: dephasing_rate(u, s, omega_c), 0.0, t, tol)
    return float(math.exp(-integral))


def dephasing_factor_grid(times: np.ndarray, s: float, omega_c: float,
                          tol: float = 1e-10) -> np.ndarray:
    """gamma(t) on an increasing grid starting at 0, one quadrature pass."""
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0:
        raise ValueError("grid must start at t = 0")
    cum = cumulative_integral(lambda u: dephasing_rate(u, s, omega_c), times, tol)
    return np.exp(-cum)


def _dephasing_ops(gamma: float) -> tuple[np.ndarray, np.ndarray]:
    k0 = math.sqrt((1.0 + gamma) / 2.0) * qmat.I2
    k1 = math.sqrt(max(1.0 - gamma, 0.0) / 2.0) * qmat.PAULI_Z
    return k0, k1


def dephasing_kraus(t: float, model: Dephasing) -> KrausFamily:
    """Two-operator realization {a I, b sigma_z} of the dephasing map.

    a = sqrt((1+gamma)/2), b = sqrt((1-gamma)/2); diagonals are untouched and
    off-diagonals scale by gamma(t). Operator-sum realizations are not unique;
    this is the minimal one.
    """
    return KrausFamily(_dephasing_ops(dephasing_factor(t, model.s, model.omega_c)))


# ---------------------------------------------------------------------------
# Amplitude damping
# ---------------------------------------------------------------------------

def ad_G(t, lam: float, gamma0: float):
    """Memory kernel G(t) of the damped qubit.

    G(t) = exp(-lam t/2) [cosh(d t/2) + (lam/d) sinh(d t/2)] with
    d = sqrt(lam^2 - 2 gamma0 lam). For lam < 2 gamma0 the root is imaginary
    and the hyperbolic pair turns into cos/sin with |d|; for |d| t < 1e-6 the
    degenerate series exp(-lam t/2)(1 + lam t/2) avoids the 0/0.
    """
    tarr = np.asarray(t, dtype=float)
    disc = lam * lam - 2.0 * gamma0 * lam
    dabs = math.sqrt(abs(disc))
    decay = np.exp(-0.5 * lam * tarr)
    series = decay * (1.0 + 0.5 * lam * tarr)
    if dabs == 0.0:
        out = series
    else:
        x = 0.5 * dabs * tarr
        if disc > 0:
            # overflow-safe split of exp(-lam t/2) cosh/sinh
            out_main = 0.5 * (
                (1.0 + lam / dabs) * np.exp(x - 0.5 * lam * tarr)
                + (1.0 - lam / dabs) * np.exp(-x - 0.5 * lam * tarr)
            )
        else:
            out_main = decay * (np.cos(x) + (lam / dabs) * np.sin(x))
        out = np.where(dabs * tarr < _SMALL_DT, series, out_main)
    return float(out) if out.ndim == 0 else out


def ad_decay_rate(t, model: AmplitudeDamping):
    """Time-dependent decay rate gamma(t) = -2 G'(t)/G(t).

    gamma(t) = 2 gamma0 lam sinh(d t/2) / [d cosh(d t/2) + lam sinh(d t/2)],
    with the same branch handling as ad_G. Diverges at the zeros of G; a
    denominator magnitude below 1e-12 raises NumericalError with the pole
    location.
    """
    lam, gamma0 = model.lam, model.gamma0
    tarr = np.asarray(t, dtype=float)
    disc = lam * lam - 2.0 * gamma0 * lam
    dabs = math.sqrt(abs(disc))
    series = gamma0 * lam * tarr / (1.0 + 0.5 * lam * tarr)
    if dabs == 0.0:
        out = series
    else:
        x = 0.5 * dabs * tarr
        small = dabs * tarr < _SMALL_DT
        if disc > 0:
            # scale num/den by exp(-x); denominator >= d > 0, no poles
            e = np.exp(-2.0 * x)
            num = 2.0 * gamma0 * lam * (1.0 - e)
            den = dabs * (1.0 + e) + lam * (1.0 - e)
        else:
            num = 2.0 * gamma0 * lam * np.sin(x)
            den = dabs * np.cos(x) + lam * np.sin(x)
            bad = (~small) & (np.abs(den) < 1e-12)
            if np.any(bad):
                t_pole = float(np.atleast_1d(tarr)[np.atleast_1d(bad)][0])
                raise NumericalError("decay-rate denominator vanished", where=t_pole)
        out = np.where(small, series, num / np.where(den == 0.0, 1.0, den))
    return float(out) if out.ndim == 0 else out


def _ad_ops(g: float) -> tuple[np.ndarray, np.ndarray]:
    k1 = np.array([[1.0, 0.0], [0.0, g]], dtype=complex)
    k2 = np.array(
        [[0.0, math.sqrt(max(1.0 - g * g, 0.0))], [0.0, 0.0]], dtype=complex
    )
    return k1, k2


def ad_kraus(t: float, model: AmplitudeDamping) -> KrausFamily:
    """Kraus pair {diag(1, G), |0><1| sqrt(1 - |G|^2)} of the damping map.

    G(t) may pass through zero and go negative on the oscillatory branch; the
    square root uses |G|^2 and the signed G stays in the first operator.
    """
    return KrausFamily(_ad_ops(float(ad_G(t, model.lam, model.gamma0))))


# ---------------------------------------------------------------------------
# Generalized amplitude damping
# ---------------------------------------------------------------------------

def _gad_ops(p: float, q: float) -> tuple[np.ndarray, ...]:
    sp = math.sqrt(p)
    sq = math.sqrt(q)
    s1p = math.sqrt(1.0 - p)
    s1q = math.sqrt(max(1.0 - q, 0.0))
    e1 = sp * np.array([[1.0, 0.0], [0.0, sq]], dtype=complex)
    e2 = sp * np.array([[0.0, s1q], [0.0, 0.0]], dtype=complex)
    e3 = s1p * np.array([[sq, 0.0], [0.0, 1.0]], dtype=complex)
    e4 = s1p * np.array([[0.0, 0.0], [s1q, 0.0]], dtype=complex)
    return e1, e2, e3, e4


def gad_kraus(t: float, omega: float) -> KrausFamily:
    """Four-operator family with P(t) = cos^2(omega t), q(t) = exp(-t).

    P weights decay toward |0> against excitation toward |1>; at t = 0
    (P = q = 1) the channel is the identity.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    p = math.cos(omega * t) ** 2
    q = math.exp(-t)
    return KrausFamily(_gad_ops(p, q))


# ---------------------------------------------------------------------------
# Application and extension
# ---------------------------------------------------------------------------

def apply(k: KrausFamily, rho: np.ndarray) -> np.ndarray:
    """Evolve rho through the channel: sum_i K_i rho K_i^dag."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (k.dim, k.dim):
        raise ValueError(f"state shape {rho.shape} does not match channel dim {k.dim}")
    defect = k.completeness_defect()
    if defect > COMPLETENESS_TOL:
        raise ValueError(f"Kraus family is not trace preserving: defect {defect:.3e}")
    ops = k.stack()
    return np.einsum("iab,bc,idc->ad", ops, rho, ops.conj())


def extend_to_sa(k: KrausFamily) -> KrausFamily:
    """Lift an apparatus channel to the system-apparatus space as {I (x) K_i}."""
    return KrausFamily(tuple(qmat.tensor(qmat.I2, op) for op in k.ops))


# ---------------------------------------------------------------------------
# Grid evaluation used by trajectories
# ---------------------------------------------------------------------------

def kraus_for(model: ChannelModel, t: float) -> KrausFamily:
    """Kraus family of the model at a single time."""
    if isinstance(model, Dephasing):
        return dephasing_kraus(t, model)
    if isinstance(model, AmplitudeDamping):
        return ad_kraus(t, model)
    if isinstance(model, GeneralizedAmplitudeDamping):
        return gad_kraus(t, model.omega)
    raise TypeError(f"unknown channel model {model!r}")


def kraus_count(model: ChannelModel) -> int:
    return 4 if isinstance(model, GeneralizedAmplitudeDamping) else 2


def scalar_series(model: ChannelModel, times: np.ndarray) -> np.ndarray:
    """The model's characteristic scalar on a grid: gamma(t), G(t) or P(t)."""
    times = np.asarray(times, dtype=float)
    if isinstance(model, Dephasing):
        return dephasing_factor_grid(times, model.s, model.omega_c)
    if isinstance(model, AmplitudeDamping):
        return np.asarray(ad_G(times, model.lam, model.gamma0))
    if isinstance(model, GeneralizedAmplitudeDamping):
        return np.cos(model.omega * times) ** 2
    raise TypeError(f"unknown channel model {model!r}")


def kraus_stack(model: ChannelModel, times: np.ndarray,
                scalars: np.ndarray | None = None) -> np.ndarray:
    """Kraus operators on a grid as a (T, n_ops, 2, 2) complex stack.

    scalars, when given, must be scalar_series(model, times); passing it in
    lets callers reuse the dephasing quadrature pass.
    """
    times = np.asarray(times, dtype=float)
    if scalars is None:
        scalars = scalar_series(model, times)
    nt = len(times)
    if isinstance(model, Dephasing):
        g = scalars
        out = np.zeros((nt, 2, 2, 2), dtype=complex)
        a = np.sqrt((1.0 + g) / 2.0)
        b = np.sqrt(np.maximum(1.0 - g, 0.0) / 2.0)
        out[:, 0, 0, 0] = a
        out[:, 0, 1, 1] = a
        out[:, 1, 0, 0] = b
        out[:, 1, 1, 1] = -b
        return out
    if isinstance(model, AmplitudeDamping):
        g = scalars
        out = np.zeros((nt, 2, 2, 2), dtype=complex)
        out[:, 0, 0, 0] = 1.0
        out[:, 0, 1, 1] = g
        out[:, 1, 0, 1] = np.sqrt(np.maximum(1.0 - g * g, 0.0))
        return out
    if isinstance(model, GeneralizedAmplitudeDamping):
        p = scalars
        q = np.exp(-times)
        sp = np.sqrt(p)
        s1p = np.sqrt(np.maximum(1.0 - p, 0.0))
        sq = np.sqrt(q)
        s1q = np.sqrt(np.maximum(1.0 - q, 0.0))
        out = np.zeros((nt, 4, 2, 2), dtype=complex)
        out[:, 0, 0, 0] = sp
        out[:, 0, 1, 1] = sp * sq
        out[:, 1, 0, 1] = sp * s1q
        out[:, 2, 0, 0] = s1p * sq
        out[:, 2, 1, 1] = s1p
        out[:, 3, 1, 0] = s1p * s1q
        return out
    raise TypeError(f"unknown channel model {model!r}")


def extend_stack(kstack: np.ndarray) -> np.ndarray:
    """Lift a (T, m, 2, 2) apparatus stack to (T, m, 4, 4) as I (x) K."""
    t, m = kstack.shape[:2]
    out = np.zeros((t, m, 4, 4), dtype=complex)
    out[:, :, 0:2, 0:2] = kstack
    out[:, :, 2:4, 2:4] = kstack
    return out
