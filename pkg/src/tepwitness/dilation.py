"""Independent verification path through an explicit environment.

A channel given by m Kraus operators on the apparatus is dilated to an
isometry into apparatus (x) environment with an m-dimensional environment.
Evolving the full system-apparatus-environment state and tracing out factors
gives every entropic quantity a second, brute-force route; the identities
checked here hold exactly for any minimal dilation, so agreement pins down
both the channel code and the entropy code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import entropy, qmat
from .channels import COMPLETENESS_TOL, ChannelModel, KrausFamily, extend_to_sa, kraus_for
from .errors import OracleCheckError

ORACLE_TOL = 1e-9


def stinespring(k: KrausFamily) -> np.ndarray:
    """Isometry V = sum_i K_i (x) |i>_E, shape (dim * m, dim).

    V maps the apparatus space into apparatus (x) environment against a fixed
    pure environment reference; Tr_E[V rho V^dag] reproduces the channel.
    """
    defect = k.completeness_defect()
    if defect > COMPLETENESS_TOL:
        raise ValueError(f"Kraus family is not trace preserving: defect {defect:.3e}")
    d, m = k.dim, len(k)
    v = np.zeros((d, m, d), dtype=complex)
    for i, op in enumerate(k.ops):
        v[:, i, :] = op
    v = v.reshape(d * m, d)
    residual = np.max(np.abs(v.conj().T @ v - np.eye(d)))
    if residual > 1e-10:
        raise ValueError(f"dilation is not an isometry: |V^dag V - I| = {residual:.3e}")
    return v


def dilated_state(psi_sa: np.ndarray, k: KrausFamily) -> np.ndarray:
    """Pure global state (I_S (x) V) |psi><psi| (I_S (x) V)^dag on S (x) A (x) E."""
    psi_sa = np.asarray(psi_sa, dtype=complex)
    qmat.check_pure_state(psi_sa)
    if k.dim != 2 or psi_sa.shape != (4,):
        raise ValueError("expected a two-qubit state and an apparatus-qubit channel")
    v = stinespring(k)
    m = len(k)
    psi2 = psi_sa.reshape(2, 2)
    psi_sae = np.einsum("xb,sb->sx", v, psi2).reshape(2 * 2 * m)
    rho = qmat.projector(psi_sae)
    pur = qmat.purity(rho)
    if abs(pur - 1.0) > 1e-10:
        raise ValueError(f"dilated state is not pure: Tr(rho^2) = {pur}")
    return rho


@dataclass
class OracleReport:
    """Residuals of the entropy identities at a single time."""

    t: float
    env_dim: int
    residuals: dict[str, float] = field(default_factory=dict)
    mutual_ae: float = 0.0
    tol: float = ORACLE_TOL

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values()) and (
            self.mutual_ae >= -self.tol
        )

    def worst(self) -> tuple[str, float]:
        name = max(self.residuals, key=lambda n: self.residuals[n])
        return name, self.residuals[name]


IDENTITY_ENV_VS_SA = "env-entropy-equals-sa-entropy"
IDENTITY_EXCHANGE = "entropy-exchange-matches-env-entropy"
IDENTITY_COMPLEMENT = "complement-entropy-equals-system-entropy"
IDENTITY_BALANCE = "information-balance"


def oracle_checks(
    psi_sa: np.ndarray,
    model: ChannelModel,
    t: float,
    kraus_family: KrausFamily | None = None,
    tol: float = ORACLE_TOL,
    raise_on_failure: bool = True,
) -> OracleReport:
    """Verify the four entropy identities against the explicit dilation.

    (a) the environment and system-apparatus entropies agree (pure global
        state), (b) the environment entropy equals the Kraus-overlap entropy
    exchange, (c) the apparatus+environment entropy equals the system entropy
    (complement purity), (d) the change in mutual information plus the total
    entropy production equals the apparatus-environment mutual information,
    which is itself non-negative.

    kraus_family overrides the model's family at t (used to probe corrupted
    channels). With raise_on_failure, the first identity whose residual
    exceeds tol raises OracleCheckError naming it.
    """
    psi_sa = np.asarray(psi_sa, dtype=complex)
    k = kraus_family if kraus_family is not None else kraus_for(model, t)
    rho_sae = dilated_state(psi_sa, k)
    m = len(k)

    rho_sa_t = qmat.partial_trace(rho_sae, (4, m), "first")
    rho_env = qmat.partial_trace(rho_sae, (4, m), "second")
    rho_ae = qmat.partial_trace(rho_sae, (2, 2 * m), "second")
    rho_s = qmat.partial_trace(rho_sae, (2, 2 * m), "first")
    rho_a = qmat.partial_trace(rho_sa_t, (2, 2), "second")

    s_sa = qmat.vn_entropy(rho_sa_t, check=False)
    s_env = qmat.vn_entropy(rho_env, check=False)
    s_ae = qmat.vn_entropy(rho_ae, check=False)
    s_s = qmat.vn_entropy(rho_s, check=False)
    s_a = qmat.vn_entropy(rho_a, check=False)

    rho0 = qmat.projector(psi_sa)
    s_exchange = entropy.entropy_exchange(rho0, extend_to_sa(k))

    mutual_initial = entropy.mutual_information(rho0, (2, 2))
    mutual_final = s_s + s_a - s_sa
    delta_i = mutual_final - mutual_initial
    delta_sp = s_sa + s_env
    mutual_ae = s_a + s_env - s_ae

    report = OracleReport(t=float(t), env_dim=m, tol=tol, mutual_ae=float(mutual_ae))
    report.residuals[IDENTITY_ENV_VS_SA] = abs(s_env - s_sa)
    report.residuals[IDENTITY_EXCHANGE] = abs(s_env - s_exchange)
    report.residuals[IDENTITY_COMPLEMENT] = abs(s_ae - s_s)
    report.residuals[IDENTITY_BALANCE] = abs(delta_i + delta_sp - mutual_ae)

    if raise_on_failure:
        for name, residual in report.residuals.items():
            if residual > tol:
                raise OracleCheckError(name, residual, float(t))
        if mutual_ae < -tol:
            raise OracleCheckError(IDENTITY_BALANCE, -mutual_ae, float(t))
    return report
