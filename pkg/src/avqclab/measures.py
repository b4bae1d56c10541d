"""Entropic quantities, all in bits (base-2 logarithms).

Eigenvalues and probabilities below ``TOL_PSD`` contribute zero to every
entropy here, which keeps the functions total on validated inputs whose
spectra may dip a hair below zero.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from .config import TOL_PSD
from .errors import DimensionMismatch, ValidationError
from .quantum import DensityMatrix, QuantumChannel, hermitize

if TYPE_CHECKING:
    from .avqc import CqChannel
    from .correlation import BipartiteSource

__all__ = [
    "shannon_entropy",
    "binary_entropy",
    "von_neumann_entropy",
    "holevo_chi",
    "mutual_information",
    "entanglement_fidelity",
    "entanglement_fidelity_purification",
]


def shannon_entropy(probs) -> float:
    """Entropy of a nonnegative vector; entries below tolerance contribute 0."""
    p = np.asarray(probs, dtype=float).reshape(-1)
    if np.any(p < -TOL_PSD):
        raise ValidationError(f"shannon_entropy: negative entry {p.min():.3e}")
    kept = p[p > TOL_PSD]
    if kept.size == 0:
        return 0.0
    value = float(-(kept * np.log2(kept)).sum())
    if not np.isfinite(value):
        raise ValidationError("shannon_entropy: non-finite result")
    return value


def binary_entropy(p: float) -> float:
    return shannon_entropy([p, 1.0 - p])


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -tr(rho log2 rho)."""
    vals = np.linalg.eigvalsh(hermitize(np.asarray(rho.matrix)))
    return shannon_entropy(vals)


def holevo_chi(probs, w: "CqChannel") -> float:
    """Holevo quantity of the ensemble {p(z), W(z)} in bits.

    chi = S(sum_z p(z) W(z)) - sum_z p(z) S(W(z)); ``probs`` is aligned with
    ``w.alphabet``.
    """
    p = np.asarray(probs, dtype=float).reshape(-1)
    outputs = w.output_list()
    if p.size != len(outputs):
        raise DimensionMismatch(
            f"holevo_chi: {p.size} probabilities for {len(outputs)} letters"
        )
    if np.any(p < -TOL_PSD) or abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValidationError("holevo_chi: probs must form a probability vector")
    avg = np.zeros((w.dim, w.dim), dtype=complex)
    conditional = 0.0
    for weight, out in zip(p, outputs):
        if weight <= 0.0:
            continue
        avg += weight * out.matrix
        conditional += weight * von_neumann_entropy(out)
    return von_neumann_entropy(DensityMatrix(avg)) - conditional


def _joint_table(src) -> np.ndarray:
    joint = np.asarray(getattr(src, "joint", src), dtype=float)
    if joint.ndim != 2:
        raise ValidationError("mutual_information: expected a 2-d joint table")
    return joint


def mutual_information(src: "BipartiteSource") -> float:
    """I(X; Y) = H(X) + H(Y) - H(X, Y) of a joint table, in bits.

    Accepts a bipartite source or a raw joint probability table.
    """
    joint = _joint_table(src)
    h_x = shannon_entropy(joint.sum(axis=1))
    h_y = shannon_entropy(joint.sum(axis=0))
    return h_x + h_y - shannon_entropy(joint)


def entanglement_fidelity(rho: DensityMatrix, ch: QuantumChannel) -> float:
    """F_e(rho, N) = sum_k |tr(rho K_k)|^2 over the Kraus family of ``N``.

    Requires a square channel acting on the space of ``rho``. Agrees with
    the purification definition; see ``entanglement_fidelity_purification``
    for the independent form.
    """
    if ch.dim_in != ch.dim_out:
        raise DimensionMismatch("entanglement_fidelity: channel must be square")
    if ch.dim_in != rho.dim:
        raise DimensionMismatch(
            f"entanglement_fidelity: state dim {rho.dim} vs channel dim {ch.dim_in}"
        )
    traces = np.einsum("kij,ji->k", ch.stacked, rho.matrix)
    value = float(np.sum(np.abs(traces) ** 2))
    return value


def entanglement_fidelity_purification(
    rho: DensityMatrix, ch: QuantumChannel, scheme: str = "eigen"
) -> float:
    """F_e via an explicit purification <psi|(id ⊗ N)(|psi><psi|)|psi>.

    ``scheme`` picks the purification: ``"eigen"`` uses the spectral form
    sum_i sqrt(lambda_i) |i>|e_i>, ``"embed"`` uses (I ⊗ sqrt(rho)) applied
    to the unnormalized maximally entangled vector. Both give the same value;
    this function exists as an independent route to ``entanglement_fidelity``.
    """
    if ch.dim_in != ch.dim_out or ch.dim_in != rho.dim:
        raise DimensionMismatch("entanglement_fidelity_purification: dims must agree")
    d = rho.dim
    if scheme == "eigen":
        vals, vecs = np.linalg.eigh(hermitize(np.asarray(rho.matrix)))
        psi = np.zeros(d * d, dtype=complex)
        for i in range(d):
            lam = max(float(vals[i]), 0.0)
            if lam == 0.0:
                continue
            basis = np.zeros(d, dtype=complex)
            basis[i] = 1.0
            psi += np.sqrt(lam) * np.kron(basis, vecs[:, i])
        psi /= np.linalg.norm(psi)
    elif scheme == "embed":
        vals, vecs = np.linalg.eigh(hermitize(np.asarray(rho.matrix)))
        root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
        omega = np.eye(d, dtype=complex).reshape(-1)  # sum_i |i>|i>
        psi = np.kron(np.eye(d), root) @ omega
        psi /= np.linalg.norm(psi)
    else:
        raise ValidationError(f"unknown purification scheme {scheme!r}")
    pure = np.outer(psi, psi.conj())
    # apply id ⊗ N on the second slot
    six = pure.reshape(d, d, d, d)  # (ref, sys, ref', sys')
    out = np.einsum("kxy,aybz,kwz->axbw", ch.stacked, six, ch.stacked.conj())
    out = out.reshape(d * d, d * d)
    return float(np.real(psi.conj() @ out @ psi))
