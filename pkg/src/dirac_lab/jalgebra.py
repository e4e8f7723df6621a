"""Linear algebra in the indefinite metric of a signature matrix ``j``.

Everything here works on small dense complex matrices.  A matrix ``C`` is
*positive j-unitary* when ``C = C* > 0`` and ``C j C = j`` with
``j = diag(I_{m1}, -I_{m2})``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

DEFAULT_TOL = 1e-9
CONTRACTION_MARGIN = 1.0 - 1e-12


def default_tol() -> float:
    """Validation tolerance, overridable through ``DIRAC_LAB_TOL``."""
    value = os.environ.get("DIRAC_LAB_TOL")
    if value is None:
        return DEFAULT_TOL
    try:
        tol = float(value)
    except ValueError as exc:
        raise ValidationError(f"DIRAC_LAB_TOL is not a number: {value!r}") from exc
    if not tol > 0:
        raise ValidationError(f"DIRAC_LAB_TOL must be positive, got {tol}")
    return tol


@dataclass(frozen=True)
class Signature:
    """Block sizes ``(m1, m2)`` of the metric ``j = diag(I_{m1}, -I_{m2})``."""

    m1: int
    m2: int

    def __post_init__(self):
        for name in ("m1", "m2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValidationError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ValidationError(f"{name} must be >= 1, got {value}")

    @property
    def m(self) -> int:
        return self.m1 + self.m2

    @property
    def j(self) -> np.ndarray:
        return signature_matrix(self)


def signature_matrix(sig: Signature) -> np.ndarray:
    return np.diag(np.r_[np.ones(sig.m1), -np.ones(sig.m2)]).astype(complex)


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def _check_square(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {c.shape}")
    return c


def hermitian_power(c: np.ndarray, s: float, tol: float | None = None) -> np.ndarray:
    """Real power ``C**s`` of a Hermitian positive definite matrix.

    Uses the unitary eigendecomposition ``C = u D u*`` and returns
    ``u D**s u*``.  The input is symmetrized first, so round-off asymmetry
    below ``tol * ||C||`` is tolerated.

    Raises
    ------
    ValidationError
        If ``C`` is not Hermitian within tolerance or has a non-positive
        eigenvalue.
    """
    c = _check_square(c)
    tol = default_tol() if tol is None else tol
    scale = max(np.linalg.norm(c, 2), 1.0)
    if np.linalg.norm(c - c.conj().T, 2) > tol * scale:
        raise ValidationError("matrix is not Hermitian")
    w, u = np.linalg.eigh(hermitian_part(c))
    if w[0] <= 0:
        raise ValidationError(f"matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    out = (u * w**s) @ u.conj().T
    return hermitian_part(out)


def j_power(c: np.ndarray, sig: Signature, s: float) -> np.ndarray:
    """``C**s`` for positive j-unitary ``C`` without an eigendecomposition.

    Such a ``C`` is ``exp([[0, X], [X*, 0]])``.  With the SVD
    ``X = P diag(t) Q*`` its off-diagonal block is ``P sinh(t) Q*``, so ``t``
    and the singular vectors are read off ``c12`` alone and

        C**s = [[P cosh(s t) P*, P sinh(s t) Q*], [Q sinh(s t) P*, Q cosh(s t) Q*]]

    (with ``cosh = 1`` on the complement when ``m1 != m2``).  Unlike
    :func:`hermitian_power` this keeps the eigenvalues below one accurate
    when ``||C||`` is large.  The input is trusted to lie in the class.
    """
    c = np.asarray(c, dtype=complex)
    m1, m2 = sig.m1, sig.m2
    p, sv, qh = np.linalg.svd(c[:m1, m1:])
    q = qh.conj().T
    n = len(sv)
    t = s * np.arcsinh(sv)
    d1 = np.ones(m1)
    d1[:n] = np.cosh(t)
    d2 = np.ones(m2)
    d2[:n] = np.cosh(t)
    off = (p[:, :n] * np.sinh(t)) @ q[:, :n].conj().T
    return np.block([[(p * d1) @ p.conj().T, off], [off.conj().T, (q * d2) @ q.conj().T]])


def spectral_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def j_unitarity_residual(c: np.ndarray, sig: Signature) -> float:
    """``||C j C - j|| / max(1, ||C||**2)``."""
    j = sig.j
    c = np.asarray(c, dtype=complex)
    return float(np.linalg.norm(c @ j @ c - j, 2) / max(1.0, spectral_norm(c) ** 2))


def check_positive_j_unitary(c: np.ndarray, sig: Signature, tol: float | None = None) -> np.ndarray:
    """Validate membership in the class of positive j-unitary matrices.

    Returns the matrix as a complex array.  All three residuals are taken
    relative to ``||C||`` (or ``||C||**2`` for the quadratic one).
    """
    tol = default_tol() if tol is None else tol
    c = _check_square(c)
    if c.shape[0] != sig.m:
        raise ValidationError(f"expected a {sig.m}x{sig.m} matrix, got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValidationError("matrix has non-finite entries")
    norm = max(spectral_norm(c), 1.0)
    if np.linalg.norm(c - c.conj().T, 2) > tol * norm:
        raise ValidationError("matrix is not Hermitian")
    if np.linalg.eigvalsh(hermitian_part(c))[0] <= 0:
        raise ValidationError("matrix is not positive definite")
    res = j_unitarity_residual(c, sig)
    if res > tol:
        raise ValidationError(f"matrix is not j-unitary (residual {res:.3e})")
    return c


def check_contraction(rho: np.ndarray, sig: Signature | None = None) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2:
        raise ValidationError(f"expected a matrix, got shape {rho.shape}")
    if sig is not None and rho.shape != (sig.m1, sig.m2):
        raise ValidationError(f"expected a {sig.m1}x{sig.m2} matrix, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValidationError("matrix has non-finite entries")
    norm = spectral_norm(rho)
    if not norm < CONTRACTION_MARGIN:
        raise ValidationError(f"matrix is not strictly contractive (norm {norm:.17g})")
    return rho


def halmos_extension(rho: np.ndarray) -> np.ndarray:
    """Positive j-unitary ``D H`` built from a strict contraction ``rho``.

    ``H = [[I, rho], [rho*, I]]`` and
    ``D = diag((I - rho rho*)^(-1/2), (I - rho* rho)^(-1/2))``.
    """
    rho = check_contraction(rho)
    m1, m2 = rho.shape
    d1 = hermitian_power(np.eye(m1) - rho @ rho.conj().T, -0.5)
    d2 = hermitian_power(np.eye(m2) - rho.conj().T @ rho, -0.5)
    top = np.hstack([d1, d1 @ rho])
    bottom = np.hstack([d2 @ rho.conj().T, d2])
    return hermitian_part(np.vstack([top, bottom]))


def halmos_decompose(c: np.ndarray, sig: Signature, tol: float | None = None) -> np.ndarray:
    """Recover the contraction ``rho`` with ``halmos_extension(rho) == C``.

    The upper blocks of ``C = D H`` are ``c11 = (I - rho rho*)^(-1/2)`` and
    ``c12 = c11 rho``, so ``rho = c11^{-1} c12``.  The reconstruction is
    checked, which catches inputs that are not in the class.
    """
    tol = default_tol() if tol is None else tol
    c = check_positive_j_unitary(c, sig, tol)
    m1 = sig.m1
    rho = np.linalg.solve(c[:m1, :m1], c[:m1, m1:])
    try:
        rebuilt = halmos_extension(rho)
    except ValidationError as exc:
        raise NumericalError(f"decomposition produced an invalid contraction: {exc}") from exc
    res = np.linalg.norm(rebuilt - c, 2) / max(spectral_norm(c), 1.0)
    if res > tol:
        raise NumericalError(f"Halmos reconstruction residual {res:.3e} exceeds {tol:.1e}")
    return rho


def beta_gamma(c: np.ndarray, sig: Signature) -> tuple[np.ndarray, np.ndarray]:
    """Factors ``beta = [I 0] C^(1/2)`` and ``gamma = [0 I] C^(1/2)``.

    They satisfy ``C = 2 beta* beta - j``, ``beta j beta* = I`` and
    ``C = j + 2 gamma* gamma``, ``gamma j gamma* = -I``.  The square root is
    taken with :func:`j_power` after validating ``C``.
    """
    c = check_positive_j_unitary(c, sig, tol=max(default_tol(), 1e-9))
    root = j_power(c, sig, 0.5)
    return root[: sig.m1, :], root[sig.m1 :, :]
