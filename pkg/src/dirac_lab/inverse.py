"""Recovery of a Dirac potential from Taylor coefficients of its Weyl function.

Given ``phi_0 .. phi_r`` the node data are ``Pi_k = [Phi_{k,1}, Phi_{k,2}]``
with ``Phi_{k,1} = -[phi_0; phi_0 + phi_1; ...]`` and ``Phi_{k,2}`` a stack of
identities.  ``S_k`` is the unique solution of ``A S - S A* = i Pi j Pi*`` and

    gamma(k)* gamma(k) = Pi_k* S_k^{-1} P* (P S_k^{-1} P*)^{-1} P S_k^{-1} Pi_k,
    C_k = j + 2 gamma(k)* gamma(k),

with ``P`` selecting the last block.  The ``S_k`` are nested leading blocks
of ``S_r``, so everything is computed from one Cholesky factor of ``S_r``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .errors import InadmissibleDataError, NumericalError, ValidationError
from .jalgebra import Signature, hermitian_part, spectral_norm
from .potential import DiracPotential
from .snode import build_A
from .taylor import TaylorData


def phi_stack(data: TaylorData, k: int | None = None) -> np.ndarray:
    """``Phi_{k,1} = -[phi_0; phi_0 + phi_1; ..; phi_0 + .. + phi_k]``."""
    k = data.r if k is None else k
    if not 0 <= k <= data.r:
        raise ValidationError(f"level k={k} outside 0..{data.r}")
    return -np.cumsum(data.phi[: k + 1], axis=0).reshape(-1, data.sig.m1)


def node_pi(data: TaylorData, k: int | None = None) -> np.ndarray:
    """``Pi_k = [Phi_{k,1}, I; I; ..]``."""
    k = data.r if k is None else k
    ident = np.tile(np.eye(data.sig.m2), (k + 1, 1))
    return np.hstack([phi_stack(data, k), ident])


def solve_identity(pi: np.ndarray, sig: Signature) -> np.ndarray:
    """Unique ``S`` with ``A S - S A* = i Pi j Pi*`` for ``A = A_k``.

    Writing ``A = -(i/2) I - i L`` with ``L`` the strictly lower block matrix
    of identities turns the identity into ``S + L S + S L* = -Pi j Pi*``,
    solved block by block:

        s_kp = -M_kp - sum_{q<k} s_qp - sum_{q<p} s_kq.
    """
    pi = np.asarray(pi, dtype=complex)
    m2 = sig.m2
    if pi.ndim != 2 or pi.shape[1] != sig.m or pi.shape[0] % m2 or pi.shape[0] == 0:
        raise ValidationError(f"Pi must be (m2 (k+1)) x {sig.m}, got shape {pi.shape}")
    n = pi.shape[0] // m2
    rhs = -(pi @ sig.j @ pi.conj().T)
    s = np.zeros_like(rhs)
    col_sums = np.zeros((n, m2, m2), dtype=complex)  # sum_{q<k} s_qp for the current k
    for k in range(n):
        row_sum = np.zeros((m2, m2), dtype=complex)
        for p in range(n):
            block = rhs[k * m2 : (k + 1) * m2, p * m2 : (p + 1) * m2] - col_sums[p] - row_sum
            s[k * m2 : (k + 1) * m2, p * m2 : (p + 1) * m2] = block
            row_sum += block
        for p in range(n):
            col_sums[p] += s[k * m2 : (k + 1) * m2, p * m2 : (p + 1) * m2]
    return s


def structured_S(data: TaylorData) -> np.ndarray:
    """``S_r`` straight from the coefficients (displacement structure).

    ``s_00 = I - phi_0 phi_0*``, ``s_0p = -phi_0 phi_p*``, ``s_k0 = -phi_k phi_0*``
    and ``s_{k+1,p+1} = s_kp - phi_{k+1} phi_{p+1}*``; that is
    ``S = I - T T*`` with ``T`` block lower Toeplitz, ``T_kq = phi_{k-q}``.
    The increment is negative with ``A`` and ``Pi`` as used here; this is
    pinned by the comparison with :func:`solve_identity` in the tests.
    """
    phi = data.phi
    m2 = data.sig.m2
    n = len(phi)
    blocks = np.empty((n, n, m2, m2), dtype=complex)
    for p in range(n):
        blocks[0, p] = -phi[0] @ phi[p].conj().T
        blocks[p, 0] = -phi[p] @ phi[0].conj().T
    blocks[0, 0] += np.eye(m2)
    for k in range(1, n):
        for p in range(1, n):
            blocks[k, p] = blocks[k - 1, p - 1] - phi[k] @ phi[p].conj().T
    return blocks.transpose(0, 2, 1, 3).reshape(n * m2, n * m2)


def _cholesky_level(s: np.ndarray, m2: int) -> tuple[np.ndarray, int]:
    """Lower Cholesky factor of ``s`` and the first level whose leading block
    is not positive definite (``-1`` if none)."""
    chol, info = lapack.zpotrf(hermitian_part(s), lower=1, clean=1)
    if info < 0:
        raise NumericalError(f"Cholesky factorization failed (info={info})")
    if info > 0:
        return chol, (info - 1) // m2
    return chol, -1


@dataclass
class LevelRecord:
    k: int
    phi1: np.ndarray
    gram: np.ndarray  # gamma(k)* gamma(k)
    C: np.ndarray
    min_eig: float
    identity_residual: float


@dataclass
class RecoveryTrace:
    sig: Signature
    S: np.ndarray
    levels: list[LevelRecord] = field(default_factory=list)

    def S_k(self, k: int) -> np.ndarray:
        n = (k + 1) * self.sig.m2
        return self.S[:n, :n]

    @property
    def min_eigs(self) -> np.ndarray:
        return np.array([lv.min_eig for lv in self.levels])


def _identity_residual(s: np.ndarray, pi: np.ndarray, sig: Signature) -> float:
    a = build_A(pi.shape[0] // sig.m2 - 1, sig.m2)
    res = a @ s - s @ a.conj().T - 1j * pi @ sig.j @ pi.conj().T
    scale = max(2 * spectral_norm(a) * spectral_norm(s), spectral_norm(pi) ** 2, 1.0)
    return float(np.linalg.norm(res, 2) / scale)


def recover_potential(data: TaylorData, tol: float | None = None) -> tuple[DiracPotential, RecoveryTrace]:
    """Potential ``C_0 .. C_r`` whose Weyl function has the given coefficients.

    Raises
    ------
    InadmissibleDataError
        At the first level ``k`` where ``S_k`` is not positive definite.
    NumericalError
        If a recovered ``C_k`` is not positive j-unitary within ``tol``.
    """
    sig = data.sig
    m2 = sig.m2
    pi = node_pi(data)
    s = hermitian_part(solve_identity(pi, sig))
    chol, bad = _cholesky_level(s, m2)
    if bad >= 0:
        n = (bad + 1) * m2
        raise InadmissibleDataError(bad, float(np.linalg.eigvalsh(s[:n, :n])[0]))
    # rows of block k of L^{-1} Pi: Y_k* Y_k is the Gram matrix of level k
    y = solve_triangular(chol, pi, lower=True)
    trace = RecoveryTrace(sig, s)
    cs = []
    for k in range(data.r + 1):
        rows = slice(k * m2, (k + 1) * m2)
        gram = hermitian_part(y[rows].conj().T @ y[rows])
        c = sig.j + 2 * gram
        n = (k + 1) * m2
        trace.levels.append(
            LevelRecord(
                k=k,
                phi1=pi[:n, : sig.m1],
                gram=gram,
                C=c,
                min_eig=float(np.linalg.eigvalsh(s[:n, :n])[0]),
                identity_residual=_identity_residual(s[:n, :n], pi[:n], sig),
            )
        )
        cs.append(c)
    try:
        pot = DiracPotential(sig, np.array(cs), tol)
    except ValidationError as exc:
        raise NumericalError(f"recovered potential left the class: {exc}") from exc
    return pot, trace


def borg_marchenko_compare(a: TaylorData, b: TaylorData, tol: float = 1e-9) -> int:
    """Largest ``p`` with ``phi_k^a = phi_k^b`` (max entry gap <= ``tol``) for
    all ``k <= p``; ``-1`` if already ``phi_0`` differs."""
    if a.sig != b.sig:
        raise ValidationError(f"signatures differ: {a.sig} vs {b.sig}")
    n = min(len(a), len(b))
    for k in range(n):
        if np.abs(a.phi[k] - b.phi[k]).max() > tol:
            return k - 1
    return n - 1


def continuation_check(data: TaylorData, phi_next: np.ndarray) -> bool:
    """Whether appending ``phi_next`` keeps the structured ``S`` positive."""
    _, bad = _cholesky_level(structured_S(data), data.sig.m2)
    if bad >= 0:
        raise ValidationError(f"the given data are not admissible (S_{bad} is not positive definite)")
    phi_next = np.asarray(phi_next, dtype=complex)
    if phi_next.shape != (data.sig.m2, data.sig.m1):
        raise ValidationError(f"phi_next must be {data.sig.m2}x{data.sig.m1}, got {phi_next.shape}")
    _, bad = _cholesky_level(structured_S(data.extend(phi_next)), data.sig.m2)
    return bad < 0
