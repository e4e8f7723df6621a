"""Symmetric S-node ``(A_r, S_r, Pi_r)`` of a Dirac potential.

With ``gamma(k) = [0 I] C_k^(1/2)`` stacked into ``Gamma_r``, the matrix
``K_r`` (block rows ``i gamma(k) j [gamma(0)* .. gamma(k-1)* gamma(k)*/2 0 ..]``)
is similar to the block lower triangular Toeplitz matrix ``A_r`` through a
block lower triangular ``E_r`` with ``E_r^{-1} Gamma_{r,2} = [I; ..; I]``.
Then ``S_r = E_r^{-1} E_r^{-*}`` and ``Pi_r = E_r^{-1} Gamma_r`` satisfy

    A_r S_r - S_r A_r* = i Pi_r j Pi_r*,

and the transfer function ``w_A(r, lam) = I - i j Pi* S^{-1} (A - lam)^{-1} Pi``
reproduces the fundamental solution:
``W_{r+1}(z) = (1 + i z)^{r+1} w_A(r, 1/(2z))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .direct import fundamental_solution
from .errors import NumericalError, ValidationError
from .jalgebra import Signature, spectral_norm
from .potential import DiracPotential, gamma_stack


def build_A(r: int, m2: int) -> np.ndarray:
    """Block ``(k, p)`` is ``-(i/2) I`` on the diagonal, ``-i I`` below, 0 above."""
    if r < 0:
        raise ValidationError(f"r must be >= 0, got {r}")
    n = r + 1
    pattern = -1j * np.tril(np.ones((n, n)), -1) - 0.5j * np.eye(n)
    return np.kron(pattern, np.eye(m2))


def toeplitz_solve(lam: complex, rhs: np.ndarray, m2: int) -> np.ndarray:
    """``(A_r - lam I)^{-1} rhs`` by block forward substitution.

    Block row ``k`` reads ``(-(i/2) - lam) y_k - i sum_{q<k} y_q = b_k``.
    """
    diag = -0.5j - lam
    if abs(diag) < 1e-14:
        raise NumericalError("lam = -i/2 is the spectrum of A_r")
    rhs = np.asarray(rhs, dtype=complex)
    n = rhs.shape[0] // m2
    out = np.empty_like(rhs)
    acc = np.zeros((m2,) + rhs.shape[1:], dtype=complex)
    for k in range(n):
        y = (rhs[k * m2 : (k + 1) * m2] + 1j * acc) / diag
        out[k * m2 : (k + 1) * m2] = y
        acc += y
    return out


def build_K(gammas: np.ndarray, sig: Signature) -> np.ndarray:
    j = sig.j
    n, m2, _ = gammas.shape
    k_mat = np.zeros((n * m2, n * m2), dtype=complex)
    for k in range(n):
        gj = 1j * gammas[k] @ j
        for p in range(k):
            k_mat[k * m2 : (k + 1) * m2, p * m2 : (p + 1) * m2] = gj @ gammas[p].conj().T
        k_mat[k * m2 : (k + 1) * m2, k * m2 : (k + 1) * m2] = gj @ gammas[k].conj().T / 2
    return k_mat


def build_E(gammas: np.ndarray, sig: Signature) -> tuple[np.ndarray, list[np.ndarray]]:
    """Similarity ``E_r`` with ``K_r = E_r A_r E_r^{-1}``.

    Returns ``E_r`` and the diagonal blocks ``e_0^-, .., e_r^-``.  Every
    leading section ``E_k`` is the leading ``(k+1) m2`` principal block of
    ``E_r``.

    The recursion: ``e_0 = gamma_2(0)``, ``e_k = -gamma(k) j gamma(k-1)* e_{k-1}``;
    the last block row is ``[x_k, Xt_k, e_k]`` where ``Xt_k`` solves a
    triangular system against ``A_{k-2} - (i/2) I`` (for ``k > 1``) and
    ``x_k`` makes the block row sum to ``gamma_2(k)``.
    """
    j = sig.j
    m1, m2 = sig.m1, sig.m2
    n = gammas.shape[0]
    size = n * m2
    e_mat = np.zeros((size, size), dtype=complex)
    g2 = gammas[:, :, m1:]
    e = g2[0]
    if abs(np.linalg.det(e)) == 0:
        raise NumericalError("gamma_2(0) is singular")
    e_mat[:m2, :m2] = e
    blocks = [e]
    for k in range(1, n):
        link = gammas[k] @ j @ gammas[k - 1].conj().T
        e = -link @ e
        rows = slice(k * m2, (k + 1) * m2)
        if k == 1:
            x = g2[1] - e
        else:
            # i (gamma(k) j [gamma(0)* .. gamma(k-1)*] E_{k-1} + e_k [I .. I])
            head = np.hstack([gammas[k] @ j @ gammas[p].conj().T for p in range(k)])
            rhs = 1j * (head @ e_mat[: k * m2, : k * m2] + np.tile(e, (1, k)))
            tail = rhs[:, (k - 1) * m2 :]
            if spectral_norm(tail) > 1e-8 * max(1.0, spectral_norm(rhs)):
                raise NumericalError(f"level {k}: similarity recursion is inconsistent")
            shifted = build_A(k - 2, m2) - 0.5j * np.eye((k - 1) * m2)
            x_tilde = solve_triangular(shifted.T, rhs[:, : (k - 1) * m2].T, lower=False).T
            x_first = g2[k] - e - x_tilde.reshape(m2, k - 1, m2).sum(axis=1)
            x = np.hstack([x_first, x_tilde])
        e_mat[rows, : k * m2] = x
        e_mat[rows, rows] = e
        blocks.append(e)
    return e_mat, blocks


@dataclass
class SNode:
    sig: Signature
    A: np.ndarray
    S: np.ndarray
    Pi: np.ndarray
    E: np.ndarray
    K: np.ndarray
    Gamma: np.ndarray
    e_minus: list

    @property
    def r(self) -> int:
        return self.A.shape[0] // self.sig.m2 - 1

    @property
    def S_inv(self) -> np.ndarray:
        return self.E.conj().T @ self.E

    @property
    def Phi1(self) -> np.ndarray:
        return self.Pi[:, : self.sig.m1]

    @property
    def Phi2(self) -> np.ndarray:
        return self.Pi[:, self.sig.m1 :]

    def section(self, k: int) -> "SNode":
        """The node of the potential truncated to ``0..k`` (leading blocks)."""
        if not 0 <= k <= self.r:
            raise ValidationError(f"section {k} outside 0..{self.r}")
        n = (k + 1) * self.sig.m2
        return SNode(
            self.sig,
            self.A[:n, :n],
            self.S[:n, :n],
            self.Pi[:n],
            self.E[:n, :n],
            self.K[:n, :n],
            self.Gamma[:n],
            self.e_minus[: k + 1],
        )


def block_lower_solve(e_mat: np.ndarray, rhs: np.ndarray, m2: int) -> np.ndarray:
    """``E^{-1} rhs`` for block lower-triangular ``E`` with full ``m2 x m2``
    diagonal blocks, by block forward substitution."""
    n = e_mat.shape[0] // m2
    out = np.zeros(rhs.shape, dtype=complex)
    for k in range(n):
        rows = slice(k * m2, (k + 1) * m2)
        acc = rhs[rows] - e_mat[rows, : k * m2] @ out[: k * m2]
        out[rows] = np.linalg.solve(e_mat[rows, rows], acc)
    return out


def build_snode(pot: DiracPotential) -> SNode:
    sig = pot.sig
    gammas = gamma_stack(pot)
    gamma = gammas.reshape(-1, sig.m)
    e_mat, blocks = build_E(gammas, sig)
    e_inv = block_lower_solve(e_mat, np.eye(e_mat.shape[0]), sig.m2)
    s = e_inv @ e_inv.conj().T
    return SNode(
        sig=sig,
        A=build_A(pot.r, sig.m2),
        S=(s + s.conj().T) / 2,
        Pi=block_lower_solve(e_mat, gamma, sig.m2),
        E=e_mat,
        K=build_K(gammas, sig),
        Gamma=gamma,
        e_minus=blocks,
    )


def transfer_matrix(node: SNode, lam: complex) -> np.ndarray:
    """``w_A(r, lam) = I - i j Pi* S^{-1} (A - lam I)^{-1} Pi``."""
    sig = node.sig
    res_pi = toeplitz_solve(lam, node.Pi, sig.m2)
    return np.eye(sig.m) - 1j * sig.j @ node.Pi.conj().T @ node.S_inv @ res_pi


def factor_step(node: SNode, lam: complex) -> np.ndarray:
    """Left factor ``w_A(r) w_A(r-1)^{-1}`` from the projector formula

        I - i j Pi* S^{-1} P* (P A P* - lam)^{-1} (P S^{-1} P*)^{-1} P S^{-1} Pi

    with ``P`` selecting the last block row.
    """
    sig = node.sig
    m2 = sig.m2
    s_inv_last = node.S_inv[-m2:]  # P S^{-1}
    corner = s_inv_last[:, -m2:]  # P S^{-1} P*
    mid = np.linalg.solve(corner, s_inv_last @ node.Pi) / (-0.5j - lam)
    return np.eye(sig.m) - 1j * sig.j @ (s_inv_last @ node.Pi).conj().T @ mid


def step_factor_closed_form(gamma: np.ndarray, lam: complex, sig: Signature) -> np.ndarray:
    """``I + (2i / (2 lam + i)) j gamma* gamma``."""
    return np.eye(sig.m) + (2j / (2 * lam + 1j)) * sig.j @ gamma.conj().T @ gamma


def resolvent_row(node_or_r, z: complex, m2: int | None = None) -> np.ndarray:
    """Closed form of ``Phi_2* (A_r - (2z)^{-1} I)^{-1}``:

        -(2z / (1 + i z)) [qh^r, qh^(r-1), .., I],  qh = (1 - i z) / (1 + i z).

    Accepts an :class:`SNode` or an explicit ``r`` (then ``m2`` is required).
    """
    if isinstance(node_or_r, SNode):
        r, m2 = node_or_r.r, node_or_r.sig.m2
    else:
        r = int(node_or_r)
        if m2 is None:
            raise ValidationError("m2 is required when r is given")
    z = complex(z)
    if z == 0:
        raise ValidationError("z = 0 is excluded")
    if abs(z - 1j) < 1e-14:
        raise NumericalError("z = i makes the resolvent singular")
    qh = (1 - 1j * z) / (1 + 1j * z)
    powers = qh ** np.arange(r, -1, -1)
    return -(2 * z / (1 + 1j * z)) * np.kron(powers[None, :], np.eye(m2))


def resolvent_contraction(r: int, z: complex) -> complex:
    """Scalar ``c`` with ``Phi_2* (A_r - (2z)^{-1})^{-1} Phi_2 = c I``."""
    z = complex(z)
    qh = (1 - 1j * z) / (1 + 1j * z)
    return 1j * (1 - qh ** (r + 1))


# ---------------------------------------------------------------------------
# residual checks; each is relative to the natural size of its terms


def operator_identity_residual(node: SNode) -> float:
    a, s, pi, j = node.A, node.S, node.Pi, node.sig.j
    lhs = a @ s - s @ a.conj().T
    rhs = 1j * pi @ j @ pi.conj().T
    scale = max(2 * spectral_norm(a) * spectral_norm(s), spectral_norm(pi) ** 2, 1.0)
    return float(np.linalg.norm(lhs - rhs, 2) / scale)


def similarity_residual(node: SNode) -> float:
    """``||K E - E A||`` relative to ``||E|| (||K|| + ||A||)``."""
    e = node.E
    res = np.linalg.norm(node.K @ e - e @ node.A, 2)
    return float(res / (spectral_norm(e) * (spectral_norm(node.K) + spectral_norm(node.A))))


def k_identity_residual(node: SNode) -> float:
    k, g, j = node.K, node.Gamma, node.sig.j
    res = np.linalg.norm(k - k.conj().T - 1j * g @ j @ g.conj().T, 2)
    return float(res / max(spectral_norm(k), spectral_norm(g) ** 2, 1.0))


def phi2_residual(node: SNode) -> float:
    n = node.r + 1
    target = np.tile(np.eye(node.sig.m2), (n, 1))
    return float(np.abs(node.Phi2 - target).max())


def corner_residual(node: SNode) -> float:
    """``P S^{-1} P* = e_r* e_r`` and ``P S^{-1} Pi = e_r* gamma(r)``."""
    m2 = node.sig.m2
    e = node.e_minus[-1]
    s_inv_last = node.S_inv[-m2:]
    res1 = np.linalg.norm(s_inv_last[:, -m2:] - e.conj().T @ e, 2)
    res2 = np.linalg.norm(s_inv_last @ node.Pi - e.conj().T @ node.Gamma[-m2:], 2)
    scale = max(spectral_norm(e) ** 2, spectral_norm(e) * spectral_norm(node.Gamma[-m2:]), 1.0)
    return float(max(res1, res2) / scale)


def resolvent_residual(node: SNode, z: complex) -> float:
    """Closed-form resolvent row and its contraction with ``Phi_2`` against a
    dense solve; the larger of the two relative errors."""
    z = complex(z)
    lam = 1 / (2 * z)
    closed = resolvent_row(node, z)
    shifted = node.A - lam * np.eye(node.A.shape[0])
    dense = np.linalg.solve(shifted.T, node.Phi2.conj()).T
    res_row = np.linalg.norm(closed - dense, 2) / max(spectral_norm(dense), 1.0)
    c = resolvent_contraction(node.r, z)
    contracted = dense @ node.Phi2
    res_c = np.linalg.norm(contracted - c * np.eye(node.sig.m2), 2) / max(abs(c), 1.0)
    return float(max(res_row, res_c))


def j_form_residual(node: SNode, lam: complex, lam_t: complex) -> float:
    """Residual of
    ``w(lam)* j w(lam_t) - j + i (lam_t - conj lam) Pi* (A* - conj lam)^{-1} S^{-1} (A - lam_t)^{-1} Pi``.
    """
    sig = node.sig
    j = sig.j
    w1 = transfer_matrix(node, lam)
    w2 = transfer_matrix(node, lam_t)
    left = toeplitz_solve(lam, node.Pi, sig.m2)  # (A - lam)^{-1} Pi
    right = toeplitz_solve(lam_t, node.Pi, sig.m2)
    corr = 1j * (lam_t - np.conj(lam)) * left.conj().T @ node.S_inv @ right
    lhs = w1.conj().T @ j @ w2
    res = np.linalg.norm(lhs - j + corr, 2)
    return float(res / max(spectral_norm(w1) * spectral_norm(w2), spectral_norm(corr), 1.0))


def check_fundamental_representation(pot: DiracPotential, z: complex, node: SNode | None = None) -> float:
    """``||W_{r+1}(z) - (1 + i z)^{r+1} w_A(r, 1/(2z))|| / ||W_{r+1}(z)||``."""
    z = complex(z)
    if z == 0 or abs(z - 1j) < 1e-14 or abs(z + 1j) < 1e-14:
        raise ValidationError("z must avoid 0 and +-i")
    node = build_snode(pot) if node is None else node
    w = fundamental_solution(pot, z, with_conj=False).W
    rep = (1 + 1j * z) ** (pot.r + 1) * transfer_matrix(node, 1 / (2 * z))
    return float(np.linalg.norm(w - rep, 2) / spectral_norm(w))
