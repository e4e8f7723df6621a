"""Fundamental solutions and Weyl functions of the discrete Dirac system

    y_{k+1}(z) = (I + i z j C_k) y_k(z).

``W_{r+1}(z)`` is the fundamental solution normalized by ``W_0 = I``.  Its
inverse is never formed by LU: for ``z != +-i`` we use the closed form
``W(z)^{-1} = (1 + z^2)^{-r-1} j W(conj z)* j``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .jalgebra import Signature, hermitian_part, spectral_norm
from .potential import DiracPotential, gamma_stack

# Points in the upper half-plane away from z = i, where det W vanishes.
DEFAULT_Z_GRID = (0.3 + 0.4j, 1 + 1j, -0.7 + 0.2j, 2.2j, 1.8j)


@dataclass
class FundamentalValue:
    """``W = W_{r+1}(z)``; ``W_conj = W_{r+1}(conj z)`` when available."""

    r: int
    z: complex
    W: np.ndarray
    W_conj: np.ndarray | None = None

    def inverse_times(self, p: np.ndarray, j: np.ndarray) -> np.ndarray:
        """``W^{-1} P`` up to the non-zero scalar ``(1 + z^2)^{-r-1}``."""
        if self.W_conj is not None:
            return j @ self.W_conj.conj().T @ j @ p
        return np.linalg.solve(self.W, p)


def canonical_parameter(sig: Signature) -> np.ndarray:
    """``P0 = [I_{m1}; 0]``: constant, nonsingular, ``P0* j P0 = I``."""
    return np.vstack([np.eye(sig.m1), np.zeros((sig.m2, sig.m1))]).astype(complex)


def random_parameter(rng: np.random.Generator, sig: Signature, shrink: float = 0.95) -> np.ndarray:
    """Random constant ``P = [a; b]`` with property-j (``P* j P >= 0``)."""
    m1, m2 = sig.m1, sig.m2
    a = rng.standard_normal((m1, m1)) + 1j * rng.standard_normal((m1, m1))
    x = rng.standard_normal((m2, m1)) + 1j * rng.standard_normal((m2, m1))
    x *= shrink * rng.uniform() / max(spectral_norm(x), 1e-300)
    # P* j P = a* (I - x* x) a >= 0
    return np.vstack([a, x @ a])


def property_j_eigenvalues(p: np.ndarray, sig: Signature) -> tuple[float, float]:
    """Smallest eigenvalues of ``P* P`` and ``P* j P``."""
    p = np.asarray(p, dtype=complex)
    return (
        float(np.linalg.eigvalsh(hermitian_part(p.conj().T @ p))[0]),
        float(np.linalg.eigvalsh(hermitian_part(p.conj().T @ sig.j @ p))[0]),
    )


def solution_values(pot: DiracPotential, z: complex, factored: bool = True) -> np.ndarray:
    """``W_0(z), ..., W_{r+1}(z)`` stacked.

    By default each step is applied as ``(1 + i z) W + 2 i z j gamma* (gamma W)``,
    which equals ``(I + i z j C) W`` because ``j C = I + 2 j gamma* gamma``.
    Multiplying by ``C`` itself amplifies the rounding in the entries of a
    large ``C`` (errors off the j-unitary class grow along the product);
    the ``gamma`` form does not.  ``factored=False`` gives the literal product.
    """
    sig = pot.sig
    j = sig.j
    z = complex(z)
    w = np.eye(sig.m, dtype=complex)
    ws = [w]
    if factored:
        for g in gamma_stack(pot):
            w = (1 + 1j * z) * w + 2j * z * (j @ (g.conj().T @ (g @ w)))
            ws.append(w)
    else:
        for c in pot.C:
            w = w + 1j * z * (j @ (c @ w))
            ws.append(w)
    return np.array(ws)


def fundamental_solution(pot: DiracPotential, z: complex, with_conj: bool = True) -> FundamentalValue:
    """``W_{r+1}(z) = (I + i z j C_r) ... (I + i z j C_0)``, and the same
    product at ``conj(z)`` unless ``with_conj`` is false."""
    z = complex(z)
    w = solution_values(pot, z)[-1]
    if not with_conj:
        return FundamentalValue(pot.r, z, w)
    w_conj = w if z.imag == 0 else solution_values(pot, np.conj(z))[-1]
    return FundamentalValue(pot.r, z, w, w_conj)


def _solve_block(den: np.ndarray, num: np.ndarray, what: str) -> np.ndarray:
    # num @ den^{-1}
    if not np.all(np.isfinite(den)):
        raise NumericalError(f"{what}: non-finite denominator block")
    try:
        cond = np.linalg.cond(den)
        if not np.isfinite(cond) or cond > 1e14:
            raise NumericalError(f"{what}: denominator block is singular (cond {cond:.2e})")
        return np.linalg.solve(den.T, num.T).T
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{what}: denominator block is singular") from exc


def weyl_mobius(fv: FundamentalValue, p: np.ndarray, sig: Signature) -> np.ndarray:
    """``phi = [0 I] W^{-1} P ([I 0] W^{-1} P)^{-1}`` at ``z != +-i``.

    ``W^{-1}`` is replaced by ``j W(conj z)* j``; the dropped scalar factor
    cancels in the ratio.
    """
    z = fv.z
    if abs(z - 1j) < 1e-14 or abs(z + 1j) < 1e-14:
        raise ValidationError("weyl_mobius is undefined at z = +-i")
    q = fv.inverse_times(np.asarray(p, dtype=complex), sig.j)
    return _solve_block(q[: sig.m1], q[sig.m1 :], "weyl_mobius")


def weyl_mobius_interval(w_at_conj: FundamentalValue, p: np.ndarray, sig: Signature) -> np.ndarray:
    """``phi = -[0 I] W(conj z)* P ([I 0] W(conj z)* P)^{-1}``.

    ``w_at_conj`` holds ``W_{r+1}`` evaluated at ``conj(z)``.  Unlike
    :func:`weyl_mobius` this form is regular at ``z = i``.
    """
    q = w_at_conj.W.conj().T @ np.asarray(p, dtype=complex)
    return -_solve_block(q[: sig.m1], q[sig.m1 :], "weyl_mobius_interval")


def weyl_interval(pot: DiracPotential, z: complex, p: np.ndarray | None = None) -> np.ndarray:
    """Weyl function on ``[0, r]`` at ``z`` via the interval form."""
    p = canonical_parameter(pot.sig) if p is None else p
    return weyl_mobius_interval(fundamental_solution(pot, np.conj(complex(z)), with_conj=False), p, pot.sig)


@dataclass
class DiskReport:
    r: int
    z: complex
    min_eig_form: float
    form_scale: float
    partial_sum_gap: float
    partial_sum_scale: float

    def member(self, tol: float = 1e-9) -> bool:
        return self.min_eig_form >= -tol * self.form_scale

    def partial_sum_ok(self, tol: float = 1e-9) -> bool:
        return self.partial_sum_gap >= -tol * self.partial_sum_scale


def weyl_disk_membership(pot: DiracPotential, phi: np.ndarray, r: int, z: complex) -> DiskReport:
    """Diagnostics for ``phi`` in the closure of the Weyl disk ``N(r, z)``.

    ``min_eig_form`` is the smallest eigenvalue of
    ``[I phi*] W_{r+1}* j W_{r+1} [I; phi]`` (non-negative for members).
    ``partial_sum_gap`` is the smallest eigenvalue of
    ``c (I - phi* phi) - sum_{k<=r} q^k [I phi*] W_k* C_k W_k [I; phi]`` with
    ``c = (1 + |z|^2) / (2 Im z)``, which is non-negative for members.
    """
    z = complex(z)
    if not z.imag > 0:
        raise ValidationError("z must lie in the open upper half-plane")
    if abs(z - 1j) < 1e-14:
        raise ValidationError("z = i is excluded")
    if not 0 <= r <= pot.r:
        raise ValidationError(f"level r={r} outside 0..{pot.r}")
    sig = pot.sig
    phi = np.asarray(phi, dtype=complex)
    v = np.vstack([np.eye(sig.m1), phi])
    ws = solution_values(pot, z)[: r + 2]
    q = 1.0 / (1.0 + abs(z) ** 2)
    wv = ws[r + 1] @ v
    form = hermitian_part(wv.conj().T @ sig.j @ wv)
    partial = np.zeros((sig.m1, sig.m1), dtype=complex)
    scale = 0.0
    for k in range(r + 1):
        wk = ws[k] @ v
        term = q**k * (wk.conj().T @ pot.C[k] @ wk)
        partial += term
        scale += spectral_norm(term)
    bound = (1 + abs(z) ** 2) / (2 * z.imag) * (np.eye(sig.m1) - phi.conj().T @ phi)
    gap = hermitian_part(bound - partial)
    return DiskReport(
        r=r,
        z=z,
        min_eig_form=float(np.linalg.eigvalsh(form)[0]),
        form_scale=max(spectral_norm(wv) ** 2, 1.0),
        partial_sum_gap=float(np.linalg.eigvalsh(gap)[0]),
        partial_sum_scale=max(scale, spectral_norm(bound), 1.0),
    )


def summation_identity_check(pot: DiracPotential, z: complex, r: int | None = None) -> float:
    """Relative residual of the summation formula

        sum_{k<=r} q^k W_k* C_k W_k = c (j - q^{r+1} W_{r+1}* j W_{r+1}),

    ``q = 1/(1 + |z|^2)``, ``c = (1 + |z|^2) / (i (conj z - z))``.
    """
    z = complex(z)
    if z.imag == 0:
        raise ValidationError("summation identity needs a non-real z")
    r = pot.r if r is None else r
    if not 0 <= r <= pot.r:
        raise ValidationError(f"level r={r} outside 0..{pot.r}")
    j = pot.sig.j
    ws = solution_values(pot, z)[: r + 2]
    q = 1.0 / (1.0 + abs(z) ** 2)
    lhs = np.zeros_like(j)
    scale = 0.0
    for k in range(r + 1):
        term = q**k * (ws[k].conj().T @ pot.C[k] @ ws[k])
        lhs += term
        scale += spectral_norm(term)
    c = (1 + abs(z) ** 2) / (1j * (np.conj(z) - z))
    tail = q ** (r + 1) * (ws[r + 1].conj().T @ j @ ws[r + 1])
    rhs = c * (j - tail)
    scale = max(scale, abs(c) * (1 + spectral_norm(tail)))
    return float(np.linalg.norm(lhs - rhs, 2) / scale)


def wronskian_residual(pot: DiracPotential, z: complex) -> float:
    """Relative residual of ``W(conj z)* j W(z) = (1 + z^2)^{r+1} j``."""
    z = complex(z)
    fv = fundamental_solution(pot, z)
    w, wbar = fv.W, fv.W_conj
    lhs = wbar.conj().T @ pot.sig.j @ w
    rhs = (1 + z * z) ** (pot.r + 1) * pot.sig.j
    scale = max(spectral_norm(w) * spectral_norm(wbar), abs((1 + z * z) ** (pot.r + 1)))
    return float(np.linalg.norm(lhs - rhs, 2) / scale)


def inverse_bound_min_eig(pot: DiracPotential, z: complex) -> float:
    """Smallest eigenvalue of ``W^{-*} j W^{-1} - (1 - 2 Im z + |z|^2)^{-r-1} j``,
    relative to the size of the first term.  Non-negative on ``C_+ \\ {i}``."""
    z = complex(z)
    if abs(z - 1j) < 1e-14 or abs(z + 1j) < 1e-14:
        raise ValidationError("W is singular at z = +-i")
    fv = fundamental_solution(pot, z)
    j = pot.sig.j
    winv = (1 + z * z) ** (-pot.r - 1) * (j @ fv.W_conj.conj().T @ j)
    first = winv.conj().T @ pot.sig.j @ winv
    second = (1 - 2 * z.imag + abs(z) ** 2) ** (-pot.r - 1) * pot.sig.j
    diff = hermitian_part(first - second)
    scale = max(spectral_norm(first), spectral_norm(second))
    return float(np.linalg.eigvalsh(diff)[0] / scale)


def semiaxis_weyl_approx(pot: DiracPotential, z: complex, p0: np.ndarray | None = None) -> np.ndarray:
    """Finite-interval approximant ``phi_R`` of the semiaxis Weyl function.

    Uses every available level of ``pot``.  The first ``R + 1`` Taylor
    coefficients of ``phi_R(i (1 - zeta) / (1 + zeta))`` at ``zeta = 0``
    coincide with those of the semiaxis Weyl function of any extension of
    the potential; the values themselves are only approximations.
    """
    z = complex(z)
    if not z.imag > 0:
        raise ValidationError("z must lie in the open upper half-plane")
    p0 = canonical_parameter(pot.sig) if p0 is None else p0
    return weyl_mobius(fundamental_solution(pot, z), p0, pot.sig)
