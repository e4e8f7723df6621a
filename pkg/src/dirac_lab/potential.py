"""Dirac potentials, Schur coefficient sequences and the map between them.

A Schur sequence ``rho_0 .. rho_r`` drives the Szego recurrence
``X_{k+1} = Ct_k diag(lam I, I) X_k`` with ``Ct_k`` the Halmos extension of
``rho_k``.  Accumulating ``U_{k+1} = i U_k Ct_k j`` and setting
``C_k = j U_{k+1} U_{k+1}* j`` gives a Dirac potential, and every Dirac
potential arises this way from exactly one Schur sequence.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import polar

from .errors import NumericalError, ValidationError
from .jalgebra import (
    Signature,
    check_contraction,
    beta_gamma,
    check_positive_j_unitary,
    halmos_decompose,
    halmos_extension,
    hermitian_part,
    hermitian_power,
    j_power,
    spectral_norm,
)

DEFAULT_MAX_NORM = 0.8


def _stack(mats, shape_tail, what):
    arr = np.asarray(mats, dtype=complex)
    if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1:] != shape_tail:
        raise ValidationError(
            f"{what}: expected a non-empty stack of {shape_tail[0]}x{shape_tail[1]} matrices, got shape {arr.shape}"
        )
    return arr


@dataclass
class DiracPotential:
    """Sequence ``C_0 .. C_r`` of positive j-unitary ``m x m`` matrices."""

    sig: Signature
    C: np.ndarray
    tol: float | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self.C = _stack(self.C, (self.sig.m, self.sig.m), "potential")
        for k, c in enumerate(self.C):
            try:
                check_positive_j_unitary(c, self.sig, self.tol)
            except ValidationError as exc:
                raise ValidationError(f"C_{k}: {exc}") from None

    @property
    def r(self) -> int:
        return len(self.C) - 1

    def __len__(self):
        return len(self.C)

    def truncate(self, r: int) -> "DiracPotential":
        """The potential restricted to ``0 <= k <= r``."""
        if not 0 <= r <= self.r:
            raise ValidationError(f"cannot truncate a length-{len(self)} potential to r={r}")
        return DiracPotential(self.sig, self.C[: r + 1].copy(), self.tol)

    @classmethod
    def trivial(cls, sig: Signature, r: int) -> "DiracPotential":
        return cls(sig, np.broadcast_to(np.eye(sig.m, dtype=complex), (r + 1, sig.m, sig.m)).copy())


def gamma_stack(pot: DiracPotential) -> np.ndarray:
    """``gamma(0) .. gamma(r)`` as an ``(r+1, m2, m)`` array."""
    return np.array([beta_gamma(c, pot.sig)[1] for c in pot.C])


@dataclass
class SchurSequence:
    """Strictly contractive ``m1 x m2`` matrices ``rho_0 .. rho_r``."""

    sig: Signature
    rho: np.ndarray

    def __post_init__(self):
        self.rho = _stack(self.rho, (self.sig.m1, self.sig.m2), "Schur sequence")
        for k, rho in enumerate(self.rho):
            try:
                check_contraction(rho)
            except ValidationError as exc:
                raise ValidationError(f"rho_{k}: {exc}") from None

    @property
    def r(self) -> int:
        return len(self.rho) - 1

    def __len__(self):
        return len(self.rho)


@dataclass
class UChain:
    """``U_0 = I, U_1, ..., U_{r+1}``; each ``U_k`` is j-unitary."""

    U: np.ndarray

    def residuals(self, sig: Signature) -> np.ndarray:
        j = sig.j
        return np.array(
            [np.linalg.norm(u.conj().T @ j @ u - j, 2) / max(1.0, spectral_norm(u) ** 2) for u in self.U]
        )


def schur_to_dirac(schur: SchurSequence) -> tuple[DiracPotential, UChain]:
    sig = schur.sig
    j = sig.j
    u = np.eye(sig.m, dtype=complex)
    us = [u]
    cs = []
    for rho in schur.rho:
        ct = halmos_extension(rho)
        u = 1j * u @ ct @ j
        us.append(u)
        cs.append(hermitian_part(j @ u @ u.conj().T @ j))
    return DiracPotential(sig, np.array(cs)), UChain(np.array(us))


def dirac_to_schur(pot: DiracPotential, return_chain: bool = False):
    """Inverse of :func:`schur_to_dirac`.

    Mathematically ``Ct_k = (j U_k* C_k U_k j)^(1/2)`` and
    ``U_{k+1} = i U_k Ct_k j``.  Forming ``U_k* C_k U_k`` cancels matrices of
    size ``||C_k||`` down to O(1) and loses about ``eps ||C_k||**2``, so the
    chain is carried in the factored form ``U_{k+1} = F_k V_{k+1}`` with
    ``F_k = C_k^(-1/2)`` and ``V_{k+1}`` block-diagonal unitary.  Then

        V_k* C_{k-1}^(1/2) j C_k^(1/2) j = Ct_k (i j V_{k+1}*)

    is a polar decomposition whose factors are O(1), and only matrices of
    size ``||C||**(1/2)`` are multiplied.
    """
    sig = pot.sig
    j = sig.j
    prev_root = np.eye(sig.m, dtype=complex)  # C_{k-1}^(1/2), with C_{-1} = I
    v = np.eye(sig.m, dtype=complex)
    us = [np.eye(sig.m, dtype=complex)]
    rhos = []
    for k, c in enumerate(pot.C):
        root = j_power(c, sig, 0.5)
        w = v.conj().T @ prev_root @ j @ root @ j
        unitary, ct = polar(w, side="left")
        try:
            rhos.append(halmos_decompose(hermitian_part(ct), sig))
        except (ValidationError, NumericalError) as exc:
            raise NumericalError(f"level {k}: {exc}") from exc
        v = 1j * unitary.conj().T @ j
        us.append(j @ root @ j @ v)
        prev_root = root
    schur = SchurSequence(sig, np.array(rhos))
    if return_chain:
        return schur, UChain(np.array(us))
    return schur


def dirac_to_schur_direct(pot: DiracPotential) -> SchurSequence:
    """Literal form of the inverse map, ``Ct_k = (j U_k* C_k U_k j)^(1/2)``.

    Kept as an independent reference; its error grows like
    ``eps ||C_k||**2`` so it is only accurate for short or mild potentials.
    """
    sig = pot.sig
    j = sig.j
    u = np.eye(sig.m, dtype=complex)
    rhos = []
    for c in pot.C:
        ct = hermitian_power(hermitian_part(j @ u.conj().T @ c @ u @ j), 0.5, tol=1e-6)
        rhos.append(np.linalg.solve(ct[: sig.m1, : sig.m1], ct[: sig.m1, sig.m1 :]))
        u = 1j * u @ ct @ j
    return SchurSequence(sig, np.array(rhos))


def random_schur(seed: int, r: int, sig: Signature, max_norm: float = DEFAULT_MAX_NORM) -> SchurSequence:
    """Seeded random Schur sequence with ``||rho_k|| <= max_norm``.

    Entries are complex Gaussians scaled so that a typical draw has norm
    about ``max_norm``; draws above ``max_norm`` are rescaled onto it.
    """
    if not 0 < max_norm < 1:
        raise ValidationError(f"max_norm must lie in (0, 1), got {max_norm}")
    if r < 0:
        raise ValidationError(f"r must be >= 0, got {r}")
    rng = np.random.default_rng(seed)
    shape = (r + 1, sig.m1, sig.m2)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    g *= max_norm / (np.sqrt(sig.m1) + np.sqrt(sig.m2))
    for k in range(r + 1):
        norm = spectral_norm(g[k])
        if norm > max_norm:
            g[k] *= max_norm / norm
    return SchurSequence(sig, g)


def szego_step(rho: np.ndarray, x: np.ndarray, lam: complex) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    x = np.asarray(x, dtype=complex)
    m1, m2 = rho.shape
    if x.ndim != 2 or x.shape[0] != m1 + m2:
        raise ValidationError(f"X must have {m1 + m2} rows, got shape {x.shape}")
    scaled = x.copy()
    scaled[:m1] *= lam
    return halmos_extension(rho) @ scaled


def szego_solution(schur: SchurSequence, lam: complex, x0: np.ndarray | None = None) -> np.ndarray:
    """``X_0 .. X_{r+1}`` of the Szego recurrence at ``lam``."""
    x = np.eye(schur.sig.m, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex)
    xs = [x]
    for rho in schur.rho:
        x = szego_step(rho, x, lam)
        xs.append(x)
    return np.array(xs)


def dirac_step(c: np.ndarray, y: np.ndarray, z: complex, sig: Signature) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if c.shape != (sig.m, sig.m):
        raise ValidationError(f"C must be {sig.m}x{sig.m}, got {c.shape}")
    if y.ndim != 2 or y.shape[0] != sig.m:
        raise ValidationError(f"y must have {sig.m} rows, got shape {y.shape}")
    return y + 1j * z * (sig.j @ (c @ y))


def transform_solution(chain: UChain, xs: np.ndarray, z: complex, sig: Signature) -> np.ndarray:
    """Map a Szego solution ``X_k((z-i)/(z+i))`` to a Dirac solution ``y_k(z)``.

    ``y_k(z) = (i + z)^k U_k (I + i z j) X_k``.
    """
    if z == -1j:
        raise ValidationError("z = -i is excluded")
    xs = np.asarray(xs, dtype=complex)
    if len(xs) > len(chain.U):
        raise ValidationError(f"{len(xs)} Szego iterates but only {len(chain.U)} U matrices")
    front = np.eye(sig.m) + 1j * z * sig.j
    return np.array([(1j + z) ** k * chain.U[k] @ front @ x for k, x in enumerate(xs)])


def mobius_disk(z: complex) -> complex:
    """``(z - i) / (z + i)``, the disk point matching half-plane point ``z``."""
    return (z - 1j) / (z + 1j)
