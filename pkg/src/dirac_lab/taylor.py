"""Taylor coefficients of the Weyl function in the disk variable.

With ``z = i (1 - zeta) / (1 + zeta)`` the Weyl function of the system on
``[0, r]`` becomes analytic in the unit disk, and its first ``r + 1`` Taylor
coefficients at ``zeta = 0`` do not depend on the Mobius parameter.  They are
read off the S-node (``Phi_{r,1} = -[phi_0; phi_0 + phi_1; ...]``) or sampled
numerically on a small circle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .direct import canonical_parameter, fundamental_solution, weyl_mobius_interval
from .errors import NumericalError, ValidationError
from .jalgebra import Signature
from .potential import DiracPotential, gamma_stack
from .snode import SNode, build_snode

DEFAULT_RADIUS = 0.1
DEFAULT_SAMPLES = 64

# extended precision for the numeric route: the Cauchy integral divides by
# radius^k, so double-precision samples cap the accuracy at eps / radius^r
EXTENDED = np.clongdouble


@dataclass
class TaylorData:
    """Coefficients ``phi_0 .. phi_r`` (each ``m2 x m1``)."""

    sig: Signature
    phi: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.phi, dtype=complex)
        if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1:] != (self.sig.m2, self.sig.m1):
            raise ValidationError(
                f"Taylor data: expected a non-empty stack of {self.sig.m2}x{self.sig.m1} matrices, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("Taylor data has non-finite entries")
        self.phi = arr

    @property
    def r(self) -> int:
        return len(self.phi) - 1

    def __len__(self):
        return len(self.phi)

    def truncate(self, r: int) -> "TaylorData":
        if not 0 <= r <= self.r:
            raise ValidationError(f"cannot truncate {len(self)} coefficients to r={r}")
        return TaylorData(self.sig, self.phi[: r + 1].copy())

    def extend(self, phi_next: np.ndarray) -> "TaylorData":
        return TaylorData(self.sig, np.concatenate([self.phi, np.asarray(phi_next, dtype=complex)[None]]))


def disk_to_halfplane(zeta: complex) -> complex:
    """``z = i (1 - zeta) / (1 + zeta)``; the unit disk goes to the upper half-plane."""
    zeta = complex(zeta)
    if zeta == -1:
        raise ValidationError("zeta = -1 is mapped to infinity")
    return 1j * (1 - zeta) / (1 + zeta)


def taylor_from_phi_stack(phi1: np.ndarray, sig: Signature) -> TaylorData:
    """Invert the cumulative sum ``Phi_{r,1}(k) = -(phi_0 + .. + phi_k)``."""
    phi1 = np.asarray(phi1, dtype=complex)
    m1, m2 = sig.m1, sig.m2
    if phi1.ndim != 2 or phi1.shape[1] != m1 or phi1.shape[0] % m2 or phi1.shape[0] == 0:
        raise ValidationError(f"Phi_1 must be (m2 (r+1)) x {m1}, got shape {phi1.shape}")
    blocks = phi1.reshape(-1, m2, m1)
    phi = np.empty_like(blocks)
    phi[0] = -blocks[0]
    phi[1:] = blocks[:-1] - blocks[1:]
    return TaylorData(sig, phi)


def taylor_algebraic(pot: DiracPotential, node: SNode | None = None) -> TaylorData:
    """Coefficients from the S-node of ``pot`` (exact up to rounding)."""
    node = build_snode(pot) if node is None else node
    return taylor_from_phi_stack(node.Phi1, pot.sig)


def sample_disk_weyl(pot: DiracPotential, zetas: np.ndarray, p: np.ndarray | None = None) -> np.ndarray:
    """``phi(i (1 - zeta) / (1 + zeta))`` at each ``zeta``, via the interval form."""
    p = canonical_parameter(pot.sig) if p is None else np.asarray(p, dtype=complex)
    out = []
    for zeta in np.asarray(zetas, dtype=complex).ravel():
        z = disk_to_halfplane(zeta)
        out.append(weyl_mobius_interval(fundamental_solution(pot, np.conj(z), with_conj=False), p, pot.sig))
    return np.array(out)


def _solve_small(den: np.ndarray, num: np.ndarray) -> np.ndarray:
    # num @ den^{-1} by Gauss-Jordan with partial pivoting; works for any dtype
    n = den.shape[0]
    a = np.concatenate([den.T, num.T], axis=1).copy()
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if a[piv, col] == 0:
            raise NumericalError("taylor_numeric: singular denominator block at a sample point")
        a[[col, piv]] = a[[piv, col]]
        a[col] = a[col] / a[col, col]
        for row in range(n):
            if row != col:
                a[row] = a[row] - a[row, col] * a[col]
    return a[:, n:].T


def _interval_weyl_extended(gammas: np.ndarray, sig: Signature, zeta, p: np.ndarray) -> np.ndarray:
    """Interval-form Weyl value at ``disk_to_halfplane(zeta)`` in extended precision."""
    j = np.diag(np.concatenate([np.ones(sig.m1), -np.ones(sig.m2)])).astype(EXTENDED)
    zc = np.conj(1j * (1 - zeta) / (1 + zeta))
    w = np.eye(sig.m, dtype=EXTENDED)
    for g in gammas:
        w = (1 + 1j * zc) * w + 2j * zc * (j @ (g.conj().T @ (g @ w)))
    q = w.conj().T @ p
    return -_solve_small(q[: sig.m1], q[sig.m1 :])


def taylor_numeric(
    pot: DiracPotential,
    radius: float = DEFAULT_RADIUS,
    samples: int = DEFAULT_SAMPLES,
    p: np.ndarray | None = None,
) -> TaylorData:
    """Coefficients by the discrete Cauchy integral on ``|zeta| = radius``.

    ``phi_k ~ (1 / N) sum_j f(zeta_j) exp(-2 pi i j k / N) / radius^k``.  The
    aliasing error is at most ``2 radius^N`` since the sampled function is
    non-expansive; rounding is amplified by ``radius^{-k}``, so the samples
    and the transform are carried in ``np.clongdouble``.

    Parameters
    ----------
    p : constant ``m x m1`` Mobius parameter, default ``[I; 0]``.
    """
    r = pot.r
    if not 0 < radius < 1:
        raise ValidationError(f"radius must lie in (0, 1), got {radius}")
    if samples < 2 * (r + 1):
        raise ValidationError(f"need at least {2 * (r + 1)} samples for r={r}, got {samples}")
    p = canonical_parameter(pot.sig) if p is None else np.asarray(p, dtype=complex)
    gammas = gamma_stack(pot).astype(EXTENDED)
    p = p.astype(EXTENDED)
    two_pi = 2 * np.arccos(np.longdouble(-1))
    angles = two_pi * np.arange(samples, dtype=np.longdouble) / samples
    units = np.exp(1j * angles.astype(EXTENDED))
    values = np.array([_interval_weyl_extended(gammas, pot.sig, radius * u, p) for u in units])
    # direct DFT, only the first r + 1 frequencies are needed
    kernel = np.exp(-1j * np.outer(np.arange(r + 1), angles).astype(EXTENDED))
    coeffs = np.einsum("kn,nab->kab", kernel, values) / samples
    scale = np.longdouble(radius) ** np.arange(r + 1)
    coeffs = coeffs / scale[:, None, None]
    return TaylorData(pot.sig, coeffs.astype(complex))
