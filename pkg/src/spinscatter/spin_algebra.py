"""Spin operators, product spaces and the conserved m_T block.

Single-spin matrices use the descending-m basis |s>, |s-1>, ..., |-s>.
Product states of several spins are ordered lexicographically in that basis
(first factor slowest). The three channels of an electron scattering off two
spin-s moments are always ordered (|i>, |+>, |->).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .exceptions import NotAxiallySymmetricError
from .validation import check_spin, check_square

CHANNEL_LABELS = ("i", "plus", "minus")
COMMUTATOR_ATOL = 1e-10


@dataclass(frozen=True)
class SpinOperatorSet:
    s: Fraction
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def dim(self) -> int:
        return self.sz.shape[0]

    @property
    def vector(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.sx, self.sy, self.sz)

    @property
    def plus(self) -> np.ndarray:
        return self.sx + 1j * self.sy

    @property
    def minus(self) -> np.ndarray:
        return self.sx - 1j * self.sy

    def m_values(self) -> np.ndarray:
        return np.real(np.diag(self.sz))


def build_spin_operators(s) -> SpinOperatorSet:
    """Build S^x, S^y, S^z for spin ``s`` (hbar = 1) from the ladder operators."""
    s = check_spin(s)
    sf = float(s)
    m = sf - np.arange(int(2 * s) + 1)
    dim = m.size
    raise_ = np.zeros((dim, dim), dtype=np.complex128)
    # S+ |s,m> = sqrt(s(s+1) - m(m+1)) |s,m+1>; index a-1 holds m+1
    for a in range(1, dim):
        raise_[a - 1, a] = np.sqrt(sf * (sf + 1) - m[a] * (m[a] + 1))
    lower = raise_.conj().T
    sx = (raise_ + lower) / 2
    sy = (raise_ - lower) / 2j
    sz = np.diag(m).astype(np.complex128)
    for arr in (sx, sy, sz):
        arr.setflags(write=False)
    return SpinOperatorSet(s=s, sx=sx, sy=sy, sz=sz)


class ProductSpace:
    """Tensor product of several spins with per-factor operator embedding."""

    def __init__(self, spins: Sequence):
        if not spins:
            raise ValueError("a product space needs at least one spin")
        self.ops = tuple(build_spin_operators(s) for s in spins)
        self.spins = tuple(op.s for op in self.ops)
        self.dims = tuple(op.dim for op in self.ops)
        self.dim = int(np.prod(self.dims))

    def embed(self, op: np.ndarray, position: int) -> np.ndarray:
        factors = [np.eye(d, dtype=np.complex128) for d in self.dims]
        factors[position] = op
        return reduce(np.kron, factors)

    def spin_vector(self, position: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(self.embed(c, position) for c in self.ops[position].vector)

    def dot(self, a: int, b: int) -> np.ndarray:
        """S_a . S_b on the full product space."""
        va, vb = self.spin_vector(a), self.spin_vector(b)
        return sum(x @ y for x, y in zip(va, vb))

    def sz(self, position: int) -> np.ndarray:
        return self.embed(self.ops[position].sz, position)

    def total_sz(self) -> np.ndarray:
        return sum(self.sz(p) for p in range(len(self.dims)))

    def index(self, ms: Sequence) -> int:
        """Flat index of the product state with z-projections ``ms``."""
        idx = 0
        for op, m, d in zip(self.ops, ms, self.dims):
            k = float(op.s) - float(m)
            if abs(k - round(k)) > 1e-9 or not 0 <= round(k) < d:
                raise ValueError(f"m={m} not allowed for spin {op.s}")
            idx = idx * d + int(round(k))
        return idx

    def total_m(self) -> np.ndarray:
        return np.real(np.diag(self.total_sz()))


@dataclass(frozen=True)
class ThreeParticleBasis:
    """The m_T = 2s - 1/2 channel basis {|i>, |+>, |->}.

    ``vectors`` holds one column per channel in the product space of
    (electron, spin 1, spin 2).
    """

    s: Fraction
    labels: tuple[str, ...]
    vectors: np.ndarray

    @property
    def m_total(self) -> Fraction:
        return 2 * self.s - Fraction(1, 2)


def three_particle_basis(s) -> ThreeParticleBasis:
    s = check_spin(s)
    if s <= 0:
        raise ValueError("the channel basis needs spin s > 0")
    space = ProductSpace((Fraction(1, 2), s, s))
    half = Fraction(1, 2)
    col = np.zeros((space.dim, 3), dtype=np.complex128)
    col[space.index((-half, s, s)), 0] = 1.0
    a = space.index((half, s, s - 1))
    b = space.index((half, s - 1, s))
    col[a, 1] = col[b, 1] = 1 / np.sqrt(2)
    col[a, 2], col[b, 2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    col.setflags(write=False)
    return ThreeParticleBasis(s=s, labels=CHANNEL_LABELS, vectors=col)


def _infer_three_particle_spin(dim: int) -> Fraction:
    # dim = 2 (2s+1)^2
    root = np.sqrt(dim / 2)
    if dim % 2 or abs(root - round(root)) > 1e-9 or round(root) < 2:
        raise ValueError(
            f"cannot infer (1/2, s, s) layout from dimension {dim}; pass spins explicitly"
        )
    return Fraction(int(round(root)) - 1, 2)


def project_mT_block(full_h, m_t, spins: Sequence | None = None) -> np.ndarray:
    """Restrict ``full_h`` to product states with total z-projection ``m_t``.

    Without ``spins`` the product space is taken to be (electron, s, s) with
    s inferred from the dimension. For that layout and m_t = 2s - 1/2 the
    block is returned in the (|i>, |+>, |->) basis; otherwise in product
    ordering.
    """
    full_h = check_square(full_h, "full_h")
    if spins is None:
        spins = (Fraction(1, 2),) + (_infer_three_particle_spin(full_h.shape[0]),) * 2
    space = ProductSpace(spins)
    if space.dim != full_h.shape[0]:
        raise ValueError(f"full_h has dimension {full_h.shape[0]}, spins imply {space.dim}")
    stz = space.total_sz()
    comm = float(np.max(np.abs(full_h @ stz - stz @ full_h)))
    if comm > COMMUTATOR_ATOL:
        raise NotAxiallySymmetricError(
            f"Hamiltonian does not conserve total S^z (|[H, S_T^z]| = {comm:.3e})", comm
        )
    m_t = float(m_t)
    three = (
        len(space.spins) == 3
        and space.spins[0] == Fraction(1, 2)
        and space.spins[1] == space.spins[2]
        and space.spins[1] > 0
        and abs(m_t - float(2 * space.spins[1] - Fraction(1, 2))) < 1e-12
    )
    if three:
        u = three_particle_basis(space.spins[1]).vectors
        return u.conj().T @ full_h @ u
    sel = np.flatnonzero(np.abs(space.total_m() - m_t) < 1e-9)
    if sel.size == 0:
        raise ValueError(f"no product states with total m = {m_t}")
    return full_h[np.ix_(sel, sel)]
