"""Hamiltonians and observables for the two battery models.

Lattice model (one two-level system per cavity, photons hop between
cavities):

    H = sum_c w_c a+_c a_c  +  sum_c w_a s+_c s-_c
        + beta sum_c (a_c s+_c + a+_c s-_c)
        - kappa sum_<c,c'> (a+_c' a_c + a+_c a_c')

Collective model (N two-level systems sharing a single mode, expressed on
the symmetric ladder ``(n, q)`` with q systems in the ground state and
collective weight j = N/2, m_j = N/2 - q):

    diagonal  w_c n + w_a (N - q)        [measured from the all-ground,
                                          zero-photon state]
    coupling  g  * [a J+ + a+ J-]        rotating,        g  from beta
            + g' * [a J- + a+ J+]        counter-rotating, g' from beta'

where g = beta / sqrt(N) under the default normalization and g = beta when
normalization is NONE (same for beta').  All matrices are real symmetric
and assembled on the upper triangle once, then mirrored, so exact bitwise
symmetry holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.sparse

from .basis import (
    BasisIndex,
    DickeState,
    JchState,
    build_dicke_basis,
    build_jch_sector,
    dicke_dim,
    jch_sector_dim,
    total_excitations,
)

__all__ = [
    "Model",
    "Topology",
    "Normalization",
    "ModelParams",
    "SymmetricOperatorMatrix",
    "BasisMismatchError",
    "MissingStateError",
    "build_basis",
    "build_hamiltonian",
    "build_jch",
    "build_dicke",
    "build_csr",
    "jz_diagonal",
    "build_jz",
    "initial_index",
    "initial_state",
]


class Model(Enum):
    JCH = "jch"
    DICKE = "dicke"


class Topology(Enum):
    LINE = "line"
    RING = "ring"
    ALL_TO_ALL = "all"


class Normalization(Enum):
    SQRT_N = "sqrt-n"
    NONE = "none"


class BasisMismatchError(ValueError):
    """Basis passed to a builder was constructed for different parameters."""


class MissingStateError(LookupError):
    """The quench initial state is not contained in the basis."""


@dataclass(frozen=True)
class ModelParams:
    """Physical and numerical parameters of one battery configuration.

    ``n`` is the number of cavities (lattice) or two-level systems
    (collective); ``m`` the number of photons prepared per cavity, so the
    quench starts with ``n * m`` photons and every two-level system in its
    ground state.  ``beta_prime=None`` means "same as beta".  ``n_max`` is
    the collective-model photon cutoff, defaulting to ``5 * n * m``.

    ``literal_elements`` switches the collective matrix to an alternative
    printed convention in which the photon energy multiplies the coupling
    block and the diagonal reads w_c (n + N/2 - q); at the default
    operating point w_c = w_a = 1 the two conventions agree up to a
    constant diagonal shift, which leaves the extracted energy unchanged.
    """

    model: Model
    n: int
    beta: float
    m: int = 1
    omega_c: float = 1.0
    omega_a: float = 1.0
    beta_prime: float | None = None
    kappa: float = 0.0
    topology: Topology = Topology.LINE
    normalization: Normalization = Normalization.SQRT_N
    n_max: int | None = None
    literal_elements: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.beta_prime is not None and self.beta_prime < 0:
            raise ValueError(f"beta_prime must be nonnegative, got {self.beta_prime}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        if self.omega_c <= 0 or self.omega_a <= 0:
            raise ValueError("mode and two-level energies must be positive")
        if self.n_max is not None and self.n_max < 0:
            raise ValueError(f"n_max must be nonnegative, got {self.n_max}")

    @property
    def delta(self) -> float:
        """Two-level/mode detuning."""
        return self.omega_a - self.omega_c

    @property
    def beta_prime_value(self) -> float:
        return self.beta if self.beta_prime is None else self.beta_prime

    @property
    def n_max_value(self) -> int:
        return 5 * self.n * self.m if self.n_max is None else self.n_max

    def with_cutoff(self, multiplier: int) -> "ModelParams":
        """Copy with the collective photon cutoff set to ``multiplier * n * m``."""
        if multiplier < 1:
            raise ValueError(f"cutoff multiplier must be positive, got {multiplier}")
        return replace(self, n_max=multiplier * self.n * self.m)


@dataclass(frozen=True)
class SymmetricOperatorMatrix:
    """Dense real symmetric operator tied to the basis it was built in."""

    basis: BasisIndex
    entries: np.ndarray

    def __post_init__(self) -> None:
        if self.entries.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(
                f"entries shape {self.entries.shape} does not match basis dim {self.basis.dim}"
            )


def build_basis(params: ModelParams, max_dim: int | None = None) -> BasisIndex:
    """Build the basis matching ``params`` (sector for JCH, truncated ladder for DICKE)."""
    kwargs = {} if max_dim is None else {"max_dim": max_dim}
    if params.model is Model.JCH:
        return build_jch_sector(params.n, params.m, **kwargs)
    return build_dicke_basis(params.n, params.n_max_value, **kwargs)


def _check_jch_basis(params: ModelParams, basis: BasisIndex) -> None:
    first = basis.states[0]
    if not isinstance(first, JchState) or len(first.photons) != params.n:
        raise BasisMismatchError("basis does not describe a chain with n cavities")
    if total_excitations(first) != params.n * params.m:
        raise BasisMismatchError(
            f"basis sector has {total_excitations(first)} excitations, expected {params.n * params.m}"
        )
    if basis.dim != jch_sector_dim(params.n, params.m):
        raise BasisMismatchError("basis size does not match the full excitation sector")


def _check_dicke_basis(params: ModelParams, basis: BasisIndex) -> None:
    last = basis.states[-1]
    if not isinstance(last, DickeState):
        raise BasisMismatchError("basis does not hold collective (n, q) states")
    if last.q != params.n or basis.dim != dicke_dim(params.n, last.n):
        raise BasisMismatchError("basis was built for a different system size")
    if last.n != params.n_max_value:
        raise BasisMismatchError(
            f"basis photon cutoff {last.n} does not match requested {params.n_max_value}"
        )


def _jch_bonds(params: ModelParams) -> list[tuple[int, int]]:
    n = params.n
    if n == 1:
        return []
    if params.topology is Topology.LINE:
        return [(c, c + 1) for c in range(n - 1)]
    if params.topology is Topology.RING:
        # For n == 2 this intentionally lists the single cavity pair twice:
        # closing the ring adds a second copy of the only bond.
        return [(c, (c + 1) % n) for c in range(n)]
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _jch_triplets(params: ModelParams, basis: BasisIndex):
    """Upper-triangle entries (i <= j) of the lattice Hamiltonian.

    Only photon-removing halves of each Hermitian term pair are walked, so
    every off-diagonal matrix element is produced exactly once.
    """
    bonds = _jch_bonds(params)
    index_of = basis.index_of
    beta, kappa = params.beta, params.kappa
    for i, state in enumerate(basis.states):
        photons, spins = state.photons, state.spins
        yield i, i, params.omega_c * sum(photons) + params.omega_a * sum(spins)
        if beta != 0.0:
            for c, (p, s) in enumerate(zip(photons, spins)):
                if p > 0 and s == 0:
                    target = JchState(
                        photons=photons[:c] + (p - 1,) + photons[c + 1 :],
                        spins=spins[:c] + (1,) + spins[c + 1 :],
                    )
                    j = index_of[target]
                    a, b = (i, j) if i <= j else (j, i)
                    yield a, b, beta * math.sqrt(p)
        if kappa != 0.0:
            for src, dst in bonds:
                p = photons[src]
                if p > 0:
                    moved = list(photons)
                    moved[src] -= 1
                    moved[dst] += 1
                    j = index_of[JchState(photons=tuple(moved), spins=spins)]
                    a, b = (i, j) if i <= j else (j, i)
                    yield a, b, -kappa * math.sqrt(p) * math.sqrt(photons[dst] + 1)


def _dicke_triplets(params: ModelParams, basis: BasisIndex):
    """Upper-triangle entries (i <= j) of the collective Hamiltonian.

    Ladder amplitudes use j = N/2, m_j = N/2 - q:

        photon absorbed, spin raised  (n, q) -> (n-1, q-1):  sqrt(n) * J+ amplitude, weight g
        photon absorbed, spin lowered (n, q) -> (n-1, q+1):  sqrt(n) * J- amplitude, weight g'

    Their Hermitian partners land on the mirrored triangle.  Emission
    targets above the photon cutoff are dropped by the truncation.
    """
    nsys = params.n
    scale = 1.0 / math.sqrt(nsys) if params.normalization is Normalization.SQRT_N else 1.0
    g_rot = params.beta * scale
    g_cnt = params.beta_prime_value * scale
    if params.literal_elements:
        g_rot *= params.omega_c
        g_cnt *= params.omega_c
    j = nsys / 2.0
    jj = j * (j + 1.0)
    for i, state in enumerate(basis.states):
        n, q = state.n, state.q
        mj = j - q
        if params.literal_elements:
            yield i, i, params.omega_c * (n + mj)
        else:
            yield i, i, params.omega_c * n + params.omega_a * (nsys - q)
        if n == 0:
            continue
        if g_rot != 0.0 and q >= 1:
            amp = math.sqrt(n * (jj - mj * (mj + 1.0)))
            if amp != 0.0:
                yield basis.index_of[DickeState(n - 1, q - 1)], i, g_rot * amp
        if g_cnt != 0.0 and q <= nsys - 1:
            amp = math.sqrt(n * (jj - mj * (mj - 1.0)))
            if amp != 0.0:
                yield basis.index_of[DickeState(n - 1, q + 1)], i, g_cnt * amp


def _triplets(params: ModelParams, basis: BasisIndex):
    if params.model is Model.JCH:
        _check_jch_basis(params, basis)
        return _jch_triplets(params, basis)
    _check_dicke_basis(params, basis)
    return _dicke_triplets(params, basis)


def build_hamiltonian(params: ModelParams, basis: BasisIndex) -> SymmetricOperatorMatrix:
    """Dense symmetric Hamiltonian for either model."""
    h = np.zeros((basis.dim, basis.dim))
    for i, j, v in _triplets(params, basis):
        h[i, j] += v
    lower = np.tril_indices(basis.dim, -1)
    h[lower] = h.T[lower]
    return SymmetricOperatorMatrix(basis=basis, entries=h)


def build_jch(params: ModelParams, basis: BasisIndex) -> SymmetricOperatorMatrix:
    if params.model is not Model.JCH:
        raise ValueError("build_jch requires lattice-model parameters")
    return build_hamiltonian(params, basis)


def build_dicke(params: ModelParams, basis: BasisIndex) -> SymmetricOperatorMatrix:
    if params.model is not Model.DICKE:
        raise ValueError("build_dicke requires collective-model parameters")
    return build_hamiltonian(params, basis)


def build_csr(params: ModelParams, basis: BasisIndex) -> scipy.sparse.csr_array:
    """Sparse symmetric Hamiltonian, used when the sector outgrows dense storage."""
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for i, j, v in _triplets(params, basis):
        rows.append(i)
        cols.append(j)
        vals.append(v)
        if i != j:
            rows.append(j)
            cols.append(i)
            vals.append(v)
    coo = scipy.sparse.coo_array(
        (np.asarray(vals), (np.asarray(rows), np.asarray(cols))),
        shape=(basis.dim, basis.dim),
    )
    return coo.tocsr()


def jz_diagonal(params: ModelParams, basis: BasisIndex) -> np.ndarray:
    """Diagonal of the stored-energy observable: w_a times the number of excited systems."""
    if params.model is Model.JCH:
        _check_jch_basis(params, basis)
        return np.array([params.omega_a * sum(s.spins) for s in basis.states])
    _check_dicke_basis(params, basis)
    return np.array([params.omega_a * (params.n - s.q) for s in basis.states])


def build_jz(params: ModelParams, basis: BasisIndex) -> SymmetricOperatorMatrix:
    return SymmetricOperatorMatrix(basis=basis, entries=np.diag(jz_diagonal(params, basis)))


def initial_index(params: ModelParams, basis: BasisIndex) -> int:
    """Index of the quench state: m photons in every cavity, all systems in the ground state."""
    if params.model is Model.JCH:
        state = JchState(photons=(params.m,) * params.n, spins=(0,) * params.n)
    else:
        state = DickeState(n=params.n * params.m, q=params.n)
    try:
        return basis.index_of[state]
    except KeyError:
        raise MissingStateError(
            f"initial state {state} is outside the basis; "
            f"for the collective model the cutoff must satisfy n_max >= n * m"
        ) from None


def initial_state(params: ModelParams, basis: BasisIndex) -> np.ndarray:
    psi = np.zeros(basis.dim)
    psi[initial_index(params, basis)] = 1.0
    return psi
