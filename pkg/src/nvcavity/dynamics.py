"""Lindblad dynamics on small tensor-product Hilbert spaces.

The master equation is represented as a dense superoperator acting on
column-stacked density matrices: ``vec(rho)`` stacks columns, so
``vec(A X B) = kron(B.T, A) vec(X)``.  For a Hamiltonian ``H`` and collapse
channels ``(r_i, O_i)`` the generator is::

    L[rho] = -i [H, rho] + sum_i r_i (O_i rho O_i^dag
                                      - (O_i^dag O_i rho + rho O_i^dag O_i)/2)

All rates and frequencies are angular (rad/s).  Hamiltonians are written in
the frame rotating at the optical carrier, so they contain detunings only;
spectra produced downstream are offsets from the carrier.

Propagation uses the eigendecomposition of the generator (resolvent form),
which is exact for time-independent generators and lets two-time correlators
reuse one decomposition across the whole grid.  A matrix-exponential fallback
covers badly conditioned eigenbases.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

MAX_TOTAL_DIM = 64

#: Tolerances for validated density matrices.
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = -1e-8

#: Eigenvector condition number above which the modal route is distrusted.
MODAL_CONDITION_LIMIT = 1e10


class NumericsError(RuntimeError):
    """A numerical routine produced an unusable result."""


@dataclass(frozen=True)
class HilbertSpace:
    """Tensor product of finite subsystems, e.g. ``(3, 2)`` = atom x mode."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if not self.dims:
            raise ValueError("at least one subsystem required")
        if any(int(d) != d or d < 1 for d in self.dims):
            raise ValueError("subsystem dimensions must be positive integers")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.total_dim > MAX_TOTAL_DIM:
            raise ValueError(
                f"total dimension {self.total_dim} exceeds {MAX_TOTAL_DIM}"
            )

    @property
    def total_dim(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out


@dataclass(frozen=True)
class Operator:
    """Linear operator on a :class:`HilbertSpace`."""

    matrix: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.space.total_dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} != ({d}, {d})")
        object.__setattr__(self, "matrix", mat)

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.space)

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.matrix + other.matrix, self.space)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.matrix - other.matrix, self.space)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.matrix @ other.matrix, self.space)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.matrix * scalar, self.space)

    __rmul__ = __mul__

    def _check(self, other: "Operator"):
        if other.space != self.space:
            raise ValueError("operators act on different spaces")


@dataclass(frozen=True)
class CollapseChannel:
    """Dissipative channel with non-negative rate (rad/s)."""

    rate: float
    operator: Operator

    def __post_init__(self):
        if not np.isfinite(self.rate) or self.rate < 0.0:
            raise ValueError("collapse rate must be finite and non-negative")


@dataclass(frozen=True)
class DensityOperator:
    """Validated density matrix: Hermitian, unit trace, positive."""

    matrix: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.space.total_dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} != ({d}, {d})")
        if not np.all(np.isfinite(mat.view(float))):
            raise ValueError("density matrix contains non-finite entries")
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > HERMITICITY_TOL:
            raise ValueError(f"density matrix not Hermitian: deviation {herm:.3e}")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr!r} != 1")
        eigmin = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2.0).min())
        if eigmin < POSITIVITY_TOL:
            raise ValueError(f"density matrix not positive: min eigenvalue {eigmin:.3e}")
        object.__setattr__(self, "matrix", mat)


@dataclass(frozen=True)
class Superoperator:
    """Dense generator acting on column-stacked density matrices."""

    matrix: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d2 = self.space.total_dim ** 2
        if mat.shape != (d2, d2):
            raise ValueError(f"superoperator shape {mat.shape} != ({d2}, {d2})")
        object.__setattr__(self, "matrix", mat)

    def modal(self) -> "ModalDecomposition":
        """Cached eigendecomposition of the generator."""
        cached = self.__dict__.get("_modal")
        if cached is None:
            cached = ModalDecomposition.from_matrix(self.matrix)
            object.__setattr__(self, "_modal", cached)
        return cached


@dataclass(frozen=True)
class CorrelatorGrid:
    """Two-time correlator values G[i, j] = <A(t_i + tau_j) B(t_i)>."""

    t_axis: np.ndarray
    tau_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_axis, dtype=float)
        tau = np.asarray(self.tau_axis, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        for name, ax in (("t_axis", t), ("tau_axis", tau)):
            if ax.ndim != 1 or ax.size < 2:
                raise ValueError(f"{name} must be 1-D with at least two points")
            if ax[0] < 0.0 or np.any(np.diff(ax) <= 0.0):
                raise ValueError(f"{name} must be non-negative and strictly increasing")
        if vals.shape != (t.size, tau.size):
            raise ValueError("values shape does not match axes")
        object.__setattr__(self, "t_axis", t)
        object.__setattr__(self, "tau_axis", tau)
        object.__setattr__(self, "values", vals)


def vectorize(matrix: np.ndarray) -> np.ndarray:
    """Column-stack a matrix."""
    return np.asarray(matrix, dtype=complex).flatten(order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    return np.asarray(vec, dtype=complex).reshape((dim, dim), order="F")


def identity_operator(space: HilbertSpace) -> Operator:
    return Operator(np.eye(space.total_dim, dtype=complex), space)


def subsystem_operator(space: HilbertSpace, which: int, matrix: np.ndarray) -> Operator:
    """Embed a single-subsystem operator into the full tensor product."""
    if not 0 <= which < len(space.dims):
        raise ValueError(f"subsystem index {which} out of range")
    mat = np.asarray(matrix, dtype=complex)
    d = space.dims[which]
    if mat.shape != (d, d):
        raise ValueError(f"matrix shape {mat.shape} != ({d}, {d})")
    factors = [
        mat if k == which else np.eye(dk, dtype=complex)
        for k, dk in enumerate(space.dims)
    ]
    return Operator(reduce(np.kron, factors), space)


def lowering_operator(space: HilbertSpace, which: int) -> Operator:
    """Truncated bosonic annihilation operator on one subsystem."""
    d = space.dims[which]
    mat = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)
    return subsystem_operator(space, which, mat)


def number_operator(space: HilbertSpace, which: int) -> Operator:
    d = space.dims[which]
    return subsystem_operator(space, which, np.diag(np.arange(d, dtype=float)))


def transition_operator(space: HilbertSpace, which: int, to_level: int, from_level: int) -> Operator:
    """|to><from| on one subsystem."""
    d = space.dims[which]
    if not (0 <= to_level < d and 0 <= from_level < d):
        raise ValueError("level index out of range")
    mat = np.zeros((d, d), dtype=complex)
    mat[to_level, from_level] = 1.0
    return subsystem_operator(space, which, mat)


def projector(space: HilbertSpace, which: int, level: int) -> Operator:
    return transition_operator(space, which, level, level)


def basis_state(space: HilbertSpace, indices: tuple[int, ...]) -> DensityOperator:
    """Pure product state |i_1, i_2, ...><...| as a density matrix."""
    if len(indices) != len(space.dims):
        raise ValueError("one index per subsystem required")
    flat = 0
    for idx, d in zip(indices, space.dims):
        if not 0 <= idx < d:
            raise ValueError(f"index {idx} out of range for dimension {d}")
        flat = flat * d + idx
    mat = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    mat[flat, flat] = 1.0
    return DensityOperator(mat, space)


def build_liouvillian(hamiltonian: Operator, channels: list[CollapseChannel]) -> Superoperator:
    """Assemble the dense Lindblad generator.

    Args:
        hamiltonian: Hermitian operator (angular units); checked to a relative
            tolerance of ``1e-10`` with an absolute floor of 1.
        channels: Collapse channels; operators must share the Hamiltonian's
            space.
    """
    h = hamiltonian.matrix
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    dev = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if dev > 1e-10 * scale:
        raise ValueError(f"Hamiltonian not Hermitian: deviation {dev:.3e}")
    space = hamiltonian.space
    d = space.total_dim
    eye = np.eye(d, dtype=complex)
    gen = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for ch in channels:
        if ch.operator.space != space:
            raise ValueError("collapse operator acts on a different space")
        o = ch.operator.matrix
        oo = o.conj().T @ o
        gen += ch.rate * (
            np.kron(o.conj(), o)
            - 0.5 * np.kron(eye, oo)
            - 0.5 * np.kron(oo.T, eye)
        )
    return Superoperator(gen, space)


class ModalDecomposition:
    """Eigendecomposition ``L = V diag(lambda) V^-1`` of a generator.

    Provides vectorized propagation, trace functionals and exact integrals
    ``int_0^inf exp(lambda t) dt = -1/lambda`` with a guard on the stationary
    kernel (``lambda = 0`` modes must carry no weight in decaying functionals).
    """

    def __init__(self, lambdas, modes, inverse_modes, condition):
        self.lambdas = lambdas
        self.modes = modes
        self.inverse_modes = inverse_modes
        self.condition = condition
        scale = float(np.max(np.abs(lambdas))) if lambdas.size else 1.0
        self.rate_scale = max(scale, 1e-300)
        self.kernel = np.abs(lambdas) <= 1e-12 * self.rate_scale

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "ModalDecomposition":
        lambdas, modes = np.linalg.eig(matrix)
        condition = float(np.linalg.cond(modes))
        inverse_modes = np.linalg.inv(modes)
        return cls(lambdas, modes, inverse_modes, condition)

    @property
    def well_conditioned(self) -> bool:
        return np.isfinite(self.condition) and self.condition < MODAL_CONDITION_LIMIT

    def seed(self, state_vec: np.ndarray) -> np.ndarray:
        """Coordinates of a vectorized state in the eigenbasis."""
        return self.inverse_modes @ state_vec

    def trace_row(self, op_matrix: np.ndarray) -> np.ndarray:
        """Row u with Tr[O unvec(V c)] = u . c for eigen-coordinates c."""
        return vectorize(op_matrix.T) @ self.modes

    def propagate_coords(self, coords: np.ndarray, times: np.ndarray) -> np.ndarray:
        """exp(lambda t) c for each time; shape (n_modes, n_times)."""
        return coords[:, None] * np.exp(np.outer(self.lambdas, times))

    def states_at(self, coords: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Vectorized states at the given times, shape (d^2, n_times)."""
        return self.modes @ self.propagate_coords(coords, times)

    def integrated_weights(self, weights: np.ndarray, drop_tol: float = 1e-9) -> complex:
        """Exact sum of ``w_j * int_0^inf exp(lambda_j t) dt``.

        Kernel modes are dropped; they must carry relative weight below
        ``drop_tol``, otherwise the integral diverges and a
        :class:`NumericsError` is raised.
        """
        weights = np.asarray(weights, dtype=complex)
        total = float(np.sum(np.abs(weights)))
        kernel_weight = float(np.sum(np.abs(weights[self.kernel])))
        if total > 0.0 and kernel_weight > drop_tol * total:
            raise NumericsError(
                "non-decaying mode carries weight "
                f"{kernel_weight:.3e} (total {total:.3e})"
            )
        live = ~self.kernel
        return complex(np.sum(-weights[live] / self.lambdas[live]))


def _propagator_states(liouvillian, rho0, times):
    """Vectorized rho(t) for each t, preferring the modal route."""
    modal = liouvillian.modal()
    vec0 = vectorize(rho0.matrix)
    if modal.well_conditioned:
        return modal.states_at(modal.seed(vec0), times)
    d2 = vec0.size
    out = np.empty((d2, len(times)), dtype=complex)
    for k, t in enumerate(times):
        out[:, k] = scipy.linalg.expm(liouvillian.matrix * t) @ vec0
    return out


def evolve(liouvillian: Superoperator, rho: DensityOperator, t: float) -> DensityOperator:
    """Propagate a state for time ``t >= 0``.

    The result is validated against the density-matrix invariants; non-finite
    values raise :class:`NumericsError` naming the offending time.
    """
    if t < 0.0:
        raise ValueError("propagation time must be non-negative")
    if rho.space != liouvillian.space:
        raise ValueError("state and generator act on different spaces")
    vec_t = _propagator_states(liouvillian, rho, np.array([float(t)]))[:, 0]
    if not np.all(np.isfinite(vec_t.view(float))):
        raise NumericsError(f"propagation produced non-finite values at t={t!r}")
    mat = unvectorize(vec_t, liouvillian.space.total_dim)
    # Trim eigenbasis round-off so the validated constructor sees a clean state.
    mat = (mat + mat.conj().T) / 2.0
    tr = np.trace(mat).real
    if abs(tr - 1.0) > 1e-8:
        raise NumericsError(f"trace drifted to {tr!r} at t={t!r}")
    mat = mat / tr
    return DensityOperator(mat, liouvillian.space)


def expectation(operator: Operator, rho: DensityOperator) -> complex:
    """Tr[O rho]."""
    if operator.space != rho.space:
        raise ValueError("operator and state act on different spaces")
    return complex(np.trace(operator.matrix @ rho.matrix))


def two_time_correlator(
    liouvillian: Superoperator,
    rho0: DensityOperator,
    op_left: Operator,
    op_right: Operator,
    t_axis: np.ndarray,
    tau_axis: np.ndarray,
) -> CorrelatorGrid:
    """Quantum-regression two-time correlator on a rectangular grid.

    Returns G[i, j] = Tr[A exp(L tau_j)(B rho(t_i))] with A = ``op_left`` and
    B = ``op_right``.  At ``tau = 0`` this reduces to ``Tr[A B rho(t_i)]``
    exactly, which downstream code relies on for emitted-power rows.
    """
    t_axis = np.asarray(t_axis, dtype=float)
    tau_axis = np.asarray(tau_axis, dtype=float)
    space = liouvillian.space
    for op in (op_left, op_right):
        if op.space != space:
            raise ValueError("correlator operators act on a different space")
    if rho0.space != space:
        raise ValueError("state and generator act on different spaces")
    d = space.total_dim
    states = _propagator_states(liouvillian, rho0, t_axis)  # (d^2, n_t)
    seeds = np.kron(np.eye(d, dtype=complex), op_right.matrix) @ states
    modal = liouvillian.modal()
    if modal.well_conditioned:
        coords = modal.inverse_modes @ seeds  # (d^2, n_t)
        row = modal.trace_row(op_left.matrix)  # (d^2,)
        phases = np.exp(np.outer(modal.lambdas, tau_axis))  # (d^2, n_tau)
        values = (row[:, None] * coords).T @ phases  # (n_t, n_tau)
    else:
        trace_vec = vectorize(op_left.matrix.T)
        values = np.empty((t_axis.size, tau_axis.size), dtype=complex)
        for j, tau in enumerate(tau_axis):
            prop = scipy.linalg.expm(liouvillian.matrix * tau)
            values[:, j] = trace_vec @ (prop @ seeds)
    if not np.all(np.isfinite(values.view(float))):
        raise NumericsError("two-time correlator produced non-finite values")
    return CorrelatorGrid(t_axis, tau_axis, values)
