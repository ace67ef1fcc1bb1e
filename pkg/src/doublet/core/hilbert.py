"""src/doublet/core/hilbert.py"""

from __future__ import annotations

import math
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from doublet.constants import EPS_NORM
from doublet.errors import (
    ArgumentError,
    CompositionError,
    LayoutError,
    NumericalConsistencyError,
)

ComplexArray = NDArray[np.complex128]


def _frozen(values: ArrayLike) -> ComplexArray:
    """Return a read-only complex128 copy of ``values``."""
    array = np.array(values, dtype=np.complex128)
    array.setflags(write=False)
    return array


class SubsystemLayout:
    """
    Ordered, labeled factors of a finite-dimensional tensor-product space.

    The first factor is the most significant one in the Kronecker ordering, so a
    basis index of the full space is the mixed-radix number whose digits are the
    factor indices read left to right.
    """

    __slots__ = ("_labels", "_dims")

    def __init__(self, factors: Iterable[Tuple[str, int]]) -> None:
        """
        Initialize a layout from ``(label, dimension)`` pairs.

        Args:
            factors (Iterable[Tuple[str, int]]): Factors in tensor order.

        Raises:
            LayoutError: If labels repeat, are empty, or a dimension is below 2.
        """
        labels = []
        dims = []
        for label, dim in factors:
            if not isinstance(label, str) or not label:
                raise LayoutError(f"Factor labels must be non-empty text: {label!r}")
            if isinstance(dim, bool) or not isinstance(dim, (int, np.integer)):
                raise LayoutError(
                    f"Dimension of {label!r} must be int, got {type(dim).__name__}"
                )
            if dim < 2:
                raise LayoutError(
                    f"Factor {label!r} has dimension {dim}; dimensions must be >= 2"
                )
            if label in labels:
                raise LayoutError(f"Duplicate factor label {label!r}")
            labels.append(label)
            dims.append(int(dim))

        if not labels:
            raise LayoutError("A layout needs at least one factor")

        self._labels: Tuple[str, ...] = tuple(labels)
        self._dims: Tuple[int, ...] = tuple(dims)

    @classmethod
    def of(cls, **factors: int) -> SubsystemLayout:
        """Build a layout from keyword arguments, e.g. ``of(S=2, O=3)``."""
        return cls(factors.items())

    def __repr__(self) -> str:
        inner = ", ".join(f"{l}={d}" for l, d in zip(self._labels, self._dims))
        return f"SubsystemLayout({inner})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SubsystemLayout):
            return self._labels == other._labels and self._dims == other._dims
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._labels, self._dims))

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[Tuple[str, int]]:
        return iter(zip(self._labels, self._dims))

    def __contains__(self, label: object) -> bool:
        return label in self._labels

    @property
    def labels(self) -> Tuple[str, ...]:
        """Factor labels in tensor order."""
        return self._labels

    @property
    def dims(self) -> Tuple[int, ...]:
        """Factor dimensions in tensor order."""
        return self._dims

    @property
    def total_dimension(self) -> int:
        """Dimension of the full tensor-product space."""
        return math.prod(self._dims)

    def position(self, label: str) -> int:
        """Return the tensor position of ``label``.

        Raises:
            LayoutError: If the label is not part of the layout.
        """
        try:
            return self._labels.index(label)
        except ValueError as exc:
            raise LayoutError(f"Unknown factor label {label!r} in {self!r}") from exc

    def dimension(self, label: str) -> int:
        """Return the dimension of the factor called ``label``."""
        return self._dims[self.position(label)]

    def concat(self, other: SubsystemLayout) -> SubsystemLayout:
        """Return the layout of ``self ⊗ other``.

        Raises:
            CompositionError: If both layouts share a label.
        """
        clash = tuple(label for label in other.labels if label in self._labels)
        if clash:
            raise CompositionError(clash)
        return SubsystemLayout(list(self) + list(other))

    def restrict(self, labels: Iterable[str]) -> SubsystemLayout:
        """Return the sub-layout holding ``labels``, in this layout's order."""
        wanted = set(labels)
        for label in wanted:
            self.position(label)
        return SubsystemLayout((l, d) for l, d in self if l in wanted)

    def digits(self, label: str) -> NDArray[np.int64]:
        """Return, for every basis index of the full space, the digit of ``label``."""
        position = self.position(label)
        return np.unravel_index(np.arange(self.total_dimension), self._dims)[position]


def _require_layout(expected: SubsystemLayout, actual: SubsystemLayout) -> None:
    if expected != actual:
        raise LayoutError(f"Layout mismatch: {expected!r} vs {actual!r}")


class StateVector:
    """Normalized pure state on a :class:`SubsystemLayout`."""

    __slots__ = ("_amplitudes", "_layout")

    def __init__(
        self,
        amplitudes: ArrayLike,
        layout: SubsystemLayout,
        tolerance: float = EPS_NORM,
    ) -> None:
        """
        Initialize a state vector.

        Args:
            amplitudes (ArrayLike): Complex amplitudes in layout basis order.
            layout (SubsystemLayout): Tensor structure of the space.
            tolerance (float): Accepted deviation of the Euclidean norm from 1.

        Raises:
            LayoutError: If the length does not match the layout dimension.
            ArgumentError: If the vector is not normalized.
        """
        array = _frozen(amplitudes)
        if array.ndim != 1 or array.shape[0] != layout.total_dimension:
            raise LayoutError(
                f"Expected {layout.total_dimension} amplitudes for {layout!r}, "
                f"got shape {array.shape}"
            )
        norm = float(np.linalg.norm(array))
        if abs(norm - 1.0) >= tolerance:
            raise ArgumentError(f"State vector norm {norm!r} differs from 1")
        self._amplitudes = array
        self._layout = layout

    @classmethod
    def basis(
        cls, layout: SubsystemLayout, indices: Optional[Mapping[str, int]] = None
    ) -> StateVector:
        """Return the product basis state with the given factor indices.

        Factors missing from ``indices`` sit at index 0.
        """
        indices = dict(indices or {})
        for label in indices:
            layout.position(label)
        digits = []
        for label, dim in layout:
            index = indices.get(label, 0)
            if not 0 <= index < dim:
                raise ArgumentError(f"Index {index} out of range for {label!r} ({dim})")
            digits.append(index)
        flat = int(np.ravel_multi_index(tuple(digits), layout.dims))
        amplitudes = np.zeros(layout.total_dimension, dtype=np.complex128)
        amplitudes[flat] = 1.0
        return cls(amplitudes, layout)

    def __repr__(self) -> str:
        return f"StateVector({self._layout!r}, {np.round(self._amplitudes, 6)!r})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, StateVector):
            return self._layout == other._layout and np.array_equal(
                self._amplitudes, other._amplitudes
            )
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    @property
    def amplitudes(self) -> ComplexArray:
        """Read-only amplitude array."""
        return self._amplitudes

    @property
    def layout(self) -> SubsystemLayout:
        """Tensor structure of the space."""
        return self._layout

    def norm(self) -> float:
        """Return the Euclidean norm."""
        return float(np.linalg.norm(self._amplitudes))

    def inner(self, other: StateVector) -> complex:
        """Return ``<self|other>``."""
        _require_layout(self._layout, other.layout)
        return complex(np.vdot(self._amplitudes, other.amplitudes))

    def to_density_matrix(self) -> DensityMatrix:
        """Return the projector ``|self><self|``."""
        return DensityMatrix(
            np.outer(self._amplitudes, self._amplitudes.conj()), self._layout
        )

    def allclose(self, other: StateVector, atol: float = EPS_NORM) -> bool:
        """Compare amplitudes entry-wise within ``atol`` (no phase freedom)."""
        return self._layout == other.layout and bool(
            np.allclose(self._amplitudes, other.amplitudes, rtol=0.0, atol=atol)
        )


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on a layout."""

    __slots__ = ("_entries", "_layout")

    def __init__(
        self,
        entries: ArrayLike,
        layout: SubsystemLayout,
        tolerance: float = EPS_NORM,
    ) -> None:
        """
        Initialize a density matrix.

        Args:
            entries (ArrayLike): Square complex matrix in layout basis order.
            layout (SubsystemLayout): Tensor structure of the space.
            tolerance (float): Tolerance of the hermiticity, trace and sign checks.

        Raises:
            LayoutError: If the shape does not match the layout.
            ArgumentError: If the matrix is not a valid density matrix.
        """
        matrix = _frozen(entries)
        dim = layout.total_dimension
        if matrix.shape != (dim, dim):
            raise LayoutError(
                f"Expected a {dim}x{dim} matrix for {layout!r}, got {matrix.shape}"
            )
        if float(np.max(np.abs(matrix - matrix.conj().T))) >= tolerance:
            raise ArgumentError("Density matrix is not Hermitian")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) >= tolerance:
            raise ArgumentError(f"Density matrix trace {trace!r} differs from 1")
        lowest = float(scipy.linalg.eigvalsh(matrix)[0])
        if lowest < -tolerance:
            raise ArgumentError(f"Density matrix has negative eigenvalue {lowest!r}")
        self._entries = matrix
        self._layout = layout

    @classmethod
    def from_state(cls, state: StateVector) -> DensityMatrix:
        """Return ``|state><state|``."""
        return state.to_density_matrix()

    def __repr__(self) -> str:
        return f"DensityMatrix({self._layout!r}, purity={self.purity():.6f})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, DensityMatrix):
            return self._layout == other._layout and np.array_equal(
                self._entries, other._entries
            )
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    @property
    def entries(self) -> ComplexArray:
        """Read-only matrix entries."""
        return self._entries

    @property
    def layout(self) -> SubsystemLayout:
        """Tensor structure of the space."""
        return self._layout

    def trace(self) -> float:
        """Return the (real) trace."""
        return float(np.trace(self._entries).real)

    def purity(self) -> float:
        """Return ``Tr(rho^2)``."""
        return float(np.real(np.vdot(self._entries.conj().T, self._entries)))

    def diagonal(self) -> NDArray[np.float64]:
        """Return the real diagonal (populations)."""
        return np.real(np.diag(self._entries)).copy()

    def allclose(self, other: DensityMatrix, atol: float = EPS_NORM) -> bool:
        """Compare entries within ``atol``."""
        return self._layout == other.layout and bool(
            np.allclose(self._entries, other.entries, rtol=0.0, atol=atol)
        )


class OperatorKind(str, Enum):
    """Structural promise an :class:`Operator` makes about its matrix."""

    HERMITIAN = "hermitian"
    UNITARY = "unitary"
    PROJECTOR = "projector"
    GENERAL = "general"


class Operator:
    """Square complex matrix on a layout, tagged with the structure it satisfies."""

    __slots__ = ("_entries", "_layout", "_kind")

    def __init__(
        self,
        entries: ArrayLike,
        layout: SubsystemLayout,
        kind: Union[OperatorKind, str] = OperatorKind.GENERAL,
        tolerance: float = EPS_NORM,
    ) -> None:
        """
        Initialize an operator and check the promise made by ``kind``.

        Args:
            entries (ArrayLike): Square complex matrix in layout basis order.
            layout (SubsystemLayout): Tensor structure of the space.
            kind (OperatorKind | str): hermitian, unitary, projector or general.
            tolerance (float): Tolerance of the structural check.

        Raises:
            LayoutError: If the shape does not match the layout.
            ArgumentError: If the matrix breaks the promise of ``kind``.
        """
        matrix = _frozen(entries)
        dim = layout.total_dimension
        if matrix.shape != (dim, dim):
            raise LayoutError(
                f"Expected a {dim}x{dim} matrix for {layout!r}, got {matrix.shape}"
            )
        try:
            kind = OperatorKind(kind)
        except ValueError as exc:
            raise ArgumentError(f"Unknown operator kind {kind!r}") from exc

        self._entries = matrix
        self._layout = layout
        self._kind = kind

        if kind is OperatorKind.HERMITIAN and not self.is_hermitian(tolerance):
            raise ArgumentError("Operator declared hermitian is not Hermitian")
        if kind is OperatorKind.UNITARY and not self.is_unitary(tolerance):
            raise ArgumentError("Operator declared unitary is not unitary")
        if kind is OperatorKind.PROJECTOR and not self.is_projector(tolerance):
            raise ArgumentError("Operator declared projector is not a projector")

    @classmethod
    def identity(cls, layout: SubsystemLayout) -> Operator:
        """Return the identity on ``layout`` (tagged unitary)."""
        return cls(np.eye(layout.total_dimension), layout, OperatorKind.UNITARY)

    @classmethod
    def zero(cls, layout: SubsystemLayout) -> Operator:
        """Return the zero operator on ``layout`` (tagged hermitian)."""
        dim = layout.total_dimension
        return cls(np.zeros((dim, dim)), layout, OperatorKind.HERMITIAN)

    def __repr__(self) -> str:
        return f"Operator({self._layout!r}, kind={self._kind.value})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Operator):
            return (
                self._layout == other._layout
                and self._kind is other._kind
                and np.array_equal(self._entries, other._entries)
            )
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __matmul__(self, other: Operator) -> Operator:
        """Return the operator product ``self · other``."""
        if not isinstance(other, Operator):
            return NotImplemented
        _require_layout(self._layout, other.layout)
        kind = OperatorKind.GENERAL
        if self._kind is OperatorKind.UNITARY and other.kind is OperatorKind.UNITARY:
            kind = OperatorKind.UNITARY
        return Operator(self._entries @ other.entries, self._layout, kind)

    @property
    def entries(self) -> ComplexArray:
        """Read-only matrix entries."""
        return self._entries

    @property
    def layout(self) -> SubsystemLayout:
        """Tensor structure of the space."""
        return self._layout

    @property
    def kind(self) -> OperatorKind:
        """Structural tag of the operator."""
        return self._kind

    def adjoint(self) -> Operator:
        """Return the conjugate transpose; the structural tag is preserved."""
        return Operator(self._entries.conj().T, self._layout, self._kind)

    def is_hermitian(self, tolerance: float = EPS_NORM) -> bool:
        """Check ``A = A†`` entry-wise within ``tolerance``."""
        return float(np.max(np.abs(self._entries - self._entries.conj().T))) < tolerance

    def is_unitary(self, tolerance: float = EPS_NORM) -> bool:
        """Check ``U U† = I`` entry-wise within ``tolerance``."""
        product = self._entries @ self._entries.conj().T
        identity = np.eye(self._layout.total_dimension)
        return float(np.max(np.abs(product - identity))) < tolerance

    def is_projector(self, tolerance: float = EPS_NORM) -> bool:
        """Check ``P² = P = P†`` entry-wise within ``tolerance``."""
        squared = self._entries @ self._entries
        return (
            self.is_hermitian(tolerance)
            and float(np.max(np.abs(squared - self._entries))) < tolerance
        )

    def norm(self) -> float:
        """Return the spectral (operator 2-) norm."""
        return float(np.linalg.norm(self._entries, ord=2))

    def commutator(self, other: Operator) -> Operator:
        """Return ``[self, other] = self·other − other·self``."""
        _require_layout(self._layout, other.layout)
        entries = self._entries @ other.entries - other.entries @ self._entries
        return Operator(entries, self._layout)

    def allclose(self, other: Operator, atol: float = EPS_NORM) -> bool:
        """Compare entries within ``atol`` (tags are ignored)."""
        return self._layout == other.layout and bool(
            np.allclose(self._entries, other.entries, rtol=0.0, atol=atol)
        )


State = Union[StateVector, DensityMatrix]
Composable = Union[StateVector, DensityMatrix, Operator]

_KIND_PRODUCTS = {
    (OperatorKind.UNITARY, OperatorKind.UNITARY): OperatorKind.UNITARY,
    (OperatorKind.HERMITIAN, OperatorKind.HERMITIAN): OperatorKind.HERMITIAN,
    (OperatorKind.PROJECTOR, OperatorKind.PROJECTOR): OperatorKind.PROJECTOR,
    (OperatorKind.HERMITIAN, OperatorKind.PROJECTOR): OperatorKind.HERMITIAN,
    (OperatorKind.PROJECTOR, OperatorKind.HERMITIAN): OperatorKind.HERMITIAN,
}


def tensor_product(a: Composable, b: Composable) -> Composable:
    """
    Compose two states or two operators with the Kronecker product.

    Args:
        a: Left operand (most significant factors).
        b: Right operand, of the same kind as ``a``.

    Returns:
        Same kind as the operands, on the concatenated layout.

    Raises:
        CompositionError: If the operand layouts share a label.
        ArgumentError: If the operands are of different kinds.
    """
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        layout = a.layout.concat(b.layout)
        return StateVector(np.kron(a.amplitudes, b.amplitudes), layout)

    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        layout = a.layout.concat(b.layout)
        return DensityMatrix(np.kron(a.entries, b.entries), layout)

    if isinstance(a, Operator) and isinstance(b, Operator):
        layout = a.layout.concat(b.layout)
        kind = _KIND_PRODUCTS.get((a.kind, b.kind), OperatorKind.GENERAL)
        return Operator(np.kron(a.entries, b.entries), layout, kind)

    raise ArgumentError(
        f"Cannot compose {type(a).__name__} with {type(b).__name__}"
    )


def partial_trace(
    rho: State, keep: Union[str, Iterable[str]]
) -> DensityMatrix:
    """
    Trace out every factor not listed in ``keep``.

    Args:
        rho: Density matrix (a state vector is promoted to its projector).
        keep: Label or labels of the factors to keep.

    Returns:
        DensityMatrix: Reduced state on the kept factors, in layout order.

    Raises:
        ArgumentError: If ``keep`` is empty, names every factor, or names an
            unknown factor.
    """
    if isinstance(rho, StateVector):
        rho = rho.to_density_matrix()

    keep_set = {keep} if isinstance(keep, str) else set(keep)
    layout = rho.layout
    unknown = keep_set - set(layout.labels)
    if unknown:
        raise ArgumentError(f"Unknown factor labels {sorted(unknown)}")
    if not keep_set or keep_set == set(layout.labels):
        raise ArgumentError("keep must be a nonempty proper subset of the layout")

    count = len(layout)
    rows = list(range(count))
    cols = [
        count + pos if label in keep_set else pos
        for pos, label in enumerate(layout.labels)
    ]
    kept = [pos for pos, label in enumerate(layout.labels) if label in keep_set]
    tensor = rho.entries.reshape(layout.dims * 2)
    reduced = np.einsum(tensor, rows + cols, kept + [count + pos for pos in kept])

    sub = layout.restrict(keep_set)
    dim = sub.total_dimension
    return DensityMatrix(reduced.reshape(dim, dim), sub)


def propagator(hamiltonian: Operator, dt: float) -> Operator:
    """
    Return ``exp(−i H dt)`` (ħ = 1) by Hermitian eigendecomposition.

    Raises:
        ArgumentError: If ``H`` is not Hermitian or ``dt`` is not finite.
    """
    if not hamiltonian.is_hermitian():
        raise ArgumentError("Evolution needs a Hermitian Hamiltonian")
    if not math.isfinite(dt):
        raise ArgumentError(f"Time step must be finite, got {dt!r}")
    energies, vectors = scipy.linalg.eigh(hamiltonian.entries)
    phases = np.exp(-1j * energies * dt)
    unitary = (vectors * phases) @ vectors.conj().T
    # The unitary tag re-checks U U† = I on the reconstructed matrix.
    return Operator(unitary, hamiltonian.layout, OperatorKind.UNITARY)


def generator(unitary: Operator, duration: float) -> Operator:
    """
    Return a Hermitian ``H`` with ``exp(−i H duration) = U``.

    Uses the complex Schur form, which is diagonal for normal matrices.

    Raises:
        ArgumentError: If ``U`` is not tagged unitary or ``duration`` is not
            positive and finite.
    """
    if unitary.kind is not OperatorKind.UNITARY:
        raise ArgumentError("A generator can only be taken of a unitary operator")
    if not math.isfinite(duration) or duration <= 0:
        raise ArgumentError(f"Duration must be positive and finite, got {duration!r}")
    triangular, basis = scipy.linalg.schur(unitary.entries, output="complex")
    energies = -np.angle(np.diag(triangular)) / duration
    matrix = (basis * energies) @ basis.conj().T
    matrix = (matrix + matrix.conj().T) / 2.0
    return Operator(matrix, unitary.layout, OperatorKind.HERMITIAN)


def apply_unitary(state: State, unitary: Operator) -> State:
    """
    Apply ``U`` to a state: ``Ψ → UΨ`` or ``ρ → UρU†``.

    Raises:
        ArgumentError: If ``U`` is not tagged unitary.
        LayoutError: If layouts differ.
    """
    if unitary.kind is not OperatorKind.UNITARY:
        raise ArgumentError(f"Expected a unitary operator, got {unitary.kind.value}")
    _require_layout(state.layout, unitary.layout)
    matrix = unitary.entries
    if isinstance(state, StateVector):
        return StateVector(matrix @ state.amplitudes, state.layout)
    return DensityMatrix(matrix @ state.entries @ matrix.conj().T, state.layout)


def evolve(state: State, hamiltonian: Operator, dt: float) -> State:
    """Propagate ``state`` under ``H`` for ``dt`` (Schrödinger–Liouville)."""
    return apply_unitary(state, propagator(hamiltonian, dt))


def expectation(state: State, observable: Operator) -> float:
    """
    Return ``Tr(ρA)`` (or ``<ψ|A|ψ>``) for a Hermitian ``A``.

    Raises:
        ArgumentError: If ``A`` is not Hermitian.
        NumericalConsistencyError: If the imaginary residue exceeds ``EPS_NORM``.
    """
    if not observable.is_hermitian():
        raise ArgumentError("Expectation values need a Hermitian observable")
    _require_layout(state.layout, observable.layout)
    if isinstance(state, StateVector):
        psi = state.amplitudes
        value = complex(np.vdot(psi, observable.entries @ psi))
    else:
        value = complex(np.einsum("ij,ji->", state.entries, observable.entries))
    if abs(value.imag) > EPS_NORM:
        raise NumericalConsistencyError(
            f"Expectation value has imaginary part {value.imag!r}"
        )
    return value.real


def basis_projector(layout: SubsystemLayout, label: str, index: int) -> Operator:
    """
    Return ``|index><index|`` on factor ``label``, identity elsewhere.

    Raises:
        ArgumentError: If ``index`` is out of range for the factor.
    """
    dim = layout.dimension(label)
    if isinstance(index, bool) or not 0 <= index < dim:
        raise ArgumentError(f"Index {index!r} out of range for {label!r} ({dim})")
    mask = (layout.digits(label) == index).astype(np.complex128)
    return Operator(np.diag(mask), layout, OperatorKind.PROJECTOR)


def mix(weights: Sequence[float], states: Sequence[State]) -> DensityMatrix:
    """
    Return the convex combination ``Σ w_k ρ_k``.

    Raises:
        ArgumentError: If a weight is negative, the weights do not sum to 1,
            the sequences differ in length, or no state is given.
        LayoutError: If the states do not share a layout.
    """
    if len(weights) != len(states) or not states:
        raise ArgumentError("mix needs as many weights as states, and at least one")
    probabilities = np.asarray(weights, dtype=np.float64)
    if np.any(probabilities < 0):
        raise ArgumentError(f"Negative mixing weight in {list(weights)}")
    if abs(float(probabilities.sum()) - 1.0) >= EPS_NORM:
        raise ArgumentError(f"Mixing weights sum to {probabilities.sum()!r}, not 1")

    layout = states[0].layout
    total = np.zeros((layout.total_dimension,) * 2, dtype=np.complex128)
    for weight, state in zip(probabilities, states):
        _require_layout(layout, state.layout)
        if isinstance(state, StateVector):
            state = state.to_density_matrix()
        total += weight * state.entries
    return DensityMatrix(total, layout)


def embed(local: Operator, layout: SubsystemLayout) -> Operator:
    """
    Extend an operator on some factors to ``layout`` with identities elsewhere.

    The factors of ``local.layout`` must appear in ``layout`` with the same
    dimensions; their relative order may differ.
    """
    labels = list(local.layout.labels)
    for label, dim in local.layout:
        if layout.dimension(label) != dim:
            raise LayoutError(f"Dimension of {label!r} differs between layouts")
    if len(labels) == len(layout) and local.layout == layout:
        return local

    rest = [label for label in layout.labels if label not in labels]
    rest_dim = math.prod(layout.dimension(label) for label in rest)
    full = np.kron(local.entries, np.eye(rest_dim))

    order = labels + rest
    count = len(order)
    tensor = full.reshape([layout.dimension(label) for label in order] * 2)
    perm = [order.index(label) for label in layout.labels]
    tensor = tensor.transpose(perm + [count + p for p in perm])
    dim = layout.total_dimension
    return Operator(tensor.reshape(dim, dim), layout, local.kind)


def purity(state: State) -> float:
    """Return ``Tr(ρ²)``; 1 for any state vector."""
    if isinstance(state, StateVector):
        return state.norm() ** 4
    return state.purity()


def trace_distance(a: State, b: State) -> float:
    """Return ``½ Σ |λ_k(ρ_a − ρ_b)|``."""
    rho_a = a.to_density_matrix() if isinstance(a, StateVector) else a
    rho_b = b.to_density_matrix() if isinstance(b, StateVector) else b
    _require_layout(rho_a.layout, rho_b.layout)
    eigenvalues = scipy.linalg.eigvalsh(rho_a.entries - rho_b.entries)
    return float(0.5 * np.sum(np.abs(eigenvalues)))


def fidelity(a: State, b: State) -> float:
    """
    Return the state fidelity.

    ``|<a|b>|²`` for two vectors, ``<ψ|ρ|ψ>`` when one side is pure, and the
    Uhlmann fidelity ``(Tr √(√ρ σ √ρ))²`` for two density matrices.
    """
    _require_layout(a.layout, b.layout)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return abs(a.inner(b)) ** 2
    if isinstance(a, StateVector) and isinstance(b, DensityMatrix):
        return float(np.real(np.vdot(a.amplitudes, b.entries @ a.amplitudes)))
    if isinstance(a, DensityMatrix) and isinstance(b, StateVector):
        return float(np.real(np.vdot(b.amplitudes, a.entries @ b.amplitudes)))
    if not isinstance(a, DensityMatrix) or not isinstance(b, DensityMatrix):
        raise ArgumentError("fidelity expects state vectors or density matrices")
    root = scipy.linalg.sqrtm(a.entries)
    inner = scipy.linalg.sqrtm(root @ b.entries @ root)
    return float(np.real(np.trace(inner)) ** 2)
