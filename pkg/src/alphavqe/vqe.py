"""Variational ground-state search over weighted Pauli sums.

Hamiltonians are plain text, one term per line:

    # comments and blank lines are ignored
    0.5 ZI
    -0.25 XX

Energy estimation splits a total precision budget uniformly over terms
(epsilon_i = epsilon_total / sum_j |a_j|, so sum_i |a_i| epsilon_i =
epsilon_total) and supports three modes: exact statevector expectations,
statistical sampling at ceil(1/epsilon_i^2) shots per term, and the gated
two-stage estimator.  The outer loop is a derivative-free Nelder-Mead simplex
that re-evaluates the incumbent on every shrink, which keeps a lucky noisy
estimate from freezing the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .expectation import TwoStageConfig, statistical_estimate, two_stage_estimate
from .statevector import MAX_QUBITS, Ansatz, pauli_expectation, prepare, validate_pauli

__all__ = [
    "Hamiltonian",
    "HamiltonianParseError",
    "parse_hamiltonian",
    "load_hamiltonian",
    "bundled_hamiltonian",
    "dense_matrix",
    "exact_ground_energy",
    "estimate_energy",
    "OptimizerConfig",
    "VQEResult",
    "optimize",
]

_PAULI_DENSE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class HamiltonianParseError(ValueError):
    """Malformed Hamiltonian text; the message names the offending line."""


@dataclass(frozen=True)
class Hamiltonian:
    """Weighted Pauli sum sum_i a_i P_i with nonzero finite coefficients."""

    terms: tuple[tuple[float, str], ...]
    n_qubits: int

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("Hamiltonian needs at least one term")
        for coeff, pauli in self.terms:
            validate_pauli(pauli)
            if len(pauli) != self.n_qubits:
                raise ValueError(f"term {pauli!r} does not act on {self.n_qubits} qubits")
            if not (np.isfinite(coeff) and coeff != 0.0):
                raise ValueError(f"coefficient for {pauli!r} must be finite and nonzero, got {coeff}")

    @property
    def coeff_norm(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Parse '<coefficient> <pauli letters>' lines; '#' starts a comment."""
    terms: list[tuple[float, str]] = []
    n_qubits: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HamiltonianParseError(
                f"line {lineno}: expected '<coefficient> <paulis>', got {raw.strip()!r}"
            )
        try:
            coeff = float(parts[0])
        except ValueError:
            raise HamiltonianParseError(f"line {lineno}: bad coefficient {parts[0]!r}") from None
        pauli = parts[1]
        try:
            validate_pauli(pauli)
        except ValueError as exc:
            raise HamiltonianParseError(f"line {lineno}: {exc}") from None
        if not (np.isfinite(coeff) and coeff != 0.0):
            raise HamiltonianParseError(f"line {lineno}: coefficient must be finite and nonzero")
        if n_qubits is None:
            n_qubits = len(pauli)
        elif len(pauli) != n_qubits:
            raise HamiltonianParseError(
                f"line {lineno}: term has {len(pauli)} qubits, earlier terms have {n_qubits}"
            )
        terms.append((coeff, pauli))
    if not terms:
        raise HamiltonianParseError("no terms found")
    return Hamiltonian(tuple(terms), n_qubits)


def load_hamiltonian(path) -> Hamiltonian:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise HamiltonianParseError(f"cannot read {path}: {exc}") from None
    try:
        return parse_hamiltonian(text)
    except HamiltonianParseError as exc:
        raise HamiltonianParseError(f"{path}: {exc}") from None


def bundled_hamiltonian(name: str) -> Hamiltonian:
    """Load one of the packaged toys ('toy1q' or 'toy2q')."""
    from importlib.resources import files

    resource = files("alphavqe").joinpath("data", f"{name}.txt")
    if not resource.is_file():
        raise HamiltonianParseError(f"no bundled Hamiltonian named {name!r}")
    return parse_hamiltonian(resource.read_text(encoding="utf-8"))


def dense_matrix(h: Hamiltonian) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the Pauli sum (qubit 0 first in the Kronecker order)."""
    if h.n_qubits > MAX_QUBITS:
        raise ValueError(f"dense form limited to {MAX_QUBITS} qubits")
    dim = 2**h.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, pauli in h.terms:
        term = np.eye(1, dtype=complex)
        for letter in pauli:
            term = np.kron(term, _PAULI_DENSE[letter])
        out += coeff * term
    return out


def exact_ground_energy(h: Hamiltonian) -> float:
    """Smallest eigenvalue by dense diagonalization."""
    return float(np.linalg.eigvalsh(dense_matrix(h)).min())


def estimate_energy(
    h: Hamiltonian,
    ansatz: Ansatz,
    mode: str,
    epsilon_total: float | None = None,
    rng: np.random.Generator | None = None,
    two_stage: TwoStageConfig | None = None,
) -> tuple[float, int]:
    """Energy of the trial state and the number of measurements spent.

    mode 'exact' evaluates expectations analytically (0 measurements);
    'statistical' and 'alpha' estimate each term to epsilon_i =
    epsilon_total / sum_j |a_j|, the latter through the gated two-stage
    estimator configured by `two_stage`.  Terms consume independent
    substreams spawned from rng, so their order cannot leak randomness.
    """
    if h.n_qubits != ansatz.n_qubits:
        raise ValueError(f"ansatz has {ansatz.n_qubits} qubits, Hamiltonian {h.n_qubits}")
    if mode == "exact":
        state = prepare(ansatz)
        energy = sum(coeff * pauli_expectation(state, pauli) for coeff, pauli in h.terms)
        return float(energy), 0
    if mode not in ("statistical", "alpha"):
        raise ValueError(f"mode must be exact, statistical, or alpha, got {mode!r}")
    if epsilon_total is None or not epsilon_total > 0.0:
        raise ValueError(f"{mode} mode needs a positive epsilon_total, got {epsilon_total}")
    if rng is None:
        raise ValueError(f"{mode} mode needs a random generator")
    eps_term = epsilon_total / h.coeff_norm
    streams = rng.spawn(len(h.terms))
    energy = 0.0
    measurements = 0
    if mode == "statistical":
        shots = math.ceil(1.0 / eps_term**2)
        for (coeff, pauli), stream in zip(h.terms, streams):
            mean, _ = statistical_estimate(ansatz, pauli, shots, stream)
            energy += coeff * mean
            measurements += shots
        return float(energy), measurements
    if two_stage is None:
        two_stage = TwoStageConfig(alpha=0.5, d_max=32.0, target_epsilon=eps_term)
    for (coeff, pauli), stream in zip(h.terms, streams):
        result = two_stage_estimate(ansatz, pauli, replace(two_stage, target_epsilon=eps_term), stream)
        energy += coeff * result.value
        measurements += result.measurements_used
    return float(energy), measurements


@dataclass(frozen=True)
class OptimizerConfig:
    """Nelder-Mead controls: initial simplex spread per coordinate, iteration
    cap, and the simplex-diameter convergence tolerance."""

    max_iters: int = 200
    init_spread: float = 0.5
    tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be non-negative, got {self.max_iters}")
        if not self.init_spread > 0.0:
            raise ValueError(f"init_spread must be positive, got {self.init_spread}")
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")


@dataclass
class VQEResult:
    best_lambda: np.ndarray
    best_energy: float
    energy_history: list[tuple[int, np.ndarray, float, int]]
    converged: bool
    total_measurements: int


def optimize(
    h: Hamiltonian,
    ansatz_template: Ansatz,
    opt: OptimizerConfig | None = None,
    mode: str = "exact",
    epsilon_total: float | None = None,
    two_stage: TwoStageConfig | None = None,
    seed: int = 0,
) -> VQEResult:
    """Minimize the estimated energy over ansatz parameters.

    The history records every objective evaluation as (iteration, lambda,
    energy, cumulative measurements); best_energy/best_lambda are the minimum
    over that history.  max_iters = 0 just evaluates the template parameters.
    """
    opt = OptimizerConfig() if opt is None else opt
    rng = np.random.default_rng(seed)
    history: list[tuple[int, np.ndarray, float, int]] = []
    totals = {"measurements": 0, "iteration": 0}

    def objective(x: np.ndarray) -> float:
        ansatz = replace(ansatz_template, params=np.asarray(x, dtype=float))
        energy, used = estimate_energy(h, ansatz, mode, epsilon_total, rng, two_stage)
        totals["measurements"] += used
        history.append((totals["iteration"], np.array(x, dtype=float), energy, totals["measurements"]))
        return energy

    x0 = np.asarray(ansatz_template.params, dtype=float)
    f0 = objective(x0)
    converged = False
    if opt.max_iters > 0:
        converged = _nelder_mead(objective, x0, f0, opt, totals)
    best_iter = min(range(len(history)), key=lambda i: history[i][2])
    return VQEResult(
        best_lambda=history[best_iter][1],
        best_energy=history[best_iter][2],
        energy_history=history,
        converged=converged,
        total_measurements=totals["measurements"],
    )


def _nelder_mead(objective, x0: np.ndarray, f0: float, opt: OptimizerConfig, totals) -> bool:
    """Simplex descent with incumbent re-evaluation on shrink; returns converged."""
    dim = x0.size
    points = [x0.copy()]
    values = [f0]
    for j in range(dim):
        xj = x0.copy()
        xj[j] += opt.init_spread
        points.append(xj)
        values.append(objective(xj))
    for iteration in range(1, opt.max_iters + 1):
        totals["iteration"] = iteration
        order = np.argsort(values, kind="stable")
        points = [points[i] for i in order]
        values = [values[i] for i in order]
        if max(np.max(np.abs(p - points[0])) for p in points[1:]) < opt.tol:
            return True
        centroid = np.mean(points[:-1], axis=0)
        reflected = centroid + (centroid - points[-1])
        f_reflected = objective(reflected)
        if f_reflected < values[0]:
            expanded = centroid + 2.0 * (centroid - points[-1])
            f_expanded = objective(expanded)
            if f_expanded < f_reflected:
                points[-1], values[-1] = expanded, f_expanded
            else:
                points[-1], values[-1] = reflected, f_reflected
            continue
        if f_reflected < values[-2]:
            points[-1], values[-1] = reflected, f_reflected
            continue
        if f_reflected < values[-1]:
            contracted = centroid + 0.5 * (reflected - centroid)
        else:
            contracted = centroid + 0.5 * (points[-1] - centroid)
        f_contracted = objective(contracted)
        if f_contracted < min(f_reflected, values[-1]):
            points[-1], values[-1] = contracted, f_contracted
            continue
        # shrink toward the incumbent; re-measure it so a lucky noisy
        # estimate cannot pin the simplex in place
        values[0] = objective(points[0])
        for i in range(1, dim + 1):
            points[i] = points[0] + 0.5 * (points[i] - points[0])
            values[i] = objective(points[i])
    return False
