"""Few-electron asymptotics in separated and parallel-level wells.

Two electrons filling both wells put exactly one particle in the dark
mode, so exactly one is emitted and the survivor is dark.  With a second
(parallel) level per well and an on-site interaction ``U``, each well
splits into a spectator mode that never decays and a coupled mode whose
decay problem maps back to the single-particle machinery with shifted
levels and enhanced widths; resonance between the shifted levels then
decides whether a long-lived two-electron superposition survives.

All multi-electron states are expanded programmatically from mode vectors
by a small creation-operator engine with a fixed mode order
(well1, well1', well2, well2', reservoir...), creation operators applied
right to left; no hand-transcribed sign conventions anywhere.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from .model import NoBoundStateError, ParallelWellPair, WellPair, derive

__all__ = [
    "FermionAsymptoticState",
    "EffectiveSingleParticle",
    "apply_creation",
    "creation_product",
    "dark_vector",
    "two_electron_asymptotic",
    "parallel_map",
    "two_electron_parallel_asymptotic",
    "three_electron_asymptotic",
    "is_product_state",
    "branch_rdm",
    "branches_to_json",
]


def apply_creation(state: dict, vector) -> dict:
    """Apply ``sum_m vector[m] a_m^dagger`` to an expansion over index tuples.

    ``state`` maps strictly increasing mode-index tuples to amplitudes.
    Signs follow from commuting the new operator into sorted position:
    ``a_m^dagger`` picks up one minus sign per occupied mode below ``m``.
    """
    out: dict = {}
    for occ, amp in state.items():
        for m, v in enumerate(vector):
            if v == 0 or m in occ:
                continue
            ins = bisect_left(occ, m)
            new = occ[:ins] + (m,) + occ[ins:]
            sign = -1.0 if ins % 2 else 1.0
            out[new] = out.get(new, 0.0) + sign * v * amp
    return {occ: amp for occ, amp in out.items() if amp != 0.0}


def creation_product(vectors, n_modes: int) -> dict:
    """Normalized expansion of ``v1^dag v2^dag ... vN^dag |0>``.

    ``vectors`` are single-particle amplitude vectors of length
    ``n_modes`` (need not be orthogonal; the result is normalized, and a
    null wedge product raises).  Returns a map from occupation vectors
    (tuples of 0/1 of length ``n_modes``) to amplitudes.
    """
    state: dict = {(): 1.0}
    for vec in reversed(list(vectors)):
        if len(vec) != n_modes:
            raise ValueError("vector length does not match n_modes")
        state = apply_creation(state, vec)
    norm = math.sqrt(sum(abs(a) ** 2 for a in state.values()))
    if norm == 0.0:
        raise ValueError("vectors are linearly dependent: wedge product vanishes")
    out = {}
    for occ, amp in state.items():
        occupation = tuple(1 if m in occ else 0 for m in range(n_modes))
        out[occupation] = amp / norm
    return out


@dataclass(frozen=True)
class FermionAsymptoticState:
    """One asymptotic branch: ``reservoir_count`` emitted, rest retained.

    ``amplitudes`` maps dot-mode occupation vectors (0/1 tuples) to the
    normalized amplitudes of the retained state.
    """

    reservoir_count: int
    probability: float
    amplitudes: dict

    def __post_init__(self) -> None:
        if not -1e-12 <= self.probability <= 1.0 + 1e-12:
            raise ValueError(f"branch probability {self.probability} out of range")
        if not self.amplitudes:
            raise ValueError("empty amplitude table")
        counts = set()
        norm = 0.0
        for occ, amp in self.amplitudes.items():
            if any(n not in (0, 1) for n in occ):
                raise ValueError(f"occupation {occ} is not fermionic")
            counts.add(sum(occ))
            norm += abs(amp) ** 2
        if len(counts) != 1:
            raise ValueError("mixed particle numbers in one branch")
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"branch state norm {norm} != 1")

    @property
    def n_retained(self) -> int:
        return sum(next(iter(self.amplitudes)))


def dark_vector(y: float, eta: int = 1, n_modes: int = 2, offset: int = 0) -> np.ndarray:
    """Dark-mode vector ``(eta sqrt(y), -1)/sqrt(1+y)`` padded into n_modes."""
    if y < 0.0:
        raise ValueError("width ratio y must be non-negative")
    if eta not in (1, -1):
        raise ValueError(f"eta must be +1 or -1, got {eta!r}")
    vec = np.zeros(n_modes)
    scale = 1.0 / math.sqrt(1.0 + y)
    vec[offset] = eta * math.sqrt(y) * scale
    vec[offset + 1] = -scale
    return vec


def two_electron_asymptotic(
    y: float, eta: int = 1, epsilon: float = 0.0
) -> list[FermionAsymptoticState]:
    """Long-time fate of one electron per well, separated wells, aligned.

    The initial determinant ``a1^dag a2^dag|0>`` equals (dark)(bright);
    the bright electron always leaves, the dark one never does, so the
    only branch is one emitted electron with the dark state retained:
    its density matrix is ``(y, 1, -eta sqrt(y)) / (1+y)``.
    """
    if epsilon != 0.0:
        raise NoBoundStateError(
            "levels are misaligned (eps != 0): no electron is retained"
        )
    dark = dark_vector(y, eta)
    amplitudes = {(1, 0): complex(dark[0]), (0, 1): complex(dark[1])}
    return [
        FermionAsymptoticState(
            reservoir_count=1, probability=1.0, amplitudes=amplitudes
        )
    ]


@dataclass(frozen=True)
class EffectiveSingleParticle:
    """Coupled-sector single-particle problem with frozen dark spectators.

    ``pair`` describes one mobile electron in the per-well coupled modes;
    ``dark_occupancy`` records which local dark modes hold a spectator
    electron (they shift the coupled level by ``U`` each, nothing else).
    """

    pair: WellPair
    dark_occupancy: tuple[int, int]


def parallel_map(
    model: ParallelWellPair, occupancy: tuple[int, int]
) -> EffectiveSingleParticle:
    """Reduce the parallel-level model to an effective two-well problem.

    With a spectator electron frozen in the local dark mode of well ``j``
    (``occupancy[j] = 1``), the mobile electron in the coupled mode sees
    ``E_j + U * occupancy[j]`` and coupling enhanced by
    ``sqrt(1 + yprime^2)``, i.e. widths scaled by ``(1 + yprime^2)``.
    """
    n1, n2 = occupancy
    if n1 not in (0, 1) or n2 not in (0, 1):
        raise ValueError(f"dark-mode occupancies must be 0 or 1, got {occupancy}")
    base = model.base
    scale = math.sqrt(1.0 + model.yprime**2)
    pair = WellPair(
        E1=base.E1 + model.U * n1,
        E2=base.E2 + model.U * n2,
        omega1=scale * base.omega1,
        omega2=scale * base.omega2,
        rho=base.rho,
        lambda_cutoff=base.lambda_cutoff,
    )
    return EffectiveSingleParticle(pair=pair, dark_occupancy=(n1, n2))


def _d_vectors(model: ParallelWellPair) -> dict:
    """Local dark/coupled creation vectors over (w1, w1', w2, w2')."""
    yp = model.yprime
    scale = 1.0 / math.sqrt(1.0 + yp * yp)
    return {
        "d1": np.array([yp, -1.0, 0.0, 0.0]) * scale,
        "d1c": np.array([1.0, yp, 0.0, 0.0]) * scale,
        "d2": np.array([0.0, 0.0, yp, -1.0]) * scale,
        "d2c": np.array([0.0, 0.0, 1.0, yp]) * scale,
    }


def _resonant(model: ParallelWellPair) -> bool:
    base = model.base
    gap = abs(base.E2 - base.E1 - model.U)
    scale = max(1.0, abs(base.E1), abs(base.E2), abs(model.U))
    return gap <= 1e-9 * scale


def two_electron_parallel_asymptotic(
    model: ParallelWellPair,
) -> list[FermionAsymptoticState]:
    """Fate of two electrons filling the first well's two levels.

    The initial state ``a1^dag a1'^dag|0>`` equals ``d1^dag d1'^dag|0>``:
    a spectator in the local dark mode plus a mobile electron in the
    coupled mode at energy ``E1 + U``.  Off resonance the mobile electron
    simply leaves.  On resonance (``E2 = E1 + U``) it is a left-start
    aligned two-well problem with widths ``(1+yprime^2) gamma_j``, whose
    dark fraction ``y/(1+y) = gamma2/(gamma1+gamma2)`` stays trapped,
    giving a two-electron entangled branch with zero emitted.

    The resonance dichotomy is asymptotic and sharp; intermediate
    detunings of order the level widths are outside this operation's
    domain (they decay, but only on the dwell-time scale).
    """
    d = derive(model.base)
    if d.eta12 is None or d.y_infinite or d.y == 0.0:
        raise ValueError("both wells must couple to the reservoir")
    vecs = _d_vectors(model)
    branches = []
    if _resonant(model):
        y = d.y
        p_trapped = y / (1.0 + y)
        trapped_vec = (
            d.eta12 * math.sqrt(y) * vecs["d1c"] - vecs["d2c"]
        ) / math.sqrt(1.0 + y)
        retained_two = creation_product([vecs["d1"], trapped_vec], 4)
        branches.append(
            FermionAsymptoticState(
                reservoir_count=0,
                probability=p_trapped,
                amplitudes=retained_two,
            )
        )
        emitted_prob = 1.0 - p_trapped
    else:
        emitted_prob = 1.0
    spectator = creation_product([vecs["d1"]], 4)
    branches.append(
        FermionAsymptoticState(
            reservoir_count=1, probability=emitted_prob, amplitudes=spectator
        )
    )
    return branches


def three_electron_asymptotic(model: ParallelWellPair) -> FermionAsymptoticState:
    """Retained three-electron state when all four levels start filled.

    ``a1^dag a1'^dag a2^dag a2'^dag|0>`` holds two spectators (one local
    dark mode per well) plus two mobile electrons filling both coupled
    modes.  For aligned wells the mobile pair is (dark)(bright) of the
    effective problem: one electron leaves, and the retained state is

        d1^dag (cos(a) d1'^dag - sin(a) d2'^dag) d2^dag |0>,

    with ``cos(a) = eta sqrt(y/(1+y))``, expanded into physical modes and
    normalized.  Both coupled levels are shifted by the same ``U`` (one
    spectator each), so only the bare alignment ``E1 = E2`` matters.
    """
    base = model.base
    if base.epsilon != 0.0:
        raise NoBoundStateError(
            "bright-sector levels are misaligned (eps != 0): the mobile pair "
            "decays completely and no three-electron state survives"
        )
    d = derive(base)
    if d.eta12 is None or d.y_infinite or d.y == 0.0:
        raise ValueError("both wells must couple to the reservoir")
    vecs = _d_vectors(model)
    y = d.y
    mobile_dark = (
        d.eta12 * math.sqrt(y) * vecs["d1c"] - vecs["d2c"]
    ) / math.sqrt(1.0 + y)
    amplitudes = creation_product([vecs["d1"], mobile_dark, vecs["d2"]], 4)
    return FermionAsymptoticState(
        reservoir_count=1, probability=1.0, amplitudes=amplitudes
    )


def _coefficient_matrix(state) -> np.ndarray:
    """Antisymmetric coefficient matrix of a two-fermion state."""
    if isinstance(state, FermionAsymptoticState):
        state = state.amplitudes
    if isinstance(state, dict):
        first = next(iter(state))
        if not set(first) <= {0, 1}:
            raise ValueError("amplitude table must use 0/1 occupation vectors")
        n = len(first)
        mat = np.zeros((n, n), dtype=complex)
        for occ, amp in state.items():
            idx = [m for m, bit in enumerate(occ) if bit]
            if len(occ) != n or len(idx) != 2 or sum(occ) != 2:
                raise ValueError("need a two-particle state")
            i, j = idx
            mat[i, j] = amp
            mat[j, i] = -amp
        return mat
    mat = np.asarray(state, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("coefficient matrix must be square")
    scale = float(np.abs(mat).max())
    if scale == 0.0:
        raise ValueError("zero state")
    if float(np.abs(mat + mat.T).max()) > 1e-12 * scale:
        raise ValueError("coefficient matrix is not antisymmetric")
    return mat


def is_product_state(state, tol: float = 1e-9) -> tuple[bool, np.ndarray]:
    """Single-determinant test for a two-fermion state.

    Any antisymmetric coefficient matrix has doubly degenerate singular
    values; the distinct values (the pairing spectrum, descending) count
    how many determinants the state needs.  Exactly one nonzero pairing
    value means the state is a product ``u^dag v^dag|0>`` of two orbitals.
    Returns ``(is_product, pairing_spectrum)``; the number of spectrum
    entries above ``tol`` is the Slater-number proxy.
    """
    mat = _coefficient_matrix(state)
    svals = np.linalg.svd(mat, compute_uv=False)
    spectrum = svals[::2].copy()
    total = math.sqrt(float(np.sum(spectrum**2)))
    if total == 0.0:
        raise ValueError("zero state")
    rest = spectrum[1:] / total
    return bool(np.all(rest < tol)), spectrum


def branch_rdm(branch: FermionAsymptoticState) -> np.ndarray:
    """One-body density matrix ``rdm[p, q] = <a_q^dag a_p>`` of a branch."""
    first = next(iter(branch.amplitudes))
    n_modes = len(first)
    rdm = np.zeros((n_modes, n_modes), dtype=complex)
    index = {}
    for occ, amp in branch.amplitudes.items():
        key = tuple(m for m, bit in enumerate(occ) if bit)
        index[key] = amp
    for key, amp in index.items():
        for pos, q in enumerate(key):
            rdm[q, q] += abs(amp) ** 2
            rest = key[:pos] + key[pos + 1 :]
            for p in range(n_modes):
                if p == q or p in key:
                    continue
                ins = bisect_left(rest, p)
                target = rest[:ins] + (p,) + rest[ins:]
                if target not in index:
                    continue
                sign = -1.0 if (pos + ins) % 2 else 1.0
                rdm[q, p] += sign * np.conj(index[target]) * amp
    return rdm


def branches_to_json(branches) -> list[dict]:
    """JSON-ready branch list with deterministic term ordering."""
    out = []
    for br in sorted(branches, key=lambda b: b.reservoir_count):
        terms = []
        for occ in sorted(br.amplitudes):
            amp = complex(br.amplitudes[occ])
            terms.append(
                {"occupation": list(occ), "amplitude": [amp.real, amp.imag]}
            )
        out.append(
            {
                "reservoir_count": br.reservoir_count,
                "probability": br.probability,
                "terms": terms,
            }
        )
    return out
