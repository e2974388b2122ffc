"""Exact bosonic Fock-state rotations and emission statistics.

N1 + N2 bosons split between two wells rotate into the (dark, bright)
mode pair; every bright quantum eventually leaves while dark quanta stay
forever, so the reservoir count distribution is read directly off the
rotated expansion.  Everything here is exact integer/rational
combinatorics: amplitudes are kept as rational multiples of square roots
of rationals and only converted to floating point at the very end, so
oracle comparisons can demand exact equality instead of tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import NoBoundStateError

__all__ = [
    "SurdAmplitude",
    "BosonFockState",
    "FockDistribution",
    "rotate_fock",
    "emission_distribution",
    "equal_fill_even_distribution",
    "one_well_distribution",
    "retained_state_split",
    "gaussian_approximation",
    "flat_approximation",
    "state_overlap",
    "distribution_rows",
    "distribution_to_json_dict",
    "write_distribution_csv",
]


@dataclass(frozen=True, eq=False)
class SurdAmplitude:
    """Exact real amplitude ``coef * sqrt(radicand)``.

    ``coef`` is a rational of either sign, ``radicand`` a non-negative
    rational.  Different factorizations of the same value compare equal;
    zero is canonical as (0, 0).
    """

    coef: Fraction
    radicand: Fraction

    def __post_init__(self) -> None:
        coef = Fraction(self.coef)
        radicand = Fraction(self.radicand)
        if radicand < 0:
            raise ValueError("radicand must be non-negative")
        if coef == 0 or radicand == 0:
            coef = Fraction(0)
            radicand = Fraction(0)
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "radicand", radicand)

    @property
    def sign(self) -> int:
        return (self.coef > 0) - (self.coef < 0)

    def square(self) -> Fraction:
        return self.coef * self.coef * self.radicand

    def __float__(self) -> float:
        return float(self.coef) * math.sqrt(float(self.radicand))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SurdAmplitude):
            return NotImplemented
        return self.sign == other.sign and self.square() == other.square()

    def __hash__(self) -> int:
        return hash((self.sign, self.square()))

    def __repr__(self) -> str:
        return f"SurdAmplitude({self.coef!s}, sqrt({self.radicand!s}))"


ZERO_AMPLITUDE = SurdAmplitude(Fraction(0), Fraction(0))


@dataclass(frozen=True)
class BosonFockState:
    """Exact two-mode Fock expansion with a fixed total particle number.

    ``amplitudes`` maps occupation pairs to SurdAmplitude values; the
    ``basis`` tag says whether the pair means (n_dark, n_bright) or
    (n_well1, n_well2).
    """

    total: int
    basis: str
    amplitudes: dict

    def __post_init__(self) -> None:
        if self.basis not in ("dark_bright", "wells"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.total < 1:
            raise ValueError("need at least one particle")
        norm = Fraction(0)
        for key, amp in self.amplitudes.items():
            n1, n2 = key
            if n1 < 0 or n2 < 0 or n1 + n2 != self.total:
                raise ValueError(f"occupation {key} inconsistent with N={self.total}")
            norm += amp.square()
        if norm != 1:
            raise ValueError(f"state norm^2 = {norm} != 1")

    def amplitude(self, n1: int, n2: int) -> SurdAmplitude:
        return self.amplitudes.get((n1, n2), ZERO_AMPLITUDE)

    def float_amplitudes(self) -> dict:
        return {key: float(a) for key, a in self.amplitudes.items() if a.sign != 0}


@dataclass(frozen=True)
class FockDistribution:
    """Probabilities indexed by an integer count, exact where possible."""

    probabilities: dict

    def __post_init__(self) -> None:
        total = Fraction(0)
        for m, p in self.probabilities.items():
            if m < 0 or int(m) != m:
                raise ValueError(f"count {m} must be a non-negative integer")
            if p < 0:
                raise ValueError(f"negative probability at m={m}")
            total += p
        if abs(total - 1) > Fraction(1, 10**12):
            raise ValueError(f"probabilities sum to {total}, not 1")

    def probability(self, m: int) -> Fraction:
        return self.probabilities.get(m, Fraction(0))

    @property
    def max_count(self) -> int:
        return max(self.probabilities)

    def as_floats(self) -> dict:
        return {m: float(p) for m, p in sorted(self.probabilities.items())}


def rotate_fock(N1: int, N2: int, y, eta: int = 1) -> BosonFockState:
    """Exact (dark, bright) expansion of the two-well Fock state |N1, N2>.

    Expands (cos(a) c1^dag + sin(a) c2^dag)^N1 (-sin(a) c1^dag +
    cos(a) c2^dag)^N2 |0> / sqrt(N1! N2!) with cos(a) = eta sqrt(y/(1+y)),
    c1 the dark and c2 the bright mode.  The amplitude on (n1, N-n1) is

        sqrt(n1! n2! / (N1! N2!)) * eta^(N2-n1) * y^((N2-n1)/2)
        * (1+y)^(-N/2) * sum_k C(N1,k) C(N2,n1-k) (-1)^(n1-k) y^k,

    carried exactly: y is taken as the rational value of the argument, and
    half-integer powers live in the surd part of the amplitude.
    """
    if N1 < 0 or N2 < 0 or N1 + N2 < 1:
        raise ValueError("need N1, N2 >= 0 with at least one particle")
    if eta not in (1, -1):
        raise ValueError(f"eta must be +1 or -1, got {eta!r}")
    yq = Fraction(y)
    if yq <= 0:
        raise ValueError("width ratio y must be positive")
    N = N1 + N2
    e2 = N % 2
    base = Fraction(1, math.factorial(N1) * math.factorial(N2))
    amps = {}
    for n1 in range(N + 1):
        n2 = N - n1
        total = Fraction(0)
        for k in range(max(0, n1 - N2), min(N1, n1) + 1):
            term = Fraction(math.comb(N1, k) * math.comb(N2, n1 - k))
            if (n1 - k) % 2:
                term = -term
            total += term * yq**k
        diff = N2 - n1
        e1 = diff % 2
        coef = total * yq ** ((diff - e1) // 2) / (1 + yq) ** ((N - e2) // 2)
        if e1 and eta < 0:
            coef = -coef
        radicand = (
            Fraction(math.factorial(n1) * math.factorial(n2))
            * base
            * yq**e1
            / (1 + yq) ** e2
        )
        amps[(n1, n2)] = SurdAmplitude(coef, radicand)
    return BosonFockState(total=N, basis="dark_bright", amplitudes=amps)


def emission_distribution(state: BosonFockState, epsilon: float = 0.0) -> FockDistribution:
    """Reservoir-count distribution: every bright quantum is emitted.

    Requires aligned wells (``epsilon = 0``); misaligned wells have no
    dark mode, everything decays, and no stationary count distribution
    over retained particles exists.
    """
    if epsilon != 0.0:
        raise NoBoundStateError(
            "levels are misaligned (eps != 0): no bosons are retained"
        )
    if state.basis != "dark_bright":
        raise ValueError("emission counting needs a (dark, bright) expansion")
    probs = {m: Fraction(0) for m in range(state.total + 1)}
    for (n_dark, n_bright), amp in state.amplitudes.items():
        probs[n_bright] += amp.square()
    return FockDistribution(probabilities=probs)


def equal_fill_even_distribution(N: int) -> FockDistribution:
    """Emitted-count law for |N, N> at y = 1: only even counts occur.

    P(2m) = C(2(N-m), N-m) C(2m, m) / 4^N, odd counts exactly zero.
    """
    if N < 1:
        raise ValueError("need N >= 1 bosons per well")
    probs = {m: Fraction(0) for m in range(2 * N + 1)}
    denom = 4**N
    for m in range(N + 1):
        probs[2 * m] = Fraction(math.comb(2 * (N - m), N - m) * math.comb(2 * m, m), denom)
    return FockDistribution(probabilities=probs)


def one_well_distribution(N: int, y) -> FockDistribution:
    """Emitted-count law for |N, 0>: binomial with escape odds 1 : y.

    P(m) = C(N, m) y^(N-m) / (1+y)^N; each boson independently lands in
    the bright mode with probability 1/(1+y).
    """
    if N < 1:
        raise ValueError("need N >= 1 bosons")
    yq = Fraction(y)
    if yq <= 0:
        raise ValueError("width ratio y must be positive")
    denom = (1 + yq) ** N
    probs = {
        m: Fraction(math.comb(N, m)) * yq ** (N - m) / denom for m in range(N + 1)
    }
    return FockDistribution(probabilities=probs)


def retained_state_split(n_retained: int, y) -> FockDistribution:
    """Where the surviving dark quanta sit: binomial split over the wells.

    The retained state c_dark^dag^Ntilde |0> / sqrt(Ntilde!) expands over
    well occupations with P(k in well 1) = C(Ntilde, k) y^k / (1+y)^Ntilde.
    """
    if n_retained < 0:
        raise ValueError("retained count must be non-negative")
    if n_retained == 0:
        return FockDistribution(probabilities={0: Fraction(1)})
    yq = Fraction(y)
    if yq <= 0:
        raise ValueError("width ratio y must be positive")
    denom = (1 + yq) ** n_retained
    probs = {
        k: Fraction(math.comb(n_retained, k)) * yq**k / denom
        for k in range(n_retained + 1)
    }
    return FockDistribution(probabilities=probs)


def gaussian_approximation(N: int, y, m: int) -> tuple[float, float]:
    """Stirling/Gaussian estimate of the one-well binomial law P(m).

    Approximates P(m) ~ 2^(N+1/2) y^(N-m) / ((1+y)^N sqrt(pi N))
    * exp(-(N-2m)^2 / (2N)), evaluated in log space, and returns
    (approximation, relative error versus the exact distribution).
    Useful for N >= 20; the exact operation is always the reference.
    """
    if not 0 <= m <= N:
        raise ValueError("need 0 <= m <= N")
    yf = float(y)
    if yf <= 0.0:
        raise ValueError("width ratio y must be positive")
    log_approx = (
        (N + 0.5) * math.log(2.0)
        + (N - m) * math.log(yf)
        - N * math.log1p(yf)
        - 0.5 * math.log(math.pi * N)
        - (N - 2 * m) ** 2 / (2.0 * N)
    )
    approx = math.exp(log_approx)
    exact = float(one_well_distribution(N, y).probability(m))
    return approx, abs(approx - exact) / exact


def flat_approximation(N: int, m: int) -> tuple[float, float]:
    """Flat estimate of the equal-fill law: P(2m) ~ 1 / (pi sqrt((N-m) m)).

    Valid away from the edges (0 < m < N); returns (approximation,
    relative error versus the exact equal-fill distribution).
    """
    if not 0 < m < N:
        raise ValueError("flat form needs an interior count 0 < m < N")
    approx = 1.0 / (math.pi * math.sqrt((N - m) * m))
    exact = float(equal_fill_even_distribution(N).probability(2 * m))
    return approx, abs(approx - exact) / exact


def state_overlap(a: BosonFockState, b: BosonFockState) -> float:
    """Inner product <a|b> of two expansions in the same basis."""
    if a.basis != b.basis or a.total != b.total:
        raise ValueError("states live in different spaces")
    keys = set(a.amplitudes) | set(b.amplitudes)
    return math.fsum(
        float(a.amplitude(*key)) * float(b.amplitude(*key)) for key in sorted(keys)
    )


def distribution_rows(dist: FockDistribution) -> list:
    """(count, probability) float rows sorted by count."""
    return [(m, float(p)) for m, p in sorted(dist.probabilities.items())]


def distribution_to_json_dict(dist: FockDistribution) -> dict:
    rows = distribution_rows(dist)
    return {
        "counts": [m for m, _ in rows],
        "probabilities": [p for _, p in rows],
    }


def write_distribution_csv(path, dist: FockDistribution, header_lines=()) -> None:
    """Two-column CSV (m, P_m) with 17-significant-digit probabilities."""
    with open(path, "w", newline="\n") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("m,probability\n")
        for m, p in distribution_rows(dist):
            fh.write(f"{m},{p:.17g}\n")
