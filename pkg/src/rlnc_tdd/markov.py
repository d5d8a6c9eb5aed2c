"""Absorbing Markov chain over the receivers' outstanding degrees of freedom.

States are tuples ``(s_1, ..., s_N)`` with ``0 <= s_j <= M``.  They are
indexed lexicographically in *descending* order, so ``(M, ..., M)`` is
state 0, ``(0, ..., 0)`` is the last state, and every transition matrix is
upper triangular (no receiver ever needs more dofs than before).
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .model import ChannelParams, SystemParams, round_duration

if TYPE_CHECKING:
    from .policy import Policy

SINGULAR_TOL = 1e-15
EIGEN_TOL = 1e-9


class NonAbsorbingChainError(ValueError):
    """Some transient state cannot leave itself (e.g. an erasure probability of 1)."""


# ------------------------------------------------------------------ states

def num_states(M: int, N: int) -> int:
    return (M + 1) ** N


def state_index(s: Sequence[int], M: int) -> int:
    idx = 0
    for v in s:
        if not 0 <= v <= M:
            raise ValueError(f"dof count {v} outside [0, {M}]")
        idx = idx * (M + 1) + (M - v)
    return idx


def index_state(idx: int, M: int, N: int) -> tuple[int, ...]:
    digits = []
    for _ in range(N):
        idx, r = divmod(idx, M + 1)
        digits.append(M - r)
    return tuple(reversed(digits))


def all_states(M: int, N: int) -> list[tuple[int, ...]]:
    """Every state in canonical order, ``(M,...,M)`` first."""
    return list(itertools.product(range(M, -1, -1), repeat=N))


# ------------------------------------------------------ transition probabilities

def _binom_pmf(n: int, k: int, q: float) -> float:
    """P(Binomial(n, q) = k)."""
    if k < 0 or k > n:
        return 0.0
    if n <= 60:
        return math.comb(n, k) * q ** k * (1.0 - q) ** (n - k)
    if q <= 0.0:
        return 1.0 if k == 0 else 0.0
    if q >= 1.0:
        return 1.0 if k == n else 0.0
    log_c = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    return math.exp(log_c + k * math.log(q) + (n - k) * math.log1p(-q))


def _partial_progress(s: int, s_prime: int, n_i: int, ch: ChannelParams,
                      strict_gate: bool) -> float:
    """ACK heard and exactly ``s - s_prime`` dofs delivered, for 0 < s' < s."""
    gate = n_i >= s if strict_gate else n_i >= s - s_prime
    if not gate:
        return 0.0
    return (1.0 - ch.pe_ack) * _binom_pmf(n_i, s - s_prime, 1.0 - ch.pe)


def _stay(n_i: int, ch: ChannelParams) -> float:
    return (1.0 - ch.pe_ack) * ch.pe ** n_i + ch.pe_ack


def receiver_transition(s: int, s_prime: int, n_i: int, ch: ChannelParams,
                        strict_gate: bool = True) -> float:
    """Probability one receiver moves from needing ``s`` dofs to ``s_prime``.

    A lost ACK leaves the state unchanged.  ``strict_gate`` selects the
    binomial gate ``n_i >= s``; with it off the gate is ``n_i >= s - s'``.
    """
    if s_prime > s:
        raise ValueError(f"dofs needed cannot grow ({s} -> {s_prime})")
    if s_prime < 0:
        raise ValueError("dofs needed cannot be negative")
    if n_i < 1:
        raise ValueError("burst length must be at least 1")
    if s == 0:
        return 1.0
    if s_prime == s:
        return _stay(n_i, ch)
    if s_prime > 0:
        return _partial_progress(s, s_prime, n_i, ch, strict_gate)
    rest = _stay(n_i, ch) + sum(_partial_progress(s, k, n_i, ch, strict_gate)
                                for k in range(1, s))
    return max(0.0, 1.0 - rest)


def receiver_table(M: int, n_i: int, ch: ChannelParams,
                   strict_gate: bool = True) -> np.ndarray:
    """(M+1)x(M+1) single-receiver matrix in canonical order (row 0 is s = M)."""
    A = np.zeros((M + 1, M + 1))
    for s in range(M + 1):
        for sp in range(s + 1):
            A[M - s, M - sp] = receiver_transition(s, sp, n_i, ch, strict_gate)
    return A


def joint_transition(s: Sequence[int], s_prime: Sequence[int], policy: "Policy",
                     p: SystemParams) -> float:
    """Product of per-receiver probabilities under the shared burst ``N_i``, i = max(s)."""
    if len(s) != p.N or len(s_prime) != p.N:
        raise ValueError("state length must equal N")
    if any(b > a for a, b in zip(s, s_prime)):
        raise ValueError("transition would increase some receiver's dofs")
    i = max(s)
    if i == 0:
        return 1.0
    n_i = policy.burst(i)
    prob = 1.0
    for a, b, ch in zip(s, s_prime, p.channels):
        prob *= receiver_transition(a, b, n_i, ch, p.strict_f_gate)
    return prob


# ------------------------------------------------------------------- matrix

@dataclass(frozen=True)
class TransitionMatrix:
    entries: np.ndarray
    M: int
    N: int

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    @property
    def state_order(self) -> list[tuple[int, ...]]:
        return all_states(self.M, self.N)

    def to_csv(self, path: str | Path) -> None:
        """Dump for desk checks: rows are from-states, columns to-states."""
        states = self.state_order
        labels = ["(" + ",".join(map(str, s)) + ")" for s in states]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["from\\to"] + labels)
            for lab, row in zip(labels, self.entries):
                w.writerow([lab] + [f"{x:.9g}" for x in row])


def _max_dofs(M: int, N: int) -> np.ndarray:
    return np.array([max(s) for s in all_states(M, N)], dtype=int)


def build_matrix(policy: "Policy", p: SystemParams) -> TransitionMatrix:
    M, N = p.M, p.N
    states = all_states(M, N)
    P = np.zeros((len(states), len(states)))
    P[-1, -1] = 1.0
    tables = {}
    for i in range(1, M + 1):
        n_i = policy.burst(i)
        tables[i] = [receiver_table(M, n_i, ch, p.strict_f_gate) for ch in p.channels]
    for idx, s in enumerate(states[:-1]):
        rows = tables[max(s)]
        row = rows[0][M - s[0]]
        for j in range(1, N):
            row = np.kron(row, rows[j][M - s[j]])
        P[idx] = row
    return TransitionMatrix(P, M, N)


# ---------------------------------------------------------- completion time

@dataclass(frozen=True)
class CompletionResult:
    mean_time: float
    per_state_times: np.ndarray
    policy_used: "Policy"

    def time_of(self, s: Sequence[int]) -> float:
        M = self.policy_used.M
        return float(self.per_state_times[state_index(s, M)])


def cost_vector(policy: "Policy", p: SystemParams) -> np.ndarray:
    """Round cost for each transient state (length (M+1)^N - 1)."""
    by_level = [0.0] + [round_duration(p, policy.burst(i)) for i in range(1, p.M + 1)]
    return np.array([by_level[i] for i in _max_dofs(p.M, p.N)[:-1]])


def _gamma_and_mu(policy: "Policy", p: SystemParams):
    P = build_matrix(policy, p).entries
    gamma = np.eye(P.shape[0] - 1) - P[:-1, :-1]
    d = np.diag(gamma)
    bad = np.flatnonzero(d <= SINGULAR_TOL)
    if bad.size:
        s = index_state(int(bad[0]), p.M, p.N)
        raise NonAbsorbingChainError(f"state {s} never leaves itself (1 - P_ss = {d[bad[0]]:.3g})")
    return gamma, cost_vector(policy, p)


def back_substitute(gamma: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Solve an upper-triangular system from the last row up."""
    n = len(mu)
    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (mu[k] - gamma[k, k + 1:] @ x[k + 1:]) / gamma[k, k]
    return x


def mean_completion_time(policy: "Policy", p: SystemParams) -> CompletionResult:
    """Expected time to absorption from every transient state."""
    gamma, mu = _gamma_and_mu(policy, p)
    T = back_substitute(gamma, mu)
    return CompletionResult(float(T[0]), T, policy)


def completion_time_dense(policy: "Policy", p: SystemParams) -> float:
    """Same quantity through a general LU solve; used as a cross-check."""
    gamma, mu = _gamma_and_mu(policy, p)
    return float(np.linalg.solve(gamma, mu)[0])


def completion_time_cramer(policy: "Policy", p: SystemParams) -> float:
    """T_(M,...,M) as det(Gamma with column 0 replaced by mu) / det(Gamma).

    det(Gamma) is the diagonal product.  Both determinants are carried in
    log form so orders around 100 do not underflow.
    """
    gamma, mu = _gamma_and_mu(policy, p)
    log_den = float(np.sum(np.log(np.diag(gamma))))
    num = gamma.copy()
    num[:, 0] = mu
    sign, log_num = np.linalg.slogdet(num)
    return float(sign * math.exp(log_num - log_den))


# ---------------------------------------------------------- stopping counts

def absorption_probability_after(policy: "Policy", p: SystemParams, rounds: int,
                                 matrix: np.ndarray | None = None) -> float:
    """P(all receivers done within ``rounds`` rounds) starting from (M,...,M)."""
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    P = build_matrix(policy, p).entries if matrix is None else matrix
    v = np.zeros(P.shape[0])
    v[0] = 1.0
    for _ in range(rounds):
        v = v @ P
    return float(v[-1])


def empirical_stops(policy: "Policy", p: SystemParams, epsilon: float,
                    cap: int = 10**6, matrix: np.ndarray | None = None) -> int:
    """Fewest rounds after which absorption has probability at least 1 - epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    P = build_matrix(policy, p).entries if matrix is None else matrix
    v = np.zeros(P.shape[0])
    v[0] = 1.0
    for k in range(1, cap + 1):
        v = v @ P
        if v[-1] >= 1.0 - epsilon:
            return k
    raise NonAbsorbingChainError(f"absorption probability below 1 - {epsilon} after {cap} rounds")


@dataclass(frozen=True)
class StoppingBound:
    lambda2_magnitude: float
    eigen_distinct: bool
    aleph_empirical: int
    epsilon: float
    G: float | None = None
    aleph_bound: float | None = None


def lagrange_projectors(P: np.ndarray, eigenvalues: np.ndarray) -> list[np.ndarray]:
    """F_i(P) = prod_{j != i} (P - l_j I) / prod_{j != i} (l_i - l_j) for distinct l."""
    n = P.shape[0]
    eye = np.eye(n)
    out = []
    for i, li in enumerate(eigenvalues):
        F = eye.copy()
        denom = 1.0
        for j, lj in enumerate(eigenvalues):
            if j == i:
                continue
            F = F @ (P - lj * eye)
            denom *= li - lj
        out.append(F / denom)
    return out


def lemma1_bound(policy: "Policy", p: SystemParams, epsilon: float) -> StoppingBound:
    """Second-eigenvalue bound on the rounds needed to finish w.p. 1 - epsilon.

    The eigenvalues are the diagonal of the triangular P.  The bound
    (ln G - ln eps) / (-ln |l2|) with G = [sum_{i>=2} |F_i(P)|]_{first,last}
    is only produced when every eigenvalue is distinct; otherwise the result
    carries the empirical count alone and ``eigen_distinct`` is False.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    P = build_matrix(policy, p).entries
    lam = np.diag(P).copy()
    transient = lam[:-1]
    lam2 = float(np.max(np.abs(transient)))
    if lam2 >= 1.0:
        raise NonAbsorbingChainError("a transient state has self-loop probability 1")
    emp = empirical_stops(policy, p, epsilon, matrix=P)
    srt = np.sort(lam)
    distinct = bool(np.all(np.diff(srt) > EIGEN_TOL))
    # the lemma also needs a single eigenvalue of largest magnitude below 1
    if not distinct:
        return StoppingBound(lam2, False, emp, epsilon)
    F = lagrange_projectors(P, lam)
    # lam[-1] is the absorbing eigenvalue 1
    G = float(sum(np.abs(Fi) for Fi in F[:-1])[0, -1])
    if lam2 == 0.0:
        # nilpotent transient block: one round always suffices
        bound = 1.0
    else:
        bound = (math.log(G) - math.log(epsilon)) / (-math.log(lam2))
    return StoppingBound(lam2, True, emp, epsilon, G=G, aleph_bound=bound)
