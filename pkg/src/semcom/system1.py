"""Baseline (System 1) semantic coding: concept extraction, action/concept
conditionals, semantic representations, expected bit-length bounds, and a
concrete binary prefix code.

Bit-length accounting works over the extraction frequencies f_c: the
prior-weighted relevance marginal of each concept, normalized across
concepts.  The expected coded length of a semantic representation is bounded
below by the relevance-mass-weighted entropy of f and above by the same
weighting of ceil(-log2 f), and any optimal prefix code lands in between.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllZeroError,
    EmptySRError,
    InvalidParamsError,
    UnknownActionError,
    ZeroEvidenceError,
)
from .probs import Dist, as_array
from .world import AgentProfile, SymbolTable


@dataclass(frozen=True)
class SemanticRep:
    """Ordered, duplicate-free symbol list describing one action."""

    symbols: tuple[int, ...]
    origin_action: int

    def __post_init__(self):
        if not self.symbols:
            raise EmptySRError("semantic representation must be nonempty")
        if len(set(self.symbols)) != len(self.symbols):
            raise InvalidParamsError("semantic representation symbols must be distinct")


@dataclass(frozen=True)
class Codebook:
    """Binary prefix code over symbol ids."""

    code: dict[int, str]

    def __post_init__(self):
        words = sorted(self.code.values(), key=len)
        for i, w in enumerate(words):
            if not w or set(w) - {"0", "1"}:
                raise InvalidParamsError("codewords must be nonempty bit strings")
            for longer in words[i + 1:]:
                if longer.startswith(w) and longer != w:
                    raise InvalidParamsError("code is not prefix-free")

    @property
    def lengths(self) -> dict[int, int]:
        return {s: len(w) for s, w in self.code.items()}

    def kraft_sum(self) -> float:
        return sum(2.0 ** -len(w) for w in self.code.values())

    def expected_length(self, freqs) -> float:
        """Mean codeword length in bits under symbol frequencies indexed like the code."""
        f = as_array(freqs)
        return float(sum(f[s] * len(w) for s, w in self.code.items()))


def _check_action(agent: AgentProfile, action: int):
    if not 0 <= action < agent.relevance.num_actions:
        raise UnknownActionError(f"action {action} outside 0..{agent.relevance.num_actions - 1}")


def extract_concepts(agent: AgentProfile, action: int, threshold: float = 0.9) -> list[int]:
    """All concepts whose relevance to the action reaches the threshold, ascending id."""
    _check_action(agent, action)
    if not 0 < threshold <= 1:
        raise InvalidParamsError("threshold must lie in (0, 1]")
    row = agent.relevance.p_true[action]
    return [int(c) for c in np.flatnonzero(row >= threshold)]


def a2c(agent: AgentProfile, action: int) -> Dist:
    """Action-to-concept conditional: the action's relevance row, normalized."""
    _check_action(agent, action)
    row = agent.relevance.p_true[action]
    total = row.sum()
    if total <= 0:
        raise AllZeroError(f"action {action} has an all-zero relevance row")
    return Dist(row / total)


def c2a(agent: AgentProfile, concept: int, prior: Dist) -> Dist:
    """Concept-to-action posterior over actions via Bayes on the a2c likelihoods."""
    if not 0 <= concept < agent.relevance.num_concepts:
        raise UnknownActionError(f"concept {concept} outside 0..{agent.relevance.num_concepts - 1}")
    p = agent.relevance.p_true
    lik = p[:, concept] / p.sum(axis=1)
    w = lik * as_array(prior)
    total = w.sum()
    if total <= 0:
        raise ZeroEvidenceError(f"concept {concept} has zero prior-weighted evidence")
    return Dist(w / total)


def build_sr(agent: AgentProfile, action: int, threshold: float,
             table: SymbolTable, fallback_argmax: bool = False) -> SemanticRep:
    """Symbolize the extracted concepts of an action, in extraction order.

    With ``fallback_argmax`` an empty extraction degrades to the single most
    relevant concept instead of raising; callers that use the fallback should
    flag it in their reports.
    """
    concepts = extract_concepts(agent, action, threshold)
    if not concepts:
        if not fallback_argmax:
            raise EmptySRError(f"action {action} extracts no concepts at threshold {threshold}")
        concepts = [int(agent.relevance.p_true[action].argmax())]
    return SemanticRep(symbols=tuple(table.symbol(c) for c in concepts), origin_action=action)


def concept_true_marginals(agent: AgentProfile, prior: Dist) -> np.ndarray:
    """Prior-weighted probability that each concept is relevant to the intended action."""
    return agent.relevance.p_true.T @ as_array(prior)


def extraction_frequencies(agent: AgentProfile, prior: Dist) -> Dist:
    """Relative frequency of each concept among all prior-weighted extractions."""
    marg = concept_true_marginals(agent, prior)
    total = marg.sum()
    if total <= 0:
        raise AllZeroError("no concept has positive relevance mass")
    return Dist(marg / total)


def s1_bitlength_bounds(agent: AgentProfile, prior: Dist) -> tuple[float, float]:
    """Lower/upper bounds in bits on the expected coded length of a semantic representation.

    lower = -sum_c m_c log2 f_c, upper = sum_c m_c ceil(-log2 f_c), where m_c
    is the relevance marginal and f the extraction frequency distribution.
    Concepts with zero marginal contribute nothing to either bound.
    """
    marg = concept_true_marginals(agent, prior)
    total = marg.sum()
    if total <= 0:
        raise AllZeroError("no concept has positive relevance mass")
    f = marg / total
    mask = marg > 0
    lower = float(-(marg[mask] * np.log2(f[mask])).sum())
    upper = float((marg[mask] * np.ceil(-np.log2(f[mask]))).sum())
    return lower, upper


class _Node:
    __slots__ = ("freq", "tie", "symbol", "left", "right")

    def __init__(self, freq, tie, symbol=None, left=None, right=None):
        self.freq = freq
        self.tie = tie
        self.symbol = symbol
        self.left = left
        self.right = right

    def __lt__(self, other):
        return (self.freq, self.tie) < (other.freq, other.tie)


def huffman(freqs) -> Codebook:
    """Optimal binary prefix code for the given symbol frequencies.

    Deterministic construction: always merge the two lowest-frequency nodes,
    breaking ties by the smallest symbol id in the subtree; the smaller merge
    partner takes the 0 branch.  Zero-frequency symbols still receive
    codewords but cannot affect the expected length.  A single symbol gets
    the one-bit codeword "0" (a zero-length codeword is not transmittable).
    """
    f = as_array(freqs)
    if f.ndim != 1 or f.size == 0:
        raise InvalidParamsError("huffman needs a nonempty 1-D frequency vector")
    if (f < 0).any():
        raise InvalidParamsError("frequencies must be nonnegative")
    if f.sum() <= 0:
        raise AllZeroError("at least one frequency must be positive")
    if f.size == 1:
        return Codebook({0: "0"})
    heap = [_Node(float(f[s]), s, symbol=s) for s in range(f.size)]
    heapq.heapify(heap)
    while len(heap) > 1:
        a = heapq.heappop(heap)
        b = heapq.heappop(heap)
        heapq.heappush(heap, _Node(a.freq + b.freq, min(a.tie, b.tie), left=a, right=b))
    code: dict[int, str] = {}
    stack = [(heap[0], "")]
    while stack:
        node, word = stack.pop()
        if node.symbol is not None:
            code[node.symbol] = word
        else:
            stack.append((node.left, word + "0"))
            stack.append((node.right, word + "1"))
    return Codebook(code)


def s1_expected_sr_length(agent: AgentProfile, prior: Dist, threshold: float,
                          codebook: Codebook, table: SymbolTable,
                          fallback_argmax: bool = False) -> float:
    """Prior-weighted mean total codeword length of each action's extracted concepts."""
    lengths = codebook.lengths
    pa = as_array(prior)
    total = 0.0
    for action in range(agent.relevance.num_actions):
        if pa[action] == 0:
            continue
        sr = build_sr(agent, action, threshold, table, fallback_argmax=fallback_argmax)
        total += pa[action] * sum(lengths[s] for s in sr.symbols)
    return total


def entropy_bits(freqs) -> float:
    """Shannon entropy in bits with 0 log 0 = 0."""
    f = as_array(freqs)
    mask = f > 0
    return float(-(f[mask] * np.log2(f[mask])).sum())


def shannon_upper_bits(freqs) -> float:
    """Expected length of the ceil(-log2 f) code, in bits."""
    f = as_array(freqs)
    mask = f > 0
    return float((f[mask] * np.ceil(-np.log2(f[mask]))).sum())
