"""Contextual reasoning engine: simulated dialogue against a virtual counterpart.

Starting from the speaker and listener individual contexts (joint
action-concept beliefs), each full step blends them into a mutual context
estimate, sharpens the blend with the corresponding rationality exponent,
and renormalizes.  Two renormalization rules are provided:

- ``"free"``: renormalize the sharpened blend over the whole joint space.
  This is the unconstrained minimizer of the objective's context blocks; it
  drives both contexts and the mutual context to a single common limit, whose
  surviving entries all carry equal mass.

- ``"anchored"`` (default): renormalize per action row on the speaker side
  and per concept column on the listener side, rescaling by the fixed priors
  so every iterate keeps the conditional-times-prior form the contexts are
  defined with (action and concept marginals stay pinned to the priors).
  This is the constrained minimizer of the same blocks; pinned marginals make
  sharpened reasoning spread actions across concepts into a near-bijective
  assignment, which is what the dialogue and experiment layers rely on.

Both rules record the same objective after every half-step and descend it
monotonically.  All functions are pure; concurrent runs are safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidParamsError, SupportMismatchError
from .probs import ContextMatrix, CondMatrix, Dist, as_array
from .world import AgentProfile

# Entries below this are treated as extinct and flushed to exact zero after
# each half-step; keeps supports of contexts and blends exactly nested so
# logarithms in the objective stay finite.
FLUSH_EPS = 1e-300

# Entrywise agreement required between the two contexts before an outcome is
# reported as converged to a mutual context.
CONVERGED_ATOL = 1e-6


@dataclass(frozen=True)
class ReasoningParams:
    """Rationality exponents, blend weight, depth, and stopping controls."""

    alpha: float = 1.5
    beta: float = 1.5
    lam: float = 0.5
    max_depth: int = 200
    g_tolerance: float | None = None
    update_rule: Literal["anchored", "free"] = "anchored"

    def __post_init__(self):
        if not 1.0 <= self.alpha <= 4.0 or not 1.0 <= self.beta <= 4.0:
            raise InvalidParamsError("alpha and beta must lie in [1, 4]")
        if not 0.0 < self.lam <= 0.999:
            raise InvalidParamsError("lam must lie in (0, 0.999]")
        if self.max_depth < 1:
            raise InvalidParamsError("max_depth must be >= 1")
        if self.g_tolerance is not None and self.g_tolerance <= 0:
            raise InvalidParamsError("g_tolerance must be positive when set")
        if self.update_rule not in ("anchored", "free"):
            raise InvalidParamsError("update_rule must be 'anchored' or 'free'")


@dataclass(frozen=True)
class ReasoningOutcome:
    """Final contexts, extracted conditionals, and the objective trace."""

    mutual: ContextMatrix
    speaker_ctx: ContextMatrix
    listener_ctx: ContextMatrix
    ra2c: CondMatrix
    rc2a: CondMatrix
    g_trace: tuple[float, ...]
    depth_used: int
    converged: bool
    fallback_actions: tuple[int, ...]
    fallback_concepts: tuple[int, ...]


def _flush(x: np.ndarray) -> np.ndarray:
    x[x < FLUSH_EPS] = 0.0
    return x


def _row_cond(x: np.ndarray) -> np.ndarray:
    s = x.sum(axis=1, keepdims=True)
    return np.divide(x, s, out=np.zeros_like(x), where=s > 0)


def _col_cond(x: np.ndarray) -> np.ndarray:
    s = x.sum(axis=0, keepdims=True)
    return np.divide(x, s, out=np.zeros_like(x), where=s > 0)


def _g(s: np.ndarray, l: np.ndarray, m: np.ndarray,
       alpha: float, beta: float, lam: float) -> float:
    """Objective in nats; assumes supports of s and l nest inside m's."""
    ms = s > 0
    ml = l > 0
    sv, lv = s[ms], l[ml]
    h_sm = -(sv * np.log(m[ms])).sum()
    h_s = -(sv * np.log(sv)).sum()
    h_lm = -(lv * np.log(m[ml])).sum()
    h_l = -(lv * np.log(lv)).sum()
    return float(lam * (h_sm - h_s / alpha) + (1 - lam) * (h_lm - h_l / beta))


def objective_g(speaker_ctx, listener_ctx, mutual, params: ReasoningParams) -> float:
    """Blend-weighted cross-entropy-minus-scaled-entropy objective, in nats."""
    s, l, m = as_array(speaker_ctx), as_array(listener_ctx), as_array(mutual)
    if s.shape != m.shape or l.shape != m.shape:
        raise InvalidParamsError("objective needs equally shaped contexts")
    if (m[s > 0] <= 0).any() or (m[l > 0] <= 0).any():
        raise SupportMismatchError("mutual context is zero where a context has mass")
    return _g(s, l, m, params.alpha, params.beta, params.lam)


def init_contexts(speaker: AgentProfile, listener: AgentProfile,
                  prior_a: Dist, prior_c: Dist) -> tuple[ContextMatrix, ContextMatrix]:
    """Boundary contexts from the agents' relevance models and the current priors.

    Speaker side: the speaker's action-to-concept conditional (row-normalized
    relevance) times the action prior, jointly normalized.  Listener side: the
    listener's per-concept Bayes posterior over actions (relevance column
    weighted by the action prior) times the concept prior, jointly normalized.
    A concept with zero relevance under every prior-weighted action yields an
    all-zero column, which is permitted and stays extinct.
    """
    ps = speaker.relevance.p_true
    pl = listener.relevance.p_true
    pa = as_array(prior_a)
    pc = as_array(prior_c)
    if ps.shape != pl.shape:
        raise InvalidParamsError("speaker and listener models must share dimensions")
    if pa.size != ps.shape[0] or pc.size != ps.shape[1]:
        raise InvalidParamsError("prior dimensions must match the models")
    a2c_rows = _row_cond(ps)
    s0 = a2c_rows * pa[:, None]
    total = s0.sum()
    if total <= 0:
        raise InvalidParamsError("speaker context has no mass under the action prior")
    s0 = s0 / total
    posterior = _col_cond(pl * pa[:, None])
    l0 = posterior * pc[None, :]
    total = l0.sum()
    if total <= 0:
        raise InvalidParamsError("listener context has no mass under the priors")
    l0 = l0 / total
    return ContextMatrix(s0), ContextMatrix(l0)


def reasoning_step(speaker_ctx, listener_ctx, params: ReasoningParams
                   ) -> tuple[ContextMatrix, ContextMatrix, ContextMatrix, ContextMatrix]:
    """One full free-rule step: blend, sharpen speaker, re-blend, sharpen listener.

    Returns (first blend, updated speaker context, second blend, updated
    listener context).  The sharpened contexts are renormalized over the whole
    joint space, independent of any marginal targets.
    """
    s = as_array(speaker_ctx)
    l = as_array(listener_ctx)
    if s.shape != l.shape:
        raise InvalidParamsError("contexts must share dimensions")
    lam, a, b = params.lam, params.alpha, params.beta
    m1 = lam * s + (1 - lam) * l
    pow1 = m1 ** a
    s_new = pow1 / pow1.sum()
    m2 = lam * s_new + (1 - lam) * l
    pow2 = m2 ** b
    l_new = pow2 / pow2.sum()
    return (ContextMatrix(m1), ContextMatrix(s_new), ContextMatrix(m2), ContextMatrix(l_new))


def reasoning_step_anchored(speaker_ctx, listener_ctx, params: ReasoningParams,
                            action_marginals, concept_marginals
                            ) -> tuple[ContextMatrix, ContextMatrix, ContextMatrix, ContextMatrix]:
    """One full anchored-rule step with fixed action/concept marginal targets."""
    s = as_array(speaker_ctx)
    l = as_array(listener_ctx)
    row_t = as_array(action_marginals)
    col_t = as_array(concept_marginals)
    lam, a, b = params.lam, params.alpha, params.beta
    m1 = lam * s + (1 - lam) * l
    s_new = _row_cond(m1 ** a) * row_t[:, None]
    m2 = lam * s_new + (1 - lam) * l
    l_new = _col_cond(m2 ** b) * col_t[None, :]
    return (ContextMatrix(m1), ContextMatrix(s_new), ContextMatrix(m2), ContextMatrix(l_new))


def run_self_snc(speaker: AgentProfile, listener: AgentProfile,
                 prior_a: Dist, prior_c: Dist,
                 params: ReasoningParams) -> ReasoningOutcome:
    """Iterate the reasoning step from the boundary contexts.

    The objective is recorded after each half-step (two values per depth).
    Iteration stops at ``max_depth``, or as soon as consecutive recorded
    objective values differ by less than ``g_tolerance`` when that is set.
    The outcome's conditionals are the row-normalized sharpened first blend
    (action-to-concept) and the column-normalized sharpened second blend
    (concept-to-action); rows or columns that lost all mass fall back to
    uniform and are flagged.  ``converged`` reports whether the tolerance
    fired *and* the two contexts agree entrywise within ``CONVERGED_ATOL``.
    """
    s0, l0 = init_contexts(speaker, listener, prior_a, prior_c)
    s = s0.p.copy()
    l = l0.p.copy()
    lam, a, b = params.lam, params.alpha, params.beta
    anchored = params.update_rule == "anchored"
    row_t = s.sum(axis=1)
    col_t = l.sum(axis=0)
    trace: list[float] = []
    tol = params.g_tolerance
    depth_used = 0
    tol_fired = False
    m1 = lam * s + (1 - lam) * l
    m2 = m1
    for _ in range(params.max_depth):
        m1 = lam * s + (1 - lam) * l
        pow1 = m1 ** a
        if anchored:
            s = _flush(_row_cond(pow1) * row_t[:, None])
        else:
            s = _flush(pow1 / pow1.sum())
        trace.append(_g(s, l, m1, a, b, lam))
        m2 = lam * s + (1 - lam) * l
        pow2 = m2 ** b
        if anchored:
            l = _flush(_col_cond(pow2) * col_t[None, :])
        else:
            l = _flush(pow2 / pow2.sum())
        trace.append(_g(s, l, m2, a, b, lam))
        depth_used += 1
        if tol is not None and abs(trace[-1] - trace[-2]) < tol:
            tol_fired = True
            break

    na, nc = s.shape
    pow1 = m1 ** a
    row_mass = pow1.sum(axis=1)
    ra2c = np.divide(pow1, row_mass[:, None], out=np.full_like(pow1, 1.0 / nc),
                     where=row_mass[:, None] > 0)
    fallback_actions = tuple(int(i) for i in np.flatnonzero(row_mass <= 0))
    pow2 = m2 ** b
    col_mass = pow2.sum(axis=0)
    rc2a_cols = np.divide(pow2, col_mass[None, :], out=np.full_like(pow2, 1.0 / na),
                          where=col_mass[None, :] > 0)
    fallback_concepts = tuple(int(j) for j in np.flatnonzero(col_mass <= 0))

    mutual = lam * s + (1 - lam) * l
    converged = tol_fired and float(np.abs(s - l).max()) <= CONVERGED_ATOL
    return ReasoningOutcome(
        mutual=ContextMatrix(mutual),
        speaker_ctx=ContextMatrix(s),
        listener_ctx=ContextMatrix(l),
        ra2c=CondMatrix(ra2c),
        rc2a=CondMatrix(rc2a_cols.T),
        g_trace=tuple(trace),
        depth_used=depth_used,
        converged=converged,
        fallback_actions=fallback_actions,
        fallback_concepts=fallback_concepts,
    )


def check_equal_nonzero(mutual, rel_tol: float, floor: float = 1e-8) -> bool:
    """True iff all entries above the floor agree with their mean within rel_tol."""
    m = as_array(mutual)
    nz = m[m > floor]
    if nz.size <= 1:
        return True
    mean = nz.mean()
    return bool(np.abs(nz - mean).max() <= rel_tol * mean)
