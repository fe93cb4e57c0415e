"""Greedy multi-round concept dialogue.

Each round the speaker reruns contextual reasoning under the current priors,
sends the remaining concept its rational action-to-concept conditional ranks
highest for the intended action, and both sides update: the action prior
becomes the concept-to-action posterior of the sent concept, the sent concept
loses all concept-prior mass (renormalized over the remainder), and the round
repeats until the posterior is confident enough, the round budget is spent,
or no concepts remain.

Speaker and listener may reason from different model pairs (``speaker_view``
and ``listener_view``), which is how desynchronized-knowledge experiments are
run; by default both reason from the same pair and share one reasoning run
per round.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConceptAlreadySentError, InvalidParamsError
from .probs import Dist, as_array
from .reasoning import ReasoningOutcome, ReasoningParams, run_self_snc
from .system1 import entropy_bits, shannon_upper_bits
from .world import AgentProfile, World


@dataclass(frozen=True)
class DialogueConfig:
    """Round budget, reasoning parameters, and the confidence stop margin."""

    k_max: int
    reasoning: ReasoningParams = field(default_factory=ReasoningParams)
    stop_confidence: float = 0.01

    def __post_init__(self):
        if self.k_max < 1:
            raise InvalidParamsError("k_max must be >= 1")
        if not 0 <= self.stop_confidence < 1:
            raise InvalidParamsError("stop_confidence must lie in [0, 1)")


@dataclass(frozen=True)
class DialogueState:
    """One side's evolving beliefs; ``prior_c`` is None once every concept is spent."""

    prior_a: Dist
    prior_c: Dist | None
    remaining: frozenset[int]
    transcript: tuple[tuple[int, Dist], ...] = ()

    @property
    def round_index(self) -> int:
        return len(self.transcript)


@dataclass(frozen=True)
class DialogueReport:
    """Transcript-level result of one dialogue."""

    intended: int
    sent_concepts: tuple[int, ...]
    listener_guess: int
    success: bool
    posterior_trace: tuple[float, ...]
    guess_trace: tuple[int, ...]
    per_round_bit_bounds: tuple[tuple[float, float], ...]
    concept_marginals: tuple[tuple[float, ...], ...]
    g_finals: tuple[float, ...]
    rounds_used: int
    early_stopped: bool
    exhausted: bool


def update_priors(state: DialogueState, concept: int, rc2a_row: Dist) -> DialogueState:
    """Advance a dialogue state after ``concept`` was sent.

    The action prior becomes the supplied posterior; the sent concept's prior
    mass drops to zero and the rest renormalizes over the remaining concepts.
    """
    if concept not in state.remaining:
        raise ConceptAlreadySentError(f"concept {concept} is not available to send")
    if state.prior_c is None:
        raise ConceptAlreadySentError("every concept has already been sent")
    pc = np.array(state.prior_c.p, copy=True)
    pc[concept] = 0.0
    z = pc.sum()
    new_prior_c = Dist(pc / z) if z > 0 else None
    return DialogueState(
        prior_a=rc2a_row,
        prior_c=new_prior_c,
        remaining=state.remaining - {concept},
        transcript=state.transcript + ((concept, rc2a_row),),
    )


def round_bit_bounds(concept_marginal) -> tuple[float, float]:
    """Entropy lower bound and integer-length upper bound, in bits, for one round."""
    return entropy_bits(concept_marginal), shannon_upper_bits(concept_marginal)


def s2_bitlength_bounds(ra2c_list, entering_posteriors) -> tuple[float, float]:
    """Summed per-round bounds on the expected coded length of the selected concepts.

    Round k's concept marginal weighs the round's rational action-to-concept
    rows by the action posterior the round started from (the initial action
    prior for the first round).
    """
    if len(ra2c_list) != len(entering_posteriors):
        raise InvalidParamsError("need one entering posterior per round")
    lower = upper = 0.0
    for ra2c, post in zip(ra2c_list, entering_posteriors):
        marginal = as_array(ra2c).T @ as_array(post)
        lo, up = round_bit_bounds(marginal)
        lower += lo
        upper += up
    return lower, upper


def check_posterior_monotone(report: DialogueReport, slack: float = 1e-9) -> bool:
    """True iff the per-round posterior of the intended action never drops."""
    trace = report.posterior_trace
    return all(b >= a - slack for a, b in zip(trace, trace[1:]))


def _reason(view: tuple[AgentProfile, AgentProfile], state: DialogueState,
            params: ReasoningParams, cache: dict | None, role: str) -> ReasoningOutcome:
    if cache is None:
        return run_self_snc(view[0], view[1], state.prior_a, state.prior_c, params)
    key = (role, state.prior_a.p.tobytes(), state.prior_c.p.tobytes())
    hit = cache.get(key)
    if hit is None:
        hit = run_self_snc(view[0], view[1], state.prior_a, state.prior_c, params)
        cache[key] = hit
    return hit


def run_dialogue(speaker: AgentProfile, listener: AgentProfile, world: World,
                 intended: int, cfg: DialogueConfig, *,
                 speaker_view: tuple[AgentProfile, AgentProfile] | None = None,
                 listener_view: tuple[AgentProfile, AgentProfile] | None = None,
                 cache: dict | None = None) -> DialogueReport:
    """Run one greedy dialogue for the intended action.

    ``speaker_view`` / ``listener_view`` name the (speaker model, listener
    model) pair each side reasons with; both default to ``(speaker,
    listener)``, in which case one reasoning run per round serves both sides.
    ``cache`` may be a dict reused across dialogues that share the same world,
    views, and reasoning parameters; it memoizes reasoning runs by prior
    state.  Ties in every argmax resolve to the lowest id.
    """
    if not 0 <= intended < world.num_actions:
        raise InvalidParamsError(f"intended action {intended} outside the world")
    sview = speaker_view if speaker_view is not None else (speaker, listener)
    lview = listener_view if listener_view is not None else (speaker, listener)
    shared = sview[0] is lview[0] and sview[1] is lview[1]

    def fresh_state() -> DialogueState:
        return DialogueState(
            prior_a=world.prior_actions,
            prior_c=world.prior_concepts,
            remaining=frozenset(range(world.num_concepts)),
        )

    s_state = fresh_state()
    l_state = s_state
    sent: list[int] = []
    posterior_trace: list[float] = []
    guess_trace: list[int] = []
    bounds: list[tuple[float, float]] = []
    marginals: list[tuple[float, ...]] = []
    g_finals: list[float] = []
    early_stopped = False
    exhausted = False

    for _ in range(cfg.k_max):
        if s_state.prior_c is None:
            exhausted = True
            break
        out_s = _reason(sview, s_state, cfg.reasoning, cache, "shared" if shared else "speaker")
        out_l = out_s if shared else _reason(lview, l_state, cfg.reasoning, cache, "listener")

        mask = np.zeros(world.num_concepts, dtype=bool)
        mask[list(s_state.remaining)] = True
        row = np.where(mask, out_s.ra2c.p[intended], -np.inf)
        concept = int(row.argmax())

        marginal = out_s.ra2c.p.T @ s_state.prior_a.p
        marginals.append(tuple(float(x) for x in marginal))
        bounds.append(round_bit_bounds(marginal))
        posterior_trace.append(float(out_l.rc2a.p[concept, intended]))
        g_finals.append(out_s.g_trace[-1])
        sent.append(concept)

        s_state = update_priors(s_state, concept, out_s.rc2a.row(concept))
        l_state = s_state if shared else update_priors(l_state, concept, out_l.rc2a.row(concept))
        guess_trace.append(int(l_state.prior_a.p.argmax()))

        if s_state.prior_a.p.max() >= 1 - cfg.stop_confidence:
            early_stopped = True
            break

    listener_guess = guess_trace[-1] if guess_trace else -1
    return DialogueReport(
        intended=intended,
        sent_concepts=tuple(sent),
        listener_guess=listener_guess,
        success=listener_guess == intended,
        posterior_trace=tuple(posterior_trace),
        guess_trace=tuple(guess_trace),
        per_round_bit_bounds=tuple(bounds),
        concept_marginals=tuple(marginals),
        g_finals=tuple(g_finals),
        rounds_used=len(sent),
        early_stopped=early_stopped,
        exhausted=exhausted,
    )
