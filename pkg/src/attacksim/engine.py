"""One attacker decision step: sticky target selection, one-step look-ahead
action filtering, profile-distance scoring, and weighted sampling.

The filter stage intersects three predicate sets over the action database:
actions matching the target (criteria and satisfied prerequisites), actions
not yet attempted on the target, and actions with a viable propagation path
(a known attack-vector edge into the target, sourced at a compromised node
or the external origin, sharing a channel with the action).

Scoring maps each candidate's profile distance d_i to a score
s_i = 1 - d_i / sum(d) and selection probability P_i = s_i / sum(s), so
nearer profiles are proportionally more likely without nonlinear weighting.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from attacksim import _kernels
from attacksim.actions import ActionDatabase, criteria_match, scaled_action_profiles
from attacksim.errors import ValidationFailure
from attacksim.model import CpsKnowledge, CpsSystem, initial_knowledge, reveal_on_compromise
from attacksim.profiles import (
    UNORDERED_SET,
    AttackerProfile,
    ScaledProfile,
    scale_profile,
    validate_profile,
)

SUCCESS = "success"
FAILURE = "failure"


class CandidateScore(NamedTuple):
    action_id: str
    distance: float
    score: float
    probability: float


@dataclass(frozen=True, slots=True)
class DecisionRecord:
    """One decision: the candidate set with its full probability breakdown,
    the sampled action, and the Bernoulli outcome."""

    target: str
    candidates: tuple[CandidateScore, ...]
    chosen: str
    chosen_name: str
    probability: float
    outcome: str
    source: str = ""
    via_edges: tuple[str, ...] = ()


class DecisionContext:
    """Static decision inputs shared by every episode of a run.

    Holds the scaled action profiles and their kernel encoding (a flat
    m*n float matrix in canonical action order), plus per-attacker scaled
    vectors cached by profile name. Immutable after construction.
    """

    def __init__(self, system: CpsSystem, db: ActionDatabase):
        self.system = system
        self.db = db
        self.action_profiles = scaled_action_profiles(db)
        schema = db.schema
        n = len(schema)
        self.inv_beta_sq = array(
            "d", (1.0 / (p.criticality * p.criticality) for p in schema))
        self.unordered_mask = array(
            "B", (1 if p.kind == UNORDERED_SET else 0 for p in schema))
        self.row_of: dict[str, int] = {
            a.id: i for i, a in enumerate(db.actions)}
        matrix = array("d", bytes(8 * n * len(db)))
        for a in db.actions:
            self._encode_into(self.action_profiles[a.id],
                              matrix, self.row_of[a.id] * n)
        self.gamma_matrix = matrix
        self._thetas: dict[str, tuple[ScaledProfile, array]] = {}

    def _encode_into(self, scaled: ScaledProfile, buf: array, base: int):
        for j, (prop, v) in enumerate(zip(self.db.schema, scaled.values)):
            if prop.kind == UNORDERED_SET:
                buf[base + j] = float(prop.allowed_values.index(v))
            else:
                buf[base + j] = v

    def attacker_theta(self, attacker: AttackerProfile) -> tuple[ScaledProfile, array]:
        """Scale (and cache) an attacker profile.

        Unbounded properties scale against the database population extended
        with the attacker's own value, clamping it onto the action scale.
        """
        cached = self._thetas.get(attacker.name)
        if cached is not None:
            return cached
        errs = validate_profile(self.db.schema, attacker.values,
                                owner=f"attacker profile {attacker.name!r}")
        if errs:
            raise ValidationFailure("invalid attacker profile", errs)
        theta = scale_profile(self.db.schema, attacker.values,
                              self.db.unbounded_populations(),
                              include_own_value=True)
        buf = array("d", bytes(8 * len(self.db.schema)))
        self._encode_into(theta, buf, 0)
        self._thetas[attacker.name] = (theta, buf)
        return theta, buf


class AttackState:
    """Per-episode attack state: static context plus the dynamic variables
    (knowledge, per-node action history, current target)."""

    def __init__(self, ctx: DecisionContext, attacker: AttackerProfile):
        self.ctx = ctx
        self.attacker_name = attacker.name
        self.theta, self._theta_arr = ctx.attacker_theta(attacker)
        self.knowledge: CpsKnowledge = initial_knowledge(ctx.system)
        self.attempted: dict[str, set[str]] = {}
        self.succeeded: dict[str, set[str]] = {}
        self.current_target: str | None = None

    @property
    def system(self) -> CpsSystem:
        return self.ctx.system

    @property
    def db(self) -> ActionDatabase:
        return self.ctx.db


def initial_state(system: CpsSystem, db: ActionDatabase,
                  attacker: AttackerProfile) -> AttackState:
    """Convenience constructor for standalone (non-harness) stepping."""
    return AttackState(DecisionContext(system, db), attacker)


def filter_valid(state: AttackState, target: str) -> list[str]:
    """Candidate actions for the target, in canonical id order.

    Intersection of: not yet attempted on the target; criteria match with
    all prerequisites succeeded on the target; and at least one viable
    propagation path into the target.
    """
    k = state.knowledge
    if target not in k.known_nodes:
        raise ValueError(f"target {target!r} is not known to the attacker")
    if target in k.compromised_nodes:
        raise ValueError(f"target {target!r} is already compromised")
    node = state.system.node_by_id[target]
    attempted = state.attempted.get(target, set())
    succeeded = state.succeeded.get(target, set())
    live_channels: set[str] = set()
    for e in state.system.edges_into(target):
        if e.id in k.known_edges and e.is_attack_vector and (
                e.from_node == state.system.external_origin
                or e.from_node in k.compromised_nodes):
            live_channels |= e.channels
    out: list[str] = []
    for a in state.db.actions:
        if (a.id not in attempted
                and criteria_match(a.target_criteria, node)
                and a.prerequisites <= succeeded
                and a.channels & live_channels):
            out.append(a.id)
    return out


def viable_edges(state: AttackState, target: str, action_id: str) -> tuple[str, ...]:
    """Known attack-vector edges that could carry the action into the target."""
    action = state.db.by_id[action_id]
    k = state.knowledge
    out = []
    for e in state.system.edges_into(target):
        if (e.id in k.known_edges and e.is_attack_vector
                and (e.from_node == state.system.external_origin
                     or e.from_node in k.compromised_nodes)
                and e.channels & action.channels):
            out.append(e.id)
    return tuple(out)


def select_target(state: AttackState, rng) -> str | None:
    """Pick the node to attack, or None when nothing remains.

    Sticky: the current target is kept while it still has untried
    qualified actions. Otherwise the target is drawn uniformly from the
    known, non-compromised nodes that still have at least one candidate;
    iteration order is canonical (sorted ids) so runs reproduce exactly.
    """
    k = state.knowledge
    cur = state.current_target
    if (cur is not None and cur in k.known_nodes
            and cur not in k.compromised_nodes and filter_valid(state, cur)):
        return cur
    candidates = [nid for nid in sorted(k.known_nodes)
                  if nid not in k.compromised_nodes
                  and filter_valid(state, nid)]
    if not candidates:
        return None
    return candidates[rng.randrange(len(candidates))]


def distance(theta, gamma, beta: Sequence[float]) -> float:
    """Profile distance: sqrt of the criticality-weighted squared
    differences, with unordered-set slots contributing (1 - match)."""
    tvals = theta.values if isinstance(theta, ScaledProfile) else tuple(theta)
    gvals = gamma.values if isinstance(gamma, ScaledProfile) else tuple(gamma)
    if len(tvals) != len(gvals) or len(tvals) != len(beta):
        raise ValueError("profile and criticality dimensions must match")
    n = len(tvals)
    t_arr = array("d", bytes(8 * n))
    g_arr = array("d", bytes(8 * n))
    mask = array("B", bytes(n))
    inv_beta_sq = array("d", bytes(8 * n))
    for j, (t, g, b) in enumerate(zip(tvals, gvals, beta)):
        if not 0.0 < b <= 1.0:
            raise ValueError(f"criticality for slot {j} must be in (0, 1]")
        inv_beta_sq[j] = 1.0 / (b * b)
        t_str, g_str = isinstance(t, str), isinstance(g, str)
        if t_str != g_str:
            raise ValueError(f"slot {j}: cannot compare label with number")
        if t_str:
            mask[j] = 1
            t_arr[j] = 0.0
            g_arr[j] = 0.0 if t == g else 1.0
        else:
            t_arr[j] = t
            g_arr[j] = g
    out = array("d", bytes(8))
    _kernels.profile_distances(t_arr, g_arr, array("l", [0]),
                               inv_beta_sq, mask, out)
    return out[0]


def scores(distances: Sequence[float]) -> list[float]:
    """Scores from distances. Degenerate cases: a lone candidate scores 1,
    and an all-zero distance vector scores uniformly."""
    m = len(distances)
    if m == 0:
        raise ValueError("empty distance vector")
    for d in distances:
        if d < 0:
            raise ValueError(f"negative distance {d}")
    buf = array("d", distances)
    out = array("d", bytes(8 * m))
    _kernels.scores_from_distances(buf, out)
    return list(out)


def probabilities(score_values: Sequence[float]) -> list[float]:
    """Selection probabilities from scores."""
    m = len(score_values)
    if m == 0:
        raise ValueError("empty score vector")
    total = 0.0
    for s in score_values:
        if s < 0:
            raise ValueError(f"negative score {s}")
        total += s
    if total == 0.0:
        raise ValueError("scores sum to zero")
    buf = array("d", score_values)
    out = array("d", bytes(8 * m))
    _kernels.probabilities_from_scores(buf, out)
    return list(out)


def sample_action(candidates: Sequence[str], probs: Sequence[float], rng) -> str:
    """Weighted draw over candidates; deterministic given the rng state."""
    if not candidates:
        raise ValueError("cannot sample from an empty candidate set")
    if len(candidates) != len(probs):
        raise ValueError("candidates and probabilities must align")
    return candidates[_kernels.weighted_index(array("d", probs), rng.random())]


def _assess(state: AttackState, cand_ids: list[str]):
    m = len(cand_ids)
    ctx = state.ctx
    rows = array("l", (ctx.row_of[a] for a in cand_ids))
    d = array("d", bytes(8 * m))
    s = array("d", bytes(8 * m))
    p = array("d", bytes(8 * m))
    _kernels.profile_distances(state._theta_arr, ctx.gamma_matrix, rows,
                               ctx.inv_beta_sq, ctx.unordered_mask, d)
    _kernels.scores_from_distances(d, s)
    _kernels.probabilities_from_scores(s, p)
    return d, s, p


def step(state: AttackState, rng) -> tuple[AttackState, DecisionRecord] | None:
    """Run one decision cycle, mutating the state in place.

    Returns None when no node has qualified actions left (episode end).
    A failed action still counts as attempted, so targets exhaust. Any
    successful action compromises its target for knowledge purposes,
    whatever its reported effect.
    """
    target = select_target(state, rng)
    if target is None:
        return None
    cand_ids = filter_valid(state, target)
    d, s, p = _assess(state, cand_ids)
    idx = _kernels.weighted_index(p, rng.random())
    chosen = cand_ids[idx]
    action = state.db.by_id[chosen]
    success = rng.random() < action.success_probability
    via = viable_edges(state, target, chosen)
    state.attempted.setdefault(target, set()).add(chosen)
    if success:
        state.succeeded.setdefault(target, set()).add(chosen)
        state.knowledge = reveal_on_compromise(state.knowledge,
                                               state.system, target)
        state.current_target = None
    else:
        state.current_target = target
    record = DecisionRecord(
        target=target,
        candidates=tuple(
            CandidateScore(a, d[i], s[i], p[i])
            for i, a in enumerate(cand_ids)),
        chosen=chosen,
        chosen_name=action.name or action.id,
        probability=p[idx],
        outcome=SUCCESS if success else FAILURE,
        source=state.system.edge_by_id[via[0]].from_node,
        via_edges=via,
    )
    return state, record
