"""Block codes for adversarially varying channel families, and the adversary.

A deterministic code fixes per-message input states and a decoding POVM for
a block of l channel uses. A random code is a finitely supported mixture of
deterministic codes (shared randomness between sender and receiver); a
correlated code indexes encoder and decoder by the two halves of an i.i.d.
bipartite source, modelling weaker common randomness. The adversary fixes
one family label per channel use after seeing the code; ``evaluate_code``
searches that choice exhaustively when the sequence space is small and
greedily otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .avqc import Avqc
from .config import ENUM_BUDGET, EXHAUSTIVE_BUDGET, PAIR_ENUM_BUDGET, TOL_PROB
from .correlation import BipartiteSource
from .errors import BudgetExceeded, DimensionMismatch, ValidationError
from .measures import entanglement_fidelity
from .quantum import (
    DensityMatrix,
    Povm,
    PureState,
    QuantumChannel,
    apply_channel_to_slot,
    compose_channels,
    hermitize,
    maximally_mixed,
    min_eigenvalue,
    tensor_channel,
)
from .util import parallel_map

__all__ = [
    "DeterministicCode",
    "RandomCode",
    "CorrelatedCode",
    "CorrelatedEntanglementCode",
    "ErrorReport",
    "FidelityReport",
    "evaluate_code",
    "evaluate_entanglement_code",
    "permutation_symmetrize",
    "random_code_reduction",
    "compose_two_phase",
    "compose_two_phase_entanglement",
    "two_phase_schedule",
    "projective_decoder",
]


@dataclass(frozen=True, eq=False)
class DeterministicCode:
    """Fixed encoder states and decoding POVM for an l-use block."""

    l: int
    encoder: tuple
    decoder: Povm

    def __post_init__(self):
        if self.l < 1:
            raise ValidationError("DeterministicCode: l must be >= 1")
        encoder = tuple(self.encoder)
        if not encoder:
            raise ValidationError("DeterministicCode: needs at least one message")
        dims = {rho.dim for rho in encoder}
        if len(dims) != 1:
            raise DimensionMismatch("DeterministicCode: encoder states of mixed dims")
        if self.decoder.outcome_count != len(encoder):
            raise DimensionMismatch(
                f"DeterministicCode: {self.decoder.outcome_count} decoder outcomes "
                f"for {len(encoder)} messages"
            )
        object.__setattr__(self, "encoder", encoder)

    @property
    def message_count(self) -> int:
        return len(self.encoder)

    @property
    def input_dim(self) -> int:
        return self.encoder[0].dim


@dataclass(frozen=True, eq=False)
class RandomCode:
    """A finitely supported mixture of deterministic codes."""

    support: tuple
    weights: np.ndarray

    def __post_init__(self):
        support = tuple(self.support)
        if not support:
            raise ValidationError("RandomCode: empty support")
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(support),):
            raise DimensionMismatch("RandomCode: weight count must match support")
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > TOL_PROB:
            raise ValidationError("RandomCode: weights must form a probability vector")
        keys = {
            (c.l, c.message_count, c.input_dim, c.decoder.dim) for c in support
        }
        if len(keys) != 1:
            raise ValidationError("RandomCode: support codes have mixed shapes")
        w.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", w)

    @property
    def l(self) -> int:
        return self.support[0].l

    @property
    def message_count(self) -> int:
        return self.support[0].message_count


def _check_sequence_keys(mapping: Mapping, alphabet, n: int, what: str) -> None:
    expect = set(itertools.product(alphabet, repeat=n))
    if set(mapping) != expect:
        raise ValidationError(f"{what}: keys must be exactly the length-{n} sequences")


@dataclass(frozen=True, eq=False)
class CorrelatedCode:
    """A code whose encoder and decoder read correlated source sequences.

    Over l channel uses the parties observe n = floor(l / r) source samples;
    the sender encodes with the states attached to its observation and the
    receiver measures with the POVM attached to its own.
    """

    l: int
    r: int
    source: BipartiteSource
    encoders: Mapping
    decoders: Mapping

    def __post_init__(self):
        if self.l < 1 or self.r < 1:
            raise ValidationError("CorrelatedCode: l and r must be >= 1")
        n = self.l // self.r
        if n < 1:
            raise ValidationError("CorrelatedCode: block too short for one sample")
        if len(self.source.x_alphabet) ** n > ENUM_BUDGET:
            raise BudgetExceeded("CorrelatedCode: sender observation space too large")
        if len(self.source.y_alphabet) ** n > ENUM_BUDGET:
            raise BudgetExceeded("CorrelatedCode: receiver observation space too large")
        encoders = dict(self.encoders)
        decoders = dict(self.decoders)
        _check_sequence_keys(encoders, self.source.x_alphabet, n, "CorrelatedCode encoders")
        _check_sequence_keys(decoders, self.source.y_alphabet, n, "CorrelatedCode decoders")
        counts = {len(enc) for enc in encoders.values()}
        counts |= {povm.outcome_count for povm in decoders.values()}
        if len(counts) != 1:
            raise ValidationError("CorrelatedCode: message counts disagree")
        in_dims = {rho.dim for enc in encoders.values() for rho in enc}
        out_dims = {povm.dim for povm in decoders.values()}
        if len(in_dims) != 1 or len(out_dims) != 1:
            raise DimensionMismatch("CorrelatedCode: mixed dimensions")
        object.__setattr__(self, "encoders", encoders)
        object.__setattr__(self, "decoders", decoders)

    @property
    def n(self) -> int:
        return self.l // self.r

    @property
    def message_count(self) -> int:
        return len(next(iter(self.encoders.values())))

    @property
    def input_dim(self) -> int:
        return next(iter(self.encoders.values()))[0].dim


@dataclass(frozen=True, eq=False)
class CorrelatedEntanglementCode:
    """Entanglement-transmission variant: encoder and decoder are channels.

    Encoders map a code space of dimension ``code_dim`` into the l-use input
    space; decoders map the l-use output space back onto the code space.
    """

    l: int
    r: int
    source: BipartiteSource
    code_dim: int
    encoders: Mapping
    decoders: Mapping

    def __post_init__(self):
        if self.l < 1 or self.r < 1:
            raise ValidationError("CorrelatedEntanglementCode: l and r must be >= 1")
        n = self.l // self.r
        if n < 1:
            raise ValidationError("CorrelatedEntanglementCode: block too short")
        encoders = dict(self.encoders)
        decoders = dict(self.decoders)
        _check_sequence_keys(
            encoders, self.source.x_alphabet, n, "CorrelatedEntanglementCode encoders"
        )
        _check_sequence_keys(
            decoders, self.source.y_alphabet, n, "CorrelatedEntanglementCode decoders"
        )
        for enc in encoders.values():
            if enc.dim_in != self.code_dim:
                raise DimensionMismatch(
                    "CorrelatedEntanglementCode: encoder input must be the code space"
                )
        for dec in decoders.values():
            if dec.dim_out != self.code_dim:
                raise DimensionMismatch(
                    "CorrelatedEntanglementCode: decoder output must be the code space"
                )
        object.__setattr__(self, "encoders", encoders)
        object.__setattr__(self, "decoders", decoders)

    @property
    def n(self) -> int:
        return self.l // self.r


@dataclass(frozen=True)
class ErrorReport:
    """Adversarial performance of a message code.

    ``avg_success_worst`` minimizes the average success over the searched
    state sequences and ``worst_state_seq`` attains it; ``max_error_worst``
    maximizes 1 minus the smallest per-message success over the same set.
    With ``method == "exhaustive"`` both are exact optima; with ``greedy``
    they only bound the adversary's best from the searched side.
    """

    avg_success_worst: float
    max_error_worst: float
    worst_state_seq: tuple
    method: str


@dataclass(frozen=True)
class FidelityReport:
    """Worst-case averaged entanglement fidelity over searched sequences."""

    worst_fidelity: float
    worst_state_seq: tuple
    method: str


def projective_decoder(codewords: Sequence[PureState], absorb: int = 0) -> Povm:
    """Projector decoder with the leftover identity mass folded into one element."""
    if not codewords:
        raise ValidationError("projective_decoder: no codewords")
    dim = codewords[0].dim
    elements = [np.outer(s.amplitudes, s.amplitudes.conj()) for s in codewords]
    rest = np.eye(dim, dtype=complex) - sum(elements)
    if min_eigenvalue(rest) < -1e-9:
        raise ValidationError("projective_decoder: codeword projectors exceed identity")
    elements[absorb] = hermitize(elements[absorb] + rest)
    return Povm(tuple(elements))


def _apply_factors_raw(factors: Sequence[QuantumChannel], mat: np.ndarray) -> np.ndarray:
    dims = [ch.dim_in for ch in factors]
    out = mat
    for slot, ch in enumerate(factors):
        out = apply_channel_to_slot(ch, out, slot, dims)
        dims[slot] = ch.dim_out
    return out


def _det_success(factors, code: DeterministicCode) -> np.ndarray:
    succ = np.empty(code.message_count)
    for i, rho in enumerate(code.encoder):
        out = _apply_factors_raw(factors, np.asarray(rho.matrix))
        succ[i] = float(np.einsum("ij,ji->", code.decoder.elements[i], out).real)
    return succ


class _CorrelatedEvaluator:
    """Groups the source mass by distinct (encoder, decoder) object pairs."""

    def __init__(self, code: CorrelatedCode):
        self.code = code
        x_seqs = code.source.x_sequences(code.n)
        y_seqs = code.source.y_sequences(code.n)
        table = code.source.joint_power(code.n, budget=PAIR_ENUM_BUDGET)
        self.encs: dict = {}
        self.decs: dict = {}
        weight: dict = {}
        for xi, x in enumerate(x_seqs):
            enc = code.encoders[x]
            self.encs.setdefault(id(enc), enc)
            for yi, y in enumerate(y_seqs):
                mass = table[xi, yi]
                if mass == 0.0:
                    continue
                dec = code.decoders[y]
                self.decs.setdefault(id(dec), dec)
                key = (id(enc), id(dec))
                weight[key] = weight.get(key, 0.0) + float(mass)
        self.pair_weight = weight

    def per_message(self, factors) -> np.ndarray:
        outs: dict = {}
        succ = np.zeros(self.code.message_count)
        for (eid, did), mass in self.pair_weight.items():
            if eid not in outs:
                enc = self.encs[eid]
                outs[eid] = [
                    _apply_factors_raw(factors, np.asarray(rho.matrix)) for rho in enc
                ]
            povm = self.decs[did]
            for i in range(self.code.message_count):
                succ[i] += mass * float(
                    np.einsum("ij,ji->", povm.elements[i], outs[eid][i]).real
                )
        return succ


def _per_message_fn(avqc: Avqc, code):
    """Returns seq -> per-message success vector for any message-code kind."""
    if isinstance(code, DeterministicCode):
        def fn(seq):
            return _det_success([avqc.channels[s] for s in seq], code)
        return fn
    if isinstance(code, RandomCode):
        def fn(seq):
            factors = [avqc.channels[s] for s in seq]
            acc = np.zeros(code.message_count)
            for w, det in zip(code.weights, code.support):
                if w == 0.0:
                    continue
                acc += w * _det_success(factors, det)
            return acc
        return fn
    if isinstance(code, CorrelatedCode):
        inner = _CorrelatedEvaluator(code)
        def fn(seq):
            return inner.per_message([avqc.channels[s] for s in seq])
        return fn
    raise ValidationError(f"evaluate_code: unsupported code type {type(code).__name__}")


def _check_code_dims(avqc: Avqc, l: int, input_dim: int, output_dim: int) -> None:
    if input_dim != avqc.dim_in**l:
        raise DimensionMismatch(
            f"code input dim {input_dim} does not match {avqc.dim_in}^{l}"
        )
    if output_dim != avqc.dim_out**l:
        raise DimensionMismatch(
            f"code output dim {output_dim} does not match {avqc.dim_out}^{l}"
        )


def _code_shape(code) -> tuple[int, int, int]:
    if isinstance(code, DeterministicCode):
        return code.l, code.input_dim, code.decoder.dim
    if isinstance(code, RandomCode):
        first = code.support[0]
        return first.l, first.input_dim, first.decoder.dim
    if isinstance(code, CorrelatedCode):
        return code.l, code.input_dim, next(iter(code.decoders.values())).dim
    raise ValidationError(f"unsupported code type {type(code).__name__}")


def _greedy_search(states, l: int, score_cache: dict, vector_fn):
    """Coordinate-descent minimization of the average success, |S| restarts."""
    def vec(seq):
        if seq not in score_cache:
            score_cache[seq] = vector_fn(seq)
        return score_cache[seq]

    for start in states:
        seq = tuple([start] * l)
        current = float(vec(seq).mean())
        improved = True
        while improved:
            improved = False
            for pos in range(l):
                for s in states:
                    if s == seq[pos]:
                        continue
                    cand = seq[:pos] + (s,) + seq[pos + 1 :]
                    val = float(vec(cand).mean())
                    if val < current - 1e-15:
                        seq, current = cand, val
                        improved = True


def evaluate_code(
    avqc: Avqc,
    code,
    budget: int = EXHAUSTIVE_BUDGET,
    mode: str = "auto",
) -> ErrorReport:
    """Search the adversary's per-use state choices against a message code.

    With at most ``budget`` sequences (or ``mode="exhaustive"``) every
    sequence is scored and the optima are exact. Otherwise a greedy
    coordinate descent on the average success runs from each constant
    sequence, and the report bounds the adversary's damage from below.
    """
    l, d_in, d_out = _code_shape(code)
    _check_code_dims(avqc, l, d_in, d_out)
    count = len(avqc.states) ** l
    if mode not in ("auto", "exhaustive", "greedy"):
        raise ValidationError(f"evaluate_code: unknown mode {mode!r}")
    if mode == "auto":
        mode = "exhaustive" if count <= budget else "greedy"
    if mode == "exhaustive" and count > ENUM_BUDGET:
        raise BudgetExceeded(
            f"evaluate_code: {count} sequences exceed the enumeration budget"
        )
    vector_fn = _per_message_fn(avqc, code)

    scores: dict = {}
    if mode == "exhaustive":
        seqs = list(itertools.product(avqc.states, repeat=l))
        scores = dict(zip(seqs, parallel_map(vector_fn, seqs)))
    else:
        _greedy_search(avqc.states, l, scores, vector_fn)

    worst_seq, worst_avg = None, np.inf
    worst_maxerr = 0.0
    for seq, vec in scores.items():
        avg = float(vec.mean())
        if avg < worst_avg - 1e-15:
            worst_avg, worst_seq = avg, seq
        worst_maxerr = max(worst_maxerr, 1.0 - float(vec.min()))
    return ErrorReport(worst_avg, worst_maxerr, worst_seq, mode)


def evaluate_entanglement_code(
    avqc: Avqc,
    code: CorrelatedEntanglementCode,
    budget: int = EXHAUSTIVE_BUDGET,
) -> FidelityReport:
    """Worst-case source-averaged entanglement fidelity, exhaustively.

    For each state sequence the score is the source-weighted fidelity of the
    maximally mixed code-space state through decoder ∘ channel ∘ encoder.
    """
    count = len(avqc.states) ** code.l
    if count > budget:
        raise BudgetExceeded(
            f"evaluate_entanglement_code: {count} sequences exceed budget {budget}"
        )
    for enc in code.encoders.values():
        if enc.dim_out != avqc.dim_in**code.l:
            raise DimensionMismatch("encoder output does not match the channel block")
    for dec in code.decoders.values():
        if dec.dim_in != avqc.dim_out**code.l:
            raise DimensionMismatch("decoder input does not match the channel block")
    x_seqs = code.source.x_sequences(code.n)
    y_seqs = code.source.y_sequences(code.n)
    table = code.source.joint_power(code.n, budget=PAIR_ENUM_BUDGET)
    pair_weight: dict = {}
    encs: dict = {}
    decs: dict = {}
    for xi, x in enumerate(x_seqs):
        enc = code.encoders[x]
        encs.setdefault(id(enc), enc)
        for yi, y in enumerate(y_seqs):
            mass = table[xi, yi]
            if mass == 0.0:
                continue
            dec = code.decoders[y]
            decs.setdefault(id(dec), dec)
            key = (id(enc), id(dec))
            pair_weight[key] = pair_weight.get(key, 0.0) + float(mass)
    mixed = maximally_mixed(code.code_dim)

    worst_seq, worst_fid = None, np.inf
    for seq in itertools.product(avqc.states, repeat=code.l):
        block = tensor_channel([avqc.channels[s] for s in seq])
        fid = 0.0
        for (eid, did), mass in pair_weight.items():
            channel = compose_channels(decs[did], block, encs[eid])
            fid += mass * entanglement_fidelity(mixed, channel)
        if fid < worst_fid - 1e-15:
            worst_fid, worst_seq = fid, seq
    return FidelityReport(float(worst_fid), worst_seq, "exhaustive")


def permutation_symmetrize(
    code,
    mode: str = "exact",
    budget: int = EXHAUSTIVE_BUDGET,
    sample_count: int | None = None,
    seed: int | None = None,
) -> RandomCode:
    """Average a code over relabelings of its message set.

    Each support code is replaced by all (or, in ``sample`` mode, uniformly
    drawn) message permutations: the permuted code encodes message i with
    the original codeword of tau(i) and decodes with the matching element
    order. The result has equal per-message success for every channel, at
    the original average, since averaging over tau uniformizes the index.
    """
    if isinstance(code, DeterministicCode):
        code = RandomCode((code,), np.array([1.0]))
    if not isinstance(code, RandomCode):
        raise ValidationError("permutation_symmetrize: expected a code")
    m = code.message_count

    def permuted(det: DeterministicCode, tau) -> DeterministicCode:
        encoder = tuple(det.encoder[tau[i]] for i in range(m))
        decoder = Povm(tuple(det.decoder.elements[tau[i]] for i in range(m)))
        return DeterministicCode(det.l, encoder, decoder)

    if mode == "exact":
        total = math.factorial(m) * len(code.support)
        if total > budget:
            raise BudgetExceeded(
                f"permutation_symmetrize: {total} permuted codes exceed budget "
                f"{budget}; use sampling"
            )
        support, weights = [], []
        for w, det in zip(code.weights, code.support):
            for tau in itertools.permutations(range(m)):
                support.append(permuted(det, tau))
                weights.append(w / math.factorial(m))
        return RandomCode(tuple(support), np.array(weights))
    if mode == "sample":
        if not sample_count or sample_count < 1:
            raise ValidationError("permutation_symmetrize: sample_count required")
        rng = np.random.Generator(np.random.Philox(0 if seed is None else seed))
        support, weights = [], []
        for w, det in zip(code.weights, code.support):
            for _ in range(sample_count):
                tau = tuple(rng.permutation(m))
                support.append(permuted(det, tau))
                weights.append(w / sample_count)
        return RandomCode(tuple(support), np.array(weights))
    raise ValidationError(f"permutation_symmetrize: unknown mode {mode!r}")


def random_code_reduction(
    code: RandomCode,
    avqc: Avqc,
    l: int,
    sample_count: int,
    eps: float,
    seed: int,
    budget: int = EXHAUSTIVE_BUDGET,
) -> tuple[list, bool]:
    """Replace a random code by finitely many sampled deterministic codes.

    Draws ``sample_count`` support codes i.i.d. from the code's weights and
    verifies exhaustively that the sampled uniform mixture keeps every
    per-message success above 1 - eps for every state sequence. Requires
    eps > 2 * eps_l, where eps_l is the input code's worst-case per-message
    error; below that margin the sampled-mixture guarantee has no content.
    """
    if code.l != l:
        raise DimensionMismatch(f"random_code_reduction: code has l={code.l}, not {l}")
    if not 0.0 < eps < 1.0:
        raise ValidationError("random_code_reduction: eps must lie in (0, 1)")
    if sample_count < 1:
        raise ValidationError("random_code_reduction: sample_count must be >= 1")
    l_, d_in, d_out = _code_shape(code)
    _check_code_dims(avqc, l_, d_in, d_out)
    count = len(avqc.states) ** l
    if count > budget:
        raise BudgetExceeded(
            f"random_code_reduction: {count} sequences exceed budget {budget}"
        )
    seqs = list(itertools.product(avqc.states, repeat=l))
    # success[j, seq_index, i] for each support code j
    success = np.empty((len(code.support), len(seqs), code.message_count))
    for j, det in enumerate(code.support):
        for si, seq in enumerate(seqs):
            success[j, si] = _det_success([avqc.channels[s] for s in seq], det)
    mixed = np.einsum("j,jsi->si", code.weights, success)
    eps_l = 1.0 - float(mixed.min())
    if eps <= 2.0 * eps_l:
        raise ValidationError(
            f"random_code_reduction: eps={eps} must exceed twice the code's "
            f"worst-case per-message error {eps_l:.6f}"
        )
    rng = np.random.Generator(np.random.Philox(seed))
    draws = rng.choice(len(code.support), size=sample_count, p=np.asarray(code.weights))
    sampled_mean = success[draws].mean(axis=0)
    verified = bool(sampled_mean.min() >= 1.0 - eps - 1e-12)
    return [code.support[j] for j in draws], verified


def two_phase_schedule(l: int, c: float) -> tuple[int, int]:
    """Block split (m, l - m) with m = floor((2 / c) * log2 l).

    ``c`` is the rate constant of the first-phase code; the schedule keeps
    the first phase long enough to ship l^2 messages at rate c/2 while its
    share of the block vanishes with l.
    """
    if c <= 0.0:
        raise ValidationError("two_phase_schedule: c must be positive")
    if l < 2:
        raise ValidationError("two_phase_schedule: l must be >= 2")
    m = int(math.floor((2.0 / c) * math.log2(l)))
    if m < 1 or m >= l:
        raise ValidationError(
            f"two_phase_schedule: degenerate split m={m} for l={l}, c={c}"
        )
    return m, l - m


def compose_two_phase(
    cr_code: CorrelatedCode, payload: RandomCode, target_l: int
) -> CorrelatedCode:
    """Chain a correlated code into the shared-randomness slot of a mixture.

    The first ``cr_code.l`` channel uses ship a uniformly drawn support
    index of ``payload``; the remaining uses carry the payload codeword of
    that support code. Encoder states are the index-averaged products

        sum_i (1/k) cr_state(x, i) (x) payload_i(j)

    and decoder elements chain the index measurement into the matching
    payload measurement. If each phase has worst-case average success at
    least 1 - delta and 1 - eps, the composition has at least 1 - delta - eps.
    """
    k = len(payload.support)
    if payload.l + cr_code.l != target_l:
        raise DimensionMismatch(
            f"compose_two_phase: phases {cr_code.l} + {payload.l} != {target_l}"
        )
    if float(np.max(np.abs(payload.weights - 1.0 / k))) > TOL_PROB:
        raise ValidationError(
            "compose_two_phase: payload weights must be uniform over the support"
        )
    if cr_code.message_count < k:
        raise ValidationError(
            f"compose_two_phase: first phase carries {cr_code.message_count} "
            f"messages, needs at least {k}"
        )
    m_count = payload.message_count
    n_total = target_l // cr_code.r
    if n_total < cr_code.n:
        raise ValidationError("compose_two_phase: target block shorter than phase 1")
    if len(cr_code.source.x_alphabet) ** n_total > ENUM_BUDGET:
        raise BudgetExceeded("compose_two_phase: sender observation space too large")
    if len(cr_code.source.y_alphabet) ** n_total > ENUM_BUDGET:
        raise BudgetExceeded("compose_two_phase: receiver observation space too large")

    shared_enc: dict = {}
    for x_head, cr_states in cr_code.encoders.items():
        rows = []
        for j in range(m_count):
            acc = None
            for i, det in enumerate(payload.support):
                part = np.kron(cr_states[i].matrix, det.encoder[j].matrix) / k
                acc = part if acc is None else acc + part
            rows.append(DensityMatrix(acc))
        shared_enc[x_head] = tuple(rows)
    payload_dec_dim = payload.support[0].decoder.dim
    shared_dec: dict = {}
    for y_head, cr_povm in cr_code.decoders.items():
        # index outcomes beyond the used support decode to message 0
        leftover = None
        for i in range(k, cr_code.message_count):
            part = np.kron(cr_povm.elements[i], np.eye(payload_dec_dim))
            leftover = part if leftover is None else leftover + part
        elements = []
        for j in range(m_count):
            acc = None
            for i, det in enumerate(payload.support):
                part = np.kron(cr_povm.elements[i], det.decoder.elements[j])
                acc = part if acc is None else acc + part
            if j == 0 and leftover is not None:
                acc = acc + leftover
            elements.append(acc)
        shared_dec[y_head] = Povm(tuple(elements))

    encoders = {}
    for x_full in itertools.product(cr_code.source.x_alphabet, repeat=n_total):
        encoders[x_full] = shared_enc[x_full[: cr_code.n]]
    decoders = {}
    for y_full in itertools.product(cr_code.source.y_alphabet, repeat=n_total):
        decoders[y_full] = shared_dec[y_full[: cr_code.n]]
    return CorrelatedCode(target_l, cr_code.r, cr_code.source, encoders, decoders)


def _sqrt_psd(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(hermitize(mat))
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def compose_two_phase_entanglement(
    cr_code: CorrelatedCode,
    payload_blocks: Sequence,
    target_l: int,
) -> CorrelatedEntanglementCode:
    """Entanglement-transmission analogue of ``compose_two_phase``.

    ``payload_blocks`` is a sequence of (encoder, decoder) channel pairs on
    a common code space. The composed encoder sends a uniformly drawn index
    through the correlated code while the matching block encoder carries the
    code-space input; the composed decoder measures the index block and runs
    the selected block decoder. Both directions are channels (built in Kraus
    form and revalidated), so worst-case entanglement fidelity composes just
    like success probability.
    """
    blocks = [(enc, dec) for enc, dec in payload_blocks]
    k = len(blocks)
    if k < 1:
        raise ValidationError("compose_two_phase_entanglement: no payload blocks")
    code_dims = {enc.dim_in for enc, _ in blocks} | {dec.dim_out for _, dec in blocks}
    if len(code_dims) != 1:
        raise DimensionMismatch(
            "compose_two_phase_entanglement: blocks disagree on the code space"
        )
    code_dim = code_dims.pop()
    if cr_code.message_count < k:
        raise ValidationError(
            "compose_two_phase_entanglement: first phase carries too few messages"
        )
    block_in = {enc.dim_out for enc, _ in blocks}
    block_out = {dec.dim_in for _, dec in blocks}
    if len(block_in) != 1 or len(block_out) != 1:
        raise DimensionMismatch(
            "compose_two_phase_entanglement: blocks disagree on the channel block"
        )
    n_total = target_l // cr_code.r
    if n_total < cr_code.n:
        raise ValidationError(
            "compose_two_phase_entanglement: target block shorter than phase 1"
        )

    shared_enc: dict = {}
    for x_head, cr_states in cr_code.encoders.items():
        kraus = []
        for i, (enc, _) in enumerate(blocks):
            vals, vecs = np.linalg.eigh(hermitize(np.asarray(cr_states[i].matrix)))
            for r_idx in range(vals.size):
                lam = float(vals[r_idx])
                if lam <= 1e-15:
                    continue
                col = (math.sqrt(lam) * vecs[:, r_idx]).reshape(-1, 1)
                for op in enc.kraus:
                    kraus.append(np.kron(col, op) / math.sqrt(k))
        shared_enc[x_head] = QuantumChannel(tuple(kraus))
    shared_dec: dict = {}
    for y_head, cr_povm in cr_code.decoders.items():
        kraus = []
        for i in range(cr_code.message_count):
            root = _sqrt_psd(np.asarray(cr_povm.elements[i]))
            block_dec = blocks[i][1] if i < k else blocks[0][1]
            for r_idx in range(root.shape[0]):
                row = root[r_idx : r_idx + 1, :]
                for op in block_dec.kraus:
                    kraus.append(np.kron(row, op))
        shared_dec[y_head] = QuantumChannel(tuple(kraus))

    encoders = {}
    for x_full in itertools.product(cr_code.source.x_alphabet, repeat=n_total):
        encoders[x_full] = shared_enc[x_full[: cr_code.n]]
    decoders = {}
    for y_full in itertools.product(cr_code.source.y_alphabet, repeat=n_total):
        decoders[y_full] = shared_dec[y_full[: cr_code.n]]
    return CorrelatedEntanglementCode(
        target_l, cr_code.r, cr_code.source, code_dim, encoders, decoders
    )
