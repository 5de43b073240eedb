"""Generalized erasure channel model.

A generalized erasure channel erases every transmitted symbol with the same
input-independent probability ``p_star`` and otherwise passes the symbol
through an inner discrete memoryless channel.  This module holds the channel
data types, the sampler, the capacity solver for the inner channel
(alternating maximization with per-iteration upper/lower capacity bounds) and
the exact entropy computations the OT protocol's parameter derivation needs.

All probabilities are double precision; all entropies are in bits.
Sampling takes an explicit seeded generator so that runs are replayable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

ROW_SUM_TOL = 1e-12


class MalformedChannel(ValueError):
    """Transition matrix is not stochastic or p_star is out of range."""


class SymbolOutOfRange(ValueError):
    """An input or output symbol falls outside the declared alphabet."""


class NoConvergence(RuntimeError):
    """Capacity iteration did not reach the requested tolerance."""


@dataclass(frozen=True)
class Dmc:
    """Discrete memoryless channel given by its transition matrix.

    ``transition[x, y]`` is the probability of output ``y`` on input ``x``.
    Rows must sum to 1 within ``ROW_SUM_TOL``; use :func:`validate_gec` (or
    :func:`validate_dmc`) to enforce this.
    """

    transition: np.ndarray

    @property
    def input_alphabet_size(self) -> int:
        return self.transition.shape[0]

    @property
    def output_alphabet_size(self) -> int:
        return self.transition.shape[1]


@dataclass(frozen=True)
class GecSpec:
    """Inner channel plus erasure probability.

    The erasure symbol is the single output index just past the inner
    channel's output alphabet.  (A set of erasure symbols would carry no
    extra information since their probabilities cannot depend on the input,
    so one symbol suffices.)
    """

    inner: Dmc
    erasure_prob: float

    @property
    def erasure_symbol(self) -> int:
        return self.inner.output_alphabet_size


@dataclass(frozen=True)
class InputDistribution:
    probs: np.ndarray

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class ChannelStats:
    """Entropy quantities of an input distribution over an inner channel.

    ``capacity_bits`` is the mutual information between the input and the
    non-erased output at the given distribution; at the maximizing
    distribution it equals the Shannon capacity of the inner channel.
    """

    capacity_bits: float
    h_x: float
    h_x_given_y0: float


def identity_dmc(k: int) -> Dmc:
    return Dmc(np.eye(k))


def bsc(crossover: float) -> Dmc:
    q = float(crossover)
    return Dmc(np.array([[1 - q, q], [q, 1 - q]]))


def uniform_input(k: int) -> InputDistribution:
    return InputDistribution(np.full(k, 1.0 / k))


def validate_dmc(dmc: Dmc) -> None:
    t = np.asarray(dmc.transition, dtype=float)
    if t.ndim != 2 or t.shape[0] < 1 or t.shape[1] < 1:
        raise MalformedChannel("transition matrix must be 2-D and non-empty")
    if np.any(t < 0) or np.any(t > 1):
        raise MalformedChannel("transition probabilities must lie in [0, 1]")
    rowsums = t.sum(axis=1)
    bad = np.abs(rowsums - 1.0) > ROW_SUM_TOL
    if np.any(bad):
        raise MalformedChannel(f"rows {np.nonzero(bad)[0].tolist()} do not sum to 1")


def validate_gec(spec: GecSpec) -> None:
    """Check that the inner matrix is stochastic and p_star lies in (0, 1)."""
    validate_dmc(spec.inner)
    if not (0.0 < spec.erasure_prob < 1.0):
        raise MalformedChannel(f"erasure probability {spec.erasure_prob} not in (0, 1)")


def gec_from_json(doc: dict) -> GecSpec:
    """Build a channel from ``{"inner": [[...]], "p_star": r}``.

    The erasure symbol is implicitly the index just past the inner output
    alphabet.
    """
    try:
        inner = Dmc(np.array(doc["inner"], dtype=float))
        spec = GecSpec(inner=inner, erasure_prob=float(doc["p_star"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedChannel(f"bad channel document: {exc}") from exc
    validate_gec(spec)
    return spec


def gec_to_json(spec: GecSpec) -> dict:
    return {"inner": spec.inner.transition.tolist(), "p_star": spec.erasure_prob}


def load_gec(path: str) -> GecSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return gec_from_json(json.load(fh))


def transmit(spec: GecSpec, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Send the symbol string ``x`` through the channel once per position.

    Each position is independently erased with probability ``erasure_prob``;
    otherwise the output is drawn from the inner channel's row for that
    input symbol.  Erasure positions are decided by draws that do not depend
    on ``x``, so with a fixed generator state the erasure pattern is the
    same for any input string.
    """
    x = np.asarray(x, dtype=np.int64)
    if x.size and (x.min() < 0 or x.max() >= spec.inner.input_alphabet_size):
        raise SymbolOutOfRange("input symbol outside the channel input alphabet")
    n = len(x)
    erased = rng.random(n) < spec.erasure_prob
    u = rng.random(n)
    cum = np.cumsum(spec.inner.transition, axis=1)
    y = (u[:, None] > cum[x]).sum(axis=1)
    y[erased] = spec.erasure_symbol
    return y.astype(np.int64)


def _xlog2x(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * np.log2(v[pos])
    return out


def entropy_bits(p: np.ndarray) -> float:
    return float(-_xlog2x(np.asarray(p, dtype=float)).sum())


def channel_entropies(dmc: Dmc, p: InputDistribution) -> ChannelStats:
    """Exact H(X), H(X|Y) and I(X;Y) in bits from the joint p(x) * W(y|x)."""
    probs = np.asarray(p.probs, dtype=float)
    w = np.asarray(dmc.transition, dtype=float)
    joint = probs[:, None] * w
    q = joint.sum(axis=0)
    h_x = entropy_bits(probs)
    h_y = entropy_bits(q)
    h_xy = float(-_xlog2x(joint).sum())
    h_x_given_y = h_xy - h_y
    return ChannelStats(capacity_bits=h_x - h_x_given_y, h_x=h_x, h_x_given_y0=h_x_given_y)


def capacity_solve(dmc: Dmc, tol: float = 1e-9, max_iter: int = 100_000) -> tuple[InputDistribution, ChannelStats]:
    """Capacity-achieving input distribution of a DMC.

    Alternating maximization: from the current input distribution compute
    the per-input divergences ``d(x) = D(W(.|x) || q)`` against the output
    marginal, which yield the classic sandwich ``log2 sum_x p(x) 2^d(x) <=
    C <= max_x d(x)``.  Iterate ``p(x) <- p(x) 2^d(x) / Z`` until the gap
    drops below ``tol``.

    Parameters
    ----------
    dmc : Dmc
        Validated channel.
    tol : float
        Upper/lower capacity gap at which to stop.
    max_iter : int
        Iteration budget; exceeded budget raises :class:`NoConvergence`.

    Returns
    -------
    (InputDistribution, ChannelStats)
        The maximizing distribution and its exact entropy statistics.
    """
    validate_dmc(dmc)
    w = np.asarray(dmc.transition, dtype=float)
    kx = w.shape[0]
    p = np.full(kx, 1.0 / kx)
    logw = np.where(w > 0, np.log2(np.where(w > 0, w, 1.0)), 0.0)
    for _ in range(max_iter):
        q = p @ w
        # D(W_x || q): terms with W=0 contribute nothing; q>0 wherever W_x>0
        # and p has full support, which the multiplicative update preserves.
        logq = np.where(q > 0, np.log2(np.where(q > 0, q, 1.0)), 0.0)
        d = (w * (logw - logq)).sum(axis=1)
        upper = float(d.max())
        lower = float(np.log2((p * np.exp2(d)).sum()))
        if upper - lower < tol:
            return InputDistribution(p), channel_entropies(dmc, InputDistribution(p))
        p = p * np.exp2(d - d.max())
        p = p / p.sum()
    raise NoConvergence(f"capacity gap above {tol} after {max_iter} iterations")
