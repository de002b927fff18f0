"""Provable valuation floors for truncated operators.

Everything rests on three decay facts about the series involved (ord of the
coefficient at u against the weight w(u)) and on subadditivity of w:

* F0 (or G) has decay b_F, so the Frobenius entry at (v, u) has
  ord >= b_F * (q w(v) - w(u));
* E_i H has decay 1/(p-1), so the hat-twisted derivation at (z, u) has
  ord >= (w(z) - w(u)) / (p-1);
* R and R^{-1} have decay b_0 = min(1/(p-1), (p-1)/p).

A truncation to the basis B_W (points with w <= W) drops the intermediate
indices of weight >= W_next, the next weight value above W.  Residual checks
are made on the safe sub-basis B_{W'} with W' <= W/2, reading outputs on B_W.
All floors are ord values (ord p = 1) and are capped at the working precision.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


def b_zero(p: int) -> Fraction:
    return min(Fraction(1, p - 1), Fraction(p - 1, p))


def b_frobenius(p: int, q: int) -> Fraction:
    """Decay of F0 = exp(H(x) - H(x^q))."""
    return Fraction(p, q * (p - 1))


def b_dwork(p: int, q: int) -> Fraction:
    """Decay of G = exp(pi (f(x) - f(x^q)))."""
    return Fraction(p - 1, p * q)


def quantize(x: Fraction, p: int) -> Fraction:
    """Round a floor up to the valuation grid (1/(p-1))Z; valuations live there."""
    return Fraction(math.ceil(Fraction(x) * (p - 1)), p - 1)


def _cap(x, N) -> Fraction:
    return min(Fraction(N), Fraction(x))


def safe_weight(weights: Sequence[Fraction], W) -> Fraction:
    """Largest weight value <= W/2 (the safe sub-basis cutoff)."""
    half = Fraction(W) / 2
    return max(w for w in weights if w <= half)


def chain_map_floor(p, a, N, b_F, W, W_next, W_safe) -> Fraction:
    """alpha D_hat_i - q D_hat_i alpha on B_{W'} -> B_W."""
    return _cap(min(Fraction(W_next - W_safe, p - 1), a + b_F * (q_of(p, a) * W_next - W_safe)), N)


def q_of(p: int, a: int) -> int:
    return p**a


def conjugation_floor(p, a, N, b_F, W, W_next, W_safe) -> Fraction:
    """alpha_1 - R alpha R^{-1} on B_{W'} -> B_W."""
    return _cap(min(b_zero(p) * (W_next - W_safe), b_F * (q_of(p, a) * W_next - W)), N)


def derivation_conjugation_floor(p, N, W, W_next, W_safe, W_mid, W_mid_next) -> Fraction:
    """D_i - R D_hat_i R^{-1} on B_{W'} -> B_W, with intermediate basis B_{W_mid}."""
    return _cap(min(b_zero(p) * (W_next - W_safe), Fraction(W_mid_next - W, p - 1)), N)


def commutator_floor(p, N, W_next, W_safe) -> Fraction:
    """[D_hat_i, D_hat_j] and the Koszul d^2 on B_{W'} -> B_W."""
    return _cap(Fraction(W_next - W_safe, p - 1), N)


def pi_commutator_floor(N, W, W_safe, max_support_weight=1) -> Fraction:
    """[D_i, D_j]: multiplication by pi E_i f only raises weight by <= max_support_weight."""
    if W_safe + max_support_weight <= W:
        return Fraction(N)
    return Fraction(0)


def inverse_pair_floor(p, N, W_next) -> Fraction:
    """(R_W R^{-1}_W - 1) at weights <= W."""
    return _cap(b_zero(p) * W_next, N)


def fredholm_floor(b, q, W_next, weights: Sequence[Fraction], s: int, N) -> Fraction:
    """Floor for the t^s coefficient of det(1 - t A) after truncation to B_W.

    A principal s-minor involving an index of weight >= W_next has
    ord >= b (q-1) (sum of its index weights).
    """
    if s == 0:
        return Fraction(N)
    ws = sorted(weights)[: s - 1]
    return _cap(b * (q - 1) * (W_next + sum(ws, Fraction(0))), N)


def auto_cutoff_target(b, q, N) -> Fraction:
    """W_next must reach this for the t^1 coefficient to be certified to N."""
    return Fraction(N) / (b * (q - 1))


def auto_cutoff(geometry, b, q, N) -> tuple[Fraction, Fraction]:
    """Smallest cutoff W (an attained weight) whose next weight meets the target.

    Returns (W, W_next).
    """
    target = auto_cutoff_target(b, q, N)
    W = Fraction(0)
    while True:
        nxt = geometry.next_weight(W)
        if nxt >= target:
            return W, nxt
        W = nxt
