"""Plain-loop reference implementations used to cross-check the pipeline.

Everything here is computed directly from the definitions with Python loops
and scalar arithmetic, sharing no code with the package.  The only shared
piece is the published zero-volatility contract: a window is undefined when
its return variance is at or below mean-square × REL_VAR_FLOOR, so both
sides agree on *which* windows exist before values are compared.
"""

from __future__ import annotations

import itertools
import math

REL_VAR_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# conditional-correlation chain


def log_return_rows(close_rows, horizon):
    out = []
    for closes in close_rows:
        out.append([
            math.log(closes[t + horizon]) - math.log(closes[t])
            for t in range(len(closes) - horizon)
        ])
    return out


def window_moments(values):
    m = len(values)
    mean = sum(values) / m
    meansq = sum(v * v for v in values) / m
    var = max(meansq - mean * mean, 0.0)
    defined = var > meansq * REL_VAR_FLOOR
    return mean, var, defined


def pair_corr(rx, ry, t, span):
    wx = rx[t: t + span + 1]
    wy = ry[t: t + span + 1]
    mx, vx, dx = window_moments(wx)
    my, vy, dy = window_moments(wy)
    if not (dx and dy):
        return None
    cov = sum(a * b for a, b in zip(wx, wy)) / (span + 1) - mx * my
    return cov / (math.sqrt(vx) * math.sqrt(vy))


def market_corr(return_rows, t, span):
    vals = []
    for i in range(len(return_rows)):
        for j in range(i + 1, len(return_rows)):
            s = pair_corr(return_rows[i], return_rows[j], t, span)
            if s is not None:
                vals.append(s)
    if not vals:
        return None
    return sum(vals) / len(vals)


def is_member(index_return, level):
    if level < 0.0:
        return index_return < level
    return index_return >= level


def curve_point(close_rows, index_closes, level, dt1, dt2, horizon):
    """C(ρ, Δt) from the definitions: (value, n_samples, n_excluded) or None."""
    returns = log_return_rows(close_rows, horizon)
    index_log = [math.log(c) for c in index_closes]
    n_returns = len(close_rows[0]) - horizon
    span_means, total, excluded = [], 0, 0
    for span in range(dt1, dt2 + 1):
        c0_values = []
        for t in range(max(n_returns - span, 0)):
            if is_member(index_log[t + span] - index_log[t], level):
                s0 = market_corr(returns, t, span)
                if s0 is not None:
                    c0_values.append(s0)
        if c0_values:
            span_means.append(sum(c0_values) / len(c0_values))
            total += len(c0_values)
        else:
            excluded += 1
    if not span_means:
        return None
    return sum(span_means) / len(span_means), total, excluded


def pair_conditional(close_rows, index_closes, x, y, level, dt1, dt2, horizon):
    """C_(x,y)(ρ, Δt) from the definitions: (value, n_members) or None."""
    returns = log_return_rows(close_rows, horizon)
    index_log = [math.log(c) for c in index_closes]
    n_returns = len(close_rows[0]) - horizon
    span_means, total = [], 0
    for span in range(dt1, dt2 + 1):
        values = []
        for t in range(max(n_returns - span, 0)):
            if is_member(index_log[t + span] - index_log[t], level):
                s = pair_corr(returns[x], returns[y], t, span)
                if s is not None:
                    values.append(s)
        if values:
            span_means.append(sum(values) / len(values))
            total += len(values)
    if not span_means:
        return None, total
    return sum(span_means) / len(span_means), total


def chi(c_minus, c_plus, epsilon=1e-6):
    if abs(c_plus) <= epsilon:
        return None
    return (c_minus - c_plus) / abs(c_plus)


# ---------------------------------------------------------------------------
# first passage


def first_passage(values, level):
    """Brute-force forward scan from every start: ([(t0, tau), ...], censored)."""
    n = len(values)
    hits, censored = [], 0
    for t0 in range(n - 1):
        threshold = values[t0] + level
        tau = None
        for k in range(t0 + 1, n):
            crossed = values[k] >= threshold if level > 0 else values[k] <= threshold
            if crossed:
                tau = k - t0
                break
        if tau is None:
            censored += 1
        else:
            hits.append((t0, tau))
    return hits, censored


# ---------------------------------------------------------------------------
# rank-sum permutation distribution


def exact_rank_sum(sample_a, sample_b):
    """Standardize A's rank sum against the exact permutation distribution.

    Tie-free samples only.  Enumerates all C(n, n_a) rank placements and
    returns (z, p_le, p_ge): the exactly standardized statistic plus the
    exact one-sided tail probabilities of the observed rank sum.
    """
    pooled = sorted(list(sample_a) + list(sample_b))
    if len(set(pooled)) != len(pooled):
        raise ValueError("exact oracle requires tie-free data")
    rank = {v: i + 1 for i, v in enumerate(pooled)}
    w_obs = sum(rank[v] for v in sample_a)
    n, n_a = len(pooled), len(sample_a)
    sums = [sum(c) for c in itertools.combinations(range(1, n + 1), n_a)]
    mean = sum(sums) / len(sums)
    var = sum((w - mean) ** 2 for w in sums) / len(sums)
    z = (w_obs - mean) / math.sqrt(var)
    p_le = sum(w <= w_obs for w in sums) / len(sums)
    p_ge = sum(w >= w_obs for w in sums) / len(sums)
    return z, p_le, p_ge
