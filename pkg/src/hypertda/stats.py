"""Correlation, partition similarity and two-sample tests."""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np
from scipy.special import gammaln, kolmogorov
from scipy.stats import norm, rankdata

EXACT_MAX_GROUP = 8


class StatsError(ValueError):
    pass


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError("pearson needs two equal-length vectors")
    if x.size < 2:
        raise StatsError("pearson needs at least two observations")
    xc, yc = x - x.mean(), y - y.mean()
    sx, sy = np.sqrt(xc @ xc), np.sqrt(yc @ yc)
    if sx == 0 or sy == 0:
        raise StatsError("pearson is undefined for a constant vector")
    return float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))


# ---------------------------------------------------------------------------
# adjusted mutual information
# ---------------------------------------------------------------------------

def canonical_labels(labels, singletons_distinct: bool = True) -> np.ndarray:
    """Dense ids in order of first appearance; -1 entries become their own
    clusters unless ``singletons_distinct`` is False."""
    lab = np.asarray(labels)
    out = np.empty(lab.size, dtype=np.int64)
    ids: dict = {}
    nxt = 0
    for i, v in enumerate(lab.tolist()):
        if v == -1 and singletons_distinct:
            out[i] = nxt
            nxt += 1
            continue
        if v not in ids:
            ids[v] = nxt
            nxt += 1
        out[i] = ids[v]
    return out


def _contingency(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ka, kb = a.max() + 1, b.max() + 1
    table = np.zeros((ka, kb), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    return table


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def _expected_mi(a_sums: np.ndarray, b_sums: np.ndarray, n: int) -> float:
    """E[MI] under the hypergeometric (fixed-marginals permutation) model."""
    emi = 0.0
    lg_n = gammaln(n + 1)
    for ai in a_sums:
        for bj in b_sums:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1)
            term = nij / n * (np.log(n * nij) - np.log(ai * bj))
            logp = (
                gammaln(ai + 1) + gammaln(bj + 1) + gammaln(n - ai + 1) + gammaln(n - bj + 1)
                - lg_n - gammaln(nij + 1) - gammaln(ai - nij + 1)
                - gammaln(bj - nij + 1) - gammaln(n - ai - bj + nij + 1)
            )
            emi += float((term * np.exp(logp)).sum())
    return emi


def ami(a, b, drop_singletons: bool = False) -> float:
    """Adjusted mutual information with arithmetic-mean normalisation.

    Label -1 marks unassigned vertices: each is its own cluster, or with
    ``drop_singletons`` those vertices are removed from both partitions.
    Returns 0 when the normaliser vanishes.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise StatsError("partitions have different lengths")
    if drop_singletons:
        keep = (a != -1) & (b != -1)
        a, b = a[keep], b[keep]
    n = a.size
    if n == 0:
        return 0.0
    a = canonical_labels(a)
    b = canonical_labels(b)
    # fixed argument order makes ami(a, b) == ami(b, a) bit for bit
    if b.tolist() < a.tolist():
        a, b = b, a
    table = _contingency(a, b)
    a_sums = table.sum(axis=1)
    b_sums = table.sum(axis=0)
    nz = table > 0
    nij = table[nz]
    outer = np.outer(a_sums, b_sums)[nz]
    mi = float((nij / n * (np.log(n * nij) - np.log(outer))).sum())
    h_a, h_b = _entropy(a_sums), _entropy(b_sums)
    emi = _expected_mi(a_sums, b_sums, n)
    denom = 0.5 * (h_a + h_b) - emi
    if abs(denom) < 1e-15 or (len(a_sums) == 1 or len(b_sums) == 1):
        return 0.0
    return float((mi - emi) / denom)


# ---------------------------------------------------------------------------
# two-sample tests
# ---------------------------------------------------------------------------

def mann_whitney_u(x, y) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    ranks = rankdata(np.concatenate([x, y]))
    return float(ranks[: x.size].sum() - x.size * (x.size + 1) / 2)


def _exact_p(x: np.ndarray, y: np.ndarray) -> float:
    pooled = np.concatenate([x, y])
    ranks = rankdata(pooled)
    n, m = x.size, y.size
    centre = n * m / 2
    u_obs = abs(ranks[:n].sum() - n * (n + 1) / 2 - centre)
    total = comb(n + m, n)
    hits = 0
    offset = n * (n + 1) / 2
    for idx in combinations(range(n + m), n):
        u = ranks[list(idx)].sum() - offset
        if abs(u - centre) >= u_obs - 1e-9:
            hits += 1
    return hits / total


def _normal_p(x: np.ndarray, y: np.ndarray) -> float:
    n, m = x.size, y.size
    pooled = np.concatenate([x, y])
    u = mann_whitney_u(x, y)
    mu = n * m / 2
    _, counts = np.unique(pooled, return_counts=True)
    N = n + m
    tie = float((counts ** 3 - counts).sum())
    var = n * m / 12 * ((N + 1) - tie / (N * (N - 1)))
    if var <= 0:
        return 1.0
    z = (abs(u - mu) - 0.5) / np.sqrt(var)
    return float(min(1.0, 2 * norm.sf(max(z, 0.0))))


def mann_whitney(x, y) -> float:
    """Two-sided Mann-Whitney U p-value.

    Exact enumeration when both groups have at most 8 members (ties handled
    through mid-ranks), otherwise the normal approximation with tie and
    continuity corrections.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0 or y.size == 0:
        raise StatsError("Mann-Whitney needs two non-empty samples")
    if x.size <= EXACT_MAX_GROUP and y.size <= EXACT_MAX_GROUP:
        return _exact_p(x, y)
    return _normal_p(x, y)


def ks_statistic(x, y) -> float:
    x = np.sort(np.asarray(x, dtype=float).ravel())
    y = np.sort(np.asarray(y, dtype=float).ravel())
    grid = np.concatenate([x, y])
    fx = np.searchsorted(x, grid, side="right") / x.size
    fy = np.searchsorted(y, grid, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


def ks_two_sample(x, y) -> tuple[float, float]:
    """Two-sample KS statistic and asymptotic p-value (effective size nm/(n+m))."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0 or y.size == 0:
        raise StatsError("KS test needs two non-empty samples")
    D = ks_statistic(x, y)
    en = x.size * y.size / (x.size + y.size)
    return D, float(kolmogorov(np.sqrt(en) * D))


def rank_normalize(values) -> np.ndarray:
    """Map a sample to (0, 1] by average rank over sample size."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return v
    return rankdata(v) / v.size


def concatenated_ks(samples_a: dict, samples_b: dict) -> tuple[float, float]:
    """KS test between two groups after rank-normalising each metric over
    the pooled groups and concatenating the metrics."""
    keys = sorted(samples_a)
    xa, xb = [], []
    for key in keys:
        a = np.asarray(samples_a[key], dtype=float)
        b = np.asarray(samples_b[key], dtype=float)
        r = rank_normalize(np.concatenate([a, b]))
        xa.append(r[: a.size])
        xb.append(r[a.size:])
    return ks_two_sample(np.concatenate(xa), np.concatenate(xb))
