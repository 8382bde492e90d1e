"""Rank-based agreement of feature importances across models.

Each model's global importance vector becomes a rank row (rank 1 = most
important, ties averaged). Across models we report per-feature mean rank and
rank spread, pairwise Spearman correlation, and pairwise top-k overlap.
"""

import math
import warnings
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .exceptions import ConfigError, UsageError

ROBUST = "robust"
MODERATE = "moderate"
MODEL_DEPENDENT = "model-dependent"
DEFAULT_THRESHOLDS = (0.25, 0.75)


def average_ranks(values, descending=True):
    """Rank positions starting at 1; exactly equal values share their mean position."""
    values = np.asarray(values, dtype=np.float64)
    key = -values if descending else values
    order = np.argsort(key, kind="stable")
    ranks = np.empty(values.shape[0])
    sorted_key = key[order]
    start = 0
    for stop in range(1, values.shape[0] + 1):
        if stop == values.shape[0] or sorted_key[stop] != sorted_key[start]:
            ranks[order[start:stop]] = 0.5 * (start + 1 + stop)
            start = stop
    return ranks


def rank_features(importance):
    """Descending ranks of a :class:`GlobalImportance` (or a raw score vector)."""
    phi = getattr(importance, "phi_bar", importance)
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 1 or phi.shape[0] < 1:
        raise UsageError("importance must be a non-empty vector")
    return average_ranks(phi)


@dataclass(frozen=True)
class RankMatrix:
    model_names: tuple
    feature_names: tuple
    ranks: np.ndarray  # (M, d)

    @property
    def n_models(self):
        return self.ranks.shape[0]

    @property
    def n_features(self):
        return self.ranks.shape[1]

    def column(self, feature):
        return self.ranks[:, self.feature_names.index(feature)]


def build_rank_matrix(importances):
    """Stack ``(model_name, GlobalImportance)`` pairs into a :class:`RankMatrix`."""
    importances = list(importances)
    if len(importances) < 2:
        raise UsageError(f"a rank matrix needs at least 2 models, got {len(importances)}")
    names = tuple(name for name, _ in importances)
    if len(set(names)) != len(names):
        raise UsageError("duplicate model names")
    features = tuple(importances[0][1].feature_names)
    for name, gi in importances:
        if tuple(gi.feature_names) != features:
            raise UsageError(f"model {name!r} has features {tuple(gi.feature_names)}, expected {features}")
    ranks = np.vstack([rank_features(gi) for _, gi in importances])
    return RankMatrix(model_names=names, feature_names=features, ranks=ranks)


@dataclass(frozen=True)
class FeatureReliability:
    feature: str
    mean_rank: float
    std_rank: float
    label: str = ""


def classify(stats, thresholds=DEFAULT_THRESHOLDS):
    """Label each feature robust / moderate / model-dependent by its rank spread.

    ``sigma <= robust_max`` is robust, ``sigma >= dependent_min`` is
    model-dependent, anything between is moderate.
    """
    robust_max, dependent_min = thresholds
    if not robust_max < dependent_min:
        raise ConfigError(f"thresholds must satisfy robust_max < dependent_min, got {thresholds}")
    out = []
    for s in stats:
        if s.std_rank <= robust_max:
            label = ROBUST
        elif s.std_rank >= dependent_min:
            label = MODEL_DEPENDENT
        else:
            label = MODERATE
        out.append(replace(s, label=label))
    return out


def rank_stats(rm, thresholds=DEFAULT_THRESHOLDS, ddof=0):
    """Mean and standard deviation (population by default) of each feature's ranks."""
    means = rm.ranks.mean(axis=0)
    stds = rm.ranks.std(axis=0, ddof=ddof)
    stats = [FeatureReliability(f, float(mu), float(sd)) for f, mu, sd in zip(rm.feature_names, means, stds)]
    return classify(stats, thresholds)


def spearman(rank_a, rank_b):
    """Pearson correlation of two rank vectors; ``nan`` if either is fully tied."""
    a = np.asarray(rank_a, dtype=np.float64)
    b = np.asarray(rank_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.shape[0] < 2:
        raise UsageError(f"spearman needs equal-length vectors of length >= 2, got {a.shape}, {b.shape}")
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt((da @ da) * (db @ db))
    if denom == 0.0:
        return math.nan
    return float(np.clip((da @ db) / denom, -1.0, 1.0))


def top_k_set(rank_row, k):
    """Indices of the ``k`` best-ranked features; equal ranks favour the lower index."""
    rank_row = np.asarray(rank_row)
    order = np.lexsort((np.arange(rank_row.shape[0]), rank_row))
    return frozenset(int(j) for j in order[:k])


def top_k_agreement(rank_a, rank_b, k):
    return len(top_k_set(rank_a, k) & top_k_set(rank_b, k)) / k


@dataclass(frozen=True)
class AgreementStats:
    """Pairwise agreement between the rank rows of a :class:`RankMatrix`.

    ``topk`` maps ``k`` to ``(mean, std)`` of the pairwise overlap fraction;
    ``modal_topk`` maps ``k`` to the share of models whose top-k set equals
    the most common one.
    """

    pairwise_spearman: np.ndarray
    mean_spearman: float
    topk: dict
    modal_topk: dict = field(default_factory=dict)
    n_undefined_pairs: int = 0
    boundary_ties: tuple = ()


def pairwise_agreement(rm, ks=(1, 2, 3)):
    M, d = rm.ranks.shape
    if M < 2:
        raise UsageError("pairwise agreement needs at least 2 models")
    for k in ks:
        if not 1 <= k <= d:
            raise ConfigError(f"top-k size {k} outside [1, {d}]")
    rho = np.eye(M)
    pairs = list(combinations(range(M), 2))
    undefined = 0
    for a, b in pairs:
        r = spearman(rm.ranks[a], rm.ranks[b])
        rho[a, b] = rho[b, a] = r
        undefined += math.isnan(r)
    if undefined:
        warnings.warn(f"{undefined} model pairs have an undefined Spearman correlation and are excluded")
    defined = [rho[a, b] for a, b in pairs if not math.isnan(rho[a, b])]
    mean_rho = float(np.mean(defined)) if defined else math.nan

    topk, modal = {}, {}
    ties = []
    for k in ks:
        sets = [top_k_set(row, k) for row in rm.ranks]
        overlaps = np.array([len(sets[a] & sets[b]) / k for a, b in pairs])
        topk[k] = (float(overlaps.mean()), float(overlaps.std()))
        counts = {}
        for s in sets:
            counts[s] = counts.get(s, 0) + 1
        modal[k] = max(counts.values()) / M
        if k < d:
            for name, row in zip(rm.model_names, rm.ranks):
                srt = np.sort(row)
                if srt[k - 1] == srt[k]:
                    ties.append((name, k))
    return AgreementStats(
        pairwise_spearman=rho,
        mean_spearman=mean_rho,
        topk=topk,
        modal_topk=modal,
        n_undefined_pairs=undefined,
        boundary_ties=tuple(ties),
    )


def family_agreement(agreement, families):
    """Mean pairwise Spearman within and between model families.

    ``families`` lists each model's family in rank-matrix row order. Returns
    ``{(family_a, family_b): mean}`` with ``family_a <= family_b``.
    """
    rho = agreement.pairwise_spearman
    buckets = {}
    for a, b in combinations(range(len(families)), 2):
        if math.isnan(rho[a, b]):
            continue
        key = tuple(sorted((families[a], families[b])))
        buckets.setdefault(key, []).append(rho[a, b])
    return {key: float(np.mean(vals)) for key, vals in sorted(buckets.items())}
