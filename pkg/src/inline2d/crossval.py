"""Stratified k-fold cross-validation with scenario-bound estimates.

Refused validation cases never enter an accuracy denominator; they are
reported as a separate refusal rate.  Besides the measured folds, the report
carries two analytic bounds derived from the realized worst fold: the average
if only that fold's observed errors occur (best case) and the average if the
whole fold were lost (worst case).  An adversarial fold mode concentrates all
mini-rule cases into one validation fold so those bounds get stress-tested.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .boxes import DiscoveryConfig, discover
from .dataset import LabeledDataset, ClassLabel
from .mapping import MappingMode, encode
from .rules import RuleSet, from_trace, prune, sequential_assignments


class CVError(ValueError):
    """Raised for invalid fold configurations."""


@dataclass(frozen=True)
class CVConfig:
    k: int = 10
    seed: int = 0
    stratified: bool = True
    adversarial: str = "none"  # "none" | "mini_box_fold"

    def __post_init__(self) -> None:
        if self.k < 2:
            raise CVError("k must be >= 2")
        if self.adversarial not in ("none", "mini_box_fold"):
            raise CVError(f"unknown adversarial mode {self.adversarial!r}")


@dataclass(frozen=True)
class ScenarioEstimate:
    fold_accuracy: float
    average: float


@dataclass(frozen=True)
class FoldResult:
    fold: int
    size: int
    decided: int
    correct: int
    refused: int

    @property
    def accuracy(self) -> float | None:
        return self.correct / self.decided if self.decided else None

    @property
    def refusal_rate(self) -> float:
        return self.refused / self.size if self.size else 0.0


@dataclass
class CVReport:
    config: CVConfig
    folds: list[FoldResult]
    mean_accuracy: float | None
    best_case: float | None
    worst_case: float | None
    worst_fold: int | None
    mini_case_ids: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "k": self.config.k,
            "seed": self.config.seed,
            "stratified": self.config.stratified,
            "adversarial": self.config.adversarial,
            "folds": [
                {
                    "fold": f.fold,
                    "size": f.size,
                    "decided": f.decided,
                    "correct": f.correct,
                    "refused": f.refused,
                    "accuracy": f.accuracy,
                    "refusal_rate": f.refusal_rate,
                }
                for f in self.folds
            ],
            "mean_accuracy": self.mean_accuracy,
            "best_case": self.best_case,
            "worst_case": self.worst_case,
            "worst_fold": self.worst_fold,
            "mini_case_ids": list(self.mini_case_ids),
        }

    def to_table(self) -> str:
        lines = ["fold  size  decided  correct  refused  accuracy  refusal"]
        for f in self.folds:
            acc = "-" if f.accuracy is None else f"{f.accuracy * 100:.2f}%"
            lines.append(
                f"{f.fold:>4}  {f.size:>4}  {f.decided:>7}  {f.correct:>7}  "
                f"{f.refused:>7}  {acc:>8}  {f.refusal_rate * 100:.2f}%"
            )
        mean = "-" if self.mean_accuracy is None else f"{self.mean_accuracy * 100:.2f}%"
        best = "-" if self.best_case is None else f"{self.best_case * 100:.2f}%"
        worst = "-" if self.worst_case is None else f"{self.worst_case * 100:.2f}%"
        lines.append(f"mean accuracy {mean}; best-case {best}; worst-case {worst}")
        return "\n".join(lines)


def scenario_estimates(fold_size: int, misclassified: int, k: int) -> ScenarioEstimate:
    """Exact-rational fold accuracy and k-fold average when one fold takes
    all `misclassified` errors and every other fold is perfect."""
    if fold_size <= 0:
        raise CVError("fold_size must be positive")
    if not 0 <= misclassified <= fold_size:
        raise CVError("misclassified must lie in [0, fold_size]")
    if k < 1:
        raise CVError("k must be >= 1")
    fold_acc = Fraction(fold_size - misclassified, fold_size)
    average = (fold_acc + (k - 1)) / k
    return ScenarioEstimate(fold_accuracy=float(fold_acc), average=float(average))


def make_folds(
    ds: LabeledDataset,
    cfg: CVConfig,
    mini_ids: tuple[int, ...] = (),
) -> list[int]:
    """Fold index per case: sizes within one of each other, stratified class
    ratios within one case, deterministic for a given seed.

    mini_box_fold places every listed mini case into fold 0 and pads it with
    seeded random other cases up to the standard fold size floor(n/k)."""
    n = len(ds)
    k = cfg.k
    if k > n:
        raise CVError(f"k={k} exceeds dataset size {n}")
    rng = random.Random(cfg.seed)
    assignment = [-1] * n

    pool = list(range(n))
    fold_range = list(range(k))
    if cfg.adversarial == "mini_box_fold":
        base = n // k
        minis = sorted(set(mini_ids))
        if len(minis) > base:
            raise CVError("more mini cases than one standard fold can hold")
        for i in minis:
            assignment[i] = 0
        others = [i for i in pool if assignment[i] == -1]
        rng.shuffle(others)
        pad = others[: base - len(minis)]
        for i in pad:
            assignment[i] = 0
        pool = sorted(i for i in others[base - len(minis):])
        fold_range = list(range(1, k))

    if cfg.stratified:
        by_class: dict[str, list[int]] = {}
        order: list[str] = []
        for i in pool:
            name = ds.labels[i].name
            if name not in by_class:
                by_class[name] = []
                order.append(name)
            by_class[name].append(i)
        if cfg.adversarial == "none" and k > min(len(v) for v in by_class.values()):
            raise CVError("k exceeds the size of the smallest class")
        kk = len(fold_range)
        extra_ptr = 0
        for name in order:
            idx = list(by_class[name])
            rng.shuffle(idx)
            base_c, rem = divmod(len(idx), kk)
            sizes = [base_c] * kk
            for _ in range(rem):
                sizes[extra_ptr % kk] += 1
                extra_ptr += 1
            pos = 0
            for f, size in zip(fold_range, sizes):
                for i in idx[pos : pos + size]:
                    assignment[i] = f
                pos += size
    else:
        idx = list(pool)
        rng.shuffle(idx)
        kk = len(fold_range)
        base_c, rem = divmod(len(idx), kk)
        pos = 0
        for fi, f in enumerate(fold_range):
            size = base_c + (1 if fi < rem else 0)
            for i in idx[pos : pos + size]:
                assignment[i] = f
            pos += size
    return assignment


def mini_case_ids(ds: LabeledDataset, mode: MappingMode, dcfg: DiscoveryConfig) -> tuple[int, ...]:
    """Cases decided only by rules whose fired coverage is at most the
    configured mini threshold, from a full-data discovery run."""
    graphs = [encode(p.values, mode) for p in ds.points]
    trace = discover(graphs, ds.labels, dcfg)
    rs = from_trace(trace, graphs)
    preds = sequential_assignments(rs, graphs)
    fired: dict[str, int] = {}
    for p in preds:
        if p.rule_id:
            fired[p.rule_id] = fired.get(p.rule_id, 0) + 1
    minis = tuple(
        i
        for i, p in enumerate(preds)
        if p.rule_id is not None and fired[p.rule_id] <= dcfg.mini_threshold
    )
    return minis


def run_cv(
    ds: LabeledDataset,
    mode: MappingMode,
    dcfg: DiscoveryConfig | None = None,
    cv_cfg: CVConfig | None = None,
    prune_strategy: str | None = "refuse",
) -> CVReport:
    """Per fold: discover on the training cases, optionally prune, then score
    the validation fold with refusals counted apart from errors."""
    dcfg = dcfg or DiscoveryConfig()
    cv_cfg = cv_cfg or CVConfig()
    minis: tuple[int, ...] = ()
    if cv_cfg.adversarial == "mini_box_fold":
        minis = mini_case_ids(ds, mode, dcfg)
    assignment = make_folds(ds, cv_cfg, mini_ids=minis)
    graphs = [encode(p.values, mode) for p in ds.points]

    folds: list[FoldResult] = []
    for f in range(cv_cfg.k):
        train = [i for i in range(len(ds)) if assignment[i] != f]
        val = [i for i in range(len(ds)) if assignment[i] == f]
        tg = [graphs[i] for i in train]
        tl = [ds.labels[i] for i in train]
        trace = discover(tg, tl, dcfg)
        rs = from_trace(trace, tg)
        if prune_strategy:
            rs = prune(rs, tg, tl, threshold=dcfg.mini_threshold, strategy=prune_strategy)
        vg = [graphs[i] for i in val]
        preds = sequential_assignments(rs, vg)
        decided = correct = refused = 0
        for i, pred in zip(val, preds):
            if pred.refused:
                refused += 1
            else:
                decided += 1
                if pred.outcome == ds.labels[i].name:
                    correct += 1
        folds.append(
            FoldResult(fold=f, size=len(val), decided=decided, correct=correct, refused=refused)
        )

    scored = [f for f in folds if f.accuracy is not None]
    mean_acc = sum(f.accuracy for f in scored) / len(scored) if scored else None
    worst = min(scored, key=lambda f: (f.accuracy, f.fold)) if scored else None
    best_case = worst_case = None
    worst_idx = None
    if worst is not None:
        worst_idx = worst.fold
        best_case = scenario_estimates(worst.size, worst.decided - worst.correct, cv_cfg.k).average
        worst_case = scenario_estimates(worst.size, worst.size, cv_cfg.k).average
    return CVReport(
        config=cv_cfg,
        folds=folds,
        mean_accuracy=mean_acc,
        best_case=best_case,
        worst_case=worst_case,
        worst_fold=worst_idx,
        mini_case_ids=minis,
    )
