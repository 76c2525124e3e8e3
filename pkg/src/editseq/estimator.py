"""A scikit-learn style wrapper around mining and prediction."""
from __future__ import annotations

from typing import List, Optional

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .ast import AstNode
from .pipeline import Config, mine
from .rankpredict import ReplayContext, compute_metrics, predict
from .trace import DEFAULT_DEBOUNCE_MS, DEFAULT_MAX_DIFF_NODES, debounce
from .validation import check_queries, check_traces

__all__ = ["EditSequencePredictor"]


class EditSequencePredictor(BaseEstimator):
    """Learns ranked edit sequence patterns from traces.

    ``fit`` takes a list of traces. ``predict`` takes ``(trace, m)`` pairs
    and returns the predicted next version (or ``None``) for each.
    ``score`` replays held-out traces and returns F-gamma against the
    zero-threshold ranking of the same patterns.
    """

    def __init__(
        self,
        n: int = 3,
        support: int = 2,
        debounce_ms: int = DEFAULT_DEBOUNCE_MS,
        max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES,
        t1: float = 0.7,
        t2: float = 0.8,
        gamma: float = 3.0,
    ):
        self.n = n
        self.support = support
        self.debounce_ms = debounce_ms
        self.max_diff_nodes = max_diff_nodes
        self.t1 = t1
        self.t2 = t2
        self.gamma = gamma

    def _config(self) -> Config:
        return Config(
            n=self.n,
            support=self.support,
            debounce_ms=self.debounce_ms,
            max_diff_nodes=self.max_diff_nodes,
            t1=self.t1,
            t2=self.t2,
            gamma=self.gamma,
        )

    def fit(self, X, y=None):
        traces = check_traces(X)
        result = mine(traces, self._config())
        self.patterns_ = [c.esp for c in result.selected]
        self.baseline_patterns_ = [c.esp for c in result.select(0.0, 0.0)]
        self.records_ = result.records()
        self.n_candidates_ = len(result.candidates)
        return self

    def predict(self, X) -> List[Optional[AstNode]]:
        check_is_fitted(self, "patterns_")
        out = []
        for trace, m in check_queries(X):
            got = None
            for esp in self.patterns_:
                got = predict(esp, trace, m, self.max_diff_nodes)
                if got is not None:
                    break
            out.append(got)
        return out

    def score(self, X, y=None) -> float:
        check_is_fitted(self, "patterns_")
        traces = [debounce(t, self.debounce_ms) for t in check_traces(X)]
        ctx = ReplayContext(traces, self.max_diff_nodes)
        return compute_metrics(self.patterns_, self.baseline_patterns_, traces, self.gamma, ctx).f_gamma
