"""Exhaustive search over deterministic one-bit-broadcast strategies.

Model: each party broadcasts one bit computed from its own 2-bit input (16
possible truth tables per party, 16**4 joint choices) and all broadcasts
happen simultaneously.  Afterwards each party answers with a function of
its own input and the three bits it heard; for a fixed broadcast choice the
best answer table is a per-cell majority vote over the input distribution
(ties go to 0).  Inputs are uniform over the given list, by default the 128
even-sum inputs.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .qccs import all_promise_inputs, target_f

N_TABLES = 16
N_COMBINATIONS = N_TABLES**4
N_CELLS = 32  # own input (4) x three heard bits (8)
SCORING_RULES = ("all", "worst")


@dataclass(frozen=True)
class ClassicalStrategy:
    """``broadcast_tables[i]`` bit ``x`` is party i's broadcast on input ``x``;
    ``answer_tables[i][cell]`` is its answer, ``cell = 8*own + heard``."""

    broadcast_tables: tuple
    answer_tables: tuple

    @property
    def index(self) -> int:
        t = self.broadcast_tables
        return ((t[0] * 16 + t[1]) * 16 + t[2]) * 16 + t[3]

    def broadcast(self, party: int, value: int) -> int:
        return (self.broadcast_tables[party] >> value) & 1

    def answer(self, party: int, values: Sequence[int]) -> int:
        heard = 0
        for j in range(4):
            if j != party:
                heard = (heard << 1) | self.broadcast(j, values[j])
        return self.answer_tables[party][8 * values[party] + heard]

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "broadcast_tables": [[(t >> x) & 1 for x in range(4)] for t in self.broadcast_tables],
            "answer_tables": [list(a) for a in self.answer_tables],
        }


@dataclass(frozen=True)
class ClassicalBound:
    best: dict  # scoring rule -> Fraction
    witnesses: dict  # scoring rule -> ClassicalStrategy
    visited: int
    n_inputs: int


def score_strategy(strategy: ClassicalStrategy, inputs: Sequence[Sequence[int]] | None = None) -> dict:
    """Plain-loop re-scoring of one strategy: ``{"all": ..., "worst": ...}``."""
    inputs = all_promise_inputs() if inputs is None else [tuple(v) for v in inputs]
    all_ok = 0
    party_ok = [0, 0, 0, 0]
    for vals in inputs:
        f = target_f(vals)
        oks = [strategy.answer(i, vals) == f for i in range(4)]
        all_ok += all(oks)
        for i, ok in enumerate(oks):
            party_ok[i] += ok
    n = len(inputs)
    return {"all": Fraction(all_ok, n), "worst": Fraction(min(party_ok), n)}


def _tables() -> np.ndarray:
    return np.array([[(t >> x) & 1 for x in range(4)] for t in range(N_TABLES)], dtype=np.int64)


def _evaluate_chunk(start: int, stop: int, X: np.ndarray, F: np.ndarray):
    """Scores of combinations ``start..stop-1``: (all-correct counts, worst-party counts)."""
    idx = np.arange(start, stop)
    choice = np.stack([(idx >> s) & 15 for s in (12, 8, 4, 0)], axis=1)
    tables = _tables()
    # bits[c, n, i]: party i's broadcast on input n under combination c
    bits = np.stack([tables[choice[:, i]][:, X[:, i]] for i in range(4)], axis=-1)
    size, n_in = bits.shape[0], X.shape[0]
    all_ok = np.ones((size, n_in), dtype=bool)
    party_counts = []
    offsets = (np.arange(size) * N_CELLS)[:, None]
    Fb = np.broadcast_to(F, (size, n_in)).ravel()
    for i in range(4):
        o = [j for j in range(4) if j != i]
        cell = 8 * X[:, i][None, :] + 4 * bits[:, :, o[0]] + 2 * bits[:, :, o[1]] + bits[:, :, o[2]]
        flat = (offsets + cell).ravel()
        ones = np.bincount(flat, weights=Fb, minlength=size * N_CELLS)
        total = np.bincount(flat, minlength=size * N_CELLS)
        answers = (2 * ones > total).reshape(size, N_CELLS)
        ok = np.take_along_axis(answers, cell, axis=1) == F[None, :]
        all_ok &= ok
        party_counts.append(ok.sum(axis=1))
    return all_ok.sum(axis=1), np.min(party_counts, axis=0)


def majority_answers(broadcast_tables: Sequence[int], inputs: Sequence[Sequence[int]]) -> tuple:
    """Per-cell majority answer tables for one broadcast choice (ties -> 0)."""
    votes = [[[0, 0] for _ in range(N_CELLS)] for _ in range(4)]
    for vals in inputs:
        f = target_f(vals)
        b = [(broadcast_tables[j] >> vals[j]) & 1 for j in range(4)]
        for i in range(4):
            heard = 0
            for j in range(4):
                if j != i:
                    heard = (heard << 1) | b[j]
            votes[i][8 * vals[i] + heard][f] += 1
    return tuple(tuple(int(v1 > v0) for v0, v1 in cells) for cells in votes)


def classical_optimal_success(
    inputs: Sequence[Sequence[int]] | None = None,
    chunk_size: int = 4096,
    workers: int = 1,
) -> ClassicalBound:
    """Best deterministic one-bit-broadcast success for both scoring rules.

    ``"all"`` counts an input as won when every party answers correctly,
    ``"worst"`` reports the least successful party.  Ties between strategies
    go to the lowest combination index, so the result does not depend on
    ``chunk_size`` or ``workers``.
    """
    inputs = all_promise_inputs() if inputs is None else [tuple(int(v) for v in x) for x in inputs]
    if not inputs:
        raise ValueError("input set is empty")
    X = np.array(inputs, dtype=np.int64)
    F = np.array([target_f(v) for v in inputs], dtype=np.int64)
    bounds = [(s, min(s + chunk_size, N_COMBINATIONS)) for s in range(0, N_COMBINATIONS, chunk_size)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _evaluate_chunk(b[0], b[1], X, F), bounds))
    else:
        parts = [_evaluate_chunk(s, e, X, F) for s, e in bounds]
    scores = {
        "all": np.concatenate([p[0] for p in parts]),
        "worst": np.concatenate([p[1] for p in parts]),
    }
    visited = scores["all"].size
    best, witnesses = {}, {}
    for rule, arr in scores.items():
        k = int(np.argmax(arr))  # first maximiser
        tables = tuple((k >> s) & 15 for s in (12, 8, 4, 0))
        best[rule] = Fraction(int(arr[k]), len(inputs))
        witnesses[rule] = ClassicalStrategy(tables, majority_answers(tables, inputs))
    return ClassicalBound(best, witnesses, visited, len(inputs))


def restricted_inputs(low_patterns: Sequence[str]) -> list[tuple]:
    """Even-sum inputs whose low bits are one of ``low_patterns``."""
    wanted = {tuple(int(c) for c in p) for p in low_patterns}
    return [v for v in all_promise_inputs() if tuple(x & 1 for x in v) in wanted]

