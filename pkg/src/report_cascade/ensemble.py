"""Soft-voting ensemble: argmax of the summed member probabilities.

The summed distribution is divided by the member count so the output is a
valid probability distribution (the argmax is unchanged); the detection
gate thresholds this normalized quantity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .learners.base import LearnerError, argmax_class
from .sparse import SparseVector


@dataclass(eq=False)
class VotingModel:
    members: list
    class_names: list[str]

    def __post_init__(self):
        if len(self.members) < 2:
            raise LearnerError("a voting model needs at least two members")
        for m in self.members:
            if list(m.class_names) != list(self.class_names):
                raise LearnerError(
                    f"member class names {m.class_names} != ensemble {self.class_names}"
                )

    def predict_proba_batch(self, vectors: list[SparseVector]) -> np.ndarray:
        total = np.zeros((len(vectors), len(self.class_names)))
        for m in self.members:
            total += m.predict_proba_batch(vectors)
        return total / len(self.members)


def vote_proba(vm: VotingModel, vec: SparseVector) -> np.ndarray:
    return vm.predict_proba_batch([vec])[0]


def vote(vm: VotingModel, vec: SparseVector) -> int:
    return argmax_class(vote_proba(vm, vec))
