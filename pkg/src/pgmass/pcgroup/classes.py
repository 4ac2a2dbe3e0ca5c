"""Conjugacy classes, orders and power maps (via the multiplication tables)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, order=True)
class ConjClass:
    representative: tuple   # lexicographically least member
    size: int


class ClassData:
    """Class labels for every element of a tabulated group."""

    def __init__(self, G):
        self.G = G
        self.T = T = G.table()
        self.labels, self.reps = T.conjugacy_labels()
        self.sizes = np.bincount(self.labels, minlength=len(self.reps))

    def __len__(self):
        return len(self.reps)

    def conj_class(self, c: int) -> ConjClass:
        return ConjClass(self.T.element(int(self.reps[c])), int(self.sizes[c]))

    def classes(self) -> list:
        return [self.conj_class(c) for c in range(len(self.reps))]

    def label_of(self, x) -> int:
        return int(self.labels[self.T.index(x)])

    def power_labels(self, k: int) -> np.ndarray:
        """Label of the class of ``x^k`` for x a representative of each class."""
        pw = self.T.power_all(k, self.reps.astype(np.int64))
        return self.labels[pw]


def class_data(G) -> ClassData:
    cd = getattr(G, "_class_data", None)
    if cd is None:
        cd = ClassData(G)
        G._class_data = cd
    return cd


def conjugacy_classes(G) -> list:
    return class_data(G).classes()


def element_order(G, x) -> int:
    return G.element_order(tuple(x))


def exponent(G) -> int:
    if G.n == 0:
        return 1
    return int(G.table().orders().max())


def centralizer_order(G, x) -> int:
    cd = class_data(G)
    return G.order // int(cd.sizes[cd.label_of(x)])


def power_class_map(G, c: ConjClass, k: int) -> ConjClass:
    cd = class_data(G)
    x = G.power(c.representative, k)
    return cd.conj_class(cd.label_of(x))


def is_conjugate(G, x, y) -> bool:
    cd = class_data(G)
    return cd.label_of(x) == cd.label_of(y)
