"""Vectorised arithmetic for small pc-groups.

Elements are encoded as integers in mixed radix p with ``g_1`` most
significant.  For each generator we store the permutation ``x -> x g_i``;
products, powers and conjugation are then evaluated for whole arrays of
elements at once by applying letters under masks.
"""
from __future__ import annotations

import numpy as np

TABLE_LIMIT = 2**22


class CapacityError(RuntimeError):
    """A computation exceeded its configured size budget."""


class PcTable:
    def __init__(self, G, limit: int = TABLE_LIMIT):
        if G.order > limit:
            raise CapacityError(f"group of order {G.order} exceeds table limit {limit}")
        self.G = G
        p, n = G.p, G.n
        self.p, self.n = p, n
        self.size = p ** n
        self.place = np.array([p ** (n - 1 - k) for k in range(n)], dtype=np.int64)
        idx = np.arange(self.size, dtype=np.int64)
        self.digits = np.empty((self.size, n), dtype=np.int8)
        for k in range(n):
            self.digits[:, k] = (idx // self.place[k]) % p
        self.R = [None] * n
        self._build()
        self._inv = None

    # ------------------------------------------------------------------
    def index(self, x) -> int:
        return int(np.dot(np.asarray(x, dtype=np.int64), self.place)) if self.n else 0

    def element(self, i: int) -> tuple:
        return tuple(int(t) for t in self.digits[i])

    def indices(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64).reshape(-1, self.n)
        return xs @ self.place if self.n else np.zeros(len(xs), dtype=np.int64)

    def _rmul_word(self, cur: np.ndarray, letters, lo: int = 0) -> np.ndarray:
        """Right-multiply every entry of ``cur`` by the fixed word ``letters``."""
        for k, e in letters:
            Rk = self.R[k]
            for _ in range(e):
                cur = Rk[cur]
        return cur

    def _rmul_by_digits(self, cur: np.ndarray, digits: np.ndarray, start: int = 0) -> np.ndarray:
        """Right-multiply ``cur[t]`` by the element with exponent row ``digits[t]``."""
        cur = cur.copy()
        for k in range(start, self.n):
            col = digits[:, k]
            Rk = self.R[k]
            for e in range(1, self.p):
                m = col >= e
                if not m.any():
                    break
                cur[m] = Rk[cur[m]]
        return cur

    def _build(self):
        G, p, n = self.G, self.p, self.n
        for i in range(n - 1, -1, -1):
            m = p ** (n - 1 - i)        # size of N_i = <g_{i+1}, ...>
            sub = np.arange(m, dtype=np.int64)
            sd = np.empty((m, n), dtype=np.int8)
            sd[:, : i + 1] = 0
            for k in range(i + 1, n):
                sd[:, k] = (sub // self.place[k]) % p
            # phi[s] = s^{g_i}
            phi = np.zeros(m, dtype=np.int64)
            for k in range(i + 1, n):
                w = G._conj[i][k]
                col = sd[:, k]
                for e in range(1, p):
                    msk = col >= e
                    if not msk.any():
                        break
                    phi[msk] = self._rmul_word(phi[msk], w)
            # ovf[s] = pow_i * phi[s]
            pw = G.powers[i]
            base = np.full(m, int(np.dot(np.array(pw, dtype=np.int64), self.place)) if n else 0,
                           dtype=np.int64)
            phd = np.empty((m, n), dtype=np.int8)
            for k in range(n):
                phd[:, k] = (phi // self.place[k]) % p
            ovf = self._rmul_by_digits(base, phd, i + 1)
            idx = np.arange(self.size, dtype=np.int64)
            s = idx % m
            a = self.digits[:, i].astype(np.int64)
            prefix = idx - s - a * self.place[i]
            R = np.where(a < p - 1,
                         prefix + (a + 1) * self.place[i] + phi[s],
                         prefix + ovf[s])
            self.R[i] = R

    # ------------------------------------------------------------------
    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Pairwise products of index arrays."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        x, y = np.broadcast_arrays(x, y)
        return self._rmul_by_digits(x.copy(), self.digits[y])

    def mul1(self, x: int, y: int) -> int:
        cur = int(x)
        d = self.digits[y]
        for k in range(self.n):
            for _ in range(int(d[k])):
                cur = int(self.R[k][cur])
        return cur

    def left_mul_all(self, u: int) -> np.ndarray:
        """Array ``u * x`` for all elements x."""
        return self._rmul_by_digits(np.full(self.size, int(u), dtype=np.int64), self.digits)

    def right_mul_all(self, u: int) -> np.ndarray:
        cur = np.arange(self.size, dtype=np.int64)
        return self._rmul_word(cur, self.G.letters(self.element(u)))

    @property
    def inverse(self) -> np.ndarray:
        if self._inv is None:
            z = np.arange(self.size, dtype=np.int64)
            y = np.zeros(self.size, dtype=np.int64)
            p = self.p
            for k in range(self.n):
                dk = (z // self.place[k]) % p
                e = (p - dk) % p
                Rk = self.R[k]
                for t in range(1, p):
                    m = e >= t
                    if not m.any():
                        break
                    z[m] = Rk[z[m]]
                y += e * self.place[k]
            assert not z.any()
            self._inv = y
        return self._inv

    def power_all(self, m: int, x: np.ndarray | None = None) -> np.ndarray:
        if x is None:
            x = np.arange(self.size, dtype=np.int64)
        if m < 0:
            x, m = self.inverse[x], -m
        result = np.zeros_like(x)
        base = x.copy()
        while m:
            if m & 1:
                result = self.mul(result, base)
            m >>= 1
            if m:
                base = self.mul(base, base)
        return result

    def conj_perm(self, g: int) -> np.ndarray:
        """Permutation ``x -> g^-1 x g``."""
        gi = int(self.inverse[g])
        left = self.left_mul_all(gi)
        return self._rmul_word(left, self.G.letters(self.element(g)))

    def orders(self) -> np.ndarray:
        """Element orders for all elements."""
        order = np.ones(self.size, dtype=np.int64)
        cur = np.arange(self.size, dtype=np.int64)
        while cur.any():
            nz = cur != 0
            order[nz] *= self.p
            cur = self.power_all(self.p, cur)
        return order

    def conjugacy_labels(self):
        """Class label per element and list of representatives (least index)."""
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components
        N = self.size
        rows, cols = [], []
        base = np.arange(N)
        for i in range(self.n):
            rows.append(base)
            cols.append(self.conj_perm(int(self.place[i])))
        if rows:
            r = np.concatenate(rows)
            c = np.concatenate(cols)
        else:
            r = c = np.zeros(0, dtype=np.int64)
        graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(N, N))
        ncomp, lab = connected_components(graph, directed=True, connection="weak")
        # relabel components by least member
        first = np.full(ncomp, N, dtype=np.int64)
        np.minimum.at(first, lab, base)
        order = np.argsort(first)
        relabel = np.empty(ncomp, dtype=np.int64)
        relabel[order] = np.arange(ncomp)
        return relabel[lab], first[order]
