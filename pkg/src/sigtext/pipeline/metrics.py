"""Correct rate / accuracy rate from minimum edit-distance alignments.

    CR = (N - De - Se) / N        AR = (N - De - Se - Ie) / N

with N the total reference length (ICDAR 2013 competition convention).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence


def align_counts(ref: Sequence, hyp: Sequence) -> tuple[int, int, int]:
    """``(substitutions, deletions, insertions)`` of a minimum-cost alignment.

    Among minimum-cost alignments the one with the most substitutions is
    chosen. Since ``De - Ie = len(ref) - len(hyp)`` is fixed, this pins the
    split down uniquely, and swapping ``ref`` and ``hyp`` swaps De and Ie.
    """
    n, m = len(ref), len(hyp)
    # each cell: (cost, insertions, substitutions, deletions); ordered by (cost, insertions)
    prev = [(j, j, 0, 0) for j in range(m + 1)]
    for i in range(1, n + 1):
        ri = ref[i - 1]
        row = [(i, 0, 0, i)]
        for j in range(1, m + 1):
            c, ins, sub, de = prev[j - 1]
            miss = ri != hyp[j - 1]
            diag = (c + miss, ins, sub + miss, de)
            c, ins, sub, de = prev[j]
            up = (c + 1, ins, sub, de + 1)
            c, ins, sub, de = row[j - 1]
            left = (c + 1, ins + 1, sub, de)
            row.append(min(diag, up, left, key=lambda t: (t[0], t[1])))
        prev = row
    _, ins, sub, de = prev[m]
    return sub, de, ins


@dataclass
class EvalReport:
    n: int = 0
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    samples: int = 0
    per_class: dict = field(default_factory=dict)  # symbol -> (reference count, correct count)

    @property
    def cr(self) -> float:
        return (self.n - self.deletions - self.substitutions) / self.n if self.n else 0.0

    @property
    def ar(self) -> float:
        return (self.n - self.deletions - self.substitutions - self.insertions) / self.n if self.n else 0.0

    def add(self, ref: Sequence, hyp: Sequence) -> None:
        s, de, ins = align_counts(ref, hyp)
        self.n += len(ref)
        self.substitutions += s
        self.deletions += de
        self.insertions += ins
        self.samples += 1
        for sym, ok in _class_hits(ref, hyp).items():
            tot, cor = self.per_class.get(sym, (0, 0))
            self.per_class[sym] = (tot + ok[0], cor + ok[1])

    def to_kv(self) -> str:
        lines = [f"N={self.n}", f"Se={self.substitutions}", f"De={self.deletions}", f"Ie={self.insertions}",
                 f"CR={self.cr:.6f}", f"AR={self.ar:.6f}", f"samples={self.samples}"]
        for sym in sorted(self.per_class):
            tot, cor = self.per_class[sym]
            lines.append(f"class.{sym}={cor}/{tot}")
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        head = (f"samples {self.samples}  N {self.n}  Se {self.substitutions}  De {self.deletions}  "
                f"Ie {self.insertions}\nCR {100 * self.cr:6.2f}%   AR {100 * self.ar:6.2f}%")
        rows = [f"  {sym!s:>4}  {cor:>5}/{tot:<5} {100 * cor / tot if tot else 0:6.2f}%"
                for sym, (tot, cor) in sorted(self.per_class.items())]
        return head + ("\nper class:\n" + "\n".join(rows) if rows else "")


def _class_hits(ref, hyp) -> dict:
    """Per reference symbol: (count, matched count) under an LCS-style alignment."""
    n, m = len(ref), len(hyp)
    L = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            L[i][j] = L[i + 1][j + 1] + 1 if ref[i] == hyp[j] else max(L[i + 1][j], L[i][j + 1])
    hits: dict = {}
    i = j = 0
    matched = Counter()
    while i < n and j < m:
        if ref[i] == hyp[j]:
            matched[ref[i]] += 1
            i += 1
            j += 1
        elif L[i + 1][j] >= L[i][j + 1]:
            i += 1
        else:
            j += 1
    for sym, c in Counter(ref).items():
        hits[sym] = (c, matched[sym])
    return hits


def evaluate_pairs(pairs: Iterable[tuple]) -> EvalReport:
    report = EvalReport()
    for ref, hyp in pairs:
        report.add(ref, hyp)
    return report
