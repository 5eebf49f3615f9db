"""Closed-form codimensions and multiplicity rules for the built-in models."""

from __future__ import annotations

from math import comb
from typing import Dict, Optional

from .repsn import Partition, hook, partitions

_EPS_LIKE = {"c_eps", "m1_eps", "m2_eps", "m1_delta", "m2_delta"}


def closed_form(model: str, n: int, t: int = 0) -> Optional[int]:
    """Expected ``c_n`` for a model, or None when no formula is registered."""
    if model == "ut2":
        return 2 ** (n - 1) * (n - 2) + 2
    if model in ("ut2_eps", "ut2_delta"):
        return 2 ** (n - 1) * n + 1
    if model == "ut2_D":
        return 2 ** (n - 1) * (n + 2)
    if model in _EPS_LIKE:
        return n + 1
    if model in ("m1", "m2"):
        return n
    if model in ("m1_D", "m2_D"):
        return n + 2
    if model == "grassmann":
        return 2 ** (n - 1)
    if model == "grassmann_der":
        total = 2 ** t * 2 ** (n - 1)
        for j in range(1, t // 2 + 1):
            for i in range(2 * j, t + 1):
                total -= comb(t, i) * comb(n, i - 2 * j)
        return total
    return None


def _two_row(lam: Partition):
    """``(p, q)`` with ``lam = (p+q, p)`` or ``(p+q, p, 1)``; None otherwise."""
    if len(lam) == 2 or (len(lam) == 3 and lam[2] == 1):
        p = lam[1]
        return p, lam[0] - p
    return None


def multiplicities(model: str, n: int, t: int = 0) -> Optional[Dict[Partition, int]]:
    """Expected nonzero multiplicities ``{partition: m}``, or None when unknown."""
    out: Dict[Partition, int] = {}
    if model.startswith("ut2"):
        row = {"ut2": 1, "ut2_eps": n + 1, "ut2_delta": n + 1, "ut2_D": 2 * n + 1}[model]
        two = {"ut2": 1, "ut2_eps": 2, "ut2_delta": 2, "ut2_D": 3}[model]
        for lam in partitions(n):
            if len(lam) == 1:
                out[lam] = row
            elif _two_row(lam):
                p, q = _two_row(lam)
                out[lam] = (q + 1) * (two if len(lam) == 2 else 1)
        return out
    if model in _EPS_LIKE or model in ("m1", "m2", "m1_D", "m2_D"):
        top = 2 if model in _EPS_LIKE else 1 if model in ("m1", "m2") else 3
        out[(n,)] = top
        if n >= 2:
            out[(n - 1, 1)] = 1
        return out
    if model == "grassmann":
        return {hook(n, r): 1 for r in range(1, n + 1)}
    if model == "grassmann_der":
        for r in range(1, n + 1):
            out[hook(n, r)] = sum(comb(t, i) for i in range(r + 1)) if r < t else 2 ** t
        return out
    return None
