"""Selection quality accounting."""

from __future__ import annotations

from typing import Iterable


def evaluate_selection(
    selected: Iterable[int], relevant: Iterable[int]
) -> tuple[float, float | None]:
    """(false discovery proportion, power).

    FDP = |selected \\ relevant| / max(|selected|, 1); power is the recalled
    fraction of relevant features, or None when nothing is relevant.
    """
    sel = set(int(i) for i in selected)
    rel = set(int(i) for i in relevant)
    false_discoveries = len(sel - rel)
    fdp = false_discoveries / max(len(sel), 1)
    power = len(sel & rel) / len(rel) if rel else None
    return fdp, power
