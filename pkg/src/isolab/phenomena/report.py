"""
Text and key=value renderings of phenomenon classifications.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence

from isolab.history_core.models import History
from isolab.phenomena.detectors import Phenomenon, Witness


def render_witness(history: History, witness: Witness) -> str:
    """One line per witness, e.g. "P2: r1[x]@0 w2[x]@2 c1@7" """
    tokens = " ".join(
        f"{history.actions[index].render(detailed=False)}@{index}" for index in witness.action_indices
    )
    return f"{witness.phenomenon.value}: {tokens}"


def render_witness_record(witness: Witness) -> str:
    positions = ",".join(str(index) for index in witness.action_indices)
    txns = ",".join(str(txn) for txn in witness.txns)
    items = ",".join(witness.items)
    return f"phenomenon={witness.phenomenon.value} positions={positions} txns={txns} items={items}"


def render_classification(history: History, classification: Mapping[Phenomenon, Sequence[Witness]]) -> list[str]:
    lines = []
    for phenomenon, witnesses in classification.items():
        if not witnesses:
            lines.append(f"{phenomenon.value}: none")
            continue
        lines.extend(render_witness(history, witness) for witness in witnesses)
    return lines


def render_classification_records(classification: Mapping[Phenomenon, Sequence[Witness]]) -> list[str]:
    lines = []
    for phenomenon, witnesses in classification.items():
        if not witnesses:
            lines.append(f"phenomenon={phenomenon.value} witnesses=0")
            continue
        lines.extend(render_witness_record(witness) for witness in witnesses)
    return lines
