"""
Transcript export: one JSON record per line, or a DataFrame
"""

import json
from typing import Dict, List

import pandas as pd

from src.simulator.state import SimState


def transcript_records(state: SimState) -> List[Dict[str, object]]:
    return [
        {
            "index": r.index,
            "wire": r.site.wire,
            "column": r.site.column,
            "kind": r.kind,
            "op": r.op.name if r.op is not None else "",
            "label": r.label,
            "outcome": r.outcome,
            "probability": r.probability,
            "forced": r.forced,
        }
        for r in state.transcript
    ]


def export_transcript(state: SimState) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in transcript_records(state))


def transcript_frame(state: SimState) -> pd.DataFrame:
    return pd.DataFrame(transcript_records(state))
