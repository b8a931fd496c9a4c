"""Transition logs on disk."""

from collections.abc import Sequence

from ..common import read_json, write_json
from ..core import Action, Episode, State, Transition

STATE_FIELDS = ("slot_index", "f_prev", "h_prev", "g_prev", "w_prev", "r_prev", "c_prev", "sla_threshold", "cum_cost", "horizon")


def _state_to_list(state: State) -> list:
    return [getattr(state, name) for name in STATE_FIELDS]


def _state_from_list(values: list) -> State:
    doc = dict(zip(STATE_FIELDS, values))
    doc["slot_index"] = int(doc["slot_index"])
    doc["horizon"] = int(doc["horizon"])
    return State(**doc)


def episode_to_doc(ep: Episode) -> dict:
    return {
        "slice_id": ep.slice_id,
        "sla_threshold": ep.sla_threshold,
        "truncation_slot": ep.truncation_slot,
        "coord_rounds": list(ep.coord_rounds),
        "transitions": [
            {
                "state": _state_to_list(tr.state),
                "action": tr.action.as_array().tolist(),
                "reward": tr.reward,
                "cost": tr.cost,
                "source": tr.source.value,
                "perf": tr.perf_raw,
                "proposed": tr.proposed.as_array().tolist() if tr.proposed is not None else None,
            }
            for tr in ep.transitions
        ],
    }


def episode_from_doc(doc: dict) -> Episode:
    transitions = [
        Transition(
            state=_state_from_list(t["state"]),
            action=Action.from_array(t["action"]),
            reward=float(t["reward"]),
            cost=float(t["cost"]),
            source=t["source"],
            perf_raw=float(t["perf"]),
            proposed=Action.from_array(t["proposed"]) if t.get("proposed") is not None else None,
        )
        for t in doc["transitions"]
    ]
    return Episode(
        transitions,
        float(doc["sla_threshold"]),
        doc["truncation_slot"],
        slice_id=int(doc["slice_id"]),
        coord_rounds=[int(r) for r in doc.get("coord_rounds", [])],
    )


def save_episodes(path, episodes: Sequence[Episode]) -> None:
    write_json(path, {"episodes": [episode_to_doc(ep) for ep in episodes]})


def load_episodes(path, stage: str = "collect-baseline") -> list[Episode]:
    return [episode_from_doc(d) for d in read_json(path, stage)["episodes"]]
