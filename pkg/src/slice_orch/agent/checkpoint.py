from dataclasses import asdict

from ..common import array_from_json, array_to_json, make_rng, read_json, write_json
from ..nn import mlp_from_doc, mlp_to_doc, optimizer_from_doc, optimizer_to_doc
from .policy import AgentConfig, AgentState, build_agent


def agent_to_doc(agent: AgentState) -> dict:
    return {
        "actor": mlp_to_doc(agent.actor),
        "critic": mlp_to_doc(agent.critic),
        "log_std": array_to_json(agent.log_std.detach().numpy()),
        "lambda": agent.lam,
        "updates": agent.updates,
        "optimizers": {
            "actor": optimizer_to_doc(agent.actor_opt),
            "critic": optimizer_to_doc(agent.critic_opt),
            "bc": optimizer_to_doc(agent.bc_opt),
        },
    }


def agent_from_doc(doc: dict, config: AgentConfig, seed: int, slice_id: int) -> AgentState:
    """Restore an agent; its sampling stream restarts from (seed, slice_id, update count)."""
    updates = int(doc.get("updates", 0))
    agent = build_agent(
        config,
        mlp_from_doc(doc["actor"]),
        mlp_from_doc(doc["critic"]),
        array_from_json(doc["log_std"]),
        make_rng(seed, "agent", slice_id, updates),
        lam=float(doc["lambda"]),
        updates=updates,
    )
    optimizer_from_doc(agent.actor_opt, doc["optimizers"]["actor"])
    optimizer_from_doc(agent.critic_opt, doc["optimizers"]["critic"])
    optimizer_from_doc(agent.bc_opt, doc["optimizers"]["bc"])
    return agent


def save_agent(path, agent: AgentState) -> None:
    write_json(path, {**agent_to_doc(agent), "config": asdict(agent.config)})


def load_agent(path, config: AgentConfig, seed: int, slice_id: int, stage: str = "pretrain") -> AgentState:
    return agent_from_doc(read_json(path, stage), config, seed, slice_id)
