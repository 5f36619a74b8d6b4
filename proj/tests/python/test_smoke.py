import json
import math
from pathlib import Path

import pytest

import rsearch

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def test_schema_and_grammar():
    entries = rsearch.feature_schema()
    names = {e["name"] for e in entries}
    assert {"delivery", "onion_potted", "pot_fullness", "holding_code"} <= names
    assert any(e["per_agent"] for e in entries)
    assert len(rsearch.schema_digest()) == 16
    assert "program" in rsearch.grammar()


def test_compile_report_classifies():
    ok = rsearch.compile_program("r[0] = x.delivery[0]; r[1] = x.delivery[1];")
    assert ok["valid"] and ok["verdict"] == "Valid"

    bad = rsearch.compile_program("r[0] = x.soup_progress[0]; r[1] = 0;")
    assert not bad["valid"]
    assert bad["verdict"] == "SchemaError"
    assert bad["messages"]


def test_program_evaluates_and_clips():
    program = rsearch.Program(
        "r[0] = 10 * x.delivery[0]; r[1] = x.onion_potted[1] - x.collision[1];",
        clip_bound=1.0,
    )
    out = program.evaluate({"delivery": [1.0, 0.0], "onion_potted": [0.0, 1.0]})
    assert out == [1.0, 1.0]  # agent 0 clipped at the bound
    assert program.evaluate({}) == [0.0, 0.0]  # missing keys read as zero

    with pytest.raises(ValueError):
        rsearch.Program("r[0] = x.nope[0]; r[1] = 0;")


def test_rollout_is_seed_deterministic():
    a = rsearch.rollout("cramped_room", steps=120, seed=5)
    b = rsearch.rollout("cramped_room", steps=120, seed=5)
    assert a == b
    assert a["sparse_total"] == 20.0 * a["deliveries"] or a["deliveries"] == 0
    assert set(rsearch.builtin_layouts()) >= {"cramped_room", "coordination_ring"}


def test_diagnose_matches_hand_values():
    # Two agents with identical nonzero streams: delta 0, rho 1.
    n = 8
    d = rsearch.diagnose(
        episodes=[0] * n,
        shaping=[[0.5 * t, 0.5 * t] for t in range(n)],
        actions=[[t % 6, t % 6] for t in range(n)],
        sparse=[0.0] * n,
    )
    assert d["delta"] == pytest.approx(0.0, abs=1e-12)
    assert d["rho"] == pytest.approx(1.0, abs=1e-12)
    assert d["nmi"] == pytest.approx(1.0, abs=1e-12)
    assert d["j_hat"] == 0.0


def test_train_eval_tiny_budget():
    result = rsearch.train_eval("cramped_room", iterations=1,
                                episodes_per_iteration=1, eval_episodes=2)
    assert result["env_steps"] == 200
    assert len(result["curve"]) == 1
    assert math.isfinite(result["j_hat"])

    program = rsearch.Program("r[0] = x.onion_potted[0]; r[1] = x.onion_potted[1];")
    shaped = rsearch.train_eval("cramped_room", program=program, iterations=1,
                                episodes_per_iteration=1, eval_episodes=2)
    assert shaped["env_steps"] == 200
    assert 0.0 <= shaped["diagnostics"]["delta"] <= 1.0


def test_run_search_scripted(tmp_path):
    config = {
        "layout": "cramped_room",
        "generations": 1,
        "candidates": 2,
        "repair_attempts": 1,
        "master_seed": 3,
        "train": {"iterations": 1, "episodes_per_iteration": 1, "eval_episodes": 2},
        "backend": {
            "kind": "scripted",
            "fixture_dir": str(FIXTURES / "acceptance" / "cramped"),
        },
    }
    archive = json.loads(rsearch.run_search(json.dumps(config)))
    assert archive["best"].startswith("g")
    records = archive["archive"]["records"]
    assert len(records) == 3  # baseline + 2 candidates
    assert records[0]["id"] == {"generation": 0, "index": 0}
    assert all(r["verdict"] == "Valid" for r in records)
