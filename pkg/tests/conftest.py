import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from hopforge import cli
from hopforge.deptree import attach_ner, load_ner_sidecar, parse_conllu
from hopforge.gateway import Gateway, GatewayConfig
from hopforge.mock_models import create_app

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def pinned_trees() -> dict:
    """The pinned sub-question parses with NER spans attached, keyed by sent_id."""
    trees = parse_conllu((FIXTURES / "pinned_subq.conllu").read_text(encoding="utf-8"))
    attach_ner(trees, load_ner_sidecar(FIXTURES / "pinned_subq_ner.jsonl"))
    return {t.sent_id: t for t in trees}


@pytest.fixture(scope="session")
def mock_client() -> TestClient:
    return TestClient(create_app(seed=0))


@pytest.fixture()
def live_gateway(mock_client) -> Gateway:
    """A gateway talking to the in-process mock server (no cassette)."""
    return Gateway(GatewayConfig(max_parallel=2), mode="live", session=mock_client)


def make_pipeline_config(out_dir: Path) -> dict:
    """The pinned pipeline config with fixture paths filled in."""
    config = json.loads((FIXTURES / "pipeline_config.json").read_text(encoding="utf-8"))
    config["paths"] = {
        "hotpot": str(FIXTURES / "hotpot_fixture.json"),
        "subqa": str(FIXTURES / "subqa_fixture.jsonl"),
        "conllu": str(FIXTURES / "subq.conllu"),
        "ner_sidecar": str(FIXTURES / "ner_sidecar.jsonl"),
        "output_dir": str(out_dir),
    }
    return config


def run_cli(*argv) -> int:
    return cli.main([str(a) for a in argv])


def run_replay_pipeline(config_path: Path, out_dir: Path, stages=("all",)) -> None:
    """Run the gateway stages of the pipeline in replay mode over the fixtures."""
    cassette = FIXTURES / "cassette.jsonl"
    assert run_cli("ingest", "--config", config_path) == 0
    assert run_cli("parse-import", "--config", config_path) == 0
    assert run_cli("extract", "--config", config_path) == 0
    assert run_cli("substitute", "--config", config_path, "--replay", cassette) == 0
    assert run_cli("forge", "--config", config_path, "--replay", cassette) == 0
    assert run_cli("attack", "--config", config_path) == 0
    assert run_cli("evaluate", "--config", config_path, "--style", "cot",
                   "--dataset", out_dir / "instances.jsonl", "--tag", "ori",
                   "--replay", cassette) == 0
    assert run_cli("evaluate", "--config", config_path, "--style", "cot",
                   "--dataset", out_dir / "adversarial.jsonl", "--tag", "adv",
                   "--replay", cassette) == 0


@pytest.fixture(scope="session")
def pipeline_run(tmp_path_factory):
    """One shared replayed pipeline run; tests must not mutate its artifacts."""
    base = tmp_path_factory.mktemp("pipeline")
    out_dir = base / "out"
    config = make_pipeline_config(out_dir)
    config_path = base / "config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    run_replay_pipeline(config_path, out_dir)
    return {"config_path": config_path, "out_dir": out_dir, "config": config}
