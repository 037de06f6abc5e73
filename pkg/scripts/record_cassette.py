"""Record the fixture cassette by running the pipeline against the mock server.

Starts the deterministic mock model server on a free loopback port, runs
every gateway-touching stage of the pipeline over the fixture corpus in
record mode, and pins the resulting cassette (plus the exact pipeline
config) under tests/fixtures/.  Tests then replay without any server.
"""

from __future__ import annotations

import json
import shutil
import socket
import tempfile
import threading
import time
from pathlib import Path

import uvicorn

from hopforge import cli
from hopforge.mock_models import create_app

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

# the config below (minus machine-local paths) is what the tests replay with;
# request digests depend on its constraint/prompt/attack values, so tests load
# the pinned copy rather than restating it
PIPELINE_CONFIG = {
    "constraints": {"max_sentence_sim": 0.991, "max_word_sim": 0.4,
                    "min_token_prob": 0.001, "top_k": 10},
    "attack": {"k": 2, "related": True, "second_subq_only": False, "seed": 7},
    "prompt_style": {"mode": "cot", "exemplar_count": 2, "n_samples": 1,
                     "sc_temperature": 0.7},
    "seeds": {"review_shuffle": 11, "review_sample": 11},
}


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def start_mock_server(port: int) -> uvicorn.Server:
    config = uvicorn.Config(create_app(seed=0), host="127.0.0.1", port=port,
                            log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    for _ in range(100):
        if server.started:
            return server
        time.sleep(0.05)
    raise RuntimeError("mock server did not start")


def main() -> None:
    port = free_port()
    server = start_mock_server(port)
    workdir = Path(tempfile.mkdtemp(prefix="hopforge-record-"))
    cassette = workdir / "cassette.jsonl"
    base = f"http://127.0.0.1:{port}"
    config = dict(PIPELINE_CONFIG)
    config["paths"] = {
        "hotpot": str(FIXTURES / "hotpot_fixture.json"),
        "subqa": str(FIXTURES / "subqa_fixture.jsonl"),
        "conllu": str(FIXTURES / "subq.conllu"),
        "ner_sidecar": str(FIXTURES / "ner_sidecar.jsonl"),
        "output_dir": str(workdir / "out"),
    }
    config["gateway"] = {
        "chat_url": f"{base}/v1/chat/completions",
        "fill_mask_url": f"{base}/fill-mask",
        "embed_url": f"{base}/embed",
        "word_vec_url": f"{base}/word-vec",
        "ner_url": f"{base}/ner",
        "max_parallel": 1,
    }
    config_path = workdir / "config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")

    def run(*argv):
        rc = cli.main(list(argv))
        if rc != 0:
            raise SystemExit(f"stage failed: {argv}")

    out = config["paths"]["output_dir"]
    run("ingest", "--config", str(config_path))
    run("parse-import", "--config", str(config_path))
    run("extract", "--config", str(config_path))
    run("substitute", "--config", str(config_path), "--record", str(cassette))
    run("forge", "--config", str(config_path), "--record", str(cassette))
    run("attack", "--config", str(config_path))
    run("evaluate", "--config", str(config_path), "--style", "cot",
        "--dataset", f"{out}/instances.jsonl", "--tag", "ori",
        "--record", str(cassette))
    run("evaluate", "--config", str(config_path), "--style", "cot",
        "--dataset", f"{out}/adversarial.jsonl", "--tag", "adv",
        "--record", str(cassette))
    run("evaluate", "--config", str(config_path), "--style", "cot-sc",
        "--dataset", f"{out}/adversarial.jsonl", "--tag", "advsc",
        "--record", str(cassette))
    run("evaluate", "--config", str(config_path), "--style", "normal",
        "--dataset", f"{out}/instances.jsonl", "--sub-question", "1",
        "--tag", "sub1", "--record", str(cassette))
    run("evaluate", "--config", str(config_path), "--style", "normal",
        "--dataset", f"{out}/instances.jsonl", "--sub-question", "2",
        "--tag", "sub2", "--record", str(cassette))

    shutil.copy(cassette, FIXTURES / "cassette.jsonl")
    pinned = {k: v for k, v in config.items() if k not in ("paths", "gateway")}
    (FIXTURES / "pipeline_config.json").write_text(
        json.dumps(pinned, indent=2) + "\n", encoding="utf-8")
    server.should_exit = True
    entries = sum(1 for _ in open(cassette, encoding="utf-8"))
    print(f"pinned cassette with {entries} entries and config to {FIXTURES}")
    print(f"scratch dir: {workdir}")


if __name__ == "__main__":
    main()
