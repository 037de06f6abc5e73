"""Single entry point wiring the pipeline stages.

ingest -> parse-import -> extract -> substitute -> forge -> attack ->
evaluate -> report, plus the analysis (dire, consistency), review
(review-export, serve-review) and mock-server commands.  Every stage writes
its artifact atomically with a first-line manifest carrying the digest of
the exact config that produced it, so reruns with the same seeds and
cassette are byte-identical and mixed-config reports are refused.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__, corpus, deptree, evalharness, forge, prompts, review, rules, substitution
from .gateway import Cassette, Gateway, GatewayConfig
from .util import atomic_write_text, canonical_digest

log = logging.getLogger(__name__)

STAGE_PRODUCERS = {
    "instances.jsonl": "ingest",
    "subqa.jsonl": "ingest",
    "parses.jsonl": "parse-import",
    "extractions.jsonl": "extract",
    "substitutions.jsonl": "substitute",
    "pairs.jsonl": "forge",
    "adversarial.jsonl": "attack",
}


class StageError(RuntimeError):
    pass


@dataclass
class PipelineConfig:
    raw: dict

    @property
    def digest(self) -> str:
        return canonical_digest(self.raw)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as f:
            return cls(raw=json.load(f))

    def path(self, name: str) -> Path:
        paths = self.raw.get("paths", {})
        if name not in paths:
            raise StageError(f"config has no paths.{name}")
        return Path(paths[name])

    def optional_path(self, name: str) -> Path | None:
        value = self.raw.get("paths", {}).get(name)
        return Path(value) if value else None

    @property
    def output_dir(self) -> Path:
        return Path(self.raw.get("paths", {}).get("output_dir", "out"))

    def artifact(self, filename: str) -> Path:
        return self.output_dir / filename

    def require_artifact(self, filename: str) -> Path:
        path = self.artifact(filename)
        if not path.exists():
            producer = STAGE_PRODUCERS.get(filename, "an earlier stage")
            raise StageError(f"missing {path}; run {producer} first")
        return path

    def gateway_config(self) -> GatewayConfig:
        return GatewayConfig.from_dict(self.raw.get("gateway", {}))

    def constraint_config(self) -> substitution.ConstraintConfig:
        return substitution.ConstraintConfig.from_dict(self.raw.get("constraints", {}))

    def attack_config(self, **overrides) -> forge.AttackConfig:
        merged = dict(self.raw.get("attack", {}))
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return forge.AttackConfig.from_dict(merged)

    def prompt_style(self, mode: str | None = None) -> evalharness.PromptStyle:
        merged = dict(self.raw.get("prompt_style", {}))
        if mode:
            merged["mode"] = mode
            if mode != evalharness.MODE_COT_SELF_CONSISTENCY:
                merged["n_samples"] = 1
            elif merged.get("n_samples", 1) == 1:
                merged["n_samples"] = 5
        return evalharness.PromptStyle.from_dict(merged)

    def seed(self, name: str, default: int = 0) -> int:
        return int(self.raw.get("seeds", {}).get(name, default))


def _stage_manifest(cfg: PipelineConfig, stage: str, seed: int | None = None) -> dict:
    manifest = {"kind": "manifest", "stage": stage, "config_digest": cfg.digest,
                "tool_version": __version__}
    if seed is not None:
        manifest["seed"] = seed
    return manifest


def _write_artifact(path: Path, manifest: dict, rows) -> None:
    lines = [json.dumps(manifest, ensure_ascii=False)]
    lines += [json.dumps(r, ensure_ascii=False) for r in rows]
    atomic_write_text(path, "".join(l + "\n" for l in lines))
    log.info("wrote %s (%d rows)", path, len(lines) - 1)


def _read_artifact(path: Path) -> tuple[dict, list[dict]]:
    with open(path, encoding="utf-8") as f:
        lines = [l for l in (line.strip() for line in f) if l]
    if not lines:
        raise StageError(f"{path} is empty")
    head = json.loads(lines[0])
    if head.get("kind") == "manifest":
        return head, [json.loads(l) for l in lines[1:]]
    return {}, [json.loads(l) for l in lines]


def _build_gateway(cfg: PipelineConfig, args) -> Gateway:
    gw_config = cfg.gateway_config()
    endpoint_override = getattr(args, "endpoint_config", None)
    if endpoint_override:
        with open(endpoint_override, encoding="utf-8") as f:
            merged = dict(cfg.raw.get("gateway", {}))
            merged.update(json.load(f))
            gw_config = GatewayConfig.from_dict(merged)
    if getattr(args, "replay", None):
        return Gateway(gw_config, mode="replay", cassette=Cassette(args.replay))
    if getattr(args, "record", None):
        return Gateway(gw_config, mode="record", cassette=Cassette(args.record))
    return Gateway(gw_config, mode="live")


def _finish_gateway(gateway: Gateway, args) -> None:
    if getattr(args, "record", None):
        gateway.cassette.save(args.record)
        log.info("cassette saved to %s (%d entries)", args.record, len(gateway.cassette))


# ---------------------------------------------------------------------------
# stages


def stage_ingest(cfg: PipelineConfig, args) -> None:
    instances = corpus.load_hotpot(cfg.path("hotpot"))
    pairs = corpus.load_subqa(cfg.path("subqa"), instances=instances)
    _write_artifact(cfg.artifact("instances.jsonl"), _stage_manifest(cfg, "ingest"),
                    [i.to_dict() for i in instances])
    _write_artifact(cfg.artifact("subqa.jsonl"), _stage_manifest(cfg, "ingest"),
                    [p.to_dict() for p in pairs])


def stage_parse_import(cfg: PipelineConfig, args) -> None:
    conllu_path = cfg.path("conllu")
    trees = deptree.parse_conllu(Path(conllu_path).read_text(encoding="utf-8"))
    sidecar_path = cfg.optional_path("ner_sidecar")
    if sidecar_path and sidecar_path.exists():
        deptree.attach_ner(trees, deptree.load_ner_sidecar(sidecar_path))
    _write_artifact(cfg.artifact("parses.jsonl"), _stage_manifest(cfg, "parse-import"),
                    [deptree.tree_to_dict(t) for t in trees])


def _load_parses(cfg: PipelineConfig) -> dict[str, deptree.DepTree]:
    _, rows = _read_artifact(cfg.require_artifact("parses.jsonl"))
    trees = {}
    for row in rows:
        tree = deptree.tree_from_dict(row)
        if tree.sent_id:
            trees[tree.sent_id] = tree
    return trees


def _load_subqa_rows(cfg: PipelineConfig) -> list[corpus.SubQuestionPair]:
    _, rows = _read_artifact(cfg.require_artifact("subqa.jsonl"))
    return [corpus.SubQuestionPair(**{k: row[k] for k in corpus.SUBQA_FIELDS})
            for row in rows]


def _load_instances(cfg: PipelineConfig) -> list[corpus.QAInstance]:
    _, rows = _read_artifact(cfg.require_artifact("instances.jsonl"))
    return [corpus.QAInstance.from_dict(r) for r in rows]


def stage_extract(cfg: PipelineConfig, args) -> None:
    parses = _load_parses(cfg)
    pairs = _load_subqa_rows(cfg)
    rows = []
    for pair in pairs:
        for subq_index in (1, 2):
            sent_id = f"{pair.instance_id}.{subq_index}"
            tree = parses.get(sent_id)
            if tree is None:
                log.warning("no parse for %s; skipped", sent_id)
                continue
            row = {"instance_id": pair.instance_id, "subq_index": subq_index}
            try:
                main, binding = rules.extract_main_entity(tree)
                details = rules.extract_modifiable(tree, main, tree.ner_spans)
                row.update({"main": main.to_dict(), "binding": binding.to_dict(),
                            "details": [d.to_dict() for d in details], "error": None})
            except rules.RuleError as e:
                row.update({"main": None, "binding": None, "details": [],
                            "error": f"{type(e).__name__}: {e}"})
            rows.append(row)
    _write_artifact(cfg.artifact("extractions.jsonl"), _stage_manifest(cfg, "extract"), rows)


def stage_substitute(cfg: PipelineConfig, args) -> None:
    _, extraction_rows = _read_artifact(cfg.require_artifact("extractions.jsonl"))
    pairs = {p.instance_id: p for p in _load_subqa_rows(cfg)}
    constraint_cfg = cfg.constraint_config()
    gateway = _build_gateway(cfg, args)

    jobs = []  # (instance_id, detail, sub_q1)
    for row in extraction_rows:
        if row["subq_index"] != 1 or row["error"] or row["instance_id"] not in pairs:
            continue
        sub_q1 = pairs[row["instance_id"]].sub_q1
        for detail_dict in row["details"]:
            detail = rules.ModifiableDetail.from_dict(detail_dict)
            jobs.append((row["instance_id"], detail, sub_q1))

    ne_jobs = [(i, job) for i, job in enumerate(jobs) if job[1].kind == rules.KIND_NAMED_ENTITY]
    ne_candidates = {}
    if ne_jobs:
        generated = substitution.propose_fake_entities([job[1] for _, job in ne_jobs], gateway)
        ne_candidates = {index: cand for (index, _), cand in zip(ne_jobs, generated)}

    def score_mlm(indexed_job):
        index, (instance_id, detail, sub_q1) = indexed_job
        try:
            return index, substitution.propose_mlm_candidates(
                sub_q1, detail, gateway, constraint_cfg)
        except substitution.SubstitutionError as e:
            log.warning("instance %s: %s", instance_id, e)
            return index, []

    mlm_jobs = [(i, job) for i, job in enumerate(jobs) if job[1].kind == rules.KIND_OTHER]
    mlm_results = dict(gateway.map_indexed(score_mlm, mlm_jobs))

    rows = []
    for index, (instance_id, detail, sub_q1) in enumerate(jobs):
        if detail.kind == rules.KIND_NAMED_ENTITY:
            candidates = [ne_candidates[index]] if index in ne_candidates else []
        else:
            candidates = mlm_results.get(index, [])
        chosen = next((c for c in candidates if c.accepted), None)
        modified = None
        if chosen is not None:
            try:
                modified = substitution.apply_replacement(sub_q1, detail, chosen)
            except substitution.SubstitutionError as e:
                log.warning("instance %s: %s", instance_id, e)
                chosen = None
        rows.append({"instance_id": instance_id, "detail": detail.to_dict(),
                     "candidates": [c.to_dict() for c in candidates],
                     "chosen": chosen.to_dict() if chosen else None,
                     "modified_sub_q1": modified})
    _write_artifact(cfg.artifact("substitutions.jsonl"),
                    _stage_manifest(cfg, "substitute"), rows)
    _finish_gateway(gateway, args)


def stage_forge(cfg: PipelineConfig, args) -> None:
    _, substitution_rows = _read_artifact(cfg.require_artifact("substitutions.jsonl"))
    pairs = {p.instance_id: p for p in _load_subqa_rows(cfg)}
    instances = {i.id: i for i in _load_instances(cfg)}
    gateway = _build_gateway(cfg, args)

    tuples: list[forge.FakeTuple] = []
    rejections = []
    ordinals: dict[str, int] = {}
    for row in substitution_rows:
        if not row["chosen"]:
            continue
        instance_id = row["instance_id"]
        if instance_id not in pairs or instance_id not in instances:
            continue
        ordinal = ordinals.get(instance_id, 0)
        ordinals[instance_id] = ordinal + 1
        try:
            fake = forge.build_fake_tuple(
                pairs[instance_id], row["modified_sub_q1"], row["detail"]["kind"],
                tuple_id=f"{instance_id}#{ordinal}")
        except forge.MaskingFailed as e:
            rejections.append({"instance_id": instance_id, "stage": "mask",
                               "reason": str(e)})
            continue
        tuples.append(fake)

    def generate(fake: forge.FakeTuple):
        gold = instances[fake.source_instance].gold_paragraphs()
        try:
            return fake, forge.generate_distractor_pair(fake, gold, gateway), None
        except forge.GenerationFailed as e:
            return fake, None, {"instance_id": fake.source_instance, "stage": "generate",
                                "tuple_id": fake.tuple_id, "reason": str(e), "raw": e.raw}

    rows = []
    for fake, pair, failure in gateway.map_indexed(generate, tuples):
        if failure is not None:
            rejections.append(failure)
            continue
        rows.append({"tuple": fake.to_dict(), "pair": pair.to_dict()})
    _write_artifact(cfg.artifact("pairs.jsonl"), _stage_manifest(cfg, "forge"), rows)
    _write_artifact(cfg.artifact("rejections.jsonl"), _stage_manifest(cfg, "forge"),
                    rejections)
    _finish_gateway(gateway, args)


def stage_attack(cfg: PipelineConfig, args) -> None:
    _, pair_rows = _read_artifact(cfg.require_artifact("pairs.jsonl"))
    instances = _load_instances(cfg)
    attack_cfg = cfg.attack_config(
        k=args.k, related=args.related, second_subq_only=args.second_subq_only,
        detail_kind_filter=args.detail_kind, seed=args.seed)

    pool = [forge.DistractorPair.from_dict(r["pair"]) for r in pair_rows]
    tuples_by_id = {r["tuple"]["tuple_id"]: r["tuple"] for r in pair_rows}
    entries = []
    skipped = []
    for instance in instances:
        try:
            entries.append(forge.assemble_attack(instance, pool, attack_cfg))
        except forge.AssemblyError as e:
            skipped.append({"instance_id": instance.id, "reason": str(e)})
    if not entries:
        raise StageError("attack produced no entries; check pool size and config")

    dataset = corpus.AdversarialDataset.build(
        entries, config={"pipeline": cfg.raw, "attack": attack_cfg.to_dict()},
        seed=attack_cfg.seed, tool_version=__version__)
    corpus.save_dataset(dataset, cfg.artifact("adversarial.jsonl"))
    log.info("wrote %s (%d entries, %d skipped)", cfg.artifact("adversarial.jsonl"),
             len(entries), len(skipped))

    sidecar_rows = []
    for entry in entries:
        refs = sorted({prov["tuple_ref"] for _, _, prov in entry.injected})
        sidecar_rows.append({
            "instance_id": entry.id,
            "tuples": [tuples_by_id[r] for r in refs if r in tuples_by_id],
            "fake_answers": [prov["fake_answer"] for _, _, prov in entry.injected],
            "rejections": [s for s in skipped if s["instance_id"] == entry.id]})
    sidecar_rows.append({"instance_id": None, "skipped": skipped})
    _write_artifact(cfg.artifact("adversarial.sidecar.jsonl"),
                    _stage_manifest(cfg, "attack", seed=attack_cfg.seed), sidecar_rows)


def _load_eval_dataset(path: Path):
    """Either plain instances or attacked entries, detected per record."""
    head, rows = _read_artifact(path)
    out = []
    for row in rows:
        if "base" in row:
            out.append(forge.AdversarialInstance.from_dict(row))
        else:
            out.append(corpus.QAInstance.from_dict(row))
    return head, out


def stage_evaluate(cfg: PipelineConfig, args) -> None:
    dataset_path = Path(args.dataset) if args.dataset else cfg.require_artifact("adversarial.jsonl")
    _, loaded = _load_eval_dataset(dataset_path)
    style = cfg.prompt_style(args.style)
    gateway = _build_gateway(cfg, args)

    subq = getattr(args, "sub_question", None)
    if subq:
        pairs = {p.instance_id: p for p in _load_subqa_rows(cfg)}
        swapped = []
        for inst in loaded:
            qa = inst.attacked_instance() if isinstance(inst, forge.AdversarialInstance) else inst
            pair = pairs.get(qa.id)
            if pair is None:
                log.warning("no sub-question annotation for %s; skipped", qa.id)
                continue
            question = pair.sub_q1 if subq == 1 else pair.sub_q2
            answer = pair.sub_q1_answer if subq == 1 else pair.final_answer
            swapped.append(corpus.QAInstance(
                id=qa.id, question=question, answer=answer, paragraphs=qa.paragraphs,
                supporting_fact_refs=qa.supporting_fact_refs,
                question_type=qa.question_type, valid_shape=qa.valid_shape))
        loaded = swapped

    def ask(inst):
        qa = inst.attacked_instance() if isinstance(inst, forge.AdversarialInstance) else inst
        request = evalharness.build_prompt(qa, style)
        completions = gateway.chat(request)
        extracted = [evalharness.extract_final_answer(c) for c in completions]
        answer = (evalharness.self_consistency_vote(extracted)
                  if len(extracted) > 1 else extracted[0])
        return {"instance_id": qa.id, "completions": completions, "answer": answer}

    prediction_rows = gateway.map_indexed(ask, loaded)
    predictions = {row["instance_id"]: row["answer"] for row in prediction_rows}
    report = evalharness.score_dataset(loaded, predictions)

    tag = args.tag or dataset_path.stem
    _write_artifact(cfg.artifact(f"predictions_{tag}.jsonl"),
                    _stage_manifest(cfg, "evaluate"), prediction_rows)
    scores = {"config_digest": cfg.digest, "tool_version": __version__,
              "style": style.mode, "dataset": str(dataset_path)}
    scores.update(report.to_dict())
    atomic_write_text(cfg.artifact(f"scores_{tag}.json"),
                      json.dumps(scores, ensure_ascii=False, indent=2) + "\n")
    log.info("scores_%s.json: EM %.3f F1 %.3f over %d instances",
             tag, report.em, report.f1, len(report.records))
    _finish_gateway(gateway, args)


def _load_scores(path: str | Path) -> tuple[dict, evalharness.Report]:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    return data, evalharness.Report.from_dict(data)


def stage_report(args) -> None:
    ori_meta, ori_report = _load_scores(args.ori)
    adv_meta, adv_report = _load_scores(args.adv)
    if ori_meta.get("config_digest") != adv_meta.get("config_digest") and not args.force:
        raise StageError("score files come from different configs; rerun or pass --force")
    table = evalharness.render_comparison(ori_report, adv_report)
    print(table)
    out_dir = Path(args.out) if args.out else Path(args.adv).parent
    atomic_write_text(out_dir / "report.txt", table + "\n")
    payload = {"ori": ori_meta["overall"], "adv": adv_meta["overall"],
               "breakdowns": adv_report.breakdowns,
               "config_digest": adv_meta.get("config_digest")}
    atomic_write_text(out_dir / "report.json",
                      json.dumps(payload, ensure_ascii=False, indent=2) + "\n")


def stage_dire(cfg: PipelineConfig, args) -> None:
    instances = _load_instances(cfg)
    pairs = {p.instance_id: p for p in _load_subqa_rows(cfg)}
    rows = []
    for instance in instances:
        pair = pairs.get(instance.id)
        if pair is None or len(instance.gold_paragraphs()) != 2:
            continue
        probe = evalharness.build_dire_probe(instance, pair)
        rows.append(probe.to_dict())
    _write_artifact(cfg.artifact("dire.jsonl"), _stage_manifest(cfg, "dire"), rows)


def stage_consistency(args) -> None:
    _, ori = _load_scores(args.ori)
    _, sub1 = _load_scores(args.sub1)
    _, sub2 = _load_scores(args.sub2)
    sub1_by_id = {r.instance_id: r for r in sub1.records}
    sub2_by_id = {r.instance_id: r for r in sub2.records}
    records = []
    for r in ori.records:
        if r.instance_id not in sub1_by_id or r.instance_id not in sub2_by_id:
            raise StageError(f"sub-question scores missing for {r.instance_id}")
        records.append(evalharness.ConsistencyRecord(
            instance_id=r.instance_id,
            orig_correct=evalharness.is_correct(r.f1),
            sub1_correct=evalharness.is_correct(sub1_by_id[r.instance_id].f1),
            sub2_correct=evalharness.is_correct(sub2_by_id[r.instance_id].f1)))
    all_correct, shortcut, no_bridge = evalharness.consistency_breakdown(records)
    payload = {"all_correct": all_correct,
               "correct_but_subquestions_wrong": shortcut,
               "wrong_but_subquestions_correct": no_bridge,
               "n": len(records)}
    print(json.dumps(payload, indent=2))
    if args.out:
        atomic_write_text(args.out, json.dumps(payload, indent=2) + "\n")


def stage_review_export(cfg: PipelineConfig, args) -> None:
    dataset = corpus.load_dataset(cfg.require_artifact("adversarial.jsonl"))
    seed = args.seed if args.seed is not None else cfg.seed("review_shuffle")
    items = review.build_review_items(dataset, seed=seed)
    _write_artifact(cfg.artifact("review_items.jsonl"),
                    _stage_manifest(cfg, "review-export", seed=seed),
                    [item.to_dict() for item in items])
    sample_size = args.sample_size or min(100, len(dataset.entries))
    batch = forge.export_review_batch(dataset, sample_size, seed)
    _write_artifact(cfg.artifact("audit_sample.jsonl"),
                    _stage_manifest(cfg, "review-export", seed=seed), batch)


def load_review_items(path: str | Path) -> list[review.ReviewItem]:
    _, rows = _read_artifact(Path(path))
    return [review.ReviewItem(item_id=r["item_id"], question=r["question"],
                              options=r["options"],
                              gold_option_index=r["gold_option_index"],
                              gold_lines=r["gold_lines"],
                              distractor_lines=r["distractor_lines"]) for r in rows]


def stage_serve_review(args) -> None:
    import uvicorn

    settings = {}
    if args.config:
        settings = PipelineConfig.load(args.config).raw.get("review", {})
    items_path = args.items or settings.get("items")
    data_path = args.data or settings.get("data")
    if not items_path or not data_path:
        raise StageError("serve-review needs --items and --data (flags or review.* config)")
    items = load_review_items(items_path)
    app = review.create_review_app(items, data_path=data_path)
    static = args.static or settings.get("static")
    if static:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static, html=True), name="ui")
    uvicorn.run(app, host=args.host or settings.get("host", "127.0.0.1"),
                port=args.port or int(settings.get("port", 8902)),
                log_level="warning")


def stage_mock_server(args) -> None:
    import uvicorn

    from .mock_models import create_app

    uvicorn.run(create_app(seed=args.seed), host=args.host, port=args.port,
                log_level="warning")


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopforge",
        description="Generate plausible-distractor attacks on multi-hop QA data "
                    "and evaluate models on them.")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, needs_config=True, gateway=False, help=None):
        p = sub.add_parser(name, help=help)
        if needs_config:
            p.add_argument("--config", required=True, help="pipeline config JSON")
        if gateway:
            p.add_argument("--replay", metavar="CASSETTE", help="replay from cassette")
            p.add_argument("--record", metavar="CASSETTE", help="record to cassette")
            p.add_argument("--endpoint-config", help="JSON overriding gateway endpoints")
        return p

    add("ingest", help="load and validate the corpus and sub-question files")
    add("parse-import", help="import CoNLL-U parses and NER sidecar")
    add("extract", help="run the main-entity and detail rules")
    add("substitute", gateway=True, help="generate and filter replacement candidates")
    add("forge", gateway=True, help="build fake tuples and distractor paragraph pairs")

    p = add("attack", help="assemble the adversarial dataset")
    p.add_argument("--k", type=int, choices=(2, 4))
    p.add_argument("--related", dest="related", action="store_true", default=None)
    p.add_argument("--unrelated", dest="related", action="store_false")
    p.add_argument("--second-subq-only", action="store_true", default=None)
    p.add_argument("--detail-kind", choices=("named-entity", "other"))
    p.add_argument("--seed", type=int)

    p = add("evaluate", gateway=True, help="prompt a model over a dataset and score it")
    p.add_argument("--style", choices=("normal", "cot", "cot-instructed", "cot-sc"))
    p.add_argument("--dataset", help="dataset file (defaults to the attack artifact)")
    p.add_argument("--sub-question", type=int, choices=(1, 2))
    p.add_argument("--tag", help="artifact name suffix")

    p = sub.add_parser("report", help="comparison table from two score files")
    p.add_argument("--ori", required=True)
    p.add_argument("--adv", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--out")

    add("dire", help="build probes with the bridging gold paragraph removed")

    p = sub.add_parser("consistency", help="whole-vs-sub-question correctness rates")
    p.add_argument("--ori", required=True)
    p.add_argument("--sub1", required=True)
    p.add_argument("--sub2", required=True)
    p.add_argument("--out")

    p = add("review-export", help="export review items and the audit sample")
    p.add_argument("--sample-size", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("serve-review", help="serve the review HTTP API")
    p.add_argument("--config", help="pipeline config with a review.* section")
    p.add_argument("--items", help="review items artifact")
    p.add_argument("--data", help="append-only response log path")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--static", help="directory of built frontend assets to serve")

    p = sub.add_parser("mock-server", help="deterministic mock model endpoints")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8901)
    p.add_argument("--seed", type=int, default=0)

    return parser


_STYLE_ALIASES = {"normal": "normal", "cot": "cot", "cot-instructed": "cot_instructed",
                  "cot-sc": "cot_self_consistency"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "style", None):
        args.style = _STYLE_ALIASES[args.style]
    try:
        if args.command == "report":
            stage_report(args)
        elif args.command == "consistency":
            stage_consistency(args)
        elif args.command == "serve-review":
            stage_serve_review(args)
        elif args.command == "mock-server":
            stage_mock_server(args)
        else:
            cfg = PipelineConfig.load(args.config)
            cfg.output_dir.mkdir(parents=True, exist_ok=True)
            stage = {
                "ingest": stage_ingest,
                "parse-import": stage_parse_import,
                "extract": stage_extract,
                "substitute": stage_substitute,
                "forge": stage_forge,
                "attack": stage_attack,
                "evaluate": stage_evaluate,
                "dire": stage_dire,
                "review-export": stage_review_export,
            }[args.command]
            stage(cfg, args)
    except (StageError, corpus.CorpusParseError, corpus.SubQAValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
