"""Prompt construction, answer extraction, token-level scoring and analyses.

Scoring follows the standard extractive-QA convention: answers are
lowercased, stripped of punctuation and articles, whitespace-split, and
compared as token multisets.  Breakdowns group attacked instances by their
attack parameters; the significance test is a paired one-sided Student
t-test with the upper tail computed from the regularized incomplete beta
function (an independent statistics package is used only as a test oracle).
"""

from __future__ import annotations

import logging
import math
import re
import string
from collections import Counter
from dataclasses import dataclass, field

from . import prompts
from .corpus import QAInstance
from .forge import AdversarialInstance
from .gateway import ChatRequest

log = logging.getLogger(__name__)

MODE_NORMAL = "normal"
MODE_COT = "cot"
MODE_COT_INSTRUCTED = "cot_instructed"
MODE_COT_SELF_CONSISTENCY = "cot_self_consistency"
MODES = (MODE_NORMAL, MODE_COT, MODE_COT_INSTRUCTED, MODE_COT_SELF_CONSISTENCY)

CORRECTNESS_F1_THRESHOLD = 0.5


@dataclass
class PromptStyle:
    mode: str = MODE_COT
    exemplar_count: int = 2
    n_samples: int = 1
    sc_temperature: float = 0.7

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown prompt mode {self.mode!r}")
        if self.mode != MODE_COT_SELF_CONSISTENCY and self.n_samples != 1:
            raise ValueError(f"{self.mode} mode requires n_samples=1")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "PromptStyle":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


def build_prompt(instance: QAInstance, style: PromptStyle) -> ChatRequest:
    """Render the instance's 10 paragraphs and question into a chat request."""
    cot = style.mode != MODE_NORMAL
    system = prompts.qa_system_prompt(cot=cot, exemplar_count=style.exemplar_count,
                                      instructed=style.mode == MODE_COT_INSTRUCTED)
    temperature = style.sc_temperature if style.mode == MODE_COT_SELF_CONSISTENCY else 0.0
    return ChatRequest(system_prompt=system,
                       messages=[("user", prompts.qa_user_message(
                           instance.paragraphs, instance.question))],
                       temperature=temperature, max_tokens=512,
                       n_samples=style.n_samples)


_FINAL_ANSWER = re.compile(re.escape(prompts.FINAL_ANSWER_MARKER), re.IGNORECASE)


def extract_final_answer(completion: str) -> str:
    """Text after the last "Final Answer:" marker; last nonempty line otherwise."""
    matches = list(_FINAL_ANSWER.finditer(completion))
    if matches:
        tail = completion[matches[-1].end():].strip()
        answer = tail.split("\n", 1)[0].strip() if tail else ""
    else:
        lines = [l.strip() for l in completion.splitlines() if l.strip()]
        answer = lines[-1] if lines else ""
    return answer.rstrip(".").strip()


_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize(text: str) -> list[str]:
    """Lowercase, drop punctuation (no space inserted), drop articles, split."""
    lowered = text.lower()
    no_punct = lowered.translate(_PUNCT_TABLE)
    no_articles = _ARTICLES.sub(" ", no_punct)
    return no_articles.split()


def token_f1(prediction: str, gold: str) -> tuple[float, float, float, bool]:
    """Multiset token overlap -> (f1, precision, recall, exact_match)."""
    pred_tokens = normalize(prediction)
    gold_tokens = normalize(gold)
    em = pred_tokens == gold_tokens
    if not pred_tokens and not gold_tokens:
        return 1.0, 1.0, 1.0, True
    if not pred_tokens or not gold_tokens:
        return 0.0, 0.0, 0.0, False
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return f1, precision, recall, em


@dataclass
class ScoreRecord:
    instance_id: str
    em: bool
    f1: float
    precision: float
    recall: float
    answer_word_count: int

    def to_dict(self) -> dict:
        return {"instance_id": self.instance_id, "em": self.em, "f1": self.f1,
                "precision": self.precision, "recall": self.recall,
                "answer_word_count": self.answer_word_count}

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreRecord":
        return cls(instance_id=d["instance_id"], em=bool(d["em"]), f1=float(d["f1"]),
                   precision=float(d["precision"]), recall=float(d["recall"]),
                   answer_word_count=int(d["answer_word_count"]))


BREAKDOWN_DIMENSIONS = ("paragraph_count", "related", "modified_type", "second_subq_only")


def _breakdown_keys(entry: AdversarialInstance) -> dict[str, str]:
    cfg = entry.config
    kinds = {prov.get("detail_kind") for _, _, prov in entry.injected if prov}
    kinds.discard(None)
    modified = kinds.pop() if len(kinds) == 1 else "mixed"
    return {"paragraph_count": str(cfg.k),
            "related": "yes" if cfg.related else "no",
            "modified_type": modified,
            "second_subq_only": "yes" if cfg.second_subq_only else "no"}


@dataclass
class Report:
    records: list[ScoreRecord]
    em: float
    f1: float
    precision: float
    recall: float
    mean_answer_words: float
    breakdowns: dict[str, dict[str, dict]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"overall": {"em": self.em, "f1": self.f1, "precision": self.precision,
                            "recall": self.recall,
                            "mean_answer_words": self.mean_answer_words,
                            "n": len(self.records)},
                "breakdowns": self.breakdowns,
                "records": [r.to_dict() for r in self.records]}

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        overall = d["overall"]
        return cls(records=[ScoreRecord.from_dict(r) for r in d["records"]],
                   em=overall["em"], f1=overall["f1"], precision=overall["precision"],
                   recall=overall["recall"],
                   mean_answer_words=overall["mean_answer_words"],
                   breakdowns=d.get("breakdowns", {}))


def score_dataset(instances, predictions: dict[str, str]) -> Report:
    """Per-instance token scores plus aggregate means and parameter breakdowns.

    `instances` may mix plain QAInstances and attacked entries; only the
    latter contribute to the four attack-parameter breakdown groups.
    Breakdown keys with no instances are omitted rather than reported as 0.
    """
    records = []
    buckets: dict[str, dict[str, list[ScoreRecord]]] = {}
    for inst in instances:
        entry = inst if isinstance(inst, AdversarialInstance) else None
        qa = entry.attacked_instance() if entry is not None else inst
        if qa.id not in predictions:
            raise KeyError(f"no prediction for instance {qa.id}")
        prediction = predictions[qa.id]
        f1, precision, recall, em = token_f1(prediction, qa.answer)
        record = ScoreRecord(instance_id=qa.id, em=em, f1=f1, precision=precision,
                             recall=recall, answer_word_count=len(prediction.split()))
        records.append(record)
        if entry is not None:
            for dim, key in _breakdown_keys(entry).items():
                buckets.setdefault(dim, {}).setdefault(key, []).append(record)

    def mean(values):
        values = list(values)
        return sum(values) / len(values) if values else 0.0

    breakdowns = {}
    for dim, groups in buckets.items():
        breakdowns[dim] = {}
        for key, recs in sorted(groups.items()):
            breakdowns[dim][key] = {"n": len(recs),
                                    "em": mean(float(r.em) for r in recs),
                                    "f1": mean(r.f1 for r in recs),
                                    "ids": [r.instance_id for r in recs]}
    return Report(records=records,
                  em=mean(float(r.em) for r in records),
                  f1=mean(r.f1 for r in records),
                  precision=mean(r.precision for r in records),
                  recall=mean(r.recall for r in records),
                  mean_answer_words=mean(r.answer_word_count for r in records),
                  breakdowns=breakdowns)


@dataclass
class ConsistencyRecord:
    instance_id: str
    orig_correct: bool
    sub1_correct: bool
    sub2_correct: bool


def is_correct(f1: float) -> bool:
    return f1 > CORRECTNESS_F1_THRESHOLD


def consistency_breakdown(records: list[ConsistencyRecord]) -> tuple[float, float, float]:
    """Rates of (all correct), (whole right, a hop wrong), (hops right, whole wrong)."""
    if not records:
        raise ValueError("consistency_breakdown requires records")
    n = len(records)
    all_correct = sum(1 for r in records
                      if r.orig_correct and r.sub1_correct and r.sub2_correct) / n
    shortcut = sum(1 for r in records
                   if r.orig_correct and not (r.sub1_correct and r.sub2_correct)) / n
    no_bridge = sum(1 for r in records
                    if not r.orig_correct and r.sub1_correct and r.sub2_correct) / n
    return all_correct, shortcut, no_bridge


def build_dire_probe(instance: QAInstance, pair) -> QAInstance:
    """Drop the bridging gold paragraph, leaving 9 paragraphs with 1 gold.

    The bridge is the gold paragraph containing the first sub-answer; when
    neither contains it, the gold paragraph not containing the final answer
    goes.  A fully ambiguous instance loses its first gold by position,
    with a warning.
    """
    golds = [(i, p) for i, p in enumerate(instance.paragraphs) if p.gold]
    if len(golds) != 2:
        raise ValueError(f"instance {instance.id} has {len(golds)} gold paragraphs, need 2")

    def contains(p, needle):
        return needle.lower() in (p.title + " " + p.text()).lower()

    with_sub1 = [(i, p) for i, p in golds if contains(p, pair.sub_q1_answer)]
    if len(with_sub1) == 1:
        remove_index = with_sub1[0][0]
    elif len(with_sub1) == 2:
        without_final = [(i, p) for i, p in with_sub1 if not contains(p, instance.answer)]
        if len(without_final) == 1:
            remove_index = without_final[0][0]
        else:
            remove_index = golds[0][0]
            log.warning("instance %s: bridge ambiguous, removing first gold by position",
                        instance.id)
    else:
        without_final = [(i, p) for i, p in golds if not contains(p, instance.answer)]
        if len(without_final) == 1:
            remove_index = without_final[0][0]
        else:
            remove_index = golds[0][0]
            log.warning("instance %s: bridge ambiguous, removing first gold by position",
                        instance.id)

    removed_title = instance.paragraphs[remove_index].title
    paragraphs = [p for i, p in enumerate(instance.paragraphs) if i != remove_index]
    refs = [(t, s) for t, s in instance.supporting_fact_refs if t != removed_title]
    return QAInstance(id=instance.id, question=instance.question, answer=instance.answer,
                      paragraphs=paragraphs, supporting_fact_refs=refs,
                      question_type=instance.question_type, valid_shape=False)


def self_consistency_vote(answers: list[str]) -> str:
    """Majority over normalized forms; ties resolve to the earliest-sampled form."""
    if not answers:
        raise ValueError("self_consistency_vote requires answers")
    forms = [tuple(normalize(a)) for a in answers]
    counts = Counter(forms)
    best = max(counts.values())
    for answer, form in zip(answers, forms):
        if counts[form] == best:
            return answer
    raise AssertionError("unreachable")


@dataclass
class SignificanceResult:
    t_statistic: float
    p_value: float
    n: int
    direction: str = "ori_greater"
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"t_statistic": self.t_statistic, "p_value": self.p_value,
                "n": self.n, "direction": self.direction, "degenerate": self.degenerate}


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-14:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def _betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
             + a * math.log(x) + b * math.log(1.0 - x))
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: int) -> float:
    """Upper-tail probability P(T_df > t)."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    x = df / (df + t * t)
    tail = 0.5 * _betainc(df / 2.0, 0.5, x)
    return tail if t >= 0 else 1.0 - tail


def paired_ttest_one_sided(scores_ori: list[float],
                           scores_adv: list[float]) -> SignificanceResult:
    """One-sided paired t-test of H1: original scores exceed attacked scores."""
    if len(scores_ori) != len(scores_adv):
        raise ValueError("score lists must be paired (equal length)")
    n = len(scores_ori)
    if n < 2:
        raise ValueError("paired t-test requires n >= 2")
    diffs = [o - a for o, a in zip(scores_ori, scores_adv)]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    sd = math.sqrt(var)
    if sd == 0.0:
        if mean == 0.0:
            return SignificanceResult(t_statistic=0.0, p_value=1.0, n=n)
        t = math.inf if mean > 0 else -math.inf
        return SignificanceResult(t_statistic=t, p_value=0.0 if mean > 0 else 1.0,
                                  n=n, degenerate=True)
    t = mean / (sd / math.sqrt(n))
    return SignificanceResult(t_statistic=t, p_value=student_t_sf(t, n - 1), n=n)


def render_comparison(ori: Report, adv: Report) -> str:
    """Plain-text comparison table: overall EM/F1 plus the four breakdown groups.

    Values render as percentages; the adv row carries the delta against the
    original score over the same instances.
    """
    ori_by_id = {r.instance_id: r for r in ori.records}
    adv_ids = [r.instance_id for r in adv.records]
    missing = [i for i in adv_ids if i not in ori_by_id]
    if missing:
        raise ValueError(f"original scores missing for instances {missing[:5]}")

    def pct(x):
        return f"{100 * x:.1f}"

    def mean_over(ids, source, attr):
        values = [getattr(source[_id], attr) for _id in ids]
        return sum(float(v) for v in values) / len(values)

    lines = []
    ori_em = mean_over(adv_ids, ori_by_id, "em")
    ori_f1 = mean_over(adv_ids, ori_by_id, "f1")
    lines.append(f"{'Overall':24s}  EM            F1")
    lines.append(f"{'  ori':24s}  {pct(ori_em):>6s}        {pct(ori_f1):>6s}")
    lines.append(f"{'  adv':24s}  {pct(adv.em):>6s} ({100 * (adv.em - ori_em):+.1f})"
                 f" {pct(adv.f1):>6s} ({100 * (adv.f1 - ori_f1):+.1f})")

    titles = {"paragraph_count": "Paragraph Count", "related": "Paragraph Related",
              "modified_type": "Modified Type", "second_subq_only": "Second Sub-Q only"}
    for dim in BREAKDOWN_DIMENSIONS:
        groups = adv.breakdowns.get(dim)
        if not groups:
            continue
        lines.append("")
        lines.append(f"{titles[dim]} (F1)")
        for key, cell in groups.items():
            ids = cell["ids"]
            ori_mean = mean_over(ids, ori_by_id, "f1")
            delta = cell["f1"] - ori_mean
            lines.append(f"  {key:14s} n={cell['n']:<4d} ori {pct(ori_mean):>6s}"
                         f"  adv {pct(cell['f1']):>6s} ({100 * delta:+.1f})")
    return "\n".join(lines)
