"""System prompts and message templates for the three chat tasks.

The QA prompt asks for decomposed reasoning with a fixed "Final Answer:"
marker; the paragraph-writing prompt produces the two fake articles around
generated fake answers; the entity prompt generates typed fake named
entities in an index-aligned batch.
"""

from __future__ import annotations

FINAL_ANSWER_MARKER = "Final Answer:"

_QA_COT_HEADER = """You are a helpful, respectful, and honest question-answering assistant. You will be given a context and a question. Answer the question using only the context. You will break the questions into sub-questions. You will then use these sub-questions to get to the final answer. The final answer must have 'Final Answer: ' prepended to it. Thus your output will be in the following format:
Sub-question 1: [subquestion 1]
Answer: [answer 1]
sub-question 2: [subquestion 2]
Answer: [answer 2]
Sub-question n: [subquestion n]
Answer: [answer n]
Final Answer: [final answer]
The final answer should be limited to 5 words with just the answer and no explanation/information.
Here are some past conversations:"""

QA_COT_EXEMPLARS = [
    """Context: ......
Question: 'Which government position was held by the woman who portrayed Corliss Archer in the film Kiss and Tell'?
Sub-question 1: Which woman portrayed Corliss Archer in the film Kiss and Tell?.
Answer: Shirley Temple.
Sub-question-2: Which government position was held by Shirley Temple?
Answer: Chief of Protocol
Final Answer: Chief of Protocol.""",
    """Context : .......
Question: What is the name of the fight song of the university whose main campus is in Lawrence, Kansas and whose branch campuses are in the Kansas City metropolitan area?
Sub-question 1: Which university has its main campus in Lawrence, Kansas and has branch campuses in Kansas City metropolitan area?
Answer: University of Kansas
Sub-question 2: What is the name of the fight song of University of Kansas?
Answer: Kansas Song
Final Answer: Kansas Song""",
]

_QA_DIRECT_HEADER = """You are a helpful, respectful, and honest question-answering assistant. You will be given a context and a question. Answer the question using only the context. The final answer must have 'Final Answer: ' prepended to it. The final answer should be limited to 5 words with just the answer and no explanation/information.
Here are some past conversations:"""

QA_DIRECT_EXEMPLARS = [
    """Context: ......
Question: 'Which government position was held by the woman who portrayed Corliss Archer in the film Kiss and Tell'?
Final Answer: Chief of Protocol.""",
    """Context : .......
Question: What is the name of the fight song of the university whose main campus is in Lawrence, Kansas and whose branch campuses are in the Kansas City metropolitan area?
Final Answer: Kansas Song""",
]

# One fixed sentence appended in the "instructed" prompting variant.
IGNORE_IRRELEVANT_SENTENCE = (
    "Some of the provided context may be irrelevant or misleading; feel free to "
    "ignore any context that is not needed to answer the question.")


def qa_system_prompt(cot: bool, exemplar_count: int = 2, instructed: bool = False) -> str:
    header = _QA_COT_HEADER if cot else _QA_DIRECT_HEADER
    exemplars = (QA_COT_EXEMPLARS if cot else QA_DIRECT_EXEMPLARS)[:max(0, exemplar_count)]
    parts = [header] + exemplars
    if instructed:
        parts.append(IGNORE_IRRELEVANT_SENTENCE)
    return "\n".join(parts)


DISTRACTOR_PARAGRAPH_SYSTEM_PROMPT = """You are a helpful and respectful fake paragraph generating assistant. You will be given two questions, a few supporting paragraphs, and two words you need to avoid. You will first give a fake answer for the first question. The fake answer should not be the same as any of the two words that need to be avoided. Generate a fake paragraph using the information from the first question and the fake answer generated. The answer and information should not be related to any real-life entity. The paragraphs generated must match the tone of the given two paragraphs. Furthermore, the two paragraphs generated must not contradict any of the information in the supporting paragraphs provided by the user.

Use the fake answer generated for the first question to replace all instances of '[answer]' in the second question. Use the newly generated question and generate a fake answer for it. Ensure that the fake answer generated is not the same as any of the provided words you need to avoid. Similar to the first question, use the fake answer and the question to generate a fake paragraph. You will generate the fake paragraphs as if they were part of a Wikipedia article. You must maintain a neutral and informative tone.

Generate the two paragraphs as separate articles about 75-100 words each. All the answers and paragraphs must be made up of fake names and fake information. The information/names should not reference anyone in real life. Generate exactly one paragraph for each question. Remember to replace all instances of '[answer]' with the answer from the first question and adjust the paragraphs accordingly. However, you must not mention the fact that the details/entities in the paragraphs are fake/imaginary."""

FAKE_ENTITY_SYSTEM_PROMPT = """You are a helpful, respectful and honest fake named entity generator. You will be given upto 20 different entity types along with an example of that type. For each of the entity types, generate another named entity different of the same entity type given the named entity. There are a total of 18 different entity types. The different types and their definitions are as given below:
PERSON: People, including fictional
NORP: Nationalities or religious or political groups
FACILITY: Buildings, airports, highways, bridges, etc.
ORGANIZATION: Companies, agencies, institutions, etc.
GPE: Countries, cities, states
LOCATION: Non-GPE locations, mountain ranges, bodies of water
PRODUCT: Vehicles, weapons, foods, etc. (Not services)
EVENT: Named hurricanes, battles, wars, sports events, etc.
WORK OF ART: Titles of books, songs, etc.
LAW: Named documents made into laws
LANGUAGE: Any named language
DATE: Absolute or relative dates or periods
TIME: Times smaller than a day
PERCENT: Percentage (including "%")
MONEY: Monetary values, including unit
QUANTITY: Measurements, as of weight or distance
ORDINAL: "first", "second"
CARDINAL: Numerals that do not fall under another type
For each of the provided examples, you will generate one named entity of the same type.

Ensure that your final count of entities is equal to the number of entities in the given prompt. Use indices to help with keeping the count."""


def fake_entity_user_message(batch: list[tuple[str, str]]) -> str:
    """Indexed "i. TYPE: example" lines for a batch of up to 20 entities."""
    return "\n".join(f"{i}. {etype}: {example}"
                     for i, (etype, example) in enumerate(batch, start=1))


def distractor_user_message(fake_sub_q1: str, fake_sub_q2_template: str,
                            gold_paragraphs, avoid_words: tuple[str, str]) -> str:
    blocks = "\n".join(f"{p.title}: {p.text()}" for p in gold_paragraphs)
    return (
        f"Question 1: {fake_sub_q1}\n"
        f"Question 2: {fake_sub_q2_template}\n"
        f"Words to avoid: {avoid_words[0]}; {avoid_words[1]}\n"
        f"Supporting paragraphs:\n{blocks}\n\n"
        "Respond in exactly this format:\n"
        "Fake Answer 1: <fake answer to question 1>\n"
        "Paragraph 1: <article for question 1>\n"
        "Fake Answer 2: <fake answer to question 2>\n"
        "Paragraph 2: <article for question 2>")


def render_context(paragraphs) -> str:
    """The 10 context paragraphs as "Title: sentences" blocks, instance order."""
    return "\n".join(f"{p.title}: {p.text()}" for p in paragraphs)


def qa_user_message(paragraphs, question: str) -> str:
    return f"Context:\n{render_context(paragraphs)}\nQuestion: {question}"
