"""Toolkit for building and evaluating plausible-distractor attacks on multi-hop QA data.

The pipeline ingests a HotpotQA-style corpus with human-annotated sub-question
decompositions, locates the modifiable details of each sub-question via
dependency-parse rules, swaps those details for constraint-filtered fakes, has
a chat model write distractor paragraph pairs around the fakes, assembles
attacked instances, and scores language models on the result.
"""

__version__ = "0.1.0"
