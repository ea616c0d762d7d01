#!/usr/bin/env python3
# Copyright 2026 The selqa Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes data/demo/model.json and data/demo/questions.json.

The toy model answers every "<source>: <question>" prompt and every verbal
prompt "<source>: <question>\\nAnswer: <answer> Answerable:". Which source is
right is fixed per question (both / document only / qa_history only /
neither). Verbal probabilities track correctness; likelihoods barely do.
"""

import argparse
import json
import pathlib
import random

SEED = 20261016
N_QUESTIONS = 120
N_DOCS = 5
EOS = "<eos>"
VERBAL = ["True", "False", "High", "Medium", "Low"]
WORDS = [
    "amber", "basalt", "cobalt", "delta", "ember", "fjord", "garnet", "harbor",
    "indigo", "juniper", "kestrel", "lagoon", "marble", "nectar", "onyx",
    "pylon", "quartz", "raven", "saffron", "tundra", "umber", "velvet",
    "willow", "xenon", "yarrow", "zephyr", "alder", "birch", "cedar", "dune",
    "elm", "flint", "glacier", "heron", "iris", "jasper", "kelp", "lotus",
]
# Share of questions per pattern: (doc correct, qa correct).
PATTERNS = [((True, True), 0.40), ((True, False), 0.20),
            ((False, True), 0.15), ((False, False), 0.25)]


def pattern_list(n, rng):
    out = []
    for (pattern, share) in PATTERNS:
        out += [pattern] * round(n * share)
    out = out[:n]
    while len(out) < n:
        out.append(PATTERNS[0][0])
    rng.shuffle(out)
    return out


def random_answer(rng, avoid_first):
    """1-2 token answer whose first token is not in avoid_first."""
    first = rng.choice([w for w in WORDS if w not in avoid_first])
    if rng.random() < 0.35:
        return [first, rng.choice([w for w in WORDS if w != first])]
    return [first]


class Model:
    def __init__(self):
        self.entries = {}

    def put(self, prompt, prefix, dist):
        dist = {k: v for k, v in dist.items() if v > 0}
        key = (prompt, tuple(prefix))
        assert key not in self.entries, key
        assert abs(sum(dist.values()) - 1.0) < 1e-12, (key, dist)
        self.entries[key] = dist

    def put_answers(self, prompt, weighted_answers):
        """weighted_answers: list of (tokens, prob), first tokens distinct."""
        root = {}
        for tokens, p in weighted_answers:
            assert tokens[0] not in root
            root[tokens[0]] = p
        self.put(prompt, [], root)
        for tokens, _ in weighted_answers:
            for i in range(1, len(tokens)):
                self.put(prompt, tokens[:i], {tokens[i]: 1.0})
            self.put(prompt, tokens, {EOS: 1.0})

    def put_verbal(self, prompt, p_true, flag_probs):
        self.put(prompt, [], {"True": p_true, "False": 1.0 - p_true})
        for flag, (p_high, p_medium) in flag_probs.items():
            low = 1.0 - p_high - p_medium
            self.put(prompt, [flag],
                     {"High": p_high, "Medium": p_medium, "Low": low})
            for bucket, p in (("High", p_high), ("Medium", p_medium),
                              ("Low", low)):
                if p > 0:
                    self.put(prompt, [flag, bucket], {EOS: 1.0})

    def to_json(self):
        entries = []
        for (prompt, prefix), dist in sorted(self.entries.items()):
            entries.append({
                "prompt": prompt,
                "prefix": list(prefix),
                "distribution": {k: round(v, 6) for k, v in dist.items()},
            })
        # Rounding can leave a residue; fold it into the largest entry.
        for e in entries:
            d = e["distribution"]
            top = max(d, key=lambda k: (d[k], k))
            d[top] = round(d[top] + 1.0 - sum(d.values()), 6)
        return {
            "vocabulary": WORDS + VERBAL + [EOS],
            "eos": EOS,
            "max_len": 3,
            "entries": entries,
        }


def reader_prompt(source, question):
    return f"{source}: {question}"


def verbal_prompt(source, question, answer_tokens):
    return (reader_prompt(source, question) + "\nAnswer: " +
            " ".join(answer_tokens) + " Answerable:")


def build(rng):
    model = Model()
    questions = []
    patterns = pattern_list(N_QUESTIONS // 2, rng) + pattern_list(
        N_QUESTIONS - N_QUESTIONS // 2, rng)
    for i in range(N_QUESTIONS):
        qid = f"q{i:03d}"
        text = f"which landmark is linked to clue {i}?"
        gold = random_answer(rng, set())
        gold_text = " ".join(gold)
        golds = [gold_text]
        if rng.random() < 0.3:
            golds.append("The " + gold_text.title())
        doc_ok, qa_ok = patterns[i]
        train = i < N_QUESTIONS // 2

        for source, ok in (("document", doc_ok), ("qa_history", qa_ok)):
            prompt = reader_prompt(source, text)
            if ok:
                top = gold
                p_top = rng.uniform(0.55, 0.95)
            else:
                top = random_answer(rng, {gold[0]})
                p_top = rng.uniform(0.5, 0.9)
            answers = [(top, p_top)]
            rest = 1.0 - p_top
            used = {top[0]}
            if not ok and rng.random() < 0.7:
                # The gold answer still gets some sampling mass.
                share = rest * rng.uniform(0.3, 0.8)
                answers.append((gold, share))
                used.add(gold[0])
                rest -= share
            alt = random_answer(rng, used | {gold[0]})
            answers.append((alt, rest))
            model.put_answers(prompt, answers)

            if ok:
                p_true = rng.uniform(0.4, 0.97)
                p_high = rng.uniform(0.25, 0.85)
            else:
                p_true = rng.uniform(0.05, 0.65)
                p_high = rng.uniform(0.02, 0.45)
            if abs(p_true - 0.5) < 0.02:
                p_true += 0.05
            p_medium = rng.uniform(0.0, 1.0 - p_high) * 0.6
            flag = "True" if p_true > 0.5 else "False"
            other = "False" if flag == "True" else "True"
            flag_probs = {
                flag: (p_high, p_medium),
                other: (round(rng.uniform(0.1, 0.4), 3),
                        round(rng.uniform(0.1, 0.4), 3)),
            }
            model.put_verbal(verbal_prompt(source, text, top), p_true,
                             flag_probs)

        docs = [f"notes on clue {i} part {k}: {rng.choice(WORDS)} "
                f"{rng.choice(WORDS)}" for k in range(N_DOCS)]
        if doc_ok or rng.random() < 0.3:
            pos = rng.randrange(N_DOCS)
            docs[pos] += f" near the {gold_text}"
        n_pairs = rng.randint(2, 5)
        pairs = []
        gold_rank = rng.randint(1, n_pairs) if qa_ok else None
        for rank in range(1, n_pairs + 1):
            if rank == gold_rank:
                answer = gold_text
                q = f"which landmark is tied to clue {i}?"
            else:
                answer = " ".join(random_answer(rng, {gold[0]}))
                q = f"which landmark is tied to clue {rng.randrange(1000)}?"
            pairs.append({"question": q, "answer": answer, "rank": rank})
        rng.shuffle(pairs)
        overlap = rng.random() < (0.7 if qa_ok else 0.2)
        questions.append({
            "id": qid,
            "question": text,
            "gold_answers": golds,
            "split": "train" if train else "test",
            "question_overlap": overlap,
            "doc_passages": docs,
            "qa_pairs": pairs,
        })
    return model.to_json(), {"version": "v1", "questions": questions}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(
        pathlib.Path(__file__).resolve().parent.parent / "data" / "demo"))
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model, questions = build(random.Random(SEED))
    (out / "model.json").write_text(json.dumps(model, indent=1) + "\n")
    (out / "questions.json").write_text(json.dumps(questions, indent=1) + "\n")


if __name__ == "__main__":
    main()
