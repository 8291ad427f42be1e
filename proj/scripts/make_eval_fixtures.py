# SPDX-License-Identifier: Apache-2.0
"""Generates the synthetic evaluation fixtures.

FLD-style items: a few propositional facts and rules, a hypothesis literal,
and the label obtained by forward chaining (PROVED if the literal follows,
DISPROVED if its negation follows, UNKNOWN otherwise). Labels are balanced.
Each item is written twice, once with formula text ("formulated") and once
in template English ("default"). bAbi-style items are single-supporting-fact
location questions.

usage: make_eval_fixtures.py OUT_DIR
"""
import json
import os
import random
import sys

ATOMS = "ABCDEFGHIJ"
EVENTS = {
    "A": "the avoidance", "B": "the hospitableness", "C": "the Eurasian", "D": "the sculling",
    "E": "the palpatoriness", "F": "the reddening", "G": "the quietness", "H": "the drift",
    "I": "the bargaining", "J": "the humming",
}
LABELS = ["PROVED", "DISPROVED", "UNKNOWN"]


def lit_formula(atom, positive):
    return f"{{{atom}}}" if positive else f"¬{{{atom}}}"


def lit_english(atom, positive):
    return f"{EVENTS[atom]} occurs" if positive else f"{EVENTS[atom]} does not occur"


def random_theory(rng):
    facts = []
    for atom in rng.sample(ATOMS, rng.randint(1, 3)):
        facts.append(("fact", [], (atom, rng.random() < 0.7)))
    for _ in range(rng.randint(1, 3)):
        atoms = rng.sample(ATOMS, rng.randint(2, 3))
        body = [(a, rng.random() < 0.8) for a in atoms[1:]]
        head = (atoms[0], rng.random() < 0.6)
        facts.append(("rule", body, head))
    rng.shuffle(facts)
    return facts


def closure(theory):
    known = set()
    changed = True
    while changed:
        changed = False
        for kind, body, head in theory:
            if all(b in known for b in body) and head not in known:
                known.add(head)
                changed = True
    return known


def render_fact(fact, formula):
    kind, body, head = fact
    lit = lit_formula if formula else lit_english
    if kind == "fact":
        return lit(*head) + ("" if formula else ".")
    if formula:
        premise = lit(*body[0]) if len(body) == 1 else "(" + " & ".join(lit(*b) for b in body) + ")"
        return f"{premise} ⇒ {lit(*head)}"
    premise = " and ".join(lit(*b) for b in body)
    return f"{lit(*head)} if {premise}."


def fld_items(rng, count, prefix):
    quota = {label: count // 3 + (1 if i < count % 3 else 0) for i, label in enumerate(LABELS)}
    items = []
    while any(quota.values()):
        theory = random_theory(rng)
        known = closure(theory)
        if any((a, not p) in known for a, p in known):
            continue  # contradictory theory
        atom, positive = rng.choice(ATOMS), rng.random() < 0.5
        if (atom, positive) in known:
            label = "PROVED"
        elif (atom, not positive) in known:
            label = "DISPROVED"
        else:
            label = "UNKNOWN"
        if quota[label] == 0:
            continue
        quota[label] -= 1
        items.append((theory, (atom, positive), label))
    rng.shuffle(items)
    out = {"default": [], "formulated": []}
    for n, (theory, hyp, label) in enumerate(items):
        for variant, formula in (("default", False), ("formulated", True)):
            hypothesis = (lit_formula if formula else lit_english)(*hyp) + ("" if formula else ".")
            out[variant].append({
                "id": f"{prefix}-{n:04d}",
                "hypothesis": hypothesis,
                "context": [render_fact(f, formula) for f in theory],
                "gold": label,
                "variant": variant,
            })
    return out


PEOPLE = ["Mary", "John", "Sandra", "Daniel"]
PLACES = ["kitchen", "garden", "office", "hallway", "bathroom", "bedroom"]
VERBS = ["went to", "moved to", "journeyed to", "travelled to"]


def babi_items(rng, count, prefix):
    items = []
    for n in range(count):
        where = {}
        lines = []
        for _ in range(rng.randint(2, 6)):
            person, place = rng.choice(PEOPLE), rng.choice(PLACES)
            where[person] = place
            lines.append(f"{person} {rng.choice(VERBS)} the {place}.")
        person = rng.choice(sorted(where))
        items.append({
            "id": f"{prefix}-{n:04d}",
            "story": " ".join(lines),
            "question": f"Where is {person}?",
            "gold": where[person],
        })
    return items


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def main(out_dir):
    os.makedirs(out_dir, exist_ok=True)
    rng = random.Random(20240601)
    test = fld_items(rng, 1000, "fld")
    shots = fld_items(rng, 30, "fld-shot")
    for variant in ("default", "formulated"):
        write_jsonl(os.path.join(out_dir, f"fld_{variant}.jsonl"), test[variant])
        write_jsonl(os.path.join(out_dir, f"fld_{variant}_shots.jsonl"), shots[variant])
    write_jsonl(os.path.join(out_dir, "babi.jsonl"), babi_items(rng, 1000, "babi"))
    write_jsonl(os.path.join(out_dir, "babi_shots.jsonl"), babi_items(rng, 30, "babi-shot"))


if __name__ == "__main__":
    main(sys.argv[1])
