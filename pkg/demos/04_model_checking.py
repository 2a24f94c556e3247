#!/usr/bin/env python3
"""Bounded consistency and completeness checking with witnesses.

Consistency: at most one guard may hold on any state. Completeness: every
state a transition can produce must satisfy some guard. Both checks are
bounded (sampled here) and failures come with a concrete witness state.
"""

import json

from causalkit import (
    CheckStrategy,
    analyze,
    load_model,
    report_to_json,
)

OVERLAP = """
model overlap {
  state { x: real in [-2.0, 2.0]; }
  init { x = 0.0; }
  law Neg { when x < 1.0;  then { x = x - 1.0; } }
  law Pos { when x > -1.0; then { x = x + 1.0; } }
}
"""

ESCAPING = """
model escaping {
  state { x: real in [-1.0, 0.0]; }
  init { x = -1.0; }
  law Step { when x < 0.0; then { x = x + 1.0; } }
}
"""

PARTITION = """
model partition {
  state { x: real in [-2.0, 2.0]; }
  init { x = 1.0; }
  law Down { when x >= 0.0; then { x = x - 1.0; } }
  law Up   { when x < 0.0;  then { x = x + 1.0; } }
}
"""


def show(name, source):
    model = load_model(source)
    report = analyze(model, CheckStrategy("sample", count=10_000, seed=1))
    data = report_to_json(report)
    print(f"--- {name} ---")
    print(f"consistency:  {data['consistency']['status']}")
    if "witness" in data["consistency"]:
        witness = data["consistency"]["witness"]["values"]
        print(f"  witness: {json.dumps(witness)}")
        print(f"  overlapping laws: {data['consistency']['laws']}")
    print(f"completeness: {data['completeness']['status']}")
    if "witness" in data["completeness"]:
        witness = data["completeness"]["witness"]["values"]
        print(f"  escaped state: {json.dumps(witness)}")
        print(f"  produced by: {data['completeness']['producingLaw']}")
    print()


def main():
    show("overlap (inconsistent by design)", OVERLAP)
    show("escaping (incomplete by design)", ESCAPING)
    show("partition (clean)", PARTITION)


if __name__ == "__main__":
    main()
