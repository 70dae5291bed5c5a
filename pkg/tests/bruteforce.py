"""Independent brute-force path enumerator used as the planner oracle.

Enumerates every step sequence up to a depth bound, keeping those whose
prefixes are all applicable and whose final state satisfies the goal, then
returns the minimal-length ones.  Deliberately shares no search machinery
with the planner.
"""

from __future__ import annotations

from citsgraph.scenario import step_applicable
from citsgraph.state import apply_effects, eval_condition


def brute_force_paths(initial, library, goal, kb, max_depth):
    hits = []

    def recurse(state, path):
        if eval_condition(state, goal).ok:
            hits.append(tuple(path))
            return
        if len(path) >= max_depth:
            return
        for step in library:
            if step_applicable(step, kb, state).ok:
                recurse(apply_effects(state, step.effects), path + [step.step_id])

    recurse(initial, [])
    if not hits:
        return ()
    shortest = min(len(p) for p in hits)
    return tuple(sorted({p for p in hits if len(p) == shortest}))
