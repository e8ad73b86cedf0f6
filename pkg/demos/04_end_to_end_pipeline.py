"""The full route -> generate -> filter -> execute flow on three scenarios.

Run with:  python demos/04_end_to_end_pipeline.py
"""

from homegate import Pipeline, Session, load_snapshot, render_sequence
from homegate.backends import RuleOracleBackend
from homegate.sampledata import (
    four_room_home,
    lamp_command_ambiguous,
    lamp_command_resolvable,
    mixed_command,
    storeroom_command,
    storeroom_home,
    two_lamp_home,
)

pipeline = Pipeline(RuleOracleBackend(), RuleOracleBackend())

# 1. A mixed command: the impossible middle part is replaced in place, the
#    rest executes, and the feedback names exactly what was bypassed.
session = Session(home=load_snapshot(four_room_home()))
result = pipeline.execute_instruction(session, mixed_command())
print("mixed ->", result.outcome.value)
print("  final:   ", render_sequence(result.final))
print("  feedback:", result.feedback)

# 2. A command aimed at a room that does not exist: rejected before any
#    generation happens (note stage2_calls stays zero).
session = Session(home=load_snapshot(storeroom_home()))
result = pipeline.execute_instruction(session, storeroom_command())
print("\nimpossible ->", result.outcome.value)
print("  final:   ", render_sequence(result.final))
print("  feedback:", result.feedback)
print("  stage-2 calls:", result.usage.stage2_calls)

# 3. An underspecified reference. With one lamp off, the state resolves it
#    silently; with both off, the agent asks and resumes with the answer.
session = Session(home=load_snapshot(two_lamp_home("ON", "OFF")))
result = pipeline.execute_instruction(session, lamp_command_resolvable())
print("\nresolvable ->", result.outcome.value, render_sequence(result.final))

session = Session(home=load_snapshot(two_lamp_home("OFF", "OFF")))
asked = pipeline.execute_instruction(session, lamp_command_ambiguous())
print("ambiguous ->", asked.outcome.value, "question:", asked.question)
answered = pipeline.answer_clarification(session, "bedroom.lamp_b")
print("answered  ->", answered.outcome.value, render_sequence(answered.final))

print("\ntotal usage:", pipeline.tally.snapshot().to_json_dict())
