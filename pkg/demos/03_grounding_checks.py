"""The three-level grounding check and the alignment-preserving filter.

Run with:  python demos/03_grounding_checks.py
"""

from homegate import filter_sequence, load_snapshot, parse_sequence, render_sequence, verify_action
from homegate.sampledata import four_room_home

home = load_snapshot(four_room_home())

# Room, then device, then capability; the first failed level explains itself.
for text in (
    "{bedroom.reading_lamp.turn_on()}",       # fine
    "{garage.reading_lamp.turn_on()}",        # no such room
    "{kitchen.dehumidifier.set_humidity(50)}",  # no such device in that room
    "{bedroom.reading_lamp.set_temperature(20)}",  # lamp has no such method
    "{kitchen.oven.set_temperature(9999)}",   # argument out of range
):
    action = parse_sequence(text)[0]
    result = verify_action(action, home)
    print(f"{str(action):50s} passed={result.passed}  reason={result.failure_reason}")

# Filtering a whole candidate sequence keeps its shape: failures are replaced
# in place, never dropped, so valid commands after a failure still run.
raw = parse_sequence(
    "{bedroom.reading_lamp.turn_on(), kitchen.dehumidifier.set_humidity(50), entrance.smart_lock.lock()}"
)
outcome = filter_sequence(raw, home)
print("\nraw:     ", render_sequence(raw))
print("filtered:", render_sequence(outcome.final))
print("failed devices:", sorted(outcome.error_set))
