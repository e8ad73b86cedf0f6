"""The machine-instruction format: parsing model output, rendering it back.

Run with:  python demos/02_command_language.py
"""

from homegate import normalize_action, parse_sequence, render_sequence
from homegate.actions import parse_sequence_detailed

# The wire format is a brace-enclosed list of room.device.method(args) calls,
# with the literal token error_input marking refused positions.
for text in (
    "{kitchen.light.turn_on(), error_input}",
    "{study_room.dehumidifiers.set_intensity(0)}",
    'Sure, here you go: {bedroom.lamp.turn_on(), hall.fan.set_speed("high")} hope that helps!',
):
    sequence = parse_sequence(text)
    print(f"{text!r}\n  -> {sequence}\n  -> {render_sequence(sequence)}\n")

# Malformed items degrade to error tokens at the same position, so a noisy
# model cannot shift later commands out of alignment.
parsed = parse_sequence_detailed("{kitchen.light.turn_on(), @@garbage@@, hall.fan.turn_off()}")
print("with one malformed item:", render_sequence(parsed.actions))
print("item errors:", [(e.index, e.message) for e in parsed.item_errors])

# Normalization gives every action one canonical spelling for scoring.
from homegate import Call

print("\nnormalized:", normalize_action(Call("Kitchen", "Light", "Turn_On", (2.0,))))
