"""Walk through the home simulator: load a snapshot, inspect it, mutate it.

Run with:  python demos/01_simulated_home.py
"""

from homegate import Call, apply_action, capabilities_of, load_snapshot, lookup_device, render_state_text
from homegate.sampledata import four_room_home

# A home is a plain JSON document: rooms -> devices -> attributes + methods.
home = load_snapshot(four_room_home())
print("The flattened state every prompt sees:\n")
print(render_state_text(home))

# Lookups never raise; absence is an answer, not an error.
print("\nbedroom.reading_lamp  ->", lookup_device(home, "bedroom", "reading_lamp").attributes)
print("kitchen.dehumidifier ->", lookup_device(home, "kitchen", "dehumidifier"))
print(
    "entrance.smart_lock supports:",
    [cap.name for cap in capabilities_of(home, "entrance", "smart_lock")],
)

# Mutations are copy-on-write: each applied action returns the next version.
v1 = apply_action(home, Call("bedroom", "reading_lamp", "turn_on"))
v2 = apply_action(v1, Call("entrance", "smart_lock", "lock"))
print("\nversions:", home.timestamp, "->", v1.timestamp, "->", v2.timestamp)
print("lamp after:", lookup_device(v2, "bedroom", "reading_lamp").attributes["power"])
print("lamp before (untouched):", lookup_device(home, "bedroom", "reading_lamp").attributes["power"])

# Applying an unverified action is a contract violation, not a silent no-op.
try:
    apply_action(home, Call("kitchen", "dehumidifier", "set_humidity", (50,)))
except ValueError as exc:
    print("\nexpected refusal:", exc)
