"""Drive each protection relay kind through its thresholds.

Every sweep bundle is a two-bus toy network whose load profile ramps a
measured quantity across the alarm level at step 1 and the trip level at
step 2.  The relay raises exactly one alarm, then one trip, and the trip
opens a real breaker in the solved network.
"""

from sgcr.compile import compile_range, load_bundle_files
from sgcr.kernel import RangeKernel
from sgcr.samples import make_protection_bundle

SWEEPS = {
    "PTOC": "overcurrent: line current ramps up",
    "PTOV": "overvoltage: capacitive load raises the bus",
    "PTUV": "undervoltage: heavy load drags the bus down",
    "PDIF": "differential: a mid-line tap steals current",
    "PDIS": "distance: apparent impedance collapses",
}

# One tick beyond the profile shows the trip landing: the breaker the
# relay targeted is open and its island reads zero volts.

for kind, story in SWEEPS.items():
    spec = compile_range(load_bundle_files(make_protection_bundle(kind)))
    kernel = RangeKernel(spec)
    kernel.run(spec.n_steps + 1)

    print(f"{kind}  ({story})")
    for record in kernel.log.ticks():
        relay_acts = [a for a in record["actions"]
                      if a["kind"] in ("alarm", "trip")]
        gear = "  ".join(f"{name} {'closed' if on else 'OPEN'}"
                         for name, on in sorted(record["switches"].items()))
        marks = ", ".join(
            f'{a["kind"]} {a["subject"]}' + (f' ({a["note"]})' if a["note"] else "")
            for a in relay_acts) or "-"
        print(f"  t={record['t']}  {gear:18s}  {marks}")
    print()
