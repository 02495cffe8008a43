"""Parse, validate, and merge a multi-station model bundle.

Three substations are described in separate SSD files, two tie lines in
SED files, device capabilities in 45 ICD files, and the communication
layout in SCD files.  The merger folds all of them into one model while
recording where every element came from.
"""

from sgcr.compile import load_bundle_files
from sgcr.merge import merge_bundle
from sgcr.samples import build_three_substation_bundle
from sgcr.scl.validate import validate_bundle

files = build_three_substation_bundle()
print(f"bundle of {len(files)} files")
for name in sorted(files)[:6]:
    print("  ", name)
print("   ...")

bundle = load_bundle_files(files)
print(f"\nparsed: {len(bundle.ssds)} SSD, {len(bundle.seds)} SED, "
      f"{len(bundle.scds)} SCD, {len(bundle.icds)} ICD, "
      f"{len(bundle.supplements)} supplements")

# -- validation ---------------------------------------------------------------
# Cross-references are checked before anything is merged: every terminal
# must name a declared connectivity node, every threshold a real device,
# every mapping a real attribute path.

report = validate_bundle(bundle.scl_documents(), bundle.supplements)
print("\n" + report.summary())
for entry in report.entries[:4]:
    print("  ", entry)

# -- merging ------------------------------------------------------------------

merged = merge_bundle(bundle.ssds, seds=bundle.seds,
                      scds=bundle.scds, icds=bundle.icds)
print(f"\nmerged plant:  {merged.ssd.process_count()} processes, "
      f"{merged.ssd.bay_count()} bays, "
      f"{merged.ssd.equipment_count()} conducting equipment")
print(f"merged system: {len(merged.scd.ieds)} IED sections, "
      f"{merged.scd.subnetwork_count()} subnetworks")

# Every bay and access point remembers its source document.
tie_bays = {k: v for k, v in merged.provenance.items()
            if k.startswith("bay:") and "Tie" in k}
for key, origin in sorted(tie_bays.items()):
    print(f"  {key:28s} <- {origin}")

for warning in merged.warnings:
    print("warning:", warning)
