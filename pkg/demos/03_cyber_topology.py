"""Derive the communication network from cable identifiers.

Each access point in the system description names the cable it plugs
into.  Two endpoints sharing a cable id become a link; a cable with one
endpoint is a wiring fault and is rejected.  The result is the packet
network the virtual devices will talk over.
"""

import collections

from sgcr.compile import compile_range, load_bundle_files
from sgcr.export import export_topology
from sgcr.merge import merge_bundle
from sgcr.net_emu import build_cyber_topology
from sgcr.samples import build_three_substation_bundle

bundle = load_bundle_files(build_three_substation_bundle())
merged = merge_bundle(bundle.ssds, seds=bundle.seds,
                      scds=bundle.scds, icds=bundle.icds)

topology = build_cyber_topology(merged.scd)

kinds = collections.Counter(n.kind for n in topology.nodes.values())
print("nodes by kind:", dict(sorted(kinds.items())))
print("links:", len(topology.links))

# The three station LANs hang off one switch each; two trunk cables
# chain the switches together so routable traffic can cross stations.
for name in sorted(topology.nodes):
    node = topology.nodes[name]
    if node.kind == "switch":
        peers = collections.Counter(
            topology.nodes[link.peer_of(name)].kind
            for link in topology.links_of(name))
        print(f"  {name}: {sum(peers.values())} ports -> {dict(sorted(peers.items()))}")

gateway = next(n for n in topology.nodes.values() if n.kind == "gateway")
print(f"\nSCADA gateway {gateway.name} at {gateway.address.ip} is a network "
      "node like any other, so attacks apply to its traffic too")

# -- exports --------------------------------------------------------------------------
# Both layers serialize to JSON for programmatic use and to DOT for
# rendering with graphviz.

spec = compile_range(bundle)
dot = export_topology(spec, layer="cyber", fmt="dot")
print(f"\ncyber DOT export: {len(dot.splitlines())} lines, starts with:")
for line in dot.splitlines()[:4]:
    print("  ", line)

power_json = export_topology(spec, layer="power", fmt="json")
named = power_json.count('"name"')
print(f"\npower JSON export: {len(power_json)} bytes, {named} named elements")
