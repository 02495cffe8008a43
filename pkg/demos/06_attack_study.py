"""Replay-counter takeover of a breaker status stream.

Subscribers trust the publication with the highest state number.  An
attacker who joins the network and sends one forged frame with an
inflated counter owns the stream: the victim acts on the forged state,
and every later legitimate frame looks stale and is dropped.

The same run twice, once clean and once with the attack script active,
pins the blast radius: the logs are byte-identical up to the first
attack tick and differ from there on.
"""

from sgcr.compile import compile_range, load_bundle_files
from sgcr.kernel import (make_fci_stnum_attack, run_attack_fci_stnum,
                         serialize_attack_script)
from sgcr.samples import build_three_substation_bundle

spec = compile_range(load_bundle_files(build_three_substation_bundle()))

# The script is plain XML, loadable with `sgcr run --attack <file>`.
script = make_fci_stnum_attack(spec, app_id=0x1001, tick=5, stnum=1000)
print("attack script:")
print(serialize_attack_script(script))

result = run_attack_fci_stnum(spec, app_id=0x1001, tick=5, steps=30)
print(f"first divergence between clean and attacked log: "
      f"tick {result.divergence_tick}")

# -- what the subscriber saw ------------------------------------------------------

print("\nsubscriber verdicts on app 0x1001 (attacked run):")
for record in result.attacked.ticks():
    for ied, app_id, stnum, verdict in record["goose"]:
        if app_id == 0x1001:
            tag = "  <-- forged" if stnum >= 1000 else ""
            print(f"  t={record['t']:2d}  {ied} saw stnum {stnum:4d}: "
                  f"{verdict}{tag}")

# -- physical consequence ---------------------------------------------------------

def tie_state(log):
    return {r["t"]: r["switches"]["S2_TIE12"] for r in log.ticks()}

clean, attacked = tie_state(result.baseline), tie_state(result.attacked)
flipped = next(t for t in attacked if not attacked[t])
print(f"\nvictim breaker S2_TIE12: closed all run in the clean log, "
      f"open from tick {flipped} under attack")
assert all(clean.values())

# The forged frame claimed the remote end opened; the interlock then
# opened the local end for real.  One spoofed packet, one real outage.
interlocks = [(r["t"], a["ied"]) for r in result.attacked.ticks()
              for a in r["actions"] if a["kind"] == "interlock"]
print(f"interlock actions in the attacked run: {interlocks}")
