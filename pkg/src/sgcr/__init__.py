"""sgcr: compile IEC 61850 SCL model bundles into a runnable cyber range.

The package turns a set of substation description files (SSD/SED), IED
capability files (ICD), a network description (SCD), and supplementary
configuration (power parameters, point mappings, protection thresholds,
SCADA points, PLC logic) into a co-simulation: an AC power-flow solver,
a shared point database with an audit trail, a deterministic packet
network, virtual protection IEDs, soft PLCs, and a SCADA gateway.
"""

from __future__ import annotations

__version__ = "0.1.0"
