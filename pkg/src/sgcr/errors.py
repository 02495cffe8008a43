"""Exception types shared across the toolchain.

Every failure mode exposed by the public API maps to one of these classes so
callers can catch precisely.  Validation problems that are *reported* rather
than raised live in :mod:`sgcr.scl.validate` as report entries instead.
"""

from __future__ import annotations


class SgcrError(Exception):
    """Base class for all toolchain errors."""


# --- XML / model parsing ---------------------------------------------------

class XmlSyntax(SgcrError):
    """Input is not well-formed XML."""


class KindMismatch(SgcrError):
    """Document content contradicts the expected SCL kind."""


class SchemaViolation(SgcrError):
    """Mandatory attribute missing, duplicate name, or invariant broken."""


class LengthMismatch(SgcrError):
    """data_sequence lists within one parameter file differ in length."""


# --- merging ----------------------------------------------------------------

class DuplicateProcess(SgcrError):
    """Two inputs declare a process section with the same name."""


class NoMatchingVoltageLevel(SgcrError):
    """An exchange file references a process/voltage level absent from the inputs."""


class DuplicateIedName(SgcrError):
    """IED names collide after merging communication models."""


class CableCollision(SgcrError):
    """A cable id is reused in a way the namespacing policy cannot resolve."""


# --- power model ------------------------------------------------------------

class MissingParameter(SgcrError):
    """A power component has no parameter entry and no usable default."""


class UnknownStdType(SgcrError):
    """Cable std_type not present in the cable table."""


class StepOutOfRange(SgcrError):
    """Timestep index outside the configured horizon."""


class NoSlack(SgcrError):
    """No energized island with a slack generator exists."""


# --- shared state store -----------------------------------------------------

class UnregisteredPoint(SgcrError):
    """Point path used before registration."""


class ReadOnlyPoint(SgcrError):
    """Control write attempted on a solver-owned measurement point."""


# --- cyber emulation ---------------------------------------------------------

class DanglingCable(SgcrError):
    """Cable id present on exactly one endpoint."""


class CableTriple(SgcrError):
    """Cable id present on more than two endpoints."""


class Unroutable(SgcrError):
    """No delivery path or unknown destination address."""


class UnknownScope(SgcrError):
    """Tap scope names no node or link."""


# --- device runtimes ----------------------------------------------------------

class MissingThreshold(SgcrError):
    """Protection logical node present but no threshold entry configured."""


class UnmappedAttribute(SgcrError):
    """Dataset member has neither a physical mapping nor an internal source."""


class MissingValue(SgcrError):
    """Protection evaluation called without all monitored quantities."""


class NoSuchPath(SgcrError):
    """Read/write request names an attribute absent from the data model."""


class NotWritable(SgcrError):
    """Write request targets a non-controllable attribute."""


class UnboundVariable(SgcrError):
    """PLC statement references an undeclared variable."""


class ExpressionTypeError(SgcrError):
    """PLC expression mixes boolean and numeric operands illegally."""


class IedUnreachable(SgcrError):
    """Command could not reach the owning IED over the emulated network."""


# --- orchestration -------------------------------------------------------------

class CompileError(SgcrError):
    """Aggregated failure from range compilation; carries every error at once."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("range compilation failed:\n" + "\n".join(f"  - {p}" for p in problems))
