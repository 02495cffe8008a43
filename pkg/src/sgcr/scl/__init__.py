"""Typed documents, parsing, supplements, and bundle validation."""

from .documents import (
    CE_BREAKER,
    CE_DISCONNECTOR,
    CE_GENERATOR,
    CE_LINE_TYPES,
    CE_LOAD,
    DOCUMENT_KINDS,
    GOOSE,
    ICD,
    PROTECTION_CLASSES,
    REPORT,
    RGOOSE,
    SCD,
    SED,
    SSD,
    Address,
    Bay,
    CommunicationSection,
    ConductingEquipment,
    ConnectedAp,
    ControlBlock,
    DataObject,
    DataSetDef,
    Header,
    IedSection,
    LogicalDevice,
    LogicalNode,
    PhysConn,
    PowerTransformer,
    ProcessSection,
    SclDocument,
    SubNetwork,
    Terminal,
    TransformerWinding,
    VoltageLevel,
    resolve_attribute_path,
    split_attribute_path,
    split_ln_token,
    structural_key,
    structurally_equal,
)
from .parse import parse_scl, serialize_scl
from .supplements import (
    CP_MAPPING,
    PLC_PROGRAM,
    POWER_PARAMS,
    SCADA_CONFIG,
    SUPPLEMENT_KINDS,
    THRESHOLDS,
    ComponentParams,
    MappingEntry,
    PlcStatement,
    PlcVariable,
    ScadaPoint,
    SupplementDoc,
    ThresholdEntry,
    parse_supplement,
    serialize_supplement,
)
from .validate import ValidationEntry, ValidationReport, validate_bundle

__all__ = [
    "Address", "Bay", "CE_BREAKER", "CE_DISCONNECTOR", "CE_GENERATOR",
    "CE_LINE_TYPES", "CE_LOAD", "CommunicationSection", "ComponentParams",
    "ConductingEquipment", "ConnectedAp", "ControlBlock", "CP_MAPPING",
    "DataObject", "DataSetDef", "DOCUMENT_KINDS", "GOOSE", "Header", "ICD",
    "IedSection", "LogicalDevice", "LogicalNode", "MappingEntry",
    "parse_scl", "parse_supplement", "PhysConn", "PLC_PROGRAM",
    "PlcStatement", "PlcVariable", "POWER_PARAMS", "PowerTransformer",
    "ProcessSection", "PROTECTION_CLASSES", "REPORT", "resolve_attribute_path",
    "RGOOSE", "SCADA_CONFIG", "ScadaPoint", "SCD", "SclDocument", "SED",
    "serialize_scl", "serialize_supplement", "split_attribute_path",
    "split_ln_token", "SSD", "structural_key", "structurally_equal",
    "SubNetwork", "SUPPLEMENT_KINDS", "SupplementDoc", "Terminal",
    "THRESHOLDS", "ThresholdEntry", "TransformerWinding", "ValidationEntry",
    "ValidationReport", "validate_bundle", "VoltageLevel",
]
