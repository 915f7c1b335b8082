"""Defect taxonomy for Kubernetes configuration scripts.

Fifteen top-level categories, their sub-categories, the twelve consequences and
nine fix patterns, plus the category/consequence and category/fix-pattern
frequency tables. The frequency tables are stored exactly as observed so that
the modal lookups below can be audited against the source counts.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Optional


class Category(str, enum.Enum):
    CONDITIONAL = "Conditional"
    CONTAINER_PROVISIONING = "ContainerProvisioning"
    CUSTOM_RESOURCE = "CustomResource"
    DATA_FIELDS = "DataFields"
    ENTITY_REFERENCING = "EntityReferencing"
    INCORRECT_HELMING = "IncorrectHelming"
    NAMESPACES = "Namespaces"
    ORPHANISM = "Orphanism"
    POD_SCHEDULING = "PodScheduling"
    PROBING = "Probing"
    PROPERTY_ANNOTATION = "PropertyAnnotation"
    SECURITY = "Security"
    UNSATISFIED_DEPENDENCY = "UnsatisfiedDependency"
    VERSION_INCOMPATIBILITY = "VersionIncompatibility"
    VOLUME_MOUNTING = "VolumeMounting"

    @property
    def title(self) -> str:
        return re.sub(r"(?<!^)(?=[A-Z])", " ", self.value)


class SubCategory(str, enum.Enum):
    CLA = "CLA"
    RESOURCES = "Resources"
    BSE = "BSE"
    IDT = "IDT"
    IUPT = "IUPT"
    SYNTAX = "Syntax"
    VR = "VR"
    AC = "AC"
    ESD = "ESD"
    PP = "PP"
    SC = "SC"


SUB_CATEGORIES: dict[Category, tuple[SubCategory, ...]] = {
    Category.CONTAINER_PROVISIONING: (SubCategory.CLA, SubCategory.RESOURCES),
    Category.DATA_FIELDS: (
        SubCategory.BSE,
        SubCategory.IDT,
        SubCategory.IUPT,
        SubCategory.SYNTAX,
        SubCategory.VR,
    ),
    Category.SECURITY: (SubCategory.AC, SubCategory.ESD, SubCategory.PP, SubCategory.SC),
}

# Defect counts per (category, sub-category); None marks categories without
# sub-categories.
CATEGORY_COUNTS: dict[tuple[Category, Optional[SubCategory]], int] = {
    (Category.CONDITIONAL, None): 40,
    (Category.CONTAINER_PROVISIONING, SubCategory.CLA): 43,
    (Category.CONTAINER_PROVISIONING, SubCategory.RESOURCES): 9,
    (Category.CUSTOM_RESOURCE, None): 46,
    (Category.DATA_FIELDS, SubCategory.BSE): 2,
    (Category.DATA_FIELDS, SubCategory.IDT): 19,
    (Category.DATA_FIELDS, SubCategory.IUPT): 1,
    (Category.DATA_FIELDS, SubCategory.SYNTAX): 35,
    (Category.DATA_FIELDS, SubCategory.VR): 30,
    (Category.ENTITY_REFERENCING, None): 125,
    (Category.INCORRECT_HELMING, None): 13,
    (Category.NAMESPACES, None): 15,
    (Category.ORPHANISM, None): 10,
    (Category.POD_SCHEDULING, None): 12,
    (Category.PROBING, None): 22,
    (Category.PROPERTY_ANNOTATION, None): 12,
    (Category.SECURITY, SubCategory.AC): 76,
    (Category.SECURITY, SubCategory.ESD): 4,
    (Category.SECURITY, SubCategory.PP): 1,
    (Category.SECURITY, SubCategory.SC): 11,
    (Category.UNSATISFIED_DEPENDENCY, None): 105,
    (Category.VERSION_INCOMPATIBILITY, None): 58,
    (Category.VOLUME_MOUNTING, None): 30,
}


def _normalize_name(text: str) -> str:
    return re.sub(r"[^a-z0-9]", "", text.lower())


@dataclass(frozen=True, order=True)
class DefectCategory:
    """A top-level category with an optional sub-category."""

    category: Category
    sub_category: Optional[SubCategory] = None

    def __post_init__(self) -> None:
        if self.sub_category is not None:
            allowed = SUB_CATEGORIES.get(self.category, ())
            if self.sub_category not in allowed:
                raise ValueError(
                    f"sub-category {self.sub_category.value} is not defined "
                    f"for {self.category.value}"
                )

    def __str__(self) -> str:
        if self.sub_category is None:
            return self.category.value
        return f"{self.category.value}/{self.sub_category.value}"

    @property
    def top(self) -> "DefectCategory":
        return DefectCategory(self.category)

    @classmethod
    def parse(cls, text: str, sub: Optional[str] = None) -> "DefectCategory":
        """Parse ``"Data Fields/Syntax"``, ``"DataFields"``, ``"orphanism"`` and friends."""
        if "/" in text and not sub:
            text, sub = text.split("/", 1)
        key = _normalize_name(text)
        for cat in Category:
            if _normalize_name(cat.value) == key:
                break
        else:
            raise ValueError(f"unknown defect category: {text!r}")
        if sub is None or not sub.strip() or sub.strip().upper() == "N/A":
            return cls(cat)
        skey = _normalize_name(sub)
        for sc in SubCategory:
            if _normalize_name(sc.value) == skey:
                return cls(cat, sc)
        raise ValueError(f"unknown sub-category: {sub!r}")


class Consequence(str, enum.Enum):
    CW = "CW"
    CI = "CI"
    CRASH = "Crash"
    DI = "DI"
    EUD = "EUD"
    HANG = "Hang"
    IAG = "IAG"
    INOP = "InOp"
    IR = "IR"
    OUTAGE = "Outage"
    PERFORMANCE = "Performance"
    UR = "UR"

    @property
    def definition(self) -> str:
        return CONSEQUENCE_DEFINITIONS[self][1]

    @property
    def long_name(self) -> str:
        return CONSEQUENCE_DEFINITIONS[self][0]


CONSEQUENCE_DEFINITIONS: dict[Consequence, tuple[str, str]] = {
    Consequence.CW: (
        "Compiler Warning",
        "The consequence of obtaining warning messages from the compilation engine.",
    ),
    Consequence.CI: (
        "Configuration Inexecutability",
        "The consequence of running the Kubernetes cluster with incorrect "
        "configurations. In this case, configurations specified in scripts are "
        "not executed or are overridden.",
    ),
    Consequence.CRASH: (
        "Crash",
        "The consequence of a Kubernetes operation being terminated abruptly.",
    ),
    Consequence.DI: (
        "Diagnose Inability",
        "The consequence of not being able to diagnose failures or crashes.",
    ),
    Consequence.EUD: (
        "Exposure of Unauthorized Data",
        "The consequence when unauthorized users get access to data.",
    ),
    Consequence.HANG: ("Hang", "The consequence when an operation is unresponsive."),
    Consequence.IAG: (
        "Incorrect Artifact Generation",
        "The consequence of generating an artifact incorrectly because of a defect.",
    ),
    Consequence.INOP: (
        "Incorrect Operations",
        "The consequence when Kubernetes-related operations are executed incorrectly.",
    ),
    Consequence.IR: (
        "Incorrect Rendering",
        "The consequence of generating an incorrect display for the Kubernetes dashboard.",
    ),
    Consequence.OUTAGE: (
        "Outage",
        "The consequence when a Kubernetes object is unavailable when requested by users.",
    ),
    Consequence.PERFORMANCE: (
        "Performance",
        "The consequence of incurring unexpected usage of CPU and memory.",
    ),
    Consequence.UR: (
        "Unpredictable Responses",
        "The consequence of providing unpredictable responses to the user, such as "
        "conducting unpredictable routing of traffic and obtaining unpredictable "
        "responses from pods.",
    ),
}


class FixPattern(str, enum.Enum):
    ACS = "ACS"
    CVC = "CVC"
    DF = "DF"
    EVF = "EVF"
    OM = "OM"
    PM = "PM"
    RELOCATION = "Relocation"
    RF = "RF"
    SF = "SF"

    @property
    def definition(self) -> str:
        return FIX_PATTERN_DEFINITIONS[self][1]

    @property
    def long_name(self) -> str:
        return FIX_PATTERN_DEFINITIONS[self][0]


FIX_PATTERN_DEFINITIONS: dict[FixPattern, tuple[str, str]] = {
    FixPattern.ACS: (
        "Adding Conditional Statements",
        "This fix pattern corresponds to adding conditional statements.",
    ),
    FixPattern.CVC: (
        "Configuration Value Changes",
        "This fix pattern corresponds to changing configuration values.",
    ),
    FixPattern.DF: (
        "Directive Fix",
        "This fix pattern corresponds to fixing a template directive in order to "
        "populate an YAML file with the correct configuration values.",
    ),
    FixPattern.EVF: (
        "Environment Variable Fix",
        "This fix pattern corresponds to changing environment variables used for "
        "the container runtime.",
    ),
    FixPattern.OM: (
        "Object Modification",
        "This fix pattern corresponds to the creation or deletion of Kubernetes objects.",
    ),
    FixPattern.PM: (
        "Property Modification",
        "This fix pattern corresponds to property addition or property deletion "
        "for a certain Kubernetes object.",
    ),
    FixPattern.RELOCATION: (
        "Relocation",
        "This fix pattern corresponds to relocation of Kubernetes objects, paths, "
        "and properties.",
    ),
    FixPattern.RF: (
        "Rule Fix",
        "This fix pattern corresponds to rules used for setting up access control "
        "policies using apiGroups, resources, and/or verbs, such as 'get', 'list', "
        "'create', and 'delete'.",
    ),
    FixPattern.SF: ("Syntax Fix", "This fix pattern corresponds to fixing syntax issues."),
}

# Column order matters: ties in the modal lookup go to the leftmost column.
CONSEQUENCE_COLUMNS: tuple[Consequence, ...] = tuple(Consequence)
FIX_PATTERN_COLUMNS: tuple[FixPattern, ...] = tuple(FixPattern)

_ = 0  # rendered as '-' in the source table

CONSEQUENCE_COUNTS: dict[Category, tuple[int, ...]] = {
    #                                 CW  CI  Crash DI EUD Hang IAG InOp IR Outage Perf UR
    Category.CONDITIONAL:            (_,  9,  13,  _,  _,  1,   9,  1,   _, 6,     _,   1),
    Category.CONTAINER_PROVISIONING: (_,  7,  4,   1,  _,  2,   1,  8,   _, 24,    4,   1),
    Category.CUSTOM_RESOURCE:        (_,  3,  13,  6,  _,  1,   2,  6,   _, 13,    2,   _),
    Category.DATA_FIELDS:            (1,  3,  57,  _,  _,  3,   _,  6,   _, 15,    2,   _),
    Category.ENTITY_REFERENCING:     (_,  19, 34,  5,  _,  1,   2,  25,  2, 26,    7,   4),
    Category.INCORRECT_HELMING:      (_,  8,  1,   _,  _,  _,   _,  _,   _, 3,     _,   1),
    Category.NAMESPACES:             (_,  _,  1,   _,  _,  _,   _,  11,  _, 3,     _,   _),
    Category.ORPHANISM:              (_,  _,  1,   _,  _,  _,   _,  2,   _, _,     7,   _),
    Category.POD_SCHEDULING:         (_,  1,  1,   _,  _,  _,   _,  3,   _, 4,     3,   _),
    Category.PROBING:                (_,  1,  3,   _,  _,  _,   _,  _,   _, 12,    2,   4),
    Category.PROPERTY_ANNOTATION:    (_,  _,  2,   2,  _,  1,   _,  3,   _, 3,     1,   _),
    Category.SECURITY:               (1,  _,  2,   4,  9,  1,   _,  63,  _, 12,    _,   _),
    Category.UNSATISFIED_DEPENDENCY: (_,  1,  6,   7,  _,  6,   _,  46,  _, 29,    7,   3),
    Category.VERSION_INCOMPATIBILITY:(7,  _,  17,  2,  _,  1,   1,  13,  _, 15,    _,   2),
    Category.VOLUME_MOUNTING:        (1,  _,  6,   2,  _,  1,   _,  7,   _, 13,    _,   _),
}
CONSEQUENCE_TOTALS: tuple[int, ...] = (10, 52, 161, 29, 9, 18, 15, 194, 2, 178, 35, 16)

FIX_PATTERN_COUNTS: dict[Category, tuple[int, ...]] = {
    #                                 ACS CVC DF  EVF OM  PM  Reloc RF  SF
    Category.CONDITIONAL:            (13, _,  27, _,  _,  _,  _,    _,  _),
    Category.CONTAINER_PROVISIONING: (1,  32, 3,  9,  1,  4,  1,    1,  _),
    Category.CUSTOM_RESOURCE:        (3,  9,  3,  _,  2,  29, _,    _,  _),
    Category.DATA_FIELDS:            (4,  8,  23, 1,  4,  12, 1,    _,  34),
    Category.ENTITY_REFERENCING:     (10, 58, 41, 2,  _,  7,  4,    3,  _),
    Category.INCORRECT_HELMING:      (_,  _,  9,  1,  _,  3,  _,    _,  _),
    Category.NAMESPACES:             (_,  2,  3,  1,  1,  6,  _,    2,  _),
    Category.ORPHANISM:              (_,  3,  1,  _,  5,  _,  _,    1,  _),
    Category.POD_SCHEDULING:         (2,  _,  1,  _,  _,  9,  _,    _,  _),
    Category.PROBING:                (1,  6,  _,  _,  _,  15, _,    _,  _),
    Category.PROPERTY_ANNOTATION:    (2,  6,  1,  _,  _,  3,  _,    _,  _),
    Category.SECURITY:               (1,  4,  3,  _,  2,  11, _,    71, _),
    Category.UNSATISFIED_DEPENDENCY: (11, 11, 2,  5,  16, 25, 2,    33, _),
    Category.VERSION_INCOMPATIBILITY:(14, 32, 5,  _,  1,  4,  2,    _,  _),
    Category.VOLUME_MOUNTING:        (4,  3,  1,  _,  _,  20, 2,    _,  _),
}
FIX_PATTERN_TOTALS: tuple[int, ...] = (66, 174, 123, 19, 32, 148, 12, 111, 34)

del _

TOTAL_DEFECTS = 719


def _modal(row: tuple[int, ...], columns: tuple):
    best = max(row)
    return columns[row.index(best)]


def _top(category: "DefectCategory | Category") -> Category:
    return category.category if isinstance(category, DefectCategory) else Category(category)


def default_consequence(category: DefectCategory | Category) -> Consequence:
    """Most frequent consequence observed for ``category`` (leftmost column on ties)."""
    return _modal(CONSEQUENCE_COUNTS[_top(category)], CONSEQUENCE_COLUMNS)


def default_fix_pattern(category: DefectCategory | Category) -> FixPattern:
    """Most frequent fix pattern observed for ``category`` (leftmost column on ties)."""
    return _modal(FIX_PATTERN_COUNTS[_top(category)], FIX_PATTERN_COLUMNS)
