"""Contextuality of possibilistic empirical models via the Čech cohomology of their joint tower."""

from . import core
from .cohomology import (
    delta0,
    h0_dimension,
    is_clc_at,
    is_csc,
    obstruction_vanishes,
    vanishing_sections,
)
from .cycles import (
    InvariantReport,
    Path,
    SearchReport,
    cyclic_scenario,
    enumerate_cycles,
    find_contextual_cycle,
    full_invariant,
    is_chordal_path,
    is_cyclic_scenario,
    is_improper_3cycle,
    random_cover,
    random_model,
    search_counterexample,
)
from .errors import *  # noqa: F401,F403
from .gf2 import Gf2System, Gf2Vector, gf2_solve
from .io import ModelDocument, emit_model, export_bundle_dot, parse_model
from .joint import (
    JointLevel,
    LeveledSection,
    clc_k,
    csc_k,
    flatten,
    joint_model,
    joint_scenario,
    lc_k,
    sc_k,
    sections_containing,
    tower,
)
from .model import (
    CompatibleFamily,
    EmpiricalModel,
    Verdict,
    build_model,
    extend_to_global,
    full_model,
    is_lc_at,
    is_sc,
    restrict_model,
    sections_at,
)
from .scenario import (
    CoverGraph,
    MeasurementScenario,
    Section,
    build_scenario,
    event_sections,
    graham_reduce,
    intersection_graph,
    is_bell_type,
    is_connected,
    restrict_section,
)
from .zoo import ZooEntry, zoo

__version__ = "0.1.0"
