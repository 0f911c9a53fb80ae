"""Back-translation of finite sets of call-return trace prefixes into source programs."""

from .codegen import BackTranslation, back_translate, pipeline
from .harness import GenParams, generate_trace_set, verify_all_levels, verify_end_to_end
from .traces import (Event, Kind, TraceSet, WellFormednessError, call, check_well_formed,
                     control_flow_ok, filter_for_compartment, ret, wf_stack_trace)

__version__ = "0.1.0"

__all__ = [
    "BackTranslation", "back_translate", "pipeline",
    "GenParams", "generate_trace_set", "verify_all_levels", "verify_end_to_end",
    "Event", "Kind", "TraceSet", "WellFormednessError", "call", "check_well_formed",
    "control_flow_ok", "filter_for_compartment", "ret", "wf_stack_trace",
]
