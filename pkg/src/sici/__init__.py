"""Conditional probability tables for large parent sets from ICI and surjective-ICI local structures."""

from .analysis import ParamReport, growth_table, parameter_count, shared_row_groups
from .compiler import (
    as_ds_sici, compile_ds_sici, compile_hassall_binary, compile_ici, compile_ls_sici, compile_noisy_max,
    compile_noisy_or, compile_pici, compile_pici_average, compile_scm, compile_spec, compile_surjective_noisy_or,
    compile_us_sici, hassall_as_pici, noisy_or_explicit_inhibitors,
)
from .core import (
    BINARY, ConfigIndexer, Cpt, StateSpace, VariableDecl, config_of, cpt_entry_count, index_of, validate_cpt,
)
from .document import SpecDocument, parse_document, parse_spec, serialize_spec
from .errors import *  # noqa: F401,F403
from .gates import Gate, eval_gate, gate_to_cpt, parse_gate
from .model import (
    DsSici, HassallBinary, Ici, LocalSpec, LsSici, NoisyMax, NoisyOr, Pici, PiciAverage, Scm, SurjectiveNoisyOr,
    UsSici, VARIANTS,
)
from .oracle import oracle_cpt
from .structure import Dag, d_separated, induced_dag, verify_ci_statements
from .surjection import Surjection, contiguous_reorder
