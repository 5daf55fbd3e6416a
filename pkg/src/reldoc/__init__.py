"""Finite relational doctrines: law checking, unique choice, completions,
quotients and compactification for monads with a relation lifting."""

from .builtins import (VCatDoctrine, VCategory, VRelDoctrine, WaltersDoctrine, doctrine_from_spec,
                       walters_completion)
from .category import Arrow, FunctionCategory, TableCategory
from .completion import (cauchy_reflector, check_sruc_section, check_three_way, factorizations_through_ruc,
                         find_singletons, map_category, ruc_doctrine)
from .doctrine import (Doctrine, TableDoctrine, check_doctrine_laws, check_graph_functoriality,
                       check_reindex_adjunction, is_extensional, structurally_equal, tabulate)
from .monads import (IdentityMonad, PowersetMonad, TSpace, check_monad, closure_phi, compactify,
                     em_closed_doctrine, tspaces)
from .morphism import OneArrow, check_one_arrow, enumerate_one_arrows
from .quantale import Quantale, boolean, chain, check_quantale_laws, powerset_frame, tropical_grid
from .quotients import equivalences, quotient_arrow
from .relprops import find_ruc_counterexample, functional_total, is_cauchy_complete, profile
from .report import CapExceeded, LawReport, PreconditionError, StructuralError

__all__ = [
    "Arrow", "CapExceeded", "Doctrine", "FunctionCategory", "IdentityMonad", "LawReport", "OneArrow",
    "PowersetMonad", "PreconditionError", "Quantale", "StructuralError", "TSpace", "TableCategory",
    "TableDoctrine", "VCatDoctrine", "VCategory", "VRelDoctrine", "WaltersDoctrine", "boolean",
    "cauchy_reflector", "chain", "check_doctrine_laws", "check_graph_functoriality", "check_monad",
    "check_one_arrow", "check_quantale_laws", "check_reindex_adjunction", "check_sruc_section",
    "check_three_way", "closure_phi", "compactify", "doctrine_from_spec", "em_closed_doctrine",
    "enumerate_one_arrows", "equivalences", "factorizations_through_ruc", "find_ruc_counterexample",
    "find_singletons", "functional_total", "is_cauchy_complete", "is_extensional", "map_category",
    "powerset_frame", "profile", "quotient_arrow", "ruc_doctrine", "structurally_equal", "tabulate",
    "tropical_grid", "tspaces", "walters_completion",
]
