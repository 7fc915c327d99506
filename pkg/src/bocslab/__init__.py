"""Exact computations with A∞-algebras, triangular bocses, twisted modules and A∞-modules."""
from .scalars import QQ, BaseRing, Field, FpElement
from .graded import GradedSpace, HomMap, direct_sum, identity, tensor
from .ainfty import (AInfAlgebra, AInfAlgHomotopy, AInfAlgMorphism, CheckResult, check_alg_homotopy,
                     check_alg_morphism, check_stasheff, sign_translate)
from .bocs import BarBocs, TriangularBocs, bar_construct, check_bocs_axioms
from .gmodb import GModMorphism, compose, hat_delta, invert
from .twisted import (TwistedModule, TwistedMorphism, check_homotopy, check_mc, cone, homotopy_inverse,
                      jfun, nullhomotopy, shift, split_idempotent, straighten_conflation)
from .ainfmod import (AInfModMorphism, AInfModule, bridge_morphism, check_mod_homotopy, check_mod_morphism,
                      check_module, compose_mod, delta_inf, from_twisted, to_twisted)

__all__ = [
    "QQ",
    "BaseRing",
    "Field",
    "FpElement",
    "GradedSpace",
    "HomMap",
    "direct_sum",
    "identity",
    "tensor",
    "AInfAlgebra",
    "AInfAlgHomotopy",
    "AInfAlgMorphism",
    "CheckResult",
    "check_alg_homotopy",
    "check_alg_morphism",
    "check_stasheff",
    "sign_translate",
    "BarBocs",
    "TriangularBocs",
    "bar_construct",
    "check_bocs_axioms",
    "GModMorphism",
    "compose",
    "hat_delta",
    "invert",
    "TwistedModule",
    "TwistedMorphism",
    "check_homotopy",
    "check_mc",
    "cone",
    "homotopy_inverse",
    "jfun",
    "nullhomotopy",
    "shift",
    "split_idempotent",
    "straighten_conflation",
    "AInfModMorphism",
    "AInfModule",
    "bridge_morphism",
    "check_mod_homotopy",
    "check_mod_morphism",
    "check_module",
    "compose_mod",
    "delta_inf",
    "from_twisted",
    "to_twisted",
]

__version__ = "0.1.0"
