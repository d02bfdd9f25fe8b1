"""Energy models, meshes and the two discrete-functional backends."""
from ..errors import InvalidInputError
from .explicit import (ExplicitFunctional, TruncatedSequenceFunctional, build_truncated,
                       fixture, nearest_nonzero_critical)
from .galerkin import (DiscreteFunctional, GalerkinFunctional, assemble, critical_exponent,
                       sobolev_conjugate)
from .mesh import Mesh, interval_mesh, rectangle_mesh
from .nonlinearity import GModel
from .psi import PsiModel, check_sandwich, psi_derivatives, sandwich_constants


def eval_f(F, u):
    return F.value(u)


def eval_grad(F, u):
    return F.gradient(u)


def eval_hess(F, u):
    return F.hessian(u)


def h_gram(F, ubar):
    return F.h_gram(ubar)


__all__ = [
    "DiscreteFunctional", "ExplicitFunctional", "GalerkinFunctional", "GModel", "InvalidInputError",
    "Mesh", "PsiModel", "TruncatedSequenceFunctional", "assemble", "build_truncated",
    "check_sandwich", "critical_exponent", "eval_f", "eval_grad", "eval_hess", "fixture", "h_gram",
    "interval_mesh", "nearest_nonzero_critical", "psi_derivatives", "rectangle_mesh",
    "sandwich_constants", "sobolev_conjugate",
]
