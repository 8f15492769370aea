"""Parameterization-invariant Lagrangian mechanics and field theory.

The heavy lifting happens in the compiled extension; this package re-exports
it and adds a convenience wrapper that parses run reports into dictionaries.
"""

import json as _json

from varik._core import (  # noqa: F401
    ArealStructure,
    ComplexArealStructure,
    ComplexPatch,
    Curve,
    Expression,
    ExpressionParseError,
    FinslerStructure,
    KawaMechStructure,
    NonConvergent,
    Patch,
    SingularHessianError,
    __version__,
    check_homogeneity,
    check_homogeneity_field,
    check_zermelo,
    el2_residual,
    el_field_residual,
    el_field_residual_complex,
    el_residual,
    finsler_length,
    fk_length,
    kawaguchi_area,
    lift2_conventional,
    lift_conventional,
    lift_field_conventional,
    list_builtins,
    schema,
    solve_bvp,
)
from varik import _core as _impl


def run(problem, overrides=()):
    """Run a problem file or bundled problem.

    Returns (exit_code, report) where report is the parsed JSON report.
    Raises RuntimeError when the run errored before producing a report.
    """
    code, report, error = _impl.run(problem, list(overrides))
    if code == 1:
        raise RuntimeError(error or "varik run failed")
    return code, _json.loads(report)
