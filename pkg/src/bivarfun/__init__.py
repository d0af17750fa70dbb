"""Bivariate and multivariate matrix functions by contour quadrature over
numerical ranges, with Frechet derivatives, Krylov approximation and
empirical certification of Crouzeix-Palencia type bounds."""

__version__ = "0.1.0"

from .config import DEFAULT, K_CP, Config, load_config
from .errors import (AccuracyWarning, AnalyticityError, BivarfunError,
                     EvaluationDomainError, ExpressionSyntaxError, OracleUnavailableError,
                     SingularMatrixError, SizeLimitError, SolverError)
from .linalg import (EigenDecomposition, as_matrix, eig, kron, load_matrix, resolvents,
                     save_matrix, solve, spectral_norm, unvec, vec)
from .fieldvals import (Circle, Ellipse, NumericalRangeApprox, boundary_point,
                        enclosing_contour, min_clearance, numrange)
from .funexpr import (DividedDifferenceExpr, FunExpr, MatrixFunExpr, analyticity_probe,
                      diff, divided_difference, evaluate, parse)
from .matfun import (BivariateOperator, QuadratureSpec, apply_bivariate, eval_bivariate,
                     eval_matrix_valued, eval_multivariate, eval_univariate, oracle_diag,
                     oracle_diag_univariate, polynomial_oracle)
from .frechet import (FrechetResult, frechet_block_oracle, frechet_finite_difference_check,
                      frechet_norm_and_bound, frechet_operator)
from .krylov import (ArnoldiDecomposition, KrylovApproxResult, apriori_error_bound, arnoldi,
                     bivariate_krylov, chebyshev_estimate)
from .certify import (CertificateReport, cauchy_dual, certify_ando, certify_bivariate,
                      certify_frechet, certify_multivariate, certify_univariate,
                      extremal_search, lemma_harness, standard_ensemble,
                      sup_on_range_product)
