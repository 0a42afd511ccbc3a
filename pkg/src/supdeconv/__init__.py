"""Supersmooth deconvolution density estimation and its sup-distance limit law."""

from .decomposition import (
    DecompositionConfig,
    DecompositionResult,
    asymptotic_integral_check,
    decompose,
    expected_decomposition,
    main_term,
    reconstruct_check,
    remainder_r1,
    remainder_r2,
    remainder_r3,
    u_function,
)
from .errors import (
    ConfigError,
    DeconvError,
    DomainError,
    GridTooCoarse,
    OverflowGuard,
    QuadratureError,
    TheoremInapplicable,
)
from .estimator import (
    EstimateGrid,
    EstimatorConfig,
    SampleSet,
    deconv_estimate,
    expected_estimate,
    kernel_sum_estimate,
    phi_emp,
)
from .harness import (
    ExperimentConfig,
    generate_data,
    run_band_coverage,
    run_process_convergence,
    run_remainder_diagnostics,
    run_sup_convergence,
)
from .limitlaw import (
    cosine_process_sup,
    ks_one_sample,
    ks_two_sample,
    rayleigh_cdf,
    rayleigh_quantile,
    sample_w_process,
    sup_abs_w_exact_sample,
)
from .models import (
    ErrorModel,
    KernelModel,
    SignalModel,
    gamma_fn,
    gaussian_error,
    gaussian_laplace_mix_error,
    gaussian_mixture_signal,
    gaussian_signal,
    phi_k_eval,
    polynomial_kernel,
    sinc_flat_kernel,
    validate_conditions,
    zeta,
)
from .quadrature import QuadratureSpec
from .supstat import (
    BandResult,
    SupResult,
    confidence_band,
    limit_constant,
    normalizer_a_n,
    sup_distance,
    sup_statistic,
)

__version__ = "0.1.0"
