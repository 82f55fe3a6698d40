"""Rate bounds and link-level simulation for modulo-lattice (Tomlinson-
Harashima) precoding on the multiuser MIMO downlink."""

__version__ = "0.1.0"

from .bounds import (NoiseModel, RatePoint, alpha_mmse, asymptote,
                     awgn_capacity, bound_gap_new_vs_original, bound_new,
                     bound_new_from_entropy, bound_original, shaping_loss_bits,
                     shaping_loss_db, snr_prime)
from .channel import (ChannelSample, RngStream, awgn, dpc_chain, gen_channel,
                      estimate_residual_variance, mod_t_channel,
                      run_multiuser_chain)
from .entropy import (EntropyBits, TruncatedGaussian, WrappedGaussian,
                      truncated_entropy_closed_form,
                      truncated_entropy_quadrature, truncated_pdf,
                      wrapped_entropy, wrapped_pdf)
from .modulo import Modulus, mod_t, t_from_power
from .numerics import (QuadratureError, QuadratureResult, erf, erfc,
                       integrate, std_normal_cdf, std_normal_pdf,
                       std_normal_ppf)
from .precoder import (PrecoderSet, SingularChannelError, lq_decompose,
                       receiver_decode, synthesize_mmse, synthesize_zf,
                       thp_encode)
from .rates import (PerUserSimResult, RateEstimate, exact_modt_rate,
                    exact_modt_rate_from_snr_prime, mc_mutual_info,
                    per_user_rate_sim)

__all__ = [name for name in dir() if not name.startswith("_")]
