"""Blind 4x4-block image watermarking guided by a similarity model.

Payload bits ride on the difference of one AC coefficient pair per block,
quantized onto a strength-scaled lattice. Embedding shifts are chosen by
maximizing a closed-form structural-similarity objective, either per
block or jointly across sliding measurement windows.
"""

from .blocks import (BLOCK_SIZE, ImagePlane, assemble_blocks, dct2, idct2,
                     partition_blocks, window_at)
from .complexity import (ComplexityReport, blocks_covered, complexity_report,
                         gaussian_window_count, mean_ops_per_window,
                         non_overlapped_window_count, overlapped_ops_formula,
                         overlapped_window_count, semi_window_count,
                         window_count)
from .metric import (DEFAULT_CONSTANTS, GAUSSIAN_OVERLAPPED_11, MEASURE_MODES,
                     NON_OVERLAPPED_4, SEMI_OVERLAPPED_8_STRIDE_4,
                     SsimConstants, SsimReport, WindowMode, gaussian_window,
                     global_ssim, measure_all_modes, mode_from_label,
                     overlapped_square, perturbation_constant,
                     ssim_cross_matrix, ssim_dct, ssim_pair_shift,
                     ssim_spatial, window_positions)
from .optimize import (ImageSolutions, Objective, SurfaceSample, WindowVote,
                       best_eps_for_k, candidate_ks, optimize_block,
                       optimize_image, ssim_surface)
from .pgm import PgmError, load_image, quantize, save_image
from .qim import (BlockSolution, DEFAULT_PAIR, EmbedConfig,
                  PAYLOAD_GENERATOR, as_bits, embed_bit, embed_payload,
                  extract_bit, extract_payload, lattice_multiplier,
                  lattice_residuals, random_bits, read_bits_binary,
                  read_bits_text, sigma_from_eps, wrap_positive,
                  write_bits_binary, write_bits_text)

__version__ = "0.1.0"
