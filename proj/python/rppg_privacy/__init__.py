"""Privacy-preserving rPPG toolkit: keyed shuffle + blur, CHROM/POS, Welch HR."""

from ._rppg import (
    RppgError,
    bandpass,
    chrom,
    estimate_hr,
    estimate_signal,
    gaussian_blur,
    gaussian_kernel,
    hr_metrics,
    inverse_key,
    keygen,
    log10_keyspace,
    mean_traces,
    perturb,
    pos,
    read_clipfile,
    shuffle_domain,
    shuffle_patches,
    shuffle_pixels,
    smooth_l1,
    smooth_l1_grad,
    synthesize_clip,
    unshuffle_patches,
    unshuffle_pixels,
    welch_psd,
    write_clipfile,
)

__all__ = [name for name in dir() if not name.startswith("_")]
