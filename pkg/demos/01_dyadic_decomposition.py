#!/usr/bin/env python3
"""Dyadic decomposition on the periodic grid, step by step.

Builds the cutoff family, splits a random band-limited function into
frequency blocks, and checks the three facts everything else rests on:
exact reconstruction, near-orthogonality of separated blocks, and the
two-sided gradient bracket on each block.
"""

import numpy as np

from lpwave import grid
from lpwave.dyadic import (bernstein_ratio, build_cutoffs, decompose,
                           reconstruct, sobolev_norm, sobolev_norm_multiplier)

N = 256
fam = build_cutoffs(N)

print("=" * 64)
print("cutoff family on a %d-point grid" % N)
print("=" * 64)
print(f"highest band nu_max = {fam.nu_max} "
      f"(band nu lives on 2^(nu-1) <= |xi| <= 2^(nu+1))")
covered = np.abs(fam.xi) <= 2.0 ** fam.nu_max
dev = np.max(np.abs(fam.phi.sum(axis=0)[covered] - 1.0))
print(f"partition of unity deviation on |xi| <= {2**fam.nu_max}: {dev:.2e}")

w = grid.random_band_limited(N, rng=7)
blocks = decompose(w, fam)

print()
print("block norms of a random band-limited function:")
for nu in range(len(blocks)):
    bar = "#" * int(40 * blocks.block_norm(nu) / grid.norm(w))
    print(f"  nu={nu}: {blocks.block_norm(nu):8.4f} {bar}")

err = grid.norm(reconstruct(blocks) - w) / grid.norm(w)
print(f"\nreconstruction error (sum of blocks vs original): {err:.2e}")
assert err < 1e-12

print("\ninner products of blocks two or more bands apart:")
worst = 0.0
for nu in range(len(blocks)):
    for mu in range(nu + 2, len(blocks)):
        worst = max(worst, abs(grid.inner(blocks.block(nu),
                                          blocks.block(mu))))
print(f"  worst |<w_nu, w_mu>| = {worst:.2e}  (scale ||w||^2 = "
      f"{grid.norm(w)**2:.1f})")

print("\ngradient-to-function ratio per block (bracket [2^(nu-1), 2^(nu+1)]):")
for nu in range(1, len(blocks)):
    if blocks.block_norm(nu) == 0.0:
        continue
    r = bernstein_ratio(blocks, nu)
    print(f"  nu={nu}: ratio {r:8.3f} in [{2**(nu-1):5d}, {2**(nu+1):5d}]")
    assert 2 ** (nu - 1) <= r <= 2 ** (nu + 1)

print("\nSobolev norms, dyadic proxy vs Fourier multiplier:")
for m in (0.0, 1.0, 2.0):
    proxy = sobolev_norm(w, m, fam)
    mult = sobolev_norm_multiplier(w, m)
    print(f"  m={m}: proxy {proxy:10.3f}  multiplier {mult:10.3f}  "
          f"ratio {proxy / mult:.3f}")

print("\nall dyadic checks passed")
