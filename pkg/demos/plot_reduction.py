"""
Spatial reduction patterns
==========================

Feeding every pixel to its own pair of input neurons would need 546 inputs.
Reduction patterns merge pixels into groups whose spike trains are OR-ed
together, so a 13x21 frame can be summarised by a few dozen channels.
"""

import numpy as np

from pixelsnn import EncoderParams, build_pattern, encode_cluster, generate_synthetic

# small 7-wide, 5-tall frame to show the id layouts
for kind, params in [("column_stride", (7,)), ("row_stride", (5,)), ("box", (3, 2))]:
    p = build_pattern(kind, 5, 7, *params)
    print(f"{p.name}: {p.group_count} groups")
    print(p.assignment, end="\n\n")

###############################################################################
# Row stride 26 on the full frame walks down each 13-pixel column and wraps
# into the next, so two neighbouring columns share no group and the pattern
# repeats every other column.

p = build_pattern("row_stride", 13, 21, 26)
print(p.assignment[:, :4])

###############################################################################
# Encoding a cluster through the pattern gives 2 channels per group.

sample = generate_synthetic(1, seed=1)[0]
raster = encode_cluster(sample, EncoderParams(), p)
print(f"raster: {raster.n_channels} channels x {raster.n_timesteps} steps, "
      f"{int(raster.spikes.sum())} spikes")
active = np.flatnonzero(raster.spikes.any(axis=1))
print("active channels:", active.tolist())
