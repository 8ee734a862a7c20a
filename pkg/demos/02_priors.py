"""
Random shapes from the priors
=============================

Draw latent fields from the Karhunen-Loeve and squared-exponential priors,
push them through the positivity maps and look at the resulting boundaries.
"""
import numpy as np

from scatterbayes import ErfMap, ExpMap, KLPriorSpec, LatentField, PeriodicGrid, SEPriorSpec, \
    TVSpec
from scatterbayes.prior import tv_seminorm
from scatterbayes.svgplot import Figure

grid = PeriodicGrid(128)
rng = np.random.default_rng(3)
c, s = np.cos(grid.nodes), np.sin(grid.nodes)

for prior, pos in [(KLPriorSpec(s=2.0), ExpMap()), (SEPriorSpec(0.5), ErfMap(2.0, 2.0))]:
    fig = Figure(f"{prior.kind} prior samples", "x1", "x2", equal_aspect=True)
    tvs = []
    for _ in range(5):
        r = prior.sample(grid, rng)
        q = pos.radius(r.values)
        tvs.append(tv_seminorm(r, TVSpec(1.0)))
        fig.line(q * c, q * s, closed=True)
    # the erf map keeps every radius inside (b - 1, a + b - 1)
    print(f"{prior.kind}: pointwise variance {prior.pointwise_variance():.3f}, "
          f"mean total variation of samples {np.mean(tvs):.2f}")
    with open(f"prior_{prior.kind}.svg", "w") as fh:
        fh.write(fig.to_svg())

# The total variation of cos t is exactly 4.
print("TV(cos t) =", tv_seminorm(LatentField(grid, c), TVSpec(1.0)))
