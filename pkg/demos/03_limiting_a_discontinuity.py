"""
Limiting a discontinuous profile
================================

Project the slotted cylinder, sharp cone and smooth hump onto a p = 2 space.
The raw projection over- and undershoots near the jumps. Each limiter keeps
the element means and pulls vertex values back into the range of the
neighbouring means.
"""
import numpy as np

from dgadvect.discretization import Discretization
from dgadvect.limiter import LimiterConfig
from dgadvect.mesh import generate_criss_cross
from dgadvect.projection import element_means
from dgadvect.solver import rotation_problem

problem = rotation_problem()
mesh = generate_criss_cross(32, 32)
disc = Discretization(mesh, 2)
C0 = disc.project(problem.initial)

# vertex values of c_h on every element
corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def report(label, C):
    v = disc.values_at_reference(C, corners)
    print(f"{label:13s} vertex range [{v.min():+.4f}, {v.max():+.4f}]  "
          f"mass {np.sum(mesh.area * element_means(C)):.12f}")


report("projection", C0)

###############################################################################
# The boundary datum is zero here, so the unconstrained limiters only look at
# neighbouring means. Mass is preserved to rounding.

for variant in ("linear", "hierarchical", "strict"):
    report(variant, disc.limit(C0, LimiterConfig(variant)))
