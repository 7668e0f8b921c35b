"""
Reference element building blocks
=================================

The solver works on the unit triangle with an orthonormal modal basis and
symmetric quadrature rules. This script checks both by hand.
"""
import numpy as np

from dgadvect.basis import modal_values, multi_index_table, num_local_dofs
from dgadvect.quadrature import quad_rule_2d

###############################################################################
# Quadrature rules
# ----------------
# A rule of order q integrates every monomial of degree <= q exactly. The
# reference triangle has area 1/2, so the weights sum to 1/2.

for order in (1, 4, 9):
    rule = quad_rule_2d(order)
    print(f"order {order}: {rule.num_points:2d} points, weight sum {rule.weights.sum():.15f}")

rule = quad_rule_2d(6)
x, y = rule.points.T
print("int x^3 y^2 =", rule.weights @ (x**3 * y**2), "exact", 3 * 2 * 2 / 5040)

###############################################################################
# Modal basis
# -----------
# Polynomials up to degree p give N = (p + 1)(p + 2) / 2 functions. They are
# ordered by total degree, so truncating to a lower p is just slicing.

p = 3
print(f"p = {p}: N = {num_local_dofs(p)}, degree pairs {multi_index_table(p)}")

rule = quad_rule_2d(2 * p)
phi = modal_values(p, rule.points)
gram = np.einsum("r,ri,rj->ij", rule.weights, phi, phi)
print("max |Gram - I| =", np.abs(gram - np.eye(num_local_dofs(p))).max())

# The first function is the constant sqrt(2), so the mean of c_h on an element
# is sqrt(2) times its first coefficient.
print("phi_1 =", phi[0, 0], "sqrt(2) =", np.sqrt(2))
