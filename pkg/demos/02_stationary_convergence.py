"""
Stationary convergence study
============================

Solve a steady advection problem with a known smooth solution on a sequence of
uniformly refined criss-cross meshes and watch the L2 error fall like h^(p+1).
Then switch on the slope limiters and see what they cost in accuracy.
"""
from dgadvect.mesh import generate_criss_cross, refine_uniform
from dgadvect.solver import compute_eoc, convergence_problem, l2_error, solve_stationary

problem = convergence_problem()


def study(p, limiter="none", levels=4):
    mesh = generate_criss_cross(3, 3)
    errors, hs = [], []
    for j in range(levels + 1):
        if j:
            mesh = refine_uniform(mesh)
        C = solve_stationary(problem, mesh, p, limiter)
        errors.append(l2_error(mesh, C, problem.exact))
        hs.append(mesh.h)
    return errors, compute_eoc(errors, hs)


def show(label, errors, eoc):
    print(label)
    for j, (e, r) in enumerate(zip(errors, eoc)):
        print(f"  j={j}  error {e:.3e}  eoc {'---' if r is None else f'{r:.2f}'}")


###############################################################################
# Without a limiter
# -----------------
# The direct sparse solve gives optimal order p + 1 for every p.

for p in range(4):
    show(f"p = {p}, no limiter", *study(p))

###############################################################################
# With limiters
# -------------
# The linear limiter keeps at most the linear part wherever it acts, so p = 2
# and p = 3 end up with nearly the same error. The hierarchical limiter
# leaves smooth solutions almost untouched.

for p in (2, 3):
    show(f"p = {p}, linear limiter", *study(p, "linear"))
show("p = 2, hierarchical limiter", *study(2, "hierarchical"))
show("p = 2, strict limiter", *study(2, "strict"))
